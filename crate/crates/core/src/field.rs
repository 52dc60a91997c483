//! Complex transverse fields sampled on a uniform cell-centred grid.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::format::fmt6;

/// Grid resolution and physical window for mode solving and propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Window width, µm.
    pub window_x: f64,
    /// Window height, µm.
    pub window_y: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nx: 256, ny: 256, window_x: 24.0, window_y: 24.0 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny)] {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be a power of two >= 16"
                )));
            }
        }
        if !(self.window_x > 0.0 && self.window_y > 0.0) {
            return Err(Error::InvalidGrid("window extents must be positive".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.window_x / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.window_y / self.ny as f64
    }

    /// Cell-centre x coordinate of column `ix`, µm, with the origin at the window centre.
    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 + 0.5 - self.nx as f64 / 2.0) * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 + 0.5 - self.ny as f64 / 2.0) * self.dy()
    }
}

/// A complex scalar field on an `nx × ny` grid, stored row-major (`iy * nx + ix`).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub nx: usize,
    pub ny: usize,
    /// Grid spacing, µm.
    pub dx: f64,
    pub dy: f64,
    pub amplitudes: Vec<Complex64>,
    /// Vacuum wavelength, nm.
    pub wavelength: f64,
    /// Index of the medium the field propagates in.
    pub medium_index: f64,
}

impl SampledField {
    pub fn zeros(grid: &GridSpec, wavelength: f64, medium_index: f64) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            dx: grid.dx(),
            dy: grid.dy(),
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.nx * grid.ny],
            wavelength,
            medium_index,
        }
    }

    /// Samples `f(x, y)` (µm, window-centred) at every cell centre.
    pub fn from_fn(
        grid: &GridSpec,
        wavelength: f64,
        medium_index: f64,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Self {
        let mut field = Self::zeros(grid, wavelength, medium_index);
        for iy in 0..grid.ny {
            let y = grid.y(iy);
            for ix in 0..grid.nx {
                field.amplitudes[iy * grid.nx + ix] = f(grid.x(ix), y);
            }
        }
        field
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            window_x: self.dx * self.nx as f64,
            window_y: self.dy * self.ny as f64,
        }
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.amplitudes[iy * self.nx + ix]
    }

    /// ∑|E|²·dA.
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.cell_area()
    }

    /// Scales the field in place to unit power.
    pub fn normalize(&mut self) -> Result<()> {
        let p = self.power();
        if p <= 0.0 || !p.is_finite() {
            return Err(Error::ZeroField);
        }
        let s = 1.0 / p.sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(())
    }

    /// Index `(ix, iy)` of the sample with the largest modulus.
    pub fn peak_index(&self) -> (usize, usize) {
        let (i, _) = self
            .amplitudes
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, a)| if a.norm() > best.1 { (i, a.norm()) } else { best });
        (i % self.nx, i / self.nx)
    }

    /// Largest modulus on the outermost ring of samples divided by the peak modulus.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0f64;
        for ix in 0..self.nx {
            edge = edge.max(self.at(ix, 0).norm()).max(self.at(ix, self.ny - 1).norm());
        }
        for iy in 0..self.ny {
            edge = edge.max(self.at(0, iy).norm()).max(self.at(self.nx - 1, iy).norm());
        }
        edge / peak
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.wavelength == other.wavelength
    }

    /// Writes `x_um,y_um,re,im`, one row per sample, x varying fastest.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let grid = self.grid();
        writeln!(out, "x_um,y_um,re,im")?;
        for iy in 0..self.ny {
            let y = grid.y(iy);
            for ix in 0..self.nx {
                let a = self.at(ix, iy);
                writeln!(out, "{},{},{},{}", fmt6(grid.x(ix)), fmt6(y), fmt6(a.re), fmt6(a.im))?;
            }
        }
        Ok(())
    }
}

/// Normalized inner product ⟨a,b⟩ / (‖a‖·‖b‖).
pub fn overlap(a: &SampledField, b: &SampledField) -> Result<Complex64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    let (mut dot, mut na, mut nb) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
        dot += x.conj() * y;
        na += x.norm_sqr();
        nb += y.norm_sqr();
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &GridSpec, w: f64) -> SampledField {
        SampledField::from_fn(grid, 780.0, 1.0, |x, y| {
            Complex64::new((-(x * x + y * y) / (w * w)).exp(), 0.0)
        })
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::default().validate().is_ok());
        let bad = GridSpec { nx: 100, ..GridSpec::default() };
        assert!(matches!(bad.validate(), Err(Error::InvalidGrid(_))));
        let small = GridSpec { nx: 8, ny: 8, ..GridSpec::default() };
        assert!(small.validate().is_err());
    }

    #[test]
    fn coordinates_are_symmetric() {
        let g = GridSpec { nx: 16, ny: 32, window_x: 8.0, window_y: 8.0 };
        assert!((g.x(0) + g.x(15)).abs() < 1e-12);
        assert!((g.y(0) + g.y(31)).abs() < 1e-12);
    }

    #[test]
    fn self_overlap_is_one() {
        let g = GridSpec { nx: 64, ny: 64, window_x: 16.0, window_y: 16.0 };
        let f = gaussian(&g, 2.0);
        let q = overlap(&f, &f).unwrap();
        assert!((q - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn hermite_gauss_orthogonal() {
        let g = GridSpec { nx: 64, ny: 64, window_x: 16.0, window_y: 16.0 };
        let hg00 = gaussian(&g, 2.0);
        let hg10 = SampledField::from_fn(&g, 780.0, 1.0, |x, y| {
            Complex64::new(x * (-(x * x + y * y) / 4.0).exp(), 0.0)
        });
        assert!(overlap(&hg00, &hg10).unwrap().norm() < 1e-6);
    }

    #[test]
    fn overlap_errors() {
        let g = GridSpec { nx: 16, ny: 16, window_x: 4.0, window_y: 4.0 };
        let g2 = GridSpec { nx: 32, ..g };
        let z = SampledField::zeros(&g, 780.0, 1.0);
        let f = gaussian(&g, 1.0);
        assert_eq!(overlap(&f, &z), Err(Error::ZeroField));
        assert_eq!(overlap(&f, &gaussian(&g2, 1.0)), Err(Error::GridMismatch));
    }

    #[test]
    fn normalize_gives_unit_power() {
        let g = GridSpec { nx: 32, ny: 32, window_x: 8.0, window_y: 8.0 };
        let mut f = gaussian(&g, 1.0);
        f.normalize().unwrap();
        assert!((f.power() - 1.0).abs() < 1e-12);
        let mut z = SampledField::zeros(&g, 780.0, 1.0);
        assert_eq!(z.normalize(), Err(Error::ZeroField));
    }

    #[test]
    fn csv_layout() {
        let g = GridSpec { nx: 16, ny: 16, window_x: 4.0, window_y: 4.0 };
        let f = gaussian(&g, 1.0);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x_um,y_um,re,im"));
        assert_eq!(text.lines().count(), 1 + 256);
        assert!(lines.next().unwrap().starts_with("-1.87500,-1.87500,"));
    }
}
