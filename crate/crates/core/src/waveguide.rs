//! Fundamental guided mode of the ridge waveguide.
//!
//! The scalar transverse Helmholtz operator `∇²E + k²n²E = β²E` is discretized
//! with the 5-point stencil on a cell-centred grid (field vanishing outside the
//! window). Each cell carries the area-averaged permittivity of the layers it
//! intersects. The largest eigenpair is found by power iteration on
//! `(σ − A)⁻¹` with `σ = k²·n_core²`, which bounds the spectrum from above, so the
//! shifted operator is positive definite and is factored once by banded Cholesky.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{GridSpec, SampledField};

/// Ridge cross-section. The origin is the ridge centre.
///
/// Layers from bottom to top: exterior half-space; lower cladding
/// (`cladding_thickness`, full width); the ridge of width `ridge_width` and
/// height `ridge_height`, made of the core (`core_thickness`) with upper
/// cladding filling the rest of the ridge. Everything else is exterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideGeometry {
    /// µm
    pub ridge_width: f64,
    /// µm
    pub ridge_height: f64,
    /// µm
    pub core_thickness: f64,
    /// µm
    pub cladding_thickness: f64,
    pub n_core: f64,
    pub n_clad: f64,
    pub n_exterior: f64,
    /// nm
    pub wavelength: f64,
}

impl WaveguideGeometry {
    /// The 4 µm × 4 µm AlGaAs ridge at 780 nm.
    pub fn reference_ridge() -> Self {
        Self {
            ridge_width: 4.0,
            ridge_height: 4.0,
            core_thickness: 4.0,
            cladding_thickness: 4.0,
            n_core: 3.155,
            n_clad: 3.145,
            n_exterior: 1.0,
            wavelength: 780.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::InvalidGeometry(m.to_string()));
        // Equal core and cladding indices are accepted; the solver then reports NoGuidedMode.
        if !(self.n_core >= self.n_clad && self.n_clad >= self.n_exterior && self.n_exterior >= 1.0) {
            return err("indices must satisfy n_core >= n_clad >= n_exterior >= 1");
        }
        for (name, v) in [
            ("ridge_width", self.ridge_width),
            ("ridge_height", self.ridge_height),
            ("core_thickness", self.core_thickness),
            ("cladding_thickness", self.cladding_thickness),
            ("wavelength", self.wavelength),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive")));
            }
        }
        if self.core_thickness > self.ridge_height {
            return err("core_thickness exceeds ridge_height");
        }
        Ok(())
    }

    /// Rectangles `(x0, x1, y0, y1, n)` that differ from the exterior index.
    fn layers(&self) -> [(f64, f64, f64, f64, f64); 3] {
        let h = self.ridge_height / 2.0;
        let w = self.ridge_width / 2.0;
        let core_top = -h + self.core_thickness;
        [
            (f64::NEG_INFINITY, f64::INFINITY, -h - self.cladding_thickness, -h, self.n_clad),
            (-w, w, -h, core_top, self.n_core),
            (-w, w, core_top, h, self.n_clad),
        ]
    }

    /// Cell-averaged permittivity `n²` on the grid, row-major.
    pub fn permittivity_map(&self, grid: &GridSpec) -> Vec<f64> {
        let (dx, dy) = (grid.dx(), grid.dy());
        let eps_ext = self.n_exterior * self.n_exterior;
        let layers = self.layers();
        let mut eps = Vec::with_capacity(grid.nx * grid.ny);
        for iy in 0..grid.ny {
            let (cy0, cy1) = (grid.y(iy) - dy / 2.0, grid.y(iy) + dy / 2.0);
            for ix in 0..grid.nx {
                let (cx0, cx1) = (grid.x(ix) - dx / 2.0, grid.x(ix) + dx / 2.0);
                let mut e = eps_ext;
                for &(x0, x1, y0, y1, n) in &layers {
                    let fx = (cx1.min(x1) - cx0.max(x0)).max(0.0) / dx;
                    let fy = (cy1.min(y1) - cy0.max(y0)).max(0.0) / dy;
                    e += fx * fy * (n * n - eps_ext);
                }
                eps.push(e);
            }
        }
        eps
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / (self.wavelength * 1e-3)
    }
}

/// Fundamental mode with unit power normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    /// Real mode profile; its `medium_index` is the exterior index, ready for gap propagation.
    pub field: SampledField,
    pub n_eff: f64,
    /// µm²
    pub mode_area: f64,
}

const RAYLEIGH_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 500;

/// Solves for the largest-`n_eff` guided mode of `geometry` on `grid`.
pub fn solve_fundamental_mode(geometry: &WaveguideGeometry, grid: &GridSpec) -> Result<ModeSolution> {
    geometry.validate()?;
    grid.validate()?;
    let margin = 4.0;
    if grid.window_x < geometry.ridge_width + 2.0 * margin
        || grid.window_y < geometry.ridge_height + 2.0 * margin
    {
        return Err(Error::InvalidGrid(format!(
            "window must cover the ridge plus {margin} um on each side"
        )));
    }

    let k = geometry.wavenumber();
    let eps = geometry.permittivity_map(grid);
    let op = Helmholtz {
        nx: grid.nx,
        ny: grid.ny,
        cx: 1.0 / (grid.dx() * grid.dx()),
        cy: 1.0 / (grid.dy() * grid.dy()),
        diag: eps.iter().map(|e| k * k * e).collect(),
    };
    let shift = k * k * geometry.n_core * geometry.n_core;
    let (beta2, vector) = largest_eigenpair(&op, shift)?;

    let n_eff = beta2.max(0.0).sqrt() / k;
    if n_eff <= geometry.n_clad {
        return Err(Error::NoGuidedMode { n_eff, n_clad: geometry.n_clad });
    }

    let mut field = SampledField::zeros(grid, geometry.wavelength, geometry.n_exterior);
    let peak = vector.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
    let sign = peak.signum();
    for (a, v) in field.amplitudes.iter_mut().zip(&vector) {
        *a = Complex64::new(sign * v, 0.0);
    }
    field.normalize()?;

    let ratio = field.boundary_ratio();
    if ratio >= 1e-3 {
        return Err(Error::GridTooSmall { ratio });
    }
    let area = mode_area(&field)?;
    Ok(ModeSolution { field, n_eff, mode_area: area })
}

/// Effective mode area `(∫I dA)² / ∫I² dA` with `I = |E|²`.
pub fn mode_area(field: &SampledField) -> Result<f64> {
    let (mut s1, mut s2) = (0.0, 0.0);
    for a in &field.amplitudes {
        let i = a.norm_sqr();
        s1 += i;
        s2 += i * i;
    }
    if s1 == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(s1 * s1 / s2 * field.cell_area())
}

/// Group index `n_eff − λ·dn_eff/dλ` at the middle sample, by central difference.
///
/// With two samples the derivative and index are taken at their midpoint.
pub fn group_index(samples: &[(f64, f64)]) -> Result<f64> {
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    s.dedup_by(|a, b| a.0 == b.0);
    if s.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: s.len() });
    }
    if s.len() == 2 {
        let (l, n) = ((s[0].0 + s[1].0) / 2.0, (s[0].1 + s[1].1) / 2.0);
        let dn = (s[1].1 - s[0].1) / (s[1].0 - s[0].0);
        return Ok(n - l * dn);
    }
    let m = s.len() / 2;
    let ((l0, n0), (l1, n1), (l2, n2)) = (s[m - 1], s[m], s[m + 1]);
    // Three-point derivative on a possibly non-uniform stencil.
    let (h0, h1) = (l1 - l0, l2 - l1);
    let dn = -h1 / (h0 * (h0 + h1)) * n0 + (h1 - h0) / (h0 * h1) * n1 + h0 / (h1 * (h0 + h1)) * n2;
    Ok(n1 - l1 * dn)
}

/// Fundamental TE-like mode of a symmetric 1-D slab on a uniform grid of `n` cells
/// spanning `window` µm; returns `n_eff`.
pub fn solve_slab_mode(
    n_core: f64,
    n_clad: f64,
    thickness: f64,
    wavelength: f64,
    window: f64,
    n: usize,
) -> Result<f64> {
    if !(n_core > n_clad && n_clad >= 1.0) {
        return Err(Error::InvalidGeometry("slab needs n_core > n_clad >= 1".into()));
    }
    if n < 16 || !(thickness > 0.0 && window > thickness && wavelength > 0.0) {
        return Err(Error::InvalidGrid("slab grid too small".into()));
    }
    let k = 2.0 * PI / (wavelength * 1e-3);
    let h = window / n as f64;
    let diag = (0..n)
        .map(|i| {
            let c = (i as f64 + 0.5 - n as f64 / 2.0) * h;
            let f = ((c + h / 2.0).min(thickness / 2.0) - (c - h / 2.0).max(-thickness / 2.0)).max(0.0) / h;
            k * k * (n_clad * n_clad + f * (n_core * n_core - n_clad * n_clad))
        })
        .collect();
    let op = Helmholtz { nx: 1, ny: n, cx: 0.0, cy: 1.0 / (h * h), diag };
    let (beta2, _) = largest_eigenpair(&op, k * k * n_core * n_core)?;
    let n_eff = beta2.sqrt() / k;
    if n_eff <= n_clad {
        return Err(Error::NoGuidedMode { n_eff, n_clad });
    }
    Ok(n_eff)
}

/// `A = ∇²_h + diag`, with zero field outside the grid. Index `iy * nx + ix`.
struct Helmholtz {
    nx: usize,
    ny: usize,
    cx: f64,
    cy: f64,
    diag: Vec<f64>,
}

impl Helmholtz {
    fn len(&self) -> usize {
        self.nx * self.ny
    }

    fn center(&self, i: usize) -> f64 {
        let lx = if self.nx > 1 { 2.0 * self.cx } else { 0.0 };
        self.diag[i] - lx - 2.0 * self.cy
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let nx = self.nx;
        for iy in 0..self.ny {
            for ix in 0..nx {
                let i = iy * nx + ix;
                let mut s = self.center(i) * v[i];
                if ix > 0 {
                    s += self.cx * v[i - 1];
                }
                if ix + 1 < nx {
                    s += self.cx * v[i + 1];
                }
                if iy > 0 {
                    s += self.cy * v[i - nx];
                }
                if iy + 1 < self.ny {
                    s += self.cy * v[i + nx];
                }
                out[i] = s;
            }
        }
    }
}

/// Lower-triangular Cholesky factor stored by rows within a band of half-width `b`.
struct BandCholesky {
    n: usize,
    b: usize,
    /// Row `i` holds `L[i][i-b..=i]` at offsets `0..=b`.
    data: Vec<f64>,
}

impl BandCholesky {
    /// Factors `shift·I − A`.
    fn factor(op: &Helmholtz, shift: f64) -> Result<Self> {
        let n = op.len();
        let b = op.nx;
        let w = b + 1;
        let mut data = vec![0.0; n * w];
        // Fill the lower band of shift·I − A.
        for i in 0..n {
            data[i * w + b] = shift - op.center(i);
            if op.nx > 1 && i % op.nx > 0 {
                data[i * w + b - 1] = -op.cx;
            }
            if i >= op.nx {
                data[i * w] = -op.cy;
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(b));
                let ri = i * w + b - i;
                let rj = j * w + b - j;
                let mut s = data[ri + j];
                let li = &data[ri + k0..ri + j];
                let lj = &data[rj + k0..rj + j];
                s -= li.iter().zip(lj).map(|(a, c)| a * c).sum::<f64>();
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::EigenNotConverged { iterations: 0 });
                    }
                    data[ri + i] = s.sqrt();
                } else {
                    data[ri + j] = s / data[rj + j];
                }
            }
        }
        Ok(Self { n, b, data })
    }

    fn solve(&self, rhs: &mut [f64]) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            let ri = i * w + b - i;
            let s: f64 = self.data[ri + j0..ri + i].iter().zip(&rhs[j0..i]).map(|(l, x)| l * x).sum();
            rhs[i] = (rhs[i] - s) / self.data[ri + i];
        }
        for i in (0..n).rev() {
            rhs[i] /= self.data[i * w + b];
            let xi = rhs[i];
            let j0 = i.saturating_sub(b);
            let ri = i * w + b - i;
            for j in j0..i {
                rhs[j] -= self.data[ri + j] * xi;
            }
        }
    }
}

/// Largest eigenpair of `op` by shift-and-invert power iteration.
fn largest_eigenpair(op: &Helmholtz, shift: f64) -> Result<(f64, Vec<f64>)> {
    let n = op.len();
    let chol = BandCholesky::factor(op, shift)?;
    // Smooth positive start vector overlapping any nodeless ground state.
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let (ix, iy) = (i % op.nx, i / op.nx);
            let sx = if op.nx > 1 { (PI * (ix as f64 + 0.5) / op.nx as f64).sin() } else { 1.0 };
            sx * (PI * (iy as f64 + 0.5) / op.ny as f64).sin()
        })
        .collect();
    let mut av = vec![0.0; n];
    let mut previous = f64::NAN;
    for _ in 0..MAX_ITERATIONS {
        chol.solve(&mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        op.apply(&v, &mut av);
        let rq: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        if (rq - previous).abs() <= RAYLEIGH_TOL * rq.abs() {
            return Ok((rq, v));
        }
        previous = rq;
    }
    Err(Error::EigenNotConverged { iterations: MAX_ITERATIONS })
}
