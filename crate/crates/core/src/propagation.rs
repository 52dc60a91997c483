//! Angular-spectrum free-space propagation of sampled transverse fields.
//!
//! A field is decomposed into plane waves with a 2-D DFT, each component is
//! advanced by `exp(i·k_z·d)` with `k_z = √(k² − k_x² − k_y²)`, and the result is
//! transformed back. Evanescent components (`k_x² + k_y² > k²`) are dropped.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::SampledField;

pub use crate::field::overlap;

/// Forward and inverse 2-D transforms for one grid size. Plans are shareable;
/// scratch buffers are allocated per call.
#[derive(Clone)]
struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        row.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); self.ny];
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                column[iy] = data[iy * self.nx + ix];
            }
            col.process(&mut column);
            for iy in 0..self.ny {
                data[iy * self.nx + ix] = column[iy];
            }
        }
        if inverse {
            let s = 1.0 / (self.nx * self.ny) as f64;
            data.iter_mut().for_each(|a| *a *= s);
        }
    }
}

/// DFT angular frequency of bin `i` out of `n` with spacing `d` (µm⁻¹).
fn angular_frequency(i: usize, n: usize, d: f64) -> f64 {
    let signed = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
    2.0 * PI * signed / (n as f64 * d)
}

/// Plane-wave decomposition of a field, reusable for many propagation distances.
#[derive(Clone)]
pub struct AngularSpectrum {
    template: SampledField,
    spectrum: Vec<Complex64>,
    /// Axial wavenumber per bin; `None` for evanescent bins.
    kz: Vec<Option<f64>>,
    fft: Fft2,
}

impl AngularSpectrum {
    pub fn new(field: &SampledField) -> Self {
        let fft = Fft2::new(field.nx, field.ny);
        let mut spectrum = field.amplitudes.clone();
        fft.transform(&mut spectrum, false);
        let k = wavenumber(field);
        let mut kz = Vec::with_capacity(spectrum.len());
        for iy in 0..field.ny {
            let ky = angular_frequency(iy, field.ny, field.dy);
            for ix in 0..field.nx {
                let kx = angular_frequency(ix, field.nx, field.dx);
                let kz2 = k * k - kx * kx - ky * ky;
                kz.push(if kz2 >= 0.0 { Some(kz2.sqrt()) } else { None });
            }
        }
        Self { template: field.clone(), spectrum, kz, fft }
    }

    /// Wavenumber in the propagation medium, µm⁻¹.
    pub fn wavenumber(&self) -> f64 {
        wavenumber(&self.template)
    }

    pub fn source(&self) -> &SampledField {
        &self.template
    }

    /// The field after free-space propagation over `d` µm.
    pub fn propagated(&self, d: f64) -> Result<SampledField> {
        if d < 0.0 {
            return Err(Error::NegativeDistance(d));
        }
        if d == 0.0 {
            return Ok(self.template.clone());
        }
        let mut data: Vec<Complex64> = self
            .spectrum
            .iter()
            .zip(&self.kz)
            .map(|(a, kz)| match kz {
                Some(kz) => a * Complex64::from_polar(1.0, kz * d),
                None => Complex64::new(0.0, 0.0),
            })
            .collect();
        self.fft.transform(&mut data, true);
        Ok(SampledField { amplitudes: data, ..self.template.clone() })
    }

    /// Value of the propagated field at one sample, without a full inverse transform.
    pub fn point_value(&self, ix: usize, iy: usize, d: f64) -> Result<Complex64> {
        if d < 0.0 {
            return Err(Error::NegativeDistance(d));
        }
        if d == 0.0 {
            return Ok(self.template.at(ix, iy));
        }
        let (nx, ny) = (self.template.nx, self.template.ny);
        let mut acc = Complex64::new(0.0, 0.0);
        for jy in 0..ny {
            let py = 2.0 * PI * ((jy * iy) % ny) as f64 / ny as f64;
            for jx in 0..nx {
                let idx = jy * nx + jx;
                if let Some(kz) = self.kz[idx] {
                    let a = self.spectrum[idx];
                    if a.norm_sqr() == 0.0 {
                        continue;
                    }
                    let px = 2.0 * PI * ((jx * ix) % nx) as f64 / nx as f64;
                    acc += a * Complex64::from_polar(1.0, px + py + kz * d);
                }
            }
        }
        Ok(acc / (nx * ny) as f64)
    }

    /// Amplitude of the source field in its own propagated copy,
    /// `⟨E, E(d)⟩ / ⟨E, E⟩`, evaluated in the spectral domain.
    ///
    /// By Parseval's theorem this is the spatial projection at the cost of one
    /// pass over the spectrum. Evanescent content counts as lost, so the result
    /// is not renormalized by the power of the propagated field.
    pub fn self_overlap(&self, d: f64) -> Result<Complex64> {
        if d < 0.0 {
            return Err(Error::NegativeDistance(d));
        }
        if d == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let (mut dot, mut total) = (Complex64::new(0.0, 0.0), 0.0);
        for (a, kz) in self.spectrum.iter().zip(&self.kz) {
            let p = a.norm_sqr();
            total += p;
            if let Some(kz) = kz {
                dot += Complex64::from_polar(p, kz * d);
            }
        }
        if total == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(dot / total)
    }

    /// Fraction of the field power carried by evanescent plane waves.
    pub fn evanescent_fraction(&self) -> f64 {
        let total: f64 = self.spectrum.iter().map(|a| a.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let lost: f64 = self
            .spectrum
            .iter()
            .zip(&self.kz)
            .filter(|(_, kz)| kz.is_none())
            .map(|(a, _)| a.norm_sqr())
            .sum();
        lost / total
    }
}

fn wavenumber(field: &SampledField) -> f64 {
    2.0 * PI * field.medium_index / (field.wavelength * 1e-3)
}

/// Propagates `field` over distance `d` (µm) in its medium by the angular-spectrum method.
pub fn propagate_free_space(field: &SampledField, d: f64) -> Result<SampledField> {
    if d < 0.0 {
        return Err(Error::NegativeDistance(d));
    }
    AngularSpectrum::new(field).propagated(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    fn gaussian(grid: &GridSpec, w0: f64) -> SampledField {
        SampledField::from_fn(grid, 780.0, 1.0, |x, y| {
            Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0)
        })
    }

    /// 1/e² intensity radius from the second moment: w² = 2⟨x²⟩ (per axis, so 4⟨r²⟩/2).
    fn second_moment_radius(f: &SampledField) -> f64 {
        let g = f.grid();
        let (mut m2, mut p) = (0.0, 0.0);
        for iy in 0..f.ny {
            for ix in 0..f.nx {
                let i = f.at(ix, iy).norm_sqr();
                let (x, y) = (g.x(ix), g.y(iy));
                m2 += i * (x * x + y * y);
                p += i;
            }
        }
        (m2 / p).sqrt()
    }

    #[test]
    fn zero_distance_is_identity() {
        let g = GridSpec { nx: 64, ny: 64, window_x: 16.0, window_y: 16.0 };
        let f = gaussian(&g, 2.0);
        let out = propagate_free_space(&f, 0.0).unwrap();
        let err = f.amplitudes.iter().zip(&out.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn negative_distance_rejected() {
        let g = GridSpec { nx: 16, ny: 16, window_x: 8.0, window_y: 8.0 };
        let f = gaussian(&g, 1.0);
        assert_eq!(propagate_free_space(&f, -1.0).unwrap_err(), Error::NegativeDistance(-1.0));
    }

    #[test]
    fn gaussian_beam_spreads_as_predicted() {
        let g = GridSpec { nx: 256, ny: 256, window_x: 48.0, window_y: 48.0 };
        let w0 = 2.0;
        let d = 10.0;
        let f = gaussian(&g, w0);
        let out = propagate_free_space(&f, d).unwrap();
        let zr = PI * w0 * w0 / 0.78;
        let w_expected = w0 * (1.0 + (d / zr).powi(2)).sqrt();
        // For a TEM00 beam ⟨r²⟩ = w²/2.
        let w_measured = second_moment_radius(&out) * 2f64.sqrt();
        let w_in = second_moment_radius(&f) * 2f64.sqrt();
        assert!((w_in - w0).abs() / w0 < 1e-3);
        assert!((w_measured - w_expected).abs() / w_expected < 0.01, "{w_measured} vs {w_expected}");
    }

    #[test]
    fn propagated_gaussian_coupling_matches_closed_form() {
        // |⟨E(0),E(z)⟩|² = 1 / (1 + (z / 2z_R)²) for a TEM00 beam and its own propagation.
        let g = GridSpec { nx: 256, ny: 256, window_x: 32.0, window_y: 32.0 };
        let w0 = 2.0;
        let z = 4.0;
        let f = gaussian(&g, w0);
        let q = overlap(&f, &propagate_free_space(&f, z).unwrap()).unwrap();
        let zr = PI * w0 * w0 / 0.78;
        let expected = 1.0 / (1.0 + (z / (2.0 * zr)).powi(2));
        assert!((q.norm_sqr() - expected).abs() / expected < 0.01);
    }

    #[test]
    fn point_value_matches_full_transform() {
        let g = GridSpec { nx: 64, ny: 64, window_x: 16.0, window_y: 16.0 };
        let f = SampledField::from_fn(&g, 780.0, 1.0, |x, y| {
            Complex64::new((-(x * x + 2.0 * y * y) / 4.0).exp(), 0.1 * x * (-(x * x + y * y) / 3.0).exp())
        });
        let spec = AngularSpectrum::new(&f);
        let full = spec.propagated(3.3).unwrap();
        for &(ix, iy) in &[(32, 32), (10, 40), (63, 0)] {
            let p = spec.point_value(ix, iy, 3.3).unwrap();
            assert!((p - full.at(ix, iy)).norm() < 1e-12);
        }
    }

    #[test]
    fn spectral_self_overlap_matches_spatial_projection() {
        // A sharp-edged field keeps some evanescent content, which must count as lost.
        let g = GridSpec { nx: 64, ny: 64, window_x: 16.0, window_y: 16.0 };
        let f = SampledField::from_fn(&g, 780.0, 1.0, |x, y| {
            let edge = if x.abs() < 2.0 && y.abs() < 1.5 { 1.0 } else { 0.0 };
            Complex64::new(edge + 0.3 * x * (-(x * x + y * y) / 9.0).exp(), 0.2 * y * (-(y * y) / 4.0).exp())
        });
        let spec = AngularSpectrum::new(&f);
        assert!(spec.evanescent_fraction() > 1e-4);
        let norm2: f64 = f.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        for d in [0.0, 0.4, 2.5, 17.0] {
            let p = spec.propagated(d).unwrap();
            let direct: Complex64 = f.amplitudes.iter().zip(&p.amplitudes).map(|(a, b)| a.conj() * b).sum::<Complex64>() / norm2;
            assert!((spec.self_overlap(d).unwrap() - direct).norm() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn evanescent_content_is_small_for_smooth_fields() {
        let g = GridSpec { nx: 64, ny: 64, window_x: 16.0, window_y: 16.0 };
        assert!(AngularSpectrum::new(&gaussian(&g, 2.0)).evanescent_fraction() < 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Smooth random field: a few Gaussians with random centres, widths and phases.
        fn random_field(params: &[(f64, f64, f64, f64, f64)]) -> SampledField {
            let g = GridSpec { nx: 32, ny: 32, window_x: 16.0, window_y: 16.0 };
            SampledField::from_fn(&g, 780.0, 1.0, |x, y| {
                params.iter().fold(Complex64::new(0.0, 0.0), |acc, &(cx, cy, w, amp, ph)| {
                    let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                    acc + Complex64::from_polar(amp * (-r2 / (w * w)).exp(), ph)
                })
            })
        }

        fn blob() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
            (-2.0..2.0f64, -2.0..2.0f64, 1.2..3.0f64, 0.1..1.0f64, 0.0..std::f64::consts::TAU)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn power_is_conserved(params in prop::collection::vec(blob(), 1..4), d in 0.01..40.0f64) {
                // Strip evanescent content first so only propagating waves remain.
                let f = propagate_free_space(&random_field(&params), 1e-3).unwrap();
                let out = propagate_free_space(&f, d).unwrap();
                prop_assert!((out.power() - f.power()).abs() <= 1e-9 * f.power());
            }

            #[test]
            fn propagation_is_a_semigroup(params in prop::collection::vec(blob(), 1..4), d1 in 0.01..20.0f64, d2 in 0.01..20.0f64) {
                let f = random_field(&params);
                let two = propagate_free_space(&propagate_free_space(&f, d1).unwrap(), d2).unwrap();
                let one = propagate_free_space(&f, d1 + d2).unwrap();
                let scale = f.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
                let err = one.amplitudes.iter().zip(&two.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                prop_assert!(err <= 1e-9 * scale);
            }

            #[test]
            fn overlap_is_bounded_and_hermitian(pa in prop::collection::vec(blob(), 1..4), pb in prop::collection::vec(blob(), 1..4)) {
                let (a, b) = (random_field(&pa), random_field(&pb));
                let ab = overlap(&a, &b).unwrap();
                let ba = overlap(&b, &a).unwrap();
                prop_assert!(ab.norm() <= 1.0 + 1e-12);
                prop_assert!((ab - ba.conj()).norm() < 1e-12);
            }
        }
    }
}
