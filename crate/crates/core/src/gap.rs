//! Scattering of the guided mode by a free-space gap cut through the waveguide.
//!
//! Light leaving the left facet bounces between the two facets of the gap. Each
//! pass through the gap diffracts the field, so only the projection onto the
//! guided mode is recoupled. With `ρ = (n−1)/(n+1)` the coupled amplitudes are
//!
//! ```text
//! t_gap = t·t′ · Σ_p ρ^{2p}   Q⁺_p       Q⁺_p = Q((2p+1)·d)
//! r_gap = ρ − t·t′ · Σ_p ρ^{2p+1} Q⁻_p   Q⁻_p = Q(2(p+1)·d)
//! ```
//!
//! where `Q(s)` is the overlap of the mode with itself after free-space
//! propagation over `s`. Two conventions for the phase of `Q` are offered, see
//! [`OverlapPhase`].

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::format::fmt6;
use crate::propagation::{propagate_free_space, AngularSpectrum};

/// Amplitude coefficients of a single guide/air interface at normal incidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelCoefficients {
    /// Reflection for incidence from the guide side, `(n−1)/(n+1)`.
    pub r: f64,
    /// Transmission guide → air, `2n/(n+1)`.
    pub t: f64,
    /// Transmission air → guide, `2/(n+1)`.
    pub t_back: f64,
}

impl FresnelCoefficients {
    pub fn intensity_reflection(&self) -> f64 {
        self.r * self.r
    }
}

pub fn fresnel_interface(n: f64) -> Result<FresnelCoefficients> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::InvalidIndex(n));
    }
    Ok(FresnelCoefficients { r: (n - 1.0) / (n + 1.0), t: 2.0 * n / (n + 1.0), t_back: 2.0 / (n + 1.0) })
}

/// How the phase of the per-bounce overlap factor `Q(s)` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapPhase {
    /// `|overlap(E₀, P_s E₀)|·exp(i·k·s)`: diffraction only reduces the
    /// amplitude and the gap carries the plane-wave phase `k·s`.
    #[default]
    Separated,
    /// The complex overlap as computed, including the extra diffraction phase.
    Diffractive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapConfig {
    /// Gap width, µm.
    pub width: f64,
    pub n_interface: f64,
    /// Series terms are kept while `ρ^{2p}` is at least this large.
    pub series_tolerance: f64,
    pub p_max: usize,
    pub overlap_phase: OverlapPhase,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            width: 1.96,
            n_interface: 3.155,
            series_tolerance: 1e-8,
            p_max: 64,
            overlap_phase: OverlapPhase::Separated,
        }
    }
}

impl GapConfig {
    pub fn with_width(self, width: f64) -> Self {
        Self { width, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width >= 0.0) || !self.width.is_finite() {
            return Err(Error::InvalidGapConfig(format!("gap width {} must be >= 0", self.width)));
        }
        if !(self.n_interface >= 1.0) {
            return Err(Error::InvalidIndex(self.n_interface));
        }
        if !(self.series_tolerance > 0.0 && self.series_tolerance < 1.0) {
            return Err(Error::InvalidGapConfig(format!(
                "series tolerance {} must lie in (0, 1)",
                self.series_tolerance
            )));
        }
        if self.p_max == 0 {
            return Err(Error::InvalidGapConfig("p_max must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of bounce terms needed so that the first dropped weight `ρ^{2p}` is below tolerance.
    pub fn series_terms(&self) -> Result<usize> {
        let rho2 = fresnel_interface(self.n_interface)?.intensity_reflection();
        let mut weight = 1.0;
        for p in 0..=self.p_max {
            if weight < self.series_tolerance {
                return Ok(p);
            }
            weight *= rho2;
        }
        Err(Error::SeriesNotConverged { terms: self.p_max, weight: rho2.powi(self.p_max as i32) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapResult {
    pub width: f64,
    /// Intensity reflection into the incident guide mode.
    pub reflection: f64,
    /// Intensity transmission into the far guide mode.
    pub transmission: f64,
    /// `1 − R − T`.
    pub loss: f64,
    pub r_amp: Complex64,
    pub t_amp: Complex64,
    pub q_plus: Vec<Complex64>,
    pub q_minus: Vec<Complex64>,
}

/// Sums the bounce series for given overlap factors. `q_plus` and `q_minus`
/// must have equal length; every entry is used.
pub fn series_amplitudes(n_interface: f64, q_plus: &[Complex64], q_minus: &[Complex64]) -> Result<(Complex64, Complex64)> {
    if q_plus.len() != q_minus.len() {
        return Err(Error::InvalidGapConfig("Q+ and Q- lists differ in length".into()));
    }
    let f = fresnel_interface(n_interface)?;
    let tt = f.t * f.t_back;
    let mut t = Complex64::new(0.0, 0.0);
    let mut r = Complex64::new(f.r, 0.0);
    let mut w = 1.0;
    for (qp, qm) in q_plus.iter().zip(q_minus) {
        t += tt * w * qp;
        r -= tt * w * f.r * qm;
        w *= f.r * f.r;
    }
    Ok((r, t))
}

/// A guided mode prepared for repeated gap calculations.
pub struct GapModel {
    spectrum: AngularSpectrum,
    peak: (usize, usize),
    peak_value: Complex64,
}

impl GapModel {
    pub fn new(mode: &SampledField) -> Result<Self> {
        if mode.power() == 0.0 {
            return Err(Error::ZeroField);
        }
        let peak = mode.peak_index();
        Ok(Self { spectrum: AngularSpectrum::new(mode), peak, peak_value: mode.at(peak.0, peak.1) })
    }

    fn wavenumber(&self) -> f64 {
        self.spectrum.wavenumber()
    }

    fn apply_phase(&self, q: Complex64, s: f64, phase: OverlapPhase) -> Complex64 {
        match phase {
            OverlapPhase::Diffractive => q,
            OverlapPhase::Separated => Complex64::from_polar(q.norm(), self.wavenumber() * s),
        }
    }

    /// Overlap of the mode with itself after propagating `s` µm.
    pub fn overlap_factor(&self, s: f64, phase: OverlapPhase) -> Result<Complex64> {
        let q = self.spectrum.self_overlap(s)?;
        Ok(self.apply_phase(q, s, phase))
    }

    /// Field at the mode peak after propagating `s` µm, relative to its initial value.
    fn peak_factor(&self, s: f64, phase: OverlapPhase) -> Result<Complex64> {
        let v = self.spectrum.point_value(self.peak.0, self.peak.1, s)? / self.peak_value;
        Ok(self.apply_phase(v, s, phase))
    }

    pub fn scattering(&self, cfg: &GapConfig) -> Result<GapResult> {
        cfg.validate()?;
        let terms = cfg.series_terms()?;
        let d = cfg.width;
        let mut q_plus = Vec::with_capacity(terms);
        let mut q_minus = Vec::with_capacity(terms);
        for p in 0..terms {
            q_plus.push(self.overlap_factor((2 * p + 1) as f64 * d, cfg.overlap_phase)?);
            q_minus.push(self.overlap_factor(2.0 * (p + 1) as f64 * d, cfg.overlap_phase)?);
        }
        let (r_amp, t_amp) = series_amplitudes(cfg.n_interface, &q_plus, &q_minus)?;
        let reflection = r_amp.norm_sqr();
        let transmission = t_amp.norm_sqr();
        Ok(GapResult {
            width: d,
            reflection,
            transmission,
            loss: 1.0 - reflection - transmission,
            r_amp,
            t_amp,
            q_plus,
            q_minus,
        })
    }

    /// Magnitude of the field returned into the left guide when the far side of
    /// the gap is closed by a perfect mirror at round-trip phase `arm_phase`.
    pub fn round_trip(&self, cfg: &GapConfig, arm_phase: f64) -> Result<f64> {
        let g = self.scattering(cfg)?;
        composite_from_amplitudes(g.r_amp, g.t_amp, arm_phase, cfg).map(|r| r.norm())
    }

    /// `(phase, r_rt)` on `steps` uniformly spaced phases in `[0, 2π)`.
    pub fn phase_scan(&self, cfg: &GapConfig, steps: usize) -> Result<Vec<(f64, f64)>> {
        if steps < 2 {
            return Err(Error::InvalidRange(format!("phase scan needs at least 2 steps, got {steps}")));
        }
        let g = self.scattering(cfg)?;
        (0..steps)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / steps as f64;
                Ok((phi, composite_from_amplitudes(g.r_amp, g.t_amp, phi, cfg)?.norm()))
            })
            .collect()
    }

    /// Arm phases giving the smallest (constructive in-gap interference) and
    /// largest (destructive) round-trip amplitude.
    pub fn extreme_phases(&self, cfg: &GapConfig) -> Result<PhaseExtremes> {
        let g = self.scattering(cfg)?;
        let eval = |phi: f64| composite_from_amplitudes(g.r_amp, g.t_amp, phi, cfg).map(|r| r.norm());
        let (constructive, r_min) = refine_extremum(&eval, 1.0)?;
        let (destructive, r_max) = refine_extremum(&eval, -1.0)?;
        Ok(PhaseExtremes { constructive, r_min, destructive, r_max })
    }

    /// Peak standing-wave amplitude inside the gap over that in the left guide.
    pub fn enhancement(&self, cfg: &GapConfig, arm_phase: f64) -> Result<f64> {
        let g = self.scattering(cfg)?;
        let terms = cfg.series_terms()?;
        let f = fresnel_interface(cfg.n_interface)?;
        let rho = f.r;
        let d = cfg.width;

        let a = Complex64::new(1.0, 0.0);
        let loop_phase = Complex64::from_polar(1.0, arm_phase);
        let b = loop_phase * g.t_amp * a / (Complex64::new(1.0, 0.0) - g.r_amp * loop_phase);
        let a_out = g.r_amp * a + g.t_amp * b;

        let samples = 41;
        let envelope = (0..samples)
            .map(|i| {
                let z = d * i as f64 / (samples - 1) as f64;
                let back = d * (samples - 1 - i) as f64 / (samples - 1) as f64;
                let q = |s: f64| self.peak_factor(s, cfg.overlap_phase);
                let mut fwd = Complex64::new(0.0, 0.0);
                let mut bwd = Complex64::new(0.0, 0.0);
                let mut w = 1.0;
                for p in 0..terms {
                    let even = (2 * p) as f64 * d;
                    let odd = even + d;
                    fwd += w * (a * q(even + z)? - rho * b * q(odd + z)?);
                    bwd += w * (b * q(even + back)? - rho * a * q(odd + back)?);
                    w *= rho * rho;
                }
                Ok(f.t * (fwd.norm() + bwd.norm()))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(envelope / (a.norm() + a_out.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseExtremes {
    pub constructive: f64,
    pub r_min: f64,
    pub destructive: f64,
    pub r_max: f64,
}

/// Minimizes `sign·f` over one period: coarse scan, then golden-section refinement.
fn refine_extremum(f: &dyn Fn(f64) -> Result<f64>, sign: f64) -> Result<(f64, f64)> {
    let n = 360;
    let step = 2.0 * PI / n as f64;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..n {
        let phi = i as f64 * step;
        let v = sign * f(phi)?;
        if v < best.1 {
            best = (phi, v);
        }
    }
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (sign * f(x1)?, sign * f(x2)?);
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = sign * f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = sign * f(x2)?;
        }
    }
    let phi = (0.5 * (lo + hi)).rem_euclid(2.0 * PI);
    Ok((phi, f(phi)?))
}

/// Gap in front of a perfect mirror, summed over repeated gap-mirror bounces:
/// `r_g + t_g²·e^{iφ}·Σ_m (r_g·e^{iφ})^m`.
pub fn composite_from_amplitudes(r_g: Complex64, t_g: Complex64, arm_phase: f64, cfg: &GapConfig) -> Result<Complex64> {
    let loop_gain = r_g * Complex64::from_polar(1.0, arm_phase);
    let mut term = t_g * t_g * Complex64::from_polar(1.0, arm_phase);
    let mut total = r_g;
    let mut weight = 1.0;
    let cap = cfg.p_max * 16;
    for _ in 0..cap {
        total += term;
        term *= loop_gain;
        weight *= loop_gain.norm();
        if weight < cfg.series_tolerance {
            return Ok(total);
        }
    }
    Err(Error::SeriesNotConverged { terms: cap, weight })
}

pub fn gap_scattering(mode: &SampledField, cfg: &GapConfig) -> Result<GapResult> {
    GapModel::new(mode)?.scattering(cfg)
}

pub fn composite_round_trip(mode: &SampledField, cfg: &GapConfig, arm_phase: f64) -> Result<f64> {
    GapModel::new(mode)?.round_trip(cfg, arm_phase)
}

pub fn field_enhancement(mode: &SampledField, cfg: &GapConfig, arm_phase: f64) -> Result<f64> {
    GapModel::new(mode)?.enhancement(cfg, arm_phase)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossPoint {
    pub width: f64,
    pub reflection: f64,
    pub transmission: f64,
    pub loss: f64,
}

/// Gap scattering on `steps` uniformly spaced widths from `d_min` to `d_max` inclusive.
pub fn loss_spectrum(mode: &SampledField, cfg: &GapConfig, d_min: f64, d_max: f64, steps: usize) -> Result<Vec<LossPoint>> {
    if !(d_min >= 0.0 && d_min < d_max) {
        return Err(Error::InvalidRange(format!("need 0 <= d_min < d_max, got {d_min} .. {d_max}")));
    }
    if steps < 2 {
        return Err(Error::InvalidRange(format!("need at least 2 steps, got {steps}")));
    }
    let model = GapModel::new(mode)?;
    (0..steps)
        .into_par_iter()
        .map(|i| {
            let d = d_min + (d_max - d_min) * i as f64 / (steps - 1) as f64;
            let g = model.scattering(&cfg.with_width(d))?;
            Ok(LossPoint { width: d, reflection: g.reflection, transmission: g.transmission, loss: g.loss })
        })
        .collect()
}

pub fn write_loss_csv<W: Write>(points: &[LossPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "d_um,R,T,loss")?;
    for p in points {
        writeln!(out, "{},{},{},{}", fmt6(p.width), fmt6(p.reflection), fmt6(p.transmission), fmt6(p.loss))?;
    }
    Ok(())
}

pub fn write_phase_csv<W: Write>(points: &[(f64, f64)], mut out: W) -> io::Result<()> {
    writeln!(out, "phase_rad,r_rt")?;
    for (phi, r) in points {
        writeln!(out, "{},{}", fmt6(*phi), fmt6(*r))?;
    }
    Ok(())
}

/// Reference calculation that follows the field bounce by bounce: the full
/// transverse field is propagated across the gap, partly transmitted (and
/// projected onto the mode) at each facet and partly reflected back.
///
/// Every propagation starts from the current field, so the result does not rely
/// on the semigroup identity used by the series. Returns `(r_gap, t_gap)`.
pub fn bounce_simulation(mode: &SampledField, cfg: &GapConfig) -> Result<(Complex64, Complex64)> {
    cfg.validate()?;
    let terms = cfg.series_terms()?;
    let f = fresnel_interface(cfg.n_interface)?;
    let norm2 = mode.power() / mode.cell_area();
    let project = |u: &SampledField| -> Result<Complex64> {
        if !u.same_grid(mode) {
            return Err(Error::GridMismatch);
        }
        let dot: Complex64 = mode.amplitudes.iter().zip(&u.amplitudes).map(|(m, v)| m.conj() * v).sum();
        Ok(dot / norm2)
    };
    let scale = |u: &mut SampledField, s: f64| u.amplitudes.iter_mut().for_each(|a| *a *= s);

    let mut r = Complex64::new(f.r, 0.0);
    let mut t = Complex64::new(0.0, 0.0);
    let mut u = mode.clone();
    scale(&mut u, f.t);
    for _ in 0..terms {
        u = propagate_free_space(&u, cfg.width)?;
        t += f.t_back * project(&u)?;
        scale(&mut u, -f.r);
        u = propagate_free_space(&u, cfg.width)?;
        r += f.t_back * project(&u)?;
        scale(&mut u, -f.r);
    }
    Ok((r, t))
}
