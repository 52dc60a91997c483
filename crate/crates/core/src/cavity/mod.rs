//! Fabry-Perot relations between round-trip amplitude, finesse, free spectral
//! range and linewidth, plus thin-film mirrors ([`stack`]) and extraction of
//! mirror reflectivity and propagation loss from measured finesse ([`fit`]).

pub mod fit;
pub mod stack;

use std::f64::consts::PI;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

pub use fit::{fit_losses, fit_losses_from, FinessePoint, FitResult};
pub use stack::{stack_reflectivity, Layer, MirrorStack};

/// A straight waveguide cavity between two mirrors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    /// µm
    pub length: f64,
    pub n_group: f64,
    /// Propagation loss, cm⁻¹.
    pub alpha: f64,
    pub mirror_r_left: f64,
    pub mirror_r_right: f64,
    /// Extra round-trip amplitude factor from a gap, if the cavity has one.
    pub gap_round_trip_amplitude: Option<f64>,
}

impl CavitySpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCavity(msg));
        if !(self.length > 0.0) {
            return bad(format!("length {} um must be positive", self.length));
        }
        if !(self.n_group > 0.0) {
            return bad(format!("group index {} must be positive", self.n_group));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha {} per cm must be >= 0", self.alpha));
        }
        for (side, r) in [("left", self.mirror_r_left), ("right", self.mirror_r_right)] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{side} mirror reflectivity {r} outside [0, 1]"));
            }
        }
        if let Some(a) = self.gap_round_trip_amplitude {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("gap round-trip amplitude {a} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

/// `π·√g / (1 − g)`.
pub fn finesse_from_round_trip(g_rt: f64) -> Result<f64> {
    if !(g_rt > 0.0 && g_rt < 1.0) {
        return Err(Error::OutOfRange { value: g_rt, range: "(0, 1)" });
    }
    Ok(PI * g_rt.sqrt() / (1.0 - g_rt))
}

/// Inverse of [`finesse_from_round_trip`]: the root in (0, 1) of `F·(1 − x²) = π·x`, squared.
pub fn round_trip_from_finesse(finesse: f64) -> Result<f64> {
    if !(finesse > 0.0) || !finesse.is_finite() {
        return Err(Error::NoSolution(format!("finesse {finesse} has no round-trip amplitude in (0, 1)")));
    }
    // Rationalized form of (−π + √(π² + 4F²)) / 2F, stable for large F.
    let x = 2.0 * finesse / (PI + (PI * PI + 4.0 * finesse * finesse).sqrt());
    let g = x * x;
    if g >= 1.0 {
        return Err(Error::NoSolution(format!("finesse {finesse} implies a lossless round trip")));
    }
    Ok(g)
}

/// `√(R_L·R_R) · exp(−α·l) · gap`, with `l` the cavity length.
pub fn round_trip_amplitude(spec: &CavitySpec) -> Result<f64> {
    spec.validate()?;
    let mirrors = (spec.mirror_r_left * spec.mirror_r_right).sqrt();
    let guide = (-spec.alpha * spec.length * 1e-4).exp();
    Ok(mirrors * guide * spec.gap_round_trip_amplitude.unwrap_or(1.0))
}

/// `c / (2·n_g·L)` in GHz for `L` in µm.
pub fn free_spectral_range(length: f64, n_group: f64) -> Result<f64> {
    if !(length > 0.0 && n_group > 0.0) {
        return Err(Error::InvalidCavity(format!("length {length} and group index {n_group} must be positive")));
    }
    Ok(SPEED_OF_LIGHT / (2.0 * n_group * length * 1e-6) * 1e-9)
}

/// Full resonance width `2κ/2π = FSR / F`, in the unit of `fsr`.
pub fn linewidth(finesse: f64, fsr: f64) -> Result<f64> {
    if !(finesse > 0.0) {
        return Err(Error::OutOfRange { value: finesse, range: "(0, inf)" });
    }
    Ok(fsr / finesse)
}

/// Propagation loss (cm⁻¹) implied by a measured full linewidth (GHz) of a
/// cavity with identical mirrors of reflectivity `mirror_r`.
pub fn alpha_from_linewidth(width: f64, length: f64, n_group: f64, mirror_r: f64) -> Result<f64> {
    if !(width >= 0.0) || !(mirror_r > 0.0 && mirror_r <= 1.0) {
        return Err(Error::InvalidCavity(format!("width {width} GHz or reflectivity {mirror_r} out of range")));
    }
    let fsr = free_spectral_range(length, n_group)?;
    if width == 0.0 {
        return Err(Error::NoSolution("zero linewidth implies a lossless round trip".into()));
    }
    let g = round_trip_from_finesse(fsr / width)?;
    let alpha = -(g / mirror_r).ln() / (length * 1e-4);
    if alpha < 0.0 {
        return Err(Error::NoSolution(format!(
            "linewidth {width} GHz is narrower than the mirrors alone allow (round trip {g} > R = {mirror_r})"
        )));
    }
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(alpha: f64, length: f64, r: f64, gap: Option<f64>) -> CavitySpec {
        CavitySpec { length, n_group: 3.5, alpha, mirror_r_left: r, mirror_r_right: r, gap_round_trip_amplitude: gap }
    }

    #[test]
    fn finesse_examples() {
        let g = 0.89 * (-1.07f64 * 0.026).exp();
        assert!((g - 0.8656).abs() < 1e-4);
        assert!((finesse_from_round_trip(g).unwrap() - 21.7).abs() < 0.05);
        let intrinsic = (-1.03f64 * 0.033).exp();
        assert!((finesse_from_round_trip(intrinsic).unwrap() - 92.4).abs() < 0.1);
        assert!((finesse_from_round_trip(0.93).unwrap() - 43.3).abs() < 0.05);
        assert!(finesse_from_round_trip(1.0).is_err());
        assert!(finesse_from_round_trip(0.0).is_err());
    }

    #[test]
    fn round_trip_examples() {
        assert!((round_trip_amplitude(&spec(0.0, 300.0, 0.89, None)).unwrap() - 0.89).abs() < 1e-15);
        let g = round_trip_amplitude(&spec(1.03, 300.0, 1.0, Some(0.93))).unwrap();
        assert!((g - 0.9016).abs() < 2e-4);
        assert!((finesse_from_round_trip(g).unwrap() - 30.3).abs() < 0.1);
        let unity = round_trip_amplitude(&spec(0.0, 300.0, 1.0, Some(1.0))).unwrap();
        assert!(finesse_from_round_trip(unity).is_err());
        assert!(spec(-1.0, 300.0, 1.0, None).validate().is_err());
        assert!(spec(0.0, 300.0, 1.2, None).validate().is_err());
    }

    #[test]
    fn fsr_and_linewidth_examples() {
        assert!((free_spectral_range(330.0, 3.5).unwrap() - 129.78).abs() < 0.01);
        assert!((free_spectral_range(300.0, 3.5).unwrap() - 142.76).abs() < 0.01);
        let one_ghz = SPEED_OF_LIGHT / 2.0 / 1e9 * 1e6;
        assert!((free_spectral_range(one_ghz, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((linewidth(92.4, 129.9).unwrap() - 1.406).abs() < 1e-3);
        assert!((linewidth(30.0, 142.9).unwrap() - 4.763).abs() < 1e-3);
        assert_eq!(linewidth(7.5, 7.5).unwrap(), 1.0);
    }

    #[test]
    fn alpha_from_linewidth_examples() {
        // Perfect mirrors attribute the whole width to the guide.
        let a = alpha_from_linewidth(1.4, 330.0, 3.5, 1.0).unwrap();
        assert!((a - 1.03).abs() < 0.06, "{a}");
        let with_coating = alpha_from_linewidth(1.4, 330.0, 3.5, 0.994).unwrap();
        assert!(with_coating < a);
        assert!(matches!(alpha_from_linewidth(0.0, 330.0, 3.5, 0.994), Err(Error::NoSolution(_))));
        assert!(matches!(alpha_from_linewidth(0.1, 330.0, 3.5, 0.9), Err(Error::NoSolution(_))));
    }

    #[test]
    fn alpha_round_trip_identity() {
        let (length, ng, r) = (330.0, 3.5, 0.95);
        let g: f64 = 0.9;
        let alpha = -(g / r).ln() / (length * 1e-4);
        let width = linewidth(finesse_from_round_trip(g).unwrap(), free_spectral_range(length, ng).unwrap()).unwrap();
        assert!((alpha_from_linewidth(width, length, ng, r).unwrap() - alpha).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn finesse_increases_with_round_trip(a in 1e-6..0.999f64, b in 1e-6..0.999f64) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(finesse_from_round_trip(lo).unwrap() < finesse_from_round_trip(hi).unwrap());
        }

        #[test]
        fn finesse_inverse_is_exact(g in 1e-4..0.9999f64) {
            let back = round_trip_from_finesse(finesse_from_round_trip(g).unwrap()).unwrap();
            prop_assert!((back - g).abs() < 1e-12);
        }

        #[test]
        fn linewidth_inversion_round_trips(
            alpha in 0.0..8.0f64, length in 50.0..3000.0f64, ng in 1.5..4.0f64, r in 0.5..1.0f64,
        ) {
            let s = CavitySpec { length, n_group: ng, alpha, mirror_r_left: r, mirror_r_right: r, gap_round_trip_amplitude: None };
            let g = round_trip_amplitude(&s).unwrap();
            prop_assume!(g < 0.9999);
            let width = linewidth(finesse_from_round_trip(g).unwrap(), free_spectral_range(length, ng).unwrap()).unwrap();
            let back = alpha_from_linewidth(width, length, ng, r).unwrap();
            let g_back = r * (-back * length * 1e-4).exp();
            prop_assert!((g_back - g).abs() < 1e-9);
        }
    }
}
