//! Atom-cavity coupling, loss budget and cooperativity `C = g²/(κγ)`.
//!
//! All rates are given as ordinary frequencies (`x/2π`): `g` and `γ` in MHz,
//! `κ` in GHz.

use std::f64::consts::PI;

use crate::cavity::{finesse_from_round_trip, free_spectral_range, round_trip_amplitude, CavitySpec};
use crate::constants::{EPSILON_0, HBAR, RB87_D2_DIPOLE, RB87_D2_GAMMA_HALF_MHZ, RB87_D2_WAVELENGTH_NM, RB87_MASS, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    /// C·m
    pub dipole_moment: f64,
    /// γ/2π, MHz.
    pub gamma_half: f64,
    /// nm
    pub transition_wavelength: f64,
    /// kg
    pub mass: f64,
}

impl AtomParams {
    /// ⁸⁷Rb on the D2 cycling transition.
    pub fn rb87_d2() -> Self {
        Self {
            dipole_moment: RB87_D2_DIPOLE,
            gamma_half: RB87_D2_GAMMA_HALF_MHZ,
            transition_wavelength: RB87_D2_WAVELENGTH_NM,
            mass: RB87_MASS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("dipole_moment", self.dipole_moment),
            ("gamma_half", self.gamma_half),
            ("transition_wavelength", self.transition_wavelength),
            ("mass", self.mass),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("atom {name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

/// g/2π in MHz for a mode volume `V = A·L`.
pub fn coupling_g(mode_area: f64, cavity_length: f64, atom: &AtomParams) -> Result<f64> {
    atom.validate()?;
    if !(mode_area > 0.0 && cavity_length > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mode area {mode_area} um^2 and length {cavity_length} um must be positive"
        )));
    }
    let volume = mode_area * 1e-12 * cavity_length * 1e-6;
    let omega = 2.0 * PI * SPEED_OF_LIGHT / (atom.transition_wavelength * 1e-9);
    let g = atom.dipole_moment / HBAR * (HBAR * omega / (2.0 * EPSILON_0 * volume)).sqrt();
    Ok(g / (2.0 * PI) * 1e-6)
}

/// Output coupling matched to the intrinsic loss: returns `(κ_T, κ_total)`.
pub fn optimize_mirror_transmission(kappa_intr: f64) -> Result<(f64, f64)> {
    if !(kappa_intr >= 0.0) || !kappa_intr.is_finite() {
        return Err(Error::InvalidParameter(format!("intrinsic loss rate {kappa_intr} GHz must be >= 0")));
    }
    Ok((kappa_intr, 2.0 * kappa_intr))
}

/// `enhancement · g² / (κ·γ)` with g, γ in MHz and κ in GHz.
pub fn cooperativity(g: f64, kappa: f64, gamma: f64, enhancement: f64) -> Result<f64> {
    if !(g >= 0.0 && kappa > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("need g >= 0, kappa > 0, gamma > 0 (got {g}, {kappa}, {gamma})")));
    }
    if !(enhancement >= 1.0) {
        return Err(Error::InvalidParameter(format!("enhancement {enhancement} must be >= 1")));
    }
    Ok(enhancement * g * g / (kappa * 1e3 * gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqedBudget {
    pub round_trip: f64,
    pub finesse_intr: f64,
    pub fsr_ghz: f64,
    pub g_over_2pi: f64,
    pub kappa_intr_over_2pi: f64,
    pub kappa_t_over_2pi: f64,
    pub kappa_total_over_2pi: f64,
    pub cooperativity: f64,
    pub enhancement: f64,
    /// Set when the intrinsic round trip is lossless; κ is then zero and C unbounded.
    pub diverged: bool,
}

/// Chains round trip → intrinsic finesse → FSR → κ_intr → matched κ_T → g → C.
///
/// The intrinsic budget uses perfect mirrors; the mirror reflectivities in
/// `spec` are ignored because the output coupler is chosen by
/// [`optimize_mirror_transmission`].
pub fn full_budget(mode_area: f64, spec: &CavitySpec, atom: &AtomParams, enhancement: f64) -> Result<CqedBudget> {
    let intrinsic = CavitySpec { mirror_r_left: 1.0, mirror_r_right: 1.0, ..*spec };
    let round_trip = round_trip_amplitude(&intrinsic)?;
    let fsr_ghz = free_spectral_range(spec.length, spec.n_group)?;
    let g_over_2pi = coupling_g(mode_area, spec.length, atom)?;
    if round_trip >= 1.0 {
        return Ok(CqedBudget {
            round_trip,
            finesse_intr: f64::INFINITY,
            fsr_ghz,
            g_over_2pi,
            kappa_intr_over_2pi: 0.0,
            kappa_t_over_2pi: 0.0,
            kappa_total_over_2pi: 0.0,
            cooperativity: f64::INFINITY,
            enhancement,
            diverged: true,
        });
    }
    let finesse_intr = finesse_from_round_trip(round_trip)?;
    let kappa_intr = fsr_ghz / finesse_intr / 2.0;
    let (kappa_t, kappa_total) = optimize_mirror_transmission(kappa_intr)?;
    let c = cooperativity(g_over_2pi, kappa_total, atom.gamma_half, enhancement)?;
    Ok(CqedBudget {
        round_trip,
        finesse_intr,
        fsr_ghz,
        g_over_2pi,
        kappa_intr_over_2pi: kappa_intr,
        kappa_t_over_2pi: kappa_t,
        kappa_total_over_2pi: kappa_total,
        cooperativity: c,
        enhancement,
        diverged: false,
    })
}
