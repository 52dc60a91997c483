//! Harmonic magnetic confinement plus Casimir-Polder attraction to both gap walls.

use std::io::{self, Write};

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::format::fmt6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    /// rad/s
    pub omega_trap: f64,
    /// kg
    pub atom_mass: f64,
    /// J·m⁴
    pub c4: f64,
    /// µm
    pub gap_width: f64,
    pub z_samples: usize,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("omega_trap", self.omega_trap), ("atom_mass", self.atom_mass), ("gap_width", self.gap_width)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.c4 >= 0.0) || !self.c4.is_finite() {
            return Err(Error::InvalidParameter(format!("c4 = {} must be >= 0", self.c4)));
        }
        if self.z_samples < 101 {
            return Err(Error::InvalidParameter(format!("z_samples = {} must be at least 101", self.z_samples)));
        }
        Ok(())
    }

    /// Potential in J at `z` µm from the gap centre.
    pub fn potential(&self, z: f64) -> f64 {
        let zm = z * 1e-6;
        let half = self.gap_width * 0.5e-6;
        let harmonic = 0.5 * self.atom_mass * self.omega_trap * self.omega_trap * zm * zm;
        harmonic - self.c4 / (half + zm).powi(4) - self.c4 / (half - zm).powi(4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    /// µm
    pub z: f64,
    /// J
    pub u: f64,
}

impl ProfilePoint {
    pub fn u_microkelvin(&self) -> f64 {
        self.u / BOLTZMANN * 1e6
    }
}

/// `z_samples` equally spaced points strictly between the walls.
pub fn potential_profile(cfg: &TrapConfig) -> Result<Vec<ProfilePoint>> {
    cfg.validate()?;
    let n = cfg.z_samples;
    Ok((0..n)
        .map(|i| {
            // Integer numerator keeps the grid exactly antisymmetric about the centre.
            let z = cfg.gap_width * (2 * (i + 1)) as f64 - cfg.gap_width * (n + 1) as f64;
            let z = z / (2 * (n + 1)) as f64;
            ProfilePoint { z, u: cfg.potential(z) }
        })
        .collect())
}

pub fn write_profile_csv<W: Write>(points: &[ProfilePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "z_um,U_J,U_uK")?;
    for p in points {
        writeln!(out, "{},{},{}", fmt6(p.z), fmt6(p.u), fmt6(p.u_microkelvin()))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapAnalysis {
    pub has_minimum: bool,
    /// J; zero without a minimum.
    pub barrier_height: f64,
    pub barrier_height_uk: f64,
    /// µm; the gap centre is reported when no minimum exists.
    pub min_position: f64,
}

/// Finds the deepest interior local minimum and the lower of the two potential
/// maxima that separate it from the walls.
pub fn trap_analysis(cfg: &TrapConfig) -> Result<TrapAnalysis> {
    let profile = potential_profile(cfg)?;
    let none = TrapAnalysis { has_minimum: false, barrier_height: 0.0, barrier_height_uk: 0.0, min_position: 0.0 };
    let minimum = profile
        .windows(3)
        .enumerate()
        .filter(|(_, w)| w[1].u < w[0].u && w[1].u <= w[2].u)
        .map(|(i, w)| (i + 1, w[1].u))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let Some((at, u_min)) = minimum else {
        return Ok(none);
    };
    let left = profile[..at].iter().map(|p| p.u).fold(f64::NEG_INFINITY, f64::max);
    let right = profile[at + 1..].iter().map(|p| p.u).fold(f64::NEG_INFINITY, f64::max);
    let barrier = left.min(right) - u_min;
    if !(barrier > 0.0) {
        return Ok(none);
    }
    Ok(TrapAnalysis {
        has_minimum: true,
        barrier_height: barrier,
        barrier_height_uk: barrier / BOLTZMANN * 1e6,
        min_position: profile[at].z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::RB87_MASS;
    use std::f64::consts::PI;

    fn reference(d: f64, c4: f64) -> TrapConfig {
        TrapConfig { omega_trap: 2.0 * PI * 9e3, atom_mass: RB87_MASS, c4, gap_width: d, z_samples: 2001 }
    }

    #[test]
    fn harmonic_without_surface_force() {
        let cfg = reference(2.0, 0.0);
        let prof = potential_profile(&cfg).unwrap();
        let mid = prof.len() / 2;
        assert_eq!(prof[mid].z, 0.0);
        assert_eq!(prof[mid].u, 0.0);
        for (a, b) in prof.iter().zip(prof.iter().rev()) {
            assert_eq!(a.u, b.u);
        }
        let k = 0.5 * cfg.atom_mass * cfg.omega_trap * cfg.omega_trap;
        for p in &prof {
            assert_eq!(p.u, k * (p.z * 1e-6) * (p.z * 1e-6));
        }
        let a = trap_analysis(&cfg).unwrap();
        assert!(a.has_minimum);
        assert_eq!(a.min_position, 0.0);
        assert_eq!(a.barrier_height, prof[0].u);
    }

    #[test]
    fn wide_gap_is_harmonic_in_the_centre() {
        let cfg = reference(100.0, 1.2e-55);
        let k = 0.5 * RB87_MASS * (2.0 * PI * 9e3f64).powi(2);
        for z in [0.5, 2.0, 5.0, -8.0, 10.0] {
            let h = k * (z * 1e-6f64).powi(2);
            assert!((cfg.potential(z) - h).abs() / h < 1e-3, "z = {z}");
        }
    }

    #[test]
    fn reference_gap_holds_atoms() {
        let a = trap_analysis(&reference(2.0, 1.2e-55)).unwrap();
        assert!(a.has_minimum);
        assert!(a.min_position.abs() < 2.0 / 2002.0);
        assert!(a.barrier_height > 0.0);
    }

    #[test]
    fn strong_surface_force_removes_the_trap() {
        assert!(!trap_analysis(&reference(2.0, 1e-50)).unwrap().has_minimum);
        assert!(!trap_analysis(&reference(0.2, 1.2e-55)).unwrap().has_minimum);
    }

    #[test]
    fn profile_is_even() {
        let prof = potential_profile(&reference(1.7, 3e-55)).unwrap();
        for (a, b) in prof.iter().zip(prof.iter().rev()) {
            assert!((a.u - b.u).abs() <= 1e-12 * a.u.abs().max(1e-40));
        }
    }

    #[test]
    fn validation() {
        assert!(TrapConfig { z_samples: 100, ..reference(2.0, 1e-55) }.validate().is_err());
        assert!(reference(0.0, 1e-55).validate().is_err());
        assert!(reference(2.0, -1.0).validate().is_err());
    }

    #[test]
    fn csv_layout() {
        let prof = potential_profile(&TrapConfig { z_samples: 101, ..reference(2.0, 0.0) }).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&prof, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("z_um,U_J,U_uK\n"));
        assert_eq!(text.lines().count(), 102);
    }
}
