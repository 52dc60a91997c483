//! Normal-incidence reflectivity of thin-film stacks by characteristic matrices.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub index: f64,
    /// nm
    pub thickness: f64,
}

/// Layers listed from the incident side towards the exit medium.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorStack {
    pub layers: Vec<Layer>,
    pub n_incident: f64,
    pub n_exit: f64,
}

impl MirrorStack {
    /// `pairs` repetitions of (`n_first`, `n_second`), each layer a quarter wave thick at `wavelength` nm.
    pub fn quarter_wave(pairs: usize, n_first: f64, n_second: f64, wavelength: f64, n_incident: f64, n_exit: f64) -> Self {
        let quarter = |n: f64| Layer { index: n, thickness: wavelength / (4.0 * n) };
        let layers = (0..pairs).flat_map(|_| [quarter(n_first), quarter(n_second)]).collect();
        Self { layers, n_incident, n_exit }
    }

    pub fn validate(&self) -> Result<()> {
        for n in [self.n_incident, self.n_exit].into_iter().chain(self.layers.iter().map(|l| l.index)) {
            if !(n >= 1.0) {
                return Err(Error::InvalidIndex(n));
            }
        }
        if let Some(l) = self.layers.iter().find(|l| !(l.thickness > 0.0)) {
            return Err(Error::InvalidParameter(format!("layer thickness {} nm must be positive", l.thickness)));
        }
        Ok(())
    }
}

/// Intensity reflectivity `|r|²` seen from the incident medium.
pub fn stack_reflectivity(stack: &MirrorStack, wavelength: f64) -> Result<f64> {
    stack.validate()?;
    if !(wavelength > 0.0) {
        return Err(Error::InvalidParameter(format!("wavelength {wavelength} nm must be positive")));
    }
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    for layer in &stack.layers {
        let delta = 2.0 * PI * layer.index * layer.thickness / wavelength;
        let (s, c) = delta.sin_cos();
        let l = [[Complex64::new(c, 0.0), i * s / layer.index], [i * s * layer.index, Complex64::new(c, 0.0)]];
        m = [
            [m[0][0] * l[0][0] + m[0][1] * l[1][0], m[0][0] * l[0][1] + m[0][1] * l[1][1]],
            [m[1][0] * l[0][0] + m[1][1] * l[1][0], m[1][0] * l[0][1] + m[1][1] * l[1][1]],
        ];
    }
    let (n0, ns) = (stack.n_incident, stack.n_exit);
    let b = m[0][0] + m[0][1] * ns;
    let c = m[1][0] + m[1][1] * ns;
    let r = (n0 * b - c) / (n0 * b + c);
    Ok(r.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GUIDE: f64 = 3.155;
    const ZNS: f64 = 2.35;
    const YF3: f64 = 1.50;

    fn coating(pairs: usize) -> MirrorStack {
        MirrorStack::quarter_wave(pairs, YF3, ZNS, 780.0, GUIDE, 1.0)
    }

    #[test]
    fn bare_facet_is_fresnel() {
        let bare = MirrorStack { layers: vec![], n_incident: GUIDE, n_exit: 1.0 };
        let r = stack_reflectivity(&bare, 780.0).unwrap();
        assert!((r - ((GUIDE - 1.0) / (GUIDE + 1.0)).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn quarter_wave_pair_closed_form() {
        // For quarter-wave layers the stack acts as an admittance transformer:
        // Y = (n1/n2)^(2N) · n_exit, r = (n0 − Y)/(n0 + Y).
        for pairs in 1..=6 {
            let y = (YF3 / ZNS).powi(2 * pairs as i32);
            let expected = ((GUIDE - y) / (GUIDE + y)).powi(2);
            assert!((stack_reflectivity(&coating(pairs), 780.0).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn three_and_six_pairs() {
        let r3 = stack_reflectivity(&coating(3), 780.0).unwrap();
        let r6 = stack_reflectivity(&coating(6), 780.0).unwrap();
        assert!((r3 - 0.913).abs() < 0.015, "{r3}");
        assert!((r6 - 0.994).abs() < 0.003, "{r6}");
    }

    #[test]
    fn reflectivity_grows_with_pairs() {
        let rs: Vec<f64> = (0..10).map(|p| stack_reflectivity(&coating(p), 780.0).unwrap()).collect();
        assert!(rs.windows(2).all(|w| w[1] > w[0]), "{rs:?}");
    }

    #[test]
    fn half_wave_layer_is_absent() {
        let mut s = MirrorStack { layers: vec![], n_incident: GUIDE, n_exit: 1.0 };
        let bare = stack_reflectivity(&s, 780.0).unwrap();
        s.layers.push(Layer { index: ZNS, thickness: 780.0 / (2.0 * ZNS) });
        assert!((stack_reflectivity(&s, 780.0).unwrap() - bare).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_layers() {
        let s = MirrorStack { layers: vec![Layer { index: 0.8, thickness: 10.0 }], n_incident: GUIDE, n_exit: 1.0 };
        assert!(stack_reflectivity(&s, 780.0).is_err());
        let t = MirrorStack { layers: vec![Layer { index: 2.0, thickness: 0.0 }], n_incident: GUIDE, n_exit: 1.0 };
        assert!(stack_reflectivity(&t, 780.0).is_err());
    }
}
