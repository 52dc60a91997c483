//! Weighted least-squares fit of mirror reflectivity `R` and propagation loss
//! `α` to finesse measured at several cavity lengths, using the model
//! `F(l) = π√g/(1−g)`, `g = R·exp(−α·l)`.

use crate::error::{Error, Result};

use super::{finesse_from_round_trip, round_trip_from_finesse};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinessePoint {
    /// µm
    pub length: f64,
    pub finesse: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub r_fit: f64,
    /// cm⁻¹
    pub alpha_fit: f64,
    pub sigma_r: f64,
    pub sigma_alpha: f64,
    /// Order (R, α).
    pub covariance: [[f64; 2]; 2],
    /// `√χ²` of the weighted residuals.
    pub residual_norm: f64,
    pub iterations: usize,
}

const STEP_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;

fn check(data: &[FinessePoint]) -> Result<()> {
    if data.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 points, got {}", data.len())));
    }
    let first = data[0].length;
    if data.iter().all(|p| p.length == first) {
        return Err(Error::InsufficientData("need at least 2 distinct lengths".into()));
    }
    for p in data {
        if !(p.length > 0.0 && p.finesse > 0.0) || !p.length.is_finite() || !p.finesse.is_finite() {
            return Err(Error::InvalidParameter(format!("point ({}, {}) must be positive", p.length, p.finesse)));
        }
        if let Some(s) = p.sigma {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidParameter(format!("sigma {s} must be positive")));
            }
        }
    }
    let with_sigma = data.iter().filter(|p| p.sigma.is_some()).count();
    if with_sigma != 0 && with_sigma != data.len() {
        return Err(Error::InvalidParameter("sigmas must be given for all points or none".into()));
    }
    Ok(())
}

/// Starting point: `R` from the highest finesse taken as lossless, `α` from the shortest and longest lengths.
fn initial_guess(data: &[FinessePoint]) -> Result<(f64, f64)> {
    let best = data.iter().max_by(|a, b| a.finesse.total_cmp(&b.finesse)).unwrap();
    let r0 = round_trip_from_finesse(best.finesse)?;
    let short = data.iter().min_by(|a, b| a.length.total_cmp(&b.length)).unwrap();
    let long = data.iter().max_by(|a, b| a.length.total_cmp(&b.length)).unwrap();
    let (g1, g2) = (round_trip_from_finesse(short.finesse)?, round_trip_from_finesse(long.finesse)?);
    let alpha0 = ((g1 / g2).ln() / ((long.length - short.length) * 1e-4)).max(0.0);
    Ok((r0, alpha0))
}

pub fn fit_losses(data: &[FinessePoint]) -> Result<FitResult> {
    check(data)?;
    fit_losses_from(data, initial_guess(data)?)
}

/// Levenberg-Marquardt from an explicit starting point `(R, α)`.
pub fn fit_losses_from(data: &[FinessePoint], start: (f64, f64)) -> Result<FitResult> {
    check(data)?;
    let weighted = data[0].sigma.is_some();
    let weight = |p: &FinessePoint| p.sigma.map_or(1.0, |s| 1.0 / s);

    // Weighted residuals and Jacobian rows; None if any round trip leaves (0, 1).
    let evaluate = |r: f64, alpha: f64| -> Option<(Vec<f64>, Vec<[f64; 2]>)> {
        let mut res = Vec::with_capacity(data.len());
        let mut jac = Vec::with_capacity(data.len());
        for p in data {
            let l = p.length * 1e-4;
            let decay = (-alpha * l).exp();
            let g = r * decay;
            let f = finesse_from_round_trip(g).ok()?;
            let df_dg = std::f64::consts::PI * (1.0 + g) / (2.0 * g.sqrt() * (1.0 - g).powi(2));
            let w = weight(p);
            res.push(w * (f - p.finesse));
            jac.push([w * df_dg * decay, -w * df_dg * l * g]);
        }
        Some((res, jac))
    };
    let cost = |res: &[f64]| res.iter().map(|r| r * r).sum::<f64>();

    let (mut r, mut alpha) = start;
    let (mut res, mut jac) = evaluate(r, alpha).ok_or_else(|| {
        Error::InvalidParameter(format!("starting point R = {r}, alpha = {alpha} is outside the model domain"))
    })?;
    let mut chi2 = cost(&res);
    let mut lambda = 1e-3;

    for iteration in 1..=MAX_ITER {
        let (jtj, jtr) = normal_equations(&jac, &res);
        let mut a = jtj;
        a[0][0] *= 1.0 + lambda;
        a[1][1] *= 1.0 + lambda;
        let step = solve2(a, [-jtr[0], -jtr[1]]).ok_or(Error::RankDeficient)?;
        let (rn, an) = (r + step[0], alpha + step[1]);
        let trial = if rn > 0.0 { evaluate(rn, an) } else { None };
        match trial {
            Some((res_n, jac_n)) if cost(&res_n) <= chi2 => {
                let small = step[0].abs() <= STEP_TOL * r.abs().max(1e-12)
                    && step[1].abs() <= STEP_TOL * alpha.abs().max(1e-3);
                r = rn;
                alpha = an;
                res = res_n;
                jac = jac_n;
                chi2 = cost(&res);
                lambda = (lambda / 10.0).max(1e-12);
                if small {
                    return finish(r, alpha, &res, &jac, weighted, iteration);
                }
            }
            _ => {
                lambda *= 10.0;
                if lambda > 1e16 {
                    // No descent left at machine precision: the current point is the optimum.
                    return finish(r, alpha, &res, &jac, weighted, iteration);
                }
            }
        }
    }
    Err(Error::FitDiverged { iterations: MAX_ITER })
}

fn normal_equations(jac: &[[f64; 2]], res: &[f64]) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut jtj = [[0.0; 2]; 2];
    let mut jtr = [0.0; 2];
    for (row, r) in jac.iter().zip(res) {
        for i in 0..2 {
            jtr[i] += row[i] * r;
            for j in 0..2 {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    (jtj, jtr)
}

fn solve2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a[0][0].abs() * a[1][1].abs();
    if det.abs() <= 1e-14 * scale || !det.is_finite() || scale == 0.0 {
        return None;
    }
    Some([(b[0] * a[1][1] - b[1] * a[0][1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det])
}

fn finish(r: f64, alpha: f64, res: &[f64], jac: &[[f64; 2]], weighted: bool, iterations: usize) -> Result<FitResult> {
    let (jtj, _) = normal_equations(jac, res);
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    if det.abs() <= 1e-14 * jtj[0][0].abs() * jtj[1][1].abs() || det == 0.0 {
        return Err(Error::RankDeficient);
    }
    let chi2: f64 = res.iter().map(|x| x * x).sum();
    let dof = (res.len() - 2) as f64;
    let s2 = if weighted { 1.0 } else { chi2 / dof };
    let cov = [
        [s2 * jtj[1][1] / det, -s2 * jtj[0][1] / det],
        [-s2 * jtj[1][0] / det, s2 * jtj[0][0] / det],
    ];
    Ok(FitResult {
        r_fit: r,
        alpha_fit: alpha,
        sigma_r: cov[0][0].sqrt(),
        sigma_alpha: cov[1][1].sqrt(),
        covariance: cov,
        residual_norm: chi2.sqrt(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(r: f64, alpha: f64, lengths: &[f64]) -> Vec<FinessePoint> {
        lengths
            .iter()
            .map(|&l| FinessePoint {
                length: l,
                finesse: finesse_from_round_trip(r * (-alpha * l * 1e-4).exp()).unwrap(),
                sigma: None,
            })
            .collect()
    }

    #[test]
    fn synthetic_values_match_reference_points() {
        let data = synthetic(0.89, 1.07, &[260.0, 650.0, 1300.0]);
        let f: Vec<f64> = data.iter().map(|p| p.finesse).collect();
        assert!((f[0] - 21.7).abs() < 0.05 && (f[1] - 16.9).abs() < 0.05 && (f[2] - 12.3).abs() < 0.05, "{f:?}");
    }

    #[test]
    fn recovers_noiseless_parameters() {
        let fit = fit_losses(&synthetic(0.89, 1.07, &[260.0, 650.0, 1300.0])).unwrap();
        assert!((fit.r_fit - 0.89).abs() / 0.89 < 1e-6);
        assert!((fit.alpha_fit - 1.07).abs() / 1.07 < 1e-6);
        assert!(fit.residual_norm < 1e-8);
    }

    #[test]
    fn rejects_underdetermined_data() {
        let two = synthetic(0.89, 1.07, &[260.0, 650.0]);
        assert!(matches!(fit_losses(&two), Err(Error::InsufficientData(_))));
        let same = synthetic(0.89, 1.07, &[260.0, 260.0, 260.0]);
        assert!(matches!(fit_losses(&same), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn covariance_is_symmetric_positive() {
        let mut data = synthetic(0.89, 1.07, &[260.0, 650.0, 1300.0, 400.0]);
        data[1].finesse *= 1.02;
        data[3].finesse *= 0.99;
        let fit = fit_losses(&data).unwrap();
        let c = fit.covariance;
        assert_eq!(c[0][1], c[1][0]);
        assert!(c[0][0] > 0.0 && c[1][1] > 0.0 && c[0][0] * c[1][1] - c[0][1] * c[1][0] > 0.0);
    }

    #[test]
    fn deterministic() {
        let mut data = synthetic(0.9, 2.0, &[200.0, 500.0, 900.0, 1500.0]);
        data[2].finesse *= 1.03;
        assert_eq!(fit_losses(&data).unwrap(), fit_losses(&data).unwrap());
    }
}
