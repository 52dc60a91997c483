use std::f64::consts::PI;
use std::path::Path;

use gapcav::cavity::{
    finesse_from_round_trip, fit_losses, stack_reflectivity, CavitySpec, FinessePoint, MirrorStack,
};
use gapcav::cqed::{full_budget, AtomParams};
use gapcav::gap::{loss_spectrum, write_loss_csv, write_phase_csv, GapConfig, GapModel, OverlapPhase};
use gapcav::trap::{potential_profile, trap_analysis, write_profile_csv, TrapConfig};
use gapcav::waveguide::{solve_fundamental_mode, ModeSolution, WaveguideGeometry};
use gapcav::{Error, GridSpec};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::output::{write_atomic, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Data(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::NoGuidedMode { .. } => 3,
                Error::EigenNotConverged { .. } | Error::SeriesNotConverged { .. } => 4,
                Error::FitDiverged { .. } | Error::RankDeficient | Error::NoSolution(_) => 5,
                _ => 2,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn geometry(cfg: &Config) -> Result<WaveguideGeometry> {
    let b = "waveguide";
    let geom = WaveguideGeometry {
        ridge_width: cfg.f64_req(b, "ridge_width_um")?,
        ridge_height: cfg.f64_req(b, "ridge_height_um")?,
        core_thickness: cfg.f64_req(b, "core_thickness_um")?,
        cladding_thickness: cfg.f64_or(b, "cladding_thickness_um", 4.0)?,
        n_core: cfg.f64_req(b, "n_core")?,
        n_clad: cfg.f64_req(b, "n_clad")?,
        n_exterior: cfg.f64_or(b, "n_exterior", 1.0)?,
        wavelength: cfg.f64_req(b, "wavelength_nm")?,
    };
    geom.validate().map_err(|e| cfg.error_at(b, "", e.to_string()))?;
    Ok(geom)
}

fn grid(cfg: &Config) -> Result<GridSpec> {
    let d = GridSpec::default();
    let g = GridSpec {
        nx: cfg.usize_or("grid", "nx", d.nx)?,
        ny: cfg.usize_or("grid", "ny", d.ny)?,
        window_x: cfg.f64_or("grid", "window_x_um", d.window_x)?,
        window_y: cfg.f64_or("grid", "window_y_um", d.window_y)?,
    };
    g.validate().map_err(|e| cfg.error_at("grid", "", e.to_string()))?;
    Ok(g)
}

fn gap_config(cfg: &Config) -> Result<GapConfig> {
    let b = "gap";
    let d = GapConfig::default();
    let overlap_phase = match cfg.str_opt(b, "overlap_phase") {
        None | Some("separated") => OverlapPhase::Separated,
        Some("diffractive") => OverlapPhase::Diffractive,
        Some(other) => {
            return Err(cfg
                .error_at(b, "overlap_phase", format!("overlap_phase must be `separated` or `diffractive`, got `{other}`"))
                .into())
        }
    };
    let g = GapConfig {
        width: cfg.f64_or(b, "width_um", d.width)?,
        n_interface: cfg.f64_or(b, "n_interface", d.n_interface)?,
        series_tolerance: cfg.f64_or(b, "series_tolerance", d.series_tolerance)?,
        p_max: cfg.usize_or(b, "p_max", d.p_max)?,
        overlap_phase,
    };
    g.validate().map_err(|e| cfg.error_at(b, "", e.to_string()))?;
    Ok(g)
}

fn solve_mode(cfg: &Config) -> Result<ModeSolution> {
    let geom = geometry(cfg)?;
    let grid = grid(cfg)?;
    Ok(solve_fundamental_mode(&geom, &grid)?)
}

pub fn mode(input: &Path, out: &Path) -> Result<String> {
    let cfg = Config::load(input)?;
    let geom = geometry(&cfg)?;
    let grid = grid(&cfg)?;
    let mode = solve_fundamental_mode(&geom, &grid)?;

    let mut r = Report::new("gapcav mode");
    r.num("n_eff", mode.n_eff)
        .num("mode_area_um2", mode.mode_area)
        .num("boundary_ratio", mode.field.boundary_ratio())
        .kv("nx", grid.nx.to_string())
        .kv("ny", grid.ny.to_string())
        .num("window_x_um", grid.window_x)
        .num("window_y_um", grid.window_y)
        .num("wavelength_nm", geom.wavelength);
    let report = r.into_string();

    let mut csv = Vec::new();
    mode.field.write_csv(&mut csv)?;
    write_atomic(out, "mode_field.csv", &csv)?;
    write_atomic(out, "mode_report.txt", report.as_bytes())?;
    Ok(report)
}

pub fn gap_scan(
    input: &Path,
    out: &Path,
    d_min: Option<f64>,
    d_max: Option<f64>,
    steps: Option<usize>,
    phase_scan: bool,
) -> Result<String> {
    let cfg = Config::load(input)?;
    let gap = gap_config(&cfg)?;
    let d_min = match d_min {
        Some(v) => v,
        None => cfg.f64_or("gap", "scan_min_um", 0.3)?,
    };
    let d_max = match d_max {
        Some(v) => v,
        None => cfg.f64_or("gap", "scan_max_um", 3.0)?,
    };
    let steps = match steps {
        Some(v) => v,
        None => cfg.usize_or("gap", "scan_steps", 271)?,
    };
    if !(d_min >= 0.0 && d_min < d_max) {
        return Err(CliError::Data(format!("scan range must satisfy 0 <= d_min < d_max, got {d_min} .. {d_max}")));
    }
    if steps < 2 {
        return Err(CliError::Data(format!("scan needs at least 2 steps, got {steps}")));
    }
    let phase_steps = cfg.usize_or("gap", "phase_steps", 360)?;
    if phase_scan && phase_steps < 2 {
        return Err(cfg.error_at("gap", "phase_steps", "phase_steps must be at least 2".into()).into());
    }
    let mode = solve_mode(&cfg)?;

    let points = loss_spectrum(&mode.field, &gap, d_min, d_max, steps)?;
    let peaks: Vec<String> = points
        .windows(3)
        .filter(|w| w[1].loss > w[0].loss && w[1].loss >= w[2].loss)
        .map(|w| gapcav::format::fmt6(w[1].width))
        .collect();
    let mut r = Report::new("gapcav gap-scan");
    r.num("d_min_um", d_min)
        .num("d_max_um", d_max)
        .kv("steps", steps.to_string())
        .num("n_interface", gap.n_interface)
        .num("mode_area_um2", mode.mode_area)
        .kv("loss_maxima_um", peaks.join(","));

    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut csv = Vec::new();
    write_loss_csv(&points, &mut csv)?;
    files.push(("gap_scan.csv", csv));

    if phase_scan {
        let model = GapModel::new(&mode.field)?;
        let scattering = model.scattering(&gap)?;
        let scan = model.phase_scan(&gap, phase_steps)?;
        let ext = model.extreme_phases(&gap)?;
        let enh_c = model.enhancement(&gap, ext.constructive)?;
        let enh_d = model.enhancement(&gap, ext.destructive)?;
        r.section("phase scan")
            .num("gap_width_um", gap.width)
            .num("R", scattering.reflection)
            .num("T", scattering.transmission)
            .num("loss", scattering.loss)
            .num("r_rt_min", ext.r_min)
            .num("phase_constructive_rad", ext.constructive)
            .num("r_rt_max", ext.r_max)
            .num("phase_destructive_rad", ext.destructive)
            .num("finesse_gap_limited", finesse_from_round_trip(ext.r_min)?)
            .num("field_enhancement_constructive", enh_c)
            .num("field_enhancement_destructive", enh_d);
        let mut csv = Vec::new();
        write_phase_csv(&scan, &mut csv)?;
        files.push(("phase_scan.csv", csv));
    }
    let report = r.into_string();
    files.push(("gap_report.txt", report.clone().into_bytes()));
    for (name, bytes) in &files {
        write_atomic(out, name, bytes)?;
    }
    Ok(report)
}

fn read_finesse_csv(path: &Path) -> Result<Vec<FinessePoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let with_sigma = match names.as_slice() {
        ["length_um", "finesse"] => false,
        ["length_um", "finesse", "sigma"] => true,
        _ => {
            return Err(CliError::Data(format!(
                "{}:1: header must be `length_um,finesse` or `length_um,finesse,sigma`, got `{}`",
                path.display(),
                names.join(",")
            )))
        }
    };
    let mut data = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |col: usize| -> Result<f64> {
            let raw = record.get(col).unwrap_or("");
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                CliError::Data(format!(
                    "{}: row {line}, column {} (`{}`): `{raw}` is not a number",
                    path.display(),
                    col + 1,
                    names[col]
                ))
            })
        };
        data.push(FinessePoint {
            length: cell(0)?,
            finesse: cell(1)?,
            sigma: if with_sigma { Some(cell(2)?) } else { None },
        });
    }
    Ok(data)
}

pub fn fit(input: &Path, out: &Path) -> Result<String> {
    let data = read_finesse_csv(input)?;
    let fit = fit_losses(&data)?;
    let mut r = Report::new("gapcav fit");
    r.num("R_fit", fit.r_fit)
        .num("alpha_fit_per_cm", fit.alpha_fit)
        .num("sigma_R", fit.sigma_r)
        .num("sigma_alpha", fit.sigma_alpha)
        .num("cov_R_R", fit.covariance[0][0])
        .num("cov_R_alpha", fit.covariance[0][1])
        .num("cov_alpha_alpha", fit.covariance[1][1])
        .num("residual_norm", fit.residual_norm)
        .kv("points", data.len().to_string())
        .kv("weighted", data[0].sigma.is_some().to_string())
        .kv("iterations", fit.iterations.to_string());
    let report = r.into_string();
    write_atomic(out, "fit_report.txt", report.as_bytes())?;
    Ok(report)
}

fn atom(cfg: &Config) -> Result<AtomParams> {
    let d = AtomParams::rb87_d2();
    let b = "atom";
    let a = AtomParams {
        dipole_moment: cfg.f64_or(b, "dipole_moment_Cm", d.dipole_moment)?,
        gamma_half: cfg.f64_or(b, "gamma_half_MHz", d.gamma_half)?,
        transition_wavelength: cfg.f64_or(b, "transition_wavelength_nm", d.transition_wavelength)?,
        mass: cfg.f64_or(b, "mass_kg", d.mass)?,
    };
    a.validate().map_err(|e| cfg.error_at(b, "", e.to_string()))?;
    Ok(a)
}

pub fn budget(input: &Path, out: &Path, no_gap: bool) -> Result<String> {
    let cfg = Config::load(input)?;
    let b = "cavity";
    let atom = atom(&cfg)?;
    let mut spec = CavitySpec {
        length: cfg.f64_req(b, "length_um")?,
        n_group: cfg.f64_req(b, "n_group")?,
        alpha: cfg.f64_req(b, "alpha_per_cm")?,
        mirror_r_left: cfg.f64_or(b, "mirror_r_left", 1.0)?,
        mirror_r_right: cfg.f64_or(b, "mirror_r_right", 1.0)?,
        gap_round_trip_amplitude: None,
    };
    spec.validate().map_err(|e| cfg.error_at(b, "", e.to_string()))?;
    let enhancement = cfg.f64_or(b, "enhancement", 1.0)?;
    if !(enhancement >= 1.0) {
        return Err(cfg.error_at(b, "enhancement", format!("enhancement {enhancement} must be >= 1")).into());
    }
    let configured_area = cfg.f64_opt(b, "mode_area_um2")?;
    let configured_gap = if no_gap { None } else { cfg.f64_opt(b, "gap_round_trip_amplitude")? };
    let stack = mirror_stacks(&cfg)?;
    let gap = if !no_gap && configured_gap.is_none() { Some(gap_config(&cfg)?) } else { None };

    let needs_mode = configured_area.is_none() || gap.is_some();
    let mode = if needs_mode { Some(solve_mode(&cfg)?) } else { None };
    let (area, area_source) = match configured_area {
        Some(a) => (a, "config"),
        None => (mode.as_ref().unwrap().mode_area, "mode_solver"),
    };
    let (gap_amp, gap_source) = match (no_gap, configured_gap, gap) {
        (true, _, _) => (None, "none"),
        (false, Some(a), _) => (Some(a), "config"),
        (false, None, Some(g)) => {
            let model = GapModel::new(&mode.as_ref().unwrap().field)?;
            (Some(model.extreme_phases(&g)?.r_min), "gap_model_constructive")
        }
        (false, None, None) => unreachable!(),
    };
    spec.gap_round_trip_amplitude = gap_amp;
    spec.validate().map_err(|e| cfg.error_at(b, "gap_round_trip_amplitude", e.to_string()))?;
    let budget = full_budget(area, &spec, &atom, enhancement)?;

    let mut r = Report::new("gapcav budget");
    r.num("length_um", spec.length)
        .num("mode_area_um2", area)
        .kv("mode_area_source", area_source)
        .kv("gap_round_trip_amplitude", gap_amp.map_or("none".to_string(), gapcav::format::fmt6))
        .kv("gap_source", gap_source)
        .num("round_trip", budget.round_trip)
        .num("finesse_intr", budget.finesse_intr)
        .num("fsr_GHz", budget.fsr_ghz)
        .num("g_MHz", budget.g_over_2pi)
        .num("kappa_intr_GHz", budget.kappa_intr_over_2pi)
        .num("kappa_T_GHz", budget.kappa_t_over_2pi)
        .num("kappa_total_GHz", budget.kappa_total_over_2pi)
        .num("linewidth_2kappa_intr_GHz", 2.0 * budget.kappa_intr_over_2pi)
        .num("gamma_MHz", atom.gamma_half)
        .num("enhancement", budget.enhancement)
        .num("C", budget.cooperativity)
        .kv("diverged", budget.diverged.to_string());
    r.section("mirror stacks");
    for (pairs, reflectivity) in &stack {
        r.num(&format!("R_{pairs}_pairs"), *reflectivity);
    }
    let report = r.into_string();
    write_atomic(out, "budget_report.txt", report.as_bytes())?;
    Ok(report)
}

fn mirror_stacks(cfg: &Config) -> Result<Vec<(usize, f64)>> {
    let b = "mirror";
    let first = cfg.f64_or(b, "first_index", 1.50)?;
    let second = cfg.f64_or(b, "second_index", 2.35)?;
    let incident = cfg.f64_or(b, "incident_index", 3.155)?;
    let exit = cfg.f64_or(b, "exit_index", 1.0)?;
    let wavelength = cfg.f64_or(b, "wavelength_nm", 780.0)?;
    let pairs = cfg.usize_list_or(b, "pair_counts", &[3, 6])?;
    pairs
        .iter()
        .map(|&p| {
            let stack = MirrorStack::quarter_wave(p, first, second, wavelength, incident, exit);
            let r = stack_reflectivity(&stack, wavelength).map_err(|e| cfg.error_at(b, "", e.to_string()))?;
            Ok((p, r))
        })
        .collect()
}

pub fn trap(input: &Path, out: &Path) -> Result<String> {
    let cfg = Config::load(input)?;
    let b = "trap";
    let mass_default = atom(&cfg)?.mass;
    let trap = TrapConfig {
        omega_trap: 2.0 * PI * 1e3 * cfg.f64_or(b, "omega_trap_2pi_kHz", 9.0)?,
        atom_mass: cfg.f64_or(b, "atom_mass_kg", mass_default)?,
        c4: cfg.f64_req(b, "c4_Jm4")?,
        gap_width: cfg.f64_or(b, "gap_width_um", 2.0)?,
        z_samples: cfg.usize_or(b, "z_samples", 2001)?,
    };
    trap.validate().map_err(|e| cfg.error_at(b, "", e.to_string()))?;
    let profile = potential_profile(&trap)?;
    let analysis = trap_analysis(&trap)?;
    let mut r = Report::new("gapcav trap");
    r.num("gap_width_um", trap.gap_width)
        .num("c4_Jm4", trap.c4)
        .kv("has_minimum", analysis.has_minimum.to_string())
        .num("barrier_J", analysis.barrier_height)
        .num("barrier_uK", analysis.barrier_height_uk)
        .num("min_position_um", analysis.min_position);
    let report = r.into_string();
    let mut csv = Vec::new();
    write_profile_csv(&profile, &mut csv)?;
    write_atomic(out, "trap_profile.csv", &csv)?;
    write_atomic(out, "trap_report.txt", report.as_bytes())?;
    Ok(report)
}
