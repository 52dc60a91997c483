//! Plain-text project configuration: `[block]` headers followed by
//! `key = value` lines. `#` starts a comment. Every key is declared in
//! [`SCHEMA`]; anything else is rejected with its line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path.display(), line, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub const SCHEMA: &[(&str, &[&str])] = &[
    (
        "waveguide",
        &[
            "ridge_width_um",
            "ridge_height_um",
            "core_thickness_um",
            "cladding_thickness_um",
            "n_core",
            "n_clad",
            "n_exterior",
            "wavelength_nm",
        ],
    ),
    ("grid", &["nx", "ny", "window_x_um", "window_y_um"]),
    (
        "gap",
        &[
            "width_um",
            "n_interface",
            "series_tolerance",
            "p_max",
            "overlap_phase",
            "scan_min_um",
            "scan_max_um",
            "scan_steps",
            "phase_steps",
        ],
    ),
    (
        "cavity",
        &[
            "length_um",
            "n_group",
            "alpha_per_cm",
            "mirror_r_left",
            "mirror_r_right",
            "gap_round_trip_amplitude",
            "mode_area_um2",
            "enhancement",
        ],
    ),
    ("mirror", &["first_index", "second_index", "incident_index", "exit_index", "wavelength_nm", "pair_counts"]),
    ("atom", &["dipole_moment_Cm", "gamma_half_MHz", "transition_wavelength_nm", "mass_kg"]),
    ("trap", &["omega_trap_2pi_kHz", "atom_mass_kg", "c4_Jm4", "gap_width_um", "z_samples"]),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
pub struct Config {
    path: PathBuf,
    blocks: BTreeMap<String, (usize, BTreeMap<String, Entry>)>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: None,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self, ConfigError> {
        let err = |line: usize, message: String| ConfigError { path: path.to_path_buf(), line: Some(line), message };
        let mut blocks: BTreeMap<String, (usize, BTreeMap<String, Entry>)> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("malformed block header `{content}`")))?
                    .trim();
                if !SCHEMA.iter().any(|(b, _)| *b == name) {
                    return Err(err(line, format!("unknown block [{name}]")));
                }
                if blocks.contains_key(name) {
                    return Err(err(line, format!("block [{name}] appears twice")));
                }
                blocks.insert(name.to_string(), (line, BTreeMap::new()));
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let block = current.as_ref().ok_or_else(|| err(line, format!("key `{key}` appears before any [block]")))?;
            let allowed = SCHEMA.iter().find(|(b, _)| b == block).unwrap().1;
            if !allowed.contains(&key) {
                return Err(err(line, format!("unknown key `{key}` in [{block}]")));
            }
            if value.is_empty() {
                return Err(err(line, format!("key `{key}` has no value")));
            }
            let entries = &mut blocks.get_mut(block).unwrap().1;
            if entries.contains_key(key) {
                return Err(err(line, format!("key `{key}` repeated in [{block}]")));
            }
            entries.insert(key.to_string(), Entry { value: value.to_string(), line });
        }
        Ok(Self { path: path.to_path_buf(), blocks })
    }

    fn entry(&self, block: &str, key: &str) -> Option<&Entry> {
        self.blocks.get(block).and_then(|(_, e)| e.get(key))
    }

    pub fn error_at(&self, block: &str, key: &str, message: String) -> ConfigError {
        let line = self.entry(block, key).map(|e| e.line).or_else(|| self.blocks.get(block).map(|(l, _)| *l));
        ConfigError { path: self.path.clone(), line, message }
    }

    fn missing(&self, block: &str, key: &str) -> ConfigError {
        let line = self.blocks.get(block).map(|(l, _)| *l);
        let message = if line.is_some() {
            format!("missing required key `{key}` in [{block}]")
        } else {
            format!("missing block [{block}] (needed for required key `{key}`)")
        };
        ConfigError { path: self.path.clone(), line, message }
    }

    pub fn f64_opt(&self, block: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(e) = self.entry(block, key) else { return Ok(None) };
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(ConfigError {
                path: self.path.clone(),
                line: Some(e.line),
                message: format!("`{key}` = `{}` is not a finite number", e.value),
            }),
        }
    }

    pub fn f64_or(&self, block: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(block, key)?.unwrap_or(default))
    }

    pub fn f64_req(&self, block: &str, key: &str) -> Result<f64, ConfigError> {
        self.f64_opt(block, key)?.ok_or_else(|| self.missing(block, key))
    }

    pub fn usize_or(&self, block: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        let Some(e) = self.entry(block, key) else { return Ok(default) };
        e.value.parse::<usize>().map_err(|_| ConfigError {
            path: self.path.clone(),
            line: Some(e.line),
            message: format!("`{key}` = `{}` is not a non-negative integer", e.value),
        })
    }

    pub fn str_opt(&self, block: &str, key: &str) -> Option<&str> {
        self.entry(block, key).map(|e| e.value.as_str())
    }

    /// Comma-separated list of non-negative integers.
    pub fn usize_list_or(&self, block: &str, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        let Some(e) = self.entry(block, key) else { return Ok(default.to_vec()) };
        e.value
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ConfigError {
                path: self.path.clone(),
                line: Some(e.line),
                message: format!("`{key}` = `{}` is not a comma-separated list of integers", e.value),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config, ConfigError> {
        Config::parse(Path::new("t.conf"), text)
    }

    #[test]
    fn reads_blocks_and_values() {
        let c = parse("# demo\n[waveguide]\nn_core = 3.155  # core\n\n[grid]\nnx=128\n").unwrap();
        assert_eq!(c.f64_req("waveguide", "n_core").unwrap(), 3.155);
        assert_eq!(c.usize_or("grid", "nx", 256).unwrap(), 128);
        assert_eq!(c.usize_or("grid", "ny", 256).unwrap(), 256);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("[waveguide]\n\nn_cor = 3\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.message.contains("n_cor"));
        assert_eq!(parse("[nope]\n").unwrap_err().line, Some(1));
        assert_eq!(parse("n_core = 1\n").unwrap_err().line, Some(1));
        assert_eq!(parse("[grid]\nnx = 1\nnx = 2\n").unwrap_err().line, Some(3));
        assert_eq!(parse("[grid]\njunk\n").unwrap_err().line, Some(2));
        let c = parse("[waveguide]\nn_core = abc\n").unwrap();
        assert_eq!(c.f64_req("waveguide", "n_core").unwrap_err().line, Some(2));
    }

    #[test]
    fn missing_keys_are_named() {
        let c = parse("[waveguide]\nn_clad = 3.145\n").unwrap();
        let e = c.f64_req("waveguide", "n_core").unwrap_err();
        assert!(e.message.contains("n_core"));
        assert_eq!(e.line, Some(1));
        assert!(c.f64_req("trap", "c4_Jm4").unwrap_err().message.contains("[trap]"));
    }

    #[test]
    fn lists() {
        let c = parse("[mirror]\npair_counts = 3, 6\n").unwrap();
        assert_eq!(c.usize_list_or("mirror", "pair_counts", &[]).unwrap(), vec![3, 6]);
    }
}
