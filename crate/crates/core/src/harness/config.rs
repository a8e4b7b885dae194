//! Flat `key=value` experiment files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Every key
//! has a matching CLI flag (`grid_n` ↔ `--grid-n`) and the flag wins.

use std::path::{Path, PathBuf};

use super::{Method, SweepSpec};
use crate::error::{Error, Result};

/// Every recognised key, in the order they are documented.
pub const KEYS: &[&str] = &[
    "n_t",
    "n_r",
    "n_rf",
    "q_slots",
    "n_x",
    "grid_n",
    "n_paths",
    "spacing_ratio",
    "sigma_p2",
    "sigma_n2",
    "angle_mode",
    "pilots",
    "seed",
    "snr",
    "trials",
    "methods",
    "grid_sizes",
    "out",
    "ls_grid_n",
    "stop",
    "epsilon_rel",
    "aggregation",
    "noiseless",
    "element_cap",
    "ls1d_gram_cap",
];

/// Splits a config file body into ordered `(key, value)` pairs.
pub fn parse_pairs(text: &str, origin: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Format {
                path: origin.to_path_buf(),
                message: format!("line {}: expected key=value, got `{line}`", n + 1),
            });
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got `{value}`"))),
    }
}

/// Applies one setting to `spec`.
pub fn apply(spec: &mut SweepSpec, key: &str, value: &str) -> Result<()> {
    let cfg = &mut spec.base_config;
    match key {
        "n_t" => cfg.n_t = num(key, value)?,
        "n_r" => cfg.n_r = num(key, value)?,
        "n_rf" => cfg.n_rf = num(key, value)?,
        "q_slots" => cfg.q_slots = num(key, value)?,
        "n_x" => cfg.n_x = num(key, value)?,
        "grid_n" => cfg.grid_n = num(key, value)?,
        "n_paths" => cfg.n_paths = num(key, value)?,
        "spacing_ratio" => cfg.spacing_ratio = num(key, value)?,
        "sigma_p2" => cfg.sigma_p2 = num(key, value)?,
        "sigma_n2" => cfg.sigma_n2 = num(key, value)?,
        "angle_mode" => cfg.angle_mode = value.parse()?,
        "pilots" => cfg.pilots = value.parse()?,
        "seed" => cfg.seed = num(key, value)?,
        "snr" => spec.snr_points_db = list(key, value)?,
        "trials" => spec.trials = num(key, value)?,
        "methods" => {
            spec.methods = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse::<Method>)
                .collect::<Result<_>>()?
        }
        "grid_sizes" => spec.grid_sizes = list(key, value)?,
        "out" => spec.output_path = PathBuf::from(value),
        "ls_grid_n" => {
            let n: usize = num(key, value)?;
            spec.ls_grid_n = (n > 0).then_some(n);
        }
        "stop" => spec.stop = value.parse()?,
        "epsilon_rel" => spec.epsilon_rel = num(key, value)?,
        "aggregation" => spec.aggregation = value.parse()?,
        "noiseless" => spec.noiseless = flag(key, value)?,
        "element_cap" => spec.element_cap = num(key, value)?,
        "ls1d_gram_cap" => spec.ls1d_gram_cap = num(key, value)?,
        _ => return Err(Error::Config(format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Reads a config file on top of the defaults.
pub fn load(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut spec = SweepSpec::default();
    for (k, v) in parse_pairs(&text, path)? {
        apply(&mut spec, &k, &v)?;
    }
    Ok(spec)
}
