use std::path::Path;
use std::str::FromStr;

use effham_core::cqed::{CqedParams, Levels};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Reads a TOML or JSON parameter file and lays its keys over `defaults`.
/// The format follows the extension; anything but `.toml` is read as JSON.
pub fn load_params(path: Option<&Path>, defaults: CqedParams, levels: Option<usize>) -> CliResult<CqedParams> {
    let mut merged = serde_json::to_value(&defaults).map_err(CliError::input)?;
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let overlay: Value = if path.extension().is_some_and(|x| x == "toml") {
            let table: toml::Value = toml::from_str(&text).map_err(CliError::input)?;
            serde_json::to_value(table).map_err(CliError::input)?
        } else {
            serde_json::from_str(&text).map_err(CliError::input)?
        };
        let Value::Object(fields) = overlay else {
            return Err(CliError::Input("config must be a table of parameters".into()));
        };
        let target = merged.as_object_mut().expect("params serialize to an object");
        for (k, v) in fields {
            target.insert(k, v);
        }
    }
    let mut params: CqedParams = serde_json::from_value(merged).map_err(CliError::input)?;
    if let Some(n) = levels {
        params.levels = Levels::Uniform(n);
    }
    params.validate().map_err(CliError::input)?;
    Ok(params)
}

/// A named 1-D sweep, `name=start:stop:steps`, with `steps` points
/// including both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(name: &str, start: f64, stop: f64, steps: usize) -> Self {
        Self {
            name: name.to_string(),
            start,
            stop,
            steps,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                self.start * (1.0 - t) + self.stop * t
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("grid `{s}` is not name=start:stop:steps"))?;
        let parts: Vec<&str> = range.split(':').collect();
        let [start, stop, steps] = parts.as_slice() else {
            return Err(format!("grid `{s}` is not name=start:stop:steps"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("grid `{s}`: {e}"));
        let steps: usize = steps.trim().parse().map_err(|e| format!("grid `{s}`: {e}"))?;
        if steps == 0 {
            return Err(format!("grid `{s}` is empty"));
        }
        let (start, stop) = (num(start)?, num(stop)?);
        if !start.is_finite() || !stop.is_finite() {
            return Err(format!("grid `{s}` has a non-finite bound"));
        }
        Ok(Grid::new(name.trim(), start, stop, steps))
    }
}

/// Each fallback grid, replaced by the last command-line grid of that name.
/// Unknown grid names are rejected so typos do not pass silently.
pub fn pick_grids(given: &[Grid], fallbacks: &[Grid]) -> CliResult<Vec<Grid>> {
    for g in given {
        if !fallbacks.iter().any(|f| f.name == g.name) {
            let known: Vec<&str> = fallbacks.iter().map(|f| f.name.as_str()).collect();
            return Err(CliError::Input(format!(
                "unknown grid `{}` (expected one of {})",
                g.name,
                known.join(", ")
            )));
        }
    }
    Ok(fallbacks
        .iter()
        .map(|f| given.iter().rev().find(|g| g.name == f.name).unwrap_or(f).clone())
        .collect())
}
