//! Flat `key=value` scenario files merged with command-line overrides.

use std::fs;
use std::path::Path;

use fluorospec::spectra::GridSpec;
use fluorospec::SystemParams;

use crate::CliError;

pub const KEYS: [&str; 12] = [
    "gamma",
    "b_pi",
    "b_sigma",
    "omega_abs",
    "omega_phase",
    "delta_detuning",
    "delta_splitting",
    "zeeman_b",
    "grid_min",
    "grid_max",
    "grid_points",
    "lambda",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub gamma: Option<f64>,
    pub b_pi: Option<f64>,
    pub b_sigma: Option<f64>,
    pub omega_abs: Option<f64>,
    pub omega_phase: Option<f64>,
    pub delta_detuning: Option<f64>,
    pub delta_splitting: Option<f64>,
    pub zeeman_b: Option<f64>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub lambda: Option<f64>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut s = Scenario::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", n + 1)))?;
            s.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let num = || -> Result<f64, String> {
            let v: f64 = value.parse().map_err(|_| format!("'{value}' is not a number for {key}"))?;
            if !v.is_finite() {
                return Err(format!("{key} must be finite"));
            }
            Ok(v)
        };
        match key {
            "gamma" => self.gamma = Some(num()?),
            "b_pi" => self.b_pi = Some(num()?),
            "b_sigma" => self.b_sigma = Some(num()?),
            "omega_abs" => self.omega_abs = Some(num()?),
            "omega_phase" => self.omega_phase = Some(num()?),
            "delta_detuning" => self.delta_detuning = Some(num()?),
            "delta_splitting" => self.delta_splitting = Some(num()?),
            "zeeman_b" => self.zeeman_b = Some(num()?),
            "grid_min" => self.grid_min = Some(num()?),
            "grid_max" => self.grid_max = Some(num()?),
            "grid_points" => {
                self.grid_points = Some(
                    value
                        .parse()
                        .map_err(|_| format!("'{value}' is not a point count"))?,
                )
            }
            "lambda" => self.lambda = Some(num()?),
            _ => return Err(format!("unknown key '{key}' (known: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    /// Values set in `other` win.
    pub fn merged(self, other: Scenario) -> Scenario {
        Scenario {
            gamma: other.gamma.or(self.gamma),
            b_pi: other.b_pi.or(self.b_pi),
            b_sigma: other.b_sigma.or(self.b_sigma),
            omega_abs: other.omega_abs.or(self.omega_abs),
            omega_phase: other.omega_phase.or(self.omega_phase),
            delta_detuning: other.delta_detuning.or(self.delta_detuning),
            delta_splitting: other.delta_splitting.or(self.delta_splitting),
            zeeman_b: other.zeeman_b.or(self.zeeman_b),
            grid_min: other.grid_min.or(self.grid_min),
            grid_max: other.grid_max.or(self.grid_max),
            grid_points: other.grid_points.or(self.grid_points),
            lambda: other.lambda.or(self.lambda),
        }
    }

    pub fn params(&self) -> Result<SystemParams, CliError> {
        let required = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| CliError::Config(format!("missing required parameter '{key}'")))
        };
        let gamma = required(self.gamma, "gamma")?;
        let omega = required(self.omega_abs, "omega_abs")?;
        let detuning = required(self.delta_detuning, "delta_detuning")?;
        let mut p = SystemParams::new(gamma, 0.0, detuning)
            .with_omega_polar(omega, self.omega_phase.unwrap_or(0.0))
            .with_splitting(self.delta_splitting.unwrap_or(0.0))
            .with_zeeman(self.zeeman_b.unwrap_or(0.0));
        match (self.b_pi, self.b_sigma) {
            (None, None) => {}
            (Some(a), None) => p = p.with_branching(a, 1.0 - a),
            (None, Some(b)) => p = p.with_branching(1.0 - b, b),
            (Some(a), Some(b)) => p = p.with_branching(a, b),
        }
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        match (self.grid_min, self.grid_max, self.grid_points) {
            (None, None, None) => Ok(GridSpec::Auto),
            (Some(min), Some(max), points) => {
                let points = points.unwrap_or(fluorospec::spectra::AUTO_GRID_POINTS);
                if max <= min || points < 3 {
                    return Err(CliError::Config(format!(
                        "grid needs grid_min < grid_max and at least 3 points, got [{min}, {max}] with {points}"
                    )));
                }
                Ok(GridSpec::Uniform { min, max, points })
            }
            _ => Err(CliError::Config(
                "grid_min and grid_max must be given together".into(),
            )),
        }
    }

    /// `(key, value)` pairs of every set field, in the canonical key order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |v: Option<f64>| v.map(|x| format!("{x:e}"));
        let values = [
            f(self.gamma),
            f(self.b_pi),
            f(self.b_sigma),
            f(self.omega_abs),
            f(self.omega_phase),
            f(self.delta_detuning),
            f(self.delta_splitting),
            f(self.zeeman_b),
            f(self.grid_min),
            f(self.grid_max),
            self.grid_points.map(|n| n.to_string()),
            f(self.lambda),
        ];
        KEYS.iter()
            .zip(values)
            .filter_map(|(k, v)| v.map(|v| (*k, v)))
            .collect()
    }
}

/// Scenario describing a fully resolved parameter set.
pub fn scenario_of(p: &SystemParams) -> Scenario {
    Scenario {
        gamma: Some(p.gamma),
        b_pi: Some(p.b_pi),
        b_sigma: Some(p.b_sigma),
        omega_abs: Some(p.omega_abs()),
        omega_phase: Some(p.omega_phase()),
        delta_detuning: Some(p.detuning),
        delta_splitting: Some(p.splitting_delta),
        zeeman_b: Some(p.zeeman_b),
        ..Scenario::default()
    }
}
