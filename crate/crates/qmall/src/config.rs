//! Run configuration: a flat JSON object, optionally named by `QMALL_CONFIG`,
//! with every key overridable from the command line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_ENV: &str = "QMALL_CONFIG";

/// Reference value of `tolerance`; pinned check tolerances scale with
/// `tolerance / DEFAULT_TOLERANCE`.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Reference value of `weyl_tolerance`.
pub const DEFAULT_WEYL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub modes: usize,
    pub cutoff: usize,
    pub tolerance: f64,
    pub weyl_tolerance: f64,
    pub quadrature: Domain,
    pub grid: Domain,
    pub seed: u64,
    pub dimension_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            modes: 2,
            cutoff: 8,
            tolerance: DEFAULT_TOLERANCE,
            weyl_tolerance: DEFAULT_WEYL_TOLERANCE,
            quadrature: Domain { half_width: 12.0, nodes: 129 },
            grid: Domain { half_width: 8.0, nodes: 129 },
            seed: 20240601,
            dimension_limit: 2000,
        }
    }
}

/// Command-line overrides; `None` keeps the file or default value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub modes: Option<usize>,
    pub cutoff: Option<usize>,
    pub tolerance: Option<f64>,
    pub weyl_tolerance: Option<f64>,
    pub quadrature_l: Option<f64>,
    pub quadrature_nodes: Option<usize>,
    pub grid_l: Option<f64>,
    pub grid_nodes: Option<usize>,
    pub seed: Option<u64>,
    pub dimension_limit: Option<usize>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let c: Config = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Explicit path, else `QMALL_CONFIG`, else defaults; then overrides.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let env = std::env::var_os(CONFIG_ENV);
        let base = match path.or(env.as_deref().map(Path::new)) {
            Some(p) => Self::from_file(p)?,
            None => Config::default(),
        };
        let c = base.with_overrides(overrides);
        c.validate()?;
        Ok(c)
    }

    pub fn with_overrides(mut self, o: &Overrides) -> Self {
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value {
                    $field = v;
                }
            };
        }
        set!(self.modes, o.modes);
        set!(self.cutoff, o.cutoff);
        set!(self.tolerance, o.tolerance);
        set!(self.weyl_tolerance, o.weyl_tolerance);
        set!(self.quadrature.half_width, o.quadrature_l);
        set!(self.quadrature.nodes, o.quadrature_nodes);
        set!(self.grid.half_width, o.grid_l);
        set!(self.grid.nodes, o.grid_nodes);
        set!(self.seed, o.seed);
        set!(self.dimension_limit, o.dimension_limit);
        self
    }

    /// Tolerances may be zero (every inexact check then fails); everything
    /// else must be positive and node counts odd.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.to_string()));
        if self.modes == 0 || self.cutoff == 0 || self.dimension_limit == 0 {
            return bad("modes, cutoff and dimension_limit must be positive");
        }
        if !(self.tolerance >= 0.0) || !(self.weyl_tolerance >= 0.0) {
            return bad("tolerances must be nonnegative numbers");
        }
        for (name, d) in [("quadrature", self.quadrature), ("grid", self.grid)] {
            if !(d.half_width > 0.0) || !d.half_width.is_finite() {
                return Err(CliError::Config(format!("{name}.L must be positive")));
            }
            if d.nodes < 3 || d.nodes % 2 == 0 {
                return Err(CliError::Config(format!("{name}.nodes must be odd and at least 3")));
            }
        }
        Ok(())
    }

    /// Scale factor applied to every pinned tolerance except the Weyl ones.
    pub fn tolerance_scale(&self) -> f64 {
        self.tolerance / DEFAULT_TOLERANCE
    }

    pub fn weyl_scale(&self) -> f64 {
        self.weyl_tolerance / DEFAULT_WEYL_TOLERANCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"L\":12.0"));
        assert_eq!(Config::from_json(&text).unwrap(), c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = Config::from_json(r#"{"cutoff": 10, "grid": {"L": 6.0, "nodes": 65}}"#).unwrap();
        assert_eq!(c.cutoff, 10);
        assert_eq!(c.grid.nodes, 65);
        assert_eq!(c.modes, 2);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(Config::from_json(r#"{"grid": {"L": 6.0, "nodes": 64}}"#).is_err());
        assert!(Config::from_json(r#"{"modes": 0}"#).is_err());
        assert!(Config::from_json(r#"{"unknown": 1}"#).is_err());
        assert!(Config::from_json(r#"{"tolerance": -1}"#).is_err());
    }

    #[test]
    fn overrides_win() {
        let o = Overrides { seed: Some(7), grid_nodes: Some(33), ..Overrides::default() };
        let c = Config::default().with_overrides(&o);
        assert_eq!(c.seed, 7);
        assert_eq!(c.grid.nodes, 33);
        assert_eq!(c.cutoff, 8);
    }
}
