//! Run configuration: physical parameters, sweep specification, and the flat
//! key=value config-file format that mirrors the command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use duoscat_core::{cutoff_index, IncidentSpec, SystemParams};

use crate::error::CliError;

/// Library defaults for a bare `duoscat solve`: the equal-mass single-barrier
/// benchmark set (m1 = m2 = 1, gamma1 = 1, gamma2 = 0, omega = 3, K0 = 4).
pub mod defaults {
    pub const M1: f64 = 1.0;
    pub const M2: f64 = 1.0;
    pub const GAMMA1: f64 = 1.0;
    pub const GAMMA2: f64 = 0.0;
    pub const OMEGA: f64 = 3.0;
    pub const K0: f64 = 4.0;
    pub const L: usize = 0;
    pub const CONSERVATION_TOL: f64 = 1e-6;
    pub const QUADRATURE_TOL: f64 = 1e-10;
}

/// One fully resolved solve: system, incident wave, and tolerances.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: SystemParams,
    pub incident: IncidentSpec,
    /// Basis truncation; `None` means the per-point default n_c + 8.
    pub n_modes: Option<usize>,
    /// Bound on |j_total - 1| for a row to count as converged.
    pub conservation_tol: f64,
    pub quadrature_tol: f64,
}

impl RunConfig {
    /// The truncation actually used: explicit value or n_c + 8.
    pub fn resolved_modes(&self) -> usize {
        self.n_modes
            .unwrap_or_else(|| cutoff_index(&self.system, &self.incident) + 8)
    }

    /// Rejects truncations that cannot host every open channel.
    pub fn validate(&self) -> Result<(), CliError> {
        let n_c = cutoff_index(&self.system, &self.incident);
        if self.resolved_modes() <= n_c {
            return Err(CliError::usage(format!(
                "nmodes must exceed the number of open channels (n_c = {n_c})"
            )));
        }
        if self.conservation_tol <= 0.0 || self.quadrature_tol <= 0.0 {
            return Err(CliError::usage("tolerances must be positive"));
        }
        Ok(())
    }
}

/// Which knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Gamma1,
    Gamma2,
    /// Both couplings together (gamma2 tied to gamma1).
    GammaBoth,
    K0,
    Omega,
    /// m1 / (m1 + m2), at fixed total mass.
    MassRatio,
    /// Basis truncation N (integer-valued).
    NModes,
}

impl SweepParameter {
    pub fn label(&self) -> &'static str {
        match self {
            SweepParameter::Gamma1 => "gamma1",
            SweepParameter::Gamma2 => "gamma2",
            SweepParameter::GammaBoth => "gamma-both",
            SweepParameter::K0 => "k0",
            SweepParameter::Omega => "omega",
            SweepParameter::MassRatio => "mass-ratio",
            SweepParameter::NModes => "n-modes",
        }
    }
}

impl FromStr for SweepParameter {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.replace('_', "-").as_str() {
            "gamma1" => Ok(SweepParameter::Gamma1),
            "gamma2" => Ok(SweepParameter::Gamma2),
            "gamma-both" => Ok(SweepParameter::GammaBoth),
            "k0" => Ok(SweepParameter::K0),
            "omega" => Ok(SweepParameter::Omega),
            "mass-ratio" => Ok(SweepParameter::MassRatio),
            "n-modes" => Ok(SweepParameter::NModes),
            other => Err(CliError::usage(format!(
                "unknown sweep parameter '{other}' (expected gamma1, gamma2, gamma-both, \
                 k0, omega, mass-ratio, or n-modes)"
            ))),
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Spacing of sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(CliError::usage(format!(
                "unknown scale '{other}' (expected linear or log)"
            ))),
        }
    }
}

/// A validated sweep request.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn new(
        parameter: SweepParameter,
        from: f64,
        to: f64,
        steps: usize,
        scale: Scale,
    ) -> Result<Self, CliError> {
        if !(from.is_finite() && to.is_finite() && from < to) {
            return Err(CliError::usage("sweep requires finite --from < --to"));
        }
        if steps < 2 {
            return Err(CliError::usage("sweep requires --steps >= 2"));
        }
        if scale == Scale::Log && from <= 0.0 {
            return Err(CliError::usage("log scale requires --from > 0"));
        }
        if parameter == SweepParameter::MassRatio && (from <= 0.0 || to >= 1.0) {
            return Err(CliError::usage(
                "mass-ratio sweeps live strictly inside (0, 1)",
            ));
        }
        if matches!(
            parameter,
            SweepParameter::Gamma1 | SweepParameter::Gamma2 | SweepParameter::GammaBoth
        ) && from < 0.0
        {
            return Err(CliError::usage("coupling strengths cannot be negative"));
        }
        if parameter == SweepParameter::K0 && from <= 0.0 {
            return Err(CliError::usage("incident momentum must stay positive"));
        }
        if parameter == SweepParameter::Omega && from <= 0.0 {
            return Err(CliError::usage("binding frequency must stay positive"));
        }
        if parameter == SweepParameter::NModes && from < 1.0 {
            return Err(CliError::usage("basis truncation must be at least 1"));
        }
        Ok(SweepSpec {
            parameter,
            from,
            to,
            steps,
            scale,
        })
    }

    /// The sweep grid, in order.  n-modes grids are rounded to integers.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let v = match self.scale {
                Scale::Linear => self.from + t * (self.to - self.from),
                Scale::Log => (self.from.ln() + t * (self.to.ln() - self.from.ln())).exp(),
            };
            out.push(if self.parameter == SweepParameter::NModes {
                v.round()
            } else {
                v
            });
        }
        out
    }
}

/// A parsed flat config file: `key = value` lines, `#` comments, keys spelled
/// like the long flags with `-` or `_` interchangeable.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "m1",
    "m2",
    "gamma1",
    "gamma2",
    "omega",
    "k0",
    "l",
    "nmodes",
    "tol",
    "param",
    "from",
    "to",
    "steps",
    "scale",
    "nmax",
    "csv",
    "svg",
    "markers",
    "paper_defaults",
];

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
            .map_err(|e| CliError::usage(format!("config file {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key '{key}'", lineno + 1));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(format!("line {}: duplicate key '{key}'", lineno + 1));
            }
        }
        Ok(FileConfig { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Typed lookup; parse failures become usage errors naming the key.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| {
                CliError::usage(format!("config key '{key}': cannot parse '{v}': {e}"))
            }),
        }
    }

    /// Booleans accept true/false/1/0/yes/no.
    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.entries.get(key).map(String::as_str) {
            None => Ok(None),
            Some("true") | Some("1") | Some("yes") => Ok(Some(true)),
            Some("false") | Some("0") | Some("no") => Ok(Some(false)),
            Some(v) => Err(CliError::usage(format!(
                "config key '{key}': cannot parse '{v}' as a boolean"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_blanks_and_dashed_keys() {
        let cfg = FileConfig::parse(
            "# benchmark set\nm1 = 1.0\n\ngamma1=2.5 # trailing note\nmass-ratio-ish

            ",
        );
        assert!(cfg.is_err(), "junk line must be rejected");
        let cfg = FileConfig::parse("# only\nm1 = 1.0\npaper-defaults = true\n").unwrap();
        assert_eq!(cfg.get::<f64>("m1").unwrap(), Some(1.0));
        assert_eq!(cfg.get_bool("paper_defaults").unwrap(), Some(true));
        assert_eq!(cfg.get::<f64>("omega").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(FileConfig::parse("m3 = 1.0\n").is_err());
        assert!(FileConfig::parse("m1 = 1\nm1 = 2\n").is_err());
    }

    #[test]
    fn sweep_spec_validation() {
        let ok = SweepSpec::new(SweepParameter::K0, 1.0, 5.0, 11, Scale::Linear).unwrap();
        assert_eq!(ok.values().len(), 11);
        assert!((ok.values()[5] - 3.0).abs() < 1e-12);

        assert!(SweepSpec::new(SweepParameter::K0, 5.0, 1.0, 11, Scale::Linear).is_err());
        assert!(SweepSpec::new(SweepParameter::K0, 1.0, 5.0, 1, Scale::Linear).is_err());
        assert!(SweepSpec::new(SweepParameter::Omega, 0.0, 5.0, 4, Scale::Log).is_err());
        assert!(SweepSpec::new(SweepParameter::MassRatio, 0.1, 1.0, 4, Scale::Linear).is_err());

        let log = SweepSpec::new(SweepParameter::Omega, 1e3, 1e5, 3, Scale::Log).unwrap();
        let vals = log.values();
        assert!((vals[1] - 1e4).abs() / 1e4 < 1e-12);
    }

    #[test]
    fn n_modes_values_round_to_integers() {
        let spec = SweepSpec::new(SweepParameter::NModes, 2.0, 12.0, 6, Scale::Linear).unwrap();
        assert_eq!(spec.values(), vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
    }

    #[test]
    fn run_config_rejects_too_small_truncation() {
        let system = SystemParams::new(1.0, 1.0, 1.0, 0.0, 3.0, 1.0).unwrap();
        let incident = IncidentSpec::new(4.0, 0).unwrap();
        let cfg = RunConfig {
            system,
            incident,
            n_modes: Some(1),
            conservation_tol: 1e-6,
            quadrature_tol: 1e-10,
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            n_modes: None,
            ..cfg
        };
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.resolved_modes(), 9);
    }
}
