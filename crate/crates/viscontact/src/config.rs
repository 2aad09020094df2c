//! Run configuration: a `key = value` document with the reference
//! parameter block as defaults.

use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Elastic,
    Viscoelastic,
    Both,
    Lipschitz,
}

impl RunMode {
    pub fn parse(s: &str) -> Option<RunMode> {
        match s {
            "elastic" => Some(RunMode::Elastic),
            "viscoelastic" => Some(RunMode::Viscoelastic),
            "both" => Some(RunMode::Both),
            "lipschitz" => Some(RunMode::Lipschitz),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RunMode::Elastic => "elastic",
            RunMode::Viscoelastic => "viscoelastic",
            RunMode::Both => "both",
            RunMode::Lipschitz => "lipschitz",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub young: T,
    pub poisson: T,
    pub yield_limit: T,
    pub relaxation: T,
    pub amplitude: T,
    pub t_end: T,
    pub n_steps: usize,
    pub h_interior: T,
    pub h_contact: T,
    pub opt_tol: T,
    pub max_inner_iters: usize,
    pub vi_probes: usize,
    pub sigma_probes: usize,
    pub tau_samples: usize,
    pub mode: RunMode,
}

impl<T: Real> Default for RunConfig<T> {
    /// The reference parameter block: E = 1e4 N/m^2, kappa = 0.4, F = 10,
    /// b = 1e4, f2y(t) = 10 sin t, T = 5 s in 100 steps, mesh 0.275/0.06.
    fn default() -> Self {
        RunConfig {
            young: lit(1e4),
            poisson: lit(0.4),
            yield_limit: lit(10.0),
            relaxation: lit(1e4),
            amplitude: lit(10.0),
            t_end: lit(5.0),
            n_steps: 100,
            h_interior: lit(0.275),
            h_contact: lit(0.06),
            opt_tol: lit(crate::tolerances::CERTIFIED_OPT_TOL),
            max_inner_iters: 200_000,
            vi_probes: 64,
            sigma_probes: 128,
            tau_samples: 6,
            mode: RunMode::Viscoelastic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, message: String },
    Validation { key: String, message: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ConfigError::Validation { key, message } => write!(f, "key `{key}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, message: &str) -> ConfigError {
    ConfigError::Validation {
        key: key.into(),
        message: message.into(),
    }
}

impl<T: Real> RunConfig<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.young > T::zero()) {
            return Err(invalid("E", "must be positive"));
        }
        let half = lit::<T>(0.5);
        if !(self.poisson > T::zero() && self.poisson < half) {
            return Err(invalid("kappa", "must lie in (0, 0.5); the tensor is singular at 0.5"));
        }
        if self.yield_limit < T::zero() {
            return Err(invalid("F", "must be nonnegative"));
        }
        if self.relaxation < T::zero() {
            return Err(invalid("b", "must be nonnegative"));
        }
        if self.amplitude < T::zero() {
            return Err(invalid("amplitude", "must be nonnegative"));
        }
        if !(self.t_end > T::zero()) {
            return Err(invalid("T_end", "must be positive"));
        }
        if self.n_steps == 0 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        if !(self.h_contact > T::zero()) || self.h_contact > self.h_interior {
            return Err(invalid(
                "h_contact",
                "mesh sizes must satisfy 0 < h_contact <= h_interior",
            ));
        }
        if !(self.opt_tol > T::zero()) {
            return Err(invalid("opt_tol", "must be positive"));
        }
        if self.max_inner_iters == 0 {
            return Err(invalid("max_inner_iters", "must be at least 1"));
        }
        Ok(())
    }

    pub fn material(&self) -> crate::material::MaterialModel<T> {
        crate::material::MaterialModel::constant_relaxation(
            self.young,
            self.poisson,
            self.relaxation,
        )
    }

    pub fn solver(&self) -> crate::solver::SolverConfig<T> {
        let mut cfg = crate::solver::SolverConfig::new(self.t_end, self.n_steps);
        cfg.opt_tol = self.opt_tol;
        cfg.max_inner_iters = self.max_inner_iters;
        cfg.vi_probes = self.vi_probes;
        cfg
    }
}

/// Parse a `key = value` document (# comments, blank lines allowed) into a
/// validated configuration; unknown keys are rejected.
pub fn parse_config<T: Real>(text: &str) -> Result<RunConfig<T>, ConfigError> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let parse_real = |v: &str| -> Result<T, ConfigError> {
            v.parse::<f64>()
                .map(lit::<T>)
                .map_err(|_| ConfigError::Parse {
                    line: line_no,
                    message: format!("`{v}` is not a number"),
                })
        };
        let parse_usize = |v: &str| -> Result<usize, ConfigError> {
            v.parse::<usize>().map_err(|_| ConfigError::Parse {
                line: line_no,
                message: format!("`{v}` is not a nonnegative integer"),
            })
        };
        match key {
            "E" => cfg.young = parse_real(value)?,
            "kappa" => cfg.poisson = parse_real(value)?,
            "F" => cfg.yield_limit = parse_real(value)?,
            "b" => cfg.relaxation = parse_real(value)?,
            "amplitude" => cfg.amplitude = parse_real(value)?,
            "T_end" => cfg.t_end = parse_real(value)?,
            "n_steps" => cfg.n_steps = parse_usize(value)?,
            "h_interior" => cfg.h_interior = parse_real(value)?,
            "h_contact" => cfg.h_contact = parse_real(value)?,
            "opt_tol" => cfg.opt_tol = parse_real(value)?,
            "max_inner_iters" => cfg.max_inner_iters = parse_usize(value)?,
            "vi_probes" => cfg.vi_probes = parse_usize(value)?,
            "sigma_probes" => cfg.sigma_probes = parse_usize(value)?,
            "tau_samples" => cfg.tau_samples = parse_usize(value)?,
            "mode" => {
                cfg.mode = RunMode::parse(value).ok_or_else(|| ConfigError::Validation {
                    key: "mode".into(),
                    message: format!(
                        "`{value}` is not one of elastic|viscoelastic|both|lipschitz"
                    ),
                })?
            }
            other => {
                return Err(ConfigError::Validation {
                    key: other.into(),
                    message: "unknown key".into(),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_reference_defaults() {
        let cfg: RunConfig<f64> = parse_config("").unwrap();
        assert_eq!(cfg.young, 1e4);
        assert_eq!(cfg.poisson, 0.4);
        assert_eq!(cfg.yield_limit, 10.0);
        assert_eq!(cfg.relaxation, 1e4);
        assert_eq!(cfg.amplitude, 10.0);
        assert_eq!(cfg.t_end, 5.0);
        assert_eq!(cfg.n_steps, 100);
        assert_eq!(cfg.h_interior, 0.275);
        assert_eq!(cfg.h_contact, 0.06);
        assert_eq!(cfg.mode, RunMode::Viscoelastic);
    }

    #[test]
    fn b_zero_is_an_elastic_material() {
        let cfg: RunConfig<f64> = parse_config("b = 0").unwrap();
        assert_eq!(cfg.relaxation, 0.0);
        assert!(cfg.material().relaxation.is_zero());
    }

    #[test]
    fn singular_poisson_rejected() {
        let err = parse_config::<f64>("kappa = 0.5").unwrap_err();
        match err {
            ConfigError::Validation { key, .. } => assert_eq!(key, "kappa"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected_and_parse_errors_carry_lines() {
        let err = parse_config::<f64>("E = 1e4\nwhatever = 3\n").unwrap_err();
        match err {
            ConfigError::Validation { key, .. } => assert_eq!(key, "whatever"),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_config::<f64>("\n\nE == 1e4junk\n").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_modes() {
        let cfg: RunConfig<f64> =
            parse_config("# a comment\nmode = both # trailing\nn_steps = 10\n").unwrap();
        assert_eq!(cfg.mode, RunMode::Both);
        assert_eq!(cfg.n_steps, 10);
        assert!(RunMode::parse("nonsense").is_none());
    }

    #[test]
    fn mesh_size_ordering_enforced() {
        let err = parse_config::<f64>("h_contact = 0.5\nh_interior = 0.1").unwrap_err();
        match err {
            ConfigError::Validation { key, .. } => assert_eq!(key, "h_contact"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
