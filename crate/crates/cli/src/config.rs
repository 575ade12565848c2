//! Run configuration: tolerances, sampling, seed resolution.

use std::collections::BTreeMap;

use kahler_frobenius::frobenius::DEFAULT_LAMBDA_GRID;
use kahler_frobenius::theta::DEFAULT_RADIUS;

use crate::spec_file::InputError;

pub const SEED_ENV: &str = "FROBENIUS_VERIFY_SEED";
pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_SAMPLES: usize = 64;
/// Samples per chart that also get the finite-difference curvature check.
pub const FD_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// identities that hold exactly up to round-off
    pub structural: f64,
    /// finite-difference cross-checks, relative
    pub fd: f64,
    pub theta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { structural: 1e-9, fd: 1e-4, theta: 1e-8 }
    }
}

impl Tolerances {
    /// Applies one `name=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), InputError> {
        let bad = || InputError::Invalid(format!("expected <name>=<value>, got {assignment:?}"));
        let (name, value) = assignment.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(InputError::Invalid(format!("tolerance {name} must be positive")));
        }
        match name.trim() {
            "structural" => self.structural = value,
            "fd" => self.fd = value,
            "theta" => self.theta = value,
            other => return Err(InputError::Invalid(format!("unknown tolerance {other:?} (structural, fd, theta)"))),
        }
        Ok(())
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("fd".to_string(), self.fd),
            ("structural".to_string(), self.structural),
            ("theta".to_string(), self.theta),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub tolerances: Tolerances,
    pub samples: usize,
    pub seed: u64,
    pub lambda_grid: Vec<f64>,
    pub radius: u32,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            radius: DEFAULT_RADIUS,
        }
    }
}

/// The flag wins over the environment, which wins over the default.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, InputError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| InputError::Invalid(format!("{SEED_ENV} is not an unsigned integer: {text:?}"))),
        None => Ok(DEFAULT_SEED),
    }
}

pub fn parse_lambda_grid(csv: &str) -> Result<Vec<f64>, InputError> {
    let grid = csv
        .split(',')
        .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| InputError::Invalid(format!("bad lambda grid {csv:?}")))?;
    if grid.is_empty() {
        return Err(InputError::Invalid("empty lambda grid".into()));
    }
    Ok(grid)
}
