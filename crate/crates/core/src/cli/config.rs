//! Plain `key = value` defaults file.
//!
//! ```text
//! # comments and blank lines are ignored
//! restarts = 40
//! seed = 7
//! zero_tolerance = 1e-12
//! max_iterations = 3000
//! gradient_tolerance = 1e-10
//! trust_radius_factor = 0.1
//! threads = 4
//! out_dir = results
//! ```

use std::path::{Path, PathBuf};

use crate::design::DEFAULT_ZERO_TOLERANCE;
use crate::error::{DesignError, Result};
use crate::manifold::SolverOptions;
use crate::scan::DEFAULT_RESTARTS;

pub const CONFIG_ENV: &str = "TTDESIGN_CONFIG";

#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub solver: SolverOptions,
    pub restarts: usize,
    pub seed: u64,
    pub zero_tolerance: f64,
    pub threads: Option<usize>,
    /// Base directory for relative `--out` paths.
    pub out_dir: Option<PathBuf>,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            zero_tolerance: DEFAULT_ZERO_TOLERANCE,
            threads: None,
            out_dir: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| DesignError::Format(format!("config line {line}: bad value `{value}` for `{key}`")))
}

impl CliConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = CliConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| DesignError::Format(format!("config line {line}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "restarts" => c.restarts = parse(key, value, line)?,
                "seed" => c.seed = parse(key, value, line)?,
                "zero_tolerance" => c.zero_tolerance = parse(key, value, line)?,
                "max_iterations" => c.solver.max_iterations = parse(key, value, line)?,
                "gradient_tolerance" => c.solver.gradient_tolerance = parse(key, value, line)?,
                "polish_tolerance" => c.solver.zero_tolerance = parse(key, value, line)?,
                "trust_radius_factor" => c.solver.initial_trust_radius_factor = parse(key, value, line)?,
                "threads" => c.threads = Some(parse(key, value, line)?),
                "out_dir" => c.out_dir = Some(PathBuf::from(value)),
                other => {
                    return Err(DesignError::Format(format!("config line {line}: unknown key `{other}`")));
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The file named by `explicit`, else by the environment variable, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.restarts == 0 {
            return Err(DesignError::InvalidParameter("restarts must be >= 1".into()));
        }
        if !(self.zero_tolerance > 0.0 && self.zero_tolerance.is_finite()) {
            return Err(DesignError::InvalidParameter("zero_tolerance must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(DesignError::InvalidParameter("threads must be >= 1".into()));
        }
        Ok(())
    }

    pub fn output_path(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }
}
