//! Minimization of the design potential.
//!
//! Equal-norm problems are solved on the product of unit spheres; weighted
//! problems on R^{d×n} with the extra term `(|v_1|^2 - 1)^2`, which keeps the
//! homogeneous potential from collapsing toward the origin. Results of
//! weighted runs are rescaled to trace n before their potential is recorded.

mod domain;
mod objective;
mod orbit;
mod trust_region;

pub use domain::Domain;
pub use objective::{Objective, PotentialObjective};
pub use orbit::{minimize_orbit, multi_start_orbit, OrbitObjective, OrbitResult};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::design::io::DesignDocument;
use crate::design::{
    potential, potential_gradient, Configuration, DesignProblem, NormMode,
};
use crate::error::{DesignError, Result};
use trust_region::TrustRegionSettings;

/// Solver knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop when the Riemannian (or Euclidean) gradient norm drops below this.
    pub gradient_tolerance: f64,
    /// Zero threshold relative to n^2: the run switches to polishing once the
    /// normalized potential is at most `zero_tolerance * n^2`.
    pub zero_tolerance: f64,
    /// The trust radius is capped at this fraction of the domain's typical
    /// distance; the first radius is an eighth of the cap.
    pub initial_trust_radius_factor: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            gradient_tolerance: 1e-10,
            zero_tolerance: 1e-14,
            initial_trust_radius_factor: 0.1,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(DesignError::InvalidParameter(
                "max_iterations must be >= 1".into(),
            ));
        }
        if !(self.gradient_tolerance > 0.0 && self.zero_tolerance > 0.0) {
            return Err(DesignError::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        if !(self.initial_trust_radius_factor > 0.0 && self.initial_trust_radius_factor <= 1.0) {
            return Err(DesignError::InvalidParameter(
                "initial_trust_radius_factor must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    /// The normalized potential reached the zero threshold (then was polished).
    ZeroFound,
    /// The gradient vanished, or no further decrease is representable.
    GradientSmall,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub config: Configuration,
    pub f_value: f64,
    pub iterations: usize,
    pub converged: Convergence,
    pub seed: u64,
    /// Objective after every accepted step (non-increasing).
    pub history: Vec<f64>,
}

impl SolveResult {
    pub fn meta(&self) -> serde_json::Value {
        json!({
            "f_value": self.f_value,
            "iterations": self.iterations,
            "converged": self.converged,
            "seed": self.seed,
        })
    }

    pub fn to_document(&self, t: usize) -> DesignDocument {
        DesignDocument::new(self.config.clone())
            .with_t(t)
            .with_meta(self.meta())
    }
}

/// Gaussian columns; unit-normalized for equal-norm, scaled to trace n for
/// weighted. Deterministic in `seed`.
pub fn random_configuration(d: usize, n: usize, mode: NormMode, seed: u64) -> Result<Configuration> {
    if d == 0 || n == 0 {
        return Err(DesignError::InvalidDimensions(format!(
            "need d >= 1 and n >= 1, got d={d}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m: DMatrix<f64> = DMatrix::from_fn(d, n, |_, _| StandardNormal.sample(&mut rng));
        if m.column_iter().any(|c| c.norm() == 0.0) {
            continue;
        }
        return match mode {
            NormMode::EqualNorm => Configuration::equal_norm_from_raw(m),
            NormMode::Weighted => Configuration::new(m, NormMode::Weighted)?.normalize_trace(),
        };
    }
}

/// Tangent projection `g_i - <g_i, v_i> v_i` for each column.
pub fn riemannian_gradient(config: &Configuration, euclidean_grad: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_equal_norm(config)?;
    require_shape(config, euclidean_grad)?;
    let domain = Domain::SphereProduct {
        d: config.d(),
        n: config.n(),
    };
    let mut out = euclidean_grad.clone();
    domain.project(config.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// `(v_i + s_i) / |v_i + s_i|` for each column.
pub fn retract(config: &Configuration, step: &DMatrix<f64>) -> Result<Configuration> {
    require_equal_norm(config)?;
    require_shape(config, step)?;
    let domain = Domain::SphereProduct {
        d: config.d(),
        n: config.n(),
    };
    let mut out = DMatrix::zeros(config.d(), config.n());
    domain
        .retract(config.as_slice(), step.as_slice(), out.as_mut_slice())
        .map_err(DesignError::DegenerateStep)?;
    Configuration::new(out, NormMode::EqualNorm)
}

/// `f(V) + (|v_1|^2 - 1)^2` and its gradient.
pub fn weighted_objective(config: &Configuration, t: usize) -> Result<(f64, DMatrix<f64>)> {
    let f = potential(config, t)?.f;
    let mut grad = potential_gradient(config, t)?;
    let v1 = config.column(0);
    let e = v1.iter().map(|x| x * x).sum::<f64>() - 1.0;
    for (i, x) in v1.iter().enumerate() {
        grad[(i, 0)] += 4.0 * e * x;
    }
    Ok((f + e * e, grad))
}

fn require_equal_norm(config: &Configuration) -> Result<()> {
    if config.mode() != NormMode::EqualNorm {
        return Err(DesignError::InvalidParameter(
            "operation needs an equal-norm configuration".into(),
        ));
    }
    Ok(())
}

fn require_shape(config: &Configuration, m: &DMatrix<f64>) -> Result<()> {
    if m.shape() != (config.d(), config.n()) {
        return Err(DesignError::DimensionMismatch(format!(
            "matrix is {:?}, configuration is {}x{}",
            m.shape(),
            config.d(),
            config.n()
        )));
    }
    Ok(())
}

pub(crate) fn settings_for(domain: &Domain, n: usize, options: &SolverOptions) -> TrustRegionSettings {
    TrustRegionSettings {
        max_iterations: options.max_iterations,
        gradient_tolerance: options.gradient_tolerance,
        zero_threshold: options.zero_tolerance * (n * n) as f64,
        max_radius: domain.typical_distance() * options.initial_trust_radius_factor,
    }
}

/// Runs the trust-region solver from `start`.
pub fn minimize(problem: &DesignProblem, start: &Configuration, options: &SolverOptions) -> Result<SolveResult> {
    options.validate()?;
    if (start.d(), start.n(), start.mode()) != (problem.d, problem.n, problem.mode) {
        return Err(DesignError::DimensionMismatch(format!(
            "start is {}x{} {}, problem is {}x{} {}",
            start.d(),
            start.n(),
            start.mode(),
            problem.d,
            problem.n,
            problem.mode
        )));
    }
    let (d, n) = (problem.d, problem.n);
    let weighted = problem.mode == NormMode::Weighted;
    let objective = PotentialObjective::new(problem.t, d, n, weighted)?;
    let domain = if weighted {
        Domain::Euclidean { d, n }
    } else {
        Domain::SphereProduct { d, n }
    };
    let settings = settings_for(&domain, n, options);
    let outcome = trust_region::run(&objective, domain, start.as_slice().to_vec(), &settings);

    let raw = DMatrix::from_vec(d, n, outcome.x);
    let config = if weighted {
        Configuration::new(raw, NormMode::Weighted)?.normalize_trace()?
    } else {
        Configuration::new(raw, NormMode::EqualNorm)?
    };
    let f_value = potential(&config, problem.t)?.f;
    Ok(SolveResult {
        config,
        f_value,
        iterations: outcome.iterations,
        converged: outcome.converged,
        seed: options.seed,
        history: outcome.history,
    })
}

/// Orders results by `(f_value, seed)`.
pub(crate) fn better(a: &SolveResult, b: &SolveResult) -> std::cmp::Ordering {
    a.f_value
        .total_cmp(&b.f_value)
        .then_with(|| a.seed.cmp(&b.seed))
}

/// Runs `restarts` independent minimizations with seeds `seed..seed+restarts`
/// and returns the best together with all runs in seed order.
pub fn multi_start(
    problem: &DesignProblem,
    restarts: usize,
    options: &SolverOptions,
) -> Result<(SolveResult, Vec<SolveResult>)> {
    if restarts == 0 {
        return Err(DesignError::InvalidParameter("restarts must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..restarts as u64)
        .map(|r| options.seed.wrapping_add(r))
        .collect();
    let all = run_seeds(problem, &seeds, options)?;
    let best = all
        .iter()
        .min_by(|a, b| better(a, b))
        .cloned()
        .expect("at least one restart");
    Ok((best, all))
}

pub(crate) fn run_seeds(
    problem: &DesignProblem,
    seeds: &[u64],
    options: &SolverOptions,
) -> Result<Vec<SolveResult>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let start = random_configuration(problem.d, problem.n, problem.mode, seed)?;
            minimize(problem, &start, &options.with_seed(seed))
        })
        .collect()
}
