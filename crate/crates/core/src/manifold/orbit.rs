//! Minimization restricted to orbits of a finite orthogonal group.
//!
//! The iterate holds m seed vectors; the configuration seen by the potential
//! is `[g_1 v_1, ..., g_k v_1, ..., g_1 v_m, ..., g_k v_m]`. The orbit map is
//! linear, so gradients and Hessian products are pulled back by transposes.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::domain::Domain;
use super::objective::{Objective, PotentialObjective};
use super::{random_configuration, settings_for, trust_region, Convergence, SolverOptions};
use crate::design::{potential, Configuration, NormMode};
use crate::error::{DesignError, Result};

pub struct OrbitObjective {
    base: PotentialObjective,
    group: Vec<DMatrix<f64>>,
    d: usize,
    seeds: usize,
}

impl OrbitObjective {
    pub fn new(t: usize, group: Vec<DMatrix<f64>>, seeds: usize) -> Result<Self> {
        let d = group
            .first()
            .map(|g| g.nrows())
            .ok_or_else(|| DesignError::InvalidParameter("group is empty".into()))?;
        for g in &group {
            if g.shape() != (d, d) {
                return Err(DesignError::DimensionMismatch(
                    "group elements must be square of equal size".into(),
                ));
            }
            let defect = (g.transpose() * g - DMatrix::<f64>::identity(d, d)).amax();
            if defect > 1e-12 {
                return Err(DesignError::InvalidParameter(
                    "group elements must be orthogonal".into(),
                ));
            }
        }
        let n = seeds * group.len();
        Ok(Self {
            base: PotentialObjective::new(t, d, n, false)?,
            group,
            d,
            seeds,
        })
    }

    fn orbit_len(&self) -> usize {
        self.seeds * self.group.len()
    }

    /// Writes the orbit of the seed columns in `x` into `out`.
    pub fn expand(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        let k = self.group.len();
        for j in 0..self.seeds {
            let v = &x[j * d..(j + 1) * d];
            for (gi, g) in self.group.iter().enumerate() {
                let col = &mut out[(j * k + gi) * d..(j * k + gi + 1) * d];
                for r in 0..d {
                    col[r] = (0..d).map(|c| g[(r, c)] * v[c]).sum();
                }
            }
        }
    }

    fn pull_back(&self, full: &[f64], out: &mut [f64]) {
        let d = self.d;
        let k = self.group.len();
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in 0..self.seeds {
            let o = &mut out[j * d..(j + 1) * d];
            for (gi, g) in self.group.iter().enumerate() {
                let col = &full[(j * k + gi) * d..(j * k + gi + 1) * d];
                for c in 0..d {
                    o[c] += (0..d).map(|r| g[(r, c)] * col[r]).sum::<f64>();
                }
            }
        }
    }

    fn expanded(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.d * self.orbit_len()];
        self.expand(x, &mut full);
        full
    }
}

impl Objective for OrbitObjective {
    fn shape(&self) -> (usize, usize) {
        (self.d, self.seeds)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.base.value(&self.expanded(x))
    }

    fn value_accurate(&self, x: &[f64]) -> f64 {
        self.base.value_accurate(&self.expanded(x))
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let full = self.expanded(x);
        let mut g = vec![0.0; full.len()];
        self.base.gradient(&full, &mut g);
        self.pull_back(&g, out);
    }

    fn hessian_vector(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let full = self.expanded(x);
        let full_v = self.expanded(v);
        let mut h = vec![0.0; full.len()];
        self.base.hessian_vector(&full, &full_v, &mut h);
        self.pull_back(&h, out);
    }

    fn design_potential(&self, x: &[f64]) -> f64 {
        self.base.design_potential(&self.expanded(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitResult {
    pub seeds: Configuration,
    pub orbit: Configuration,
    pub f_value: f64,
    pub iterations: usize,
    pub converged: Convergence,
    pub seed: u64,
}

/// Minimizes the potential of the orbit of unit seed vectors.
pub fn minimize_orbit(
    t: usize,
    group: &[DMatrix<f64>],
    start: &Configuration,
    options: &SolverOptions,
) -> Result<OrbitResult> {
    options.validate()?;
    if start.mode() != NormMode::EqualNorm {
        return Err(DesignError::InvalidParameter(
            "orbit search needs unit seed vectors".into(),
        ));
    }
    let objective = OrbitObjective::new(t, group.to_vec(), start.n())?;
    if start.d() != objective.d {
        return Err(DesignError::DimensionMismatch(
            "seed dimension does not match the group".into(),
        ));
    }
    let domain = Domain::SphereProduct {
        d: start.d(),
        n: start.n(),
    };
    let n_full = objective.orbit_len();
    let settings = settings_for(&domain, n_full, options);
    let outcome = trust_region::run(&objective, domain, start.as_slice().to_vec(), &settings);
    let full = objective.expanded(&outcome.x);
    let seeds = Configuration::new(DMatrix::from_vec(start.d(), start.n(), outcome.x), NormMode::EqualNorm)?;
    let orbit = Configuration::equal_norm_from_raw(DMatrix::from_vec(start.d(), n_full, full))?;
    let f_value = potential(&orbit, t)?.f;
    Ok(OrbitResult {
        seeds,
        orbit,
        f_value,
        iterations: outcome.iterations,
        converged: outcome.converged,
        seed: options.seed,
    })
}

/// Multi-start orbit search with seeds `options.seed + r`.
pub fn multi_start_orbit(
    t: usize,
    group: &[DMatrix<f64>],
    seed_vectors: usize,
    restarts: usize,
    options: &SolverOptions,
) -> Result<(OrbitResult, Vec<OrbitResult>)> {
    if restarts == 0 {
        return Err(DesignError::InvalidParameter("restarts must be >= 1".into()));
    }
    let d = group
        .first()
        .map(|g| g.nrows())
        .ok_or_else(|| DesignError::InvalidParameter("group is empty".into()))?;
    let all: Vec<OrbitResult> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let seed = options.seed.wrapping_add(r);
            let start = random_configuration(d, seed_vectors, NormMode::EqualNorm, seed)?;
            minimize_orbit(t, group, &start, &options.with_seed(seed))
        })
        .collect::<Result<_>>()?;
    let best = all
        .iter()
        .min_by(|a, b| a.f_value.total_cmp(&b.f_value).then(a.seed.cmp(&b.seed)))
        .cloned()
        .expect("at least one restart");
    Ok((best, all))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_group_plane(k: usize) -> Vec<DMatrix<f64>> {
        (0..k)
            .map(|m| {
                let a = 2.0 * std::f64::consts::PI * m as f64 / k as f64;
                DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
            })
            .collect()
    }

    #[test]
    fn gradient_pulls_back_correctly() {
        let obj = OrbitObjective::new(2, cyclic_group_plane(3), 2).unwrap();
        let x = random_configuration(2, 2, NormMode::EqualNorm, 3).unwrap();
        let xs = x.as_slice();
        let mut g = vec![0.0; 4];
        obj.gradient(xs, &mut g);
        let h = 1e-6;
        for i in 0..4 {
            let mut p = xs.to_vec();
            let mut m = xs.to_vec();
            p[i] += h;
            m[i] -= h;
            let fd = (obj.value(&p) - obj.value(&m)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * g[i].abs().max(1.0));
        }
    }

    #[test]
    fn orbit_of_one_line_under_120_degree_rotations() {
        // Any unit seed yields a Mercedes-Benz frame.
        let (best, _) =
            multi_start_orbit(2, &cyclic_group_plane(3), 1, 2, &SolverOptions::default()).unwrap();
        assert!(best.f_value.abs() < 1e-13);
    }

    #[test]
    fn non_orthogonal_group_rejected() {
        let g = vec![DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])];
        assert!(OrbitObjective::new(2, g, 1).is_err());
    }
}
