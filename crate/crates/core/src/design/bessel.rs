use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{design_constant, kernels, Configuration};
use crate::error::{DesignError, Result};

pub const DEFAULT_PROBE_COUNT: usize = 100;

/// `count` seeded random unit vectors in R^d.
pub fn default_probes(d: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: DVector<f64> = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            let norm = v.norm();
            if norm > 1e-8 {
                break v / norm;
            }
        })
        .collect()
}

/// Largest relative defect of the identity
/// `sum_j <x,v_j>^{2t} = c_t (sum_l |v_l|^{2t}) |x|^{2t}` over the probes.
///
/// A configuration is a (t,t)-design exactly when the defect vanishes for all x.
pub fn bessel_residual(config: &Configuration, t: usize, probes: &[DVector<f64>]) -> Result<f64> {
    if probes.is_empty() {
        return Err(DesignError::EmptyProbes);
    }
    let d = config.d();
    let c = design_constant(t, d)?.to_f64();
    let e = 2 * t as i32;
    let s: f64 = (0..config.n())
        .map(|j| {
            let v = config.column(j);
            kernels::dot(v, v).powi(t as i32)
        })
        .sum();
    let mut worst: f64 = 0.0;
    for x in probes {
        if x.len() != d {
            return Err(DesignError::DimensionMismatch(format!(
                "probe has length {}, expected {d}",
                x.len()
            )));
        }
        let xs = x.as_slice();
        let x2 = kernels::dot(xs, xs);
        if x2 == 0.0 {
            return Err(DesignError::InvalidParameter("zero probe".into()));
        }
        let lhs: f64 = (0..config.n())
            .map(|j| kernels::dot(xs, config.column(j)).powi(e))
            .sum();
        let rhs = c * s * x2.powi(t as i32);
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    Ok(worst)
}

fn binomial(n: u128, k: u128) -> u128 {
    num::integer::binomial(n, k)
}

/// `(dim Hom(t), dim Hom(2t))` on R^d: the lower bound for the weighted
/// minimum and the upper bound for the equal-norm minimum.
pub fn n_bounds(t: usize, d: usize) -> Result<(u128, u128)> {
    if t == 0 || d == 0 {
        return Err(DesignError::InvalidParameter(
            "n_bounds needs t >= 1 and d >= 1".into(),
        ));
    }
    let (t, d) = (t as u128, d as u128);
    Ok((binomial(t + d - 1, t), binomial(2 * t + d - 1, 2 * t)))
}
