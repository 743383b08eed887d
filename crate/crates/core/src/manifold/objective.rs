use crate::design::{design_constant, kernels};
use crate::error::Result;

/// A smooth cost on d×n matrices (column-major slices).
pub trait Objective: Sync {
    fn shape(&self) -> (usize, usize);

    fn value(&self, x: &[f64]) -> f64;

    /// Value used by the step acceptance test. Defaults to [`Objective::value`].
    fn value_accurate(&self, x: &[f64]) -> f64 {
        self.value(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]);

    fn hessian_vector(&self, x: &[f64], v: &[f64], out: &mut [f64]);

    /// The design potential of the point after trace normalization; compared
    /// against the zero threshold.
    fn design_potential(&self, x: &[f64]) -> f64;
}

/// `f_{t,d,n}` on equal-norm iterates, or `f + (|v_1|^2 - 1)^2` on weighted ones.
#[derive(Clone, Debug)]
pub struct PotentialObjective {
    t: usize,
    d: usize,
    n: usize,
    c: f64,
    c_dd: (f64, f64),
    penalty: bool,
}

impl PotentialObjective {
    pub fn new(t: usize, d: usize, n: usize, penalty: bool) -> Result<Self> {
        let constant = design_constant(t, d)?;
        Ok(Self {
            t,
            d,
            n,
            c: constant.to_f64(),
            c_dd: constant.to_double_double(),
            penalty,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    fn first_norm_sq(&self, x: &[f64]) -> f64 {
        kernels::dot(&x[..self.d], &x[..self.d])
    }

    fn penalty_value(&self, x: &[f64]) -> f64 {
        if self.penalty {
            let e = self.first_norm_sq(x) - 1.0;
            e * e
        } else {
            0.0
        }
    }
}

impl Objective for PotentialObjective {
    fn shape(&self) -> (usize, usize) {
        (self.d, self.n)
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (lhs, rhs) = kernels::value(x, self.d, self.n, self.t, self.c);
        lhs - rhs + self.penalty_value(x)
    }

    fn value_accurate(&self, x: &[f64]) -> f64 {
        kernels::value_accurate(x, self.d, self.n, self.t, self.c_dd) + self.penalty_value(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        kernels::gradient(x, self.d, self.n, self.t, self.c, out);
        if self.penalty {
            let e = self.first_norm_sq(x) - 1.0;
            for i in 0..self.d {
                out[i] += 4.0 * e * x[i];
            }
        }
    }

    fn hessian_vector(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        kernels::hessian_vector(x, v, self.d, self.n, self.t, self.c, out);
        if self.penalty {
            let e = self.first_norm_sq(x) - 1.0;
            let xv = kernels::dot(&x[..self.d], &v[..self.d]);
            for i in 0..self.d {
                out[i] += 8.0 * xv * x[i] + 4.0 * e * v[i];
            }
        }
    }

    fn design_potential(&self, x: &[f64]) -> f64 {
        let (lhs, rhs) = kernels::value(x, self.d, self.n, self.t, self.c);
        let f = lhs - rhs;
        if self.penalty {
            let trace = kernels::dot(x, x);
            f * (self.n as f64 / trace).powi(2 * self.t as i32)
        } else {
            f
        }
    }
}
