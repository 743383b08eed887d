use crate::design::kernels::dot;

/// The search space: a product of unit spheres (one per column) or all of
/// R^{d×n}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    SphereProduct { d: usize, n: usize },
    Euclidean { d: usize, n: usize },
}

impl Domain {
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Domain::SphereProduct { d, n } | Domain::Euclidean { d, n } => (d, n),
        }
    }

    /// Intrinsic dimension, used to cap the inner CG iterations.
    pub fn dimension(&self) -> usize {
        match *self {
            Domain::SphereProduct { d, n } => (d - 1) * n,
            Domain::Euclidean { d, n } => d * n,
        }
    }

    pub fn typical_distance(&self) -> f64 {
        match *self {
            Domain::SphereProduct { n, .. } => std::f64::consts::PI * (n as f64).sqrt(),
            Domain::Euclidean { d, n } => ((d * n) as f64).sqrt(),
        }
    }

    /// Projects `v` onto the tangent space at `x` in place.
    pub fn project(&self, x: &[f64], v: &mut [f64]) {
        if let Domain::SphereProduct { d, n } = *self {
            for j in 0..n {
                let xj = &x[j * d..(j + 1) * d];
                let vj = &mut v[j * d..(j + 1) * d];
                let a = dot(xj, vj);
                for (vi, xi) in vj.iter_mut().zip(xj) {
                    *vi -= a * xi;
                }
            }
        }
    }

    /// `x + s`, followed by column normalization on the sphere product.
    /// Returns the offending column if a column collapses to zero.
    pub fn retract(&self, x: &[f64], s: &[f64], out: &mut [f64]) -> Result<(), usize> {
        for ((o, xi), si) in out.iter_mut().zip(x).zip(s) {
            *o = xi + si;
        }
        if let Domain::SphereProduct { d, n } = *self {
            for j in 0..n {
                if s[j * d..(j + 1) * d].iter().all(|&v| v == 0.0) {
                    continue;
                }
                let col = &mut out[j * d..(j + 1) * d];
                let norm = dot(col, col).sqrt();
                if norm == 0.0 || !norm.is_finite() {
                    return Err(j);
                }
                col.iter_mut().for_each(|c| *c /= norm);
            }
        }
        Ok(())
    }

    /// Riemannian Hessian from the Euclidean one: on each sphere factor,
    /// `P(ehess[v]) - <x_j, egrad_j> v_j`.
    pub fn hessian_correction(&self, x: &[f64], egrad: &[f64], v: &[f64], ehess_v: &mut [f64]) {
        if let Domain::SphereProduct { d, n } = *self {
            self.project(x, ehess_v);
            for j in 0..n {
                let r = d * j..d * (j + 1);
                let a = dot(&x[r.clone()], &egrad[r.clone()]);
                for (h, vi) in ehess_v[r.clone()].iter_mut().zip(&v[r]) {
                    *h -= a * vi;
                }
            }
        }
    }
}
