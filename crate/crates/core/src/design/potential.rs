use nalgebra::DMatrix;
use num::{BigInt, BigRational, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::error::{DesignError, Result};

/// The Welch-bound constant `c_t(R^d) = prod_{j<t} (2j+1)/(d+2j)`, held exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignConstant(pub BigRational);

impl DesignConstant {
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Head and tail of a double-double approximation.
    pub fn to_double_double(&self) -> (f64, f64) {
        let hi = self.to_f64();
        let rest = &self.0 - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
        (hi, rest.to_f64().unwrap_or(0.0))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }
}

impl std::fmt::Display for DesignConstant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn design_constant(t: usize, d: usize) -> Result<DesignConstant> {
    if t == 0 || d == 0 {
        return Err(DesignError::InvalidParameter(format!(
            "design constant needs t >= 1 and d >= 1 (got t={t}, d={d})"
        )));
    }
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for j in 0..t {
        acc *= BigRational::new(BigInt::from(2 * j + 1), BigInt::from(d + 2 * j));
    }
    Ok(DesignConstant(acc))
}

/// Value of the design potential split into its two sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialValue {
    /// `lhs - rhs`; nonnegative up to roundoff.
    pub f: f64,
    /// Double power sum over all ordered pairs, diagonal included.
    pub lhs: f64,
    /// `c_t(R^d) * (sum_l |v_l|^{2t})^2`.
    pub rhs: f64,
}

fn check_t(t: usize) -> Result<()> {
    if t == 0 {
        return Err(DesignError::InvalidParameter("t must be >= 1".into()));
    }
    Ok(())
}

/// The design potential `f_{t,d,n}(V)`.
pub fn potential(config: &Configuration, t: usize) -> Result<PotentialValue> {
    check_t(t)?;
    let c = design_constant(t, config.d())?.to_f64();
    let (lhs, rhs) = kernels::value(config.as_slice(), config.d(), config.n(), t, c);
    Ok(PotentialValue {
        f: lhs - rhs,
        lhs,
        rhs,
    })
}

/// The potential evaluated in double-double arithmetic and rounded once.
///
/// Near a design the two sides agree to working precision and the plain
/// evaluation returns roundoff noise; this one stays meaningful down to
/// roughly `1e-30 * lhs`.
pub fn potential_accurate(config: &Configuration, t: usize) -> Result<f64> {
    check_t(t)?;
    let c = design_constant(t, config.d())?.to_double_double();
    Ok(kernels::value_accurate(
        config.as_slice(),
        config.d(),
        config.n(),
        t,
        c,
    ))
}

/// Euclidean gradient of the potential with respect to every entry.
///
/// `df/dv_i = 4t sum_k <v_i,v_k>^{2t-1} v_k - 4t c_t S |v_i|^{2t-2} v_i`
/// with `S = sum_l |v_l|^{2t}`.
pub fn potential_gradient(config: &Configuration, t: usize) -> Result<DMatrix<f64>> {
    check_t(t)?;
    let (d, n) = (config.d(), config.n());
    let c = design_constant(t, d)?.to_f64();
    let mut out = vec![0.0; d * n];
    kernels::gradient(config.as_slice(), d, n, t, c, &mut out);
    Ok(DMatrix::from_vec(d, n, out))
}

/// Euclidean Hessian of the potential applied to `direction`.
pub fn potential_hessian_vector(
    config: &Configuration,
    t: usize,
    direction: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_t(t)?;
    let (d, n) = (config.d(), config.n());
    if direction.shape() != (d, n) {
        return Err(DesignError::DimensionMismatch(format!(
            "direction is {:?}, configuration is {d}x{n}",
            direction.shape()
        )));
    }
    let c = design_constant(t, d)?.to_f64();
    let mut out = vec![0.0; d * n];
    kernels::hessian_vector(config.as_slice(), direction.as_slice(), d, n, t, c, &mut out);
    Ok(DMatrix::from_vec(d, n, out))
}

/// Slice kernels shared by the public wrappers and the optimizer.
///
/// All matrices are column-major d×n slices.
pub(crate) mod kernels {
    use twofloat::TwoFloat;

    #[inline]
    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[inline]
    fn col(x: &[f64], d: usize, j: usize) -> &[f64] {
        &x[j * d..(j + 1) * d]
    }

    #[inline]
    fn axpy(out: &mut [f64], d: usize, j: usize, alpha: f64, v: &[f64]) {
        for (o, vi) in out[j * d..(j + 1) * d].iter_mut().zip(v) {
            *o += alpha * vi;
        }
    }

    fn pow_sum(x: &[f64], d: usize, n: usize, t: usize) -> f64 {
        (0..n)
            .map(|j| {
                let v = col(x, d, j);
                dot(v, v).powi(t as i32)
            })
            .sum()
    }

    /// Returns `(lhs, rhs)`.
    pub fn value(x: &[f64], d: usize, n: usize, t: usize, c: f64) -> (f64, f64) {
        let e = 2 * t as i32;
        let mut diag = 0.0;
        let mut off = 0.0;
        for i in 0..n {
            let vi = col(x, d, i);
            diag += dot(vi, vi).powi(e);
            for k in (i + 1)..n {
                off += dot(vi, col(x, d, k)).powi(e);
            }
        }
        let s = pow_sum(x, d, n, t);
        (diag + 2.0 * off, c * s * s)
    }

    pub fn value_accurate(x: &[f64], d: usize, n: usize, t: usize, c: (f64, f64)) -> f64 {
        let e = 2 * t as i32;
        let dd_dot = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .fold(TwoFloat::from(0.0), |acc, (p, q)| acc + TwoFloat::new_mul(*p, *q))
        };
        let mut lhs = TwoFloat::from(0.0);
        let mut s = TwoFloat::from(0.0);
        for i in 0..n {
            let vi = col(x, d, i);
            let sii = dd_dot(vi, vi);
            lhs += sii.powi(e);
            s += sii.powi(t as i32);
            for k in (i + 1)..n {
                let g = dd_dot(vi, col(x, d, k));
                if g.hi() != 0.0 {
                    lhs += g.powi(e) * 2.0;
                }
            }
        }
        let c = TwoFloat::from(c.0) + c.1;
        let f = lhs - c * s * s;
        f.hi() + f.lo()
    }

    /// Writes the gradient into `out` and returns `(lhs, rhs)`.
    pub fn gradient(x: &[f64], d: usize, n: usize, t: usize, c: f64, out: &mut [f64]) -> (f64, f64) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let e = 2 * t as i32;
        let mut s_pows = Vec::with_capacity(n);
        let mut diag = 0.0;
        let mut off = 0.0;
        for i in 0..n {
            let vi = col(x, d, i);
            let sii = dot(vi, vi);
            let p = sii.powi(e - 1);
            diag += p * sii;
            s_pows.push(sii);
            axpy(out, d, i, p, vi);
            for k in (i + 1)..n {
                let vk = col(x, d, k);
                let g = dot(vi, vk);
                let p = g.powi(e - 1);
                off += p * g;
                axpy(out, d, i, p, vk);
                axpy(out, d, k, p, vi);
            }
        }
        let big_s: f64 = s_pows.iter().map(|s| s.powi(t as i32)).sum();
        let scale = 4.0 * t as f64;
        for i in 0..n {
            let radial = c * big_s * s_pows[i].powi(t as i32 - 1);
            let vi: Vec<f64> = col(x, d, i).to_vec();
            axpy(out, d, i, -radial, &vi);
        }
        out.iter_mut().for_each(|o| *o *= scale);
        (diag + 2.0 * off, c * big_s * big_s)
    }

    pub fn hessian_vector(
        x: &[f64],
        w: &[f64],
        d: usize,
        n: usize,
        t: usize,
        c: f64,
        out: &mut [f64],
    ) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let e = 2 * t as i32;
        let q = (2 * t - 1) as f64;
        let mut s = Vec::with_capacity(n);
        let mut ds = Vec::with_capacity(n);
        for i in 0..n {
            let vi = col(x, d, i);
            let wi = col(w, d, i);
            let sii = dot(vi, vi);
            let dsi = 2.0 * dot(vi, wi);
            s.push(sii);
            ds.push(dsi);
            let p2 = sii.powi(e - 2);
            axpy(out, d, i, q * p2 * dsi, vi);
            axpy(out, d, i, p2 * sii, wi);
            for k in (i + 1)..n {
                let vk = col(x, d, k);
                let wk = col(w, d, k);
                let g = dot(vi, vk);
                let h = dot(wi, vk) + dot(vi, wk);
                let p2 = g.powi(e - 2);
                let p1 = p2 * g;
                axpy(out, d, i, q * p2 * h, vk);
                axpy(out, d, i, p1, wk);
                axpy(out, d, k, q * p2 * h, vi);
                axpy(out, d, k, p1, wi);
            }
        }
        let ti = t as i32;
        let big_s: f64 = s.iter().map(|si| si.powi(ti)).sum();
        let d_big_s: f64 = s
            .iter()
            .zip(&ds)
            .map(|(si, dsi)| t as f64 * si.powi(ti - 1) * dsi)
            .sum();
        for i in 0..n {
            let vi: Vec<f64> = col(x, d, i).to_vec();
            let wi: Vec<f64> = col(w, d, i).to_vec();
            let mut radial = d_big_s * s[i].powi(ti - 1);
            if t > 1 {
                radial += big_s * (t - 1) as f64 * s[i].powi(ti - 2) * ds[i];
            }
            axpy(out, d, i, -c * radial, &vi);
            axpy(out, d, i, -c * big_s * s[i].powi(ti - 1), &wi);
        }
        let scale = 4.0 * t as f64;
        out.iter_mut().for_each(|o| *o *= scale);
    }
}
