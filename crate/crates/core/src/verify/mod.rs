//! Certificates that do not go through the potential: cubature on the sphere,
//! Bessel identities, isoclinic planes and the Z3-orbit equations in R^3.

mod z3;

use nalgebra::{DMatrix, SymmetricEigen};
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::constructions::SubspaceBasis;
use crate::design::{bessel_residual, default_probes, potential, Configuration, NormMode, DEFAULT_PROBE_COUNT};
use crate::error::{DesignError, Result};

pub use z3::{z3_design_residual, z3_max_residual, Z3_EQUATION_COUNT, Z3_RESIDUAL_COUNT};

/// Default acceptance threshold for the cubature and Bessel oracles.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    alpha: Vec<u32>,
}

impl MultiIndex {
    pub fn new(alpha: Vec<u32>) -> Self {
        Self { alpha }
    }

    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum()
    }

    /// All exponent vectors of length `d` and total degree `degree`, in
    /// lexicographically decreasing order.
    pub fn all_of_degree(d: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(d: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if cur.len() + 1 == d {
                cur.push(left);
                out.push(MultiIndex::new(cur.clone()));
                cur.pop();
                return;
            }
            for a in (0..=left).rev() {
                cur.push(a);
                rec(d, left - a, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if d > 0 {
            rec(d, degree, &mut Vec::with_capacity(d), &mut out);
        }
        out
    }

    /// `x^alpha`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.alpha
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }
}

fn pochhammer(a: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut term = a.clone();
    for _ in 0..k {
        acc *= &term;
        term += BigRational::one();
    }
    acc
}

/// `∫_S x^alpha dσ` for the normalized surface measure on the unit sphere of R^d.
pub fn sphere_monomial_integral(alpha: &MultiIndex, d: usize) -> Result<BigRational> {
    if alpha.len() != d || d == 0 {
        return Err(DesignError::DimensionMismatch(format!(
            "multi-index of length {} for d={d}",
            alpha.len()
        )));
    }
    if alpha.alpha().iter().any(|a| a % 2 == 1) {
        return Ok(BigRational::zero());
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut num = BigRational::one();
    let mut total = 0;
    for &a in alpha.alpha() {
        num *= pochhammer(&half, a / 2);
        total += a / 2;
    }
    let den = pochhammer(&BigRational::new(BigInt::from(d), BigInt::from(2)), total);
    Ok(num / den)
}

/// `max_alpha |(1/n) Σ_j v_j^alpha - ∫_S x^alpha|` over all `|alpha| = 2t`.
pub fn cubature_residual(config: &Configuration, t: usize) -> Result<f64> {
    for (j, n) in config.norms().into_iter().enumerate() {
        if (n - 1.0).abs() > 1e-12 {
            return Err(DesignError::NotUnitNorm { index: j, norm: n });
        }
    }
    let d = config.d();
    let n = config.n();
    let deg = 2 * t;
    // powers[j][i][p] = v_j[i]^p
    let powers: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|j| {
            config
                .column(j)
                .iter()
                .map(|&x| {
                    let mut p = Vec::with_capacity(deg + 1);
                    let mut acc = 1.0;
                    for _ in 0..=deg {
                        p.push(acc);
                        acc *= x;
                    }
                    p
                })
                .collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for alpha in MultiIndex::all_of_degree(d, deg as u32) {
        let exact = sphere_monomial_integral(&alpha, d)?
            .to_f64()
            .expect("finite rational");
        let mean = powers
            .iter()
            .map(|pj| {
                alpha
                    .alpha()
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| pj[i][a as usize])
                    .product::<f64>()
            })
            .sum::<f64>()
            / n as f64;
        worst = worst.max((mean - exact).abs());
    }
    Ok(worst)
}

/// `max_{j≠k} ||P_j P_k P_j - σ² P_j||_2`.
pub fn equiisoclinic_residual(bases: &[SubspaceBasis], sigma_squared: f64) -> Result<f64> {
    if let Some(first) = bases.first() {
        let shape = (first.ambient_dim(), first.dim());
        if bases.iter().any(|b| (b.ambient_dim(), b.dim()) != shape) {
            return Err(DesignError::DimensionMismatch(
                "subspaces differ in ambient or own dimension".into(),
            ));
        }
    }
    let projections: Vec<DMatrix<f64>> = bases.iter().map(SubspaceBasis::projection).collect();
    let mut worst: f64 = 0.0;
    for (j, pj) in projections.iter().enumerate() {
        for (k, pk) in projections.iter().enumerate() {
            if j == k {
                continue;
            }
            let m = pj * pk * pj - pj * sigma_squared;
            let sym = (&m + m.transpose()) * 0.5;
            let norm = SymmetricEigen::new(sym)
                .eigenvalues
                .iter()
                .fold(0.0f64, |a, &l| a.max(l.abs()));
            worst = worst.max(norm);
        }
    }
    Ok(worst)
}

/// Applies the numerical-zero policy: `f ≤ tolerance · n²` after trace
/// normalization. Returns the verdict and the normalized `f`.
pub fn is_design(config: &Configuration, t: usize, tolerance: f64) -> Result<(bool, f64)> {
    let normalized = config.normalize_trace()?;
    let f = potential(&normalized, t)?.f;
    let n = config.n() as f64;
    Ok((f <= tolerance * n * n, f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    Potential,
    Cubature,
    Bessel,
}

impl Oracle {
    pub const ALL: [Oracle; 3] = [Oracle::Potential, Oracle::Cubature, Oracle::Bessel];

    pub fn as_str(self) -> &'static str {
        match self {
            Oracle::Potential => "potential",
            Oracle::Cubature => "cubature",
            Oracle::Bessel => "bessel",
        }
    }
}

impl std::str::FromStr for Oracle {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potential" => Ok(Oracle::Potential),
            "cubature" => Ok(Oracle::Cubature),
            "bessel" => Ok(Oracle::Bessel),
            other => Err(DesignError::InvalidParameter(format!("unknown oracle `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub oracle: Oracle,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Thresholds for [`run_oracles`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleThresholds {
    /// Relative to n².
    pub potential: f64,
    pub cubature: f64,
    pub bessel: f64,
    pub probe_seed: u64,
}

impl Default for OracleThresholds {
    fn default() -> Self {
        Self {
            potential: crate::design::DEFAULT_ZERO_TOLERANCE,
            cubature: ORACLE_TOLERANCE,
            bessel: ORACLE_TOLERANCE,
            probe_seed: 0,
        }
    }
}

/// Runs the selected oracles. The cubature oracle is skipped (absent from
/// the output) for configurations whose vectors do not all have equal norm.
pub fn run_oracles(
    config: &Configuration,
    t: usize,
    oracles: &[Oracle],
    thresholds: &OracleThresholds,
) -> Result<Vec<OracleOutcome>> {
    let mut out = Vec::with_capacity(oracles.len());
    for &oracle in oracles {
        let (value, threshold) = match oracle {
            Oracle::Potential => {
                let n = config.n() as f64;
                let (_, f) = is_design(config, t, thresholds.potential)?;
                (f, thresholds.potential * n * n)
            }
            Oracle::Cubature => match unit_view(config)? {
                Some(unit) => (cubature_residual(&unit, t)?, thresholds.cubature),
                None => continue,
            },
            Oracle::Bessel => {
                let probes = default_probes(config.d(), DEFAULT_PROBE_COUNT, thresholds.probe_seed);
                (bessel_residual(config, t, &probes)?, thresholds.bessel)
            }
        };
        out.push(OracleOutcome {
            oracle,
            value,
            threshold,
            passed: value <= threshold,
        });
    }
    Ok(out)
}

fn unit_view(config: &Configuration) -> Result<Option<Configuration>> {
    if config.mode() == NormMode::EqualNorm {
        return Ok(Some(config.clone()));
    }
    let norms = config.norms();
    let first = norms[0];
    if norms.iter().all(|n| (n - first).abs() <= 1e-12 * first) {
        Configuration::equal_norm_from_raw(config.entries().clone()).map(Some)
    } else {
        Ok(None)
    }
}
