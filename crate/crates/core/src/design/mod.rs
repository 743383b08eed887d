//! Core types for projective spherical (t,t)-designs.
//!
//! A configuration is a d×n real matrix whose columns are the design
//! vectors. Equal-norm configurations keep every column on the unit sphere;
//! weighted configurations let the norms carry cubature weights and are
//! usually scaled so that the trace of the Gramian equals n.

mod bessel;
pub mod io;
mod potential;

pub use bessel::{bessel_residual, default_probes, n_bounds, DEFAULT_PROBE_COUNT};
pub use potential::{
    design_constant, potential, potential_accurate, potential_gradient, potential_hessian_vector,
    DesignConstant, PotentialValue,
};
pub(crate) use potential::kernels;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};

/// Tolerance on unit column norms for equal-norm configurations.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-14;
/// Tolerance on the trace for a weighted configuration to count as normalized.
pub const TRACE_TOLERANCE: f64 = 1e-12;
/// Default relative zero threshold: a normalized configuration is a design
/// when `f <= DEFAULT_ZERO_TOLERANCE * n^2`.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-12;

/// Which constraint set a configuration lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    EqualNorm,
    Weighted,
}

impl NormMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::EqualNorm => "equal_norm",
            NormMode::Weighted => "weighted",
        }
    }
}

impl std::fmt::Display for NormMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NormMode {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal_norm" | "equal-norm" | "equal" => Ok(NormMode::EqualNorm),
            "weighted" => Ok(NormMode::Weighted),
            other => Err(DesignError::InvalidParameter(format!(
                "unknown norm mode `{other}` (expected equal_norm or weighted)"
            ))),
        }
    }
}

/// A sequence of n vectors in R^d stored as the columns of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    entries: DMatrix<f64>,
    mode: NormMode,
    normalized: bool,
}

impl Configuration {
    /// Validates `entries` against the invariants of `mode`.
    pub fn new(entries: DMatrix<f64>, mode: NormMode) -> Result<Self> {
        let (d, n) = entries.shape();
        if d == 0 || n == 0 {
            return Err(DesignError::InvalidDimensions(format!(
                "need d >= 1 and n >= 1, got d={d}, n={n}"
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(DesignError::InvalidParameter(
                "configuration has non-finite entries".into(),
            ));
        }
        for (j, col) in entries.column_iter().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(DesignError::ZeroColumn(j));
            }
            if mode == NormMode::EqualNorm && (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(DesignError::NotUnitNorm { index: j, norm });
            }
        }
        let normalized = match mode {
            NormMode::EqualNorm => true,
            NormMode::Weighted => {
                (entries.norm_squared() - n as f64).abs() <= TRACE_TOLERANCE * n as f64
            }
        };
        Ok(Self {
            entries,
            mode,
            normalized,
        })
    }

    /// Builds an equal-norm configuration by scaling each column to unit length.
    pub fn equal_norm_from_raw(mut entries: DMatrix<f64>) -> Result<Self> {
        for (j, mut col) in entries.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(DesignError::ZeroColumn(j));
            }
            col /= norm;
        }
        Self::new(entries, NormMode::EqualNorm)
    }

    /// Builds a weighted configuration from columns given as slices.
    pub fn from_columns(columns: &[Vec<f64>], mode: NormMode) -> Result<Self> {
        let n = columns.len();
        let d = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != d) {
            return Err(DesignError::DimensionMismatch(
                "columns have different lengths".into(),
            ));
        }
        let data: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::new(DMatrix::from_column_slice(d, n, &data), mode)
    }

    pub fn d(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    /// True for equal-norm configurations and for weighted ones whose
    /// squared norms sum to n.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// Column-major view of the entries; column j occupies `j*d..(j+1)*d`.
    pub fn as_slice(&self) -> &[f64] {
        self.entries.as_slice()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let d = self.d();
        &self.entries.as_slice()[j * d..(j + 1) * d]
    }

    pub fn norms(&self) -> Vec<f64> {
        self.entries.column_iter().map(|c| c.norm()).collect()
    }

    /// Sum of squared column norms (the trace of the Gramian).
    pub fn trace(&self) -> f64 {
        self.entries.norm_squared()
    }

    pub fn gram(&self) -> GramMatrix {
        GramMatrix(self.entries.transpose() * &self.entries)
    }

    /// Returns `s·V` with `s` chosen so that the squared norms sum to n.
    ///
    /// Equal-norm configurations already satisfy this and are returned as is.
    pub fn normalize_trace(&self) -> Result<Self> {
        let trace = self.trace();
        if trace == 0.0 {
            return Err(DesignError::AllZero);
        }
        let n = self.n() as f64;
        if self.mode == NormMode::EqualNorm || (trace - n).abs() <= f64::EPSILON * n {
            let mut out = self.clone();
            out.normalized = true;
            return Ok(out);
        }
        let scale = (n / trace).sqrt();
        let mut out = Self::new(&self.entries * scale, self.mode)?;
        out.normalized = true;
        Ok(out)
    }

    /// Applies `V ↦ U V D` with `U` a d×d matrix and column signs `D`.
    pub fn transformed(&self, u: &DMatrix<f64>, signs: &[f64]) -> Result<Self> {
        if u.shape() != (self.d(), self.d()) || signs.len() != self.n() {
            return Err(DesignError::DimensionMismatch(
                "transform shape does not match configuration".into(),
            ));
        }
        let mut m = u * &self.entries;
        for (j, mut col) in m.column_iter_mut().enumerate() {
            col *= signs[j];
        }
        match self.mode {
            NormMode::EqualNorm => Self::equal_norm_from_raw(m),
            NormMode::Weighted => Self::new(m, NormMode::Weighted),
        }
    }

    /// Reorders the columns so that new column `j` is old column `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(DesignError::InvalidParameter("not a permutation".into()));
        }
        let cols: Vec<Vec<f64>> = perm.iter().map(|&p| self.column(p).to_vec()).collect();
        Self::from_columns(&cols, self.mode)
    }
}

/// The n×n Gramian `G[j][k] = <v_j, v_k>`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix(pub DMatrix<f64>);

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.0[(j, k)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// The 3×3 block `[3a..3a+3] × [3b..3b+3]`.
    pub fn block3(&self, a: usize, b: usize) -> nalgebra::Matrix3<f64> {
        nalgebra::Matrix3::from_fn(|r, c| self.0[(3 * a + r, 3 * b + c)])
    }
}

/// The triple (t, d, n) with its constraint set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesignProblem {
    pub t: usize,
    pub d: usize,
    pub n: usize,
    pub mode: NormMode,
}

impl DesignProblem {
    pub fn new(t: usize, d: usize, n: usize, mode: NormMode) -> Result<Self> {
        if t == 0 || d == 0 || n == 0 {
            return Err(DesignError::InvalidParameter(format!(
                "t, d, n must all be positive (got t={t}, d={d}, n={n})"
            )));
        }
        Ok(Self { t, d, n, mode })
    }

    /// Absolute zero threshold `tolerance * n^2` for this problem size.
    pub fn zero_threshold(&self, tolerance: f64) -> f64 {
        tolerance * (self.n * self.n) as f64
    }
}
