//! Sweeps over n for fixed (t, d, mode): best potential per n, jump detection
//! and isolated-zero classification.

mod io;

pub use io::{load, persist, sidecar_path};

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{DesignProblem, NormMode};
use crate::error::{DesignError, Result};
use crate::manifold::{run_seeds, Convergence, SolveResult, SolverOptions};

/// `is_zero` threshold relative to n^2.
pub const DEFAULT_SCAN_ZERO_TOLERANCE: f64 = 1e-12;
/// Upper edge of the ambiguous band, relative to n^2.
pub const AMBIGUOUS_UPPER: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 20;
const SEED_STRIDE: u64 = 1_000_000_007;
/// Two restarts reaching the same nonzero value (relative) mark a stagnation value.
const REPEAT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub t: usize,
    pub d: usize,
    pub n: usize,
    pub mode: NormMode,
    pub best_f: f64,
    pub restarts_used: usize,
    pub wall_seconds: f64,
    pub is_zero: bool,
}

/// Per-n solver summary kept in the sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanDiagnostic {
    pub n: usize,
    pub best_seed: u64,
    pub zero_found: usize,
    pub gradient_small: usize,
    pub iteration_cap: usize,
    pub escalated: bool,
    /// Restarts whose value agrees with the best to relative 1e-8.
    pub repeat_count: usize,
    /// Nonzero best value reached by more than one restart.
    pub stagnation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub restarts: usize,
    pub seed: u64,
    pub zero_tolerance: f64,
    pub escalate: bool,
    pub bisect: bool,
    pub solver: SolverOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            zero_tolerance: DEFAULT_SCAN_ZERO_TOLERANCE,
            escalate: true,
            bisect: false,
            solver: SolverOptions::default(),
        }
    }
}

impl ScanOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(DesignError::InvalidParameter("restarts must be >= 1".into()));
        }
        if !(self.zero_tolerance > 0.0) {
            return Err(DesignError::InvalidParameter("zero_tolerance must be positive".into()));
        }
        self.solver.validate()
    }

    /// Seed of restart 0 at `n`; restart r uses this plus r.
    pub fn seed_for(&self, n: usize) -> u64 {
        self.seed.wrapping_add((n as u64).wrapping_mul(SEED_STRIDE))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub t: usize,
    pub d: usize,
    pub mode: NormMode,
    pub options: ScanOptions,
    pub diagnostics: Vec<ScanDiagnostic>,
    /// n values evaluated by bisection, in evaluation order.
    #[serde(default)]
    pub bisect_probes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub records: Vec<ScanRecord>,
    pub metadata: ScanMetadata,
}

impl ScanTable {
    pub fn record(&self, n: usize) -> Option<&ScanRecord> {
        self.records.iter().find(|r| r.n == n)
    }

    pub fn n_range(&self) -> Option<(usize, usize)> {
        Some((self.records.first()?.n, self.records.last()?.n))
    }

    /// Equality of everything except wall-clock timings.
    pub fn same_results(&self, other: &ScanTable) -> bool {
        let strip = |t: &ScanTable| {
            let mut c = t.clone();
            c.records.iter_mut().for_each(|r| r.wall_seconds = 0.0);
            c
        };
        strip(self) == strip(other)
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.records.windows(2) {
            if w[1].n != w[0].n + 1 {
                return Err(DesignError::Format(format!(
                    "n values not contiguous: {} then {}",
                    w[0].n, w[1].n
                )));
            }
        }
        let m = &self.metadata;
        for r in &self.records {
            if (r.t, r.d, r.mode) != (m.t, m.d, m.mode) {
                return Err(DesignError::Format(format!("record n={} has a foreign (t, d, mode)", r.n)));
            }
        }
        Ok(())
    }
}

fn zero_threshold(tol: f64, n: usize) -> f64 {
    tol * (n * n) as f64
}

fn evaluate(t: usize, d: usize, mode: NormMode, n: usize, options: &ScanOptions) -> Result<(ScanRecord, ScanDiagnostic)> {
    let start = Instant::now();
    let problem = DesignProblem::new(t, d, n, mode)?;
    let base = options.seed_for(n);
    let seeds = |from: usize, to: usize| -> Vec<u64> { (from..to).map(|r| base.wrapping_add(r as u64)).collect() };
    let mut runs = run_seeds(&problem, &seeds(0, options.restarts), &options.solver)?;
    let thr = zero_threshold(options.zero_tolerance, n);
    let ambiguous = |f: f64| f > thr && f <= zero_threshold(AMBIGUOUS_UPPER, n);
    let mut escalated = false;
    if options.escalate && ambiguous(best_of(&runs).f_value) {
        runs.extend(run_seeds(&problem, &seeds(options.restarts, 2 * options.restarts), &options.solver)?);
        escalated = true;
    }
    let best = best_of(&runs);
    let best_f = best.f_value.max(0.0);
    let is_zero = best_f <= thr;
    let count = |c: Convergence| runs.iter().filter(|r| r.converged == c).count();
    let repeat_count = runs
        .iter()
        .filter(|r| (r.f_value - best.f_value).abs() <= REPEAT_TOLERANCE * best.f_value.abs().max(thr))
        .count();
    let diagnostic = ScanDiagnostic {
        n,
        best_seed: best.seed,
        zero_found: count(Convergence::ZeroFound),
        gradient_small: count(Convergence::GradientSmall),
        iteration_cap: count(Convergence::IterationCap),
        escalated,
        repeat_count,
        stagnation: !is_zero && repeat_count > 1,
    };
    let record = ScanRecord {
        t,
        d,
        n,
        mode,
        best_f,
        restarts_used: runs.len(),
        wall_seconds: start.elapsed().as_secs_f64(),
        is_zero,
    };
    Ok((record, diagnostic))
}

fn best_of(runs: &[SolveResult]) -> &SolveResult {
    runs.iter()
        .min_by(|a, b| a.f_value.total_cmp(&b.f_value).then_with(|| a.seed.cmp(&b.seed)))
        .expect("at least one restart")
}

fn check_range(t: usize, d: usize, n_from: usize, n_to: usize) -> Result<()> {
    if t == 0 || d == 0 || n_from == 0 {
        return Err(DesignError::InvalidDimensions(format!(
            "need t, d, n >= 1, got t={t}, d={d}, n_from={n_from}"
        )));
    }
    if n_from > n_to {
        return Err(DesignError::InvalidParameter(format!("n_from {n_from} exceeds n_to {n_to}")));
    }
    Ok(())
}

/// Best potential for every n in `n_from..=n_to` (or a bisection, when
/// `options.bisect` is set).
pub fn scan_n_range(
    t: usize,
    d: usize,
    mode: NormMode,
    n_from: usize,
    n_to: usize,
    options: &ScanOptions,
) -> Result<ScanTable> {
    scan_n_range_resume(t, d, mode, n_from, n_to, options, None)
}

/// As [`scan_n_range`], reusing records of `partial` that fall in the range.
/// The partial table must come from the same (t, d, mode) and options.
pub fn scan_n_range_resume(
    t: usize,
    d: usize,
    mode: NormMode,
    n_from: usize,
    n_to: usize,
    options: &ScanOptions,
    partial: Option<&ScanTable>,
) -> Result<ScanTable> {
    check_range(t, d, n_from, n_to)?;
    options.validate()?;
    let mut known: BTreeMap<usize, (ScanRecord, ScanDiagnostic)> = BTreeMap::new();
    if let Some(p) = partial {
        let m = &p.metadata;
        if (m.t, m.d, m.mode) != (t, d, mode) || m.options != *options {
            return Err(DesignError::InvalidParameter(
                "partial table was produced with different parameters".into(),
            ));
        }
        for r in &p.records {
            if let Some(diag) = m.diagnostics.iter().find(|g| g.n == r.n) {
                known.insert(r.n, (r.clone(), diag.clone()));
            }
        }
    }
    let mut metadata = ScanMetadata {
        t,
        d,
        mode,
        options: options.clone(),
        diagnostics: Vec::new(),
        bisect_probes: Vec::new(),
    };
    let kept: Vec<(ScanRecord, ScanDiagnostic)> = if options.bisect {
        bisect(t, d, mode, n_from, n_to, options, &mut known, &mut metadata.bisect_probes)?
    } else {
        let missing: Vec<usize> = (n_from..=n_to).filter(|n| !known.contains_key(n)).collect();
        let fresh = missing
            .par_iter()
            .map(|&n| evaluate(t, d, mode, n, options))
            .collect::<Result<Vec<_>>>()?;
        for entry in fresh {
            known.insert(entry.0.n, entry);
        }
        known.range(n_from..=n_to).map(|(_, v)| v.clone()).collect()
    };
    let (records, diagnostics) = kept.into_iter().unzip();
    metadata.diagnostics = diagnostics;
    Ok(ScanTable { records, metadata })
}

/// Assumes zero-ness is monotone in n. Returns the contiguous pair straddling
/// the jump, or the single endpoint when no jump lies inside the range.
fn bisect(
    t: usize,
    d: usize,
    mode: NormMode,
    n_from: usize,
    n_to: usize,
    options: &ScanOptions,
    known: &mut BTreeMap<usize, (ScanRecord, ScanDiagnostic)>,
    probes: &mut Vec<usize>,
) -> Result<Vec<(ScanRecord, ScanDiagnostic)>> {
    let mut zero_at = |n: usize| -> Result<bool> {
        probes.push(n);
        if let std::collections::btree_map::Entry::Vacant(slot) = known.entry(n) {
            slot.insert(evaluate(t, d, mode, n, options)?);
        }
        Ok(known[&n].0.is_zero)
    };
    let (mut lo, mut hi) = (n_from, n_to);
    let pair = if !zero_at(hi)? {
        vec![hi]
    } else if lo == hi || zero_at(lo)? {
        vec![lo]
    } else {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if zero_at(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        vec![lo, hi]
    };
    Ok(pair.into_iter().map(|n| known[&n].clone()).collect())
}

fn zero_flags(table: &ScanTable, zero_tolerance: f64) -> Vec<(usize, bool)> {
    table
        .records
        .iter()
        .map(|r| (r.n, r.best_f <= zero_threshold(zero_tolerance, r.n)))
        .collect()
}

/// Smallest zero n such that every larger n in the table is zero.
pub fn detect_jump(table: &ScanTable, zero_tolerance: f64) -> Option<usize> {
    let flags = zero_flags(table, zero_tolerance);
    let mut jump = None;
    for &(n, z) in flags.iter().rev() {
        if !z {
            break;
        }
        jump = Some(n);
    }
    jump
}

/// Smallest zero n in the table.
pub fn first_zero(table: &ScanTable, zero_tolerance: f64) -> Option<usize> {
    zero_flags(table, zero_tolerance).into_iter().find(|&(_, z)| z).map(|(n, _)| n)
}

/// Zero n whose successor in the table is nonzero.
pub fn detect_special(table: &ScanTable, zero_tolerance: f64) -> Vec<usize> {
    zero_flags(table, zero_tolerance)
        .windows(2)
        .filter(|w| w[0].1 && !w[1].1)
        .map(|w| w[0].0)
        .collect()
}

/// Zero at n with no zero at n - 1 or n + 1.
pub fn exceptional_check(table: &ScanTable, n: usize) -> Result<bool> {
    let get = |m: usize| {
        table
            .record(m)
            .map(|r| r.is_zero)
            .ok_or_else(|| DesignError::Precondition(format!("table has no record for n = {m}")))
    };
    if n == 0 {
        return Err(DesignError::Precondition("n - 1 must be a valid size".into()));
    }
    let (below, at, above) = (get(n - 1)?, get(n)?, get(n + 1)?);
    Ok(at && !below && !above)
}

/// Best values are non-increasing in n up to `slack`.
pub fn is_non_increasing(table: &ScanTable, slack: f64) -> bool {
    table.records.windows(2).all(|w| w[1].best_f <= w[0].best_f + slack)
}

#[cfg(test)]
pub(crate) fn synthetic(t: usize, d: usize, mode: NormMode, values: &[(usize, f64)]) -> ScanTable {
    let records = values
        .iter()
        .map(|&(n, f)| ScanRecord {
            t,
            d,
            n,
            mode,
            best_f: f,
            restarts_used: 1,
            wall_seconds: 0.0,
            is_zero: f <= zero_threshold(DEFAULT_SCAN_ZERO_TOLERANCE, n),
        })
        .collect();
    ScanTable {
        records,
        metadata: ScanMetadata {
            t,
            d,
            mode,
            options: ScanOptions::default(),
            diagnostics: Vec::new(),
            bisect_probes: Vec::new(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = DEFAULT_SCAN_ZERO_TOLERANCE;

    fn zeros(table: &ScanTable) -> Vec<bool> {
        table.records.iter().map(|r| r.is_zero).collect()
    }

    #[test]
    fn lines_in_the_plane() {
        let table = scan_n_range(2, 2, NormMode::EqualNorm, 2, 5, &ScanOptions::default()).unwrap();
        assert_eq!(zeros(&table), [false, true, true, true]);
        assert_eq!(detect_jump(&table, TOL), Some(3));
        assert!(detect_special(&table, TOL).is_empty());
        assert!(!exceptional_check(&table, 3).unwrap());
        assert!(exceptional_check(&table, 5).is_err());
        table.validate().unwrap();
        for r in &table.records {
            assert_eq!(r.restarts_used, 20);
            assert!(r.best_f >= 0.0);
        }
    }

    #[test]
    fn two_mubs_in_the_plane() {
        let table = scan_n_range(3, 2, NormMode::EqualNorm, 2, 5, &ScanOptions::default()).unwrap();
        assert_eq!(first_zero(&table, TOL), Some(4));
    }

    #[test]
    fn weighted_best_values_decrease() {
        let opts = ScanOptions {
            restarts: 10,
            ..ScanOptions::default()
        };
        let table = scan_n_range(2, 3, NormMode::Weighted, 4, 7, &opts).unwrap();
        assert!(is_non_increasing(&table, 1e-12), "{:?}", table.records);
    }

    #[test]
    fn resume_matches_a_fresh_run() {
        let opts = ScanOptions {
            restarts: 4,
            seed: 9,
            ..ScanOptions::default()
        };
        let fresh = scan_n_range(2, 3, NormMode::EqualNorm, 4, 7, &opts).unwrap();
        let partial = scan_n_range(2, 3, NormMode::EqualNorm, 4, 5, &opts).unwrap();
        let resumed = scan_n_range_resume(2, 3, NormMode::EqualNorm, 4, 7, &opts, Some(&partial)).unwrap();
        assert!(fresh.same_results(&resumed));
        let other = ScanOptions { seed: 10, ..opts };
        assert!(scan_n_range_resume(2, 3, NormMode::EqualNorm, 4, 7, &other, Some(&partial)).is_err());
    }

    #[test]
    fn more_restarts_never_raise_best_values() {
        let few = ScanOptions {
            restarts: 2,
            escalate: false,
            ..ScanOptions::default()
        };
        let many = ScanOptions { restarts: 6, ..few.clone() };
        let a = scan_n_range(2, 3, NormMode::EqualNorm, 5, 7, &few).unwrap();
        let b = scan_n_range(2, 3, NormMode::EqualNorm, 5, 7, &many).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!(y.best_f <= x.best_f);
        }
    }

    #[test]
    fn bisection_brackets_the_jump() {
        let opts = ScanOptions {
            bisect: true,
            ..ScanOptions::default()
        };
        let table = scan_n_range(2, 2, NormMode::EqualNorm, 2, 9, &opts).unwrap();
        table.validate().unwrap();
        assert_eq!(table.records.iter().map(|r| r.n).collect::<Vec<_>>(), [2, 3]);
        assert_eq!(detect_jump(&table, TOL), Some(3));
        assert!(table.metadata.bisect_probes.len() <= 5);
    }

    #[test]
    fn synthetic_special_situation() {
        let values: Vec<(usize, f64)> = (55..=80)
            .map(|n| (n, if n == 60 || n >= 72 { 0.0 } else { 1e-3 }))
            .collect();
        let table = synthetic(5, 4, NormMode::EqualNorm, &values);
        assert_eq!(detect_special(&table, TOL), [60]);
        assert_eq!(detect_jump(&table, TOL), Some(72));
        assert!(exceptional_check(&table, 60).unwrap());
        assert!(!exceptional_check(&table, 72).unwrap());
    }

    #[test]
    fn synthetic_isolated_zero_without_jump() {
        let values: Vec<(usize, f64)> = (118..=125).map(|n| (n, if n == 120 { 1e-20 } else { 0.5 })).collect();
        let table = synthetic(9, 3, NormMode::EqualNorm, &values);
        assert_eq!(detect_jump(&table, TOL), None);
        assert_eq!(detect_special(&table, TOL), [120]);
    }

    #[test]
    fn synthetic_all_nonzero() {
        let values: Vec<(usize, f64)> = (3..9).map(|n| (n, 1.0 / n as f64)).collect();
        let table = synthetic(2, 5, NormMode::Weighted, &values);
        assert_eq!(detect_jump(&table, TOL), None);
        assert_eq!(first_zero(&table, TOL), None);
        assert!(detect_special(&table, TOL).is_empty());
    }

    #[test]
    fn rejects_bad_ranges() {
        let o = ScanOptions::default();
        assert!(scan_n_range(2, 2, NormMode::EqualNorm, 5, 4, &o).is_err());
        let zero = ScanOptions { restarts: 0, ..o };
        assert!(scan_n_range(2, 2, NormMode::EqualNorm, 2, 4, &zero).is_err());
    }
}
