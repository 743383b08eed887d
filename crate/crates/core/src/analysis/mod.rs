//! Structure of numerical designs: repeated angles and norms, angle
//! incidences, and m-product fingerprints.

mod family;

use serde::{Deserialize, Serialize};

use crate::design::Configuration;
use crate::error::{DesignError, Result};

pub use family::{match_to_family, match_to_family_detailed, FamilyMatch, FAMILY_TOLERANCE};

pub const DEFAULT_CLUSTER_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_QUANTUM: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Mean of the members.
    pub value: f64,
    pub multiplicity: usize,
}

/// Single-linkage clustering on the line: sorted values are split wherever
/// consecutive gaps exceed `tolerance`.
pub fn cluster_values(values: &[f64], tolerance: f64) -> Result<Vec<Cluster>> {
    check_tolerance(tolerance)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tolerance {
            if i > start {
                let members = &sorted[start..i];
                out.push(Cluster {
                    value: members.iter().sum::<f64>() / members.len() as f64,
                    multiplicity: members.len(),
                });
            }
            start = i;
        }
    }
    Ok(out)
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance > 0.0 && tolerance.is_finite() {
        Ok(())
    } else {
        Err(DesignError::InvalidParameter(format!(
            "tolerance must be positive, got {tolerance}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleProfile {
    pub clusters: Vec<Cluster>,
    pub cluster_tolerance: f64,
}

impl AngleProfile {
    pub fn total(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }
}

/// Squared cosines between the lines spanned by each pair of columns.
fn squared_angles(config: &Configuration) -> Vec<Vec<f64>> {
    let g = config.gram();
    let n = config.n();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let x = g.get(j, k);
                    x * x / (g.get(j, j) * g.get(k, k))
                })
                .collect()
        })
        .collect()
}

/// Clusters the n(n-1)/2 squared angles `|<v_j,v_k>|² / (|v_j|²|v_k|²)`.
pub fn angle_profile(config: &Configuration, cluster_tolerance: f64) -> Result<AngleProfile> {
    let sq = squared_angles(config);
    let n = config.n();
    let values: Vec<f64> = (0..n)
        .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
        .map(|(j, k)| sq[j][k])
        .collect();
    Ok(AngleProfile {
        clusters: cluster_values(&values, cluster_tolerance)?,
        cluster_tolerance,
    })
}

/// For each vector, the number of others at squared angle `target ± tolerance`.
pub fn per_vector_angle_incidence(
    config: &Configuration,
    target_squared_angle: f64,
    tolerance: f64,
) -> Result<Vec<usize>> {
    check_tolerance(tolerance)?;
    let sq = squared_angles(config);
    Ok(sq
        .iter()
        .enumerate()
        .map(|(j, row)| {
            row.iter()
                .enumerate()
                .filter(|&(k, &s)| k != j && (s - target_squared_angle).abs() <= tolerance)
                .count()
        })
        .collect())
}

pub fn norm_profile(config: &Configuration, cluster_tolerance: f64) -> Result<Vec<Cluster>> {
    cluster_values(&config.norms(), cluster_tolerance)
}

/// Sorted, quantized multiset of m-products
/// `<v_{j1},v_{j2}><v_{j2},v_{j3}>...<v_{jm},v_{j1}>` over distinct indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MProductFingerprint {
    pub m: usize,
    /// Values as integer multiples of `quantum`.
    pub keys: Vec<i64>,
    pub quantum: f64,
}

impl MProductFingerprint {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        let q = self.quantum;
        self.keys.iter().map(|&k| k as f64 * q).collect()
    }

    /// Equality allowing neighbouring grid cells, which absorbs values that
    /// round to different sides of a cell boundary.
    pub fn matches(&self, other: &Self) -> bool {
        self.m == other.m
            && self.quantum == other.quantum
            && self.keys.len() == other.keys.len()
            && self.keys.iter().zip(&other.keys).all(|(a, b)| (a - b).abs() <= 1)
    }
}

pub fn m_product_fingerprint(config: &Configuration, m: usize, quantum: f64) -> Result<MProductFingerprint> {
    check_tolerance(quantum)?;
    let g = config.gram();
    let n = config.n();
    let mut values = Vec::new();
    match m {
        2 => {
            for j in 0..n {
                for k in j + 1..n {
                    values.push(g.get(j, k) * g.get(j, k));
                }
            }
        }
        // the Gramian is symmetric, so a 3-cycle product is invariant under
        // all orderings of its indices
        3 => {
            for j in 0..n {
                for k in j + 1..n {
                    let gjk = g.get(j, k);
                    for l in k + 1..n {
                        values.push(gjk * g.get(k, l) * g.get(l, j));
                    }
                }
            }
        }
        _ => {
            return Err(DesignError::InvalidParameter(format!(
                "m-product fingerprints support m = 2 or 3, got {m}"
            )))
        }
    }
    let mut keys: Vec<i64> = values.iter().map(|v| (v / quantum).round() as i64).collect();
    keys.sort_unstable();
    Ok(MProductFingerprint {
        m,
        keys,
        quantum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        kempner_24pt, new_11pt_d5, reznick_11pt, three_mubs_r4, twelve_point_design, MercedesAngles,
    };
    use crate::design::NormMode;
    use crate::manifold::random_configuration;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn mults(clusters: &[Cluster]) -> Vec<(f64, usize)> {
        clusters.iter().map(|c| ((c.value * 1e6).round() / 1e6, c.multiplicity)).collect()
    }

    #[test]
    fn angle_profiles_of_known_designs() {
        let p = angle_profile(&three_mubs_r4(), DEFAULT_CLUSTER_TOLERANCE).unwrap();
        assert_eq!(mults(&p.clusters), vec![(0.0, 18), (0.25, 48)]);
        let p = angle_profile(&kempner_24pt(), DEFAULT_CLUSTER_TOLERANCE).unwrap();
        assert_eq!(mults(&p.clusters), vec![(0.0, 108), (0.25, 96), (0.5, 72)]);
        assert_eq!(p.total(), 276);
        let p = angle_profile(&crate::constructions::equally_spaced_lines(2).unwrap(), 1e-6).unwrap();
        assert_eq!(mults(&p.clusters), vec![(0.25, 3)]);
    }

    #[test]
    fn incidence_counts() {
        let th = MercedesAngles::new([0.1, 0.7, 1.9, 2.6]);
        let c = twelve_point_design(&th);
        assert_eq!(per_vector_angle_incidence(&c, 0.25, 1e-6).unwrap(), vec![2; 12]);
        let e = crate::design::Configuration::new(DMatrix::identity(5, 5), NormMode::EqualNorm).unwrap();
        assert_eq!(per_vector_angle_incidence(&e, 0.0, 1e-9).unwrap(), vec![4; 5]);
        assert_eq!(per_vector_angle_incidence(&three_mubs_r4(), 0.25, 1e-9).unwrap(), vec![8; 12]);
        assert!(per_vector_angle_incidence(&e, 0.0, 0.0).is_err());
    }

    #[test]
    fn norm_profiles() {
        let m = |c: &Configuration| {
            let mut v: Vec<usize> = norm_profile(c, 1e-6).unwrap().iter().map(|c| c.multiplicity).collect();
            v.sort_unstable();
            v
        };
        assert_eq!(m(&reznick_11pt()), vec![1, 2, 8]);
        assert_eq!(m(&new_11pt_d5()), vec![1, 5, 5]);
        assert_eq!(m(&three_mubs_r4()), vec![12]);
    }

    #[test]
    fn clusters_are_separated_and_complete() {
        let values = [0.0, 0.5e-6, 1.4e-6, 3.0e-6, 1.0, 1.0];
        let c = cluster_values(&values, 1e-6).unwrap();
        assert_eq!(c.iter().map(|c| c.multiplicity).collect::<Vec<_>>(), vec![3, 1, 2]);
        for w in c.windows(2) {
            assert!(w[1].value - w[0].value > 1e-6);
        }
        assert!(cluster_values(&values, -1.0).is_err());
        assert!(cluster_values(&[], 1.0).unwrap().is_empty());
    }

    fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        a.qr().q()
    }

    #[test]
    fn fingerprints_are_projective_unitary_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..100 {
            let c = random_configuration(4, 7, NormMode::EqualNorm, trial).unwrap();
            let u = random_orthogonal(4, &mut rng);
            let signs: Vec<f64> = (0..7).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let mut perm: Vec<usize> = (0..7).collect();
            for i in (1..7).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let moved = c.transformed(&u, &signs).unwrap().permuted(&perm).unwrap();
            for m in [2, 3] {
                let a = m_product_fingerprint(&c, m, DEFAULT_QUANTUM).unwrap();
                let b = m_product_fingerprint(&moved, m, DEFAULT_QUANTUM).unwrap();
                assert!(a.matches(&b), "trial {trial} m {m}");
            }
        }
    }

    #[test]
    fn mubs_are_a_member_of_the_family() {
        let fam = twelve_point_design(&MercedesAngles::new([0.0, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]));
        for m in [2, 3] {
            let a = m_product_fingerprint(&three_mubs_r4(), m, DEFAULT_QUANTUM).unwrap();
            let b = m_product_fingerprint(&fam, m, DEFAULT_QUANTUM).unwrap();
            assert!(a.matches(&b), "m={m}");
        }
    }

    #[test]
    fn generic_family_members_differ() {
        let a = twelve_point_design(&MercedesAngles::new([0.1, 0.5, 0.9, 0.2]));
        let b = twelve_point_design(&MercedesAngles::new([0.3, 0.2, 0.7, 0.6]));
        let fa = m_product_fingerprint(&a, 2, DEFAULT_QUANTUM).unwrap();
        let fb = m_product_fingerprint(&b, 2, DEFAULT_QUANTUM).unwrap();
        assert!(!fa.matches(&fb));
        assert!(m_product_fingerprint(&a, 4, DEFAULT_QUANTUM).is_err());
        assert_eq!(m_product_fingerprint(&a, 3, DEFAULT_QUANTUM).unwrap().len(), 220);
    }

    #[test]
    fn profiles_are_deterministic() {
        let c = random_configuration(3, 9, NormMode::Weighted, 2).unwrap();
        assert_eq!(angle_profile(&c, 1e-3).unwrap(), angle_profile(&c, 1e-3).unwrap());
        let p = angle_profile(&c, 1e-3).unwrap();
        assert_eq!(p.total(), 36);
        let n: usize = norm_profile(&c, 1e-3).unwrap().iter().map(|c| c.multiplicity).sum();
        assert_eq!(n, 9);
    }
}
