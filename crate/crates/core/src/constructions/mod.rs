//! Closed-form designs and the building blocks of the 12-point family in R^4.

mod sums_of_powers;

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::design::Configuration;
use crate::error::{DesignError, Result};

pub use sums_of_powers::{
    kempner_24pt, kempner_24pt_weighted, new_11pt_d5, new_11pt_d5_coefficients, reznick_11pt,
    stroud_coefficients, stroud_design, StroudCoefficients, StroudSign,
};

/// Rotation by 120 degrees.
pub fn rotation_120() -> Matrix2<f64> {
    let s = 3f64.sqrt() / 2.0;
    Matrix2::new(-0.5, -s, s, -0.5)
}

/// t+1 equally spaced lines in the plane, a (t,t)-design.
pub fn equally_spaced_lines(t: usize) -> Result<Configuration> {
    if t == 0 {
        return Err(DesignError::InvalidParameter("t must be >= 1".into()));
    }
    let n = t + 1;
    let m = DMatrix::from_fn(2, n, |i, k| {
        let a = k as f64 * PI / n as f64;
        if i == 0 {
            a.cos()
        } else {
            a.sin()
        }
    });
    Configuration::equal_norm_from_raw(m)
}

/// `[u, Ru, R^2 u]` with `u = (cos θ, sin θ)`.
pub fn mercedes_benz(theta: f64) -> DMatrix<f64> {
    let r = rotation_120();
    let u = nalgebra::Vector2::new(theta.cos(), theta.sin());
    let ru = r * u;
    let rru = r * ru;
    DMatrix::from_column_slice(2, 3, &[u.x, u.y, ru.x, ru.y, rru.x, rru.y])
}

/// One rotation angle per plane of the 12-point family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MercedesAngles {
    pub theta: [f64; 4],
}

impl MercedesAngles {
    pub fn new(theta: [f64; 4]) -> Self {
        Self { theta }
    }
}

/// A d×k matrix with orthonormal columns spanning a k-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
}

impl SubspaceBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let k = columns.ncols();
        if k == 0 || columns.nrows() < k {
            return Err(DesignError::InvalidDimensions(format!(
                "a {}x{} matrix cannot hold an orthonormal basis",
                columns.nrows(),
                k
            )));
        }
        let defect = (columns.transpose() * &columns - DMatrix::<f64>::identity(k, k)).amax();
        if defect > 1e-13 {
            return Err(DesignError::InvalidParameter(format!(
                "columns are not orthonormal (defect {defect:e})"
            )));
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    /// The orthogonal projection `V V^T`.
    pub fn projection(&self) -> DMatrix<f64> {
        &self.columns * self.columns.transpose()
    }
}

/// The four equi-isoclinic planes in R^4 (σ² = 1/3).
pub fn equiisoclinic_planes_r4() -> [SubspaceBasis; 4] {
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let r6 = 6f64.sqrt();
    #[rustfmt::skip]
    let rows = [
        r6, 0.0, r2, 0.0, r2, 0.0, r2, 0.0,
        0.0, r6, 0.0, r2, 0.0, r2, 0.0, r2,
        0.0, 0.0, -2.0, 0.0, 1.0, -r3, 1.0, r3,
        0.0, 0.0, 0.0, -2.0, r3, 1.0, -r3, 1.0,
    ];
    let all = DMatrix::from_row_slice(4, 8, &rows) / r6;
    std::array::from_fn(|j| {
        SubspaceBasis::new(all.columns(2 * j, 2).into_owned()).expect("orthonormal by construction")
    })
}

/// `[V_1 M_1, ..., V_4 M_4]` with `M_j` the Mercedes-Benz frame at `θ_j`.
pub fn twelve_point_design(angles: &MercedesAngles) -> Configuration {
    let planes = equiisoclinic_planes_r4();
    let mut m = DMatrix::zeros(4, 12);
    for (j, plane) in planes.iter().enumerate() {
        let block = plane.columns() * mercedes_benz(angles.theta[j]);
        m.columns_mut(3 * j, 3).copy_from(&block);
    }
    Configuration::equal_norm_from_raw(m).expect("unit columns")
}

/// Three mutually unbiased bases of R^4.
pub fn three_mubs_r4() -> Configuration {
    #[rustfmt::skip]
    let rows = [
        1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0,
        1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0,
        0.0, 0.0, 1.0, 1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0,
        0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 1.0, -1.0, 0.0, 0.0,
    ];
    let m = DMatrix::from_row_slice(4, 12, &rows) * std::f64::consts::FRAC_1_SQRT_2;
    Configuration::equal_norm_from_raw(m).expect("unit columns")
}

/// `g = diag(1, R)` with R the 120 degree rotation.
pub fn z3_generator() -> DMatrix<f64> {
    let r = rotation_120();
    let mut g = DMatrix::identity(3, 3);
    g.view_mut((1, 1), (2, 2)).copy_from(&r);
    g
}

/// `[I, g, g^2]`.
pub fn z3_group() -> Vec<DMatrix<f64>> {
    let g = z3_generator();
    let g2 = &g * &g;
    vec![DMatrix::identity(3, 3), g, g2]
}

pub const Z3_SEED_COUNT: usize = 8;

/// The 24 vectors `v_1, g v_1, g^2 v_1, ..., v_8, g v_8, g^2 v_8`.
pub fn z3_orbit(seeds: &[[f64; 3]]) -> Result<Configuration> {
    if seeds.len() != Z3_SEED_COUNT {
        return Err(DesignError::InvalidParameter(format!(
            "expected {Z3_SEED_COUNT} seeds, got {}",
            seeds.len()
        )));
    }
    for (j, s) in seeds.iter().enumerate() {
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(DesignError::NotUnitNorm { index: j, norm });
        }
    }
    let group = z3_group();
    let mut m = DMatrix::zeros(3, 3 * seeds.len());
    for (j, s) in seeds.iter().enumerate() {
        let v = nalgebra::DVector::from_column_slice(s);
        for (k, g) in group.iter().enumerate() {
            m.set_column(3 * j + k, &(g * &v));
        }
    }
    Configuration::equal_norm_from_raw(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::potential;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equally_spaced_lines_are_designs() {
        for t in 1..=10 {
            let c = equally_spaced_lines(t).unwrap();
            let n = (t + 1) as f64;
            assert!(potential(&c, t).unwrap().f.abs() < 1e-13 * n * n, "t={t}");
        }
        let basis = equally_spaced_lines(1).unwrap();
        assert!((basis.entries() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-16);
        assert!(equally_spaced_lines(0).is_err());
    }

    #[test]
    fn mercedes_benz_gram() {
        let m = mercedes_benz(0.0);
        assert_eq!((m[(0, 0)], m[(1, 0)]), (1.0, 0.0));
        let g = m.transpose() * &m;
        for j in 0..3 {
            for k in 0..3 {
                let want = if j == k { 1.0 } else { -0.5 };
                assert!((g[(j, k)] - want).abs() < 1e-15);
            }
        }
        let m = mercedes_benz(0.7);
        let g = m.transpose() * &m;
        assert!((g[(0, 1)].powi(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mercedes_benz_period() {
        let a = mercedes_benz(0.3);
        let b = mercedes_benz(0.3 + 2.0 * PI / 3.0);
        for j in 0..3 {
            let col = b.column((j + 2) % 3);
            assert!((a.column(j) - col).amax() < 1e-14);
        }
    }

    #[test]
    fn planes_are_equiisoclinic() {
        let planes = equiisoclinic_planes_r4();
        for p in &planes {
            let v = p.columns();
            assert!((v.transpose() * v - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
        }
        for j in 0..4 {
            for k in 0..4 {
                if j == k {
                    continue;
                }
                let (pj, pk) = (planes[j].projection(), planes[k].projection());
                let r = &pj * &pk * &pj - &pj / 3.0;
                assert!(r.amax() < 1e-13);
            }
        }
    }

    #[test]
    fn twelve_point_design_sum_and_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let th: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
            let c = twelve_point_design(&MercedesAngles::new(th));
            let pv = potential(&c, 2).unwrap();
            assert!((pv.lhs - 18.0).abs() < 1e-10);
            assert!(pv.f.abs() < 1e-12 * 144.0);
            let g = c.gram();
            for a in 0..4 {
                for b in 0..4 {
                    if a == b {
                        continue;
                    }
                    let blk = g.block3(a, b);
                    let (x, y, z) = (blk[(0, 0)], blk[(0, 1)], blk[(0, 2)]);
                    assert!((x.powi(4) + y.powi(4) + z.powi(4) - 0.125).abs() < 1e-12);
                    for i in 0..3 {
                        assert!((blk[(i, i)] - x).abs() < 1e-13);
                        assert!((blk[(i, (i + 1) % 3)] - y).abs() < 1e-13);
                        assert!((blk[(i, (i + 2) % 3)] - z).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn twelve_point_angles_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bound = 1.0 / 3f64.sqrt() + 1e-12;
        for _ in 0..1000 {
            let th: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
            let g = twelve_point_design(&MercedesAngles::new(th)).gram();
            for j in 0..12 {
                for k in 0..12 {
                    if j / 3 != k / 3 {
                        assert!(g.get(j, k).abs() <= bound);
                    }
                }
            }
        }
    }

    #[test]
    fn three_mubs_counts() {
        let c = three_mubs_r4();
        let g = c.gram();
        let (mut quarter, mut zero) = (0, 0);
        for j in 0..12 {
            for k in 0..12 {
                if j == k {
                    continue;
                }
                let s = g.get(j, k).powi(2);
                if (s - 0.25).abs() < 1e-14 {
                    quarter += 1;
                } else if s < 1e-14 {
                    zero += 1;
                }
            }
        }
        assert_eq!((quarter, zero), (96, 36));
        let pv = potential(&c, 2).unwrap();
        assert!((pv.lhs - 18.0).abs() < 1e-12);
    }

    #[test]
    fn z3_orbit_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let seeds: Vec<[f64; 3]> = (0..8)
            .map(|_| {
                let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.map(|x| x / n)
            })
            .collect();
        let c = z3_orbit(&seeds).unwrap();
        let g = c.gram();
        for j in 0..8 {
            let b = seeds[j][0];
            let a = 1.5 * (b * b - 1.0 / 3.0);
            let blk = g.block3(j, j);
            for p in 0..3 {
                for q in 0..3 {
                    let want = if p == q { 1.0 } else { a };
                    assert!((blk[(p, q)] - want).abs() < 1e-14);
                }
            }
            for k in 0..8 {
                let blk = g.block3(j, k);
                for i in 0..3 {
                    assert!((blk[(i, i)] - blk[(0, 0)]).abs() < 1e-14);
                    assert!((blk[(i, (i + 1) % 3)] - blk[(0, 1)]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn z3_orbit_of_axis_repeats() {
        let mut seeds = [[1.0, 0.0, 0.0]; 8];
        seeds[1] = [-1.0, 0.0, 0.0];
        let c = z3_orbit(&seeds).unwrap();
        for j in 0..6 {
            assert!((c.entries().column(j).dot(&c.entries().column(0)).abs() - 1.0).abs() < 1e-15);
        }
        assert!(z3_orbit(&seeds[..7]).is_err());
        seeds[0] = [1.0, 1.0, 0.0];
        assert!(matches!(z3_orbit(&seeds), Err(DesignError::NotUnitNorm { index: 0, .. })));
    }

    #[test]
    fn subspace_basis_rejects_non_orthonormal() {
        assert!(SubspaceBasis::new(DMatrix::from_row_slice(2, 1, &[1.0, 1.0])).is_err());
        assert!(SubspaceBasis::new(DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn constructors_are_deterministic() {
        assert_eq!(three_mubs_r4(), three_mubs_r4());
        let a = MercedesAngles::new([0.1, 0.2, 0.3, 0.4]);
        assert_eq!(twelve_point_design(&a), twelve_point_design(&a));
    }
}
