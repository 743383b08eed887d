//! Recognizing a 12-point (2,2)-design for R^4 as four Mercedes-Benz frames in
//! the four equi-isoclinic planes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use crate::constructions::{equiisoclinic_planes_r4, twelve_point_design, MercedesAngles};
use crate::design::{potential, Configuration, NormMode};
use crate::error::{DesignError, Result};

/// Bound on every residual checked along the way.
pub const FAMILY_TOLERANCE: f64 = 1e-6;
const SIGMA_SQUARED: f64 = 1.0 / 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMatch {
    pub angles: MercedesAngles,
    /// Orthogonal `Q` such that `Q v_j` are, up to sign and order, the
    /// columns of `twelve_point_design(angles)`.
    pub transform: DMatrix<f64>,
    /// Input indices of the frame placed in canonical plane k.
    pub frames: [[usize; 3]; 4],
    pub max_residual: f64,
}

pub fn match_to_family(config: &Configuration) -> Result<Option<MercedesAngles>> {
    Ok(match_to_family_detailed(config)?.map(|m| m.angles))
}

struct Triangle {
    idx: [usize; 3],
    basis: DMatrix<f64>,
    projection: DMatrix<f64>,
}

pub fn match_to_family_detailed(config: &Configuration) -> Result<Option<FamilyMatch>> {
    if (config.d(), config.n()) != (4, 12) || config.mode() != NormMode::EqualNorm {
        return Err(DesignError::DimensionMismatch(
            "family matching needs an equal-norm 4x12 configuration".into(),
        ));
    }
    let f = potential(config, 2)?.f;
    if f > 1e-10 * 144.0 {
        return Err(DesignError::Precondition(format!(
            "not a 12-point (2,2)-design: f = {f:e}"
        )));
    }
    let triangles = frame_triangles(config);
    let mut chosen = Vec::with_capacity(4);
    let mut used = [false; 12];
    Ok(search(config, &triangles, &mut chosen, &mut used))
}

/// Triples at mutual squared angle 1/4 whose Gram determinant vanishes
/// (triple product −1/8), each with a fitted plane.
fn frame_triangles(config: &Configuration) -> Vec<Triangle> {
    let g = config.gram();
    let quarter = |x: f64| (x * x - 0.25).abs() <= FAMILY_TOLERANCE;
    let mut out = Vec::new();
    for a in 0..12 {
        for b in a + 1..12 {
            if !quarter(g.get(a, b)) {
                continue;
            }
            for c in b + 1..12 {
                if !quarter(g.get(a, c)) || !quarter(g.get(b, c)) {
                    continue;
                }
                let triple = g.get(a, b) * g.get(b, c) * g.get(c, a);
                if (triple + 0.125).abs() > FAMILY_TOLERANCE {
                    continue;
                }
                if let Some(basis) = fit_plane(config, [a, b, c]) {
                    let projection = &basis * basis.transpose();
                    out.push(Triangle {
                        idx: [a, b, c],
                        basis,
                        projection,
                    });
                }
            }
        }
    }
    out
}

/// Dominant 2-dimensional eigenspace of `Σ v vᵀ` over the triple.
fn fit_plane(config: &Configuration, idx: [usize; 3]) -> Option<DMatrix<f64>> {
    let mut s = DMatrix::<f64>::zeros(4, 4);
    for &j in &idx {
        let v = config.entries().column(j);
        s += v * v.transpose();
    }
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let (l1, l3) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[2]]);
    if l3.abs() > FAMILY_TOLERANCE * l1 {
        return None;
    }
    let mut basis = DMatrix::zeros(4, 2);
    basis.set_column(0, &eig.eigenvectors.column(order[0]));
    basis.set_column(1, &eig.eigenvectors.column(order[1]));
    Some(basis)
}

fn isoclinic_residual(pa: &DMatrix<f64>, pb: &DMatrix<f64>) -> f64 {
    let m = pa * pb * pa - pa * SIGMA_SQUARED;
    let sym = (&m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(0.0, |a: f64, &l| a.max(l.abs()))
}

fn search<'a>(
    config: &Configuration,
    triangles: &'a [Triangle],
    chosen: &mut Vec<&'a Triangle>,
    used: &mut [bool; 12],
) -> Option<FamilyMatch> {
    let Some(first_free) = used.iter().position(|u| !u) else {
        return align(config, chosen);
    };
    for tri in triangles.iter().filter(|t| t.idx[0] == first_free) {
        if tri.idx.iter().any(|&i| used[i]) {
            continue;
        }
        if chosen
            .iter()
            .any(|c| isoclinic_residual(&c.projection, &tri.projection) > FAMILY_TOLERANCE)
        {
            continue;
        }
        chosen.push(tri);
        tri.idx.iter().for_each(|&i| used[i] = true);
        let found = search(config, triangles, chosen, used);
        tri.idx.iter().for_each(|&i| used[i] = false);
        chosen.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                if a == b || a == c || b == c {
                    continue;
                }
                let d = (0..4).find(|x| ![a, b, c].contains(x)).expect("one index left");
                out.push([a, b, c, d]);
            }
        }
    }
    out
}

/// Finds an orthogonal map carrying the four found planes onto the canonical
/// ones and reads off the frame angles.
fn align(config: &Configuration, frames: &[&Triangle]) -> Option<FamilyMatch> {
    let canon = equiisoclinic_planes_r4();
    let v: Vec<DMatrix<f64>> = canon.iter().map(|b| b.columns().clone()).collect();
    let reflections = [Matrix2::identity(), Matrix2::new(1.0, 0.0, 0.0, -1.0)];
    for perm in permutations4() {
        // canonical plane k receives found frame perm[k]
        let w: Vec<&DMatrix<f64>> = perm.iter().map(|&p| &frames[p].basis).collect();
        for r0 in &reflections {
            let r0 = DMatrix::from_column_slice(2, 2, r0.as_slice());
            let mut r = vec![r0];
            for k in 1..4 {
                let a = v[0].transpose() * &v[k];
                let b = w[0].transpose() * w[k];
                r.push(b.transpose() * &r[0] * a / SIGMA_SQUARED);
            }
            let mut worst: f64 = 0.0;
            for j in 0..4 {
                worst = worst.max((r[j].transpose() * &r[j] - DMatrix::<f64>::identity(2, 2)).amax());
                for k in 0..4 {
                    let a = v[j].transpose() * &v[k];
                    let b = w[j].transpose() * w[k];
                    worst = worst.max((a - r[j].transpose() * b * &r[k]).amax());
                }
            }
            if worst > FAMILY_TOLERANCE {
                continue;
            }
            let mut m = DMatrix::<f64>::zeros(4, 4);
            for k in 0..4 {
                m += w[k] * &r[k] * v[k].transpose();
            }
            let svd = m.svd(true, true);
            let u = svd.u? * svd.v_t?;
            for k in 0..4 {
                worst = worst.max((&u * &v[k] - w[k] * &r[k]).amax());
            }
            if worst > FAMILY_TOLERANCE {
                continue;
            }
            let q = u.transpose();
            if let Some(found) = read_angles(config, frames, &perm, &q, &v, worst) {
                return Some(found);
            }
        }
    }
    None
}

fn read_angles(
    config: &Configuration,
    frames: &[&Triangle],
    perm: &[usize; 4],
    q: &DMatrix<f64>,
    v: &[DMatrix<f64>],
    mut worst: f64,
) -> Option<FamilyMatch> {
    let moved = q * config.entries();
    let mut theta = [0.0; 4];
    let mut frame_idx = [[0usize; 3]; 4];
    for k in 0..4 {
        let idx = frames[perm[k]].idx;
        frame_idx[k] = idx;
        // lines of a frame at θ sit at θ, θ + π/3, θ + 2π/3 mod π
        let (mut s, mut c) = (0.0, 0.0);
        for &j in &idx {
            let coords = v[k].transpose() * moved.column(j);
            let phi = coords[1].atan2(coords[0]);
            s += (6.0 * phi).sin();
            c += (6.0 * phi).cos();
        }
        theta[k] = (s.atan2(c) / 6.0).rem_euclid(PI / 3.0);
    }
    let angles = MercedesAngles::new(theta);
    let regenerated = twelve_point_design(&angles);
    let mut taken = [false; 12];
    for j in 0..12 {
        let x = moved.column(j);
        let (best, overlap) = (0..12)
            .filter(|&i| !taken[i])
            .map(|i| (i, regenerated.entries().column(i).dot(&x).abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        worst = worst.max(1.0 - overlap);
        taken[best] = true;
    }
    (worst <= FAMILY_TOLERANCE).then(|| FamilyMatch {
        angles,
        transform: q.clone(),
        frames: frame_idx,
        max_residual: worst,
    })
}
