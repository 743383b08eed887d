use crate::constructions::Z3_SEED_COUNT;
use crate::error::{DesignError, Result};

/// Invariant equations of degree 8 under `{I, g, g^2}`, excluding the constant one.
pub const Z3_EQUATION_COUNT: usize = 14;
pub const Z3_RESIDUAL_COUNT: usize = Z3_EQUATION_COUNT + Z3_SEED_COUNT;

/// Residuals of the conditions for the orbit of eight seeds `(b_j, y_j, z_j)`
/// to be a 24-vector (4,4)-design for R^3.
///
/// Order: the four moments `(1/8)Σ b^{2k} - 1/(2k+1)` (k=1..4); the
/// y-sums then z-sums `Σ b^{2k-1} y (3 - 3b² - 4y²)` (k=1..3); the moment
/// `(1/8)Σ b² y² (3 - 3b² - 4y²)² - 8/315`; `Σ b^{2k} y z (3z² - y²)(3y² - z²)`
/// (k=0,1); `Σ (y⁴ - z⁴)(y⁴ - 14y²z² + z⁴)`; then `b_j² + y_j² + z_j² - 1`
/// for each seed. All entries are absolute values.
pub fn z3_design_residual(seeds: &[[f64; 3]]) -> Result<Vec<f64>> {
    if seeds.len() != Z3_SEED_COUNT {
        return Err(DesignError::InvalidParameter(format!(
            "expected {Z3_SEED_COUNT} seeds, got {}",
            seeds.len()
        )));
    }
    let sum = |f: &dyn Fn(f64, f64, f64) -> f64| seeds.iter().map(|s| f(s[0], s[1], s[2])).sum::<f64>();
    let mut out = Vec::with_capacity(Z3_RESIDUAL_COUNT);
    for k in 1..=4 {
        let m = sum(&|b, _, _| b.powi(2 * k)) / 8.0;
        out.push(m - 1.0 / (2 * k + 1) as f64);
    }
    for k in 1..=3 {
        out.push(sum(&|b, y, _| b.powi(2 * k - 1) * y * (3.0 - 3.0 * b * b - 4.0 * y * y)));
    }
    for k in 1..=3 {
        out.push(sum(&|b, _, z| b.powi(2 * k - 1) * z * (3.0 - 3.0 * b * b - 4.0 * z * z)));
    }
    let m = sum(&|b, y, _| {
        let q = 3.0 - 3.0 * b * b - 4.0 * y * y;
        b * b * y * y * q * q
    }) / 8.0;
    out.push(m - 8.0 / 315.0);
    for k in 0..=1 {
        out.push(sum(&|b, y, z| {
            b.powi(2 * k) * y * z * (3.0 * z * z - y * y) * (3.0 * y * y - z * z)
        }));
    }
    out.push(sum(&|_, y, z| {
        let (y2, z2) = (y * y, z * z);
        (y2 * y2 - z2 * z2) * (y2 * y2 - 14.0 * y2 * z2 + z2 * z2)
    }));
    for s in seeds {
        out.push(s[0] * s[0] + s[1] * s[1] + s[2] * s[2] - 1.0);
    }
    Ok(out.into_iter().map(f64::abs).collect())
}

pub fn z3_max_residual(seeds: &[[f64; 3]]) -> Result<f64> {
    Ok(z3_design_residual(seeds)?.into_iter().fold(0.0, f64::max))
}
