//! Designs read off from explicit identities `C |x|^{2t} = Σ_j <x, v_j>^{2t}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::{Configuration, NormMode};
use crate::error::{DesignError, Result};

/// The weighted 11-point (3,3)-design for R^3 with Bessel constant 540.
pub fn reznick_11pt() -> Configuration {
    let p = 378f64.powf(1.0 / 6.0);
    let q = 280f64.powf(1.0 / 6.0);
    let s = 3f64.sqrt();
    #[rustfmt::skip]
    let rows = [
        p, 0.0, 0.0, s, s, 0.0, 0.0, s, s, s, s,
        0.0, p, 0.0, 0.0, 0.0, s, s, s, -s, s, -s,
        0.0, 0.0, q, 2.0, -2.0, 2.0, -2.0, 1.0, 1.0, -1.0, -1.0,
    ];
    Configuration::new(DMatrix::from_row_slice(3, 11, &rows), NormMode::Weighted)
        .expect("nonzero columns")
}

/// `[a1, a2, b1, b2, b3]` of the D5-symmetric 11-point design.
pub fn new_11pt_d5_coefficients() -> [f64; 5] {
    let r = 105f64.sqrt();
    let sixth = |x: f64| x.powf(1.0 / 6.0);
    let big = 1425.0 + 139.0 * r;
    // 1425^2 - 139^2 * 105 = 1920
    let small = 1920.0 / big;
    [
        sixth(12960.0 + 864.0 * r),
        sixth(12960.0 - 864.0 * r),
        sixth(small),
        sixth(big),
        sixth(26250.0),
    ]
}

/// The D5-symmetric weighted 11-point (3,3)-design for R^3 (Bessel constant 40500).
pub fn new_11pt_d5() -> Configuration {
    let [a1, a2, b1, b2, b3] = new_11pt_d5_coefficients();
    let mut m = DMatrix::zeros(3, 11);
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0;
        let (c, s) = (a.cos(), a.sin());
        m.set_column(k, &nalgebra::Vector3::new(a1 * c, a1 * s, b1));
        m.set_column(5 + k, &nalgebra::Vector3::new(a2 * c, a2 * s, -b2));
    }
    m[(2, 10)] = -b3;
    Configuration::new(m, NormMode::Weighted).expect("nonzero columns")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StroudSign {
    Plus,
    Minus,
}

impl StroudSign {
    fn value(self) -> f64 {
        match self {
            StroudSign::Plus => 1.0,
            StroudSign::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for StroudSign {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(StroudSign::Plus),
            "-" | "minus" => Ok(StroudSign::Minus),
            other => Err(DesignError::InvalidParameter(format!(
                "unknown sign `{other}` (expected plus or minus)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StroudCoefficients {
    pub g: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    /// The Bessel constant `3 a5^4`.
    pub c: f64,
}

pub fn stroud_coefficients(d: usize, sign: StroudSign) -> Result<StroudCoefficients> {
    if !(4..=6).contains(&d) {
        return Err(DesignError::InvalidParameter(format!(
            "Stroud designs are defined for d in 4..=6, got {d}"
        )));
    }
    let s = sign.value();
    let r2 = 2f64.sqrt();
    let g = ((8 - d) as f64).powf(0.25);
    let g2 = g * g;
    let g4 = (8 - d) as f64;
    let a1 = 8.0 * (g4 - 1.0) * (g2 + s * 2.0 * r2).powi(4);
    let a5 = -s * 2.0 * r2 * g2 * g - 8.0 * g;
    Ok(StroudCoefficients {
        g,
        a1,
        a2: 2.0 * g2 + s * 2.0 * r2,
        a3: -s * 2.0 * r2 * g4 - 8.0 * g2,
        a4: 2.0 * g,
        a5,
        c: 3.0 * a5.powi(4),
    })
}

/// `[a1^{1/4} u, {a2 u + a3 e_j}, {a4 u + a5 (e_j + e_k)}_{j<k}]`, `u = Σ e_i`.
pub fn stroud_design(d: usize, sign: StroudSign) -> Result<Configuration> {
    let k = stroud_coefficients(d, sign)?;
    let n = 1 + d + d * (d - 1) / 2;
    let mut m = DMatrix::zeros(d, n);
    m.column_mut(0).fill(k.a1.powf(0.25));
    for j in 0..d {
        let mut col = m.column_mut(1 + j);
        col.fill(k.a2);
        col[j] += k.a3;
    }
    let mut idx = 1 + d;
    for j in 0..d {
        for l in j + 1..d {
            let mut col = m.column_mut(idx);
            col.fill(k.a4);
            col[j] += k.a5;
            col[l] += k.a5;
            idx += 1;
        }
    }
    Configuration::new(m, NormMode::Weighted)
}

/// Kempner's 24 vectors with the weight 8 on `e_i ± e_j` folded in as a factor
/// `8^{1/6}`; every vector then has norm 2.
pub fn kempner_24pt_weighted() -> Configuration {
    let w = 8f64.powf(1.0 / 6.0);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(24);
    for i in 0..4 {
        let mut v = vec![0.0; 4];
        v[i] = 2.0;
        cols.push(v);
    }
    for i in 0..4 {
        for j in i + 1..4 {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; 4];
                v[i] = w;
                v[j] = s * w;
                cols.push(v);
            }
        }
    }
    for signs in 0..8u32 {
        let mut v = vec![1.0; 4];
        for b in 0..3 {
            if signs & (1 << b) != 0 {
                v[b + 1] = -1.0;
            }
        }
        cols.push(v);
    }
    Configuration::from_columns(&cols, NormMode::Weighted).expect("nonzero columns")
}

/// Kempner's 24-point (3,3)-design for R^4 scaled to unit vectors.
pub fn kempner_24pt() -> Configuration {
    Configuration::equal_norm_from_raw(kempner_24pt_weighted().into_entries())
        .expect("nonzero columns")
}
