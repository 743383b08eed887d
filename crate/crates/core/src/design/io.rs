//! The design JSON file format.
//!
//! ```json
//! { "t": 3, "d": 3, "n": 11, "mode": "weighted",
//!   "entries": [ ...d*n numbers, row-major, 17 significant digits... ],
//!   "meta": { ... optional ... } }
//! ```

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::Value;

use super::{Configuration, NormMode};
use crate::error::{DesignError, Result};

/// A configuration together with the optional strength and metadata stored
/// alongside it.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignDocument {
    pub t: Option<usize>,
    pub config: Configuration,
    pub meta: Option<Value>,
}

impl DesignDocument {
    pub fn new(config: Configuration) -> Self {
        Self {
            t: None,
            config,
            meta: None,
        }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_meta(mut self, meta: Value) -> Self {
        self.meta = Some(meta);
        self
    }
}

/// Formats a float with 17 significant digits, which is enough to recover
/// the exact double.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct Outgoing<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<usize>,
    d: usize,
    n: usize,
    mode: NormMode,
    entries: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<&'a Value>,
}

#[derive(Deserialize)]
struct Incoming {
    #[serde(default)]
    t: Option<usize>,
    d: usize,
    n: usize,
    mode: NormMode,
    entries: Vec<f64>,
    #[serde(default)]
    meta: Option<Value>,
}

pub fn to_json(doc: &DesignDocument) -> Result<String> {
    let m = doc.config.entries();
    let (d, n) = m.shape();
    let mut buf = String::with_capacity(d * n * 26 + 2);
    buf.push('[');
    for r in 0..d {
        for c in 0..n {
            if r + c > 0 {
                buf.push_str(", ");
            }
            buf.push_str(&format_f64(m[(r, c)]));
        }
    }
    buf.push(']');
    let out = Outgoing {
        t: doc.t,
        d,
        n,
        mode: doc.config.mode(),
        entries: RawValue::from_string(buf)?,
        meta: doc.meta.as_ref(),
    };
    Ok(serde_json::to_string_pretty(&out)?)
}

pub fn from_json(text: &str) -> Result<DesignDocument> {
    let raw: Incoming = serde_json::from_str(text)?;
    if raw.entries.len() != raw.d * raw.n {
        return Err(DesignError::Format(format!(
            "expected {} entries for a {}x{} design, found {}",
            raw.d * raw.n,
            raw.d,
            raw.n,
            raw.entries.len()
        )));
    }
    let m = DMatrix::from_row_slice(raw.d, raw.n, &raw.entries);
    Ok(DesignDocument {
        t: raw.t,
        config: Configuration::new(m, raw.mode)?,
        meta: raw.meta,
    })
}

pub fn save(doc: &DesignDocument, path: impl AsRef<Path>) -> Result<()> {
    let mut text = to_json(doc)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<DesignDocument> {
    from_json(&std::fs::read_to_string(path)?)
}
