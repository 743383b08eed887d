//! CSV table plus JSON metadata sidecar.

use std::path::{Path, PathBuf};

use super::{ScanMetadata, ScanRecord, ScanTable};
use crate::design::NormMode;
use crate::error::{DesignError, Result};

const HEADER: [&str; 8] = ["t", "d", "n", "mode", "best_f", "restarts_used", "wall_seconds", "is_zero"];

/// `scan.csv` -> `scan.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn persist(table: &ScanTable, csv_path: impl AsRef<Path>) -> Result<()> {
    let path = csv_path.as_ref();
    table.validate()?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HEADER)?;
    for r in &table.records {
        w.write_record([
            r.t.to_string(),
            r.d.to_string(),
            r.n.to_string(),
            r.mode.as_str().to_string(),
            format!("{:.16e}", r.best_f),
            r.restarts_used.to_string(),
            format!("{:.16e}", r.wall_seconds),
            r.is_zero.to_string(),
        ])?;
    }
    w.flush()?;
    let mut meta = serde_json::to_string_pretty(&table.metadata)?;
    meta.push('\n');
    std::fs::write(sidecar_path(path), meta)?;
    Ok(())
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = row.get(i).unwrap_or("");
    raw.trim().parse().map_err(|_| {
        DesignError::Format(format!("row {line}: cannot parse column `{}` from `{raw}`", HEADER[i]))
    })
}

pub fn load(csv_path: impl AsRef<Path>) -> Result<ScanTable> {
    let path = csv_path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(DesignError::Format(format!("unexpected CSV header {:?}", header)));
    }
    let mut records = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let line = i + 2;
        if row.len() != HEADER.len() {
            return Err(DesignError::Format(format!("row {line}: expected 8 columns")));
        }
        let mode: NormMode = row[3].trim().parse()?;
        records.push(ScanRecord {
            t: field(&row, 0, line)?,
            d: field(&row, 1, line)?,
            n: field(&row, 2, line)?,
            mode,
            best_f: field(&row, 4, line)?,
            restarts_used: field(&row, 5, line)?,
            wall_seconds: field(&row, 6, line)?,
            is_zero: field(&row, 7, line)?,
        });
    }
    let metadata: ScanMetadata = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    let table = ScanTable { records, metadata };
    table.validate()?;
    Ok(table)
}
