use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{MetaResult, Model};
use crate::error::{Error, Result};
use crate::normal::phi_inv;

/// Id of the summary row closing each model's block.
pub const POOLED_ROW_ID: &str = "pooled";

/// One line of a forest plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestRow {
    pub id: String,
    pub md: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub weight_pct: f64,
    pub model: Model,
}

/// Study rows followed by a pooled row, for each result in turn.
pub fn forest_data(results: &[MetaResult]) -> Vec<ForestRow> {
    let z = phi_inv(0.975);
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r.per_study.iter().map(|s| ForestRow {
            id: s.id.clone(),
            md: s.md,
            ci_low: s.md - z * s.se,
            ci_high: s.md + z * s.se,
            weight_pct: 100.0 * s.weight,
            model: r.model,
        }));
        rows.push(ForestRow {
            id: POOLED_ROW_ID.into(),
            md: r.pooled_md,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            weight_pct: 100.0,
            model: r.model,
        });
    }
    rows
}

/// Writes rows as CSV with the header `id,md,ci_low,ci_high,weight_pct,model`.
pub fn write_forest_csv<W: Write>(rows: &[ForestRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(["id", "md", "ci_low", "ci_high", "weight_pct", "model"])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_forest_csv<R: Read>(input: R) -> Result<Vec<ForestRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| {
            r.map_err(|e: csv::Error| Error::Ingest {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}
