//! Study files.
//!
//! The CSV layout has one row per arm:
//!
//! ```text
//! # fivenum-studies v1
//! id,label,arm,scenario,a,q1,m,q3,b,mean,sd,n
//! Davies1987,Davies 1987,cases,s1,16.75,,39.75,,89.25,,,15
//! Davies1987,Davies 1987,controls,s1,26.25,,65.5,,114.75,,,15
//! ```
//!
//! Lines starting with `#` are comments and unused fields are left empty.
//! Every id needs exactly one `cases` and one `controls` row. The JSON form
//! is an array of [`StudyRecord`] objects.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{Arm, StudyRecord};
use crate::error::{Error, Result};
use crate::summary::{Scenario, SummaryRecord};

pub const STUDY_FORMAT_VERSION: u32 = 1;

/// Bundled serum vitamin D data for tuberculosis cases and controls (six
/// studies).
pub const VITAMIN_D_CSV: &str = include_str!("../../assets/vitamind.csv");

const COLUMNS: [&str; 12] = ["id", "label", "arm", "scenario", "a", "q1", "m", "q3", "b", "mean", "sd", "n"];

#[derive(Debug, Deserialize)]
struct Row {
    id: String,
    #[serde(default)]
    label: String,
    arm: Arm,
    scenario: Scenario,
    a: Option<f64>,
    q1: Option<f64>,
    m: Option<f64>,
    q3: Option<f64>,
    b: Option<f64>,
    mean: Option<f64>,
    sd: Option<f64>,
    n: u64,
}

struct Pending {
    line: u64,
    label: String,
    cases: Option<SummaryRecord>,
    controls: Option<SummaryRecord>,
}

fn ingest_err(line: u64, message: impl Into<String>) -> Error {
    Error::Ingest { line, message: message.into() }
}

/// Parses the CSV study format.
pub fn parse_studies_csv<R: Read>(input: R) -> Result<Vec<StudyRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| ingest_err(1, e.to_string()))?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    for col in COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(ingest_err(1, format!("missing column {col:?}")));
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut pending: HashMap<String, Pending> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            ingest_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record.deserialize(Some(&headers)).map_err(|e| ingest_err(line, e.to_string()))?;
        let summary = SummaryRecord {
            scenario: row.scenario,
            a: row.a,
            q1: row.q1,
            m: row.m,
            q3: row.q3,
            b: row.b,
            mean: row.mean,
            sd: row.sd,
            n: row.n,
        };
        summary.validate().map_err(|e| ingest_err(line, format!("study {}: {e}", row.id)))?;
        let entry = pending.entry(row.id.clone()).or_insert_with(|| {
            order.push(row.id.clone());
            Pending { line, label: row.label.clone(), cases: None, controls: None }
        });
        let slot = match row.arm {
            Arm::Cases => &mut entry.cases,
            Arm::Controls => &mut entry.controls,
        };
        if slot.is_some() {
            return Err(ingest_err(line, format!("study {}: duplicate {:?} row", row.id, row.arm)));
        }
        *slot = Some(summary);
    }

    order
        .into_iter()
        .map(|id| {
            let p = pending.remove(&id).expect("every ordered id is pending");
            match (p.cases, p.controls) {
                (Some(cases), Some(controls)) => {
                    let label = if p.label.is_empty() { id.clone() } else { p.label };
                    Ok(StudyRecord { id, label, cases, controls })
                }
                (None, _) => Err(ingest_err(p.line, format!("study {id}: no cases row"))),
                (_, None) => Err(ingest_err(p.line, format!("study {id}: no controls row"))),
            }
        })
        .collect()
}

/// Parses a JSON array of studies.
pub fn parse_studies_json(input: &str) -> Result<Vec<StudyRecord>> {
    if input.trim().is_empty() {
        return Ok(Vec::new());
    }
    let studies: Vec<StudyRecord> =
        serde_json::from_str(input).map_err(|e| ingest_err(e.line() as u64, e.to_string()))?;
    for s in &studies {
        for (arm, summary) in [("cases", &s.cases), ("controls", &s.controls)] {
            summary.validate().map_err(|e| ingest_err(0, format!("study {} {arm}: {e}", s.id)))?;
        }
    }
    Ok(studies)
}

/// Reads a study file, choosing the parser from the extension (`.json`) or,
/// failing that, from the first non-blank character.
pub fn read_studies(path: impl AsRef<Path>) -> Result<Vec<StudyRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with(['[', '{']);
    if is_json {
        parse_studies_json(&text)
    } else {
        parse_studies_csv(text.as_bytes())
    }
}

/// The bundled vitamin D studies.
pub fn vitamin_d() -> Vec<StudyRecord> {
    parse_studies_csv(VITAMIN_D_CSV.as_bytes()).expect("bundled dataset parses")
}
