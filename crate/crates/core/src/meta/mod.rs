//! Study-level flow chart and pooling of mean differences.
//!
//! Each study contributes a cases arm and a controls arm. Arms reported as a
//! median-based summary are tested for skewness first: a rejection in either
//! arm drops the study, otherwise the arm is converted to a mean and SD. The
//! surviving studies are pooled as cases-minus-controls mean differences.

mod flowchart;
mod forest;
mod ingest;
mod pooling;

use serde::{Deserialize, Serialize};

use crate::moments::MomentEstimate;
use crate::skew::SkewTestResult;
use crate::summary::SummaryRecord;

pub use flowchart::{apply_flowchart, apply_flowchart_with, run_pipeline, FlowOptions, MetaAnalysis};
pub use forest::{forest_data, read_forest_csv, write_forest_csv, ForestRow, POOLED_ROW_ID};
pub use ingest::{
    parse_studies_csv, parse_studies_json, read_studies, vitamin_d, STUDY_FORMAT_VERSION,
    VITAMIN_D_CSV,
};
pub use pooling::{pool, pool_fixed, pool_random, Model, TAU2_ESTIMATOR};

/// A two-arm study as reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub id: String,
    #[serde(default)]
    pub label: String,
    pub cases: SummaryRecord,
    pub controls: SummaryRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Cases,
    Controls,
}

/// What the flow chart did with one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmDecision {
    pub arm: Arm,
    pub n: u64,
    /// Present when the arm reports a median-based summary.
    pub test: Option<SkewTestResult>,
    pub moments: MomentEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Included,
    Excluded { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDecision {
    pub study_id: String,
    pub label: String,
    pub cases: ArmDecision,
    pub controls: ArmDecision,
    pub verdict: Verdict,
    /// True when a study that failed the skewness test was kept anyway.
    pub forced: bool,
}

impl FlowDecision {
    pub fn is_included(&self) -> bool {
        self.verdict == Verdict::Included
    }

    /// Moments of an included study, ready for pooling.
    pub fn study_moments(&self) -> Option<StudyMoments> {
        self.is_included().then(|| StudyMoments {
            id: self.study_id.clone(),
            cases: ArmMoments { mean: self.cases.moments.mean, sd: self.cases.moments.sd, n: self.cases.n },
            controls: ArmMoments {
                mean: self.controls.moments.mean,
                sd: self.controls.moments.sd,
                n: self.controls.n,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmMoments {
    pub mean: f64,
    pub sd: f64,
    pub n: u64,
}

/// Pooling input: per-arm means, SDs and sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMoments {
    pub id: String,
    pub cases: ArmMoments,
    pub controls: ArmMoments,
}

impl StudyMoments {
    /// Cases minus controls.
    pub fn md(&self) -> f64 {
        self.cases.mean - self.controls.mean
    }

    pub fn se(&self) -> f64 {
        let v = |a: &ArmMoments| a.sd * a.sd / a.n as f64;
        (v(&self.cases) + v(&self.controls)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyWeight {
    pub id: String,
    pub md: f64,
    pub se: f64,
    /// Share of the total weight, in `[0, 1]`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaResult {
    pub model: Model,
    pub pooled_md: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
    pub p_value: f64,
    pub per_study: Vec<StudyWeight>,
    /// Cochran's Q.
    pub q_stat: f64,
    pub df: u64,
    pub tau2: f64,
    pub i2: f64,
    /// Between-study variance estimator, random effects only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau2_estimator: Option<String>,
}
