//! Operations shared by the command line and the HTTP API.

use fivenum_skew::critical::critical_value;
use fivenum_skew::meta::{forest_data, run_pipeline, FlowOptions, ForestRow, MetaAnalysis, StudyRecord};
use fivenum_skew::{
    estimate_moments, run_test, CriticalValueSource, Error, MomentEstimate, Probability, Result, Scenario,
    SkewTestResult, SummaryRecord,
};
use serde::{Deserialize, Serialize};

pub const REJECT_GUIDANCE: &str =
    "data look skewed; exclude this study from a meta-analysis that assumes normal data";
pub const KEEP_GUIDANCE: &str =
    "no significant skewness; estimate the sample mean and SD and include the study";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    #[serde(flatten)]
    pub result: SkewTestResult,
    /// Same as `critical_value`.
    pub critical: f64,
    pub verdict: String,
    pub guidance: String,
}

pub fn probability(alpha: f64) -> Result<Probability> {
    let p = Probability::new(alpha)?;
    if alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(p)
}

pub fn test(summary: &SummaryRecord, alpha: f64, source: CriticalValueSource) -> Result<TestReport> {
    let result = run_test(summary, probability(alpha)?, &source)?;
    Ok(TestReport {
        critical: result.critical_value,
        verdict: result.verdict().to_string(),
        guidance: if result.reject { REJECT_GUIDANCE } else { KEEP_GUIDANCE }.to_string(),
        result,
    })
}

pub fn estimate(summary: &SummaryRecord) -> Result<MomentEstimate> {
    estimate_moments(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub scenario: Scenario,
    pub n: u64,
    pub alpha: f64,
    pub value: f64,
    pub source: CriticalValueSource,
}

/// Critical value from `source`; without an explicit source the table is
/// tried first and the approximate formula covers sizes outside it.
pub fn critical(
    scenario: Scenario,
    n: u64,
    alpha: f64,
    source: Option<CriticalValueSource>,
) -> Result<CriticalReport> {
    probability(alpha)?;
    let (value, source) = match source {
        Some(s) => (critical_value(scenario, n, alpha, &s)?, s),
        None => match critical_value(scenario, n, alpha, &CriticalValueSource::ExactTable) {
            Err(Error::OutOfTableRange(_)) if n >= 5 => (
                critical_value(scenario, n, alpha, &CriticalValueSource::ApproxFormula)?,
                CriticalValueSource::ApproxFormula,
            ),
            other => (other?, CriticalValueSource::ExactTable),
        },
    };
    Ok(CriticalReport { scenario, n, alpha, value, source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaReport {
    #[serde(flatten)]
    pub analysis: MetaAnalysis,
    pub forest: Vec<ForestRow>,
}

pub fn meta(studies: &[StudyRecord], opts: &FlowOptions) -> Result<MetaReport> {
    let analysis = run_pipeline(studies, opts)?;
    let forest = forest_data(&[analysis.fixed.clone(), analysis.random.clone()]);
    Ok(MetaReport { analysis, forest })
}

/// Best guess at which input field an error refers to.
pub fn error_field(err: &Error) -> Option<&'static str> {
    const FIELDS: [&str; 9] = ["q1", "q3", "mean", "sd", "alpha", "a", "m", "b", "n"];
    let message = match err {
        Error::InvalidSummary(m) | Error::InvalidArgument(m) | Error::DegenerateRange(m) => m,
        Error::UnsupportedAlpha { .. } => return Some("alpha"),
        Error::OutOfTableRange(_) => return Some("n"),
        _ => return None,
    };
    let words: Vec<&str> =
        message.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).filter(|w| !w.is_empty()).collect();
    words.iter().find_map(|w| FIELDS.iter().copied().find(|f| f == w))
}
