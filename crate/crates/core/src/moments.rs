//! Normal-theory conversion of a (partial) five-number summary into a sample
//! mean and SD.
//!
//! Mean: weighted combinations of the mid-range, the mid-quartile and the
//! median with sample-size dependent weights (Luo et al.). SD: range over
//! `ξ(n)`, IQR over `η(n)` (Wan et al.), and for the full summary the
//! weighted blend of the two (Shi et al.).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{eta_n, xi_n};
use crate::summary::{Scenario, SummaryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanMethod {
    /// Taken from the report.
    Reported,
    LuoS1,
    LuoS2,
    LuoS3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdMethod {
    Reported,
    /// `(b - a) / ξ(n)`
    Range,
    /// `(q3 - q1) / η(n)`
    InterquartileRange,
    /// Weighted blend of the range and IQR estimators.
    RangeIqrBlend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub sd: f64,
    pub mean_method: MeanMethod,
    pub sd_method: SdMethod,
}

fn get(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidSummary(format!("missing {name}")))
}

/// Weight on the mid-range in the S1 mean estimator.
pub fn luo_s1_weight(n: u64) -> f64 {
    4.0 / (4.0 + (n as f64).powf(0.75))
}

/// Weight on the mid-quartile in the S2 mean estimator.
pub fn luo_s2_weight(n: u64) -> f64 {
    0.7 + 0.39 / n as f64
}

/// Weights on the mid-range and mid-quartile in the S3 mean estimator.
pub fn luo_s3_weights(n: u64) -> (f64, f64) {
    let x = n as f64;
    (2.2 / (2.2 + x.powf(0.75)), 0.7 - 0.72 / x.powf(0.55))
}

/// Weight on the range-based term in the S3 SD estimator.
pub fn shi_s3_weight(n: u64) -> f64 {
    1.0 / (1.0 + 0.07 * (n as f64).powf(0.6))
}

/// Estimated sample mean from an S1, S2 or S3 summary.
pub fn estimate_mean(summary: &SummaryRecord) -> Result<f64> {
    if !summary.scenario.is_testable() {
        return Err(Error::NotApplicable(format!(
            "a {} summary already reports the mean",
            summary.scenario
        )));
    }
    summary.validate()?;
    let n = summary.n;
    let m = get(summary.m, "m")?;
    Ok(match summary.scenario {
        Scenario::S1 => {
            let w = luo_s1_weight(n);
            w * 0.5 * (get(summary.a, "a")? + get(summary.b, "b")?) + (1.0 - w) * m
        }
        Scenario::S2 => {
            let w = luo_s2_weight(n);
            w * 0.5 * (get(summary.q1, "q1")? + get(summary.q3, "q3")?) + (1.0 - w) * m
        }
        _ => {
            let (w1, w2) = luo_s3_weights(n);
            let mid_range = 0.5 * (get(summary.a, "a")? + get(summary.b, "b")?);
            let mid_quartile = 0.5 * (get(summary.q1, "q1")? + get(summary.q3, "q3")?);
            w1 * mid_range + w2 * mid_quartile + (1.0 - w1 - w2) * m
        }
    })
}

fn positive_gap(lo: f64, hi: f64, what: &str) -> Result<f64> {
    let d = hi - lo;
    if d <= 0.0 {
        return Err(Error::DegenerateRange(format!("{what} is zero, the SD estimate would be 0")));
    }
    Ok(d)
}

/// Estimated sample SD from an S1, S2, S3 or mean-plus-range summary.
pub fn estimate_sd(summary: &SummaryRecord) -> Result<f64> {
    if summary.scenario == Scenario::MeanSd {
        return Err(Error::NotApplicable("a meansd summary already reports the SD".into()));
    }
    summary.validate()?;
    let n = summary.n;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("SD estimation needs n >= 2, got {n}")));
    }
    let range = || -> Result<f64> {
        Ok(positive_gap(get(summary.a, "a")?, get(summary.b, "b")?, "the range")? / xi_n(n)?)
    };
    let iqr = || -> Result<f64> {
        Ok(positive_gap(get(summary.q1, "q1")?, get(summary.q3, "q3")?, "the interquartile range")?
            / eta_n(n)?)
    };
    match summary.scenario {
        Scenario::S1 | Scenario::MeanRange => range(),
        Scenario::S2 => iqr(),
        _ => {
            let w = shi_s3_weight(n);
            Ok(w * range()? + (1.0 - w) * iqr()?)
        }
    }
}

/// Mean and SD for any summary: reported values pass through, the rest are
/// estimated.
pub fn estimate_moments(summary: &SummaryRecord) -> Result<MomentEstimate> {
    summary.validate()?;
    match summary.scenario {
        Scenario::MeanSd => Ok(MomentEstimate {
            mean: get(summary.mean, "mean")?,
            sd: get(summary.sd, "sd")?,
            mean_method: MeanMethod::Reported,
            sd_method: SdMethod::Reported,
        }),
        Scenario::MeanRange => Ok(MomentEstimate {
            mean: get(summary.mean, "mean")?,
            sd: estimate_sd(summary)?,
            mean_method: MeanMethod::Reported,
            sd_method: SdMethod::Range,
        }),
        s => Ok(MomentEstimate {
            mean: estimate_mean(summary)?,
            sd: estimate_sd(summary)?,
            mean_method: match s {
                Scenario::S1 => MeanMethod::LuoS1,
                Scenario::S2 => MeanMethod::LuoS2,
                _ => MeanMethod::LuoS3,
            },
            sd_method: match s {
                Scenario::S1 => SdMethod::Range,
                Scenario::S2 => SdMethod::InterquartileRange,
                _ => SdMethod::RangeIqrBlend,
            },
        }),
    }
}
