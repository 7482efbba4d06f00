//! The three skewness statistics and the test decision.

use serde::{Deserialize, Serialize};

use crate::critical::{critical_value, CriticalValueSource};
use crate::error::{Error, Result};
use crate::normal::Probability;
use crate::summary::{Scenario, SummaryRecord};

fn scaled_gap(lo: f64, mid: f64, hi: f64, names: [&str; 3]) -> Result<f64> {
    if !(lo.is_finite() && mid.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidSummary("summary values must be finite".into()));
    }
    if lo > mid || mid > hi {
        return Err(Error::InvalidSummary(format!(
            "ordering violated: need {} <= {} <= {}, got {lo}, {mid}, {hi}",
            names[0], names[1], names[2]
        )));
    }
    if hi == lo {
        return Err(Error::DegenerateRange(format!(
            "{} = {} = {lo}, the statistic is undefined",
            names[0], names[2]
        )));
    }
    Ok(bowley(lo, mid, hi))
}

/// `(lo + hi - 2·mid) / (hi - lo)`, arranged so that a median on either end
/// gives exactly `±1`.
#[inline]
pub(crate) fn bowley(lo: f64, mid: f64, hi: f64) -> f64 {
    (((hi - mid) - (mid - lo)) / (hi - lo)).clamp(-1.0, 1.0)
}

/// `T1 = (a + b - 2m) / (b - a)`, in `[-1, 1]`.
pub fn t1_statistic(a: f64, m: f64, b: f64) -> Result<f64> {
    scaled_gap(a, m, b, ["a", "m", "b"])
}

/// `T2 = (q1 + q3 - 2m) / (q3 - q1)`, in `[-1, 1]`.
pub fn t2_statistic(q1: f64, m: f64, q3: f64) -> Result<f64> {
    scaled_gap(q1, m, q3, ["q1", "m", "q3"])
}

/// Weight that puts `|T1|` on the scale of `|T2|` in `T3`:
/// `k(n) = 2.65·ln(0.6n)/√n`.
pub fn k_weight(n: u64) -> Result<f64> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!("k(n) needs n >= 5, got {n}")));
    }
    Ok(k_weight_unchecked(n as f64))
}

#[inline]
pub(crate) fn k_weight_unchecked(n: f64) -> f64 {
    2.65 * (0.6 * n).ln() / n.sqrt()
}

/// `T3 = max{k(n)·|T1|, |T2|}`.
pub fn t3_statistic(a: f64, q1: f64, m: f64, q3: f64, b: f64, n: u64) -> Result<f64> {
    if a > q1 || q3 > b {
        return Err(Error::InvalidSummary(format!(
            "ordering violated: need a <= q1 and q3 <= b, got a = {a}, q1 = {q1}, q3 = {q3}, b = {b}"
        )));
    }
    let t1 = t1_statistic(a, m, b)?;
    let t2 = t2_statistic(q1, m, q3)?;
    Ok((k_weight(n)? * t1.abs()).max(t2.abs()))
}

/// Outcome of one skewness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewTestResult {
    pub scenario: Scenario,
    pub n: u64,
    /// Signed `T1`/`T2` for S1/S2; the nonnegative `T3` for S3.
    pub statistic: f64,
    pub critical_value: f64,
    pub source: CriticalValueSource,
    pub alpha: Probability,
    pub reject: bool,
    /// `a + b - 2m`, in data units, when the extremes are reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta1_hat: Option<f64>,
    /// `q1 + q3 - 2m`, in data units, when the quartiles are reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2_hat: Option<f64>,
}

impl SkewTestResult {
    /// "Reject" or "Not reject".
    pub fn verdict(&self) -> &'static str {
        if self.reject {
            "Reject"
        } else {
            "Not reject"
        }
    }
}

/// Rejection rule: two-sided for S1/S2, upper-tailed for S3.
pub fn rejects(scenario: Scenario, statistic: f64, critical: f64) -> bool {
    match scenario {
        Scenario::S3 => statistic > critical,
        _ => statistic.abs() > critical,
    }
}

fn field(v: Option<f64>) -> f64 {
    v.expect("validated summary has its scenario fields")
}

/// Statistic for a testable summary, plus the raw skewness estimates.
pub fn statistic_for(summary: &SummaryRecord) -> Result<(f64, Option<f64>, Option<f64>)> {
    if !summary.scenario.is_testable() {
        return Err(Error::TestNotApplicable(summary.scenario.to_string()));
    }
    summary.validate()?;
    if summary.n < 5 {
        return Err(Error::InvalidArgument(format!(
            "skewness tests need n >= 5, got {}",
            summary.n
        )));
    }
    let m = field(summary.m);
    Ok(match summary.scenario {
        Scenario::S1 => {
            let (a, b) = (field(summary.a), field(summary.b));
            (t1_statistic(a, m, b)?, Some(a + b - 2.0 * m), None)
        }
        Scenario::S2 => {
            let (q1, q3) = (field(summary.q1), field(summary.q3));
            (t2_statistic(q1, m, q3)?, None, Some(q1 + q3 - 2.0 * m))
        }
        _ => {
            let (a, q1, q3, b) =
                (field(summary.a), field(summary.q1), field(summary.q3), field(summary.b));
            (
                t3_statistic(a, q1, m, q3, b, summary.n)?,
                Some(a + b - 2.0 * m),
                Some(q1 + q3 - 2.0 * m),
            )
        }
    })
}

/// Tests `summary` for skewness at level `alpha` against `source`.
pub fn run_test(
    summary: &SummaryRecord,
    alpha: Probability,
    source: &CriticalValueSource,
) -> Result<SkewTestResult> {
    let (statistic, theta1_hat, theta2_hat) = statistic_for(summary)?;
    let critical = critical_value(summary.scenario, summary.n, alpha.value(), source)?;
    Ok(SkewTestResult {
        scenario: summary.scenario,
        n: summary.n,
        statistic,
        critical_value: critical,
        source: *source,
        alpha,
        reject: rejects(summary.scenario, statistic, critical),
        theta1_hat,
        theta2_hat,
    })
}
