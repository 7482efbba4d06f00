//! Reported summaries of a study arm and order-statistic extraction from raw
//! samples.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which numbers a study arm reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// `{a, m, b; n}`
    S1,
    /// `{q1, m, q3; n}`
    S2,
    /// `{a, q1, m, q3, b; n}`
    S3,
    /// Sample mean and SD.
    #[serde(alias = "mean-sd", alias = "mean_sd")]
    MeanSd,
    /// Sample mean with the range.
    #[serde(alias = "mean-range", alias = "mean_range")]
    MeanRange,
}

impl Scenario {
    pub const TESTABLE: [Scenario; 3] = [Scenario::S1, Scenario::S2, Scenario::S3];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::S1 => "s1",
            Scenario::S2 => "s2",
            Scenario::S3 => "s3",
            Scenario::MeanSd => "meansd",
            Scenario::MeanRange => "meanrange",
        }
    }

    pub fn is_testable(self) -> bool {
        matches!(self, Scenario::S1 | Scenario::S2 | Scenario::S3)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "s1" => Ok(Scenario::S1),
            "s2" => Ok(Scenario::S2),
            "s3" => Ok(Scenario::S3),
            "meansd" => Ok(Scenario::MeanSd),
            "meanrange" => Ok(Scenario::MeanRange),
            other => Err(Error::InvalidArgument(format!("unknown scenario {other:?}"))),
        }
    }
}

/// One study arm's reported numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
    pub n: u64,
}

impl SummaryRecord {
    fn empty(scenario: Scenario, n: u64) -> Self {
        SummaryRecord { scenario, a: None, q1: None, m: None, q3: None, b: None, mean: None, sd: None, n }
    }

    pub fn s1(a: f64, m: f64, b: f64, n: u64) -> Self {
        SummaryRecord { a: Some(a), m: Some(m), b: Some(b), ..Self::empty(Scenario::S1, n) }
    }

    pub fn s2(q1: f64, m: f64, q3: f64, n: u64) -> Self {
        SummaryRecord { q1: Some(q1), m: Some(m), q3: Some(q3), ..Self::empty(Scenario::S2, n) }
    }

    pub fn s3(a: f64, q1: f64, m: f64, q3: f64, b: f64, n: u64) -> Self {
        SummaryRecord {
            a: Some(a),
            q1: Some(q1),
            m: Some(m),
            q3: Some(q3),
            b: Some(b),
            ..Self::empty(Scenario::S3, n)
        }
    }

    pub fn mean_sd(mean: f64, sd: f64, n: u64) -> Self {
        SummaryRecord { mean: Some(mean), sd: Some(sd), ..Self::empty(Scenario::MeanSd, n) }
    }

    pub fn mean_range(mean: f64, a: f64, b: f64, n: u64) -> Self {
        SummaryRecord { mean: Some(mean), a: Some(a), b: Some(b), ..Self::empty(Scenario::MeanRange, n) }
    }

    /// Checks that the scenario's fields are present and finite, that the
    /// order values are nondecreasing, and that `n >= 1`.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSummary("sample size n must be positive".into()));
        }
        let need = |name: &str, v: Option<f64>| -> Result<f64> {
            match v {
                Some(x) if x.is_finite() => Ok(x),
                Some(x) => Err(Error::InvalidSummary(format!("{name} must be finite, got {x}"))),
                None => Err(Error::InvalidSummary(format!(
                    "scenario {} requires {name}",
                    self.scenario
                ))),
            }
        };
        match self.scenario {
            Scenario::S1 => {
                need("a", self.a)?;
                need("m", self.m)?;
                need("b", self.b)?;
            }
            Scenario::S2 => {
                need("q1", self.q1)?;
                need("m", self.m)?;
                need("q3", self.q3)?;
            }
            Scenario::S3 => {
                for (name, v) in self.order_values() {
                    need(name, v)?;
                }
            }
            Scenario::MeanSd => {
                need("mean", self.mean)?;
                let sd = need("sd", self.sd)?;
                if sd <= 0.0 {
                    return Err(Error::InvalidSummary(format!("sd must be positive, got {sd}")));
                }
            }
            Scenario::MeanRange => {
                need("mean", self.mean)?;
                need("a", self.a)?;
                need("b", self.b)?;
            }
        }
        let present: Vec<(&str, f64)> = self
            .order_values()
            .into_iter()
            .filter_map(|(name, v)| v.map(|x| (name, x)))
            .collect();
        for pair in present.windows(2) {
            let (lo_name, lo) = pair[0];
            let (hi_name, hi) = pair[1];
            if lo > hi {
                return Err(Error::InvalidSummary(format!(
                    "ordering violated: {lo_name} = {lo} exceeds {hi_name} = {hi}"
                )));
            }
        }
        Ok(())
    }

    fn order_values(&self) -> [(&'static str, Option<f64>); 5] {
        [("a", self.a), ("q1", self.q1), ("m", self.m), ("q3", self.q3), ("b", self.b)]
    }

    /// Applies `x ↦ shift + scale·x` to every location-type value and
    /// `sd ↦ |scale|·sd`. A negative scale also swaps the roles of the
    /// lower and upper order values so the result stays ordered.
    pub fn affine(&self, shift: f64, scale: f64) -> SummaryRecord {
        let f = |v: Option<f64>| v.map(|x| shift + scale * x);
        let mut out = SummaryRecord {
            mean: f(self.mean),
            sd: self.sd.map(|s| s * scale.abs()),
            a: f(self.a),
            q1: f(self.q1),
            m: f(self.m),
            q3: f(self.q3),
            b: f(self.b),
            ..self.clone()
        };
        if scale < 0.0 {
            std::mem::swap(&mut out.a, &mut out.b);
            std::mem::swap(&mut out.q1, &mut out.q3);
        }
        out
    }
}

/// The five order statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumbers {
    pub a: f64,
    pub q1: f64,
    pub m: f64,
    pub q3: f64,
    pub b: f64,
}

impl FiveNumbers {
    /// Extracts the five-number summary, reordering `data` in place.
    ///
    /// For `n = 4Q+1` the positions are `1, Q+1, 2Q+1, 3Q+1, n`. Other sizes
    /// use quartile positions `⌊(n+3)/4⌋` and `n+1-⌊(n+3)/4⌋`; an even `n`
    /// takes the median as the average of the two middle values.
    pub fn extract(data: &mut [f64]) -> Result<FiveNumbers> {
        let n = data.len();
        if n < 5 {
            return Err(Error::InvalidArgument(format!(
                "five-number extraction needs at least 5 values, got {n}"
            )));
        }
        if data.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidArgument("sample contains NaN".into()));
        }
        Ok(extract_unchecked(data))
    }

    pub fn t1(&self) -> f64 {
        crate::skew::bowley(self.a, self.m, self.b)
    }

    pub fn t2(&self) -> f64 {
        crate::skew::bowley(self.q1, self.m, self.q3)
    }

    pub fn to_summary(&self, scenario: Scenario, n: u64) -> SummaryRecord {
        match scenario {
            Scenario::S1 => SummaryRecord::s1(self.a, self.m, self.b, n),
            Scenario::S2 => SummaryRecord::s2(self.q1, self.m, self.q3, n),
            _ => SummaryRecord::s3(self.a, self.q1, self.m, self.q3, self.b, n),
        }
    }
}

/// 0-based index of the lower quartile order statistic.
#[inline]
pub(crate) fn lower_quartile_index(n: usize) -> usize {
    n.div_ceil(4) - 1
}

pub(crate) fn extract_unchecked(data: &mut [f64]) -> FiveNumbers {
    let n = data.len();
    let mid = n / 2;
    let kq = lower_quartile_index(n);
    let kq3 = n - 1 - kq;

    let (left, med, right) = data.select_nth_unstable_by(mid, f64::total_cmp);
    let med_hi = *med;

    let (l_lo, q1, l_hi) = left.select_nth_unstable_by(kq, f64::total_cmp);
    let q1 = *q1;
    let a = l_lo.iter().copied().fold(q1, f64::min);
    let m = if n.is_multiple_of(2) {
        // Lower middle value is the largest of the left part.
        let lower_mid = l_hi.iter().copied().fold(q1, f64::max);
        0.5 * (lower_mid + med_hi)
    } else {
        med_hi
    };

    let (_, q3, r_hi) = right.select_nth_unstable_by(kq3 - mid - 1, f64::total_cmp);
    let q3 = *q3;
    let b = r_hi.iter().copied().fold(q3, f64::max);

    FiveNumbers { a, q1, m, q3, b }
}
