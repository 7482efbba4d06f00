//! Critical values for the three tests, from four sources: the embedded
//! simulation tables, closed-form approximations, asymptotic null
//! distributions and fresh Monte Carlo.
//!
//! The exact null densities of `T1` and `T2` live in [`density`].

pub mod density;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::montecarlo::{replicate_summaries, upper_quantile};
use crate::normal::{phi_inv, xi_n};
use crate::sampling::{DistributionSpec, Seed};
use crate::skew::k_weight_unchecked;
use crate::summary::{FiveNumbers, Scenario};

pub use density::{null_density, null_probability, null_quantile, null_upper_tail, NullDensityQuery, StatisticKind};

/// Significance level served by the table and approximation sources.
pub const TABLE_ALPHA: f64 = 0.05;
pub const TABLE_MIN_N: u64 = 5;
pub const TABLE_MAX_N: u64 = 401;
pub const MIN_MC_REPS: u64 = 1000;

const TABLE_ASSET: &str = include_str!("../../assets/critical_values.txt");

/// Where a critical value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CriticalValueSource {
    ExactTable,
    ApproxFormula,
    Asymptotic,
    MonteCarlo { reps: u64, seed: Seed },
}

impl CriticalValueSource {
    pub fn name(&self) -> &'static str {
        match self {
            CriticalValueSource::ExactTable => "exact-table",
            CriticalValueSource::ApproxFormula => "approx-formula",
            CriticalValueSource::Asymptotic => "asymptotic",
            CriticalValueSource::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

impl fmt::Display for CriticalValueSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalValueSource::MonteCarlo { reps, seed } => {
                write!(f, "monte-carlo(reps={reps}, seed={seed})")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Parses the source name; Monte Carlo gets `reps = 100000, seed = 0` and is
/// expected to be adjusted by the caller.
impl FromStr for CriticalValueSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "table" | "exact-table" => Ok(CriticalValueSource::ExactTable),
            "approx" | "approximate" | "approx-formula" | "formula" => {
                Ok(CriticalValueSource::ApproxFormula)
            }
            "asymptotic" | "asy" => Ok(CriticalValueSource::Asymptotic),
            "mc" | "monte-carlo" | "montecarlo" => {
                Ok(CriticalValueSource::MonteCarlo { reps: 100_000, seed: Seed(0) })
            }
            other => Err(Error::InvalidArgument(format!("unknown critical-value source {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub q: u64,
    pub n: u64,
    pub value: f64,
}

/// One scenario's tabulated critical values for `n = 4Q+1`, `Q = 1..=100`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTable {
    pub scenario: Scenario,
    pub rows: Vec<TableRow>,
}

fn parse_tables(text: &str) -> Result<Vec<CriticalTable>> {
    let mut tables: Vec<CriticalTable> = Scenario::TESTABLE
        .iter()
        .map(|&scenario| CriticalTable { scenario, rows: Vec::with_capacity(100) })
        .collect();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::Ingest { line: i as u64 + 1, message: msg.to_string() };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(bad("expected: scenario Q n value"));
        }
        let scenario: Scenario = cols[0].parse().map_err(|_| bad("bad scenario"))?;
        let q: u64 = cols[1].parse().map_err(|_| bad("bad Q"))?;
        let n: u64 = cols[2].parse().map_err(|_| bad("bad n"))?;
        let value: f64 = cols[3].parse().map_err(|_| bad("bad value"))?;
        if n != 4 * q + 1 {
            return Err(bad("n must equal 4Q+1"));
        }
        let table = tables
            .iter_mut()
            .find(|t| t.scenario == scenario)
            .ok_or_else(|| bad("scenario has no table"))?;
        table.rows.push(TableRow { q, n, value });
    }
    Ok(tables)
}

/// The embedded tables, parsed once.
pub fn tables() -> &'static [CriticalTable] {
    static TABLES: OnceLock<Vec<CriticalTable>> = OnceLock::new();
    TABLES.get_or_init(|| parse_tables(TABLE_ASSET).expect("embedded table asset is well formed"))
}

/// The embedded table asset verbatim.
pub fn table_asset() -> &'static str {
    TABLE_ASSET
}

fn table_for(scenario: Scenario) -> Result<&'static CriticalTable> {
    tables()
        .iter()
        .find(|t| t.scenario == scenario)
        .ok_or_else(|| Error::TestNotApplicable(scenario.to_string()))
}

/// Tabulated critical value at `α = 0.05`, linearly interpolated in `n`
/// between grid rows.
pub fn table_critical(scenario: Scenario, n: u64) -> Result<f64> {
    let table = table_for(scenario)?;
    if !(TABLE_MIN_N..=TABLE_MAX_N).contains(&n) {
        return Err(Error::OutOfTableRange(n));
    }
    let idx = ((n - 1) / 4 - 1) as usize;
    let lo = table.rows[idx];
    if lo.n == n {
        return Ok(lo.value);
    }
    let hi = table.rows[idx + 1];
    let w = (n - lo.n) as f64 / (hi.n - lo.n) as f64;
    Ok(lo.value + w * (hi.value - lo.value))
}

/// Closed-form approximation of the `α = 0.05` critical value.
pub fn approx_critical(scenario: Scenario, n: u64) -> Result<f64> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!("approximate critical values need n >= 5, got {n}")));
    }
    let x = n as f64;
    match scenario {
        Scenario::S1 => Ok(1.01 / (x + 9.0).ln() + 2.43 / (x + 1.0)),
        Scenario::S2 => Ok(2.66 / x.sqrt() - 5.92 / (x * x)),
        Scenario::S3 => Ok(2.97 / x.sqrt() - 39.1 / (x * x * x)),
        other => Err(Error::TestNotApplicable(other.to_string())),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Upper `p` quantile of the standard logistic distribution.
pub fn logistic_upper_quantile(p: f64) -> f64 {
    ((1.0 - p) / p).ln()
}

/// Critical value from the limiting null distributions: logistic for the
/// scaled `T1`, normal for the scaled `T2`.
pub fn asymptotic_critical(scenario: Scenario, n: u64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n < 5 {
        return Err(Error::InvalidArgument(format!("asymptotic critical values need n >= 5, got {n}")));
    }
    let x = n as f64;
    match scenario {
        Scenario::S1 => {
            Ok(logistic_upper_quantile(alpha / 2.0) / ((2.0 * x.ln()).sqrt() * xi_n(n)?))
        }
        Scenario::S2 => Ok(phi_inv(1.0 - alpha / 2.0) / (0.74 * x.sqrt())),
        Scenario::S3 => Err(Error::AsymptoticUnavailable),
        other => Err(Error::TestNotApplicable(other.to_string())),
    }
}

/// Simulated critical value: the upper `α` quantile of `|T1|`, `|T2|` or `T3`
/// (equivalently the upper `α/2` quantile of signed `T1`/`T2`) over `reps`
/// standard-normal samples.
pub fn mc_critical(scenario: Scenario, n: u64, alpha: f64, reps: u64, seed: Seed) -> Result<f64> {
    check_alpha(alpha)?;
    if reps < MIN_MC_REPS {
        return Err(Error::InsufficientReplications(reps));
    }
    if n < 5 {
        return Err(Error::InvalidArgument(format!("Monte Carlo critical values need n >= 5, got {n}")));
    }
    let nf = n as f64;
    let stat: fn(&FiveNumbers, f64) -> f64 = match scenario {
        Scenario::S1 => |f, _| f.t1().abs(),
        Scenario::S2 => |f, _| f.t2().abs(),
        Scenario::S3 => |f, n| (k_weight_unchecked(n) * f.t1().abs()).max(f.t2().abs()),
        other => return Err(Error::TestNotApplicable(other.to_string())),
    };
    let mut values = replicate_summaries(
        &DistributionSpec::STANDARD_NORMAL,
        n as usize,
        reps,
        seed,
        |f| stat(f, nf),
    );
    Ok(upper_quantile(&mut values, alpha))
}

fn require_table_alpha(alpha: f64, source: &CriticalValueSource) -> Result<()> {
    if (alpha - TABLE_ALPHA).abs() > 1e-12 {
        return Err(Error::UnsupportedAlpha { alpha, source_name: source.name().to_string() });
    }
    Ok(())
}

/// Critical value for `scenario` at sample size `n` and level `alpha`.
pub fn critical_value(
    scenario: Scenario,
    n: u64,
    alpha: f64,
    source: &CriticalValueSource,
) -> Result<f64> {
    if !scenario.is_testable() {
        return Err(Error::TestNotApplicable(scenario.to_string()));
    }
    match *source {
        CriticalValueSource::ExactTable => {
            require_table_alpha(alpha, source)?;
            table_critical(scenario, n)
        }
        CriticalValueSource::ApproxFormula => {
            require_table_alpha(alpha, source)?;
            approx_critical(scenario, n)
        }
        CriticalValueSource::Asymptotic => asymptotic_critical(scenario, n, alpha),
        CriticalValueSource::MonteCarlo { reps, seed } => mc_critical(scenario, n, alpha, reps, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_shape_and_checksums() {
        let t = tables();
        assert_eq!(t.len(), 3);
        // Sums of the values in units of 1e-4, plain and Q-weighted,
        // computed from the printed tables.
        let expected = [(229_725, 9_841_538), (237_998, 8_859_926), (266_420, 9_877_280)];
        for (table, (sum, weighted)) in t.iter().zip(expected) {
            assert_eq!(table.rows.len(), 100);
            let units: Vec<i64> = table.rows.iter().map(|r| (r.value * 1e4).round() as i64).collect();
            assert_eq!(units.iter().sum::<i64>(), sum, "{}", table.scenario);
            let w: i64 = units.iter().zip(1..).map(|(u, q)| u * q).sum();
            assert_eq!(w, weighted, "{}", table.scenario);
            for (i, r) in table.rows.iter().enumerate() {
                assert_eq!(r.q, i as u64 + 1);
                assert_eq!(r.n, 4 * r.q + 1);
                assert!(r.value > 0.0);
                if i > 0 {
                    assert!(r.value <= table.rows[i - 1].value + 1e-3);
                }
            }
        }
    }

    #[test]
    fn table_lookup_examples() {
        assert_eq!(table_critical(Scenario::S1, 5).unwrap(), 0.7792);
        assert_eq!(table_critical(Scenario::S2, 5).unwrap(), 0.9463);
        assert_eq!(table_critical(Scenario::S3, 401).unwrap(), 0.1472);
        assert_eq!(table_critical(Scenario::S1, 21).unwrap(), 0.4032);
        // n = 7 sits halfway between Q = 1 and Q = 2.
        let mid = table_critical(Scenario::S1, 7).unwrap();
        assert!((mid - 0.5 * (0.7792 + 0.5706)).abs() < 1e-12);
        assert!(matches!(table_critical(Scenario::S1, 4), Err(Error::OutOfTableRange(4))));
        assert!(matches!(table_critical(Scenario::S1, 402), Err(Error::OutOfTableRange(402))));
        assert!(table_critical(Scenario::MeanSd, 21).is_err());
    }

    #[test]
    fn approx_examples() {
        assert!((approx_critical(Scenario::S1, 40).unwrap() - 0.319).abs() < 1e-3);
        assert!((approx_critical(Scenario::S1, 15).unwrap() - 0.470).abs() < 1e-3);
        assert!((approx_critical(Scenario::S2, 5).unwrap() - 0.9528).abs() < 1e-4);
        for s in Scenario::TESTABLE {
            for n in 5..2000 {
                assert!(approx_critical(s, n).unwrap() > 0.0);
            }
        }
        assert!(approx_critical(Scenario::S1, 4).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        assert!((logistic_upper_quantile(0.025) - 39f64.ln()).abs() < 1e-12);
        assert!((39f64.ln() - 3.6636).abs() < 1e-4);
        let c = asymptotic_critical(Scenario::S2, 100, 0.05).unwrap();
        assert!((c - 1.959964 / 7.4).abs() < 1e-3);
        assert!((c - 0.2649).abs() < 1e-3);
        let at_401 = asymptotic_critical(Scenario::S1, 401, 0.05).unwrap();
        assert!(at_401 > table_critical(Scenario::S1, 401).unwrap());
        assert!(asymptotic_critical(Scenario::S1, 1_000_000_000, 0.05).unwrap() < 0.05);
        assert!(matches!(asymptotic_critical(Scenario::S3, 21, 0.05), Err(Error::AsymptoticUnavailable)));
        assert!(asymptotic_critical(Scenario::S1, 21, 0.0).is_err());
    }

    #[test]
    fn mc_errors_and_determinism() {
        assert!(matches!(
            mc_critical(Scenario::S1, 21, 0.05, 999, Seed(1)),
            Err(Error::InsufficientReplications(999))
        ));
        let a = mc_critical(Scenario::S2, 9, 0.05, 5000, Seed(3)).unwrap();
        let b = mc_critical(Scenario::S2, 9, 0.05, 5000, Seed(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mc_matches_table_at_small_n() {
        for s in Scenario::TESTABLE {
            let c = mc_critical(s, 5, 0.05, 200_000, Seed(11)).unwrap();
            let t = table_critical(s, 5).unwrap();
            assert!((c - t).abs() < 0.006, "{s}: mc {c} vs table {t}");
        }
    }

    #[test]
    fn mc_generalized_n_sits_between_neighbouring_rows() {
        // n = 23 is off the 4Q+1 grid; the simulated value should land near
        // the interpolated table value.
        let c = mc_critical(Scenario::S1, 23, 0.05, 100_000, Seed(2)).unwrap();
        let t = table_critical(Scenario::S1, 23).unwrap();
        assert!((c - t).abs() < 0.02, "mc {c} vs interpolated {t}");
    }

    #[test]
    fn dispatcher_alpha_rules() {
        let approx = CriticalValueSource::ApproxFormula;
        assert!(critical_value(Scenario::S1, 21, 0.05, &approx).is_ok());
        assert!(matches!(
            critical_value(Scenario::S1, 21, 0.10, &CriticalValueSource::ExactTable),
            Err(Error::UnsupportedAlpha { .. })
        ));
        assert!(critical_value(Scenario::S1, 21, 0.10, &CriticalValueSource::Asymptotic).is_ok());
        assert!(critical_value(Scenario::MeanSd, 21, 0.05, &approx).is_err());
    }

    #[test]
    fn source_parsing_and_serde() {
        assert_eq!("approx".parse::<CriticalValueSource>().unwrap(), CriticalValueSource::ApproxFormula);
        assert_eq!("exact".parse::<CriticalValueSource>().unwrap(), CriticalValueSource::ExactTable);
        assert!("bogus".parse::<CriticalValueSource>().is_err());
        let mc = CriticalValueSource::MonteCarlo { reps: 2000, seed: Seed(4) };
        let json = serde_json::to_string(&mc).unwrap();
        assert_eq!(json, r#"{"kind":"monte-carlo","reps":2000,"seed":4}"#);
        assert_eq!(serde_json::from_str::<CriticalValueSource>(&json).unwrap(), mc);
    }
}
