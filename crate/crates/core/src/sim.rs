//! Simulation studies: type I error and power of the skewness tests, the
//! bias of the normal-theory mean/SD conversion under skewed data, and the
//! raw `a + b - 2m` illustration.
//!
//! Every grid point draws from its own seed derived from the experiment seed,
//! so a single point can be rerun in isolation and gives the same rate.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::critical::{critical_value, CriticalValueSource, MIN_MC_REPS};
use crate::error::{Error, Result};
use crate::moments::estimate_moments;
use crate::montecarlo::{replicate, replicate_summaries};
use crate::normal::Probability;
use crate::sampling::{DistributionSpec, Seed};
use crate::skew::{k_weight_unchecked, rejects};
use crate::summary::{extract_unchecked, FiveNumbers, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    TypeI,
    Power { alternative: DistributionSpec },
    Table1 { distribution: DistributionSpec },
    AppendixA,
}

impl Experiment {
    /// Value of the `experiment` column in rate exports.
    pub fn label(&self) -> String {
        match self {
            Experiment::TypeI => "type1".into(),
            Experiment::Power { alternative } => format!("power:{}", alternative.name()),
            Experiment::Table1 { distribution } => format!("table1:{}", distribution.name()),
            Experiment::AppendixA => "appendix-a".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub scenarios: Vec<Scenario>,
    pub n_grid: Vec<u64>,
    pub reps: u64,
    pub alpha: Probability,
    pub source: CriticalValueSource,
    pub seed: Seed,
    /// Allow sample sizes off the `4Q+1` grid.
    #[serde(default)]
    pub generalized_n: bool,
}

impl ExperimentSpec {
    pub const DEFAULT_REPS: u64 = 100_000;

    pub fn new(experiment: Experiment) -> Self {
        let n_grid = match experiment {
            Experiment::Table1 { .. } => vec![200],
            Experiment::AppendixA => vec![100],
            _ => (1..=100).map(|q| 4 * q + 1).collect(),
        };
        ExperimentSpec {
            experiment,
            scenarios: Scenario::TESTABLE.to_vec(),
            n_grid,
            reps: Self::DEFAULT_REPS,
            alpha: Probability::new(0.05).expect("0.05 is a probability"),
            source: CriticalValueSource::ApproxFormula,
            seed: Seed(0),
            generalized_n: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_MC_REPS {
            return Err(Error::InvalidArgument(format!(
                "experiments need at least {MIN_MC_REPS} replications, got {}",
                self.reps
            )));
        }
        if self.n_grid.is_empty() {
            return Err(Error::InvalidArgument("n grid is empty".into()));
        }
        let fixed_n = matches!(self.experiment, Experiment::Table1 { .. } | Experiment::AppendixA);
        for &n in &self.n_grid {
            if n < 5 {
                return Err(Error::InvalidArgument(format!("grid sizes must be >= 5, got {n}")));
            }
            if !fixed_n && !self.generalized_n && (n - 1) % 4 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "n = {n} is not of the form 4Q+1; enable generalized sizes to use it"
                )));
            }
        }
        if let Some(s) = self.scenarios.iter().find(|s| !s.is_testable()) {
            return Err(Error::TestNotApplicable(s.to_string()));
        }
        match &self.experiment {
            Experiment::Power { alternative } => alternative.validate(),
            Experiment::Table1 { distribution } => distribution.validate(),
            _ => Ok(()),
        }
    }

    fn point_seed(&self, index: u64) -> Seed {
        Seed(splitmix(self.seed.0 ^ splitmix(index)))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One estimated rejection rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub experiment: String,
    pub scenario: Scenario,
    pub n: u64,
    pub rate: f64,
    /// `√(p(1-p)/reps)`
    pub se: f64,
    pub reps: u64,
    pub seed: u64,
}

pub fn binomial_se(p: f64, reps: u64) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

fn statistic(scenario: Scenario, f: &FiveNumbers, n: f64) -> f64 {
    match scenario {
        Scenario::S1 => f.t1(),
        Scenario::S2 => f.t2(),
        _ => (k_weight_unchecked(n) * f.t1().abs()).max(f.t2().abs()),
    }
}

fn rejection_rates(spec: &ExperimentSpec, dist: &DistributionSpec) -> Result<Vec<RatePoint>> {
    spec.validate()?;
    let label = spec.experiment.label();
    let mut out = Vec::with_capacity(spec.n_grid.len() * spec.scenarios.len());
    for (i, &n) in spec.n_grid.iter().enumerate() {
        let crit: Vec<f64> = spec
            .scenarios
            .iter()
            .map(|&s| critical_value(s, n, spec.alpha.value(), &spec.source))
            .collect::<Result<_>>()?;
        let seed = spec.point_seed(i as u64);
        let nf = n as f64;
        let hits = replicate_summaries(dist, n as usize, spec.reps, seed, |f| {
            spec.scenarios
                .iter()
                .zip(&crit)
                .map(|(&s, &c)| rejects(s, statistic(s, f, nf), c) as u64)
                .collect::<Vec<_>>()
        });
        for (j, &scenario) in spec.scenarios.iter().enumerate() {
            let count: u64 = hits.iter().map(|h| h[j]).sum();
            let rate = count as f64 / spec.reps as f64;
            out.push(RatePoint {
                experiment: label.clone(),
                scenario,
                n,
                rate,
                se: binomial_se(rate, spec.reps),
                reps: spec.reps,
                seed: seed.0,
            });
        }
    }
    Ok(out)
}

/// Rejection rates under standard normal data.
pub fn run_type1(spec: &ExperimentSpec) -> Result<Vec<RatePoint>> {
    if spec.experiment != Experiment::TypeI {
        return Err(Error::InvalidArgument("run_type1 needs a type I experiment".into()));
    }
    rejection_rates(spec, &DistributionSpec::STANDARD_NORMAL)
}

/// Rejection rates under a skewed alternative.
pub fn run_power(spec: &ExperimentSpec) -> Result<Vec<RatePoint>> {
    match &spec.experiment {
        Experiment::Power { alternative } => rejection_rates(spec, alternative),
        _ => Err(Error::InvalidArgument("run_power needs a power experiment".into())),
    }
}

/// Average and spread of a quantity across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageSd {
    pub average: f64,
    pub sd: f64,
}

impl AverageSd {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let (mut k, mut sum) = (0.0, 0.0);
        for v in values.clone() {
            k += 1.0;
            sum += v;
        }
        let average = sum / k;
        let ss: f64 = values.map(|v| (v - average).powi(2)).sum();
        AverageSd { average, sd: (ss / (k - 1.0)).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Result {
    pub distribution: DistributionSpec,
    pub n: u64,
    pub reps: u64,
    pub seed: u64,
    pub true_mean: AverageSd,
    pub estimated_mean: AverageSd,
    pub true_sd: AverageSd,
    pub estimated_sd: AverageSd,
}

/// Sample mean/SD against their S1-based estimates, at the first grid size.
pub fn run_table1(spec: &ExperimentSpec) -> Result<Table1Result> {
    let dist = match &spec.experiment {
        Experiment::Table1 { distribution } => *distribution,
        _ => return Err(Error::InvalidArgument("run_table1 needs a Table 1 experiment".into())),
    };
    spec.validate()?;
    let n = spec.n_grid[0];
    let seed = spec.point_seed(0);
    let rows = replicate(spec.reps, seed, |stream| {
        let mut xs = vec![0.0; n as usize];
        stream.fill(&dist, &mut xs);
        let k = n as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        let summary = extract_unchecked(&mut xs).to_summary(Scenario::S1, n);
        let est = estimate_moments(&summary).expect("continuous samples give a positive range");
        [mean, est.mean, sd, est.sd]
    });
    let col = |j: usize| AverageSd::of(rows.iter().map(move |r| r[j]));
    Ok(Table1Result {
        distribution: dist,
        n,
        reps: spec.reps,
        seed: seed.0,
        true_mean: col(0),
        estimated_mean: col(1),
        true_sd: col(2),
        estimated_sd: col(3),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixAResult {
    pub n: u64,
    pub reps: u64,
    pub seed: u64,
    pub threshold: f64,
    pub null: DistributionSpec,
    pub alternative: DistributionSpec,
    /// `a + b - 2m` under the null.
    pub null_theta1: AverageSd,
    pub alternative_theta1: AverageSd,
    pub type1: f64,
    pub type1_se: f64,
    pub power: f64,
    pub power_se: f64,
}

impl AppendixAResult {
    pub const THRESHOLD: f64 = 0.76;

    /// Null scale: the variance `1 - 2δ²/π` of the skew-normal alternative,
    /// `δ² = 100/101`.
    pub fn null_sigma() -> f64 {
        (1.0 - 200.0 / (101.0 * std::f64::consts::PI)).sqrt()
    }
}

/// `a + b - 2m` compared with a fixed `±0.76` threshold, for a normal null
/// and a skew-normal alternative with the same variance.
pub fn run_appendix_a(spec: &ExperimentSpec) -> Result<AppendixAResult> {
    if spec.experiment != Experiment::AppendixA {
        return Err(Error::InvalidArgument("run_appendix_a needs an appendix A experiment".into()));
    }
    spec.validate()?;
    let n = spec.n_grid[0];
    let null = DistributionSpec::Normal { mu: 10.0, sigma: AppendixAResult::null_sigma() };
    let alternative = DistributionSpec::SkewNormal { xi: 0.0, omega: 1.0, alpha: -10.0 };
    let seed = spec.point_seed(0);
    let theta = |dist: &DistributionSpec, s: Seed| {
        replicate_summaries(dist, n as usize, spec.reps, s, |f| f.a + f.b - 2.0 * f.m)
    };
    let t = AppendixAResult::THRESHOLD;
    let rate = |v: &[f64]| v.iter().filter(|x| x.abs() > t).count() as f64 / v.len() as f64;
    let under_null = theta(&null, seed);
    let under_alt = theta(&alternative, spec.point_seed(1));
    let (type1, power) = (rate(&under_null), rate(&under_alt));
    Ok(AppendixAResult {
        n,
        reps: spec.reps,
        seed: seed.0,
        threshold: t,
        null,
        alternative,
        null_theta1: AverageSd::of(under_null.iter().copied()),
        alternative_theta1: AverageSd::of(under_alt.iter().copied()),
        type1,
        type1_se: binomial_se(type1, spec.reps),
        power,
        power_se: binomial_se(power, spec.reps),
    })
}

/// Writes rates as CSV: `experiment,scenario,n,rate,se,reps,seed`.
pub fn write_rates_csv<W: Write>(points: &[RatePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["experiment", "scenario", "n", "rate", "se", "reps", "seed"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for p in points {
        w.write_record([
            p.experiment.clone(),
            p.scenario.to_string(),
            p.n.to_string(),
            p.rate.to_string(),
            p.se.to_string(),
            p.reps.to_string(),
            p.seed.to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(experiment: Experiment, n_grid: Vec<u64>, reps: u64) -> ExperimentSpec {
        ExperimentSpec { n_grid, reps, seed: Seed(3), ..ExperimentSpec::new(experiment) }
    }

    #[test]
    fn validation() {
        let mut s = spec(Experiment::TypeI, vec![21], 999);
        assert!(run_type1(&s).is_err());
        s.reps = 1000;
        s.n_grid = vec![22];
        assert!(run_type1(&s).is_err());
        s.generalized_n = true;
        assert!(run_type1(&s).is_ok());
        s.n_grid = vec![4];
        assert!(run_type1(&s).is_err());
        s.n_grid = vec![21];
        s.scenarios = vec![Scenario::MeanSd];
        assert!(run_type1(&s).is_err());
        assert!(run_power(&spec(Experiment::TypeI, vec![21], 1000)).is_err());
        let bad = Experiment::Power { alternative: DistributionSpec::LogNormal { mu: 0.0, sigma: -1.0 } };
        assert!(run_power(&spec(bad, vec![21], 1000)).is_err());
    }

    #[test]
    fn rates_are_reproducible_and_point_local() {
        let s = spec(Experiment::TypeI, vec![9, 21], 2000);
        let a = run_type1(&s).unwrap();
        assert_eq!(a, run_type1(&s).unwrap());
        assert_eq!(a.len(), 6);
        let first = run_type1(&spec(Experiment::TypeI, vec![9], 2000)).unwrap();
        assert_eq!(first[..], a[..3]);
        for p in &a {
            assert!((p.se - binomial_se(p.rate, 2000)).abs() < 1e-15);
            assert!(p.rate < 0.15);
        }
    }

    #[test]
    fn small_n_asymptotic_s2_is_conservative() {
        let mut s = spec(Experiment::TypeI, vec![5], 100_000);
        s.scenarios = vec![Scenario::S2];
        s.source = CriticalValueSource::Asymptotic;
        let r = run_type1(&s).unwrap();
        assert!(r[0].rate < 0.01, "{}", r[0].rate);
    }

    #[test]
    fn table1_half_normal() {
        let d = DistributionSpec::HalfNormal { mu: 0.0, sigma: 1.0 };
        let r = run_table1(&spec(Experiment::Table1 { distribution: d }, vec![200], 20_000)).unwrap();
        assert!((r.true_mean.average - 0.80).abs() < 0.01);
        assert!((r.estimated_mean.average - 0.73).abs() < 0.01);
    }

    #[test]
    fn appendix_a_null_scale() {
        assert!((AppendixAResult::null_sigma().powi(2) - 0.37).abs() < 5e-3);
        let r = run_appendix_a(&spec(Experiment::AppendixA, vec![100], 20_000)).unwrap();
        assert!(r.null_theta1.average.abs() < 0.02);
        assert!(r.power > r.type1);
    }

    #[test]
    fn csv_layout() {
        let s = spec(Experiment::TypeI, vec![9], 1000);
        let mut buf = Vec::new();
        write_rates_csv(&run_type1(&s).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("experiment,scenario,n,rate,se,reps,seed"));
        assert!(lines.next().unwrap().starts_with("type1,s1,9,"));
        assert_eq!(text.lines().count(), 4);
    }
}
