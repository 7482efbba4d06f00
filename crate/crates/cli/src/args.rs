use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fivenum_skew::{CriticalValueSource, Scenario, Seed, SummaryRecord};

#[derive(Debug, Parser)]
#[command(name = "fivenum", version, about = "Skewness tests and mean/SD conversion for five-number summaries")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test one study arm for skewness.
    Test(TestArgs),
    /// Convert a summary into a sample mean and SD.
    Estimate(SummaryArgs),
    /// Run the flow chart over a study file and pool the included studies.
    Meta(MetaArgs),
    /// Look up or compute a critical value.
    Critval(CritvalArgs),
    /// Print an embedded critical-value table.
    Table(TableArgs),
    /// Evaluate the exact null density of T1 or T2.
    Density(DensityArgs),
    /// Run a simulation experiment.
    Simulate(SimulateArgs),
    /// Serve the HTTP JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SummaryArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    /// Minimum.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q1: Option<f64>,
    /// Median.
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q3: Option<f64>,
    /// Maximum.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mean: Option<f64>,
    #[arg(long)]
    pub sd: Option<f64>,
    /// Sample size.
    #[arg(long)]
    pub n: u64,
}

impl SummaryArgs {
    pub fn record(&self) -> SummaryRecord {
        SummaryRecord {
            scenario: self.scenario,
            a: self.a,
            q1: self.q1,
            m: self.m,
            q3: self.q3,
            b: self.b,
            mean: self.mean,
            sd: self.sd,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// exact, approx, asymptotic or mc.
    #[arg(long, value_parser = parse_source)]
    pub source: Option<CriticalValueSource>,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SourceArgs {
    /// The chosen source, with the Monte Carlo settings filled in.
    pub fn source_or(&self, default: CriticalValueSource) -> CriticalValueSource {
        match self.source.unwrap_or(default) {
            CriticalValueSource::MonteCarlo { .. } => {
                CriticalValueSource::MonteCarlo { reps: self.reps, seed: Seed(self.seed) }
            }
            other => other,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub summary: SummaryArgs,
    #[command(flatten)]
    pub source: SourceArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MetaArgs {
    /// Study file (CSV or JSON). Defaults to the bundled vitamin D dataset.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Keep studies that fail the skewness test.
    #[arg(long)]
    pub force_include: bool,
    /// Write the forest-plot rows to this CSV file.
    #[arg(long)]
    pub forest_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CritvalArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub source: SourceArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Limit to one scenario.
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Statistic {
    T1,
    T2,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub statistic: Statistic,
    /// Sample size, of the form 4Q+1.
    #[arg(long)]
    pub n: u64,
    /// Points at which to evaluate the density.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Also report the upper quantile for this tail probability.
    #[arg(long)]
    pub upper_tail: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Type1,
    Power,
    Table1,
    AppendixA,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub experiment: ExperimentKind,
    /// Scenarios to test (comma separated); all three by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_scenario)]
    pub scenario: Vec<Scenario>,
    /// Sample sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Critical-value source for the tests; approx by default.
    #[arg(long, value_parser = parse_source)]
    pub source: Option<CriticalValueSource>,
    /// Replications per Monte Carlo critical value, when `--source mc`.
    #[arg(long, default_value_t = 100_000)]
    pub source_reps: u64,
    /// Alternative (power) or data distribution (table1), e.g. `log-normal`
    /// or `skew-normal(0,1,-10)`.
    #[arg(long)]
    pub distribution: Option<String>,
    /// Allow sizes that are not of the form 4Q+1.
    #[arg(long)]
    pub generalized_n: bool,
    /// Write results here (CSV for rates, JSON otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a JSON summary of the run here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, env = "FIVENUM_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// Allowed CORS origin; any origin when omitted.
    #[arg(long)]
    pub cors_origin: Option<String>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: fivenum_skew::Error| e.to_string())
}

fn parse_source(s: &str) -> Result<CriticalValueSource, String> {
    s.parse().map_err(|e: fivenum_skew::Error| e.to_string())
}
