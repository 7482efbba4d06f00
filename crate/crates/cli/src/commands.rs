use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fivenum_skew::critical::{null_density, null_quantile, tables, NullDensityQuery, StatisticKind};
use fivenum_skew::meta::{read_studies, vitamin_d, write_forest_csv, FlowOptions, MetaResult};
use fivenum_skew::montecarlo::with_workers;
use fivenum_skew::sim::{
    run_appendix_a, run_power, run_table1, run_type1, write_rates_csv, Experiment, ExperimentSpec,
};
use fivenum_skew::{CriticalValueSource, DistributionSpec, Error, Result, Scenario, Seed};
use serde::Serialize;

use crate::args::{
    CritvalArgs, DensityArgs, ExperimentKind, Format, MetaArgs, SimulateArgs, Statistic, SummaryArgs,
    TableArgs, TestArgs,
};
use crate::service::{self, probability};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io_err)?;
    writeln!(out)?;
    Ok(())
}

fn csv_rows<W: Write>(out: &mut W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn statistic_name(s: Scenario) -> &'static str {
    match s {
        Scenario::S1 => "T1",
        Scenario::S2 => "T2",
        _ => "T3",
    }
}

pub fn test<W: Write>(args: &TestArgs, format: Format, out: &mut W) -> Result<()> {
    let summary = args.summary.record();
    let source = args.source.source_or(CriticalValueSource::ApproxFormula);
    let r = service::test(&summary, args.source.alpha, source)?;
    match format {
        Format::Json => json(out, &r),
        Format::Csv => csv_rows(
            out,
            &["scenario", "n", "statistic", "critical", "source", "alpha", "verdict", "theta1_hat", "theta2_hat"],
            &[vec![
                r.result.scenario.to_string(),
                r.result.n.to_string(),
                r.result.statistic.to_string(),
                r.critical.to_string(),
                r.result.source.to_string(),
                r.result.alpha.value().to_string(),
                r.verdict.clone(),
                opt(r.result.theta1_hat),
                opt(r.result.theta2_hat),
            ]],
        ),
        Format::Text => {
            let call = if r.result.reject { "REJECT" } else { "not rejected" };
            writeln!(
                out,
                "{}={:.3}, critical={:.3}, {call}",
                statistic_name(r.result.scenario),
                r.result.statistic,
                r.critical
            )?;
            writeln!(
                out,
                "verdict: {} (scenario {}, n = {}, alpha = {}, source {})",
                r.verdict,
                r.result.scenario,
                r.result.n,
                r.result.alpha.value(),
                r.result.source
            )?;
            if let Some(t) = r.result.theta1_hat {
                writeln!(out, "a + b - 2m = {t}")?;
            }
            if let Some(t) = r.result.theta2_hat {
                writeln!(out, "q1 + q3 - 2m = {t}")?;
            }
            writeln!(out, "guidance: {}", r.guidance)?;
            Ok(())
        }
    }
}

pub fn estimate<W: Write>(args: &SummaryArgs, format: Format, out: &mut W) -> Result<()> {
    let e = service::estimate(&args.record())?;
    match format {
        Format::Json => json(out, &e),
        Format::Csv => csv_rows(
            out,
            &["mean", "sd", "mean_method", "sd_method"],
            &[vec![
                e.mean.to_string(),
                e.sd.to_string(),
                serde_json::to_value(e.mean_method).map_err(io_err)?.as_str().unwrap_or_default().to_string(),
                serde_json::to_value(e.sd_method).map_err(io_err)?.as_str().unwrap_or_default().to_string(),
            ]],
        ),
        Format::Text => {
            writeln!(out, "mean = {:.4} ({:?})", e.mean, e.mean_method)?;
            writeln!(out, "sd   = {:.4} ({:?})", e.sd, e.sd_method)?;
            Ok(())
        }
    }
}

fn pooled_line(r: &MetaResult) -> String {
    let mut s = format!(
        "{:<15} MD = {:.2} [{:.2}, {:.2}], z = {:.3}, p = {:.3e}, Q = {:.3} (df {}), tau2 = {:.3}, I2 = {:.1}%",
        r.model.as_str(),
        r.pooled_md,
        r.ci_low,
        r.ci_high,
        r.z,
        r.p_value,
        r.q_stat,
        r.df,
        r.tau2,
        100.0 * r.i2
    );
    if let Some(est) = &r.tau2_estimator {
        s.push_str(&format!(" [{est}]"));
    }
    s
}

pub fn meta<W: Write>(args: &MetaArgs, format: Format, out: &mut W) -> Result<()> {
    let studies = match &args.input {
        Some(path) => read_studies(path)?,
        None => vitamin_d(),
    };
    let opts = FlowOptions {
        alpha: probability(args.source.alpha)?,
        source: args.source.source_or(CriticalValueSource::ApproxFormula),
        force_include: args.force_include,
    };
    let report = service::meta(&studies, &opts)?;
    if let Some(path) = &args.forest_out {
        let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_forest_csv(&report.forest, BufWriter::new(file))?;
    }
    match format {
        Format::Json => json(out, &report)?,
        Format::Csv => write_forest_csv(&report.forest, &mut *out)?,
        Format::Text => {
            let a = &report.analysis;
            writeln!(
                out,
                "{} studies: {} included, {} excluded (alpha = {}, source {}{})",
                a.decisions.len(),
                a.included().count(),
                a.excluded().count(),
                opts.alpha.value(),
                opts.source,
                if opts.force_include { ", skewed studies force-included" } else { "" }
            )?;
            for d in &a.decisions {
                let tests: Vec<String> = [&d.cases, &d.controls]
                    .iter()
                    .filter_map(|arm| {
                        arm.test.as_ref().map(|t| {
                            format!("{:?} T={:.3} c={:.3} {}", arm.arm, t.statistic, t.critical_value, t.verdict())
                        })
                    })
                    .collect();
                let status = match &d.verdict {
                    fivenum_skew::meta::Verdict::Included if d.forced => "included (forced)".to_string(),
                    fivenum_skew::meta::Verdict::Included => "included".to_string(),
                    fivenum_skew::meta::Verdict::Excluded { reason } => format!("excluded: {reason}"),
                };
                let tests = if tests.is_empty() { "not tested".to_string() } else { tests.join("; ") };
                writeln!(out, "  {:<16} {tests} -> {status}", d.study_id)?;
                if d.is_included() {
                    for arm in [&d.cases, &d.controls] {
                        writeln!(
                            out,
                            "    {:<9} mean {:.2} sd {:.2} n {} ({:?}/{:?})",
                            format!("{:?}", arm.arm).to_lowercase(),
                            arm.moments.mean,
                            arm.moments.sd,
                            arm.n,
                            arm.moments.mean_method,
                            arm.moments.sd_method
                        )?;
                    }
                }
            }
            writeln!(out, "{}", pooled_line(&a.fixed))?;
            writeln!(out, "{}", pooled_line(&a.random))?;
            if let Some(path) = &args.forest_out {
                writeln!(out, "forest rows written to {}", path.display())?;
            }
        }
    }
    Ok(())
}

pub fn critval<W: Write>(args: &CritvalArgs, format: Format, out: &mut W) -> Result<()> {
    let source = args.source.source.map(|_| args.source.source_or(CriticalValueSource::ExactTable));
    let r = service::critical(args.scenario, args.n, args.source.alpha, source)?;
    match format {
        Format::Json => json(out, &r),
        Format::Csv => csv_rows(
            out,
            &["scenario", "n", "alpha", "value", "source"],
            &[vec![r.scenario.to_string(), r.n.to_string(), r.alpha.to_string(), r.value.to_string(), r.source.to_string()]],
        ),
        Format::Text => {
            writeln!(out, "{} ({})", r.value, r.source)?;
            Ok(())
        }
    }
}

pub fn table<W: Write>(args: &TableArgs, format: Format, out: &mut W) -> Result<()> {
    let selected: Vec<_> = tables().iter().filter(|t| args.scenario.is_none_or(|s| s == t.scenario)).collect();
    match format {
        Format::Json => json(out, &selected),
        Format::Csv => {
            let rows: Vec<Vec<String>> = selected
                .iter()
                .flat_map(|t| {
                    t.rows.iter().map(|r| vec![t.scenario.to_string(), r.q.to_string(), r.n.to_string(), r.value.to_string()])
                })
                .collect();
            csv_rows(out, &["scenario", "q", "n", "value"], &rows)
        }
        Format::Text => {
            for t in selected {
                writeln!(out, "# {} critical values at alpha = 0.05", t.scenario)?;
                for r in &t.rows {
                    writeln!(out, "{:>4} {:>4} {:.4}", r.q, r.n, r.value)?;
                }
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct DensityReport {
    statistic: String,
    n: u64,
    points: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper_tail: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantile: Option<f64>,
}

pub fn density<W: Write>(args: &DensityArgs, format: Format, out: &mut W) -> Result<()> {
    let kind = match args.statistic {
        Statistic::T1 => StatisticKind::T1,
        Statistic::T2 => StatisticKind::T2,
    };
    let points = args
        .t
        .iter()
        .map(|&t| null_density(&NullDensityQuery { kind, n: args.n, t }).map(|f| (t, f)))
        .collect::<Result<Vec<_>>>()?;
    let quantile = args.upper_tail.map(|p| null_quantile(kind, args.n, p)).transpose()?;
    let report = DensityReport {
        statistic: format!("{kind:?}"),
        n: args.n,
        points,
        upper_tail: args.upper_tail,
        quantile,
    };
    match format {
        Format::Json => json(out, &report),
        Format::Csv => {
            let rows: Vec<Vec<String>> =
                report.points.iter().map(|(t, f)| vec![t.to_string(), f.to_string()]).collect();
            csv_rows(out, &["t", "density"], &rows)
        }
        Format::Text => {
            for (t, f) in &report.points {
                writeln!(out, "f({t}) = {f:.6}")?;
            }
            if let (Some(p), Some(q)) = (report.upper_tail, report.quantile) {
                writeln!(out, "upper {p} quantile = {q:.4}")?;
            }
            Ok(())
        }
    }
}

fn parse_distribution(s: Option<&str>) -> Result<DistributionSpec> {
    let s = s.ok_or_else(|| Error::InvalidArgument("this experiment needs --distribution".into()))?;
    let d: DistributionSpec = s.parse()?;
    d.validate()?;
    Ok(d)
}

fn write_target(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn simulate<W: Write>(args: &SimulateArgs, format: Format, out: &mut W) -> Result<()> {
    let experiment = match args.experiment {
        ExperimentKind::Type1 => Experiment::TypeI,
        ExperimentKind::Power => Experiment::Power { alternative: parse_distribution(args.distribution.as_deref())? },
        ExperimentKind::Table1 => Experiment::Table1 { distribution: parse_distribution(args.distribution.as_deref())? },
        ExperimentKind::AppendixA => Experiment::AppendixA,
    };
    let mut spec = ExperimentSpec::new(experiment);
    if !args.scenario.is_empty() {
        spec.scenarios = args.scenario.clone();
    }
    if !args.n.is_empty() {
        spec.n_grid = args.n.clone();
    }
    spec.reps = args.reps;
    spec.seed = Seed(args.seed);
    spec.alpha = probability(args.alpha)?;
    spec.source = match args.source {
        Some(CriticalValueSource::MonteCarlo { .. }) => {
            CriticalValueSource::MonteCarlo { reps: args.source_reps, seed: Seed(args.seed) }
        }
        Some(s) => s,
        None => CriticalValueSource::ApproxFormula,
    };
    spec.generalized_n = args.generalized_n;

    let run = || -> Result<serde_json::Value> {
        let value = match spec.experiment {
            Experiment::TypeI => serde_json::to_value(run_type1(&spec)?),
            Experiment::Power { .. } => serde_json::to_value(run_power(&spec)?),
            Experiment::Table1 { .. } => serde_json::to_value(run_table1(&spec)?),
            Experiment::AppendixA => serde_json::to_value(run_appendix_a(&spec)?),
        };
        value.map_err(io_err)
    };
    let value = match args.workers {
        Some(w) => with_workers(w, run)??,
        None => run()?,
    };

    let rates: Option<Vec<fivenum_skew::sim::RatePoint>> = match spec.experiment {
        Experiment::TypeI | Experiment::Power { .. } => {
            Some(serde_json::from_value(value.clone()).map_err(io_err)?)
        }
        _ => None,
    };
    let summary = serde_json::json!({ "spec": spec, "result": value });

    if let Some(path) = &args.out {
        write_target(path, |w| match &rates {
            Some(r) => write_rates_csv(r, w),
            None => json(w, &value),
        })?;
    }
    if let Some(path) = &args.summary {
        write_target(path, |w| json(w, &summary))?;
    }

    match format {
        Format::Json => json(out, &summary)?,
        Format::Csv => match &rates {
            Some(r) => write_rates_csv(r, &mut *out)?,
            None => json(out, &value)?,
        },
        Format::Text => match &rates {
            Some(r) => {
                writeln!(out, "{:<22} {:<3} {:>5} {:>8} {:>8} {:>8}", "experiment", "s", "n", "rate", "se", "reps")?;
                for p in r {
                    writeln!(
                        out,
                        "{:<22} {:<3} {:>5} {:>8.4} {:>8.4} {:>8}",
                        p.experiment, p.scenario, p.n, p.rate, p.se, p.reps
                    )?;
                }
            }
            None => json(out, &value)?,
        },
    }
    if let Some(path) = &args.out {
        if format == Format::Text {
            writeln!(out, "results written to {}", path.display())?;
        }
    }
    Ok(())
}

/// Writes `buf` to standard output, ignoring a closed pipe.
pub fn emit(buf: &[u8]) -> io::Result<()> {
    let mut stdout = io::stdout().lock();
    match stdout.write_all(buf).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}
