//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod support;

use std::time::Instant;

use fivenum_skew::critical::{
    approx_critical, mc_critical, null_density, null_probability, null_quantile, table_critical, tables,
    NullDensityQuery, StatisticKind,
};
use fivenum_skew::meta::{run_pipeline, vitamin_d, FlowOptions, MetaResult};
use fivenum_skew::sim::{run_appendix_a, run_power, run_table1, run_type1, Experiment, ExperimentSpec};
use fivenum_skew::{run_test, t1_statistic, CriticalValueSource, DistributionSpec, Probability, Scenario, Seed};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

/// Accumulates sub-checks of one criterion, remembering the first failure.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, summary: impl Into<String>) -> Outcome {
        if self.failures.is_empty() {
            Outcome::new(true, format!("{} ({} checks)", summary.into(), self.count))
        } else {
            Outcome::new(false, format!("{} of {} checks failed: {}", self.failures.len(), self.count, self.failures.join("; ")))
        }
    }
}

fn alpha05() -> Probability {
    Probability::new(0.05).unwrap()
}

fn table4_reproduction() -> Outcome {
    // (a, m, b, n, T1, critical, reject)
    let rows = [
        ("Davies1985 cases", 2.25, 16.0, 74.25, 40, 0.618, 0.319, true),
        ("Davies1985 controls", 9.0, 27.25, 132.5, 40, 0.704, 0.319, true),
        ("Grange1985 cases", 43.75, 65.75, 130.5, 40, 0.493, 0.319, true),
        ("Grange1985 controls", 48.5, 69.5, 125.0, 38, 0.451, 0.325, true),
        ("Davies1987 cases", 16.75, 39.75, 89.25, 15, 0.366, 0.470, false),
        ("Davies1987 controls", 26.25, 65.5, 114.75, 15, 0.113, 0.470, false),
    ];
    let mut c = Checks::default();
    for (name, a, m, b, n, t, crit, reject) in rows {
        let stat = t1_statistic(a, m, b).unwrap();
        c.check((stat - t).abs() <= 1e-3, || format!("{name}: T1 {stat:.4} vs {t}"));
        let cv = approx_critical(Scenario::S1, n).unwrap();
        c.check((cv - crit).abs() <= 1e-3, || format!("{name}: critical {cv:.4} vs {crit}"));
        let r = run_test(
            &fivenum_skew::SummaryRecord::s1(a, m, b, n),
            alpha05(),
            &CriticalValueSource::ApproxFormula,
        )
        .unwrap();
        c.check(r.reject == reject, || format!("{name}: verdict {}", r.verdict()));
    }
    c.finish("six arms match statistic, critical value and verdict")
}

fn approx_vs_table() -> Outcome {
    let mut worst = (0.0, Scenario::S1, 0);
    let mut over = Vec::new();
    for table in tables() {
        for row in &table.rows {
            let d = (approx_critical(table.scenario, row.n).unwrap() - row.value).abs();
            if d > worst.0 {
                worst = (d, table.scenario, row.n);
            }
            if d > 0.01 {
                over.push(format!("{} n={} ({d:.4})", table.scenario, row.n));
            }
        }
    }
    let detail = format!(
        "max |approx - table| = {:.4} at {} n={}; rows above 0.01: [{}]",
        worst.0,
        worst.1,
        worst.2,
        over.join(", ")
    );
    Outcome::new(worst.0 <= 0.01, detail)
}

fn monte_carlo_tables() -> Outcome {
    let mut c = Checks::default();
    let mut worst: f64 = 0.0;
    for (i, s) in Scenario::TESTABLE.into_iter().enumerate() {
        for (j, q) in [1u64, 5, 12, 25, 50, 100].into_iter().enumerate() {
            let n = 4 * q + 1;
            let seed = Seed(1000 + 10 * i as u64 + j as u64);
            let mc = mc_critical(s, n, 0.05, 100_000, seed).unwrap();
            let t = table_critical(s, n).unwrap();
            worst = worst.max((mc - t).abs());
            c.check((mc - t).abs() <= 0.01, || format!("{s} n={n}: mc {mc:.4} vs table {t}"));
        }
    }
    c.finish(format!("max deviation {worst:.4}"))
}

fn exact_density() -> Outcome {
    let mut c = Checks::default();
    for (kind, scenario) in [(StatisticKind::T1, Scenario::S1), (StatisticKind::T2, Scenario::S2)] {
        for n in [5u64, 21] {
            let mass = null_probability(kind, n, -1.0, 1.0).unwrap();
            c.check((mass - 1.0).abs() <= 1e-3, || format!("{kind:?} n={n}: mass {mass:.6}"));
            for t in [0.1, 0.4, 0.8] {
                let f = |t| null_density(&NullDensityQuery { kind, n, t }).unwrap();
                let (p, m) = (f(t), f(-t));
                c.check((p - m).abs() <= 1e-6, || format!("{kind:?} n={n} t={t}: {p} vs {m}"));
            }
            let q = null_quantile(kind, n, 0.025).unwrap();
            let table = table_critical(scenario, n).unwrap();
            c.check((q - table).abs() <= 0.006, || format!("{kind:?} n={n}: quantile {q:.4} vs table {table}"));
        }
    }
    c.finish("mass, symmetry and 0.025 quantiles")
}

fn type_one_error() -> Outcome {
    let mut c = Checks::default();
    let spec = ExperimentSpec { n_grid: vec![21, 101, 401], seed: Seed(31), ..ExperimentSpec::new(Experiment::TypeI) };
    let mut rates = Vec::new();
    for p in run_type1(&spec).unwrap() {
        rates.push(format!("{}@{}={:.4}", p.scenario, p.n, p.rate));
        c.check((0.044..=0.056).contains(&p.rate), || format!("{} n={}: {:.4}", p.scenario, p.n, p.rate));
    }
    let asym = ExperimentSpec {
        n_grid: vec![17],
        scenarios: vec![Scenario::S1],
        source: CriticalValueSource::Asymptotic,
        seed: Seed(32),
        ..ExperimentSpec::new(Experiment::TypeI)
    };
    let r = run_type1(&asym).unwrap()[0].rate;
    c.check((r - 0.057).abs() <= 0.004, || format!("asymptotic S1 n=17: {r:.4}"));
    c.finish(format!("{}; asymptotic S1@17={r:.4}", rates.join(" ")))
}

fn power_ordering() -> Outcome {
    let mut c = Checks::default();
    let mut notes = Vec::new();
    for (i, alt) in DistributionSpec::alternatives().into_iter().enumerate() {
        let spec = ExperimentSpec {
            n_grid: vec![201],
            seed: Seed(40 + i as u64),
            ..ExperimentSpec::new(Experiment::Power { alternative: alt })
        };
        let r = run_power(&spec).unwrap();
        let (s1, s2, s3) = (&r[0], &r[1], &r[2]);
        notes.push(format!("{} {:.3}/{:.3}/{:.3}", alt.name(), s1.rate, s2.rate, s3.rate));
        match alt {
            DistributionSpec::MixtureNormal { .. } => {
                c.check(s2.rate > s1.rate, || format!("mixture: S2 {} <= S1 {}", s2.rate, s1.rate));
            }
            _ => {
                let se = (s2.se.powi(2) + s3.se.powi(2)).sqrt();
                c.check(s3.rate >= s2.rate - 2.0 * se, || {
                    format!("{}: S3 {} < S2 {} - 2se", alt.name(), s3.rate, s2.rate)
                });
            }
        }
        if let DistributionSpec::LogNormal { .. } = alt {
            c.check(s1.rate > 0.99, || format!("log-normal S1 power {}", s1.rate));
        }
    }
    c.finish(format!("S1/S2/S3 at n=201: {}", notes.join(", ")))
}

fn table1_reproduction() -> Outcome {
    // (true mean, estimated mean, true SD, estimated SD)
    let printed = [(-0.79, -0.73, 0.61, 0.57), (0.80, 0.73, 0.60, 0.54), (1.65, 1.53, 2.09, 3.10), (0.80, 1.34, 2.09, 1.63)];
    let mut c = Checks::default();
    let mut notes = Vec::new();
    for (i, (dist, p)) in DistributionSpec::alternatives().into_iter().zip(printed).enumerate() {
        let spec = ExperimentSpec { seed: Seed(50 + i as u64), ..ExperimentSpec::new(Experiment::Table1 { distribution: dist }) };
        let r = run_table1(&spec).unwrap();
        let got = [r.true_mean.average, r.estimated_mean.average, r.true_sd.average, r.estimated_sd.average];
        let want = [p.0, p.1, p.2, p.3];
        notes.push(format!("{} {:.2}/{:.2}/{:.2}/{:.2}", dist.name(), got[0], got[1], got[2], got[3]));
        for (label, g, w) in ["true mean", "est mean", "true sd", "est sd"].iter().zip(got).zip(want).map(|((l, g), w)| (l, g, w)) {
            c.check((g - w).abs() <= 0.03, || format!("{} {label}: {g:.3} vs {w}", dist.name()));
        }
    }
    c.finish(notes.join(", "))
}

fn appendix_a() -> Outcome {
    let spec = ExperimentSpec { seed: Seed(60), ..ExperimentSpec::new(Experiment::AppendixA) };
    let r = run_appendix_a(&spec).unwrap();
    let mut c = Checks::default();
    c.check((r.type1 - 0.05).abs() <= 0.005, || format!("type I {:.4}", r.type1));
    c.check(r.power > 0.9, || format!("power {:.4}", r.power));
    let alt = r.alternative_theta1.average;
    c.check((alt + 1.3).abs() <= 0.05, || format!("alt mean {alt:.3}"));
    c.finish(format!("type I {:.4}, power {:.4}, alt mean of a+b-2m {alt:.3}", r.type1, r.power))
}

fn near(c: &mut Checks, what: &str, got: f64, want: f64, tol: f64) {
    c.check((got - want).abs() <= tol, || format!("{what}: {got:.2} vs {want} (tol {tol})"));
}

fn fmt_result(r: &MetaResult) -> String {
    format!("{:.2} [{:.2}, {:.2}] z={:.3}", r.pooled_md, r.ci_low, r.ci_high, r.z)
}

fn pipeline() -> Outcome {
    let studies = vitamin_d();
    let four = run_pipeline(&studies, &FlowOptions::default()).unwrap();
    let six = run_pipeline(&studies, &FlowOptions { force_include: true, ..Default::default() }).unwrap();
    let mut c = Checks::default();
    c.check(four.included().count() == 4, || "four studies included".into());
    near(&mut c, "FE pooled", four.fixed.pooled_md, -15.9, 1.5);
    near(&mut c, "FE ci_low", four.fixed.ci_low, -22.4, 2.0);
    near(&mut c, "FE ci_high", four.fixed.ci_high, -9.4, 2.0);
    near(&mut c, "RE pooled", four.random.pooled_md, -18.1, 1.5);
    near(&mut c, "RE ci_low", four.random.ci_low, -29.1, 2.0);
    near(&mut c, "RE ci_high", four.random.ci_high, -7.1, 2.0);
    c.check(six.included().count() == 6, || "six studies force-included".into());
    for (name, a, b) in [("FE", &four.fixed, &six.fixed), ("RE", &four.random, &six.random)] {
        c.check(b.z.abs() < a.z.abs(), || {
            format!("{name} six-study |z| {:.3} not below four-study |z| {:.3}", b.z.abs(), a.z.abs())
        });
    }
    c.finish(format!(
        "four: FE {} RE {}; six: FE {} RE {}",
        fmt_result(&four.fixed),
        fmt_result(&four.random),
        fmt_result(&six.fixed),
        fmt_result(&six.random)
    ))
}

fn property_suites() -> Outcome {
    let mut c = Checks::default();
    for (name, run) in support::all() {
        let r = run();
        c.check(r.is_ok(), || format!("{name}: {}", r.unwrap_err()));
    }
    c.finish(format!("{} cases per property", support::CASES))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    // Honour `cargo test -- --list` and filters the way the default harness does.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let filter = args.iter().find(|a| !a.starts_with('-'));

    let criteria: [Criterion; 10] = [
        ("table4-reproduction", table4_reproduction),
        ("approx-vs-exact-tables", approx_vs_table),
        ("monte-carlo-tables", monte_carlo_tables),
        ("exact-density", exact_density),
        ("type-one-error", type_one_error),
        ("power-ordering", power_ordering),
        ("table1-reproduction", table1_reproduction),
        ("appendix-a", appendix_a),
        ("meta-pipeline", pipeline),
        ("property-suites", property_suites),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in criteria {
        if filter.is_some_and(|p| !name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {name} [{secs:.1}s]: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
