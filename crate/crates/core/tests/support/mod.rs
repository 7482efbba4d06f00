//! Randomized invariant checks shared by the property tests and the
//! acceptance run.

use fivenum_skew::meta::{pool_fixed, pool_random, ArmMoments, StudyMoments};
use fivenum_skew::montecarlo::{replicate, with_workers};
use fivenum_skew::sampling::sample;
use fivenum_skew::skew::rejects;
use fivenum_skew::{
    estimate_mean, estimate_sd, t1_statistic, t2_statistic, t3_statistic, DistributionSpec, Scenario, Seed,
    SummaryRecord,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 1000;

/// An ordered five-number summary with positive range and IQR.
#[derive(Debug, Clone, Copy)]
pub struct Five {
    pub a: f64,
    pub q1: f64,
    pub m: f64,
    pub q3: f64,
    pub b: f64,
}

pub fn five() -> impl Strategy<Value = Five> {
    (-100.0..100.0f64, 0.0..50.0f64, 0.0..50.0f64, 0.0..50.0f64, 0.0..50.0f64)
        .prop_filter("positive range and IQR", |&(_, g1, g2, g3, g4)| g2 + g3 > 1e-3 && g1 + g4 >= 0.0)
        .prop_map(|(a, g1, g2, g3, g4)| Five {
            a,
            q1: a + g1,
            m: a + g1 + g2,
            q3: a + g1 + g2 + g3,
            b: a + g1 + g2 + g3 + g4,
        })
}

impl Five {
    fn map(self, f: impl Fn(f64) -> f64) -> Five {
        Five { a: f(self.a), q1: f(self.q1), m: f(self.m), q3: f(self.q3), b: f(self.b) }
    }

    fn reflect(self) -> Five {
        Five { a: -self.b, q1: -self.q3, m: -self.m, q3: -self.q1, b: -self.a }
    }

    fn max_abs(self) -> f64 {
        [self.a, self.q1, self.m, self.q3, self.b].iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    fn stats(self, n: u64) -> (f64, f64, f64) {
        (
            t1_statistic(self.a, self.m, self.b).unwrap(),
            t2_statistic(self.q1, self.m, self.q3).unwrap(),
            t3_statistic(self.a, self.q1, self.m, self.q3, self.b, n).unwrap(),
        )
    }
}

/// Rounding allowance for a ratio of differences of values of size `scale`
/// over a denominator of size `denom`.
fn rounding(scale: f64, denom: f64) -> f64 {
    64.0 * f64::EPSILON * (1.0 + scale / denom)
}

fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn location_scale_equivariance() -> Result<(), String> {
    run((five(), -1e3..1e3f64, 1e-2..1e2f64, 5u64..500), |(x, c, d, n)| {
        let y = x.map(|v| c + d * v);
        let (s1, s2, s3) = x.stats(n);
        let (u1, u2, u3) = y.stats(n);
        let tol = rounding(y.max_abs(), d * (x.q3 - x.q1).min(x.b - x.a));
        prop_assert!((s1 - u1).abs() <= tol, "T1 {s1} vs {u1}");
        prop_assert!((s2 - u2).abs() <= tol, "T2 {s2} vs {u2}");
        prop_assert!((s3 - u3).abs() <= 4.0 * tol, "T3 {s3} vs {u3}");

        let s3x = SummaryRecord::s3(x.a, x.q1, x.m, x.q3, x.b, n);
        let s3y = SummaryRecord::s3(y.a, y.q1, y.m, y.q3, y.b, n);
        let mean_x = estimate_mean(&s3x).unwrap();
        let mean_y = estimate_mean(&s3y).unwrap();
        let scale = y.max_abs();
        prop_assert!((mean_y - (c + d * mean_x)).abs() <= 64.0 * f64::EPSILON * (scale + c.abs()));
        let sd_x = estimate_sd(&s3x).unwrap();
        let sd_y = estimate_sd(&s3y).unwrap();
        prop_assert!((sd_y - d * sd_x).abs() <= rounding(scale, d * sd_x) * d * sd_x);
        Ok(())
    })
}

pub fn reflection_antisymmetry() -> Result<(), String> {
    run((five(), 5u64..500), |(x, n)| {
        let (s1, s2, s3) = x.stats(n);
        let (r1, r2, r3) = x.reflect().stats(n);
        prop_assert_eq!(r1, -s1);
        prop_assert_eq!(r2, -s2);
        prop_assert_eq!(r3, s3);
        Ok(())
    })
}

pub fn statistics_are_bounded() -> Result<(), String> {
    run((five(), 5u64..500), |(x, n)| {
        let (s1, s2, _) = x.stats(n);
        prop_assert!(s1.abs() <= 1.0 && s2.abs() <= 1.0);
        prop_assert_eq!(s1.abs() == 1.0, x.m == x.a || x.m == x.b);
        prop_assert_eq!(s2.abs() == 1.0, x.m == x.q1 || x.m == x.q3);
        // Endpoints reached when the median sits on one.
        let on_edge = Five { m: x.q1, ..x };
        prop_assert_eq!(t2_statistic(on_edge.q1, on_edge.m, on_edge.q3).unwrap(), 1.0);
        Ok(())
    })
}

pub fn verdict_consistency() -> Result<(), String> {
    run((-1.0..1.0f64, 0.0..1.0f64), |(t, c)| {
        prop_assert_eq!(rejects(Scenario::S1, t, c), t.abs() > c);
        prop_assert_eq!(rejects(Scenario::S2, t, c), t.abs() > c);
        prop_assert_eq!(rejects(Scenario::S3, t.abs(), c), t.abs() > c);
        Ok(())
    })
}

fn distribution() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (-5.0..5.0f64, 0.1..3.0f64).prop_map(|(mu, sigma)| DistributionSpec::Normal { mu, sigma }),
        (-10.0..10.0f64).prop_map(|alpha| DistributionSpec::SkewNormal { xi: 0.0, omega: 1.0, alpha }),
        (0.1..2.0f64).prop_map(|sigma| DistributionSpec::LogNormal { mu: 0.0, sigma }),
        (0.05..0.95f64).prop_map(|p| DistributionSpec::MixtureNormal { p, mu1: -2.0, sigma1: 1.0, mu2: 2.0, sigma2: 1.0 }),
    ]
}

pub fn seed_determinism() -> Result<(), String> {
    run((distribution(), 1usize..300, any::<u64>()), |(dist, n, seed)| {
        let x = sample(&dist, n, Seed(seed)).unwrap();
        let y = sample(&dist, n, Seed(seed)).unwrap();
        prop_assert_eq!(&x, &y);
        let z = sample(&dist, n, Seed(seed.wrapping_add(1))).unwrap();
        prop_assert_ne!(x, z);
        Ok(())
    })
}

pub fn worker_count_invariance() -> Result<(), String> {
    run((1u64..10_000, any::<u64>(), 2usize..6), |(reps, seed, workers)| {
        let draw = || replicate(reps, Seed(seed), |s| s.std_normal());
        let one = with_workers(1, draw).unwrap();
        let many = with_workers(workers, draw).unwrap();
        prop_assert_eq!(one.len() as u64, reps);
        prop_assert_eq!(one, many);
        Ok(())
    })
}

fn study() -> impl Strategy<Value = StudyMoments> {
    (-50.0..50.0f64, 1.0..30.0f64, 5u64..200, -50.0..50.0f64, 1.0..30.0f64, 5u64..200).prop_map(
        |(mc, sc, nc, mt, st, nt)| StudyMoments {
            id: String::new(),
            cases: ArmMoments { mean: mc, sd: sc, n: nc },
            controls: ArmMoments { mean: mt, sd: st, n: nt },
        },
    )
}

pub fn pooling_invariants() -> Result<(), String> {
    run(prop::collection::vec(study(), 1..12), |studies| {
        let fe = pool_fixed(&studies).unwrap();
        let re = pool_random(&studies).unwrap();
        let (lo, hi) = studies.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s.md()), h.max(s.md())));
        let slack = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        prop_assert!(fe.pooled_md >= lo - slack && fe.pooled_md <= hi + slack);
        prop_assert!(fe.ci_low <= fe.pooled_md && fe.pooled_md <= fe.ci_high);
        prop_assert!(re.ci_high - re.ci_low >= (fe.ci_high - fe.ci_low) * (1.0 - 1e-12));
        prop_assert!(re.tau2 >= 0.0 && (0.0..=1.0).contains(&re.i2));
        for r in [&fe, &re] {
            let total: f64 = r.per_study.iter().map(|w| w.weight).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
        for (w, s) in fe.per_study.iter().zip(&studies) {
            let expected = s.se().powi(-2) / studies.iter().map(|t| t.se().powi(-2)).sum::<f64>();
            prop_assert!((w.weight - expected).abs() < 1e-12);
        }
        Ok(())
    })
}

pub type Suite = (&'static str, fn() -> Result<(), String>);

#[allow(dead_code)]
pub fn all() -> Vec<Suite> {
    vec![
        ("location-scale equivariance", location_scale_equivariance),
        ("reflection antisymmetry", reflection_antisymmetry),
        ("|T1|, |T2| <= 1", statistics_are_bounded),
        ("verdict consistency", verdict_consistency),
        ("seed determinism", seed_determinism),
        ("worker-count invariance", worker_count_invariance),
        ("pooling invariants", pooling_invariants),
    ]
}
