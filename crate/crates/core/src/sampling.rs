//! Seeded samplers for the null (normal) and the four skewed alternatives.
//!
//! All randomness flows through [`SampleStream`], a ChaCha8 generator. A
//! `(seed, substream)` pair fully determines the stream, which is what lets the
//! Monte Carlo code split replications into blocks without the result
//! depending on how many threads process them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::normal::half_normal_mean;

/// Seed for every stochastic routine. Identical seeds give identical streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Caller-owned random stream.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: Seed) -> Self {
        Self::substream(seed, 0)
    }

    /// Independent stream number `index` under `seed`.
    pub fn substream(seed: Seed, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
        rng.set_stream(index);
        SampleStream { rng }
    }

    #[inline]
    pub fn std_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn draw(&mut self, dist: &DistributionSpec) -> f64 {
        match *dist {
            DistributionSpec::Normal { mu, sigma } => mu + sigma * self.std_normal(),
            DistributionSpec::SkewNormal { xi, omega, alpha } => {
                let delta = alpha / (1.0 + alpha * alpha).sqrt();
                let u = self.std_normal().abs();
                let v = self.std_normal();
                xi + omega * (delta * u + (1.0 - delta * delta).sqrt() * v)
            }
            DistributionSpec::HalfNormal { mu, sigma } => mu + sigma * self.std_normal().abs(),
            DistributionSpec::LogNormal { mu, sigma } => (mu + sigma * self.std_normal()).exp(),
            DistributionSpec::MixtureNormal { p, mu1, sigma1, mu2, sigma2 } => {
                if self.uniform() < p {
                    mu1 + sigma1 * self.std_normal()
                } else {
                    mu2 + sigma2 * self.std_normal()
                }
            }
        }
    }

    /// Fills `out` with i.i.d. draws from `dist`.
    pub fn fill(&mut self, dist: &DistributionSpec, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.draw(dist);
        }
    }
}

/// Data-generating distributions used by the simulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionSpec {
    Normal { mu: f64, sigma: f64 },
    SkewNormal { xi: f64, omega: f64, alpha: f64 },
    HalfNormal { mu: f64, sigma: f64 },
    LogNormal { mu: f64, sigma: f64 },
    MixtureNormal { p: f64, mu1: f64, sigma1: f64, mu2: f64, sigma2: f64 },
}

impl DistributionSpec {
    pub const STANDARD_NORMAL: DistributionSpec = DistributionSpec::Normal { mu: 0.0, sigma: 1.0 };

    /// The four skewed alternatives: Skew-normal(0,1,-10), Half-normal(0,1),
    /// Log-normal(0,1) and 0.3·N(-2,1) + 0.7·N(2,1).
    pub fn alternatives() -> [DistributionSpec; 4] {
        [
            DistributionSpec::SkewNormal { xi: 0.0, omega: 1.0, alpha: -10.0 },
            DistributionSpec::HalfNormal { mu: 0.0, sigma: 1.0 },
            DistributionSpec::LogNormal { mu: 0.0, sigma: 1.0 },
            DistributionSpec::MixtureNormal { p: 0.3, mu1: -2.0, sigma1: 1.0, mu2: 2.0, sigma2: 1.0 },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::Normal { .. } => "normal",
            DistributionSpec::SkewNormal { .. } => "skew-normal",
            DistributionSpec::HalfNormal { .. } => "half-normal",
            DistributionSpec::LogNormal { .. } => "log-normal",
            DistributionSpec::MixtureNormal { .. } => "mixture-normal",
        }
    }

    pub fn is_unimodal(&self) -> bool {
        !matches!(self, DistributionSpec::MixtureNormal { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{}: {what}", self.name())));
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            DistributionSpec::Normal { mu, sigma }
            | DistributionSpec::HalfNormal { mu, sigma }
            | DistributionSpec::LogNormal { mu, sigma } => {
                if !finite(&[mu, sigma]) {
                    return bad("parameters must be finite");
                }
                if sigma <= 0.0 {
                    return bad("scale must be positive");
                }
            }
            DistributionSpec::SkewNormal { xi, omega, alpha } => {
                if !finite(&[xi, omega, alpha]) {
                    return bad("parameters must be finite");
                }
                if omega <= 0.0 {
                    return bad("scale must be positive");
                }
            }
            DistributionSpec::MixtureNormal { p, mu1, sigma1, mu2, sigma2 } => {
                if !finite(&[p, mu1, sigma1, mu2, sigma2]) {
                    return bad("parameters must be finite");
                }
                if !(p > 0.0 && p < 1.0) {
                    return bad("mixture weight must lie in (0, 1)");
                }
                if sigma1 <= 0.0 || sigma2 <= 0.0 {
                    return bad("scale must be positive");
                }
            }
        }
        Ok(())
    }

    /// Population mean.
    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Normal { mu, .. } => mu,
            DistributionSpec::SkewNormal { xi, omega, alpha } => {
                let delta = alpha / (1.0 + alpha * alpha).sqrt();
                xi + omega * delta * half_normal_mean()
            }
            DistributionSpec::HalfNormal { mu, sigma } => mu + sigma * half_normal_mean(),
            DistributionSpec::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            DistributionSpec::MixtureNormal { p, mu1, mu2, .. } => p * mu1 + (1.0 - p) * mu2,
        }
    }

    /// Population standard deviation.
    pub fn sd(&self) -> f64 {
        let two_over_pi = 2.0 / std::f64::consts::PI;
        let var = match *self {
            DistributionSpec::Normal { sigma, .. } => sigma * sigma,
            DistributionSpec::SkewNormal { omega, alpha, .. } => {
                let delta2 = alpha * alpha / (1.0 + alpha * alpha);
                omega * omega * (1.0 - two_over_pi * delta2)
            }
            DistributionSpec::HalfNormal { sigma, .. } => sigma * sigma * (1.0 - two_over_pi),
            DistributionSpec::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                (s2.exp() - 1.0) * (2.0 * mu + s2).exp()
            }
            DistributionSpec::MixtureNormal { p, mu1, sigma1, mu2, sigma2 } => {
                let m = self.mean();
                p * (sigma1 * sigma1 + mu1 * mu1) + (1.0 - p) * (sigma2 * sigma2 + mu2 * mu2) - m * m
            }
        };
        var.sqrt()
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Normal { mu, sigma } => write!(f, "normal({mu},{sigma})"),
            DistributionSpec::SkewNormal { xi, omega, alpha } => {
                write!(f, "skew-normal({xi},{omega},{alpha})")
            }
            DistributionSpec::HalfNormal { mu, sigma } => write!(f, "half-normal({mu},{sigma})"),
            DistributionSpec::LogNormal { mu, sigma } => write!(f, "log-normal({mu},{sigma})"),
            DistributionSpec::MixtureNormal { p, mu1, sigma1, mu2, sigma2 } => {
                write!(f, "mixture-normal({p},{mu1},{sigma1},{mu2},{sigma2})")
            }
        }
    }
}

/// Parses `name` (the default alternative parameters) or `name(p1,p2,...)`.
impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..].strip_suffix(')').ok_or_else(|| {
                    Error::InvalidArgument(format!("unbalanced parentheses in {s:?}"))
                })?;
                let params = inner
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::InvalidArgument(format!("bad parameter in {s:?}: {e}")))?;
                (&s[..i], Some(params))
            }
            None => (s, None),
        };
        let name = name.trim().to_ascii_lowercase().replace('_', "-");
        let arity = |k: usize| -> Result<Option<&Vec<f64>>> {
            match &params {
                Some(p) if p.len() != k => Err(Error::InvalidArgument(format!(
                    "{name} takes {k} parameters, got {}",
                    p.len()
                ))),
                Some(p) => Ok(Some(p)),
                None => Ok(None),
            }
        };
        let [skew, half, log, mix] = DistributionSpec::alternatives();
        let spec = match name.as_str() {
            "normal" => match arity(2)? {
                Some(p) => DistributionSpec::Normal { mu: p[0], sigma: p[1] },
                None => DistributionSpec::STANDARD_NORMAL,
            },
            "skew-normal" | "skewnormal" => match arity(3)? {
                Some(p) => DistributionSpec::SkewNormal { xi: p[0], omega: p[1], alpha: p[2] },
                None => skew,
            },
            "half-normal" | "halfnormal" => match arity(2)? {
                Some(p) => DistributionSpec::HalfNormal { mu: p[0], sigma: p[1] },
                None => half,
            },
            "log-normal" | "lognormal" => match arity(2)? {
                Some(p) => DistributionSpec::LogNormal { mu: p[0], sigma: p[1] },
                None => log,
            },
            "mixture-normal" | "mixture" => match arity(5)? {
                Some(p) => DistributionSpec::MixtureNormal {
                    p: p[0],
                    mu1: p[1],
                    sigma1: p[2],
                    mu2: p[3],
                    sigma2: p[4],
                },
                None => mix,
            },
            other => {
                return Err(Error::InvalidArgument(format!("unknown distribution {other:?}")))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Draws `n` i.i.d. values from `dist` using a fresh stream for `seed`.
pub fn sample(dist: &DistributionSpec, n: usize, seed: Seed) -> Result<Vec<f64>> {
    dist.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let mut stream = SampleStream::new(seed);
    let mut out = vec![0.0; n];
    stream.fill(dist, &mut out);
    Ok(out)
}
