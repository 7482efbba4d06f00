use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::{MetaResult, StudyMoments, StudyWeight};
use crate::error::{Error, Result};
use crate::normal::{phi_inv, phi_upper};

/// Name reported in [`MetaResult::tau2_estimator`].
pub const TAU2_ESTIMATOR: &str = "DerSimonian-Laird";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    FixedEffect,
    RandomEffects,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::FixedEffect => "fixed-effect",
            Model::RandomEffects => "random-effects",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed-effect" | "fixed" | "fe" => Ok(Model::FixedEffect),
            "random-effects" | "random" | "re" => Ok(Model::RandomEffects),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

fn effects(studies: &[StudyMoments]) -> Result<Vec<(f64, f64)>> {
    if studies.is_empty() {
        return Err(Error::NoStudies);
    }
    studies
        .iter()
        .map(|s| {
            let se = s.se();
            if !(s.md().is_finite() && se.is_finite() && se > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "study {}: needs a finite mean difference and a positive standard error",
                    s.id
                )));
            }
            Ok((s.md(), se))
        })
        .collect()
}

fn weighted(
    model: Model,
    studies: &[StudyMoments],
    effects: &[(f64, f64)],
    tau2: f64,
    q_stat: f64,
) -> MetaResult {
    let w: Vec<f64> = effects.iter().map(|&(_, se)| 1.0 / (se * se + tau2)).collect();
    let sw: f64 = w.iter().sum();
    let pooled = w.iter().zip(effects).map(|(wi, (md, _))| wi * md).sum::<f64>() / sw;
    let se = sw.sqrt().recip();
    let half = phi_inv(0.975) * se;
    let z = pooled / se;
    let df = effects.len() as u64 - 1;
    let i2 = if q_stat > 0.0 { ((q_stat - df as f64) / q_stat).max(0.0) } else { 0.0 };
    MetaResult {
        model,
        pooled_md: pooled,
        se,
        ci_low: pooled - half,
        ci_high: pooled + half,
        z,
        p_value: 2.0 * phi_upper(z.abs()),
        per_study: studies
            .iter()
            .zip(effects)
            .zip(&w)
            .map(|((s, &(md, se)), wi)| StudyWeight { id: s.id.clone(), md, se, weight: wi / sw })
            .collect(),
        q_stat,
        df,
        tau2,
        i2,
        tau2_estimator: (model == Model::RandomEffects).then(|| TAU2_ESTIMATOR.to_string()),
    }
}

fn cochran_q(effects: &[(f64, f64)]) -> (f64, f64, f64) {
    let w: Vec<f64> = effects.iter().map(|&(_, se)| 1.0 / (se * se)).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|x| x * x).sum();
    let fe = w.iter().zip(effects).map(|(wi, (md, _))| wi * md).sum::<f64>() / sw;
    let q = w.iter().zip(effects).map(|(wi, (md, _))| wi * (md - fe).powi(2)).sum();
    (q, sw, sw2)
}

/// Inverse-variance fixed-effect pooling.
pub fn pool_fixed(studies: &[StudyMoments]) -> Result<MetaResult> {
    let eff = effects(studies)?;
    let (q, _, _) = cochran_q(&eff);
    Ok(weighted(Model::FixedEffect, studies, &eff, 0.0, q))
}

/// DerSimonian–Laird random-effects pooling, `τ²` truncated at zero.
pub fn pool_random(studies: &[StudyMoments]) -> Result<MetaResult> {
    let eff = effects(studies)?;
    let (q, sw, sw2) = cochran_q(&eff);
    let k = eff.len() as f64;
    let tau2 = if eff.len() < 2 { 0.0 } else { ((q - (k - 1.0)) / (sw - sw2 / sw)).max(0.0) };
    Ok(weighted(Model::RandomEffects, studies, &eff, tau2, q))
}

pub fn pool(model: Model, studies: &[StudyMoments]) -> Result<MetaResult> {
    match model {
        Model::FixedEffect => pool_fixed(studies),
        Model::RandomEffects => pool_random(studies),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta::ArmMoments;

    fn study(id: &str, mc: f64, sc: f64, nc: u64, mt: f64, st: f64, nt: u64) -> StudyMoments {
        StudyMoments {
            id: id.into(),
            cases: ArmMoments { mean: mc, sd: sc, n: nc },
            controls: ArmMoments { mean: mt, sd: st, n: nt },
        }
    }

    #[test]
    fn single_study_is_its_own_estimate() {
        let s = study("x", 10.0, 4.0, 16, 12.0, 3.0, 9);
        let se = (1.0f64 + 1.0).sqrt();
        for r in [pool_fixed(std::slice::from_ref(&s)).unwrap(), pool_random(std::slice::from_ref(&s)).unwrap()] {
            assert!((r.pooled_md + 2.0).abs() < 1e-12);
            assert!((r.se - se).abs() < 1e-12);
            assert!((r.ci_low - (-2.0 - 1.959964 * se)).abs() < 1e-5);
            assert_eq!(r.tau2, 0.0);
            assert_eq!(r.per_study[0].weight, 1.0);
        }
    }

    #[test]
    fn duplicated_study_narrows_by_root_two() {
        let s = study("x", 10.0, 4.0, 16, 12.0, 3.0, 9);
        let one = pool_fixed(std::slice::from_ref(&s)).unwrap();
        let two = pool_fixed(&[s.clone(), s.clone()]).unwrap();
        assert!((two.pooled_md - one.pooled_md).abs() < 1e-12);
        let ratio = (two.ci_high - two.ci_low) / (one.ci_high - one.ci_low);
        assert!((ratio - 0.5f64.sqrt()).abs() < 1e-12);
        let re = pool_random(&[s.clone(), s]).unwrap();
        assert_eq!(re.tau2, 0.0);
        assert!((re.pooled_md - two.pooled_md).abs() < 1e-12);
        assert!((re.ci_low - two.ci_low).abs() < 1e-12);
    }

    #[test]
    fn dersimonian_laird_by_hand() {
        // Two studies with se = 1 and md = 0, 4: w = 1, Q = 8, C = 2 - 1 = 1,
        // tau² = (8 - 1) / 1 = 7, random weights 1/8 each.
        let a = StudyMoments { id: "a".into(), cases: ArmMoments { mean: 0.0, sd: 1.0, n: 2 }, controls: ArmMoments { mean: 0.0, sd: 1.0, n: 2 } };
        let b = StudyMoments { id: "b".into(), cases: ArmMoments { mean: 4.0, sd: 1.0, n: 2 }, controls: ArmMoments { mean: 0.0, sd: 1.0, n: 2 } };
        let re = pool_random(&[a.clone(), b.clone()]).unwrap();
        assert!((re.q_stat - 8.0).abs() < 1e-12);
        assert!((re.tau2 - 7.0).abs() < 1e-12);
        assert!((re.pooled_md - 2.0).abs() < 1e-12);
        assert!((re.se - 2.0).abs() < 1e-12);
        assert!((re.i2 - 7.0 / 8.0).abs() < 1e-12);
        assert_eq!(re.tau2_estimator.as_deref(), Some(TAU2_ESTIMATOR));
        let fe = pool_fixed(&[a, b]).unwrap();
        assert!(fe.tau2_estimator.is_none());
        assert!((fe.se - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(pool_fixed(&[]), Err(Error::NoStudies));
        assert_eq!(pool_random(&[]), Err(Error::NoStudies));
        let bad = study("z", 1.0, 0.0, 5, 1.0, 0.0, 5);
        assert!(pool_fixed(&[bad]).is_err());
    }

    #[test]
    fn model_parsing() {
        assert_eq!("fe".parse::<Model>().unwrap(), Model::FixedEffect);
        assert_eq!("random-effects".parse::<Model>().unwrap(), Model::RandomEffects);
        assert!("x".parse::<Model>().is_err());
    }
}
