use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pool_fixed, pool_random, Arm, ArmDecision, FlowDecision, MetaResult, StudyRecord, Verdict};
use crate::critical::CriticalValueSource;
use crate::error::Result;
use crate::moments::estimate_moments;
use crate::normal::Probability;
use crate::skew::run_test;
use crate::summary::SummaryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub alpha: Probability,
    pub source: CriticalValueSource,
    /// Keep studies whose data test as skewed, converting them anyway.
    #[serde(default)]
    pub force_include: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            alpha: Probability::new(0.05).expect("0.05 is a probability"),
            source: CriticalValueSource::ApproxFormula,
            force_include: false,
        }
    }
}

fn decide_arm(arm: Arm, summary: &SummaryRecord, opts: &FlowOptions) -> Result<ArmDecision> {
    summary.validate()?;
    let test = if summary.scenario.is_testable() {
        Some(run_test(summary, opts.alpha, &opts.source)?)
    } else {
        None
    };
    Ok(ArmDecision { arm, n: summary.n, test, moments: estimate_moments(summary)? })
}

/// Runs the flow chart on one study.
pub fn apply_flowchart_with(study: &StudyRecord, opts: &FlowOptions) -> Result<FlowDecision> {
    let cases = decide_arm(Arm::Cases, &study.cases, opts)?;
    let controls = decide_arm(Arm::Controls, &study.controls, opts)?;
    let rejected: Vec<&str> = [&cases, &controls]
        .into_iter()
        .filter(|d| d.test.as_ref().is_some_and(|t| t.reject))
        .map(|d| match d.arm {
            Arm::Cases => "cases",
            Arm::Controls => "controls",
        })
        .collect();
    let (verdict, forced) = if rejected.is_empty() {
        (Verdict::Included, false)
    } else if opts.force_include {
        (Verdict::Included, true)
    } else {
        let reason = format!("skewness test rejected normality in the {} arm", rejected.join(" and "));
        (Verdict::Excluded { reason }, false)
    };
    Ok(FlowDecision {
        study_id: study.id.clone(),
        label: study.label.clone(),
        cases,
        controls,
        verdict,
        forced,
    })
}

pub fn apply_flowchart(
    study: &StudyRecord,
    alpha: Probability,
    source: CriticalValueSource,
) -> Result<FlowDecision> {
    apply_flowchart_with(study, &FlowOptions { alpha, source, force_include: false })
}

/// Flow-chart decisions for every study plus both pooled models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaAnalysis {
    pub options: FlowOptions,
    pub decisions: Vec<FlowDecision>,
    pub fixed: MetaResult,
    pub random: MetaResult,
}

impl MetaAnalysis {
    pub fn included(&self) -> impl Iterator<Item = &FlowDecision> {
        self.decisions.iter().filter(|d| d.is_included())
    }

    pub fn excluded(&self) -> impl Iterator<Item = &FlowDecision> {
        self.decisions.iter().filter(|d| !d.is_included())
    }
}

/// Flow chart on every study, then fixed- and random-effects pooling of the
/// included ones.
pub fn run_pipeline(studies: &[StudyRecord], opts: &FlowOptions) -> Result<MetaAnalysis> {
    let decisions: Vec<FlowDecision> =
        studies.par_iter().map(|s| apply_flowchart_with(s, opts)).collect::<Result<_>>()?;
    let moments: Vec<_> = decisions.iter().filter_map(FlowDecision::study_moments).collect();
    Ok(MetaAnalysis {
        options: *opts,
        fixed: pool_fixed(&moments)?,
        random: pool_random(&moments)?,
        decisions,
    })
}
