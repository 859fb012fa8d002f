//! Pairwise technology comparison.

use serde::{Deserialize, Serialize};

use crate::energy::ChipAssessment;
use crate::model::PhaseEnergies;
use crate::{Error, Result};

/// How `candidate` fares against `baseline`.
///
/// Improvement factors are `baseline / candidate` totals; component ratios are
/// `candidate / baseline` and are `None` when either side is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub baseline: String,
    pub candidate: String,
    pub improvement: f64,
    pub improvement_with_cooling: f64,
    pub manufacturing_ratio: Option<f64>,
    pub assembly_ratio: Option<f64>,
    pub use_ratio: Option<f64>,
    pub use_with_cooling_ratio: Option<f64>,
    pub area_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub chips: Vec<ChipAssessment>,
    /// Every ordered pair of distinct chips, baseline-major.
    pub pairs: Vec<PairwiseComparison>,
}

impl ComparisonReport {
    pub fn pair(&self, baseline: &str, candidate: &str) -> Option<&PairwiseComparison> {
        self.pairs
            .iter()
            .find(|p| p.baseline == baseline && p.candidate == candidate)
    }

    /// The chip every other one is compared against in rendered reports.
    pub fn baseline(&self) -> Option<&ChipAssessment> {
        self.chips.first()
    }
}

/// Improvement of `candidate` over `baseline`: `(without cooling, with cooling)`.
pub fn improvement_factors(baseline: &PhaseEnergies, candidate: &PhaseEnergies) -> Result<(f64, f64)> {
    let (cand_plain, cand_full) = (candidate.without_cooling().wh(), candidate.total.wh());
    if !(cand_plain > 0.0 && cand_full > 0.0) {
        return Err(Error::Singular(format!(
            "candidate total is zero ({cand_plain} Wh without cooling, {cand_full} Wh with)"
        )));
    }
    Ok((baseline.without_cooling().wh() / cand_plain, baseline.total.wh() / cand_full))
}

fn ratio(candidate: f64, baseline: f64) -> Option<f64> {
    let r = candidate / baseline;
    (r.is_finite() && r > 0.0).then_some(r)
}

fn pairwise(b: &ChipAssessment, c: &ChipAssessment) -> Result<PairwiseComparison> {
    let (improvement, improvement_with_cooling) = improvement_factors(&b.phases, &c.phases)?;
    let (bp, cp) = (&b.phases, &c.phases);
    Ok(PairwiseComparison {
        baseline: b.name.clone(),
        candidate: c.name.clone(),
        improvement,
        improvement_with_cooling,
        manufacturing_ratio: ratio(cp.manufacturing.wh(), bp.manufacturing.wh()),
        assembly_ratio: ratio(cp.assembly.wh(), bp.assembly.wh()),
        use_ratio: ratio(cp.use_phase.wh(), bp.use_phase.wh()),
        use_with_cooling_ratio: ratio(cp.use_with_cooling().wh(), bp.use_with_cooling().wh()),
        area_ratio: ratio(c.die_area_cm2, b.die_area_cm2),
    })
}

/// Compares every ordered pair of assessments.
pub fn compare(assessments: Vec<ChipAssessment>) -> Result<ComparisonReport> {
    if assessments.len() < 2 {
        return Err(Error::Domain(format!(
            "comparison needs at least two assessments, got {}",
            assessments.len()
        )));
    }
    if let Some(a) = assessments.iter().find(|a| !(a.phases.total.wh() > 0.0)) {
        return Err(Error::Singular(format!("`{}` has a zero total", a.name)));
    }
    let mut pairs = Vec::with_capacity(assessments.len() * (assessments.len() - 1));
    for (i, b) in assessments.iter().enumerate() {
        for (j, c) in assessments.iter().enumerate() {
            if i != j {
                pairs.push(pairwise(b, c)?);
            }
        }
    }
    Ok(ComparisonReport { chips: assessments, pairs })
}
