//! Die-area downscaling what-ifs and technology-node scaling.

use serde::{Deserialize, Serialize};

use crate::compare::improvement_factors;
use crate::energy::{assess_with_gross, AssessmentPolicy, ChipAssessment};
use crate::geometry::gross_dies_per_wafer;
use crate::model::{ChipSpec, PhaseEnergies, ScalingParams, ScenarioChip};
use crate::{Error, Result};

/// How the gross die count follows a change of die area.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrossScaling {
    /// Gross dies scale with the inverse area ratio.
    #[default]
    AreaRatio,
    /// Gross dies are recomputed from the wafer geometry, edge loss included.
    FullGeometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResult {
    pub factor: f64,
    /// The scaled scenario entry; feed it back with `gross_dies_real` to chain
    /// what-ifs.
    pub entry: ScenarioChip,
    pub gross_dies_real: f64,
    pub assessment: ChipAssessment,
    pub improvement: f64,
    pub improvement_with_cooling: f64,
}

impl WhatIfResult {
    pub fn yield_fraction(&self) -> f64 {
        self.assessment.yield_fraction
    }

    pub fn phases(&self) -> &PhaseEnergies {
        &self.assessment.phases
    }
}

/// Shrinks the die area of `entry` by `factor` at unchanged defect density.
pub fn downscale_whatif(
    entry: &ScenarioChip,
    policy: &AssessmentPolicy,
    factor: f64,
    baseline: &PhaseEnergies,
    scaling: GrossScaling,
) -> Result<WhatIfResult> {
    let gross = gross_dies_per_wafer(entry.wafer.diameter_mm, entry.chip.die_area_cm2 * 100.0)?;
    downscale_from(entry, policy, gross.gross_real, factor, baseline, scaling)
}

/// [`downscale_whatif`] starting from an explicit gross die count for `entry`.
pub fn downscale_from(
    entry: &ScenarioChip,
    policy: &AssessmentPolicy,
    gross_real: f64,
    factor: f64,
    baseline: &PhaseEnergies,
    scaling: GrossScaling,
) -> Result<WhatIfResult> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::Domain(format!("downscale factor must be > 0, got {factor}")));
    }
    let mut scaled = entry.clone();
    scaled.chip.die_area_cm2 = entry.chip.die_area_cm2 / factor;
    scaled.chip.assembly_area_cm2 = entry.chip.assembly_area_cm2.map(|a| a / factor);

    let gross_scaled = match scaling {
        GrossScaling::AreaRatio => gross_real * factor,
        GrossScaling::FullGeometry => {
            gross_dies_per_wafer(scaled.wafer.diameter_mm, scaled.chip.die_area_cm2 * 100.0)?.gross_real
        }
    };
    let assessment = assess_with_gross(&scaled, policy, gross_scaled)?;
    let (improvement, improvement_with_cooling) = improvement_factors(baseline, &assessment.phases)?;
    Ok(WhatIfResult {
        factor,
        entry: scaled,
        gross_dies_real: gross_scaled,
        assessment,
        improvement,
        improvement_with_cooling,
    })
}

fn strip_node_suffix(name: &str) -> &str {
    match name.rsplit_once(" @ ") {
        Some((base, node)) if node.ends_with("nm") => base,
        _ => name,
    }
}

/// Moves `chip` from `from_node_nm` to `to_node_nm` by power laws in the node
/// ratio `to / from`.
pub fn scale_to_node(chip: &ChipSpec, from_node_nm: f64, to_node_nm: f64, params: &ScalingParams) -> Result<ChipSpec> {
    if !(from_node_nm.is_finite() && from_node_nm > 0.0 && to_node_nm.is_finite() && to_node_nm > 0.0) {
        return Err(Error::Domain(format!(
            "technology nodes must be > 0, got {from_node_nm} and {to_node_nm}"
        )));
    }
    if from_node_nm == to_node_nm {
        return Ok(chip.clone());
    }
    let r = to_node_nm / from_node_nm;
    let area = r.powf(params.area_exponent);
    let mut out = chip.clone();
    out.name = format!("{} @ {}nm", strip_node_suffix(&chip.name), to_node_nm);
    out.die_area_cm2 *= area;
    out.assembly_area_cm2 = chip.assembly_area_cm2.map(|a| a * area);
    out.clock_frequency_hz *= r.powf(params.frequency_exponent);
    out.operating_power_w *= r.powf(params.power_exponent);
    Ok(out)
}
