//! Per-phase energy accounting for a single chip.

use serde::{Deserialize, Serialize};

use crate::geometry::{gross_dies_per_wafer, DieCount};
use crate::model::{ChipSpec, PhaseEnergies, ProcessInventory, ReplacementPolicy, Scenario, ScenarioChip};
use crate::units::Energy;
use crate::yield_model::yield_fraction;
use crate::{Error, Result};

/// Scenario-wide settings that apply to every chip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssessmentPolicy {
    pub replacement_policy: ReplacementPolicy,
    pub service_period_years: f64,
    pub assembly_coefficient_kwh_per_cm2: f64,
    pub hours_per_year: f64,
}

impl AssessmentPolicy {
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        Ok(Self {
            replacement_policy: s.replacement_policy,
            service_period_years: s
                .service_period_years
                .ok_or_else(|| Error::Unresolved("service_period_years".into()))?,
            assembly_coefficient_kwh_per_cm2: s.assembly_coefficient_kwh_per_cm2,
            hours_per_year: s.hours_per_year,
        })
    }
}

/// Everything computed for one chip of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipAssessment {
    pub name: String,
    pub die_area_cm2: f64,
    pub yield_fraction: f64,
    pub dies: DieCount,
    /// Devices consumed over the assessed period (fractional).
    pub replacements: f64,
    pub service_years: f64,
    pub phases: PhaseEnergies,
}

pub fn wafer_manufacturing_energy(inventory: &ProcessInventory) -> Energy {
    inventory.total_energy()
}

/// Wafer energy amortized over the expected functional dies.
pub fn manufacturing_energy_per_die(wafer_energy: Energy, gross_real: f64, yield_fraction: f64) -> Result<Energy> {
    let functional = gross_real * yield_fraction;
    if !(functional > 0.0) {
        return Err(Error::Singular(format!(
            "no functional dies (gross {gross_real}, yield {yield_fraction})"
        )));
    }
    Ok(Energy::from_wh(wafer_energy.wh() / functional))
}

pub fn assembly_energy(assembly_area_cm2: f64, coefficient_kwh_per_cm2: f64) -> Energy {
    Energy::from_kwh(assembly_area_cm2 * coefficient_kwh_per_cm2)
}

/// Energy drawn by the circuit itself over `service_years`.
///
/// An override is taken as the energy of one lifetime and rescaled
/// proportionally to the period.
pub fn use_phase_energy(chip: &ChipSpec, service_years: f64, hours_per_year: f64) -> Energy {
    match chip.use_energy_override_kwh {
        Some(kwh) => Energy::from_kwh(kwh) * (service_years / chip.lifetime_years),
        None => Energy::from_wh(chip.operating_power_w * service_years * hours_per_year * chip.utilization),
    }
}

pub fn cooling_energy(use_energy: Energy, multiplier: f64) -> Energy {
    use_energy * multiplier
}

/// Assesses `entry`, amortizing its wafer over `gross_real` die sites.
pub fn assess_with_gross(entry: &ScenarioChip, policy: &AssessmentPolicy, gross_real: f64) -> Result<ChipAssessment> {
    let chip = &entry.chip;
    let spec = entry.yield_setup.spec()?;
    let y = yield_fraction(&spec, chip.die_area_cm2);
    let wafer_energy = entry.wafer.manufacturing_energy()?;
    let dies = DieCount {
        gross_real,
        gross: gross_real.max(0.0).floor() as u64,
        functional_expected: gross_real,
    }
    .at_yield(y);

    let (service_years, replacements) = match policy.replacement_policy {
        ReplacementPolicy::PerDevice => (chip.lifetime_years, 1.0),
        ReplacementPolicy::CommonServicePeriod => (
            policy.service_period_years,
            policy.service_period_years / chip.lifetime_years,
        ),
    };

    let manufacturing = manufacturing_energy_per_die(wafer_energy, gross_real, y)? * replacements;
    let assembly = assembly_energy(chip.assembly_area(), policy.assembly_coefficient_kwh_per_cm2) * replacements;
    let use_phase = use_phase_energy(chip, service_years, policy.hours_per_year);
    let cooling = cooling_energy(use_phase, chip.cooling_multiplier);

    Ok(ChipAssessment {
        name: chip.name.clone(),
        die_area_cm2: chip.die_area_cm2,
        yield_fraction: y,
        dies,
        replacements,
        service_years,
        phases: PhaseEnergies::new(manufacturing, assembly, use_phase, cooling),
    })
}

/// Assesses one validated scenario entry through manufacturing, assembly and
/// use, with gross dies from the wafer geometry.
pub fn assess_chip(entry: &ScenarioChip, policy: &AssessmentPolicy) -> Result<ChipAssessment> {
    let gross = gross_dies_per_wafer(entry.wafer.diameter_mm, entry.chip.die_area_cm2 * 100.0)?;
    assess_with_gross(entry, policy, gross.gross_real)
}

pub fn assess_scenario(scenario: &Scenario) -> Result<Vec<ChipAssessment>> {
    let policy = AssessmentPolicy::from_scenario(scenario)?;
    scenario.chips.iter().map(|c| assess_chip(c, &policy)).collect()
}
