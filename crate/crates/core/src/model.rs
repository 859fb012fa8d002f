//! Domain types shared by every stage of the assessment, and scenario
//! validation.
//!
//! All types are plain values. A [`Scenario`] read from disk may leave some
//! fields unset (assembly area, service period, defect density, wafer energy);
//! [`validate_scenario`] fills them from their documented defaults and
//! reports every invariant violation it finds in one pass.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Violation;
use crate::units::Energy;
use crate::yield_model::{calibrate_defect_density, YieldModel, YieldModelSpec};
use crate::Error;

pub const DEFAULT_ASSEMBLY_COEFFICIENT_KWH_PER_CM2: f64 = 0.34;
/// Julian year.
pub const DEFAULT_HOURS_PER_YEAR: f64 = 8766.0;
pub const SCHEMA_VERSION: u32 = 1;

/// One technology's functional unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipSpec {
    pub name: String,
    pub clock_frequency_hz: f64,
    /// Power drawn by the circuit at its operating temperature.
    pub operating_power_w: f64,
    pub die_area_cm2: f64,
    pub lifetime_years: f64,
    pub utilization: f64,
    /// Wall-plug energy spent on cooling per unit of energy dissipated by the
    /// circuit. Zero for room-temperature technologies.
    pub cooling_multiplier: f64,
    /// Packaged silicon area. Resolves to `die_area_cm2` when absent.
    pub assembly_area_cm2: Option<f64>,
    /// Use-phase energy over one lifetime; replaces the power-based estimate.
    pub use_energy_override_kwh: Option<f64>,
}

impl ChipSpec {
    pub fn assembly_area(&self) -> f64 {
        self.assembly_area_cm2.unwrap_or(self.die_area_cm2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaferSpec {
    pub diameter_mm: f64,
    /// Per-wafer fabrication energy. Filled from the process inventory during
    /// validation when absent.
    pub manufacturing_energy_kwh: Option<f64>,
    pub defect_density_per_cm2: Option<f64>,
}

impl WaferSpec {
    pub fn manufacturing_energy(&self) -> Result<Energy, Error> {
        self.manufacturing_energy_kwh
            .map(Energy::from_kwh)
            .ok_or_else(|| Error::Unresolved("wafer.manufacturing_energy_kwh".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepCategory {
    Deposition,
    Lithography,
    Etch,
    ImplantOrAnneal,
    Clean,
    Metrology,
    Other,
}

impl StepCategory {
    pub const ALL: [StepCategory; 7] = [
        StepCategory::Deposition,
        StepCategory::Lithography,
        StepCategory::Etch,
        StepCategory::ImplantOrAnneal,
        StepCategory::Clean,
        StepCategory::Metrology,
        StepCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StepCategory::Deposition => "deposition",
            StepCategory::Lithography => "lithography",
            StepCategory::Etch => "etch",
            StepCategory::ImplantOrAnneal => "implant_or_anneal",
            StepCategory::Clean => "clean",
            StepCategory::Metrology => "metrology",
            StepCategory::Other => "other",
        }
    }
}

impl FromStr for StepCategory {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        StepCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

impl fmt::Display for StepCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialClass {
    Gas,
    Chemical,
    Water,
    Metal,
    Other,
}

impl MaterialClass {
    pub const ALL: [MaterialClass; 5] = [
        MaterialClass::Gas,
        MaterialClass::Chemical,
        MaterialClass::Water,
        MaterialClass::Metal,
        MaterialClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MaterialClass::Gas => "gas",
            MaterialClass::Chemical => "chemical",
            MaterialClass::Water => "water",
            MaterialClass::Metal => "metal",
            MaterialClass::Other => "other",
        }
    }
}

impl FromStr for MaterialClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        MaterialClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown material class `{s}`"))
    }
}

impl fmt::Display for MaterialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialFlow {
    pub material: String,
    pub grams_per_wafer: f64,
    pub class: MaterialClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessStep {
    pub index: u32,
    pub name: String,
    pub category: StepCategory,
    pub energy_kwh: f64,
    pub materials: Vec<MaterialFlow>,
}

/// Ordered fabrication steps for one wafer. The total is never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessInventory {
    pub technology_name: String,
    pub steps: Vec<ProcessStep>,
}

impl ProcessInventory {
    pub fn total_energy(&self) -> Energy {
        self.steps.iter().map(|s| Energy::from_kwh(s.energy_kwh)).sum()
    }

    pub fn total_energy_kwh(&self) -> f64 {
        self.steps.iter().fold(0.0, |acc, s| acc + s.energy_kwh)
    }
}

/// Power-law exponents used when moving a design between technology nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub area_exponent: f64,
    pub frequency_exponent: f64,
    pub power_exponent: f64,
}

impl Default for ScalingParams {
    fn default() -> Self {
        Self {
            area_exponent: 2.0,
            frequency_exponent: -1.0,
            power_exponent: 2.0,
        }
    }
}

/// Per-die energy by life-cycle phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEnergies {
    #[serde(rename = "manufacturing_wh")]
    pub manufacturing: Energy,
    #[serde(rename = "assembly_wh")]
    pub assembly: Energy,
    #[serde(rename = "use_wh")]
    pub use_phase: Energy,
    #[serde(rename = "cooling_wh")]
    pub cooling: Energy,
    #[serde(rename = "total_wh")]
    pub total: Energy,
}

impl PhaseEnergies {
    pub fn new(manufacturing: Energy, assembly: Energy, use_phase: Energy, cooling: Energy) -> Self {
        Self {
            manufacturing,
            assembly,
            use_phase,
            cooling,
            total: manufacturing + assembly + use_phase + cooling,
        }
    }

    pub fn zero() -> Self {
        Self::new(Energy::ZERO, Energy::ZERO, Energy::ZERO, Energy::ZERO)
    }

    pub fn without_cooling(&self) -> Energy {
        self.manufacturing + self.assembly + self.use_phase
    }

    /// Use phase including the cryogenic overhead.
    pub fn use_with_cooling(&self) -> Energy {
        self.use_phase + self.cooling
    }

    pub fn is_consistent(&self) -> bool {
        let parts = [self.manufacturing, self.assembly, self.use_phase, self.cooling];
        if parts.iter().any(|e| !(e.wh() >= 0.0)) {
            return false;
        }
        let sum = self.manufacturing + self.assembly + self.use_phase + self.cooling;
        (sum.wh() - self.total.wh()).abs() <= 1e-9 * sum.wh().abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementPolicy {
    /// Every chip is assessed over its own lifetime.
    #[default]
    PerDevice,
    /// Every chip is assessed over the scenario's service period; shorter-lived
    /// chips are replaced fractionally.
    CommonServicePeriod,
}

impl FromStr for ReplacementPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "per_device" => Ok(Self::PerDevice),
            "common_service_period" => Ok(Self::CommonServicePeriod),
            _ => Err(format!("unknown replacement policy `{s}`")),
        }
    }
}

/// How a chip's defect density is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldSetup {
    pub model: YieldModel,
    pub defect_density_per_cm2: Option<f64>,
    /// Calibration target: when no density is given, the density that makes
    /// the model hit this yield at the chip's die area is used.
    pub target_yield: Option<f64>,
}

impl YieldSetup {
    pub fn spec(&self) -> Result<YieldModelSpec, Error> {
        let defect_density = self
            .defect_density_per_cm2
            .ok_or_else(|| Error::Unresolved("yield.defect_density_per_cm2".into()))?;
        Ok(YieldModelSpec {
            model: self.model,
            defect_density,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioChip {
    pub chip: ChipSpec,
    pub wafer: WaferSpec,
    /// Path of the process inventory, as written in the scenario file.
    pub inventory: Option<String>,
    #[serde(skip)]
    pub loaded_inventory: Option<ProcessInventory>,
    #[serde(rename = "yield")]
    pub yield_setup: YieldSetup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub chips: Vec<ScenarioChip>,
    pub service_period_years: Option<f64>,
    pub replacement_policy: ReplacementPolicy,
    pub assembly_coefficient_kwh_per_cm2: f64,
    pub hours_per_year: f64,
}

impl Scenario {
    pub fn new(chips: Vec<ScenarioChip>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            chips,
            service_period_years: None,
            replacement_policy: ReplacementPolicy::default(),
            assembly_coefficient_kwh_per_cm2: DEFAULT_ASSEMBLY_COEFFICIENT_KWH_PER_CM2,
            hours_per_year: DEFAULT_HOURS_PER_YEAR,
        }
    }

    pub fn chip_index(&self, name: &str) -> Option<usize> {
        self.chips.iter().position(|c| c.chip.name == name)
    }
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, ok: bool, path: &str, value: impl fmt::Display, message: &str) {
        if !ok {
            self.violations.push(Violation::new(path, value, message));
        }
    }

    fn positive(&mut self, path: &str, v: f64) {
        self.check(v.is_finite() && v > 0.0, path, v, "must be a finite value > 0");
    }

    fn non_negative(&mut self, path: &str, v: f64) {
        self.check(v.is_finite() && v >= 0.0, path, v, "must be a finite value >= 0");
    }
}

/// Resolves defaults and checks every invariant of `scenario`.
///
/// On success the returned scenario has `assembly_area_cm2`,
/// `service_period_years`, the wafer energy and the defect density filled in.
/// Resolving an already resolved scenario returns it unchanged. On failure
/// every violation found is returned, each with its field path.
pub fn validate_scenario(scenario: Scenario) -> Result<Scenario, Vec<Violation>> {
    let mut s = scenario;
    let mut ck = Checker { violations: Vec::new() };

    ck.check(
        s.schema_version == SCHEMA_VERSION,
        "schema_version",
        s.schema_version,
        "unsupported schema version (expected 1)",
    );
    ck.check(!s.chips.is_empty(), "chips", "[]", "at least one chip is required");
    ck.non_negative("assembly_coefficient_kwh_per_cm2", s.assembly_coefficient_kwh_per_cm2);
    ck.positive("hours_per_year", s.hours_per_year);

    let mut names = HashSet::new();
    for (i, entry) in s.chips.iter_mut().enumerate() {
        let p = |f: &str| format!("chips[{i}].{f}");
        let chip = &mut entry.chip;
        ck.check(!chip.name.trim().is_empty(), &p("chip.name"), "\"\"", "must not be empty");
        ck.check(
            names.insert(chip.name.clone()),
            &p("chip.name"),
            &chip.name,
            "duplicate chip name",
        );
        ck.positive(&p("chip.clock_frequency_hz"), chip.clock_frequency_hz);
        ck.positive(&p("chip.operating_power_w"), chip.operating_power_w);
        ck.positive(&p("chip.die_area_cm2"), chip.die_area_cm2);
        ck.positive(&p("chip.lifetime_years"), chip.lifetime_years);
        ck.check(
            (0.0..=1.0).contains(&chip.utilization),
            &p("chip.utilization"),
            chip.utilization,
            "must be within [0, 1]",
        );
        ck.non_negative(&p("chip.cooling_multiplier"), chip.cooling_multiplier);
        match chip.assembly_area_cm2 {
            Some(a) => ck.positive(&p("chip.assembly_area_cm2"), a),
            None if chip.die_area_cm2.is_finite() && chip.die_area_cm2 > 0.0 => {
                chip.assembly_area_cm2 = Some(chip.die_area_cm2)
            }
            None => {}
        }
        if let Some(e) = chip.use_energy_override_kwh {
            ck.non_negative(&p("chip.use_energy_override_kwh"), e);
        }

        let wafer = &mut entry.wafer;
        ck.positive(&p("wafer.diameter_mm"), wafer.diameter_mm);
        if let Some(d) = wafer.defect_density_per_cm2 {
            ck.non_negative(&p("wafer.defect_density_per_cm2"), d);
        }
        match (wafer.manufacturing_energy_kwh, &entry.loaded_inventory) {
            (Some(e), _) => ck.non_negative(&p("wafer.manufacturing_energy_kwh"), e),
            (None, Some(inv)) => {
                let total = inv.total_energy_kwh();
                ck.non_negative(&p("wafer.manufacturing_energy_kwh"), total);
                wafer.manufacturing_energy_kwh = Some(total);
            }
            (None, None) => ck.check(
                false,
                &p("wafer.manufacturing_energy_kwh"),
                "missing",
                match &entry.inventory {
                    Some(_) => "inventory referenced but not loaded; give the energy directly or load the scenario from a file",
                    None => "give the per-wafer energy or an inventory",
                },
            ),
        }

        let ys = &mut entry.yield_setup;
        if let Some(t) = ys.target_yield {
            ck.check(t > 0.0 && t <= 1.0, &p("yield.target_yield"), t, "must be within (0, 1]");
        }
        match ys.defect_density_per_cm2 {
            Some(d) => ck.non_negative(&p("yield.defect_density_per_cm2"), d),
            None => {
                let area = entry.chip.die_area_cm2;
                let resolved = match (ys.target_yield, wafer.defect_density_per_cm2) {
                    (Some(t), _) if t > 0.0 && t <= 1.0 && area.is_finite() && area > 0.0 => {
                        match calibrate_defect_density(ys.model, area, t) {
                            Ok(d) => Some(d),
                            Err(e) => {
                                ck.check(false, &p("yield.target_yield"), t, &e.to_string());
                                None
                            }
                        }
                    }
                    (Some(_), _) => None,
                    (None, Some(d)) => Some(d),
                    (None, None) => {
                        ck.check(
                            false,
                            &p("yield.defect_density_per_cm2"),
                            "missing",
                            "give a defect density or a target yield",
                        );
                        None
                    }
                };
                ys.defect_density_per_cm2 = resolved;
            }
        }
    }

    let max_lifetime = s
        .chips
        .iter()
        .map(|c| c.chip.lifetime_years)
        .filter(|l| l.is_finite())
        .fold(f64::NAN, f64::max);
    match s.service_period_years {
        Some(p) => ck.positive("service_period_years", p),
        None if max_lifetime > 0.0 => s.service_period_years = Some(max_lifetime),
        None => {}
    }

    if ck.violations.is_empty() {
        Ok(s)
    } else {
        Err(ck.violations)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn chip(name: &str, power_w: f64, area_cm2: f64, lifetime: f64) -> ChipSpec {
        ChipSpec {
            name: name.into(),
            clock_frequency_hz: 1e9,
            operating_power_w: power_w,
            die_area_cm2: area_cm2,
            lifetime_years: lifetime,
            utilization: 1.0,
            cooling_multiplier: 0.0,
            assembly_area_cm2: None,
            use_energy_override_kwh: None,
        }
    }

    pub fn entry(chip: ChipSpec, diameter_mm: f64, wafer_kwh: f64, density: f64) -> ScenarioChip {
        ScenarioChip {
            chip,
            wafer: WaferSpec {
                diameter_mm,
                manufacturing_energy_kwh: Some(wafer_kwh),
                defect_density_per_cm2: None,
            },
            inventory: None,
            loaded_inventory: None,
            yield_setup: YieldSetup {
                model: YieldModel::Murphy,
                defect_density_per_cm2: Some(density),
                target_yield: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn two_chip() -> Scenario {
        Scenario::new(vec![
            entry(chip("cmos", 7.5, 0.121, 5.0), 300.0, 937.4, 0.2),
            entry(chip("aqfp", 41e-6, 3.5, 10.0), 200.0, 90.5, 0.05),
        ])
    }

    #[test]
    fn utilization_out_of_range_is_named() {
        let mut s = two_chip();
        s.chips[1].chip.utilization = 1.3;
        let errs = validate_scenario(s).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].path, "chips[1].chip.utilization");
        assert_eq!(errs[0].value, "1.3");
    }

    #[test]
    fn assembly_area_defaults_to_die_area() {
        let s = validate_scenario(two_chip()).unwrap();
        assert_eq!(s.chips[0].chip.assembly_area_cm2, Some(0.121));
        assert_eq!(s.chips[1].chip.assembly_area_cm2, Some(3.5));
    }

    #[test]
    fn service_period_defaults_to_longest_lifetime() {
        let s = validate_scenario(two_chip()).unwrap();
        assert_eq!(s.service_period_years, Some(10.0));
    }

    #[test]
    fn all_violations_are_reported() {
        let mut s = two_chip();
        s.chips[0].chip.die_area_cm2 = -1.0;
        s.chips[0].chip.cooling_multiplier = -2.0;
        s.chips[1].wafer.diameter_mm = 0.0;
        s.hours_per_year = 0.0;
        let errs = validate_scenario(s).unwrap_err();
        let paths: Vec<_> = errs.iter().map(|v| v.path.as_str()).collect();
        assert_eq!(
            paths,
            [
                "hours_per_year",
                "chips[0].chip.die_area_cm2",
                "chips[0].chip.cooling_multiplier",
                "chips[1].wafer.diameter_mm",
            ]
        );
    }

    #[test]
    fn empty_scenario_rejected() {
        let errs = validate_scenario(Scenario::new(vec![])).unwrap_err();
        assert_eq!(errs[0].path, "chips");
    }

    #[test]
    fn target_yield_is_calibrated() {
        let mut s = two_chip();
        s.chips[1].yield_setup.defect_density_per_cm2 = None;
        s.chips[1].yield_setup.target_yield = Some(0.852);
        let s = validate_scenario(s).unwrap();
        let d = s.chips[1].yield_setup.defect_density_per_cm2.unwrap();
        assert!((d - 0.046_390_039_888_864_2).abs() < 1e-12, "{d}");
    }

    #[test]
    fn missing_density_and_energy_reported_together() {
        let mut s = two_chip();
        s.chips[0].yield_setup.defect_density_per_cm2 = None;
        s.chips[0].wafer.manufacturing_energy_kwh = None;
        let errs = validate_scenario(s).unwrap_err();
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn inventory_total_fills_wafer_energy() {
        let mut s = two_chip();
        s.chips[0].wafer.manufacturing_energy_kwh = None;
        s.chips[0].loaded_inventory = Some(ProcessInventory {
            technology_name: "t".into(),
            steps: vec![ProcessStep {
                index: 1,
                name: "a".into(),
                category: StepCategory::Etch,
                energy_kwh: 4.0,
                materials: vec![],
            }],
        });
        let s = validate_scenario(s).unwrap();
        assert_eq!(s.chips[0].wafer.manufacturing_energy_kwh, Some(4.0));
    }

    #[test]
    fn validation_is_idempotent() {
        let once = validate_scenario(two_chip()).unwrap();
        let twice = validate_scenario(once.clone()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn phase_total_is_sum() {
        let p = PhaseEnergies::new(
            Energy::from_kwh(1.0),
            Energy::from_kwh(2.0),
            Energy::from_kwh(3.0),
            Energy::from_kwh(4.0),
        );
        assert_eq!(p.total.kwh(), 10.0);
        assert_eq!(p.without_cooling().kwh(), 6.0);
        assert!(p.is_consistent());
    }
}
