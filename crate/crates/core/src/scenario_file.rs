//! Scenario files.
//!
//! Scenarios are TOML documents whose keys mirror [`Scenario`] one-to-one:
//!
//! ```toml
//! schema_version = 1
//! replacement_policy = "per_device"          # or "common_service_period"
//! assembly_coefficient_kwh_per_cm2 = 0.34    # optional
//! hours_per_year = 8766                      # optional
//! service_period_years = 10                  # optional, longest lifetime
//!
//! [[chips]]
//! inventory = "../inventories/aqfp_216.csv"  # relative to this file
//!
//! [chips.chip]
//! name = "AQFP RISC-V"
//! clock_frequency_hz = 5e9
//! operating_power_w = 41e-6
//! die_area_cm2 = 3.5
//! lifetime_years = 10
//! cooling_multiplier = 400
//!
//! [chips.wafer]
//! diameter_mm = 200
//!
//! [chips.yield]
//! model = "murphy"
//! target_yield = 0.852
//! ```
//!
//! Unknown keys are rejected. Missing required keys are all reported together.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::Violation;
use crate::inventory::parse_inventory;
use crate::model::{
    validate_scenario, ChipSpec, ReplacementPolicy, Scenario, ScenarioChip, WaferSpec, YieldSetup,
    DEFAULT_ASSEMBLY_COEFFICIENT_KWH_PER_CM2, DEFAULT_HOURS_PER_YEAR,
};
use crate::yield_model::YieldModel;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Syntax { origin: String, message: String },
    #[error("{origin}: {} violation(s):\n{}", .violations.len(), ViolationList(.violations))]
    Invalid { origin: String, violations: Vec<Violation> },
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "  {v}")?;
        }
        Ok(())
    }
}

impl ScenarioError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ScenarioError::Invalid { violations, .. } => violations,
            _ => &[],
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    schema_version: Option<u32>,
    service_period_years: Option<f64>,
    replacement_policy: Option<ReplacementPolicy>,
    assembly_coefficient_kwh_per_cm2: Option<f64>,
    hours_per_year: Option<f64>,
    chips: Option<Vec<ChipDoc>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChipDoc {
    chip: Option<ChipSpecDoc>,
    wafer: Option<WaferDoc>,
    inventory: Option<String>,
    #[serde(rename = "yield")]
    yield_setup: Option<YieldDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChipSpecDoc {
    name: Option<String>,
    clock_frequency_hz: Option<f64>,
    operating_power_w: Option<f64>,
    die_area_cm2: Option<f64>,
    lifetime_years: Option<f64>,
    utilization: Option<f64>,
    cooling_multiplier: Option<f64>,
    assembly_area_cm2: Option<f64>,
    use_energy_override_kwh: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WaferDoc {
    diameter_mm: Option<f64>,
    manufacturing_energy_kwh: Option<f64>,
    defect_density_per_cm2: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct YieldDoc {
    model: Option<YieldModel>,
    defect_density_per_cm2: Option<f64>,
    target_yield: Option<f64>,
}

struct Required(Vec<Violation>);

impl Required {
    fn take<T>(&mut self, path: String, v: Option<T>) -> Option<T> {
        if v.is_none() {
            self.0.push(Violation::new(path, "missing", "required field"));
        }
        v
    }
}

fn resolve_path(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn build(doc: ScenarioDoc, base_dir: Option<&Path>) -> Result<Scenario, Vec<Violation>> {
    let mut req = Required(Vec::new());
    let schema_version = req.take("schema_version".into(), doc.schema_version);
    let chip_docs = req.take("chips".into(), doc.chips).unwrap_or_default();

    let mut chips = Vec::new();
    let mut load_errors = Vec::new();
    for (i, c) in chip_docs.into_iter().enumerate() {
        let p = |f: &str| format!("chips[{i}].{f}");
        let spec = req.take(p("chip"), c.chip);
        let wafer = req.take(p("wafer"), c.wafer);
        let (Some(spec), Some(wafer)) = (spec, wafer) else {
            continue;
        };
        let name = req.take(p("chip.name"), spec.name);
        let clock = req.take(p("chip.clock_frequency_hz"), spec.clock_frequency_hz);
        let power = req.take(p("chip.operating_power_w"), spec.operating_power_w);
        let area = req.take(p("chip.die_area_cm2"), spec.die_area_cm2);
        let lifetime = req.take(p("chip.lifetime_years"), spec.lifetime_years);
        let diameter = req.take(p("wafer.diameter_mm"), wafer.diameter_mm);
        let (Some(name), Some(clock), Some(power), Some(area), Some(lifetime), Some(diameter)) =
            (name, clock, power, area, lifetime, diameter)
        else {
            continue;
        };

        let loaded_inventory = match (&c.inventory, base_dir) {
            (Some(rel), Some(base)) => {
                let path = resolve_path(base, rel);
                match std::fs::read(&path) {
                    Ok(bytes) => match parse_inventory(&bytes) {
                        Ok(inv) => Some(inv),
                        Err(e) => {
                            load_errors.push(Violation::new(
                                p("inventory"),
                                path.display(),
                                e.errors.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("; "),
                            ));
                            None
                        }
                    },
                    Err(e) => {
                        load_errors.push(Violation::new(p("inventory"), path.display(), e.to_string()));
                        None
                    }
                }
            }
            _ => None,
        };

        let yd = c.yield_setup.unwrap_or(YieldDoc {
            model: None,
            defect_density_per_cm2: None,
            target_yield: None,
        });
        chips.push(ScenarioChip {
            chip: ChipSpec {
                name,
                clock_frequency_hz: clock,
                operating_power_w: power,
                die_area_cm2: area,
                lifetime_years: lifetime,
                utilization: spec.utilization.unwrap_or(1.0),
                cooling_multiplier: spec.cooling_multiplier.unwrap_or(0.0),
                assembly_area_cm2: spec.assembly_area_cm2,
                use_energy_override_kwh: spec.use_energy_override_kwh,
            },
            wafer: WaferSpec {
                diameter_mm: diameter,
                manufacturing_energy_kwh: wafer.manufacturing_energy_kwh,
                defect_density_per_cm2: wafer.defect_density_per_cm2,
            },
            inventory: c.inventory,
            loaded_inventory,
            yield_setup: YieldSetup {
                model: yd.model.unwrap_or(YieldModel::Murphy),
                defect_density_per_cm2: yd.defect_density_per_cm2,
                target_yield: yd.target_yield,
            },
        });
    }

    let mut violations = req.0;
    violations.extend(load_errors);
    if !violations.is_empty() {
        return Err(violations);
    }
    let scenario = Scenario {
        schema_version: schema_version.unwrap_or_default(),
        chips,
        service_period_years: doc.service_period_years,
        replacement_policy: doc.replacement_policy.unwrap_or_default(),
        assembly_coefficient_kwh_per_cm2: doc
            .assembly_coefficient_kwh_per_cm2
            .unwrap_or(DEFAULT_ASSEMBLY_COEFFICIENT_KWH_PER_CM2),
        hours_per_year: doc.hours_per_year.unwrap_or(DEFAULT_HOURS_PER_YEAR),
    };
    validate_scenario(scenario)
}

fn parse_with(source: &str, origin: &str, base_dir: Option<&Path>) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = toml::from_str(source).map_err(|e| ScenarioError::Syntax {
        origin: origin.to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    build(doc, base_dir).map_err(|violations| ScenarioError::Invalid {
        origin: origin.to_string(),
        violations,
    })
}

/// Parses and validates a scenario held in memory.
///
/// Inventory paths are not followed; entries that rely on an inventory for
/// their wafer energy fail validation. Use [`load_scenario`] for files.
pub fn parse_scenario(source: &str) -> Result<Scenario, ScenarioError> {
    parse_with(source, "<scenario>", None)
}

/// Reads, parses and validates a scenario file, loading the inventories it
/// references relative to the file's directory.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let source = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_with(&source, &path.display().to_string(), Some(base))
}
