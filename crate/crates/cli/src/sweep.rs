//! Parameter sweeps over a validated scenario.

use std::fmt;
use std::str::FromStr;

use chiplca::{
    assess_chip, downscale_whatif, improvement_factors, validate_scenario, AssessmentPolicy,
    ChipAssessment, GrossScaling, Scenario,
};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChipField {
    DieArea,
    AssemblyArea,
    OperatingPower,
    ClockFrequency,
    Lifetime,
    Utilization,
    CoolingMultiplier,
    UseEnergyOverride,
    DefectDensity,
    TargetYield,
    WaferDiameter,
    WaferEnergy,
    DownscaleFactor,
}

const CHIP_FIELDS: &[(&[&str], ChipField)] = &[
    (&["die_area", "die_area_cm2"], ChipField::DieArea),
    (&["assembly_area", "assembly_area_cm2"], ChipField::AssemblyArea),
    (&["operating_power", "operating_power_w"], ChipField::OperatingPower),
    (&["clock_frequency", "clock_frequency_hz"], ChipField::ClockFrequency),
    (&["lifetime", "lifetime_years"], ChipField::Lifetime),
    (&["utilization"], ChipField::Utilization),
    (&["cooling_multiplier"], ChipField::CoolingMultiplier),
    (&["use_energy_override", "use_energy_override_kwh"], ChipField::UseEnergyOverride),
    (&["yield.defect_density", "yield.defect_density_per_cm2"], ChipField::DefectDensity),
    (&["yield.target_yield"], ChipField::TargetYield),
    (&["wafer.diameter", "wafer.diameter_mm"], ChipField::WaferDiameter),
    (&["wafer.manufacturing_energy", "wafer.manufacturing_energy_kwh"], ChipField::WaferEnergy),
    (&["downscale_factor"], ChipField::DownscaleFactor),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalField {
    AssemblyCoefficient,
    HoursPerYear,
    ServicePeriod,
}

const GLOBAL_FIELDS: &[(&[&str], GlobalField)] = &[
    (&["assembly_coefficient", "assembly_coefficient_kwh_per_cm2"], GlobalField::AssemblyCoefficient),
    (&["hours_per_year"], GlobalField::HoursPerYear),
    (&["service_period", "service_period_years"], GlobalField::ServicePeriod),
];

/// Which scenario value a sweep varies. Chip fields without a `chips[i].`
/// prefix apply to every chip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamPath {
    Chip { index: Option<usize>, field: ChipField },
    Global(GlobalField),
}

pub fn valid_param_paths() -> Vec<String> {
    let mut out: Vec<String> = CHIP_FIELDS.iter().map(|(n, _)| format!("[chips[i].]{}", n[0])).collect();
    out.extend(GLOBAL_FIELDS.iter().map(|(n, _)| n[0].to_string()));
    out
}

impl FromStr for ParamPath {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let unknown = || {
            format!(
                "unknown parameter path `{s}`; valid paths: {}",
                valid_param_paths().join(", ")
            )
        };
        if let Some((_, g)) = GLOBAL_FIELDS.iter().find(|(names, _)| names.contains(&s)) {
            return Ok(ParamPath::Global(*g));
        }
        let (index, rest) = match s.strip_prefix("chips[") {
            Some(tail) => {
                let (idx, rest) = tail.split_once("].").ok_or_else(unknown)?;
                (Some(idx.parse::<usize>().map_err(|_| unknown())?), rest)
            }
            None => (None, s),
        };
        CHIP_FIELDS
            .iter()
            .find(|(names, _)| names.contains(&rest))
            .map(|(_, field)| ParamPath::Chip { index, field: *field })
            .ok_or_else(unknown)
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamPath::Chip { index, field } => {
                let name = CHIP_FIELDS.iter().find(|(_, x)| x == field).map_or("?", |(n, _)| n[0]);
                match index {
                    Some(i) => write!(f, "chips[{i}].{name}"),
                    None => f.write_str(name),
                }
            }
            ParamPath::Global(g) => {
                f.write_str(GLOBAL_FIELDS.iter().find(|(_, x)| x == g).map_or("?", |(n, _)| n[0]))
            }
        }
    }
}

/// Grid of sweep values.
pub fn parse_values(list: &str) -> Result<Vec<f64>, String> {
    list.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{v}` in --values is not a number")))
        .collect()
}

/// `START:STOP:COUNT[:log]`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let log = match parts.as_slice() {
        [_, _, _] => false,
        [_, _, _, "log"] => true,
        [_, _, _, "lin"] => false,
        _ => return Err(format!("grid `{spec}` is not START:STOP:COUNT[:log]")),
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("`{s}` in --grid is not a number"));
    let (start, stop) = (num(parts[0])?, num(parts[1])?);
    let count: usize = parts[2]
        .parse()
        .map_err(|_| format!("grid count `{}` is not a positive integer", parts[2]))?;
    if count == 0 {
        return Err("grid count must be >= 1".into());
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err("log grids need positive start and stop".into());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else if log {
                (start.ln() + i as f64 * (stop.ln() - start.ln()) / last).exp()
            } else {
                start + i as f64 * (stop - start) / last
            }
        })
        .collect())
}

pub const CHIP_COLUMNS: [&str; 12] = [
    "yield",
    "gross_dies",
    "functional_dies",
    "manufacturing_kwh",
    "assembly_kwh",
    "manufacturing_plus_assembly_kwh",
    "use_kwh",
    "cooling_kwh",
    "total_kwh",
    "total_without_cooling_kwh",
    "improvement",
    "improvement_with_cooling",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub chip: usize,
    pub field: &'static str,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chips[{}].{}", self.chip, self.field)
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: ParamPath,
    pub values: Vec<f64>,
    pub columns: Vec<Column>,
}

impl SweepSpec {
    /// Builds a sweep; with no explicit columns, every chip field of the swept
    /// chip (or of every chip, for scenario-wide parameters) is emitted.
    pub fn new(scenario: &Scenario, param: ParamPath, values: Vec<f64>, columns: Option<&str>) -> Result<Self, String> {
        if values.is_empty() {
            return Err("sweep needs at least one value".into());
        }
        let n = scenario.chips.len();
        if let ParamPath::Chip { index: Some(i), .. } = param {
            if i >= n {
                return Err(format!("parameter `{param}` refers to chip {i}, scenario has {n}"));
            }
        }
        let columns = match columns {
            Some(list) => list
                .split(',')
                .map(|c| parse_column(c.trim(), n))
                .collect::<Result<Vec<_>, _>>()?,
            None => {
                let chips: Vec<usize> = match param {
                    ParamPath::Chip { index: Some(i), .. } => vec![i],
                    _ => (0..n).collect(),
                };
                chips
                    .into_iter()
                    .flat_map(|chip| CHIP_COLUMNS.iter().map(move |field| Column { chip, field }))
                    .collect()
            }
        };
        Ok(Self { param, values, columns })
    }
}

fn parse_column(s: &str, chips: usize) -> Result<Column, String> {
    let bad = || {
        format!(
            "unknown column `{s}`; columns are chips[i].FIELD with i < {chips} and FIELD one of {}",
            CHIP_COLUMNS.join(", ")
        )
    };
    let tail = s.strip_prefix("chips[").ok_or_else(bad)?;
    let (idx, field) = tail.split_once("].").ok_or_else(bad)?;
    let chip: usize = idx.parse().map_err(|_| bad())?;
    let field = CHIP_COLUMNS.iter().find(|f| **f == field).ok_or_else(bad)?;
    if chip >= chips {
        return Err(bad());
    }
    Ok(Column { chip, field })
}

fn set_chip_field(scenario: &mut Scenario, i: usize, field: ChipField, v: f64) {
    let entry = &mut scenario.chips[i];
    let chip = &mut entry.chip;
    match field {
        ChipField::DieArea => {
            let ratio = v / chip.die_area_cm2;
            chip.die_area_cm2 = v;
            chip.assembly_area_cm2 = chip.assembly_area_cm2.map(|a| a * ratio);
        }
        ChipField::AssemblyArea => chip.assembly_area_cm2 = Some(v),
        ChipField::OperatingPower => chip.operating_power_w = v,
        ChipField::ClockFrequency => chip.clock_frequency_hz = v,
        ChipField::Lifetime => chip.lifetime_years = v,
        ChipField::Utilization => chip.utilization = v,
        ChipField::CoolingMultiplier => chip.cooling_multiplier = v,
        ChipField::UseEnergyOverride => chip.use_energy_override_kwh = Some(v),
        ChipField::DefectDensity => entry.yield_setup.defect_density_per_cm2 = Some(v),
        ChipField::TargetYield => {
            entry.yield_setup.target_yield = Some(v);
            entry.yield_setup.defect_density_per_cm2 = None;
        }
        ChipField::WaferDiameter => entry.wafer.diameter_mm = v,
        ChipField::WaferEnergy => entry.wafer.manufacturing_energy_kwh = Some(v),
        ChipField::DownscaleFactor => {}
    }
}

/// Evaluates one grid point; returns the per-chip assessments.
pub fn evaluate_point(base: &Scenario, param: ParamPath, value: f64) -> Result<Vec<ChipAssessment>, String> {
    let mut s = base.clone();
    let mut downscale = Vec::new();
    match param {
        ParamPath::Global(g) => match g {
            GlobalField::AssemblyCoefficient => s.assembly_coefficient_kwh_per_cm2 = value,
            GlobalField::HoursPerYear => s.hours_per_year = value,
            GlobalField::ServicePeriod => s.service_period_years = Some(value),
        },
        ParamPath::Chip { index, field } => {
            let targets: Vec<usize> = match index {
                Some(i) => vec![i],
                None => (0..s.chips.len()).collect(),
            };
            for i in targets {
                if field == ChipField::DownscaleFactor {
                    downscale.push(i);
                } else {
                    set_chip_field(&mut s, i, field, value);
                }
            }
        }
    }
    let s = validate_scenario(s).map_err(|v| {
        v.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    })?;
    let policy = AssessmentPolicy::from_scenario(&s).map_err(|e| e.to_string())?;
    let mut out: Vec<ChipAssessment> = s
        .chips
        .iter()
        .map(|c| assess_chip(c, &policy))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let baseline = out[0].phases;
    for i in downscale {
        let w = downscale_whatif(&s.chips[i], &policy, value, &baseline, GrossScaling::AreaRatio)
            .map_err(|e| e.to_string())?;
        out[i] = w.assessment;
    }
    Ok(out)
}

fn cell(chips: &[ChipAssessment], col: &Column) -> Result<String, String> {
    let c = &chips[col.chip];
    let p = &c.phases;
    let (imp, imp_c) = improvement_factors(&chips[0].phases, p).map_err(|e| e.to_string())?;
    let v = match col.field {
        "yield" => c.yield_fraction,
        "gross_dies" => c.dies.gross_real,
        "functional_dies" => c.dies.functional_expected,
        "manufacturing_kwh" => p.manufacturing.kwh(),
        "assembly_kwh" => p.assembly.kwh(),
        "manufacturing_plus_assembly_kwh" => (p.manufacturing + p.assembly).kwh(),
        "use_kwh" => p.use_phase.kwh(),
        "cooling_kwh" => p.cooling.kwh(),
        "total_kwh" => p.total.kwh(),
        "total_without_cooling_kwh" => p.without_cooling().kwh(),
        "improvement" => imp,
        "improvement_with_cooling" => imp_c,
        other => return Err(format!("unknown column field `{other}`")),
    };
    Ok(v.to_string())
}

/// Runs the sweep and returns CSV text, rows in grid order.
pub fn run_sweep(scenario: &Scenario, sweep: &SweepSpec) -> Result<String, String> {
    let rows: Vec<Result<Vec<String>, String>> = sweep
        .values
        .par_iter()
        .map(|&v| {
            let chips = evaluate_point(scenario, sweep.param, v).map_err(|e| format!("{} = {v}: {e}", sweep.param))?;
            let mut row = vec![v.to_string()];
            for col in &sweep.columns {
                row.push(cell(&chips, col)?);
            }
            Ok(row)
        })
        .collect();

    let mut out = String::from(&sweep.param.to_string());
    for col in &sweep.columns {
        out.push(',');
        out.push_str(&col.to_string());
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row?.join(","));
        out.push('\n');
    }
    Ok(out)
}
