//! Process-inventory CSV parsing and material aggregation.
//!
//! The inventory format is a UTF-8 CSV file with the exact header
//!
//! ```text
//! index,name,category,energy_kwh,materials
//! ```
//!
//! `materials` is a `;`-separated list of `name:class:grams` triples and may be
//! empty. Lines starting with `#` are comments; a `# technology: NAME` comment
//! names the inventory. LF and CRLF line endings are accepted.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{MaterialClass, MaterialFlow, ProcessInventory, ProcessStep, StepCategory};

pub const INVENTORY_HEADER: [&str; 5] = ["index", "name", "category", "energy_kwh", "materials"];
const TECHNOLOGY_TAG: &str = "# technology:";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line in the source; 0 when the error concerns the whole file.
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

/// Every problem found while parsing an inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InventoryError {
    pub errors: Vec<RowError>,
}

impl std::error::Error for InventoryError {}

impl fmt::Display for InventoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for e in &self.errors {
            if !first {
                f.write_str("\n")?;
            }
            first = false;
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

fn technology_name(source: &str) -> Option<String> {
    source.lines().find_map(|l| {
        l.strip_prefix(TECHNOLOGY_TAG)
            .map(|rest| rest.trim().to_string())
            .filter(|n| !n.is_empty())
    })
}

fn parse_materials(field: &str) -> Result<Vec<MaterialFlow>, String> {
    if field.trim().is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|triple| {
            let parts: Vec<&str> = triple.split(':').collect();
            let [material, class, grams] = parts.as_slice() else {
                return Err(format!("material `{triple}` is not name:class:grams"));
            };
            let material = material.trim();
            if material.is_empty() {
                return Err(format!("material `{triple}` has an empty name"));
            }
            let class: MaterialClass = class.trim().parse()?;
            let grams: f64 = grams
                .trim()
                .parse()
                .map_err(|_| format!("material `{material}` mass `{grams}` is not a number"))?;
            if !(grams.is_finite() && grams >= 0.0) {
                return Err(format!("material `{material}` mass must be >= 0, got {grams}"));
            }
            Ok(MaterialFlow {
                material: material.to_string(),
                grams_per_wafer: grams,
                class,
            })
        })
        .collect()
}

fn parse_row(fields: &[&str]) -> Result<ProcessStep, Vec<String>> {
    let mut problems = Vec::new();
    let index = match fields[0].trim().parse::<u32>() {
        Ok(i) if i >= 1 => Some(i),
        _ => {
            problems.push(format!("index `{}` is not a positive integer", fields[0]));
            None
        }
    };
    let name = fields[1].trim();
    if name.is_empty() {
        problems.push("name is empty".to_string());
    }
    let category = fields[2]
        .trim()
        .parse::<StepCategory>()
        .map_err(|e| problems.push(e))
        .ok();
    let energy = match fields[3].trim().parse::<f64>() {
        Ok(e) if e.is_finite() && e >= 0.0 => Some(e),
        Ok(e) => {
            problems.push(format!("energy_kwh must be >= 0, got {e}"));
            None
        }
        Err(_) => {
            problems.push(format!("energy_kwh `{}` is not a number", fields[3]));
            None
        }
    };
    let materials = parse_materials(fields[4]).map_err(|e| problems.push(e)).ok();
    match (index, category, energy, materials) {
        (Some(index), Some(category), Some(energy_kwh), Some(materials)) if problems.is_empty() => Ok(ProcessStep {
            index,
            name: name.to_string(),
            category,
            energy_kwh,
            materials,
        }),
        _ => Err(problems),
    }
}

/// Parses an inventory, collecting every row-level error with its line.
pub fn parse_inventory(source: &[u8]) -> Result<ProcessInventory, InventoryError> {
    let fail = |line, message: String| InventoryError {
        errors: vec![RowError { line, message }],
    };
    let text = std::str::from_utf8(source).map_err(|e| fail(0, format!("input is not UTF-8: {e}")))?;
    let technology_name = technology_name(text).unwrap_or_else(|| "unnamed".to_string());

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut errors = Vec::new();
    let mut steps = Vec::new();
    let mut seen: HashMap<u32, u64> = HashMap::new();
    let mut header_seen = false;

    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError { line, message: format!("malformed CSV: {e}") });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            let header: Vec<&str> = record.iter().collect();
            if header != INVENTORY_HEADER {
                return Err(fail(
                    line,
                    format!(
                        "malformed header `{}`; expected `{}`",
                        header.join(","),
                        INVENTORY_HEADER.join(",")
                    ),
                ));
            }
            continue;
        }
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() != INVENTORY_HEADER.len() {
            errors.push(RowError {
                line,
                message: format!("expected {} fields, found {}", INVENTORY_HEADER.len(), fields.len()),
            });
            continue;
        }
        match parse_row(&fields) {
            Ok(step) => {
                match seen.entry(step.index) {
                    Entry::Occupied(first) => errors.push(RowError {
                        line,
                        message: format!("duplicate index {} (first used on line {})", step.index, first.get()),
                    }),
                    Entry::Vacant(slot) => {
                        slot.insert(line);
                        steps.push(step);
                    }
                }
            }
            Err(problems) => errors.extend(problems.into_iter().map(|message| RowError { line, message })),
        }
    }

    if !header_seen {
        return Err(fail(0, "empty inventory: no header found".into()));
    }
    if steps.is_empty() && errors.is_empty() {
        errors.push(RowError { line: 0, message: "inventory has no process steps".into() });
    }
    if errors.is_empty() {
        Ok(ProcessInventory { technology_name, steps })
    } else {
        Err(InventoryError { errors })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassTotals {
    pub total_grams: f64,
    /// Per-material grams per wafer.
    pub materials: BTreeMap<String, f64>,
}

/// Material use per wafer, grouped by class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialSummary {
    pub classes: BTreeMap<MaterialClass, ClassTotals>,
}

impl MaterialSummary {
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_total(&self, class: MaterialClass) -> f64 {
        self.classes.get(&class).map_or(0.0, |c| c.total_grams)
    }

    pub fn material(&self, class: MaterialClass, name: &str) -> Option<f64> {
        self.classes.get(&class)?.materials.get(name).copied()
    }
}

pub fn aggregate_materials(inventory: &ProcessInventory) -> MaterialSummary {
    let mut classes: BTreeMap<MaterialClass, ClassTotals> = BTreeMap::new();
    for flow in inventory.steps.iter().flat_map(|s| &s.materials) {
        *classes
            .entry(flow.class)
            .or_default()
            .materials
            .entry(flow.material.clone())
            .or_insert(0.0) += flow.grams_per_wafer;
    }
    for totals in classes.values_mut() {
        totals.total_grams = totals.materials.values().sum();
    }
    MaterialSummary { classes }
}
