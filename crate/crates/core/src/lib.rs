//! Process-based life-cycle energy and inventory assessment for integrated
//! circuits.
//!
//! The pipeline runs bottom-up: a fabrication step inventory is summed into a
//! per-wafer manufacturing energy, the wafer is cut into dies and derated by a
//! yield model, and each functional die is charged its share of the wafer plus
//! packaging, use-phase and (for cryogenic technologies) cooling energy.
//! Assessments of several technologies are then compared and can be re-run
//! under hypothetical die-area downscaling.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod inventory;
pub mod model;
pub mod monte_carlo;
pub mod report;
pub mod scenario_file;
pub mod units;
pub mod whatif;
pub mod yield_model;

pub use compare::{compare, improvement_factors, ComparisonReport, PairwiseComparison};
pub use energy::{
    assembly_energy, assess_chip, assess_scenario, assess_with_gross, cooling_energy,
    manufacturing_energy_per_die, use_phase_energy, wafer_manufacturing_energy,
    AssessmentPolicy, ChipAssessment,
};
pub use error::{Error, Result, Violation};
pub use geometry::{functional_dies, gross_dies_per_wafer, DieCount};
pub use inventory::{
    aggregate_materials, parse_inventory, InventoryError, MaterialSummary, RowError,
};
pub use model::{
    validate_scenario, ChipSpec, MaterialClass, MaterialFlow, PhaseEnergies, ProcessInventory,
    ProcessStep, ReplacementPolicy, ScalingParams, Scenario, ScenarioChip, StepCategory,
    WaferSpec, YieldSetup,
};
pub use monte_carlo::{monte_carlo_yield, MonteCarloYield};
pub use report::{parse_report_json, render_report, ReportFormat, ReportOptions};
pub use scenario_file::{load_scenario, parse_scenario, ScenarioError};
pub use units::Energy;
pub use whatif::{downscale_from, downscale_whatif, scale_to_node, GrossScaling, WhatIfResult};
pub use yield_model::{calibrate_defect_density, yield_fraction, YieldModel, YieldModelSpec};
