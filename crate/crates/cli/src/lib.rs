//! Command-line front end. [`run`] is the whole program; `main` only wires it
//! to the process streams.

pub mod sweep;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use chiplca::{
    aggregate_materials, assess_scenario, calibrate_defect_density, compare, downscale_whatif,
    gross_dies_per_wafer, load_scenario, monte_carlo_yield, parse_inventory, render_report, yield_fraction,
    AssessmentPolicy, ComparisonReport, GrossScaling, ReportFormat, ReportOptions, Scenario, YieldModel,
    YieldModelSpec,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::sweep::{parse_grid, parse_values, run_sweep, ParamPath, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "chiplca", version, about = "Life-cycle energy assessment for processor chips")]
struct Cli {
    /// Write the result to PATH instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct FormatArgs {
    #[arg(long, default_value = "table", value_parser = parse_format)]
    format: ReportFormat,
    /// kWh decimals in tables.
    #[arg(long, default_value_t = 2)]
    decimals: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file and report every problem found.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Yield of one die at a given defect density.
    Yield {
        #[arg(long, default_value = "murphy", value_parser = parse_model)]
        model: YieldModel,
        #[arg(long = "area-cm2", allow_hyphen_values = true)]
        area_cm2: f64,
        #[arg(long = "defect-density", allow_hyphen_values = true)]
        defect_density: f64,
        /// Also estimate the yield by simulating defects on wafers.
        #[arg(long = "monte-carlo")]
        monte_carlo: bool,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long = "diameter-mm", allow_hyphen_values = true, default_value_t = 300.0)]
        diameter_mm: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Defect density that gives a target yield.
    Calibrate {
        #[arg(long, default_value = "murphy", value_parser = parse_model)]
        model: YieldModel,
        #[arg(long = "area-cm2", allow_hyphen_values = true)]
        area_cm2: f64,
        #[arg(long = "target-yield", allow_hyphen_values = true)]
        target_yield: f64,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Gross dies per wafer.
    Dpw {
        #[arg(long = "diameter-mm", allow_hyphen_values = true)]
        diameter_mm: f64,
        #[arg(long = "area-mm2", allow_hyphen_values = true, conflicts_with = "area_cm2", required_unless_present = "area_cm2")]
        area_mm2: Option<f64>,
        #[arg(long = "area-cm2", allow_hyphen_values = true)]
        area_cm2: Option<f64>,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Energy per phase for every chip of a scenario.
    Assess {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Improvement factors between chips of a scenario.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        /// Reference chip; defaults to the first one.
        #[arg(long)]
        baseline: Option<String>,
        /// Only report this candidate.
        #[arg(long)]
        candidate: Option<String>,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Shrink one chip's die area at unchanged defect density.
    Whatif {
        #[arg(long)]
        scenario: PathBuf,
        /// Chip to shrink; defaults to the last one.
        #[arg(long)]
        chip: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        factor: f64,
        /// Reference chip for improvements; defaults to the first one.
        #[arg(long)]
        baseline: Option<String>,
        /// Recompute gross dies from the wafer instead of scaling by area.
        #[arg(long = "full-geometry")]
        full_geometry: bool,
        #[command(flatten)]
        fmt: FormatArgs,
    },
    /// Evaluate a scenario over a grid of one parameter; writes CSV.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Parameter path, e.g. chips[1].die_area or hours_per_year.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true, conflicts_with = "grid", required_unless_present = "grid")]
        values: Option<String>,
        #[arg(long, value_name = "START:STOP:COUNT[:log]", allow_hyphen_values = true)]
        grid: Option<String>,
        /// Comma-separated output columns, e.g. chips[1].total_kwh.
        #[arg(long)]
        columns: Option<String>,
    },
    /// Material use per wafer from a process inventory.
    Materials {
        #[arg(long)]
        inventory: PathBuf,
        #[command(flatten)]
        fmt: FormatArgs,
    },
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn parse_model(s: &str) -> Result<YieldModel, String> {
    s.parse::<YieldModel>()
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) => f.write_str(m),
        }
    }
}

fn invalid(e: impl fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

/// Runs the program on `args` (without the binary name) and returns the exit
/// code: 0 on success, 1 when inputs are invalid, 2 on usage errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("chiplca")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let result = execute(cli.command).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| invalid(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(invalid),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {f}");
            match f {
                Failure::Usage(_) => EXIT_USAGE,
                Failure::Invalid(_) => EXIT_INVALID,
            }
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    load_scenario(path).map_err(invalid)
}

fn chip_by_name(s: &Scenario, name: &str) -> Result<usize, Failure> {
    s.chip_index(name).ok_or_else(|| {
        let names: Vec<&str> = s.chips.iter().map(|c| c.chip.name.as_str()).collect();
        Failure::Usage(format!("no chip named `{name}`; scenario has: {}", names.join(", ")))
    })
}

/// Flat key/value output for the scalar commands.
fn render_fields(fields: &[(&str, Value)], format: ReportFormat) -> String {
    let text = |v: &Value| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    match format {
        ReportFormat::Table => {
            let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            fields.iter().map(|(k, v)| format!("{k:<width$}  {}\n", text(v))).collect()
        }
        ReportFormat::Json => {
            let map: serde_json::Map<String, Value> =
                fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            let mut s = serde_json::to_string_pretty(&Value::Object(map)).unwrap_or_default();
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let _ = w.write_record(fields.iter().map(|(k, _)| *k));
            let _ = w.write_record(fields.iter().map(|(_, v)| text(v)));
            String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
        }
    }
}

fn execute(command: Command) -> Result<String, Failure> {
    match command {
        Command::Validate { scenario } => {
            let s = load(&scenario)?;
            let mut out = format!("{}: ok, {} chip(s)\n", scenario.display(), s.chips.len());
            for c in &s.chips {
                out.push_str(&format!(
                    "  {}: die {} cm2, defect density {} /cm2 ({})\n",
                    c.chip.name,
                    c.chip.die_area_cm2,
                    c.yield_setup.defect_density_per_cm2.unwrap_or(f64::NAN),
                    c.yield_setup.model,
                ));
            }
            Ok(out)
        }

        Command::Yield { model, area_cm2, defect_density, monte_carlo, trials, diameter_mm, seed, fmt } => {
            if !(area_cm2 > 0.0 && area_cm2.is_finite()) {
                return Err(invalid(format!("--area-cm2 must be > 0, got {area_cm2}")));
            }
            if !(defect_density >= 0.0 && defect_density.is_finite()) {
                return Err(invalid(format!("--defect-density must be >= 0, got {defect_density}")));
            }
            let y = yield_fraction(&YieldModelSpec { model, defect_density }, area_cm2);
            let mut fields = vec![
                ("model", json!(model.as_str())),
                ("area_cm2", json!(area_cm2)),
                ("defect_density_per_cm2", json!(defect_density)),
                ("yield", json!(y)),
            ];
            if monte_carlo {
                let mc = monte_carlo_yield(area_cm2, defect_density, diameter_mm, trials, seed).map_err(invalid)?;
                // Simulated defects are Poisson per die, so compare against that model.
                let p = YieldModel::Poisson.evaluate(area_cm2 * defect_density);
                fields.extend([
                    ("monte_carlo_yield", json!(mc.fraction)),
                    ("monte_carlo_standard_error", json!(mc.standard_error(p))),
                    ("monte_carlo_dies", json!(mc.total_dies)),
                    ("trials", json!(mc.trials)),
                    ("seed", json!(seed)),
                ]);
            }
            Ok(render_fields(&fields, fmt.format))
        }

        Command::Calibrate { model, area_cm2, target_yield, fmt } => {
            let d = calibrate_defect_density(model, area_cm2, target_yield).map_err(invalid)?;
            let fields = [
                ("model", json!(model.as_str())),
                ("area_cm2", json!(area_cm2)),
                ("target_yield", json!(target_yield)),
                ("defect_density_per_cm2", json!(d)),
            ];
            Ok(render_fields(&fields, fmt.format))
        }

        Command::Dpw { diameter_mm, area_mm2, area_cm2, fmt } => {
            let area = area_mm2.or(area_cm2.map(|a| a * 100.0)).unwrap_or(f64::NAN);
            let dies = gross_dies_per_wafer(diameter_mm, area).map_err(invalid)?;
            let fields = [
                ("diameter_mm", json!(diameter_mm)),
                ("die_area_mm2", json!(area)),
                ("gross_dies", json!(dies.gross)),
                ("gross_dies_real", json!(dies.gross_real)),
            ];
            Ok(render_fields(&fields, fmt.format))
        }

        Command::Assess { scenario, fmt } => {
            let s = load(&scenario)?;
            let chips = assess_scenario(&s).map_err(invalid)?;
            let report = if chips.len() >= 2 {
                compare(chips).map_err(invalid)?
            } else {
                ComparisonReport { chips, pairs: Vec::new() }
            };
            Ok(render_report(&report, fmt.format, ReportOptions { decimals: fmt.decimals }))
        }

        Command::Compare { scenario, baseline, candidate, fmt } => {
            let mut s = load(&scenario)?;
            if s.chips.len() < 2 {
                return Err(invalid(format!("{}: compare needs at least two chips", scenario.display())));
            }
            // Put the baseline first, then the candidate, so the report reads
            // from the chosen reference.
            if let Some(b) = &baseline {
                let i = chip_by_name(&s, b)?;
                let chip = s.chips.remove(i);
                s.chips.insert(0, chip);
            }
            if let Some(c) = &candidate {
                let i = chip_by_name(&s, c)?;
                if i == 0 {
                    return Err(Failure::Usage(format!("`{c}` is both baseline and candidate")));
                }
                let chip = s.chips.remove(i);
                s.chips.truncate(1);
                s.chips.push(chip);
            }
            let report = compare(assess_scenario(&s).map_err(invalid)?).map_err(invalid)?;
            match fmt.format {
                ReportFormat::Table => {
                    Ok(render_report(&report, ReportFormat::Table, ReportOptions { decimals: fmt.decimals }))
                }
                ReportFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&report.pairs).map_err(invalid)?;
                    s.push('\n');
                    Ok(s)
                }
                ReportFormat::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
                    let _ = w.write_record([
                        "baseline",
                        "candidate",
                        "improvement",
                        "improvement_with_cooling",
                        "manufacturing_ratio",
                        "assembly_ratio",
                        "use_ratio",
                        "use_with_cooling_ratio",
                        "area_ratio",
                    ]);
                    for p in &report.pairs {
                        let _ = w.write_record([
                            p.baseline.clone(),
                            p.candidate.clone(),
                            p.improvement.to_string(),
                            p.improvement_with_cooling.to_string(),
                            opt(p.manufacturing_ratio),
                            opt(p.assembly_ratio),
                            opt(p.use_ratio),
                            opt(p.use_with_cooling_ratio),
                            opt(p.area_ratio),
                        ]);
                    }
                    Ok(String::from_utf8(w.into_inner().map_err(invalid)?).map_err(invalid)?)
                }
            }
        }

        Command::Whatif { scenario, chip, factor, baseline, full_geometry, fmt } => {
            let s = load(&scenario)?;
            let target = match &chip {
                Some(name) => chip_by_name(&s, name)?,
                None => s.chips.len() - 1,
            };
            let base = match &baseline {
                Some(name) => chip_by_name(&s, name)?,
                None => 0,
            };
            let policy = AssessmentPolicy::from_scenario(&s).map_err(invalid)?;
            let assessed = assess_scenario(&s).map_err(invalid)?;
            let scaling = if full_geometry { GrossScaling::FullGeometry } else { GrossScaling::AreaRatio };
            let w = downscale_whatif(&s.chips[target], &policy, factor, &assessed[base].phases, scaling)
                .map_err(invalid)?;
            let before = &assessed[target];
            let p = w.phases();
            let mfg_asm = (p.manufacturing + p.assembly).kwh();
            let mfg_asm_before = (before.phases.manufacturing + before.phases.assembly).kwh();
            let fields = [
                ("chip", json!(before.name)),
                ("baseline", json!(assessed[base].name)),
                ("factor", json!(factor)),
                ("gross_scaling", json!(if full_geometry { "full_geometry" } else { "area_ratio" })),
                ("die_area_cm2", json!(w.entry.chip.die_area_cm2)),
                ("yield_before", json!(before.yield_fraction)),
                ("yield", json!(w.yield_fraction())),
                ("gross_dies_real", json!(w.gross_dies_real)),
                ("manufacturing_kwh", json!(p.manufacturing.kwh())),
                ("assembly_kwh", json!(p.assembly.kwh())),
                ("manufacturing_plus_assembly_kwh_before", json!(mfg_asm_before)),
                ("manufacturing_plus_assembly_kwh", json!(mfg_asm)),
                ("use_kwh", json!(p.use_phase.kwh())),
                ("cooling_kwh", json!(p.cooling.kwh())),
                ("total_kwh", json!(p.total.kwh())),
                ("improvement", json!(w.improvement)),
                ("improvement_with_cooling", json!(w.improvement_with_cooling)),
            ];
            Ok(render_fields(&fields, fmt.format))
        }

        Command::Sweep { scenario, param, values, grid, columns } => {
            let s = load(&scenario)?;
            let param: ParamPath = param.parse().map_err(Failure::Usage)?;
            let values = match (&values, &grid) {
                (Some(list), _) => parse_values(list),
                (None, Some(g)) => parse_grid(g),
                (None, None) => Err("one of --values or --grid is required".to_string()),
            }
            .map_err(Failure::Usage)?;
            let spec = SweepSpec::new(&s, param, values, columns.as_deref()).map_err(Failure::Usage)?;
            run_sweep(&s, &spec).map_err(Failure::Invalid)
        }

        Command::Materials { inventory, fmt } => {
            let bytes = std::fs::read(&inventory).map_err(|e| invalid(format!("{}: {e}", inventory.display())))?;
            let inv = parse_inventory(&bytes).map_err(|e| invalid(format!("{}: {e}", inventory.display())))?;
            let summary = aggregate_materials(&inv);
            match fmt.format {
                ReportFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&summary).map_err(invalid)?;
                    s.push('\n');
                    Ok(s)
                }
                ReportFormat::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let _ = w.write_record(["class", "material", "grams_per_wafer"]);
                    for (class, totals) in &summary.classes {
                        for (name, g) in &totals.materials {
                            let _ = w.write_record([class.as_str(), name, &g.to_string()]);
                        }
                    }
                    Ok(String::from_utf8(w.into_inner().map_err(invalid)?).map_err(invalid)?)
                }
                ReportFormat::Table => {
                    let mut out = format!(
                        "{}: {} steps, {:.2} kWh per wafer\n",
                        inv.technology_name,
                        inv.steps.len(),
                        inv.total_energy_kwh()
                    );
                    for (class, totals) in &summary.classes {
                        out.push_str(&format!("{:<10} {:>14.3} g\n", class.as_str(), totals.total_grams));
                        for (name, g) in &totals.materials {
                            out.push_str(&format!("  {name:<20} {g:>12.3} g\n"));
                        }
                    }
                    Ok(out)
                }
            }
        }
    }
}
