//! Report rendering: human table, lossless JSON, one-row-per-chip CSV.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::compare::{ComparisonReport, PairwiseComparison};
use crate::energy::ChipAssessment;
use crate::units::Energy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(Self::Table),
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(format!("unknown format `{s}` (expected table, json or csv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    /// Decimals for kWh in the table. Values that would round to zero get
    /// just enough extra digits to show their first significant figure.
    pub decimals: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { decimals: 2 }
    }
}

const MAX_DECIMALS: usize = 12;

pub(crate) fn format_kwh(e: Energy, decimals: usize) -> String {
    let v = e.kwh();
    let mut d = decimals;
    while v != 0.0 && d < MAX_DECIMALS && format!("{v:.d$}").trim_start_matches(['-', '0', '.']).is_empty() {
        d += 1;
    }
    format!("{v:.d$} kWh")
}

fn ratio_text(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".to_string(), |r| format!("{r:.2}X"))
}

fn improvement_cell(p: &PairwiseComparison, cooled: bool) -> String {
    if cooled {
        format!("{:.1}X (with cooling {:.1}X)", p.improvement, p.improvement_with_cooling)
    } else {
        format!("{:.1}X", p.improvement)
    }
}

fn chip_cells(c: &ChipAssessment, d: usize) -> [String; 4] {
    let p = &c.phases;
    let cooled = p.cooling.wh() > 0.0;
    let with = |plain: Energy, full: Energy| {
        if cooled {
            format!("{} (with cooling {})", format_kwh(plain, d), format_kwh(full, d))
        } else {
            format_kwh(plain, d)
        }
    };
    [
        format_kwh(p.manufacturing, d),
        format_kwh(p.assembly, d),
        with(p.use_phase, p.use_with_cooling()),
        with(p.without_cooling(), p.total),
    ]
}

fn render_table(report: &ComparisonReport, opts: ReportOptions) -> String {
    let d = opts.decimals;
    let header = [
        "Processor",
        "Manufacturing Energy",
        "Assembly Energy",
        "Use Phase Energy",
        "Total Energy",
        "Overall Improvement",
    ];
    let baseline = report.baseline();
    let mut rows: Vec<[String; 6]> = Vec::new();
    for c in &report.chips {
        let [m, a, u, t] = chip_cells(c, d);
        let improvement = match baseline {
            Some(b) if b.name != c.name => report
                .pair(&b.name, &c.name)
                .map(|p| {
                    let cooled = b.phases.cooling.wh() > 0.0 || c.phases.cooling.wh() > 0.0;
                    improvement_cell(p, cooled)
                })
                .unwrap_or_default(),
            _ => String::new(),
        };
        rows.push([c.name.clone(), m, a, u, t, improvement]);
    }

    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[&str]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            let _ = write!(s, "{cell:<w$}");
        }
        s.trim_end().to_string()
    };
    let rule: String = "-".repeat(widths.iter().sum::<usize>() + 3 * (widths.len() - 1));

    let names: Vec<&str> = report.chips.iter().map(|c| c.name.as_str()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "Comparison of {}", names.join(" and "));
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(out, "{}", line(&header));
    let _ = writeln!(out, "{rule}");
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        let _ = writeln!(out, "{}", line(&cells));
    }
    let _ = writeln!(out, "{rule}");

    out.push('\n');
    for c in &report.chips {
        let _ = writeln!(
            out,
            "{}: die {} cm2, yield {:.2}%, gross dies {} ({:.2}), functional dies {:.2}, devices {}",
            c.name,
            c.die_area_cm2,
            100.0 * c.yield_fraction,
            c.dies.gross,
            c.dies.gross_real,
            c.dies.functional_expected,
            c.replacements,
        );
    }
    if let Some(b) = baseline {
        for p in report.pairs.iter().filter(|p| p.baseline == b.name) {
            let _ = writeln!(
                out,
                "{} vs {}: manufacturing {}, assembly {}, use {}, use with cooling {}, area {}",
                p.candidate,
                p.baseline,
                ratio_text(p.manufacturing_ratio),
                ratio_text(p.assembly_ratio),
                ratio_text(p.use_ratio),
                ratio_text(p.use_with_cooling_ratio),
                ratio_text(p.area_ratio),
            );
        }
    }
    out
}

pub const CSV_COLUMNS: [&str; 17] = [
    "chip",
    "die_area_cm2",
    "yield",
    "gross_dies",
    "gross_dies_real",
    "functional_dies",
    "devices",
    "service_years",
    "manufacturing_kwh",
    "assembly_kwh",
    "use_kwh",
    "cooling_kwh",
    "total_kwh",
    "total_without_cooling_kwh",
    "baseline",
    "improvement",
    "improvement_with_cooling",
];

fn render_csv(report: &ComparisonReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(CSV_COLUMNS);
    let baseline = report.baseline().map(|b| b.name.as_str()).unwrap_or_default();
    for c in &report.chips {
        let p = &c.phases;
        let pair = report.pair(baseline, &c.name);
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let _ = w.write_record([
            c.name.clone(),
            c.die_area_cm2.to_string(),
            c.yield_fraction.to_string(),
            c.dies.gross.to_string(),
            c.dies.gross_real.to_string(),
            c.dies.functional_expected.to_string(),
            c.replacements.to_string(),
            c.service_years.to_string(),
            p.manufacturing.kwh().to_string(),
            p.assembly.kwh().to_string(),
            p.use_phase.kwh().to_string(),
            p.cooling.kwh().to_string(),
            p.total.kwh().to_string(),
            p.without_cooling().kwh().to_string(),
            if pair.is_some() { baseline.to_string() } else { String::new() },
            opt(pair.map(|p| p.improvement)),
            opt(pair.map(|p| p.improvement_with_cooling)),
        ]);
    }
    let bytes = w.into_inner().unwrap_or_default();
    String::from_utf8(bytes).unwrap_or_default()
}

/// Renders `report`. JSON carries energies in Wh at full precision and parses
/// back to an identical report with [`parse_report_json`].
pub fn render_report(report: &ComparisonReport, format: ReportFormat, opts: ReportOptions) -> String {
    match format {
        ReportFormat::Table => render_table(report, opts),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).unwrap_or_default();
            s.push('\n');
            s
        }
        ReportFormat::Csv => render_csv(report),
    }
}

pub fn parse_report_json(source: &str) -> Result<ComparisonReport, String> {
    let report: ComparisonReport = serde_json::from_str(source).map_err(|e| e.to_string())?;
    if let Some(c) = report.chips.iter().find(|c| !c.phases.is_consistent()) {
        return Err(format!("`{}`: phase energies do not sum to the total", c.name));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::compare;
    use crate::geometry::DieCount;
    use crate::model::PhaseEnergies;
    use proptest::prelude::*;

    fn assessment(name: &str, area: f64, e: [f64; 4]) -> ChipAssessment {
        ChipAssessment {
            name: name.into(),
            die_area_cm2: area,
            yield_fraction: 0.9,
            dies: DieCount { gross_real: 66.2, gross: 66, functional_expected: 59.58 },
            replacements: 1.0,
            service_years: 10.0,
            phases: PhaseEnergies::new(
                Energy::from_kwh(e[0]),
                Energy::from_kwh(e[1]),
                Energy::from_kwh(e[2]),
                Energy::from_kwh(e[3]),
            ),
        }
    }

    fn table1() -> ComparisonReport {
        compare(vec![
            assessment("CMOS", 0.121, [0.17, 0.08, 665.23, 0.0]),
            assessment("AQFP", 3.5, [1.61, 1.19, 0.00105, 0.42]),
        ])
        .unwrap()
    }

    #[test]
    fn tiny_values_keep_a_significant_digit() {
        assert_eq!(format_kwh(Energy::from_kwh(0.00104), 2), "0.001 kWh");
        assert_eq!(format_kwh(Energy::from_kwh(0.0), 2), "0.00 kWh");
        assert_eq!(format_kwh(Energy::from_kwh(665.48), 2), "665.48 kWh");
    }

    #[test]
    fn table_mirrors_columns() {
        let t = render_report(&table1(), ReportFormat::Table, ReportOptions::default());
        assert!(t.contains("Use Phase Energy"));
        assert!(t.contains("0.001 kWh (with cooling 0.42 kWh)"), "{t}");
        assert!(t.contains("2.80 kWh (with cooling 3.22 kWh)"), "{t}");
        assert!(t.contains("X (with cooling "), "{t}");
    }

    #[test]
    fn csv_has_one_row_per_chip() {
        let c = render_report(&table1(), ReportFormat::Csv, ReportOptions::default());
        let lines: Vec<&str> = c.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines[2].starts_with("AQFP,"));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let json = render_report(&table1(), ReportFormat::Json, ReportOptions::default());
        let back = parse_report_json(&json).unwrap();
        assert_eq!(back, table1());
        assert_eq!(render_report(&back, ReportFormat::Json, ReportOptions::default()), json);
    }

    #[test]
    fn inconsistent_json_rejected() {
        let json = render_report(&table1(), ReportFormat::Json, ReportOptions::default());
        let tampered = json.replacen("\"total_wh\": ", "\"total_wh\": 1", 1);
        assert!(parse_report_json(&tampered).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(
            a in proptest::collection::vec(0.0f64..1e6, 4),
            b in proptest::collection::vec(1e-9f64..1e6, 4),
            area in 1e-3f64..50.0,
        ) {
            let r = compare(vec![
                assessment("a", area, [a[0], a[1], a[2], a[3]]),
                assessment("b", 1.0, [b[0], b[1], b[2], b[3]]),
            ]);
            if let Ok(r) = r {
                let json = render_report(&r, ReportFormat::Json, ReportOptions::default());
                prop_assert_eq!(parse_report_json(&json).unwrap(), r);
            }
        }
    }
}
