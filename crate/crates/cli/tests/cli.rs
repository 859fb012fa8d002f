use std::path::PathBuf;

use chiplca_cli::{run, EXIT_INVALID, EXIT_OK, EXIT_USAGE};

fn data(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel);
    p.to_string_lossy().into_owned()
}

fn calibrated() -> String {
    data("scenarios/calibrated_comparison.scn")
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn chiplca(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args.iter().copied(), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn yield_of_large_die() {
    let o = chiplca(&["yield", "--model", "murphy", "--area-cm2", "3.5", "--defect-density", "0.04649"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!((field(&o.stdout, "yield") - 0.852).abs() < 5e-4);
}

#[test]
fn calibrate_then_yield_round_trips() {
    for (area, target) in [("0.121", 0.976), ("3.5", 0.852), ("1", 0.5)] {
        let t = target.to_string();
        let c = chiplca(&["calibrate", "--area-cm2", area, "--target-yield", &t, "--format", "json"]);
        assert_eq!(c.code, EXIT_OK, "{}", c.stderr);
        let v: serde_json::Value = serde_json::from_str(&c.stdout).unwrap();
        let d = v["defect_density_per_cm2"].as_f64().unwrap().to_string();
        let y = chiplca(&["yield", "--area-cm2", area, "--defect-density", &d]);
        assert!((field(&y.stdout, "yield") - target).abs() < 1e-6);
    }
}

#[test]
fn calibrate_rejects_impossible_target() {
    let o = chiplca(&["calibrate", "--area-cm2", "1", "--target-yield", "1.5"]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stderr.contains("1.5"), "{}", o.stderr);
}

#[test]
fn dpw_matches_wafer_geometry() {
    let o = chiplca(&["dpw", "--diameter-mm", "300", "--area-mm2", "12.1"]);
    assert_eq!(o.code, EXIT_OK);
    assert!((field(&o.stdout, "gross_dies_real") - 5650.2186648).abs() < 1e-6);
    let o = chiplca(&["dpw", "--diameter-mm", "200", "--area-cm2", "3.5"]);
    assert!((field(&o.stdout, "gross_dies_real") - 66.0115818681).abs() < 1e-9);
    let o = chiplca(&["dpw", "--diameter-mm", "10", "--area-mm2", "500"]);
    assert_eq!(o.code, EXIT_INVALID);
}

#[test]
fn missing_scenario_names_the_path() {
    let o = chiplca(&["assess", "--scenario", "missing.scn"]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stderr.contains("missing.scn"), "{}", o.stderr);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(chiplca(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(chiplca(&["yield", "--area-cm2", "1"]).code, EXIT_USAGE);
    assert_eq!(chiplca(&["assess", "--scenario", &calibrated(), "--format", "xml"]).code, EXIT_USAGE);
    assert_eq!(chiplca(&["yield", "--model", "gauss", "--area-cm2", "1", "--defect-density", "1"]).code, EXIT_USAGE);
    let help = chiplca(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("sweep"));
}

#[test]
fn invalid_scenario_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    std::fs::write(
        &path,
        r#"schema_version = 1
[[chips]]
[chips.chip]
name = "x"
clock_frequency_hz = 1e9
operating_power_w = -2
die_area_cm2 = 0
lifetime_years = 4
[chips.wafer]
diameter_mm = 300
manufacturing_energy_kwh = 500
defect_density_per_cm2 = 0.1
"#,
    )
    .unwrap();
    let o = chiplca(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stderr.contains("bad.scn"), "{}", o.stderr);
    assert!(o.stderr.contains("operating_power_w") && o.stderr.contains("die_area_cm2"), "{}", o.stderr);
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for s in ["calibrated_comparison.scn", "nominal_parameters.scn", "minimal.scn"] {
        let o = chiplca(&["validate", "--scenario", &data(&format!("scenarios/{s}"))]);
        assert_eq!(o.code, EXIT_OK, "{s}: {}", o.stderr);
    }
}

#[test]
fn assess_table_matches_golden() {
    let o = chiplca(&["assess", "--scenario", &calibrated()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout, include_str!("golden/calibrated_comparison.txt"));
}

#[test]
fn assess_json_and_csv() {
    let j = chiplca(&["assess", "--scenario", &calibrated(), "--format", "json"]);
    let report = chiplca::parse_report_json(&j.stdout).unwrap();
    assert_eq!(report.chips.len(), 2);
    let c = chiplca(&["assess", "--scenario", &calibrated(), "--format", "csv"]);
    assert_eq!(c.stdout.lines().count(), 3);
    assert!(c.stdout.starts_with("chip,die_area_cm2,yield"));
}

#[test]
fn out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = chiplca(&["assess", "--scenario", &calibrated(), "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.is_empty());
    assert!(chiplca::parse_report_json(&std::fs::read_to_string(path).unwrap()).is_ok());
}

#[test]
fn compare_pair_ratios() {
    let o = chiplca(&[
        "compare", "--scenario", &calibrated(), "--baseline", "CMOS RISC-V", "--candidate", "AQFP RISC-V", "--format", "csv",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let line = o.stdout.lines().nth(1).unwrap();
    let cells: Vec<&str> = line.split(',').collect();
    assert_eq!(&cells[..2], ["CMOS RISC-V", "AQFP RISC-V"]);
    let imp: f64 = cells[2].parse().unwrap();
    assert!((imp - 237.66).abs() < 0.01);
    let o = chiplca(&["compare", "--scenario", &calibrated(), "--baseline", "GPU"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("CMOS RISC-V"));
}

#[test]
fn whatif_halved_area() {
    let o = chiplca(&["whatif", "--scenario", &calibrated(), "--chip", "AQFP RISC-V", "--factor", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!((field(&o.stdout, "yield") - 0.922).abs() < 1e-3);
    assert!((field(&o.stdout, "manufacturing_plus_assembly_kwh") - 1.34).abs() < 5e-3);
    let full = chiplca(&["whatif", "--scenario", &calibrated(), "--factor", "2", "--full-geometry"]);
    assert!(field(&full.stdout, "improvement") > field(&o.stdout, "improvement"));
    let bad = chiplca(&["whatif", "--scenario", &calibrated(), "--factor", "-1"]);
    assert_eq!(bad.code, EXIT_INVALID);
}

#[test]
fn sweep_downscale_factor() {
    let o = chiplca(&["sweep", "--scenario", &calibrated(), "--param", "chips[1].downscale_factor", "--values", "1,2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let (header, rows) = csv_rows(&o.stdout);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], 1.0);
    assert!((rows[0][col("chips[1].yield")] - 0.852).abs() < 1e-9);
    assert!((rows[1][col("chips[1].yield")] - 0.922).abs() < 1e-3);
    assert!((rows[1][col("chips[1].manufacturing_plus_assembly_kwh")] - 1.34).abs() < 5e-3);
}

#[test]
fn single_point_sweep_equals_assess() {
    let o = chiplca(&["sweep", "--scenario", &calibrated(), "--param", "chips[0].die_area", "--values", "0.121"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let (header, rows) = csv_rows(&o.stdout);
    let report = chiplca::parse_report_json(&chiplca(&["assess", "--scenario", &calibrated(), "--format", "json"]).stdout).unwrap();
    let cmos = &report.chips[0];
    let col = |name: &str| rows[0][header.iter().position(|h| h == name).unwrap()];
    assert_eq!(col("chips[0].yield"), cmos.yield_fraction);
    assert_eq!(col("chips[0].total_kwh"), cmos.phases.total.kwh());
    assert_eq!(col("chips[0].manufacturing_kwh"), cmos.phases.manufacturing.kwh());
}

#[test]
fn sweep_cooling_multiplier() {
    let o = chiplca(&[
        "sweep",
        "--scenario",
        &calibrated(),
        "--param",
        "chips[1].cooling_multiplier",
        "--values",
        "0,400",
        "--columns",
        "chips[1].use_kwh,chips[1].cooling_kwh",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(header, ["chips[1].cooling_multiplier", "chips[1].use_kwh", "chips[1].cooling_kwh"]);
    assert_eq!(rows[0][1], rows[1][1]);
    assert_eq!(rows[0][2], 0.0);
    assert!((rows[1][2] - 400.0 * rows[1][1]).abs() < 1e-12);
}

#[test]
fn sweep_grid_keeps_order() {
    let o = chiplca(&["sweep", "--scenario", &calibrated(), "--param", "hours_per_year", "--grid", "1000:9000:9"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let (_, rows) = csv_rows(&o.stdout);
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(xs, (1..=9).map(|i| i as f64 * 1000.0).collect::<Vec<_>>());
}

#[test]
fn sweep_usage_errors() {
    let o = chiplca(&["sweep", "--scenario", &calibrated(), "--param", "chips[0].colour", "--values", "1"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("valid paths") && o.stderr.contains("die_area"));
    let o = chiplca(&["sweep", "--scenario", &calibrated(), "--param", "chips[5].die_area", "--values", "1"]);
    assert_eq!(o.code, EXIT_USAGE);
    let o = chiplca(&["sweep", "--scenario", &calibrated(), "--param", "die_area", "--values", "1", "--columns", "bogus"]);
    assert_eq!(o.code, EXIT_USAGE);
    let o = chiplca(&["sweep", "--scenario", &calibrated(), "--param", "die_area", "--values", "-1"]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stderr.contains("die_area"), "{}", o.stderr);
}

#[test]
fn materials_summary() {
    let o = chiplca(&["materials", "--inventory", &data("inventories/aqfp_216.csv"), "--format", "csv"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("metal,Nb,8.1"), "{}", o.stdout);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "index,name,category,energy_kwh,materials\n1,x,litho,abc,\n").unwrap();
    let o = chiplca(&["materials", "--inventory", bad.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.stderr.contains("bad.csv") && o.stderr.contains("line 2"), "{}", o.stderr);
}

#[test]
fn monte_carlo_is_reproducible() {
    let args = ["yield", "--area-cm2", "1", "--defect-density", "0.2", "--monte-carlo", "--trials", "50", "--seed", "7"];
    let a = chiplca(&args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    assert_eq!(a.stdout, chiplca(&args).stdout);
    let mc = field(&a.stdout, "monte_carlo_yield");
    let se = field(&a.stdout, "monte_carlo_standard_error");
    assert!((mc - (-0.2f64).exp()).abs() < 4.0 * se);
}
