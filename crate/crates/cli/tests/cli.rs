//! End-to-end checks of the binary against the small synthetic fixture:
//! artifact shapes, rerun determinism, phase equivalence, exit codes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dreamteam::synthetic::{self, FixtureSpec};

const BIN: &str = env!("CARGO_BIN_EXE_dreamteam");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

struct FixtureDirs {
    _keep: tempfile::TempDir,
    master: PathBuf,
    seasons: [PathBuf; 3],
    out: PathBuf,
}

fn small_fixture(seed: u64) -> FixtureDirs {
    let dir = tempfile::tempdir().unwrap();
    let paths = synthetic::write_to_dir(&dir.path().join("fixture"), &FixtureSpec::small(seed))
        .unwrap();
    let out = dir.path().join("out");
    FixtureDirs { master: paths.master, seasons: paths.seasons, out, _keep: dir }
}

fn pipeline_args(fx: &FixtureDirs, out: &Path) -> Vec<String> {
    let mut args = vec![
        "pipeline".to_string(),
        "--master".into(),
        fx.master.display().to_string(),
    ];
    for season in &fx.seasons {
        args.push("--season".into());
        args.push(season.display().to_string());
    }
    args.push("--out".into());
    args.push(out.display().to_string());
    args
}

fn read_artifact(out: &Path, name: &str) -> String {
    std::fs::read_to_string(out.join(name))
        .unwrap_or_else(|e| panic!("missing artifact {name}: {e}"))
}

#[test]
fn missing_master_file_is_input_error_naming_path() {
    let output = run(&[
        "ingest",
        "--master",
        "/no/such/master.csv",
        "--season",
        "/no/s1.csv",
        "--season",
        "/no/s2.csv",
        "--season",
        "/no/s3.csv",
        "--out",
        "/tmp/never-created",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("/no/such/master.csv"));
}

#[test]
fn wrong_season_count_is_input_error() {
    let output = run(&["ingest", "--master", "/x.csv", "--season", "/one.csv", "--out", "/tmp/n"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("exactly 3"));
}

#[test]
fn running_sum_corruption_is_integrity_error() {
    let fx = small_fixture(31);
    // Corrupt one running sum in the last season.
    let season3 = std::fs::read_to_string(&fx.seasons[2]).unwrap();
    let mut lines: Vec<String> = season3.lines().map(String::from).collect();
    let idx = 1; // first data row
    let mut fields: Vec<String> = lines[idx].split(',').map(String::from).collect();
    let bumped: i64 = fields[5].parse::<i64>().unwrap() + 7;
    fields[5] = bumped.to_string();
    lines[idx] = fields.join(",");
    std::fs::write(&fx.seasons[2], lines.join("\n")).unwrap();

    let args: Vec<String> = pipeline_args(&fx, &fx.out)
        .into_iter()
        .map(|a| if a == "pipeline" { "ingest".to_string() } else { a })
        .collect();
    let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let output = run(&arg_refs);
    assert_eq!(output.status.code(), Some(2), "stderr: {}", stderr(&output));
    assert!(stderr(&output).contains("running sum"));
}

#[test]
fn ingest_writes_matrix_and_roster_shapes() {
    let fx = small_fixture(32);
    let mut args = vec!["ingest".to_string(), "--master".into(), fx.master.display().to_string()];
    for season in &fx.seasons {
        args.push("--season".into());
        args.push(season.display().to_string());
    }
    args.push("--out".into());
    args.push(fx.out.display().to_string());
    let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let output = run(&arg_refs);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("active=30"));

    let matrix = read_artifact(&fx.out, "matrix.csv");
    let mut lines = matrix.lines();
    let header = lines.next().unwrap();
    assert_eq!(header.split(',').count(), 115);
    assert!(header.starts_with("pid,gw1,"));
    assert!(header.ends_with("gw114"));
    assert_eq!(lines.count(), 30);

    let roster = read_artifact(&fx.out, "roster.csv");
    assert_eq!(roster.lines().count(), 41); // header + every master row
    assert_eq!(roster.lines().filter(|l| l.contains(",active,")).count(), 30);
}

/// One full pipeline on the small fixture: artifact shapes, rerun
/// determinism, subcommand-sequence equivalence, optimizer behaviour on
/// budget extremes, and the actuals report.
#[test]
fn pipeline_end_to_end() {
    let fx = small_fixture(33);
    let args = pipeline_args(&fx, &fx.out);
    let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let output = run(&arg_refs);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let report = stdout(&output);
    assert!(report.contains("phase=ingest"));
    assert!(report.contains("seed=42"), "seed must be reported: {report}");
    assert!(report.contains("phase=optimize"));

    // Grids: 11 rows per active player.
    let grids = read_artifact(&fx.out, "grids.csv");
    assert_eq!(grids.lines().count() - 1, 30 * 11);
    for chunk in grids.lines().skip(1).collect::<Vec<_>>().chunks(11) {
        let p1s: Vec<&str> = chunk.iter().map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(p1s[0], "1.0");
        assert_eq!(p1s[10], "0.0");
    }

    // Forecast totals equal their row sums (at format precision).
    let forecasts = read_artifact(&fx.out, "forecasts.csv");
    for line in forecasts.lines().skip(1) {
        let fields: Vec<f64> =
            line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        let total = fields[0];
        let sum: f64 = fields[1..].iter().sum();
        assert!((total - sum).abs() < 1e-3, "total {total} vs sum {sum}");
        assert_eq!(fields.len(), 39);
    }

    // Squad: 15 players at 2/5/5/3 within budget, then the summary pair.
    let squad = read_artifact(&fx.out, "squad.csv");
    let lines: Vec<&str> = squad.lines().collect();
    assert_eq!(lines.len(), 1 + 15 + 2);
    let mut by_position: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cost = 0.0;
    for line in &lines[1..16] {
        let fields: Vec<&str> = line.split(',').collect();
        *by_position.entry(fields[4]).or_default() += 1;
        cost += fields[5].parse::<f64>().unwrap();
    }
    assert_eq!(by_position.get("GLK"), Some(&2));
    assert_eq!(by_position.get("DEF"), Some(&5));
    assert_eq!(by_position.get("MID"), Some(&5));
    assert_eq!(by_position.get("FWD"), Some(&3));
    assert!(cost <= 100.0 + 1e-9);
    assert_eq!(lines[16], "total_points,total_cost");

    // Rerun into a fresh directory: byte-identical artifacts.
    let out2 = fx.out.with_file_name("out_rerun");
    let args2 = pipeline_args(&fx, &out2);
    let arg_refs2: Vec<&str> = args2.iter().map(String::as_str).collect();
    let rerun = run(&arg_refs2);
    assert_eq!(rerun.status.code(), Some(0));
    for name in [
        "matrix.csv",
        "roster.csv",
        "weights.csv",
        "grids.csv",
        "global_weights.csv",
        "arima_fits.csv",
        "forecasts.csv",
        "squad.csv",
        "metrics.csv",
    ] {
        assert_eq!(
            read_artifact(&fx.out, name),
            read_artifact(&out2, name),
            "artifact {name} differs between identical runs"
        );
    }

    // Phase-by-phase into a third directory matches the one-shot pipeline.
    let out3 = fx.out.with_file_name("out_phases");
    let mut ingest_args =
        vec!["ingest".to_string(), "--master".into(), fx.master.display().to_string()];
    for season in &fx.seasons {
        ingest_args.push("--season".into());
        ingest_args.push(season.display().to_string());
    }
    ingest_args.push("--out".into());
    ingest_args.push(out3.display().to_string());
    let refs: Vec<&str> = ingest_args.iter().map(String::as_str).collect();
    assert_eq!(run(&refs).status.code(), Some(0));
    let out3_str = out3.display().to_string();
    assert_eq!(run(&["validate", "--out", &out3_str]).status.code(), Some(0));
    assert_eq!(run(&["forecast", "--out", &out3_str]).status.code(), Some(0));
    assert_eq!(run(&["optimize", "--out", &out3_str]).status.code(), Some(0));
    for name in ["weights.csv", "global_weights.csv", "forecasts.csv", "squad.csv", "metrics.csv"] {
        assert_eq!(
            read_artifact(&fx.out, name),
            read_artifact(&out3, name),
            "artifact {name} differs between pipeline and subcommand sequence"
        );
    }

    // Zero budget: infeasible, exit 3.
    let infeasible = run(&["optimize", "--out", &out3_str, "--budget", "0"]);
    assert_eq!(infeasible.status.code(), Some(3), "stderr: {}", stderr(&infeasible));

    // Non-binding budget: the squad is the per-position top by points.
    let loose = run(&["optimize", "--out", &out3_str, "--budget", "1000"]);
    assert_eq!(loose.status.code(), Some(0));
    let selected_loose: Vec<u32> = read_artifact(&out3, "squad.csv")
        .lines()
        .skip(1)
        .take(15)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    let expected = greedy_top_by_position(&out3);
    let mut sorted = selected_loose.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, expected);

    // Actuals equal to predictions: aggregate error is zero.
    let actuals_path = out3.join("actuals.csv");
    let mut actuals = String::from("pid,actual_points\n");
    for line in read_artifact(&out3, "forecasts.csv").lines().skip(1) {
        let mut fields = line.split(',');
        let pid = fields.next().unwrap();
        let total = fields.next().unwrap();
        actuals.push_str(&format!("{pid},{total}\n"));
    }
    std::fs::write(&actuals_path, actuals).unwrap();
    // Restore the default-budget squad first (the 1000-budget run rewrote it).
    assert_eq!(run(&["optimize", "--out", &out3_str]).status.code(), Some(0));
    let with_actuals = run(&[
        "optimize",
        "--out",
        &out3_str,
        "--actuals",
        actuals_path.display().to_string().as_str(),
    ]);
    assert_eq!(with_actuals.status.code(), Some(0));
    assert!(
        stdout(&with_actuals).contains("aggregate_error=0.000"),
        "stdout: {}",
        stdout(&with_actuals)
    );
}

/// Oracle for the non-binding budget: top predicted points per position.
fn greedy_top_by_position(out: &Path) -> Vec<u32> {
    let mut totals: BTreeMap<u32, f64> = BTreeMap::new();
    for line in read_artifact(out, "forecasts.csv").lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        totals.insert(fields[0].parse().unwrap(), fields[1].parse().unwrap());
    }
    let mut by_position: BTreeMap<String, Vec<(f64, u32)>> = BTreeMap::new();
    for line in read_artifact(out, "roster.csv").lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[6] != "active" {
            continue;
        }
        let pid: u32 = fields[0].parse().unwrap();
        if let Some(total) = totals.get(&pid) {
            by_position.entry(fields[3].to_string()).or_default().push((*total, pid));
        }
    }
    let mut selected = Vec::new();
    for (position, need) in [("GLK", 2usize), ("DEF", 5), ("MID", 5), ("FWD", 3)] {
        let bucket = by_position.get_mut(position).unwrap();
        bucket.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        selected.extend(bucket.iter().take(need).map(|(_, pid)| *pid));
    }
    selected.sort_unstable();
    selected
}

/// Forecasting with an explicit weight override works without a validate
/// phase and reproduces the pure-ARIMA forecast at (1.0, 0.0).
#[test]
fn forecast_weight_override_matches_pure_arima() {
    let fx = small_fixture(34);
    let mut args = vec!["ingest".to_string(), "--master".into(), fx.master.display().to_string()];
    for season in &fx.seasons {
        args.push("--season".into());
        args.push(season.display().to_string());
    }
    args.push("--out".into());
    args.push(fx.out.display().to_string());
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(run(&refs).status.code(), Some(0));

    let out_str = fx.out.display().to_string();
    let output = run(&["forecast", "--out", &out_str, "--weights", "1.0,0.0"]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    // Recompute the pure-ARIMA forecast for the first two players.
    let roster = dreamteam::ingest::read_roster_csv(&fx.out.join("roster.csv")).unwrap();
    let matrix = dreamteam::ingest::read_matrix_csv(&fx.out.join("matrix.csv"), &roster).unwrap();
    let grid = dreamteam::arima::default_grid(12);
    let forecasts = read_artifact(&fx.out, "forecasts.csv");
    for idx in 0..2 {
        let series = matrix.row_as_f64(idx);
        let fit = dreamteam::arima::select_order(&series, &grid).unwrap();
        let expected = dreamteam::arima::forecast(&fit, &series, 38).unwrap();
        let pid = matrix.players[idx].id;
        let line = forecasts
            .lines()
            .find(|l| l.starts_with(&format!("{pid},")))
            .unwrap_or_else(|| panic!("no forecast row for pid {pid}"));
        let got: Vec<f64> =
            line.split(',').skip(2).map(|v| v.parse().unwrap()).collect();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-5, "pid {pid}: {g} vs {e}");
        }
    }

    // Malformed override weights are an input error.
    let bad = run(&["forecast", "--out", &out_str, "--weights", "0.9,0.9"]);
    assert_eq!(bad.status.code(), Some(1));
}
