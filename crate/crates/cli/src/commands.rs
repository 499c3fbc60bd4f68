//! The four pipeline phases. Each reads and writes plain CSV artifacts in
//! the output directory so any phase can be rerun or inspected on its own.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};

use dreamteam::arima;
use dreamteam::ensemble::{self, EnsembleWeights, ForecastConfig};
use dreamteam::ingest::{self, RosterStatus, Season};
use dreamteam::squad::{self, SquadConstraints};

pub const MATRIX_CSV: &str = "matrix.csv";
pub const ROSTER_CSV: &str = "roster.csv";
pub const WEIGHTS_CSV: &str = "weights.csv";
pub const GRIDS_CSV: &str = "grids.csv";
pub const GLOBAL_WEIGHTS_CSV: &str = "global_weights.csv";
pub const ARIMA_FITS_CSV: &str = "arima_fits.csv";
pub const FORECASTS_CSV: &str = "forecasts.csv";
pub const SQUAD_CSV: &str = "squad.csv";
pub const METRICS_CSV: &str = "metrics.csv";

fn artifact(out: &Path, name: &str) -> std::path::PathBuf {
    out.join(name)
}

fn create(out: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = artifact(out, name);
    let file =
        File::create(&path).with_context(|| format!("cannot write '{}'", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn ingest(
    master_path: &Path,
    season_paths: &[std::path::PathBuf; 3],
    out: &Path,
    delimiter: u8,
) -> anyhow::Result<()> {
    let started = Instant::now();
    let master = ingest::load_master(master_path, delimiter)?;
    let mut seasons: [Vec<ingest::SeasonPointsRow>; 3] = Default::default();
    for (slot, (path, season)) in season_paths.iter().zip(Season::ALL).enumerate() {
        seasons[slot] = ingest::load_season_points(path, season, delimiter)?;
    }
    let (roster, matrix) = ingest::build_matrix(&master, &seasons)?;
    let appearances = ingest::appearances(&seasons[2]);

    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory '{}'", out.display()))?;
    ingest::write_matrix_csv(create(out, MATRIX_CSV)?, &matrix)?;
    ingest::write_roster_csv(create(out, ROSTER_CSV)?, &roster, &appearances)?;

    println!(
        "phase=ingest master={} active={} removed_new={} removed_dormant={} wall={:.1}s",
        master.len(),
        roster.active.len(),
        roster.removed_new.len(),
        roster.removed_dormant.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn load_matrix(out: &Path) -> anyhow::Result<(Vec<ingest::RosterEntry>, ingest::PointsMatrix)> {
    let roster = ingest::read_roster_csv(&artifact(out, ROSTER_CSV))?;
    let matrix = ingest::read_matrix_csv(&artifact(out, MATRIX_CSV), &roster)?;
    Ok((roster, matrix))
}

pub fn validate(out: &Path, seed: u64, seasonal_period: usize) -> anyhow::Result<()> {
    let started = Instant::now();
    let (_, matrix) = load_matrix(out)?;
    let config = ForecastConfig::with_seed(seed, seasonal_period);
    let outcome = ensemble::validate_all(&matrix, &config);
    let global = ensemble::global_weights(&outcome.weights)?;

    ensemble::write_weights_csv(create(out, WEIGHTS_CSV)?, &outcome.weights)?;
    ensemble::write_grids_csv(create(out, GRIDS_CSV)?, &outcome.weights)?;
    ensemble::write_global_weights_csv(create(out, GLOBAL_WEIGHTS_CSV)?, &global)?;
    arima::write_fit_summaries(create(out, ARIMA_FITS_CSV)?, &outcome.fits)?;

    for (pid, reason) in &outcome.flagged {
        eprintln!("warning: validation failed for pid {pid}: {reason}");
    }
    println!(
        "phase=validate seed={} players={} excluded={} flagged={} global_weights=({:.1},{:.1}) wall={:.1}s",
        seed,
        outcome.weights.len(),
        outcome.weights.iter().filter(|w| w.excluded).count(),
        outcome.flagged.len(),
        global.p1(),
        global.p2(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

pub fn forecast(
    out: &Path,
    seed: u64,
    seasonal_period: usize,
    override_weights: Option<(f64, f64)>,
) -> anyhow::Result<()> {
    let started = Instant::now();
    let (_, matrix) = load_matrix(out)?;
    let weights = match override_weights {
        Some((p1, p2)) => EnsembleWeights::new(p1, p2)?,
        None => ensemble::read_global_weights_csv(&artifact(out, GLOBAL_WEIGHTS_CSV))?,
    };
    let config = ForecastConfig::with_seed(seed, seasonal_period);
    let (bundles, flagged) = ensemble::forecast_all(&matrix, &weights, &config);

    ensemble::write_forecasts_csv(create(out, FORECASTS_CSV)?, &bundles)?;
    for (pid, reason) in &flagged {
        eprintln!("warning: forecast failed for pid {pid}: {reason}");
    }
    println!(
        "phase=forecast seed={} weights=({:.1},{:.1}) players={} flagged={} wall={:.1}s",
        seed,
        weights.p1(),
        weights.p2(),
        bundles.len(),
        flagged.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn read_actuals(path: &Path) -> anyhow::Result<BTreeMap<u32, f64>> {
    let data = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read '{}'", path.display()))?;
    let mut totals = BTreeMap::new();
    for (i, line) in data.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let pid = parts.next().unwrap_or("").trim().parse::<u32>();
        let value = parts.next().unwrap_or("").trim().parse::<f64>();
        match (pid, value) {
            (Ok(pid), Ok(value)) => {
                totals.insert(pid, value);
            }
            _ if i == 0 => {} // header row
            _ => bail!("'{}' line {}: expected 'pid,actual_points'", path.display(), i + 1),
        }
    }
    Ok(totals)
}

pub fn optimize(out: &Path, budget: f64, actuals: Option<&Path>) -> anyhow::Result<()> {
    let started = Instant::now();
    let roster = ingest::read_roster_csv(&artifact(out, ROSTER_CSV))?;
    let forecasts = ensemble::read_forecasts_csv(&artifact(out, FORECASTS_CSV))?;
    let by_pid: BTreeMap<u32, &ensemble::ForecastRow> =
        forecasts.iter().map(|r| (r.pid, r)).collect();
    let entries: BTreeMap<u32, &ingest::RosterEntry> =
        roster.iter().map(|e| (e.player.id, e)).collect();

    let active: Vec<&ingest::RosterEntry> =
        roster.iter().filter(|e| e.status == RosterStatus::Active).collect();
    let mut candidates = Vec::with_capacity(active.len());
    let mut missing_forecast = 0usize;
    for entry in &active {
        match by_pid.get(&entry.player.id) {
            Some(row) => candidates.push(squad::Candidate {
                pid: entry.player.id,
                points: row.total,
                cost: entry.player.cost,
                position: entry.player.position,
            }),
            None => missing_forecast += 1,
        }
    }
    if missing_forecast > 0 {
        eprintln!("warning: {missing_forecast} active players lack forecasts and are excluded");
    }

    let constraints = SquadConstraints::with_budget(budget);
    let solution = squad::solve_exact(&candidates, &constraints)?;

    let squad_rows: Vec<squad::SquadCsvRow> = solution
        .selected
        .iter()
        .map(|pid| {
            let entry = entries[pid];
            squad::SquadCsvRow {
                pid: *pid,
                first_name: entry.player.first_name.clone(),
                surname: entry.player.surname.clone(),
                team: entry.player.team.clone(),
                position: entry.player.position,
                cost: entry.player.cost,
                predicted_points: by_pid[pid].total,
            }
        })
        .collect();
    squad::write_squad_csv(
        create(out, SQUAD_CSV)?,
        &squad_rows,
        solution.total_points,
        solution.total_cost,
    )?;

    let mut metric_rows: Vec<squad::MetricRow> = candidates
        .iter()
        .map(|c| {
            let matches = entries[&c.pid].matches_last_season;
            squad::compute_metrics(c.pid, c.points, matches, c.cost)
        })
        .collect();
    squad::cpi_scores(&mut metric_rows);
    squad::write_metrics_csv(create(out, METRICS_CSV)?, &metric_rows)?;

    println!(
        "phase=optimize candidates={} total_points={:.3} total_cost={:.1} budget={:.1} wall={:.1}s",
        candidates.len(),
        solution.total_points,
        solution.total_cost,
        budget,
        started.elapsed().as_secs_f64()
    );
    for row in &squad_rows {
        println!(
            "squad: pid={} {} {} {} {} cost={:.1} predicted={:.3}",
            row.pid, row.first_name, row.surname, row.team, row.position, row.cost,
            row.predicted_points
        );
    }

    // Key-players listing by the blended value index, three per position.
    let positions: BTreeMap<u32, ingest::Position> =
        roster.iter().map(|e| (e.player.id, e.player.position)).collect();
    for entry in squad::rank_report(&metric_rows, &positions, 3) {
        let player = &entries[&entry.pid].player;
        println!(
            "key_player: {} pid={} {} cpi={:.2} team={}",
            entry.position, entry.pid, player.surname, entry.cpi, player.team
        );
    }

    if let Some(actuals_path) = actuals {
        let totals = read_actuals(actuals_path)?;
        let mut aggregate = 0.0;
        for pid in &solution.selected {
            let Some(actual) = totals.get(pid) else {
                bail!("actuals file lacks squad player pid {pid}");
            };
            aggregate += actual - by_pid[pid].total;
        }
        let direction = if aggregate < 0.0 { "over-forecasting" } else { "under-forecasting" };
        println!("aggregate_error={aggregate:.3} ({direction})");
    }
    Ok(())
}
