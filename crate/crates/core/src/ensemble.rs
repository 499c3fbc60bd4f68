//! Hybrid forecasting: validate the ARIMA and LSTM models per player on the
//! held-out third season, grid-search the blend proportion in 10% steps,
//! average the per-player optima into one global weight pair, and emit the
//! final 38-gameweek hybrid forecasts.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use crate::arima::{self, ArimaError, ArimaOrder};
use crate::ingest::{PointsMatrix, SEASON_LEN, SERIES_LEN};
use crate::lstm::{self, LstmConfig, LstmError};
use crate::stats::{self, StatsError};

/// Gameweeks forecast per player: one full season ahead.
pub const FORECAST_HORIZON: usize = 38;

/// Training window for validation: the first two seasons.
pub const TRAIN_LEN: usize = 2 * SEASON_LEN;

#[derive(Debug)]
pub enum EnsembleError {
    Io { path: String, source: std::io::Error },
    Parse { path: String, msg: String },
    LengthMismatch { left: usize, right: usize },
    BadWeights { p1: f64, p2: f64 },
    BadSplit { len: usize },
    NoEligiblePlayers,
    Arima(ArimaError),
    Lstm(LstmError),
    Stats(StatsError),
}

impl fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleError::Io { path, source } => write!(f, "cannot read '{path}': {source}"),
            EnsembleError::Parse { path, msg } => write!(f, "bad data in '{path}': {msg}"),
            EnsembleError::LengthMismatch { left, right } => {
                write!(f, "forecast lengths differ: {left} vs {right}")
            }
            EnsembleError::BadWeights { p1, p2 } => {
                write!(f, "weights ({p1}, {p2}) must be in [0,1] and sum to 1")
            }
            EnsembleError::BadSplit { len } => {
                write!(f, "validation split needs a {SERIES_LEN}-value series, got {len}")
            }
            EnsembleError::NoEligiblePlayers => {
                write!(f, "no non-excluded players to aggregate weights over")
            }
            EnsembleError::Arima(e) => write!(f, "arima: {e}"),
            EnsembleError::Lstm(e) => write!(f, "lstm: {e}"),
            EnsembleError::Stats(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EnsembleError {}

impl From<ArimaError> for EnsembleError {
    fn from(e: ArimaError) -> Self {
        EnsembleError::Arima(e)
    }
}

impl From<LstmError> for EnsembleError {
    fn from(e: LstmError) -> Self {
        EnsembleError::Lstm(e)
    }
}

impl From<StatsError> for EnsembleError {
    fn from(e: StatsError) -> Self {
        EnsembleError::Stats(e)
    }
}

/// Convex combination shares of the ARIMA (`p1`) and LSTM (`p2`) forecasts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleWeights {
    p1: f64,
    p2: f64,
}

impl EnsembleWeights {
    pub fn new(p1: f64, p2: f64) -> Result<Self, EnsembleError> {
        let ok = (0.0..=1.0).contains(&p1)
            && (0.0..=1.0).contains(&p2)
            && (p1 + p2 - 1.0).abs() <= 1e-9;
        if ok {
            Ok(EnsembleWeights { p1, p2 })
        } else {
            Err(EnsembleError::BadWeights { p1, p2 })
        }
    }

    /// `p2` derived as the exact complement.
    pub fn from_p1(p1: f64) -> Result<Self, EnsembleError> {
        EnsembleWeights::new(p1, 1.0 - p1)
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }
}

/// First two seasons for training, the third held out for validation.
#[derive(Debug, Clone)]
pub struct ValidationSplit {
    pub train: Vec<f64>,
    pub holdout: Vec<f64>,
}

impl ValidationSplit {
    pub fn of(series: &[f64]) -> Result<Self, EnsembleError> {
        if series.len() != SERIES_LEN {
            return Err(EnsembleError::BadSplit { len: series.len() });
        }
        Ok(ValidationSplit {
            train: series[..TRAIN_LEN].to_vec(),
            holdout: series[TRAIN_LEN..].to_vec(),
        })
    }
}

/// Elementwise convex combination of the two forecasts.
pub fn hybrid(
    arima_fc: &[f64],
    lstm_fc: &[f64],
    w: &EnsembleWeights,
) -> Result<Vec<f64>, EnsembleError> {
    if arima_fc.len() != lstm_fc.len() {
        return Err(EnsembleError::LengthMismatch { left: arima_fc.len(), right: lstm_fc.len() });
    }
    Ok(arima_fc
        .iter()
        .zip(lstm_fc)
        .map(|(a, l)| w.p1 * a + w.p2 * l)
        .collect())
}

/// One sampled point of the blend grid.
#[derive(Debug, Clone, Copy)]
pub struct GridRow {
    pub p1: f64,
    pub p2: f64,
    pub rmse: f64,
}

/// Holdout RMSE at each blend share, from pure ARIMA (p1 = 1.0) down to pure
/// LSTM (p1 = 0.0) in 10% steps: always 11 rows.
pub fn weight_grid(
    arima_fc: &[f64],
    lstm_fc: &[f64],
    holdout: &[f64],
) -> Result<Vec<GridRow>, EnsembleError> {
    let mut rows = Vec::with_capacity(11);
    for step in (0..=10).rev() {
        let w = EnsembleWeights::from_p1(step as f64 / 10.0)?;
        let blended = hybrid(arima_fc, lstm_fc, &w)?;
        let rmse = stats::rmse(&blended, holdout)?;
        rows.push(GridRow { p1: w.p1, p2: w.p2, rmse });
    }
    Ok(rows)
}

/// The argmin row; grids run from p1 = 1.0 downward and only strictly better
/// rows displace the incumbent, so ties resolve toward the larger p1.
pub fn best_row(grid: &[GridRow]) -> GridRow {
    let mut best = grid[0];
    for row in &grid[1..] {
        if row.rmse < best.rmse {
            best = *row;
        }
    }
    best
}

/// Model settings shared by the validation and forecast phases.
#[derive(Debug, Clone)]
pub struct ForecastConfig {
    pub orders: Vec<ArimaOrder>,
    pub lstm: LstmConfig,
}

impl ForecastConfig {
    pub fn with_seed(seed: u64, seasonal_period: usize) -> Self {
        ForecastConfig {
            orders: arima::default_grid(seasonal_period),
            lstm: LstmConfig { seed, ..LstmConfig::default() },
        }
    }

    /// Distinct players must train identically regardless of scheduling, so
    /// each gets its own generator derived from the base seed and its pid.
    fn lstm_for(&self, pid: u32) -> LstmConfig {
        LstmConfig { seed: self.lstm.seed ^ u64::from(pid), ..self.lstm.clone() }
    }
}

/// Per-player validation outcome.
#[derive(Debug, Clone)]
pub struct PlayerWeights {
    pub pid: u32,
    pub p1: f64,
    pub p2: f64,
    pub rmse_at_optimum: f64,
    /// All-zero train and holdout: the grid is flat and uninformative, so
    /// the player is left out of the global average.
    pub excluded: bool,
    pub grid: Vec<GridRow>,
}

fn grid_search_inner(
    pid: u32,
    split: &ValidationSplit,
    config: &ForecastConfig,
) -> Result<(PlayerWeights, arima::ArimaFit), EnsembleError> {
    let arima_fit = arima::select_order(&split.train, &config.orders)?;
    let arima_fc = arima::forecast(&arima_fit, &split.train, FORECAST_HORIZON)?;
    let (model, _) = lstm::train(&split.train, &config.lstm_for(pid))?;
    let lstm_fc = model.forecast_recursive(&split.train, FORECAST_HORIZON)?;

    let grid = weight_grid(&arima_fc, &lstm_fc, &split.holdout)?;
    let best = best_row(&grid);
    let excluded =
        split.train.iter().all(|&v| v == 0.0) && split.holdout.iter().all(|&v| v == 0.0);
    let weights = PlayerWeights {
        pid,
        p1: best.p1,
        p2: best.p2,
        rmse_at_optimum: best.rmse,
        excluded,
        grid,
    };
    Ok((weights, arima_fit))
}

/// Fits ARIMA and trains the LSTM on the first two seasons only, then grids
/// the blend against the held-out season.
pub fn grid_search_weights(
    pid: u32,
    split: &ValidationSplit,
    config: &ForecastConfig,
) -> Result<PlayerWeights, EnsembleError> {
    grid_search_inner(pid, split, config).map(|(weights, _)| weights)
}

/// Rounds to the nearest tenth, halves upward. The epsilon absorbs the float
/// error of means that sit exactly on a 0.05 boundary in real arithmetic.
fn round_half_up_tenth(x: f64) -> f64 {
    ((x * 10.0 + 0.5 + 1e-9).floor() / 10.0).clamp(0.0, 1.0)
}

/// Arithmetic mean of the non-excluded per-player p1 shares, rounded half-up
/// to the nearest tenth; p2 is the complement.
pub fn global_weights(per_player: &[PlayerWeights]) -> Result<EnsembleWeights, EnsembleError> {
    let eligible: Vec<f64> = per_player.iter().filter(|w| !w.excluded).map(|w| w.p1).collect();
    if eligible.is_empty() {
        return Err(EnsembleError::NoEligiblePlayers);
    }
    let mean = eligible.iter().sum::<f64>() / eligible.len() as f64;
    EnsembleWeights::from_p1(round_half_up_tenth(mean))
}

/// Final per-player product: both model forecasts, their blend, and the
/// season total.
#[derive(Debug, Clone)]
pub struct ForecastBundle {
    pub pid: u32,
    pub arima_fc: Vec<f64>,
    pub lstm_fc: Vec<f64>,
    pub weights: EnsembleWeights,
    pub hybrid_fc: Vec<f64>,
    pub total: f64,
}

/// Refits both models on a full 114-value series and blends with the given
/// weights.
pub fn forecast_player(
    pid: u32,
    series: &[f64],
    weights: &EnsembleWeights,
    config: &ForecastConfig,
) -> Result<ForecastBundle, EnsembleError> {
    let arima_fit = arima::select_order(series, &config.orders)?;
    let arima_fc = arima::forecast(&arima_fit, series, FORECAST_HORIZON)?;
    let (model, _) = lstm::train(series, &config.lstm_for(pid))?;
    let lstm_fc = model.forecast_recursive(series, FORECAST_HORIZON)?;
    let hybrid_fc = hybrid(&arima_fc, &lstm_fc, weights)?;
    let total = hybrid_fc.iter().sum();
    Ok(ForecastBundle { pid, arima_fc, lstm_fc, weights: *weights, hybrid_fc, total })
}

/// Runs [`forecast_player`] for every matrix row (in parallel, results in
/// pid order) and separates out the players whose models failed.
pub fn forecast_all(
    matrix: &PointsMatrix,
    weights: &EnsembleWeights,
    config: &ForecastConfig,
) -> (Vec<ForecastBundle>, Vec<(u32, String)>) {
    let results: Vec<(u32, Result<ForecastBundle, EnsembleError>)> = matrix
        .players
        .par_iter()
        .enumerate()
        .map(|(idx, player)| {
            let series = matrix.row_as_f64(idx);
            (player.id, forecast_player(player.id, &series, weights, config))
        })
        .collect();

    let mut bundles = Vec::with_capacity(results.len());
    let mut flagged = Vec::new();
    for (pid, outcome) in results {
        match outcome {
            Ok(bundle) => bundles.push(bundle),
            Err(e) => flagged.push((pid, e.to_string())),
        }
    }
    (bundles, flagged)
}

/// Everything the validation phase produces.
pub struct ValidationOutcome {
    pub weights: Vec<PlayerWeights>,
    /// Validation-phase ARIMA fits, exportable as the fit-summary artifact.
    pub fits: Vec<(u32, arima::ArimaFit)>,
    pub flagged: Vec<(u32, String)>,
}

/// Runs [`grid_search_weights`] for every matrix row (in parallel, results
/// in pid order).
pub fn validate_all(matrix: &PointsMatrix, config: &ForecastConfig) -> ValidationOutcome {
    let results: Vec<(u32, Result<(PlayerWeights, arima::ArimaFit), EnsembleError>)> = matrix
        .players
        .par_iter()
        .enumerate()
        .map(|(idx, player)| {
            let series = matrix.row_as_f64(idx);
            let outcome = ValidationSplit::of(&series)
                .and_then(|split| grid_search_inner(player.id, &split, config));
            (player.id, outcome)
        })
        .collect();

    let mut outcome = ValidationOutcome { weights: Vec::new(), fits: Vec::new(), flagged: Vec::new() };
    for (pid, result) in results {
        match result {
            Ok((w, fit)) => {
                outcome.weights.push(w);
                outcome.fits.push((pid, fit));
            }
            Err(e) => outcome.flagged.push((pid, e.to_string())),
        }
    }
    outcome
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

/// `pid,p1,p2,rmse_at_optimum,excluded` rows.
pub fn write_weights_csv<W: std::io::Write>(
    writer: W,
    weights: &[PlayerWeights],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["pid", "p1", "p2", "rmse_at_optimum", "excluded"])?;
    for pw in weights {
        w.write_record([
            pw.pid.to_string(),
            format!("{:.1}", pw.p1),
            format!("{:.1}", pw.p2),
            format!("{:.6}", pw.rmse_at_optimum),
            pw.excluded.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Full per-player grids, 11 rows each: `pid,p1,p2,rmse`.
pub fn write_grids_csv<W: std::io::Write>(
    writer: W,
    weights: &[PlayerWeights],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["pid", "p1", "p2", "rmse"])?;
    for pw in weights {
        for row in &pw.grid {
            w.write_record([
                pw.pid.to_string(),
                format!("{:.1}", row.p1),
                format!("{:.1}", row.p2),
                format!("{:.6}", row.rmse),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Single-row `p1,p2` artifact carrying the global pair between phases.
pub fn write_global_weights_csv<W: std::io::Write>(
    writer: W,
    weights: &EnsembleWeights,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["p1", "p2"])?;
    w.write_record([format!("{:.1}", weights.p1()), format!("{:.1}", weights.p2())])?;
    w.flush()?;
    Ok(())
}

pub fn read_global_weights_csv(path: &Path) -> Result<EnsembleWeights, EnsembleError> {
    let data = std::fs::read_to_string(path)
        .map_err(|source| EnsembleError::Io { path: path.display().to_string(), source })?;
    let row = data.lines().nth(1).unwrap_or("");
    let mut parts = row.split(',');
    let mut next = || -> Result<f64, EnsembleError> {
        parts
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| EnsembleError::Parse {
                path: path.display().to_string(),
                msg: format!("expected 'p1,p2' data row, got '{row}'"),
            })
    };
    let p1 = next()?;
    let p2 = next()?;
    EnsembleWeights::new(p1, p2)
}

/// `pid,total,gw1..gw38` rows.
pub fn write_forecasts_csv<W: std::io::Write>(
    writer: W,
    bundles: &[ForecastBundle],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["pid".to_string(), "total".to_string()];
    header.extend((1..=FORECAST_HORIZON).map(|i| format!("gw{i}")));
    w.write_record(&header)?;
    for b in bundles {
        let mut record = vec![b.pid.to_string(), format!("{:.6}", b.total)];
        record.extend(b.hybrid_fc.iter().map(|v| format!("{v:.6}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ForecastRow {
    pub pid: u32,
    pub total: f64,
    pub gameweeks: Vec<f64>,
}

pub fn read_forecasts_csv(path: &Path) -> Result<Vec<ForecastRow>, EnsembleError> {
    let data = std::fs::read_to_string(path)
        .map_err(|source| EnsembleError::Io { path: path.display().to_string(), source })?;
    let bad = |msg: String| EnsembleError::Parse { path: path.display().to_string(), msg };
    let mut rows = Vec::new();
    for (i, line) in data.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 + FORECAST_HORIZON {
            return Err(bad(format!(
                "line {}: expected {} columns, got {}",
                i + 1,
                2 + FORECAST_HORIZON,
                fields.len()
            )));
        }
        let pid = fields[0]
            .trim()
            .parse()
            .map_err(|_| bad(format!("line {}: bad pid '{}'", i + 1, fields[0])))?;
        let mut values = Vec::with_capacity(1 + FORECAST_HORIZON);
        for f in &fields[1..] {
            values.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("line {}: bad value '{f}'", i + 1)))?,
            );
        }
        rows.push(ForecastRow { pid, total: values[0], gameweeks: values[1..].to_vec() });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn weights(p1: f64) -> EnsembleWeights {
        EnsembleWeights::from_p1(p1).unwrap()
    }

    #[test]
    fn weights_validate() {
        assert!(EnsembleWeights::new(0.4, 0.6).is_ok());
        assert!(EnsembleWeights::new(0.5, 0.6).is_err());
        assert!(EnsembleWeights::new(-0.1, 1.1).is_err());
        // Every grid share and its complement sum to exactly one.
        for step in 0..=10 {
            let w = weights(step as f64 / 10.0);
            assert_eq!(w.p1() + w.p2(), 1.0);
        }
    }

    #[test]
    fn hybrid_endpoints_are_exact() {
        let a = vec![1.5, -2.0, 3.25];
        let l = vec![0.5, 4.0, -1.0];
        assert_eq!(hybrid(&a, &l, &weights(1.0)).unwrap(), a);
        assert_eq!(hybrid(&a, &l, &weights(0.0)).unwrap(), l);
        let mid = hybrid(&[2.0; 4], &[4.0; 4], &weights(0.5)).unwrap();
        assert_eq!(mid, vec![3.0; 4]);
    }

    #[test]
    fn hybrid_length_mismatch_errors() {
        assert!(matches!(
            hybrid(&[1.0], &[1.0, 2.0], &weights(0.5)),
            Err(EnsembleError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn grid_endpoints_equal_pure_model_rmse() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let a: Vec<f64> = (0..38).map(|_| rng.gen_range(-3.0..8.0)).collect();
            let l: Vec<f64> = (0..38).map(|_| rng.gen_range(-3.0..8.0)).collect();
            let y: Vec<f64> = (0..38).map(|_| rng.gen_range(-3.0..8.0)).collect();
            let grid = weight_grid(&a, &l, &y).unwrap();
            assert_eq!(grid.len(), 11);
            assert_eq!(grid[0].p1, 1.0);
            assert_eq!(grid[10].p1, 0.0);
            assert_eq!(grid[0].rmse, stats::rmse(&a, &y).unwrap());
            assert_eq!(grid[10].rmse, stats::rmse(&l, &y).unwrap());

            let best = best_row(&grid);
            for row in &grid {
                assert!(best.rmse <= row.rmse);
            }
            assert!(best.rmse <= grid[0].rmse.min(grid[10].rmse));
        }
    }

    #[test]
    fn grid_is_unimodal() {
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..200 {
            let a: Vec<f64> = (0..38).map(|_| rng.gen_range(-5.0..10.0)).collect();
            let l: Vec<f64> = (0..38).map(|_| rng.gen_range(-5.0..10.0)).collect();
            let y: Vec<f64> = (0..38).map(|_| rng.gen_range(-5.0..10.0)).collect();
            let grid = weight_grid(&a, &l, &y).unwrap();
            let best = best_row(&grid);
            for i in 1..10 {
                let strict_min = grid[i].rmse < grid[i - 1].rmse - 1e-12
                    && grid[i].rmse < grid[i + 1].rmse - 1e-12;
                if strict_min {
                    assert_eq!(grid[i].p1, best.p1, "second local minimum at p1={}", grid[i].p1);
                }
            }
        }
    }

    #[test]
    fn perfect_arima_forecast_selects_pure_arima() {
        let y: Vec<f64> = (0..38).map(|t| (t % 7) as f64).collect();
        let l: Vec<f64> = y.iter().map(|v| v + 3.0).collect();
        let grid = weight_grid(&y, &l, &y).unwrap();
        let best = best_row(&grid);
        assert_eq!(best.p1, 1.0);
        assert_eq!(best.rmse, 0.0);
    }

    #[test]
    fn ties_resolve_toward_larger_p1() {
        // Identical forecasts make every row equal; the pure-ARIMA row wins.
        let a = vec![2.0; 38];
        let y = vec![1.0; 38];
        let grid = weight_grid(&a, &a, &y).unwrap();
        assert_eq!(best_row(&grid).p1, 1.0);
    }

    fn player_weights(p1: f64, excluded: bool) -> PlayerWeights {
        PlayerWeights { pid: 1, p1, p2: 1.0 - p1, rmse_at_optimum: 0.0, excluded, grid: Vec::new() }
    }

    #[test]
    fn global_weights_mean_and_rounding() {
        let w = global_weights(&[
            player_weights(0.4, false),
            player_weights(0.4, false),
            player_weights(0.4, false),
        ])
        .unwrap();
        assert_eq!((w.p1(), w.p2()), (0.4, 0.6));

        let w = global_weights(&[player_weights(0.3, false), player_weights(0.5, false)]).unwrap();
        assert_eq!((w.p1(), w.p2()), (0.4, 0.6));

        // Half-up at the thousandths: mean 0.355 rounds to 0.4.
        let w =
            global_weights(&[player_weights(0.35, false), player_weights(0.36, false)]).unwrap();
        assert_eq!(w.p1(), 0.4);

        // Half-up exactly on the 0.05 boundary.
        let w = global_weights(&[player_weights(0.0, false), player_weights(0.1, false)]).unwrap();
        assert_eq!(w.p1(), 0.1);
    }

    #[test]
    fn global_weights_skips_excluded_and_errors_when_empty() {
        let w = global_weights(&[player_weights(0.2, false), player_weights(1.0, true)]).unwrap();
        assert_eq!(w.p1(), 0.2);

        assert!(matches!(
            global_weights(&[player_weights(0.8, true)]),
            Err(EnsembleError::NoEligiblePlayers)
        ));
        assert!(matches!(global_weights(&[]), Err(EnsembleError::NoEligiblePlayers)));
    }

    #[test]
    fn validation_split_shapes() {
        let series: Vec<f64> = (0..SERIES_LEN).map(|t| t as f64).collect();
        let split = ValidationSplit::of(&series).unwrap();
        assert_eq!(split.train.len(), 76);
        assert_eq!(split.holdout.len(), 38);
        assert_eq!(split.holdout[0], 76.0);
        assert!(matches!(ValidationSplit::of(&[1.0, 2.0]), Err(EnsembleError::BadSplit { .. })));
    }

    fn tiny_config(seed: u64) -> ForecastConfig {
        ForecastConfig {
            orders: vec![
                ArimaOrder::nonseasonal(0, 0, 0).unwrap(),
                ArimaOrder::nonseasonal(1, 0, 0).unwrap(),
            ],
            lstm: LstmConfig {
                hidden_size: 6,
                window: 6,
                epochs: 20,
                seed,
                ..LstmConfig::default()
            },
        }
    }

    #[test]
    fn grid_search_on_zero_player_is_excluded() {
        let series = vec![0.0; SERIES_LEN];
        let split = ValidationSplit::of(&series).unwrap();
        let pw = grid_search_weights(9, &split, &tiny_config(1)).unwrap();
        assert!(pw.excluded);
        assert_eq!(pw.p1, 1.0); // flat grid, tie toward pure ARIMA
        assert_eq!(pw.rmse_at_optimum, 0.0);
        assert_eq!(pw.grid.len(), 11);
    }

    #[test]
    fn grid_search_constant_player_included() {
        let series = vec![2.0; SERIES_LEN];
        let split = ValidationSplit::of(&series).unwrap();
        let pw = grid_search_weights(3, &split, &tiny_config(2)).unwrap();
        assert!(!pw.excluded);
        assert!(pw.rmse_at_optimum < 1e-9);
    }

    #[test]
    fn forecast_bundle_invariants_hold() {
        let mut rng = StdRng::seed_from_u64(11);
        let series: Vec<f64> = (0..SERIES_LEN).map(|_| rng.gen_range(0.0f64..8.0).round()).collect();
        let w = weights(0.4);
        let bundle = forecast_player(5, &series, &w, &tiny_config(3)).unwrap();
        assert_eq!(bundle.hybrid_fc.len(), FORECAST_HORIZON);
        for t in 0..FORECAST_HORIZON {
            let expected = 0.4 * bundle.arima_fc[t] + 0.6 * bundle.lstm_fc[t];
            assert_eq!(bundle.hybrid_fc[t], expected);
        }
        assert_eq!(bundle.total, bundle.hybrid_fc.iter().sum::<f64>());
    }

    #[test]
    fn zero_history_player_forecasts_near_zero() {
        let series = vec![0.0; SERIES_LEN];
        let bundle = forecast_player(2, &series, &weights(0.4), &tiny_config(4)).unwrap();
        assert!(bundle.total.abs() < 1e-6, "total = {}", bundle.total);
    }

    #[test]
    fn forecast_player_is_deterministic() {
        let mut rng = StdRng::seed_from_u64(14);
        let series: Vec<f64> = (0..SERIES_LEN).map(|_| rng.gen_range(0.0f64..6.0).round()).collect();
        let a = forecast_player(8, &series, &weights(0.5), &tiny_config(5)).unwrap();
        let b = forecast_player(8, &series, &weights(0.5), &tiny_config(5)).unwrap();
        assert_eq!(a.hybrid_fc, b.hybrid_fc);
        assert_eq!(a.total, b.total);
    }
}
