//! Shared numeric primitives: differencing and its inverse, ACF/PACF,
//! RMSE and min-max scaling.
//!
//! Everything here is a pure function over `&[f64]`. Callers are expected to
//! hand in finite values; the fitting layers validate their inputs before
//! reaching this module.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    /// Series shorter than the operation requires.
    TooShort { len: usize, required: usize },
    /// Paired series of different lengths.
    LengthMismatch { left: usize, right: usize },
    /// Zero-variance series where variance is needed (ACF/PACF).
    ConstantSeries,
    /// Seed slice for `integrate` has the wrong length.
    SeedLength { got: usize, required: usize },
    /// Lag larger than the series allows.
    BadLag { lag: usize, len: usize },
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::TooShort { len, required } => {
                write!(f, "series of length {len} too short, need at least {required}")
            }
            StatsError::LengthMismatch { left, right } => {
                write!(f, "series lengths differ: {left} vs {right}")
            }
            StatsError::ConstantSeries => write!(f, "series is constant (zero variance)"),
            StatsError::SeedLength { got, required } => {
                write!(f, "seed has {got} values, need exactly {required}")
            }
            StatsError::BadLag { lag, len } => {
                write!(f, "lag {lag} invalid for series of length {len}")
            }
        }
    }
}

impl std::error::Error for StatsError {}

/// `d`-fold differencing at the given lag: one pass maps
/// `x` to `x[t + lag] - x[t]`. `d = 0` returns the input unchanged.
pub fn difference(series: &[f64], d: usize, lag: usize) -> Result<Vec<f64>, StatsError> {
    assert!(lag > 0, "lag must be positive");
    if series.len() <= d * lag {
        return Err(StatsError::TooShort {
            len: series.len(),
            required: d * lag + 1,
        });
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(lag + 1).map(|w| w[lag] - w[0]).collect();
    }
    Ok(out)
}

/// Inverse of [`difference`]: rebuilds the original series from its `d`-fold
/// lag-`lag` differences and the first `d * lag` original values.
///
/// `integrate(difference(x), &x[..d * lag])` reproduces `x` exactly up to
/// floating-point addition, and appending extra differences extends the
/// series past its original end (how forecasts return to the points scale).
pub fn integrate(
    diffs: &[f64],
    initial: &[f64],
    d: usize,
    lag: usize,
) -> Result<Vec<f64>, StatsError> {
    assert!(lag > 0, "lag must be positive");
    if initial.len() != d * lag {
        return Err(StatsError::SeedLength {
            got: initial.len(),
            required: d * lag,
        });
    }
    if d == 0 {
        return Ok(diffs.to_vec());
    }
    // First `lag` values of the (d-1)-fold differenced series, recovered from
    // the seed alone.
    let head = difference(initial, d - 1, lag)?;
    let mut level = head;
    level.reserve(diffs.len());
    for (t, &step) in diffs.iter().enumerate() {
        let prev = level[t];
        level.push(prev + step);
    }
    integrate(&level, &initial[..(d - 1) * lag], d - 1, lag)
}

/// Sample autocorrelation up to `max_lag` inclusive; `acf[0] == 1`.
///
/// Uses the biased estimator (full-series variance in the denominator), which
/// keeps every coefficient in `[-1, 1]`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>, StatsError> {
    let n = series.len();
    if n < 2 {
        return Err(StatsError::TooShort { len: n, required: 2 });
    }
    if max_lag >= n {
        return Err(StatsError::BadLag { lag: max_lag, len: n });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let denom: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
    if denom == 0.0 {
        return Err(StatsError::ConstantSeries);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let num: f64 = (k..n)
            .map(|t| (series[t] - mean) * (series[t - k] - mean))
            .sum();
        out.push(num / denom);
    }
    Ok(out)
}

/// Partial autocorrelation up to `max_lag`, by the Durbin-Levinson recursion
/// on the sample ACF. `pacf[0] == 1` by convention and `pacf[1] == acf[1]`.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>, StatsError> {
    let rho = acf(series, max_lag)?;
    let mut out = vec![1.0];
    if max_lag == 0 {
        return Ok(out);
    }
    // phi[j] holds the AR(k) coefficients of the current recursion level.
    let mut phi = vec![rho[1]];
    out.push(rho[1]);
    for k in 2..=max_lag {
        let num = rho[k] - (1..k).map(|j| phi[j - 1] * rho[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * rho[j]).sum::<f64>();
        let phi_kk = if den.abs() < 1e-12 { 0.0 } else { num / den };
        let prev = phi.clone();
        phi.push(phi_kk);
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - phi_kk * prev[k - j - 1];
        }
        out.push(phi_kk);
    }
    Ok(out)
}

/// Root mean squared error between two equal-length series.
pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64, StatsError> {
    if pred.len() != actual.len() {
        return Err(StatsError::LengthMismatch {
            left: pred.len(),
            right: actual.len(),
        });
    }
    if pred.is_empty() {
        return Err(StatsError::TooShort { len: 0, required: 1 });
    }
    let mse = pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).powi(2))
        .sum::<f64>()
        / pred.len() as f64;
    Ok(mse.sqrt())
}

/// Affine map parameters produced by [`minmax_scale`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleParams {
    pub min: f64,
    pub max: f64,
}

impl ScaleParams {
    pub fn of(series: &[f64]) -> Self {
        let min = series.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        ScaleParams { min, max }
    }

    /// Maps a raw value into `[0, 1]`; a degenerate (constant) range maps
    /// everything to 0.5.
    pub fn apply(&self, x: f64) -> f64 {
        if self.max == self.min {
            0.5
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    /// Inverse of [`ScaleParams::apply`]. For a degenerate range every scaled
    /// value maps back to the constant.
    pub fn invert(&self, y: f64) -> f64 {
        self.min + y * (self.max - self.min)
    }
}

/// Min-max scales a series into `[0, 1]` and returns the parameters needed to
/// undo the map. A constant series scales to all 0.5.
pub fn minmax_scale(series: &[f64]) -> (Vec<f64>, ScaleParams) {
    let params = ScaleParams::of(series);
    let scaled = series.iter().map(|&x| params.apply(x)).collect();
    (scaled, params)
}
