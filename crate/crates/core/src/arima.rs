//! Seasonal ARIMA(p,d,q)(P,D,Q)_s fitting by conditional sum of squares,
//! AIC order selection over a candidate grid, and multi-step forecasting.
//!
//! Estimation minimises the one-step squared residuals of the multiplicative
//! SARMA recursion on the differenced series (pre-sample residuals zero,
//! pre-sample observations pinned to the differenced-series mean) with a
//! fixed-schedule Nelder-Mead search, so fitting is fully deterministic.

use std::fmt;

use rand::prelude::*;
use rand_distr::StandardNormal;

use crate::optim::nelder_mead;
use crate::stats::{self, StatsError};

/// Loss assigned to unstable or numerically broken parameter points so the
/// simplex search can back away without aborting.
const PENALTY: f64 = 1e12;

/// Roots of the AR/MA polynomials must have modulus above this.
const ROOT_MARGIN: f64 = 1.001;

/// Floor for the residual variance; keeps the log-likelihood finite on
/// series the model reproduces exactly.
const SIGMA2_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum ArimaError {
    TooShort { len: usize, required: usize },
    InvalidOrder(String),
    UnstableCoefficients,
    EmptyGrid,
    AllCandidatesFailed { tried: usize, first_error: String },
    NonFiniteInput,
    Stats(StatsError),
}

impl fmt::Display for ArimaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArimaError::TooShort { len, required } => write!(
                f,
                "differenced series of length {len} too short, need at least {required}"
            ),
            ArimaError::InvalidOrder(msg) => write!(f, "invalid order: {msg}"),
            ArimaError::UnstableCoefficients => {
                write!(f, "coefficients outside the stationary/invertible region")
            }
            ArimaError::EmptyGrid => write!(f, "candidate order grid is empty"),
            ArimaError::AllCandidatesFailed { tried, first_error } => {
                write!(f, "all {tried} candidate orders failed; first error: {first_error}")
            }
            ArimaError::NonFiniteInput => write!(f, "series contains non-finite values"),
            ArimaError::Stats(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ArimaError {}

impl From<StatsError> for ArimaError {
    fn from(e: StatsError) -> Self {
        ArimaError::Stats(e)
    }
}

/// Model order `(p,d,q)(P,D,Q)_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub sp: usize,
    pub sd: usize,
    pub sq: usize,
    pub s: usize,
}

impl ArimaOrder {
    pub fn new(
        p: usize,
        d: usize,
        q: usize,
        sp: usize,
        sd: usize,
        sq: usize,
        s: usize,
    ) -> Result<Self, ArimaError> {
        if p > 2 || q > 2 {
            return Err(ArimaError::InvalidOrder(format!("p={p}, q={q} exceed 2")));
        }
        if d > 1 || sp > 1 || sd > 1 || sq > 1 {
            return Err(ArimaError::InvalidOrder(format!(
                "d={d}, P={sp}, D={sd}, Q={sq} exceed 1"
            )));
        }
        if s < 2 {
            return Err(ArimaError::InvalidOrder(format!("seasonal period {s} < 2")));
        }
        Ok(ArimaOrder { p, d, q, sp, sd, sq, s })
    }

    /// Nonseasonal-only shorthand with the default period 12.
    pub fn nonseasonal(p: usize, d: usize, q: usize) -> Result<Self, ArimaError> {
        ArimaOrder::new(p, d, q, 0, 0, 0, 12)
    }

    /// Whether the fit carries a constant (mean) term: only when no
    /// differencing is applied, so differenced models stay drift-free.
    pub fn has_constant(&self) -> bool {
        self.d + self.sd == 0
    }

    /// Number of optimised coefficients (AR + MA + seasonal + constant).
    pub fn n_coefficients(&self) -> usize {
        self.p + self.q + self.sp + self.sq + usize::from(self.has_constant())
    }

    /// Key used for lexicographic tie-breaking in order selection.
    pub fn lex_key(&self) -> (usize, usize, usize, usize, usize, usize) {
        (self.p, self.d, self.q, self.sp, self.sd, self.sq)
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}.{}.{})({}.{}.{}){}",
            self.p, self.d, self.q, self.sp, self.sd, self.sq, self.s
        )
    }
}

/// Default candidate grid: p,q in 0..=2, d in 0..=1, P,D,Q in 0..=1 at a
/// fixed seasonal period, enumerated in (p,d,q,P,D,Q) order.
pub fn default_grid(s: usize) -> Vec<ArimaOrder> {
    let mut grid = Vec::with_capacity(144);
    for p in 0..=2 {
        for d in 0..=1 {
            for q in 0..=2 {
                for sp in 0..=1 {
                    for sd in 0..=1 {
                        for sq in 0..=1 {
                            grid.push(ArimaOrder { p, d, q, sp, sd, sq, s });
                        }
                    }
                }
            }
        }
    }
    grid
}

/// SARMA coefficient set on the differenced scale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Coefficients {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
    /// Process mean of the differenced series; `None` when d + D > 0.
    pub constant: Option<f64>,
}

/// A fitted model.
#[derive(Debug, Clone)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
    pub constant: Option<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub n_effective: usize,
    pub converged: bool,
}

impl ArimaFit {
    pub fn coefficients(&self) -> Coefficients {
        Coefficients {
            ar: self.ar.clone(),
            ma: self.ma.clone(),
            sar: self.sar.clone(),
            sma: self.sma.clone(),
            constant: self.constant,
        }
    }

    /// Parameter count entering the AIC penalty (coefficients + variance).
    pub fn n_params(&self) -> usize {
        self.order.n_coefficients() + 1
    }
}

// ---------------------------------------------------------------------------
// Polynomial helpers
// ---------------------------------------------------------------------------

/// Coefficients of `1 - c1 z - c2 z...` for AR-style polys (`sign = -1`) or
/// `1 + c1 z + ...` for MA-style (`sign = +1`), spread out at the given lag.
fn lag_poly(coeffs: &[f64], sign: f64, lag: usize) -> Vec<f64> {
    let mut poly = vec![0.0; coeffs.len() * lag + 1];
    poly[0] = 1.0;
    for (i, &c) in coeffs.iter().enumerate() {
        poly[(i + 1) * lag] = sign * c;
    }
    poly
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Smallest root modulus of a degree <= 2 polynomial `c0 + c1 z + c2 z^2`
/// (trailing zeros trimmed). Returns infinity when there are no roots.
fn min_root_modulus(poly: &[f64]) -> f64 {
    let mut coeffs = poly.to_vec();
    while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    match coeffs.len() {
        0 | 1 => f64::INFINITY,
        2 => (coeffs[0] / coeffs[1]).abs(),
        3 => {
            let (c0, c1, c2) = (coeffs[0], coeffs[1], coeffs[2]);
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc >= 0.0 {
                let r1 = (-c1 + disc.sqrt()) / (2.0 * c2);
                let r2 = (-c1 - disc.sqrt()) / (2.0 * c2);
                r1.abs().min(r2.abs())
            } else {
                // Complex conjugate pair: |z|^2 = c0 / c2.
                (c0 / c2).abs().sqrt()
            }
        }
        _ => unreachable!("orders are capped at 2"),
    }
}

/// True when every AR polynomial is stationary and every MA polynomial
/// invertible, with the configured safety margin.
fn coefficients_stable(coeffs: &Coefficients) -> bool {
    [
        lag_poly(&coeffs.ar, -1.0, 1),
        lag_poly(&coeffs.sar, -1.0, 1),
        lag_poly(&coeffs.ma, 1.0, 1),
        lag_poly(&coeffs.sma, 1.0, 1),
    ]
    .iter()
    .all(|poly| min_root_modulus(poly) > ROOT_MARGIN)
}

/// Expanded multiplicative polynomials: `(combined_ar, combined_ma)`, both
/// starting with coefficient 1 at lag 0.
fn expand(coeffs: &Coefficients, s: usize) -> (Vec<f64>, Vec<f64>) {
    let ar = poly_mul(&lag_poly(&coeffs.ar, -1.0, 1), &lag_poly(&coeffs.sar, -1.0, s));
    let ma = poly_mul(&lag_poly(&coeffs.ma, 1.0, 1), &lag_poly(&coeffs.sma, 1.0, s));
    (ar, ma)
}

// ---------------------------------------------------------------------------
// Conditional sum of squares
// ---------------------------------------------------------------------------

/// Applies the order's nonseasonal then seasonal differencing.
fn apply_differencing(series: &[f64], order: &ArimaOrder) -> Result<Vec<f64>, ArimaError> {
    let z = stats::difference(series, order.d, 1)?;
    Ok(stats::difference(&z, order.sd, order.s)?)
}

/// One-step residuals of the SARMA recursion on an already-differenced
/// series. Pre-sample observations take the series mean, pre-sample
/// residuals are zero.
fn residuals(
    diffed: &[f64],
    diffed_mean: f64,
    combined_ar: &[f64],
    combined_ma: &[f64],
    constant: f64,
) -> Vec<f64> {
    let n = diffed.len();
    let presample = diffed_mean - constant;
    let mut resid = Vec::with_capacity(n);
    for t in 0..n {
        let mut e = diffed[t] - constant;
        for (k, &c) in combined_ar.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            let v = if t >= k { diffed[t - k] - constant } else { presample };
            e += c * v;
        }
        for (k, &c) in combined_ma.iter().enumerate().skip(1) {
            if c == 0.0 || t < k {
                continue;
            }
            e -= c * resid[t - k];
        }
        resid.push(e);
    }
    resid
}

fn css_on_diffed(
    diffed: &[f64],
    diffed_mean: f64,
    coeffs: &Coefficients,
    s: usize,
) -> f64 {
    let (car, cma) = expand(coeffs, s);
    let constant = coeffs.constant.unwrap_or(0.0);
    let resid = residuals(diffed, diffed_mean, &car, &cma, constant);
    let loss: f64 = resid.iter().map(|e| e * e).sum();
    if loss.is_finite() {
        loss
    } else {
        PENALTY
    }
}

/// Conditional sum of squared one-step residuals for the given coefficients.
///
/// Differences the series per the order first. Non-finite intermediates come
/// back as a large finite penalty rather than an error so a search routine
/// can keep moving.
pub fn css_loss(
    order: &ArimaOrder,
    coeffs: &Coefficients,
    series: &[f64],
) -> Result<f64, ArimaError> {
    let diffed = apply_differencing(series, order)?;
    let mean = diffed.iter().sum::<f64>() / diffed.len() as f64;
    Ok(css_on_diffed(&diffed, mean, coeffs, order.s))
}

fn unpack_params(params: &[f64], order: &ArimaOrder) -> Coefficients {
    let mut it = params.iter().copied();
    let ar: Vec<f64> = it.by_ref().take(order.p).collect();
    let ma: Vec<f64> = it.by_ref().take(order.q).collect();
    let sar: Vec<f64> = it.by_ref().take(order.sp).collect();
    let sma: Vec<f64> = it.by_ref().take(order.sq).collect();
    let constant = order.has_constant().then(|| it.next().unwrap_or(0.0));
    Coefficients { ar, ma, sar, sma, constant }
}

/// Fits one order by minimising the CSS loss with Nelder-Mead from a zero
/// start (simplex step 0.1, spread tolerance 1e-8, at most 500 evaluations
/// per coefficient). Unstable regions are repelled with a penalty loss.
pub fn fit(series: &[f64], order: &ArimaOrder) -> Result<ArimaFit, ArimaError> {
    if series.iter().any(|x| !x.is_finite()) {
        return Err(ArimaError::NonFiniteInput);
    }
    let diffed = apply_differencing(series, order)?;
    let n_eff = diffed.len();
    let n_coef = order.n_coefficients();
    if n_eff < 10 + n_coef {
        return Err(ArimaError::TooShort { len: n_eff, required: 10 + n_coef });
    }
    let mean = diffed.iter().sum::<f64>() / n_eff as f64;

    let objective = |params: &[f64]| {
        let coeffs = unpack_params(params, order);
        if !coefficients_stable(&coeffs) {
            return PENALTY;
        }
        css_on_diffed(&diffed, mean, &coeffs, order.s)
    };

    let start = vec![0.0; n_coef];
    let result = nelder_mead(objective, &start, 0.1, 1e-8, 500 * n_coef.max(1));
    let coeffs = unpack_params(&result.best, order);
    let loss = result.best_value;

    let sigma2 = (loss / n_eff as f64).max(SIGMA2_FLOOR);
    let loglik = -(n_eff as f64) / 2.0 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let k = n_coef + 1;
    let aic = 2.0 * k as f64 - 2.0 * loglik;

    Ok(ArimaFit {
        order: *order,
        ar: coeffs.ar,
        ma: coeffs.ma,
        sar: coeffs.sar,
        sma: coeffs.sma,
        constant: coeffs.constant,
        sigma2,
        loglik,
        aic,
        n_effective: n_eff,
        converged: result.converged,
    })
}

/// White-noise fit around a constant, used as the degenerate bypass for
/// flat series where the ACF (and the CSS surface) carry no information.
pub fn constant_fit(value: f64, n: usize, s: usize) -> ArimaFit {
    let order = ArimaOrder { p: 0, d: 0, q: 0, sp: 0, sd: 0, sq: 0, s };
    let sigma2 = SIGMA2_FLOOR;
    let n_eff = n.max(1);
    let loglik = -(n_eff as f64) / 2.0 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let k = 2; // constant + variance
    ArimaFit {
        order,
        ar: Vec::new(),
        ma: Vec::new(),
        sar: Vec::new(),
        sma: Vec::new(),
        constant: Some(value),
        sigma2,
        loglik,
        aic: 2.0 * k as f64 - 2.0 * loglik,
        n_effective: n_eff,
        converged: true,
    }
}

fn is_constant(series: &[f64]) -> bool {
    series.windows(2).all(|w| w[0] == w[1])
}

/// Fits every candidate order and keeps the lowest AIC; ties go to fewer
/// parameters, then the lexicographically smaller (p,d,q,P,D,Q). Constant
/// series short-circuit to [`constant_fit`].
pub fn select_order(series: &[f64], grid: &[ArimaOrder]) -> Result<ArimaFit, ArimaError> {
    if grid.is_empty() {
        return Err(ArimaError::EmptyGrid);
    }
    if series.is_empty() {
        return Err(ArimaError::TooShort { len: 0, required: 1 });
    }
    if is_constant(series) {
        return Ok(constant_fit(series[0], series.len(), grid[0].s));
    }

    let mut best: Option<ArimaFit> = None;
    let mut first_error: Option<String> = None;
    for order in grid {
        match fit(series, order) {
            Ok(candidate) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        let ck = (candidate.aic, candidate.n_params(), candidate.order.lex_key());
                        let bk = (b.aic, b.n_params(), b.order.lex_key());
                        ck.0 < bk.0 || (ck.0 == bk.0 && (ck.1, ck.2) < (bk.1, bk.2))
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some(e.to_string());
                }
            }
        }
    }
    best.ok_or_else(|| ArimaError::AllCandidatesFailed {
        tried: grid.len(),
        first_error: first_error.unwrap_or_else(|| "no candidates".into()),
    })
}

/// Forecasts `h` steps ahead on the original scale: runs the SARMA recursion
/// forward with future residuals zero, then undoes the differencing.
pub fn forecast(fit: &ArimaFit, series: &[f64], h: usize) -> Result<Vec<f64>, ArimaError> {
    assert!(h >= 1, "forecast horizon must be at least 1");
    let order = &fit.order;
    let z = stats::difference(series, order.d, 1)?;
    let w = stats::difference(&z, order.sd, order.s)?;
    let n = w.len();
    let mean = w.iter().sum::<f64>() / n as f64;

    let coeffs = fit.coefficients();
    let (car, cma) = expand(&coeffs, order.s);
    let constant = coeffs.constant.unwrap_or(0.0);
    let presample = mean - constant;

    // In-sample residuals feed the MA terms of the first forecast steps.
    let mut resid = residuals(&w, mean, &car, &cma, constant);
    resid.resize(n + h, 0.0);

    // Centered values, extended in place as forecasts are produced.
    let mut values: Vec<f64> = w.iter().map(|x| x - constant).collect();
    for t in n..n + h {
        let mut v = 0.0;
        for (k, &c) in car.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            let past = if t >= k { values[t - k] } else { presample };
            v -= c * past;
        }
        for (k, &c) in cma.iter().enumerate().skip(1) {
            if c == 0.0 || t < k {
                continue;
            }
            v += c * resid[t - k];
        }
        values.push(v);
    }

    // Back to the original scale: seasonal integration, then nonseasonal.
    let mut w_ext: Vec<f64> = values.iter().map(|v| v + constant).collect();
    w_ext.truncate(n + h);
    let z_ext = stats::integrate(&w_ext, &z[..order.sd * order.s], order.sd, order.s)?;
    let x_ext = stats::integrate(&z_ext, &series[..order.d], order.d, 1)?;
    Ok(x_ext[series.len()..].to_vec())
}

/// Simulates a SARIMA path with Gaussian innovations; deterministic for a
/// fixed seed. Mostly a test oracle for the estimation code.
pub fn simulate(
    order: &ArimaOrder,
    coeffs: &Coefficients,
    noise_sd: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, ArimaError> {
    if !coefficients_stable(coeffs) {
        return Err(ArimaError::UnstableCoefficients);
    }
    let m = n
        .checked_sub(order.d + order.sd * order.s)
        .filter(|&m| m > 0)
        .ok_or(ArimaError::TooShort { len: n, required: order.d + order.sd * order.s + 1 })?;

    let (car, cma) = expand(coeffs, order.s);
    let constant = coeffs.constant.unwrap_or(0.0);
    let burn = 100 + 10 * order.s;
    let total = m + burn;

    let mut rng = StdRng::seed_from_u64(seed);
    let eps: Vec<f64> = (0..total)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            z * noise_sd
        })
        .collect();

    let mut v = Vec::with_capacity(total);
    for t in 0..total {
        let mut x = eps[t];
        for (k, &c) in car.iter().enumerate().skip(1) {
            if c == 0.0 || t < k {
                continue;
            }
            x -= c * v[t - k];
        }
        for (k, &c) in cma.iter().enumerate().skip(1) {
            if c == 0.0 || t < k {
                continue;
            }
            x += c * eps[t - k];
        }
        v.push(x);
    }

    let w: Vec<f64> = v[burn..].iter().map(|x| x + constant).collect();
    let z = stats::integrate(&w, &vec![0.0; order.sd * order.s], order.sd, order.s)?;
    let x = stats::integrate(&z, &vec![0.0; order.d], order.d, 1)?;
    Ok(x)
}

/// Writes fit summaries as `pid,order,aic,sigma2,converged` rows.
pub fn write_fit_summaries<W: std::io::Write>(
    writer: W,
    fits: &[(u32, ArimaFit)],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["pid", "order", "aic", "sigma2", "converged"])?;
    for (pid, fit) in fits {
        w.write_record([
            pid.to_string(),
            fit.order.to_string(),
            format!("{:.3}", fit.aic),
            format!("{:.6}", fit.sigma2),
            fit.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
