//! Single-layer LSTM trained on a min-max-scaled series framed as sliding
//! windows, with a recursive multi-step forecast.
//!
//! Training is full-batch gradient descent with adaptive moments over the
//! mean squared one-step error, gradients computed by backpropagation
//! through time. Everything is seeded and single-threaded per model, so a
//! given (series, config) pair always produces bit-identical parameters.

use std::fmt;

use rand::prelude::*;
use serde_json::{json, Value};

use crate::stats::{minmax_scale, ScaleParams};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const INIT_RANGE: f64 = 0.08;

#[derive(Debug, Clone, PartialEq)]
pub enum LstmError {
    TooShort { len: usize, required: usize },
    BadConfig(String),
    BadModelJson(String),
}

impl fmt::Display for LstmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LstmError::TooShort { len, required } => {
                write!(f, "series of length {len} too short, need at least {required}")
            }
            LstmError::BadConfig(msg) => write!(f, "bad config: {msg}"),
            LstmError::BadModelJson(msg) => write!(f, "bad model json: {msg}"),
        }
    }
}

impl std::error::Error for LstmError {}

#[derive(Debug, Clone)]
pub struct LstmConfig {
    pub hidden_size: usize,
    pub window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub grad_clip_norm: f64,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            hidden_size: 32,
            window: 10,
            epochs: 200,
            learning_rate: 0.001,
            grad_clip_norm: 5.0,
            seed: 42,
        }
    }
}

impl LstmConfig {
    fn validate(&self) -> Result<(), LstmError> {
        if self.hidden_size == 0 || self.window == 0 || self.epochs == 0 {
            return Err(LstmError::BadConfig("sizes and epochs must be positive".into()));
        }
        if self.learning_rate <= 0.0 || self.grad_clip_norm <= 0.0 {
            return Err(LstmError::BadConfig("rates must be positive".into()));
        }
        Ok(())
    }
}

/// Flat parameter layout: for each gate (input, forget, output, candidate)
/// the input weights (H), recurrent matrix (H x H, row-major), and bias (H);
/// then the output projection weights (H) and bias (1).
#[derive(Debug, Clone, Copy)]
struct Layout {
    h: usize,
}

impl Layout {
    fn gate_block(&self) -> usize {
        self.h + self.h * self.h + self.h
    }
    fn total(&self) -> usize {
        4 * self.gate_block() + self.h + 1
    }
    fn w(&self, gate: usize) -> usize {
        gate * self.gate_block()
    }
    fn u(&self, gate: usize) -> usize {
        self.w(gate) + self.h
    }
    fn b(&self, gate: usize) -> usize {
        self.u(gate) + self.h * self.h
    }
    fn proj_w(&self) -> usize {
        4 * self.gate_block()
    }
    fn proj_b(&self) -> usize {
        self.proj_w() + self.h
    }
}

const GATE_INPUT: usize = 0;
const GATE_FORGET: usize = 1;
const GATE_OUTPUT: usize = 2;
const GATE_CANDIDATE: usize = 3;
const GATE_NAMES: [(&str, &str, &str); 4] = [
    ("wi", "ui", "bi"),
    ("wf", "uf", "bf"),
    ("wo", "uo", "bo"),
    ("wc", "uc", "bc"),
];

#[derive(Debug, Clone)]
pub struct LstmModel {
    pub hidden_size: usize,
    pub window: usize,
    params: Vec<f64>,
    pub scale: ScaleParams,
}

/// Per-epoch training diagnostics.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub final_loss: f64,
    pub epoch_losses: Vec<f64>,
    /// Set when the series was constant and training was skipped; the
    /// degenerate scale already pins every forecast to the constant.
    pub skipped_degenerate: bool,
}

/// Supervised framing: overlapping windows of length `window` paired with the
/// next value, in chronological order.
pub fn make_windows(series: &[f64], window: usize) -> Result<Vec<(Vec<f64>, f64)>, LstmError> {
    assert!(window > 0, "window must be positive");
    if series.len() <= window {
        return Err(LstmError::TooShort { len: series.len(), required: window + 1 });
    }
    Ok((0..series.len() - window)
        .map(|i| (series[i..i + window].to_vec(), series[i + window]))
        .collect())
}

/// Cephes-style exp: split off a power of two, evaluate the remainder with
/// the classic rational approximation (relative error ~1 ulp). Noticeably
/// faster than the libm call in the gate-activation hot loop, and just as
/// deterministic.
#[allow(clippy::excessive_precision)] // canonical coefficients, kept verbatim
fn fast_exp(x: f64) -> f64 {
    const LOG2E: f64 = std::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.93145751953125e-1;
    const LN2_LO: f64 = 1.42860682030941723212e-6;
    const P: [f64; 3] =
        [1.26177193074810590878e-4, 3.02994407707441961300e-2, 9.99999999999999999910e-1];
    const Q: [f64; 4] = [
        3.00198505138664455042e-6,
        2.52448340349684104192e-3,
        2.27265548208155028766e-1,
        2.00000000000000000005e0,
    ];
    if x > 709.0 {
        return f64::INFINITY;
    }
    if x < -709.0 {
        return 0.0;
    }
    let k = (x * LOG2E + 0.5).floor();
    let r = x - k * LN2_HI - k * LN2_LO;
    let r2 = r * r;
    let p = r * (P[2] + r2 * (P[1] + r2 * P[0]));
    let q = Q[3] + r2 * (Q[2] + r2 * (Q[1] + r2 * Q[0]));
    let e = 1.0 + 2.0 * p / (q - p);
    // Scale by 2^k in two steps so k near the exponent limits stays exact.
    let k = k as i32;
    let (k1, k2) = (k / 2, k - k / 2);
    let pow2 = |k: i32| f64::from_bits(((k + 1023) as u64) << 52);
    e * pow2(k1) * pow2(k2)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + fast_exp(-x))
}

/// tanh through [`fast_exp`]: `1 - 2 / (exp(2x) + 1)`, odd-extended.
fn fast_tanh(x: f64) -> f64 {
    let ax = x.abs();
    let t = 1.0 - 2.0 / (fast_exp(2.0 * ax) + 1.0);
    if x < 0.0 {
        -t
    } else {
        t
    }
}

/// Dot product with four independent accumulators. The evaluation order is
/// fixed, so results stay bit-identical run to run, while the independent
/// chains let the compiler keep the pipeline full.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..n {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `out += s * v`, elementwise; no reduction, so this vectorises cleanly.
#[inline]
fn axpy(out: &mut [f64], s: f64, v: &[f64]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += s * x;
    }
}

/// Scratch buffers for one window's forward/backward pass, reused across
/// windows and epochs to keep training allocation-free.
struct Workspace {
    // Per-step caches, flattened T x H.
    gate_i: Vec<f64>,
    gate_f: Vec<f64>,
    gate_o: Vec<f64>,
    gate_g: Vec<f64>,
    cell: Vec<f64>,
    cell_tanh: Vec<f64>,
    hidden: Vec<f64>,
    // Backward buffers, H each.
    dh: Vec<f64>,
    dc_carry: Vec<f64>,
    da: [Vec<f64>; 4],
}

impl Workspace {
    fn new(window: usize, h: usize) -> Self {
        let th = window * h;
        Workspace {
            gate_i: vec![0.0; th],
            gate_f: vec![0.0; th],
            gate_o: vec![0.0; th],
            gate_g: vec![0.0; th],
            cell: vec![0.0; th],
            cell_tanh: vec![0.0; th],
            hidden: vec![0.0; th],
            dh: vec![0.0; h],
            dc_carry: vec![0.0; h],
            da: [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]],
        }
    }
}

/// Forward pass over one window, filling the caches; returns the projection
/// of the final hidden state.
fn forward_cached(params: &[f64], layout: Layout, input: &[f64], ws: &mut Workspace) -> f64 {
    let h = layout.h;
    for (t, &x) in input.iter().enumerate() {
        let row = t * h;
        let prev = t.checked_sub(1).map(|p| p * h);
        // Pre-activations per gate, reusing the da buffers as scratch.
        for gate in 0..4 {
            let w = &params[layout.w(gate)..layout.w(gate) + h];
            let b = &params[layout.b(gate)..layout.b(gate) + h];
            let acts = &mut ws.da[gate];
            for j in 0..h {
                acts[j] = w[j] * x + b[j];
            }
            if let Some(prow) = prev {
                let h_prev = &ws.hidden[prow..prow + h];
                let u = &params[layout.u(gate)..layout.u(gate) + h * h];
                for j in 0..h {
                    acts[j] += dot(&u[j * h..j * h + h], h_prev);
                }
            }
        }
        for j in 0..h {
            let gi = sigmoid(ws.da[GATE_INPUT][j]);
            let gf = sigmoid(ws.da[GATE_FORGET][j]);
            let go = sigmoid(ws.da[GATE_OUTPUT][j]);
            let gg = fast_tanh(ws.da[GATE_CANDIDATE][j]);
            let c_prev = prev.map_or(0.0, |prow| ws.cell[prow + j]);
            let c = gf * c_prev + gi * gg;
            let tc = fast_tanh(c);
            ws.gate_i[row + j] = gi;
            ws.gate_f[row + j] = gf;
            ws.gate_o[row + j] = go;
            ws.gate_g[row + j] = gg;
            ws.cell[row + j] = c;
            ws.cell_tanh[row + j] = tc;
            ws.hidden[row + j] = go * tc;
        }
    }
    let last = (input.len() - 1) * h;
    params[layout.proj_b()]
        + dot(&params[layout.proj_w()..layout.proj_w() + h], &ws.hidden[last..last + h])
}

/// Backward pass for one window given `dy = dL/dprediction`; accumulates
/// into `grad`.
fn backward_cached(
    params: &[f64],
    layout: Layout,
    input: &[f64],
    dy: f64,
    ws: &mut Workspace,
    grad: &mut [f64],
) {
    let h = layout.h;
    let steps = input.len();
    let last = (steps - 1) * h;

    grad[layout.proj_b()] += dy;
    for j in 0..h {
        grad[layout.proj_w() + j] += dy * ws.hidden[last + j];
        ws.dh[j] = dy * params[layout.proj_w() + j];
        ws.dc_carry[j] = 0.0;
    }

    for t in (0..steps).rev() {
        let row = t * h;
        let prev = t.checked_sub(1).map(|p| p * h);
        let x = input[t];
        for j in 0..h {
            let gi = ws.gate_i[row + j];
            let gf = ws.gate_f[row + j];
            let go = ws.gate_o[row + j];
            let gg = ws.gate_g[row + j];
            let tc = ws.cell_tanh[row + j];
            let c_prev = prev.map_or(0.0, |prow| ws.cell[prow + j]);

            let d_o = ws.dh[j] * tc;
            let d_c = ws.dc_carry[j] + ws.dh[j] * go * (1.0 - tc * tc);
            let d_f = d_c * c_prev;
            let d_i = d_c * gg;
            let d_g = d_c * gi;
            ws.dc_carry[j] = d_c * gf;

            ws.da[GATE_INPUT][j] = d_i * gi * (1.0 - gi);
            ws.da[GATE_FORGET][j] = d_f * gf * (1.0 - gf);
            ws.da[GATE_OUTPUT][j] = d_o * go * (1.0 - go);
            ws.da[GATE_CANDIDATE][j] = d_g * (1.0 - gg * gg);
        }
        if prev.is_some() {
            ws.dh.fill(0.0);
        }
        for gate in 0..4 {
            let da = &ws.da[gate];
            axpy(&mut grad[layout.w(gate)..layout.w(gate) + h], x, da);
            for (g, d) in grad[layout.b(gate)..layout.b(gate) + h].iter_mut().zip(da) {
                *g += d;
            }
            if let Some(prow) = prev {
                let h_prev = &ws.hidden[prow..prow + h];
                let u = &params[layout.u(gate)..layout.u(gate) + h * h];
                let gu = &mut grad[layout.u(gate)..layout.u(gate) + h * h];
                for j in 0..h {
                    let daj = da[j];
                    axpy(&mut gu[j * h..j * h + h], daj, h_prev);
                    // dh for step t-1 flows back through row j of U.
                    axpy(&mut ws.dh, daj, &u[j * h..j * h + h]);
                }
            }
        }
    }
}

/// Mean squared one-step error over a window batch, plus the parameter
/// gradient when `grad` is supplied.
fn batch_loss(
    params: &[f64],
    layout: Layout,
    batch: &[(Vec<f64>, f64)],
    ws: &mut Workspace,
    mut grad: Option<&mut [f64]>,
) -> f64 {
    let n = batch.len() as f64;
    if let Some(g) = grad.as_deref_mut() {
        g.fill(0.0);
    }
    let mut loss = 0.0;
    for (input, target) in batch {
        let pred = forward_cached(params, layout, input, ws);
        let err = pred - target;
        loss += err * err;
        if let Some(g) = grad.as_deref_mut() {
            backward_cached(params, layout, input, 2.0 * err / n, ws, g);
        }
    }
    loss / n
}

impl LstmModel {
    fn layout(&self) -> Layout {
        Layout { h: self.hidden_size }
    }

    /// Runs the cell over one window (already on the scaled scale) and
    /// projects the final hidden state to a single value.
    pub fn forward(&self, input: &[f64]) -> f64 {
        assert_eq!(input.len(), self.window, "input must match the model window");
        let mut ws = Workspace::new(self.window, self.hidden_size);
        forward_cached(&self.params, self.layout(), input, &mut ws)
    }

    /// Recursive multi-step forecast on the original points scale: seeds with
    /// the last `window` observations, slides as predictions are appended.
    /// Outputs are inverse-scaled and deliberately not clamped (negative
    /// gameweek scores are legal).
    pub fn forecast_recursive(&self, series: &[f64], h: usize) -> Result<Vec<f64>, LstmError> {
        if series.len() < self.window {
            return Err(LstmError::TooShort { len: series.len(), required: self.window });
        }
        let mut buf: Vec<f64> = series[series.len() - self.window..]
            .iter()
            .map(|&x| self.scale.apply(x))
            .collect();
        let mut out = Vec::with_capacity(h);
        let mut ws = Workspace::new(self.window, self.hidden_size);
        for _ in 0..h {
            let pred = forward_cached(&self.params, self.layout(), &buf, &mut ws);
            out.push(self.scale.invert(pred));
            buf.rotate_left(1);
            *buf.last_mut().unwrap() = pred;
        }
        Ok(out)
    }

    /// Serialises the parameters as named arrays: `wi/wf/wo/wc` input
    /// weights, `ui/uf/uo/uc` recurrent matrices row-major, `bi/bf/bo/bc`
    /// biases, `proj` projection weights with the bias last, and the
    /// training scale.
    pub fn to_json(&self) -> Value {
        let layout = self.layout();
        let h = self.hidden_size;
        let arr = |start: usize, len: usize| -> Value { json!(self.params[start..start + len]) };
        let mut doc = serde_json::Map::new();
        doc.insert("hidden_size".into(), json!(h));
        doc.insert("window".into(), json!(self.window));
        for (gate, (w, u, b)) in GATE_NAMES.iter().enumerate() {
            doc.insert((*w).into(), arr(layout.w(gate), h));
            doc.insert((*u).into(), arr(layout.u(gate), h * h));
            doc.insert((*b).into(), arr(layout.b(gate), h));
        }
        doc.insert("proj".into(), arr(layout.proj_w(), h + 1));
        doc.insert("scale".into(), json!({"min": self.scale.min, "max": self.scale.max}));
        Value::Object(doc)
    }

    /// Inverse of [`LstmModel::to_json`].
    pub fn from_json(doc: &Value) -> Result<Self, LstmError> {
        let field = |name: &str| -> Result<&Value, LstmError> {
            doc.get(name)
                .ok_or_else(|| LstmError::BadModelJson(format!("missing field '{name}'")))
        };
        let nums = |name: &str, expected: usize| -> Result<Vec<f64>, LstmError> {
            let vals: Vec<f64> = field(name)?
                .as_array()
                .ok_or_else(|| LstmError::BadModelJson(format!("'{name}' is not an array")))?
                .iter()
                .map(|v| v.as_f64().unwrap_or(f64::NAN))
                .collect();
            if vals.len() != expected || vals.iter().any(|v| !v.is_finite()) {
                return Err(LstmError::BadModelJson(format!(
                    "'{name}' must hold {expected} finite numbers"
                )));
            }
            Ok(vals)
        };

        let h = field("hidden_size")?
            .as_u64()
            .ok_or_else(|| LstmError::BadModelJson("bad hidden_size".into()))?
            as usize;
        let window = field("window")?
            .as_u64()
            .ok_or_else(|| LstmError::BadModelJson("bad window".into()))?
            as usize;
        let layout = Layout { h };
        let mut params = vec![0.0; layout.total()];
        for (gate, (w, u, b)) in GATE_NAMES.iter().enumerate() {
            params[layout.w(gate)..layout.w(gate) + h].copy_from_slice(&nums(w, h)?);
            params[layout.u(gate)..layout.u(gate) + h * h].copy_from_slice(&nums(u, h * h)?);
            params[layout.b(gate)..layout.b(gate) + h].copy_from_slice(&nums(b, h)?);
        }
        params[layout.proj_w()..layout.proj_w() + h + 1].copy_from_slice(&nums("proj", h + 1)?);
        let scale = field("scale")?;
        let min = scale.get("min").and_then(Value::as_f64);
        let max = scale.get("max").and_then(Value::as_f64);
        let (Some(min), Some(max)) = (min, max) else {
            return Err(LstmError::BadModelJson("bad scale".into()));
        };
        Ok(LstmModel { hidden_size: h, window, params, scale: ScaleParams { min, max } })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    #[cfg(test)]
    pub(crate) fn params_mut(&mut self) -> &mut Vec<f64> {
        &mut self.params
    }
}

impl LstmModel {
    /// Freshly initialised, untrained model: weights uniform in the init
    /// range from the config's seed, forget-gate bias at 1 so early training
    /// does not flush the cell.
    pub fn seeded(series_scale: ScaleParams, config: &LstmConfig) -> Self {
        let layout = Layout { h: config.hidden_size };
        let mut rng = StdRng::seed_from_u64(config.seed);
        let mut params: Vec<f64> = (0..layout.total())
            .map(|_| rng.gen_range(-INIT_RANGE..INIT_RANGE))
            .collect();
        for j in 0..config.hidden_size {
            params[layout.b(GATE_FORGET) + j] = 1.0;
        }
        LstmModel {
            hidden_size: config.hidden_size,
            window: config.window,
            params,
            scale: series_scale,
        }
    }
}

fn init_model(series_scale: ScaleParams, config: &LstmConfig) -> LstmModel {
    LstmModel::seeded(series_scale, config)
}

/// Trains on the min-max-scaled series. Constant series skip training
/// entirely: the degenerate scale already maps every prediction back to the
/// constant, so the report is just flagged.
pub fn train(series: &[f64], config: &LstmConfig) -> Result<(LstmModel, TrainReport), LstmError> {
    config.validate()?;
    if series.len() < config.window + 2 {
        return Err(LstmError::TooShort { len: series.len(), required: config.window + 2 });
    }

    let (scaled, scale) = minmax_scale(series);
    let mut model = init_model(scale, config);
    if scale.min == scale.max {
        return Ok((
            model,
            TrainReport { final_loss: 0.0, epoch_losses: Vec::new(), skipped_degenerate: true },
        ));
    }

    let layout = model.layout();
    let batch = make_windows(&scaled, config.window)?;
    let mut ws = Workspace::new(config.window, config.hidden_size);
    let mut grad = vec![0.0; layout.total()];
    let mut m = vec![0.0; layout.total()];
    let mut v = vec![0.0; layout.total()];
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for step in 1..=config.epochs {
        let loss = batch_loss(&model.params, layout, &batch, &mut ws, Some(&mut grad));
        epoch_losses.push(loss);

        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > config.grad_clip_norm {
            let shrink = config.grad_clip_norm / norm;
            for g in grad.iter_mut() {
                *g *= shrink;
            }
        }

        let bc1 = 1.0 - ADAM_BETA1.powi(step as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(step as i32);
        for idx in 0..layout.total() {
            m[idx] = ADAM_BETA1 * m[idx] + (1.0 - ADAM_BETA1) * grad[idx];
            v[idx] = ADAM_BETA2 * v[idx] + (1.0 - ADAM_BETA2) * grad[idx] * grad[idx];
            let m_hat = m[idx] / bc1;
            let v_hat = v[idx] / bc2;
            model.params[idx] -= config.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }

    let final_loss = batch_loss(&model.params, layout, &batch, &mut ws, None);
    Ok((model, TrainReport { final_loss, epoch_losses, skipped_degenerate: false }))
}

/// Compares the analytic BPTT gradient to central finite differences with
/// the given perturbation, over a fixed sample of at most 50 parameters.
/// Returns the worst relative error.
pub fn gradient_check_with_eps(model: &LstmModel, batch: &[(Vec<f64>, f64)], eps: f64) -> f64 {
    let layout = model.layout();
    let mut ws = Workspace::new(model.window, model.hidden_size);
    let mut grad = vec![0.0; layout.total()];
    batch_loss(&model.params, layout, batch, &mut ws, Some(&mut grad));

    let total = layout.total();
    let sample: Vec<usize> = if total <= 50 {
        (0..total).collect()
    } else {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        rand::seq::index::sample(&mut rng, total, 50).into_vec()
    };

    let mut params = model.params.clone();
    let mut worst = 0.0f64;
    for idx in sample {
        let original = params[idx];
        params[idx] = original + eps;
        let up = batch_loss(&params, layout, batch, &mut ws, None);
        params[idx] = original - eps;
        let down = batch_loss(&params, layout, batch, &mut ws, None);
        params[idx] = original;
        let numeric = (up - down) / (2.0 * eps);
        let analytic = grad[idx];
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    worst
}

/// [`gradient_check_with_eps`] at the standard perturbation 1e-5.
pub fn gradient_check(model: &LstmModel, batch: &[(Vec<f64>, f64)]) -> f64 {
    gradient_check_with_eps(model, batch, 1e-5)
}
