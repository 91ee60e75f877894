use std::borrow::Borrow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::LstmError;
use crate::linalg::{dot, Matrix};

/// Gate order used for every per-gate array and for checkpoint layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Input,
    Forget,
    Cell,
    Output,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Cell, Gate::Output];

    pub fn name(self) -> &'static str {
        match self {
            Gate::Input => "input",
            Gate::Forget => "forget",
            Gate::Cell => "cell",
            Gate::Output => "output",
        }
    }
}

/// A `steps x features` input window, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    steps: usize,
    features: usize,
    data: Vec<f64>,
}

impl Sequence {
    pub fn new(steps: usize, features: usize, data: Vec<f64>) -> Result<Self, LstmError> {
        if steps == 0 || features == 0 || data.len() != steps * features {
            return Err(LstmError::ShapeMismatch(format!(
                "{} values cannot form a {steps}x{features} sequence",
                data.len()
            )));
        }
        Ok(Self {
            steps,
            features,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LstmError> {
        let features = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != features) {
            return Err(LstmError::ShapeMismatch("ragged sequence rows".into()));
        }
        Self::new(rows.len(), features, rows.concat())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn step(&self, t: usize) -> &[f64] {
        &self.data[t * self.features..(t + 1) * self.features]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmLayer {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Input weights per gate, `hidden x input`.
    pub w: [Matrix; 4],
    /// Recurrent weights per gate, `hidden x hidden`.
    pub u: [Matrix; 4],
    pub b: [Vec<f64>; 4],
}

impl LstmLayer {
    fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            w: std::array::from_fn(|_| Matrix::zeros(hidden_dim, input_dim)),
            u: std::array::from_fn(|_| Matrix::zeros(hidden_dim, hidden_dim)),
            b: std::array::from_fn(|_| vec![0.0; hidden_dim]),
        }
    }
}

/// All trainable tensors. Gradients share this layout.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub layers: Vec<LstmLayer>,
    /// Dense head weights, one per unit of the last layer.
    pub dense_w: Vec<f64>,
    /// Dense head bias (a single value).
    pub dense_b: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: &[usize]) -> Self {
        let mut layers = Vec::with_capacity(hidden.len());
        let mut fan_in = input_dim;
        for &h in hidden {
            layers.push(LstmLayer::zeros(fan_in, h));
            fan_in = h;
        }
        Self {
            layers,
            dense_w: vec![0.0; fan_in],
            dense_b: vec![0.0],
        }
    }

    pub fn zeros_like(&self) -> Self {
        let hidden: Vec<usize> = self.layers.iter().map(|l| l.hidden_dim).collect();
        Self::zeros(self.layers[0].input_dim, &hidden)
    }

    /// Parameter tensors in checkpoint order: per layer and per gate
    /// (input, forget, cell, output) `W`, `U`, `b`; then dense weights and
    /// dense bias.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for g in 0..4 {
                out.push(layer.w[g].as_slice());
                out.push(layer.u[g].as_slice());
                out.push(layer.b[g].as_slice());
            }
        }
        out.push(&self.dense_w);
        out.push(&self.dense_b);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            let LstmLayer { w, u, b, .. } = layer;
            for ((wg, ug), bg) in w.iter_mut().zip(u.iter_mut()).zip(b.iter_mut()) {
                out.push(wg.as_mut_slice());
                out.push(ug.as_mut_slice());
                out.push(bg.as_mut_slice());
            }
        }
        out.push(&mut self.dense_w);
        out.push(&mut self.dense_b);
        out
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for l in 0..self.layers.len() {
            for gate in Gate::ALL {
                for kind in ["W", "U", "b"] {
                    out.push(format!("layer{l}.{kind}_{}", gate.name()));
                }
            }
        }
        out.push("dense.w".into());
        out.push("dense.b".into());
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn add_assign(&mut self, other: &LstmParams) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }
}

/// Stacked LSTM with dropout before a single-output dense head.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmNetwork {
    params: LstmParams,
    dropout_rate: f64,
    seed: u64,
    version: u64,
}

fn check_architecture(
    input_dim: usize,
    hidden: &[usize],
    dropout_rate: f64,
) -> Result<(), LstmError> {
    if input_dim == 0 || hidden.is_empty() || hidden.contains(&0) {
        return Err(LstmError::InvalidConfig(format!(
            "input_dim {input_dim} and hidden sizes {hidden:?} must all be positive and non-empty"
        )));
    }
    if !(0.0..1.0).contains(&dropout_rate) {
        return Err(LstmError::InvalidConfig(format!(
            "dropout rate {dropout_rate} must lie in [0, 1)"
        )));
    }
    Ok(())
}

impl LstmNetwork {
    /// Weights drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` per matrix,
    /// forget-gate biases set to 1, remaining biases zero.
    pub fn new(
        input_dim: usize,
        hidden: &[usize],
        dropout_rate: f64,
        seed: u64,
    ) -> Result<Self, LstmError> {
        check_architecture(input_dim, hidden, dropout_rate)?;
        let mut params = LstmParams::zeros(input_dim, hidden);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fill = |m: &mut [f64], fan_in: usize, rng: &mut ChaCha8Rng| {
            let a = 1.0 / (fan_in as f64).sqrt();
            m.iter_mut().for_each(|v| *v = rng.random_range(-a..a));
        };
        for layer in &mut params.layers {
            for g in 0..4 {
                fill(layer.w[g].as_mut_slice(), layer.input_dim, &mut rng);
                fill(layer.u[g].as_mut_slice(), layer.hidden_dim, &mut rng);
            }
            layer.b[Gate::Forget as usize]
                .iter_mut()
                .for_each(|v| *v = 1.0);
        }
        let last = params.dense_w.len();
        fill(&mut params.dense_w, last, &mut rng);
        Ok(Self {
            params,
            dropout_rate,
            seed,
            version: 0,
        })
    }

    /// All parameters zero.
    pub fn zeroed(
        input_dim: usize,
        hidden: &[usize],
        dropout_rate: f64,
    ) -> Result<Self, LstmError> {
        check_architecture(input_dim, hidden, dropout_rate)?;
        Ok(Self {
            params: LstmParams::zeros(input_dim, hidden),
            dropout_rate,
            seed: 0,
            version: 0,
        })
    }

    pub fn from_params(
        params: LstmParams,
        dropout_rate: f64,
        seed: u64,
    ) -> Result<Self, LstmError> {
        let hidden: Vec<usize> = params.layers.iter().map(|l| l.hidden_dim).collect();
        let input_dim = params.layers.first().map_or(0, |l| l.input_dim);
        check_architecture(input_dim, &hidden, dropout_rate)?;
        let template = LstmParams::zeros(input_dim, &hidden);
        let consistent = template
            .tensors()
            .iter()
            .zip(params.tensors())
            .all(|(a, b)| a.len() == b.len())
            && params.layers.iter().all(|l| {
                l.w.iter().all(|m| m.shape() == (l.hidden_dim, l.input_dim))
                    && l.u
                        .iter()
                        .all(|m| m.shape() == (l.hidden_dim, l.hidden_dim))
            });
        if !consistent {
            return Err(LstmError::ShapeMismatch(
                "parameter tensors disagree with layer dims".into(),
            ));
        }
        Ok(Self {
            params,
            dropout_rate,
            seed,
            version: 0,
        })
    }

    pub fn params(&self) -> &LstmParams {
        &self.params
    }

    /// Mutable access to the parameters. Invalidates outstanding forward
    /// caches.
    pub fn params_mut(&mut self) -> &mut LstmParams {
        self.version += 1;
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.params.layers[0].input_dim
    }

    pub fn hidden_dims(&self) -> Vec<usize> {
        self.params.layers.iter().map(|l| l.hidden_dim).collect()
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Inference (dropout disabled).
    pub fn predict<S: Borrow<Sequence> + Sync>(&self, inputs: &[S]) -> Result<Vec<f64>, LstmError> {
        validate_batch(self, inputs)?;
        Ok(inputs
            .par_iter()
            .map(|s| {
                let trace = forward_sample(&self.params, s.borrow(), None);
                trace.prediction
            })
            .collect())
    }
}

/// Activations of one layer over one sequence.
#[derive(Clone, Debug)]
struct LayerTrace {
    hidden_dim: usize,
    /// Layer inputs, `T x input_dim`.
    inputs: Vec<f64>,
    /// Post-activation gates `[i | f | g | o]` per step, `T x 4h`.
    gates: Vec<f64>,
    /// Cell states, `T x h`.
    cells: Vec<f64>,
    /// `tanh(c)`, `T x h`.
    cells_tanh: Vec<f64>,
    /// Hidden states, `T x h`.
    hidden: Vec<f64>,
}

#[derive(Clone, Debug)]
struct SampleTrace {
    layers: Vec<LayerTrace>,
    /// Inverted-dropout multipliers on the last hidden state.
    mask: Option<Vec<f64>>,
    /// Dense-head input (masked last hidden state).
    head_input: Vec<f64>,
    prediction: f64,
}

/// Activations recorded by [`lstm_forward`], consumed by [`lstm_backward`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    version: u64,
    samples: Vec<SampleTrace>,
}

impl ForwardCache {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Gate activations `[i | f | g | o]` of `layer` at step `t` of `sample`.
    pub fn gate_activations(&self, sample: usize, layer: usize, t: usize) -> &[f64] {
        let tr = &self.samples[sample].layers[layer];
        &tr.gates[t * 4 * tr.hidden_dim..(t + 1) * 4 * tr.hidden_dim]
    }

    /// Hidden state of `layer` at step `t` of `sample`.
    pub fn hidden_state(&self, sample: usize, layer: usize, t: usize) -> &[f64] {
        let tr = &self.samples[sample].layers[layer];
        &tr.hidden[t * tr.hidden_dim..(t + 1) * tr.hidden_dim]
    }

    /// Dense-head input (last hidden state after dropout).
    pub fn head_input(&self, sample: usize) -> &[f64] {
        &self.samples[sample].head_input
    }
}

pub struct ForwardOutput {
    pub predictions: Vec<f64>,
    pub cache: ForwardCache,
}

#[derive(Clone, Debug)]
pub struct Gradients {
    pub grads: LstmParams,
    /// Mean squared error of the batch.
    pub loss: f64,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn validate_batch<S: Borrow<Sequence>>(net: &LstmNetwork, batch: &[S]) -> Result<(), LstmError> {
    if batch.is_empty() {
        return Err(LstmError::ShapeMismatch("empty batch".into()));
    }
    let steps = batch[0].borrow().steps();
    for s in batch {
        let s = s.borrow();
        if s.features() != net.input_dim() {
            return Err(LstmError::ShapeMismatch(format!(
                "sequence has {} features, network expects {}",
                s.features(),
                net.input_dim()
            )));
        }
        if s.steps() != steps {
            return Err(LstmError::ShapeMismatch(format!(
                "sequence lengths differ within batch ({} vs {steps})",
                s.steps()
            )));
        }
        if s.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(LstmError::NonFiniteInput);
        }
    }
    Ok(())
}

fn layer_forward(layer: &LstmLayer, inputs: Vec<f64>, steps: usize) -> LayerTrace {
    let (nin, h) = (layer.input_dim, layer.hidden_dim);
    let mut gates = vec![0.0; steps * 4 * h];
    let mut cells = vec![0.0; steps * h];
    let mut cells_tanh = vec![0.0; steps * h];
    let mut hidden = vec![0.0; steps * h];
    let zeros = vec![0.0; h];
    for t in 0..steps {
        let x = &inputs[t * nin..(t + 1) * nin];
        let (h_prev, c_prev) = if t == 0 {
            (&zeros[..], &zeros[..])
        } else {
            (&hidden[(t - 1) * h..t * h], &cells[(t - 1) * h..t * h])
        };
        let mut act = vec![0.0; 4 * h];
        for g in 0..4 {
            for r in 0..h {
                let z = layer.b[g][r] + dot(layer.w[g].row(r), x) + dot(layer.u[g].row(r), h_prev);
                act[g * h + r] = if g == Gate::Cell as usize {
                    z.tanh()
                } else {
                    sigmoid(z)
                };
            }
        }
        let mut c_new = vec![0.0; h];
        for r in 0..h {
            c_new[r] = act[h + r] * c_prev[r] + act[r] * act[2 * h + r];
        }
        for r in 0..h {
            let tc = c_new[r].tanh();
            cells_tanh[t * h + r] = tc;
            hidden[t * h + r] = act[3 * h + r] * tc;
        }
        cells[t * h..(t + 1) * h].copy_from_slice(&c_new);
        gates[t * 4 * h..(t + 1) * 4 * h].copy_from_slice(&act);
    }
    LayerTrace {
        hidden_dim: h,
        inputs,
        gates,
        cells,
        cells_tanh,
        hidden,
    }
}

fn forward_sample(params: &LstmParams, seq: &Sequence, mask: Option<Vec<f64>>) -> SampleTrace {
    let steps = seq.steps();
    let mut layers = Vec::with_capacity(params.layers.len());
    let mut inputs = seq.as_slice().to_vec();
    for layer in &params.layers {
        let trace = layer_forward(layer, inputs, steps);
        inputs = trace.hidden.clone();
        layers.push(trace);
    }
    let last = layers.last().expect("at least one layer");
    let h = last.hidden.len() / steps;
    let mut head_input = last.hidden[(steps - 1) * h..].to_vec();
    if let Some(m) = &mask {
        head_input.iter_mut().zip(m).for_each(|(v, k)| *v *= k);
    }
    let prediction = params.dense_b[0] + dot(&params.dense_w, &head_input);
    SampleTrace {
        layers,
        mask,
        head_input,
        prediction,
    }
}

/// Forward pass over a batch of equal-length sequences.
///
/// With `training` set and a positive dropout rate, one inverted-dropout
/// mask per sequence is drawn from `rng` (in batch order) for the last
/// layer's final hidden state. Otherwise `rng` is not touched.
pub fn lstm_forward<S, R>(
    net: &LstmNetwork,
    batch: &[S],
    training: bool,
    rng: &mut R,
) -> Result<ForwardOutput, LstmError>
where
    S: Borrow<Sequence> + Sync,
    R: Rng + ?Sized,
{
    validate_batch(net, batch)?;
    let p = net.dropout_rate;
    let last_h = *net.hidden_dims().last().expect("non-empty");
    let masks: Vec<Option<Vec<f64>>> = if training && p > 0.0 {
        let keep = 1.0 / (1.0 - p);
        (0..batch.len())
            .map(|_| {
                Some(
                    (0..last_h)
                        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
                        .collect(),
                )
            })
            .collect()
    } else {
        vec![None; batch.len()]
    };

    let samples: Vec<SampleTrace> = batch
        .par_iter()
        .zip(masks.into_par_iter())
        .map(|(s, mask)| forward_sample(&net.params, s.borrow(), mask))
        .collect();
    let predictions = samples.iter().map(|s| s.prediction).collect();
    Ok(ForwardOutput {
        predictions,
        cache: ForwardCache {
            version: net.version,
            samples,
        },
    })
}

fn backward_sample(params: &LstmParams, trace: &SampleTrace, dy: f64, grads: &mut LstmParams) {
    for (g, x) in grads.dense_w.iter_mut().zip(&trace.head_input) {
        *g += dy * x;
    }
    grads.dense_b[0] += dy;

    let top = trace.layers.len() - 1;
    let steps = trace.layers[top].hidden.len() / params.layers[top].hidden_dim;

    // gradient w.r.t. each layer's hidden outputs, T x h
    let mut d_hidden = vec![0.0; steps * params.layers[top].hidden_dim];
    {
        let h = params.layers[top].hidden_dim;
        let slot = &mut d_hidden[(steps - 1) * h..];
        for r in 0..h {
            let m = trace.mask.as_ref().map_or(1.0, |m| m[r]);
            slot[r] = dy * params.dense_w[r] * m;
        }
    }

    for l in (0..trace.layers.len()).rev() {
        let layer = &params.layers[l];
        let tr = &trace.layers[l];
        let grad = &mut grads.layers[l];
        let (nin, h) = (layer.input_dim, layer.hidden_dim);
        let mut d_inputs = vec![0.0; steps * nin];
        let mut dh_carry = vec![0.0; h];
        let mut dc_carry = vec![0.0; h];
        let zeros = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];

        for t in (0..steps).rev() {
            let act = &tr.gates[t * 4 * h..(t + 1) * 4 * h];
            let tc = &tr.cells_tanh[t * h..(t + 1) * h];
            let c_prev = if t == 0 {
                &zeros[..]
            } else {
                &tr.cells[(t - 1) * h..t * h]
            };
            let h_prev = if t == 0 {
                &zeros[..]
            } else {
                &tr.hidden[(t - 1) * h..t * h]
            };
            let x = &tr.inputs[t * nin..(t + 1) * nin];

            for r in 0..h {
                let (i, f, g, o) = (act[r], act[h + r], act[2 * h + r], act[3 * h + r]);
                let dh = d_hidden[t * h + r] + dh_carry[r];
                let d_o = dh * tc[r];
                let dc = dc_carry[r] + dh * o * (1.0 - tc[r] * tc[r]);
                dz[r] = dc * g * i * (1.0 - i);
                dz[h + r] = dc * c_prev[r] * f * (1.0 - f);
                dz[2 * h + r] = dc * i * (1.0 - g * g);
                dz[3 * h + r] = d_o * o * (1.0 - o);
                dc_carry[r] = dc * f;
            }

            dh_carry.iter_mut().for_each(|v| *v = 0.0);
            let dx = &mut d_inputs[t * nin..(t + 1) * nin];
            for gi in 0..4 {
                let dzg = &dz[gi * h..(gi + 1) * h];
                let gw = grad.w[gi].as_mut_slice();
                let gu = grad.u[gi].as_mut_slice();
                let w = layer.w[gi].as_slice();
                let u = layer.u[gi].as_slice();
                for r in 0..h {
                    let d = dzg[r];
                    if d == 0.0 {
                        continue;
                    }
                    grad.b[gi][r] += d;
                    let wrow = &mut gw[r * nin..(r + 1) * nin];
                    for (gv, xv) in wrow.iter_mut().zip(x) {
                        *gv += d * xv;
                    }
                    let urow = &mut gu[r * h..(r + 1) * h];
                    for (gv, hv) in urow.iter_mut().zip(h_prev) {
                        *gv += d * hv;
                    }
                    for (dxv, wv) in dx.iter_mut().zip(&w[r * nin..(r + 1) * nin]) {
                        *dxv += d * wv;
                    }
                    for (dhv, uv) in dh_carry.iter_mut().zip(&u[r * h..(r + 1) * h]) {
                        *dhv += d * uv;
                    }
                }
            }
        }
        d_hidden = d_inputs;
    }
}

/// Samples per gradient-accumulation chunk. Fixed so that the summation
/// order, and therefore the result, does not depend on the thread count.
const GRAD_CHUNK: usize = 4;

/// Gradients of the batch mean squared error `mean((y_hat - y)^2)` with
/// respect to every parameter.
pub fn lstm_backward(
    net: &LstmNetwork,
    cache: &ForwardCache,
    targets: &[f64],
) -> Result<Gradients, LstmError> {
    if cache.version != net.version {
        return Err(LstmError::StaleCache {
            cache: cache.version,
            network: net.version,
        });
    }
    if targets.len() != cache.samples.len() {
        return Err(LstmError::ShapeMismatch(format!(
            "{} targets for {} cached predictions",
            targets.len(),
            cache.samples.len()
        )));
    }
    if cache.samples.is_empty() {
        return Err(LstmError::ShapeMismatch("empty cache".into()));
    }
    let n = targets.len() as f64;
    let loss = cache
        .samples
        .iter()
        .zip(targets)
        .map(|(s, y)| (s.prediction - y).powi(2))
        .sum::<f64>()
        / n;

    let template = net.params.zeros_like();
    let partials: Vec<LstmParams> = cache
        .samples
        .par_chunks(GRAD_CHUNK)
        .zip(targets.par_chunks(GRAD_CHUNK))
        .map(|(samples, ys)| {
            let mut acc = template.clone();
            for (s, y) in samples.iter().zip(ys) {
                let dy = 2.0 * (s.prediction - y) / n;
                backward_sample(&net.params, s, dy, &mut acc);
            }
            acc
        })
        .collect();
    let mut grads = template;
    for p in &partials {
        grads.add_assign(p);
    }
    Ok(Gradients { grads, loss })
}
