//! Data re-uploading QNN: circuit construction, fidelity cost, prediction,
//! exact adjoint gradients, Adam training, and the iterative single-qubit to
//! multi-qubit scaling procedure.
//!
//! The n-qubit circuit repeats, per layer: a data-encoding SU(2) on every
//! qubit, a trainable SU(2) per qubit, then controlled SU(2) gates with
//! control on qubit s+1 and target on qubit s for s = 0..n-2 (skipped for
//! n = 1). Labels follow the convention +1 <-> |0⟩, -1 <-> |1⟩, measured
//! locally on the first qubit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::simulator::{
    su2_matrix_unchecked, su2_partials, Circuit, Gate, GatePlacement, StateVector, Su2Angles,
};

/// Adam moment decay and stability constants.
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// A labeled 2-feature sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataPoint {
    pub x: [f64; 2],
    pub y: i8,
}

impl DataPoint {
    pub fn new(x: [f64; 2], y: i8) -> Result<DataPoint> {
        if !(x[0].is_finite() && x[1].is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "features must be finite, got ({}, {})",
                x[0], x[1]
            )));
        }
        if y != 1 && y != -1 {
            return Err(Error::InvalidArgument(format!(
                "label must be +1 or -1, got {y}"
            )));
        }
        Ok(DataPoint { x, y })
    }
}

/// Layered trainable angles of a re-uploading circuit: one SU(2) triple per
/// qubit per layer (`theta`) and one per adjacent pair per layer (`phi`).
#[derive(Clone, Debug, PartialEq)]
pub struct QnnParams {
    n_qubits: usize,
    layers: usize,
    theta: Vec<Vec<Su2Angles>>,
    phi: Vec<Vec<Su2Angles>>,
}

impl QnnParams {
    /// All-zero parameters (every gate the identity).
    pub fn zeros(n_qubits: usize, layers: usize) -> QnnParams {
        assert!(n_qubits >= 1 && layers >= 1);
        QnnParams {
            n_qubits,
            layers,
            theta: vec![vec![Su2Angles::ZERO; n_qubits]; layers],
            phi: vec![vec![Su2Angles::ZERO; n_qubits - 1]; layers],
        }
    }

    /// Build from explicit angle tables, validating shape and finiteness.
    pub fn new(theta: Vec<Vec<Su2Angles>>, phi: Vec<Vec<Su2Angles>>) -> Result<QnnParams> {
        let layers = theta.len();
        if layers == 0 {
            return Err(Error::InvalidArgument("need at least one layer".into()));
        }
        let n_qubits = theta[0].len();
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("need at least one qubit".into()));
        }
        if phi.len() != layers {
            return Err(Error::DimensionMismatch(format!(
                "theta has {layers} layers but phi has {}",
                phi.len()
            )));
        }
        for (l, row) in theta.iter().enumerate() {
            if row.len() != n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "theta layer {l} has {} entries, expected {n_qubits}",
                    row.len()
                )));
            }
        }
        for (l, row) in phi.iter().enumerate() {
            if row.len() != n_qubits - 1 {
                return Err(Error::DimensionMismatch(format!(
                    "phi layer {l} has {} entries, expected {}",
                    row.len(),
                    n_qubits - 1
                )));
            }
        }
        let finite = theta
            .iter()
            .chain(phi.iter())
            .flatten()
            .all(Su2Angles::is_finite);
        if !finite {
            return Err(Error::InvalidArgument(
                "parameters contain non-finite angles".into(),
            ));
        }
        Ok(QnnParams {
            n_qubits,
            layers,
            theta,
            phi,
        })
    }

    /// Fresh parameters with every angle uniform in [-pi, pi).
    pub fn random(n_qubits: usize, layers: usize, seed: u64) -> QnnParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| {
            Su2Angles::new(
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            )
        };
        let theta = (0..layers)
            .map(|_| (0..n_qubits).map(|_| draw(&mut rng)).collect())
            .collect();
        let phi = (0..layers)
            .map(|_| (0..n_qubits - 1).map(|_| draw(&mut rng)).collect())
            .collect();
        QnnParams {
            n_qubits,
            layers,
            theta,
            phi,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn theta(&self, layer: usize, qubit: usize) -> Su2Angles {
        self.theta[layer][qubit]
    }

    pub fn phi(&self, layer: usize, pair: usize) -> Su2Angles {
        self.phi[layer][pair]
    }

    /// Total scalar parameter count, `3(2n-1)L`.
    pub fn param_count(&self) -> usize {
        3 * (2 * self.n_qubits - 1) * self.layers
    }

    /// Scalars per layer in the flat layout.
    fn layer_stride(&self) -> usize {
        3 * (2 * self.n_qubits - 1)
    }

    /// Flatten to a vector: per layer, theta triples for each qubit followed
    /// by phi triples for each pair.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in 0..self.layers {
            for t in &self.theta[l] {
                out.extend_from_slice(&[t.a, t.b, t.c]);
            }
            for p in &self.phi[l] {
                out.extend_from_slice(&[p.a, p.b, p.c]);
            }
        }
        out
    }

    /// Inverse of [`QnnParams::to_flat`].
    pub fn from_flat(n_qubits: usize, layers: usize, flat: &[f64]) -> Result<QnnParams> {
        let expected = 3 * (2 * n_qubits - 1) * layers;
        if flat.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "flat parameter vector has {} entries, expected {expected}",
                flat.len()
            )));
        }
        let mut it = flat.iter();
        let mut next = || -> f64 { *it.next().expect("length checked") };
        let mut theta = Vec::with_capacity(layers);
        let mut phi = Vec::with_capacity(layers);
        for _ in 0..layers {
            theta.push(
                (0..n_qubits)
                    .map(|_| Su2Angles::new(next(), next(), next()))
                    .collect::<Vec<_>>(),
            );
            phi.push(
                (0..n_qubits - 1)
                    .map(|_| Su2Angles::new(next(), next(), next()))
                    .collect::<Vec<_>>(),
            );
        }
        QnnParams::new(theta, phi)
    }

    /// Grow the register by one qubit, keeping every existing angle and
    /// zero-initializing the new qubit's rotations and the new entangling
    /// pair. With zero angles those gates act as identities, so the widened
    /// model reproduces the original first-qubit statistics exactly.
    pub fn expand(&self) -> QnnParams {
        let n = self.n_qubits + 1;
        let theta = self
            .theta
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.push(Su2Angles::ZERO);
                row
            })
            .collect();
        let phi = self
            .phi
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.push(Su2Angles::ZERO);
                row
            })
            .collect();
        QnnParams {
            n_qubits: n,
            layers: self.layers,
            theta,
            phi,
        }
    }
}

/// Hyperparameters of one Adam training run.
#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    fn validate(&self, data_len: usize) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        if self.batch_size > data_len {
            return Err(Error::InvalidArgument(format!(
                "batch size {} exceeds training-set size {data_len}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// Map a 2-feature sample onto encoding angles: `(a, b, c) = (x0, x1, 0)`.
pub fn encode_gate(x: [f64; 2]) -> Result<Su2Angles> {
    if !(x[0].is_finite() && x[1].is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "encoding input must be finite, got ({}, {})",
            x[0], x[1]
        )));
    }
    Ok(Su2Angles::new(x[0], x[1], 0.0))
}

/// One gate of the re-uploading circuit plus, when trainable, the angles it
/// was generated from and the flat index of its first scalar parameter.
struct TaggedGate {
    gate: Gate,
    angles: Su2Angles,
    param_base: Option<usize>,
}

fn build_tagged_circuit(params: &QnnParams, x: [f64; 2]) -> Result<Vec<TaggedGate>> {
    let enc = encode_gate(x)?;
    let enc_matrix = su2_matrix_unchecked(enc);
    let n = params.n_qubits;
    let stride = params.layer_stride();
    let mut gates = Vec::with_capacity(params.layers * (2 * n + n.saturating_sub(1)));
    for l in 0..params.layers {
        for q in 0..n {
            gates.push(TaggedGate {
                gate: Gate::single(q, enc_matrix),
                angles: enc,
                param_base: None,
            });
        }
        for q in 0..n {
            let angles = params.theta[l][q];
            gates.push(TaggedGate {
                gate: Gate::single(q, su2_matrix_unchecked(angles)),
                angles,
                param_base: Some(l * stride + 3 * q),
            });
        }
        // Controlled stage: control on qubit s, target on qubit s-1, in
        // ascending order (the cascade points toward the measured qubit).
        for s in 1..n {
            let angles = params.phi[l][s - 1];
            gates.push(TaggedGate {
                gate: Gate::controlled(s, s - 1, su2_matrix_unchecked(angles)),
                angles,
                param_base: Some(l * stride + 3 * n + 3 * (s - 1)),
            });
        }
    }
    Ok(gates)
}

/// The full re-uploading circuit for one input, as a plain gate list.
pub fn qnn_circuit(params: &QnnParams, x: [f64; 2]) -> Result<Circuit> {
    let tagged = build_tagged_circuit(params, x)?;
    let mut circuit = Circuit::new(params.n_qubits);
    for tg in tagged {
        circuit.push(tg.gate)?;
    }
    Ok(circuit)
}

/// State prepared by the re-uploading circuit on `|0…0⟩`.
pub fn qnn_state(params: &QnnParams, x: [f64; 2]) -> Result<StateVector> {
    Ok(qnn_circuit(params, x)?.run())
}

/// Probability that the model assigns the input to its correct label state.
fn correct_label_prob(p_zero: f64, y: i8) -> f64 {
    if y > 0 {
        p_zero
    } else {
        1.0 - p_zero
    }
}

/// Mean over the data of one minus the correct-label probability.
pub fn fidelity_cost(params: &QnnParams, data: &[DataPoint]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidArgument(
            "fidelity cost needs at least one data point".into(),
        ));
    }
    let costs: Vec<f64> = data
        .par_iter()
        .map(|p| {
            let state = qnn_state(params, p.x)?;
            Ok(1.0 - correct_label_prob(state.prob_first_qubit_zero(), p.y))
        })
        .collect::<Result<_>>()?;
    Ok(costs.iter().sum::<f64>() / data.len() as f64)
}

/// Decision rule: +1 iff the first-qubit zero probability is at least 1/2.
pub fn label_from_prob(p_zero: f64) -> i8 {
    if p_zero >= 0.5 {
        1
    } else {
        -1
    }
}

/// Classify one input with the trained model.
pub fn predict(params: &QnnParams, x: [f64; 2]) -> Result<i8> {
    Ok(label_from_prob(qnn_state(params, x)?.prob_first_qubit_zero()))
}

/// Fraction of points the model labels correctly.
pub fn qnn_accuracy(params: &QnnParams, data: &[DataPoint]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidArgument(
            "accuracy needs at least one data point".into(),
        ));
    }
    let hits: Vec<bool> = data
        .par_iter()
        .map(|p| Ok(predict(params, p.x)? == p.y))
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / data.len() as f64)
}

/// Gradient contribution of one sample, accumulated into `grad`.
///
/// Reverse-mode (adjoint) statevector differentiation: after the forward
/// pass, two states are swept backwards through the circuit. For gate k with
/// parameter p, dE/dp = 2 Re ⟨λ_k| ∂G_k/∂p |ψ_{k-1}⟩ where E is the
/// correct-label probability; the cost contributes -dE/dp.
fn accumulate_point_gradient(tagged: &[TaggedGate], n_qubits: usize, y: i8, grad: &mut [f64]) {
    let mut psi = StateVector::zero(n_qubits);
    for tg in tagged {
        psi.apply_gate_unchecked(&tg.gate);
    }
    // λ = Π|ψ⟩ with Π the projector onto the correct label subspace.
    let mut lam = psi.clone();
    lam.project_first_qubit(if y > 0 { 0 } else { 1 });

    let mut scratch;
    for tg in tagged.iter().rev() {
        let dag = tg.gate.dagger();
        psi.apply_gate_unchecked(&dag);
        if let Some(base) = tg.param_base {
            let partials = su2_partials(tg.angles);
            for (k, du) in partials.iter().enumerate() {
                scratch = psi.clone();
                match tg.gate.placement {
                    GatePlacement::Single { qubit } => {
                        scratch.apply_single_unchecked(qubit, du);
                    }
                    GatePlacement::Controlled { control, target } => {
                        scratch.apply_controlled_derivative(control, target, du);
                    }
                }
                let overlap = lam
                    .inner_product(&scratch)
                    .expect("states share the register");
                grad[base + k] += -2.0 * overlap.re;
            }
        }
        lam.apply_gate_unchecked(&dag);
    }
}

/// Exact gradient of [`fidelity_cost`] restricted to `batch`, in the flat
/// parameter layout of [`QnnParams::to_flat`].
pub fn cost_gradient(params: &QnnParams, batch: &[DataPoint]) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument(
            "gradient needs at least one data point".into(),
        ));
    }
    let dim = params.param_count();
    let per_point: Vec<Vec<f64>> = batch
        .par_iter()
        .map(|p| {
            let tagged = build_tagged_circuit(params, p.x)?;
            let mut g = vec![0.0; dim];
            accumulate_point_gradient(&tagged, params.n_qubits, p.y, &mut g);
            Ok(g)
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; dim];
    for g in &per_point {
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    for v in &mut grad {
        *v *= scale;
    }
    Ok(grad)
}

/// Minimize the fidelity cost with Adam over seeded shuffled mini-batches.
/// The trailing partial batch of each epoch is used. Deterministic for a
/// fixed `(data, params0, cfg)`.
pub fn train_qnn(data: &[DataPoint], params0: &QnnParams, cfg: &TrainConfig) -> Result<QnnParams> {
    if data.is_empty() {
        return Err(Error::InvalidArgument(
            "training needs at least one data point".into(),
        ));
    }
    cfg.validate(data.len())?;

    let n = params0.n_qubits;
    let layers = params0.layers;
    let mut flat = params0.to_flat();
    let dim = flat.len();
    let mut m = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut step = 0u32;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i]));
            let params = QnnParams::from_flat(n, layers, &flat)?;
            let grad = cost_gradient(&params, &batch)?;
            step += 1;
            let bias1 = 1.0 - ADAM_BETA1.powi(step as i32);
            let bias2 = 1.0 - ADAM_BETA2.powi(step as i32);
            for i in 0..dim {
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * grad[i];
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                flat[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
    }
    QnnParams::from_flat(n, layers, &flat)
}

/// Iterative scaling: train a single-qubit model, then repeatedly widen by
/// one qubit (new angles zero, so the widened model starts exactly where the
/// previous one finished) and retrain. Returns the trained parameters of
/// every stage n = 1..=n_target.
pub fn train_iterative(
    data: &[DataPoint],
    layers: usize,
    n_target: usize,
    cfg_first: &TrainConfig,
    cfg_rest: &TrainConfig,
) -> Result<Vec<QnnParams>> {
    if n_target == 0 {
        return Err(Error::InvalidArgument("need n_target >= 1".into()));
    }
    if n_target > layers + 1 {
        return Err(Error::Precondition(format!(
            "iterative scaling supports at most layers+1 = {} qubits, asked for {n_target}",
            layers + 1
        )));
    }
    let init = QnnParams::random(1, layers, cfg_first.seed);
    let mut stages = vec![train_qnn(data, &init, cfg_first)?];
    for _ in 2..=n_target {
        let widened = stages.last().expect("at least one stage").expand();
        stages.push(train_qnn(data, &widened, cfg_rest)?);
    }
    Ok(stages)
}
