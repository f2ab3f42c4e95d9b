//! Embedding quantum kernels built from trained re-uploading parameters:
//! the n-to-n construction (the full trained circuit as feature map) and the
//! 1-to-n construction (single-qubit layers replicated across n qubits with
//! an entangler cascade after each trained layer), plus Gram matrices,
//! alignment metrics and kernel combinators.

use nalgebra::DMatrix;
use rayon::prelude::*;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::qnn::{encode_gate, qnn_circuit, QnnParams};
use crate::simulator::{
    entangler_gates, su2_matrix_unchecked, Circuit, EntanglerKind, Gate, StateVector,
};

const SYMMETRY_TOL: f64 = 1e-10;
const UNIT_DIAG_TOL: f64 = 1e-10;
const PSD_TOL: f64 = -1e-8;

/// Which embedding the kernel uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqkKind {
    /// The trained n-qubit circuit itself is the feature map.
    NToN,
    /// Trained single-qubit layers replicated across n qubits, alternating
    /// with an entangler cascade; the final trained layer is dropped and a
    /// trailing encoding layer closes the map.
    OneToN,
}

/// Construction recipe for an embedding kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqkSpec {
    kind: EqkKind,
    n_qubits: usize,
    entangler: Option<EntanglerKind>,
}

impl EqkSpec {
    /// n-to-n kernel of the given width.
    pub fn n_to_n(n_qubits: usize) -> EqkSpec {
        assert!(n_qubits >= 1);
        EqkSpec {
            kind: EqkKind::NToN,
            n_qubits,
            entangler: None,
        }
    }

    /// 1-to-n kernel on `n_qubits >= 2` with the given entangler.
    pub fn one_to_n(n_qubits: usize, entangler: EntanglerKind) -> Result<EqkSpec> {
        if n_qubits < 2 {
            return Err(Error::Precondition(format!(
                "1-to-n construction needs n >= 2 for the entangler to act, got {n_qubits}"
            )));
        }
        Ok(EqkSpec {
            kind: EqkKind::OneToN,
            n_qubits,
            entangler: Some(entangler),
        })
    }

    pub fn kind(&self) -> EqkKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entangler(&self) -> Option<EntanglerKind> {
        self.entangler
    }
}

/// The feature-map circuit `S(x)` of the kernel.
pub fn eqk_feature_circuit(spec: &EqkSpec, params: &QnnParams, x: [f64; 2]) -> Result<Circuit> {
    match spec.kind {
        EqkKind::NToN => {
            if params.n_qubits() != spec.n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "n-to-n kernel of width {} given {}-qubit parameters",
                    spec.n_qubits,
                    params.n_qubits()
                )));
            }
            qnn_circuit(params, x)
        }
        EqkKind::OneToN => {
            if params.n_qubits() != 1 {
                return Err(Error::DimensionMismatch(format!(
                    "1-to-n kernel needs single-qubit parameters, got {} qubits",
                    params.n_qubits()
                )));
            }
            let n = spec.n_qubits;
            let entangler = spec.entangler.expect("present for 1-to-n");
            let enc = su2_matrix_unchecked(encode_gate(x)?);
            let mut circuit = Circuit::new(n);
            // Layers 1..L-1 carry trained gates; the last trained layer is
            // irrelevant to the kernel and is dropped.
            for l in 0..params.layers().saturating_sub(1) {
                for q in 0..n {
                    circuit.push(Gate::single(q, enc))?;
                }
                let trained = su2_matrix_unchecked(params.theta(l, 0));
                for q in 0..n {
                    circuit.push(Gate::single(q, trained))?;
                }
                circuit.extend(entangler_gates(n, entangler))?;
            }
            for q in 0..n {
                circuit.push(Gate::single(q, enc))?;
            }
            Ok(circuit)
        }
    }
}

/// The feature state `|φ(x)⟩ = S(x)|0…0⟩`.
pub fn eqk_feature_state(spec: &EqkSpec, params: &QnnParams, x: [f64; 2]) -> Result<StateVector> {
    Ok(eqk_feature_circuit(spec, params, x)?.run())
}

/// Kernel value `k(xi, xj) = |⟨φ(xi)|φ(xj)⟩|^2`.
pub fn kernel_value(spec: &EqkSpec, params: &QnnParams, xi: [f64; 2], xj: [f64; 2]) -> Result<f64> {
    let a = eqk_feature_state(spec, params, xi)?;
    let b = eqk_feature_state(spec, params, xj)?;
    Ok(a.inner_product(&b)?.norm_sqr())
}

/// The compiled overlap circuit `S†(xi) S(xj)`; its all-zero probability is
/// the kernel value. This is the double-depth circuit a device would run.
pub fn compiled_kernel_circuit(
    spec: &EqkSpec,
    params: &QnnParams,
    xi: [f64; 2],
    xj: [f64; 2],
) -> Result<Circuit> {
    let mut circuit = eqk_feature_circuit(spec, params, xj)?;
    let inverse = eqk_feature_circuit(spec, params, xi)?.dagger();
    circuit.extend(inverse.gates().iter().copied())?;
    Ok(circuit)
}

/// Kernel value via the compiled circuit instead of the overlap of feature
/// states. Algebraically identical to [`kernel_value`]; kept as the second,
/// independent route for validation.
pub fn kernel_value_circuit_form(
    spec: &EqkSpec,
    params: &QnnParams,
    xi: [f64; 2],
    xj: [f64; 2],
) -> Result<f64> {
    Ok(compiled_kernel_circuit(spec, params, xi, xj)?
        .run()
        .prob_all_zero())
}

/// M x M symmetric kernel matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    /// Wrap a row-major square matrix, checking finiteness and symmetry.
    pub fn from_flat(size: usize, entries: Vec<f64>) -> Result<KernelMatrix> {
        if size == 0 {
            return Err(Error::InvalidArgument("kernel matrix must be non-empty".into()));
        }
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "kernel matrix of size {size} needs {} entries, got {}",
                size * size,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "kernel matrix entries must be finite".into(),
            ));
        }
        let k = KernelMatrix { size, entries };
        for i in 0..size {
            for j in (i + 1)..size {
                if (k.get(i, j) - k.get(j, i)).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "kernel matrix asymmetric at ({i},{j}): {} vs {}",
                        k.get(i, j),
                        k.get(j, i)
                    )));
                }
            }
        }
        Ok(k)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    /// Smallest eigenvalue (symmetric eigendecomposition).
    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j));
        m.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Check the Gram-matrix contract: unit diagonal and positive
    /// semidefiniteness (beyond the symmetry enforced at construction).
    pub fn validate_gram(&self) -> Result<()> {
        for i in 0..self.size {
            if (self.get(i, i) - 1.0).abs() > UNIT_DIAG_TOL {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry {i} is {}, expected 1",
                    self.get(i, i)
                )));
            }
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < PSD_TOL {
            return Err(Error::InvalidArgument(format!(
                "kernel matrix is not PSD: min eigenvalue {min_eig}"
            )));
        }
        Ok(())
    }

    /// Serialize as plain text: a line with M, then M rows of M decimals.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.size)?;
        for i in 0..self.size {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Parse the format written by [`KernelMatrix::write_text`].
    pub fn read_text<R: BufRead>(r: R, origin: &str) -> Result<KernelMatrix> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(origin, e))?
            .ok_or_else(|| Error::parse(origin, "empty file"))?;
        let size: usize = first
            .trim()
            .parse()
            .map_err(|e| Error::parse(origin, format!("bad size line: {e}")))?;
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            let line = lines
                .next()
                .transpose()
                .map_err(|e| Error::io(origin, e))?
                .ok_or_else(|| Error::parse(origin, format!("missing row {i}")))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::parse(origin, format!("row {i}: {e}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != size {
                return Err(Error::parse(
                    origin,
                    format!("row {i} has {} entries, expected {size}", row.len()),
                ));
            }
            entries.extend(row);
        }
        KernelMatrix::from_flat(size, entries)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file =
            std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.write_text(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<KernelMatrix> {
        let file =
            std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        KernelMatrix::read_text(std::io::BufReader::new(file), &path.display().to_string())
    }
}

/// Gram matrix over a point set. Feature states are prepared once per point;
/// only the upper triangle is evaluated and mirrored, and the diagonal is
/// pinned to exactly 1 (it is analytically 1, and float noise there would
/// leak into the SVM).
pub fn gram_matrix(spec: &EqkSpec, params: &QnnParams, points: &[[f64; 2]]) -> Result<KernelMatrix> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "gram matrix needs at least one point".into(),
        ));
    }
    let m = points.len();
    let states: Vec<StateVector> = points
        .par_iter()
        .map(|&x| eqk_feature_state(spec, params, x))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            states[i]
                .inner_product(&states[j])
                .map(|ov| ov.norm_sqr())
        })
        .collect::<Result<_>>()?;

    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        entries[i * m + i] = 1.0;
    }
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        entries[i * m + j] = v;
        entries[j * m + i] = v;
    }
    KernelMatrix::from_flat(m, entries)
}

/// Rectangular kernel block `k(a_i, b_j)` (rows index `points_a`), used to
/// evaluate a trained SVM on held-out points.
pub fn cross_kernel(
    spec: &EqkSpec,
    params: &QnnParams,
    points_a: &[[f64; 2]],
    points_b: &[[f64; 2]],
) -> Result<Vec<Vec<f64>>> {
    if points_a.is_empty() || points_b.is_empty() {
        return Err(Error::InvalidArgument(
            "cross kernel needs non-empty point sets".into(),
        ));
    }
    let states_a: Vec<StateVector> = points_a
        .par_iter()
        .map(|&x| eqk_feature_state(spec, params, x))
        .collect::<Result<_>>()?;
    let states_b: Vec<StateVector> = points_b
        .par_iter()
        .map(|&x| eqk_feature_state(spec, params, x))
        .collect::<Result<_>>()?;
    states_a
        .par_iter()
        .map(|sa| {
            states_b
                .iter()
                .map(|sb| sa.inner_product(sb).map(|ov| ov.norm_sqr()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Cosine similarity of two kernel matrices under the Hilbert-Schmidt inner
/// product: `tr(Ka·Kb) / sqrt(tr(Ka^2)·tr(Kb^2))`.
pub fn kernel_alignment(ka: &KernelMatrix, kb: &KernelMatrix) -> Result<f64> {
    if ka.size() != kb.size() {
        return Err(Error::DimensionMismatch(format!(
            "kernel alignment between sizes {} and {}",
            ka.size(),
            kb.size()
        )));
    }
    // For symmetric matrices tr(A·B) is the entrywise dot product.
    let dot = |a: &KernelMatrix, b: &KernelMatrix| -> f64 {
        a.entries().iter().zip(b.entries()).map(|(x, y)| x * y).sum()
    };
    let denom = (dot(ka, ka) * dot(kb, kb)).sqrt();
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "kernel alignment undefined for a zero matrix".into(),
        ));
    }
    Ok(dot(ka, kb) / denom)
}

/// Alignment with the ideal kernel `k*_ij = y_i y_j`:
/// `Σ_ij y_i y_j k_ij / (M sqrt(Σ_ij k_ij^2))`.
pub fn target_alignment(k: &KernelMatrix, labels: &[i8]) -> Result<f64> {
    let m = k.size();
    if labels.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "kernel of size {m} with {} labels",
            labels.len()
        )));
    }
    let mut num = 0.0;
    let mut frob_sq = 0.0;
    for i in 0..m {
        for j in 0..m {
            let v = k.get(i, j);
            num += f64::from(labels[i]) * f64::from(labels[j]) * v;
            frob_sq += v * v;
        }
    }
    if frob_sq == 0.0 {
        return Err(Error::InvalidArgument(
            "target alignment undefined for a zero matrix".into(),
        ));
    }
    Ok(num / (m as f64 * frob_sq.sqrt()))
}

/// Entrywise weighted sum of kernels. PSD is preserved for nonnegative
/// weights. The diagonal is NOT renormalized: a combination of unit-diagonal
/// kernels has diagonal `Σ w_r`, not 1.
pub fn combine_linear(kernels: &[KernelMatrix], weights: &[f64]) -> Result<KernelMatrix> {
    if kernels.is_empty() {
        return Err(Error::InvalidArgument(
            "linear combination needs at least one kernel".into(),
        ));
    }
    if kernels.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} kernels but {} weights",
            kernels.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weights must be finite and nonnegative, got {w}"
        )));
    }
    let size = kernels[0].size();
    if kernels.iter().any(|k| k.size() != size) {
        return Err(Error::DimensionMismatch(
            "kernels in a combination must share a size".into(),
        ));
    }
    let mut entries = vec![0.0; size * size];
    for (k, &w) in kernels.iter().zip(weights) {
        for (acc, v) in entries.iter_mut().zip(k.entries()) {
            *acc += w * v;
        }
    }
    KernelMatrix::from_flat(size, entries)
}

/// Entrywise (Hadamard) product of kernels; PSD by the Schur product theorem.
pub fn combine_product(kernels: &[KernelMatrix]) -> Result<KernelMatrix> {
    if kernels.is_empty() {
        return Err(Error::InvalidArgument(
            "product combination needs at least one kernel".into(),
        ));
    }
    let size = kernels[0].size();
    if kernels.iter().any(|k| k.size() != size) {
        return Err(Error::DimensionMismatch(
            "kernels in a combination must share a size".into(),
        ));
    }
    let mut entries = vec![1.0; size * size];
    for k in kernels {
        for (acc, v) in entries.iter_mut().zip(k.entries()) {
            *acc *= v;
        }
    }
    KernelMatrix::from_flat(size, entries)
}
