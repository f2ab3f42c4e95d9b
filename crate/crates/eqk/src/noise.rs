//! Density-matrix simulation of the circuits under per-gate amplitude
//! damping and phase flip channels, and the relative-improvement figure of
//! merit for noisy QNN-vs-kernel comparisons.
//!
//! Channels are applied after every gate, on each qubit the gate touched
//! (both qubits of a controlled gate), amplitude damping first and phase
//! flip second. The two channels act on different matrix elements, so this
//! order is a documented convention rather than a modeling assumption.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::kernel::{compiled_kernel_circuit, EqkSpec, KernelMatrix};
use crate::qnn::{qnn_circuit, QnnParams};
use crate::simulator::{Circuit, Gate, GatePlacement, Mat2, StateVector};

/// Worst-case amplitude damping probability of the reference hardware model.
pub const REFERENCE_GAMMA: f64 = 0.001;
/// Worst-case phase flip probability of the reference hardware model.
pub const REFERENCE_ALPHA: f64 = 0.0005;

/// The standard sweep grid: noiseless plus 0.005..=0.030 in steps of 0.005.
pub fn default_tau_grid() -> Vec<f64> {
    vec![0.0, 0.005, 0.010, 0.015, 0.020, 0.025, 0.030]
}

/// Per-gate channel strengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    pub gamma: f64,
    pub alpha: f64,
}

impl NoiseParams {
    pub fn new(gamma: f64, alpha: f64) -> Result<NoiseParams> {
        check_probability("gamma", gamma)?;
        check_probability("alpha", alpha)?;
        Ok(NoiseParams { gamma, alpha })
    }

    pub fn is_noiseless(&self) -> bool {
        self.gamma == 0.0 && self.alpha == 0.0
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "{name} must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Single-strength parametrization `tau = gamma = alpha`.
pub fn tau_noise(tau: f64) -> Result<NoiseParams> {
    check_probability("tau", tau)?;
    NoiseParams::new(tau, tau)
}

/// Amplitude damping Kraus pair:
/// `K0 = [[1, 0], [0, sqrt(1-gamma)]]`, `K1 = [[0, sqrt(gamma)], [0, 0]]`.
pub fn amplitude_damping_kraus(gamma: f64) -> Result<[Mat2; 2]> {
    check_probability("gamma", gamma)?;
    let zero = Complex64::new(0.0, 0.0);
    let k0 = Mat2::new([
        [Complex64::new(1.0, 0.0), zero],
        [zero, Complex64::new((1.0 - gamma).sqrt(), 0.0)],
    ]);
    let k1 = Mat2::new([
        [zero, Complex64::new(gamma.sqrt(), 0.0)],
        [zero, zero],
    ]);
    Ok([k0, k1])
}

/// Phase flip Kraus pair:
/// `K0 = sqrt(1-alpha)·I`, `K1 = sqrt(alpha)·diag(1, -1)`.
pub fn phase_flip_kraus(alpha: f64) -> Result<[Mat2; 2]> {
    check_probability("alpha", alpha)?;
    let zero = Complex64::new(0.0, 0.0);
    let s0 = Complex64::new((1.0 - alpha).sqrt(), 0.0);
    let s1 = Complex64::new(alpha.sqrt(), 0.0);
    let k0 = Mat2::new([[s0, zero], [zero, s0]]);
    let k1 = Mat2::new([[s1, zero], [zero, -s1]]);
    Ok([k0, k1])
}

/// Mixed n-qubit state as a dense 2^n x 2^n matrix, row-major.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n_qubits: usize) -> DensityMatrix {
        assert!(n_qubits >= 1);
        let dim = 1 << n_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        entries[0] = Complex64::new(1.0, 0.0);
        DensityMatrix { n_qubits, entries }
    }

    /// Outer product `|psi⟩⟨psi|`.
    pub fn from_pure(state: &StateVector) -> DensityMatrix {
        let dim = state.dim();
        let amps = state.amplitudes();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(amps[i] * amps[j].conj());
            }
        }
        DensityMatrix {
            n_qubits: state.n_qubits(),
            entries,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim() + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.entries[i * dim + i]).sum()
    }

    /// `tr(rho · |0⟩⟨0| ⊗ I)`: total diagonal weight of the first-qubit-zero
    /// block.
    pub fn prob_first_qubit_zero(&self) -> f64 {
        let dim = self.dim();
        (0..dim / 2).map(|i| self.entries[i * dim + i].re).sum()
    }

    /// `tr(rho · |0…0⟩⟨0…0|)`.
    pub fn prob_all_zero(&self) -> f64 {
        self.entries[0].re
    }

    /// `⟨psi|rho|psi⟩` (real for Hermitian `rho`).
    pub fn fidelity_with_pure(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "fidelity between {}-qubit state and {}-qubit density matrix",
                state.n_qubits(),
                self.n_qubits
            )));
        }
        let dim = self.dim();
        let amps = state.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += amps[i].conj() * self.entries[i * dim + j] * amps[j];
            }
        }
        Ok(acc.re)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, via the real symmetric embedding
    /// `[[Re, -Im], [Im, Re]]` of the Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let embedded = DMatrix::from_fn(2 * dim, 2 * dim, |r, c| {
            let (i, j) = (r % dim, c % dim);
            let v = self.entry(i, j);
            match (r >= dim, c >= dim) {
                (false, false) | (true, true) => v.re,
                (false, true) => -v.im,
                (true, false) => v.im,
            }
        });
        embedded
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    /// `rho -> M_q rho M_q†` for a 2x2 matrix on one qubit (not necessarily
    /// unitary; Kraus terms reuse this).
    fn conjugate_single(&mut self, qubit: usize, m: &Mat2) {
        let dim = self.dim();
        let mask = self.mask(qubit);
        let [[u00, u01], [u10, u11]] = m.m;
        // Left factor: mix row pairs within each column.
        for col in 0..dim {
            let mut row = 0;
            while row < dim {
                for r in row..row + mask {
                    let low = r * dim + col;
                    let high = (r | mask) * dim + col;
                    let a = self.entries[low];
                    let b = self.entries[high];
                    self.entries[low] = u00 * a + u01 * b;
                    self.entries[high] = u10 * a + u11 * b;
                }
                row += mask << 1;
            }
        }
        // Right factor (dagger): mix column pairs within each row.
        let (c00, c01, c10, c11) = (u00.conj(), u01.conj(), u10.conj(), u11.conj());
        for row in 0..dim {
            let base = row * dim;
            let mut col = 0;
            while col < dim {
                for c in col..col + mask {
                    let low = base + c;
                    let high = base + (c | mask);
                    let a = self.entries[low];
                    let b = self.entries[high];
                    self.entries[low] = a * c00 + b * c01;
                    self.entries[high] = a * c10 + b * c11;
                }
                col += mask << 1;
            }
        }
    }

    /// `rho -> G rho G†` for a controlled 2x2 gate.
    fn conjugate_controlled(&mut self, control: usize, target: usize, m: &Mat2) {
        let dim = self.dim();
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        let [[u00, u01], [u10, u11]] = m.m;
        for col in 0..dim {
            for r in 0..dim {
                if r & cmask != 0 && r & tmask == 0 {
                    let low = r * dim + col;
                    let high = (r | tmask) * dim + col;
                    let a = self.entries[low];
                    let b = self.entries[high];
                    self.entries[low] = u00 * a + u01 * b;
                    self.entries[high] = u10 * a + u11 * b;
                }
            }
        }
        let (c00, c01, c10, c11) = (u00.conj(), u01.conj(), u10.conj(), u11.conj());
        for row in 0..dim {
            let base = row * dim;
            for c in 0..dim {
                if c & cmask != 0 && c & tmask == 0 {
                    let low = base + c;
                    let high = base + (c | tmask);
                    let a = self.entries[low];
                    let b = self.entries[high];
                    self.entries[low] = a * c00 + b * c01;
                    self.entries[high] = a * c10 + b * c11;
                }
            }
        }
    }

    /// Unitary conjugation by a gate, no noise.
    pub fn conjugate_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate.placement {
            GatePlacement::Single { qubit } => {
                if qubit >= self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: qubit,
                        n_qubits: self.n_qubits,
                    });
                }
                self.conjugate_single(qubit, &gate.matrix);
            }
            GatePlacement::Controlled { control, target } => {
                if control >= self.n_qubits || target >= self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: control.max(target),
                        n_qubits: self.n_qubits,
                    });
                }
                if control == target {
                    return Err(Error::ControlEqualsTarget(control));
                }
                self.conjugate_controlled(control, target, &gate.matrix);
            }
        }
        Ok(())
    }

    /// `rho -> Σ_k K_k rho K_k†` on one qubit.
    pub fn apply_channel(&mut self, qubit: usize, kraus: &[Mat2]) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.entries.len()];
        for k in kraus {
            let mut term = self.clone();
            term.conjugate_single(qubit, k);
            for (a, t) in acc.iter_mut().zip(&term.entries) {
                *a += t;
            }
        }
        self.entries = acc;
        Ok(())
    }
}

/// Gate conjugation followed by amplitude damping then phase flip on every
/// qubit the gate touched.
pub fn apply_gate_noisy(rho: &mut DensityMatrix, gate: &Gate, noise: &NoiseParams) -> Result<()> {
    rho.conjugate_gate(gate)?;
    if noise.is_noiseless() {
        return Ok(());
    }
    let damping = amplitude_damping_kraus(noise.gamma)?;
    let flip = phase_flip_kraus(noise.alpha)?;
    let touched: [Option<usize>; 2] = match gate.placement {
        GatePlacement::Single { qubit } => [Some(qubit), None],
        GatePlacement::Controlled { control, target } => [Some(control), Some(target)],
    };
    for qubit in touched.into_iter().flatten() {
        rho.apply_channel(qubit, &damping)?;
        rho.apply_channel(qubit, &flip)?;
    }
    Ok(())
}

/// Replay a circuit on `|0…0⟩⟨0…0|` with per-gate noise.
pub fn run_noisy(circuit: &Circuit, noise: &NoiseParams) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::zero_state(circuit.n_qubits());
    for gate in circuit.gates() {
        apply_gate_noisy(&mut rho, gate, noise)?;
    }
    Ok(rho)
}

/// First-qubit-zero probability of the re-uploading circuit under noise.
pub fn noisy_qnn_prob(params: &QnnParams, x: [f64; 2], noise: &NoiseParams) -> Result<f64> {
    let rho = run_noisy(&qnn_circuit(params, x)?, noise)?;
    Ok(rho.prob_first_qubit_zero())
}

/// All-zero probability of the compiled double-depth kernel circuit under
/// noise. The noisy value is no longer exactly symmetric in its arguments,
/// so it is symmetrized as the mean of the two orderings.
pub fn noisy_kernel_value(
    spec: &EqkSpec,
    params: &QnnParams,
    xi: [f64; 2],
    xj: [f64; 2],
    noise: &NoiseParams,
) -> Result<f64> {
    let forward = run_noisy(&compiled_kernel_circuit(spec, params, xi, xj)?, noise)?;
    let backward = run_noisy(&compiled_kernel_circuit(spec, params, xj, xi)?, noise)?;
    Ok((forward.prob_all_zero() + backward.prob_all_zero()) / 2.0)
}

/// Gram matrix of noisy kernel values. The diagonal is NOT clamped: noise
/// genuinely reduces self-overlap, and the SVM receives the raw values.
pub fn noisy_gram_matrix(
    spec: &EqkSpec,
    params: &QnnParams,
    points: &[[f64; 2]],
    noise: &NoiseParams,
) -> Result<KernelMatrix> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "gram matrix needs at least one point".into(),
        ));
    }
    let m = points.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i..m).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            if i == j {
                let rho = run_noisy(
                    &compiled_kernel_circuit(spec, params, points[i], points[i])?,
                    noise,
                )?;
                Ok(rho.prob_all_zero())
            } else {
                noisy_kernel_value(spec, params, points[i], points[j], noise)
            }
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; m * m];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        entries[i * m + j] = v;
        entries[j * m + i] = v;
    }
    KernelMatrix::from_flat(m, entries)
}

/// Rectangular block of noisy kernel values (rows index `points_a`).
pub fn noisy_cross_kernel(
    spec: &EqkSpec,
    params: &QnnParams,
    points_a: &[[f64; 2]],
    points_b: &[[f64; 2]],
    noise: &NoiseParams,
) -> Result<Vec<Vec<f64>>> {
    if points_a.is_empty() || points_b.is_empty() {
        return Err(Error::InvalidArgument(
            "cross kernel needs non-empty point sets".into(),
        ));
    }
    points_a
        .par_iter()
        .map(|&xa| {
            points_b
                .iter()
                .map(|&xb| noisy_kernel_value(spec, params, xa, xb, noise))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// `(acc_combined - acc_qnn) / acc_qnn`.
pub fn relative_improvement(acc_combined: f64, acc_qnn: f64) -> Result<f64> {
    if acc_qnn <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "relative improvement needs a positive baseline accuracy, got {acc_qnn}"
        )));
    }
    Ok((acc_combined - acc_qnn) / acc_qnn)
}

/// One cell of a noise sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub dataset: String,
    pub layers: usize,
    pub tau: f64,
    pub acc_qnn: f64,
    pub acc_eqk: f64,
    pub relative_improvement: f64,
    pub seed: u64,
}

/// CSV with columns dataset, L, tau, acc_qnn, acc_eqk, relative_improvement,
/// seed.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "dataset,L,tau,acc_qnn,acc_eqk,relative_improvement,seed")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.dataset, r.layers, r.tau, r.acc_qnn, r.acc_eqk, r.relative_improvement, r.seed
        )?;
    }
    Ok(())
}

/// Parse the CSV written by [`write_sweep_csv`].
pub fn read_sweep_csv<R: BufRead>(r: R, origin: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(origin, e))?
        .ok_or_else(|| Error::parse(origin, "empty file"))?;
    if header.trim() != "dataset,L,tau,acc_qnn,acc_eqk,relative_improvement,seed" {
        return Err(Error::parse(origin, format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                origin,
                format!("row {}: expected 7 fields, got {}", idx + 2, fields.len()),
            ));
        }
        let f = |i: usize| -> Result<f64> {
            fields[i]
                .trim()
                .parse()
                .map_err(|e| Error::parse(origin, format!("row {}: {e}", idx + 2)))
        };
        out.push(SweepRecord {
            dataset: fields[0].trim().to_string(),
            layers: fields[1]
                .trim()
                .parse()
                .map_err(|e| Error::parse(origin, format!("row {}: {e}", idx + 2)))?,
            tau: f(2)?,
            acc_qnn: f(3)?,
            acc_eqk: f(4)?,
            relative_improvement: f(5)?,
            seed: fields[6]
                .trim()
                .parse()
                .map_err(|e| Error::parse(origin, format!("row {}: {e}", idx + 2)))?,
        });
    }
    Ok(out)
}
