//! Exact statevector simulation of the gate set used by every circuit in this
//! crate: generic SU(2) rotations, their controlled versions, and CNOT/CZ
//! entangler cascades.
//!
//! Conventions:
//! * Qubit 0 is the leftmost tensor factor and the most significant bit of a
//!   basis-state index, so "the first qubit" of an n-qubit register selects
//!   the top/bottom half of the amplitude array.
//! * SU(2) rotations follow the Euler decomposition `U(a,b,c) = Rz(c)·Ry(b)·Rz(a)`
//!   with `Rz(t) = diag(e^{-it/2}, e^{it/2})`. This makes `U(0,0,0)` the exact
//!   identity, which the iterative scaling initialization relies on.
//! * Global phase is never normalized away; every quantity consumed downstream
//!   (probabilities, |overlap|^2) is phase-invariant.

use num_complex::Complex64;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Euler angles (radians) of a generic SU(2) unitary.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Su2Angles {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Su2Angles {
    pub const ZERO: Su2Angles = Su2Angles {
        a: 0.0,
        b: 0.0,
        c: 0.0,
    };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Su2Angles { a, b, c }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }
}

/// Which two-qubit gate the entangler cascade is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntanglerKind {
    CnotCascade,
    CzCascade,
}

/// Dense 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Mat2 { m }
    }

    pub fn identity() -> Self {
        Mat2::new([
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ])
    }

    pub fn pauli_x() -> Self {
        Mat2::new([
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        ])
    }

    pub fn pauli_z() -> Self {
        Mat2::new([
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
        ])
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Mat2 {
        Mat2::new([
            [self.m[0][0].conj(), self.m[1][0].conj()],
            [self.m[0][1].conj(), self.m[1][1].conj()],
        ])
    }

    pub fn matmul(&self, rhs: &Mat2) -> Mat2 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        Mat2::new(out)
    }

    pub fn scale(&self, factor: Complex64) -> Mat2 {
        let mut out = self.m;
        for row in &mut out {
            for entry in row {
                *entry *= factor;
            }
        }
        Mat2::new(out)
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        let mut out = self.m;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry += rhs.m[i][j];
            }
        }
        Mat2::new(out)
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.dagger().matmul(self);
        let id = Mat2::identity();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((p.m[i][j] - id.m[i][j]).norm());
            }
        }
        worst
    }
}

/// Generic SU(2) unitary `U(a,b,c) = Rz(c)·Ry(b)·Rz(a)`.
///
/// `U(0,0,0)` is exactly the identity.
pub fn su2_matrix(angles: Su2Angles) -> Result<Mat2> {
    if !angles.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "SU(2) angles must be finite, got ({}, {}, {})",
            angles.a, angles.b, angles.c
        )));
    }
    Ok(su2_matrix_unchecked(angles))
}

pub(crate) fn su2_matrix_unchecked(angles: Su2Angles) -> Mat2 {
    let (half_b_sin, half_b_cos) = (angles.b / 2.0).sin_cos();
    let sum = Complex64::from_polar(1.0, -(angles.a + angles.c) / 2.0);
    let diff = Complex64::from_polar(1.0, (angles.a - angles.c) / 2.0);
    Mat2::new([
        [half_b_cos * sum, -half_b_sin * diff],
        [half_b_sin * diff.conj(), half_b_cos * sum.conj()],
    ])
}

/// Partial derivatives of [`su2_matrix`] with respect to `a`, `b`, `c`.
///
/// These are the exact derivative matrices of the Euler product; they are not
/// unitary and are only meaningful inside adjoint-mode differentiation.
pub(crate) fn su2_partials(angles: Su2Angles) -> [Mat2; 3] {
    let (half_b_sin, half_b_cos) = (angles.b / 2.0).sin_cos();
    let sum = Complex64::from_polar(1.0, -(angles.a + angles.c) / 2.0);
    let diff = Complex64::from_polar(1.0, (angles.a - angles.c) / 2.0);
    let half_i = Complex64::new(0.0, 0.5);

    // d/da: column phases e^{∓ia/2} differentiate to ∓(i/2) of themselves.
    let da = Mat2::new([
        [-half_i * half_b_cos * sum, half_i * -half_b_sin * diff],
        [
            -half_i * half_b_sin * diff.conj(),
            half_i * half_b_cos * sum.conj(),
        ],
    ]);
    // d/db: cos(b/2) and sin(b/2) differentiate in place.
    let db = Mat2::new([
        [-0.5 * half_b_sin * sum, -0.5 * half_b_cos * diff],
        [
            0.5 * half_b_cos * diff.conj(),
            -0.5 * half_b_sin * sum.conj(),
        ],
    ]);
    // d/dc: row phases e^{∓ic/2}.
    let dc = Mat2::new([
        [-half_i * half_b_cos * sum, -half_i * -half_b_sin * diff],
        [
            half_i * half_b_sin * diff.conj(),
            half_i * half_b_cos * sum.conj(),
        ],
    ]);
    [da, db, dc]
}

/// Placement of a one- or two-qubit gate on a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GatePlacement {
    Single { qubit: usize },
    Controlled { control: usize, target: usize },
}

/// A gate: a 2x2 matrix applied at a placement (plain or controlled).
#[derive(Clone, Copy, Debug)]
pub struct Gate {
    pub placement: GatePlacement,
    pub matrix: Mat2,
}

impl Gate {
    pub fn single(qubit: usize, matrix: Mat2) -> Gate {
        Gate {
            placement: GatePlacement::Single { qubit },
            matrix,
        }
    }

    pub fn controlled(control: usize, target: usize, matrix: Mat2) -> Gate {
        Gate {
            placement: GatePlacement::Controlled { control, target },
            matrix,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::controlled(control, target, Mat2::pauli_x())
    }

    pub fn cz(control: usize, target: usize) -> Gate {
        Gate::controlled(control, target, Mat2::pauli_z())
    }

    pub fn dagger(&self) -> Gate {
        Gate {
            placement: self.placement,
            matrix: self.matrix.dagger(),
        }
    }
}

/// The entangler cascade `E`: one two-qubit gate per adjacent pair, control on
/// the lower index, applied in ascending order.
pub fn entangler_gates(n_qubits: usize, kind: EntanglerKind) -> Vec<Gate> {
    (0..n_qubits.saturating_sub(1))
        .map(|q| match kind {
            EntanglerKind::CnotCascade => Gate::cnot(q, q + 1),
            EntanglerKind::CzCascade => Gate::cz(q, q + 1),
        })
        .collect()
}

/// An ordered gate list on a fixed-width register. Gates are validated when
/// pushed, so replaying a circuit cannot fail.
#[derive(Clone, Debug, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Circuit {
        assert!(n_qubits >= 1, "circuit needs at least one qubit");
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        check_placement(self.n_qubits, gate.placement)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Inverse circuit: gates reversed, each conjugate-transposed.
    pub fn dagger(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::dagger).collect(),
        }
    }

    /// Run the circuit on `|0…0⟩`.
    pub fn run(&self) -> StateVector {
        let mut state = StateVector::zero(self.n_qubits);
        for gate in &self.gates {
            state.apply_gate_unchecked(gate);
        }
        state
    }
}

fn check_placement(n_qubits: usize, placement: GatePlacement) -> Result<()> {
    match placement {
        GatePlacement::Single { qubit } => {
            if qubit >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: qubit,
                    n_qubits,
                });
            }
        }
        GatePlacement::Controlled { control, target } => {
            if control >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: control,
                    n_qubits,
                });
            }
            if target >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: target,
                    n_qubits,
                });
            }
            if control == target {
                return Err(Error::ControlEqualsTarget(control));
            }
        }
    }
    Ok(())
}

/// Pure n-qubit state as 2^n complex amplitudes.
#[derive(Clone, Debug)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits`.
    pub fn zero(n_qubits: usize) -> StateVector {
        assert!(n_qubits >= 1, "state needs at least one qubit");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Wrap raw amplitudes; length must be a power of two and the squared
    /// norm must be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count must be a power of two >= 2, got {len}"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm^2 must be 1 within {NORM_TOL}, got {norm_sqr}"
            )));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Stride between the target-bit-0 and target-bit-1 halves of a pair.
    /// Qubit 0 is the most significant bit of the index.
    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    /// Apply a 2x2 matrix to one tensor factor.
    ///
    /// The matrix is not required to be unitary (adjoint differentiation and
    /// Kraus terms reuse this kernel); norm preservation is only guaranteed
    /// for unitary input.
    pub fn apply_single(&mut self, qubit: usize, u: &Mat2) -> Result<()> {
        check_placement(self.n_qubits, GatePlacement::Single { qubit })?;
        self.apply_single_unchecked(qubit, u);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_single_unchecked(&mut self, qubit: usize, u: &Mat2) {
        let mask = self.mask(qubit);
        let [[u00, u01], [u10, u11]] = u.m;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for low in base..base + mask {
                let high = low | mask;
                let a = self.amps[low];
                let b = self.amps[high];
                self.amps[low] = u00 * a + u01 * b;
                self.amps[high] = u10 * a + u11 * b;
            }
            base += mask << 1;
        }
    }

    /// Apply a 2x2 matrix to `target`, conditioned on `control` being `|1⟩`.
    pub fn apply_controlled(&mut self, control: usize, target: usize, u: &Mat2) -> Result<()> {
        check_placement(self.n_qubits, GatePlacement::Controlled { control, target })?;
        self.apply_controlled_unchecked(control, target, u);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_controlled_unchecked(&mut self, control: usize, target: usize, u: &Mat2) {
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        let [[u00, u01], [u10, u11]] = u.m;
        for low in 0..self.amps.len() {
            if low & cmask != 0 && low & tmask == 0 {
                let high = low | tmask;
                let a = self.amps[low];
                let b = self.amps[high];
                self.amps[low] = u00 * a + u01 * b;
                self.amps[high] = u10 * a + u11 * b;
            }
        }
    }

    /// `P1 ⊗ dU` action: the derivative of a controlled gate. Amplitudes with
    /// the control in `|0⟩` are zeroed, the rest get the (non-unitary) matrix.
    pub(crate) fn apply_controlled_derivative(&mut self, control: usize, target: usize, du: &Mat2) {
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        let [[u00, u01], [u10, u11]] = du.m;
        for low in 0..self.amps.len() {
            if low & cmask == 0 {
                self.amps[low] = Complex64::new(0.0, 0.0);
            } else if low & tmask == 0 {
                let high = low | tmask;
                let a = self.amps[low];
                let b = self.amps[high];
                self.amps[low] = u00 * a + u01 * b;
                self.amps[high] = u10 * a + u11 * b;
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        check_placement(self.n_qubits, gate.placement)?;
        self.apply_gate_unchecked(gate);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_gate_unchecked(&mut self, gate: &Gate) {
        match gate.placement {
            GatePlacement::Single { qubit } => self.apply_single_unchecked(qubit, &gate.matrix),
            GatePlacement::Controlled { control, target } => {
                self.apply_controlled_unchecked(control, target, &gate.matrix)
            }
        }
    }

    /// Apply the entangler cascade for this register width.
    pub fn apply_entangler(&mut self, kind: EntanglerKind) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::Precondition(format!(
                "entangler cascade needs at least 2 qubits, register has {}",
                self.n_qubits
            )));
        }
        for gate in entangler_gates(self.n_qubits, kind) {
            self.apply_gate_unchecked(&gate);
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "inner product between {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability of measuring qubit 0 in `|0⟩`: the total weight of the
    /// first half of the amplitude array.
    pub fn prob_first_qubit_zero(&self) -> f64 {
        let half = self.amps.len() / 2;
        self.amps[..half].iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of measuring every qubit in `|0⟩`.
    pub fn prob_all_zero(&self) -> f64 {
        self.amps[0].norm_sqr()
    }

    /// Zero out every amplitude whose first-qubit bit differs from `bit`.
    /// This is the (unnormalized) projection used by label measurements.
    pub(crate) fn project_first_qubit(&mut self, bit: u8) {
        let half = self.amps.len() / 2;
        let range = if bit == 0 {
            half..self.amps.len()
        } else {
            0..half
        };
        for amp in &mut self.amps[range] {
            *amp = Complex64::new(0.0, 0.0);
        }
    }
}
