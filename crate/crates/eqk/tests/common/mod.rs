//! Brute-force dense-matrix machinery shared by the oracle tests. Everything
//! here builds full 2^n x 2^n operators from Kronecker products and never
//! touches the bit-twiddling simulator kernels it is used to check.
//!
//! Each test binary compiles its own copy, so not every helper is used by
//! every binary.
#![allow(dead_code)]

use num_complex::Complex64;

use eqk::simulator::{Gate, GatePlacement, Mat2};

pub type CMat = Vec<Vec<Complex64>>;

pub fn cmat_identity(dim: usize) -> CMat {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = (a.len(), a[0].len());
    let cb = b[0].len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); cb]; ra];
    for i in 0..ra {
        for k in 0..ca {
            let aik = a[i][k];
            for j in 0..cb {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn mat2_to_cmat(u: &Mat2) -> CMat {
    vec![
        vec![u.m[0][0], u.m[0][1]],
        vec![u.m[1][0], u.m[1][1]],
    ]
}

fn projector(bit: usize) -> CMat {
    let mut p = vec![vec![Complex64::new(0.0, 0.0); 2]; 2];
    p[bit][bit] = Complex64::new(1.0, 0.0);
    p
}

/// `I ⊗ … ⊗ U ⊗ … ⊗ I` with U at tensor slot `qubit` (slot 0 leftmost).
pub fn embed_single(n: usize, qubit: usize, u: &Mat2) -> CMat {
    let u = mat2_to_cmat(u);
    let id = cmat_identity(2);
    let mut full = cmat_identity(1);
    for slot in 0..n {
        full = kron(&full, if slot == qubit { &u } else { &id });
    }
    full
}

/// `P0_c ⊗ I + P1_c ⊗ U_t` as a full-dimension matrix.
pub fn embed_controlled(n: usize, control: usize, target: usize, u: &Mat2) -> CMat {
    let u = mat2_to_cmat(u);
    let id = cmat_identity(2);
    let p0 = projector(0);
    let p1 = projector(1);
    let mut idle = cmat_identity(1);
    let mut act = cmat_identity(1);
    for slot in 0..n {
        let idle_factor = if slot == control { &p0 } else { &id };
        let act_factor = if slot == control {
            &p1
        } else if slot == target {
            &u
        } else {
            &id
        };
        idle = kron(&idle, idle_factor);
        act = kron(&act, act_factor);
    }
    let dim = idle.len();
    for i in 0..dim {
        for j in 0..dim {
            idle[i][j] += act[i][j];
        }
    }
    idle
}

pub fn embed_gate(n: usize, gate: &Gate) -> CMat {
    match gate.placement {
        GatePlacement::Single { qubit } => embed_single(n, qubit, &gate.matrix),
        GatePlacement::Controlled { control, target } => {
            embed_controlled(n, control, target, &gate.matrix)
        }
    }
}
