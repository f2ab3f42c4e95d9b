//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured margin (run with `--nocapture` to see them).
//!
//! Exact checks (oracle equivalences, invariants) run at fixed tolerances;
//! benchmark reproductions are trend-level checks on medians over five
//! seeds, since single-run accuracies are stochastic.


use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use eqk::data::{gen_corners, generate, split, DatasetName};
use eqk::kernel::{
    compiled_kernel_circuit, gram_matrix, kernel_value,
    kernel_value_circuit_form, target_alignment, EqkSpec,
};
use eqk::noise::{
    amplitude_damping_kraus, noisy_kernel_value, noisy_qnn_prob,
    phase_flip_kraus, tau_noise,
};
use eqk::qnn::{
    cost_gradient, fidelity_cost, predict, qnn_state, train_iterative, train_qnn,
    DataPoint, QnnParams, TrainConfig,
};
use eqk::simulator::{
    su2_matrix, EntanglerKind, Mat2, StateVector, Su2Angles,
};
use eqk::svm::{dual_objective, svm_predict, svm_train};

use eqk_cli::config::{Construction, ExperimentConfig};
use eqk_cli::experiment::{run_experiment, run_noise_sweep, ResultRow};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn random_angles(rng: &mut ChaCha8Rng) -> Su2Angles {
    Su2Angles::new(
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
    )
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let dim = 1 << n;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(amps).unwrap()
}

fn random_points(m: usize, rng: &mut ChaCha8Rng) -> Vec<DataPoint> {
    (0..m)
        .map(|_| DataPoint {
            x: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            y: if rng.random_bool(0.5) { 1 } else { -1 },
        })
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn median_of<F: Fn(&ResultRow) -> bool>(rows: &[ResultRow], pick: F, field: fn(&ResultRow) -> f64) -> f64 {
    let mut vals: Vec<f64> = rows.iter().filter(|r| pick(r)).map(field).collect();
    assert!(!vals.is_empty(), "no rows matched the median filter");
    median(&mut vals)
}

fn base_config(name: DatasetName, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.dataset.name = name;
    cfg.dataset.seed = seed;
    cfg.train.init_seed = seed;
    cfg
}

#[test]
fn criterion_01_simulator_dense_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let mut state = random_state(n, &mut rng);
        let before = state.amplitudes().to_vec();
        let u = su2_matrix(random_angles(&mut rng)).unwrap();

        let kind = if n == 1 { 0 } else { rng.random_range(0..3) };
        let dense = match kind {
            0 => {
                let q = rng.random_range(0..n);
                state.apply_single(q, &u).unwrap();
                oracles::embed_single(n, q, &u)
            }
            1 => {
                let control = rng.random_range(0..n);
                let mut target = rng.random_range(0..n);
                while target == control {
                    target = rng.random_range(0..n);
                }
                state.apply_controlled(control, target, &u).unwrap();
                oracles::embed_controlled(n, control, target, &u)
            }
            _ => {
                let entangler = if rng.random_bool(0.5) {
                    EntanglerKind::CnotCascade
                } else {
                    EntanglerKind::CzCascade
                };
                state.apply_entangler(entangler).unwrap();
                let mut full = oracles::cmat_identity(1 << n);
                for gate in eqk::simulator::entangler_gates(n, entangler) {
                    full = oracles::matmul(&oracles::embed_gate(n, &gate), &full);
                }
                full
            }
        };
        let expected = oracles::matvec(&dense, &before);
        let diff = state
            .amplitudes()
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    assert!(worst <= 1e-12, "max amplitude deviation {worst}");
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 10.0, "criterion 1 took {secs:.1}s, budget 10s");
    println!("[acceptance] C1 simulator vs dense oracle: PASS (max |d amp| = {worst:.2e}, {secs:.1}s)");
}

#[test]
fn criterion_02_gradient_matches_finite_differences() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=3);
        let layers = rng.random_range(1..=4);
        let params = QnnParams::random(n, layers, rng.random());
        let batch = random_points(5, &mut rng);
        let grad = cost_gradient(&params, &batch).unwrap();
        let fd = oracles::fd_gradient(&params, &batch, 1e-5);
        worst = worst.max(oracles::grad_rel_error(&grad, &fd));
    }
    assert!(worst <= 1e-5, "max relative gradient error {worst}");
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 30.0, "criterion 2 took {secs:.1}s, budget 30s");
    println!("[acceptance] C2 adjoint gradient vs finite differences: PASS (max rel err = {worst:.2e}, {secs:.1}s)");
}

#[test]
fn criterion_03_kernel_invariants() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_asym: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut worst_form_gap: f64 = 0.0;
    for n in 1..=4usize {
        let params = QnnParams::random(n, 3, rng.random());
        let xs: Vec<[f64; 2]> = (0..50)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let spec = EqkSpec::n_to_n(n);
        let k = gram_matrix(&spec, &params, &xs).unwrap();
        for i in 0..50 {
            worst_diag = worst_diag.max((k.get(i, i) - 1.0).abs());
            for j in 0..50 {
                worst_asym = worst_asym.max((k.get(i, j) - k.get(j, i)).abs());
            }
        }
        min_eig = min_eig.min(k.min_eigenvalue());

        for _ in 0..20 {
            let xi = xs[rng.random_range(0..50)];
            let xj = xs[rng.random_range(0..50)];
            let overlap = kernel_value(&spec, &params, xi, xj).unwrap();
            let circuit = kernel_value_circuit_form(&spec, &params, xi, xj).unwrap();
            worst_form_gap = worst_form_gap.max((overlap - circuit).abs());
        }
    }
    assert!(worst_asym <= 1e-10, "asymmetry {worst_asym}");
    assert!(worst_diag <= 1e-10, "diagonal deviation {worst_diag}");
    assert!(min_eig >= -1e-8, "min eigenvalue {min_eig}");
    assert!(worst_form_gap <= 1e-12, "overlap/circuit gap {worst_form_gap}");
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 3 took {secs:.1}s, budget 60s");
    println!(
        "[acceptance] C3 kernel invariants: PASS (asym {worst_asym:.1e}, diag {worst_diag:.1e}, \
         min eig {min_eig:.1e}, form gap {worst_form_gap:.1e}, {secs:.1}s)"
    );
}

#[test]
fn criterion_04_last_layer_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(1..=3);
        let layers = rng.random_range(2..=4);
        let params = QnnParams::random(n, layers, rng.random());
        let xs: Vec<[f64; 2]> = (0..12)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let spec = EqkSpec::n_to_n(n);
        let base = gram_matrix(&spec, &params, &xs).unwrap();

        let mut theta: Vec<Vec<Su2Angles>> = (0..layers)
            .map(|l| (0..n).map(|q| params.theta(l, q)).collect())
            .collect();
        let mut phi: Vec<Vec<Su2Angles>> = (0..layers)
            .map(|l| (0..n - 1).map(|s| params.phi(l, s)).collect())
            .collect();
        for slot in theta[layers - 1].iter_mut() {
            *slot = random_angles(&mut rng);
        }
        for slot in phi[layers - 1].iter_mut() {
            *slot = random_angles(&mut rng);
        }
        let altered = QnnParams::new(theta, phi).unwrap();
        let moved = gram_matrix(&spec, &altered, &xs).unwrap();
        let diff = base
            .entries()
            .iter()
            .zip(moved.entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    assert!(worst <= 1e-10, "gram entries moved by {worst}");
    println!("[acceptance] C4 last-layer invariance of the n-to-n gram: PASS (max |dK| = {worst:.2e})");
}

#[test]
fn criterion_05_smo_matches_exhaustive_qp() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_obj_gap: f64 = 0.0;
    for case in 0..50 {
        let m = rng.random_range(2..=8);
        // Realistic instance: a quantum kernel over random points.
        let params = QnnParams::random(1, 2, rng.random());
        let xs: Vec<[f64; 2]> = (0..m)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let k = gram_matrix(&EqkSpec::n_to_n(1), &params, &xs).unwrap();
        let mut labels: Vec<i8> = (0..m)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect();
        labels[0] = 1;
        labels[m - 1] = -1;
        let c = [0.3, 1.0, 10.0][case % 3];

        let model = svm_train(&k, &labels, c, 1e-9).unwrap();
        let reference = oracles::solve_dual_exhaustive(&k, &labels, c);

        let obj = dual_objective(&model, &k).unwrap();
        let gap = (obj - reference.objective).abs();
        worst_obj_gap = worst_obj_gap.max(gap);
        assert!(
            obj >= reference.objective - 1e-6,
            "case {case}: SMO objective {obj} below optimum {}",
            reference.objective
        );

        for i in 0..m {
            let row: Vec<f64> = (0..m).map(|j| k.get(i, j)).collect();
            let got = svm_predict(&model, &row).unwrap();
            let want_value: f64 = (0..m)
                .map(|j| reference.alphas[j] * f64::from(labels[j]) * k.get(i, j))
                .sum::<f64>()
                + reference.bias;
            let want = if want_value >= 0.0 { 1 } else { -1 };
            assert_eq!(got, want, "case {case}: prediction mismatch at point {i}");
        }
    }
    assert!(worst_obj_gap <= 1e-6, "max objective gap {worst_obj_gap}");
    let secs = started.elapsed().as_secs_f64();
    println!(
        "[acceptance] C5 SMO vs exhaustive QP oracle: PASS (max |d objective| = {worst_obj_gap:.2e}, {secs:.1}s)"
    );
}

#[test]
fn criterion_06_iterative_scaling_continuity() {
    let data = gen_corners(200, 606).unwrap();
    let layers = 5;
    let cfg_first = TrainConfig {
        learning_rate: 0.05,
        epochs: 10,
        batch_size: 24,
        seed: 606,
    };
    let cfg_rest = TrainConfig {
        learning_rate: 0.005,
        epochs: 3,
        batch_size: 24,
        seed: 606,
    };
    let stages = train_iterative(data.points(), layers, 5, &cfg_first, &cfg_rest).unwrap();
    let mut worst: f64 = 0.0;
    for n in 2..=5usize {
        let final_prev = fidelity_cost(&stages[n - 2], data.points()).unwrap();
        let init_next = fidelity_cost(&stages[n - 2].expand(), data.points()).unwrap();
        worst = worst.max((final_prev - init_next).abs());
    }
    assert!(worst <= 1e-10, "continuity gap {worst}");
    println!("[acceptance] C6 iterative-scaling cost continuity: PASS (max gap = {worst:.2e})");
}

#[test]
fn criterion_07_corners_n_to_n_trend() {
    let started = Instant::now();
    let mut rows = Vec::new();
    for &seed in &SEEDS {
        let cfg = base_config(DatasetName::Corners, seed);
        rows.extend(run_experiment(&cfg).unwrap());
    }
    let mut margins = Vec::new();
    for n in 1..=8usize {
        let qnn = median_of(&rows, |r| r.n == n, |r| r.acc_qnn_test);
        let eqk = median_of(&rows, |r| r.n == n, |r| r.acc_eqk_test);
        assert!(
            eqk >= qnn - 0.01,
            "n={n}: median EQK {eqk} below median QNN {qnn} - 0.01"
        );
        margins.push(eqk - qnn);
        if n > 1 {
            // The accuracy sequences climb with n, up to desk-run slack.
            let prev_qnn = median_of(&rows, |r| r.n == n - 1, |r| r.acc_qnn_test);
            let prev_eqk = median_of(&rows, |r| r.n == n - 1, |r| r.acc_eqk_test);
            assert!(qnn >= prev_qnn - 0.03, "QNN dropped at n={n}: {prev_qnn} -> {qnn}");
            assert!(eqk >= prev_eqk - 0.03, "EQK dropped at n={n}: {prev_eqk} -> {eqk}");
        }
    }
    // Representer-theorem consequence, checked per run rather than on
    // medians: the kernel model never loses to its own QNN on training
    // accuracy beyond the hinge-vs-fidelity slack.
    for r in &rows {
        assert!(
            r.acc_eqk_train >= r.acc_qnn_train - 0.01,
            "seed {} n={}: EQK train {} below QNN train {}",
            r.seed,
            r.n,
            r.acc_eqk_train,
            r.acc_qnn_train
        );
    }
    let qnn_first = median_of(&rows, |r| r.n == 1, |r| r.acc_qnn_test);
    let qnn_last = median_of(&rows, |r| r.n == 8, |r| r.acc_qnn_test);
    assert!(
        qnn_last - qnn_first >= 0.03,
        "QNN gain {qnn_first} -> {qnn_last} below 0.03"
    );
    let eqk_last = median_of(&rows, |r| r.n == 8, |r| r.acc_eqk_test);
    assert!(eqk_last >= 0.93, "median EQK at n=8 is {eqk_last}");
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 1800.0, "criterion 7 took {secs:.0}s, budget 30min");
    println!(
        "[acceptance] C7 corners n-to-n trend: PASS (QNN {qnn_first:.3}->{qnn_last:.3}, \
         EQK n=8 {eqk_last:.3}, min EQK-QNN margin {:+.3}, {secs:.0}s)",
        margins.iter().copied().fold(f64::INFINITY, f64::min)
    );
}

#[test]
fn criterion_08_circles_one_to_n_trend() {
    let started = Instant::now();
    let mut rows = Vec::new();
    for &seed in &SEEDS {
        let mut cfg = base_config(DatasetName::Circles, seed);
        cfg.kernel.construction = Construction::OneToN;
        cfg.kernel.entangler = EntanglerKind::CnotCascade;
        rows.extend(run_experiment(&cfg).unwrap());
    }
    let at = |n: usize| median_of(&rows, |r| r.n == n, |r| r.acc_eqk_test);
    let m2 = at(2);
    let m4 = at(4);
    assert!(
        m4 >= m2 + 0.05,
        "median at n=4 ({m4}) not 0.05 above n=2 ({m2})"
    );
    for n in 4..=8usize {
        let m = at(n);
        assert!(m >= 0.90, "median at n={n} is {m}");
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 1200.0, "criterion 8 took {secs:.0}s, budget 20min");
    println!(
        "[acceptance] C8 circles 1-to-n trend: PASS (n=2 {m2:.3} -> n=4 {m4:.3}, \
         n=8 {:.3}, {secs:.0}s)",
        at(8)
    );
}

#[test]
fn criterion_09_spiral_entangler_direction() {
    let started = Instant::now();
    let run = |entangler: EntanglerKind| -> f64 {
        let mut vals = Vec::new();
        for &seed in &SEEDS {
            let mut cfg = base_config(DatasetName::Spiral, seed);
            cfg.model.n_max = 3;
            cfg.kernel.construction = Construction::OneToN;
            cfg.kernel.entangler = entangler;
            let rows = run_experiment(&cfg).unwrap();
            vals.extend(
                rows.iter()
                    .filter(|r| r.n == 3)
                    .map(|r| r.acc_eqk_test),
            );
        }
        median(&mut vals)
    };
    let cnot = run(EntanglerKind::CnotCascade);
    let cz = run(EntanglerKind::CzCascade);
    assert!(
        cnot >= cz || cz - cnot < 0.02,
        "direction reversed by too much: CNOT {cnot}, CZ {cz}"
    );
    let secs = started.elapsed().as_secs_f64();
    println!(
        "[acceptance] C9 spiral 1-to-3 entangler direction: PASS (CNOT {cnot:.3} vs CZ {cz:.3}, {secs:.0}s)"
    );
}

#[test]
fn criterion_10_noise_pipeline() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);

    // Kraus completeness over a grid of strengths.
    let mut worst_completeness: f64 = 0.0;
    for step in 0..=20 {
        let p = step as f64 / 20.0;
        for kraus in [
            amplitude_damping_kraus(p).unwrap(),
            phase_flip_kraus(p).unwrap(),
        ] {
            let mut sum = Mat2::new([[Complex64::new(0.0, 0.0); 2]; 2]);
            for k in &kraus {
                sum = sum.add(&k.dagger().matmul(k));
            }
            let id = Mat2::identity();
            for i in 0..2 {
                for j in 0..2 {
                    worst_completeness =
                        worst_completeness.max((sum.m[i][j] - id.m[i][j]).norm());
                }
            }
        }
    }
    assert!(worst_completeness <= 1e-12);

    // Trace preservation along random noisy circuits.
    let mut worst_trace: f64 = 0.0;
    for _ in 0..5 {
        let params = QnnParams::random(2, 3, rng.random());
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let circuit = eqk::qnn::qnn_circuit(&params, x).unwrap();
        let noise = tau_noise(0.02).unwrap();
        let mut rho = eqk::noise::DensityMatrix::zero_state(2);
        for gate in circuit.gates() {
            eqk::noise::apply_gate_noisy(&mut rho, gate, &noise).unwrap();
            worst_trace = worst_trace.max((rho.trace().re - 1.0).abs() + rho.trace().im.abs());
        }
    }
    assert!(worst_trace <= 1e-12, "trace drift {worst_trace}");

    // tau = 0 reproduces statevector probabilities.
    let mut worst_tau0: f64 = 0.0;
    let zero = tau_noise(0.0).unwrap();
    for _ in 0..20 {
        let params = QnnParams::random(1, 3, rng.random());
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let clean = qnn_state(&params, x).unwrap().prob_first_qubit_zero();
        let noisy = noisy_qnn_prob(&params, x, &zero).unwrap();
        worst_tau0 = worst_tau0.max((clean - noisy).abs());

        let spec = EqkSpec::one_to_n(2, EntanglerKind::CnotCascade).unwrap();
        let xj = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let kv = kernel_value(&spec, &params, x, xj).unwrap();
        let nv = noisy_kernel_value(&spec, &params, x, xj, &zero).unwrap();
        worst_tau0 = worst_tau0.max((kv - nv).abs());
    }
    assert!(worst_tau0 <= 1e-10, "tau=0 deviation {worst_tau0}");

    // The sweep itself: corners, paper tau grid, layer grid 1/4/7/10.
    let mut cfg = base_config(DatasetName::Corners, 1);
    cfg.train.epochs_first = 2;
    cfg.model.n_max = 2;
    cfg.kernel.construction = Construction::OneToN;
    cfg.kernel.entangler = EntanglerKind::CnotCascade;
    cfg.noise.enabled = true;
    cfg.noise.layers = vec![1, 4, 7, 10];
    cfg.validate().unwrap();
    let (_, records) = run_noise_sweep(&cfg).unwrap();
    assert_eq!(records.len(), 4 * 7);
    for r in &records {
        assert!(
            (-0.6..=0.6).contains(&r.relative_improvement),
            "cell (L={}, tau={}) improvement {} outside [-0.6, 0.6]",
            r.layers,
            r.tau,
            r.relative_improvement
        );
    }
    let cell = |layers: usize, tau: f64| -> f64 {
        records
            .iter()
            .find(|r| r.layers == layers && (r.tau - tau).abs() < 1e-12)
            .expect("cell present")
            .relative_improvement
    };
    let deep_noisy = cell(10, 0.03);
    let shallow_quiet = cell(1, 0.005);
    assert!(
        deep_noisy <= shallow_quiet,
        "expected degradation: cell(10, 0.03) = {deep_noisy} vs cell(1, 0.005) = {shallow_quiet}"
    );
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 1800.0, "criterion 10 took {secs:.0}s, budget 30min");
    println!(
        "[acceptance] C10 noise pipeline: PASS (completeness {worst_completeness:.1e}, \
         trace {worst_trace:.1e}, tau0 {worst_tau0:.1e}, improvements in \
         [{:.2}, {:.2}], deep/noisy {deep_noisy:+.3} <= shallow/quiet {shallow_quiet:+.3}, {secs:.0}s)",
        records
            .iter()
            .map(|r| r.relative_improvement)
            .fold(f64::INFINITY, f64::min),
        records
            .iter()
            .map(|r| r.relative_improvement)
            .fold(f64::NEG_INFINITY, f64::max),
    );
}

/// Mirror-paired separable set: class +1 near the identity encoding, class
/// -1 near the bit-flip encoding, using the same offsets for both classes.
fn separable_pair_set(m_half: usize, spread: f64, seed: u64) -> Vec<DataPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<[f64; 2]> = (0..m_half)
        .map(|_| {
            [
                rng.random_range(-spread..spread),
                rng.random_range(-spread..spread),
            ]
        })
        .collect();
    let mut points = Vec::with_capacity(2 * m_half);
    for off in &offsets {
        points.push(DataPoint {
            x: [off[0], off[1]],
            y: 1,
        });
    }
    for off in &offsets {
        points.push(DataPoint {
            x: [off[0], PI + off[1]],
            y: -1,
        });
    }
    points
}

#[test]
fn criterion_11_svm_redundancy_under_perfect_training() {
    // Balanced symmetric scenario with an exactly separating model: zero
    // parameters, one layer, so the feature map is the bare encoding.
    let data = separable_pair_set(20, 0.08, 1111);
    let params = QnnParams::zeros(1, 1);

    // Precondition: every point maps within fidelity 0.99 of its label state.
    let mut min_fidelity = f64::INFINITY;
    for p in &data {
        let state = qnn_state(&params, p.x).unwrap();
        let p0 = state.prob_first_qubit_zero();
        let fidelity = if p.y > 0 { p0 } else { 1.0 - p0 };
        min_fidelity = min_fidelity.min(fidelity);
    }
    assert!(min_fidelity >= 0.99, "fidelity precondition: {min_fidelity}");

    let xs: Vec<[f64; 2]> = data.iter().map(|p| p.x).collect();
    let labels: Vec<i8> = data.iter().map(|p| p.y).collect();
    let spec = EqkSpec::n_to_n(1);
    let gram = gram_matrix(&spec, &params, &xs).unwrap();
    let model = svm_train(&gram, &labels, 1.0, 1e-8).unwrap();

    assert!(
        model.bias().abs() <= 1e-3,
        "balanced case bias {}",
        model.bias()
    );
    let mut agree = 0usize;
    for (i, p) in data.iter().enumerate() {
        let qnn_label = predict(&params, p.x).unwrap();
        let svm_label = svm_predict(&model, gram.row(i)).unwrap();
        if qnn_label == svm_label {
            agree += 1;
        }
    }
    assert_eq!(agree, data.len(), "QNN and EQK+SVM disagree");

    // The same redundancy after an actual training run on the separable set.
    let cfg = TrainConfig {
        learning_rate: 0.05,
        epochs: 60,
        batch_size: 10,
        seed: 1111,
    };
    let trained = train_qnn(&data, &QnnParams::random(1, 2, 1111), &cfg).unwrap();
    let mut min_fid_trained = f64::INFINITY;
    for p in &data {
        let p0 = qnn_state(&trained, p.x).unwrap().prob_first_qubit_zero();
        let fid = if p.y > 0 { p0 } else { 1.0 - p0 };
        min_fid_trained = min_fid_trained.min(fid);
    }
    assert!(
        min_fid_trained >= 0.99,
        "trained fidelity precondition: {min_fid_trained}"
    );
    let gram_t = gram_matrix(&spec, &trained, &xs).unwrap();
    let model_t = svm_train(&gram_t, &labels, 1.0, 1e-8).unwrap();
    for (i, p) in data.iter().enumerate() {
        assert_eq!(
            predict(&trained, p.x).unwrap(),
            svm_predict(&model_t, gram_t.row(i)).unwrap(),
            "trained-run disagreement at point {i}"
        );
    }
    println!(
        "[acceptance] C11 SVM redundancy under perfect training: PASS \
         (min fidelity {min_fidelity:.4}, |b| = {:.1e}, trained min fidelity {min_fid_trained:.4})",
        model.bias().abs()
    );
}

#[test]
fn criterion_12_training_improves_target_alignment() {
    let started = Instant::now();
    let mut improved = 0usize;
    let mut gaps = Vec::new();
    for &seed in &SEEDS {
        let full = generate(DatasetName::Corners, 1000, seed).unwrap();
        let (train, _) = split(&full, 500, 500, seed.wrapping_add(1)).unwrap();
        let xs = train.features();
        let labels = train.labels();

        let init = QnnParams::random(1, 7, seed);
        let cfg = TrainConfig {
            learning_rate: 0.05,
            epochs: 30,
            batch_size: 24,
            seed,
        };
        let trained = train_qnn(train.points(), &init, &cfg).unwrap();

        let spec = EqkSpec::n_to_n(1);
        let ta_init =
            target_alignment(&gram_matrix(&spec, &init, &xs).unwrap(), &labels).unwrap();
        let ta_trained =
            target_alignment(&gram_matrix(&spec, &trained, &xs).unwrap(), &labels).unwrap();
        gaps.push(ta_trained - ta_init);
        if ta_trained > ta_init {
            improved += 1;
        }
    }
    assert!(
        improved >= 4,
        "alignment improved in only {improved}/5 seeds (gaps {gaps:?})"
    );
    let secs = started.elapsed().as_secs_f64();
    println!(
        "[acceptance] C12 target alignment improves with training: PASS ({improved}/5 seeds, \
         gaps {:?}, {secs:.0}s)",
        gaps.iter().map(|g| (g * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );
}

// The compiled form is what a device would execute: double depth, and its
// matrix must be exactly S(xi)† S(xj).
#[test]
fn compiled_circuit_is_daggered_feature_map_product() {
    let params = QnnParams::random(1, 4, 42);
    let spec = EqkSpec::one_to_n(3, EntanglerKind::CnotCascade).unwrap();
    let xi = [0.1, 0.2];
    let xj = [0.3, -0.4];

    let feature = |x| eqk::kernel::eqk_feature_circuit(&spec, &params, x).unwrap();
    let compiled = compiled_kernel_circuit(&spec, &params, xi, xj).unwrap();
    assert_eq!(compiled.gates().len(), 2 * feature(xi).gates().len());

    let si = oracles::circuit_matrix(&feature(xi));
    let sj = oracles::circuit_matrix(&feature(xj));
    let si_dag: oracles::CMat = (0..si.len())
        .map(|r| (0..si.len()).map(|c| si[c][r].conj()).collect())
        .collect();
    let expected = oracles::matmul(&si_dag, &sj);
    let got = oracles::circuit_matrix(&compiled);
    let mut worst: f64 = 0.0;
    for r in 0..expected.len() {
        for c in 0..expected.len() {
            worst = worst.max((expected[r][c] - got[r][c]).norm());
        }
    }
    assert!(worst <= 1e-12);
}
