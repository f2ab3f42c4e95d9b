//! End-to-end experiment execution: dataset generation, QNN training, kernel
//! construction, SVM fitting, evaluation, and noise sweeps.

use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use eqk::data::{generate, split, Dataset};
use eqk::kernel::{cross_kernel, gram_matrix, EqkSpec, KernelMatrix};
use eqk::noise::{
    noisy_cross_kernel, noisy_gram_matrix, noisy_qnn_prob, relative_improvement, tau_noise,
    SweepRecord,
};
use eqk::qnn::{label_from_prob, qnn_accuracy, train_iterative, QnnParams, TrainConfig};
use eqk::svm::{svm_predict, svm_train, SvmModel};
use eqk::{Error, Result};

use crate::config::{Construction, ExperimentConfig};

const RESULT_HEADER: &str = "dataset,construction,entangler,n,L,tau,acc_qnn_train,acc_qnn_test,\
acc_eqk_train,acc_eqk_test,seed,wall_time_seconds";

/// One evaluated pipeline configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub construction: String,
    pub entangler: String,
    pub n: usize,
    pub layers: usize,
    pub tau: f64,
    pub acc_qnn_train: f64,
    pub acc_qnn_test: f64,
    pub acc_eqk_train: f64,
    pub acc_eqk_test: f64,
    pub seed: u64,
    pub wall_time_seconds: f64,
}

fn entangler_name(kind: eqk::simulator::EntanglerKind) -> &'static str {
    match kind {
        eqk::simulator::EntanglerKind::CnotCascade => "cnot",
        eqk::simulator::EntanglerKind::CzCascade => "cz",
    }
}

/// Generate and split the configured dataset. The split is seeded with
/// `dataset.seed + 1` so point coordinates and split assignment come from
/// independent streams.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let full = generate(cfg.dataset.name, cfg.dataset.total_points, cfg.dataset.seed)?;
    split(
        &full,
        cfg.dataset.n_train,
        cfg.dataset.n_test,
        cfg.dataset.seed.wrapping_add(1),
    )
}

pub fn first_stage_train_config(cfg: &ExperimentConfig) -> TrainConfig {
    TrainConfig {
        learning_rate: cfg.train.lr_first,
        epochs: cfg.train.epochs_first,
        batch_size: cfg.train.batch_size,
        seed: cfg.train.init_seed,
    }
}

pub fn later_stage_train_config(cfg: &ExperimentConfig) -> TrainConfig {
    TrainConfig {
        learning_rate: cfg.train.lr_rest,
        epochs: cfg.train.epochs_rest,
        batch_size: cfg.train.batch_size,
        seed: cfg.train.init_seed,
    }
}

fn svm_accuracy(model: &SvmModel, rows: &[Vec<f64>], labels: &[i8]) -> Result<f64> {
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} kernel rows against {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let mut hits = 0usize;
    for (row, &y) in rows.iter().zip(labels) {
        if svm_predict(model, row)? == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / labels.len() as f64)
}

/// Fit an SVM on the training Gram and score it on both sets.
fn eqk_accuracies(
    gram: &KernelMatrix,
    test_rows: &[Vec<f64>],
    train_labels: &[i8],
    test_labels: &[i8],
    c: f64,
    tol: f64,
) -> Result<(f64, f64, SvmModel)> {
    let model = svm_train(gram, train_labels, c, tol)?;
    let train_rows: Vec<Vec<f64>> = (0..gram.size()).map(|i| gram.row(i).to_vec()).collect();
    let acc_train = svm_accuracy(&model, &train_rows, train_labels)?;
    let acc_test = svm_accuracy(&model, test_rows, test_labels)?;
    Ok((acc_train, acc_test, model))
}

/// Run the configured experiment: iteratively train the QNN, build the Gram
/// matrix per qubit count, fit the SVM, and evaluate everything.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let (train_set, test_set) = prepare_data(cfg)?;
    let train_xs = train_set.features();
    let test_xs = test_set.features();
    let train_labels = train_set.labels();
    let test_labels = test_set.labels();

    let cfg_first = first_stage_train_config(cfg);
    let cfg_rest = later_stage_train_config(cfg);

    let mut rows = Vec::new();
    let mut push_row = |n: usize,
                        started: Instant,
                        params: &QnnParams,
                        spec: &EqkSpec|
     -> Result<()> {
        let acc_qnn_train = qnn_accuracy(params, train_set.points())?;
        let acc_qnn_test = qnn_accuracy(params, test_set.points())?;
        let gram = gram_matrix(spec, params, &train_xs)?;
        let test_rows = cross_kernel(spec, params, &test_xs, &train_xs)?;
        let (acc_eqk_train, acc_eqk_test, _) = eqk_accuracies(
            &gram,
            &test_rows,
            &train_labels,
            &test_labels,
            cfg.kernel.svm_c,
            cfg.kernel.svm_tol,
        )?;
        rows.push(ResultRow {
            dataset: cfg.dataset.name.to_string(),
            construction: cfg.kernel.construction.to_string(),
            entangler: entangler_name(cfg.kernel.entangler).to_string(),
            n,
            layers: cfg.model.layers,
            tau: 0.0,
            acc_qnn_train,
            acc_qnn_test,
            acc_eqk_train,
            acc_eqk_test,
            seed: cfg.dataset.seed,
            wall_time_seconds: started.elapsed().as_secs_f64(),
        });
        Ok(())
    };

    match cfg.kernel.construction {
        Construction::NToN => {
            let stages = train_iterative(
                train_set.points(),
                cfg.model.layers,
                cfg.model.n_max,
                &cfg_first,
                &cfg_rest,
            )?;
            for (idx, params) in stages.iter().enumerate() {
                let started = Instant::now();
                let spec = EqkSpec::n_to_n(idx + 1);
                push_row(idx + 1, started, params, &spec)?;
            }
        }
        Construction::OneToN => {
            let stages = train_iterative(
                train_set.points(),
                cfg.model.layers,
                1,
                &cfg_first,
                &cfg_rest,
            )?;
            let params = &stages[0];
            for n in 2..=cfg.model.n_max {
                let started = Instant::now();
                let spec = EqkSpec::one_to_n(n, cfg.kernel.entangler)?;
                push_row(n, started, params, &spec)?;
            }
        }
    }
    Ok(rows)
}

/// Run the noise sweep: for each layer count, train the single-qubit model
/// once (training is noiseless, so it is shared across noise strengths),
/// then evaluate the noisy QNN and the noisy 1-to-2 kernel pipeline on
/// every tau of the grid.
pub fn run_noise_sweep(cfg: &ExperimentConfig) -> Result<(Vec<ResultRow>, Vec<SweepRecord>)> {
    if !cfg.noise.enabled {
        return Err(Error::Precondition(
            "noise sweep requires noise.enabled = true".into(),
        ));
    }
    let (train_set, test_set) = prepare_data(cfg)?;
    let train_xs = train_set.features();
    let test_xs = test_set.features();
    let train_labels = train_set.labels();
    let test_labels = test_set.labels();

    let mut rows = Vec::new();
    let mut records = Vec::new();

    for &layers in &cfg.noise_layer_grid() {
        let cfg_first = first_stage_train_config(cfg);
        let stages = train_iterative(train_set.points(), layers, 1, &cfg_first, &cfg_first)?;
        let params = &stages[0];
        let spec = EqkSpec::one_to_n(2, cfg.kernel.entangler)?;

        for &tau in &cfg.noise.taus {
            let started = Instant::now();
            let noise = tau_noise(tau)?;

            let noisy_accuracy = |points: &[[f64; 2]], labels: &[i8]| -> Result<f64> {
                let mut hits = 0usize;
                for (&x, &y) in points.iter().zip(labels) {
                    let p = noisy_qnn_prob(params, x, &noise)?;
                    if label_from_prob(p) == y {
                        hits += 1;
                    }
                }
                Ok(hits as f64 / labels.len() as f64)
            };
            let acc_qnn_train = noisy_accuracy(&train_xs, &train_labels)?;
            let acc_qnn_test = noisy_accuracy(&test_xs, &test_labels)?;

            let gram = noisy_gram_matrix(&spec, params, &train_xs, &noise)?;
            let test_rows = noisy_cross_kernel(&spec, params, &test_xs, &train_xs, &noise)?;
            let (acc_eqk_train, acc_eqk_test, _) = eqk_accuracies(
                &gram,
                &test_rows,
                &train_labels,
                &test_labels,
                cfg.kernel.svm_c,
                cfg.kernel.svm_tol,
            )?;

            let improvement = relative_improvement(acc_eqk_test, acc_qnn_test)?;
            records.push(SweepRecord {
                dataset: cfg.dataset.name.to_string(),
                layers,
                tau,
                acc_qnn: acc_qnn_test,
                acc_eqk: acc_eqk_test,
                relative_improvement: improvement,
                seed: cfg.dataset.seed,
            });
            rows.push(ResultRow {
                dataset: cfg.dataset.name.to_string(),
                construction: cfg.kernel.construction.to_string(),
                entangler: entangler_name(cfg.kernel.entangler).to_string(),
                n: 2,
                layers,
                tau,
                acc_qnn_train,
                acc_qnn_test,
                acc_eqk_train,
                acc_eqk_test,
                seed: cfg.dataset.seed,
                wall_time_seconds: started.elapsed().as_secs_f64(),
            });
        }
    }
    Ok((rows, records))
}

/// Append rows to a CSV file, writing the header only when the file does not
/// already start with it.
pub fn emit_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let origin = path.display().to_string();
    let needs_header = match std::fs::File::open(path) {
        Ok(file) => {
            let mut first = String::new();
            let mut reader = std::io::BufReader::new(file);
            reader
                .read_line(&mut first)
                .map_err(|e| Error::io(&*origin, e))?;
            if first.is_empty() {
                true
            } else if first.trim_end() == RESULT_HEADER {
                false
            } else {
                return Err(Error::parse(
                    &*origin,
                    "existing file does not start with the result header",
                ));
            }
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => true,
        Err(e) => return Err(Error::io(&*origin, e)),
    };

    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(&*origin, e))?;
    let mut w = std::io::BufWriter::new(file);
    if needs_header {
        writeln!(w, "{RESULT_HEADER}").map_err(|e| Error::io(&*origin, e))?;
    }
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.dataset,
            r.construction,
            r.entangler,
            r.n,
            r.layers,
            r.tau,
            r.acc_qnn_train,
            r.acc_qnn_test,
            r.acc_eqk_train,
            r.acc_eqk_test,
            r.seed,
            r.wall_time_seconds
        )
        .map_err(|e| Error::io(&*origin, e))?;
    }
    Ok(())
}

/// Parse a CSV produced by [`emit_results`].
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let origin = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&*origin, e))?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(&*origin, e))?
        .ok_or_else(|| Error::parse(&*origin, "empty file"))?;
    if header.trim_end() != RESULT_HEADER {
        return Err(Error::parse(&*origin, "unexpected header"));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(&*origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::parse(
                &*origin,
                format!("row {}: expected 12 fields, got {}", idx + 2, fields.len()),
            ));
        }
        let p_usize = |i: usize| -> Result<usize> {
            fields[i]
                .parse()
                .map_err(|e| Error::parse(&*origin, format!("row {}: {e}", idx + 2)))
        };
        let p_f64 = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|e| Error::parse(&*origin, format!("row {}: {e}", idx + 2)))
        };
        rows.push(ResultRow {
            dataset: fields[0].to_string(),
            construction: fields[1].to_string(),
            entangler: fields[2].to_string(),
            n: p_usize(3)?,
            layers: p_usize(4)?,
            tau: p_f64(5)?,
            acc_qnn_train: p_f64(6)?,
            acc_qnn_test: p_f64(7)?,
            acc_eqk_train: p_f64(8)?,
            acc_eqk_test: p_f64(9)?,
            seed: fields[10]
                .parse()
                .map_err(|e| Error::parse(&*origin, format!("row {}: {e}", idx + 2)))?,
            wall_time_seconds: p_f64(11)?,
        });
    }
    Ok(rows)
}
