use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eqk::data::{load_csv, save_csv};
use eqk::kernel::{gram_matrix, EqkSpec, KernelMatrix};
use eqk::noise::write_sweep_csv;
use eqk::params_io::{load_params, save_params};
use eqk::qnn::train_iterative;
use eqk::svm::svm_train;

use eqk_cli::config::{Construction, ExperimentConfig};
use eqk_cli::experiment::{
    emit_results, first_stage_train_config, later_stage_train_config, prepare_data,
    run_experiment, run_noise_sweep,
};

/// Pipeline runner: generate data, train re-uploading classifiers, build
/// embedding kernels, fit SVMs, and sweep noise strengths. Stages compose
/// through plain-text file artifacts.
#[derive(Parser)]
#[command(name = "eqk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker thread count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print progress to stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured dataset and write train/test CSV files.
    GenData {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for train.csv and test.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the QNN on a data CSV and write per-stage parameter files.
    TrainQnn {
        #[arg(long)]
        config: PathBuf,
        /// Training-set CSV (as written by gen-data).
        #[arg(long)]
        data: PathBuf,
        /// Output directory for qnn_n<k>.txt files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the Gram matrix of a trained model over a data CSV.
    BuildKernel {
        #[arg(long)]
        config: PathBuf,
        /// Trained parameter file (as written by train-qnn).
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output Gram matrix file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an SVM on a Gram matrix and the labels of a data CSV.
    FitSvm {
        #[arg(long)]
        config: PathBuf,
        /// Gram matrix file (as written by build-kernel).
        #[arg(long)]
        gram: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline for every qubit count and emit a result CSV.
    RunExperiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the noisy 1-to-2 study over the configured (L, tau) grid.
    NoiseSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl From<eqk::Error> for CliError {
    fn from(e: eqk::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<eqk_cli::config::ConfigError> for CliError {
    fn from(e: eqk_cli::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    Ok(ExperimentConfig::parse(&text)?)
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let verbose = cli.verbose;
    let log = |msg: &str| {
        if verbose {
            eprintln!("[eqk] {msg}");
        }
    };

    match &cli.command {
        Command::GenData { config, out } => {
            let cfg = load_config(config)?;
            let (train, test) = prepare_data(&cfg)?;
            ensure_dir(out)?;
            save_csv(train.points(), &out.join("train.csv"))?;
            save_csv(test.points(), &out.join("test.csv"))?;
            log(&format!(
                "wrote {} train and {} test points to {}",
                train.len(),
                test.len(),
                out.display()
            ));
        }
        Command::TrainQnn { config, data, out } => {
            let cfg = load_config(config)?;
            let points = load_csv(data)?;
            let n_target = match cfg.kernel.construction {
                Construction::NToN => cfg.model.n_max,
                Construction::OneToN => 1,
            };
            let stages = train_iterative(
                &points,
                cfg.model.layers,
                n_target,
                &first_stage_train_config(&cfg),
                &later_stage_train_config(&cfg),
            )?;
            ensure_dir(out)?;
            for (idx, stage) in stages.iter().enumerate() {
                let path = out.join(format!("qnn_n{}.txt", idx + 1));
                save_params(stage, &path)?;
                log(&format!("wrote {}", path.display()));
            }
        }
        Command::BuildKernel {
            config,
            params,
            data,
            out,
        } => {
            let cfg = load_config(config)?;
            let model = load_params(params)?;
            let points = load_csv(data)?;
            let xs: Vec<[f64; 2]> = points.iter().map(|p| p.x).collect();
            let spec = match cfg.kernel.construction {
                Construction::NToN => EqkSpec::n_to_n(model.n_qubits()),
                Construction::OneToN => EqkSpec::one_to_n(cfg.model.n_max, cfg.kernel.entangler)?,
            };
            let gram = gram_matrix(&spec, &model, &xs)?;
            gram.save(out)?;
            log(&format!("wrote {}x{} gram to {}", gram.size(), gram.size(), out.display()));
        }
        Command::FitSvm {
            config,
            gram,
            data,
            out,
        } => {
            let cfg = load_config(config)?;
            let k = KernelMatrix::load(gram)?;
            let labels: Vec<i8> = load_csv(data)?.iter().map(|p| p.y).collect();
            let model = svm_train(&k, &labels, cfg.kernel.svm_c, cfg.kernel.svm_tol)?;
            for w in model.warnings() {
                eprintln!("[eqk] warning: {w}");
            }
            model.save(out)?;
            log(&format!(
                "wrote model with {} support vectors to {}",
                model.support_indices().len(),
                out.display()
            ));
        }
        Command::RunExperiment { config, out } => {
            let cfg = load_config(config)?;
            let rows = run_experiment(&cfg)?;
            emit_results(&rows, out)?;
            log(&format!("wrote {} rows to {}", rows.len(), out.display()));
        }
        Command::NoiseSweep { config, out } => {
            let cfg = load_config(config)?;
            if !cfg.noise.enabled {
                return Err(CliError::Config(
                    "config field noise.enabled: noise-sweep needs noise.enabled = true".into(),
                ));
            }
            let (_, records) = run_noise_sweep(&cfg)?;
            let file = std::fs::File::create(out)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out.display())))?;
            write_sweep_csv(&records, std::io::BufWriter::new(file))
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", out.display())))?;
            log(&format!("wrote {} sweep cells to {}", records.len(), out.display()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
