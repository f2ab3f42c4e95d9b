//! Flat key-value experiment configuration.
//!
//! One config file describes one experiment. Lines are `section.key = value`;
//! `#` starts a comment. Every key has a default mirroring the reference
//! hyperparameters (L=7, batch 24, lr 0.05 for 30 epochs on the first stage,
//! lr 0.005 for 10 epochs afterwards, 500/500 split), so a config only needs
//! the keys it overrides. Unknown keys are rejected.

use std::fmt;
use std::str::FromStr;

use eqk::data::DatasetName;
use eqk::noise::default_tau_grid;
use eqk::simulator::EntanglerKind;

/// Configuration problems carry the offending field name.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field {}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Which kernel construction an experiment uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    NToN,
    OneToN,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::NToN => "n_to_n",
            Construction::OneToN => "one_to_n",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSection {
    pub name: DatasetName,
    pub total_points: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSection {
    pub layers: usize,
    pub n_max: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSection {
    pub lr_first: f64,
    pub epochs_first: usize,
    pub lr_rest: f64,
    pub epochs_rest: usize,
    pub batch_size: usize,
    pub init_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelSection {
    pub construction: Construction,
    pub entangler: EntanglerKind,
    pub svm_c: f64,
    pub svm_tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSection {
    pub enabled: bool,
    pub taus: Vec<f64>,
    /// Layer counts of the sweep grid; empty means "use model.layers".
    pub layers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub kernel: KernelSection,
    pub noise: NoiseSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSection {
                name: DatasetName::Corners,
                total_points: 1000,
                seed: 1,
                n_train: 500,
                n_test: 500,
            },
            model: ModelSection { layers: 7, n_max: 8 },
            train: TrainSection {
                lr_first: 0.05,
                epochs_first: 30,
                lr_rest: 0.005,
                epochs_rest: 10,
                batch_size: 24,
                init_seed: 1,
            },
            kernel: KernelSection {
                construction: Construction::NToN,
                entangler: EntanglerKind::CnotCascade,
                svm_c: 1.0,
                svm_tol: 1e-5,
            },
            noise: NoiseSection {
                enabled: false,
                taus: default_tau_grid(),
                layers: Vec::new(),
            },
        }
    }
}

impl ExperimentConfig {
    /// Parse the key-value text, starting from the defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                err(
                    &format!("line {}", lineno + 1),
                    format!("expected 'key = value', got {raw:?}"),
                )
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: FromStr>(field: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| err(field, format!("cannot parse {value:?}: {e}")))
        }

        fn parse_list<T: FromStr>(field: &str, value: &str) -> Result<Vec<T>, ConfigError>
        where
            T::Err: fmt::Display,
        {
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse(field, s))
                .collect()
        }

        match key {
            "dataset.name" => {
                self.dataset.name = value
                    .parse()
                    .map_err(|e| err(key, format!("{e}")))?;
            }
            "dataset.total_points" => self.dataset.total_points = parse(key, value)?,
            "dataset.seed" => self.dataset.seed = parse(key, value)?,
            "dataset.n_train" => self.dataset.n_train = parse(key, value)?,
            "dataset.n_test" => self.dataset.n_test = parse(key, value)?,
            "model.layers" => self.model.layers = parse(key, value)?,
            "model.n_max" => self.model.n_max = parse(key, value)?,
            "train.lr_first" => self.train.lr_first = parse(key, value)?,
            "train.epochs_first" => self.train.epochs_first = parse(key, value)?,
            "train.lr_rest" => self.train.lr_rest = parse(key, value)?,
            "train.epochs_rest" => self.train.epochs_rest = parse(key, value)?,
            "train.batch_size" => self.train.batch_size = parse(key, value)?,
            "train.init_seed" => self.train.init_seed = parse(key, value)?,
            "kernel.construction" => {
                self.kernel.construction = match value {
                    "n_to_n" => Construction::NToN,
                    "one_to_n" => Construction::OneToN,
                    other => {
                        return Err(err(key, format!("expected n_to_n|one_to_n, got {other:?}")))
                    }
                };
            }
            "kernel.entangler" => {
                self.kernel.entangler = match value {
                    "cnot" => EntanglerKind::CnotCascade,
                    "cz" => EntanglerKind::CzCascade,
                    other => return Err(err(key, format!("expected cnot|cz, got {other:?}"))),
                };
            }
            "kernel.svm_c" => self.kernel.svm_c = parse(key, value)?,
            "kernel.svm_tol" => self.kernel.svm_tol = parse(key, value)?,
            "noise.enabled" => self.noise.enabled = parse(key, value)?,
            "noise.taus" => self.noise.taus = parse_list(key, value)?,
            "noise.layers" => self.noise.layers = parse_list(key, value)?,
            other => return Err(err(other, "unknown configuration key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dataset.total_points == 0 {
            return Err(err("dataset.total_points", "must be >= 1"));
        }
        if self.dataset.n_train == 0 {
            return Err(err("dataset.n_train", "must be >= 1"));
        }
        if self.dataset.n_test == 0 {
            return Err(err("dataset.n_test", "must be >= 1"));
        }
        if self.dataset.n_train + self.dataset.n_test > self.dataset.total_points {
            return Err(err(
                "dataset.n_train",
                format!(
                    "n_train + n_test = {} exceeds total_points = {}",
                    self.dataset.n_train + self.dataset.n_test,
                    self.dataset.total_points
                ),
            ));
        }
        if self.model.layers == 0 {
            return Err(err("model.layers", "must be >= 1"));
        }
        if self.model.n_max == 0 {
            return Err(err("model.n_max", "must be >= 1"));
        }
        if self.model.n_max > self.model.layers + 1 {
            return Err(err(
                "model.n_max",
                format!(
                    "must be <= model.layers + 1 = {} (got {})",
                    self.model.layers + 1,
                    self.model.n_max
                ),
            ));
        }
        if !(self.train.lr_first > 0.0 && self.train.lr_first.is_finite()) {
            return Err(err("train.lr_first", "must be positive"));
        }
        if !(self.train.lr_rest > 0.0 && self.train.lr_rest.is_finite()) {
            return Err(err("train.lr_rest", "must be positive"));
        }
        if self.train.epochs_first == 0 {
            return Err(err("train.epochs_first", "must be >= 1"));
        }
        if self.train.epochs_rest == 0 {
            return Err(err("train.epochs_rest", "must be >= 1"));
        }
        if self.train.batch_size == 0 {
            return Err(err("train.batch_size", "must be >= 1"));
        }
        if self.train.batch_size > self.dataset.n_train {
            return Err(err(
                "train.batch_size",
                format!(
                    "must be <= dataset.n_train = {} (got {})",
                    self.dataset.n_train, self.train.batch_size
                ),
            ));
        }
        if !(self.kernel.svm_c > 0.0 && self.kernel.svm_c.is_finite()) {
            return Err(err("kernel.svm_c", "must be positive"));
        }
        if !(self.kernel.svm_tol > 0.0 && self.kernel.svm_tol.is_finite()) {
            return Err(err("kernel.svm_tol", "must be positive"));
        }
        if self.noise.taus.is_empty() {
            return Err(err("noise.taus", "must contain at least one value"));
        }
        if let Some(tau) = self
            .noise
            .taus
            .iter()
            .find(|t| !(0.0..=1.0).contains(*t) || !t.is_finite())
        {
            return Err(err("noise.taus", format!("value {tau} outside [0, 1]")));
        }
        if self.noise.layers.contains(&0) {
            return Err(err("noise.layers", "layer counts must be >= 1"));
        }
        if self.kernel.construction == Construction::OneToN && self.model.n_max < 2 {
            return Err(err(
                "model.n_max",
                "the 1-to-n construction needs n_max >= 2",
            ));
        }
        if self.noise.enabled {
            if self.kernel.construction != Construction::OneToN {
                return Err(err(
                    "kernel.construction",
                    "noise sweeps run the 1-to-2 architecture; set one_to_n",
                ));
            }
            if self.model.n_max != 2 {
                return Err(err(
                    "model.n_max",
                    format!("noise sweeps use exactly 2 qubits, got {}", self.model.n_max),
                ));
            }
        }
        Ok(())
    }

    /// The layer grid of a noise sweep.
    pub fn noise_layer_grid(&self) -> Vec<usize> {
        if self.noise.layers.is_empty() {
            vec![self.model.layers]
        } else {
            self.noise.layers.clone()
        }
    }
}
