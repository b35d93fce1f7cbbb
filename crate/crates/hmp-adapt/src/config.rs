//! JSON documents: experiment configs and trained models.

use std::fs;
use std::path::Path;

use hmp_core::experiment::{Condition, ExperimentConfig, RecordingChoice};
use hmp_core::metrics::ALL_HORIZONS_MS;
use hmp_core::predictor::{Optimizer, Params, PredictorModel, TrainConfig};
use hmp_core::rng::derive_seed;
use hmp_core::synth::{CorpusSpec, EstimationNoise, FamilyParams};
use serde::{Deserialize, Serialize};

use crate::FormatError;

type Result<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerFile {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl From<Optimizer> for OptimizerFile {
    fn from(o: Optimizer) -> Self {
        match o {
            Optimizer::Sgd => OptimizerFile::Sgd,
            Optimizer::Adam { beta1, beta2, epsilon } => OptimizerFile::Adam { beta1, beta2, epsilon },
        }
    }
}

impl From<OptimizerFile> for Optimizer {
    fn from(o: OptimizerFile) -> Self {
        match o {
            OptimizerFile::Sgd => Optimizer::Sgd,
            OptimizerFile::Adam { beta1, beta2, epsilon } => Optimizer::Adam { beta1, beta2, epsilon },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub optimizer: OptimizerFile,
    pub learning_rate: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub observed: usize,
    pub predicted: usize,
    pub coefficients: usize,
    pub validate_every: usize,
}

impl From<&TrainConfig> for TrainFile {
    fn from(c: &TrainConfig) -> Self {
        Self {
            optimizer: c.optimizer.into(),
            learning_rate: c.learning_rate,
            iterations: c.iterations,
            batch_size: c.batch_size,
            seed: c.seed,
            observed: c.observed,
            predicted: c.predicted,
            coefficients: c.coefficients,
            validate_every: c.validate_every,
        }
    }
}

impl From<&TrainFile> for TrainConfig {
    fn from(f: &TrainFile) -> Self {
        Self {
            optimizer: f.optimizer.into(),
            learning_rate: f.learning_rate,
            iterations: f.iterations,
            batch_size: f.batch_size,
            seed: f.seed,
            observed: f.observed,
            predicted: f.predicted,
            coefficients: f.coefficients,
            validate_every: f.validate_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseFile {
    pub scale_jitter_sigma: f64,
    pub joint_noise_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseFile {
    fn default() -> Self {
        Self {
            scale_jitter_sigma: 0.05,
            joint_noise_sigma: 5.0,
            seed: 7,
        }
    }
}

impl From<&NoiseFile> for EstimationNoise {
    fn from(n: &NoiseFile) -> Self {
        Self {
            scale_jitter_sigma: n.scale_jitter_sigma,
            joint_noise_sigma: n.joint_noise_sigma,
            seed: n.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyFile {
    pub min_frequency_hz: f64,
    pub max_frequency_hz: f64,
    pub max_amplitude_ratio: f64,
    pub active_fraction: f64,
    pub max_harmonic: f64,
    pub slow_amplitude_ratio: f64,
    pub slow_min_frequency_hz: f64,
    pub slow_max_frequency_hz: f64,
}

impl Default for FamilyFile {
    fn default() -> Self {
        let p = FamilyParams::default();
        Self {
            min_frequency_hz: p.min_frequency_hz,
            max_frequency_hz: p.max_frequency_hz,
            max_amplitude_ratio: p.max_amplitude_ratio,
            active_fraction: p.active_fraction,
            max_harmonic: p.max_harmonic,
            slow_amplitude_ratio: p.slow_amplitude_ratio,
            slow_min_frequency_hz: p.slow_min_frequency_hz,
            slow_max_frequency_hz: p.slow_max_frequency_hz,
        }
    }
}

impl From<&FamilyFile> for FamilyParams {
    fn from(f: &FamilyFile) -> Self {
        Self {
            min_frequency_hz: f.min_frequency_hz,
            max_frequency_hz: f.max_frequency_hz,
            max_amplitude_ratio: f.max_amplitude_ratio,
            active_fraction: f.active_fraction,
            max_harmonic: f.max_harmonic,
            slow_amplitude_ratio: f.slow_amplitude_ratio,
            slow_min_frequency_hz: f.slow_min_frequency_hz,
            slow_max_frequency_hz: f.slow_max_frequency_hz,
        }
    }
}

/// Synthetic corpus parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusFile {
    pub families: usize,
    /// `[subject id, body-size multiplier]` pairs.
    pub subjects: Vec<(u32, f64)>,
    pub recordings: u32,
    pub frames: usize,
    pub views: u32,
    pub seed: u64,
    pub family_params: FamilyFile,
}

impl Default for CorpusFile {
    fn default() -> Self {
        let spec = CorpusSpec::default();
        Self {
            families: spec.families,
            subjects: spec.subjects,
            recordings: spec.recordings,
            frames: spec.frames,
            views: spec.views,
            seed: spec.seed,
            family_params: FamilyFile::default(),
        }
    }
}

impl From<&CorpusFile> for CorpusSpec {
    fn from(c: &CorpusFile) -> Self {
        Self {
            families: c.families,
            subjects: c.subjects.clone(),
            recordings: c.recordings,
            frames: c.frames,
            views: c.views,
            family_params: (&c.family_params).into(),
            seed: c.seed,
        }
    }
}

fn condition_name(c: Condition) -> String {
    c.as_str().to_string()
}

fn recording_name(r: RecordingChoice) -> &'static str {
    match r {
        RecordingChoice::A => "A",
        RecordingChoice::B => "B",
        RecordingChoice::BothAveraged => "both-averaged",
    }
}

/// The experiment document read by `--config`. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentFile {
    /// Defaults to the synthetic family names `action00, action01, ...`.
    pub actions: Option<Vec<String>>,
    /// Used by `train` and `eval`; `matrix` sweeps every action.
    pub held_out_action: Option<String>,
    pub train_subjects: Vec<u32>,
    pub val_subject: u32,
    pub test_subject: u32,
    pub condition: String,
    pub recording_choice: String,
    pub noise: NoiseFile,
    pub short_term: TrainFile,
    pub long_term: TrainFile,
    pub horizons_ms: Vec<u32>,
    pub window_stride: usize,
    pub eval_stride: usize,
    pub corpus: CorpusFile,
    /// Preprocessing applied to motions read from disk: `none`, `t` or `tr`.
    pub normalize: String,
}

impl Default for ExperimentFile {
    fn default() -> Self {
        let base = ExperimentConfig::new(Vec::new(), String::new());
        Self {
            actions: None,
            held_out_action: None,
            train_subjects: base.train_subjects,
            val_subject: base.val_subject,
            test_subject: base.test_subject,
            condition: condition_name(base.condition),
            recording_choice: recording_name(base.recording_choice).to_string(),
            noise: NoiseFile::default(),
            short_term: (&base.short_term).into(),
            long_term: (&base.long_term).into(),
            horizons_ms: ALL_HORIZONS_MS.to_vec(),
            window_stride: base.window_stride,
            eval_stride: base.eval_stride,
            corpus: CorpusFile::default(),
            normalize: "t".to_string(),
        }
    }
}

impl ExperimentFile {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Derives every seed (corpus, noise, both trainers) from one value.
    pub fn reseed(&mut self, seed: u64) {
        self.corpus.seed = seed;
        self.noise.seed = derive_seed(seed, 0x4015E);
        self.short_term.seed = derive_seed(seed, 0x5407);
        self.long_term.seed = derive_seed(seed, 0x1046);
    }

    pub fn action_names(&self) -> Vec<String> {
        self.actions.clone().unwrap_or_else(|| {
            (0..self.corpus.families).map(|i| format!("action{i:02}")).collect()
        })
    }

    /// Core config for one held-out action.
    pub fn experiment(&self, held_out_action: &str) -> Result<ExperimentConfig> {
        let config = ExperimentConfig {
            actions: self.action_names(),
            held_out_action: held_out_action.to_string(),
            train_subjects: self.train_subjects.clone(),
            val_subject: self.val_subject,
            test_subject: self.test_subject,
            condition: self.condition.parse()?,
            recording_choice: self.recording_choice.parse()?,
            short_term: (&self.short_term).into(),
            long_term: (&self.long_term).into(),
            horizons_ms: self.horizons_ms.clone(),
            window_stride: self.window_stride,
            eval_stride: self.eval_stride,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn noise(&self) -> EstimationNoise {
        (&self.noise).into()
    }

    pub fn corpus_spec(&self) -> CorpusSpec {
        (&self.corpus).into()
    }
}

/// Model document: dimensions, flattened parameters, seed and the training
/// config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub observed: usize,
    pub predicted: usize,
    pub coefficients: usize,
    pub joints: usize,
    pub seed: u64,
    /// `C x C`, row-major.
    pub coef_mix: Vec<f64>,
    /// `J x J`, row-major.
    pub joint_mix: Vec<f64>,
    /// `3 x C x J`.
    pub bias: Vec<f64>,
    pub config: Option<TrainFile>,
}

impl ModelFile {
    pub fn new(model: &PredictorModel, config: Option<&TrainConfig>) -> Self {
        Self {
            observed: model.observed(),
            predicted: model.predicted(),
            coefficients: model.coefficients(),
            joints: model.joints(),
            seed: model.seed,
            coef_mix: model.params.coef_mix.clone(),
            joint_mix: model.params.joint_mix.clone(),
            bias: model.params.bias.clone(),
            config: config.map(TrainFile::from),
        }
    }

    pub fn model(&self) -> Result<PredictorModel> {
        let params = Params {
            coef_mix: self.coef_mix.clone(),
            joint_mix: self.joint_mix.clone(),
            bias: self.bias.clone(),
        };
        Ok(PredictorModel::from_params(
            self.observed,
            self.predicted,
            self.coefficients,
            self.joints,
            params,
            self.seed,
        )?)
    }
}

pub fn model_to_json(model: &PredictorModel, config: Option<&TrainConfig>) -> String {
    serde_json::to_string(&ModelFile::new(model, config)).expect("model serializes")
}

pub fn parse_model(text: &str) -> Result<(PredictorModel, Option<TrainConfig>)> {
    let file: ModelFile = serde_json::from_str(text)?;
    Ok((file.model()?, file.config.as_ref().map(TrainConfig::from)))
}

pub fn write_model(model: &PredictorModel, config: Option<&TrainConfig>, path: &Path) -> Result<()> {
    Ok(fs::write(path, model_to_json(model, config) + "\n")?)
}

pub fn read_model(path: &Path) -> Result<(PredictorModel, Option<TrainConfig>)> {
    parse_model(&fs::read_to_string(path)?)
}

/// One trained model of a leave-one-out cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleEntry {
    pub long_term: bool,
    pub adapt_recording: u32,
    pub model: ModelFile,
}

/// Every model trained for one (action, condition) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBundle {
    pub action: String,
    pub condition: String,
    pub models: Vec<BundleEntry>,
}

impl ModelBundle {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, serde_json::to_string(self)? + "\n")?)
    }
}
