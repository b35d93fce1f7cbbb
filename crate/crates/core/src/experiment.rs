//! Leave-one-action-out adaptation experiments on an in-memory corpus.
//!
//! One action is held out as the novel test motion. Its clean recordings
//! never enter training; the conditions differ only in what is added for
//! the test subject:
//!
//! - `Baseline`: nothing.
//! - `WithVideo`: scale-fitted estimated motions of the held-out action
//!   from the adaptation recording.
//! - `WithGt`: the clean counterpart of each of those estimated motions.
//!
//! The test subject performs each action twice. One recording feeds
//! adaptation, the other is used for evaluation, and `BothAveraged` runs
//! both assignments and averages the errors.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{horizon_frame, mpjpe_frame};
use crate::motion::{Motion, Source};
use crate::predictor::{self, zero_velocity, Dataset, PredictorModel, TrainConfig};
use crate::retarget::{measured_skeleton, scale_fit};
use crate::skeleton::Skeleton;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Baseline,
    WithVideo,
    WithGt,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Baseline, Condition::WithVideo, Condition::WithGt];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::WithVideo => "with_video",
            Condition::WithGt => "with_gt",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Condition::Baseline),
            "with_video" => Ok(Condition::WithVideo),
            "with_gt" => Ok(Condition::WithGt),
            _ => Err(Error::InvalidConfig("unknown condition")),
        }
    }
}

/// Which of the test subject's two recordings is used for adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordingChoice {
    /// Adapt on recording 0, evaluate on recording 1.
    A,
    /// Adapt on recording 1, evaluate on recording 0.
    B,
    /// Run both assignments and average.
    BothAveraged,
}

impl RecordingChoice {
    /// `(adaptation recording, evaluation recording)` pairs.
    pub fn assignments(self) -> &'static [(u32, u32)] {
        match self {
            RecordingChoice::A => &[(0, 1)],
            RecordingChoice::B => &[(1, 0)],
            RecordingChoice::BothAveraged => &[(0, 1), (1, 0)],
        }
    }
}

impl FromStr for RecordingChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(RecordingChoice::A),
            "B" | "b" => Ok(RecordingChoice::B),
            "both" | "both-averaged" | "both_averaged" => Ok(RecordingChoice::BothAveraged),
            _ => Err(Error::InvalidConfig("unknown recording choice")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub actions: Vec<String>,
    pub held_out_action: String,
    pub train_subjects: Vec<u32>,
    pub val_subject: u32,
    pub test_subject: u32,
    pub condition: Condition,
    pub recording_choice: RecordingChoice,
    /// Model for horizons within `short_term.predicted` frames.
    pub short_term: TrainConfig,
    /// Model for longer horizons.
    pub long_term: TrainConfig,
    pub horizons_ms: Vec<u32>,
    /// Stride between training windows.
    pub window_stride: usize,
    /// Stride between evaluation and validation windows.
    pub eval_stride: usize,
}

impl ExperimentConfig {
    /// Subject split 1, 6, 7, 8, 9 / 11 / 5 and every horizon.
    pub fn new(actions: Vec<String>, held_out_action: String) -> Self {
        Self {
            actions,
            held_out_action,
            train_subjects: alloc::vec![1, 6, 7, 8, 9],
            val_subject: 11,
            test_subject: 5,
            condition: Condition::Baseline,
            recording_choice: RecordingChoice::BothAveraged,
            short_term: TrainConfig::short_term(),
            long_term: TrainConfig::long_term(),
            horizons_ms: crate::metrics::ALL_HORIZONS_MS.to_vec(),
            window_stride: 1,
            eval_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.actions.contains(&self.held_out_action) {
            return Err(Error::InvalidConfig("held-out action is not one of the actions"));
        }
        if self.train_subjects.is_empty() {
            return Err(Error::InvalidConfig("no training subjects"));
        }
        let disjoint = !self.train_subjects.contains(&self.val_subject)
            && !self.train_subjects.contains(&self.test_subject)
            && self.val_subject != self.test_subject;
        if !disjoint {
            return Err(Error::InvalidConfig("subject sets must be disjoint"));
        }
        if self.horizons_ms.is_empty() {
            return Err(Error::InvalidConfig("no horizons"));
        }
        self.short_term.validate()?;
        self.long_term.validate()?;
        Ok(())
    }

    /// Splits the horizons into those served by the short-term model and
    /// the rest, keeping their order.
    pub fn horizon_split(&self, fps: u32) -> Result<(Vec<u32>, Vec<u32>)> {
        let mut short = Vec::new();
        let mut long = Vec::new();
        for &ms in &self.horizons_ms {
            let frame = horizon_frame(ms, fps)?;
            if frame <= self.short_term.predicted {
                short.push(ms);
            } else if frame <= self.long_term.predicted {
                long.push(ms);
            } else {
                return Err(Error::HorizonOutOfRange {
                    frame,
                    available: self.long_term.predicted,
                });
            }
        }
        Ok((short, long))
    }
}

/// Clean and estimated motions addressed by action, subject and recording.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub motions: Vec<Motion>,
}

fn is_clean(m: &Motion) -> bool {
    m.meta.source != Source::Estimated
}

impl Corpus {
    pub fn new(motions: Vec<Motion>) -> Self {
        Self { motions }
    }

    fn subject_label(subject: u32) -> String {
        subject.to_string()
    }

    pub fn clean(&self, action: &str, subject: u32, recording: Option<u32>) -> impl Iterator<Item = &Motion> + '_ {
        let action = action.to_string();
        let subject = Self::subject_label(subject);
        self.motions.iter().filter(move |m| {
            is_clean(m)
                && m.meta.action == action
                && m.meta.subject == subject
                && recording.map_or(true, |r| m.meta.recording == r)
        })
    }

    pub fn estimated(&self, action: &str, subject: u32, recording: u32) -> impl Iterator<Item = &Motion> + '_ {
        let action = action.to_string();
        let subject = Self::subject_label(subject);
        self.motions.iter().filter(move |m| {
            !is_clean(m)
                && m.meta.action == action
                && m.meta.subject == subject
                && m.meta.recording == recording
        })
    }

    fn has_subject(&self, subject: u32) -> bool {
        let label = Self::subject_label(subject);
        self.motions.iter().any(|m| m.meta.subject == label)
    }

    fn has_action(&self, action: &str) -> bool {
        self.motions.iter().any(|m| m.meta.action == action)
    }

    /// Errors unless every configured action and subject has data.
    pub fn check_complete(&self, config: &ExperimentConfig) -> Result<()> {
        for (i, a) in config.actions.iter().enumerate() {
            if !self.has_action(a) {
                return Err(Error::MissingAction(i as u32));
            }
        }
        let subjects = config
            .train_subjects
            .iter()
            .chain([&config.val_subject, &config.test_subject]);
        for &s in subjects {
            if !self.has_subject(s) {
                return Err(Error::MissingSubject(s));
            }
        }
        Ok(())
    }
}

/// Training windows plus the number of windows added for adaptation.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub dataset: Dataset,
    pub adaptation_windows: usize,
}

/// Windows for one condition and adaptation recording.
pub fn build_training_set(
    config: &ExperimentConfig,
    corpus: &Corpus,
    skeleton: &Skeleton,
    train: &TrainConfig,
    adapt_recording: u32,
) -> Result<TrainingSet> {
    config.validate()?;
    corpus.check_complete(config)?;
    let mut dataset = Dataset::new(train.window_len());
    for action in config.actions.iter().filter(|a| **a != config.held_out_action) {
        for &subject in &config.train_subjects {
            for m in corpus.clean(action, subject, None) {
                dataset.push_motion(m.clone(), config.window_stride);
            }
        }
    }
    let mut adaptation_windows = 0;
    if config.condition != Condition::Baseline {
        let estimated: Vec<&Motion> = corpus
            .estimated(&config.held_out_action, config.test_subject, adapt_recording)
            .collect();
        if estimated.is_empty() {
            return Err(Error::MissingSubject(config.test_subject));
        }
        let clean = corpus
            .clean(&config.held_out_action, config.test_subject, Some(adapt_recording))
            .next()
            .ok_or(Error::MissingSubject(config.test_subject))?;
        let target = subject_skeleton(config, corpus, skeleton)?;
        for est in estimated {
            let added = match config.condition {
                Condition::WithVideo => scale_fit(est, &target)?,
                _ => clean.clone(),
            };
            adaptation_windows += dataset.push_motion(added, config.window_stride);
        }
    }
    Ok(TrainingSet {
        dataset,
        adaptation_windows,
    })
}

/// The test subject's own skeleton, measured on their clean recording of
/// the first non-held-out action.
pub fn subject_skeleton(config: &ExperimentConfig, corpus: &Corpus, skeleton: &Skeleton) -> Result<Skeleton> {
    let reference = config
        .actions
        .iter()
        .filter(|a| **a != config.held_out_action)
        .find_map(|a| corpus.clean(a, config.test_subject, None).next())
        .ok_or(Error::MissingSubject(config.test_subject))?;
    measured_skeleton(reference, skeleton)
}

/// Clean motions of the validation subject for every non-held-out action.
pub fn build_validation_set(config: &ExperimentConfig, corpus: &Corpus, train: &TrainConfig) -> Dataset {
    let mut dataset = Dataset::new(train.window_len());
    for action in config.actions.iter().filter(|a| **a != config.held_out_action) {
        for m in corpus.clean(action, config.val_subject, None) {
            dataset.push_motion(m.clone(), config.eval_stride);
        }
    }
    dataset
}

/// Mean MPJPE at each horizon over every `stride`-spaced window of
/// `motions`, predicting with `predict` (observed frames in, predicted
/// frames out).
pub fn evaluate_windows<F>(
    motions: &[&Motion],
    skeleton: &Skeleton,
    observed: usize,
    predicted: usize,
    horizons_ms: &[u32],
    stride: usize,
    mut predict: F,
) -> Result<Vec<(u32, f64)>>
where
    F: FnMut(&[crate::Vec3]) -> Result<alloc::vec::Vec<crate::Vec3>>,
{
    let joints = skeleton.joint_count();
    let len = observed + predicted;
    let mut sums = alloc::vec![0.0; horizons_ms.len()];
    let mut count = 0usize;
    let mut frames = Vec::with_capacity(horizons_ms.len());
    for m in motions {
        m.check_bound(skeleton)?;
        frames.clear();
        for &ms in horizons_ms {
            let f = horizon_frame(ms, m.fps())?;
            if f > predicted {
                return Err(Error::HorizonOutOfRange {
                    frame: f,
                    available: predicted,
                });
            }
            frames.push(f);
        }
        if m.frame_count() < len {
            continue;
        }
        for start in (0..=m.frame_count() - len).step_by(stride.max(1)) {
            let window = &m.data()[start * joints..(start + len) * joints];
            let pred = predict(&window[..observed * joints])?;
            let gt = &window[observed * joints..];
            for (sum, &f) in sums.iter_mut().zip(&frames) {
                let at = (f - 1) * joints..f * joints;
                *sum += mpjpe_frame(&pred[at.clone()], &gt[at], skeleton.eval_subset())?;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(horizons_ms
        .iter()
        .zip(sums)
        .map(|(&ms, s)| (ms, s / count as f64))
        .collect())
}

/// Errors of one trained model per horizon.
pub fn evaluate_model(
    model: &PredictorModel,
    motions: &[&Motion],
    skeleton: &Skeleton,
    horizons_ms: &[u32],
    stride: usize,
) -> Result<Vec<(u32, f64)>> {
    evaluate_windows(
        motions,
        skeleton,
        model.observed(),
        model.predicted(),
        horizons_ms,
        stride,
        |obs| model.predict(obs),
    )
}

/// Errors of the zero-velocity predictor per horizon.
pub fn evaluate_zero_velocity(
    motions: &[&Motion],
    skeleton: &Skeleton,
    observed: usize,
    predicted: usize,
    horizons_ms: &[u32],
    stride: usize,
) -> Result<Vec<(u32, f64)>> {
    let joints = skeleton.joint_count();
    evaluate_windows(motions, skeleton, observed, predicted, horizons_ms, stride, |obs| {
        Ok(zero_velocity(obs, joints, predicted))
    })
}

/// A trained model with what it was trained for.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub adapt_recording: u32,
    pub long_term: bool,
    pub model: PredictorModel,
    pub losses: Vec<f64>,
    pub best_iteration: usize,
    pub training_windows: usize,
    pub adaptation_windows: usize,
}

#[derive(Debug, Clone)]
pub struct ConditionResult {
    pub action: String,
    pub condition: Condition,
    /// `(horizon ms, mean error mm)` averaged over recording assignments.
    pub errors: Vec<(u32, f64)>,
    pub models: Vec<TrainedModel>,
}

/// Trains and evaluates one (held-out action, condition) cell.
///
/// Each recording assignment trains fresh models, except that the baseline
/// training set does not depend on the assignment, so its model is trained
/// once and evaluated on each evaluation recording.
pub fn run_condition(config: &ExperimentConfig, corpus: &Corpus, skeleton: &Skeleton) -> Result<ConditionResult> {
    config.validate()?;
    corpus.check_complete(config)?;
    let fps = corpus
        .motions
        .first()
        .map(Motion::fps)
        .ok_or(Error::EmptyDataset)?;
    let (short_h, long_h) = config.horizon_split(fps)?;
    let assignments = config.recording_choice.assignments();
    let mut sums: Vec<(u32, f64)> = config.horizons_ms.iter().map(|&ms| (ms, 0.0)).collect();
    let mut models = Vec::new();

    for (long_term, horizons) in [(false, &short_h), (true, &long_h)] {
        if horizons.is_empty() {
            continue;
        }
        let train_cfg = if long_term { &config.long_term } else { &config.short_term };
        let validation = build_validation_set(config, corpus, train_cfg);
        let mut cached: Option<TrainedModel> = None;
        for &(adapt, eval) in assignments {
            let trained = match (&cached, config.condition) {
                (Some(t), Condition::Baseline) => t.clone(),
                _ => {
                    let set = build_training_set(config, corpus, skeleton, train_cfg, adapt)?;
                    let outcome = predictor::train(&set.dataset, train_cfg, Some(&validation))?;
                    TrainedModel {
                        adapt_recording: adapt,
                        long_term,
                        model: outcome.model,
                        losses: outcome.losses,
                        best_iteration: outcome.best_iteration,
                        training_windows: set.dataset.len(),
                        adaptation_windows: set.adaptation_windows,
                    }
                }
            };
            let eval_motions: Vec<&Motion> = corpus
                .clean(&config.held_out_action, config.test_subject, Some(eval))
                .collect();
            if eval_motions.is_empty() {
                return Err(Error::MissingSubject(config.test_subject));
            }
            let errs = evaluate_model(&trained.model, &eval_motions, skeleton, horizons, config.eval_stride)?;
            for (ms, e) in errs {
                if let Some(slot) = sums.iter_mut().find(|(h, _)| *h == ms) {
                    slot.1 += e / assignments.len() as f64;
                }
            }
            if config.condition == Condition::Baseline && cached.is_none() {
                cached = Some(trained.clone());
                models.push(trained);
            } else if config.condition != Condition::Baseline {
                models.push(trained);
            }
        }
    }
    Ok(ConditionResult {
        action: config.held_out_action.clone(),
        condition: config.condition,
        errors: sums,
        models,
    })
}

/// Label of the row holding per-horizon means over actions.
pub const AVERAGE_LABEL: &str = "Average";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub action: String,
    pub horizon_ms: u32,
    pub error_mm: f64,
    pub condition: Condition,
}

/// Per-(action, horizon, condition) errors with Average rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

impl ResultsTable {
    /// Builds the table from per-cell results and appends one Average row
    /// per (condition, horizon). Rows are ordered by action (in the order
    /// given), then condition, then horizon.
    pub fn from_results(actions: &[String], results: &[ConditionResult]) -> Self {
        let mut rows = Vec::new();
        let mut conditions: Vec<Condition> = results.iter().map(|r| r.condition).collect();
        conditions.sort();
        conditions.dedup();
        for action in actions {
            for &cond in &conditions {
                for r in results.iter().filter(|r| &r.action == action && r.condition == cond) {
                    for &(ms, e) in &r.errors {
                        rows.push(ResultRow {
                            action: action.clone(),
                            horizon_ms: ms,
                            error_mm: e,
                            condition: cond,
                        });
                    }
                }
            }
        }
        let mut table = Self { rows };
        table.append_average();
        table
    }

    fn append_average(&mut self) {
        let mut keys: Vec<(Condition, u32)> = self.rows.iter().map(|r| (r.condition, r.horizon_ms)).collect();
        keys.sort();
        keys.dedup();
        for (cond, ms) in keys {
            let vals: Vec<f64> = self
                .rows
                .iter()
                .filter(|r| r.condition == cond && r.horizon_ms == ms && r.action != AVERAGE_LABEL)
                .map(|r| r.error_mm)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            self.rows.push(ResultRow {
                action: AVERAGE_LABEL.to_string(),
                horizon_ms: ms,
                error_mm: mean,
                condition: cond,
            });
        }
    }

    pub fn get(&self, action: &str, condition: Condition, horizon_ms: u32) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.action == action && r.condition == condition && r.horizon_ms == horizon_ms)
            .map(|r| r.error_mm)
    }

    pub fn average(&self, condition: Condition, horizon_ms: u32) -> Option<f64> {
        self.get(AVERAGE_LABEL, condition, horizon_ms)
    }

    /// Mean of the Average row over several horizons.
    pub fn average_over(&self, condition: Condition, horizons_ms: &[u32]) -> Option<f64> {
        let mut total = 0.0;
        for &ms in horizons_ms {
            total += self.average(condition, ms)?;
        }
        Some(total / horizons_ms.len() as f64)
    }

    pub fn actions(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if r.action != AVERAGE_LABEL && !out.contains(&r.action) {
                out.push(r.action.clone());
            }
        }
        out
    }
}
