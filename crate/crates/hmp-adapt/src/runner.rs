//! Corpus loading, leave-one-action-out sweeps and their output files.

use std::fs;
use std::path::{Path, PathBuf};

use hmp_core::experiment::{
    evaluate_model, run_condition, Condition, ConditionResult, Corpus, ResultsTable,
};
use hmp_core::motion::{remove_global, GlobalMode};
use hmp_core::synth::{build_corpus, humanoid_rest_directions};
use hmp_core::{Motion, Skeleton};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BundleEntry, ExperimentFile, ModelBundle, ModelFile};
use crate::formats::read_motion_dir;
use crate::report::{bar_chart_svg, results_csv};
use crate::FormatError;

type Result<T> = std::result::Result<T, FormatError>;

/// Version string in `git describe` style, fixed at build time.
pub const VERSION: &str = env!("HMP_ADAPT_VERSION");

/// Parses `none`, `t` (translation) or `tr` (translation and rotation).
pub fn global_mode(name: &str, skeleton: &Skeleton) -> Result<Option<GlobalMode>> {
    match name {
        "none" | "" => Ok(None),
        "t" => Ok(Some(GlobalMode::Translation)),
        "tr" => GlobalMode::rotation_for(skeleton)
            .map(Some)
            .ok_or(FormatError::InvalidArgument("rotation mode needs joints named l_hip and r_hip".into())),
        other => Err(FormatError::InvalidArgument(format!("unknown normalization '{other}'"))),
    }
}

/// The synthetic corpus described by `config`, or every motion CSV in
/// `data` normalized per `config.normalize`.
pub fn load_corpus(config: &ExperimentFile, skeleton: &Skeleton, data: Option<&Path>) -> Result<Corpus> {
    let motions = match data {
        None => build_corpus(
            &config.corpus_spec(),
            skeleton,
            &humanoid_rest_directions(),
            &config.noise(),
            &[config.test_subject],
        )?,
        Some(dir) => {
            let mode = global_mode(&config.normalize, skeleton)?;
            read_motion_dir(dir, skeleton)?
                .into_iter()
                .map(|m| match mode {
                    Some(mode) => remove_global(&m, skeleton, mode),
                    None => Ok(m),
                })
                .collect::<hmp_core::Result<Vec<Motion>>>()?
        }
    };
    Ok(Corpus::new(motions))
}

pub struct Matrix {
    pub actions: Vec<String>,
    pub results: Vec<ConditionResult>,
    pub table: ResultsTable,
}

/// Runs every (action, condition) cell. Cells are independent and run in
/// parallel; results keep the action-major, condition-minor order.
pub fn run_matrix(
    config: &ExperimentFile,
    corpus: &Corpus,
    skeleton: &Skeleton,
    conditions: &[Condition],
) -> Result<Matrix> {
    let actions = config.action_names();
    let mut cells = Vec::new();
    for action in &actions {
        for &condition in conditions {
            let mut cfg = config.experiment(action)?;
            cfg.condition = condition;
            cells.push(cfg);
        }
    }
    let results = cells
        .par_iter()
        .map(|cfg| run_condition(cfg, corpus, skeleton))
        .collect::<hmp_core::Result<Vec<_>>>()?;
    let table = ResultsTable::from_results(&actions, &results);
    Ok(Matrix {
        actions,
        results,
        table,
    })
}

pub fn bundle(result: &ConditionResult, config: &ExperimentFile) -> ModelBundle {
    let models = result
        .models
        .iter()
        .map(|m| {
            let train = if m.long_term { &config.long_term } else { &config.short_term };
            BundleEntry {
                long_term: m.long_term,
                adapt_recording: m.adapt_recording,
                model: ModelFile::new(&m.model, Some(&train.into())),
            }
        })
        .collect();
    ModelBundle {
        action: result.action.clone(),
        condition: result.condition.to_string(),
        models,
    }
}

/// Re-evaluates a saved bundle on the test subject's evaluation recordings,
/// averaging over the bundle's recording assignments like the sweep does.
pub fn evaluate_bundle(
    bundle: &ModelBundle,
    config: &ExperimentFile,
    corpus: &Corpus,
    skeleton: &Skeleton,
) -> Result<Vec<(u32, f64)>> {
    let cfg = config.experiment(&bundle.action)?;
    let fps = corpus.motions.first().map(Motion::fps).ok_or(hmp_core::Error::EmptyDataset)?;
    let (short_h, long_h) = cfg.horizon_split(fps)?;
    let assignments = cfg.recording_choice.assignments();
    let mut sums: Vec<(u32, f64)> = cfg.horizons_ms.iter().map(|&ms| (ms, 0.0)).collect();
    for (long_term, horizons) in [(false, &short_h), (true, &long_h)] {
        if horizons.is_empty() {
            continue;
        }
        for &(adapt, eval) in assignments {
            let entry = bundle
                .models
                .iter()
                .find(|e| e.long_term == long_term && (bundle.condition == "baseline" || e.adapt_recording == adapt))
                .ok_or_else(|| FormatError::InvalidArgument(format!("bundle lacks a model for recording {adapt}")))?;
            let model = entry.model.model()?;
            let motions: Vec<&Motion> = corpus.clean(&bundle.action, cfg.test_subject, Some(eval)).collect();
            for (ms, e) in evaluate_model(&model, &motions, skeleton, horizons, cfg.eval_stride)? {
                if let Some(slot) = sums.iter_mut().find(|(h, _)| *h == ms) {
                    slot.1 += e / assignments.len() as f64;
                }
            }
        }
    }
    Ok(sums)
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    command: &'a [String],
    config: &'a ExperimentFile,
    outputs: Vec<String>,
}

/// Chart horizon: 400 ms when present, else the longest horizon.
pub fn chart_horizon(horizons: &[u32]) -> u32 {
    if horizons.contains(&400) {
        400
    } else {
        horizons.iter().copied().max().unwrap_or(400)
    }
}

/// Writes `results.csv`, `results.svg`, one model bundle per cell and
/// `manifest.json` into `out`.
pub fn write_matrix_outputs(
    out: &Path,
    matrix: &Matrix,
    config: &ExperimentFile,
    command: &[String],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let csv = out.join("results.csv");
    fs::write(&csv, results_csv(&matrix.table))?;
    written.push(csv);
    let svg = out.join("results.svg");
    fs::write(&svg, bar_chart_svg(&matrix.table, chart_horizon(&config.horizons_ms)))?;
    written.push(svg);
    for r in &matrix.results {
        let path = out.join(format!("model_{}_{}.json", r.action, r.condition));
        bundle(r, config).write(&path)?;
        written.push(path);
    }
    let manifest = out.join("manifest.json");
    written.push(manifest.clone());
    write_manifest(&manifest, config, command, &written)?;
    Ok(written)
}

pub fn write_manifest(path: &Path, config: &ExperimentFile, command: &[String], outputs: &[PathBuf]) -> Result<()> {
    let m = Manifest {
        version: VERSION,
        command,
        config,
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
    };
    Ok(fs::write(path, serde_json::to_string_pretty(&m)? + "\n")?)
}
