use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hmp_adapt::config::{ExperimentFile, ModelBundle};
use hmp_adapt::formats::{
    read_motion_unbound, read_regressor, read_skeleton, write_motion, write_skeleton,
};
use hmp_adapt::report::{bar_chart_svg, results_csv};
use hmp_adapt::runner::{
    bundle, chart_horizon, evaluate_bundle, global_mode, load_corpus, run_matrix, write_manifest,
    write_matrix_outputs, VERSION,
};
use hmp_core::experiment::{run_condition, Condition, ConditionResult, ResultsTable};
use hmp_core::motion::{downsample, remove_global};
use hmp_core::retarget::{regress_joints, scale_fit, MeshFrame};
use hmp_core::synth::build_corpus;
use hmp_core::synth::humanoid_rest_directions;
use hmp_core::{Motion, Skeleton};

#[derive(Parser)]
#[command(name = "hmp-adapt", version = VERSION, about = "Scale fitting and video-adapted motion prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic corpus as motion CSVs.
    Gen(GenArgs),
    /// Synthetic data tools.
    Synth {
        #[command(subcommand)]
        command: SynthCommand,
    },
    /// Regress (optionally), downsample, normalize and scale-fit one motion.
    Retarget(RetargetArgs),
    /// Train the models of one held-out action and condition.
    Train(CellArgs),
    /// Evaluate a saved model bundle.
    Eval(EvalArgs),
    /// Full leave-one-action-out sweep.
    Matrix(MatrixArgs),
    /// Write the default skeleton as JSON.
    Skeleton {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    Gen(GenArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment JSON; defaults apply to omitted fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Derives every seed from this value.
    #[arg(long)]
    seed: Option<u64>,
    /// Read motion CSVs from this directory instead of generating them.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Skeleton JSON (default: built-in 17-joint humanoid).
    #[arg(long)]
    skeleton: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long)]
    families: Option<usize>,
    /// Use the first N subjects of the configured list.
    #[arg(long)]
    subjects: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RetargetArgs {
    #[arg(long)]
    skeleton: Option<PathBuf>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Joint regressor CSV; the input then holds mesh vertices.
    #[arg(long)]
    regressor: Option<PathBuf>,
    /// Downsample to this frame rate first.
    #[arg(long)]
    fps: Option<u32>,
    /// Global normalization: none, t or tr.
    #[arg(long, default_value = "none")]
    normalize: String,
}

#[derive(Args)]
struct CellArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Held-out action (overrides the config).
    #[arg(long)]
    action: Option<String>,
    /// baseline, with_video or with_gt (overrides the config).
    #[arg(long)]
    condition: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Model bundle written by `train` or `matrix`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Comma-separated subset of baseline, with_video, with_gt.
    #[arg(long, default_value = "baseline,with_video,with_gt")]
    conditions: String,
    #[arg(long)]
    out: PathBuf,
}

struct Setup {
    config: ExperimentFile,
    skeleton: Skeleton,
}

fn setup(args: &ExperimentArgs) -> Result<Setup> {
    let mut config = match &args.config {
        Some(path) => ExperimentFile::read(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentFile::default(),
    };
    if let Some(seed) = args.seed {
        config.reseed(seed);
    }
    let skeleton = match &args.skeleton {
        Some(path) => read_skeleton(path).with_context(|| format!("reading {}", path.display()))?,
        None => Skeleton::humanoid(),
    };
    Ok(Setup { config, skeleton })
}

fn command_line() -> Vec<String> {
    std::env::args().collect()
}

fn gen(args: GenArgs) -> Result<()> {
    let Setup { mut config, skeleton } = setup(&args.experiment)?;
    if let Some(f) = args.families {
        config.corpus.families = f;
    }
    if let Some(n) = args.subjects {
        if n > config.corpus.subjects.len() {
            bail!("only {} subjects are configured", config.corpus.subjects.len());
        }
        config.corpus.subjects.truncate(n);
    }
    if let Some(n) = args.frames {
        config.corpus.frames = n;
    }
    let estimate: Vec<u32> = config
        .corpus
        .subjects
        .iter()
        .map(|s| s.0)
        .filter(|&s| s == config.test_subject)
        .collect();
    let motions = build_corpus(
        &config.corpus_spec(),
        &skeleton,
        &humanoid_rest_directions(),
        &config.noise(),
        &estimate,
    )?;
    fs::create_dir_all(&args.out)?;
    let mut written = Vec::new();
    let mut view = 0;
    for (i, m) in motions.iter().enumerate() {
        let same_recording = |o: &Motion| {
            o.meta.action == m.meta.action && o.meta.subject == m.meta.subject && o.meta.recording == m.meta.recording
        };
        view = if i > 0 && same_recording(&motions[i - 1]) { view + 1 } else { 0 };
        let name = format!(
            "{}_s{}_r{}_{}{}.csv",
            m.meta.action,
            m.meta.subject,
            m.meta.recording,
            m.meta.source,
            if m.meta.source == hmp_core::Source::Estimated { format!("_v{view}") } else { String::new() }
        );
        let path = args.out.join(name);
        write_motion(m, &path)?;
        written.push(path);
    }
    let skel = args.out.join("skeleton.json");
    write_skeleton(&skeleton, &skel)?;
    written.push(skel);
    let manifest = args.out.join("manifest.json");
    written.push(manifest.clone());
    write_manifest(&manifest, &config, &command_line(), &written)?;
    println!("wrote {} motions to {}", motions.len(), args.out.display());
    Ok(())
}

fn retarget(args: RetargetArgs) -> Result<()> {
    let skeleton = match &args.skeleton {
        Some(p) => read_skeleton(p)?,
        None => Skeleton::humanoid(),
    };
    let raw = read_motion_unbound(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let mut motion = match &args.regressor {
        Some(path) => {
            let reg = read_regressor(path)?;
            let mut frames = Vec::with_capacity(raw.frame_count());
            for f in raw.frames() {
                frames.push(regress_joints(&MeshFrame { vertices: f.to_vec() }, &reg)?.joints);
            }
            Motion::from_frames(frames, raw.fps(), raw.meta.clone())?
        }
        None => raw,
    };
    if let Some(fps) = args.fps {
        motion = downsample(&motion, fps)?;
    }
    if let Some(mode) = global_mode(&args.normalize, &skeleton)? {
        motion = remove_global(&motion, &skeleton, mode)?;
    }
    let fitted = scale_fit(&motion, &skeleton)?;
    write_motion(&fitted, &args.out)?;
    println!("fitted {} frames -> {}", fitted.frame_count(), args.out.display());
    Ok(())
}

fn print_errors(result: &ConditionResult) {
    for (ms, e) in &result.errors {
        println!("{} {} {ms} ms: {e:.3} mm", result.action, result.condition);
    }
}

fn train(args: CellArgs) -> Result<()> {
    let Setup { mut config, skeleton } = setup(&args.experiment)?;
    if let Some(c) = args.condition {
        config.condition = c;
    }
    let action = match args.action.or_else(|| config.held_out_action.clone()) {
        Some(a) => a,
        None => bail!("no held-out action: pass --action or set held_out_action"),
    };
    config.held_out_action = Some(action.clone());
    let corpus = load_corpus(&config, &skeleton, args.experiment.data.as_deref())?;
    let result = run_condition(&config.experiment(&action)?, &corpus, &skeleton)?;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join(format!("model_{}_{}.json", result.action, result.condition));
    bundle(&result, &config).write(&path)?;
    let manifest = args.out.join("manifest.json");
    write_manifest(&manifest, &config, &command_line(), &[path.clone(), manifest.clone()])?;
    print_errors(&result);
    println!("wrote {}", path.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let Setup { config, skeleton } = setup(&args.experiment)?;
    let bundle = ModelBundle::read(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let corpus = load_corpus(&config, &skeleton, args.experiment.data.as_deref())?;
    let errors = evaluate_bundle(&bundle, &config, &corpus, &skeleton)?;
    let result = ConditionResult {
        action: bundle.action.clone(),
        condition: bundle.condition.parse::<Condition>()?,
        errors,
        models: Vec::new(),
    };
    print_errors(&result);
    if let Some(out) = args.out {
        fs::create_dir_all(&out)?;
        let table = ResultsTable::from_results(&[bundle.action.clone()], &[result]);
        fs::write(out.join("results.csv"), results_csv(&table))?;
        fs::write(out.join("results.svg"), bar_chart_svg(&table, chart_horizon(&config.horizons_ms)))?;
    }
    Ok(())
}

fn matrix(args: MatrixArgs) -> Result<()> {
    let Setup { config, skeleton } = setup(&args.experiment)?;
    let conditions = args
        .conditions
        .split(',')
        .map(|c| c.trim().parse::<Condition>())
        .collect::<hmp_core::Result<Vec<_>>>()?;
    let corpus = load_corpus(&config, &skeleton, args.experiment.data.as_deref())?;
    let m = run_matrix(&config, &corpus, &skeleton, &conditions)?;
    let written = write_matrix_outputs(&args.out, &m, &config, &command_line())?;
    for &c in &conditions {
        let avg: Vec<String> = config
            .horizons_ms
            .iter()
            .filter_map(|&ms| m.table.average(c, ms).map(|e| format!("{ms}:{e:.2}")))
            .collect();
        println!("Average {c}: {}", avg.join(" "));
    }
    println!("wrote {} files to {}", written.len(), args.out.display());
    Ok(())
}

fn write_default_skeleton(out: &Path) -> Result<()> {
    write_skeleton(&Skeleton::humanoid(), out)?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) | Command::Synth { command: SynthCommand::Gen(a) } => gen(a),
        Command::Retarget(a) => retarget(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Matrix(a) => matrix(a),
        Command::Skeleton { out } => write_default_skeleton(&out),
    }
}
