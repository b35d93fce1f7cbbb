use hmp_core::experiment::{
    build_training_set, run_condition, Condition, Corpus, ExperimentConfig, RecordingChoice, ResultsTable, AVERAGE_LABEL,
};
use hmp_core::predictor::TrainConfig;
use hmp_core::synth::{build_corpus, humanoid_rest_directions, CorpusSpec, EstimationNoise};
use hmp_core::{Skeleton, Source};

const FRAMES: usize = 40;

fn corpus(noise: EstimationNoise) -> (Skeleton, Corpus, Vec<String>) {
    let spec = CorpusSpec {
        families: 3,
        frames: FRAMES,
        ..CorpusSpec::default()
    };
    let s = Skeleton::humanoid();
    let motions = build_corpus(&spec, &s, &humanoid_rest_directions(), &noise, &[5]).unwrap();
    let actions = (0..3).map(|i| format!("action{i:02}")).collect();
    (s, Corpus::new(motions), actions)
}

fn noisy() -> EstimationNoise {
    EstimationNoise {
        scale_jitter_sigma: 0.05,
        joint_noise_sigma: 5.0,
        seed: 3,
    }
}

fn tiny(predicted: usize) -> TrainConfig {
    TrainConfig {
        observed: 10,
        predicted,
        coefficients: 10,
        iterations: 30,
        batch_size: 4,
        validate_every: 10,
        ..TrainConfig::short_term()
    }
}

fn config(actions: &[String], condition: Condition) -> ExperimentConfig {
    ExperimentConfig {
        condition,
        short_term: tiny(10),
        long_term: tiny(25),
        ..ExperimentConfig::new(actions.to_vec(), actions[1].clone())
    }
}

#[test]
fn window_counts_follow_the_split() {
    let (s, corpus, actions) = corpus(noisy());
    let cfg = config(&actions, Condition::Baseline);
    let train = &cfg.short_term;
    let per_motion = FRAMES - train.window_len() + 1;
    let base = build_training_set(&cfg, &corpus, &s, train, 0).unwrap();
    // two training actions, five subjects, two recordings
    assert_eq!(base.dataset.len(), 2 * 5 * 2 * per_motion);
    assert_eq!(base.adaptation_windows, 0);

    let video = build_training_set(&ExperimentConfig { condition: Condition::WithVideo, ..cfg.clone() }, &corpus, &s, train, 0).unwrap();
    let gt = build_training_set(&ExperimentConfig { condition: Condition::WithGt, ..cfg.clone() }, &corpus, &s, train, 0).unwrap();
    assert_eq!(video.adaptation_windows, 4 * per_motion);
    assert_eq!(gt.adaptation_windows, video.adaptation_windows);
    assert_eq!(video.dataset.len(), base.dataset.len() + video.adaptation_windows);
}

#[test]
fn held_out_action_only_enters_through_adaptation() {
    let (s, corpus, actions) = corpus(noisy());
    for condition in Condition::ALL {
        let cfg = config(&actions, condition);
        let set = build_training_set(&cfg, &corpus, &s, &cfg.short_term, 1).unwrap();
        for &(idx, _) in &set.dataset.windows {
            let meta = &set.dataset.motions[idx].meta;
            if meta.action == cfg.held_out_action {
                assert_ne!(condition, Condition::Baseline);
                assert_eq!(meta.subject, "5");
                assert_eq!(meta.recording, 1);
                let want = if condition == Condition::WithVideo { Source::Estimated } else { Source::Synthetic };
                assert_eq!(meta.source, want);
            } else {
                assert_eq!(meta.source, Source::Synthetic);
                assert!(cfg.train_subjects.iter().any(|t| t.to_string() == meta.subject));
            }
        }
    }
}

#[test]
fn noiseless_video_matches_ground_truth() {
    let (s, corpus, actions) = corpus(EstimationNoise::NONE);
    let base = config(&actions, Condition::WithVideo);
    let gt = ExperimentConfig { condition: Condition::WithGt, ..base.clone() };
    for rec in 0..2 {
        let a = build_training_set(&base, &corpus, &s, &base.short_term, rec).unwrap();
        let b = build_training_set(&gt, &corpus, &s, &gt.short_term, rec).unwrap();
        assert_eq!(a.dataset.windows, b.dataset.windows);
        for (x, y) in a.dataset.motions.iter().zip(&b.dataset.motions) {
            for (p, q) in x.data().iter().zip(y.data()) {
                assert!((0..3).all(|k| (p[k] - q[k]).abs() <= 1e-9 * (1.0 + q[k].abs())));
            }
        }
    }
}

#[test]
fn conditions_are_deterministic() {
    let (s, corpus, actions) = corpus(noisy());
    let cfg = ExperimentConfig {
        recording_choice: RecordingChoice::A,
        ..config(&actions, Condition::WithVideo)
    };
    let a = run_condition(&cfg, &corpus, &s).unwrap();
    let b = run_condition(&cfg, &corpus, &s).unwrap();
    assert_eq!(a.errors, b.errors);
    let horizons: Vec<u32> = a.errors.iter().map(|e| e.0).collect();
    assert_eq!(horizons, vec![80, 160, 320, 400, 560, 1000]);
    assert!(a.errors.iter().all(|e| e.1.is_finite() && e.1 > 0.0));
    // one short-term and one long-term model
    assert_eq!(a.models.len(), 2);
}

#[test]
fn baseline_model_is_shared_across_assignments() {
    let (s, corpus, actions) = corpus(noisy());
    let cfg = ExperimentConfig {
        horizons_ms: vec![80, 400],
        ..config(&actions, Condition::Baseline)
    };
    let r = run_condition(&cfg, &corpus, &s).unwrap();
    assert_eq!(r.models.len(), 1);
    let video = run_condition(&ExperimentConfig { condition: Condition::WithVideo, ..cfg }, &corpus, &s).unwrap();
    let recs: Vec<u32> = video.models.iter().map(|m| m.adapt_recording).collect();
    assert_eq!(recs, vec![0, 1]);
}

#[test]
fn average_row_is_the_mean_over_actions() {
    let (s, corpus, actions) = corpus(noisy());
    let mut results = Vec::new();
    for held in &actions {
        for condition in [Condition::Baseline, Condition::WithVideo] {
            let cfg = ExperimentConfig {
                held_out_action: held.clone(),
                recording_choice: RecordingChoice::B,
                horizons_ms: vec![80, 400],
                ..config(&actions, condition)
            };
            results.push(run_condition(&cfg, &corpus, &s).unwrap());
        }
    }
    let table = ResultsTable::from_results(&actions, &results);
    assert_eq!(table.actions(), actions);
    assert_eq!(table.rows.len(), (actions.len() + 1) * 2 * 2);
    for condition in [Condition::Baseline, Condition::WithVideo] {
        for ms in [80, 400] {
            let vals: Vec<f64> = actions.iter().map(|a| table.get(a, condition, ms).unwrap()).collect();
            let want = vals.iter().sum::<f64>() / vals.len() as f64;
            assert_eq!(table.average(condition, ms).unwrap(), want);
        }
    }
    assert!(table.rows.iter().rev().take(4).all(|r| r.action == AVERAGE_LABEL));
}

#[test]
fn single_action_table() {
    let (s, corpus, actions) = corpus(noisy());
    let cfg = ExperimentConfig {
        recording_choice: RecordingChoice::A,
        horizons_ms: vec![80],
        ..config(&actions, Condition::Baseline)
    };
    let r = run_condition(&cfg, &corpus, &s).unwrap();
    let held = vec![cfg.held_out_action.clone()];
    let table = ResultsTable::from_results(&held, &[r.clone()]);
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.get(&held[0], Condition::Baseline, 80), Some(r.errors[0].1));
    assert_eq!(table.average(Condition::Baseline, 80), Some(r.errors[0].1));
}

#[test]
fn invalid_splits_are_rejected() {
    let (s, corpus, actions) = corpus(noisy());
    let mut cfg = config(&actions, Condition::Baseline);
    cfg.val_subject = 1;
    assert!(run_condition(&cfg, &corpus, &s).is_err());
    let mut cfg = config(&actions, Condition::Baseline);
    cfg.held_out_action = "missing".into();
    assert!(run_condition(&cfg, &corpus, &s).is_err());
}
