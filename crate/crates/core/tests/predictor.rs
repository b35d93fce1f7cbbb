use hmp_core::experiment::evaluate_zero_velocity;
use hmp_core::predictor::{
    grad_check, grad_check_against, train, zero_velocity, Dataset, Optimizer, Params, PredictorModel, TrainConfig,
};
use hmp_core::rng::SplitMix64;
use hmp_core::{Motion, MotionMeta, Skeleton, Vec3};
use proptest::prelude::*;

fn random_window(len: usize, joints: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = SplitMix64::new(seed);
    (0..len * joints)
        .map(|_| [rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)])
        .collect()
}

fn random_model(seed: u64) -> PredictorModel {
    let mut rng = SplitMix64::new(seed);
    let observed = 2 + rng.below(6);
    let predicted = 1 + rng.below(6);
    let coefficients = 1 + rng.below(observed + predicted);
    let joints = 1 + rng.below(4);
    let mut params = Params::zeros(coefficients, joints);
    for p in params.iter_mut() {
        *p = rng.uniform(-0.5, 0.5);
    }
    PredictorModel::from_params(observed, predicted, coefficients, joints, params, seed).unwrap()
}

fn small_config() -> TrainConfig {
    TrainConfig {
        observed: 4,
        predicted: 4,
        coefficients: 6,
        iterations: 2000,
        batch_size: 8,
        seed: 11,
        validate_every: 0,
        ..TrainConfig::short_term()
    }
}

/// Two joints swinging sinusoidally at `hz`, sampled at 25 fps.
fn sinusoid(frames: usize, hz: f64, phase: f64) -> Motion {
    let data = (0..frames)
        .flat_map(|n| {
            let t = n as f64 / 25.0;
            let w = std::f64::consts::TAU * hz * t + phase;
            [[0.0, 0.0, 0.0], [100.0 * w.sin(), 50.0 * w.cos(), 20.0 * (2.0 * w).sin()]]
        })
        .collect();
    Motion::new(2, data, 25, MotionMeta::default()).unwrap()
}

proptest! {
    #[test]
    fn pure_residual_repeats_last_frame_and_translates(
        seed in any::<u64>(),
        t in prop::array::uniform3(-1e3f64..1e3),
    ) {
        let model = PredictorModel::zeros(10, 10, 15, 3).unwrap();
        let obs = random_window(10, 3, seed);
        let out = model.predict(&obs).unwrap();
        let last = &obs[27..30];
        for (n, frame) in out.chunks(3).enumerate() {
            prop_assert_eq!(frame, last, "frame {}", n);
        }
        let moved: Vec<Vec3> = obs.iter().map(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]]).collect();
        let out_moved = model.predict(&moved).unwrap();
        for (a, b) in out_moved.iter().zip(&out) {
            for k in 0..3 {
                prop_assert!((a[k] - b[k] - t[k]).abs() <= 1e-9 * (1.0 + a[k].abs()));
            }
        }
    }
}

#[test]
fn prediction_is_deterministic() {
    let config = TrainConfig { seed: 99, ..TrainConfig::short_term() };
    let a = PredictorModel::init(&config, 5).unwrap();
    let b = PredictorModel::init(&config, 5).unwrap();
    assert_eq!(a, b);
    let obs = random_window(10, 5, 3);
    assert_eq!(a.predict(&obs).unwrap(), b.predict(&obs).unwrap());
}

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..10 {
        let model = random_model(seed);
        let window = random_window(model.window_len(), model.joints(), seed + 1000);
        let err = grad_check(&model, &window, 1e-5).unwrap();
        assert!(err < 1e-5, "seed {seed}: {err}");
    }
}

#[test]
fn zero_model_on_still_window_has_zero_gradient() {
    let model = PredictorModel::zeros(4, 3, 5, 2).unwrap();
    let window = vec![[0.0; 3]; 14];
    let (loss, grad) = model.loss_and_gradient(&window).unwrap();
    assert_eq!(loss, 0.0);
    assert!(grad.iter().all(|g| *g == 0.0));
    assert_eq!(grad_check(&model, &window, 1e-5).unwrap(), 0.0);
}

#[test]
fn corrupted_gradient_is_caught() {
    let model = random_model(5);
    // millimetre-scale motion keeps the true gradient well below 1
    let window: Vec<Vec3> = random_window(model.window_len(), model.joints(), 6)
        .iter()
        .map(|p| [p[0] * 1e-3, p[1] * 1e-3, p[2] * 1e-3])
        .collect();
    let (_, mut grad) = model.loss_and_gradient(&window).unwrap();
    grad.joint_mix[0] += 1.0;
    let err = grad_check_against(&model, &window, 1e-5, &grad).unwrap();
    assert!((err - 1.0).abs() < 0.05, "{err}");
}

#[test]
fn zero_velocity_examples() {
    let obs = random_window(10, 2, 4);
    let pred = zero_velocity(&obs, 2, 3);
    assert_eq!(pred, [&obs[18..20], &obs[18..20], &obs[18..20]].concat());

    let s = Skeleton::from_parent_indices(&[-1, 0], vec![0.0, 1.0]).unwrap();
    let still = Motion::new(2, vec![[1.0, 2.0, 3.0]; 2 * 60], 25, MotionMeta::default()).unwrap();
    let errs = evaluate_zero_velocity(&[&still], &s, 10, 25, &[80, 400, 1000], 1).unwrap();
    assert!(errs.iter().all(|&(_, e)| e == 0.0));

    let moving = sinusoid(80, 0.4, 0.3);
    let errs = evaluate_zero_velocity(&[&moving], &s, 10, 25, &[80, 160, 320, 400, 560, 1000], 1).unwrap();
    for w in errs.windows(2) {
        assert!(w[1].1 > w[0].1, "{errs:?}");
    }
}

#[test]
fn static_data_stays_near_optimal() {
    let config = small_config();
    let mut ds = Dataset::new(config.window_len());
    ds.push_motion(Motion::new(2, vec![[5.0, -3.0, 1.0]; 2 * 30], 25, MotionMeta::default()).unwrap(), 1);
    let init = PredictorModel::init(&config, 2).unwrap();
    let out = train(&ds, &config, None).unwrap();
    let before = ds.mean_loss(&init).unwrap();
    let after = ds.mean_loss(&out.model).unwrap();
    assert!(after <= before, "{before} -> {after}");
    assert!(before < 1e-3, "{before}");
}

#[test]
fn sinusoid_training_halves_the_loss() {
    let config = small_config();
    let mut ds = Dataset::new(config.window_len());
    for (hz, phase) in [(0.5, 0.0), (0.5, 1.3), (0.5, 2.9)] {
        ds.push_motion(sinusoid(120, hz, phase), 1);
    }
    let init = PredictorModel::init(&config, 2).unwrap();
    let out = train(&ds, &config, None).unwrap();
    let before = ds.mean_loss(&init).unwrap();
    let after = ds.mean_loss(&out.model).unwrap();
    assert!(after < 0.5 * before, "{before} -> {after}");
    let again = train(&ds, &config, None).unwrap();
    assert_eq!(again.model, out.model);
    assert_eq!(again.losses, out.losses);
}

#[test]
fn zero_learning_rate_changes_nothing() {
    for optimizer in [Optimizer::Sgd, Optimizer::ADAM] {
        let config = TrainConfig {
            learning_rate: 0.0,
            iterations: 50,
            optimizer,
            ..small_config()
        };
        let mut ds = Dataset::new(config.window_len());
        ds.push_motion(sinusoid(60, 1.0, 0.0), 1);
        let out = train(&ds, &config, None).unwrap();
        assert_eq!(out.model, PredictorModel::init(&config, 2).unwrap());
        // every batch is evaluated on the same parameters
        let full = ds.mean_loss(&out.model).unwrap();
        let mean = out.losses.iter().sum::<f64>() / out.losses.len() as f64;
        assert!((mean - full).abs() < 0.5 * full, "{mean} vs {full}");
    }
}

#[test]
fn validation_keeps_the_best_checkpoint() {
    let config = TrainConfig {
        validate_every: 100,
        iterations: 500,
        ..small_config()
    };
    let mut ds = Dataset::new(config.window_len());
    ds.push_motion(sinusoid(100, 0.5, 0.0), 1);
    let mut val = Dataset::new(config.window_len());
    val.push_motion(sinusoid(100, 0.5, 2.0), 1);
    let out = train(&ds, &config, Some(&val)).unwrap();
    let checks: Vec<usize> = out.validation.iter().map(|c| c.0).collect();
    assert_eq!(checks, vec![0, 100, 200, 300, 400, 500]);
    let best = out.validation.iter().cloned().fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    assert_eq!(out.best_iteration, best.0);
    assert_eq!(val.mean_loss(&out.model).unwrap(), best.1);
}
