use hmp_core::dct::{dct, idct, DctBasis};
use hmp_core::metrics::{evaluate_horizons, horizon_frame, horizon_loss, mean_squared_distance, mpjpe_frame};
use hmp_core::motion::{downsample, remove_global, GlobalMode};
use hmp_core::{Error, Motion, MotionMeta, Skeleton, Vec3};
use proptest::prelude::*;

fn motion(frames: Vec<Vec<Vec3>>, fps: u32) -> Motion {
    Motion::from_frames(frames, fps, MotionMeta::default()).unwrap()
}

fn coords() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-1e3f64..1e3)
}

fn random_motion(joints: usize) -> impl Strategy<Value = Motion> {
    (1usize..40).prop_flat_map(move |n| {
        prop::collection::vec(coords(), n * joints)
            .prop_map(move |d| Motion::new(joints, d, 50, MotionMeta::default()).unwrap())
    })
}

#[test]
fn downsample_keeps_even_frames() {
    let m = motion((0..7).map(|n| vec![[n as f64, 0.0, 0.0]]).collect(), 50);
    let d = downsample(&m, 25).unwrap();
    let kept: Vec<f64> = d.frames().map(|f| f[0][0]).collect();
    assert_eq!(kept, vec![0.0, 2.0, 4.0, 6.0]);
    let m = motion((0..100).map(|n| vec![[n as f64, 1.0, 2.0]]).collect(), 50);
    assert_eq!(downsample(&m, 25).unwrap().frame_count(), 50);
    assert_eq!(downsample(&m, 50).unwrap(), m);
    assert!(matches!(downsample(&m, 30), Err(Error::NonIntegerRatio { .. })));
}

#[test]
fn translation_mode_centres_root() {
    let s = Skeleton::from_parent_indices(&[-1, 0], vec![0.0, 1.0]).unwrap();
    let m = motion(vec![vec![[10.0, 20.0, 30.0], [11.0, 20.0, 30.0]]; 3], 25);
    let out = remove_global(&m, &s, GlobalMode::Translation).unwrap();
    for f in out.frames() {
        assert_eq!(f, &[[0.0; 3], [1.0, 0.0, 0.0]]);
    }
    assert_eq!(remove_global(&out, &s, GlobalMode::Translation).unwrap(), out);
}

#[test]
fn rotation_mode_undoes_a_quarter_turn() {
    let s = Skeleton::humanoid();
    let mode = GlobalMode::rotation_for(&s).unwrap();
    let (l, r) = (s.index_of("l_hip").unwrap(), s.index_of("r_hip").unwrap());
    let mut frame = vec![[0.0, 100.0, 0.0]; 17];
    frame[s.root()] = [0.0; 3];
    frame[l] = [-5.0, 0.0, 0.0];
    frame[r] = [5.0, 0.0, 0.0];
    // known rotation by 90 degrees about +y: (x, z) -> (z, -x)
    let rotated: Vec<Vec3> = frame.iter().map(|p| [p[2], p[1], -p[0]]).collect();
    let out = remove_global(&motion(vec![rotated], 25), &s, mode).unwrap();
    for (a, b) in out.frame(0).iter().zip(&frame) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn downsample_copies_kept_frames(m in random_motion(3)) {
        let d = downsample(&m, 25).unwrap();
        prop_assert_eq!(d.frame_count(), (m.frame_count() + 1) / 2);
        for k in 0..d.frame_count() {
            prop_assert_eq!(d.frame(k), m.frame(2 * k));
        }
    }

    #[test]
    fn translation_removal_keeps_distances(m in random_motion(4)) {
        let s = Skeleton::from_parent_indices(&[-1, 0, 1, 1], vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let out = remove_global(&m, &s, GlobalMode::Translation).unwrap();
        for (a, b) in m.frames().zip(out.frames()) {
            for i in 0..4 {
                for j in 0..4 {
                    let d = |f: &[Vec3]| (0..3).map(|k| (f[i][k] - f[j][k]).powi(2)).sum::<f64>().sqrt();
                    prop_assert!((d(a) - d(b)).abs() <= 1e-9 * (1.0 + d(a)));
                }
            }
        }
        let again = remove_global(&out, &s, GlobalMode::Translation).unwrap();
        prop_assert_eq!(again, out);
    }

    #[test]
    fn rotation_removal_is_idempotent(m in random_motion(17)) {
        let s = Skeleton::humanoid();
        let mode = GlobalMode::rotation_for(&s).unwrap();
        let once = remove_global(&m, &s, mode).unwrap();
        let twice = remove_global(&once, &s, mode).unwrap();
        for (a, b) in once.data().iter().zip(twice.data()) {
            for k in 0..3 {
                prop_assert!((a[k] - b[k]).abs() <= 1e-9 * (1.0 + a[k].abs()));
            }
        }
    }
}

#[test]
fn mpjpe_examples() {
    let p = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
    assert_eq!(mpjpe_frame(&p, &p, &[0, 1]).unwrap(), 0.0);
    assert_eq!(mpjpe_frame(&[[3.0, 4.0, 0.0]], &[[0.0; 3]], &[0]).unwrap(), 5.0);
    let pred = [[1.0, 0.0, 0.0], [0.0, 3.0, 0.0]];
    assert_eq!(mpjpe_frame(&pred, &[[0.0; 3]; 2], &[0, 1]).unwrap(), 2.0);
    assert_eq!(mean_squared_distance(&[[1.0, 2.0, 2.0]], &[[0.0; 3]]).unwrap(), 9.0);
}

#[test]
fn horizon_examples() {
    let s = Skeleton::from_parent_indices(&[-1, 0], vec![0.0, 1.0]).unwrap();
    let gt = motion((0..25).map(|n| vec![[n as f64, 0.0, 0.0], [n as f64, 1.0, 0.0]]).collect(), 25);
    let report = evaluate_horizons(&gt, &gt, &s, &[80, 400, 1000]).unwrap();
    assert!(report.entries.iter().all(|e| e.error_mm == 0.0));
    let shifted = motion(gt.frames().map(|f| f.iter().map(|p| [p[0] + 1.0, p[1], p[2]]).collect()).collect(), 25);
    let report = evaluate_horizons(&shifted, &gt, &s, &[80, 160, 320, 400, 560, 1000]).unwrap();
    assert!(report.entries.iter().all(|e| e.error_mm == 1.0));
    let short = gt.slice(0, 10);
    assert!(matches!(
        evaluate_horizons(&short, &short, &s, &[560]),
        Err(Error::HorizonOutOfRange { frame: 14, available: 10 })
    ));
    let frames: Vec<usize> = [80, 160, 320, 400, 560, 1000].iter().map(|&ms| horizon_frame(ms, 25).unwrap()).collect();
    assert_eq!(frames, vec![2, 4, 8, 10, 14, 25]);
}

proptest! {
    #[test]
    fn mpjpe_symmetry_translation_scale(
        a in prop::collection::vec(coords(), 5),
        b in prop::collection::vec(coords(), 5),
        t in coords(),
        s in -10.0f64..10.0,
    ) {
        let subset = [0, 2, 3, 4];
        let e = mpjpe_frame(&a, &b, &subset).unwrap();
        prop_assert!((e - mpjpe_frame(&b, &a, &subset).unwrap()).abs() <= 1e-12 * (1.0 + e));
        let shift = |v: &[Vec3]| v.iter().map(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]]).collect::<Vec<_>>();
        let et = mpjpe_frame(&shift(&a), &shift(&b), &subset).unwrap();
        prop_assert!((e - et).abs() <= 1e-9 * (1.0 + e));
        let mul = |v: &[Vec3]| v.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s]).collect::<Vec<_>>();
        let es = mpjpe_frame(&mul(&a), &mul(&b), &subset).unwrap();
        prop_assert!((es - s.abs() * e).abs() <= 1e-9 * (1.0 + es));
    }

    #[test]
    fn squared_distance_matches_double_loop(
        pairs in prop::collection::vec((coords(), coords()), 1..30)
    ) {
        let (a, b): (Vec<Vec3>, Vec<Vec3>) = pairs.into_iter().unzip();
        let mut want = 0.0;
        for j in 0..a.len() {
            for k in 0..3 {
                want += (a[j][k] - b[j][k]).powi(2);
            }
        }
        want /= a.len() as f64;
        let got = mean_squared_distance(&a, &b).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want));
    }

    #[test]
    fn horizon_loss_zero_iff_equal(m in random_motion(2), bump in 1e-6f64..10.0) {
        prop_assert_eq!(horizon_loss(&m, &m).unwrap(), 0.0);
        let mut other = m.clone();
        other.frame_mut(m.frame_count() - 1)[1][2] += bump;
        prop_assert!(horizon_loss(&other, &m).unwrap() > 0.0);
    }

    #[test]
    fn horizon_reads_only_its_frame(m in random_motion(3), noise in coords()) {
        prop_assume!(m.frame_count() >= 25);
        let s = Skeleton::from_parent_indices(&[-1, 0, 0], vec![0.0, 1.0, 1.0]).unwrap();
        let m = Motion::new(3, m.data().to_vec(), 25, MotionMeta::default()).unwrap();
        let base = evaluate_horizons(&m, &m.slice(0, m.frame_count()), &s, &[400]).unwrap();
        let mut poked = m.clone();
        for n in (0..m.frame_count()).filter(|&n| n != 9) {
            poked.frame_mut(n)[1] = noise;
        }
        let after = evaluate_horizons(&poked, &m, &s, &[400]).unwrap();
        prop_assert_eq!(base.get(400), after.get(400));
    }
}

/// Orthonormal DCT-II by direct summation.
fn naive_dct(x: &[f64]) -> Vec<f64> {
    let l = x.len() as f64;
    (0..x.len())
        .map(|k| {
            let w = if k == 0 { (1.0 / l).sqrt() } else { (2.0 / l).sqrt() };
            w * x
                .iter()
                .enumerate()
                .map(|(n, v)| v * (std::f64::consts::PI * (2.0 * n as f64 + 1.0) * k as f64 / (2.0 * l)).cos())
                .sum::<f64>()
        })
        .collect()
}

#[test]
fn dct_of_constant() {
    let c = dct(&[5.0; 4]);
    assert!((c[0] - 10.0).abs() < 1e-12);
    assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    let basis = DctBasis::new(4);
    let padded = basis.inverse(&[10.0]);
    assert!(padded.iter().all(|v| (v - 5.0).abs() < 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dct_round_trip(x in prop::collection::vec(-1e3f64..1e3, 1..=64)) {
        let back = idct(&dct(&x));
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn dct_matches_direct_sum_and_is_linear(
        (a, b) in (1usize..=64).prop_flat_map(|l| (
            prop::collection::vec(-1e3f64..1e3, l),
            prop::collection::vec(-1e3f64..1e3, l),
        ))
    ) {
        let (da, db) = (dct(&a), dct(&b));
        for (x, y) in da.iter().zip(naive_dct(&a)) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        for ((s, x), y) in dct(&sum).iter().zip(&da).zip(&db) {
            prop_assert!((s - x - y).abs() < 1e-9);
        }
    }
}
