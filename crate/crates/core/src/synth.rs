//! Deterministic synthetic motions and a corruption model for poses
//! estimated from video.
//!
//! A [`MotionFamily`] plays the role of an action: each joint oscillates
//! about a rest pose with family-specific amplitudes and frequencies. A
//! subject is a uniform body-size multiplier, and a recording is a seed
//! that draws the phases. Generated frames are passed through scale
//! fitting against the subject-scaled skeleton, so every bone keeps its
//! rest length exactly and the displacement shapes the joint directions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::motion::{Motion, MotionMeta, Source};
use crate::retarget::scale_fit;
use crate::rng::{derive_seed, SplitMix64};
use crate::skeleton::Skeleton;
use crate::{add, scale, sub, Vec3};

/// Frame rate of generated motions.
pub const SYNTH_FPS: u32 = 25;

/// One sinusoidal displacement term of a joint, mm per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillation {
    pub amplitude: Vec3,
    pub frequency_hz: f64,
    /// Per-axis phase in radians; drawn from the recording seed when `None`.
    pub phase: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionFamily {
    pub id: u32,
    pub name: String,
    /// Oscillation terms per joint.
    pub joints: Vec<Vec<Oscillation>>,
}

impl MotionFamily {
    /// A family whose joints all stay at rest.
    pub fn still(id: u32, joints: usize) -> Self {
        Self {
            id,
            name: format!("action{id:02}"),
            joints: vec![Vec::new(); joints],
        }
    }

    pub fn validate(&self, fps: u32) -> Result<()> {
        let nyquist = fps as f64 / 2.0;
        for osc in self.joints.iter().flatten() {
            if osc.amplitude.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                return Err(Error::InvalidConfig("oscillation amplitudes must be non-negative"));
            }
            if !(osc.frequency_hz > 0.0 && osc.frequency_hz < nyquist) {
                return Err(Error::InvalidConfig("oscillation frequency must lie in (0, fps/2)"));
            }
        }
        Ok(())
    }
}

/// Unit directions of each bone in the default humanoid's rest pose
/// (+y up, +x towards the right hip), indexed by child joint.
pub fn humanoid_rest_directions() -> Vec<Vec3> {
    let down = [0.0, -1.0, 0.0];
    let up = [0.0, 1.0, 0.0];
    let right = [1.0, 0.0, 0.0];
    let left = [-1.0, 0.0, 0.0];
    vec![
        [0.0; 3], right, down, down, left, down, down, up, up, up, up, left, down, down, right,
        down, down,
    ]
}

/// Rest positions from the skeleton offsets and per-joint directions; the
/// root sits at the origin.
pub fn rest_pose(skeleton: &Skeleton, directions: &[Vec3]) -> Result<Vec<Vec3>> {
    if directions.len() != skeleton.joint_count() {
        return Err(Error::JointCountMismatch {
            expected: skeleton.joint_count(),
            found: directions.len(),
        });
    }
    let mut pose = vec![[0.0; 3]; skeleton.joint_count()];
    for &(p, c) in skeleton.traversal_order() {
        pose[c] = add(pose[p], scale(directions[c], skeleton.offsets()[c]));
    }
    Ok(pose)
}

/// Shape of the generated family set. Amplitudes are relative to the
/// length of the bone ending at the joint.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    /// Base frequencies are spread geometrically over this band (Hz).
    pub min_frequency_hz: f64,
    pub max_frequency_hz: f64,
    /// Per-axis base amplitudes are `uniform(0, max_amplitude_ratio) * offset`.
    pub max_amplitude_ratio: f64,
    /// Probability that a non-root joint oscillates at all.
    pub active_fraction: f64,
    /// Relative amplitude bound of the second harmonic.
    pub max_harmonic: f64,
    /// Active joints also carry a slow term with per-axis amplitude
    /// `uniform(0, slow_amplitude_ratio) * offset` at a frequency drawn
    /// per family from the slow band.
    pub slow_amplitude_ratio: f64,
    pub slow_min_frequency_hz: f64,
    pub slow_max_frequency_hz: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            min_frequency_hz: 0.2,
            max_frequency_hz: 2.5,
            max_amplitude_ratio: 0.15,
            active_fraction: 0.6,
            max_harmonic: 0.5,
            slow_amplitude_ratio: 1.0,
            slow_min_frequency_hz: 0.15,
            slow_max_frequency_hz: 0.4,
        }
    }
}

/// `count` families for `skeleton`. Family `i` oscillates at the `i`-th of
/// `count` geometrically spaced base frequencies plus its second harmonic,
/// on top of a slow term; amplitudes come from `seed`.
pub fn make_families(count: usize, skeleton: &Skeleton, params: &FamilyParams, seed: u64) -> Vec<MotionFamily> {
    let mut rng = SplitMix64::new(seed);
    let mut draw = |bound: f64| {
        [
            rng.uniform(0.0, bound),
            rng.uniform(0.0, bound),
            rng.uniform(0.0, bound),
        ]
    };
    (0..count)
        .map(|i| {
            let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            let base = params.min_frequency_hz
                * libm::pow(params.max_frequency_hz / params.min_frequency_hz, t);
            let [harmonic, slow, _] = draw(1.0);
            let harmonic = harmonic * params.max_harmonic;
            let slow = params.slow_min_frequency_hz
                + slow * (params.slow_max_frequency_hz - params.slow_min_frequency_hz);
            let mut fam = MotionFamily::still(i as u32, skeleton.joint_count());
            for (j, terms) in fam.joints.iter_mut().enumerate() {
                let offset = skeleton.offsets()[j];
                let amp = draw(params.max_amplitude_ratio * offset);
                let slow_amp = draw(params.slow_amplitude_ratio * offset);
                let [active, _, _] = draw(1.0);
                if j == skeleton.root() || active >= params.active_fraction {
                    continue;
                }
                if params.slow_amplitude_ratio > 0.0 {
                    terms.push(Oscillation {
                        amplitude: slow_amp,
                        frequency_hz: slow,
                        phase: None,
                    });
                }
                terms.push(Oscillation {
                    amplitude: amp,
                    frequency_hz: base,
                    phase: None,
                });
                terms.push(Oscillation {
                    amplitude: scale(amp, harmonic),
                    frequency_hz: 2.0 * base,
                    phase: None,
                });
            }
            fam
        })
        .collect()
}

/// Rest pose scaled by `subject_scale` plus the family's sinusoids, also
/// scaled. A joint's displacement moves the bone from its parent and is
/// inherited by its descendants; the result is refitted to the
/// subject-scaled bone lengths. Unspecified phases are
/// drawn uniformly in `[0, 2 pi)` from `seed`, joint by joint, term by
/// term, axis by axis.
pub fn gen_motion(
    family: &MotionFamily,
    skeleton: &Skeleton,
    rest_directions: &[Vec3],
    subject_scale: f64,
    frames: usize,
    seed: u64,
) -> Result<Motion> {
    if frames == 0 {
        return Err(Error::EmptySequence);
    }
    if family.joints.len() != skeleton.joint_count() {
        return Err(Error::JointCountMismatch {
            expected: skeleton.joint_count(),
            found: family.joints.len(),
        });
    }
    if !(subject_scale > 0.0 && subject_scale.is_finite()) {
        return Err(Error::InvalidConfig("subject scale must be positive"));
    }
    family.validate(SYNTH_FPS)?;
    let subject = skeleton.scaled(subject_scale);
    let rest = rest_pose(&subject, rest_directions)?;
    let mut rng = SplitMix64::new(seed);
    let phases: Vec<Vec<Vec3>> = family
        .joints
        .iter()
        .map(|terms| {
            terms
                .iter()
                .map(|o| {
                    o.phase.unwrap_or_else(|| {
                        [rng.uniform(0.0, TAU), rng.uniform(0.0, TAU), rng.uniform(0.0, TAU)]
                    })
                })
                .collect()
        })
        .collect();
    let j_count = skeleton.joint_count();
    let mut data = Vec::with_capacity(frames * j_count);
    let mut disp = vec![[0.0; 3]; j_count];
    let mut pose = vec![[0.0; 3]; j_count];
    for n in 0..frames {
        let t = n as f64 / SYNTH_FPS as f64;
        for ((d, terms), ph) in disp.iter_mut().zip(&family.joints).zip(&phases) {
            *d = [0.0; 3];
            for (o, ph) in terms.iter().zip(ph) {
                let w = TAU * o.frequency_hz * t;
                for k in 0..3 {
                    d[k] += subject_scale * o.amplitude[k] * libm::sin(w + ph[k]);
                }
            }
        }
        let root = subject.root();
        pose[root] = add(rest[root], disp[root]);
        for &(p, c) in subject.traversal_order() {
            pose[c] = add(pose[p], add(sub(rest[c], rest[p]), disp[c]));
        }
        data.extend_from_slice(&pose);
    }
    let meta = MotionMeta {
        action: family.name.clone(),
        subject: String::new(),
        source: Source::Synthetic,
        recording: 0,
    };
    let raw = Motion::new(j_count, data, SYNTH_FPS, meta)?;
    scale_fit(&raw, &subject)
}

/// Noise model of video-estimated poses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationNoise {
    /// Standard deviation of the per-frame log scale.
    pub scale_jitter_sigma: f64,
    /// Standard deviation of i.i.d. per-coordinate noise, mm.
    pub joint_noise_sigma: f64,
    pub seed: u64,
}

impl EstimationNoise {
    pub const NONE: EstimationNoise = EstimationNoise {
        scale_jitter_sigma: 0.0,
        joint_noise_sigma: 0.0,
        seed: 0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_jitter_sigma >= 0.0 && self.joint_noise_sigma >= 0.0)
            || !self.scale_jitter_sigma.is_finite()
            || !self.joint_noise_sigma.is_finite()
        {
            return Err(Error::InvalidConfig("noise sigmas must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Per-frame scale factors `exp(g_n)`, `g_n ~ Normal(0, sigma^2)`, drawn
/// from `SplitMix64(seed)` in frame order.
pub fn scale_jitter(frames: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..frames).map(|_| libm::exp(rng.normal(0.0, sigma))).collect()
}

/// Emulates a video estimate of `motion`: root-relative positions of frame
/// `n` are multiplied by `s_n` (see [`scale_jitter`], seeded with `seed`),
/// then every coordinate gets Gaussian noise drawn from
/// `SplitMix64(derive_seed(seed, 1))` in frame, joint, axis order. A zero
/// sigma skips its step, so zero noise returns the input unchanged apart
/// from the source tag.
pub fn corrupt_as_estimated(motion: &Motion, root: usize, noise: &EstimationNoise, seed: u64) -> Result<Motion> {
    noise.validate()?;
    if root >= motion.joint_count() {
        return Err(Error::SubsetOutOfRange {
            joint: root,
            joints: motion.joint_count(),
        });
    }
    let mut out = motion.clone();
    if noise.scale_jitter_sigma > 0.0 {
        let scales = scale_jitter(motion.frame_count(), noise.scale_jitter_sigma, seed);
        for (n, s) in scales.into_iter().enumerate() {
            let frame = out.frame_mut(n);
            let r = frame[root];
            for (j, p) in frame.iter_mut().enumerate() {
                if j != root {
                    *p = add(r, scale(sub(*p, r), s));
                }
            }
        }
    }
    if noise.joint_noise_sigma > 0.0 {
        let mut rng = SplitMix64::new(derive_seed(seed, 1));
        for n in 0..out.frame_count() {
            for p in out.frame_mut(n) {
                for v in p.iter_mut() {
                    *v += rng.normal(0.0, noise.joint_noise_sigma);
                }
            }
        }
    }
    out.meta.source = Source::Estimated;
    Ok(out)
}

/// Layout of a synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub families: usize,
    /// `(subject id, body-size multiplier)`.
    pub subjects: Vec<(u32, f64)>,
    pub recordings: u32,
    pub frames: usize,
    /// Estimated copies of every recording (one per camera view).
    pub views: u32,
    pub family_params: FamilyParams,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            families: 15,
            subjects: vec![
                (1, 1.02),
                (5, 0.97),
                (6, 1.05),
                (7, 0.95),
                (8, 1.00),
                (9, 1.08),
                (11, 0.99),
            ],
            recordings: 2,
            frames: 250,
            views: 4,
            family_params: FamilyParams::default(),
            seed: 2024,
        }
    }
}

/// Seed of a clean recording.
pub fn recording_seed(base: u64, family: u32, subject: u32, recording: u32) -> u64 {
    derive_seed(base, ((family as u64) << 40) | ((subject as u64) << 8) | recording as u64)
}

/// Seed of the estimation noise for one view of a recording.
pub fn view_seed(noise_seed: u64, family: u32, subject: u32, recording: u32, view: u32) -> u64 {
    derive_seed(
        noise_seed,
        ((family as u64) << 40) | ((subject as u64) << 16) | ((recording as u64) << 8) | view as u64,
    )
}

/// Every clean recording of the corpus, plus `views` estimated copies of
/// each recording of the subjects in `estimate_subjects`. Action labels
/// are family names and subject labels the decimal subject id.
pub fn build_corpus(
    spec: &CorpusSpec,
    skeleton: &Skeleton,
    rest_directions: &[Vec3],
    noise: &EstimationNoise,
    estimate_subjects: &[u32],
) -> Result<Vec<Motion>> {
    let families = make_families(spec.families, skeleton, &spec.family_params, spec.seed);
    let mut out = Vec::new();
    for fam in &families {
        for &(subject, body) in &spec.subjects {
            for rec in 0..spec.recordings {
                let seed = recording_seed(spec.seed, fam.id, subject, rec);
                let mut m = gen_motion(fam, skeleton, rest_directions, body, spec.frames, seed)?;
                m.meta.subject = format!("{subject}");
                m.meta.recording = rec;
                if estimate_subjects.contains(&subject) {
                    for view in 0..spec.views {
                        let vs = view_seed(noise.seed, fam.id, subject, rec, view);
                        out.push(corrupt_as_estimated(&m, skeleton.root(), noise, vs)?);
                    }
                }
                out.push(m);
            }
        }
    }
    Ok(out)
}
