//! Motion sequences and the preprocessing applied before training:
//! stride downsampling and removal of global translation / rotation.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::skeleton::{Pose, Skeleton};
use crate::{sub, Vec3};

/// Where a motion came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Mocap,
    Estimated,
    Synthetic,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Mocap => "mocap",
            Source::Estimated => "estimated",
            Source::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "mocap" => Ok(Source::Mocap),
            "estimated" => Ok(Source::Estimated),
            "synthetic" => Ok(Source::Synthetic),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionMeta {
    pub action: String,
    pub subject: String,
    pub source: Source,
    pub recording: u32,
}

impl Default for MotionMeta {
    fn default() -> Self {
        Self {
            action: String::new(),
            subject: String::new(),
            source: Source::Mocap,
            recording: 0,
        }
    }
}

/// `N` frames of `J` joint positions (mm) sampled at `fps`.
///
/// Frames are stored contiguously, frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    joints: usize,
    data: Vec<Vec3>,
    fps: u32,
    pub meta: MotionMeta,
}

impl Motion {
    /// Builds a motion from frame-major positions; `data.len()` must be a
    /// nonzero multiple of `joints`.
    pub fn new(joints: usize, data: Vec<Vec3>, fps: u32, meta: MotionMeta) -> Result<Self> {
        if fps == 0 {
            return Err(Error::InvalidFps(0.0));
        }
        if data.is_empty() || joints == 0 {
            return Err(Error::EmptySequence);
        }
        if data.len() % joints != 0 {
            return Err(Error::JointCountMismatch {
                expected: joints,
                found: data.len() % joints,
            });
        }
        for (i, p) in data.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    frame: i / joints,
                    joint: i % joints,
                });
            }
        }
        Ok(Self {
            joints,
            data,
            fps,
            meta,
        })
    }

    pub fn from_frames(frames: Vec<Vec<Vec3>>, fps: u32, meta: MotionMeta) -> Result<Self> {
        let joints = frames.first().map_or(0, Vec::len);
        if frames.iter().any(|f| f.len() != joints) {
            let found = frames.iter().map(Vec::len).find(|&l| l != joints).unwrap_or(0);
            return Err(Error::JointCountMismatch {
                expected: joints,
                found,
            });
        }
        Self::new(joints, frames.concat(), fps, meta)
    }

    pub fn frame_count(&self) -> usize {
        self.data.len() / self.joints
    }

    pub fn joint_count(&self) -> usize {
        self.joints
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn frame(&self, n: usize) -> &[Vec3] {
        &self.data[n * self.joints..(n + 1) * self.joints]
    }

    pub fn frame_mut(&mut self, n: usize) -> &mut [Vec3] {
        &mut self.data[n * self.joints..(n + 1) * self.joints]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[Vec3]> + '_ {
        self.data.chunks_exact(self.joints)
    }

    pub fn pose(&self, n: usize) -> Pose {
        Pose::new(self.frame(n).to_vec())
    }

    /// All positions, frame-major.
    pub fn data(&self) -> &[Vec3] {
        &self.data
    }

    /// Checks the motion against a skeleton's joint count.
    pub fn check_bound(&self, skeleton: &Skeleton) -> Result<()> {
        if self.joints != skeleton.joint_count() {
            return Err(Error::JointCountMismatch {
                expected: skeleton.joint_count(),
                found: self.joints,
            });
        }
        Ok(())
    }

    /// Frames `start..end` as a new motion with the same meta.
    pub fn slice(&self, start: usize, end: usize) -> Motion {
        assert!(start < end && end <= self.frame_count());
        Motion {
            joints: self.joints,
            data: self.data[start * self.joints..end * self.joints].to_vec(),
            fps: self.fps,
            meta: self.meta.clone(),
        }
    }

    pub(crate) fn with_data(&self, data: Vec<Vec3>) -> Motion {
        debug_assert_eq!(data.len(), self.data.len());
        Motion {
            joints: self.joints,
            data,
            fps: self.fps,
            meta: self.meta.clone(),
        }
    }
}

/// Keeps every `fps / target_fps`-th frame starting at frame 0.
pub fn downsample(motion: &Motion, target_fps: u32) -> Result<Motion> {
    if target_fps == 0 || motion.fps % target_fps != 0 {
        return Err(Error::NonIntegerRatio {
            fps: motion.fps as f64,
            target: target_fps as f64,
        });
    }
    let stride = (motion.fps / target_fps) as usize;
    let mut data = Vec::with_capacity(motion.data.len() / stride + motion.joints);
    for frame in motion.frames().step_by(stride) {
        data.extend_from_slice(frame);
    }
    Ok(Motion {
        joints: motion.joints,
        data,
        fps: target_fps,
        meta: motion.meta.clone(),
    })
}

/// Which global components [`remove_global`] strips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalMode {
    /// Root joint moved to the origin in every frame.
    Translation,
    /// Translation, then a rotation about the vertical (+y) axis per frame
    /// so the horizontal part of the left-hip to right-hip vector points
    /// along +x.
    TranslationRotation { left_hip: usize, right_hip: usize },
}

impl GlobalMode {
    /// Rotation mode with hips looked up by the names `l_hip` / `r_hip`.
    pub fn rotation_for(skeleton: &Skeleton) -> Option<GlobalMode> {
        Some(GlobalMode::TranslationRotation {
            left_hip: skeleton.index_of("l_hip")?,
            right_hip: skeleton.index_of("r_hip")?,
        })
    }
}

const MIN_HIP_SPAN: f64 = 1e-9;

pub fn remove_global(motion: &Motion, skeleton: &Skeleton, mode: GlobalMode) -> Result<Motion> {
    motion.check_bound(skeleton)?;
    let root = skeleton.root();
    let mut out = motion.clone();
    for n in 0..out.frame_count() {
        let frame = out.frame_mut(n);
        let origin = frame[root];
        for p in frame.iter_mut() {
            *p = sub(*p, origin);
        }
        if let GlobalMode::TranslationRotation {
            left_hip,
            right_hip,
        } = mode
        {
            let h = sub(frame[right_hip], frame[left_hip]);
            let span = libm::sqrt(h[0] * h[0] + h[2] * h[2]);
            if span < MIN_HIP_SPAN {
                return Err(Error::DegenerateHips { frame: n });
            }
            let (c, s) = (h[0] / span, h[2] / span);
            for p in frame.iter_mut() {
                let (x, z) = (p[0], p[2]);
                p[0] = x * c + z * s;
                p[2] = z * c - x * s;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line_motion(frames: usize, fps: u32) -> Motion {
        let frames = (0..frames)
            .map(|n| vec![[n as f64, 0.0, 0.0], [n as f64, 1.0, 0.0]])
            .collect();
        Motion::from_frames(frames, fps, MotionMeta::default()).unwrap()
    }

    #[test]
    fn downsample_50_to_25() {
        let m = line_motion(100, 50);
        let d = downsample(&m, 25).unwrap();
        assert_eq!(d.frame_count(), 50);
        assert_eq!(d.fps(), 25);
        for k in 0..50 {
            assert_eq!(d.frame(k), m.frame(2 * k));
        }
    }

    #[test]
    fn downsample_odd_length() {
        let m = line_motion(7, 50);
        let d = downsample(&m, 25).unwrap();
        let kept: Vec<f64> = d.frames().map(|f| f[0][0]).collect();
        assert_eq!(kept, vec![0.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn downsample_identity_and_errors() {
        let m = line_motion(5, 25);
        assert_eq!(downsample(&m, 25).unwrap(), m);
        assert!(matches!(downsample(&m, 10), Err(Error::NonIntegerRatio { .. })));
        assert!(matches!(downsample(&m, 0), Err(Error::NonIntegerRatio { .. })));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            Motion::new(2, vec![], 25, MotionMeta::default()).unwrap_err(),
            Error::EmptySequence
        );
        assert!(matches!(
            Motion::new(1, vec![[f64::NAN, 0.0, 0.0]], 25, MotionMeta::default()),
            Err(Error::NonFiniteValue { frame: 0, joint: 0 })
        ));
    }

    fn hips_skeleton() -> Skeleton {
        Skeleton::new(
            vec!["pelvis".into(), "l_hip".into(), "r_hip".into()],
            vec![None, Some(0), Some(0)],
            vec![0.0, 5.0, 5.0],
            vec![1, 2],
        )
        .unwrap()
    }

    #[test]
    fn translation_moves_root_to_origin() {
        let s = hips_skeleton();
        let frame = vec![[10.0, 20.0, 30.0], [5.0, 20.0, 30.0], [15.0, 20.0, 30.0]];
        let m = Motion::from_frames(vec![frame.clone(), frame], 25, MotionMeta::default()).unwrap();
        let out = remove_global(&m, &s, GlobalMode::Translation).unwrap();
        for f in out.frames() {
            assert_eq!(f[0], [0.0; 3]);
            assert_eq!(f[1], [-5.0, 0.0, 0.0]);
            assert_eq!(f[2], [5.0, 0.0, 0.0]);
        }
        assert_eq!(remove_global(&out, &s, GlobalMode::Translation).unwrap(), out);
    }

    #[test]
    fn rotation_undoes_a_quarter_turn() {
        let s = hips_skeleton();
        let mode = GlobalMode::rotation_for(&s).unwrap();
        // hips at (-5,0,0)/(5,0,0) turned 90 degrees about +y
        let frame = vec![[0.0; 3], [0.0, 0.0, 5.0], [0.0, 0.0, -5.0]];
        let m = Motion::from_frames(vec![frame], 25, MotionMeta::default()).unwrap();
        let out = remove_global(&m, &s, mode).unwrap();
        let expect = [[0.0; 3], [-5.0, 0.0, 0.0], [5.0, 0.0, 0.0]];
        for (a, b) in out.frame(0).iter().zip(expect) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn degenerate_hips() {
        let s = hips_skeleton();
        let mode = GlobalMode::rotation_for(&s).unwrap();
        let frame = vec![[0.0; 3], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]];
        let m = Motion::from_frames(vec![frame], 25, MotionMeta::default()).unwrap();
        assert_eq!(
            remove_global(&m, &s, mode).unwrap_err(),
            Error::DegenerateHips { frame: 0 }
        );
    }
}
