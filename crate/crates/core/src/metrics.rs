//! Pose errors: MPJPE for reporting, the squared loss for training, and
//! evaluation at fixed future horizons.
//!
//! Reported MPJPE is the mean Euclidean distance in millimeters. The
//! training loss averages squared distances over joints and frames.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::motion::Motion;
use crate::skeleton::Skeleton;
use crate::{norm, sub, Vec3};

/// Short-term horizons in milliseconds (output frames 2, 4, 8, 10 at 25 fps).
pub const SHORT_TERM_MS: [u32; 4] = [80, 160, 320, 400];
/// Long-term horizons in milliseconds (output frames 14, 25 at 25 fps).
pub const LONG_TERM_MS: [u32; 2] = [560, 1000];
/// Every horizon the reports know about.
pub const ALL_HORIZONS_MS: [u32; 6] = [80, 160, 320, 400, 560, 1000];

/// Mean joint distance over `subset`.
pub fn mpjpe_frame(pred: &[Vec3], gt: &[Vec3], subset: &[usize]) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch);
    }
    if subset.is_empty() {
        return Err(Error::EmptyEvalSubset);
    }
    let mut total = 0.0;
    for &j in subset {
        if j >= pred.len() {
            return Err(Error::SubsetOutOfRange {
                joint: j,
                joints: pred.len(),
            });
        }
        total += norm(sub(pred[j], gt[j]));
    }
    Ok(total / subset.len() as f64)
}

/// Sum of squared coordinate differences divided by the number of joint
/// positions. `pred` and `gt` are frame-major with equal length.
pub fn mean_squared_distance(pred: &[Vec3], gt: &[Vec3]) -> Result<f64> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(Error::LengthMismatch);
    }
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| {
            let d = sub(*p, *g);
            d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Training loss over all joints and frames: `1/(J N) sum ||p_hat - p||^2`.
pub fn horizon_loss(pred: &Motion, gt: &Motion) -> Result<f64> {
    if pred.frame_count() != gt.frame_count() || pred.joint_count() != gt.joint_count() {
        return Err(Error::LengthMismatch);
    }
    mean_squared_distance(pred.data(), gt.data())
}

/// Output frame (1-based) reached `ms` milliseconds into the future.
pub fn horizon_frame(ms: u32, fps: u32) -> Result<usize> {
    let scaled = ms as u64 * fps as u64;
    if ms == 0 || scaled % 1000 != 0 {
        return Err(Error::InvalidConfig("horizon is not a whole number of frames"));
    }
    Ok((scaled / 1000) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonError {
    pub ms: u32,
    /// 1-based index into the predicted frames.
    pub frame: usize,
    pub error_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HorizonReport {
    pub entries: Vec<HorizonError>,
}

impl HorizonReport {
    pub fn get(&self, ms: u32) -> Option<f64> {
        self.entries.iter().find(|e| e.ms == ms).map(|e| e.error_mm)
    }
}

/// MPJPE over the skeleton's evaluation subset at each horizon. Frame `k`
/// of the report is the `k`-th predicted frame (1-based).
pub fn evaluate_horizons(
    pred: &Motion,
    gt: &Motion,
    skeleton: &Skeleton,
    horizons_ms: &[u32],
) -> Result<HorizonReport> {
    if pred.fps() != gt.fps() || pred.joint_count() != gt.joint_count() {
        return Err(Error::LengthMismatch);
    }
    pred.check_bound(skeleton)?;
    let available = pred.frame_count().min(gt.frame_count());
    let mut entries = Vec::with_capacity(horizons_ms.len());
    for &ms in horizons_ms {
        let frame = horizon_frame(ms, pred.fps())?;
        if frame > available {
            return Err(Error::HorizonOutOfRange { frame, available });
        }
        let error_mm = mpjpe_frame(
            pred.frame(frame - 1),
            gt.frame(frame - 1),
            skeleton.eval_subset(),
        )?;
        entries.push(HorizonError { ms, frame, error_mm });
    }
    Ok(HorizonReport { entries })
}
