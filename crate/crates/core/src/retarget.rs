//! Conversion of estimated poses into the skeleton's joint definition.
//!
//! Two steps: a linear vertex-to-joint regression (mesh to joints), then
//! per-frame scale fitting. Scale fitting walks the skeleton breadth-first
//! from the root; for every bone it keeps the direction observed in the
//! input frame and replaces the length with the skeleton's static offset,
//! anchoring the bone at the already-fitted parent joint.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::motion::Motion;
use crate::skeleton::{Pose, Skeleton};
use crate::{add, norm, scale, sub, Vec3};

/// Input bones shorter than this (mm) have no usable direction.
pub const MIN_BONE_LENGTH: f64 = 1e-12;

/// Direction used for a degenerate bone in the first frame (+y, up).
pub const FALLBACK_DIRECTION: Vec3 = [0.0, 1.0, 0.0];

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Row-stochastic `J x V` weights mapping mesh vertices to joints.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRegressor {
    joints: usize,
    vertices: usize,
    weights: Vec<f64>,
}

impl JointRegressor {
    /// `rows[j][v]` is the weight of vertex `v` in joint `j`. Every row must
    /// be non-negative and sum to 1 within 1e-9.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let joints = rows.len();
        let vertices = rows.first().map_or(0, Vec::len);
        if joints == 0 || vertices == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != vertices {
                return Err(Error::DimensionMismatch {
                    expected: vertices,
                    found: r.len(),
                });
            }
            let sum: f64 = r.iter().sum();
            if r.iter().any(|w| !(w.is_finite() && *w >= 0.0))
                || libm::fabs(sum - 1.0) > ROW_SUM_TOLERANCE
            {
                return Err(Error::InvalidRegressor { row });
            }
        }
        Ok(Self {
            joints,
            vertices,
            weights: rows.concat(),
        })
    }

    /// Regressor whose joint `j` is vertex `j` of a `vertices`-vertex mesh.
    pub fn selection(joints: usize, vertices: usize) -> Result<Self> {
        let rows = (0..joints)
            .map(|j| {
                let mut r = vec![0.0; vertices];
                if j < vertices {
                    r[j] = 1.0;
                }
                r
            })
            .collect();
        Self::new(rows)
    }

    pub fn joint_count(&self) -> usize {
        self.joints
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn row(&self, joint: usize) -> &[f64] {
        &self.weights[joint * self.vertices..(joint + 1) * self.vertices]
    }
}

/// Mesh vertex positions for one frame, mm.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFrame {
    pub vertices: Vec<Vec3>,
}

/// `joints = weights * vertices`.
pub fn regress_joints(mesh: &MeshFrame, regressor: &JointRegressor) -> Result<Pose> {
    if mesh.vertices.len() != regressor.vertices {
        return Err(Error::DimensionMismatch {
            expected: regressor.vertices,
            found: mesh.vertices.len(),
        });
    }
    let joints = (0..regressor.joints)
        .map(|j| {
            regressor
                .row(j)
                .iter()
                .zip(&mesh.vertices)
                .fold([0.0; 3], |acc, (&w, v)| add(acc, scale(*v, w)))
        })
        .collect();
    Ok(Pose::new(joints))
}

/// Fits one frame. `prev_dirs[j]` holds the fitted direction of the bone
/// ending at `j` in the previous frame and is updated in place.
fn fit_frame(
    skeleton: &Skeleton,
    input: &[Vec3],
    prev_dirs: &mut [Vec3],
    out: &mut [Vec3],
) {
    let offsets = skeleton.offsets();
    out[skeleton.root()] = input[skeleton.root()];
    for &(p, c) in skeleton.traversal_order() {
        let d = sub(input[c], input[p]);
        let len = norm(d);
        let dir = if len < MIN_BONE_LENGTH {
            prev_dirs[c]
        } else {
            scale(d, 1.0 / len)
        };
        prev_dirs[c] = dir;
        out[c] = add(out[p], scale(dir, offsets[c]));
    }
}

/// Per-frame scale fitting of every bone to the skeleton's offsets.
///
/// A bone with zero input length reuses its fitted direction from the
/// previous frame (+y in frame 0).
pub fn scale_fit(motion: &Motion, skeleton: &Skeleton) -> Result<Motion> {
    motion.check_bound(skeleton)?;
    let j = motion.joint_count();
    let mut prev_dirs = vec![FALLBACK_DIRECTION; j];
    let mut data = vec![[0.0; 3]; motion.data().len()];
    for (n, (input, out)) in motion.frames().zip(data.chunks_exact_mut(j)).enumerate() {
        if let Some(joint) = input.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFiniteInput { frame: n, joint });
        }
        fit_frame(skeleton, input, &mut prev_dirs, out);
    }
    Ok(motion.with_data(data))
}

/// Fits a single pose with no previous-frame history.
pub fn scale_fit_pose(pose: &Pose, skeleton: &Skeleton) -> Result<Pose> {
    if pose.len() != skeleton.joint_count() {
        return Err(Error::JointCountMismatch {
            expected: skeleton.joint_count(),
            found: pose.len(),
        });
    }
    if let Some(joint) = pose.joints.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFiniteInput { frame: 0, joint });
    }
    let mut prev_dirs = vec![FALLBACK_DIRECTION; pose.len()];
    let mut out = vec![[0.0; 3]; pose.len()];
    fit_frame(skeleton, &pose.joints, &mut prev_dirs, &mut out);
    Ok(Pose::new(out))
}

/// Length of every bone in every frame; row `n` lists the bones of frame
/// `n` in traversal order.
pub fn bone_lengths(motion: &Motion, skeleton: &Skeleton) -> Result<Vec<Vec<f64>>> {
    motion.check_bound(skeleton)?;
    Ok(motion
        .frames()
        .map(|f| {
            skeleton
                .traversal_order()
                .iter()
                .map(|&(p, c)| norm(sub(f[c], f[p])))
                .collect()
        })
        .collect())
}

/// `skeleton` with every offset replaced by the mean length of that bone
/// over the frames of `motion`, e.g. a subject's own mocap recording.
pub fn measured_skeleton(motion: &Motion, skeleton: &Skeleton) -> Result<Skeleton> {
    let lengths = bone_lengths(motion, skeleton)?;
    let frames = lengths.len() as f64;
    let mut offsets = alloc::vec![0.0; skeleton.joint_count()];
    for row in &lengths {
        for (len, &(_, c)) in row.iter().zip(skeleton.traversal_order()) {
            offsets[c] += len / frames;
        }
    }
    skeleton.clone().with_offsets(offsets)
}
