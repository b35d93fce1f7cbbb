//! Core algorithms for adapting a human motion predictor with motions
//! estimated from video.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. File formats,
//! the CLI and parallel sweeps live in the `hmp-adapt` crate.
//!
//! Module map:
//!
//! - [`skeleton`]: kinematic tree, static bone offsets, traversal order.
//! - [`motion`]: motion sequences, downsampling, global normalization.
//! - [`retarget`]: vertex-to-joint regression and per-frame scale fitting.
//! - [`metrics`]: MPJPE, the squared training loss, horizon evaluation.
//! - [`dct`] and [`predictor`]: a DCT-domain residual predictor trained with
//!   hand-derived gradients.
//! - [`synth`]: synthetic motion families and estimation-noise corruption.
//! - [`experiment`]: leave-one-action-out conditions and result tables.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dct;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod motion;
pub mod predictor;
pub mod retarget;
pub mod rng;
pub mod skeleton;
pub mod synth;

pub use error::{Error, Result};
pub use motion::{Motion, MotionMeta, Source};
pub use skeleton::{Pose, Skeleton};

/// Three-dimensional point or vector, millimeters.
pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    libm::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
}
