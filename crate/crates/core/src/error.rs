use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the core algorithms can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    // skeleton
    NoRoot,
    MultipleRoots { first: usize, second: usize },
    InvalidParent { joint: usize, parent: isize },
    CycleDetected { joint: usize },
    NonPositiveOffset { joint: usize, offset: f64 },
    RootOffsetNotZero { offset: f64 },
    EmptyEvalSubset,
    EvalSubsetInvalid { joint: usize },
    NameCountMismatch,

    // motion
    JointCountMismatch { expected: usize, found: usize },
    NonFiniteValue { frame: usize, joint: usize },
    EmptySequence,
    InvalidFps(f64),
    NonIntegerRatio { fps: f64, target: f64 },
    DegenerateHips { frame: usize },

    // retarget
    DimensionMismatch { expected: usize, found: usize },
    InvalidRegressor { row: usize },
    NonFiniteInput { frame: usize, joint: usize },

    // metrics
    SubsetOutOfRange { joint: usize, joints: usize },
    LengthMismatch,
    HorizonOutOfRange { frame: usize, available: usize },

    // predictor
    FrameCountMismatch { expected: usize, found: usize },
    EmptyDataset,
    NonFiniteLoss { iteration: usize, loss: f64 },
    InvalidModel(&'static str),
    InvalidConfig(&'static str),

    // experiment
    MissingAction(u32),
    MissingSubject(u32),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Error::*;
        match self {
            NoRoot => write!(f, "skeleton has no root joint"),
            MultipleRoots { first, second } => {
                write!(f, "skeleton has multiple roots: joints {first} and {second}")
            }
            InvalidParent { joint, parent } => {
                write!(f, "joint {joint} has invalid parent index {parent}")
            }
            CycleDetected { joint } => write!(f, "cycle detected through joint {joint}"),
            NonPositiveOffset { joint, offset } => {
                write!(f, "joint {joint} has non-positive offset {offset}")
            }
            RootOffsetNotZero { offset } => write!(f, "root offset must be 0, got {offset}"),
            EmptyEvalSubset => write!(f, "evaluation subset is empty"),
            EvalSubsetInvalid { joint } => {
                write!(f, "evaluation subset entry {joint} is out of range or duplicated")
            }
            NameCountMismatch => write!(f, "joint names, parents and offsets differ in length"),
            JointCountMismatch { expected, found } => {
                write!(f, "expected {expected} joints, found {found}")
            }
            NonFiniteValue { frame, joint } => {
                write!(f, "non-finite coordinate at frame {frame}, joint {joint}")
            }
            EmptySequence => write!(f, "motion has no frames"),
            InvalidFps(fps) => write!(f, "frame rate must be positive, got {fps}"),
            NonIntegerRatio { fps, target } => {
                write!(f, "{fps} fps is not an integer multiple of {target} fps")
            }
            DegenerateHips { frame } => {
                write!(f, "hip joints coincide horizontally at frame {frame}")
            }
            DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            InvalidRegressor { row } => {
                write!(f, "regressor row {row} is negative or does not sum to 1")
            }
            NonFiniteInput { frame, joint } => {
                write!(f, "non-finite input at frame {frame}, joint {joint}")
            }
            SubsetOutOfRange { joint, joints } => {
                write!(f, "subset joint {joint} out of range for {joints} joints")
            }
            LengthMismatch => write!(f, "sequences differ in frame or joint count"),
            HorizonOutOfRange { frame, available } => {
                write!(f, "horizon frame {frame} exceeds {available} predicted frames")
            }
            FrameCountMismatch { expected, found } => {
                write!(f, "expected {expected} observed frames, found {found}")
            }
            EmptyDataset => write!(f, "training dataset is empty"),
            NonFiniteLoss { iteration, loss } => {
                write!(f, "training diverged at iteration {iteration} (loss {loss})")
            }
            InvalidModel(what) => write!(f, "invalid model: {what}"),
            InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            MissingAction(a) => write!(f, "no motions for action {a}"),
            MissingSubject(s) => write!(f, "no motions for subject {s}"),
        }
    }
}

impl core::error::Error for Error {}
