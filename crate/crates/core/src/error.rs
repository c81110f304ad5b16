use std::fmt;

/// Which combination path detected a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinationCase {
    General,
    RepeatedFocus,
    EqualFocus,
    OneShared,
    Disjoint,
}

impl fmt::Display for CombinationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CombinationCase::General => "general",
            CombinationCase::RepeatedFocus => "repeated-focus",
            CombinationCase::EqualFocus => "equal-focus triplet",
            CombinationCase::OneShared => "one-shared-focus triplet",
            CombinationCase::Disjoint => "disjoint-focus triplet",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("frame has no labels")]
    EmptyFrame,
    #[error("duplicate frame label {0:?}")]
    DuplicateLabel(String),
    #[error("frame has {size} labels, limit is {limit}")]
    FrameTooLarge { size: usize, limit: usize },
    #[error("frame has {size} labels, at least {min} required")]
    FrameTooSmall { size: usize, min: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("operands are defined over different frames")]
    FrameMismatch,
    #[error("subset {bits:#x} is not contained in a frame of size {size}")]
    SubsetOutOfFrame { bits: u32, size: usize },
    #[error("element index {index} out of range for frame of size {size}")]
    IndexOutOfFrame { index: usize, size: usize },
    #[error("invalid mass assignment: {0}")]
    InvalidMass(String),
    #[error("total conflict under the {case} rule (conflict {conflict})")]
    NonCombinable {
        case: CombinationCase,
        conflict: f64,
    },
    #[error("combination failed at step {step}: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("nothing to combine")]
    EmptyInput,
    #[error("dichotomous functions do not share a focus")]
    MixedFocus,
    #[error("triplet focus pattern mismatch: expected {expected}, got {found} shared singletons")]
    OverlapMismatch {
        expected: &'static str,
        found: usize,
    },
    #[error("approximate combination broke down: {0}")]
    ApproximationBreakdown(String),
    #[error("invalid scores: {0}")]
    InvalidScores(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no label for item {0:?}")]
    MissingLabel(String),
    #[error("oracle refuses frame size {size}; cap is {cap}")]
    OracleCap { size: usize, cap: usize },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::StepFailed {
            step,
            source: Box::new(self),
        }
    }

    /// True when this error (or the step failure it wraps) is a non-combinability verdict.
    pub fn is_non_combinable(&self) -> bool {
        match self {
            Error::NonCombinable { .. } => true,
            Error::StepFailed { source, .. } => source.is_non_combinable(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
