use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("parameter error: {0}")]
    Param(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("retry budget of {budget} attempts exhausted: {what}")]
    RetryExhausted { budget: usize, what: String },
    #[error("{0}")]
    Stage(Box<StageFailure>),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("s(G) is undefined: {0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl fmt::Display, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn stage(stage: Stage, witness: impl Into<String>) -> Self {
        Error::Stage(Box::new(StageFailure {
            stage,
            witness: witness.into(),
            report: None,
        }))
    }
}

/// Pipeline stage names, in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Partition,
    Labels,
    InitialWeights,
    ResidualWeights,
    UnionPass,
    Separation,
    Finalize,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Partition => "partition",
            Stage::Labels => "labels",
            Stage::InitialWeights => "initial-weights",
            Stage::ResidualWeights => "residual-weights",
            Stage::UnionPass => "union-pass",
            Stage::Separation => "separation",
            Stage::Finalize => "finalize",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A stage that could not complete, with the instantiated inequality or
/// threshold that blocked it.
#[derive(Debug, Clone)]
pub struct StageFailure {
    pub stage: Stage,
    pub witness: String,
    pub report: Option<crate::report::ConditionReport>,
}

impl fmt::Display for StageFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {} failed: {}", self.stage, self.witness)
    }
}
