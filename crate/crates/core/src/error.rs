use alloc::boxed::Box;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("event at t={time} precedes the last recorded event at t={last}")]
    OutOfOrder { time: f64, last: f64 },

    #[error("index {index} out of range for {len} processes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    Domain(&'static str),

    #[error("a process system needs at least one process")]
    EmptySystem,

    #[error("dependency graph has {graph} nodes but the system has {processes} processes")]
    GraphMismatch { graph: usize, processes: usize },

    #[error("non-finite or negative rate {value} at t={time}")]
    InvalidRate { time: f64, value: f64 },

    #[error("quadrature on [{t0}, {t1}] did not meet tolerance within the refinement budget")]
    ToleranceNotMet { t0: f64, t1: f64 },

    #[error("intensity {value} fell below the floor at t={time}")]
    Singularity { time: f64, value: f64 },

    #[error("ODE solver exhausted its budget of {0} steps")]
    StepBudget(usize),

    #[error("rate {rate} at t={time} escaped the declared bounds [{lower}, {upper}]")]
    BoundViolation {
        time: f64,
        rate: f64,
        lower: f64,
        upper: f64,
    },

    #[error("process {process}: {reason}")]
    Unsupported { process: usize, reason: &'static str },

    #[error("process {process:?} at t={time}: {source}")]
    Solver {
        process: Option<usize>,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("candidate queue inconsistency: {0}")]
    Queue(&'static str),

    #[error("simulation interrupted")]
    Interrupted,

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("negative transformed interval {value} for process {process}")]
    NegativeInterval { process: usize, value: f64 },

    #[error("unstable or singular excitation system")]
    Unstable,
}

impl Error {
    /// Attach the process index and model time at which a solver failed.
    pub(crate) fn at(self, process: Option<usize>, time: f64) -> Self {
        match self {
            Error::Solver { .. } | Error::Interrupted => self,
            other => Error::Solver {
                process,
                time,
                source: Box::new(other),
            },
        }
    }
}
