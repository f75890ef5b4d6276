//! Exact simulation of evolutionary (temporal) point processes.
//!
//! A point process is described by one or more conditional intensities
//! `λᵢ*(t)` that may depend on the full event history. Four families of
//! exact samplers share the same [`ProcessSystem`] description:
//!
//! * [`inverse`]: draw unit exponentials in compensator time and map them back
//!   to model time by root finding or by an ODE time change.
//! * [`thinning`]: propose from a local upper bound and accept with probability
//!   `λ*/B̄*`; the constant-rate degenerate case is the direct method.
//! * [`queuing`]: one candidate per process in an indexed priority queue,
//!   thinned in step with the main loop (`Coevolve`), plus the first-reaction
//!   and next-reaction degenerate modes.
//! * [`homogeneous`]: the elementary Poisson draws the others build on.
//!
//! [`hawkes`] provides compound Hawkes models in brute-force and recursive
//! form and [`validation`] holds the time-rescaling diagnostics used to check
//! every simulator.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// NaN-rejecting `!(x > 0.0)` guards and full-precision quadrature nodes are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod graph;
pub mod hawkes;
pub mod history;
pub mod homogeneous;
pub mod inverse;
pub mod queuing;
pub mod rng;
pub mod simulate;
pub mod system;
pub mod thinning;
pub mod trajectory;
pub mod validation;

pub use error::{Error, Result};
pub use graph::DependencyGraph;
pub use history::{EventRecord, History};
pub use rng::RngStream;
pub use simulate::{simulate, Interrupt, Method, NeverInterrupt, SimOptions};
pub use inverse::{InverseConfig, InverseMethod};
pub use queuing::CoevolveOptions;
pub use system::{IntensitySpec, Observe, ProcessSystem, RateBounds};
pub use trajectory::{Diagnostics, SavePolicy, Snapshot, TimeSpan, Trajectory};
