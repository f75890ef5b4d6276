//! Process descriptions consumed by every simulator.
//!
//! Evaluation conventions:
//!
//! * `rate(state, t, history)` is the left-continuous intensity `λ*(t)`: it
//!   may only depend on events strictly before `t`.
//! * `bounds(state, t, history)` certifies `lower ≤ λ*(t + u) ≤ upper` for
//!   `0 < u ≤ interval`, taking into account events recorded exactly at `t`.
//! * `compensator(state, t0, t1, history)` is `∫_{t0}^{t1} λ*(u) du` under the
//!   assumption that no further event occurs after `t0`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::history::History;
use crate::rng::RngStream;

pub type RateFn<S> = Box<dyn Fn(&S, f64, &History) -> f64 + Send + Sync>;
pub type BoundsFn<S> = Box<dyn Fn(&S, f64, &History) -> RateBounds + Send + Sync>;
pub type CompensatorFn<S> = Box<dyn Fn(&S, f64, f64, &History) -> f64 + Send + Sync>;
/// Applies the transition of a fired process and optionally returns a mark.
pub type AffectFn<S> =
    Box<dyn Fn(&mut S, f64, &History, &mut RngStream) -> Option<u64> + Send + Sync>;
pub type VectorFieldFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Local boundedness certificate `(B̄*, B̲*, L*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub upper: f64,
    pub lower: f64,
    pub interval: f64,
}

impl RateBounds {
    pub fn new(upper: f64, lower: f64, interval: f64) -> Self {
        Self {
            upper,
            lower,
            interval,
        }
    }

    /// Upper bound only; the lower bound defaults to zero.
    pub fn upper(upper: f64, interval: f64) -> Self {
        Self::new(upper, 0.0, interval)
    }

    /// Degenerate certificate of a rate that is constant until the next jump.
    pub fn constant(rate: f64) -> Self {
        Self::new(rate, rate, f64::INFINITY)
    }

    pub(crate) fn check(self) -> Result<Self> {
        let ok = self.upper >= 0.0
            && self.upper.is_finite()
            && self.lower >= 0.0
            && self.lower <= self.upper
            && self.interval > 0.0;
        if ok {
            Ok(self)
        } else {
            Err(Error::Domain(
                "bounds need 0 <= lower <= upper < inf and interval > 0",
            ))
        }
    }

    /// Sum of per-process certificates: bounds add, windows shrink to the
    /// shortest one.
    pub fn superpose(self, other: Self) -> Self {
        Self::new(
            self.upper + other.upper,
            self.lower + other.lower,
            self.interval.min(other.interval),
        )
    }
}

/// One sub-process: its intensity, its local bounds and its transition.
pub struct IntensitySpec<S> {
    rate: RateFn<S>,
    bounds: Option<BoundsFn<S>>,
    compensator: Option<CompensatorFn<S>>,
    affect: AffectFn<S>,
    vector_field: Option<VectorFieldFn>,
    constant_between_jumps: bool,
}

impl<S> IntensitySpec<S> {
    /// A process whose rate only changes when some process fires. Bounds are
    /// synthesized as `B̄* = B̲* = λ`, `L* = ∞` and the vector field is zero.
    pub fn constant<R, A>(rate: R, affect: A) -> Self
    where
        R: Fn(&S, f64, &History) -> f64 + Send + Sync + 'static,
        A: Fn(&mut S, f64, &History, &mut RngStream) -> Option<u64> + Send + Sync + 'static,
    {
        Self {
            rate: Box::new(rate),
            bounds: None,
            compensator: None,
            affect: Box::new(affect),
            vector_field: None,
            constant_between_jumps: true,
        }
    }

    /// A process whose rate varies between jumps; thinning and queuing need
    /// the bound certificate.
    pub fn variable<R, B, A>(rate: R, bounds: B, affect: A) -> Self
    where
        R: Fn(&S, f64, &History) -> f64 + Send + Sync + 'static,
        B: Fn(&S, f64, &History) -> RateBounds + Send + Sync + 'static,
        A: Fn(&mut S, f64, &History, &mut RngStream) -> Option<u64> + Send + Sync + 'static,
    {
        Self {
            rate: Box::new(rate),
            bounds: Some(Box::new(bounds)),
            compensator: None,
            affect: Box::new(affect),
            vector_field: None,
            constant_between_jumps: false,
        }
    }

    /// Closed-form forward compensator, used instead of quadrature.
    pub fn with_compensator<C>(mut self, c: C) -> Self
    where
        C: Fn(&S, f64, f64, &History) -> f64 + Send + Sync + 'static,
    {
        self.compensator = Some(Box::new(c));
        self
    }

    /// Vector field `g` with `dλ*/dt = g(λ*)` between jumps.
    pub fn with_vector_field<G>(mut self, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.vector_field = Some(Box::new(g));
        self
    }

    pub fn is_constant_between_jumps(&self) -> bool {
        self.constant_between_jumps
    }

    pub fn has_bounds(&self) -> bool {
        self.constant_between_jumps || self.bounds.is_some()
    }

    pub fn has_vector_field(&self) -> bool {
        self.constant_between_jumps || self.vector_field.is_some()
    }

    pub fn has_compensator(&self) -> bool {
        self.constant_between_jumps || self.compensator.is_some()
    }

    pub fn rate(&self, state: &S, t: f64, history: &History) -> Result<f64> {
        let value = (self.rate)(state, t, history);
        if value >= 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::InvalidRate { time: t, value })
        }
    }

    pub fn bounds(&self, state: &S, t: f64, history: &History) -> Result<RateBounds> {
        match &self.bounds {
            Some(b) => b(state, t, history).check(),
            None if self.constant_between_jumps => {
                Ok(RateBounds::constant(self.rate(state, t, history)?))
            }
            None => Err(Error::Domain("variable-rate process without bounds")),
        }
    }

    /// `∫_{t0}^{t1} λ*` when a closed form is available.
    pub fn closed_compensator(&self, state: &S, t0: f64, t1: f64, history: &History) -> Option<f64> {
        if let Some(c) = &self.compensator {
            return Some(c(state, t0, t1, history));
        }
        if self.constant_between_jumps {
            return Some((self.rate)(state, t0, history) * (t1 - t0));
        }
        None
    }

    pub fn vector_field(&self, lambda: f64) -> Option<f64> {
        match &self.vector_field {
            Some(g) => Some(g(lambda)),
            None if self.constant_between_jumps => Some(0.0),
            None => None,
        }
    }

    pub fn affect(&self, state: &mut S, t: f64, history: &History, rng: &mut RngStream) -> Option<u64> {
        (self.affect)(state, t, history, rng)
    }
}

/// Snapshot view of a simulation state.
pub trait Observe {
    fn observe(&self) -> Vec<f64>;
}

impl Observe for Vec<f64> {
    fn observe(&self) -> Vec<f64> {
        self.clone()
    }
}

/// `M` interdependent processes sharing one state value.
pub struct ProcessSystem<S> {
    processes: Vec<IntensitySpec<S>>,
    graph: DependencyGraph,
    initial_state: S,
}

impl<S> ProcessSystem<S> {
    pub fn new(processes: Vec<IntensitySpec<S>>, graph: DependencyGraph, initial_state: S) -> Result<Self> {
        if processes.is_empty() {
            return Err(Error::EmptySystem);
        }
        if graph.len() != processes.len() {
            return Err(Error::GraphMismatch {
                graph: graph.len(),
                processes: processes.len(),
            });
        }
        Ok(Self {
            processes,
            graph,
            initial_state,
        })
    }

    pub fn len(&self) -> usize {
        self.processes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }

    pub fn processes(&self) -> &[IntensitySpec<S>] {
        &self.processes
    }

    pub fn process(&self, i: usize) -> Result<&IntensitySpec<S>> {
        self.processes.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.processes.len(),
        })
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn initial_state(&self) -> &S {
        &self.initial_state
    }

    pub fn all_constant(&self) -> bool {
        self.processes.iter().all(IntensitySpec::is_constant_between_jumps)
    }

    /// First index of a process that is not constant between jumps.
    pub(crate) fn require_constant(&self) -> Result<()> {
        match self.processes.iter().position(|p| !p.is_constant_between_jumps()) {
            Some(i) => Err(Error::Unsupported {
                process: i,
                reason: "method requires rates that are constant between jumps",
            }),
            None => Ok(()),
        }
    }

    /// Evaluate every rate into `out` and return their sum.
    pub(crate) fn rates_into(&self, state: &S, t: f64, history: &History, out: &mut [f64]) -> Result<f64> {
        let mut total = 0.0;
        for (slot, p) in out.iter_mut().zip(&self.processes) {
            *slot = p.rate(state, t, history)?;
            total += *slot;
        }
        Ok(total)
    }
}

/// Index selected by a draw `target ∈ [0, Σw)` over cumulative weights.
/// Falls back to the last positive weight when rounding pushes `target` past
/// the running sum. Returns `None` when all weights are zero.
pub(crate) fn pick_weighted(weights: &[f64], target: f64) -> Option<usize> {
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> IntensitySpec<Vec<f64>> {
        IntensitySpec::constant(|_: &Vec<f64>, _, _: &History| 1.0, |_: &mut Vec<f64>, _, _: &History, _: &mut RngStream| None)
    }

    #[test]
    fn empty_system_rejected() {
        let err = ProcessSystem::<Vec<f64>>::new(vec![], DependencyGraph::isolated(0), vec![]);
        assert!(matches!(err, Err(Error::EmptySystem)));
    }

    #[test]
    fn graph_dimension_checked() {
        let err = ProcessSystem::new(vec![unit()], DependencyGraph::isolated(2), vec![]);
        assert!(matches!(err, Err(Error::GraphMismatch { .. })));
    }

    #[test]
    fn constant_processes_synthesize_degenerate_bounds() {
        let p = unit();
        let b = p.bounds(&vec![], 0.0, &History::new()).unwrap();
        assert_eq!(b, RateBounds::constant(1.0));
        assert_eq!(p.vector_field(3.0), Some(0.0));
        assert_eq!(p.closed_compensator(&vec![], 1.0, 3.0, &History::new()), Some(2.0));
    }

    #[test]
    fn negative_rate_is_an_error() {
        let p: IntensitySpec<Vec<f64>> =
            IntensitySpec::constant(|_: &Vec<f64>, _, _: &History| -1.0, |_: &mut Vec<f64>, _, _: &History, _: &mut RngStream| None);
        assert!(matches!(p.rate(&vec![], 0.0, &History::new()), Err(Error::InvalidRate { .. })));
    }

    #[test]
    fn weighted_pick() {
        let w = [1.0, 0.0, 3.0];
        assert_eq!(pick_weighted(&w, 0.5), Some(0));
        assert_eq!(pick_weighted(&w, 1.0), Some(2));
        assert_eq!(pick_weighted(&w, 4.0), Some(2));
        assert_eq!(pick_weighted(&[0.0, 0.0], 0.0), None);
    }

    #[test]
    fn bad_bounds_rejected() {
        assert!(RateBounds::new(1.0, 2.0, 1.0).check().is_err());
        assert!(RateBounds::new(1.0, 0.0, 0.0).check().is_err());
        assert!(RateBounds::new(f64::INFINITY, 0.0, 1.0).check().is_err());
        assert!(RateBounds::new(0.0, 0.0, f64::INFINITY).check().is_ok());
    }
}
