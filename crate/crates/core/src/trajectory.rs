use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::history::{EventRecord, History};
use crate::rng::RngStream;
use crate::system::{Observe, ProcessSystem};

/// Simulation window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpan {
    pub start: f64,
    pub end: f64,
}

impl TimeSpan {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && start >= 0.0) {
            return Err(Error::Domain("span start must be finite and non-negative"));
        }
        if !(end > start) {
            return Err(Error::Domain("span end must exceed its start"));
        }
        Ok(Self { start, end })
    }

    /// `[0, horizon)`.
    pub fn horizon(horizon: f64) -> Result<Self> {
        Self::new(0.0, horizon)
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SavePolicy {
    /// Start, after every event, and the end of the span.
    #[default]
    EveryEvent,
    /// `start + k·dt` for every `k` with `start + k·dt ≤ end`.
    Grid { dt: f64 },
    /// Start and end only.
    Endpoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub state: Vec<f64>,
}

/// Per-run counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diagnostics {
    /// Thinning candidates inside the span that reached the acceptance test.
    pub candidates_proposed: u64,
    pub candidates_rejected: u64,
    /// Proposals that ran past their validity window.
    pub window_expiries: u64,
    pub rate_evaluations: u64,
    /// Calls to the upper bound (one per proposal).
    pub bound_evaluations: u64,
    /// Unit-exponential draws.
    pub exp_draws: u64,
}

impl Diagnostics {
    /// `1 − events / upper-bound calls`, or `None` when no bound was used.
    pub fn rejection_rate(&self, events: usize) -> Option<f64> {
        if self.bound_evaluations == 0 {
            None
        } else {
            Some(1.0 - events as f64 / self.bound_evaluations as f64)
        }
    }

    pub fn merge(&mut self, other: &Diagnostics) {
        self.candidates_proposed += other.candidates_proposed;
        self.candidates_rejected += other.candidates_rejected;
        self.window_expiries += other.window_expiries;
        self.rate_evaluations += other.rate_evaluations;
        self.bound_evaluations += other.bound_evaluations;
        self.exp_draws += other.exp_draws;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub events: History,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Diagnostics,
    pub seed: u64,
    pub span: TimeSpan,
}

impl Trajectory {
    pub fn rejection_rate(&self) -> Option<f64> {
        self.diagnostics.rejection_rate(self.events.len())
    }

    pub fn counts(&self, m: usize) -> Vec<usize> {
        self.events.counts(m)
    }
}

struct Recorder {
    policy: SavePolicy,
    span: TimeSpan,
    next_grid: u64,
    snapshots: Vec<Snapshot>,
}

impl Recorder {
    fn grid_time(&self, k: u64) -> f64 {
        match self.policy {
            SavePolicy::Grid { dt } => self.span.start + k as f64 * dt,
            _ => f64::INFINITY,
        }
    }

    fn push(&mut self, time: f64, state: Vec<f64>) {
        self.snapshots.push(Snapshot { time, state });
    }

    fn flush_grid(&mut self, before: f64, inclusive: bool, state: &dyn Fn() -> Vec<f64>) {
        loop {
            let g = self.grid_time(self.next_grid);
            let due = if inclusive { g <= before } else { g < before };
            if !(due && g <= self.span.end) {
                break;
            }
            self.push(g, state());
            self.next_grid += 1;
        }
    }
}

/// Mutable bookkeeping shared by all simulators.
pub(crate) struct Run<S> {
    pub state: S,
    pub history: History,
    pub diag: Diagnostics,
    recorder: Recorder,
    ticks: u32,
}

impl<S: Clone + Observe> Run<S> {
    pub fn start(system: &ProcessSystem<S>, span: TimeSpan, policy: SavePolicy) -> Result<Self> {
        if let SavePolicy::Grid { dt } = policy {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Domain("grid spacing must be positive and finite"));
            }
        }
        let state = system.initial_state().clone();
        let mut recorder = Recorder {
            policy,
            span,
            next_grid: 0,
            snapshots: Vec::new(),
        };
        match policy {
            SavePolicy::Grid { .. } => recorder.flush_grid(span.start, true, &|| state.observe()),
            _ => recorder.push(span.start, state.observe()),
        }
        Ok(Self {
            state,
            history: History::new(),
            diag: Diagnostics::default(),
            recorder,
            ticks: 0,
        })
    }

    /// Fire process `i` at time `t`: snapshot bookkeeping, affect, history.
    pub fn fire(&mut self, system: &ProcessSystem<S>, i: usize, t: f64, rng: &mut RngStream) -> Result<()> {
        let Run {
            state,
            history,
            recorder,
            ..
        } = self;
        if matches!(recorder.policy, SavePolicy::Grid { .. }) {
            let s = &*state;
            recorder.flush_grid(t, false, &|| s.observe());
        }
        let mark = system.process(i)?.affect(state, t, history, rng);
        let mut ev = EventRecord::new(t, i);
        ev.mark = mark;
        history.record(ev)?;
        if matches!(recorder.policy, SavePolicy::EveryEvent) {
            recorder.push(t, state.observe());
        }
        Ok(())
    }

    /// Poll `interrupt` on every 256th call.
    pub fn tick(&mut self, interrupt: &dyn crate::simulate::Interrupt) -> Result<()> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(256) && interrupt.should_stop() {
            return Err(Error::Interrupted);
        }
        Ok(())
    }

    pub fn finish(mut self, span: TimeSpan, seed: u64) -> Trajectory {
        let state = &self.state;
        match self.recorder.policy {
            SavePolicy::Grid { .. } => self.recorder.flush_grid(span.end, true, &|| state.observe()),
            _ => {
                let obs = state.observe();
                self.recorder.push(span.end, obs);
            }
        }
        Trajectory {
            events: self.history,
            snapshots: self.recorder.snapshots,
            diagnostics: self.diag,
            seed,
            span,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_validation() {
        assert!(TimeSpan::new(0.0, 1.0).is_ok());
        assert!(TimeSpan::new(1.0, 1.0).is_err());
        assert!(TimeSpan::new(-1.0, 1.0).is_err());
        assert!(TimeSpan::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn rejection_rate_definition() {
        let d = Diagnostics {
            bound_evaluations: 100,
            ..Default::default()
        };
        assert_eq!(d.rejection_rate(8), Some(0.92));
        assert_eq!(Diagnostics::default().rejection_rate(3), None);
    }
}
