//! Queue-based simulation: every process keeps one candidate in an indexed
//! priority queue and is thinned in step with the main loop (`Coevolve`).
//! For rates that are constant between jumps this reduces to the next
//! reaction method; the first-reaction method is provided for comparison.

pub mod queue;

use alloc::vec::Vec;

pub use queue::{CandidateQueue, QueueEntry};

use crate::error::{Error, Result};
use crate::history::History;
use crate::homogeneous::sample_unit_exponential;
use crate::rng::RngStream;
use crate::simulate::Interrupt;
use crate::system::{Observe, ProcessSystem, RateBounds};
use crate::thinning::{candidate_from_draw, check_bound, Candidate};
use crate::trajectory::{Diagnostics, Run, SavePolicy, TimeSpan, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoevolveOptions {
    /// Rescale the unused residual of constant-rate neighbours instead of
    /// drawing a fresh exponential.
    pub reuse_samples: bool,
}

/// Entry for process `i` proposed at `t` under `bounds`, given a unit
/// exponential `e`. Expiry gives `t + L*` with `accepted = false`.
pub fn candidate_entry(i: usize, t: f64, bounds: RateBounds, e: f64) -> QueueEntry {
    let (candidate_time, accepted) = if bounds.upper == 0.0 && bounds.interval == f64::INFINITY {
        (f64::INFINITY, true)
    } else {
        match candidate_from_draw(t, bounds, e) {
            Candidate::Expired(x) => (x, false),
            Candidate::Proposed(x) => (x, true),
        }
    };
    QueueEntry {
        candidate_time,
        process: i,
        upper: bounds.upper,
        lower: bounds.lower,
        accepted,
    }
}

/// Evaluate the bounds of process `i` at `t` and propose its next candidate.
pub fn queue_time<S>(
    system: &ProcessSystem<S>,
    i: usize,
    state: &S,
    history: &History,
    t: f64,
    rng: &mut RngStream,
    diag: &mut Diagnostics,
) -> Result<QueueEntry> {
    if !t.is_finite() {
        return Err(Error::Domain("proposal time must be finite"));
    }
    let bounds = system.process(i)?.bounds(state, t, history).map_err(|e| e.at(Some(i), t))?;
    diag.bound_evaluations += 1;
    let e = if bounds.upper > 0.0 {
        diag.exp_draws += 1;
        sample_unit_exponential(rng)
    } else {
        f64::INFINITY
    };
    Ok(candidate_entry(i, t, bounds, e))
}

/// Gibson–Bruck rescaling of an unfired constant-rate candidate after its
/// rate changed from `old_rate` to `new_rate` at time `t`.
pub fn reuse_unused_sample(entry: QueueEntry, old_rate: f64, new_rate: f64, t: f64) -> QueueEntry {
    if old_rate == new_rate {
        return entry;
    }
    let candidate_time = if new_rate > 0.0 {
        t + (entry.candidate_time - t) * (old_rate / new_rate)
    } else {
        f64::INFINITY
    };
    QueueEntry {
        candidate_time,
        upper: new_rate,
        lower: new_rate,
        ..entry
    }
}

/// Synced queuing with thinning. Accepted events re-propose the firing
/// process and its dependents from the current time; rejections and window
/// expiries re-propose only the popped process.
pub fn simulate_coevolve<S: Clone + Observe>(
    system: &ProcessSystem<S>,
    span: TimeSpan,
    rng: &mut RngStream,
    opts: CoevolveOptions,
    policy: SavePolicy,
    interrupt: &dyn Interrupt,
) -> Result<Trajectory> {
    let m = system.len();
    if let Some(k) = system.processes().iter().position(|p| !p.has_bounds()) {
        return Err(Error::Unsupported {
            process: k,
            reason: "queuing needs upper bounds and rate intervals",
        });
    }
    let mut run = Run::start(system, span, policy)?;
    let mut initial = Vec::with_capacity(m);
    for i in 0..m {
        initial.push(queue_time(system, i, &run.state, &run.history, span.start, rng, &mut run.diag)?);
    }
    let mut queue = CandidateQueue::new(initial)?;

    loop {
        run.tick(interrupt)?;
        let top = *queue.peek();
        let t = top.candidate_time;
        if !(t < span.end) {
            break;
        }
        let i = top.process;
        if !top.accepted {
            run.diag.window_expiries += 1;
            let e = queue_time(system, i, &run.state, &run.history, t, rng, &mut run.diag)?;
            queue.update(e)?;
            continue;
        }
        run.diag.candidates_proposed += 1;
        let v = rng.uniform() * top.upper;
        let accept = v <= top.lower || {
            let rate = system.process(i)?.rate(&run.state, t, &run.history).map_err(|e| e.at(Some(i), t))?;
            run.diag.rate_evaluations += 1;
            if cfg!(debug_assertions) {
                check_bound(t, rate, RateBounds::new(top.upper, top.lower, f64::INFINITY)).map_err(|e| e.at(Some(i), t))?;
            }
            v <= rate
        };
        if !accept {
            run.diag.candidates_rejected += 1;
            let e = queue_time(system, i, &run.state, &run.history, t, rng, &mut run.diag)?;
            queue.update(e)?;
            continue;
        }

        run.fire(system, i, t, rng)?;
        for &j in system.graph().update_set(i)? {
            let entry = match queue.get(j).copied() {
                Some(old)
                    if opts.reuse_samples
                        && j != i
                        && system.processes()[j].is_constant_between_jumps()
                        && old.upper > 0.0
                        && old.candidate_time.is_finite() =>
                {
                    let new_rate = system.processes()[j].rate(&run.state, t, &run.history).map_err(|e| e.at(Some(j), t))?;
                    run.diag.bound_evaluations += 1;
                    reuse_unused_sample(old, old.upper, new_rate, t)
                }
                _ => queue_time(system, j, &run.state, &run.history, t, rng, &mut run.diag)?,
            };
            queue.update(entry)?;
        }
    }
    Ok(run.finish(span, rng.seed()))
}

/// First-reaction method: after every event draw a fresh `Exp(λᵢ)` for each
/// process and fire the earliest.
pub fn simulate_first_reaction<S: Clone + Observe>(
    system: &ProcessSystem<S>,
    span: TimeSpan,
    rng: &mut RngStream,
    policy: SavePolicy,
    interrupt: &dyn Interrupt,
) -> Result<Trajectory> {
    system.require_constant()?;
    let mut run = Run::start(system, span, policy)?;
    let mut t = span.start;
    loop {
        run.tick(interrupt)?;
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, p) in system.processes().iter().enumerate() {
            let rate = p.rate(&run.state, t, &run.history).map_err(|e| e.at(Some(i), t))?;
            run.diag.rate_evaluations += 1;
            if rate > 0.0 {
                run.diag.exp_draws += 1;
                let c = t + sample_unit_exponential(rng) / rate;
                if c < best.0 {
                    best = (c, i);
                }
            }
        }
        let (next, i) = best;
        if !(next < span.end) {
            break;
        }
        run.fire(system, i, next, rng)?;
        t = next;
    }
    Ok(run.finish(span, rng.seed()))
}
