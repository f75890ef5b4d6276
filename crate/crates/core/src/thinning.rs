//! Ogata-style thinning with upper/lower bounds and validity windows, and the
//! direct (Gillespie) method for rates that are constant between jumps.

use alloc::vec;

use crate::error::{Error, Result};
use crate::history::History;
use crate::homogeneous::sample_unit_exponential;
use crate::inverse::Target;
use crate::rng::RngStream;
use crate::simulate::Interrupt;
use crate::system::{pick_weighted, Observe, ProcessSystem, RateBounds};
use crate::trajectory::{Diagnostics, Run, SavePolicy, TimeSpan, Trajectory};

/// Relative slack allowed before a rate above its upper bound is reported.
const BOUND_SLACK: f64 = 1e-9;

/// Outcome of one thinning iteration from time `t` under frozen bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Candidate {
    /// `u > L*`: the window expired, restart at `t + L*`.
    Expired(f64),
    /// Candidate time still awaiting the `v`-test.
    Proposed(f64),
}

/// Exponential proposal under `bounds` from `t`, given a unit exponential
/// `e`. `B̄* = 0` is treated as `u = ∞`.
pub fn candidate_from_draw(t: f64, bounds: RateBounds, e: f64) -> Candidate {
    let u = if bounds.upper > 0.0 { e / bounds.upper } else { f64::INFINITY };
    if u > bounds.interval {
        Candidate::Expired(t + bounds.interval)
    } else {
        Candidate::Proposed(t + u)
    }
}

/// Error if `rate` exceeds the certified `upper` beyond rounding slack.
pub(crate) fn check_bound(time: f64, rate: f64, bounds: RateBounds) -> Result<()> {
    if rate > bounds.upper * (1.0 + BOUND_SLACK) + f64::MIN_POSITIVE {
        return Err(Error::BoundViolation {
            time,
            rate,
            lower: bounds.lower,
            upper: bounds.upper,
        });
    }
    Ok(())
}

fn target_bounds<S>(system: &ProcessSystem<S>, target: Target, state: &S, history: &History, t: f64) -> Result<RateBounds> {
    let procs = match target {
        Target::Superposed => system.processes(),
        Target::Process(i) => core::slice::from_ref(system.process(i)?),
    };
    let mut b = RateBounds::new(0.0, 0.0, f64::INFINITY);
    for p in procs {
        b = b.superpose(p.bounds(state, t, history)?);
    }
    Ok(b)
}

fn target_rate<S>(system: &ProcessSystem<S>, target: Target, state: &S, history: &History, t: f64) -> Result<f64> {
    match target {
        Target::Superposed => system.processes().iter().try_fold(0.0, |acc, p| Ok(acc + p.rate(state, t, history)?)),
        Target::Process(i) => system.process(i)?.rate(state, t, history),
    }
}

/// Next accepted event time of `target` after `t`, or a value `≥ horizon`.
///
/// Bounds are frozen per iteration. Acceptance happens when `v ≤ B̲*` (rate
/// not evaluated) or `v ≤ λ*(t+u)`; on window expiry time advances by `L*`.
#[allow(clippy::too_many_arguments)]
pub fn time_via_thinning<S>(
    system: &ProcessSystem<S>,
    target: Target,
    state: &S,
    history: &History,
    mut t: f64,
    horizon: f64,
    rng: &mut RngStream,
    diag: &mut Diagnostics,
) -> Result<f64> {
    let n_rates = match target {
        Target::Superposed => system.len() as u64,
        Target::Process(_) => 1,
    };
    while t < horizon {
        let bounds = target_bounds(system, target, state, history, t)?;
        diag.bound_evaluations += 1;
        if bounds.upper == 0.0 && bounds.interval == f64::INFINITY {
            return Ok(horizon);
        }
        let e = if bounds.upper > 0.0 {
            diag.exp_draws += 1;
            sample_unit_exponential(rng)
        } else {
            f64::INFINITY
        };
        let cand = match candidate_from_draw(t, bounds, e) {
            Candidate::Expired(next) => {
                diag.window_expiries += 1;
                t = next;
                continue;
            }
            Candidate::Proposed(c) => c,
        };
        if cand >= horizon {
            return Ok(cand);
        }
        diag.candidates_proposed += 1;
        let v = rng.uniform() * bounds.upper;
        if v <= bounds.lower {
            return Ok(cand);
        }
        let rate = target_rate(system, target, state, history, cand)?;
        diag.rate_evaluations += n_rates;
        if cfg!(debug_assertions) {
            check_bound(cand, rate, bounds)?;
        }
        if v <= rate {
            return Ok(cand);
        }
        diag.candidates_rejected += 1;
        t = cand;
    }
    Ok(t)
}

/// Thinning simulation of the superposed process; the firing sub-process is
/// chosen with probability `λᵢ*/λ*` at the accepted time.
pub fn simulate_thinning<S: Clone + Observe>(
    system: &ProcessSystem<S>,
    span: TimeSpan,
    rng: &mut RngStream,
    policy: SavePolicy,
    interrupt: &dyn Interrupt,
) -> Result<Trajectory> {
    let m = system.len();
    let mut run = Run::start(system, span, policy)?;
    let mut weights = vec![0.0; m];
    let mut t = span.start;
    loop {
        run.tick(interrupt)?;
        let next = time_via_thinning(system, Target::Superposed, &run.state, &run.history, t, span.end, rng, &mut run.diag)
            .map_err(|e| e.at(None, t))?;
        if next >= span.end {
            break;
        }
        let total = system.rates_into(&run.state, next, &run.history, &mut weights)?;
        run.diag.rate_evaluations += m as u64;
        let i = pick_weighted(&weights, rng.uniform() * total)
            .ok_or(Error::Domain("accepted candidate with zero intensity").at(None, next))?;
        run.fire(system, i, next, rng)?;
        t = next;
    }
    Ok(run.finish(span, rng.seed()))
}

/// Direct method: `Δt ~ Exp(Σλᵢ)`, firing process by cumulative-sum search,
/// every rate re-evaluated after each event.
pub fn simulate_direct<S: Clone + Observe>(
    system: &ProcessSystem<S>,
    span: TimeSpan,
    rng: &mut RngStream,
    policy: SavePolicy,
    interrupt: &dyn Interrupt,
) -> Result<Trajectory> {
    system.require_constant()?;
    let m = system.len();
    let mut run = Run::start(system, span, policy)?;
    let mut rates = vec![0.0; m];
    let mut t = span.start;
    loop {
        run.tick(interrupt)?;
        let total = system.rates_into(&run.state, t, &run.history, &mut rates)?;
        run.diag.rate_evaluations += m as u64;
        if total <= 0.0 {
            break;
        }
        let next = t + sample_unit_exponential(rng) / total;
        run.diag.exp_draws += 1;
        if next >= span.end {
            break;
        }
        let i = pick_weighted(&rates, rng.uniform() * total).expect("positive total rate");
        run.fire(system, i, next, rng)?;
        t = next;
    }
    Ok(run.finish(span, rng.seed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DependencyGraph;
    use crate::simulate::NeverInterrupt;
    use crate::system::IntensitySpec;

    type St = Vec<f64>;

    fn noop(_: &mut St, _: f64, _: &History, _: &mut RngStream) -> Option<u64> {
        None
    }

    fn constant_system(rates: &[f64]) -> ProcessSystem<St> {
        let procs = rates
            .iter()
            .map(|&r| IntensitySpec::constant(move |_: &St, _, _: &History| r, noop))
            .collect();
        ProcessSystem::new(procs, DependencyGraph::isolated(rates.len()), vec![]).unwrap()
    }

    #[test]
    fn candidate_branches() {
        let b = RateBounds::new(1.0, 0.0, 0.1);
        assert_eq!(candidate_from_draw(2.0, b, 0.5), Candidate::Expired(2.1));
        assert_eq!(candidate_from_draw(2.0, b, 0.05), Candidate::Proposed(2.05));
        let zero = RateBounds::new(0.0, 0.0, 0.5);
        assert_eq!(candidate_from_draw(0.0, zero, 1.0), Candidate::Expired(0.5));
    }

    #[test]
    fn constant_rate_accepts_every_candidate() {
        let sys = constant_system(&[0.25]);
        let mut rng = RngStream::new(1);
        let tr = simulate_thinning(&sys, TimeSpan::horizon(2000.0).unwrap(), &mut rng, SavePolicy::Endpoints, &NeverInterrupt).unwrap();
        assert_eq!(tr.diagnostics.candidates_proposed as usize, tr.events.len());
        assert_eq!(tr.diagnostics.candidates_rejected, 0);
    }

    #[test]
    fn doubled_bound_halves_acceptance() {
        let p: IntensitySpec<St> =
            IntensitySpec::variable(|_: &St, _, _: &History| 1.0, |_: &St, _, _: &History| RateBounds::upper(2.0, f64::INFINITY), noop);
        let sys = ProcessSystem::new(vec![p], DependencyGraph::isolated(1), vec![]).unwrap();
        let mut rng = RngStream::new(7);
        let mut diag = Diagnostics::default();
        let mut t = 0.0;
        while diag.candidates_proposed < 100_000 {
            t = time_via_thinning(&sys, Target::Superposed, &vec![], &History::new(), t, f64::INFINITY, &mut rng, &mut diag).unwrap();
        }
        let acc = 1.0 - diag.candidates_rejected as f64 / diag.candidates_proposed as f64;
        assert!((acc - 0.5).abs() < 0.02, "acceptance {acc}");
    }

    #[test]
    fn zero_rate_rejects_everything() {
        let p: IntensitySpec<St> =
            IntensitySpec::variable(|_: &St, _, _: &History| 0.0, |_: &St, _, _: &History| RateBounds::upper(1.0, f64::INFINITY), noop);
        let sys = ProcessSystem::new(vec![p], DependencyGraph::isolated(1), vec![]).unwrap();
        let mut rng = RngStream::new(3);
        let mut diag = Diagnostics::default();
        let t = time_via_thinning(&sys, Target::Process(0), &vec![], &History::new(), 0.0, 50.0, &mut rng, &mut diag).unwrap();
        assert!(t >= 50.0);
        assert_eq!(diag.candidates_rejected, diag.candidates_proposed);
        assert!(diag.candidates_proposed > 10);
    }

    #[test]
    fn zero_upper_and_infinite_window_is_quiet() {
        let sys = constant_system(&[0.0]);
        let mut rng = RngStream::new(3);
        let mut diag = Diagnostics::default();
        let t = time_via_thinning(&sys, Target::Superposed, &vec![], &History::new(), 0.0, 5.0, &mut rng, &mut diag).unwrap();
        assert_eq!(t, 5.0);
    }

    #[test]
    #[cfg(debug_assertions)]
    fn violated_bound_is_reported() {
        let p: IntensitySpec<St> =
            IntensitySpec::variable(|_: &St, _, _: &History| 3.0, |_: &St, _, _: &History| RateBounds::upper(1.0, f64::INFINITY), noop);
        let sys = ProcessSystem::new(vec![p], DependencyGraph::isolated(1), vec![]).unwrap();
        let mut rng = RngStream::new(3);
        let mut diag = Diagnostics::default();
        let err = time_via_thinning(&sys, Target::Superposed, &vec![], &History::new(), 0.0, 1e9, &mut rng, &mut diag).unwrap_err();
        assert!(matches!(err, Error::BoundViolation { .. }));
    }

    #[test]
    fn direct_firing_fractions() {
        let sys = constant_system(&[1.0, 3.0]);
        let mut rng = RngStream::new(11);
        let tr = simulate_direct(&sys, TimeSpan::horizon(25_000.0).unwrap(), &mut rng, SavePolicy::Endpoints, &NeverInterrupt).unwrap();
        let c = tr.counts(2);
        let n = (c[0] + c[1]) as f64;
        assert!(n > 1e5 * 0.9);
        assert!((c[0] as f64 / n - 0.25).abs() < 0.01);
    }

    #[test]
    fn direct_requires_constant_rates() {
        let p: IntensitySpec<St> =
            IntensitySpec::variable(|_: &St, _, _: &History| 1.0, |_: &St, _, _: &History| RateBounds::upper(1.0, 1.0), noop);
        let sys = ProcessSystem::new(vec![p], DependencyGraph::isolated(1), vec![]).unwrap();
        let mut rng = RngStream::new(1);
        let err = simulate_direct(&sys, TimeSpan::horizon(1.0).unwrap(), &mut rng, SavePolicy::Endpoints, &NeverInterrupt).unwrap_err();
        assert!(matches!(err, Error::Unsupported { .. }));
    }

    #[test]
    fn zero_total_rate_gives_empty_trajectory() {
        let sys = constant_system(&[0.0, 0.0]);
        let mut rng = RngStream::new(1);
        let tr = simulate_direct(&sys, TimeSpan::horizon(10.0).unwrap(), &mut rng, SavePolicy::Endpoints, &NeverInterrupt).unwrap();
        assert!(tr.events.is_empty());
    }
}
