//! Inverse-method simulation: draw `Δt̃ ~ Exp(1)` in compensator time and map
//! it back to model time, either by root finding on the compensator or by
//! integrating the time-change ODE (CHV, simple or full).

pub mod ode;
pub mod quadrature;

use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

pub use ode::{OdeOutcome, OdeSolverConfig};
pub use quadrature::QuadratureConfig;

use crate::error::{Error, Result};
use crate::history::History;
use crate::homogeneous::sample_unit_exponential;
use crate::rng::RngStream;
use crate::simulate::Interrupt;
use crate::system::{pick_weighted, Observe, ProcessSystem};
use crate::trajectory::{Run, SavePolicy, TimeSpan, Trajectory};

/// Intensities below this value make the `1/λ*` time change singular.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Maximum number of bracket doublings during root finding.
pub const BRACKET_DOUBLINGS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseMethod {
    RootFind,
    ChvSimple,
    ChvFull,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseConfig {
    pub quadrature: QuadratureConfig,
    pub ode: OdeSolverConfig,
    /// Absolute tolerance on `Λ*(tₙ) − Λ*(tₙ₋₁) − Δt̃`.
    pub root_tol: f64,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig::default(),
            ode: OdeSolverConfig::default(),
            root_tol: 1e-10,
        }
    }
}

/// Which intensity a next-time solver inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Process(usize),
    /// Sum of every process in the system.
    Superposed,
}

impl Target {
    fn range(self, m: usize) -> Result<core::ops::Range<usize>> {
        match self {
            Target::Superposed => Ok(0..m),
            Target::Process(i) if i < m => Ok(i..i + 1),
            Target::Process(i) => Err(Error::IndexOutOfRange { index: i, len: m }),
        }
    }
}

/// `∫_{t0}^{t1} λ*(u) du` by adaptive quadrature. Negative or non-finite rate
/// values are errors. The rate should be smooth on the window; split at
/// event times otherwise, since a jump between nodes can go undetected.
pub fn compensator<F>(mut rate: F, t0: f64, t1: f64, quad: &QuadratureConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    quadrature::integrate(
        |u| {
            let v = rate(u);
            if v >= 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidRate { time: u, value: v })
            }
        },
        t0,
        t1,
        quad,
    )
}

/// Solve `cumulative(t) = delta` for `t ≥ t_prev`, where `cumulative(t)` is
/// the non-decreasing compensator increment `Λ*(t) − Λ*(t_prev)`.
///
/// The bracket starts at `t_prev + initial_width` and doubles up to
/// [`BRACKET_DOUBLINGS`] times; the root is then polished by Illinois false
/// position with a bisection safeguard. Returns `+∞` when no root exists
/// before `horizon` or the bracket cannot be closed.
pub fn solve_compensator_root<C>(
    mut cumulative: C,
    t_prev: f64,
    delta: f64,
    initial_width: f64,
    horizon: f64,
    tol: f64,
) -> Result<f64>
where
    C: FnMut(f64) -> Result<f64>,
{
    if !(delta > 0.0) {
        return Err(Error::Domain("compensator increment must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("root tolerance must be positive"));
    }
    let mut g = |t: f64| cumulative(t).map(|c| c - delta);

    if horizon.is_finite() && g(horizon)? < 0.0 {
        return Ok(f64::INFINITY);
    }

    let mut width = if initial_width > 0.0 && initial_width.is_finite() {
        initial_width
    } else {
        1.0
    };
    let (mut lo, mut flo) = (t_prev, -delta);
    let (mut hi, mut fhi);
    let mut doublings = 0;
    loop {
        hi = t_prev + width;
        if horizon.is_finite() && hi >= horizon {
            hi = horizon;
        }
        fhi = g(hi)?;
        if libm::fabs(fhi) <= tol {
            return Ok(hi);
        }
        if fhi > 0.0 {
            break;
        }
        if hi == horizon || doublings == BRACKET_DOUBLINGS || !hi.is_finite() {
            return Ok(f64::INFINITY);
        }
        lo = hi;
        flo = fhi;
        width *= 2.0;
        doublings += 1;
    }

    let mut side = 0i8;
    let mut prev_width = hi - lo;
    for iter in 0..400 {
        let width = hi - lo;
        let mut c = (lo * fhi - hi * flo) / (fhi - flo);
        let stalled = iter > 0 && iter % 3 == 0 && width > 0.5 * prev_width;
        if stalled || !(c > lo && c < hi) {
            c = lo + 0.5 * width;
        }
        if iter % 3 == 0 {
            prev_width = width;
        }
        if !(c > lo && c < hi) {
            // Bracket is down to adjacent floats.
            return Ok(if libm::fabs(flo) < libm::fabs(fhi) { lo } else { hi });
        }
        let fc = g(c)?;
        if libm::fabs(fc) <= tol {
            return Ok(c);
        }
        if fc < 0.0 {
            lo = c;
            flo = fc;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            fhi = fc;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Time-change ODE `dt/dt̃ = 1/λ*(t)`, `t(0) = t_prev`, integrated to `delta`.
/// Returns `+∞` once `t` reaches `horizon`.
pub fn chv_simple_step<R>(mut rate: R, t_prev: f64, delta: f64, horizon: f64, ode: &OdeSolverConfig) -> Result<f64>
where
    R: FnMut(f64) -> Result<f64>,
{
    // Integrate the offset `t − t_prev` so the relative tolerance applies to
    // the gap, not to the absolute model time.
    let mut y = [0.0];
    let outcome = ode::integrate(
        |y, dy| {
            let t = eval_time(t_prev, y[0]);
            let lambda = rate(t)?;
            if !(lambda >= LAMBDA_FLOOR) {
                return Err(Error::Singularity { time: t, value: lambda });
            }
            dy[0] = 1.0 / lambda;
            Ok(())
        },
        &mut y,
        delta,
        ode,
        |y| t_prev + y[0] >= horizon,
    )?;
    Ok(match outcome {
        OdeOutcome::Stopped => f64::INFINITY,
        OdeOutcome::Completed => t_prev + y[0],
    })
}

/// Coupled time change `dλᵢ/dt̃ = gᵢ(λᵢ)/Σλ`, `dt/dt̃ = 1/Σλ` integrated to
/// `delta`. Returns the new time and intensities, or `+∞` past `horizon`.
pub fn chv_full_step<G>(
    mut field: G,
    t_prev: f64,
    lambdas_prev: &[f64],
    delta: f64,
    horizon: f64,
    ode: &OdeSolverConfig,
) -> Result<(f64, Vec<f64>)>
where
    G: FnMut(usize, f64) -> Result<f64>,
{
    let total: f64 = lambdas_prev.iter().sum();
    if !(total >= LAMBDA_FLOOR) {
        return Err(Error::Singularity {
            time: t_prev,
            value: total,
        });
    }
    let m = lambdas_prev.len();
    let mut y = vec![0.0; m + 1];
    y[1..].copy_from_slice(lambdas_prev);
    let outcome = ode::integrate(
        |y, dy| {
            let total: f64 = y[1..].iter().sum();
            if !(total >= LAMBDA_FLOOR) {
                return Err(Error::Singularity {
                    time: t_prev + y[0],
                    value: total,
                });
            }
            let inv = 1.0 / total;
            dy[0] = inv;
            for i in 0..m {
                dy[i + 1] = field(i, y[i + 1])? * inv;
            }
            Ok(())
        },
        &mut y,
        delta,
        ode,
        |y| t_prev + y[0] >= horizon,
    )?;
    match outcome {
        OdeOutcome::Stopped => Ok((f64::INFINITY, y.split_off(1))),
        OdeOutcome::Completed => {
            let t = t_prev + y[0];
            Ok((t, y.split_off(1)))
        }
    }
}

/// Model time for a rate evaluation at offset `s`; at `s = 0` use the next
/// float so events recorded at `t_prev` are included (right limit).
#[inline]
fn eval_time(t_prev: f64, s: f64) -> f64 {
    if s > 0.0 {
        t_prev + s
    } else {
        t_prev.next_up()
    }
}

/// Root-finding next time of `target` after `t_prev` for the increment `delta`.
#[allow(clippy::too_many_arguments)]
pub fn next_time_rootfind<S>(
    system: &ProcessSystem<S>,
    target: Target,
    state: &S,
    history: &History,
    t_prev: f64,
    delta: f64,
    horizon: f64,
    cfg: &InverseConfig,
) -> Result<f64> {
    let range = target.range(system.len())?;
    let procs = &system.processes()[range];
    let mut width = 1.0;
    if procs.iter().all(|p| p.has_bounds()) {
        let mut upper = 0.0;
        for p in procs {
            upper += p.bounds(state, t_prev, history)?.upper;
        }
        if upper > 0.0 {
            width = delta / upper;
        }
    }
    solve_compensator_root(
        |t| {
            let mut sum = 0.0;
            for p in procs {
                sum += match p.closed_compensator(state, t_prev, t, history) {
                    Some(c) => c,
                    None => quadrature::integrate(|u| p.rate(state, u, history), t_prev, t, &cfg.quadrature)?,
                };
            }
            Ok(sum)
        },
        t_prev,
        delta,
        width,
        horizon,
        cfg.root_tol,
    )
}

/// CHV-simple next time of `target`.
#[allow(clippy::too_many_arguments)]
pub fn next_time_chv_simple<S>(
    system: &ProcessSystem<S>,
    target: Target,
    state: &S,
    history: &History,
    t_prev: f64,
    delta: f64,
    horizon: f64,
    ode: &OdeSolverConfig,
) -> Result<f64> {
    let range = target.range(system.len())?;
    let procs = &system.processes()[range];
    chv_simple_step(
        |t| {
            let mut sum = 0.0;
            for p in procs {
                sum += p.rate(state, t, history)?;
            }
            Ok(sum)
        },
        t_prev,
        delta,
        horizon,
        ode,
    )
}

/// CHV-full next time of `target`, starting from the right-limit intensities
/// `lambdas_prev` (one per targeted process).
#[allow(clippy::too_many_arguments)]
pub fn next_time_chv_full<S>(
    system: &ProcessSystem<S>,
    target: Target,
    t_prev: f64,
    lambdas_prev: &[f64],
    delta: f64,
    horizon: f64,
    ode: &OdeSolverConfig,
) -> Result<(f64, Vec<f64>)> {
    let range = target.range(system.len())?;
    let procs = &system.processes()[range];
    if procs.len() != lambdas_prev.len() {
        return Err(Error::Domain("one starting intensity per targeted process"));
    }
    if let Some(k) = procs.iter().position(|p| !p.has_vector_field()) {
        return Err(Error::Unsupported {
            process: k,
            reason: "CHV full needs a vector field",
        });
    }
    chv_full_step(
        |i, lambda| Ok(procs[i].vector_field(lambda).unwrap_or(0.0)),
        t_prev,
        lambdas_prev,
        delta,
        horizon,
        ode,
    )
}

/// Inverse-method simulation of the superposed process on `span`, selecting
/// the firing sub-process with probability `λᵢ*(tₙ)/λ*(tₙ)`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_inverse<S: Clone + Observe>(
    system: &ProcessSystem<S>,
    span: TimeSpan,
    method: InverseMethod,
    rng: &mut RngStream,
    cfg: &InverseConfig,
    policy: SavePolicy,
    interrupt: &dyn Interrupt,
) -> Result<Trajectory> {
    if method == InverseMethod::ChvFull {
        if let Some(k) = system.processes().iter().position(|p| !p.has_vector_field()) {
            return Err(Error::Unsupported {
                process: k,
                reason: "CHV full needs a vector field",
            });
        }
    }
    let m = system.len();
    let mut run = Run::start(system, span, policy)?;
    let mut weights = vec![0.0; m];
    let mut lambdas = vec![0.0; m];
    let mut t = span.start;
    let evals = Cell::new(0u64);

    loop {
        run.tick(interrupt)?;
        let delta = sample_unit_exponential(rng);
        run.diag.exp_draws += 1;

        let next = match method {
            InverseMethod::RootFind => {
                next_time_rootfind(system, Target::Superposed, &run.state, &run.history, t, delta, span.end, cfg)
            }
            InverseMethod::ChvSimple => {
                let (state, history) = (&run.state, &run.history);
                chv_simple_step(
                    |u| {
                        evals.set(evals.get() + m as u64);
                        let mut sum = 0.0;
                        for p in system.processes() {
                            sum += p.rate(state, u, history)?;
                        }
                        Ok(sum)
                    },
                    t,
                    delta,
                    span.end,
                    &cfg.ode,
                )
            }
            InverseMethod::ChvFull => {
                let t_eval = eval_time(t, 0.0);
                for (slot, p) in lambdas.iter_mut().zip(system.processes()) {
                    *slot = p.rate(&run.state, t_eval, &run.history)?;
                }
                run.diag.rate_evaluations += m as u64;
                next_time_chv_full(system, Target::Superposed, t, &lambdas, delta, span.end, &cfg.ode).map(
                    |(tn, ls)| {
                        weights.copy_from_slice(&ls);
                        tn
                    },
                )
            }
        }
        .map_err(|e| e.at(None, t))?;

        if !(next < span.end) {
            break;
        }
        let total = if method == InverseMethod::ChvFull {
            for w in weights.iter_mut() {
                *w = w.max(0.0);
            }
            weights.iter().sum()
        } else {
            run.diag.rate_evaluations += m as u64;
            system.rates_into(&run.state, next, &run.history, &mut weights)?
        };
        let i = pick_weighted(&weights, rng.uniform() * total)
            .ok_or(Error::Domain("zero intensity at an event time").at(None, next))?;
        run.fire(system, i, next, rng)?;
        t = next;
    }
    run.diag.rate_evaluations += evals.get();
    Ok(run.finish(span, rng.seed()))
}
