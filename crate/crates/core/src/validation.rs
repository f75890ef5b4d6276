//! Time-rescaling diagnostics. Under a correct simulator the compensator
//! increments between consecutive events of each process are i.i.d. Exp(1);
//! this module computes them and tests that claim.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hawkes::{ExcitationGraph, HawkesParams, HawkesRecursiveState};
use crate::history::History;
use crate::inverse::{quadrature, QuadratureConfig};
use crate::rng::RngStream;
use crate::system::{Observe, ProcessSystem};
use crate::trajectory::{TimeSpan, Trajectory};

/// Largest rounding error tolerated before a negative increment is an error.
const NEGATIVE_SLACK: f64 = 1e-9;

/// Per-process compensator increments `ΔΛ_{nᵢ}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransformedIntervals {
    pub per_process: Vec<Vec<f64>>,
}

impl TransformedIntervals {
    pub fn new(processes: usize) -> Self {
        Self {
            per_process: vec![Vec::new(); processes],
        }
    }

    /// Append the intervals of another replicate.
    pub fn pool(&mut self, other: TransformedIntervals) {
        if self.per_process.len() < other.per_process.len() {
            self.per_process.resize(other.per_process.len(), Vec::new());
        }
        for (dst, src) in self.per_process.iter_mut().zip(other.per_process) {
            dst.extend(src);
        }
    }

    pub fn total(&self) -> usize {
        self.per_process.iter().map(Vec::len).sum()
    }

    fn push(&mut self, process: usize, value: f64) -> Result<()> {
        if !(value >= -NEGATIVE_SLACK * (1.0 + libm::fabs(value))) || !value.is_finite() {
            return Err(Error::NegativeInterval { process, value });
        }
        self.per_process[process].push(value.max(0.0));
        Ok(())
    }
}

/// Source of `Λᵢ*(t1) − Λᵢ*(t0)` for a realized history.
pub trait CompensatorProvider {
    fn processes(&self) -> usize;

    /// Increment of process `i` over `[t0, t1]`, given every event before `t1`.
    fn increment(&self, i: usize, history: &History, t0: f64, t1: f64) -> Result<f64>;

    /// Realized (uncensored) increments of every process, with `t_{0ᵢ}` at
    /// the span start.
    fn intervals(&self, history: &History, span: TimeSpan) -> Result<TransformedIntervals> {
        let m = self.processes();
        let mut out = TransformedIntervals::new(m);
        let mut prev = vec![span.start; m];
        for e in history.events() {
            let i = e.process;
            if i >= m {
                return Err(Error::IndexOutOfRange { index: i, len: m });
            }
            let d = self.increment(i, history, prev[i], e.time)?;
            out.push(i, d)?;
            prev[i] = e.time;
        }
        Ok(out)
    }
}

/// Compensator-transform every process of `trajectory`; the censored
/// interval ending at the horizon is dropped.
pub fn compensator_transform<P: CompensatorProvider + ?Sized>(trajectory: &Trajectory, provider: &P) -> Result<TransformedIntervals> {
    provider.intervals(&trajectory.events, trajectory.span)
}

/// Independent homogeneous processes, `Λᵢ = λᵢ t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousCompensator {
    pub rates: Vec<f64>,
}

impl CompensatorProvider for HomogeneousCompensator {
    fn processes(&self) -> usize {
        self.rates.len()
    }

    fn increment(&self, i: usize, _: &History, t0: f64, t1: f64) -> Result<f64> {
        Ok(self.rates[i] * (t1 - t0))
    }
}

/// Closed-form Hawkes compensator; [`CompensatorProvider::intervals`] runs a
/// single sweep over the history.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesCompensator {
    pub params: HawkesParams,
    pub graph: ExcitationGraph,
}

impl CompensatorProvider for HawkesCompensator {
    fn processes(&self) -> usize {
        self.graph.nodes()
    }

    fn increment(&self, i: usize, history: &History, t0: f64, t1: f64) -> Result<f64> {
        Ok(crate::hawkes::hawkes_compensator(&self.params, &self.graph, history, i, t0, t1))
    }

    fn intervals(&self, history: &History, span: TimeSpan) -> Result<TransformedIntervals> {
        let p = &self.params;
        let n = self.graph.nodes();
        let outputs = self.graph.outputs();
        let mut state = HawkesRecursiveState::new(n);
        let mut cum = vec![0.0; n];
        let mut at_last = vec![0.0; n];
        let mut out = TransformedIntervals::new(n);
        let mut t = span.start;
        for e in history.events() {
            if e.process >= n {
                return Err(Error::IndexOutOfRange { index: e.process, len: n });
            }
            let dt = e.time - t;
            if dt > 0.0 {
                let decay = (1.0 - libm::exp(-p.beta * dt)) / p.beta;
                for (i, c) in cum.iter_mut().enumerate() {
                    let x = crate::hawkes::hawkes_rate_recursive_right(p, &state, i, t)? - p.baseline;
                    *c += p.baseline * dt + x * decay;
                }
            }
            let j = e.process;
            out.push(j, cum[j] - at_last[j])?;
            at_last[j] = cum[j];
            state.record(p, &outputs[j], e.time)?;
            t = e.time;
        }
        Ok(out)
    }
}

/// Generic provider: replays the history through `system`, using each
/// process's closed-form compensator when present and quadrature otherwise.
///
/// Affects are re-run to rebuild the state, so they must be deterministic
/// given the event sequence.
pub struct SystemCompensator<'a, S> {
    pub system: &'a ProcessSystem<S>,
    pub quadrature: QuadratureConfig,
}

impl<'a, S> SystemCompensator<'a, S> {
    pub fn new(system: &'a ProcessSystem<S>) -> Self {
        Self {
            system,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl<S: Clone + Observe> CompensatorProvider for SystemCompensator<'_, S> {
    fn processes(&self) -> usize {
        self.system.len()
    }

    fn increment(&self, i: usize, history: &History, t0: f64, t1: f64) -> Result<f64> {
        // Stand-alone increments only make sense when the state does not
        // move; use the replay in `intervals` for stateful systems.
        let state = self.system.initial_state();
        let prefix = History::from_events(history.events().iter().filter(|e| e.time < t1).cloned().collect())?;
        window(self.system, &self.quadrature, i, state, &prefix, t0, t1)
    }

    fn intervals(&self, history: &History, span: TimeSpan) -> Result<TransformedIntervals> {
        let m = self.system.len();
        let mut state = self.system.initial_state().clone();
        let mut prefix = History::with_capacity(history.len());
        let mut cum = vec![0.0; m];
        let mut at_last = vec![0.0; m];
        let mut out = TransformedIntervals::new(m);
        let mut rng = RngStream::new(0);
        let mut t = span.start;
        for e in history.events() {
            if e.process >= m {
                return Err(Error::IndexOutOfRange { index: e.process, len: m });
            }
            if e.time > t {
                for (i, c) in cum.iter_mut().enumerate() {
                    *c += window(self.system, &self.quadrature, i, &state, &prefix, t, e.time)?;
                }
            }
            let j = e.process;
            out.push(j, cum[j] - at_last[j])?;
            at_last[j] = cum[j];
            self.system.processes()[j].affect(&mut state, e.time, &prefix, &mut rng);
            prefix.record(*e)?;
            t = e.time;
        }
        Ok(out)
    }
}

fn window<S>(system: &ProcessSystem<S>, quad: &QuadratureConfig, i: usize, state: &S, history: &History, t0: f64, t1: f64) -> Result<f64> {
    let p = &system.processes()[i];
    match p.closed_compensator(state, t0, t1, history) {
        Some(v) => Ok(v),
        None => quadrature::integrate(|u| p.rate(state, u, history), t0, t1, quad).map_err(|e| e.at(Some(i), t0)),
    }
}

/// Order-statistic quantiles with linear interpolation at `h = (n−1)p`.
pub fn empirical_quantiles(samples: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(quantiles_sorted(&s, probs))
}

fn quantiles_sorted(s: &[f64], probs: &[f64]) -> Vec<f64> {
    let n = s.len();
    probs
        .iter()
        .map(|&p| {
            let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
            let lo = libm::floor(h) as usize;
            let hi = (lo + 1).min(n - 1);
            s[lo] + (h - lo as f64) * (s[hi] - s[lo])
        })
        .collect()
}

/// One Q-Q point: probability, Exp(1) quantile, empirical quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QqPoint {
    pub prob: f64,
    pub theoretical: f64,
    pub empirical: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QqSeries {
    pub process: usize,
    pub points: Vec<QqPoint>,
}

/// `n_points` Q-Q pairs per process at `p_k = k/(n_points+1)`. Processes
/// with fewer than two intervals are skipped with a warning.
pub fn qq_pairs(intervals: &TransformedIntervals, n_points: usize) -> Vec<QqSeries> {
    let probs: Vec<f64> = (1..=n_points).map(|k| k as f64 / (n_points + 1) as f64).collect();
    let mut out = Vec::new();
    for (process, xs) in intervals.per_process.iter().enumerate() {
        if xs.len() < 2 {
            log::warn!("process {process}: {} interval(s), omitted from Q-Q data", xs.len());
            continue;
        }
        let mut s = xs.clone();
        s.sort_by(f64::total_cmp);
        let emp = quantiles_sorted(&s, &probs);
        let points = probs
            .iter()
            .zip(emp)
            .map(|(&prob, empirical)| QqPoint {
                prob,
                theoretical: -libm::log1p(-prob),
                empirical,
            })
            .collect();
        out.push(QqSeries { process, points });
    }
    out
}

/// Least-squares slope through the origin of a Q-Q series.
pub fn qq_slope(series: &QqSeries) -> f64 {
    let (xy, xx) = series
        .points
        .iter()
        .fold((0.0, 0.0), |(xy, xx), q| (xy + q.theoretical * q.empirical, xx + q.theoretical * q.theoretical));
    xy / xx
}

/// Minimum sample size for [`ks_exp1`].
pub const KS_MIN_SAMPLES: usize = 20;

/// One-sample Kolmogorov–Smirnov result against Exp(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n: usize,
}

impl KsResult {
    /// Asymptotic coefficient `c(α)` with `D_crit = c(α)/√n`.
    pub fn coefficient(alpha: f64) -> Option<f64> {
        if alpha == 0.01 {
            Some(1.628)
        } else if alpha == 0.05 {
            Some(1.358)
        } else if alpha == 0.10 {
            Some(1.224)
        } else {
            None
        }
    }

    pub fn critical_value(&self, alpha: f64) -> Option<f64> {
        Self::coefficient(alpha).map(|c| c / libm::sqrt(self.n as f64))
    }

    /// `D ≤ D_crit(α)` for the tabulated levels 0.01, 0.05 and 0.10.
    pub fn passes(&self, alpha: f64) -> Option<bool> {
        self.critical_value(alpha).map(|d| self.statistic <= d)
    }

    /// Asymptotic p-value from the Kolmogorov distribution.
    pub fn p_value(&self) -> f64 {
        kolmogorov_q(libm::sqrt(self.n as f64) * self.statistic)
    }
}

/// `D = sup |F̂(x) − (1 − e^{−x})|`.
pub fn ks_exp1(samples: &[f64]) -> Result<KsResult> {
    let n = samples.len();
    if n < KS_MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: KS_MIN_SAMPLES,
            got: n,
        });
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in s.iter().enumerate() {
        let f = -libm::expm1(-x.max(0.0));
        d = d.max((k + 1) as f64 / nf - f).max(f - k as f64 / nf);
    }
    Ok(KsResult { statistic: d, n })
}

/// Two-sample Kolmogorov–Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTwoSample {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample KS with ties handled by stepping both empirical CDFs through
/// each distinct value; the asymptotic p-value is conservative for discrete
/// data.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTwoSample> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max(libm::fabs(i as f64 / n - j as f64 / m));
    }
    let ne = n * m / (n + m);
    let root = libm::sqrt(ne);
    let lambda = (root + 0.12 + 0.11 / root) * d;
    Ok(KsTwoSample {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    })
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * lambda * lambda);
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Per-process observed rate statistics over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub process: usize,
    pub expected: f64,
    pub mean_rate: f64,
    pub std_error: f64,
    /// Mean of the squared per-replicate rate.
    pub second_moment: f64,
    /// `|mean − expected| > 3·SE`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub replicates: usize,
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    pub fn all_within(&self) -> bool {
        self.rows.iter().all(|r| !r.flagged)
    }
}

/// Minimum replicate count for [`moment_check`].
pub const MOMENT_MIN_REPLICATES: usize = 30;

/// Compare per-process mean rates (count/T) with `expected`.
pub fn moment_check(trajectories: &[Trajectory], expected: &[f64], horizon: f64) -> Result<MomentReport> {
    let r = trajectories.len();
    if r < MOMENT_MIN_REPLICATES {
        return Err(Error::InsufficientData {
            needed: MOMENT_MIN_REPLICATES,
            got: r,
        });
    }
    if !(horizon > 0.0) {
        return Err(Error::Domain("horizon must be positive"));
    }
    let m = expected.len();
    let rates: Vec<Vec<f64>> = trajectories
        .iter()
        .map(|tr| tr.counts(m).into_iter().map(|c| c as f64 / horizon).collect())
        .collect();
    let rows = (0..m)
        .map(|i| {
            let xs: Vec<f64> = rates.iter().map(|row| row[i]).collect();
            let mean = xs.iter().sum::<f64>() / r as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1) as f64;
            let se = libm::sqrt(var / r as f64);
            MomentRow {
                process: i,
                expected: expected[i],
                mean_rate: mean,
                std_error: se,
                second_moment: xs.iter().map(|x| x * x).sum::<f64>() / r as f64,
                flagged: libm::fabs(mean - expected[i]) > 3.0 * se,
            }
        })
        .collect();
    Ok(MomentReport { replicates: r, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hawkes::hawkes_rate_brute;
    use crate::history::EventRecord;
    use crate::homogeneous::sample_unit_exponential;
    use crate::trajectory::Diagnostics;
    use approx::assert_abs_diff_eq;

    fn traj(events: Vec<EventRecord>, end: f64) -> Trajectory {
        Trajectory {
            events: History::from_events(events).unwrap(),
            snapshots: vec![],
            diagnostics: Diagnostics::default(),
            seed: 0,
            span: TimeSpan::horizon(end).unwrap(),
        }
    }

    #[test]
    fn homogeneous_transform() {
        let tr = traj(vec![EventRecord::new(4.0, 0), EventRecord::new(8.0, 0)], 10.0);
        let iv = compensator_transform(&tr, &HomogeneousCompensator { rates: vec![0.25] }).unwrap();
        assert_eq!(iv.per_process, vec![vec![1.0, 1.0]]);
        let empty = compensator_transform(&traj(vec![], 1.0), &HomogeneousCompensator { rates: vec![0.25] }).unwrap();
        assert_eq!(empty.total(), 0);
    }

    #[test]
    fn negative_interval_detected() {
        let tr = traj(vec![EventRecord::new(1.0, 0)], 2.0);
        let err = compensator_transform(&tr, &HomogeneousCompensator { rates: vec![-1.0] }).unwrap_err();
        assert!(matches!(err, Error::NegativeInterval { .. }));
    }

    #[test]
    fn hawkes_sweep_matches_quadrature() {
        let p = HawkesParams::new(0.5, 0.1, 2.0).unwrap();
        let g = ExcitationGraph::new(vec![vec![1], vec![0, 1]]).unwrap();
        let mut rng = RngStream::new(3);
        let mut t = 0.0;
        let mut evs = Vec::new();
        for _ in 0..40 {
            t += sample_unit_exponential(&mut rng);
            evs.push(EventRecord::new(t, (rng.next_u64() % 2) as usize));
        }
        let tr = traj(evs, t + 1.0);
        let hc = HawkesCompensator { params: p, graph: g.clone() };
        let sweep = compensator_transform(&tr, &hc).unwrap();
        let closed = {
            // Default trait body through the per-window closed form.
            struct Plain<'a>(&'a HawkesCompensator);
            impl CompensatorProvider for Plain<'_> {
                fn processes(&self) -> usize {
                    self.0.processes()
                }
                fn increment(&self, i: usize, h: &History, t0: f64, t1: f64) -> Result<f64> {
                    self.0.increment(i, h, t0, t1)
                }
            }
            compensator_transform(&tr, &Plain(&hc)).unwrap()
        };
        // Quadrature oracle, split at every event so each piece is smooth.
        let times: Vec<f64> = tr.events.events().iter().map(|e| e.time).collect();
        let mut prev = [0.0; 2];
        let mut k = [0usize; 2];
        for e in tr.events.events() {
            let i = e.process;
            let mut cuts = vec![prev[i]];
            cuts.extend(times.iter().copied().filter(|&t| t > prev[i] && t < e.time));
            cuts.push(e.time);
            let q: f64 = cuts
                .windows(2)
                .map(|w| {
                    quadrature::integrate(|u| Ok(hawkes_rate_brute(&p, &g, &tr.events, i, u)), w[0], w[1], &QuadratureConfig::default())
                        .unwrap()
                })
                .sum();
            assert_abs_diff_eq!(sweep.per_process[i][k[i]], closed.per_process[i][k[i]], epsilon = 1e-12);
            assert_abs_diff_eq!(sweep.per_process[i][k[i]], q, epsilon = 1e-8);
            prev[i] = e.time;
            k[i] += 1;
        }
    }

    #[test]
    fn quantile_conventions() {
        assert_eq!(empirical_quantiles(&[1.0, 2.0, 3.0, 4.0], &[0.5]).unwrap(), vec![2.5]);
        let q = empirical_quantiles(&[3.0, 1.0, 2.0], &[1e-12, 1.0 - 1e-12]).unwrap();
        assert_abs_diff_eq!(q[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q[1], 3.0, epsilon = 1e-9);
        assert!(empirical_quantiles(&[], &[0.5]).is_err());
    }

    #[test]
    fn exponential_median() {
        let mut rng = RngStream::new(10);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_unit_exponential(&mut rng)).collect();
        let med = empirical_quantiles(&xs, &[0.5]).unwrap()[0];
        assert!((med - core::f64::consts::LN_2).abs() < 0.01);
    }

    #[test]
    fn qq_examples() {
        let mut rng = RngStream::new(12);
        let xs: Vec<f64> = (0..20_000).map(|_| sample_unit_exponential(&mut rng)).collect();
        let iv = TransformedIntervals {
            per_process: vec![xs, vec![2.0; 10], vec![1.0]],
        };
        let qq = qq_pairs(&iv, 99);
        assert_eq!(qq.len(), 2);
        assert!((qq_slope(&qq[0]) - 1.0).abs() < 0.05);
        assert!(qq[1].points.iter().all(|q| q.empirical == 2.0));
        let p = 1.0 - libm::exp(-1.0);
        assert_abs_diff_eq!(-libm::log1p(-p), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ks_examples() {
        let n = 1000;
        let plug: Vec<f64> = (1..=n).map(|i| -libm::log1p(-(i as f64) / (n + 1) as f64)).collect();
        let r = ks_exp1(&plug).unwrap();
        assert!(r.passes(0.01).unwrap());
        assert!(r.statistic < 0.002);

        let mut rng = RngStream::new(1);
        let u: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
        assert!(!ks_exp1(&u).unwrap().passes(0.01).unwrap());

        assert!(matches!(ks_exp1(&[1.0; 19]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn two_sample_ks() {
        let mut rng = RngStream::new(2);
        let a: Vec<f64> = (0..2000).map(|_| sample_unit_exponential(&mut rng)).collect();
        let b: Vec<f64> = (0..2000).map(|_| sample_unit_exponential(&mut rng)).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
        let c: Vec<f64> = b.iter().map(|x| 2.0 * x).collect();
        assert!(ks_two_sample(&a, &c).unwrap().p_value < 0.01);
        let same = ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(same.statistic, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn kolmogorov_values() {
        assert_abs_diff_eq!(kolmogorov_q(1.358), 0.05, epsilon = 1e-3);
        assert_abs_diff_eq!(kolmogorov_q(1.628), 0.01, epsilon = 1e-3);
    }

    #[test]
    fn moment_check_requires_replicates() {
        let trs: Vec<Trajectory> = (0..5).map(|_| traj(vec![], 1.0)).collect();
        assert!(moment_check(&trs, &[1.0], 1.0).is_err());
    }
}
