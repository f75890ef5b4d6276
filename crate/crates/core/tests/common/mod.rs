#![allow(dead_code)]

use tpsim_core::{
    hawkes::{hawkes_system, ExcitationGraph, HawkesForm, HawkesParams, HawkesState, IntervalRule},
    simulate, DependencyGraph, History, IntensitySpec, Method, ProcessSystem, RngStream, SimOptions, TimeSpan,
    Trajectory,
};

pub type St = Vec<f64>;

pub fn noop(_: &mut St, _: f64, _: &History, _: &mut RngStream) -> Option<u64> {
    None
}

pub fn constant_system(rates: &[f64]) -> ProcessSystem<St> {
    let procs = rates
        .iter()
        .map(|&r| IntensitySpec::constant(move |_: &St, _, _: &History| r, noop))
        .collect();
    ProcessSystem::new(procs, DependencyGraph::isolated(rates.len()), vec![]).unwrap()
}

/// Birth–death: births at rate `b`, deaths at rate `d·n`.
pub fn birth_death(b: f64, d: f64, n0: f64) -> ProcessSystem<St> {
    let birth = IntensitySpec::constant(
        move |_: &St, _, _: &History| b,
        |s: &mut St, _, _: &History, _: &mut RngStream| {
            s[0] += 1.0;
            None
        },
    );
    let death = IntensitySpec::constant(
        move |s: &St, _, _: &History| d * s[0],
        |s: &mut St, _, _: &History, _: &mut RngStream| {
            s[0] -= 1.0;
            None
        },
    );
    ProcessSystem::new(vec![birth, death], DependencyGraph::complete(2), vec![n0]).unwrap()
}

pub fn reference_params() -> HawkesParams {
    HawkesParams::new(0.5, 0.1, 2.0).unwrap()
}

pub fn univariate_hawkes(form: HawkesForm) -> ProcessSystem<HawkesState> {
    hawkes_system(reference_params(), &ExcitationGraph::self_exciting(), form, IntervalRule::HalfInverseUpper).unwrap()
}

pub fn replicates<S: Clone + tpsim_core::Observe>(
    system: &ProcessSystem<S>,
    method: Method,
    horizon: f64,
    runs: u64,
    seed: u64,
    opts: &SimOptions<'_>,
) -> Vec<Trajectory> {
    let span = TimeSpan::horizon(horizon).unwrap();
    (0..runs)
        .map(|r| {
            let mut rng = RngStream::for_replicate(seed, r);
            simulate(system, span, method, &mut rng, opts).unwrap()
        })
        .collect()
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn total_counts(trs: &[Trajectory]) -> Vec<f64> {
    trs.iter().map(|t| t.events.len() as f64).collect()
}
