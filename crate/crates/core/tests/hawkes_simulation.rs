mod common;

use common::*;
use tpsim_core::hawkes::{
    erdos_renyi, hawkes_rate_recursive_right, hawkes_stationary_rate, hawkes_system, ExcitationGraph, HawkesForm,
    HawkesParams, IntervalRule,
};
use tpsim_core::homogeneous::sample_unit_exponential;
use tpsim_core::inverse::{next_time_chv_full, next_time_chv_simple, next_time_rootfind, InverseConfig, Target};
use tpsim_core::validation::{compensator_transform, ks_exp1, moment_check, HawkesCompensator, TransformedIntervals};
use tpsim_core::{History, Method, RngStream, SimOptions, TimeSpan};

#[test]
fn chv_simple_on_baseline_hawkes() {
    let sys = univariate_hawkes(HawkesForm::Recursive);
    let t = next_time_chv_simple(
        &sys,
        Target::Process(0),
        sys.initial_state(),
        &History::new(),
        3.0,
        1.0,
        f64::INFINITY,
        &Default::default(),
    )
    .unwrap();
    assert!((t - 5.0).abs() < 1e-9);
}

#[test]
fn stationary_mean_rate_for_each_method() {
    let expected = hawkes_stationary_rate(&reference_params(), &ExcitationGraph::self_exciting()).unwrap();
    let opts = SimOptions::default();
    for (form, method) in [
        (HawkesForm::Brute, Method::InverseRootfind),
        (HawkesForm::Recursive, Method::ChvFull),
        (HawkesForm::Recursive, Method::Thinning),
        (HawkesForm::Recursive, Method::Coevolve),
    ] {
        let sys = univariate_hawkes(form);
        let trs = replicates(&sys, method, 200.0, 250, 9, &opts);
        let report = moment_check(&trs, &expected, 200.0).unwrap();
        assert!(report.all_within(), "{}: {:?}", method.name(), report.rows);
    }
}

#[test]
fn chv_full_tracks_rootfind_on_shared_draws() {
    let sys = univariate_hawkes(HawkesForm::Recursive);
    let cfg = InverseConfig::default();
    let mut rng = RngStream::new(31);
    let mut state = sys.initial_state().clone();
    let mut history = History::new();
    let mut t = 0.0;
    for _ in 0..500 {
        let delta = sample_unit_exponential(&mut rng);
        let lambda = hawkes_rate_recursive_right(&reference_params(), &state.recursive, 0, t).unwrap();
        let (tf, _) = next_time_chv_full(&sys, Target::Process(0), t, &[lambda], delta, f64::INFINITY, &cfg.ode).unwrap();
        let tr = next_time_rootfind(&sys, Target::Process(0), &state, &history, t, delta, f64::INFINITY, &cfg).unwrap();
        assert!((tf - tr).abs() <= 1e-5, "{tf} vs {tr}");
        sys.process(0).unwrap().affect(&mut state, tr, &history, &mut rng);
        history.record(tpsim_core::EventRecord::new(tr, 0)).unwrap();
        t = tr;
    }
}

#[test]
fn multivariate_residuals_pass() {
    let p = reference_params();
    let graph = erdos_renyi(&mut RngStream::new(5), 10, 0.2).unwrap();
    let prov = HawkesCompensator { params: p, graph: graph.clone() };
    let opts = SimOptions::default();
    for (form, method) in [(HawkesForm::Recursive, Method::Coevolve), (HawkesForm::Brute, Method::Thinning)] {
        let sys = hawkes_system(p, &graph, form, IntervalRule::HalfInverseUpper).unwrap();
        let mut pooled = TransformedIntervals::new(10);
        for tr in replicates(&sys, method, 200.0, 100, 17, &opts) {
            pooled.pool(compensator_transform(&tr, &prov).unwrap());
        }
        for (i, xs) in pooled.per_process.iter().enumerate() {
            let ks = ks_exp1(xs).unwrap();
            assert!(ks.passes(0.01).unwrap(), "{} node {i}: D = {}", method.name(), ks.statistic);
        }
    }
}

#[test]
fn misspecified_compensator_is_caught() {
    let p = reference_params();
    let sys = univariate_hawkes(HawkesForm::Recursive);
    let wrong = HawkesCompensator {
        params: HawkesParams::new(0.25, 0.1, 2.0).unwrap(),
        graph: ExcitationGraph::self_exciting(),
    };
    let right = HawkesCompensator { params: p, graph: ExcitationGraph::self_exciting() };
    let trs = replicates(&sys, Method::Coevolve, 200.0, 50, 3, &SimOptions::default());
    let mut good = TransformedIntervals::new(1);
    let mut bad = TransformedIntervals::new(1);
    for tr in &trs {
        good.pool(compensator_transform(tr, &right).unwrap());
        bad.pool(compensator_transform(tr, &wrong).unwrap());
    }
    assert!(ks_exp1(&good.per_process[0]).unwrap().passes(0.01).unwrap());
    assert!(!ks_exp1(&bad.per_process[0]).unwrap().passes(0.01).unwrap());
}

#[test]
fn single_node_benchmark_rejection_rate() {
    let p = HawkesParams::new(0.5, 0.1, 5.0).unwrap();
    let graph = erdos_renyi(&mut RngStream::new(1), 1, 0.2).unwrap();
    let sys = hawkes_system(p, &graph, HawkesForm::Recursive, IntervalRule::UnboundedAtBaseline).unwrap();
    let trs = replicates(&sys, Method::Coevolve, 25.0, 200, 8, &SimOptions::default());
    let rates: Vec<f64> = trs.iter().filter_map(|t| t.rejection_rate()).collect();
    let (mean, _) = mean_and_se(&rates);
    assert!((0.03..=0.15).contains(&mean), "{mean}");
}

#[test]
fn save_policy_does_not_change_events() {
    use tpsim_core::SavePolicy;
    let sys = univariate_hawkes(HawkesForm::Recursive);
    let span = TimeSpan::horizon(50.0).unwrap();
    let run = |policy| {
        let opts = SimOptions { save_policy: policy, ..Default::default() };
        tpsim_core::simulate(&sys, span, Method::Coevolve, &mut RngStream::new(4), &opts).unwrap()
    };
    let a = run(SavePolicy::EveryEvent);
    let b = run(SavePolicy::Grid { dt: 0.5 });
    let c = run(SavePolicy::Endpoints);
    assert_eq!(a.events, b.events);
    assert_eq!(a.events, c.events);
    assert_eq!(b.snapshots.len(), 101);
    assert_eq!(c.snapshots.len(), 2);
    assert_eq!(a.snapshots.len(), a.events.len() + 2);
}
