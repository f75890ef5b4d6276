//! Compound multivariate Hawkes processes
//! `λᵢ*(t) = λ + Σ_{j∈Eᵢ} Σ_{tⱼ<t} α e^{−β(t−tⱼ)}`
//! in brute-force and recursive form, with the pieces every simulator needs:
//! bounds, vector field, closed-form compensator and stationary rates.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::history::History;
use crate::rng::RngStream;
use crate::system::{IntensitySpec, Observe, ProcessSystem, RateBounds};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HawkesParams {
    pub baseline: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl HawkesParams {
    pub fn new(baseline: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(Error::Domain("Hawkes baseline must be positive"));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain("Hawkes jump must be non-negative"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain("Hawkes decay must be positive"));
        }
        Ok(Self { baseline, alpha, beta })
    }

    pub fn branching_ratio(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Sufficient stability check `(α/β)·max_degree < 1`; logs a warning
    /// and returns `false` when it fails.
    pub fn check_stability(&self, graph: &ExcitationGraph) -> bool {
        let ratio = self.branching_ratio() * graph.max_in_degree() as f64;
        if ratio >= 1.0 {
            log::warn!("Hawkes process may explode: (alpha/beta) * max degree = {ratio}");
            return false;
        }
        true
    }
}

/// In-neighborhoods `Eᵢ`: events of `j ∈ Eᵢ` excite node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationGraph {
    inputs: Vec<Vec<usize>>,
}

impl ExcitationGraph {
    pub fn new(inputs: Vec<Vec<usize>>) -> Result<Self> {
        let v = inputs.len();
        if v == 0 {
            return Err(Error::EmptySystem);
        }
        let mut cleaned = Vec::with_capacity(v);
        for mut list in inputs {
            if let Some(&bad) = list.iter().find(|&&j| j >= v) {
                return Err(Error::IndexOutOfRange { index: bad, len: v });
            }
            list.sort_unstable();
            list.dedup();
            cleaned.push(list);
        }
        Ok(Self { inputs: cleaned })
    }

    /// One node exciting itself.
    pub fn self_exciting() -> Self {
        Self { inputs: vec![vec![0]] }
    }

    pub fn nodes(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self, i: usize) -> &[usize] {
        &self.inputs[i]
    }

    pub fn all_inputs(&self) -> &[Vec<usize>] {
        &self.inputs
    }

    pub fn max_in_degree(&self) -> usize {
        self.inputs.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn mean_degree(&self) -> f64 {
        self.inputs.iter().map(Vec::len).sum::<usize>() as f64 / self.nodes() as f64
    }

    /// Nodes excited by an event on `j`.
    pub fn outputs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes()];
        for (i, list) in self.inputs.iter().enumerate() {
            for &j in list {
                out[j].push(i);
            }
        }
        out
    }

    /// Firing `j` changes the intensity of every node it excites.
    pub fn dependency_graph(&self) -> DependencyGraph {
        DependencyGraph::from_inputs(&self.inputs).expect("indices validated")
    }
}

/// Undirected Erdős–Rényi graph without self-loops: each pair is linked
/// independently with probability `p`, and a link excites both ends.
pub fn erdos_renyi(rng: &mut RngStream, nodes: usize, p: f64) -> Result<ExcitationGraph> {
    if nodes == 0 {
        return Err(Error::EmptySystem);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain("edge probability must lie in [0, 1]"));
    }
    let mut inputs = vec![Vec::new(); nodes];
    for i in 0..nodes {
        for j in i + 1..nodes {
            if rng.uniform() < p {
                inputs[i].push(j);
                inputs[j].push(i);
            }
        }
    }
    ExcitationGraph::new(inputs)
}

fn excitation_brute(p: &HawkesParams, inputs: &[usize], history: &History, t: f64, inclusive: bool) -> f64 {
    let mut sum = 0.0;
    for e in history.events() {
        if e.time > t || (!inclusive && e.time == t) {
            break;
        }
        if inputs.binary_search(&e.process).is_ok() {
            sum += libm::exp(-p.beta * (t - e.time));
        }
    }
    p.alpha * sum
}

/// Left-continuous intensity by the full double sum; events at `t` are
/// excluded.
pub fn hawkes_rate_brute(p: &HawkesParams, graph: &ExcitationGraph, history: &History, i: usize, t: f64) -> f64 {
    p.baseline + excitation_brute(p, graph.inputs(i), history, t, false)
}

/// Right limit `λᵢ*(t⁺)`: events at `t` included.
pub fn hawkes_rate_brute_right(p: &HawkesParams, graph: &ExcitationGraph, history: &History, i: usize, t: f64) -> f64 {
    p.baseline + excitation_brute(p, graph.inputs(i), history, t, true)
}

/// Per-node excitation carried forward by the recursion
/// `φᵢ ← e^{−β(s−t_{Nᵢ})}(α + φᵢ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HawkesRecursiveState {
    /// Excitation just before `last[i]`.
    phi: Vec<f64>,
    /// `α` times the number of input events at exactly `last[i]`.
    jump: Vec<f64>,
    last: Vec<Option<f64>>,
}

impl HawkesRecursiveState {
    pub fn new(nodes: usize) -> Self {
        Self {
            phi: vec![0.0; nodes],
            jump: vec![0.0; nodes],
            last: vec![None; nodes],
        }
    }

    pub fn phi(&self, i: usize) -> f64 {
        self.phi[i]
    }

    /// `t_{Nᵢ}`, the time of the latest input event of node `i`.
    pub fn last_input(&self, i: usize) -> Option<f64> {
        self.last[i]
    }

    /// Register an input event of node `i` at time `s`.
    pub fn excite(&mut self, p: &HawkesParams, i: usize, s: f64) -> Result<()> {
        match self.last[i] {
            Some(tn) if s < tn => return Err(Error::OutOfOrder { time: s, last: tn }),
            Some(tn) if s == tn => self.jump[i] += p.alpha,
            Some(tn) => {
                self.phi[i] = libm::exp(-p.beta * (s - tn)) * (self.jump[i] + self.phi[i]);
                self.jump[i] = p.alpha;
                self.last[i] = Some(s);
            }
            None => {
                self.phi[i] = 0.0;
                self.jump[i] = p.alpha;
                self.last[i] = Some(s);
            }
        }
        Ok(())
    }

    /// Register an event of node `j` with every node it excites.
    pub fn record(&mut self, p: &HawkesParams, outputs: &[usize], s: f64) -> Result<()> {
        for &i in outputs {
            self.excite(p, i, s)?;
        }
        Ok(())
    }

    fn excitation(&self, p: &HawkesParams, i: usize, t: f64, inclusive: bool) -> Result<f64> {
        match self.last[i] {
            None => Ok(0.0),
            Some(tn) if t < tn => Err(Error::OutOfOrder { time: t, last: tn }),
            Some(tn) if t == tn && !inclusive => Ok(self.phi[i]),
            Some(tn) => Ok(libm::exp(-p.beta * (t - tn)) * (self.jump[i] + self.phi[i])),
        }
    }
}

/// `O(1)` left-continuous intensity from the recursive state.
pub fn hawkes_rate_recursive(p: &HawkesParams, state: &HawkesRecursiveState, i: usize, t: f64) -> Result<f64> {
    Ok(p.baseline + state.excitation(p, i, t, false)?)
}

/// Right limit of [`hawkes_rate_recursive`].
pub fn hawkes_rate_recursive_right(p: &HawkesParams, state: &HawkesRecursiveState, i: usize, t: f64) -> Result<f64> {
    Ok(p.baseline + state.excitation(p, i, t, true)?)
}

/// `g(ℓ) = −β(ℓ − λ)`, so that `dλ*/dt = g(λ*)` between events.
pub fn hawkes_vector_field(p: &HawkesParams) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let (beta, baseline) = (p.beta, p.baseline);
    move |l| -beta * (l - baseline)
}

/// Closed-form `∫_{t0}^{t1} λᵢ*(u) du` over the events of `history`.
pub fn hawkes_compensator(p: &HawkesParams, graph: &ExcitationGraph, history: &History, i: usize, t0: f64, t1: f64) -> f64 {
    compensator_inputs(p, graph.inputs(i), history, t0, t1)
}

fn compensator_inputs(p: &HawkesParams, inputs: &[usize], history: &History, t0: f64, t1: f64) -> f64 {
    let mut sum = 0.0;
    for e in history.events() {
        if e.time >= t1 {
            break;
        }
        if inputs.binary_search(&e.process).is_ok() {
            let start = if e.time > t0 { e.time } else { t0 };
            sum += libm::exp(-p.beta * (start - e.time)) - libm::exp(-p.beta * (t1 - e.time));
        }
    }
    p.baseline * (t1 - t0) + p.alpha / p.beta * sum
}

/// Window length attached to the Hawkes upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntervalRule {
    /// `L* = 1/(2B̄*)` always.
    #[default]
    HalfInverseUpper,
    /// `L* = ∞` while the intensity sits at its baseline (it cannot rise
    /// without an event), `1/(2B̄*)` otherwise. This is the rule the
    /// benchmark rejection rates were measured with.
    UnboundedAtBaseline,
}

impl IntervalRule {
    fn interval(self, upper: f64, lower: f64) -> f64 {
        match self {
            IntervalRule::UnboundedAtBaseline if upper <= lower => f64::INFINITY,
            _ => 1.0 / (2.0 * upper),
        }
    }
}

/// `(B̄*, B̲*, L*)` from the right-limit intensity `rate_now`: the rate only
/// decays between events, so its current value bounds every later one and
/// the baseline bounds it from below.
pub fn hawkes_bounds(p: &HawkesParams, rate_now: f64, rule: IntervalRule) -> RateBounds {
    RateBounds::new(rate_now, p.baseline, rule.interval(rate_now, p.baseline))
}

/// Solve `E = λ·1 + (α/β)·A·E` with `Aᵢⱼ = 1` when `j ∈ Eᵢ`.
pub fn hawkes_stationary_rate(p: &HawkesParams, graph: &ExcitationGraph) -> Result<Vec<f64>> {
    let n = graph.nodes();
    let c = p.branching_ratio();
    if c * spectral_radius(graph) >= 1.0 {
        return Err(Error::Unstable);
    }
    let mut a = vec![vec![0.0; n + 1]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
        for &j in graph.inputs(i) {
            row[j] -= c;
        }
        row[n] = p.baseline;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| libm::fabs(a[x][col]).total_cmp(&libm::fabs(a[y][col])))
            .expect("non-empty range");
        if libm::fabs(a[pivot][col]) < 1e-14 {
            return Err(Error::Unstable);
        }
        a.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..=n {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut e = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = a[r][n];
        for k in r + 1..n {
            s -= a[r][k] * e[k];
        }
        e[r] = s / a[r][r];
    }
    Ok(e)
}

/// Perron root of the adjacency matrix by power iteration on `A + I`
/// (the shift makes the iteration converge on periodic graphs).
fn spectral_radius(graph: &ExcitationGraph) -> f64 {
    let n = graph.nodes();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut upper = f64::INFINITY;
    for _ in 0..500 {
        for i in 0..n {
            y[i] = x[i] + graph.inputs(i).iter().map(|&j| x[j]).sum::<f64>();
        }
        let (lo, hi) = x
            .iter()
            .zip(&y)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), (&xi, &yi)| (lo.min(yi / xi), hi.max(yi / xi)));
        upper = hi - 1.0;
        let norm = y.iter().cloned().fold(0.0, f64::max);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    upper
}

/// Evaluation strategy for the Hawkes intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HawkesForm {
    /// Full sum over the history on every evaluation.
    Brute,
    /// `O(1)` evaluation from per-node state updated on each event.
    Recursive,
}

/// Simulation state of a Hawkes system: per-node event counts, plus the
/// recursive excitation when that form is used.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HawkesState {
    pub counts: Vec<u64>,
    pub recursive: HawkesRecursiveState,
}

impl Observe for HawkesState {
    fn observe(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// One process per node; firing node `j` excites its outputs.
pub fn hawkes_system(
    params: HawkesParams,
    graph: &ExcitationGraph,
    form: HawkesForm,
    rule: IntervalRule,
) -> Result<ProcessSystem<HawkesState>> {
    params.check_stability(graph);
    let n = graph.nodes();
    let outputs = graph.outputs();
    let p = params;
    let mut processes = Vec::with_capacity(n);
    for i in 0..n {
        let spec = match form {
            HawkesForm::Brute => {
                let inputs: Arc<[usize]> = Arc::from(graph.inputs(i));
                let (a, b, c) = (inputs.clone(), inputs.clone(), inputs);
                IntensitySpec::variable(
                    move |_: &HawkesState, t, h: &History| p.baseline + excitation_brute(&p, &a, h, t, false),
                    move |_: &HawkesState, t, h: &History| {
                        hawkes_bounds(&p, p.baseline + excitation_brute(&p, &b, h, t, true), rule)
                    },
                    move |s: &mut HawkesState, _, _: &History, _: &mut RngStream| {
                        s.counts[i] += 1;
                        None
                    },
                )
                .with_compensator(move |_: &HawkesState, t0, t1, h: &History| compensator_inputs(&p, &c, h, t0, t1))
            }
            HawkesForm::Recursive => {
                let outs = outputs[i].clone();
                IntensitySpec::variable(
                    move |s: &HawkesState, t, _: &History| {
                        hawkes_rate_recursive(&p, &s.recursive, i, t).unwrap_or(f64::NAN)
                    },
                    move |s: &HawkesState, t, _: &History| {
                        let now = hawkes_rate_recursive_right(&p, &s.recursive, i, t).unwrap_or(f64::NAN);
                        hawkes_bounds(&p, now, rule)
                    },
                    move |s: &mut HawkesState, t, _: &History, _: &mut RngStream| {
                        s.counts[i] += 1;
                        let ok = s.recursive.record(&p, &outs, t);
                        debug_assert!(ok.is_ok(), "events arrive in order");
                        None
                    },
                )
                .with_compensator(move |s: &HawkesState, t0, t1, _: &History| {
                    // Forward window with no input events inside (t0, t1).
                    let x0 = s.recursive.excitation(&p, i, t0, true).unwrap_or(f64::NAN);
                    p.baseline * (t1 - t0) + x0 * (1.0 - libm::exp(-p.beta * (t1 - t0))) / p.beta
                })
            }
        };
        processes.push(spec.with_vector_field(hawkes_vector_field(&p)));
    }
    let state = HawkesState {
        counts: vec![0; n],
        recursive: HawkesRecursiveState::new(n),
    };
    ProcessSystem::new(processes, graph.dependency_graph(), state)
}
