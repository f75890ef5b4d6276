//! Turn a parsed configuration into a simulatable system.

use tpsim_core::hawkes::{
    erdos_renyi, hawkes_stationary_rate, hawkes_system, ExcitationGraph, HawkesForm, HawkesParams, HawkesState,
};
use tpsim_core::validation::{CompensatorProvider, HawkesCompensator, HomogeneousCompensator, SystemCompensator};
use tpsim_core::{DependencyGraph, History, IntensitySpec, ProcessSystem, RngStream};

use crate::config::{CompensatorOverride, GraphConfig, HawkesConfig, ProcessConfig, ReactionConfig, RunConfig};
use crate::error::CliError;

pub enum Model {
    Homogeneous {
        system: ProcessSystem<Vec<f64>>,
        rates: Vec<f64>,
    },
    Hawkes {
        system: ProcessSystem<HawkesState>,
        params: HawkesParams,
        graph: ExcitationGraph,
    },
    Reactions {
        system: ProcessSystem<Vec<f64>>,
    },
}

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        match &cfg.process {
            ProcessConfig::Homogeneous { rates } => Ok(Model::Homogeneous {
                system: homogeneous_system(rates)?,
                rates: rates.clone(),
            }),
            ProcessConfig::HawkesBrute(h) => build_hawkes(h, cfg.graph.as_ref(), HawkesForm::Brute),
            ProcessConfig::HawkesRecursive(h) => build_hawkes(h, cfg.graph.as_ref(), HawkesForm::Recursive),
            ProcessConfig::CustomConstant { initial_state, reactions } => Ok(Model::Reactions {
                system: reaction_system(initial_state, reactions)?,
            }),
        }
    }

    pub fn processes(&self) -> usize {
        match self {
            Model::Homogeneous { system, .. } | Model::Reactions { system } => system.len(),
            Model::Hawkes { system, .. } => system.len(),
        }
    }

    /// Long-run mean rate per process, when known in closed form.
    pub fn expected_rates(&self) -> Option<Vec<f64>> {
        match self {
            Model::Homogeneous { rates, .. } => Some(rates.clone()),
            Model::Hawkes { params, graph, .. } => hawkes_stationary_rate(params, graph).ok(),
            Model::Reactions { .. } => None,
        }
    }

    /// Compensator for the residual test, optionally with overridden
    /// parameters.
    pub fn compensator(&self, over: Option<&CompensatorOverride>) -> Result<Box<dyn CompensatorProvider + Sync + '_>, CliError> {
        let over = over.cloned().unwrap_or_default();
        match self {
            Model::Homogeneous { rates, .. } => {
                let rates = over.rates.unwrap_or_else(|| rates.clone());
                if rates.len() != self.processes() {
                    return Err(CliError::Config("validation.compensator.rates has the wrong length".into()));
                }
                Ok(Box::new(HomogeneousCompensator { rates }))
            }
            Model::Hawkes { params, graph, .. } => {
                let params = HawkesParams::new(
                    over.baseline.unwrap_or(params.baseline),
                    over.alpha.unwrap_or(params.alpha),
                    over.beta.unwrap_or(params.beta),
                )
                .map_err(|e| CliError::Config(format!("validation.compensator: {e}")))?;
                Ok(Box::new(HawkesCompensator {
                    params,
                    graph: graph.clone(),
                }))
            }
            Model::Reactions { system } => {
                if over != CompensatorOverride::default() {
                    return Err(CliError::Config(
                        "validation.compensator overrides are not supported for custom_constant".into(),
                    ));
                }
                Ok(Box::new(SystemCompensator::new(system)))
            }
        }
    }
}

pub fn build_graph(graph: Option<&GraphConfig>) -> Result<ExcitationGraph, CliError> {
    match graph {
        None => Err(CliError::Config("Hawkes processes need a graph".into())),
        Some(GraphConfig::Explicit(adj)) => {
            ExcitationGraph::new(adj.clone()).map_err(|e| CliError::Config(format!("graph: {e}")))
        }
        Some(GraphConfig::ErdosRenyi { nodes, p, graph_seed }) => {
            erdos_renyi(&mut RngStream::new(*graph_seed), *nodes, *p).map_err(|e| CliError::Config(format!("graph: {e}")))
        }
    }
}

fn build_hawkes(h: &HawkesConfig, graph: Option<&GraphConfig>, form: HawkesForm) -> Result<Model, CliError> {
    let params = HawkesParams::new(h.baseline, h.alpha, h.beta).map_err(|e| CliError::Config(e.to_string()))?;
    let graph = build_graph(graph)?;
    let system = hawkes_system(params, &graph, form, h.interval_rule.into())?;
    Ok(Model::Hawkes { system, params, graph })
}

/// Independent constant-rate processes; the state counts events.
pub fn homogeneous_system(rates: &[f64]) -> Result<ProcessSystem<Vec<f64>>, CliError> {
    let procs = rates
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            IntensitySpec::constant(
                move |_: &Vec<f64>, _, _: &History| r,
                move |s: &mut Vec<f64>, _, _: &History, _: &mut RngStream| {
                    s[i] += 1.0;
                    None
                },
            )
        })
        .collect();
    Ok(ProcessSystem::new(procs, DependencyGraph::isolated(rates.len()), vec![0.0; rates.len()])?)
}

/// Mass-action network. Reaction `j` depends on reaction `i` when `i`
/// changes one of `j`'s reactants.
pub fn reaction_system(initial: &[f64], reactions: &[ReactionConfig]) -> Result<ProcessSystem<Vec<f64>>, CliError> {
    let procs = reactions
        .iter()
        .map(|r| {
            let (c, reactants, delta) = (r.coefficient, r.reactants.clone(), r.delta.clone());
            IntensitySpec::constant(
                move |s: &Vec<f64>, _, _: &History| reactants.iter().fold(c, |acc, &k| acc * s[k].max(0.0)),
                move |s: &mut Vec<f64>, _, _: &History, _: &mut RngStream| {
                    for (x, d) in s.iter_mut().zip(&delta) {
                        *x += d;
                    }
                    None
                },
            )
        })
        .collect();
    let deps = reactions
        .iter()
        .map(|ri| {
            reactions
                .iter()
                .enumerate()
                .filter(|(_, rj)| rj.reactants.iter().any(|&k| ri.delta[k] != 0.0))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    Ok(ProcessSystem::new(procs, DependencyGraph::new(deps)?, initial.to_vec())?)
}
