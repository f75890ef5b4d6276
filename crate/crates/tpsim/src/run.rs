//! `simulate` and `validate` commands.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use tpsim_core::validation::{compensator_transform, ks_exp1, moment_check, qq_pairs, TransformedIntervals};
use tpsim_core::{simulate, CoevolveOptions, Observe, ProcessSystem, RngStream, SimOptions, TimeSpan, Trajectory};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io;
use crate::model::Model;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<u64>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        cfg.check()
    }
}

/// Replicates in index order. Each replicate has its own stream derived from
/// `(seed, index)`, so results do not depend on the thread count.
pub fn run_replicates(model: &Model, cfg: &RunConfig, threads: Option<usize>) -> Result<Vec<Trajectory>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match model {
        Model::Homogeneous { system, .. } | Model::Reactions { system } => replicate_all(system, cfg),
        Model::Hawkes { system, .. } => replicate_all(system, cfg),
    })
}

fn replicate_all<S: Clone + Observe + Sync>(system: &ProcessSystem<S>, cfg: &RunConfig) -> Result<Vec<Trajectory>, CliError> {
    let span = TimeSpan::new(cfg.tspan[0], cfg.tspan[1])?;
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let opts = SimOptions {
                save_policy: cfg.save_policy.into(),
                coevolve: CoevolveOptions {
                    reuse_samples: cfg.reuse_samples,
                },
                ..Default::default()
            };
            let mut rng = RngStream::for_replicate(cfg.seed, r);
            simulate(system, span, cfg.method.into(), &mut rng, &opts).map_err(|source| CliError::Simulation { replicate: r, source })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct ReplicateSummary {
    replicate: u64,
    seed: u64,
    events: usize,
    counts: Vec<usize>,
    candidates_proposed: u64,
    candidates_rejected: u64,
    window_expiries: u64,
    bound_evaluations: u64,
    rate_evaluations: u64,
    exp_draws: u64,
    rejection_rate: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DiagnosticsFile<'a> {
    method: &'static str,
    tspan: [f64; 2],
    seed: u64,
    replicates: u64,
    total_events: usize,
    mean_events: f64,
    /// `1 − events / bound evaluations`, pooled over replicates.
    rejection_rate: Option<f64>,
    per_replicate: &'a [ReplicateSummary],
}

/// Write `events_NNNN.csv`, `snapshots_NNNN.csv` and `diagnostics.json`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path, threads: Option<usize>) -> Result<Vec<Trajectory>, CliError> {
    let model = Model::build(cfg)?;
    std::fs::create_dir_all(out)?;
    let started = std::time::Instant::now();
    let trajectories = run_replicates(&model, cfg, threads)?;
    let elapsed = started.elapsed();
    let m = model.processes();

    let width = digits(cfg.replicates);
    let mut rows = Vec::with_capacity(trajectories.len());
    for (r, tr) in trajectories.iter().enumerate() {
        io::write_events(&out.join(format!("events_{r:0width$}.csv")), tr)?;
        io::write_snapshots(&out.join(format!("snapshots_{r:0width$}.csv")), &tr.snapshots)?;
        let d = &tr.diagnostics;
        rows.push(ReplicateSummary {
            replicate: r as u64,
            seed: tr.seed,
            events: tr.events.len(),
            counts: tr.counts(m),
            candidates_proposed: d.candidates_proposed,
            candidates_rejected: d.candidates_rejected,
            window_expiries: d.window_expiries,
            bound_evaluations: d.bound_evaluations,
            rate_evaluations: d.rate_evaluations,
            exp_draws: d.exp_draws,
            rejection_rate: tr.rejection_rate(),
        });
    }
    let total_events: usize = rows.iter().map(|r| r.events).sum();
    let bounds: u64 = rows.iter().map(|r| r.bound_evaluations).sum();
    let summary = DiagnosticsFile {
        method: tpsim_core::Method::from(cfg.method).name(),
        tspan: cfg.tspan,
        seed: cfg.seed,
        replicates: cfg.replicates,
        total_events,
        mean_events: total_events as f64 / cfg.replicates as f64,
        rejection_rate: (bounds > 0).then(|| 1.0 - total_events as f64 / bounds as f64),
        per_replicate: &rows,
    };
    io::write_json(&out.join("diagnostics.json"), &summary)?;
    // Wall time stays out of the files so they are reproducible.
    eprintln!(
        "simulated {} replicate(s), {} events, in {:.3} s",
        cfg.replicates,
        total_events,
        elapsed.as_secs_f64()
    );
    Ok(trajectories)
}

#[derive(Debug, Clone, Serialize)]
pub struct KsRow {
    pub process_index: usize,
    pub intervals: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub critical_0_01: Option<f64>,
    pub pass_0_01: Option<bool>,
    pub pass_0_05: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRowOut {
    pub process_index: usize,
    pub expected: f64,
    pub mean_rate: f64,
    pub std_error: f64,
    pub second_moment: f64,
    pub within_3se: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub method: &'static str,
    pub replicates: u64,
    pub all_pass_0_01: bool,
    pub ks: Vec<KsRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<Vec<MomentRowOut>>,
}

/// Pool compensator-transformed intervals over replicates, then write
/// `qq.csv` and `ks_report.json`.
pub fn cmd_validate(cfg: &RunConfig, out: &Path, threads: Option<usize>) -> Result<ValidationReport, CliError> {
    let model = Model::build(cfg)?;
    let vcfg = cfg.validation.clone().unwrap_or_default();
    let provider = model.compensator(vcfg.compensator.as_ref())?;
    std::fs::create_dir_all(out)?;
    let trajectories = run_replicates(&model, cfg, threads)?;

    let m = model.processes();
    let per_rep: Vec<TransformedIntervals> = trajectories
        .par_iter()
        .map(|tr| compensator_transform(tr, provider.as_ref()))
        .collect::<Result<_, _>>()?;
    let mut pooled = TransformedIntervals::new(m);
    for iv in per_rep {
        pooled.pool(iv);
    }

    io::write_qq(&out.join("qq.csv"), &qq_pairs(&pooled, vcfg.qq_points))?;
    let ks: Vec<KsRow> = pooled
        .per_process
        .iter()
        .enumerate()
        .map(|(i, xs)| match ks_exp1(xs) {
            Ok(r) => KsRow {
                process_index: i,
                intervals: xs.len(),
                statistic: Some(r.statistic),
                p_value: Some(r.p_value()),
                critical_0_01: r.critical_value(0.01),
                pass_0_01: r.passes(0.01),
                pass_0_05: r.passes(0.05),
            },
            Err(_) => {
                log::warn!("process {i}: only {} intervals, KS skipped", xs.len());
                KsRow {
                    process_index: i,
                    intervals: xs.len(),
                    statistic: None,
                    p_value: None,
                    critical_0_01: None,
                    pass_0_01: None,
                    pass_0_05: None,
                }
            }
        })
        .collect();
    let moments = match model.expected_rates() {
        Some(expected) if trajectories.len() >= tpsim_core::validation::MOMENT_MIN_REPLICATES => {
            let horizon = cfg.tspan[1] - cfg.tspan[0];
            let rep = moment_check(&trajectories, &expected, horizon)?;
            Some(
                rep.rows
                    .into_iter()
                    .map(|r| MomentRowOut {
                        process_index: r.process,
                        expected: r.expected,
                        mean_rate: r.mean_rate,
                        std_error: r.std_error,
                        second_moment: r.second_moment,
                        within_3se: !r.flagged,
                    })
                    .collect(),
            )
        }
        _ => None,
    };
    let report = ValidationReport {
        method: tpsim_core::Method::from(cfg.method).name(),
        replicates: cfg.replicates,
        all_pass_0_01: ks.iter().all(|k| k.pass_0_01 == Some(true)),
        ks,
        moments,
    };
    io::write_json(&out.join("ks_report.json"), &report)?;
    Ok(report)
}

fn digits(n: u64) -> usize {
    n.saturating_sub(1).max(1).to_string().len().max(4)
}
