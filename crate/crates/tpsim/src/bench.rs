//! Timing grid over methods and Erdős–Rényi Hawkes systems of growing size.

use std::path::Path;
use std::time::{Duration, Instant};

use tpsim_core::hawkes::{erdos_renyi, hawkes_system, HawkesForm, HawkesParams};
use tpsim_core::{simulate, Error, Interrupt, RngStream, SimOptions, TimeSpan};

use crate::config::{BenchConfig, BenchMethod};
use crate::error::CliError;
use crate::io::fmt17;

/// Stops a run once its wall-clock budget is spent.
pub struct Deadline(pub Instant);

impl Interrupt for Deadline {
    fn should_stop(&self) -> bool {
        Instant::now() >= self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub nodes: usize,
    pub runs_completed: u64,
    pub median_seconds: Option<f64>,
    /// `1 − events / bound evaluations`, pooled over completed runs.
    pub rejection_rate: Option<f64>,
}

/// Run every (method, V) cell. Runs are sequential so timings are not
/// polluted by sibling threads. After three timeouts the remaining runs of
/// a cell are skipped.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, CliError> {
    const MAX_TIMEOUTS: u64 = 3;
    let h = cfg.hawkes;
    let params = HawkesParams::new(h.baseline, h.alpha, h.beta)?;
    let span = TimeSpan::horizon(cfg.horizon)?;
    let budget = Duration::from_secs_f64(cfg.timeout_seconds);
    let mut rows = Vec::new();
    for name in &cfg.methods {
        let bm = BenchMethod::parse(name).ok_or_else(|| CliError::Config(format!("unknown bench method {name:?}")))?;
        let form = if bm.recursive { HawkesForm::Recursive } else { HawkesForm::Brute };
        for &v in &cfg.nodes {
            let graph = erdos_renyi(&mut RngStream::for_replicate(cfg.graph_seed, v as u64), v, cfg.p)?;
            let system = hawkes_system(params, &graph, form, h.interval_rule.into())?;
            let mut times = Vec::new();
            let (mut events, mut bounds, mut timeouts) = (0u64, 0u64, 0u64);
            for r in 0..cfg.runs {
                if timeouts >= MAX_TIMEOUTS {
                    break;
                }
                let mut rng = RngStream::for_replicate(cfg.seed, r);
                let start = Instant::now();
                let deadline = Deadline(start + budget);
                let opts = SimOptions {
                    save_policy: tpsim_core::SavePolicy::Endpoints,
                    interrupt: &deadline,
                    ..Default::default()
                };
                match simulate(&system, span, bm.method, &mut rng, &opts) {
                    Ok(tr) => {
                        let took = start.elapsed();
                        if took > budget {
                            timeouts += 1;
                            continue;
                        }
                        times.push(took.as_secs_f64());
                        events += tr.events.len() as u64;
                        bounds += tr.diagnostics.bound_evaluations;
                    }
                    Err(Error::Interrupted) => timeouts += 1,
                    Err(Error::Solver { source, .. }) if *source == Error::Interrupted => timeouts += 1,
                    Err(source) => return Err(CliError::Simulation { replicate: r, source }),
                }
            }
            log::info!("{name} V={v}: {} of {} runs completed", times.len(), cfg.runs);
            rows.push(BenchRow {
                method: name.clone(),
                nodes: v,
                runs_completed: times.len() as u64,
                median_seconds: median(&mut times),
                rejection_rate: (bounds > 0).then(|| 1.0 - events as f64 / bounds as f64),
            });
        }
    }
    Ok(rows)
}

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { 0.5 * (xs[n / 2 - 1] + xs[n / 2]) })
}

/// `method,V,runs_completed,median_seconds,rejection_rate`; cells without a
/// completed run hold `NA`.
pub fn write_bench(path: &Path, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "V", "runs_completed", "median_seconds", "rejection_rate"])?;
    let na = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), fmt17);
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.nodes.to_string(),
            r.runs_completed.to_string(),
            na(r.median_seconds),
            na(r.rejection_rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
