//! JSON run and benchmark configuration. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use tpsim_core::hawkes::IntervalRule;
use tpsim_core::{Method, SavePolicy};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub process: ProcessConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphConfig>,
    pub method: MethodName,
    pub tspan: [f64; 2],
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: u64,
    #[serde(default)]
    pub save_policy: SavePolicyConfig,
    /// Reuse unused samples of constant-rate processes under `coevolve`.
    #[serde(default)]
    pub reuse_samples: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationConfig>,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessConfig {
    /// Independent homogeneous Poisson processes, one per rate.
    Homogeneous { rates: Vec<f64> },
    HawkesBrute(HawkesConfig),
    HawkesRecursive(HawkesConfig),
    /// Reaction network with rates constant between events.
    CustomConstant {
        initial_state: Vec<f64>,
        reactions: Vec<ReactionConfig>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HawkesConfig {
    pub baseline: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub interval_rule: IntervalRuleName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalRuleName {
    #[default]
    HalfInverseUpper,
    UnboundedAtBaseline,
}

impl From<IntervalRuleName> for IntervalRule {
    fn from(r: IntervalRuleName) -> Self {
        match r {
            IntervalRuleName::HalfInverseUpper => IntervalRule::HalfInverseUpper,
            IntervalRuleName::UnboundedAtBaseline => IntervalRule::UnboundedAtBaseline,
        }
    }
}

/// Mass-action reaction: rate `coefficient · Π state[k]` over `reactants`,
/// firing adds `delta` to the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    pub coefficient: f64,
    #[serde(default)]
    pub reactants: Vec<usize>,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphConfig {
    /// In-neighborhoods: `explicit[i]` lists the nodes whose events excite `i`.
    Explicit(Vec<Vec<usize>>),
    ErdosRenyi { nodes: usize, p: f64, graph_seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    InverseRootfind,
    ChvSimple,
    ChvFull,
    Thinning,
    Direct,
    FirstReaction,
    Coevolve,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::InverseRootfind => Method::InverseRootfind,
            MethodName::ChvSimple => Method::ChvSimple,
            MethodName::ChvFull => Method::ChvFull,
            MethodName::Thinning => Method::Thinning,
            MethodName::Direct => Method::Direct,
            MethodName::FirstReaction => Method::FirstReaction,
            MethodName::Coevolve => Method::Coevolve,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SavePolicyConfig {
    #[default]
    EveryEvent,
    Grid { dt: f64 },
    Endpoints,
}

impl From<SavePolicyConfig> for SavePolicy {
    fn from(p: SavePolicyConfig) -> Self {
        match p {
            SavePolicyConfig::EveryEvent => SavePolicy::EveryEvent,
            SavePolicyConfig::Grid { dt } => SavePolicy::Grid { dt },
            SavePolicyConfig::Endpoints => SavePolicy::Endpoints,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default = "default_qq_points")]
    pub qq_points: usize,
    /// Parameters used for the compensator instead of the simulated ones,
    /// e.g. to check that a misspecified model is rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensator: Option<CompensatorOverride>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            qq_points: default_qq_points(),
            compensator: None,
        }
    }
}

fn default_qq_points() -> usize {
    99
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompensatorOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(CliError::from_json)?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Up-front method/process compatibility and range checks.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let [t0, t1] = self.tspan;
        if !(t0 >= 0.0 && t1 > t0 && t1.is_finite()) {
            return bad(format!("tspan must satisfy 0 <= t0 < T < inf, got [{t0}, {t1}]"));
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if let SavePolicyConfig::Grid { dt } = self.save_policy {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("save_policy.grid.dt must be positive, got {dt}"));
            }
        }
        let method = Method::from(self.method);
        match &self.process {
            ProcessConfig::Homogeneous { rates } => {
                if rates.is_empty() {
                    return bad("homogeneous process needs at least one rate".into());
                }
                if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
                    return bad("homogeneous rates must be finite and non-negative".into());
                }
                if self.graph.is_some() {
                    return bad("graph is only used by Hawkes processes".into());
                }
            }
            ProcessConfig::HawkesBrute(h) | ProcessConfig::HawkesRecursive(h) => {
                if !(h.baseline > 0.0 && h.alpha >= 0.0 && h.beta > 0.0) {
                    return bad("Hawkes parameters need baseline > 0, alpha >= 0, beta > 0".into());
                }
                if method.requires_constant_rates() {
                    return bad(format!("method {} requires rates constant between events", method.name()));
                }
                match &self.graph {
                    None => return bad("Hawkes processes need a graph".into()),
                    Some(GraphConfig::ErdosRenyi { nodes, p, .. }) => {
                        if *nodes == 0 || !(0.0..=1.0).contains(p) {
                            return bad("erdos_renyi needs nodes >= 1 and p in [0, 1]".into());
                        }
                    }
                    Some(GraphConfig::Explicit(adj)) => {
                        if adj.is_empty() || adj.iter().flatten().any(|&j| j >= adj.len()) {
                            return bad("explicit graph must be non-empty with valid node indices".into());
                        }
                    }
                }
            }
            ProcessConfig::CustomConstant { initial_state, reactions } => {
                if reactions.is_empty() {
                    return bad("custom_constant needs at least one reaction".into());
                }
                for (k, r) in reactions.iter().enumerate() {
                    if !(r.coefficient >= 0.0 && r.coefficient.is_finite()) {
                        return bad(format!("reaction {k}: coefficient must be finite and non-negative"));
                    }
                    if r.delta.len() != initial_state.len() {
                        return bad(format!("reaction {k}: delta length must equal the state length"));
                    }
                    if r.reactants.iter().any(|&s| s >= initial_state.len()) {
                        return bad(format!("reaction {k}: reactant index out of range"));
                    }
                }
                if self.graph.is_some() {
                    return bad("graph is only used by Hawkes processes".into());
                }
            }
        }
        if let Some(v) = &self.validation {
            if v.qq_points == 0 {
                return bad("validation.qq_points must be at least 1".into());
            }
        }
        Ok(())
    }
}

/// Benchmark grid over methods and node counts on Erdős–Rényi Hawkes systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// `<method>_<brute|recursive>`, e.g. `coevolve_recursive`.
    pub methods: Vec<String>,
    pub nodes: Vec<usize>,
    #[serde(default = "bench_runs")]
    pub runs: u64,
    #[serde(default = "bench_horizon")]
    pub horizon: f64,
    #[serde(default = "bench_timeout")]
    pub timeout_seconds: f64,
    #[serde(default = "bench_p")]
    pub p: f64,
    #[serde(default = "bench_hawkes")]
    pub hawkes: HawkesConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub graph_seed: u64,
}

fn bench_runs() -> u64 {
    20
}

fn bench_horizon() -> f64 {
    25.0
}

fn bench_timeout() -> f64 {
    10.0
}

fn bench_p() -> f64 {
    0.2
}

fn bench_hawkes() -> HawkesConfig {
    HawkesConfig {
        baseline: 0.5,
        alpha: 0.1,
        beta: 5.0,
        interval_rule: IntervalRuleName::UnboundedAtBaseline,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchMethod {
    pub method: Method,
    pub recursive: bool,
}

impl BenchMethod {
    pub fn parse(name: &str) -> Option<Self> {
        let (m, form) = name.rsplit_once('_')?;
        let recursive = match form {
            "brute" => false,
            "recursive" => true,
            _ => return None,
        };
        let method = Method::from_name(m)?;
        if method.requires_constant_rates() {
            return None;
        }
        Some(Self { method, recursive })
    }
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: BenchConfig = serde_json::from_str(text).map_err(CliError::from_json)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.methods.is_empty() || self.nodes.is_empty() {
            return bad("bench needs at least one method and one node count".into());
        }
        if let Some(m) = self.methods.iter().find(|m| BenchMethod::parse(m).is_none()) {
            return bad(format!("unknown bench method {m:?}; expected <method>_<brute|recursive>"));
        }
        if self.nodes.contains(&0) {
            return bad("node counts must be at least 1".into());
        }
        if self.runs == 0 || !(self.horizon > 0.0) || !(self.timeout_seconds > 0.0) {
            return bad("runs, horizon and timeout_seconds must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad("p must lie in [0, 1]".into());
        }
        let h = &self.hawkes;
        if !(h.baseline > 0.0 && h.alpha >= 0.0 && h.beta > 0.0) {
            return bad("Hawkes parameters need baseline > 0, alpha >= 0, beta > 0".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"{
        "process": {"kind": "hawkes_recursive", "baseline": 0.5, "alpha": 0.1, "beta": 2.0},
        "graph": {"erdos_renyi": {"nodes": 10, "p": 0.2, "graph_seed": 5}},
        "method": "coevolve",
        "tspan": [0.0, 200.0],
        "seed": 1,
        "replicates": 250,
        "save_policy": {"grid": {"dt": 1.0}},
        "validation": {"qq_points": 99}
    }"#;

    #[test]
    fn round_trip() {
        let cfg = RunConfig::parse(FIG1).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected_with_location() {
        let text = FIG1.replace("\"seed\": 1", "\"seed\": 1, \"sede\": 2");
        let err = RunConfig::parse(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sede") && msg.contains("line"), "{msg}");
        let text = FIG1.replace("\"beta\": 2.0", "\"beta\": 2.0, \"gamma\": 1");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn incompatible_method_rejected() {
        let text = FIG1.replace("\"coevolve\"", "\"direct\"");
        assert!(matches!(RunConfig::parse(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn other_process_kinds_parse() {
        let h = r#"{"process": {"kind": "homogeneous", "rates": [0.25]}, "method": "direct", "tspan": [0, 200]}"#;
        let cfg = RunConfig::parse(h).unwrap();
        assert_eq!(cfg.replicates, 1);
        assert_eq!(cfg.save_policy, SavePolicyConfig::EveryEvent);
        let c = r#"{"process": {"kind": "custom_constant", "initial_state": [10],
                    "reactions": [{"coefficient": 1.0, "delta": [1]},
                                  {"coefficient": 0.1, "reactants": [0], "delta": [-1]}]},
                    "method": "first_reaction", "tspan": [0, 5], "save_policy": "endpoints"}"#;
        assert!(RunConfig::parse(c).is_ok());
    }

    #[test]
    fn bench_methods() {
        assert_eq!(
            BenchMethod::parse("coevolve_recursive"),
            Some(BenchMethod { method: Method::Coevolve, recursive: true })
        );
        assert_eq!(
            BenchMethod::parse("inverse_rootfind_brute"),
            Some(BenchMethod { method: Method::InverseRootfind, recursive: false })
        );
        assert_eq!(BenchMethod::parse("direct_brute"), None);
        assert_eq!(BenchMethod::parse("coevolve"), None);
        let b = BenchConfig::parse(r#"{"methods": ["coevolve_brute"], "nodes": [1, 10]}"#).unwrap();
        assert_eq!(b.hawkes.beta, 5.0);
    }
}
