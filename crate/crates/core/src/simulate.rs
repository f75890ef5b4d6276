//! Single entry point over every simulation method.

use crate::error::Result;
use crate::inverse::{simulate_inverse, InverseConfig, InverseMethod};
use crate::queuing::{simulate_coevolve, simulate_first_reaction, CoevolveOptions};
use crate::rng::RngStream;
use crate::system::{Observe, ProcessSystem};
use crate::thinning::{simulate_direct, simulate_thinning};
use crate::trajectory::{SavePolicy, TimeSpan, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    InverseRootfind,
    ChvSimple,
    ChvFull,
    Thinning,
    Direct,
    FirstReaction,
    Coevolve,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::InverseRootfind,
        Method::ChvSimple,
        Method::ChvFull,
        Method::Thinning,
        Method::Direct,
        Method::FirstReaction,
        Method::Coevolve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::InverseRootfind => "inverse_rootfind",
            Method::ChvSimple => "chv_simple",
            Method::ChvFull => "chv_full",
            Method::Thinning => "thinning",
            Method::Direct => "direct",
            Method::FirstReaction => "first_reaction",
            Method::Coevolve => "coevolve",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Methods that only accept rates constant between jumps.
    pub fn requires_constant_rates(self) -> bool {
        matches!(self, Method::Direct | Method::FirstReaction)
    }
}

/// Cooperative cancellation, polled periodically by every simulator.
pub trait Interrupt {
    fn should_stop(&self) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NeverInterrupt;

impl Interrupt for NeverInterrupt {
    fn should_stop(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy)]
pub struct SimOptions<'a> {
    pub save_policy: SavePolicy,
    pub inverse: InverseConfig,
    pub coevolve: CoevolveOptions,
    pub interrupt: &'a dyn Interrupt,
}

impl Default for SimOptions<'_> {
    fn default() -> Self {
        Self {
            save_policy: SavePolicy::default(),
            inverse: InverseConfig::default(),
            coevolve: CoevolveOptions::default(),
            interrupt: &NeverInterrupt,
        }
    }
}

pub fn simulate<S: Clone + Observe>(
    system: &ProcessSystem<S>,
    span: TimeSpan,
    method: Method,
    rng: &mut RngStream,
    opts: &SimOptions<'_>,
) -> Result<Trajectory> {
    let (policy, stop) = (opts.save_policy, opts.interrupt);
    match method {
        Method::InverseRootfind => simulate_inverse(system, span, InverseMethod::RootFind, rng, &opts.inverse, policy, stop),
        Method::ChvSimple => simulate_inverse(system, span, InverseMethod::ChvSimple, rng, &opts.inverse, policy, stop),
        Method::ChvFull => simulate_inverse(system, span, InverseMethod::ChvFull, rng, &opts.inverse, policy, stop),
        Method::Thinning => simulate_thinning(system, span, rng, policy, stop),
        Method::Direct => simulate_direct(system, span, rng, policy, stop),
        Method::FirstReaction => simulate_first_reaction(system, span, rng, policy, stop),
        Method::Coevolve => simulate_coevolve(system, span, rng, opts.coevolve, policy, stop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_name(m.name()), Some(m));
        }
        assert_eq!(Method::from_name("gillespie"), None);
    }
}
