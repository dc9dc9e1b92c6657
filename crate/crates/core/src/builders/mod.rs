//! Constructors that instantiate the node-kind catalog for each application
//! domain. Every builder returns a resource-augmented network.

mod amm;
mod currency;
mod en;
mod permission;
mod residuated;
mod supply;
mod term;

pub use amm::{build_amm, AmmLink, AmmParams, Pool};
pub use currency::{build_multicurrency, CurrencyEdge, CurrencyParams, Slippage};
pub use en::{build_eisenberg_noe, payment_vector, EnParams};
pub use permission::{
    build_permission_network, check_min_delegation, least_privilege_section, DelegationViolation, MinDelegationReport,
    PermissionEdge, PermissionEntity, PermissionParams, SetConversion,
};
pub use residuated::{build_compliance_network, build_residuated, compliance_params, QualityEdge, ResiduatedParams};
pub use supply::{
    build_supply_chain, solve_adaptive, supply_chain_example, Adaptation, AdaptiveOutcome, SupplyEdge, SupplyNode,
    SupplyParams,
};
pub use term::{build_term_structure, TermEdge, TermParams};

use crate::error::{Error, Result};

/// Position of `name` in `labels`.
pub(crate) fn resolve(labels: &[String], name: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == name)
        .ok_or_else(|| Error::InvalidParams(format!("unknown vertex `{name}`")))
}

/// `labels` if given, else `V0, V1, ...`; checks the count.
pub(crate) fn labels_or_default(labels: &Option<Vec<String>>, n: usize) -> Result<Vec<String>> {
    match labels {
        Some(l) if l.len() == n => Ok(l.clone()),
        Some(l) => Err(Error::InvalidParams(format!("{} labels for {n} vertices", l.len()))),
        None => Ok((0..n).map(|i| format!("V{i}")).collect()),
    }
}

pub(crate) fn check_nonneg(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{what} must be finite and nonnegative, got {x}"
        )))
    }
}
