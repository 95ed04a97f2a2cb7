//! Additive-combinatorics primitives on finite groups.
//!
//! Sets are passed as element slices; they are deduplicated and sorted on
//! entry, so callers may pass them in any order.

mod bsg;
mod connectivity;
mod indices;
mod sampling;
mod sets;
mod structure;

pub use bsg::{bsg_extract, BsgOutcome};
pub use connectivity::{
    is_arithmetically_connected, signed_product, ConnectivityCertificate, ConnectivityMode, Pattern, Verdict,
    EXHAUSTIVE_LIMIT,
};
pub use indices::{is_trivial_index, nontrivial_indices, r_multi_count, trivial_indices, IndexCounts, ENUMERATION_LIMIT};
pub use sampling::{croot_sisask_trial, default_sample_size, translate_family, CsReport};
pub use sets::{
    check_eta_closed, doubling_ratio, energy, inverse_set, product_set, representation_counts, ruzsa_cover,
    CoverResult, EtaClosedWitness, Inclusion,
};
pub use structure::{find_struct_subset, StructReport};

use thiserror::Error;

use crate::func::FunctionError;
use crate::group::{Element, FiniteGroup, GroupError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AddCombError {
    #[error("set {0} is empty")]
    EmptySet(&'static str),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error("{inclusion} fails: {left} * {right} = {product} is outside the target set")]
    InclusionViolation {
        inclusion: Inclusion,
        left: Element,
        right: Element,
        product: Element,
    },
    #[error("set {0} is not a symmetric neighbourhood of the identity")]
    NotSymmetric(&'static str),
    #[error("enumeration of {size} items exceeds the limit {limit}; use sampling")]
    EnumerationTooLarge { size: u128, limit: u128 },
    #[error("energy {energy} is below the required {required}")]
    ThresholdUnmet { energy: u64, required: f64 },
    #[error("measure has zero total variation")]
    DegenerateMeasure,
    #[error("no popular pattern: {counterexample:?} has no witness")]
    NoPopularPattern { counterexample: Vec<Element> },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Sorted, deduplicated copy of `set` after range checks.
pub(crate) fn normalize(g: &FiniteGroup, set: &[Element], name: &'static str) -> Result<Vec<Element>, AddCombError> {
    if set.is_empty() {
        return Err(AddCombError::EmptySet(name));
    }
    for &x in set {
        g.check_element(x)?;
    }
    let mut out = set.to_vec();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub(crate) fn mask(g: &FiniteGroup, set: &[Element]) -> Vec<bool> {
    let mut m = vec![false; g.order()];
    for &x in set {
        m[x] = true;
    }
    m
}
