use itertools::Itertools;
use serde::Serialize;

use super::AddCombError;

/// Largest index space enumerated exactly.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

fn check_size(k: usize, t: usize) -> Result<(), AddCombError> {
    if k == 0 || t == 0 {
        return Err(AddCombError::InvalidParameter("k and t must be positive".into()));
    }
    let size = (k as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    if size > ENUMERATION_LIMIT {
        return Err(AddCombError::EnumerationTooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// At most one value of `[k]` is taken by exactly one coordinate of `i`.
/// Coordinates are zero-based.
pub fn is_trivial_index(i: &[usize], k: usize) -> bool {
    let mut counts = vec![0usize; k];
    for &j in i {
        counts[j] += 1;
    }
    counts.iter().filter(|&&c| c == 1).count() <= 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndexCounts {
    pub trivial: u64,
    pub nontrivial: u64,
}

/// Counts trivial and nontrivial vectors in `[k]^t`.
pub fn trivial_indices(k: usize, t: usize) -> Result<IndexCounts, AddCombError> {
    check_size(k, t)?;
    let trivial = std::iter::repeat_n(0..k, t)
        .multi_cartesian_product()
        .filter(|i| is_trivial_index(i, k))
        .count() as u64;
    Ok(IndexCounts {
        trivial,
        nontrivial: (k as u64).pow(t as u32) - trivial,
    })
}

/// Nontrivial vectors of `[k]^t` in lexicographic order.
pub fn nontrivial_indices(k: usize, t: usize) -> Result<Vec<Vec<usize>>, AddCombError> {
    check_size(k, t)?;
    Ok(std::iter::repeat_n(0..k, t)
        .multi_cartesian_product()
        .filter(|i| !is_trivial_index(i, k))
        .collect())
}

/// Maps `[2r] -> [k]` whose nonempty fibres all have at least two points.
pub fn r_multi_count(k: usize, r: usize) -> Result<u64, AddCombError> {
    check_size(k, 2 * r)?;
    Ok(std::iter::repeat_n(0..k, 2 * r)
        .multi_cartesian_product()
        .filter(|i| {
            let mut counts = vec![0usize; k];
            for &j in i {
                counts[j] += 1;
            }
            counts.iter().all(|&c| c != 1)
        })
        .count() as u64)
}
