use itertools::Itertools;
use serde::Serialize;

use super::bsg::{bsg_extract, BsgOutcome};
use super::connectivity::{is_arithmetically_connected, pattern_table, signed_product, ConnectivityMode, Pattern, Verdict};
use super::sets::{doubling_ratio, energy};
use super::{mask, AddCombError};
use crate::func::{round_almost_integer, GroupFunction, Scalar};
use crate::group::Element;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructReport {
    /// `S ⊆ supp f_Z`, sorted.
    pub subset: Vec<Element>,
    pub support_size: usize,
    /// `|S| / |supp f_Z|`.
    pub size_ratio: f64,
    pub doubling: f64,
    /// The most popular pattern and its number of solutions in `A^k`.
    pub pattern: Pattern,
    pub popularity: u64,
    /// Positions (zero-based, into the word) of the two singly used variables.
    pub free_positions: (usize, usize),
    /// Solutions in the two free variables after fixing the others.
    pub inner_count: u64,
    /// `E(A z^-1, A^{-σ} y^-1)`.
    pub energy: u64,
    pub bsg: BsgOutcome,
}

/// Finds a large subset of `supp f_Z` with small doubling.
///
/// Rounds `f`, certifies `(k, l)`-connectivity of the support exhaustively,
/// picks the pattern with the most solutions, fixes every variable except two
/// that occur once in it so as to maximise the remaining solutions, and runs
/// the energy and BSG steps on the two resulting translates of `A`.
pub fn find_struct_subset<T: Scalar>(
    f: &GroupFunction<T>,
    epsilon: f64,
    k: usize,
    l: usize,
) -> Result<StructReport, AddCombError> {
    let g = f.group();
    let support = round_almost_integer(f, epsilon)?.support_set();
    let cert = is_arithmetically_connected(g, &support, k, l, ConnectivityMode::Exhaustive)?;
    if let Verdict::Counterexample { x } = cert.verdict {
        return Err(AddCombError::NoPopularPattern { counterexample: x });
    }
    let a = cert.set;
    let in_a = mask(g, &a);

    // averaging step: count solutions per pattern
    let patterns = pattern_table(k, l)?;
    let mut counts = vec![0u64; patterns.len()];
    for x in std::iter::repeat_n(a.iter().copied(), k).multi_cartesian_product() {
        for (c, p) in counts.iter_mut().zip(&patterns) {
            if in_a[signed_product(g, &x, &p.i, &p.sigma)] {
                *c += 1;
            }
        }
    }
    let (best, &popularity) = counts
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, c)| **c)
        .expect("at least one pattern");
    let pattern = patterns[best].clone();

    let once: Vec<usize> = (0..pattern.i.len())
        .filter(|&s| pattern.i.iter().filter(|&&j| j == pattern.i[s]).count() == 1)
        .collect();
    let (s1, s2) = (once[0], once[1]);
    let (v1, v2) = (pattern.i[s1], pattern.i[s2]);
    let outer: Vec<usize> = pattern.i.iter().copied().filter(|&j| j != v1 && j != v2).unique().sorted().collect();

    // fix the outer variables to maximise solutions in the two free ones
    let mut best_fix: Option<(u64, Vec<Element>)> = None;
    for assignment in std::iter::repeat_n(a.iter().copied(), outer.len()).multi_cartesian_product() {
        let mut x = vec![g.identity(); k];
        for (&j, &v) in outer.iter().zip(&assignment) {
            x[j] = v;
        }
        let mut inner = 0u64;
        for &u in &a {
            for &v in &a {
                x[v1] = u;
                x[v2] = v;
                if in_a[signed_product(g, &x, &pattern.i, &pattern.sigma)] {
                    inner += 1;
                }
            }
        }
        if best_fix.as_ref().is_none_or(|(c, _)| inner > *c) {
            best_fix = Some((inner, x));
        }
    }
    let (inner_count, x) = best_fix.expect("A is nonempty");
    let segment = |range: std::ops::Range<usize>| signed_product(g, &x, &pattern.i[range.clone()], &pattern.sigma[range]);
    let y = segment(s1 + 1..s2);
    let z = segment(s2 + 1..pattern.i.len());

    let z_inv = g.inv(z);
    let y_inv = g.inv(y);
    let a1: Vec<Element> = a.iter().map(|&u| g.mul(u, z_inv)).collect();
    let b1: Vec<Element> = a
        .iter()
        .map(|&u| g.mul(g.signed(u, -pattern.sigma[s2]), y_inv))
        .collect();
    let e = energy(g, &a1, &b1)?;
    let threshold = (a1.len() as f64).powi(3) / e as f64;
    let bsg = bsg_extract(g, &a1, &b1, threshold)?;
    let mut subset: Vec<Element> = bsg.subset.iter().map(|&u| g.mul(u, z)).collect();
    subset.sort_unstable();
    debug_assert!(subset.iter().all(|&s| in_a[s]));
    let doubling = doubling_ratio(g, &subset)?;
    Ok(StructReport {
        size_ratio: subset.len() as f64 / a.len() as f64,
        support_size: a.len(),
        subset,
        doubling,
        pattern,
        popularity,
        free_positions: (s1, s2),
        inner_count,
        energy: e,
        bsg,
    })
}
