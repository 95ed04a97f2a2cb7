use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::indices::nontrivial_indices;
use super::{mask, normalize, AddCombError};
use crate::group::{Element, FiniteGroup, GroupRef};

/// Largest `|A|^k` scanned in exhaustive mode.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

/// A signed word shape: `x_{i_1}^{σ_1} ... x_{i_{2r+1}}^{σ_{2r+1}}` with
/// zero-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pattern {
    pub r: usize,
    pub i: Vec<usize>,
    pub sigma: Vec<i8>,
}

/// Evaluates the word `x_{i_1}^{σ_1} ... x_{i_t}^{σ_t}`.
pub fn signed_product(g: &FiniteGroup, x: &[Element], i: &[usize], sigma: &[i8]) -> Element {
    i.iter()
        .zip(sigma)
        .fold(g.identity(), |acc, (&j, &s)| g.mul(acc, g.signed(x[j], s)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Connected,
    Counterexample { x: Vec<Element> },
    /// Every sampled tuple had a witness; unsampled tuples are unknown.
    Inconclusive { samples: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectivityMode {
    Exhaustive,
    Samples { count: usize, seed: u64 },
}

/// Witnesses are stored as ids into `patterns`, one per examined tuple, in
/// examination order: lexicographic over `A^k` when exhaustive, draw order
/// when sampled (the drawn tuples are kept in `sampled`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectivityCertificate {
    pub k: usize,
    pub l: usize,
    pub set: Vec<Element>,
    pub verdict: Verdict,
    pub patterns: Vec<Pattern>,
    pub witnesses: Vec<u32>,
    pub sampled: Vec<Vec<Element>>,
}

impl ConnectivityCertificate {
    /// The `n`-th examined tuple and its witness pattern.
    pub fn witness(&self, n: usize) -> Option<(Vec<Element>, &Pattern)> {
        let id = *self.witnesses.get(n)? as usize;
        let x = if self.sampled.is_empty() {
            tuple_at(&self.set, self.k, n)
        } else {
            self.sampled[n].clone()
        };
        Some((x, &self.patterns[id]))
    }

    /// Re-evaluates every stored witness: nontrivial index and product in `A`.
    pub fn recheck(&self, g: &FiniteGroup) -> bool {
        let in_a = mask(g, &self.set);
        (0..self.witnesses.len()).all(|n| {
            let (x, p) = self.witness(n).expect("index in range");
            !super::is_trivial_index(&p.i, self.k) && in_a[signed_product(g, &x, &p.i, &p.sigma)]
        })
    }
}

fn tuple_at(set: &[Element], k: usize, mut n: usize) -> Vec<Element> {
    let mut x = vec![0; k];
    for slot in x.iter_mut().rev() {
        *slot = set[n % set.len()];
        n /= set.len();
    }
    x
}

/// All patterns with `r ≤ l`, ordered by `r`, then `i`, then `σ`
/// (lexicographic with `-1 < 1`).
pub(crate) fn pattern_table(k: usize, l: usize) -> Result<Vec<Pattern>, AddCombError> {
    let mut out = Vec::new();
    for r in 1..=l {
        let t = 2 * r + 1;
        let sigmas: Vec<Vec<i8>> = std::iter::repeat_n([-1i8, 1], t).multi_cartesian_product().collect();
        for i in nontrivial_indices(k, t)? {
            for sigma in &sigmas {
                out.push(Pattern {
                    r,
                    i: i.clone(),
                    sigma: sigma.clone(),
                });
            }
        }
    }
    Ok(out)
}

fn first_witness(g: &FiniteGroup, in_a: &[bool], x: &[Element], patterns: &[Pattern]) -> Option<u32> {
    patterns
        .iter()
        .position(|p| in_a[signed_product(g, x, &p.i, &p.sigma)])
        .map(|id| id as u32)
}

/// Decides `(k, l)`-arithmetic connectivity of `A`.
///
/// For each examined `x ∈ A^k`, searches `r ≤ l`, nontrivial `i` and signs
/// `σ` for a product landing in `A`; the first witness in pattern order is
/// kept. A tuple without witness is a definitive counterexample in both
/// modes.
pub fn is_arithmetically_connected(
    g: &GroupRef,
    a: &[Element],
    k: usize,
    l: usize,
    mode: ConnectivityMode,
) -> Result<ConnectivityCertificate, AddCombError> {
    if k == 0 || l == 0 {
        return Err(AddCombError::InvalidParameter("k and l must be positive".into()));
    }
    let set = normalize(g, a, "A")?;
    let patterns = pattern_table(k, l)?;
    let in_a = mask(g, &set);
    let mut witnesses = Vec::new();
    let mut sampled = Vec::new();
    let verdict = match mode {
        ConnectivityMode::Exhaustive => {
            let size = (set.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
            if size > EXHAUSTIVE_LIMIT {
                return Err(AddCombError::EnumerationTooLarge {
                    size,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let mut verdict = Verdict::Connected;
            for x in std::iter::repeat_n(set.iter().copied(), k).multi_cartesian_product() {
                match first_witness(g, &in_a, &x, &patterns) {
                    Some(id) => witnesses.push(id),
                    None => {
                        verdict = Verdict::Counterexample { x };
                        break;
                    }
                }
            }
            verdict
        }
        ConnectivityMode::Samples { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut verdict = Verdict::Inconclusive { samples: count };
            for _ in 0..count {
                let x: Vec<Element> = (0..k).map(|_| set[rng.gen_range(0..set.len())]).collect();
                match first_witness(g, &in_a, &x, &patterns) {
                    Some(id) => {
                        witnesses.push(id);
                        sampled.push(x);
                    }
                    None => {
                        verdict = Verdict::Counterexample { x };
                        break;
                    }
                }
            }
            verdict
        }
    };
    Ok(ConnectivityCertificate {
        k,
        l,
        set,
        verdict,
        patterns,
        witnesses,
        sampled,
    })
}
