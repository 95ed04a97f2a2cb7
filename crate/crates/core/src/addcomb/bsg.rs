use serde::Serialize;

use super::sets::{doubling_ratio, representation_counts};
use super::{normalize, AddCombError};
use crate::group::{Element, GroupRef};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BsgOutcome {
    /// `A' ⊆ A`, sorted.
    pub subset: Vec<Element>,
    /// The vertex of `B` whose neighbourhood produced `A'`.
    pub center: Element,
    pub energy: u64,
    /// Edge density of the popular-product graph.
    pub density: f64,
    /// `|A'| / |A|`.
    pub size_ratio: f64,
    /// `|A' A'^-1| / |A'|`.
    pub doubling: f64,
}

/// Constructive Balog–Szemerédi–Gowers extraction.
///
/// Joins `a ∈ A` to `b ∈ B` when `ab` has at least `E / (2|A||B|)`
/// representations. A pair `a, a'` is bad when it has fewer than
/// `δ^2 |B| / 2` common neighbours, `δ` being the edge density. Each `b`
/// proposes its neighbourhood minus the vertices that are bad with more
/// than a quarter of it; the largest proposal wins, ties going to smaller
/// doubling and then to the smaller center.
pub fn bsg_extract(g: &GroupRef, a: &[Element], b: &[Element], threshold: f64) -> Result<BsgOutcome, AddCombError> {
    if !(threshold > 0.0) {
        return Err(AddCombError::InvalidParameter(format!("threshold {threshold} must be positive")));
    }
    let a = normalize(g, a, "A")?;
    let b = normalize(g, b, "B")?;
    let r = representation_counts(g, &a, &b)?;
    let energy: u64 = r.iter().map(|c| c * c).sum();
    let required = (a.len() as f64).powi(3) / threshold;
    if (energy as f64) < required * (1.0 - 1e-12) {
        return Err(AddCombError::ThresholdUnmet { energy, required });
    }

    let popular = energy as f64 / (2.0 * a.len() as f64 * b.len() as f64);
    // adjacency[ai][bi]
    let adjacency: Vec<Vec<bool>> = a
        .iter()
        .map(|&x| b.iter().map(|&y| r[g.mul(x, y)] as f64 >= popular).collect())
        .collect();
    let edges = adjacency.iter().flatten().filter(|&&e| e).count();
    let density = edges as f64 / (a.len() * b.len()) as f64;
    let codegree_floor = density * density * b.len() as f64 / 2.0;
    let bad: Vec<Vec<bool>> = (0..a.len())
        .map(|i| {
            (0..a.len())
                .map(|j| {
                    let common = (0..b.len()).filter(|&t| adjacency[i][t] && adjacency[j][t]).count();
                    (common as f64) < codegree_floor
                })
                .collect()
        })
        .collect();

    let mut best: Option<(Vec<Element>, f64, Element)> = None;
    for (t, &center) in b.iter().enumerate() {
        let neighbourhood: Vec<usize> = (0..a.len()).filter(|&i| adjacency[i][t]).collect();
        if neighbourhood.is_empty() {
            continue;
        }
        let quarter = neighbourhood.len() as f64 / 4.0;
        let mut kept: Vec<usize> = neighbourhood
            .iter()
            .copied()
            .filter(|&i| (neighbourhood.iter().filter(|&&j| bad[i][j]).count() as f64) <= quarter)
            .collect();
        if kept.is_empty() {
            kept = neighbourhood;
        }
        let subset: Vec<Element> = kept.iter().map(|&i| a[i]).collect();
        let doubling = doubling_ratio(g, &subset)?;
        let better = match &best {
            None => true,
            Some((s, d, _)) => subset.len() > s.len() || (subset.len() == s.len() && doubling < *d),
        };
        if better {
            best = Some((subset, doubling, center));
        }
    }
    let (subset, doubling, center) = best.expect("the most represented product is popular, so some edge exists");
    Ok(BsgOutcome {
        size_ratio: subset.len() as f64 / a.len() as f64,
        subset,
        center,
        energy,
        density,
        doubling,
    })
}
