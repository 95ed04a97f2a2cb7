use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use super::{mask, normalize, AddCombError};
use crate::func::{convolve_count, ExactFn};
use crate::group::{Element, GroupRef};

/// `{ab : a in A, b in B}`, sorted.
pub fn product_set(g: &GroupRef, a: &[Element], b: &[Element]) -> Result<Vec<Element>, AddCombError> {
    let a = normalize(g, a, "A")?;
    let b = normalize(g, b, "B")?;
    let mut hit = vec![false; g.order()];
    for &x in &a {
        for &y in &b {
            hit[g.mul(x, y)] = true;
        }
    }
    Ok(g.elements().filter(|&x| hit[x]).collect())
}

/// `{a^-1 : a in A}`, sorted.
pub fn inverse_set(g: &GroupRef, a: &[Element]) -> Result<Vec<Element>, AddCombError> {
    let mut out: Vec<Element> = normalize(g, a, "A")?.into_iter().map(|x| g.inv(x)).collect();
    out.sort_unstable();
    Ok(out)
}

/// `|A A^-1| / |A|`.
pub fn doubling_ratio(g: &GroupRef, a: &[Element]) -> Result<f64, AddCombError> {
    let a = normalize(g, a, "A")?;
    let diff = product_set(g, &a, &inverse_set(g, &a)?)?;
    Ok(diff.len() as f64 / a.len() as f64)
}

/// Which inclusion of an eta-closed pair failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Inclusion {
    /// `Z^- X` inside `Z`.
    ZMinusX,
    /// `Z X^-1` inside `Z^+`.
    ZXInverse,
}

impl fmt::Display for Inclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inclusion::ZMinusX => "Z^- X in Z",
            Inclusion::ZXInverse => "Z X^-1 in Z^+",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaClosedWitness {
    pub z: Vec<Element>,
    pub x: Vec<Element>,
    pub z_plus: Vec<Element>,
    pub z_minus: Vec<Element>,
    /// `|Z^+ \ Z^-| / |Z|`.
    pub eta_achieved: f64,
}

/// Verifies `Z^- X ⊆ Z` and `Z X^-1 ⊆ Z^+`; with `neighbourhoods` set, also
/// requires all four sets to be symmetric and to contain the identity.
pub fn check_eta_closed(
    g: &GroupRef,
    z: &[Element],
    x: &[Element],
    z_plus: &[Element],
    z_minus: &[Element],
    neighbourhoods: bool,
) -> Result<EtaClosedWitness, AddCombError> {
    let z = normalize(g, z, "Z")?;
    let x = normalize(g, x, "X")?;
    let z_plus = normalize(g, z_plus, "Z+")?;
    let z_minus = normalize(g, z_minus, "Z-")?;
    if neighbourhoods {
        for (set, name) in [(&z, "Z"), (&x, "X"), (&z_plus, "Z+"), (&z_minus, "Z-")] {
            let m = mask(g, set);
            if !m[g.identity()] || set.iter().any(|&s| !m[g.inv(s)]) {
                return Err(AddCombError::NotSymmetric(name));
            }
        }
    }
    let in_z = mask(g, &z);
    for &l in &z_minus {
        for &r in &x {
            let p = g.mul(l, r);
            if !in_z[p] {
                return Err(AddCombError::InclusionViolation {
                    inclusion: Inclusion::ZMinusX,
                    left: l,
                    right: r,
                    product: p,
                });
            }
        }
    }
    let in_plus = mask(g, &z_plus);
    for &l in &z {
        for &r in &x {
            let p = g.mul(l, g.inv(r));
            if !in_plus[p] {
                return Err(AddCombError::InclusionViolation {
                    inclusion: Inclusion::ZXInverse,
                    left: l,
                    right: g.inv(r),
                    product: p,
                });
            }
        }
    }
    let in_minus = mask(g, &z_minus);
    let gap = z_plus.iter().filter(|&&s| !in_minus[s]).count();
    let eta_achieved = gap as f64 / z.len() as f64;
    Ok(EtaClosedWitness {
        z,
        x,
        z_plus,
        z_minus,
        eta_achieved,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverResult {
    /// Translating elements `T ⊆ X`, in the order chosen.
    pub translates: Vec<Element>,
    /// `|W X| / |W|`.
    pub bound: f64,
    /// Every `x` in `X` lies in some `W^-1 W t`, checked exhaustively.
    pub covers: bool,
}

/// Greedy maximal family of pairwise disjoint translates `W t`, `t ∈ X`,
/// scanned in increasing element order. Maximality makes
/// `{W^-1 W t : t ∈ T}` cover `X`; disjointness inside `W X` bounds `|T|`.
pub fn ruzsa_cover(g: &GroupRef, x: &[Element], w: &[Element]) -> Result<CoverResult, AddCombError> {
    let x = normalize(g, x, "X")?;
    let w = normalize(g, w, "W")?;
    let mut used = vec![false; g.order()];
    let mut translates = Vec::new();
    for &t in &x {
        let translate: Vec<Element> = w.iter().map(|&v| g.mul(v, t)).collect();
        if translate.iter().all(|&y| !used[y]) {
            for y in translate {
                used[y] = true;
            }
            translates.push(t);
        }
    }
    let bound = product_set(g, &w, &x)?.len() as f64 / w.len() as f64;
    let w_inv_w = product_set(g, &inverse_set(g, &w)?, &w)?;
    let mut covered = vec![false; g.order()];
    for &t in &translates {
        for &d in &w_inv_w {
            covered[g.mul(d, t)] = true;
        }
    }
    let covers = x.iter().all(|&y| covered[y]);
    Ok(CoverResult {
        translates,
        bound,
        covers,
    })
}

/// `r(x) = #{(a, b) ∈ A × B : ab = x}`, through the counting convolution.
pub fn representation_counts(g: &GroupRef, a: &[Element], b: &[Element]) -> Result<Vec<u64>, AddCombError> {
    let a = normalize(g, a, "A")?;
    let b = normalize(g, b, "B")?;
    let one = Rational64::from_integer(1);
    let ia = ExactFn::from_fn(g, |x| if a.binary_search(&x).is_ok() { one } else { Rational64::from_integer(0) });
    let ib = ExactFn::from_fn(g, |x| if b.binary_search(&x).is_ok() { one } else { Rational64::from_integer(0) });
    let conv = convolve_count(&ia, &ib)?;
    Ok(conv.values().iter().map(|v| v.to_integer() as u64).collect())
}

/// `E(A, B) = #{(a, a', b, b') : ab = a'b'} = sum_x r(x)^2`.
pub fn energy(g: &GroupRef, a: &[Element], b: &[Element]) -> Result<u64, AddCombError> {
    Ok(representation_counts(g, a, b)?.iter().map(|r| r * r).sum())
}
