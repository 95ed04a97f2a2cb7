//! Finite groups given by Cayley tables, their subgroups and left cosets.
//!
//! Elements are plain indices `0..n`. The identity is derived from the table
//! rather than assumed to be `0`, so tables from external sources can be
//! loaded unchanged.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Index of a group element.
pub type Element = usize;

/// Shared handle to a validated group.
pub type GroupRef = Arc<FiniteGroup>;

/// Largest order accepted by the family constructors.
pub const MAX_CONSTRUCT_ORDER: usize = 4096;

/// Default cap on the group order for subgroup enumeration.
pub const DEFAULT_SUBGROUP_CAP: usize = 384;

/// Environment variable overriding [`DEFAULT_SUBGROUP_CAP`].
pub const CAP_ENV_VAR: &str = "COSETFORGE_CAP";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("empty table")]
    Empty,
    #[error("table is not square: row {row} has {len} entries, expected {order}")]
    NotSquare { row: usize, len: usize, order: usize },
    #[error("entry {value} at ({row}, {col}) is out of range for order {order}")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },
    #[error("row {0} is not a permutation")]
    NonBijectiveRow(usize),
    #[error("column {0} is not a permutation")]
    NonBijectiveColumn(usize),
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no two-sided inverse")]
    MissingInverse(Element),
    #[error("not associative: ({0}*{1})*{2} != {0}*({1}*{2})")]
    NonAssociative(Element, Element, Element),
    #[error("group of order {order} exceeds the size limit {limit}")]
    SizeLimitExceeded { order: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("element {element} is out of range for order {order}")]
    ElementOutOfRange { element: Element, order: usize },
    #[error("{0:?} is not a subgroup")]
    NotASubgroup(Vec<Element>),
}

/// A finite group of order `n` with multiplication table `table[a*n + b] = a*b`.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Vec<Element>,
    identity: Element,
    inverses: Vec<Element>,
    cyclic_factors: Option<Vec<usize>>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("identity", &self.identity)
            .finish_non_exhaustive()
    }
}

impl FiniteGroup {
    /// Validates a Cayley table, checking associativity on all triples.
    pub fn validate(table: Vec<Vec<Element>>, name: impl Into<String>) -> Result<Self, GroupError> {
        Self::from_rows(table, name, true)
    }

    /// Like [`FiniteGroup::validate`] but skips the cubic associativity check.
    pub fn validate_trusted(
        table: Vec<Vec<Element>>,
        name: impl Into<String>,
    ) -> Result<Self, GroupError> {
        Self::from_rows(table, name, false)
    }

    fn from_rows(
        rows: Vec<Vec<Element>>,
        name: impl Into<String>,
        check_associativity: bool,
    ) -> Result<Self, GroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        let mut flat = Vec::with_capacity(n * n);
        for (row, entries) in rows.into_iter().enumerate() {
            if entries.len() != n {
                return Err(GroupError::NotSquare {
                    row,
                    len: entries.len(),
                    order: n,
                });
            }
            flat.extend(entries);
        }
        Self::from_flat(flat, n, name.into(), check_associativity)
    }

    fn from_flat(
        table: Vec<Element>,
        n: usize,
        name: String,
        check_associativity: bool,
    ) -> Result<Self, GroupError> {
        for (idx, &value) in table.iter().enumerate() {
            if value >= n {
                return Err(GroupError::EntryOutOfRange {
                    row: idx / n,
                    col: idx % n,
                    value,
                    order: n,
                });
            }
        }
        let mut seen = vec![false; n];
        for row in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for col in 0..n {
                let v = table[row * n + col];
                if seen[v] {
                    return Err(GroupError::NonBijectiveRow(row));
                }
                seen[v] = true;
            }
        }
        for col in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for row in 0..n {
                let v = table[row * n + col];
                if seen[v] {
                    return Err(GroupError::NonBijectiveColumn(col));
                }
                seen[v] = true;
            }
        }

        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e * n + x] == x && table[x * n + e] == x))
            .ok_or(GroupError::NoIdentity)?;

        let mut inverses = vec![0; n];
        for x in 0..n {
            // rows are permutations, so the right inverse is unique
            let y = (0..n)
                .find(|&y| table[x * n + y] == identity)
                .ok_or(GroupError::MissingInverse(x))?;
            if table[y * n + x] != identity {
                return Err(GroupError::MissingInverse(x));
            }
            inverses[x] = y;
        }

        if check_associativity {
            for a in 0..n {
                for b in 0..n {
                    let ab = table[a * n + b];
                    for c in 0..n {
                        if table[ab * n + c] != table[a * n + table[b * n + c]] {
                            return Err(GroupError::NonAssociative(a, b, c));
                        }
                    }
                }
            }
        }

        Ok(FiniteGroup {
            name,
            order: n,
            table,
            identity,
            inverses,
            cyclic_factors: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Element {
        self.identity
    }

    pub fn inverses(&self) -> &[Element] {
        &self.inverses
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: Element) -> Element {
        self.inverses[a]
    }

    /// Product of a word of elements, left to right.
    pub fn product<I: IntoIterator<Item = Element>>(&self, word: I) -> Element {
        word.into_iter().fold(self.identity, |acc, x| self.mul(acc, x))
    }

    /// `x` raised to `+1` or `-1`.
    #[inline]
    pub fn signed(&self, x: Element, sign: i8) -> Element {
        if sign < 0 {
            self.inv(x)
        } else {
            x
        }
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.order
    }

    /// Rows of the Cayley table.
    pub fn rows(&self) -> Vec<Vec<Element>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order;
        (0..n).all(|a| (a + 1..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, x: Element) -> usize {
        let mut k = 1;
        let mut y = x;
        while y != self.identity {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    /// Cyclic factor orders `[n_1, .., n_r]` when the group was built as a
    /// product of cyclic groups. Element `x` then has mixed-radix coordinates
    /// with the last factor varying fastest.
    pub fn cyclic_factors(&self) -> Option<&[usize]> {
        self.cyclic_factors.as_deref()
    }

    /// Records a cyclic factorization after checking that the table really is
    /// the mixed-radix product of those cyclic groups.
    pub fn with_cyclic_factors(mut self, factors: Vec<usize>) -> Result<Self, GroupError> {
        if factors.iter().product::<usize>() != self.order || factors.contains(&0) {
            return Err(GroupError::InvalidParameter(format!(
                "cyclic factors {factors:?} do not multiply to {}",
                self.order
            )));
        }
        let coords = |x: usize| mixed_radix(x, &factors);
        for a in 0..self.order {
            let ca = coords(a);
            for b in 0..self.order {
                let cb = coords(b);
                let sum: Vec<usize> = ca
                    .iter()
                    .zip(&cb)
                    .zip(&factors)
                    .map(|((x, y), m)| (x + y) % m)
                    .collect();
                if self.mul(a, b) != from_mixed_radix(&sum, &factors) {
                    return Err(GroupError::InvalidParameter(format!(
                        "table is not the product of cyclic groups {factors:?}"
                    )));
                }
            }
        }
        self.cyclic_factors = Some(factors);
        Ok(self)
    }

    /// Mixed-radix coordinates of `x` with respect to [`cyclic_factors`](Self::cyclic_factors).
    pub fn coordinates(&self, x: Element) -> Option<Vec<usize>> {
        self.cyclic_factors.as_ref().map(|f| mixed_radix(x, f))
    }

    pub fn check_element(&self, x: Element) -> Result<(), GroupError> {
        if x < self.order {
            Ok(())
        } else {
            Err(GroupError::ElementOutOfRange {
                element: x,
                order: self.order,
            })
        }
    }

    pub fn into_ref(self) -> GroupRef {
        Arc::new(self)
    }
}

fn mixed_radix(mut x: usize, factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0; factors.len()];
    for (slot, &m) in out.iter_mut().zip(factors).rev() {
        *slot = x % m;
        x /= m;
    }
    out
}

fn from_mixed_radix(coords: &[usize], factors: &[usize]) -> usize {
    coords.iter().zip(factors).fold(0, |acc, (&c, &m)| acc * m + c)
}

fn check_size(order: usize) -> Result<(), GroupError> {
    if order > MAX_CONSTRUCT_ORDER {
        Err(GroupError::SizeLimitExceeded {
            order,
            limit: MAX_CONSTRUCT_ORDER,
        })
    } else {
        Ok(())
    }
}

/// The cyclic group `Z/n`, element `k` being the residue `k`.
pub fn make_cyclic(n: usize) -> Result<FiniteGroup, GroupError> {
    if n == 0 {
        return Err(GroupError::InvalidParameter("cyclic order must be positive".into()));
    }
    check_size(n)?;
    let table = (0..n * n).map(|i| (i / n + i % n) % n).collect();
    let mut g = FiniteGroup::from_flat(table, n, format!("Z{n}"), false)?;
    g.cyclic_factors = Some(vec![n]);
    Ok(g)
}

/// Direct product; the pair `(a, b)` has index `a * |H| + b`.
pub fn make_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<FiniteGroup, GroupError> {
    let (ng, nh) = (g.order(), h.order());
    let n = ng.checked_mul(nh).ok_or(GroupError::SizeLimitExceeded {
        order: usize::MAX,
        limit: MAX_CONSTRUCT_ORDER,
    })?;
    check_size(n)?;
    let mut table = Vec::with_capacity(n * n);
    for x in 0..n {
        let (a, b) = (x / nh, x % nh);
        for y in 0..n {
            let (c, d) = (y / nh, y % nh);
            table.push(g.mul(a, c) * nh + h.mul(b, d));
        }
    }
    let mut out = FiniteGroup::from_flat(table, n, format!("{}x{}", g.name, h.name), false)?;
    if let (Some(a), Some(b)) = (&g.cyclic_factors, &h.cyclic_factors) {
        out.cyclic_factors = Some(a.iter().chain(b).copied().collect());
    }
    Ok(out)
}

/// Dihedral group of order `2m`; `r^i s^j` has index `i + m*j`.
pub fn make_dihedral(m: usize) -> Result<FiniteGroup, GroupError> {
    if m == 0 {
        return Err(GroupError::InvalidParameter("dihedral parameter must be positive".into()));
    }
    let n = 2 * m;
    check_size(n)?;
    let mut table = Vec::with_capacity(n * n);
    for x in 0..n {
        let (a, b) = (x % m, x / m);
        for y in 0..n {
            let (c, d) = (y % m, y / m);
            // r^a s^b r^c s^d = r^(a + (-1)^b c) s^(b+d)
            let rot = if b == 0 { (a + c) % m } else { (a + m - c) % m };
            table.push(rot + m * ((b + d) % 2));
        }
    }
    FiniteGroup::from_flat(table, n, format!("D{m}"), false)
}

/// Elementary abelian group `(Z/2)^k`; bit `j` of an index is coordinate `k-1-j`.
pub fn make_boolean_cube(k: usize) -> Result<FiniteGroup, GroupError> {
    if k >= usize::BITS as usize - 1 || (1usize << k) > MAX_CONSTRUCT_ORDER {
        return Err(GroupError::SizeLimitExceeded {
            order: 1usize.checked_shl(k as u32).unwrap_or(usize::MAX),
            limit: MAX_CONSTRUCT_ORDER,
        });
    }
    let n = 1usize << k;
    let table = (0..n * n).map(|i| (i / n) ^ (i % n)).collect();
    let mut g = FiniteGroup::from_flat(table, n, format!("Z2^{k}"), false)?;
    g.cyclic_factors = Some(vec![2; k]);
    Ok(g)
}

/// Largest degree accepted by [`make_symmetric`].
pub const MAX_SYMMETRIC_DEGREE: usize = 6;

/// Symmetric group on `m` points. Permutations are listed in lexicographic
/// order (identity first) and `a*b` is the composition "apply `b`, then `a`".
pub fn make_symmetric(m: usize) -> Result<FiniteGroup, GroupError> {
    if m == 0 {
        return Err(GroupError::InvalidParameter("symmetric degree must be positive".into()));
    }
    if m > MAX_SYMMETRIC_DEGREE {
        return Err(GroupError::SizeLimitExceeded {
            order: (1..=m).product(),
            limit: 720,
        });
    }
    let perms = permutations(m);
    let index: std::collections::HashMap<&[usize], usize> =
        perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let n = perms.len();
    let mut table = Vec::with_capacity(n * n);
    let mut buf = vec![0; m];
    for a in &perms {
        for b in &perms {
            for (k, slot) in buf.iter_mut().enumerate() {
                *slot = a[b[k]];
            }
            table.push(index[buf.as_slice()]);
        }
    }
    FiniteGroup::from_flat(table, n, format!("S{m}"), false)
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..m).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

/// A subgroup of a [`FiniteGroup`]; cheap to clone.
#[derive(Clone)]
pub struct Subgroup {
    inner: Arc<SubgroupData>,
}

struct SubgroupData {
    parent: GroupRef,
    elements: Vec<Element>,
    members: Vec<bool>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.inner.elements == other.inner.elements
            && (Arc::ptr_eq(&self.inner.parent, &other.inner.parent)
                || self.inner.parent == other.inner.parent)
    }
}

impl Eq for Subgroup {}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup{:?}", self.inner.elements)
    }
}

impl Subgroup {
    /// Checks that `elements` form a subgroup of `group`.
    pub fn new(group: &GroupRef, elements: impl IntoIterator<Item = Element>) -> Result<Self, GroupError> {
        let set: BTreeSet<Element> = elements.into_iter().collect();
        for &x in &set {
            group.check_element(x)?;
        }
        let list: Vec<Element> = set.iter().copied().collect();
        let closed = set.contains(&group.identity())
            && list.iter().all(|&a| {
                set.contains(&group.inv(a)) && list.iter().all(|&b| set.contains(&group.mul(a, b)))
            });
        if !closed {
            return Err(GroupError::NotASubgroup(list));
        }
        Ok(Self::from_sorted_unchecked(group, list))
    }

    fn from_sorted_unchecked(group: &GroupRef, elements: Vec<Element>) -> Self {
        let mut members = vec![false; group.order()];
        for &x in &elements {
            members[x] = true;
        }
        Subgroup {
            inner: Arc::new(SubgroupData {
                parent: Arc::clone(group),
                elements,
                members,
            }),
        }
    }

    pub fn trivial(group: &GroupRef) -> Self {
        Self::from_sorted_unchecked(group, vec![group.identity()])
    }

    pub fn whole(group: &GroupRef) -> Self {
        Self::from_sorted_unchecked(group, group.elements().collect())
    }

    pub fn parent(&self) -> &GroupRef {
        &self.inner.parent
    }

    /// Sorted element list.
    pub fn elements(&self) -> &[Element] {
        &self.inner.elements
    }

    pub fn order(&self) -> usize {
        self.inner.elements.len()
    }

    pub fn index(&self) -> usize {
        self.parent().order() / self.order()
    }

    #[inline]
    pub fn contains(&self, x: Element) -> bool {
        self.inner.members.get(x).copied().unwrap_or(false)
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    /// Left coset `xH` with its canonical representative.
    pub fn coset_of(&self, x: Element) -> Coset {
        let g = self.parent();
        let rep = self
            .elements()
            .iter()
            .map(|&h| g.mul(x, h))
            .min()
            .expect("subgroups are nonempty");
        Coset {
            subgroup: self.clone(),
            representative: rep,
        }
    }

    /// All left cosets ordered by canonical representative.
    pub fn left_cosets(&self) -> Vec<Coset> {
        let g = self.parent();
        let mut covered = vec![false; g.order()];
        let mut out = Vec::with_capacity(self.index());
        for x in g.elements() {
            if covered[x] {
                continue;
            }
            // x is the least uncovered element, hence the minimum of xH
            for &h in self.elements() {
                covered[g.mul(x, h)] = true;
            }
            out.push(Coset {
                subgroup: self.clone(),
                representative: x,
            });
        }
        out
    }

    /// Canonical representative of the left coset of each element.
    pub fn coset_labels(&self) -> Vec<Element> {
        let g = self.parent();
        let mut labels = vec![usize::MAX; g.order()];
        for x in g.elements() {
            if labels[x] != usize::MAX {
                continue;
            }
            for &h in self.elements() {
                labels[g.mul(x, h)] = x;
            }
        }
        labels
    }

    /// Whether `xH = Hx` for every `x`.
    pub fn is_normal(&self) -> bool {
        let g = self.parent();
        g.elements().all(|x| {
            self.elements()
                .iter()
                .all(|&h| self.contains(g.mul(g.mul(x, h), g.inv(x))))
        })
    }
}

/// A left coset `rep * H`, identified by its minimal element.
#[derive(Clone, PartialEq, Eq)]
pub struct Coset {
    subgroup: Subgroup,
    representative: Element,
}

impl fmt::Debug for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.representative, self.subgroup)
    }
}

impl Coset {
    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// The canonical (minimal) representative.
    pub fn representative(&self) -> Element {
        self.representative
    }

    pub fn len(&self) -> usize {
        self.subgroup.order()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, x: Element) -> bool {
        let g = self.subgroup.parent();
        self.subgroup.contains(g.mul(g.inv(self.representative), x))
    }

    /// Sorted members.
    pub fn members(&self) -> Vec<Element> {
        let g = self.subgroup.parent();
        let mut out: Vec<Element> = self
            .subgroup
            .elements()
            .iter()
            .map(|&h| g.mul(self.representative, h))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Smallest subgroup containing `gens`.
pub fn generated_subgroup(group: &GroupRef, gens: &[Element]) -> Result<Subgroup, GroupError> {
    for &x in gens {
        group.check_element(x)?;
    }
    Ok(Subgroup::from_sorted_unchecked(group, closure(group, gens)))
}

fn closure(group: &FiniteGroup, gens: &[Element]) -> Vec<Element> {
    let mut members = vec![false; group.order()];
    let mut queue = VecDeque::new();
    members[group.identity()] = true;
    queue.push_back(group.identity());
    while let Some(x) = queue.pop_front() {
        // finite group: closure under right multiplication by generators suffices
        for &s in gens {
            let y = group.mul(x, s);
            if !members[y] {
                members[y] = true;
                queue.push_back(y);
            }
        }
    }
    members
        .iter()
        .enumerate()
        .filter_map(|(x, &m)| m.then_some(x))
        .collect()
}

/// Subgroup-enumeration cap, honouring `COSETFORGE_CAP`.
pub fn subgroup_cap() -> usize {
    std::env::var(CAP_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SUBGROUP_CAP)
}

/// Every subgroup of `group`, sorted by order and then by element list.
pub fn enumerate_subgroups(group: &GroupRef) -> Result<Vec<Subgroup>, GroupError> {
    enumerate_subgroups_with_cap(group, subgroup_cap())
}

pub fn enumerate_subgroups_with_cap(group: &GroupRef, cap: usize) -> Result<Vec<Subgroup>, GroupError> {
    let n = group.order();
    if n > cap {
        return Err(GroupError::SizeLimitExceeded { order: n, limit: cap });
    }
    // Start from cyclic subgroups and join one more generator at a time until
    // nothing new appears. Every subgroup K is reached: joining elements of K
    // never leaves K, and each join strictly grows the current subgroup.
    let mut seen: HashSet<Vec<Element>> = HashSet::new();
    let mut frontier: Vec<(Vec<Element>, Vec<Element>)> = Vec::new();
    for x in group.elements() {
        let elems = closure(group, &[x]);
        if seen.insert(elems.clone()) {
            frontier.push((vec![x], elems));
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (gens, elems) in &frontier {
            let mut member = vec![false; n];
            for &e in elems {
                member[e] = true;
            }
            for x in group.elements() {
                if member[x] {
                    continue;
                }
                let mut g2 = gens.clone();
                g2.push(x);
                let joined = closure(group, &g2);
                if seen.insert(joined.clone()) {
                    next.push((g2, joined));
                }
            }
        }
        frontier = next;
    }
    let mut all: Vec<Vec<Element>> = seen.into_iter().collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(all
        .into_iter()
        .map(|elems| Subgroup::from_sorted_unchecked(group, elems))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: usize) -> GroupRef {
        make_cyclic(n).unwrap().into_ref()
    }

    #[test]
    fn validates_z2() {
        let g = FiniteGroup::validate(vec![vec![0, 1], vec![1, 0]], "Z2").unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.identity(), 0);
    }

    #[test]
    fn rejects_constant_rows() {
        let err = FiniteGroup::validate(vec![vec![0, 0], vec![0, 0]], "bad").unwrap_err();
        assert_eq!(err, GroupError::NonBijectiveRow(0));
    }

    #[test]
    fn identity_need_not_be_zero() {
        // Z/3 relabelled so that the identity is element 2
        let relabel = [1, 2, 0];
        let mut rows = vec![vec![0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                rows[relabel[a]][relabel[b]] = relabel[(a + b) % 3];
            }
        }
        let g = FiniteGroup::validate(rows, "Z3'").unwrap();
        assert_eq!(g.identity(), 1);
        for x in 0..3 {
            assert_eq!(g.mul(x, g.inv(x)), 1);
        }
    }

    #[test]
    fn detects_non_associative_latin_square() {
        // a Latin square with identity 0 that is not a group
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(
            FiniteGroup::validate(rows.clone(), "loop"),
            Err(GroupError::NonAssociative(..))
        ));
        assert!(FiniteGroup::validate_trusted(rows, "loop").is_ok());
    }

    #[test]
    fn missing_identity() {
        // x*y = x - y mod 3 has rows and columns bijective but no identity
        let rows = (0..3).map(|a| (0..3).map(|b| (a + 3 - b) % 3).collect()).collect();
        assert_eq!(FiniteGroup::validate(rows, "sub").unwrap_err(), GroupError::NoIdentity);
    }

    #[test]
    fn cyclic_inverses() {
        let g = make_cyclic(4).unwrap();
        assert_eq!(g.inverses(), &[0, 3, 2, 1]);
    }

    #[test]
    fn klein_four_has_exponent_two() {
        let z2 = make_cyclic(2).unwrap();
        let v = make_product(&z2, &z2).unwrap();
        assert_eq!(v.order(), 4);
        assert!(v.elements().all(|x| v.mul(x, x) == v.identity()));
        assert_eq!(v.cyclic_factors(), Some(&[2, 2][..]));
    }

    fn order_census(g: &FiniteGroup) -> Vec<usize> {
        let mut orders: Vec<usize> = g.elements().map(|x| g.element_order(x)).collect();
        orders.sort_unstable();
        orders
    }

    #[test]
    fn d3_and_s3_share_order_census() {
        let d3 = make_dihedral(3).unwrap();
        let s3 = make_symmetric(3).unwrap();
        assert_eq!(order_census(&d3), vec![1, 2, 2, 2, 3, 3]);
        assert_eq!(order_census(&s3), vec![1, 2, 2, 2, 3, 3]);
    }

    #[test]
    fn s3_table_matches_brute_force_composition() {
        let s3 = make_symmetric(3).unwrap();
        let perms = permutations(3);
        assert_eq!(perms.len(), 6);
        for (i, a) in perms.iter().enumerate() {
            for (j, b) in perms.iter().enumerate() {
                let composed: Vec<usize> = (0..3).map(|k| a[b[k]]).collect();
                assert_eq!(perms[s3.mul(i, j)], composed);
            }
        }
        // and it survives full validation
        FiniteGroup::validate(s3.rows(), "S3").unwrap();
    }

    #[test]
    fn families_validate() {
        for g in [
            make_dihedral(6).unwrap(),
            make_boolean_cube(3).unwrap(),
            make_symmetric(4).unwrap(),
            make_product(&make_cyclic(2).unwrap(), &make_cyclic(4).unwrap()).unwrap(),
        ] {
            FiniteGroup::validate(g.rows(), g.name()).unwrap();
        }
        assert_eq!(make_dihedral(6).unwrap().order(), 12);
        assert_eq!(make_boolean_cube(4).unwrap().order(), 16);
        assert!(matches!(make_symmetric(7), Err(GroupError::SizeLimitExceeded { .. })));
    }

    #[test]
    fn cyclic_factor_check() {
        let g = make_dihedral(2).unwrap();
        // D2 is the Klein group but its labels are i + 2j, i.e. (j, i) in mixed radix
        assert!(g.clone().with_cyclic_factors(vec![2, 2]).is_ok());
        assert!(make_cyclic(4).unwrap().with_cyclic_factors(vec![2, 2]).is_err());
    }

    #[test]
    fn generated_subgroups() {
        let g = z(6);
        assert_eq!(generated_subgroup(&g, &[2]).unwrap().elements(), &[0, 2, 4]);
        assert_eq!(generated_subgroup(&z(5), &[3]).unwrap().order(), 5);
        assert!(generated_subgroup(&g, &[]).unwrap().is_trivial());

        let s3 = make_symmetric(3).unwrap().into_ref();
        let transposition = (0..6).find(|&x| s3.element_order(x) == 2).unwrap();
        let three_cycle = (0..6).find(|&x| s3.element_order(x) == 3).unwrap();
        assert_eq!(generated_subgroup(&s3, &[transposition, three_cycle]).unwrap().order(), 6);
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(enumerate_subgroups(&z(4)).unwrap().len(), 3);
        let z2 = make_cyclic(2).unwrap();
        let v = make_product(&z2, &z2).unwrap().into_ref();
        assert_eq!(enumerate_subgroups(&v).unwrap().len(), 5);
        let s3 = make_symmetric(3).unwrap().into_ref();
        assert_eq!(enumerate_subgroups(&s3).unwrap().len(), 6);
        let s4 = make_symmetric(4).unwrap().into_ref();
        assert_eq!(enumerate_subgroups(&s4).unwrap().len(), 30);
        let d6 = make_dihedral(6).unwrap().into_ref();
        assert_eq!(enumerate_subgroups(&d6).unwrap().len(), 16);
        assert_eq!(enumerate_subgroups(&z(12)).unwrap().len(), 6);
    }

    #[test]
    fn enumeration_respects_cap() {
        assert!(matches!(
            enumerate_subgroups_with_cap(&z(12), 10),
            Err(GroupError::SizeLimitExceeded { order: 12, limit: 10 })
        ));
    }

    #[test]
    fn cosets_of_order_two_in_z6() {
        let g = z(6);
        let h = Subgroup::new(&g, [0, 3]).unwrap();
        let members: Vec<Vec<usize>> = h.left_cosets().iter().map(Coset::members).collect();
        assert_eq!(members, vec![vec![0, 3], vec![1, 4], vec![2, 5]]);
        assert_eq!(h.coset_of(4).representative(), 1);
    }

    #[test]
    fn whole_group_is_one_coset() {
        let g = make_symmetric(3).unwrap().into_ref();
        let cosets = Subgroup::whole(&g).left_cosets();
        assert_eq!(cosets.len(), 1);
        assert_eq!(cosets[0].members(), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn s3_cosets_of_order_two_subgroup() {
        let g = make_symmetric(3).unwrap().into_ref();
        let t = (0..6).find(|&x| g.element_order(x) == 2).unwrap();
        let h = generated_subgroup(&g, &[t]).unwrap();
        let cosets = h.left_cosets();
        assert_eq!(cosets.len(), 3);
        let mut all: Vec<usize> = Vec::new();
        for c in &cosets {
            // direct multiplication rep * h
            let mut direct: Vec<usize> = h.elements().iter().map(|&y| g.mul(c.representative(), y)).collect();
            direct.sort_unstable();
            assert_eq!(direct, c.members());
            all.extend(c.members());
        }
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
        assert!(!h.is_normal());
    }

    #[test]
    fn rejects_non_subgroup() {
        let g = z(6);
        assert!(matches!(Subgroup::new(&g, [0, 1]), Err(GroupError::NotASubgroup(_))));
    }
}
