//! Integer combinations of coset indicators.
//!
//! A [`CosetDecomposition`] writes an integer-valued function as
//! `sum_i sum_{W in G/H_i} z_W^(i) 1_W`. [`greedy_decompose`] finds one by
//! repeatedly averaging over a subgroup whose average is (almost) integral
//! and subtracting it; [`exact_min_cost`] searches for the cheapest one.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::func::{average_over, round_almost_integer, same_group, FunctionError, GroupFunction, IntFn, Scalar};
use crate::group::{enumerate_subgroups, Coset, Element, GroupError, GroupRef, Subgroup};
use crate::spectral::{algebra_norm, SpectralError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("greedy decomposition did not finish within {0} layers")]
    IterationCap(usize),
    #[error("reconstruction differs at element {element}: expected {expected}, got {got}")]
    Mismatch { element: Element, expected: i64, got: i64 },
    #[error("search budget exhausted with no decomposition inside the cost budget")]
    BudgetExhausted,
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("{0}")]
    Invalid(String),
}

/// One layer: a subgroup and nonzero integer coefficients on some of its
/// left cosets, keyed by canonical representative.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub subgroup: Subgroup,
    pub terms: BTreeMap<Element, i64>,
}

impl Layer {
    /// Builds a layer, canonicalising representatives, summing duplicates and
    /// dropping zero coefficients.
    pub fn new(subgroup: Subgroup, terms: impl IntoIterator<Item = (Element, i64)>) -> Self {
        let mut map = BTreeMap::new();
        for (rep, coeff) in terms {
            let canon = subgroup.coset_of(rep).representative();
            *map.entry(canon).or_insert(0) += coeff;
        }
        map.retain(|_, c| *c != 0);
        Layer { subgroup, terms: map }
    }

    /// `R_i`: number of cosets carrying a nonzero coefficient.
    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    /// `||z^(i)||_1`.
    pub fn cost(&self) -> u64 {
        self.terms.values().map(|c| c.unsigned_abs()).sum()
    }

    /// Cosets in canonical order with their coefficients.
    pub fn cosets(&self) -> impl Iterator<Item = (Coset, i64)> + '_ {
        self.terms
            .iter()
            .map(|(&rep, &c)| (self.subgroup.coset_of(rep), c))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosetDecomposition {
    group: GroupRef,
    layers: Vec<Layer>,
}

impl CosetDecomposition {
    pub fn new(group: &GroupRef, layers: Vec<Layer>) -> Result<Self, DecomposeError> {
        for layer in &layers {
            if !same_group(group, layer.subgroup.parent()) {
                return Err(FunctionError::GroupMismatch.into());
            }
        }
        Ok(CosetDecomposition {
            group: Arc::clone(group),
            layers: layers.into_iter().filter(|l| !l.terms.is_empty()).collect(),
        })
    }

    pub fn empty(group: &GroupRef) -> Self {
        CosetDecomposition {
            group: Arc::clone(group),
            layers: Vec::new(),
        }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// `L`.
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layer_costs(&self) -> Vec<u64> {
        self.layers.iter().map(Layer::cost).collect()
    }

    pub fn total_cost(&self) -> u64 {
        self.layers.iter().map(Layer::cost).sum()
    }

    /// `prod_i (R_i + 1)`, the leaf bound for the compiled decision tree.
    pub fn leaf_bound(&self) -> u128 {
        self.layers
            .iter()
            .map(|l| l.support_size() as u128 + 1)
            .product()
    }

    /// `sum_i sum_W z_W 1_W`, computed exactly.
    pub fn to_function(&self) -> IntFn {
        let mut values = vec![0i64; self.group.order()];
        for layer in &self.layers {
            let labels = layer.subgroup.coset_labels();
            for (x, v) in values.iter_mut().enumerate() {
                if let Some(c) = layer.terms.get(&labels[x]) {
                    *v += c;
                }
            }
        }
        GroupFunction::new(&self.group, values).expect("length matches")
    }

    /// Merges layers that share a subgroup, keeping first-occurrence order.
    pub fn merged(&self) -> Self {
        let mut out: Vec<Layer> = Vec::new();
        for layer in &self.layers {
            match out.iter_mut().find(|l| l.subgroup == layer.subgroup) {
                Some(existing) => {
                    for (&rep, &c) in &layer.terms {
                        *existing.terms.entry(rep).or_insert(0) += c;
                    }
                    existing.terms.retain(|_, c| *c != 0);
                }
                None => out.push(layer.clone()),
            }
        }
        out.retain(|l| !l.terms.is_empty());
        CosetDecomposition {
            group: Arc::clone(&self.group),
            layers: out,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DecompositionReport {
    /// Number of layers `L`.
    pub layers: usize,
    pub layer_costs: Vec<u64>,
    pub total_cost: u64,
    /// Support sizes `R_i`.
    pub support_sizes: Vec<usize>,
    /// `||f_i||_A` before each greedy step and after the last; empty when not tracked.
    pub norm_trace: Vec<f64>,
    /// `||f_i * m_{H_{i+1}}||_A` for each greedy step.
    pub step_norms: Vec<f64>,
    /// `||f||_A` of the input, when computed.
    pub algebra_norm: Option<f64>,
    /// Reconstruction equals the rounded input at every element.
    pub exact: bool,
}

impl DecompositionReport {
    fn for_decomposition(d: &CosetDecomposition, exact: bool) -> Self {
        DecompositionReport {
            layers: d.len(),
            layer_costs: d.layer_costs(),
            total_cost: d.total_cost(),
            support_sizes: d.layers.iter().map(Layer::support_size).collect(),
            norm_trace: Vec::new(),
            step_norms: Vec::new(),
            algebra_norm: None,
            exact,
        }
    }
}

/// Checks `decomposition` against the rounding of `f` and recomputes costs.
pub fn verify<T: Scalar>(
    f: &GroupFunction<T>,
    decomposition: &CosetDecomposition,
    epsilon: f64,
) -> Result<DecompositionReport, DecomposeError> {
    let target = round_almost_integer(f, epsilon)?;
    check_equal(&target, &decomposition.to_function())?;
    Ok(DecompositionReport::for_decomposition(decomposition, true))
}

fn check_equal(expected: &IntFn, got: &IntFn) -> Result<(), DecomposeError> {
    if !same_group(expected.group(), got.group()) {
        return Err(FunctionError::GroupMismatch.into());
    }
    match expected
        .values()
        .iter()
        .zip(got.values())
        .position(|(a, b)| a != b)
    {
        Some(element) => Err(DecomposeError::Mismatch {
            element,
            expected: expected[element],
            got: got[element],
        }),
        None => Ok(()),
    }
}

/// A successful subgroup projection.
#[derive(Clone, Debug)]
pub struct Projection<T> {
    pub layer: Layer,
    /// `f * m_H`.
    pub averaged: GroupFunction<T>,
    /// `f - f * m_H`.
    pub residual: GroupFunction<T>,
}

/// Averages `f` over `H`; succeeds when the average is `epsilon`-almost
/// integer-valued with a nonzero rounding.
pub fn project_layer<T: Scalar>(f: &GroupFunction<T>, h: &Subgroup, epsilon: f64) -> Option<Projection<T>> {
    let averaged = average_over(f, h).ok()?;
    let rounded = round_almost_integer(&averaged, epsilon).ok()?;
    if rounded.values().iter().all(|&v| v == 0) {
        return None;
    }
    let terms: Vec<(Element, i64)> = h
        .left_cosets()
        .iter()
        .map(|c| (c.representative(), rounded[c.representative()]))
        .collect();
    let residual = f.sub(&averaged).ok()?;
    Some(Projection {
        layer: Layer::new(h.clone(), terms),
        averaged,
        residual,
    })
}

/// How [`greedy_decompose`] picks the next subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Largest `|H|` admitting a projection.
    #[default]
    LargestSubgroup,
    /// Largest removed mass `|H| * sum |z_W|`.
    MaxMass,
    /// Largest `||f * m_H||_A` per unit of layer cost. Unnormalised, the
    /// trivial subgroup would always win.
    NormDrop,
}

impl FromStr for Strategy {
    type Err = DecomposeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "largest-subgroup" => Ok(Strategy::LargestSubgroup),
            "max-mass" => Ok(Strategy::MaxMass),
            "norm-drop" => Ok(Strategy::NormDrop),
            other => Err(DecomposeError::UnknownStrategy(other.to_string())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::LargestSubgroup => "largest-subgroup",
            Strategy::MaxMass => "max-mass",
            Strategy::NormDrop => "norm-drop",
        })
    }
}

#[derive(Clone, Debug)]
pub struct GreedyOptions {
    pub epsilon: f64,
    pub strategy: Strategy,
    /// Compute `||f_i||_A` along the way.
    pub track_norms: bool,
    /// Overrides the default cap `10 ||f||_A + |supp f_Z|`.
    pub iteration_cap: Option<usize>,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            epsilon: 0.0,
            strategy: Strategy::default(),
            track_norms: true,
            iteration_cap: None,
        }
    }
}

/// Greedy decomposition with norm tracking.
pub fn greedy_decompose<T: Scalar>(
    f: &GroupFunction<T>,
    epsilon: f64,
    strategy: Strategy,
) -> Result<(CosetDecomposition, DecompositionReport), DecomposeError> {
    greedy_decompose_with(
        f,
        &GreedyOptions {
            epsilon,
            strategy,
            ..GreedyOptions::default()
        },
    )
}

pub fn greedy_decompose_with<T: Scalar>(
    f: &GroupFunction<T>,
    options: &GreedyOptions,
) -> Result<(CosetDecomposition, DecompositionReport), DecomposeError> {
    let eps = options.epsilon;
    let target = round_almost_integer(f, eps)?;
    let group = f.group();
    let subgroups = enumerate_subgroups(group)?;
    // largest first, enumeration order among equals
    let mut by_size: Vec<usize> = (0..subgroups.len()).collect();
    by_size.sort_by(|&a, &b| subgroups[b].order().cmp(&subgroups[a].order()).then(a.cmp(&b)));

    let input_norm = if options.track_norms || options.iteration_cap.is_none() {
        Some(algebra_norm(&f.to_complex())?)
    } else {
        None
    };
    let cap = options.iteration_cap.unwrap_or_else(|| {
        (10.0 * input_norm.unwrap_or(0.0)).ceil() as usize + target.support_set().len() + 1
    });

    let mut layers = Vec::new();
    let mut norm_trace = Vec::new();
    let mut step_norms = Vec::new();
    let mut residual = f.clone();
    if options.track_norms {
        norm_trace.push(input_norm.unwrap_or(0.0));
    }
    loop {
        let rounded = round_almost_integer(&residual, eps)?;
        if rounded.values().iter().all(|&v| v == 0) {
            break;
        }
        if layers.len() >= cap {
            return Err(DecomposeError::IterationCap(cap));
        }
        let chosen = match options.strategy {
            Strategy::LargestSubgroup => by_size
                .iter()
                .find_map(|&i| project_layer(&residual, &subgroups[i], eps)),
            Strategy::MaxMass => {
                let mut best: Option<(u64, Projection<T>)> = None;
                for h in &subgroups {
                    if let Some(p) = project_layer(&residual, h, eps) {
                        let mass = p.layer.cost() * h.order() as u64;
                        if best.as_ref().is_none_or(|(m, _)| mass > *m) {
                            best = Some((mass, p));
                        }
                    }
                }
                best.map(|(_, p)| p)
            }
            Strategy::NormDrop => {
                let mut best: Option<(f64, Projection<T>)> = None;
                for h in &subgroups {
                    if let Some(p) = project_layer(&residual, h, eps) {
                        let drop = algebra_norm(&p.averaged.to_complex())? / p.layer.cost() as f64;
                        if best.as_ref().is_none_or(|(d, _)| drop > *d + 1e-9) {
                            best = Some((drop, p));
                        }
                    }
                }
                best.map(|(_, p)| p)
            }
        };
        // the trivial subgroup always projects onto a nonzero rounding here
        let Some(projection) = chosen else {
            return Err(DecomposeError::Invalid(
                "no subgroup admits an almost-integer projection".into(),
            ));
        };
        if options.track_norms {
            step_norms.push(algebra_norm(&projection.averaged.to_complex())?);
            norm_trace.push(algebra_norm(&projection.residual.to_complex())?);
        }
        layers.push(projection.layer);
        residual = projection.residual;
    }

    let decomposition = CosetDecomposition::new(group, layers)?.merged();
    let exact = check_equal(&target, &decomposition.to_function()).is_ok();
    let mut report = DecompositionReport::for_decomposition(&decomposition, exact);
    report.norm_trace = norm_trace;
    report.step_norms = step_norms;
    report.algebra_norm = input_norm;
    Ok((decomposition, report))
}

/// Result of [`exact_min_cost`].
#[derive(Clone, Debug)]
pub struct MinCost {
    pub decomposition: CosetDecomposition,
    pub report: DecompositionReport,
    /// The search completed, so no cheaper decomposition exists.
    pub optimal: bool,
    pub nodes_explored: u64,
}

/// Branch and bound for the minimum total `l_1` cost.
///
/// Every decomposition of a nonzero `r` has a term containing the first
/// element `x` with `r(x) != 0` whose coefficient has the sign of `r(x)`;
/// peeling one unit of that term leaves a decomposition of the remainder
/// that is cheaper by one. Branching over the cosets containing `x` with that
/// sign is therefore complete, and `max |r|` is an admissible lower bound.
/// Depth-first search with an increasing cost bound returns the first, hence
/// cheapest, decomposition found. The greedy result seeds the incumbent.
///
/// Returns `Ok(None)` when the search proves nothing fits in `cost_budget`.
pub fn exact_min_cost(f: &IntFn, cost_budget: u64, node_budget: u64) -> Result<Option<MinCost>, DecomposeError> {
    let group = f.group();
    let subgroups = enumerate_subgroups(group)?;
    let (greedy, _) = greedy_decompose_with(
        &f.to_exact(),
        &GreedyOptions {
            track_norms: false,
            iteration_cap: Some(usize::MAX),
            ..GreedyOptions::default()
        },
    )?;
    let incumbent_cost = greedy.total_cost();

    let mut search = Search {
        subgroups: &subgroups,
        nodes: 0,
        node_budget,
        path: Vec::new(),
        failed: HashSet::new(),
    };
    let lower = f.values().iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let ceiling = cost_budget.min(incumbent_cost.saturating_sub(1));
    let mut values = f.values().to_vec();
    let mut bound = lower;
    while bound <= ceiling {
        search.failed.clear();
        match search.dfs(&mut values, bound) {
            Outcome::Found => {
                let decomposition = search.decomposition(group)?;
                let report = DecompositionReport::for_decomposition(&decomposition, true);
                return Ok(Some(MinCost {
                    decomposition,
                    report,
                    optimal: true,
                    nodes_explored: search.nodes,
                }));
            }
            Outcome::Exhausted => {
                return if incumbent_cost <= cost_budget {
                    let report = DecompositionReport::for_decomposition(&greedy, true);
                    Ok(Some(MinCost {
                        decomposition: greedy,
                        report,
                        optimal: false,
                        nodes_explored: search.nodes,
                    }))
                } else {
                    Err(DecomposeError::BudgetExhausted)
                };
            }
            Outcome::NotFound => bound += 1,
        }
    }
    // every cheaper bound failed: greedy is optimal, if it fits the budget
    if incumbent_cost <= cost_budget {
        let report = DecompositionReport::for_decomposition(&greedy, true);
        Ok(Some(MinCost {
            decomposition: greedy,
            report,
            optimal: true,
            nodes_explored: search.nodes,
        }))
    } else {
        Ok(None)
    }
}

enum Outcome {
    Found,
    NotFound,
    Exhausted,
}

struct Search<'a> {
    subgroups: &'a [Subgroup],
    nodes: u64,
    node_budget: u64,
    /// (subgroup index, canonical representative, sign)
    path: Vec<(usize, Element, i64)>,
    failed: HashSet<(Vec<i64>, u64)>,
}

impl Search<'_> {
    fn dfs(&mut self, values: &mut Vec<i64>, remaining: u64) -> Outcome {
        let Some(x) = values.iter().position(|&v| v != 0) else {
            return Outcome::Found;
        };
        let peak = values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        if peak > remaining {
            return Outcome::NotFound;
        }
        if self.failed.contains(&(values.clone(), remaining)) {
            return Outcome::NotFound;
        }
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Outcome::Exhausted;
        }
        let sign = values[x].signum();
        for (idx, h) in self.subgroups.iter().enumerate() {
            let coset = h.coset_of(x);
            let members = coset.members();
            for &m in &members {
                values[m] -= sign;
            }
            self.path.push((idx, coset.representative(), sign));
            let outcome = self.dfs(values, remaining - 1);
            for &m in &members {
                values[m] += sign;
            }
            match outcome {
                Outcome::Found => return Outcome::Found,
                Outcome::Exhausted => return Outcome::Exhausted,
                Outcome::NotFound => {
                    self.path.pop();
                }
            }
        }
        self.failed.insert((values.clone(), remaining));
        Outcome::NotFound
    }

    fn decomposition(&self, group: &GroupRef) -> Result<CosetDecomposition, DecomposeError> {
        let mut per_subgroup: BTreeMap<usize, Vec<(Element, i64)>> = BTreeMap::new();
        for &(idx, rep, sign) in &self.path {
            per_subgroup.entry(idx).or_default().push((rep, sign));
        }
        let layers = per_subgroup
            .into_iter()
            .map(|(idx, terms)| Layer::new(self.subgroups[idx].clone(), terms))
            .collect();
        CosetDecomposition::new(group, layers)
    }
}
