//! Coset decision trees.
//!
//! Internal nodes test membership in a left coset; leaves carry integers.
//! Nodes live in a flat arena addressed by [`NodeId`], and every node other
//! than the root has exactly one parent.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::decompose::CosetDecomposition;
use crate::func::{same_group, GroupFunction, IntFn};
use crate::group::{Coset, Element, GroupError, GroupRef};

pub type NodeId = usize;

/// Refuse to materialise compiled trees with more leaves than this.
pub const MAX_COMPILED_LEAVES: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("cannot compile an empty decomposition")]
    EmptyDecomposition,
    #[error("compiled tree would have {leaves} leaves, above the limit {limit}")]
    TooLarge { leaves: u128, limit: u128 },
    #[error("coset belongs to a different group")]
    GroupMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Follow `edge1` when `x` lies in `test`, `edge0` otherwise.
    Internal { test: Coset, edge1: NodeId, edge0: NodeId },
    Leaf { value: i64 },
}

/// Whether a path goes through the 1-edge (`In`) or the 0-edge (`Out`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    In,
    Out,
}

/// A root-to-leaf path: `value * prod(1_W or 1 - 1_W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTerm {
    pub value: i64,
    pub factors: Vec<(Coset, Polarity)>,
}

impl PathTerm {
    /// The 0/1 product of the factors at `x`.
    pub fn indicator_at(&self, x: Element) -> bool {
        self.factors.iter().all(|(w, p)| w.contains(x) == (*p == Polarity::In))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosetDecisionTree {
    group: GroupRef,
    nodes: Vec<Node>,
    root: NodeId,
}

impl CosetDecisionTree {
    /// Validates ids, single parents, reachability and distinct children.
    pub fn new(group: &GroupRef, nodes: Vec<Node>, root: NodeId) -> Result<Self, TreeError> {
        let n = nodes.len();
        if root >= n {
            return Err(TreeError::MalformedTree(format!("root {root} out of range")));
        }
        let mut parents = vec![0usize; n];
        for (id, node) in nodes.iter().enumerate() {
            if let Node::Internal { test, edge1, edge0 } = node {
                if !same_group(group, test.subgroup().parent()) {
                    return Err(TreeError::GroupMismatch);
                }
                for &child in [edge1, edge0] {
                    if child >= n {
                        return Err(TreeError::MalformedTree(format!("node {id} points to missing node {child}")));
                    }
                    parents[child] += 1;
                }
                if edge1 == edge0 {
                    return Err(TreeError::MalformedTree(format!("node {id} has identical children")));
                }
            }
        }
        if parents[root] != 0 {
            return Err(TreeError::MalformedTree("root has a parent".into()));
        }
        if let Some(id) = parents.iter().position(|&p| p > 1) {
            return Err(TreeError::MalformedTree(format!("node {id} has several parents")));
        }
        // with single parents and a parentless root, reaching every node rules out cycles
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            seen[id] = true;
            if let Node::Internal { edge1, edge0, .. } = &nodes[id] {
                stack.push(*edge1);
                stack.push(*edge0);
            }
        }
        if let Some(id) = seen.iter().position(|s| !s) {
            return Err(TreeError::MalformedTree(format!("node {id} is unreachable")));
        }
        Ok(CosetDecisionTree {
            group: Arc::clone(group),
            nodes,
            root,
        })
    }

    pub fn leaf(group: &GroupRef, value: i64) -> Self {
        CosetDecisionTree {
            group: Arc::clone(group),
            nodes: vec![Node::Leaf { value }],
            root: 0,
        }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn eval(&self, x: Element) -> Result<i64, TreeError> {
        self.group.check_element(x)?;
        Ok(self.nodes[self.leaf_for(x)].leaf_value())
    }

    fn leaf_for(&self, x: Element) -> NodeId {
        let mut id = self.root;
        loop {
            match &self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Internal { test, edge1, edge0 } => {
                    id = if test.contains(x) { *edge1 } else { *edge0 };
                }
            }
        }
    }

    /// Tabulates `eval` over the group.
    pub fn eval_all(&self) -> IntFn {
        GroupFunction::from_fn(&self.group, |x| self.nodes[self.leaf_for(x)].leaf_value())
    }

    /// Leaves that some group element actually reaches, in id order.
    pub fn reached_leaves(&self) -> Vec<NodeId> {
        let mut hit = vec![false; self.nodes.len()];
        for x in self.group.elements() {
            hit[self.leaf_for(x)] = true;
        }
        (0..self.nodes.len()).filter(|&i| hit[i]).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: NodeId) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Internal { edge1, edge0, .. } => 1 + go(nodes, *edge1).max(go(nodes, *edge0)),
            }
        }
        go(&self.nodes, self.root)
    }

    /// Maximal paths, 1-edges explored before 0-edges.
    pub fn paths(&self) -> Vec<PathTerm> {
        let mut out = Vec::new();
        let mut factors = Vec::new();
        self.collect_paths(self.root, &mut factors, &mut out);
        out
    }

    fn collect_paths(&self, id: NodeId, factors: &mut Vec<(Coset, Polarity)>, out: &mut Vec<PathTerm>) {
        match &self.nodes[id] {
            Node::Leaf { value } => out.push(PathTerm {
                value: *value,
                factors: factors.clone(),
            }),
            Node::Internal { test, edge1, edge0 } => {
                factors.push((test.clone(), Polarity::In));
                self.collect_paths(*edge1, factors, out);
                factors.last_mut().expect("just pushed").1 = Polarity::Out;
                self.collect_paths(*edge0, factors, out);
                factors.pop();
            }
        }
    }

    /// `sum_P z_P g_P`, built from the path products rather than by evaluation.
    pub fn to_function(&self) -> IntFn {
        let mut values = vec![0i64; self.group.order()];
        for path in self.paths() {
            if path.value == 0 {
                continue;
            }
            let mut g_p = vec![1i64; self.group.order()];
            for (w, polarity) in &path.factors {
                let mut ind = vec![0i64; self.group.order()];
                for m in w.members() {
                    ind[m] = 1;
                }
                for (g, i) in g_p.iter_mut().zip(ind) {
                    *g *= match polarity {
                        Polarity::In => i,
                        Polarity::Out => 1 - i,
                    };
                }
            }
            for (v, g) in values.iter_mut().zip(g_p) {
                *v += path.value * g;
            }
        }
        GroupFunction::new(&self.group, values).expect("length matches")
    }

    /// Chains one decision list per layer, copying the next stage under every
    /// leaf and adding the matched coefficient to the running leaf value.
    pub fn compile(decomposition: &CosetDecomposition) -> Result<Self, TreeError> {
        if decomposition.is_empty() {
            return Err(TreeError::EmptyDecomposition);
        }
        let leaves = decomposition.leaf_bound();
        if leaves > MAX_COMPILED_LEAVES {
            return Err(TreeError::TooLarge {
                leaves,
                limit: MAX_COMPILED_LEAVES,
            });
        }
        let stages: Vec<Vec<(Coset, i64)>> = decomposition
            .layers()
            .iter()
            .map(|l| l.cosets().collect())
            .collect();
        let mut nodes = Vec::new();
        let root = build_stage(&stages, 0, 0, &mut nodes);
        Ok(CosetDecisionTree {
            group: Arc::clone(decomposition.group()),
            nodes,
            root,
        })
    }

    /// Collapses every internal node whose two subtrees are structurally
    /// identical, bottom-up, until none remain.
    pub fn prune(&self) -> Self {
        let mut interner = Interner::default();
        let canon = interner.canonical(&self.nodes, self.root);
        let mut nodes = Vec::new();
        let root = interner.emit(canon, &mut nodes);
        CosetDecisionTree {
            group: Arc::clone(&self.group),
            nodes,
            root,
        }
    }

    /// Graphviz rendering with coset labels and 1/0 edge labels.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("digraph coset_tree {\n  node [fontname=\"Helvetica\"];\n");
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Leaf { value } => {
                    let _ = writeln!(out, "  n{id} [shape=box, label=\"{value}\"];");
                }
                Node::Internal { test, edge1, edge0 } => {
                    let _ = writeln!(
                        out,
                        "  n{id} [shape=circle, label=\"{} * {:?}\"];",
                        test.representative(),
                        test.subgroup().elements()
                    );
                    let _ = writeln!(out, "  n{id} -> n{edge1} [label=\"1\"];");
                    let _ = writeln!(out, "  n{id} -> n{edge0} [label=\"0\"];");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

impl Node {
    fn leaf_value(&self) -> i64 {
        match self {
            Node::Leaf { value } => *value,
            Node::Internal { .. } => unreachable!("leaf_for stops at leaves"),
        }
    }
}

fn build_stage(stages: &[Vec<(Coset, i64)>], stage: usize, acc: i64, nodes: &mut Vec<Node>) -> NodeId {
    if stage == stages.len() {
        nodes.push(Node::Leaf { value: acc });
        return nodes.len() - 1;
    }
    let mut tail = build_stage(stages, stage + 1, acc, nodes);
    for (coset, z) in stages[stage].iter().rev() {
        let hit = build_stage(stages, stage + 1, acc + z, nodes);
        nodes.push(Node::Internal {
            test: coset.clone(),
            edge1: hit,
            edge0: tail,
        });
        tail = nodes.len() - 1;
    }
    tail
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Leaf(i64),
    Internal {
        subgroup: Vec<Element>,
        rep: Element,
        edge1: usize,
        edge0: usize,
    },
}

/// Hash-consing of pruned subtrees: equal structure, equal id.
#[derive(Default)]
struct Interner {
    ids: HashMap<Key, usize>,
    entries: Vec<(Key, Option<Coset>)>,
}

impl Interner {
    fn intern(&mut self, key: Key, test: Option<Coset>) -> usize {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        self.entries.push((key.clone(), test));
        self.ids.insert(key, self.entries.len() - 1);
        self.entries.len() - 1
    }

    fn canonical(&mut self, nodes: &[Node], id: NodeId) -> usize {
        match &nodes[id] {
            Node::Leaf { value } => self.intern(Key::Leaf(*value), None),
            Node::Internal { test, edge1, edge0 } => {
                let c1 = self.canonical(nodes, *edge1);
                let c0 = self.canonical(nodes, *edge0);
                if c1 == c0 {
                    return c1;
                }
                let key = Key::Internal {
                    subgroup: test.subgroup().elements().to_vec(),
                    rep: test.representative(),
                    edge1: c1,
                    edge0: c0,
                };
                self.intern(key, Some(test.clone()))
            }
        }
    }

    /// Writes a fresh copy of a canonical subtree in preorder, duplicating
    /// shared subtrees.
    fn emit(&self, canon: usize, nodes: &mut Vec<Node>) -> NodeId {
        let id = nodes.len();
        match &self.entries[canon] {
            (Key::Leaf(value), _) => nodes.push(Node::Leaf { value: *value }),
            (Key::Internal { edge1, edge0, .. }, test) => {
                let test = test.clone().expect("internal entries keep their coset");
                nodes.push(Node::Internal { test, edge1: 0, edge0: 0 });
                let e1 = self.emit(*edge1, nodes);
                let e0 = self.emit(*edge0, nodes);
                if let Node::Internal { edge1, edge0, .. } = &mut nodes[id] {
                    *edge1 = e1;
                    *edge0 = e0;
                }
            }
        }
        id
    }
}
