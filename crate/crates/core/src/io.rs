//! JSON file formats for groups, functions, trees and decompositions.
//!
//! Files refer to their group by a reference string: either a built-in
//! name (`Z12`, `Z2^3`, `D6`, `S4`, products such as `Z2xZ4`) or a path to
//! a group file, resolved against the referencing file's directory first.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::decompose::{CosetDecomposition, DecomposeError, Layer};
use crate::func::{ComplexFn, ExactFn, FunctionError, GroupFunction, IntFn};
use crate::group::{
    make_boolean_cube, make_cyclic, make_dihedral, make_product, make_symmetric, Element, FiniteGroup, GroupError,
    GroupRef, Subgroup,
};
use crate::tree::{CosetDecisionTree, Node, TreeError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("cannot parse {context}: {message}")]
    Parse { context: String, message: String },
    #[error("unknown group reference {0:?}")]
    UnknownGroup(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, context: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("file structs always serialise")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupFile {
    pub name: String,
    pub order: usize,
    pub identity: Element,
    pub table: Vec<Vec<Element>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic_factors: Option<Vec<usize>>,
}

impl GroupFile {
    pub fn from_group(g: &FiniteGroup) -> Self {
        GroupFile {
            name: g.name().to_string(),
            order: g.order(),
            identity: g.identity(),
            table: g.rows(),
            cyclic_factors: g.cyclic_factors().map(<[usize]>::to_vec),
        }
    }

    /// Validates the table; the stated order and identity must agree with it.
    pub fn into_group(self) -> Result<FiniteGroup, IoError> {
        let g = FiniteGroup::validate(self.table, self.name)?;
        if g.order() != self.order {
            return Err(IoError::Parse {
                context: "group file".into(),
                message: format!("order {} does not match the {}-row table", self.order, g.order()),
            });
        }
        if g.identity() != self.identity {
            return Err(IoError::Parse {
                context: "group file".into(),
                message: format!("identity {} does not match the table's identity {}", self.identity, g.identity()),
            });
        }
        match self.cyclic_factors {
            Some(f) => Ok(g.with_cyclic_factors(f)?),
            None => Ok(g),
        }
    }
}

pub fn read_group_file(path: &Path) -> Result<FiniteGroup, IoError> {
    let file: GroupFile = parse_json(&read_text(path)?, &path.display().to_string())?;
    file.into_group()
}

pub fn group_to_json(g: &FiniteGroup) -> String {
    to_json(&GroupFile::from_group(g))
}

/// Parses a built-in group name; `None` when the text is not one.
pub fn builtin_group(name: &str) -> Result<Option<FiniteGroup>, GroupError> {
    let parts: Vec<&str> = name.split('x').collect();
    if parts.len() > 1 {
        let mut acc: Option<FiniteGroup> = None;
        for part in parts {
            let Some(factor) = builtin_group(part)? else {
                return Ok(None);
            };
            acc = Some(match acc {
                None => factor,
                Some(prev) => make_product(&prev, &factor)?,
            });
        }
        return Ok(acc);
    }
    let number = |s: &str| s.parse::<usize>().ok();
    if let Some(k) = name.strip_prefix("Z2^").and_then(number) {
        return make_boolean_cube(k).map(Some);
    }
    let (head, tail) = name.split_at(name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len()));
    let Some(n) = number(tail) else {
        return Ok(None);
    };
    match head {
        "Z" => make_cyclic(n).map(Some),
        "D" => make_dihedral(n).map(Some),
        "S" => make_symmetric(n).map(Some),
        _ => Ok(None),
    }
}

/// Resolves a group reference from a file in `base` (or the working directory).
pub fn resolve_group(reference: &str, base: Option<&Path>) -> Result<GroupRef, IoError> {
    if let Some(g) = builtin_group(reference)? {
        return Ok(g.into_ref());
    }
    let candidates: Vec<PathBuf> = base
        .map(|b| b.join(reference))
        .into_iter()
        .chain(std::iter::once(PathBuf::from(reference)))
        .collect();
    for path in &candidates {
        if path.is_file() {
            return Ok(read_group_file(path)?.into_ref());
        }
    }
    Err(IoError::UnknownGroup(reference.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMode {
    Float,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionFile {
    pub group: String,
    pub mode: ValueMode,
    pub values: Vec<Value>,
}

/// A function read from disk, in the arithmetic its file declared.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedFunction {
    Float(ComplexFn),
    Exact(ExactFn),
}

impl LoadedFunction {
    pub fn group(&self) -> &GroupRef {
        match self {
            LoadedFunction::Float(f) => f.group(),
            LoadedFunction::Exact(f) => f.group(),
        }
    }

    pub fn to_complex(&self) -> ComplexFn {
        match self {
            LoadedFunction::Float(f) => f.clone(),
            LoadedFunction::Exact(f) => f.to_complex(),
        }
    }
}

fn bad_value(i: usize, v: &Value) -> IoError {
    IoError::Parse {
        context: "function file".into(),
        message: format!("value {i} ({v}) does not fit the declared mode"),
    }
}

fn float_value(i: usize, v: &Value) -> Result<Complex64, IoError> {
    match v {
        Value::Number(n) => n.as_f64().map(|re| Complex64::new(re, 0.0)).ok_or_else(|| bad_value(i, v)),
        Value::Array(pair) if pair.len() == 2 => match (pair[0].as_f64(), pair[1].as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err(bad_value(i, v)),
        },
        _ => Err(bad_value(i, v)),
    }
}

fn exact_value(i: usize, v: &Value) -> Result<Rational64, IoError> {
    match v {
        Value::Number(n) => n.as_i64().map(Rational64::from_integer).ok_or_else(|| bad_value(i, v)),
        Value::Array(pair) if pair.len() == 2 => match (pair[0].as_i64(), pair[1].as_i64()) {
            (Some(num), Some(den)) if den != 0 => Ok(Rational64::new(num, den)),
            _ => Err(bad_value(i, v)),
        },
        _ => Err(bad_value(i, v)),
    }
}

pub fn parse_function(text: &str, base: Option<&Path>) -> Result<LoadedFunction, IoError> {
    let file: FunctionFile = parse_json(text, "function file")?;
    let g = resolve_group(&file.group, base)?;
    Ok(match file.mode {
        ValueMode::Float => {
            let values = file.values.iter().enumerate().map(|(i, v)| float_value(i, v)).collect::<Result<_, _>>()?;
            LoadedFunction::Float(GroupFunction::new(&g, values)?)
        }
        ValueMode::Exact => {
            let values = file.values.iter().enumerate().map(|(i, v)| exact_value(i, v)).collect::<Result<_, _>>()?;
            LoadedFunction::Exact(GroupFunction::new(&g, values)?)
        }
    })
}

pub fn read_function_file(path: &Path) -> Result<LoadedFunction, IoError> {
    parse_function(&read_text(path)?, path.parent())
}

pub fn complex_function_file(group_ref: &str, f: &ComplexFn) -> FunctionFile {
    let values = f
        .values()
        .iter()
        .map(|z| if z.im == 0.0 { serde_json::json!(z.re) } else { serde_json::json!([z.re, z.im]) })
        .collect();
    FunctionFile {
        group: group_ref.to_string(),
        mode: ValueMode::Float,
        values,
    }
}

pub fn exact_function_file(group_ref: &str, f: &ExactFn) -> FunctionFile {
    let values = f
        .values()
        .iter()
        .map(|q| if q.is_integer() { serde_json::json!(q.to_integer()) } else { serde_json::json!([q.numer(), q.denom()]) })
        .collect();
    FunctionFile {
        group: group_ref.to_string(),
        mode: ValueMode::Exact,
        values,
    }
}

pub fn int_function_file(group_ref: &str, f: &IntFn) -> FunctionFile {
    exact_function_file(group_ref, &f.to_exact())
}

pub fn function_file_to_json(file: &FunctionFile) -> String {
    to_json(file)
}

/// Shares one `Subgroup` per distinct element list.
struct SubgroupCache<'a> {
    group: &'a GroupRef,
    seen: HashMap<Vec<Element>, Subgroup>,
}

impl<'a> SubgroupCache<'a> {
    fn new(group: &'a GroupRef) -> Self {
        SubgroupCache {
            group,
            seen: HashMap::new(),
        }
    }

    fn get(&mut self, elements: &[Element]) -> Result<Subgroup, IoError> {
        let mut key = elements.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(h) = self.seen.get(&key) {
            return Ok(h.clone());
        }
        let h = Subgroup::new(self.group, key.iter().copied())?;
        self.seen.insert(key, h.clone());
        Ok(h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeRecord {
    Internal {
        subgroup: Vec<Element>,
        rep: Element,
        e1: usize,
        e0: usize,
    },
    Leaf {
        value: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeFile {
    pub group: String,
    pub root: usize,
    pub nodes: Vec<NodeRecord>,
}

pub fn tree_file(group_ref: &str, tree: &CosetDecisionTree) -> TreeFile {
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| match n {
            Node::Leaf { value } => NodeRecord::Leaf { value: *value },
            Node::Internal { test, edge1, edge0 } => NodeRecord::Internal {
                subgroup: test.subgroup().elements().to_vec(),
                rep: test.representative(),
                e1: *edge1,
                e0: *edge0,
            },
        })
        .collect();
    TreeFile {
        group: group_ref.to_string(),
        root: tree.root(),
        nodes,
    }
}

pub fn tree_to_json(group_ref: &str, tree: &CosetDecisionTree) -> String {
    to_json(&tree_file(group_ref, tree))
}

pub fn parse_tree(text: &str, base: Option<&Path>) -> Result<CosetDecisionTree, IoError> {
    let file: TreeFile = parse_json(text, "tree file")?;
    let g = resolve_group(&file.group, base)?;
    let mut cache = SubgroupCache::new(&g);
    let mut nodes = Vec::with_capacity(file.nodes.len());
    for record in &file.nodes {
        nodes.push(match record {
            NodeRecord::Leaf { value } => Node::Leaf { value: *value },
            NodeRecord::Internal { subgroup, rep, e1, e0 } => {
                g.check_element(*rep)?;
                Node::Internal {
                    test: cache.get(subgroup)?.coset_of(*rep),
                    edge1: *e1,
                    edge0: *e0,
                }
            }
        });
    }
    Ok(CosetDecisionTree::new(&g, nodes, file.root)?)
}

pub fn read_tree_file(path: &Path) -> Result<CosetDecisionTree, IoError> {
    parse_tree(&read_text(path)?, path.parent())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub rep: Element,
    pub coeff: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub subgroup: Vec<Element>,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub group: String,
    pub layers: Vec<LayerRecord>,
}

pub fn decomposition_file(group_ref: &str, d: &CosetDecomposition) -> DecompositionFile {
    DecompositionFile {
        group: group_ref.to_string(),
        layers: d
            .layers()
            .iter()
            .map(|l| LayerRecord {
                subgroup: l.subgroup.elements().to_vec(),
                terms: l.terms.iter().map(|(&rep, &coeff)| TermRecord { rep, coeff }).collect(),
            })
            .collect(),
    }
}

pub fn decomposition_to_json(group_ref: &str, d: &CosetDecomposition) -> String {
    to_json(&decomposition_file(group_ref, d))
}

pub fn parse_decomposition(text: &str, base: Option<&Path>) -> Result<CosetDecomposition, IoError> {
    let file: DecompositionFile = parse_json(text, "decomposition file")?;
    let g = resolve_group(&file.group, base)?;
    let mut cache = SubgroupCache::new(&g);
    let mut layers = Vec::with_capacity(file.layers.len());
    for record in &file.layers {
        let h = cache.get(&record.subgroup)?;
        for t in &record.terms {
            g.check_element(t.rep)?;
        }
        layers.push(Layer::new(h, record.terms.iter().map(|t| (t.rep, t.coeff))));
    }
    Ok(CosetDecomposition::new(&g, layers)?)
}

pub fn read_decomposition_file(path: &Path) -> Result<CosetDecomposition, IoError> {
    parse_decomposition(&read_text(path)?, path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{greedy_decompose, Strategy};

    #[test]
    fn builtin_names() {
        assert_eq!(builtin_group("Z12").unwrap().unwrap().order(), 12);
        assert_eq!(builtin_group("Z2^3").unwrap().unwrap().order(), 8);
        assert_eq!(builtin_group("D6").unwrap().unwrap().order(), 12);
        assert_eq!(builtin_group("S4").unwrap().unwrap().order(), 24);
        let p = builtin_group("Z2xZ4").unwrap().unwrap();
        assert_eq!(p.order(), 8);
        assert_eq!(p.cyclic_factors(), Some(&[2, 4][..]));
        assert!(builtin_group("groups/mine.json").unwrap().is_none());
        assert!(builtin_group("Q8").unwrap().is_none());
    }

    #[test]
    fn group_file_roundtrip() {
        let g = make_dihedral(4).unwrap();
        let back = parse_json::<GroupFile>(&group_to_json(&g), "test").unwrap().into_group().unwrap();
        assert_eq!(back.rows(), g.rows());
        let mut file = GroupFile::from_group(&g);
        file.identity = 3;
        assert!(matches!(file.into_group(), Err(IoError::Parse { .. })));
    }

    #[test]
    fn group_reference_resolves_relative_to_file() {
        let dir = std::env::temp_dir().join(format!("cosetforge-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("v4.json"), group_to_json(&make_boolean_cube(2).unwrap())).unwrap();
        let text = r#"{"group": "v4.json", "mode": "exact", "values": [1, [1, 2], 0, -3]}"#;
        let f = parse_function(text, Some(&dir)).unwrap();
        let LoadedFunction::Exact(f) = f else { panic!() };
        assert_eq!(f[1], Rational64::new(1, 2));
        assert!(matches!(parse_function(text, None), Err(IoError::UnknownGroup(_))));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn function_roundtrips() {
        let g = make_cyclic(3).unwrap().into_ref();
        let f = ComplexFn::new(&g, vec![Complex64::new(1.5, 0.0), Complex64::new(0.0, -2.0), Complex64::new(0.25, 1.0)])
            .unwrap();
        let text = function_file_to_json(&complex_function_file("Z3", &f));
        assert_eq!(parse_function(&text, None).unwrap(), LoadedFunction::Float(f));
        let q = ExactFn::new(&g, vec![Rational64::new(-1, 3), Rational64::from_integer(2), Rational64::new(5, 4)]).unwrap();
        let text = function_file_to_json(&exact_function_file("Z3", &q));
        assert_eq!(parse_function(&text, None).unwrap(), LoadedFunction::Exact(q));
        let bad = r#"{"group": "Z3", "mode": "exact", "values": [1.5, 0, 0]}"#;
        assert!(matches!(parse_function(bad, None), Err(IoError::Parse { .. })));
        let short = r#"{"group": "Z3", "mode": "float", "values": [1, 0]}"#;
        assert!(matches!(parse_function(short, None), Err(IoError::Function(_))));
    }

    #[test]
    fn tree_and_decomposition_roundtrip() {
        let g = make_cyclic(12).unwrap().into_ref();
        let f = IntFn::new(&g, vec![1, 0, 1, 0, 1, 0, 2, 1, 2, 1, 2, 1]).unwrap();
        let (d, _) = greedy_decompose(&f.to_exact(), 0.0, Strategy::LargestSubgroup).unwrap();
        let text = decomposition_to_json("Z12", &d);
        let back = parse_decomposition(&text, None).unwrap();
        assert_eq!(back.to_function(), f);

        let tree = CosetDecisionTree::compile(&d).unwrap();
        let text = tree_to_json("Z12", &tree);
        let back = parse_tree(&text, None).unwrap();
        assert_eq!(back.eval_all(), tree.eval_all());
        assert_eq!(back.leaf_count(), tree.leaf_count());

        let bad = r#"{"group": "Z12", "root": 0, "nodes": [{"kind": "internal", "subgroup": [0, 5], "rep": 0, "e1": 1, "e0": 2}, {"kind": "leaf", "value": 1}, {"kind": "leaf", "value": 0}]}"#;
        assert!(matches!(parse_tree(bad, None), Err(IoError::Group(GroupError::NotASubgroup(_)))));
    }
}
