use std::path::Path;

use cosetforge::addcomb::{
    bsg_extract, croot_sisask_trial, energy as set_energy, is_arithmetically_connected, translate_family,
    ConnectivityMode,
};
use cosetforge::decompose::{exact_min_cost, greedy_decompose, Strategy};
use cosetforge::func::{convolve_mean, round_almost_integer, ComplexFn, IntFn, MeasureOnG};
use cosetforge::group::{enumerate_subgroups, Element, GroupRef};
use cosetforge::io::{
    builtin_group, complex_function_file, decomposition_file, exact_function_file, int_function_file,
    read_decomposition_file, read_function_file, read_tree_file, resolve_group, tree_file, GroupFile, IoError,
    LoadedFunction,
};
use cosetforge::spectral::{algebra_norm, fourier_l1_abelian, SpectralError};
use cosetforge::tree::CosetDecisionTree;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::{ApArgs, BsgArgs, ConnectArgs, CsArgs, DecomposeArgs, Output, PairArgs, SetArgs};

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

/// The `group` field of a JSON input, rewritten so it still resolves from
/// wherever the output lands.
fn group_ref_of(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| IoError::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    })?;
    let reference = value["group"].as_str().unwrap_or_default().to_string();
    if builtin_group(&reference)?.is_some() {
        return Ok(reference);
    }
    let beside = path.parent().map(|p| p.join(&reference));
    match beside {
        Some(p) if p.is_file() => Ok(p
            .canonicalize()
            .map(|c| c.display().to_string())
            .unwrap_or(reference)),
        _ => Ok(reference),
    }
}

pub fn parse_set(text: &str) -> Result<Vec<Element>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Element>().map_err(|_| CliError::Invalid(format!("{s:?} is not an element index"))))
        .collect()
}

pub fn group_make(name: &str) -> Result<Output, CliError> {
    let g = builtin_group(name)?.ok_or_else(|| IoError::UnknownGroup(name.to_string()))?;
    Ok(Output::Json(to_value(&GroupFile::from_group(&g))))
}

pub fn group_validate(reference: &str) -> Result<Output, CliError> {
    let g = resolve_group(reference, None)?;
    Ok(Output::Json(json!({
        "valid": true,
        "name": g.name(),
        "order": g.order(),
        "identity": g.identity(),
        "abelian": g.is_abelian(),
        "cyclic_factors": g.cyclic_factors(),
    })))
}

pub fn group_subgroups(reference: &str) -> Result<Output, CliError> {
    let g = resolve_group(reference, None)?;
    let subs = enumerate_subgroups(&g)?;
    let list: Vec<Value> = subs
        .iter()
        .map(|h| {
            json!({
                "order": h.order(),
                "index": h.index(),
                "normal": h.is_normal(),
                "elements": h.elements(),
            })
        })
        .collect();
    Ok(Output::Json(json!({ "group": g.name(), "count": list.len(), "subgroups": list })))
}

fn abelian_l1(f: &ComplexFn) -> Result<Option<f64>, CliError> {
    match fourier_l1_abelian(f) {
        Ok(v) => Ok(Some(v)),
        Err(SpectralError::NotExplicitlyAbelian(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn fn_norm(path: &Path) -> Result<Output, CliError> {
    let f = read_function_file(path)?.to_complex();
    Ok(Output::Json(json!({
        "algebra_norm": algebra_norm(&f)?,
        "linf": f.linf(),
        "abelian_l1": abelian_l1(&f)?,
    })))
}

fn rounded(f: &LoadedFunction, epsilon: f64) -> Result<IntFn, CliError> {
    Ok(match f {
        LoadedFunction::Float(f) => round_almost_integer(f, epsilon)?,
        LoadedFunction::Exact(f) => round_almost_integer(f, epsilon)?,
    })
}

pub fn fn_round(path: &Path, epsilon: f64) -> Result<Output, CliError> {
    let f = read_function_file(path)?;
    let r = rounded(&f, epsilon)?;
    Ok(Output::Json(to_value(&int_function_file(&group_ref_of(path)?, &r))))
}

pub fn fn_conv(path: &Path, other: &Path) -> Result<Output, CliError> {
    let f = read_function_file(path)?;
    let g = read_function_file(other)?;
    let reference = group_ref_of(path)?;
    let file = match (&f, &g) {
        (LoadedFunction::Exact(a), LoadedFunction::Exact(b)) => exact_function_file(&reference, &convolve_mean(a, b)?),
        _ => complex_function_file(&reference, &convolve_mean(&f.to_complex(), &g.to_complex())?),
    };
    Ok(Output::Json(to_value(&file)))
}

pub fn decompose(args: &DecomposeArgs) -> Result<Output, CliError> {
    let strategy: Strategy = args.strategy.parse()?;
    let f = read_function_file(&args.function)?;
    let reference = group_ref_of(&args.function)?;
    let (d, report) = match &f {
        LoadedFunction::Float(f) => greedy_decompose(f, args.epsilon, strategy)?,
        LoadedFunction::Exact(f) => greedy_decompose(f, args.epsilon, strategy)?,
    };
    let mut out = json!({
        "strategy": strategy.to_string(),
        "decomposition": to_value(&decomposition_file(&reference, &d)),
        "report": to_value(&report),
    });
    if args.exact_min {
        let target = rounded(&f, args.epsilon)?;
        out["min_cost"] = match exact_min_cost(&target, args.cost_budget, args.node_budget)? {
            Some(best) => json!({
                "optimal": best.optimal,
                "nodes_explored": best.nodes_explored,
                "report": to_value(&best.report),
                "decomposition": to_value(&decomposition_file(&reference, &best.decomposition)),
            }),
            None => json!({ "optimal": true, "within_budget": false, "cost_budget": args.cost_budget }),
        };
    }
    Ok(Output::Json(out))
}

pub fn tree_compile(path: &Path, prune: bool) -> Result<Output, CliError> {
    let d = read_decomposition_file(path)?;
    let mut tree = CosetDecisionTree::compile(&d)?;
    if prune {
        tree = tree.prune();
    }
    Ok(Output::Json(to_value(&tree_file(&group_ref_of(path)?, &tree))))
}

pub fn tree_eval(path: &Path, x: Option<Element>) -> Result<Output, CliError> {
    let tree = read_tree_file(path)?;
    Ok(Output::Json(match x {
        Some(x) => json!({ "x": x, "value": tree.eval(x)? }),
        None => json!({
            "values": tree.eval_all().values(),
            "leaf_count": tree.leaf_count(),
            "depth": tree.depth(),
        }),
    }))
}

pub fn tree_prune(path: &Path) -> Result<Output, CliError> {
    let tree = read_tree_file(path)?.prune();
    Ok(Output::Json(to_value(&tree_file(&group_ref_of(path)?, &tree))))
}

pub fn tree_dot(path: &Path) -> Result<Output, CliError> {
    Ok(Output::Text(read_tree_file(path)?.export_dot()))
}

fn load_set(args: &SetArgs) -> Result<(GroupRef, Vec<Element>), CliError> {
    match (&args.function, &args.set) {
        (Some(path), None) => {
            let f = read_function_file(path)?;
            let g = f.group().clone();
            Ok((g, rounded(&f, args.epsilon)?.support_set()))
        }
        (None, Some(set)) => {
            let reference = args
                .group
                .as_deref()
                .ok_or_else(|| CliError::Invalid("--set needs --group".into()))?;
            Ok((resolve_group(reference, None)?, parse_set(set)?))
        }
        _ => Err(CliError::Invalid("give exactly one of --set and --fn".into())),
    }
}

fn parse_mode(text: &str, seed: u64) -> Result<ConnectivityMode, CliError> {
    if text == "exhaustive" {
        return Ok(ConnectivityMode::Exhaustive);
    }
    text.strip_prefix("samples:")
        .and_then(|n| n.parse::<usize>().ok())
        .map(|count| ConnectivityMode::Samples { count, seed })
        .ok_or_else(|| CliError::Invalid(format!("mode {text:?} is neither exhaustive nor samples:N")))
}

pub fn connect(args: &ConnectArgs, seed: u64) -> Result<Output, CliError> {
    let (g, set) = load_set(&args.set)?;
    let mode = parse_mode(&args.mode, seed)?;
    let cert = is_arithmetically_connected(&g, &set, args.k, args.l, mode)?;
    let mut out = json!({
        "k": cert.k,
        "l": cert.l,
        "set": cert.set,
        "verdict": to_value(&cert.verdict),
        "examined": cert.witnesses.len(),
    });
    if args.witnesses {
        let list: Vec<Value> = (0..cert.witnesses.len())
            .map(|n| {
                let (x, p) = cert.witness(n).expect("index in range");
                json!({ "x": x, "r": p.r, "i": p.i, "sigma": p.sigma })
            })
            .collect();
        out["witnesses"] = Value::Array(list);
    }
    Ok(Output::Json(out))
}

fn load_pair(args: &PairArgs) -> Result<(GroupRef, Vec<Element>, Vec<Element>), CliError> {
    let g = resolve_group(&args.group, None)?;
    let a = parse_set(&args.a)?;
    let b = match &args.b {
        Some(b) => parse_set(b)?,
        None => a.clone(),
    };
    Ok((g, a, b))
}

pub fn energy(args: &PairArgs) -> Result<Output, CliError> {
    let (g, a, b) = load_pair(args)?;
    Ok(Output::Json(json!({ "energy": set_energy(&g, &a, &b)? })))
}

pub fn bsg(args: &BsgArgs) -> Result<Output, CliError> {
    let (g, a, b) = load_pair(&args.pair)?;
    Ok(Output::Json(to_value(&bsg_extract(&g, &a, &b, args.threshold)?)))
}

/// Uniform random complex values in the unit square, one stream per seed.
pub fn random_function(g: &GroupRef, seed: u64) -> ComplexFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexFn::from_fn(g, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn cs_trial(args: &CsArgs, seed: u64) -> Result<Output, CliError> {
    let g = resolve_group(&args.group, None)?;
    let support = match &args.set {
        Some(s) => parse_set(s)?,
        None => g.elements().collect(),
    };
    let nu = MeasureOnG::uniform(&g, &support)?;
    let f = match &args.function {
        Some(path) => read_function_file(path)?.to_complex(),
        None => random_function(&g, seed),
    };
    if f.group().order() != g.order() {
        return Err(CliError::Invalid("function and measure live on different groups".into()));
    }
    let mu = vec![1.0 / g.order() as f64; g.order()];
    let report = croot_sisask_trial(&nu, &translate_family(&f), &mu, args.p, args.eps, args.r, args.trials, seed)?;
    Ok(Output::Json(to_value(&report)))
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

pub fn ap_scan(args: &ApArgs) -> Result<Output, CliError> {
    if !is_prime(args.p) {
        return Err(CliError::NotPrime(args.p));
    }
    let mut lengths = parse_set(&args.n)?;
    lengths.sort_unstable();
    lengths.dedup();
    if lengths.is_empty() {
        return Err(CliError::Invalid("no interval lengths given".into()));
    }
    if let Some(&bad) = lengths.iter().find(|&&n| n == 0 || 2 * n as u64 >= args.p) {
        return Err(CliError::Invalid(format!("N = {bad} must satisfy 0 < N < p/2")));
    }
    let g = resolve_group(&format!("Z{}", args.p), None)?;
    let mut csv = String::from("N,algebra_norm,ln_N\n");
    let mut logs = Vec::new();
    let mut norms = Vec::new();
    for &n in &lengths {
        let f = ComplexFn::from_fn(&g, |x| Complex64::new(if x < n { 1.0 } else { 0.0 }, 0.0));
        let norm = fourier_l1_abelian(&f)?;
        let ln = (n as f64).ln();
        csv.push_str(&format!("{n},{norm:.12},{ln:.12}\n"));
        logs.push(ln);
        norms.push(norm);
    }
    if lengths.len() >= 2 {
        csv.push_str(&format!("# slope,{:.6}\n", slope(&logs, &norms)));
    }
    Ok(Output::Text(csv.trim_end().to_string()))
}
