//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails; the process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cosetforge::addcomb::{
    croot_sisask_trial, default_sample_size, is_arithmetically_connected, r_multi_count, ruzsa_cover,
    translate_family, trivial_indices, ConnectivityMode, Verdict,
};
use cosetforge::decompose::{greedy_decompose, Strategy};
use cosetforge::func::{convolve_mean, ComplexFn, IntFn, MeasureOnG};
use cosetforge::group::{
    enumerate_subgroups, make_boolean_cube, make_cyclic, make_dihedral, make_product, make_symmetric, Coset,
    Element, GroupRef, Subgroup,
};
use cosetforge::spectral::{algebra_norm, fourier_l1_abelian, split_parts};
use cosetforge::tree::{CosetDecisionTree, Node};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn cyclic(n: usize) -> GroupRef {
    make_cyclic(n).unwrap().into_ref()
}

fn z2xz4() -> GroupRef {
    make_product(&make_cyclic(2).unwrap(), &make_cyclic(4).unwrap()).unwrap().into_ref()
}

fn d6() -> GroupRef {
    make_dihedral(6).unwrap().into_ref()
}

fn s(m: usize) -> GroupRef {
    make_symmetric(m).unwrap().into_ref()
}

fn cube(k: usize) -> GroupRef {
    make_boolean_cube(k).unwrap().into_ref()
}

fn random_fn(g: &GroupRef, rng: &mut ChaCha8Rng) -> ComplexFn {
    ComplexFn::from_fn(g, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn indicator(g: &GroupRef, w: &Coset) -> ComplexFn {
    ComplexFn::from_fn(g, |x| Complex64::new(if w.contains(x) { 1.0 } else { 0.0 }, 0.0))
}

fn within(limit: Duration, started: Instant, detail: String) -> Outcome {
    let took = started.elapsed();
    if took > limit {
        Err(format!("{detail}; took {took:.2?} over {limit:?}"))
    } else {
        Ok(format!("{detail}; {took:.2?}"))
    }
}

fn coset_indicator_norm() -> Outcome {
    let t = Instant::now();
    let mut cases = 0;
    let mut worst = 0.0f64;
    for g in [cyclic(12), z2xz4(), d6(), s(3)] {
        for h in enumerate_subgroups(&g).map_err(|e| e.to_string())? {
            for w in h.left_cosets() {
                let n = algebra_norm(&indicator(&g, &w)).map_err(|e| e.to_string())?;
                worst = worst.max((n - 1.0).abs());
                cases += 1;
            }
        }
    }
    let detail = format!("{cases} cosets, max |norm - 1| = {worst:.2e}");
    if worst > 1e-9 {
        return Err(detail);
    }
    within(Duration::from_secs(10), t, detail)
}

fn abelian_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let z3xz5 = make_product(&make_cyclic(3).unwrap(), &make_cyclic(5).unwrap()).unwrap().into_ref();
    let mut worst = 0.0f64;
    for g in [cyclic(16), z3xz5] {
        for _ in 0..100 {
            let f = random_fn(&g, &mut rng);
            let a = algebra_norm(&f).map_err(|e| e.to_string())?;
            let b = fourier_l1_abelian(&f).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs());
        }
    }
    let detail = format!("200 functions, max gap {worst:.2e}");
    if worst > 1e-8 {
        return Err(detail);
    }
    within(Duration::from_secs(30), t, detail)
}

fn split_additivity() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut offenders: Vec<String> = Vec::new();
    let mut cases = 0;
    for g in [s(3), cube(3)] {
        let subgroups = enumerate_subgroups(&g).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let f = random_fn(&g, &mut rng);
            for h in &subgroups {
                let d = split_parts(&f, h).map_err(|e| e.to_string())?.defect();
                cases += 1;
                if d > 1e-8 {
                    let tag = format!("{} H={:?}", g.name(), h.elements());
                    if !offenders.contains(&tag) {
                        offenders.push(tag);
                    }
                }
                worst = worst.max(d);
            }
        }
    }
    let detail = format!("{cases} splits, max defect {worst:.2e}");
    if !offenders.is_empty() {
        return Err(format!("{detail}; additivity fails for {}", offenders.join(", ")));
    }
    within(Duration::from_secs(30), t, detail)
}

fn norm_properties() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for g in [cyclic(12), z2xz4(), d6(), s(3), cube(3)] {
        for _ in 0..100 {
            let f = random_fn(&g, &mut rng);
            let h = random_fn(&g, &mut rng);
            let (nf, nh) = (algebra_norm(&f).unwrap(), algebra_norm(&h).unwrap());
            let nfh = algebra_norm(&convolve_mean(&f, &h).unwrap()).unwrap();
            worst = worst.max(nfh - nf * nh).max(f.linf() - nf).max(h.linf() - nh);
            cases += 1;
        }
    }
    let detail = format!("{cases} pairs, largest excess {worst:.2e}");
    if worst > 1e-8 {
        return Err(detail);
    }
    within(Duration::from_secs(60), t, detail)
}

fn random_coset_sum(g: &GroupRef, subgroups: &[Subgroup], rng: &mut ChaCha8Rng) -> IntFn {
    let mut values = vec![0i64; g.order()];
    for _ in 0..rng.gen_range(1..=3) {
        let h = &subgroups[rng.gen_range(0..subgroups.len())];
        let cosets = h.left_cosets();
        for _ in 0..rng.gen_range(1..=cosets.len().min(3)) {
            let w = &cosets[rng.gen_range(0..cosets.len())];
            let c = rng.gen_range(-3..=3);
            for x in w.members() {
                values[x] += c;
            }
        }
    }
    IntFn::new(g, values).unwrap()
}

fn decompose_roundtrip() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut max_layers = 0;
    for g in [cube(4), d6()] {
        let subgroups = enumerate_subgroups(&g).map_err(|e| e.to_string())?;
        for case in 0..100 {
            let f = random_coset_sum(&g, &subgroups, &mut rng);
            let (d, _) = greedy_decompose(&f.to_exact(), 0.0, Strategy::LargestSubgroup)
                .map_err(|e| format!("{} case {case}: {e}", g.name()))?;
            if d.to_function() != f {
                return Err(format!("{} case {case}: decomposition does not reconstruct", g.name()));
            }
            max_layers = max_layers.max(d.len());
            if f.values().iter().all(|&v| v == 0) {
                continue;
            }
            let tree = CosetDecisionTree::compile(&d).map_err(|e| format!("{} case {case}: {e}", g.name()))?;
            if tree.eval_all() != f {
                return Err(format!("{} case {case}: tree disagrees with f", g.name()));
            }
            if tree.leaf_count() as u128 > d.leaf_bound() {
                return Err(format!(
                    "{} case {case}: {} leaves over bound {}",
                    g.name(),
                    tree.leaf_count(),
                    d.leaf_bound()
                ));
            }
        }
    }
    within(Duration::from_secs(120), t, format!("200 functions, up to {max_layers} layers"))
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

fn ap_slope() -> Outcome {
    let t = Instant::now();
    let g = cyclic(2053);
    let lengths = [32usize, 64, 128, 256, 512];
    let mut logs = Vec::new();
    let mut norms = Vec::new();
    for &n in &lengths {
        let f = ComplexFn::from_fn(&g, |x| Complex64::new(if x < n { 1.0 } else { 0.0 }, 0.0));
        norms.push(fourier_l1_abelian(&f).map_err(|e| e.to_string())?);
        logs.push((n as f64).ln());
    }
    let slope = least_squares_slope(&logs, &norms);
    let detail = format!("slope {slope:.4} against 4/pi^2 = {:.4}", 4.0 / std::f64::consts::PI.powi(2));
    if !(0.30..=0.52).contains(&slope) {
        return Err(detail);
    }
    within(Duration::from_secs(60), t, detail)
}

fn ruzsa_covering() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in [cyclic(64), s(4)] {
        let n = g.order();
        for case in 0..50 {
            let (nx, nw) = (rng.gen_range(1..=n / 2), rng.gen_range(1..=8));
            let x: Vec<Element> = sample(&mut rng, n, nx).into_iter().collect();
            let w: Vec<Element> = sample(&mut rng, n, nw).into_iter().collect();
            let r = ruzsa_cover(&g, &x, &w).map_err(|e| e.to_string())?;
            // independent exhaustive check of X ⊆ W^-1 W T
            let covered = x.iter().all(|&y| {
                r.translates.iter().any(|&t| {
                    w.iter().any(|&a| w.iter().any(|&b| g.mul(g.mul(g.inv(a), b), t) == y))
                })
            });
            if !covered || r.translates.len() as f64 > r.bound + 1e-12 {
                return Err(format!("{} case {case}: |T| = {} bound {:.3}", g.name(), r.translates.len(), r.bound));
            }
        }
    }
    within(Duration::from_secs(30), t, "100 pairs covered within |WX|/|W|".into())
}

fn surjection_inequality() -> Outcome {
    let t = Instant::now();
    let mut rows = 0;
    for k in 1..=4usize {
        for r in 0..=3usize {
            let len = 2 * r + 1;
            let c = trivial_indices(k, len).map_err(|e| e.to_string())?;
            let multi = if r == 0 { 1 } else { r_multi_count(k, r).map_err(|e| e.to_string())? };
            if c.trivial + c.nontrivial != (k as u64).pow(len as u32) {
                return Err(format!("k={k} r={r}: counts do not partition"));
            }
            if c.trivial > (len * k) as u64 * multi {
                return Err(format!("k={k} r={r}: |T| = {} > {}", c.trivial, (len * k) as u64 * multi));
            }
            rows += 1;
        }
    }
    within(Duration::from_secs(60), t, format!("{rows} (k, r) pairs"))
}

fn connectivity_ground_truth() -> Outcome {
    let t = Instant::now();
    for g in [cyclic(12), d6(), s(3)] {
        for h in enumerate_subgroups(&g).map_err(|e| e.to_string())? {
            let c = is_arithmetically_connected(&g, h.elements(), 3, 1, ConnectivityMode::Exhaustive)
                .map_err(|e| e.to_string())?;
            if c.verdict != Verdict::Connected {
                return Err(format!("{} subgroup {:?} not connected", g.name(), h.elements()));
            }
        }
    }
    let g = cyclic(1000);
    let c = is_arithmetically_connected(&g, &[1, 10], 3, 1, ConnectivityMode::Exhaustive).map_err(|e| e.to_string())?;
    match c.verdict {
        Verdict::Counterexample { x } => within(Duration::from_secs(60), t, format!("counterexample {x:?}")),
        other => Err(format!(
            "subgroups connected, but {{1, 10}} in Z1000 is {other:?} with {} witnesses",
            c.witnesses.len()
        )),
    }
}

fn croot_sisask() -> Outcome {
    let t = Instant::now();
    let g = cyclic(64);
    let (p, eps) = (2.0, 0.5);
    let r = default_sample_size(p, eps);
    let mu = vec![1.0 / 64.0; 64];
    let mut rates = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let supports: [Vec<Element>; 2] = [(0..64).collect(), (0..64).step_by(4).collect()];
    for (i, support) in supports.iter().enumerate() {
        let nu = MeasureOnG::uniform(&g, support).map_err(|e| e.to_string())?;
        let f = random_fn(&g, &mut rng);
        let rep = croot_sisask_trial(&nu, &translate_family(&f), &mu, p, eps, None, 200, 100 + i as u64)
            .map_err(|e| e.to_string())?;
        rates.push(rep.success_rate);
    }
    let detail = format!("r = {r}, success rates {rates:.3?}");
    if rates.iter().any(|&x| x < 0.35) {
        return Err(detail);
    }
    within(Duration::from_secs(60), t, detail)
}

fn six_coset_tree() -> Outcome {
    let t = Instant::now();
    let g = cyclic(12);
    let coset = |gen: Element, rep: Element| Subgroup::new(&g, (0..12).map(|k| k * gen % 12)).unwrap().coset_of(rep);
    let w = [coset(2, 0), coset(3, 0), coset(6, 1), coset(4, 1), coset(4, 0), coset(3, 2)];
    let leaf = |value| Node::Leaf { value };
    let test = |i: usize, edge1, edge0| Node::Internal { test: w[i].clone(), edge1, edge0 };
    let nodes = vec![
        test(0, 1, 5),
        test(1, 2, 4),
        test(3, 3, 11),
        leaf(1),
        leaf(1),
        test(2, 6, 9),
        test(4, 7, 8),
        leaf(0),
        leaf(0),
        test(5, 10, 12),
        leaf(1),
        leaf(0),
        leaf(0),
    ];
    let tree = CosetDecisionTree::new(&g, nodes, 0).map_err(|e| e.to_string())?;
    let expanded = tree.to_function();
    let ind = |i: usize, x| i64::from(w[i].contains(x));
    for x in 0..12 {
        let formula = ind(0, x) * ind(1, x) * ind(3, x)
            + ind(0, x) * (1 - ind(1, x))
            + (1 - ind(0, x)) * (1 - ind(2, x)) * ind(5, x);
        let e = tree.eval(x).map_err(|e| e.to_string())?;
        if e != formula || expanded[x] != formula {
            return Err(format!("x = {x}: eval {e}, paths {}, formula {formula}", expanded[x]));
        }
    }
    let pruned = tree.prune();
    let w4_left = pruned.nodes().iter().any(|n| matches!(n, Node::Internal { test, .. } if *test == w[4]));
    if w4_left || pruned.eval_all() != tree.eval_all() {
        return Err("prune kept the W4 test or changed the function".into());
    }
    within(
        Duration::from_secs(1),
        t,
        format!("{} leaves, {} after pruning", tree.leaf_count(), pruned.leaf_count()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("coset-indicator norm", coset_indicator_norm),
        ("abelian oracle equivalence", abelian_oracle),
        ("split additivity", split_additivity),
        ("algebra-norm properties", norm_properties),
        ("decompose/compile roundtrip", decompose_roundtrip),
        ("AP slope", ap_slope),
        ("Ruzsa covering", ruzsa_covering),
        ("surjection inequality", surjection_inequality),
        ("connectivity ground truth", connectivity_ground_truth),
        ("Croot-Sisask concentration", croot_sisask),
        ("six-coset tree fidelity", six_coset_tree),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
