use cosetforge::addcomb::{croot_sisask_trial, ruzsa_cover, translate_family};
use cosetforge::decompose::{greedy_decompose, Strategy};
use cosetforge::func::{convolve_mean, IntFn, MeasureOnG};
use cosetforge::group::{enumerate_subgroups, Element, GroupRef, Subgroup};
use cosetforge::io::resolve_group;
use cosetforge::spectral::{algebra_norm, split_parts};
use cosetforge::tree::CosetDecisionTree;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::commands::random_function;
use crate::error::CliError;
use crate::Output;

const TOL: f64 = 1e-8;
const GROUPS: [&str; 4] = ["Z12", "Z2xZ4", "D6", "S3"];
const SUITES: [&str; 6] = ["coset-norm", "split", "banach", "cover", "cs", "ct"];

struct Check {
    property: &'static str,
    passed: bool,
    cases: usize,
    detail: String,
}

impl Check {
    fn to_json(&self) -> Value {
        json!({ "property": self.property, "passed": self.passed, "cases": self.cases, "detail": self.detail })
    }
}

fn groups() -> Result<Vec<GroupRef>, CliError> {
    GROUPS.iter().map(|n| Ok(resolve_group(n, None)?)).collect()
}

fn coset_norm() -> Result<Check, CliError> {
    let mut cases = 0;
    let mut worst = 0.0f64;
    for g in groups()? {
        for h in enumerate_subgroups(&g)? {
            for c in h.left_cosets() {
                let f = IntFn::new(&g, g.elements().map(|x| i64::from(c.contains(x))).collect())?;
                worst = worst.max((algebra_norm(&f.to_complex_fn())? - 1.0).abs());
                cases += 1;
            }
        }
    }
    Ok(Check {
        property: "coset indicators have algebra norm 1",
        passed: worst <= TOL,
        cases,
        detail: format!("max deviation {worst:.3e}"),
    })
}

fn split(seed: u64) -> Result<Check, CliError> {
    let mut cases = 0;
    let mut skipped = 0;
    let mut worst = 0.0f64;
    for (gi, g) in groups()?.into_iter().enumerate() {
        let normal: Vec<Subgroup> = enumerate_subgroups(&g)?
            .into_iter()
            .filter(|h| {
                skipped += usize::from(!h.is_normal());
                h.is_normal()
            })
            .collect();
        for t in 0..3u64 {
            let f = random_function(&g, seed ^ ((gi as u64) << 8 | t));
            for h in &normal {
                worst = worst.max(split_parts(&f, h)?.defect());
                cases += 1;
            }
        }
    }
    Ok(Check {
        property: "norm splits additively along normal subgroups",
        passed: worst <= 1e-7,
        cases,
        detail: format!("max defect {worst:.3e}; {skipped} non-normal subgroups skipped"),
    })
}

fn banach(seed: u64) -> Result<Check, CliError> {
    let mut cases = 0;
    let mut worst = f64::NEG_INFINITY;
    for (gi, g) in groups()?.into_iter().enumerate() {
        for t in 0..5u64 {
            let base = seed.wrapping_add((gi as u64) * 1000 + 2 * t);
            let f = random_function(&g, base);
            let h = random_function(&g, base + 1);
            let (nf, nh) = (algebra_norm(&f)?, algebra_norm(&h)?);
            worst = worst.max(algebra_norm(&convolve_mean(&f, &h)?)? - nf * nh);
            worst = worst.max(algebra_norm(&f.add(&h)?)? - nf - nh);
            worst = worst.max(f.linf() - nf);
            cases += 3;
        }
    }
    Ok(Check {
        property: "submultiplicative, subadditive and dominates sup norm",
        passed: worst <= TOL,
        cases,
        detail: format!("largest excess {worst:.3e}"),
    })
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<Element> {
    let k = rng.gen_range(1..=n.min(6));
    sample(rng, n, k).into_iter().collect()
}

fn cover(seed: u64) -> Result<Check, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    let mut failures = Vec::new();
    for g in groups()? {
        for _ in 0..20 {
            let x = random_subset(&mut rng, g.order());
            let w = random_subset(&mut rng, g.order());
            let r = ruzsa_cover(&g, &x, &w)?;
            if !r.covers || r.translates.len() as f64 > r.bound + TOL {
                failures.push(format!("{}: X={x:?} W={w:?}", g.name()));
            }
            cases += 1;
        }
    }
    Ok(Check {
        property: "disjoint translates cover X within |WX|/|W|",
        passed: failures.is_empty(),
        cases,
        detail: if failures.is_empty() { "all covered".into() } else { failures.join("; ") },
    })
}

fn cs(seed: u64) -> Result<Check, CliError> {
    let g = resolve_group("Z64", None)?;
    let h: Vec<Element> = (0..64).step_by(4).collect();
    let nu = MeasureOnG::uniform(&g, &h)?;
    let f = random_function(&g, seed);
    let mu = vec![1.0 / 64.0; 64];
    let report = croot_sisask_trial(&nu, &translate_family(&f), &mu, 2.0, 0.5, None, 200, seed)?;
    Ok(Check {
        property: "sampled average approximates the convolution",
        passed: report.success_rate >= 0.5,
        cases: report.trials,
        detail: format!("success rate {:.3} with r = {}", report.success_rate, report.r_used),
    })
}

fn ct(seed: u64) -> Result<Check, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    let mut failures = Vec::new();
    for g in groups()? {
        for _ in 0..5 {
            let values: Vec<i64> = g.elements().map(|_| rng.gen_range(-2..=2)).collect();
            if values.iter().all(|&v| v == 0) {
                continue;
            }
            let f = IntFn::new(&g, values)?;
            let (d, _) = greedy_decompose(&f.to_exact(), 0.0, Strategy::LargestSubgroup)?;
            let tree = CosetDecisionTree::compile(&d)?;
            let pruned = tree.prune();
            if tree.eval_all() != f || pruned.eval_all() != f || pruned.leaf_count() > tree.leaf_count() {
                failures.push(format!("{}: {:?}", g.name(), f.values()));
            }
            cases += 1;
        }
    }
    Ok(Check {
        property: "compiled and pruned trees reproduce the function",
        passed: failures.is_empty(),
        cases,
        detail: if failures.is_empty() { "all reproduced".into() } else { failures.join("; ") },
    })
}

fn check(name: &str, seed: u64) -> Result<Check, CliError> {
    match name {
        "coset-norm" => coset_norm(),
        "split" => split(seed),
        "banach" => banach(seed),
        "cover" => cover(seed),
        "cs" => cs(seed),
        "ct" => ct(seed),
        other => Err(CliError::SuiteUnknown(other.to_string())),
    }
}

pub fn run_suite(suite: &str, seed: u64) -> Result<Output, CliError> {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(CliError::SuiteUnknown(other.to_string())),
    };
    let checks = names.iter().map(|n| check(n, seed)).collect::<Result<Vec<_>, _>>()?;
    let passed = checks.iter().all(|c| c.passed);
    let report = json!({
        "suite": suite,
        "passed": passed,
        "results": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
    });
    if passed {
        Ok(Output::Json(report))
    } else {
        Err(CliError::VerifyFailed(report))
    }
}
