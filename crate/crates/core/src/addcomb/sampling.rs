use num_complex::Complex64;
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::AddCombError;
use crate::func::{translate, ComplexFn, MeasureOnG};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsReport {
    pub r_used: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// `||g||_{L_p(|ν| × μ)}`.
    pub g_norm: f64,
    pub mean_error: f64,
}

/// `ceil(8p / ε^2)`.
pub fn default_sample_size(p: f64, epsilon: f64) -> usize {
    (8.0 * p / (epsilon * epsilon)).ceil() as usize
}

/// `g_ω = f(· ω)` for every `ω` in the group.
pub fn translate_family(f: &ComplexFn) -> Vec<ComplexFn> {
    f.group().elements().map(|w| translate(f, w)).collect()
}

/// Monte Carlo check of the sampling lemma.
///
/// `family[ω]` is `g_ω`, a function on a set carrying the weights `mu`;
/// `ω` ranges over the group of `nu`. Each trial draws `r` indices from
/// `|ν| / ||ν||` and compares `(1/r) Σ h(ω_i) g_{ω_i}` with `∫ g dν` in
/// `L_p(μ)`, where `h = ||ν|| · phase(ν)`. Trial `t` uses stream `t` of a
/// generator seeded with `seed`, so trials are independent of each other's
/// draw counts.
#[allow(clippy::too_many_arguments)]
pub fn croot_sisask_trial(
    nu: &MeasureOnG,
    family: &[ComplexFn],
    mu: &[f64],
    p: f64,
    epsilon: f64,
    r_override: Option<usize>,
    trials: usize,
    seed: u64,
) -> Result<CsReport, AddCombError> {
    if !(p >= 2.0) {
        return Err(AddCombError::InvalidParameter(format!("p = {p} must be at least 2")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(AddCombError::InvalidParameter(format!("epsilon = {epsilon} must lie in (0, 1]")));
    }
    let weights = nu.weights();
    if family.len() != weights.len() {
        return Err(AddCombError::InvalidParameter(format!(
            "family has {} members but the measure has {} atoms",
            family.len(),
            weights.len()
        )));
    }
    if family.iter().any(|g| g.values().len() != mu.len()) || mu.iter().any(|&m| !(m >= 0.0)) {
        return Err(AddCombError::InvalidParameter("mu must be a nonnegative weight per point of each g".into()));
    }
    let total = nu.norm();
    if total == 0.0 {
        return Err(AddCombError::DegenerateMeasure);
    }
    let r = r_override.unwrap_or_else(|| default_sample_size(p, epsilon));
    if r == 0 {
        return Err(AddCombError::InvalidParameter("r must be positive".into()));
    }

    let lp = |v: &[Complex64]| -> f64 {
        v.iter()
            .zip(mu)
            .map(|(z, m)| m * z.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    };
    let abs: Vec<f64> = weights.iter().map(|w| w.norm()).collect();
    let g_norm = abs
        .iter()
        .zip(family)
        .map(|(a, g)| a * g.values().iter().zip(mu).map(|(z, m)| m * z.norm().powf(p)).sum::<f64>())
        .sum::<f64>()
        .powf(1.0 / p);
    let h: Vec<Complex64> = weights
        .iter()
        .map(|w| if w.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { w / w.norm() * total })
        .collect();
    let mut target = vec![Complex64::new(0.0, 0.0); mu.len()];
    for (w, g) in weights.iter().zip(family) {
        for (t, v) in target.iter_mut().zip(g.values()) {
            *t += w * v;
        }
    }

    let sampler = WeightedIndex::new(&abs).map_err(|_| AddCombError::DegenerateMeasure)?;
    let mut successes = 0;
    let mut error_sum = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        rng.set_stream(trial as u64);
        rng.set_word_pos(0);
        let mut estimate = vec![Complex64::new(0.0, 0.0); mu.len()];
        for _ in 0..r {
            let w = sampler.sample(&mut rng);
            for (e, v) in estimate.iter_mut().zip(family[w].values()) {
                *e += h[w] * v;
            }
        }
        let diff: Vec<Complex64> = target
            .iter()
            .zip(&estimate)
            .map(|(t, e)| t - e / r as f64)
            .collect();
        let err = lp(&diff);
        error_sum += err;
        if err <= epsilon * g_norm {
            successes += 1;
        }
    }
    Ok(CsReport {
        r_used: r,
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        g_norm,
        mean_error: if trials == 0 { 0.0 } else { error_sum / trials as f64 },
    })
}
