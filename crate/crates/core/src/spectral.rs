//! The algebra norm as the trace norm of a convolution operator.
//!
//! `g -> f * g` (mean normalization) is represented in the basis of point
//! masses. The `L_2(m_G)` inner product scales every basis vector by the same
//! factor, so Euclidean singular values of this matrix are the operator's
//! singular values.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

use crate::func::{average_over, convolve_mean, tilde, ComplexFn, FunctionError, GroupFunction};
use crate::group::{Element, GroupRef, Subgroup};

/// Relative convergence tolerance handed to the SVD.
pub const SVD_EPS: f64 = 1e-14;
const SVD_MAX_ITER: usize = 10_000;
/// Singular directions below `DROP_RATIO * max` are discarded by [`bg_factorize`].
pub const DROP_RATIO: f64 = 1e-12;
/// Largest additivity defect [`split`] tolerates.
pub const SPLIT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("SVD did not converge for a {order}x{order} operator (max |entry| {max_entry:e})")]
    NumericalFailure { order: usize, max_entry: f64 },
    #[error("group {0} is not an explicit product of cyclic groups")]
    NotExplicitlyAbelian(String),
    #[error("split additivity violated by {defect:e}")]
    AdditivityViolation { defect: f64 },
    #[error("cannot factorize the zero function")]
    ZeroFunction,
    #[error(transparent)]
    Function(#[from] FunctionError),
}

/// Matrix of `g -> f * g` with `entry[x][z] = f(x z^-1) / n`.
#[derive(Clone, Debug)]
pub struct ConvOperator {
    source: ComplexFn,
    matrix: DMatrix<Complex64>,
}

impl ConvOperator {
    pub fn new(f: &ComplexFn) -> Self {
        let g = f.group();
        let n = g.order();
        let scale = 1.0 / n as f64;
        let matrix = DMatrix::from_fn(n, n, |x, z| f[g.mul(x, g.inv(z))] * scale);
        ConvOperator {
            source: f.clone(),
            matrix,
        }
    }

    pub fn source(&self) -> &ComplexFn {
        &self.source
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, g: &ComplexFn) -> ComplexFn {
        let v = DVector::from_column_slice(g.values());
        let out = &self.matrix * v;
        GroupFunction::new(g.group(), out.iter().copied().collect()).expect("square operator")
    }

    fn svd(&self, vectors: bool) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>, SpectralError> {
        SVD::try_new(self.matrix.clone(), vectors, vectors, SVD_EPS, SVD_MAX_ITER).ok_or_else(|| {
            SpectralError::NumericalFailure {
                order: self.matrix.nrows(),
                max_entry: self.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max),
            }
        })
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>, SpectralError> {
        let mut s: Vec<f64> = self.svd(false)?.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }
}

/// `||f||_A`: the sum of the singular values of `g -> f * g`.
pub fn algebra_norm(f: &ComplexFn) -> Result<f64, SpectralError> {
    if f.is_zero() {
        return Ok(0.0);
    }
    Ok(ConvOperator::new(f).singular_values()?.iter().sum())
}

/// `sum_gamma |E_x f(x) conj(gamma(x))|` over the characters of an explicit
/// product of cyclic groups.
pub fn fourier_l1_abelian(f: &ComplexFn) -> Result<f64, SpectralError> {
    let coefficients = fourier_coefficients(f)?;
    Ok(coefficients.iter().map(|c| c.norm()).sum())
}

/// Fourier coefficients `f^(gamma)` indexed like the elements: the character
/// with coordinates `(c_1, .., c_r)` is `x -> exp(2 pi i sum_j c_j x_j / n_j)`.
pub fn fourier_coefficients(f: &ComplexFn) -> Result<Vec<Complex64>, SpectralError> {
    let g = f.group();
    let factors = g
        .cyclic_factors()
        .ok_or_else(|| SpectralError::NotExplicitlyAbelian(g.name().to_string()))?
        .to_vec();
    let n = g.order();
    let mut data: Vec<Complex64> = f.values().to_vec();
    // one naive DFT per axis; stride of axis j is the product of later factors
    let mut stride = n;
    for &m in &factors {
        stride /= m;
        let roots: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / m as f64))
            .collect();
        let block = stride * m;
        let mut line = vec![Complex64::zero(); m];
        for base in (0..n).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (c, slot) in line.iter_mut().enumerate() {
                    *slot = (0..m)
                        .map(|x| data[start + x * stride] * roots[(c * x) % m])
                        .sum();
                }
                for (c, v) in line.iter().enumerate() {
                    data[start + c * stride] = *v;
                }
            }
        }
    }
    let scale = 1.0 / n as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    Ok(data)
}

/// Both halves of `f = f * m_H + (f - f * m_H)` with their norms.
#[derive(Clone, Debug)]
pub struct Split {
    pub averaged: ComplexFn,
    pub remainder: ComplexFn,
    pub norm: f64,
    pub averaged_norm: f64,
    pub remainder_norm: f64,
}

impl Split {
    /// `| ||f|| - ||f * m_H|| - ||f - f * m_H|| |`.
    pub fn defect(&self) -> f64 {
        (self.norm - self.averaged_norm - self.remainder_norm).abs()
    }
}

/// Splits `f` along `H` and certifies that the algebra norm is additive.
///
/// Additivity holds for normal subgroups. For a non-normal `H` the two halves
/// generally have orthogonal row spaces but overlapping column spaces, and
/// the sum of their norms exceeds `||f||_A`; that surfaces here as
/// [`SpectralError::AdditivityViolation`]. Use [`split_parts`] to measure it.
pub fn split(f: &ComplexFn, h: &Subgroup) -> Result<Split, SpectralError> {
    let out = split_parts(f, h)?;
    let defect = out.defect();
    if defect > SPLIT_TOLERANCE {
        return Err(SpectralError::AdditivityViolation { defect });
    }
    Ok(out)
}

/// [`split`] without the additivity certificate.
pub fn split_parts(f: &ComplexFn, h: &Subgroup) -> Result<Split, SpectralError> {
    let averaged = average_over(f, h)?;
    let remainder = f.sub(&averaged)?;
    Ok(Split {
        norm: algebra_norm(f)?,
        averaged_norm: algebra_norm(&averaged)?,
        remainder_norm: algebra_norm(&remainder)?,
        averaged,
        remainder,
    })
}

/// `f(x) = M * E_omega[ tilde(h_omega) * g_omega (x) ]` with unit-norm
/// `h_omega, g_omega`, plus the matching representation-coefficient form.
#[derive(Clone, Debug)]
pub struct BGFactorization {
    group: GroupRef,
    /// `M`, equal to the algebra norm.
    pub constant: f64,
    /// `P(omega)`, summing to one.
    pub weights: Vec<f64>,
    /// `(h_omega, g_omega)`, each of unit `L_2(m_G)` norm.
    pub pairs: Vec<(ComplexFn, ComplexFn)>,
}

impl BGFactorization {
    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    /// Value at `x` of the averaged form.
    pub fn reconstruct(&self) -> Result<ComplexFn, SpectralError> {
        let mut acc = ComplexFn::zero(&self.group);
        for (w, (h, g)) in self.weights.iter().zip(&self.pairs) {
            let term = convolve_mean(&tilde(h), g)?;
            acc = acc.add(&term.scale(&Complex64::new(self.constant * w, 0.0)))?;
        }
        Ok(acc)
    }

    /// Dimension of the representation space `L_2(m_G)^Omega`.
    pub fn dimension(&self) -> usize {
        self.group.order() * self.pairs.len()
    }

    /// The vectors `v = (sqrt(M P(omega)) g_omega)` and `w = (sqrt(M P(omega)) h_omega)`,
    /// flattened block by block.
    pub fn vectors(&self) -> (DVector<Complex64>, DVector<Complex64>) {
        let n = self.group.order();
        let d = self.dimension();
        let mut v = DVector::zeros(d);
        let mut w = DVector::zeros(d);
        for (k, (weight, (h, g))) in self.weights.iter().zip(&self.pairs).enumerate() {
            let s = (self.constant * weight).sqrt();
            for x in 0..n {
                v[k * n + x] = g[x] * s;
                w[k * n + x] = h[x] * s;
            }
        }
        (v, w)
    }

    /// The right regular representation on every block: `(pi(x) u)(s) = u(s x)`.
    pub fn representation_matrix(&self, x: Element) -> DMatrix<Complex64> {
        let n = self.group.order();
        let d = self.dimension();
        let mut m = DMatrix::zeros(d, d);
        for block in 0..self.pairs.len() {
            for s in 0..n {
                m[(block * n + s, block * n + self.group.mul(s, x))] = Complex64::new(1.0, 0.0);
            }
        }
        m
    }

    /// Inner product on `L_2(m_G)^Omega`.
    pub fn inner(&self, a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
        let scale = 1.0 / self.group.order() as f64;
        a.iter().zip(b.iter()).map(|(p, q)| p * q.conj()).sum::<Complex64>() * scale
    }

    /// `<pi(x) v, w>`, which reproduces `f(x)`.
    pub fn coefficient(&self, x: Element) -> Complex64 {
        let (v, w) = self.vectors();
        let moved = self.representation_matrix(x) * v;
        self.inner(&moved, &w)
    }

    /// `||v|| ||w||` in `L_2(m_G)^Omega`.
    pub fn vector_norm_product(&self) -> f64 {
        let (v, w) = self.vectors();
        (self.inner(&v, &v).re * self.inner(&w, &w).re).sqrt()
    }
}

/// Factorizes `f` from the SVD of its convolution operator.
pub fn bg_factorize(f: &ComplexFn) -> Result<BGFactorization, SpectralError> {
    if f.is_zero() {
        return Err(SpectralError::ZeroFunction);
    }
    let group = Arc::clone(f.group());
    let n = group.order();
    let op = ConvOperator::new(f);
    let svd = op.svd(true)?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^*");
    let sv = &svd.singular_values;
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let norm: f64 = sv.iter().sum();
    let root_n = (n as f64).sqrt();

    let mut weights = Vec::new();
    let mut pairs = Vec::new();
    for k in 0..sv.len() {
        let lambda = sv[k];
        if lambda < DROP_RATIO * largest {
            continue;
        }
        // unit vectors in L_2(m_G): f * v_k = lambda w_k
        let w_k = ComplexFn::from_fn(&group, |x| u[(x, k)] * root_n);
        let v_k = ComplexFn::from_fn(&group, |x| v_t[(k, x)].conj() * root_n);
        // h = tilde(w); g(t) = <rho_t(u), v> with u = n 1_{e}, which is tilde(v)
        weights.push(lambda / norm);
        pairs.push((tilde(&w_k), tilde(&v_k)));
    }
    Ok(BGFactorization {
        group,
        constant: norm,
        weights,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{lp_norm, Weighting};
    use crate::group::{enumerate_subgroups, make_boolean_cube, make_cyclic, make_product, make_symmetric};
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(g: &GroupRef, rng: &mut ChaCha8Rng) -> ComplexFn {
        ComplexFn::from_fn(g, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn zero_has_zero_norm() {
        let g = make_cyclic(5).unwrap().into_ref();
        assert_eq!(algebra_norm(&ComplexFn::zero(&g)).unwrap(), 0.0);
    }

    #[test]
    fn operator_matches_convolution() {
        let g = make_symmetric(3).unwrap().into_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_fn(&g, &mut rng);
        let h = random_fn(&g, &mut rng);
        let op = ConvOperator::new(&f);
        let direct = convolve_mean(&f, &h).unwrap();
        for (a, b) in op.apply(&h).values().iter().zip(direct.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn mean_weighted_basis_gives_same_singular_values() {
        // Gram-weighted operator D^(1/2) A D^(-1/2) with D = I/n is A itself
        let g = make_symmetric(3).unwrap().into_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_fn(&g, &mut rng);
        let op = ConvOperator::new(&f);
        let n = g.order() as f64;
        let d_half = DMatrix::<Complex64>::identity(6, 6) * Complex64::new(1.0 / n.sqrt(), 0.0);
        let d_inv_half = DMatrix::<Complex64>::identity(6, 6) * Complex64::new(n.sqrt(), 0.0);
        let weighted = &d_half * op.matrix() * &d_inv_half;
        let a: f64 = weighted.singular_values().iter().sum();
        assert!((a - algebra_norm(&f).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn singleton_and_coset_norms() {
        let g = make_cyclic(6).unwrap().into_ref();
        let single = ComplexFn::indicator(&g, [4]);
        assert!((algebra_norm(&single).unwrap() - 1.0).abs() < 1e-9);
        assert!((fourier_l1_abelian(&single).unwrap() - 1.0).abs() < 1e-12);
        let s4 = make_symmetric(4).unwrap().into_ref();
        for h in enumerate_subgroups(&s4).unwrap() {
            for c in h.left_cosets() {
                let f = ComplexFn::indicator(&s4, c.members());
                assert!((algebra_norm(&f).unwrap() - 1.0).abs() < 1e-9, "{c:?}");
            }
        }
    }

    #[test]
    fn characters_have_unit_norm() {
        let g = make_product(&make_cyclic(3).unwrap(), &make_cyclic(4).unwrap()).unwrap().into_ref();
        for c in g.elements() {
            let cc = g.coordinates(c).unwrap();
            let chi = ComplexFn::from_fn(&g, |x| {
                let xc = g.coordinates(x).unwrap();
                let turns = cc[0] as f64 * xc[0] as f64 / 3.0 + cc[1] as f64 * xc[1] as f64 / 4.0;
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * turns)
            });
            assert!((fourier_l1_abelian(&chi).unwrap() - 1.0).abs() < 1e-12);
            let coeffs = fourier_coefficients(&chi).unwrap();
            assert!((coeffs[c] - Complex64::one()).norm() < 1e-12);
        }
    }

    #[test]
    fn two_point_interval_on_z5_matches_dft() {
        let g = make_cyclic(5).unwrap().into_ref();
        let f = ComplexFn::indicator(&g, [0, 1]);
        // closed form: (1/5) sum_k |1 + e^{-2 pi i k/5}| = (1/5) sum_k 2|cos(pi k/5)|
        let closed: f64 = (0..5)
            .map(|k| 2.0 * (std::f64::consts::PI * k as f64 / 5.0).cos().abs())
            .sum::<f64>()
            / 5.0;
        assert!((fourier_l1_abelian(&f).unwrap() - closed).abs() < 1e-12);
        assert!((algebra_norm(&f).unwrap() - closed).abs() < 1e-9);
    }

    #[test]
    fn dft_needs_explicit_factors() {
        let g = make_symmetric(3).unwrap().into_ref();
        assert!(matches!(
            fourier_l1_abelian(&ComplexFn::zero(&g)),
            Err(SpectralError::NotExplicitlyAbelian(_))
        ));
    }

    #[test]
    fn oracle_agreement_on_z16() {
        let g = make_cyclic(16).unwrap().into_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f = random_fn(&g, &mut rng);
            assert!((algebra_norm(&f).unwrap() - fourier_l1_abelian(&f).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn split_edge_cases() {
        let g = make_symmetric(3).unwrap().into_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_fn(&g, &mut rng);
        let mean: Complex64 = f.values().iter().sum::<Complex64>() / 6.0;
        let whole = split(&f, &Subgroup::whole(&g)).unwrap();
        assert!(whole.averaged.values().iter().all(|v| (v - mean).norm() < 1e-12));
        let trivial = split(&f, &Subgroup::trivial(&g)).unwrap();
        assert!(trivial.remainder.linf() < 1e-12);
        assert!(trivial.remainder_norm < 1e-9);
        for h in enumerate_subgroups(&g).unwrap() {
            if h.is_normal() {
                assert!(split(&f, &h).unwrap().defect() < 1e-8);
            } else {
                // the norm is only subadditive here
                let parts = split_parts(&f, &h).unwrap();
                assert!(parts.averaged_norm + parts.remainder_norm > parts.norm + 1e-3);
                assert!(matches!(split(&f, &h), Err(SpectralError::AdditivityViolation { .. })));
            }
        }
    }

    #[test]
    fn split_is_additive_on_abelian_groups() {
        let g = make_boolean_cube(3).unwrap().into_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let f = random_fn(&g, &mut rng);
        for h in enumerate_subgroups(&g).unwrap() {
            assert!(split(&f, &h).unwrap().defect() < 1e-8);
        }
    }

    #[test]
    fn norm_properties() {
        let g = make_symmetric(3).unwrap().into_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let f = random_fn(&g, &mut rng);
            let h = random_fn(&g, &mut rng);
            let (nf, nh) = (algebra_norm(&f).unwrap(), algebra_norm(&h).unwrap());
            let prod = algebra_norm(&convolve_mean(&f, &h).unwrap()).unwrap();
            assert!(prod <= nf * nh + 1e-8);
            assert!(lp_norm(&f, f64::INFINITY, &Weighting::Mean).unwrap() <= nf + 1e-9);
            assert!(algebra_norm(&f.add(&h).unwrap()).unwrap() <= nf + nh + 1e-9);
            let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            assert!((algebra_norm(&f.scale(&c)).unwrap() - c.norm() * nf).abs() < 1e-9);
            let y = rng.gen_range(0..6);
            assert!((algebra_norm(&crate::func::translate(&f, y)).unwrap() - nf).abs() < 1e-9);
        }
    }

    #[test]
    fn factorization_of_constant_one() {
        let g = make_cyclic(6).unwrap().into_ref();
        let bg = bg_factorize(&ComplexFn::constant(&g, Complex64::one())).unwrap();
        assert_eq!(bg.pairs.len(), 1);
        assert!((bg.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factorization_of_scaled_dirac() {
        let g = make_symmetric(3).unwrap().into_ref();
        let bg = bg_factorize(&ComplexFn::mean_unit(&g)).unwrap();
        // the operator is the identity: six equal singular values
        assert_eq!(bg.pairs.len(), 6);
        assert!(bg.weights.iter().all(|w| (w - 1.0 / 6.0).abs() < 1e-12));
        assert!((bg.constant - 6.0).abs() < 1e-9);
    }

    #[test]
    fn factorization_reconstructs() {
        let z2 = make_cyclic(2).unwrap();
        let klein = make_product(&z2, &z2).unwrap().into_ref();
        let cube = make_boolean_cube(3).unwrap().into_ref();
        let s3 = make_symmetric(3).unwrap().into_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for g in [klein, cube, s3] {
            for _ in 0..10 {
                let f = ComplexFn::from_fn(&g, |_| Complex64::new(rng.gen_range(0..2) as f64, 0.0));
                if f.is_zero() {
                    continue;
                }
                let bg = bg_factorize(&f).unwrap();
                let rec = bg.reconstruct().unwrap();
                for (a, b) in rec.values().iter().zip(f.values()) {
                    assert!((a - b).norm() < 1e-8);
                }
                for (h, gg) in &bg.pairs {
                    assert!((lp_norm(h, 2.0, &Weighting::Mean).unwrap() - 1.0).abs() < 1e-9);
                    assert!((lp_norm(gg, 2.0, &Weighting::Mean).unwrap() - 1.0).abs() < 1e-9);
                }
                assert!((bg.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for x in g.elements() {
                    assert!((bg.coefficient(x) - f[x]).norm() < 1e-8);
                }
                assert!(bg.vector_norm_product() <= algebra_norm(&f).unwrap() + 1e-8);
            }
        }
    }

    #[test]
    fn representation_is_a_homomorphism() {
        let g = make_symmetric(3).unwrap().into_ref();
        let bg = bg_factorize(&ComplexFn::indicator(&g, [0, 1])).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let lhs = bg.representation_matrix(g.mul(a, b));
                let rhs = bg.representation_matrix(a) * bg.representation_matrix(b);
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}
