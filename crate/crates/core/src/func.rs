//! Functions and measures on a finite group.
//!
//! Two convolutions are kept apart on purpose: [`convolve_mean`] averages
//! over the group (Haar probability measure) and [`convolve_count`] sums
//! (counting measure). Measures are identified with their densities against
//! counting measure.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::group::{Element, GroupRef, Subgroup};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionError {
    #[error("functions live on different groups")]
    GroupMismatch,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("value at element {element} is {distance} from the nearest integer")]
    NotAlmostInteger { element: Element, distance: f64 },
    #[error("epsilon {0} admits ambiguous roundings; it must be below 1/2")]
    AmbiguousEpsilon(f64),
    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),
    #[error("weighting set is empty")]
    EmptyWeighting,
}

/// Scalars a [`GroupFunction`] can carry.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn conj(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact division by a positive count.
    fn div_count(&self, n: usize) -> Self;
    fn modulus(&self) -> f64;
    fn to_complex(&self) -> Complex64;
    /// Nearest integer and the distance to it.
    fn nearest_integer(&self) -> (i64, f64);
}

impl Scalar for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn div_count(&self, n: usize) -> Self {
        self / n as f64
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn nearest_integer(&self) -> (i64, f64) {
        let k = self.re.round();
        (k as i64, (self - Complex64::new(k, 0.0)).norm())
    }
}

impl Scalar for Rational64 {
    fn conj(&self) -> Self {
        *self
    }
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn div_count(&self, n: usize) -> Self {
        self / Rational64::from_integer(n as i64)
    }
    fn modulus(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::NAN)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn nearest_integer(&self) -> (i64, f64) {
        let k = self.round();
        (k.to_integer(), (self - k).abs().to_f64().unwrap_or(f64::NAN))
    }
}

/// A function `G -> T`, stored densely by element index.
#[derive(Clone, Debug)]
pub struct GroupFunction<T> {
    group: GroupRef,
    values: Vec<T>,
}

/// Floating point (complex) functions, used by the spectral code.
pub type ComplexFn = GroupFunction<Complex64>;
/// Exact rational functions, used along the decomposition path.
pub type ExactFn = GroupFunction<Rational64>;
/// Integer-valued functions.
pub type IntFn = GroupFunction<i64>;

impl<T: PartialEq> PartialEq for GroupFunction<T> {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group) && self.values == other.values
    }
}

pub(crate) fn same_group(a: &GroupRef, b: &GroupRef) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl<T> GroupFunction<T> {
    pub fn new(group: &GroupRef, values: Vec<T>) -> Result<Self, FunctionError> {
        if values.len() != group.order() {
            return Err(FunctionError::WrongLength {
                expected: group.order(),
                got: values.len(),
            });
        }
        Ok(GroupFunction {
            group: Arc::clone(group),
            values,
        })
    }

    pub fn from_fn(group: &GroupRef, f: impl FnMut(Element) -> T) -> Self {
        GroupFunction {
            group: Arc::clone(group),
            values: group.elements().map(f).collect(),
        }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> GroupFunction<U> {
        GroupFunction {
            group: Arc::clone(&self.group),
            values: self.values.iter().map(f).collect(),
        }
    }

    fn check_same(&self, other: &GroupFunction<impl Sized>) -> Result<(), FunctionError> {
        if same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(FunctionError::GroupMismatch)
        }
    }
}

impl<T> std::ops::Index<Element> for GroupFunction<T> {
    type Output = T;
    fn index(&self, x: Element) -> &T {
        &self.values[x]
    }
}

impl<T: Scalar> GroupFunction<T> {
    pub fn zero(group: &GroupRef) -> Self {
        Self::from_fn(group, |_| T::zero())
    }

    pub fn constant(group: &GroupRef, c: T) -> Self {
        Self::from_fn(group, |_| c.clone())
    }

    /// Indicator function of a set of elements.
    pub fn indicator(group: &GroupRef, set: impl IntoIterator<Item = Element>) -> Self {
        let mut f = Self::zero(group);
        for x in set {
            f.values[x] = T::one();
        }
        f
    }

    /// `n * 1_{identity}`, the unit for [`convolve_mean`].
    pub fn mean_unit(group: &GroupRef) -> Self {
        let mut f = Self::zero(group);
        f.values[group.identity()] = T::from_i64(group.order() as i64);
        f
    }

    pub fn add(&self, other: &Self) -> Result<Self, FunctionError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FunctionError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() - b.clone()))
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn pointwise_mul(&self, other: &Self) -> Result<Self, FunctionError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() * b.clone()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        GroupFunction {
            group: Arc::clone(&self.group),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn to_complex(&self) -> ComplexFn {
        self.map(Scalar::to_complex)
    }

    /// Supremum norm.
    pub fn linf(&self) -> f64 {
        self.values.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    /// `{x : |f(x)| > tol}`.
    pub fn support(&self, tol: f64) -> Vec<Element> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(x, v)| (v.modulus() > tol).then_some(x))
            .collect()
    }

    /// Exact support `{x : f(x) != 0}`.
    pub fn exact_support(&self) -> Vec<Element> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(x, v)| (!v.is_zero()).then_some(x))
            .collect()
    }
}

impl IntFn {
    pub fn to_exact(&self) -> ExactFn {
        self.map(|&v| Rational64::from_integer(v))
    }

    pub fn to_complex_fn(&self) -> ComplexFn {
        self.map(|&v| Complex64::new(v as f64, 0.0))
    }

    pub fn support_set(&self) -> Vec<Element> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(x, &v)| (v != 0).then_some(x))
            .collect()
    }
}

/// `(f * g)(x) = (1/n) sum_y f(y) g(y^-1 x)`.
pub fn convolve_mean<T: Scalar>(f: &GroupFunction<T>, g: &GroupFunction<T>) -> Result<GroupFunction<T>, FunctionError> {
    let n = f.group.order();
    Ok(convolve_count(f, g)?.map(|v| v.div_count(n)))
}

/// `(h * k)(x) = sum_y h(y) k(y^-1 x)`.
pub fn convolve_count<T: Scalar>(h: &GroupFunction<T>, k: &GroupFunction<T>) -> Result<GroupFunction<T>, FunctionError> {
    h.check_same(k)?;
    let g = &h.group;
    let mut out = vec![T::zero(); g.order()];
    for (y, hy) in h.values.iter().enumerate() {
        if hy.is_zero() {
            continue;
        }
        for (z, kz) in k.values.iter().enumerate() {
            if kz.is_zero() {
                continue;
            }
            // y * z = x  <=>  z = y^-1 x
            let x = g.mul(y, z);
            out[x] = out[x].clone() + hy.clone() * kz.clone();
        }
    }
    Ok(GroupFunction {
        group: Arc::clone(g),
        values: out,
    })
}

/// `f * m_S`, i.e. `x -> (1/|S|) sum_{s in S} f(x s^-1)`.
pub fn convolve_uniform<T: Scalar>(f: &GroupFunction<T>, set: &[Element]) -> Result<GroupFunction<T>, FunctionError> {
    if set.is_empty() {
        return Err(FunctionError::EmptyWeighting);
    }
    let g = &f.group;
    Ok(GroupFunction::from_fn(g, |x| {
        let total = set
            .iter()
            .fold(T::zero(), |acc, &s| acc + f.values[g.mul(x, g.inv(s))].clone());
        total.div_count(set.len())
    }))
}

/// `f * m_H`; constant on left cosets of `H`.
pub fn average_over<T: Scalar>(f: &GroupFunction<T>, h: &Subgroup) -> Result<GroupFunction<T>, FunctionError> {
    if !same_group(f.group(), h.parent()) {
        return Err(FunctionError::GroupMismatch);
    }
    convolve_uniform(f, h.elements())
}

/// Right translation `x -> f(x y)`.
pub fn translate<T: Clone>(f: &GroupFunction<T>, y: Element) -> GroupFunction<T> {
    let g = &f.group;
    GroupFunction::from_fn(g, |x| f.values[g.mul(x, y)].clone())
}

/// `x -> conj(f(x^-1))`.
pub fn tilde<T: Scalar>(f: &GroupFunction<T>) -> GroupFunction<T> {
    let g = &f.group;
    GroupFunction::from_fn(g, |x| f.values[g.inv(x)].conj())
}

/// Weighting used by [`lp_norm`] and [`inner`].
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// Uniform probability on `G`.
    Mean,
    /// Counting measure on `G`.
    Count,
    /// Uniform probability on a set `S`.
    Uniform(Vec<Element>),
}

impl Weighting {
    fn weights(&self, n: usize) -> Result<Vec<f64>, FunctionError> {
        Ok(match self {
            Weighting::Mean => vec![1.0 / n as f64; n],
            Weighting::Count => vec![1.0; n],
            Weighting::Uniform(set) => {
                if set.is_empty() {
                    return Err(FunctionError::EmptyWeighting);
                }
                let mut w = vec![0.0; n];
                for &s in set {
                    w[s] = 1.0;
                }
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|v| *v /= total);
                w
            }
        })
    }
}

/// `L_p` norm against a weighting, `p` in `[1, inf]`.
pub fn lp_norm<T: Scalar>(f: &GroupFunction<T>, p: f64, weighting: &Weighting) -> Result<f64, FunctionError> {
    if !(p >= 1.0) {
        return Err(FunctionError::InvalidExponent(p));
    }
    let w = weighting.weights(f.group.order())?;
    if p.is_infinite() {
        return Ok(f
            .values
            .iter()
            .zip(&w)
            .filter(|(_, &wi)| wi > 0.0)
            .map(|(v, _)| v.modulus())
            .fold(0.0, f64::max));
    }
    let sum: f64 = f.values.iter().zip(&w).map(|(v, wi)| wi * v.modulus().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// `sum_x w(x) f(x) conj(g(x))`.
pub fn inner(f: &ComplexFn, g: &ComplexFn, weighting: &Weighting) -> Result<Complex64, FunctionError> {
    f.check_same(g)?;
    let w = weighting.weights(f.group.order())?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(&w)
        .map(|((a, b), wi)| a * b.conj() * *wi)
        .sum())
}

/// Rounds an almost integer-valued function to the nearest integers.
///
/// Accepts when every value is an exact integer or lies strictly within
/// `epsilon` of one; `epsilon` must be below 1/2 so the rounding is unique.
pub fn round_almost_integer<T: Scalar>(f: &GroupFunction<T>, epsilon: f64) -> Result<IntFn, FunctionError> {
    if !(epsilon < 0.5) || epsilon.is_nan() {
        return Err(FunctionError::AmbiguousEpsilon(epsilon));
    }
    let mut worst: Option<(Element, f64)> = None;
    let mut out = Vec::with_capacity(f.values.len());
    for (x, v) in f.values.iter().enumerate() {
        let (k, dist) = v.nearest_integer();
        let ok = dist == 0.0 || dist < epsilon;
        if !ok && worst.is_none_or(|(_, d)| dist > d) {
            worst = Some((x, dist));
        }
        out.push(k);
    }
    match worst {
        Some((element, distance)) => Err(FunctionError::NotAlmostInteger { element, distance }),
        None => Ok(GroupFunction {
            group: Arc::clone(&f.group),
            values: out,
        }),
    }
}

/// A complex measure on `G`, stored as its density against counting measure.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureOnG {
    group: GroupRef,
    weights: Vec<Complex64>,
    total_variation: f64,
}

impl MeasureOnG {
    pub fn new(group: &GroupRef, weights: Vec<Complex64>) -> Result<Self, FunctionError> {
        if weights.len() != group.order() {
            return Err(FunctionError::WrongLength {
                expected: group.order(),
                got: weights.len(),
            });
        }
        let total_variation = weights.iter().map(|w| w.norm()).sum();
        Ok(MeasureOnG {
            group: Arc::clone(group),
            weights,
            total_variation,
        })
    }

    /// `m_S`: uniform probability on `S`.
    pub fn uniform(group: &GroupRef, set: &[Element]) -> Result<Self, FunctionError> {
        if set.is_empty() {
            return Err(FunctionError::EmptyWeighting);
        }
        let mut w = vec![Complex64::zero(); group.order()];
        for &s in set {
            w[s] = Complex64::one();
        }
        let count = w.iter().filter(|v| !v.is_zero()).count() as f64;
        w.iter_mut().for_each(|v| *v /= count);
        Self::new(group, w)
    }

    /// `delta_S`: counting measure on `S`.
    pub fn counting(group: &GroupRef, set: &[Element]) -> Self {
        let mut w = vec![Complex64::zero(); group.order()];
        for &s in set {
            w[s] = Complex64::one();
        }
        Self::new(group, w).expect("length matches")
    }

    pub fn point_mass(group: &GroupRef, x: Element) -> Self {
        Self::counting(group, &[x])
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Total variation `||nu||`.
    pub fn norm(&self) -> f64 {
        self.total_variation
    }

    pub fn density(&self) -> ComplexFn {
        GroupFunction {
            group: Arc::clone(&self.group),
            values: self.weights.clone(),
        }
    }

    /// `x -> conj(nu(x^-1))`.
    pub fn tilde(&self) -> Self {
        let g = &self.group;
        let w = g.elements().map(|x| self.weights[g.inv(x)].conj()).collect();
        Self::new(g, w).expect("length matches")
    }

    /// Measure convolution `mu * nu`.
    pub fn convolve(&self, other: &MeasureOnG) -> Result<MeasureOnG, FunctionError> {
        let d = convolve_count(&self.density(), &other.density())?;
        MeasureOnG::new(&self.group, d.into_values())
    }
}

/// `f * mu = int rho_{y^-1}(f) dmu(y)`, i.e. `x -> sum_y f(x y^-1) mu(y)`.
pub fn convolve_measure(f: &ComplexFn, mu: &MeasureOnG) -> Result<ComplexFn, FunctionError> {
    if !same_group(&f.group, &mu.group) {
        return Err(FunctionError::GroupMismatch);
    }
    convolve_count(f, &mu.density())
}

/// `<f, mu> = int f conj(dmu)`.
pub fn pair_fn_measure(f: &ComplexFn, mu: &MeasureOnG) -> Result<Complex64, FunctionError> {
    inner(f, &mu.density(), &Weighting::Count)
}

/// `<mu, f> = int conj(f) dmu`.
pub fn pair_measure_fn(mu: &MeasureOnG, f: &ComplexFn) -> Result<Complex64, FunctionError> {
    inner(&mu.density(), f, &Weighting::Count)
}
