//! Sparse truncated power series in `d` variables over `Q(i)`.
//!
//! A [`MultiSeries`] stores the coefficients of every exponent `β` with
//! total degree `|β| <= cap`. Everything above the cap is unknown, so
//! binary operations return `cap = min(a.cap, b.cap)` and the empty term
//! map means "zero up to the cap".

use std::collections::BTreeMap;
use std::fmt;
use std::ops;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::SeriesError;
use crate::gauss::GaussRational;

/// A multi-index `β ∈ N^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn zero(dim: usize) -> Self {
        Exponent(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = 1;
        Exponent(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Exponent) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise strict `self < other` (every entry).
    pub fn lt(&self, other: &Exponent) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a < b)
    }

    /// `self ≰ other`: some entry of `self` exceeds the matching entry of `other`.
    pub fn not_le(&self, other: &Exponent) -> bool {
        !self.le(other)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Exponent)
    }

    pub fn scale(&self, n: u32) -> Exponent {
        Exponent(self.0.iter().map(|a| a * n).collect())
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

/// A truncated formal power series with total-degree cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    dim: usize,
    cap: u32,
    terms: BTreeMap<Exponent, GaussRational>,
}

impl MultiSeries {
    pub fn zero(dim: usize, cap: u32) -> Self {
        Self {
            dim,
            cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, cap: u32, c: GaussRational) -> Self {
        Self::monomial(Exponent::zero(dim), c, cap)
    }

    pub fn one(dim: usize, cap: u32) -> Self {
        Self::constant(dim, cap, GaussRational::one())
    }

    /// The coordinate function `x_axis` (0-based axis).
    pub fn var(dim: usize, cap: u32, axis: usize) -> Result<Self, SeriesError> {
        if axis >= dim {
            return Err(SeriesError::AxisOutOfRange { axis, dim });
        }
        Ok(Self::monomial(Exponent::unit(dim, axis), GaussRational::one(), cap))
    }

    pub fn monomial(exp: Exponent, coef: GaussRational, cap: u32) -> Self {
        let mut s = Self::zero(exp.dim(), cap);
        s.insert(exp, coef);
        s
    }

    /// Builds a series from terms, summing repeated exponents and dropping
    /// everything above the cap.
    pub fn from_terms<I>(dim: usize, cap: u32, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Exponent, GaussRational)>,
    {
        let mut s = Self::zero(dim, cap);
        for (e, c) in terms {
            if e.dim() != dim {
                return Err(SeriesError::ExponentLength {
                    got: e.dim(),
                    expected: dim,
                });
            }
            s.accumulate(e, &c);
        }
        s.purge();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &GaussRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent) -> GaussRational {
        self.terms.get(e).cloned().unwrap_or_else(GaussRational::zero)
    }

    pub fn constant_term(&self) -> GaussRational {
        self.coeff(&Exponent::zero(self.dim))
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponent::degree).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponent::degree).max()
    }

    /// Re-caps the series. Lowering truncates; raising is only meaningful
    /// when the stored terms are the complete function (exact polynomials).
    pub fn with_cap(&self, cap: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.degree() <= cap)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self {
            dim: self.dim,
            cap,
            terms,
        }
    }

    pub fn truncate(&self, cap: u32) -> Self {
        self.with_cap(cap.min(self.cap))
    }

    fn insert(&mut self, e: Exponent, c: GaussRational) {
        if e.degree() <= self.cap && !c.is_zero() {
            self.terms.insert(e, c);
        }
    }

    fn accumulate(&mut self, e: Exponent, c: &GaussRational) {
        if e.degree() > self.cap || c.is_zero() {
            return;
        }
        *self.terms.entry(e).or_insert_with(GaussRational::zero) += c;
    }

    fn purge(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    fn check_dim(&self, other: &Self) -> Result<(), SeriesError> {
        if self.dim != other.dim {
            return Err(SeriesError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_dim(other)?;
        let mut out = self.with_cap(self.cap.min(other.cap));
        for (e, c) in &other.terms {
            out.accumulate(e.clone(), c);
        }
        out.purge();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            cap: self.cap,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &GaussRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.dim, self.cap);
        }
        Self {
            dim: self.dim,
            cap: self.cap,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    /// Cauchy product truncated to the smaller cap.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_dim(other)?;
        let cap = self.cap.min(other.cap);
        let mut out = Self::zero(self.dim, cap);
        for (ea, ca) in &self.terms {
            let da = ea.degree();
            if da > cap {
                continue;
            }
            for (eb, cb) in &other.terms {
                if da + eb.degree() > cap {
                    continue;
                }
                out.accumulate(ea.add(eb), &(ca * cb));
            }
        }
        out.purge();
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.dim, self.cap);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base).expect("same dim");
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base).expect("same dim");
            }
        }
        acc
    }

    /// Formal partial derivative along `axis` (0-based). The cap drops by one.
    pub fn derive(&self, axis: usize) -> Result<Self, SeriesError> {
        if axis >= self.dim {
            return Err(SeriesError::AxisOutOfRange { axis, dim: self.dim });
        }
        let mut out = Self::zero(self.dim, self.cap.saturating_sub(1));
        for (e, c) in &self.terms {
            let b = e.0[axis];
            if b == 0 {
                continue;
            }
            let mut d = e.clone();
            d.0[axis] -= 1;
            out.insert(d, c * &GaussRational::from_int(b as i64));
        }
        Ok(out)
    }

    pub fn derive_n(&self, axis: usize, n: u32) -> Result<Self, SeriesError> {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.derive(axis)?;
        }
        Ok(out)
    }

    /// `x^γ · f`. Certification rises with the shift: the cap grows by `|γ|`.
    pub fn mul_monomial(&self, gamma: &Exponent) -> Self {
        Self {
            dim: self.dim,
            cap: self.cap + gamma.degree(),
            terms: self.terms.iter().map(|(e, c)| (e.add(gamma), c.clone())).collect(),
        }
    }

    /// `f / x^γ` for `f` divisible by `x^γ`; the cap drops by `|γ|`.
    pub fn divide_by_monomial(&self, gamma: &Exponent) -> Result<Self, SeriesError> {
        if gamma.dim() != self.dim {
            return Err(SeriesError::ExponentLength {
                got: gamma.dim(),
                expected: self.dim,
            });
        }
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let d = e
                .checked_sub(gamma)
                .ok_or_else(|| SeriesError::NotDivisible(e.clone()))?;
            terms.insert(d, c.clone());
        }
        Ok(Self {
            dim: self.dim,
            cap: self.cap.saturating_sub(gamma.degree()),
            terms,
        })
    }

    /// Inverse of a unit modulo degree `> cap`.
    pub fn invert_unit(&self) -> Result<Self, SeriesError> {
        let u0 = self.constant_term();
        let inv0 = u0.inv().ok_or(SeriesError::NotAUnit)?;
        // u = u0 (1 - h)  =>  u^{-1} = u0^{-1} Σ h^n, and h has order >= 1.
        let one = Self::one(self.dim, self.cap);
        let h = one.sub(&self.scale(&inv0)).expect("same dim");
        let mut acc = one.clone();
        let mut power = one;
        for _ in 0..self.cap {
            power = power.mul(&h).expect("same dim");
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power).expect("same dim");
        }
        Ok(acc.scale(&inv0))
    }

    /// Formal composition `f(rules[0], …, rules[d-1])`. Each replacement must
    /// vanish at the origin so that terms above the cap stay above it.
    pub fn substitute(&self, rules: &[MultiSeries]) -> Result<Self, SeriesError> {
        if rules.len() != self.dim {
            return Err(SeriesError::DimensionMismatch(self.dim, rules.len()));
        }
        let out_dim = rules.first().map_or(self.dim, |r| r.dim);
        let mut cap = self.cap;
        for (j, r) in rules.iter().enumerate() {
            if r.dim != out_dim {
                return Err(SeriesError::DimensionMismatch(out_dim, r.dim));
            }
            if !r.constant_term().is_zero() {
                return Err(SeriesError::UncertifiedSubstitution(j));
            }
            cap = cap.min(r.cap);
        }
        let mut powers: Vec<Vec<MultiSeries>> = rules
            .iter()
            .map(|r| vec![Self::one(out_dim, cap), r.with_cap(cap)])
            .collect();
        let mut out = Self::zero(out_dim, cap);
        for (e, c) in &self.terms {
            let mut term = Self::constant(out_dim, cap, c.clone());
            for (j, &b) in e.0.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                while powers[j].len() <= b as usize {
                    let next = powers[j].last().unwrap().mul(&powers[j][1]).expect("same dim");
                    powers[j].push(next);
                }
                term = term.mul(&powers[j][b as usize]).expect("same dim");
                if term.is_zero() {
                    break;
                }
            }
            for (te, tc) in term.terms {
                out.accumulate(te, &tc);
            }
        }
        out.purge();
        Ok(out)
    }

    /// Truncation of the series to a univariate coefficient list along the
    /// ray of `alpha`: entry `n` is the coefficient of `x^{n·alpha}`.
    pub fn ray_coefficients(&self, alpha: &Exponent) -> Vec<GaussRational> {
        let d = alpha.degree();
        if d == 0 {
            return vec![self.constant_term()];
        }
        (0..=self.cap / d).map(|n| self.coeff(&alpha.scale(n))).collect()
    }
}

impl fmt::Display for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O({})", self.cap + 1);
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (j, b) in e.0.iter().enumerate() {
                match b {
                    0 => {}
                    1 => write!(f, "*x{}", j + 1)?,
                    _ => write!(f, "*x{}^{}", j + 1, b)?,
                }
            }
        }
        write!(f, " + O({})", self.cap + 1)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl ops::$tr<&MultiSeries> for &MultiSeries {
            type Output = MultiSeries;
            fn $method(self, rhs: &MultiSeries) -> MultiSeries {
                MultiSeries::$method(self, rhs).expect("dimension mismatch")
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl ops::Neg for &MultiSeries {
    type Output = MultiSeries;
    fn neg(self) -> MultiSeries {
        MultiSeries::neg(self)
    }
}

/// A germ `P` with `P(0) = 0`, nonzero up to its cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Germ {
    series: MultiSeries,
    exact_polynomial: bool,
}

impl Germ {
    pub fn new(series: MultiSeries, exact_polynomial: bool) -> Result<Self, SeriesError> {
        if !series.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        if series.is_zero() {
            return Err(SeriesError::ZeroGerm(series.cap()));
        }
        Ok(Self {
            series,
            exact_polynomial,
        })
    }

    /// A germ whose stored terms are the complete polynomial.
    pub fn polynomial(series: MultiSeries) -> Result<Self, SeriesError> {
        Self::new(series, true)
    }

    pub fn monomial(alpha: &Exponent, cap: u32) -> Result<Self, SeriesError> {
        Self::polynomial(MultiSeries::monomial(alpha.clone(), GaussRational::one(), cap))
    }

    pub fn series(&self) -> &MultiSeries {
        &self.series
    }

    pub fn is_exact(&self) -> bool {
        self.exact_polynomial
    }

    pub fn dim(&self) -> usize {
        self.series.dim()
    }

    pub fn cap(&self) -> u32 {
        self.series.cap()
    }

    /// Changes the cap. Exact polynomials can be re-capped upward freely;
    /// truncated germs only downward.
    pub fn with_cap(&self, cap: u32) -> Result<Self, SeriesError> {
        let cap = if self.exact_polynomial {
            cap
        } else {
            cap.min(self.cap())
        };
        Self::new(self.series.with_cap(cap), self.exact_polynomial)
    }
}

/// Truncation of `Ê(P) = Σ_{n>=0} (-1)^n n! P^{n+1}` to the germ's cap.
pub fn euler_compose(p: &Germ) -> Result<MultiSeries, SeriesError> {
    let ps = p.series();
    if ps.is_zero() {
        return Err(SeriesError::ZeroGerm(ps.cap()));
    }
    if !ps.constant_term().is_zero() {
        return Err(SeriesError::NonzeroConstant);
    }
    let mut out = MultiSeries::zero(ps.dim(), ps.cap());
    let mut power = ps.clone();
    let mut factorial = BigInt::one();
    let mut n: u32 = 0;
    while !power.is_zero() {
        let sign = if n.is_multiple_of(2) {
            factorial.clone()
        } else {
            -factorial.clone()
        };
        out = out.add(&power.scale(&GaussRational::from_bigint(sign)))?;
        n += 1;
        factorial *= n;
        power = power.mul(ps)?;
    }
    Ok(out)
}
