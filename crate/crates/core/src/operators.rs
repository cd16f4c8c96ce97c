//! Differential operators in one direction `∂_j` with series coefficients,
//! and the common multiple of two Euler operators.
//!
//! `L_P = P²∂_j + ∂_jP` sends `Ê(P)` to `∂_jP·P`. For two germs `P`, `Q`, the operator
//! `L = A∂² + B∂ + C` is a left multiple of both `L_P` and `L_Q`, so
//! `Ê(P) + Ê(Q)` solves `L(y) = M_P(P∂_jP) + M_Q(Q∂_jQ)`.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{OperatorError, SeriesError};
use crate::gauss::GaussRational;
use crate::mseries::{euler_compose, Exponent, Germ, MultiSeries};

/// `Σ_m terms[m] · ∂_axis^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewOperator {
    dim: usize,
    axis: usize,
    terms: BTreeMap<u32, MultiSeries>,
}

impl SkewOperator {
    pub fn new(dim: usize, axis: usize, terms: BTreeMap<u32, MultiSeries>) -> Result<Self, OperatorError> {
        if axis >= dim {
            return Err(SeriesError::AxisOutOfRange { axis, dim }.into());
        }
        if let Some(c) = terms.values().find(|c| c.dim() != dim) {
            return Err(SeriesError::DimensionMismatch(dim, c.dim()).into());
        }
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Self { dim, axis, terms })
    }

    pub fn derivative(dim: usize, axis: usize, cap: u32) -> Result<Self, OperatorError> {
        Self::new(dim, axis, BTreeMap::from([(1, MultiSeries::one(dim, cap))]))
    }

    pub fn multiplication(f: &MultiSeries, axis: usize) -> Result<Self, OperatorError> {
        Self::new(f.dim(), axis, BTreeMap::from([(0, f.clone())]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn order(&self) -> u32 {
        self.terms.keys().next_back().copied().unwrap_or(0)
    }

    pub fn coefficient(&self, m: u32) -> Option<&MultiSeries> {
        self.terms.get(&m)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &MultiSeries)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn apply(&self, y: &MultiSeries) -> Result<MultiSeries, OperatorError> {
        if y.dim() != self.dim {
            return Err(SeriesError::DimensionMismatch(self.dim, y.dim()).into());
        }
        let cap = y.cap().saturating_sub(self.order());
        let mut acc = MultiSeries::zero(self.dim, cap);
        for (&m, c) in &self.terms {
            acc = acc.add(&c.mul(&y.derive_n(self.axis, m)?)?)?;
        }
        Ok(acc)
    }

    /// `self ∘ other`, moving derivatives right with
    /// `∂^m f = Σ_i C(m,i) (∂^i f) ∂^{m−i}`.
    pub fn compose(&self, other: &SkewOperator) -> Result<SkewOperator, OperatorError> {
        if self.dim != other.dim || self.axis != other.axis {
            return Err(SeriesError::DimensionMismatch(self.dim, other.dim).into());
        }
        let mut out: BTreeMap<u32, MultiSeries> = BTreeMap::new();
        for (&m, a) in &self.terms {
            for (&n, b) in &other.terms {
                let mut binom = 1i64;
                for i in 0..=m {
                    let term = a
                        .mul(&b.derive_n(self.axis, i)?)?
                        .scale(&GaussRational::from_int(binom));
                    let slot = out
                        .entry(m - i + n)
                        .or_insert_with(|| MultiSeries::zero(self.dim, term.cap()));
                    *slot = slot.add(&term)?;
                    binom = binom * (m - i) as i64 / (i + 1) as i64;
                }
            }
        }
        Self::new(self.dim, self.axis, out)
    }
}

/// `L_P = P²∂_j + ∂_jP`.
pub fn l_p(p: &Germ, axis: usize) -> Result<SkewOperator, OperatorError> {
    let s = p.series();
    let dp = s.derive(axis)?.with_cap(s.cap());
    SkewOperator::new(s.dim(), axis, BTreeMap::from([(0, dp), (1, s.mul(s)?)]))
}

/// `L_P(y) − ∂_jP·P`.
pub fn euler_system_residual(p: &Germ, axis: usize, y: &MultiSeries) -> Result<MultiSeries, OperatorError> {
    let lhs = l_p(p, axis)?.apply(y)?;
    let rhs = p.series().derive(axis)?.mul(p.series())?;
    Ok(lhs.sub(&rhs)?)
}

/// Whether `Ê(P)` satisfies `P²∂_j y + ∂_jP·y = ∂_jP·P` on every stored
/// term below `cap`.
pub fn euler_system_check(p: &Germ, axis: usize, cap: u32) -> Result<bool, OperatorError> {
    if !p.is_exact() {
        return Err(OperatorError::NotExact);
    }
    let deg = p.series().max_degree().unwrap_or(0);
    let needed = deg * deg + 2;
    if cap < needed {
        return Err(OperatorError::CapTooSmall { cap, needed });
    }
    let p = p.with_cap(cap)?;
    let e = euler_compose(&p)?;
    Ok(euler_system_residual(&p, axis, &e)?.is_zero())
}

/// Exact polynomial division, asserting a zero remainder. Uses the
/// lexicographic leading term, a monomial order, so it terminates.
pub fn exact_divide(num: &MultiSeries, den: &MultiSeries) -> Result<MultiSeries, OperatorError> {
    if num.dim() != den.dim() {
        return Err(SeriesError::DimensionMismatch(num.dim(), den.dim()).into());
    }
    let (lead_e, lead_c) = den
        .terms()
        .next_back()
        .map(|(e, c)| (e.clone(), c.inv().expect("stored coefficients are nonzero")))
        .ok_or_else(|| OperatorError::Divisibility("division by zero".into()))?;
    let mut rem: BTreeMap<Exponent, GaussRational> = num.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
    let mut quot: Vec<(Exponent, GaussRational)> = Vec::new();
    while let Some((e, c)) = rem.pop_last() {
        let shift = e
            .checked_sub(&lead_e)
            .ok_or_else(|| OperatorError::Divisibility(format!("leading term {e} not divisible by {lead_e}")))?;
        let f = &c * &lead_c;
        for (d, dc) in den.terms().rev().skip(1) {
            let t = shift.add(d);
            let slot = rem.entry(t.clone()).or_insert_with(GaussRational::zero);
            *slot -= &(&f * dc);
            if slot.is_zero() {
                rem.remove(&t);
            }
        }
        quot.push((shift, f));
    }
    Ok(MultiSeries::from_terms(num.dim(), num.cap(), quot)?)
}

/// The common multiple `L = A∂² + B∂ + C` of `L_P` and `L_Q` with its
/// right-hand side and the left factors `M_P`, `M_Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoEuler {
    pub axis: usize,
    pub a: MultiSeries,
    pub b: MultiSeries,
    pub c: MultiSeries,
    pub l: SkewOperator,
    pub m_p: SkewOperator,
    pub m_q: SkewOperator,
    pub rhs: MultiSeries,
    /// Truncation order of the exact polynomial computation.
    pub work_cap: u32,
}

struct Side {
    a_over: MultiSeries,
    d_over: MultiSeries,
    c: MultiSeries,
}

/// `A/P²`, `(B − (A/P²)(2P+1)∂P)/P²` and `C` from `R_P = 0`.
fn side(p: &MultiSeries, a: &MultiSeries, b: &MultiSeries, axis: usize) -> Result<Side, OperatorError> {
    let cap = p.cap();
    let p2 = p.mul(p)?;
    let dp = p.derive(axis)?.with_cap(cap);
    let ddp = dp.derive(axis)?.with_cap(cap);
    let a_over = exact_divide(a, &p2)?;
    let two_p1 = p
        .scale(&GaussRational::from_int(2))
        .add(&MultiSeries::one(p.dim(), cap))?;
    let d = b.sub(&a_over.mul(&two_p1)?.mul(&dp)?)?;
    let d_over = exact_divide(&d, &p2)?;
    let c = a_over.mul(&ddp)?.add(&dp.mul(&d_over)?)?;
    Ok(Side { a_over, d_over, c })
}

pub fn build_l(p: &Germ, q: &Germ, axis: usize) -> Result<TwoEuler, OperatorError> {
    if !p.is_exact() || !q.is_exact() {
        return Err(OperatorError::NotExact);
    }
    if p.dim() != q.dim() {
        return Err(SeriesError::DimensionMismatch(p.dim(), q.dim()).into());
    }
    if axis >= p.dim() {
        return Err(SeriesError::AxisOutOfRange { axis, dim: p.dim() }.into());
    }
    let deg = |g: &Germ| g.series().max_degree().unwrap_or(0);
    let work_cap = 8 * (deg(p) + deg(q)) + 4;
    let ps = p.with_cap(work_cap)?.series().clone();
    let qs = q.with_cap(work_cap)?.series().clone();
    let one = MultiSeries::one(ps.dim(), work_cap);
    let two = GaussRational::from_int(2);

    let (p2, q2) = (ps.mul(&ps)?, qs.mul(&qs)?);
    let (dp, dq) = (ps.derive(axis)?.with_cap(work_cap), qs.derive(axis)?.with_cap(work_cap));
    let (ddp, ddq) = (dp.derive(axis)?.with_cap(work_cap), dq.derive(axis)?.with_cap(work_cap));

    let a = p2.mul(&q2)?.mul(&q2.mul(&dp)?.sub(&p2.mul(&dq)?)?)?;
    if a.is_zero() {
        return Err(OperatorError::Degenerate);
    }
    let bracket = |g: &MultiSeries, g2: &MultiSeries, dg: &MultiSeries, ddg: &MultiSeries| {
        let two_g1 = g.scale(&two).add(&one)?;
        two_g1.mul(&dg.mul(dg)?)?.sub(&g2.mul(ddg)?)
    };
    let b = q2
        .mul(&q2)?
        .mul(&bracket(&ps, &p2, &dp, &ddp)?)?
        .sub(&p2.mul(&p2)?.mul(&bracket(&qs, &q2, &dq, &ddq)?)?)?;

    let sp = side(&ps, &a, &b, axis)?;
    let sq = side(&qs, &a, &b, axis)?;
    if sp.c != sq.c {
        return Err(OperatorError::InconsistentC);
    }
    if [&a, &b, &sp.c]
        .iter()
        .any(|s| s.max_degree().is_some_and(|d| d >= work_cap))
    {
        return Err(OperatorError::CapTooSmall {
            cap: work_cap,
            needed: work_cap + 1,
        });
    }

    let dim = ps.dim();
    let factor = |s: &Side| {
        SkewOperator::new(
            dim,
            axis,
            BTreeMap::from([(0, s.d_over.clone()), (1, s.a_over.clone())]),
        )
    };
    let m_p = factor(&sp)?;
    let m_q = factor(&sq)?;
    let l = SkewOperator::new(
        dim,
        axis,
        BTreeMap::from([(0, sp.c.clone()), (1, b.clone()), (2, a.clone())]),
    )?;
    let pdp = ps.mul(&dp)?.with_cap(work_cap);
    let qdq = qs.mul(&dq)?.with_cap(work_cap);
    let rhs = m_p.apply(&pdp)?.add(&m_q.apply(&qdq)?)?;
    Ok(TwoEuler {
        axis,
        a,
        b,
        c: sp.c,
        l,
        m_p,
        m_q,
        rhs,
        work_cap,
    })
}

/// `L(y) − rhs` below `cap − 2` for `y = Ê(P) + Ê(Q)` truncated at `cap`.
pub fn two_euler_residual(p: &Germ, q: &Germ, built: &TwoEuler, cap: u32) -> Result<MultiSeries, OperatorError> {
    let y = euler_compose(&p.with_cap(cap)?)?.add(&euler_compose(&q.with_cap(cap)?)?)?;
    let lhs = built.l.apply(&y)?;
    Ok(lhs.sub(&built.rhs.truncate(lhs.cap()))?)
}

pub fn verify_two_euler(p: &Germ, q: &Germ, axis: usize, cap: u32) -> Result<bool, OperatorError> {
    let built = build_l(p, q, axis)?;
    if cap < 3 {
        return Err(OperatorError::CapTooSmall { cap, needed: 3 });
    }
    Ok(two_euler_residual(p, q, &built, cap)?.is_zero())
}

/// Smallest `N` with `∂_j^N rhs = 0`, and whether `∂_j^N L(y) = 0` holds
/// for `y = Ê(P) + Ê(Q)` on the terms the truncation certifies.
pub fn homogeneous_check(p: &Germ, q: &Germ, built: &TwoEuler, cap: u32) -> Result<(u32, bool), OperatorError> {
    let axis = built.axis;
    let n = built.rhs.terms().map(|(e, _)| e.0[axis] + 1).max().unwrap_or(0);
    if cap < n + 3 {
        return Err(OperatorError::CapTooSmall { cap, needed: n + 3 });
    }
    let y = euler_compose(&p.with_cap(cap)?)?.add(&euler_compose(&q.with_cap(cap)?)?)?;
    let ly = built.l.apply(&y)?;
    Ok((n, ly.derive_n(axis, n)?.is_zero()))
}
