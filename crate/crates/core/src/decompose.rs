//! Decompositions `f = Σ f_n · base^n` at truncated order.
//!
//! Two bases are supported: a monomial `x^α` (a pure partition of the
//! support, see [`t_alpha`]) and a germ `P` with an injective-enough linear
//! form `ℓ`, where the components come from iterated generalized Weierstrass
//! division (see [`t_p_ell`]).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::DecomposeError;
use crate::gauss::GaussRational;
use crate::mseries::{Exponent, Germ, MultiSeries};

/// A positive linear form `ℓ(β) = Σ ℓ_j β_j` ordering monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm {
    weights: Vec<BigRational>,
}

impl LinearForm {
    pub fn new(weights: Vec<BigRational>) -> Result<Self, DecomposeError> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_positive()) {
            return Err(DecomposeError::NonPositiveWeight);
        }
        Ok(Self { weights })
    }

    /// Weights `1 + M^{-(j+1)}` with `M = cap + 2`: injective on every
    /// exponent of total degree `<= cap` and compatible with total degree.
    pub fn graded(dim: usize, cap: u32) -> Self {
        let m = BigInt::from(cap as u64 + 2);
        let mut denom = BigInt::one();
        let weights = (0..dim)
            .map(|_| {
                denom *= &m;
                BigRational::one() + BigRational::new(BigInt::one(), denom.clone())
            })
            .collect();
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn value(&self, e: &Exponent) -> BigRational {
        self.weights
            .iter()
            .zip(&e.0)
            .filter(|(_, &b)| b > 0)
            .map(|(w, &b)| w * BigRational::from_integer(b.into()))
            .fold(BigRational::zero(), |acc, v| acc + v)
    }

    fn min_weight(&self) -> &BigRational {
        self.weights.iter().min().expect("nonempty")
    }

    fn max_weight(&self) -> &BigRational {
        self.weights.iter().max().expect("nonempty")
    }

    /// Checks injectivity on `{β : |β| <= cap}`, reporting the first tie.
    pub fn is_injective_on(&self, cap: u32) -> Result<(), DecomposeError> {
        let mut seen: BTreeMap<BigRational, Exponent> = BTreeMap::new();
        for e in exponents_up_to(self.dim(), cap) {
            let v = self.value(&e);
            if let Some(prev) = seen.insert(v, e.clone()) {
                return Err(DecomposeError::LinearFormTie(prev, e));
            }
        }
        Ok(())
    }

    /// Parses `1,3/2`.
    pub fn parse(s: &str) -> Result<Self, crate::error::ParseError> {
        let weights = s
            .split(',')
            .map(crate::gauss::parse_rational)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(weights).map_err(|e| crate::error::ParseError::Document(e.to_string()))
    }
}

/// All exponents in `N^dim` with total degree `<= cap`.
pub fn exponents_up_to(dim: usize, cap: u32) -> Vec<Exponent> {
    fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Exponent>) {
        if cur.len() == dim {
            out.push(Exponent(cur.clone()));
            return;
        }
        for b in 0..=left {
            cur.push(b);
            rec(dim, left - b, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, cap, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// `ν_ℓ(P)`: the stored exponent of `P` with the smallest `ℓ`-value, which
/// must be unique.
pub fn nu_ell(p: &Germ, ell: &LinearForm) -> Result<Exponent, DecomposeError> {
    nu_of_series(p.series(), ell)
}

fn nu_of_series(s: &MultiSeries, ell: &LinearForm) -> Result<Exponent, DecomposeError> {
    if ell.dim() != s.dim() {
        return Err(crate::error::SeriesError::DimensionMismatch(s.dim(), ell.dim()).into());
    }
    let mut best: Option<(BigRational, Exponent)> = None;
    let mut tie: Option<Exponent> = None;
    for (e, _) in s.terms() {
        let v = ell.value(e);
        match &best {
            Some((bv, _)) if v > *bv => {}
            Some((bv, _)) if v == *bv => tie = Some(e.clone()),
            _ => {
                best = Some((v, e.clone()));
                tie = None;
            }
        }
    }
    let (_, nu) = best.ok_or(crate::error::SeriesError::ZeroGerm(s.cap()))?;
    if let Some(t) = tie {
        return Err(DecomposeError::LinearFormTie(nu, t));
    }
    Ok(nu)
}

/// Tie-break among reducible terms sharing an `ℓ`-value. The result of the
/// division does not depend on it; it exists to test exactly that.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    Lex,
    ReverseLex,
}

/// Result of `g = q·P + r`.
#[derive(Clone, Debug)]
pub struct Division {
    pub quotient: MultiSeries,
    pub remainder: MultiSeries,
    pub nu: Exponent,
    /// Degree up to which `quotient` is exact; `None` when nothing is.
    pub quotient_cap: Option<u32>,
    /// Degree up to which `remainder` is exact.
    pub remainder_cap: u32,
}

pub fn weierstrass_divide(g: &MultiSeries, p: &Germ, ell: &LinearForm) -> Result<Division, DecomposeError> {
    weierstrass_divide_with(g, p, ell, TieBreak::Lex)
}

/// Generalized Weierstrass division at truncated order.
///
/// Repeatedly removes the `ℓ`-least term of the running remainder whose
/// exponent lies in `ν_ℓ(P) + N^d`. Each removal only creates terms of
/// strictly larger `ℓ`-value, so the loop ends inside the truncation box.
pub fn weierstrass_divide_with(
    g: &MultiSeries,
    p: &Germ,
    ell: &LinearForm,
    tie: TieBreak,
) -> Result<Division, DecomposeError> {
    if g.dim() != p.dim() {
        return Err(crate::error::SeriesError::DimensionMismatch(g.dim(), p.dim()).into());
    }
    let cap = g.cap().min(p.cap());
    let ps = p.series().truncate(cap);
    let nu = nu_of_series(p.series(), ell)?;
    let lead_inv = p.series().coeff(&nu).inv().expect("ν is a stored exponent");
    let others: Vec<(Exponent, GaussRational)> = ps
        .terms()
        .filter(|(e, _)| **e != nu)
        .map(|(e, c)| (e.clone(), c.clone()))
        .collect();

    let key = |e: &Exponent| -> (BigRational, Vec<i64>) {
        let t = e.0.iter().map(|&b| b as i64);
        let t = match tie {
            TieBreak::Lex => t.collect(),
            TieBreak::ReverseLex => t.map(|b| -b).collect(),
        };
        (ell.value(e), t)
    };

    let mut work: BTreeMap<Exponent, GaussRational> =
        g.truncate(cap).terms().map(|(e, c)| (e.clone(), c.clone())).collect();
    let mut queue: BTreeSet<((BigRational, Vec<i64>), Exponent)> =
        work.keys().filter(|e| nu.le(e)).map(|e| (key(e), e.clone())).collect();
    let mut quotient: BTreeMap<Exponent, GaussRational> = BTreeMap::new();

    while let Some((_, beta)) = queue.pop_first() {
        let Some(c) = work.remove(&beta) else { continue };
        let factor = &c * &lead_inv;
        let shift = beta.checked_sub(&nu).expect("queued exponents are reducible");
        for (gamma, pc) in &others {
            let e = shift.add(gamma);
            if e.degree() > cap {
                continue;
            }
            let entry = work.entry(e.clone()).or_insert_with(GaussRational::zero);
            *entry -= &(&factor * pc);
            if entry.is_zero() {
                work.remove(&e);
            } else if nu.le(&e) {
                queue.insert((key(&e), e));
            }
        }
        *quotient.entry(shift).or_insert_with(GaussRational::zero) += &factor;
    }

    let (remainder_cap, quotient_cap) = certified_orders(&ps, &nu, ell, cap);
    let quotient = MultiSeries::from_terms(g.dim(), quotient_cap.unwrap_or(0), quotient)?;
    let quotient = if quotient_cap.is_none() {
        MultiSeries::zero(g.dim(), 0)
    } else {
        quotient
    };
    let remainder = MultiSeries::from_terms(g.dim(), remainder_cap, work)?;
    Ok(Division {
        quotient,
        remainder,
        nu,
        quotient_cap,
        remainder_cap,
    })
}

/// Orders up to which the truncated division is exact. When `ν` has the
/// minimal total degree in `P`, anything influenced by a dropped term stays
/// above the cap. Otherwise fall back to the `ℓ`-level `ℓ_min·(cap+1)`,
/// which no dropped term can undercut.
fn certified_orders(p: &MultiSeries, nu: &Exponent, ell: &LinearForm, cap: u32) -> (u32, Option<u32>) {
    let nu_deg = nu.degree();
    if p.min_degree() == Some(nu_deg) {
        return (cap, cap.checked_sub(nu_deg));
    }
    let level = ell.min_weight() * BigRational::from_integer((cap as u64 + 1).into());
    let lmax = ell.max_weight();
    let below = |x: BigRational| -> Option<u32> {
        if !x.is_positive() {
            return None;
        }
        // largest D with lmax·D < x
        let d = (x / lmax).ceil().to_integer() - BigInt::one();
        d.to_u32()
    };
    let r = below(level.clone()).unwrap_or(0).min(cap);
    let q = below(level - ell.value(nu)).map(|d| d.min(cap));
    (r, q)
}

/// What the components are taken with respect to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Base {
    Monomial(Exponent),
    Germ { germ: Germ, ell: LinearForm },
}

impl Base {
    fn power(&self, n: u32, cap_hint: u32) -> BasePower {
        match self {
            Base::Monomial(a) => BasePower::Shift(a.scale(n)),
            Base::Germ { germ, .. } => {
                let s = germ
                    .with_cap(germ.cap().max(cap_hint))
                    .expect("valid germ")
                    .series()
                    .pow(n);
                BasePower::Series(s)
            }
        }
    }
}

enum BasePower {
    Shift(Exponent),
    Series(MultiSeries),
}

impl BasePower {
    fn times(&self, f: &MultiSeries) -> MultiSeries {
        match self {
            BasePower::Shift(e) => f.mul_monomial(e),
            BasePower::Series(s) => f.mul(s).expect("same dim"),
        }
    }
}

/// `f = Σ_{n < N} components[n] · base^n + tail · base^N`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub base: Base,
    pub components: Vec<MultiSeries>,
    pub tail: MultiSeries,
    /// Every component and the tail are exact up to this degree, and the
    /// reconstruction reproduces the source up to it.
    pub certified_cap: u32,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `Σ components[n]·base^n + tail·base^N`, truncated at the certified cap.
    pub fn reconstruct(&self) -> MultiSeries {
        let cap = self.certified_cap;
        let dim = self.tail.dim();
        let mut acc = MultiSeries::zero(dim, cap);
        let n = self.components.len() as u32;
        for (i, comp) in self.components.iter().enumerate() {
            let term = self.base.power(i as u32, cap).times(comp);
            acc = acc.add(&term.truncate(cap).with_cap(cap)).expect("same dim");
        }
        let tail = self.base.power(n, cap).times(&self.tail);
        acc.add(&tail.truncate(cap).with_cap(cap))
            .expect("same dim")
            .truncate(cap)
    }

    /// Support check: monomial components avoid `α + N^d`, germ components
    /// avoid `ν_ℓ(P) + N^d`.
    pub fn supports_ok(&self) -> bool {
        let forbidden = match &self.base {
            Base::Monomial(a) => a.clone(),
            Base::Germ { germ, ell } => match nu_ell(germ, ell) {
                Ok(nu) => nu,
                Err(_) => return false,
            },
        };
        self.components
            .iter()
            .all(|c| c.terms().all(|(e, _)| forbidden.not_le(e)))
    }
}

/// Splits `f` along the monomial `x^α`: the term `f_β` goes to component
/// `n = min_{α_j > 0} ⌊β_j / α_j⌋` with residual exponent `β − nα`.
/// Component `n` carries cap `f.cap − n|α|`; terms with `n >= n_max` go to
/// the tail.
pub fn t_alpha(f: &MultiSeries, alpha: &Exponent, n_max: usize) -> Result<Decomposition, DecomposeError> {
    if alpha.dim() != f.dim() {
        return Err(crate::error::SeriesError::ExponentLength {
            got: alpha.dim(),
            expected: f.dim(),
        }
        .into());
    }
    if alpha.is_zero() {
        return Err(DecomposeError::ZeroAlpha);
    }
    let cap = f.cap();
    let step = alpha.degree();
    let count = n_max.min((cap / step) as usize + 1);
    let mut buckets: Vec<Vec<(Exponent, GaussRational)>> = vec![Vec::new(); count];
    let mut tail = Vec::new();
    for (beta, c) in f.terms() {
        let n = alpha
            .0
            .iter()
            .zip(&beta.0)
            .filter(|(&a, _)| a > 0)
            .map(|(&a, &b)| b / a)
            .min()
            .expect("alpha nonzero");
        let residual = |k: u32| beta.checked_sub(&alpha.scale(k)).expect("n fits");
        if (n as usize) < count {
            buckets[n as usize].push((residual(n), c.clone()));
        } else {
            tail.push((residual(count as u32), c.clone()));
        }
    }
    let components = buckets
        .into_iter()
        .enumerate()
        .map(|(n, terms)| MultiSeries::from_terms(f.dim(), cap - n as u32 * step, terms))
        .collect::<Result<Vec<_>, _>>()?;
    let tail = MultiSeries::from_terms(f.dim(), cap.saturating_sub(count as u32 * step), tail)?;
    Ok(Decomposition {
        base: Base::Monomial(alpha.clone()),
        components,
        tail,
        certified_cap: cap,
    })
}

/// Iterated division: `f_0 = R(f)`, `f ← Q(f)`, `n_max` times.
pub fn t_p_ell(f: &MultiSeries, p: &Germ, ell: &LinearForm, n_max: usize) -> Result<Decomposition, DecomposeError> {
    let cap = f.cap().min(p.cap());
    let nu = nu_ell(p, ell)?;
    let mut g = f.truncate(cap);
    let mut components = Vec::with_capacity(n_max);
    let mut certified = cap;
    for n in 0..n_max {
        let div = weierstrass_divide(&g, p, ell)?;
        let Some(qcap) = div.quotient_cap else {
            return Err(DecomposeError::CapExhausted {
                n_max,
                certified: cap as i64 - (n as i64 + 1) * nu.degree() as i64,
            });
        };
        certified = certified.min(div.remainder_cap).min(qcap);
        components.push(div.remainder.truncate(div.remainder_cap));
        g = div.quotient.truncate(qcap);
    }
    Ok(Decomposition {
        base: Base::Germ {
            germ: p.clone(),
            ell: ell.clone(),
        },
        components,
        tail: g,
        certified_cap: certified,
    })
}

/// Regroups a decomposition with respect to `base^M`:
/// `g_n = Σ_{j<M} f_{nM+j} · base^j`.
pub fn power_regroup(dec: &Decomposition, m: usize) -> Result<Decomposition, DecomposeError> {
    if m == 0 || dec.components.len() < m {
        return Err(DecomposeError::InsufficientComponents {
            have: dec.components.len(),
            need: m.max(1),
        });
    }
    let cap = dec.certified_cap;
    let groups = dec.components.len() / m;
    let fold = |parts: &[MultiSeries], extra: Option<(&MultiSeries, u32)>| -> MultiSeries {
        let mut acc: Option<MultiSeries> = None;
        for (j, part) in parts.iter().enumerate() {
            let t = dec.base.power(j as u32, cap).times(part);
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t).expect("same dim"),
            });
        }
        if let Some((tail, k)) = extra {
            let t = dec.base.power(k, cap).times(tail);
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t).expect("same dim"),
            });
        }
        acc.expect("nonempty group")
    };
    let components = (0..groups)
        .map(|n| fold(&dec.components[n * m..(n + 1) * m], None))
        .collect();
    let rest = &dec.components[groups * m..];
    let tail = fold(rest, Some((&dec.tail, rest.len() as u32)));
    let base = match &dec.base {
        Base::Monomial(a) => Base::Monomial(a.scale(m as u32)),
        Base::Germ { germ, ell } => {
            let pm = germ.series().pow(m as u32);
            Base::Germ {
                germ: Germ::new(pm, germ.is_exact())?,
                ell: ell.clone(),
            }
        }
    };
    Ok(Decomposition {
        base,
        components,
        tail,
        certified_cap: cap,
    })
}

/// Exact integer value of a rational, for diagnostics.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(terms: &[(&[u32], i64)], cap: u32) -> MultiSeries {
        MultiSeries::from_terms(
            terms[0].0.len(),
            cap,
            terms
                .iter()
                .map(|(e, c)| (Exponent(e.to_vec()), GaussRational::from_int(*c))),
        )
        .unwrap()
    }

    fn ell(w: &[(i64, i64)]) -> LinearForm {
        LinearForm::new(w.iter().map(|&(p, q)| BigRational::new(p.into(), q.into())).collect()).unwrap()
    }

    #[test]
    fn nu_examples() {
        let p = Germ::polynomial(poly(&[(&[1, 1], 1), (&[3, 0], 1)], 10)).unwrap();
        assert_eq!(nu_ell(&p, &ell(&[(1, 1), (3, 2)])).unwrap(), Exponent(vec![1, 1]));
        let p = Germ::polynomial(poly(&[(&[1, 0], 1)], 10)).unwrap();
        assert_eq!(nu_ell(&p, &ell(&[(7, 3), (1, 5)])).unwrap(), Exponent(vec![1, 0]));
        let p = Germ::polynomial(poly(&[(&[0, 2], 1), (&[3, 0], 1)], 10)).unwrap();
        assert_eq!(nu_ell(&p, &ell(&[(1, 1), (1, 1)])).unwrap(), Exponent(vec![0, 2]));
    }

    #[test]
    fn nu_tie_is_reported() {
        let p = Germ::polynomial(poly(&[(&[0, 2], 1), (&[3, 0], 1)], 10)).unwrap();
        assert!(matches!(
            nu_ell(&p, &ell(&[(1, 1), (3, 2)])),
            Err(DecomposeError::LinearFormTie(..))
        ));
    }

    #[test]
    fn injectivity_diagnostic() {
        assert!(ell(&[(1, 1), (3, 2)]).is_injective_on(2).is_ok());
        assert!(ell(&[(1, 1), (3, 2)]).is_injective_on(3).is_err());
        assert!(LinearForm::graded(3, 12).is_injective_on(12).is_ok());
        assert!(LinearForm::new(vec![BigRational::zero()]).is_err());
    }

    #[test]
    fn division_examples() {
        let p = Germ::polynomial(poly(&[(&[1, 1], 1)], 10)).unwrap();
        let l = ell(&[(1, 1), (3, 2)]);
        let d = weierstrass_divide(&poly(&[(&[2, 2], 1)], 10), &p, &l).unwrap();
        assert_eq!(d.quotient, poly(&[(&[1, 1], 1)], 8));
        assert!(d.remainder.is_zero());

        let d = weierstrass_divide(&poly(&[(&[2, 2], 1), (&[3, 0], 1)], 10), &p, &l).unwrap();
        assert_eq!(d.quotient, poly(&[(&[1, 1], 1)], 8));
        assert_eq!(d.remainder, poly(&[(&[3, 0], 1)], 10));

        let p2 = Germ::polynomial(poly(&[(&[1, 0], 2), (&[0, 3], 1)], 10)).unwrap();
        let d = weierstrass_divide(&MultiSeries::one(2, 10), &p2, &l).unwrap();
        assert!(d.quotient.is_zero());
        assert_eq!(d.remainder, MultiSeries::one(2, 10));
    }

    #[test]
    fn division_reconstructs() {
        let p = Germ::polynomial(poly(&[(&[1, 1], 1), (&[3, 0], 1), (&[0, 4], -2)], 14)).unwrap();
        let g = poly(&[(&[2, 2], 3), (&[5, 1], 1), (&[1, 6], 2), (&[0, 1], 1)], 14);
        let d = weierstrass_divide(&g, &p, &ell(&[(1, 1), (3, 2)])).unwrap();
        let back = &(&d.quotient.with_cap(d.remainder_cap) * p.series()) + &d.remainder;
        assert_eq!(back.truncate(d.remainder_cap), g.truncate(d.remainder_cap));
        assert!(d.remainder.terms().all(|(e, _)| d.nu.not_le(e)));
    }

    #[test]
    fn t_alpha_single_term() {
        let dec = t_alpha(&poly(&[(&[3, 2], 1)], 10), &Exponent(vec![1, 1]), 5).unwrap();
        assert_eq!(dec.components[2], poly(&[(&[1, 0], 1)], 6));
        assert!(dec.components[0].is_zero() && dec.components[1].is_zero());
    }

    #[test]
    fn t_alpha_zero_entries_are_unconstrained() {
        let f = poly(&[(&[3, 7], 1)], 12);
        let dec = t_alpha(&f, &Exponent(vec![1, 0]), 6).unwrap();
        assert_eq!(dec.components[3], poly(&[(&[0, 7], 1)], 9));
        assert_eq!(dec.reconstruct(), f);
        assert_eq!(
            t_alpha(&f, &Exponent(vec![0, 0]), 2).unwrap_err(),
            DecomposeError::ZeroAlpha
        );
    }

    #[test]
    fn regroup_identity() {
        let f = poly(&[(&[3, 2], 1), (&[1, 0], 4)], 10);
        let dec = t_alpha(&f, &Exponent(vec![1, 1]), 4).unwrap();
        let re = power_regroup(&dec, 1).unwrap();
        assert_eq!(re.components, dec.components);
        assert!(power_regroup(&dec, 9).is_err());
    }

    #[test]
    fn cap_exhaustion() {
        let p = Germ::polynomial(poly(&[(&[1, 1], 1)], 6)).unwrap();
        let f = MultiSeries::one(2, 6);
        assert!(t_p_ell(&f, &p, &ell(&[(1, 1), (3, 2)]), 3).is_ok());
        assert!(matches!(
            t_p_ell(&f, &p, &ell(&[(1, 1), (3, 2)]), 4),
            Err(DecomposeError::CapExhausted { .. })
        ));
    }
}
