//! Couples `(α, 1/k)` with their order and equivalence, monomial maps
//! (`π_ij` blow-up charts and ramifications) acting by pullback, the
//! ordering-by-blow-up procedure and germ-couple equivalence.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::decompose::{weierstrass_divide, LinearForm};
use crate::error::{GeometryError, ParseError};
use crate::gauss::{format_rational, parse_rational, GaussRational};
use crate::gevrey::{radius_estimate, GrowthVerdict, Thresholds, VerdictKind};
use crate::mseries::{Exponent, Germ, MultiSeries};

/// An element `(α, 1/k)` of `Λ_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Couple {
    alpha: Exponent,
    k: BigRational,
}

impl Couple {
    pub fn new(alpha: Exponent, k: BigRational) -> Result<Self, GeometryError> {
        if alpha.is_zero() || !k.is_positive() {
            return Err(GeometryError::InvalidCouple);
        }
        Ok(Self { alpha, k })
    }

    /// Convenience constructor with `k = p/q`.
    pub fn from_parts(alpha: &[u32], p: i64, q: i64) -> Result<Self, GeometryError> {
        Self::new(Exponent(alpha.to_vec()), BigRational::new(p.into(), q.into()))
    }

    pub fn alpha(&self) -> &Exponent {
        &self.alpha
    }

    pub fn k(&self) -> &BigRational {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// The vector `k·α`; two couples are equivalent iff these agree.
    pub fn normal_form(&self) -> Vec<BigRational> {
        self.alpha
            .0
            .iter()
            .map(|&a| &self.k * BigRational::from_integer(a.into()))
            .collect()
    }

    /// Parses `alpha=[1,3] k=2/3`.
    pub fn parse(s: &str) -> Result<Self, ParseError> {
        let bad = || ParseError::Couple(s.to_string());
        let t = s.trim();
        let rest = t.strip_prefix("alpha=").ok_or_else(bad)?.trim_start();
        let rest = rest.strip_prefix('[').ok_or_else(bad)?;
        let (inner, rest) = rest.split_once(']').ok_or_else(bad)?;
        let alpha = inner
            .split(',')
            .map(|e| e.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let k = rest.trim().strip_prefix("k=").ok_or_else(bad)?;
        let k = parse_rational(k).map_err(|_| bad())?;
        Couple::new(Exponent(alpha), k).map_err(|_| bad())
    }
}

impl fmt::Display for Couple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha={} k={}", self.alpha, format_rational(&self.k))
    }
}

/// Outcome of comparing two couples under `⪯` and `≺`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoupleOrder {
    Equivalent,
    StrictLess,
    StrictGreater,
    Less,
    Greater,
    Incomparable,
}

impl CoupleOrder {
    pub fn is_strict(self) -> bool {
        matches!(self, CoupleOrder::StrictLess | CoupleOrder::StrictGreater)
    }

    pub fn is_comparable(self) -> bool {
        self != CoupleOrder::Incomparable
    }
}

fn check_same_dim(a: &Couple, b: &Couple) -> Result<(), GeometryError> {
    if a.dim() != b.dim() {
        return Err(crate::error::SeriesError::DimensionMismatch(a.dim(), b.dim()).into());
    }
    Ok(())
}

pub fn couple_equiv(a: &Couple, b: &Couple) -> Result<bool, GeometryError> {
    check_same_dim(a, b)?;
    Ok(a.normal_form() == b.normal_form())
}

fn compare_vectors(v: &[BigRational], w: &[BigRational]) -> CoupleOrder {
    if v == w {
        return CoupleOrder::Equivalent;
    }
    let le = v.iter().zip(w).all(|(a, b)| a <= b);
    let ge = v.iter().zip(w).all(|(a, b)| a >= b);
    let lt = v.iter().zip(w).all(|(a, b)| a < b);
    let gt = v.iter().zip(w).all(|(a, b)| a > b);
    match (lt, gt, le, ge) {
        (true, _, _, _) => CoupleOrder::StrictLess,
        (_, true, _, _) => CoupleOrder::StrictGreater,
        (_, _, true, _) => CoupleOrder::Less,
        (_, _, _, true) => CoupleOrder::Greater,
        _ => CoupleOrder::Incomparable,
    }
}

pub fn couple_compare(a: &Couple, b: &Couple) -> Result<CoupleOrder, GeometryError> {
    check_same_dim(a, b)?;
    Ok(compare_vectors(&a.normal_form(), &b.normal_form()))
}

/// The ratio test `max_j α_j/α'_j < k'/k` for `a ≺ b`, defined when every
/// entry of `b.alpha` is nonzero.
pub fn strict_less_by_ratio(a: &Couple, b: &Couple) -> Option<bool> {
    if b.alpha.0.contains(&0) {
        return None;
    }
    let max_ratio = a
        .alpha
        .0
        .iter()
        .zip(&b.alpha.0)
        .map(|(&x, &y)| BigRational::new(x.into(), y.into()))
        .max()?;
    Some(max_ratio < &b.k / &a.k)
}

/// One elementary map. Axes are 0-based here and 1-based in text form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    /// `π_ij` repeated `n` times: `x_j ↦ x_i^n x_j`, so `α_i += n·α_j`.
    Pi { i: usize, j: usize, n: u32 },
    /// `r_m` on axis `j`: `x_j ↦ x_j^m`.
    Ram { j: usize, m: u32 },
}

impl Step {
    fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        match *self {
            Step::Pi { i, j, n } => {
                if i == j || i >= dim || j >= dim || n == 0 {
                    return Err(GeometryError::InvalidStep(self.to_string()));
                }
            }
            Step::Ram { j, m } => {
                if j >= dim || m < 2 {
                    return Err(GeometryError::InvalidStep(self.to_string()));
                }
            }
        }
        Ok(())
    }

    fn pullback_exponent(&self, alpha: &mut Exponent) {
        match *self {
            Step::Pi { i, j, n } => alpha.0[i] += n * alpha.0[j],
            Step::Ram { j, m } => alpha.0[j] *= m,
        }
    }

    fn rules(&self, dim: usize, cap: u32) -> Vec<MultiSeries> {
        let mut rules: Vec<MultiSeries> = (0..dim)
            .map(|a| MultiSeries::var(dim, cap, a).expect("axis in range"))
            .collect();
        match *self {
            Step::Pi { i, j, n } => {
                let mut e = Exponent::unit(dim, j);
                e.0[i] += n;
                rules[j] = MultiSeries::monomial(e, GaussRational::one(), cap);
            }
            Step::Ram { j, m } => {
                let mut e = Exponent::zero(dim);
                e.0[j] = m;
                rules[j] = MultiSeries::monomial(e, GaussRational::one(), cap);
            }
        }
        rules
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Step::Pi { i, j, n: 1 } => write!(f, "pi({},{})", i + 1, j + 1),
            Step::Pi { i, j, n } => write!(f, "pi({},{})^{}", i + 1, j + 1, n),
            Step::Ram { j, m } => write!(f, "ram({},{})", j + 1, m),
        }
    }
}

/// A finite word of elementary maps, applied left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMap {
    dim: usize,
    steps: Vec<Step>,
}

impl MonomialMap {
    pub fn identity(dim: usize) -> Self {
        Self { dim, steps: Vec::new() }
    }

    pub fn new(dim: usize, steps: Vec<Step>) -> Result<Self, GeometryError> {
        for s in &steps {
            s.validate(dim)?;
        }
        Ok(Self { dim, steps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: Step) -> Result<(), GeometryError> {
        step.validate(self.dim)?;
        // Consecutive repetitions of the same π_ij merge into one power.
        if let (Some(Step::Pi { i, j, n }), Step::Pi { i: i2, j: j2, n: n2 }) = (self.steps.last_mut(), step) {
            if *i == i2 && *j == j2 {
                *n += n2;
                return Ok(());
            }
        }
        self.steps.push(step);
        Ok(())
    }

    /// Parses words like `pi(2,1)^3 ; ram(1,2)`. An empty string or `id`
    /// is the identity.
    pub fn parse(s: &str, dim: usize) -> Result<Self, ParseError> {
        let mut steps = Vec::new();
        let t = s.trim();
        if t.is_empty() || t == "id" {
            return Ok(Self::identity(dim));
        }
        for part in t.split(';') {
            let p = part.trim();
            let bad = || ParseError::Word(format!("cannot parse step `{p}`"));
            let (head, rest) = p.split_once('(').ok_or_else(bad)?;
            let (args, tail) = rest.split_once(')').ok_or_else(bad)?;
            let nums = args
                .split(',')
                .map(|a| a.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            if nums.len() != 2 {
                return Err(bad());
            }
            let tail = tail.trim();
            let power = if tail.is_empty() {
                1
            } else {
                tail.strip_prefix('^')
                    .and_then(|n| n.trim().parse::<u32>().ok())
                    .ok_or_else(bad)?
            };
            let step = match head.trim() {
                "pi" if nums[0] >= 1 && nums[1] >= 1 => Step::Pi {
                    i: nums[0] as usize - 1,
                    j: nums[1] as usize - 1,
                    n: power,
                },
                "ram" if nums[0] >= 1 && power == 1 => Step::Ram {
                    j: nums[0] as usize - 1,
                    m: nums[1],
                },
                _ => return Err(bad()),
            };
            step.validate(dim).map_err(|e| ParseError::Word(e.to_string()))?;
            steps.push(step);
        }
        Ok(Self { dim, steps })
    }

    pub fn pullback_exponent(&self, alpha: &Exponent) -> Exponent {
        let mut a = alpha.clone();
        for s in &self.steps {
            s.pullback_exponent(&mut a);
        }
        a
    }
}

impl fmt::Display for MonomialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return write!(f, "id");
        }
        for (n, s) in self.steps.iter().enumerate() {
            if n > 0 {
                write!(f, " ; ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

pub fn pullback_couple(m: &MonomialMap, c: &Couple) -> Result<Couple, GeometryError> {
    if m.dim != c.dim() {
        return Err(crate::error::SeriesError::DimensionMismatch(m.dim, c.dim()).into());
    }
    Ok(Couple {
        alpha: m.pullback_exponent(&c.alpha),
        k: c.k.clone(),
    })
}

/// `f ∘ π` realized as successive substitutions.
pub fn pullback_series(m: &MonomialMap, f: &MultiSeries) -> Result<MultiSeries, GeometryError> {
    if m.dim != f.dim() {
        return Err(crate::error::SeriesError::DimensionMismatch(m.dim, f.dim()).into());
    }
    let mut out = f.clone();
    for s in &m.steps {
        out = out.substitute(&s.rules(f.dim(), f.cap()))?;
    }
    Ok(out)
}

/// One corrective blow-up recorded by [`order_couples`]: the power
/// `π_{raise,by}^{repetitions}` applied to separate couples `pair.0`, `pair.1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub pair: (usize, usize),
    pub raise: usize,
    pub by: usize,
    pub bound: BigRational,
    pub repetitions: u32,
}

#[derive(Clone, Debug)]
pub struct OrderedCouples {
    pub map: MonomialMap,
    /// Input indices sorted ascending under `≺` after pullback.
    pub order: Vec<usize>,
    /// Pulled-back couples, in input order.
    pub images: Vec<Couple>,
    pub corrections: Vec<Correction>,
}

fn smallest_integer_above(q: &BigRational) -> u32 {
    let f = q.floor().to_integer() + BigInt::one();
    f.to_u32().unwrap_or(u32::MAX).max(1)
}

/// Finds a monomial blow-up after which the couples are totally ordered by
/// `≺` and every exponent entry is positive.
///
/// Zero entries are filled first: for couple `c` with `α_j = 0`, add `α_i`
/// to `α_j` using the first axis `i` with `α_i > 0`. Then the
/// lexicographically first pair that is not strictly comparable is fixed
/// with `π_{m,l}^N`, `N` the least integer above
/// `(β_{i,m} − β_{j,m}) / (β_{j,l} − β_{i,l})` on the normal forms.
pub fn order_couples(cs: &[Couple]) -> Result<OrderedCouples, GeometryError> {
    let first = cs.first().ok_or(GeometryError::Empty)?;
    let dim = first.dim();
    for (a, c) in cs.iter().enumerate() {
        check_same_dim(first, c)?;
        for (b, d) in cs.iter().enumerate().skip(a + 1) {
            if couple_equiv(c, d)? {
                return Err(GeometryError::EquivalentCouples(a, b));
            }
        }
    }

    let mut map = MonomialMap::identity(dim);
    let mut images: Vec<Couple> = cs.to_vec();
    let mut corrections = Vec::new();
    let apply = |step: Step, map: &mut MonomialMap, images: &mut Vec<Couple>| {
        map.push(step).expect("valid step");
        for c in images.iter_mut() {
            step.pullback_exponent(&mut c.alpha);
        }
    };

    if dim > 1 {
        loop {
            let zero = images.iter().find_map(|c| {
                let j = c.alpha.0.iter().position(|&x| x == 0)?;
                let i = c.alpha.0.iter().position(|&x| x > 0)?;
                Some((j, i))
            });
            match zero {
                Some((j, i)) => apply(Step::Pi { i: j, j: i, n: 1 }, &mut map, &mut images),
                None => break,
            }
        }
    }

    loop {
        let mut pending = None;
        'scan: for a in 0..images.len() {
            for b in a + 1..images.len() {
                let va = images[a].normal_form();
                let vb = images[b].normal_form();
                let ord = compare_vectors(&va, &vb);
                if !ord.is_strict() {
                    pending = Some((a, b, va, vb, ord));
                    break 'scan;
                }
            }
        }
        let Some((a, b, va, vb, ord)) = pending else { break };
        // Orient so that `lo` is below `hi` at axis `l` and not below at `m`.
        let (lo, hi, vlo, vhi) = match ord {
            CoupleOrder::Greater => (b, a, vb, va),
            _ => (a, b, va, vb),
        };
        let l = (0..dim).find(|&t| vlo[t] < vhi[t]).expect("distinct normal forms");
        let m = (0..dim)
            .find(|&t| vlo[t] > vhi[t])
            .or_else(|| (0..dim).find(|&t| vlo[t] == vhi[t]))
            .expect("pair is not strictly ordered");
        let bound = (&vlo[m] - &vhi[m]) / (&vhi[l] - &vlo[l]);
        let n = smallest_integer_above(&bound);
        apply(Step::Pi { i: m, j: l, n }, &mut map, &mut images);
        corrections.push(Correction {
            pair: (lo, hi),
            raise: m,
            by: l,
            bound,
            repetitions: n,
        });
    }

    let mut order: Vec<usize> = (0..images.len()).collect();
    order.sort_by(
        |&x, &y| match compare_vectors(&images[x].normal_form(), &images[y].normal_form()) {
            CoupleOrder::StrictLess | CoupleOrder::Less => Ordering::Less,
            CoupleOrder::StrictGreater | CoupleOrder::Greater => Ordering::Greater,
            _ => Ordering::Equal,
        },
    );
    Ok(OrderedCouples {
        map,
        order,
        images,
        corrections,
    })
}

/// A germ couple `(P, 1/k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GermCouple {
    pub germ: Germ,
    pub k: BigRational,
}

impl GermCouple {
    pub fn new(germ: Germ, k: BigRational) -> Result<Self, GeometryError> {
        if !k.is_positive() {
            return Err(GeometryError::InvalidCouple);
        }
        Ok(Self { germ, k })
    }
}

#[derive(Clone, Debug)]
pub struct GermEquivalence {
    pub equivalent: bool,
    /// `true` when the verdict holds for the full germs, not only modulo
    /// degree `> certified_cap`.
    pub exact: bool,
    pub p_a: BigInt,
    pub p_b: BigInt,
    pub certified_cap: u32,
    /// The unit `U` with `P_b^{p_b} = U·P_a^{p_a}` when equivalent.
    pub unit: Option<MultiSeries>,
}

/// Decides `(P_a, 1/k_a) ∼ (P_b, 1/k_b)` by dividing `P_b^{p_b}` by
/// `P_a^{p_a}` and testing the quotient for a unit with zero remainder.
pub fn germ_couple_equiv(a: &GermCouple, b: &GermCouple) -> Result<GermEquivalence, GeometryError> {
    let (ga, gb) = (&a.germ, &b.germ);
    if ga.dim() != gb.dim() {
        return Err(crate::error::SeriesError::DimensionMismatch(ga.dim(), gb.dim()).into());
    }
    let ratio = &a.k / &b.k;
    let (p_a, p_b) = (ratio.numer().clone(), ratio.denom().clone());
    let pa = p_a.to_u32().ok_or(GeometryError::InsufficientOrder {
        available: 0,
        needed: i64::MAX,
    })?;
    let pb = p_b.to_u32().ok_or(GeometryError::InsufficientOrder {
        available: 0,
        needed: i64::MAX,
    })?;

    let deg = |g: &Germ| g.series().max_degree().unwrap_or(0);
    let cap = match (ga.is_exact(), gb.is_exact()) {
        (true, true) => ga.cap().min(gb.cap()).max(pa * deg(ga)).max(pb * deg(gb)),
        (true, false) => gb.cap(),
        (false, true) => ga.cap(),
        (false, false) => ga.cap().min(gb.cap()),
    };
    let sa = ga.with_cap(cap)?.series().pow(pa);
    let sb = gb.with_cap(cap)?.series().pow(pb);
    let needed = pa as i64 * ga.series().min_degree().unwrap_or(0) as i64;
    if sa.is_zero() {
        return Err(GeometryError::InsufficientOrder {
            available: cap as i64,
            needed,
        });
    }
    let pow_a = Germ::new(sa.clone(), ga.is_exact())?;

    let ell = LinearForm::graded(ga.dim(), cap);
    let div = weierstrass_divide(&sb, &pow_a, &ell).map_err(|e| match e {
        crate::error::DecomposeError::Series(s) => GeometryError::Series(s),
        other => GeometryError::InvalidStep(other.to_string()),
    })?;
    let no = |certified_cap: u32| GermEquivalence {
        equivalent: false,
        exact: true,
        p_a: p_a.clone(),
        p_b: p_b.clone(),
        certified_cap,
        unit: None,
    };
    if !div.remainder.truncate(div.remainder_cap).is_zero() {
        return Ok(no(div.remainder_cap));
    }
    let q_cap = div.quotient_cap.ok_or(GeometryError::InsufficientOrder {
        available: cap as i64,
        needed: pow_a.series().min_degree().unwrap_or(0) as i64,
    })?;
    let q = div.quotient.truncate(q_cap);
    if q.constant_term().is_zero() {
        return Ok(no(q_cap));
    }
    let exact = ga.is_exact() && gb.is_exact() && {
        let big = cap + q.max_degree().unwrap_or(0) + 1;
        let prod = q.with_cap(big).mul(&sa.with_cap(big)).expect("same dim");
        prod == sb.with_cap(big)
    };
    Ok(GermEquivalence {
        equivalent: true,
        exact,
        p_a,
        p_b,
        certified_cap: q_cap,
        unit: Some(q),
    })
}

/// A chart of the blow-up of `{x1 = x2 = 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Chart {
    /// `b_ξ: (v1, v2, v'') ↦ (v2, (ξ + v1) v2, v'')`.
    Finite(GaussRational),
    /// `b_∞: (v1, v2, v'') ↦ (v1 v2, v2, v'')`.
    Infinity,
}

pub fn blowup_chart(f: &MultiSeries, chart: &Chart) -> Result<MultiSeries, GeometryError> {
    let (dim, cap) = (f.dim(), f.cap());
    if dim < 2 {
        return Err(GeometryError::DimensionTooSmall);
    }
    let mut rules: Vec<MultiSeries> = (0..dim)
        .map(|a| MultiSeries::var(dim, cap, a).expect("axis in range"))
        .collect();
    let mut e12 = Exponent::zero(dim);
    e12.0[0] = 1;
    e12.0[1] = 1;
    let x1x2 = MultiSeries::monomial(e12, GaussRational::one(), cap);
    match chart {
        Chart::Finite(xi) => {
            let x2 = rules[1].clone();
            rules[0] = x2.clone();
            rules[1] = &x2.scale(xi) + &x1x2;
        }
        Chart::Infinity => {
            rules[0] = x1x2;
        }
    }
    Ok(f.substitute(&rules)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct TransportReport {
    pub original: GrowthVerdict,
    pub ramified: GrowthVerdict,
    pub blown_up: GrowthVerdict,
    pub agree: bool,
}

/// Compares growth verdicts of `f`, `f ∘ r_m` (axis 1) and `f ∘ b_ξ`.
pub fn convergence_transport_check(
    f: &MultiSeries,
    m: u32,
    chart: &Chart,
    thresholds: &Thresholds,
) -> Result<TransportReport, GeometryError> {
    let original = radius_estimate(f, thresholds);
    let ram = MonomialMap::new(f.dim(), vec![Step::Ram { j: 0, m }])?;
    let ramified = radius_estimate(&pullback_series(&ram, f)?, thresholds);
    let blown_up = if f.dim() >= 2 {
        radius_estimate(&blowup_chart(f, chart)?, thresholds)
    } else {
        original.clone()
    };
    let kinds = [original.kind.class(), ramified.kind.class(), blown_up.kind.class()];
    let agree = kinds.iter().all(|k| *k == kinds[0]) && kinds[0] != VerdictKind::Inconclusive.class();
    Ok(TransportReport {
        original,
        ramified,
        blown_up,
        agree,
    })
}
