//! One-variable Borel–Laplace numerics.
//!
//! Series arrive here through a ray `x^α` (see [`OneVarSeries::from_ray`]).
//! The `k`-Borel transform divides `a_n` by `Γ(1 + n/k)`; the Laplace
//! integral along `arg ξ = θ` recovers a function asymptotic to the series
//! in the sector `|arg x − θ| < π/2k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::decompose::Decomposition;
use crate::error::BorelError;
use crate::gauss::{format_rational, GaussRational};
use crate::gevrey::{least_squares, ln_factorial, ln_gamma, Thresholds};
use crate::mseries::{Exponent, Germ, MultiSeries};
use crate::pade::Pade;
use crate::quadrature;

/// `Σ a_n x^n` with exact coefficients `a_0 … a_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneVarSeries {
    pub coeffs: Vec<GaussRational>,
}

impl OneVarSeries {
    pub fn new(coeffs: Vec<GaussRational>) -> Self {
        Self { coeffs }
    }

    /// Euler's series `Σ_{n>=0} (−1)^n n! x^{n+1}` through degree `order`.
    pub fn euler(order: usize) -> Self {
        let mut coeffs = vec![GaussRational::zero()];
        let mut fact = BigInt::from(1);
        for n in 0..order {
            if n > 0 {
                fact *= n;
            }
            let c = GaussRational::from_bigint(fact.clone());
            coeffs.push(if n % 2 == 0 { c } else { -c });
        }
        Self { coeffs }
    }

    /// `Σ x^n` through degree `order`.
    pub fn geometric(order: usize) -> Self {
        Self {
            coeffs: vec![GaussRational::from_int(1); order + 1],
        }
    }

    /// Coefficients of `x^{nα}` in `f`, read as a series in `t = x^α`.
    pub fn from_ray(f: &MultiSeries, alpha: &Exponent) -> Self {
        Self {
            coeffs: f.ray_coefficients(alpha),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ_{n<N} a_n t^n` in floating point.
    pub fn partial_sum(&self, t: Complex64, n: usize) -> Complex64 {
        self.coeffs[..n.min(self.coeffs.len())]
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, a| acc * t + a.to_complex())
    }
}

/// A Borel coefficient: always as a float, exactly when `n/k` is integral.
#[derive(Clone, Debug, PartialEq)]
pub struct BorelCoeff {
    pub value: Complex64,
    pub exact: Option<GaussRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BorelSeries {
    pub k: BigRational,
    pub coeffs: Vec<BorelCoeff>,
}

impl BorelSeries {
    pub fn values(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.value).collect()
    }
}

/// `a / Γ(1 + x)` computed in log space so factorial-size `a` stays finite.
fn divide_by_gamma(a: &GaussRational, x: f64) -> Complex64 {
    if a.is_zero() {
        return Complex64::zero();
    }
    let ln_a = a.ln_abs();
    let part = |r: &BigRational| {
        if r.is_zero() {
            0.0
        } else {
            let s = if r.is_negative() { -1.0 } else { 1.0 };
            s * (GaussRational::real(r.clone()).ln_abs() - ln_a).exp()
        }
    };
    let unit = Complex64::new(part(&a.re), part(&a.im));
    unit * (ln_a - ln_gamma(1.0 + x)).exp()
}

pub fn formal_borel(f: &OneVarSeries, k: &BigRational) -> Result<BorelSeries, BorelError> {
    if !k.is_positive() {
        return Err(BorelError::NonPositiveK);
    }
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let m = BigRational::from_integer(n.into()) / k;
            let exact = m.is_integer().then(|| {
                let mut fact = BigInt::from(1);
                let top = m.to_integer().to_u64().expect("index fits");
                for i in 2..=top {
                    fact *= i;
                }
                let inv = GaussRational::real(BigRational::new(1.into(), fact));
                a * &inv
            });
            let value = match &exact {
                Some(e) => e.to_complex(),
                None => divide_by_gamma(a, crate::decompose::rational_to_f64(&m)),
            };
            BorelCoeff { value, exact }
        })
        .collect();
    Ok(BorelSeries { k: k.clone(), coeffs })
}

/// An analytic continuation of a Borel transform along the ray.
#[derive(Clone, Debug, PartialEq)]
pub enum ContinuationHandle {
    /// One of [`CLOSED_FORMS`].
    ClosedForm(String),
    Pade {
        order: (usize, usize),
        approximant: Pade,
    },
    Linear(Vec<(Complex64, ContinuationHandle)>),
}

/// Registered closed forms: `log1p` is the Borel image of Euler's series
/// (`k = 1`), `geometric` is `1/(1 − ξ)`, `exp` is the Borel image of the
/// geometric series.
pub const CLOSED_FORMS: [&str; 3] = ["log1p", "geometric", "exp"];

impl ContinuationHandle {
    pub fn closed_form(name: &str) -> Result<Self, BorelError> {
        if CLOSED_FORMS.contains(&name) {
            Ok(Self::ClosedForm(name.to_string()))
        } else {
            Err(BorelError::UnknownClosedForm(name.to_string()))
        }
    }

    /// Diagonal `[m/m]` approximant of the Borel coefficients.
    pub fn pade(b: &BorelSeries, m: usize) -> Result<Self, BorelError> {
        let values = b.values();
        if values.len() < 2 * m + 1 {
            return Err(BorelError::InsufficientSamples(format!(
                "a [{m}/{m}] Padé approximant needs {} Borel coefficients, the series has {}",
                2 * m + 1,
                values.len()
            )));
        }
        let approximant = Pade::new(&values, m, m).ok_or(BorelError::Singular)?;
        Ok(Self::Pade {
            order: (m, m),
            approximant,
        })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Self::ClosedForm(name) => match name.as_str() {
                "log1p" => (1.0 + z).ln(),
                "geometric" => 1.0 / (1.0 - z),
                "exp" => z.exp(),
                _ => unreachable!("checked at construction"),
            },
            Self::Pade { approximant, .. } => approximant.eval(z),
            Self::Linear(parts) => parts.iter().map(|(c, h)| c * h.eval(z)).sum(),
        }
    }

    /// Arguments of the approximant's poles. A diagnostic, never a verdict
    /// on singular directions.
    pub fn pole_arguments(&self) -> Vec<f64> {
        match self {
            Self::Pade { approximant, .. } => approximant.poles().iter().map(|p| p.arg()).collect(),
            Self::ClosedForm(name) if name == "log1p" => vec![PI],
            Self::ClosedForm(name) if name == "geometric" => vec![0.0],
            Self::ClosedForm(_) => Vec::new(),
            Self::Linear(parts) => parts.iter().flat_map(|(_, h)| h.pole_arguments()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub x: [f64; 2],
    pub value: [f64; 2],
    pub est_error: f64,
}

impl Sample {
    pub fn x(&self) -> Complex64 {
        Complex64::new(self.x[0], self.x[1])
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value[0], self.value[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummationReport {
    pub k: String,
    pub theta: f64,
    pub samples: Vec<Sample>,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// `∫_{arg ξ = θ} e^{−(ξ/x)^k} g(ξ) d(ξ/x)^k` for each `x`.
///
/// With `u = (ξ/x)^k` along the ray the integrand becomes
/// `e^{−u e^{iφ}} g(|x| u^{1/k} e^{iθ}) e^{iφ}`, `φ = k(θ − arg x)`, which
/// decays like `e^{−u cos φ}`. Panels of width `1/cos φ` are added until
/// the integrand is negligible against the running value.
pub fn laplace_sum(
    g: &ContinuationHandle,
    k: &BigRational,
    theta: f64,
    xs: &[Complex64],
    tol: f64,
) -> Result<SummationReport, BorelError> {
    if !k.is_positive() {
        return Err(BorelError::NonPositiveK);
    }
    let kf = crate::decompose::rational_to_f64(k);
    let samples = xs
        .par_iter()
        .map(|&x| laplace_point(g, kf, theta, x, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SummationReport {
        k: format_rational(k),
        theta,
        samples,
    })
}

fn laplace_point(g: &ContinuationHandle, k: f64, theta: f64, x: Complex64, tol: f64) -> Result<Sample, BorelError> {
    let pack = |v: Complex64, e: f64| Sample {
        x: [x.re, x.im],
        value: [v.re, v.im],
        est_error: e,
    };
    if x.norm() == 0.0 {
        return Ok(pack(g.eval(Complex64::zero()), 0.0));
    }
    let d = wrap_angle(theta - x.arg());
    if d.abs() >= PI / (2.0 * k) {
        return Err(BorelError::SectorViolation { point: format!("{x}") });
    }
    let phi = k * d;
    let (rot, c) = (Complex64::from_polar(1.0, phi), phi.cos());
    let dir = Complex64::from_polar(x.norm(), theta);
    let h = |u: f64| (-u * rot).exp() * g.eval(dir * u.powf(1.0 / k)) * rot;
    let width = 1.0 / c;
    let mut sum = Complex64::zero();
    let mut err = 0.0;
    let mut j = 0usize;
    loop {
        let (a, b) = (j as f64 * width, (j + 1) as f64 * width);
        let coarse = quadrature::integrate(&h, a, b, f64::INFINITY, 1)
            .ok_or_else(|| BorelError::NonFinite(format!("{}", dir * a.max(1e-300).powf(1.0 / k))))?;
        let scale = (sum + coarse.value).norm().max(1e-300);
        let est = quadrature::integrate(&h, a, b, tol * scale / 16.0, 64)
            .ok_or_else(|| BorelError::NonFinite(format!("ray segment [{a}, {b}]")))?;
        if est.error > 1e-6 * scale {
            return Err(BorelError::NonFinite(format!(
                "no convergence on ray segment [{a}, {b}]"
            )));
        }
        sum += est.value;
        err += est.error;
        j += 1;
        let edge = h(b).norm() * width;
        if j >= 8 && edge < 1e-17 * sum.norm().max(1e-300) {
            err += edge;
            break;
        }
        if j > 20_000 {
            return Err(BorelError::NonFinite("integrand does not decay along the ray".into()));
        }
    }
    Ok(pack(sum, err + 4.0 * f64::EPSILON * sum.norm()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Truncation {
    pub value: [f64; 2],
    pub est_error: f64,
    /// Number of terms summed.
    pub n_star: usize,
}

impl Truncation {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value[0], self.value[1])
    }
}

/// Sums up to the smallest term. A series whose terms keep decreasing to
/// the end of the data is summed completely with a geometric tail bound.
pub fn optimal_truncation(f: &OneVarSeries, t: Complex64) -> Result<Truncation, BorelError> {
    let pack = |v: Complex64, e: f64, n| Truncation {
        value: [v.re, v.im],
        est_error: e,
        n_star: n,
    };
    if f.is_empty() {
        return Ok(pack(Complex64::zero(), 0.0, 0));
    }
    if t.norm() == 0.0 {
        return Ok(pack(f.coeffs[0].to_complex(), 0.0, 1));
    }
    let lt = t.norm().ln();
    let mags: Vec<(usize, f64)> = f
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(n, a)| (n, a.ln_abs() + n as f64 * lt))
        .collect();
    if mags.len() >= 2 && mags[1].1 > mags[0].1 && mags[0].0 > 0 {
        return Err(BorelError::DivergentAtStart);
    }
    let stop = mags.windows(2).position(|w| w[1].1 > w[0].1);
    match stop {
        Some(i) => {
            let (n, m) = mags[i];
            Ok(pack(f.partial_sum(t, n), m.exp(), n))
        }
        None => {
            let tail = match mags.len() {
                0 => 0.0,
                1 => 0.0,
                l => {
                    let (last, prev) = (mags[l - 1].1, mags[l - 2].1);
                    let q = (last - prev).exp();
                    if q < 1.0 {
                        last.exp() * q / (1.0 - q)
                    } else {
                        last.exp()
                    }
                }
            };
            Ok(pack(f.partial_sum(t, f.len()), tail, f.len()))
        }
    }
}

/// Evaluates a series at a complex point in floating point.
pub fn eval_series(s: &MultiSeries, x: &[Complex64]) -> Complex64 {
    s.terms()
        .map(|(e, c)| {
            e.0.iter()
                .zip(x)
                .fold(c.to_complex(), |acc, (&b, &xi)| acc * xi.powu(b))
        })
        .sum()
}

/// A value of the summed function at a point of `C^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderSample {
    pub x: Vec<[f64; 2]>,
    pub value: [f64; 2],
    pub est_error: f64,
}

impl RemainderSample {
    pub fn point(&self) -> Vec<Complex64> {
        self.x.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certification {
    Certified,
    NotCertified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderReport {
    pub s: f64,
    pub window: (usize, usize),
    #[serde(rename = "logC")]
    pub log_c: f64,
    #[serde(rename = "logB")]
    pub log_b: f64,
    /// Largest absolute deviation from the fitted line.
    pub residual: f64,
    /// `(N, ln sup_x R_N(x))`.
    pub points: Vec<(usize, f64)>,
    /// Samples dropped because the remainder sank into numerical noise.
    pub excluded: usize,
    pub verdict: Certification,
}

/// Tests `|f − Σ_{n<N} f_n P^n| <= C B^N N!^s |P|^N` on samples: fits
/// `ln sup_x R_N` against `N` and certifies when the data lie on a line.
/// Remainders below `100·est_error` of the sampled value are noise and are
/// left out.
pub fn remainder_check(
    samples: &[RemainderSample],
    dec: &Decomposition,
    p: &Germ,
    s: f64,
    window: (usize, usize),
    th: &Thresholds,
) -> Result<RemainderReport, BorelError> {
    let (lo, hi) = window;
    if hi > dec.components.len() || lo > hi {
        return Err(BorelError::InsufficientSamples(format!(
            "window {lo}..{hi} needs that many components, have {}",
            dec.components.len()
        )));
    }
    let evals: Vec<(Vec<Complex64>, Complex64, Complex64, f64)> = samples
        .iter()
        .map(|smp| {
            let x = smp.point();
            let comps = dec.components.iter().map(|c| eval_series(c, &x)).collect::<Vec<_>>();
            let pv = eval_series(p.series(), &x);
            (comps, pv, Complex64::new(smp.value[0], smp.value[1]), smp.est_error)
        })
        .collect();
    let mut points = Vec::new();
    let mut excluded = 0;
    for n in lo..=hi {
        let mut sup = f64::NEG_INFINITY;
        for (comps, pv, val, err) in &evals {
            let partial: Complex64 = comps[..n].iter().enumerate().map(|(i, c)| c * pv.powu(i as u32)).sum();
            let rem = (val - partial).norm();
            if rem < 100.0 * err || pv.norm() == 0.0 {
                excluded += 1;
                continue;
            }
            let r = rem.ln() - s * ln_factorial(n as u32) - n as f64 * pv.norm().ln();
            sup = sup.max(r);
        }
        if sup.is_finite() {
            points.push((n, sup));
        }
    }
    if points.len() < 3 {
        return Err(BorelError::InsufficientSamples(format!(
            "{} usable orders, need 3",
            points.len()
        )));
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|&(n, _)| vec![1.0, n as f64]).collect();
    let y: Vec<f64> = points.iter().map(|&(_, v)| v).collect();
    let (coef, _, max) = least_squares(&rows, &y).ok_or(BorelError::Singular)?;
    let verdict = if max < th.residual_tol {
        Certification::Certified
    } else {
        Certification::NotCertified
    };
    Ok(RemainderReport {
        s,
        window,
        log_c: coef[0],
        log_b: coef[1],
        residual: max,
        points,
        excluded,
        verdict,
    })
}

/// Samples the Borel sum of Euler's series composed with `P` at each point.
pub fn sample_euler(p: &Germ, points: &[Vec<Complex64>], tol: f64) -> Result<Vec<RemainderSample>, BorelError> {
    let ts: Vec<Complex64> = points.iter().map(|x| eval_series(p.series(), x)).collect();
    let report = laplace_sum(
        &ContinuationHandle::closed_form("log1p")?,
        &BigRational::from_integer(1.into()),
        0.0,
        &ts,
        tol,
    )?;
    Ok(points
        .iter()
        .zip(report.samples)
        .map(|(x, smp)| RemainderSample {
            x: x.iter().map(|z| [z.re, z.im]).collect(),
            value: smp.value,
            est_error: smp.est_error,
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OdeResidual {
    pub t: f64,
    pub y: f64,
    pub residual: f64,
}

/// `|t² y′ + y − t|` for the Borel sum of Euler's series on the positive
/// axis, with `y′` by central differences.
pub fn euler_ode_residuals(ts: &[f64], tol: f64) -> Result<Vec<OdeResidual>, BorelError> {
    let g = ContinuationHandle::closed_form("log1p")?;
    let one = BigRational::from_integer(1.into());
    let xs: Vec<Complex64> = ts
        .iter()
        .flat_map(|&t| {
            let h = 1e-3 * t;
            [t - h, t, t + h].map(|v| Complex64::new(v, 0.0))
        })
        .collect();
    let r = laplace_sum(&g, &one, 0.0, &xs, tol)?;
    Ok(ts
        .iter()
        .zip(r.samples.chunks(3))
        .map(|(&t, c)| {
            let h = 1e-3 * t;
            let y = c[1].value[0];
            let dy = (c[2].value[0] - c[0].value[0]) / (2.0 * h);
            OdeResidual {
                t,
                y,
                residual: (t * t * dy + y - t).abs(),
            }
        })
        .collect())
}

/// `M·‖G⁻¹‖₁` for the Vandermonde matrix `G = (t_i^j)` on `M` equally
/// spaced interior points of the arc `|t| = ρ`, `arg t ∈ (a, b)`.
pub fn vandermonde_bound(a: f64, b: f64, rho: f64, m: usize) -> Result<f64, BorelError> {
    if !(a < b) || m == 0 || !(rho > 0.0) {
        return Err(BorelError::InvalidArc(format!("({a}, {b}), rho={rho}, M={m}")));
    }
    let pts: Vec<Complex64> = (0..m)
        .map(|i| Complex64::from_polar(rho, a + (i + 1) as f64 * (b - a) / (m + 1) as f64))
        .collect();
    let g = DMatrix::from_fn(m, m, |i, j| pts[i].powu(j as u32));
    let inv = g.try_inverse().ok_or(BorelError::Singular)?;
    let norm = (0..m)
        .map(|j| inv.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    if !norm.is_finite() {
        return Err(BorelError::Singular);
    }
    Ok(m as f64 * norm)
}

/// Parses `re,im;re,im;…`.
pub fn parse_points(s: &str) -> Result<Vec<Complex64>, crate::error::ParseError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let bad = || crate::error::ParseError::Document(format!("point `{p}`: expected re,im"));
            let (re, im) = p.split_once(',').ok_or_else(bad)?;
            Ok(Complex64::new(
                re.trim().parse().map_err(|_| bad())?,
                im.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}
