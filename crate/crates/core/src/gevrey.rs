//! Growth-rate estimation on coefficient data.
//!
//! Every estimator is an ordinary least-squares fit on log data and returns
//! the fitted witness together with its residual. A finite truncation can
//! never prove a Gevrey bound; these are calibrated diagnostics.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use serde::Serialize;

use crate::decompose::Decomposition;
use crate::error::{FitError, ParseError};
use crate::geometry::{couple_equiv, Couple};
use crate::mseries::{Exponent, MultiSeries};

/// Desk-scale calibration constants for the verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub s_tol: f64,
    pub residual_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            s_tol: 0.1,
            residual_tol: 0.5,
        }
    }
}

/// Inclusive index range; `hi = None` runs to the last available index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub lo: usize,
    pub hi: Option<usize>,
}

impl Default for Window {
    fn default() -> Self {
        Self { lo: 10, hi: None }
    }
}

impl Window {
    pub fn new(lo: usize, hi: Option<usize>) -> Self {
        Self { lo, hi }
    }

    pub fn all() -> Self {
        Self { lo: 0, hi: None }
    }

    pub fn contains(&self, n: usize) -> bool {
        n >= self.lo && self.hi.is_none_or(|h| n <= h)
    }

    /// Parses `a:b` or `a:`.
    pub fn parse(s: &str) -> Result<Self, ParseError> {
        let bad = || ParseError::Document(format!("window `{s}`: expected a:b"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let lo = a.trim().parse().map_err(|_| bad())?;
        let hi = match b.trim() {
            "" => None,
            t => Some(t.parse().map_err(|_| bad())?),
        };
        if hi.is_some_and(|h| h < lo) {
            return Err(bad());
        }
        Ok(Self { lo, hi })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) => write!(f, "{}:{}", self.lo, h),
            None => write!(f, "{}:", self.lo),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GevreyFit {
    pub s: f64,
    #[serde(rename = "logA")]
    pub log_a: f64,
    #[serde(rename = "logC")]
    pub log_c: f64,
    /// Root mean square of the fit residuals.
    pub residual: f64,
    /// First and last index that entered the fit.
    pub window: (usize, usize),
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class", content = "s", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    Convergent,
    DivergentGevrey(f64),
    Inconclusive,
}

impl VerdictKind {
    /// The verdict without its payload.
    pub fn class(&self) -> &'static str {
        match self {
            VerdictKind::Convergent => "CONVERGENT",
            VerdictKind::DivergentGevrey(_) => "DIVERGENT_GEVREY",
            VerdictKind::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictKind::DivergentGevrey(s) => write!(f, "DIVERGENT_GEVREY({s:.3})"),
            k => f.write_str(k.class()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthVerdict {
    pub kind: VerdictKind,
    /// `None` when not estimated; `f64::INFINITY` (JSON `null`) for zero.
    pub radius_estimate: Option<f64>,
    pub diagnostics: String,
}

/// Least-squares fit; returns coefficients, RMS and max-abs residual.
pub(crate) fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64, f64)> {
    let p = rows.first()?.len();
    let a = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-12).ok()?;
    let r = &a * &x - &b;
    let rms = (r.norm_squared() / y.len() as f64).sqrt();
    let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Some((x.iter().copied().collect(), rms, max))
}

/// `ln n!`.
pub fn ln_factorial(n: u32) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `ln Γ(x)` by the Lanczos approximation (g = 7, n = 9), reflected below 1/2.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin().abs();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Per total-degree shell: `(max ln|f_β|, max m(β))` over stored `β`.
fn shells<F>(f: &MultiSeries, weight: F) -> BTreeMap<u32, (f64, f64)>
where
    F: Fn(&Exponent) -> f64,
{
    let mut out: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for (e, c) in f.terms() {
        let v = (c.ln_abs(), weight(e));
        out.entry(e.degree())
            .and_modify(|s| {
                s.0 = s.0.max(v.0);
                s.1 = s.1.max(v.1);
            })
            .or_insert(v);
    }
    out
}

fn fit_rows(rows: Vec<(usize, Vec<f64>, f64)>, params: usize) -> Result<GevreyFit, FitError> {
    if rows.len() < params {
        return Err(FitError::Underdetermined {
            points: rows.len(),
            params,
        });
    }
    let window = (rows[0].0, rows[rows.len() - 1].0);
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r.1.clone()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let (coef, rms, _) = least_squares(&x, &y).ok_or(FitError::Underdetermined {
        points: rows.len(),
        params,
    })?;
    Ok(GevreyFit {
        s: coef[2],
        log_a: coef[1],
        log_c: coef[0],
        residual: rms,
        window,
        points: rows.len(),
    })
}

/// Per total-degree shell: `(|β|, max ln|f_β|, max m(β))` with
/// `m(β) = min_j ln Γ(β_j+1)/α_j`.
pub fn monomial_shells(f: &MultiSeries, alpha: &Exponent) -> Result<Vec<(usize, f64, f64)>, FitError> {
    if alpha.dim() != f.dim() {
        return Err(FitError::Dimension {
            expected: f.dim(),
            got: alpha.dim(),
        });
    }
    if alpha.0.contains(&0) {
        return Err(FitError::NonPositiveAlpha);
    }
    let m = |e: &Exponent| {
        e.0.iter()
            .zip(&alpha.0)
            .map(|(&b, &a)| ln_factorial(b) / a as f64)
            .fold(f64::INFINITY, f64::min)
    };
    Ok(shells(f, m)
        .into_iter()
        .map(|(n, (y, mb))| (n as usize, y, mb))
        .collect())
}

/// Fits `ln|f_β| ≈ ln C + |β| ln A + s·m(β)` on the shells of
/// [`monomial_shells`] inside `window`.
pub fn fit_monomial_gevrey(f: &MultiSeries, alpha: &Exponent, window: Window) -> Result<GevreyFit, FitError> {
    let rows = monomial_shells(f, alpha)?
        .into_iter()
        .filter(|(n, _, _)| window.contains(*n))
        .map(|(n, y, mb)| (n, vec![1.0, n as f64, mb], y))
        .collect();
    fit_rows(rows, 3)
}

/// `ln M_n ≈ ln C + n ln A + s ln n!` with `M_n = Σ |coef|·r^{|γ|}` the
/// ℓ¹ majorant of component `n` on the polydisk of radius `r`. All
/// majorants are taken up to the smallest component cap in the window, so
/// later components are not penalised for their shorter truncation. Zero
/// components carry no growth information and are skipped.
pub fn fit_component_gevrey(dec: &Decomposition, r: f64, window: Window) -> Result<GevreyFit, FitError> {
    if !(r > 0.0) {
        return Err(FitError::WindowTooSmall(format!("radius {r} must be positive")));
    }
    let picked: Vec<(usize, &MultiSeries)> = dec
        .components
        .iter()
        .enumerate()
        .filter(|(n, c)| window.contains(*n) && !c.is_zero())
        .collect();
    let depth = picked.iter().map(|(_, c)| c.cap()).min().unwrap_or(0);
    let rows = picked
        .into_iter()
        .filter_map(|(n, c)| {
            let m: f64 = c
                .terms()
                .filter(|(e, _)| e.degree() <= depth)
                .map(|(e, v)| v.abs_f64() * r.powi(e.degree() as i32))
                .sum();
            (m > 0.0).then(|| (n, vec![1.0, n as f64, ln_factorial(n as u32)], m.ln()))
        })
        .collect();
    fit_rows(rows, 3)
}

/// Cauchy–Hadamard style verdict from total-degree shell maxima.
pub fn radius_estimate(f: &MultiSeries, th: &Thresholds) -> GrowthVerdict {
    if f.is_zero() {
        return GrowthVerdict {
            kind: VerdictKind::Convergent,
            radius_estimate: Some(f64::INFINITY),
            diagnostics: "zero series".into(),
        };
    }
    let sh: Vec<(u32, f64)> = shells(f, |_| 0.0)
        .into_iter()
        .map(|(n, (y, _))| (n, y))
        .filter(|(n, _)| *n > 0)
        .collect();
    if sh.len() < 10 {
        return GrowthVerdict {
            kind: VerdictKind::Inconclusive,
            radius_estimate: None,
            diagnostics: format!("{} nonempty shells, need 10", sh.len()),
        };
    }
    let rows: Vec<Vec<f64>> = sh.iter().map(|&(n, _)| vec![1.0, n as f64, ln_factorial(n)]).collect();
    let y: Vec<f64> = sh.iter().map(|&(_, v)| v).collect();
    let Some((coef, rms, _)) = least_squares(&rows, &y) else {
        return GrowthVerdict {
            kind: VerdictKind::Inconclusive,
            radius_estimate: None,
            diagnostics: "degenerate fit".into(),
        };
    };
    let s = coef[2];
    let top = &sh[sh.len() / 2..];
    let root = top.iter().map(|&(n, v)| v / n as f64).fold(f64::NEG_INFINITY, f64::max);
    let rho = (-root).exp();
    let diagnostics = format!("s={s:.4} residual={rms:.4} shells={}..{}", sh[0].0, sh[sh.len() - 1].0);
    let kind = if s >= th.s_tol {
        VerdictKind::DivergentGevrey(s)
    } else if s > -th.s_tol && rms < th.residual_tol && rho > 0.0 {
        VerdictKind::Convergent
    } else if s <= -th.s_tol && rho > 0.0 {
        // faster than geometric decay still sits under a geometric envelope
        VerdictKind::Convergent
    } else {
        VerdictKind::Inconclusive
    };
    let radius_estimate = matches!(kind, VerdictKind::Convergent).then_some(rho);
    GrowthVerdict {
        kind,
        radius_estimate,
        diagnostics,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitReport {
    pub verdict: Feasibility,
    /// Factorial coefficient of the fit of `ln r_k`; `None` for a zero diagonal.
    pub s: Option<f64>,
    pub residual: Option<f64>,
    /// `(k, r_k^{1/k})` for every nonzero diagonal entry in the window.
    pub roots: Vec<(usize, f64)>,
}

/// Decides whether the diagonal `F_kk` forbids a split `F = g1 + g2` with
/// `g_j` 1-Gevrey in `x_j`: that needs `r_k = |F_kk|/k!` under a geometric
/// envelope.
pub fn split_infeasibility(f: &MultiSeries, window: Window, th: &Thresholds) -> Result<SplitReport, FitError> {
    if f.dim() != 2 {
        return Err(FitError::Dimension {
            expected: 2,
            got: f.dim(),
        });
    }
    let last = (f.cap() / 2) as usize;
    let ks: Vec<usize> = (1..=last).filter(|&k| window.contains(k)).collect();
    if ks.len() < 4 {
        return Err(FitError::WindowTooSmall(format!(
            "{} diagonal entries in {window}",
            ks.len()
        )));
    }
    let pts: Vec<(usize, f64)> = ks
        .iter()
        .filter_map(|&k| {
            let c = f.coeff(&Exponent(vec![k as u32, k as u32]));
            (!c.is_zero()).then(|| (k, c.ln_abs() - ln_factorial(k as u32)))
        })
        .collect();
    let roots: Vec<(usize, f64)> = pts.iter().map(|&(k, l)| (k, (l / k as f64).exp())).collect();
    if pts.len() < 4 {
        let verdict = Feasibility::Feasible;
        return Ok(SplitReport {
            verdict,
            s: None,
            residual: None,
            roots,
        });
    }
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|&(k, _)| vec![1.0, k as f64, ln_factorial(k as u32)])
        .collect();
    let y: Vec<f64> = pts.iter().map(|&(_, l)| l).collect();
    let (coef, rms, _) = least_squares(&rows, &y).ok_or(FitError::Underdetermined {
        points: pts.len(),
        params: 3,
    })?;
    let tail = &roots[roots.len() / 2..];
    let increasing = tail.windows(2).all(|w| w[1].1 > w[0].1);
    let verdict = if coef[2] > th.s_tol && increasing {
        Feasibility::Infeasible
    } else {
        Feasibility::Feasible
    };
    Ok(SplitReport {
        verdict,
        s: Some(coef[2]),
        residual: Some(rms),
        roots,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupleFit {
    pub couple: String,
    pub fit: GevreyFit,
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauberianVerdict {
    pub fits: Vec<CoupleFit>,
    /// Couples pairwise inequivalent and every fit within `1/k + s_tol`.
    pub applicable: bool,
    pub implication: Option<String>,
    pub radius: Option<GrowthVerdict>,
    /// `Some(false)` when convergence was forced but the radius check fails.
    pub pass: Option<bool>,
    pub diagnostics: String,
}

/// One-line reading of a monomial fit, e.g. `divergent, Gevrey ≈ 1.00 w.r.t. (1,1)`.
pub fn growth_summary(fit: &GevreyFit, alpha: &Exponent, th: &Thresholds) -> String {
    let alpha = alpha.0.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
    if fit.s >= th.s_tol {
        format!("divergent, Gevrey ≈ {:.2} w.r.t. ({alpha})", fit.s)
    } else {
        format!("no factorial growth w.r.t. ({alpha}), s ≈ {:.2}", fit.s)
    }
}

/// Summability in two inequivalent couples forces convergence. The
/// executable form: fit the growth along every couple; if all are within
/// the summable range, the series must look convergent.
pub fn tauberian_verdict(
    f: &MultiSeries,
    couples: &[Couple],
    window: Window,
    th: &Thresholds,
) -> Result<TauberianVerdict, FitError> {
    let mut fits = Vec::with_capacity(couples.len());
    let mut within = true;
    for c in couples {
        let fit = fit_monomial_gevrey(f, c.alpha(), window)?;
        let bound = 1.0 / crate::decompose::rational_to_f64(c.k());
        let summary = growth_summary(&fit, c.alpha(), th);
        within &= fit.s <= bound + th.s_tol;
        fits.push(CoupleFit {
            couple: c.to_string(),
            fit,
            summary,
        });
    }
    let mut inequivalent = couples.len() >= 2;
    for (i, a) in couples.iter().enumerate() {
        for b in &couples[i + 1..] {
            inequivalent &= !couple_equiv(a, b).unwrap_or(true);
        }
    }
    if !(inequivalent && within) {
        let diagnostics = if !inequivalent {
            "not applicable: need at least two pairwise inequivalent couples".to_string()
        } else {
            "not applicable: growth exceeds 1/k along some couple".to_string()
        };
        return Ok(TauberianVerdict {
            fits,
            applicable: false,
            implication: None,
            radius: None,
            pass: None,
            diagnostics,
        });
    }
    let radius = radius_estimate(f, th);
    let pass = matches!(radius.kind, VerdictKind::Convergent);
    Ok(TauberianVerdict {
        fits,
        applicable: true,
        implication: Some("forced convergent; check radius".into()),
        diagnostics: format!("radius check {}: {}", if pass { "PASS" } else { "FAIL" }, radius.kind),
        radius: Some(radius),
        pass: Some(pass),
    })
}
