//! End-to-end checks that chain several modules.

use num_complex::Complex64;
use serde::Serialize;

use crate::borel::{
    euler_ode_residuals, eval_series, remainder_check, sample_euler, Certification, OdeResidual, RemainderReport,
};
use crate::decompose::{t_alpha, t_p_ell, Decomposition, LinearForm};
use crate::error::{BorelError, DecomposeError};
use crate::gevrey::Thresholds;
use crate::mseries::{euler_compose, Exponent, Germ, MultiSeries};
use crate::operators::euler_system_check;

/// Points of the positive axis where the Euler ODE residual is checked.
pub const ODE_GRID: [f64; 3] = [0.05, 0.1, 0.2];
pub const ODE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct EulerCheck {
    pub germ: String,
    pub cap: u32,
    pub certified_cap: u32,
    /// Per axis (1-based): does `Ê(P)` solve `L_{P,j} y = ∂_j P · P`?
    pub system: Vec<(usize, bool)>,
    pub ode: Vec<OdeResidual>,
    pub ode_pass: bool,
    pub remainder: RemainderReport,
    pub pass: bool,
}

/// Points `x` with `P(x)` in the right half plane and `|P(x)|` spread over
/// `[1e-3, 1e-1]`, searched along a few fixed real directions.
pub fn euler_sample_points(p: &Germ, count: usize) -> Vec<Vec<Complex64>> {
    let d = p.dim();
    let directions: [Vec<f64>; 3] = [
        vec![1.0; d],
        (0..d).map(|j| (j + 1) as f64).collect(),
        (0..d).map(|j| 1.0 / (j + 1) as f64).collect(),
    ];
    let mut best = Vec::new();
    for dir in &directions {
        let found: Vec<(f64, Vec<Complex64>)> = (0..400)
            .filter_map(|i| {
                let r = 10f64.powf(-4.0 + 4.0 * i as f64 / 399.0);
                let x: Vec<Complex64> = dir.iter().map(|&v| Complex64::new(r * v, 0.0)).collect();
                let t = eval_series(p.series(), &x);
                (t.re > 0.0 && t.arg().abs() < 0.25 && (1e-3..=1e-1).contains(&t.norm())).then(|| (t.norm().ln(), x))
            })
            .collect();
        if found.len() >= count {
            let (lo, hi) = (found[0].0, found[found.len() - 1].0);
            best = (0..count)
                .map(|i| {
                    let target = lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64;
                    let pick = found
                        .iter()
                        .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
                        .expect("nonempty");
                    pick.1.clone()
                })
                .collect();
            best.dedup();
            break;
        }
        if found.len() > best.len() {
            best = found.into_iter().map(|f| f.1).collect();
        }
    }
    best
}

/// [`t_p_ell`] with the most components the truncation supports.
pub fn t_p_ell_deepest(f: &MultiSeries, p: &Germ, ell: &LinearForm) -> Result<Decomposition, DecomposeError> {
    let top = (f.cap() / p.series().min_degree().unwrap_or(1).max(1)) as usize + 1;
    let mut attempt = t_p_ell(f, p, ell, top);
    for n in (1..top).rev() {
        if attempt.is_ok() {
            break;
        }
        attempt = t_p_ell(f, p, ell, n);
    }
    attempt
}

/// The Euler operator identity on every axis, the ODE residual of the
/// Borel sum, and the Gevrey-1 remainder bound for `Ê(P)` at `cap`.
pub fn verify_euler(p: &Germ, cap: u32, tol: f64, th: &Thresholds) -> Result<EulerCheck, BorelError> {
    let p = p.with_cap(cap).map_err(|e| BorelError::NonFinite(e.to_string()))?;
    let mut system = Vec::new();
    for axis in 0..p.dim() {
        let ok = euler_system_check(&p, axis, cap).map_err(|e| BorelError::NonFinite(e.to_string()))?;
        system.push((axis + 1, ok));
    }
    let ode = euler_ode_residuals(&ODE_GRID, tol)?;
    let ode_pass = ode.iter().all(|r| r.residual < ODE_TOL);

    let f = euler_compose(&p).map_err(|e| BorelError::NonFinite(e.to_string()))?;
    let terms: Vec<(&Exponent, _)> = p.series().terms().collect();
    let dec = if let [(alpha, _)] = terms.as_slice() {
        t_alpha(&f, alpha, (cap / alpha.degree()) as usize + 1)
    } else {
        t_p_ell_deepest(&f, &p, &LinearForm::graded(p.dim(), cap))
    }
    .map_err(|e| BorelError::InsufficientSamples(e.to_string()))?;
    let hi = dec.components.len().min(12);
    let points = euler_sample_points(&p, 12);
    let samples = sample_euler(&p, &points, tol)?;
    let remainder = remainder_check(&samples, &dec, &p, 1.0, (3.min(hi), hi), th)?;

    let pass = system.iter().all(|s| s.1) && ode_pass && remainder.verdict == Certification::Certified;
    Ok(EulerCheck {
        germ: p.series().to_string(),
        cap,
        certified_cap: dec.certified_cap,
        system,
        ode,
        ode_pass,
        remainder,
        pass,
    })
}
