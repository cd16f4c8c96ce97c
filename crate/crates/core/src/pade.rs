//! Padé approximants of complex power series.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct Pade {
    /// Numerator coefficients, lowest degree first.
    pub num: Vec<Complex64>,
    /// Denominator coefficients with `den[0] = 1`.
    pub den: Vec<Complex64>,
}

impl Pade {
    /// `[m/n]` approximant from the first `m + n + 1` coefficients.
    pub fn new(c: &[Complex64], m: usize, n: usize) -> Option<Self> {
        if c.len() < m + n + 1 {
            return None;
        }
        let at = |i: isize| if i < 0 { Complex64::new(0.0, 0.0) } else { c[i as usize] };
        let mut den = vec![Complex64::new(1.0, 0.0)];
        if n > 0 {
            // Σ_{j=1..n} q_j c_{m+i-j} = -c_{m+i}, i = 1..n
            let a = DMatrix::from_fn(n, n, |i, j| at(m as isize + i as isize + 1 - (j as isize + 1)));
            let b = DVector::from_fn(n, |i, _| -at((m + i + 1) as isize));
            let q = a.lu().solve(&b)?;
            den.extend(q.iter().copied());
        }
        let num = (0..=m)
            .map(|i| (0..=i.min(n)).map(|j| den[j] * c[i - j]).sum())
            .collect();
        Some(Self { num, den })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.num, z) / horner(&self.den, z)
    }

    /// Roots of the denominator (Durand–Kerner). Diagnostic only.
    pub fn poles(&self) -> Vec<Complex64> {
        let mut d = self.den.clone();
        while d.len() > 1 && d.last().is_some_and(|c| c.norm() < 1e-300) {
            d.pop();
        }
        roots(&d)
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Roots of `Σ c_i z^i`, lowest degree first.
pub fn roots(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|&a| a / lead).collect();
    let seed = Complex64::new(0.4, 0.9);
    let radius = 1.0 + monic[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * radius).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = horner(&monic, z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn reproduces_rational_function() {
        // 1/(1 - z)
        let p = Pade::new(&re(&[1.0, 1.0, 1.0, 1.0, 1.0]), 1, 1).unwrap();
        let z = Complex64::new(0.3, 0.2);
        assert!((p.eval(z) - 1.0 / (1.0 - z)).norm() < 1e-12);
        let poles = p.poles();
        assert_eq!(poles.len(), 1);
        assert!((poles[0] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn log1p_approximant() {
        let c: Vec<Complex64> = (0..21)
            .map(|n| if n == 0 { 0.0 } else { (-1f64).powi(n - 1) / n as f64 })
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        let p = Pade::new(&c, 10, 10).unwrap();
        let z = Complex64::new(2.0, 0.0);
        assert!((p.eval(z) - (1.0 + z).ln()).norm() < 1e-8);
        assert!(p.poles().iter().all(|z| z.re < -0.99));
    }

    #[test]
    fn quadratic_roots() {
        let mut r = roots(&re(&[2.0, -3.0, 1.0]));
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] - 1.0).norm() < 1e-12 && (r[1] - 2.0).norm() < 1e-12);
    }
}
