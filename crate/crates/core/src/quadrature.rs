//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands
//! on real intervals.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

/// One GK15 panel: Kronrod value and `|K15 − G7|`. `None` if the integrand
/// returns a non-finite value.
fn panel<F>(f: &F, a: f64, b: f64) -> Option<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        k += pair * WGK[i];
        if i % 2 == 1 {
            g += pair * WG[i / 2];
        }
    }
    let (k, g) = (k * h, g * h);
    if !(k.re.is_finite() && k.im.is_finite()) {
        return None;
    }
    Some(Estimate {
        value: k,
        error: (k - g).norm(),
    })
}

/// Integrates `f` over `[a, b]`: the panel with the largest error is
/// bisected until the total error is below `abs_tol` or `max_panels` panels
/// are in use.
pub fn integrate<F>(f: &F, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Option<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let mut panels = vec![(a, b, panel(f, a, b)?)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2.error).sum();
        if total <= abs_tol || panels.len() >= max_panels.max(1) {
            break;
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].2.error.total_cmp(&panels[j].2.error))
            .expect("nonempty");
        let (lo, hi, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        panels.push((lo, mid, panel(f, lo, mid)?));
        panels.push((mid, hi, panel(f, mid, hi)?));
    }
    Some(Estimate {
        value: panels.iter().map(|p| p.2.value).sum(),
        error: panels.iter().map(|p| p.2.error).sum(),
    })
}
