//! Acceptance criteria 1–11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use germsum::borel::{
    euler_ode_residuals, laplace_sum, optimal_truncation, remainder_check, sample_euler, Certification,
    ContinuationHandle, OneVarSeries,
};
use germsum::decompose::{t_alpha, weierstrass_divide, LinearForm};
use germsum::geometry::{
    couple_compare, couple_equiv, order_couples, pullback_couple, pullback_series, CoupleOrder, Step,
};
use germsum::gevrey::{fit_monomial_gevrey, split_infeasibility, tauberian_verdict, Feasibility};
use germsum::mseries::euler_compose;
use germsum::operators::{build_l, euler_system_check, verify_two_euler};
use germsum::{Couple, Exponent, GaussRational, Germ, MonomialMap, MultiSeries, OperatorError, Thresholds, Window};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_coeff(r: &mut ChaCha8Rng) -> GaussRational {
    loop {
        let re = GaussRational::from_ratio(r.gen_range(-9..=9), r.gen_range(1..=5));
        let im = GaussRational::from_ratio(r.gen_range(-3..=3), r.gen_range(1..=4));
        let c = re + im * GaussRational::i();
        if !c.is_zero() {
            return c;
        }
    }
}

fn random_exponent(r: &mut ChaCha8Rng, dim: usize, max_degree: u32) -> Exponent {
    let target = r.gen_range(0..=max_degree);
    let mut e = vec![0u32; dim];
    for _ in 0..target {
        e[r.gen_range(0..dim)] += 1;
    }
    Exponent(e)
}

fn random_series(r: &mut ChaCha8Rng, dim: usize, cap: u32, terms: usize) -> MultiSeries {
    let mut map = BTreeMap::new();
    for _ in 0..terms {
        map.insert(random_exponent(r, dim, cap), small_coeff(r));
    }
    MultiSeries::from_terms(dim, cap, map).unwrap()
}

/// A polynomial germ: no constant term, at least one term.
fn random_germ(r: &mut ChaCha8Rng, dim: usize, max_degree: u32, max_terms: usize, max_coeff: i64, cap: u32) -> Germ {
    loop {
        let mut map = BTreeMap::new();
        for _ in 0..r.gen_range(1..=max_terms) {
            let e = random_exponent(r, dim, max_degree);
            if e.degree() > 0 {
                map.insert(e, GaussRational::from_int(r.gen_range(-max_coeff..=max_coeff)));
            }
        }
        map.retain(|_, c| !c.is_zero());
        if map.is_empty() {
            continue;
        }
        return Germ::polynomial(MultiSeries::from_terms(dim, cap, map).unwrap()).unwrap();
    }
}

fn monomial_series(terms: &[(&[u32], i64)], cap: u32) -> MultiSeries {
    let dim = terms[0].0.len();
    MultiSeries::from_terms(
        dim,
        cap,
        terms
            .iter()
            .map(|(e, c)| (Exponent(e.to_vec()), GaussRational::from_int(*c))),
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let start = Instant::now();
    let mut exact = 0;
    for _ in 0..200 {
        let dim = r.gen_range(1..=3);
        let f = random_series(&mut r, dim, 30, 40);
        let alpha = loop {
            let a = Exponent((0..dim).map(|_| r.gen_range(0..=3)).collect());
            if !a.is_zero() {
                break a;
            }
        };
        let n_max = r.gen_range(1..=(30 / alpha.degree()) as usize + 2);
        let dec = t_alpha(&f, &alpha, n_max).unwrap();
        if dec.reconstruct() == f && dec.certified_cap == 30 && dec.supports_ok() {
            exact += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        exact == 200 && secs < 10.0,
        format!("{exact}/200 exact round trips, {secs:.2} s (limit 10 s)"),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut ok = 0;
    let mut stable = 0;
    let mut monomial_runs = 0;
    let mut monomial_agree = 0;
    let mut drawn = 0;
    while drawn < 100 {
        let dim = r.gen_range(1..=3);
        let g_hi = random_series(&mut r, dim, 30, 30);
        let g = g_hi.truncate(20);
        let p = random_germ(&mut r, dim, 4, 4, 3, 30);
        let weights: Vec<BigRational> = (0..dim)
            .map(|_| BigRational::new(r.gen_range(5..=40).into(), r.gen_range(4..=9).into()))
            .collect();
        let ell = LinearForm::new(weights).unwrap();
        if ell.is_injective_on(30).is_err() {
            continue;
        }
        drawn += 1;
        let p20 = p.with_cap(20).unwrap();
        let d = weierstrass_divide(&g, &p20, &ell).unwrap();
        let c = d.remainder_cap;
        let back = &(&d.quotient.with_cap(c) * p20.series()) + &d.remainder;
        let identity = back.truncate(c) == g.truncate(c);
        let support = d.remainder.terms().all(|(e, _)| d.nu.not_le(e));
        if identity && support {
            ok += 1;
        }
        // the certified part must not move when the truncation is raised
        let wide = weierstrass_divide(&g_hi, &p, &ell).unwrap();
        let r_same = wide.remainder.truncate(c) == d.remainder.truncate(c);
        let q_same = d
            .quotient_cap
            .is_none_or(|qc| wide.quotient.truncate(qc) == d.quotient.truncate(qc));
        if r_same && q_same {
            stable += 1;
        }
    }
    for _ in 0..40 {
        let dim = r.gen_range(1..=3);
        let g = random_series(&mut r, dim, 20, 30);
        let alpha = loop {
            let a = Exponent((0..dim).map(|_| r.gen_range(0..=2)).collect());
            if !a.is_zero() {
                break a;
            }
        };
        monomial_runs += 1;
        let ell = LinearForm::graded(dim, 20);
        let n = (20 / alpha.degree()) as usize + 1;
        let dec = t_alpha(&g, &alpha, n).unwrap();
        let mut current = g.clone();
        let mut agree = true;
        for comp in &dec.components {
            let p = Germ::monomial(&alpha, current.cap().max(alpha.degree())).unwrap();
            let d = weierstrass_divide(&current, &p, &ell).unwrap();
            agree &= d.remainder.truncate(comp.cap()) == *comp;
            current = d.quotient;
            if d.quotient_cap.is_none() {
                break;
            }
        }
        if agree {
            monomial_agree += 1;
        }
    }
    outcome(
        ok == 100 && stable == 100 && monomial_agree == monomial_runs,
        format!(
            "{ok}/100 identities with remainder support off ν+N^d, {stable}/100 stable under a higher cap, \
             {monomial_agree}/{monomial_runs} monomial divisions match T_α"
        ),
    )
}

fn criterion_3() -> Outcome {
    let n = 30u32;
    let f = MultiSeries::from_terms(
        2,
        n,
        (0..=n).flat_map(|i| (0..=n - i).map(move |j| (Exponent(vec![i, j]), GaussRational::one()))),
    )
    .unwrap();
    let dec = t_alpha(&f, &Exponent(vec![1, 1]), (n / 2 + 1) as usize).unwrap();

    // brute force: x1^i x2^j sits in component min(i, j) at (i − n, j − n)
    let mut partition: BTreeMap<usize, BTreeMap<Exponent, GaussRational>> = BTreeMap::new();
    for i in 0..=n {
        for j in 0..=n - i {
            let m = i.min(j);
            partition
                .entry(m as usize)
                .or_default()
                .insert(Exponent(vec![i - m, j - m]), GaussRational::one());
        }
    }
    let closed = |cap: u32| {
        let mut t = vec![(Exponent(vec![0, 0]), GaussRational::one())];
        for d in 1..=cap {
            t.push((Exponent(vec![d, 0]), GaussRational::one()));
            t.push((Exponent(vec![0, d]), GaussRational::one()));
        }
        MultiSeries::from_terms(2, cap, t).unwrap()
    };
    let mut matches = 0;
    for (k, comp) in dec.components.iter().enumerate() {
        let brute = MultiSeries::from_terms(2, comp.cap(), partition.get(&k).cloned().unwrap_or_default()).unwrap();
        if *comp == closed(comp.cap()) && brute == *comp {
            matches += 1;
        }
    }
    let total = dec.components.len();
    outcome(
        matches == total && dec.tail.is_zero() && total == (n / 2 + 1) as usize,
        format!("{matches}/{total} components equal 1/(1−x1)+1/(1−x2)−1 and the brute-force partition"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let ks = [(1, 2), (1, 1), (2, 1)];
    let mut grid = Vec::new();
    for a in 0..=4u32 {
        for b in 0..=4u32 {
            if a + b == 0 {
                continue;
            }
            for &(p, q) in &ks {
                grid.push(Couple::from_parts(&[a, b], p, q).unwrap());
            }
        }
    }
    let (mut pairs, mut good, mut corrections, mut minimal) = (0, 0, 0, 0);
    for (x, a) in grid.iter().enumerate() {
        for b in &grid[x + 1..] {
            if couple_equiv(a, b).unwrap() {
                continue;
            }
            pairs += 1;
            let o = order_couples(&[a.clone(), b.clone()]).unwrap();
            let positive = o.images.iter().all(|c| c.alpha().0.iter().all(|&v| v > 0));
            let ordered =
                couple_compare(&o.images[o.order[0]], &o.images[o.order[1]]).unwrap() == CoupleOrder::StrictLess;
            let images_ok = o
                .images
                .iter()
                .zip([a, b])
                .all(|(img, src)| *img == pullback_couple(&o.map, src).unwrap());

            // replay: fill zero entries, then recompute every correction
            let mut word = Vec::new();
            let mut cur = vec![a.clone(), b.clone()];
            let step_all = |cur: &mut Vec<Couple>, word: &mut Vec<Step>, step: Step| {
                let single = MonomialMap::new(2, vec![step]).unwrap();
                *cur = cur.iter().map(|c| pullback_couple(&single, c).unwrap()).collect();
                word.push(step);
            };
            while let Some((j, i)) = cur.iter().find_map(|c| {
                let e = &c.alpha().0;
                Some((e.iter().position(|&x| x == 0)?, e.iter().position(|&x| x > 0)?))
            }) {
                step_all(&mut cur, &mut word, Step::Pi { i: j, j: i, n: 1 });
            }
            let mut replay_ok = true;
            for corr in &o.corrections {
                corrections += 1;
                let (lo, hi) = (cur[corr.pair.0].clone(), cur[corr.pair.1].clone());
                let (vlo, vhi) = (lo.normal_form(), hi.normal_form());
                let (m, l) = (corr.raise, corr.by);
                let bound = (&vlo[m] - &vhi[m]) / (&vhi[l] - &vlo[l]);
                let least = (bound.floor() + BigRational::one()).to_integer().to_u32().unwrap();
                let separates = |n: u32| {
                    let w = MonomialMap::new(2, vec![Step::Pi { i: m, j: l, n }]).unwrap();
                    couple_compare(&pullback_couple(&w, &lo).unwrap(), &pullback_couple(&w, &hi).unwrap())
                        .unwrap()
                        .is_strict()
                };
                let tight = separates(least) && (least == 1 || !separates(least - 1));
                if corr.repetitions == least && bound == corr.bound && tight {
                    minimal += 1;
                } else {
                    replay_ok = false;
                }
                step_all(
                    &mut cur,
                    &mut word,
                    Step::Pi {
                        i: m,
                        j: l,
                        n: corr.repetitions,
                    },
                );
            }
            let composed = MonomialMap::new(2, word).unwrap();
            replay_ok &= (0..2).all(|t| {
                let unit = Exponent::unit(2, t);
                composed.pullback_exponent(&unit) == o.map.pullback_exponent(&unit)
            });
            replay_ok &= cur == o.images;
            if positive && ordered && images_ok && replay_ok {
                good += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        good == pairs && minimal == corrections && secs < 5.0,
        format!(
            "{good}/{pairs} pairs strictly ordered with positive entries, {minimal}/{corrections} repetition \
             counts minimal, {secs:.2} s (limit 5 s)"
        ),
    )
}

fn geometric_family(cap: u32) -> Vec<(&'static str, MultiSeries)> {
    let x1 = MultiSeries::var(2, cap, 0).unwrap();
    let x2 = MultiSeries::var(2, cap, 1).unwrap();
    let one = MultiSeries::one(2, cap);
    let inv = |s: MultiSeries| s.invert_unit().unwrap();
    let half = GaussRational::from_ratio(1, 2);
    vec![
        ("1/((1−x1)(1−x2))", &inv(&one - &x1) * &inv(&one - &x2)),
        ("1/(1−x1−x2)", inv(&(&one - &x1) - &x2)),
        ("1/(1−x1x2)", inv(&one - &(&x1 * &x2))),
        (
            "1/((1−x1/2)(1−3x2))",
            &inv(&one - &x1.scale(&half)) * &inv(&one - &x2.scale(&GaussRational::from_int(3))),
        ),
    ]
}

fn criterion_5() -> Outcome {
    let alpha = Exponent(vec![1, 1]);
    let window = Window::default();
    let e = euler_compose(&Germ::monomial(&alpha, 60).unwrap()).unwrap();
    let s_euler = fit_monomial_gevrey(&e, &alpha, window).unwrap().s;
    let mut conv = Vec::new();
    for (name, f) in geometric_family(60) {
        conv.push((name, fit_monomial_gevrey(&f, &alpha, window).unwrap().s));
    }
    let conv_ok = conv.iter().all(|(_, s)| s.abs() <= 0.1);
    let mut power_dev: f64 = 0.0;
    let e12 = euler_compose(&Germ::monomial(&Exponent(vec![1, 2]), 60).unwrap()).unwrap();
    for (f, base) in [(&e, vec![1u32, 1]), (&e12, vec![1, 2])] {
        let s1 = fit_monomial_gevrey(f, &Exponent(base.clone()), window).unwrap().s;
        for n in 1..=3u32 {
            let sn = fit_monomial_gevrey(f, &Exponent(base.iter().map(|b| b * n).collect()), window)
                .unwrap()
                .s;
            power_dev = power_dev.max((sn - n as f64 * s1).abs());
        }
    }
    let listing = conv
        .iter()
        .map(|(n, s)| format!("{n}: {s:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        (0.9..=1.1).contains(&s_euler) && conv_ok && power_dev <= 0.15,
        format!("Ê(x1x2) s = {s_euler:.3}; convergent {listing}; max |s(Nα) − N·s(α)| = {power_dev:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let th = Thresholds::default();
    let window = Window::default();
    let e = euler_compose(&Germ::monomial(&Exponent(vec![1, 1]), 60).unwrap()).unwrap();
    let c11 = Couple::parse("alpha=[1,1] k=1").unwrap();
    let c12 = Couple::parse("alpha=[1,2] k=1/3").unwrap();
    let one = tauberian_verdict(&e, std::slice::from_ref(&c11), window, &th).unwrap();
    let summary = one.fits[0].summary.clone();
    let reports = summary.starts_with("divergent, Gevrey ≈ 1.") || summary.starts_with("divergent, Gevrey ≈ 0.9");
    let reports = reports && summary.ends_with("w.r.t. (1,1)");

    let two = tauberian_verdict(&e, &[c11.clone(), c12.clone()], window, &th).unwrap();
    let forced = two.implication.as_deref() == Some("forced convergent; check radius") && two.pass == Some(false);

    let geo = &geometric_family(40)[0].1;
    let conv = tauberian_verdict(geo, &[c11, c12], window, &th).unwrap();
    let conv_ok = conv.implication.is_some() && conv.pass == Some(true);

    let exit = Command::new(env!("CARGO_BIN_EXE_germsum"))
        .args(["tauberian-verdict", "--euler", "x1*x2", "--cap", "60"])
        .args(["--couple", "alpha=[1,1] k=1", "--couple", "alpha=[1,2] k=1/3"])
        .output()
        .map(|o| o.status.code())
        .ok()
        .flatten();
    outcome(
        reports && forced && conv_ok && exit == Some(1),
        format!(
            "\"{summary}\"; two couples: implication printed, radius check {} (exit code {}); convergent: radius check {}",
            if two.pass == Some(false) { "FAILS" } else { "passes" },
            exit.map_or("none".to_string(), |c| c.to_string()),
            if conv.pass == Some(true) { "PASSES" } else { "fails" },
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let th = Thresholds::default();
    let e1 = euler_compose(&Germ::monomial(&Exponent(vec![1, 0]), 60).unwrap()).unwrap();
    let e2 = euler_compose(&Germ::monomial(&Exponent(vec![0, 1]), 60).unwrap()).unwrap();
    let window = Window::new(1, Some(30));
    let prod = split_infeasibility(&(&e1 * &e2), window, &th).unwrap();
    let sum = split_infeasibility(&(&e1 + &e2), window, &th).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        prod.verdict == Feasibility::Infeasible && sum.verdict == Feasibility::Feasible && secs < 2.0,
        format!(
            "Ê(x1)·Ê(x2): {:?} (s = {:.2}), Ê(x1)+Ê(x2): {:?}, {secs:.2} s (limit 2 s)",
            prod.verdict,
            prod.s.unwrap_or(f64::NAN),
            sum.verdict
        ),
    )
}

/// `∫_0^∞ e^{−ξ/t} / (1+ξ) dξ = t ∫_0^∞ e^{−u} / (1+tu) du` by composite
/// Simpson on `[0, 60]`.
fn simpson_oracle(t: f64) -> f64 {
    let (a, b, n) = (0.0f64, 60.0f64, 60_000usize);
    let h = (b - a) / n as f64;
    let f = |u: f64| (-u).exp() / (1.0 + t * u);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    t * acc * h / 3.0
}

fn criterion_8() -> Outcome {
    let ts = [0.05, 0.1, 0.2];
    let xs: Vec<Complex64> = ts.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let g = ContinuationHandle::closed_form("log1p").unwrap();
    let rep = laplace_sum(&g, &BigRational::one(), 0.0, &xs, 1e-12).unwrap();
    let mut worst: f64 = 0.0;
    let mut trunc_ok = true;
    let euler = OneVarSeries::euler(40);
    for (s, &t) in rep.samples.iter().zip(&ts) {
        worst = worst.max((s.value[0] - simpson_oracle(t)).abs() + s.value[1].abs());
        let tr = optimal_truncation(&euler, s.x()).unwrap();
        trunc_ok &= (tr.value() - s.value()).norm() <= tr.est_error + s.est_error;
    }
    let ode = euler_ode_residuals(&[0.02, 0.05, 0.1, 0.15, 0.2, 0.3], 1e-12).unwrap();
    let ode_max = ode.iter().map(|r| r.residual).fold(0.0, f64::max);
    outcome(
        worst < 1e-8 && trunc_ok && ode_max < 1e-6,
        format!(
            "max |Laplace − quadrature| = {worst:.1e}, optimal truncation within est_errors: {trunc_ok}, \
             max ODE residual = {ode_max:.1e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let p = Germ::monomial(&Exponent(vec![1, 1]), 40).unwrap();
    let dec = t_alpha(&euler_compose(&p).unwrap(), &Exponent(vec![1, 1]), 16).unwrap();
    let pts: Vec<Vec<Complex64>> = (0..12)
        .map(|i| {
            let t = 10f64.powf(-3.0 + 2.0 * i as f64 / 11.0);
            vec![Complex64::new(t.sqrt(), 0.0); 2]
        })
        .collect();
    let smp = sample_euler(&p, &pts, 1e-13).unwrap();
    let th = Thresholds::default();
    let good = remainder_check(&smp, &dec, &p, 1.0, (3, 12), &th).unwrap();
    let bad = remainder_check(&smp, &dec, &p, 0.0, (3, 12), &th).unwrap();
    outcome(
        good.verdict == Certification::Certified && good.residual < 0.5 && bad.verdict == Certification::NotCertified,
        format!(
            "s=1: {:?} (residual {:.3}), s=0: {:?} (residual {:.2})",
            good.verdict, good.residual, bad.verdict, bad.residual
        ),
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut system_ok = true;
    for (p, cap) in [
        (monomial_series(&[(&[1, 1], 1)], 20), 20),
        (monomial_series(&[(&[2, 0], 1), (&[0, 3], 1)], 20), 20),
    ] {
        let g = Germ::polynomial(p).unwrap();
        for axis in 0..2 {
            system_ok &= euler_system_check(&g, axis, cap).unwrap_or(false);
        }
    }
    let x1 = Germ::polynomial(monomial_series(&[(&[1, 0], 1)], 16)).unwrap();
    let x2 = Germ::polynomial(monomial_series(&[(&[0, 1], 1)], 16)).unwrap();
    let model = verify_two_euler(&x1, &x2, 0, 16).unwrap_or(false);

    let mut r = rng(10);
    let (mut pairs, mut passed, mut c_equal, mut degenerate) = (0, 0, 0, 0);
    while pairs < 20 {
        let p = random_germ(&mut r, 2, 3, 3, 2, 12);
        let q = random_germ(&mut r, 2, 3, 3, 2, 12);
        let axis = r.gen_range(0..2);
        match build_l(&p, &q, axis) {
            Err(OperatorError::Degenerate) => {
                degenerate += 1;
                continue;
            }
            Err(OperatorError::InconsistentC) => pairs += 1,
            Err(_) => pairs += 1,
            Ok(_) => {
                pairs += 1;
                c_equal += 1;
                if verify_two_euler(&p, &q, axis, 12).unwrap_or(false) {
                    passed += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        system_ok && model && passed == 20 && c_equal == 20 && secs < 60.0,
        format!(
            "Euler systems: {system_ok}, P=x1 Q=x2 cap 16: {model}, random pairs {passed}/20 exact \
             ({degenerate} degenerate draws skipped), C from both sides equal {c_equal}/20, {secs:.2} s (limit 60 s)"
        ),
    )
}

fn words(max_len: usize) -> Vec<Vec<Step>> {
    let alphabet = [
        Step::Pi { i: 0, j: 1, n: 1 },
        Step::Pi { i: 1, j: 0, n: 1 },
        Step::Ram { j: 0, m: 2 },
        Step::Ram { j: 1, m: 3 },
    ];
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for s in alphabet {
                let mut v: Vec<Step> = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn criterion_11() -> Outcome {
    let mut grid = Vec::new();
    for a in 0..=2u32 {
        for b in 0..=2u32 {
            if a + b > 0 {
                for (p, q) in [(1, 2), (1, 1), (2, 1)] {
                    grid.push(Couple::from_parts(&[a, b], p, q).unwrap());
                }
            }
        }
    }
    let ws = words(3);
    let mut checks = 0usize;
    let mut preserved = 0usize;
    for w in &ws {
        let m = MonomialMap::new(2, w.clone()).unwrap();
        let images: Vec<Couple> = grid.iter().map(|c| pullback_couple(&m, c).unwrap()).collect();
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                checks += 1;
                let before = couple_compare(&grid[i], &grid[j]).unwrap();
                let after = couple_compare(&images[i], &images[j]).unwrap();
                let eq_kept =
                    couple_equiv(&grid[i], &grid[j]).unwrap() == couple_equiv(&images[i], &images[j]).unwrap();
                let order_kept = match before {
                    CoupleOrder::Incomparable => true,
                    CoupleOrder::StrictLess => after == CoupleOrder::StrictLess,
                    CoupleOrder::StrictGreater => after == CoupleOrder::StrictGreater,
                    CoupleOrder::Less => matches!(after, CoupleOrder::Less | CoupleOrder::StrictLess),
                    CoupleOrder::Greater => matches!(after, CoupleOrder::Greater | CoupleOrder::StrictGreater),
                    CoupleOrder::Equivalent => after == CoupleOrder::Equivalent,
                };
                if eq_kept && order_kept {
                    preserved += 1;
                }
            }
        }
    }
    let mut r = rng(11);
    let mut multiplicative = 0;
    for _ in 0..100 {
        let f = random_series(&mut r, 2, 8, 8);
        let g = random_series(&mut r, 2, 8, 8);
        let w = &ws[r.gen_range(0..ws.len())];
        let m = MonomialMap::new(2, w.clone()).unwrap();
        let lhs = pullback_series(&m, &(&f * &g)).unwrap();
        let rhs = &pullback_series(&m, &f).unwrap() * &pullback_series(&m, &g).unwrap();
        if lhs == rhs {
            multiplicative += 1;
        }
    }
    outcome(
        preserved == checks && multiplicative == 100,
        format!(
            "{preserved}/{checks} (pair, word) checks keep equivalence and order over {} words, \
             {multiplicative}/100 pullbacks multiplicative",
            ws.len()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "decomposition round trip", criterion_1),
        (2, "Weierstrass division", criterion_2),
        (3, "geometric closed form", criterion_3),
        (4, "couple ordering", criterion_4),
        (5, "Gevrey estimation", criterion_5),
        (6, "tauberian verdict", criterion_6),
        (7, "product infeasibility", criterion_7),
        (8, "Borel–Laplace cross-oracle", criterion_8),
        (9, "remainder certification", criterion_9),
        (10, "operator example", criterion_10),
        (11, "pullback invariance", criterion_11),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}  {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
