use std::error::Error;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use germsum::borel::{formal_borel, laplace_sum, optimal_truncation, parse_points, ContinuationHandle, OneVarSeries};
use germsum::decompose::{t_alpha, t_p_ell, Base, Decomposition, LinearForm};
use germsum::expr::{infer_dim, parse_germ, parse_polynomial};
use germsum::gauss::{format_rational, parse_rational};
use germsum::geometry::{couple_compare, couple_equiv, order_couples, Couple};
use germsum::gevrey::{fit_monomial_gevrey, growth_summary, monomial_shells, radius_estimate, tauberian_verdict};
use germsum::io::{read_series, series_to_value};
use germsum::mseries::euler_compose;
use germsum::operators::{build_l, homogeneous_check, two_euler_residual};
use germsum::pipeline::{t_p_ell_deepest, verify_euler};
use germsum::{Config, Exponent, Germ, MultiSeries, Window};
use serde_json::{json, Map, Value};

use crate::{Command, Settings, Source};

type Res<T> = Result<T, Box<dyn Error>>;

pub struct Outcome {
    pub json: Value,
    /// `Some(false)` turns into exit status 1.
    pub pass: Option<bool>,
}

fn done(json: Value) -> Res<Outcome> {
    Ok(Outcome { json, pass: None })
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn read_series_file(path: &Path) -> Res<MultiSeries> {
    read_series(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn config(s: &Settings) -> Res<Config> {
    let mut c = match &s.config {
        Some(p) => Config::from_toml(&read(p)?)?,
        None => Config::default(),
    };
    if let Some(v) = s.cap {
        c.default_cap = v;
    }
    if let Some(w) = &s.window {
        c.fit_window = Window::parse(w)?;
    }
    if let Some(v) = s.s_tol {
        c.verdict_thresholds.s_tol = v;
    }
    if let Some(v) = s.residual_tol {
        c.verdict_thresholds.residual_tol = v;
    }
    if let Some(v) = s.quadrature_tol {
        c.quadrature_tol = v;
    }
    c.validate()?;
    Ok(c)
}

fn germ_from_expr(src: &str, s: &Settings, cap: u32) -> Res<Germ> {
    Ok(parse_germ(src, s.dim.unwrap_or_else(|| infer_dim(src)), cap)?)
}

fn load(src: &Source, s: &Settings, c: &Config) -> Res<MultiSeries> {
    if let Some(path) = &src.series_file {
        let f = read_series_file(path)?;
        return match s.cap {
            Some(cap) if cap > f.cap() => Err(format!(
                "cap mismatch: {} is truncated at {}, --cap asks for {cap}",
                path.display(),
                f.cap()
            )
            .into()),
            Some(cap) => Ok(f.with_cap(cap)),
            None => Ok(f),
        };
    }
    if let Some(e) = &src.expr {
        return Ok(parse_polynomial(
            e,
            s.dim.unwrap_or_else(|| infer_dim(e)),
            c.default_cap,
        )?);
    }
    let e = src.euler.as_deref().expect("clap enforces one source");
    Ok(euler_compose(&germ_from_expr(e, s, c.default_cap)?)?)
}

fn parse_alpha(s: &str, dim: usize) -> Res<Exponent> {
    let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
    let v = inner
        .split(',')
        .map(|x| x.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| format!("alpha `{s}`: expected comma-separated naturals"))?;
    if v.len() != dim {
        return Err(format!("alpha `{s}` has {} entries, series has dimension {dim}", v.len()).into());
    }
    Ok(Exponent(v))
}

fn write_plot(path: &Path, rows: &[(f64, f64, f64)]) -> Res<()> {
    let mut out = String::from("x,value,bound\n");
    for (x, v, b) in rows {
        writeln!(out, "{x:e},{v:e},{b:e}").expect("string write");
    }
    fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn decomposition_json(f: &MultiSeries, dec: &Decomposition) -> Value {
    let base = match &dec.base {
        Base::Monomial(a) => json!({"alpha": a.0}),
        Base::Germ { germ, ell } => json!({
            "germ": series_to_value(germ.series()),
            "ell": ell.weights().iter().map(format_rational).collect::<Vec<_>>(),
        }),
    };
    json!({
        "cap": f.cap(),
        "certified_cap": dec.certified_cap,
        "base": base,
        "components": dec.components.iter().map(series_to_value).collect::<Vec<_>>(),
        "tail": series_to_value(&dec.tail),
    })
}

pub fn run(cmd: Command) -> Res<Outcome> {
    match cmd {
        Command::Series { source, settings } => {
            let c = config(&settings)?;
            done(series_to_value(&load(&source, &settings, &c)?))
        }
        Command::Decompose {
            source,
            alpha,
            germ_file,
            germ,
            ell,
            nmax,
            settings,
        } => {
            let c = config(&settings)?;
            let f = load(&source, &settings, &c)?;
            let dec = if let Some(a) = alpha {
                let a = parse_alpha(&a, f.dim())?;
                if a.degree() == 0 {
                    return Err("alpha must be nonzero".into());
                }
                t_alpha(&f, &a, nmax.unwrap_or((f.cap() / a.degree()) as usize + 1))?
            } else {
                let p = match (germ_file, germ) {
                    (Some(path), _) => Germ::polynomial(read_series_file(&path)?)?,
                    (None, Some(e)) => germ_from_expr(&e, &settings, f.cap())?,
                    (None, None) => return Err("decompose needs --alpha, --germ-file or --germ".into()),
                };
                let ell = match ell {
                    Some(w) => LinearForm::parse(&w)?,
                    None => LinearForm::graded(f.dim(), f.cap()),
                };
                match nmax {
                    Some(n) => t_p_ell(&f, &p, &ell, n)?,
                    None => t_p_ell_deepest(&f, &p, &ell)?,
                }
            };
            done(decomposition_json(&f, &dec))
        }
        Command::Gevrey {
            source,
            alpha,
            radius,
            emit_plot_data,
            settings,
        } => {
            let c = config(&settings)?;
            let f = load(&source, &settings, &c)?;
            if alpha.is_none() && !radius {
                return Err("gevrey needs --alpha and/or --radius".into());
            }
            let mut out = Map::new();
            out.insert("cap".into(), json!(f.cap()));
            out.insert("window".into(), json!(c.fit_window.to_string()));
            if let Some(a) = alpha {
                let a = parse_alpha(&a, f.dim())?;
                let fit = fit_monomial_gevrey(&f, &a, c.fit_window)?;
                if let Some(path) = &emit_plot_data {
                    let rows: Vec<(f64, f64, f64)> = monomial_shells(&f, &a)?
                        .into_iter()
                        .filter(|(n, _, _)| c.fit_window.contains(*n))
                        .map(|(n, y, m)| (n as f64, y, fit.log_c + n as f64 * fit.log_a + fit.s * m))
                        .collect();
                    write_plot(path, &rows)?;
                }
                out.insert("summary".into(), json!(growth_summary(&fit, &a, &c.verdict_thresholds)));
                out.insert("fit".into(), serde_json::to_value(&fit)?);
            }
            if radius {
                out.insert(
                    "radius".into(),
                    serde_json::to_value(radius_estimate(&f, &c.verdict_thresholds))?,
                );
            }
            done(Value::Object(out))
        }
        Command::Monomialize { couples } => {
            let text = read(&couples)?;
            let cs = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(Couple::parse)
                .collect::<Result<Vec<_>, _>>()?;
            let o = order_couples(&cs)?;
            let corrections: Vec<Value> = o
                .corrections
                .iter()
                .map(|k| {
                    json!({
                        "pair": [k.pair.0, k.pair.1],
                        "raise": k.raise + 1,
                        "by": k.by + 1,
                        "bound": format_rational(&k.bound),
                        "repetitions": k.repetitions,
                    })
                })
                .collect();
            done(json!({
                "word": o.map.to_string(),
                "order": o.order,
                "images": o.images.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "corrections": corrections,
            }))
        }
        Command::Equiv { a, b } => {
            let (a, b) = (Couple::parse(&a)?, Couple::parse(&b)?);
            done(json!({"equivalent": couple_equiv(&a, &b)?, "order": couple_compare(&a, &b)?}))
        }
        Command::BorelSum {
            series_file,
            builtin,
            alpha,
            k,
            theta,
            points,
            pade,
            emit_plot_data,
            settings,
        } => {
            let c = config(&settings)?;
            let k = parse_rational(&k)?;
            let xs = parse_points(&points)?;
            let (one, handle, source, cap) = match builtin.as_deref() {
                Some("euler") => {
                    let cap = c.default_cap;
                    (
                        OneVarSeries::euler(cap as usize),
                        ContinuationHandle::closed_form("log1p")?,
                        "euler".to_string(),
                        cap,
                    )
                }
                Some(other) => return Err(format!("unknown builtin `{other}` (available: euler)").into()),
                None => {
                    let path = series_file.expect("clap enforces a source");
                    let f = read_series_file(&path)?;
                    let alpha = match alpha {
                        Some(a) => parse_alpha(&a, f.dim())?,
                        None if f.dim() == 1 => Exponent(vec![1]),
                        None => return Err("--alpha is required for series of dimension > 1".into()),
                    };
                    let one = OneVarSeries::from_ray(&f, &alpha);
                    let b = formal_borel(&one, &k)?;
                    let m = pade.unwrap_or(one.len().saturating_sub(1) / 2).max(1);
                    let handle = ContinuationHandle::pade(&b, m)?;
                    (one, handle, format!("pade[{m}/{m}]"), f.cap())
                }
            };
            let report = laplace_sum(&handle, &k, theta, &xs, c.quadrature_tol)?;
            let truncation: Vec<Value> = report
                .samples
                .iter()
                .map(|s| optimal_truncation(&one, s.x()).map_or(Value::Null, |t| json!(t)))
                .collect();
            if let Some(path) = &emit_plot_data {
                let rows: Vec<(f64, f64, f64)> = report
                    .samples
                    .iter()
                    .map(|s| (s.x[0], s.value[0], s.est_error))
                    .collect();
                write_plot(path, &rows)?;
            }
            done(json!({
                "cap": cap,
                "k": report.k,
                "theta": report.theta,
                "continuation": source,
                "pole_arguments": handle.pole_arguments(),
                "samples": report.samples,
                "truncation": truncation,
            }))
        }
        Command::VerifyEuler {
            builtin,
            emit_plot_data,
            settings,
        } => {
            let c = config(&settings)?;
            let p = germ_from_expr(&builtin, &settings, c.default_cap)?;
            let cap = c.default_cap.max(p.cap());
            let r = verify_euler(&p, cap, c.quadrature_tol.min(1e-12), &c.verdict_thresholds)?;
            if let Some(path) = &emit_plot_data {
                let rm = &r.remainder;
                let rows: Vec<(f64, f64, f64)> = rm
                    .points
                    .iter()
                    .map(|&(n, v)| (n as f64, v, rm.log_c + n as f64 * rm.log_b))
                    .collect();
                write_plot(path, &rows)?;
            }
            let mut out = serde_json::to_value(&r)?;
            out["window"] = json!(r.remainder.window);
            out["verdict"] = json!(verdict(r.pass));
            Ok(Outcome {
                json: out,
                pass: Some(r.pass),
            })
        }
        Command::VerifyOperator {
            p_file,
            q_file,
            p,
            q,
            axis,
            settings,
        } => {
            let c = config(&settings)?;
            let dim = settings.dim.unwrap_or_else(|| {
                [&p, &q]
                    .iter()
                    .filter_map(|e| e.as_deref())
                    .map(infer_dim)
                    .max()
                    .unwrap_or(1)
            });
            let pinned = Settings {
                dim: Some(dim),
                ..settings.clone()
            };
            let germ = |file: Option<std::path::PathBuf>, expr: Option<String>| -> Res<Germ> {
                match (file, expr) {
                    (Some(path), _) => Ok(Germ::polynomial(read_series_file(&path)?)?),
                    (None, Some(e)) => germ_from_expr(&e, &pinned, 1),
                    (None, None) => Err("missing germ".into()),
                }
            };
            let (pg, qg) = (germ(p_file, p)?, germ(q_file, q)?);
            if axis == 0 || axis > pg.dim() {
                return Err(format!("--axis {axis} out of range 1..={}", pg.dim()).into());
            }
            let cap = c.default_cap;
            let built = build_l(&pg, &qg, axis - 1)?;
            let residual = two_euler_residual(&pg, &qg, &built, cap)?;
            let homogeneous = match homogeneous_check(&pg, &qg, &built, cap) {
                Ok((n, ok)) => json!({"order": n, "pass": ok}),
                Err(e) => json!({"skipped": e.to_string()}),
            };
            let pass = residual.is_zero();
            Ok(Outcome {
                json: json!({
                    "cap": cap,
                    "certified_cap": residual.cap(),
                    "work_cap": built.work_cap,
                    "axis": axis,
                    "A": series_to_value(&built.a),
                    "B": series_to_value(&built.b),
                    "C": series_to_value(&built.c),
                    "rhs": series_to_value(&built.rhs),
                    "residual_terms": residual.len(),
                    "homogeneous": homogeneous,
                    "verdict": verdict(pass),
                }),
                pass: Some(pass),
            })
        }
        Command::TauberianVerdict {
            source,
            couples,
            settings,
        } => {
            let c = config(&settings)?;
            let f = load(&source, &settings, &c)?;
            let cs = couples
                .iter()
                .map(|s| Couple::parse(s))
                .collect::<Result<Vec<_>, _>>()?;
            let v = tauberian_verdict(&f, &cs, c.fit_window, &c.verdict_thresholds)?;
            let mut out = serde_json::to_value(&v)?;
            out["cap"] = json!(f.cap());
            out["window"] = json!(c.fit_window.to_string());
            if let Some(p) = v.pass {
                out["verdict"] = json!(verdict(p));
            }
            Ok(Outcome {
                json: out,
                pass: v.pass,
            })
        }
    }
}
