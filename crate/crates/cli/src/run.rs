use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use per1_core::adelic::{adelic_report, canonical_height, gamma_v, global_gamma_sum, Place};
use per1_core::algebra::{
    capacity_closed_form, capacity_resultant_limit, capacity_resultant_limit_float, Lambda,
};
use per1_core::dynamics::{Sign, C64};
use per1_core::measure::{
    bifurcation_mask, measure_density, overlay, render_bifurcation, write_gray_png, RenderOptions, Resolution,
    Window,
};
use per1_core::pcf::{build_pcf_equation, solve_all_roots};
use serde_json::{json, Value};

use crate::config::{CapacityChoice, OutputFormat, RenderKind, RunConfig, SignChoice, Task};
use crate::error::CliError;
use crate::verify::run_checks;

/// Result of a run: the JSON report, whether every check passed, and an
/// optional replacement for the JSON on stdout (CSV output).
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub ok: bool,
    pub text: Option<String>,
}

pub fn suffixed(stem: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = stem.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn rational(l: &Lambda, what: &str) -> Result<BigRational, CliError> {
    l.exact()
        .and_then(|q| q.to_rational())
        .ok_or_else(|| CliError::usage(format!("{what} must be a rational number such as 3 or 3/2, got {l}")))
}

fn sign_tag(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

/// Run a configuration on a pool of `config.threads` workers.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let mut outcome = pool.install(|| dispatch(config))?;
    if let Some(stem) = &config.out {
        std::fs::write(suffixed(stem, ".config.json"), config.to_json())?;
    }
    if let Value::Object(map) = &mut outcome.report {
        map.insert("config".into(), serde_json::to_value(config).expect("config serialises"));
    }
    Ok(outcome)
}

fn dispatch(config: &RunConfig) -> Result<Outcome, CliError> {
    let done = |report: Value| Ok(Outcome { report, ok: true, text: None });
    let tol = config.tol;
    match &config.task {
        Task::Render { lambda, window, resolution, sign, kind } => {
            let stem = config.out.clone().unwrap_or_else(|| PathBuf::from("per1-render"));
            match kind {
                RenderKind::Locus => done(render_locus(lambda.to_c64(), *window, *resolution, *sign, &stem)?),
                RenderKind::Density => done(render_density(lambda.to_c64(), *window, *resolution, *sign, tol, &stem)?),
            }
        }
        Task::Pcf { lambda, n, m, sign, format } => {
            let eq = build_pcf_equation(lambda, *n, *m, *sign)?;
            let roots = solve_all_roots(&eq)?;
            if let Some(stem) = &config.out {
                roots.write_csv(BufWriter::new(File::create(suffixed(stem, ".csv"))?))?;
                std::fs::write(suffixed(stem, ".json"), roots.to_json()?)?;
            }
            let text = match format {
                OutputFormat::Json => None,
                OutputFormat::Csv => {
                    let mut buf = Vec::new();
                    roots.write_csv(&mut buf)?;
                    Some(String::from_utf8(buf).expect("csv is utf-8"))
                }
            };
            let report = json!({
                "degree": eq.degree(),
                "zero_root_multiplicity": eq.zero_root_multiplicity(),
                "distinct_roots": roots.roots.len(),
                "max_residual": roots.max_residual,
                "verified": roots.verified,
                "roots": roots,
            });
            Ok(Outcome { report, ok: true, text })
        }
        Task::Verify { checks, lambda, inject_fault } => {
            let results = run_checks(checks, lambda.as_ref(), tol, config.seed, *inject_fault)?;
            let ok = results.iter().all(|c| c.passed);
            Ok(Outcome { report: json!({ "passed": ok, "checks": results }), ok, text: None })
        }
        Task::Heights { lambda, t, sign, terms } => {
            let (l, t) = (rational(lambda, "lambda")?, rational(t, "t")?);
            let h = canonical_height(&l, &t, *sign, tol)?;
            let report = adelic_report(&l, &t, *sign, tol, *terms, 64)?;
            done(json!({ "height": h.value, "tail": h.tail, "status": h.status, "report": report }))
        }
        Task::Gamma { lambda, places, terms } => {
            let l = rational(lambda, "lambda")?;
            let places: Vec<Place> = places
                .iter()
                .map(|p| p.parse::<Place>().map_err(|e| CliError::usage(format!("--places: {e}"))))
                .collect::<Result<_, _>>()?;
            let local = places.iter().map(|v| gamma_v(&l, v, tol)).collect::<Result<Vec<_>, _>>()?;
            let listed: f64 = local.iter().map(|g| g.value).sum();
            let global = global_gamma_sum(&l, *terms)?;
            done(json!({ "places": local, "listed_sum": listed, "global": global }))
        }
        Task::Capacity { lambda, mode, n, n_max } => {
            let closed = match mode {
                CapacityChoice::Resultant => None,
                _ => Some(capacity_closed_form(lambda.to_c64(), tol)?),
            };
            let limit = match (mode, lambda) {
                (CapacityChoice::ClosedForm, _) => None,
                (_, Lambda::Exact(q)) => Some(capacity_resultant_limit(q, *n, *n_max)?),
                (_, Lambda::Float(z)) => Some(capacity_resultant_limit_float(*z, *n, *n_max)?),
            };
            let gap = match (&closed, &limit) {
                (Some(a), Some(b)) => Some((a.log_capacity - b.log_capacity).abs()),
                _ => None,
            };
            done(json!({ "closed_form": closed, "resultant_limit": limit, "log_gap": gap }))
        }
    }
}

fn render_locus(lambda: C64, window: Window, res: Resolution, sign: SignChoice, stem: &Path) -> Result<Value, CliError> {
    let opts = RenderOptions::default();
    let signs = sign.signs();
    let renders = signs
        .iter()
        .map(|&s| render_bifurcation(lambda, window, res, s, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut files = Vec::new();
    let mut images = Vec::new();
    for (s, r) in signs.iter().zip(&renders) {
        let stem = if signs.len() == 1 { stem.to_path_buf() } else { suffixed(stem, &format!(".{}", sign_tag(*s))) };
        r.write(&stem)?;
        files.push(suffixed(&stem, ".png"));
        files.push(suffixed(&stem, ".json"));
        images.push(json!({
            "sign": s,
            "masked_cells": r.mask.iter().filter(|m| **m).count(),
            "undetected_cells": r.rate.flagged.len(),
        }));
    }
    let mut report = json!({ "images": images });
    if let [a, b] = &renders[..] {
        let path = suffixed(stem, ".overlay.png");
        write_gray_png(&path, res, &overlay(a, b)?)?;
        files.push(path);
        let both: Vec<Value> = bifurcation_mask(a, b)
            .into_iter()
            .map(|k| {
                let z = a.rate.point(k % res.nx, k / res.nx);
                json!([z.re, z.im])
            })
            .collect();
        report["overlap_cells"] = json!(both.len());
        report["overlap_points"] = Value::Array(both);
    }
    report["files"] = json!(files);
    Ok(report)
}

fn render_density(
    lambda: C64,
    window: Window,
    res: Resolution,
    sign: SignChoice,
    tol: f64,
    stem: &Path,
) -> Result<Value, CliError> {
    let signs = sign.signs();
    let mut fields = Vec::new();
    let mut files = Vec::new();
    for s in &signs {
        let d = measure_density(lambda, window, res, *s, tol)?;
        let path = if signs.len() == 1 { suffixed(stem, ".csv") } else { suffixed(stem, &format!(".{}.csv", sign_tag(*s))) };
        let mut text = String::from("re,im,density\n");
        let g = &d.density;
        for j in 0..g.resolution.ny {
            for i in 0..g.resolution.nx {
                let z = g.point(i, j);
                text.push_str(&format!("{:?},{:?},{:?}\n", z.re, z.im, g.get(i, j)));
            }
        }
        std::fs::write(&path, text)?;
        files.push(path);
        fields.push(json!({ "sign": s, "mass": d.mass, "negative_cells": d.negative_cells, "tol": d.tol }));
    }
    Ok(json!({ "fields": fields, "files": files }))
}
