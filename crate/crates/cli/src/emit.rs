use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use blockcg::bounds::{BoundConfig, BoundSeries};
use blockcg::experiments::RunArtifact;
use blockcg::krylov::StopReason;

pub const RESIDUALS_FILE: &str = "residuals.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const RESIDUALS_HEADER: &str = "iteration,residual_ainvF,theta_min,theta_max";
pub const BOUNDS_HEADER: &str = "j,actual,comparison,b1,b1_ls_sqrt2,b2,gamma_m,alpha";

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn bounds_file_name(cfg: &BoundConfig) -> String {
    format!("bounds_m{}_k{}_{}.csv", cfg.m, cfg.k1, cfg.k2)
}

/// One row per step `0..=iterations`. Ritz columns are empty at step 0 or when
/// extremes were not recorded.
pub fn residuals_csv(art: &RunArtifact) -> String {
    let mut out = String::new();
    out.push_str(RESIDUALS_HEADER);
    out.push('\n');
    for (m, r) in art.residual_norms().iter().enumerate() {
        let (lo, hi) = match art.ritz_extremes.get(m).copied().flatten() {
            Some((lo, hi)) => (fmt_f64(lo), fmt_f64(hi)),
            None => (String::new(), String::new()),
        };
        writeln!(out, "{m},{},{lo},{hi}", fmt_f64(*r)).unwrap();
    }
    out
}

pub fn bounds_csv(series: &BoundSeries) -> String {
    let mut out = String::new();
    out.push_str(BOUNDS_HEADER);
    out.push('\n');
    let gamma = fmt_f64(series.gamma_m);
    let alpha = fmt_f64(series.alpha.value);
    for j in 0..series.len() {
        writeln!(
            out,
            "{j},{},{},{},{},{},{gamma},{alpha}",
            fmt_f64(series.actual[j]),
            fmt_f64(series.comparison[j]),
            fmt_f64(series.b1[j]),
            fmt_f64(series.b1_ls_sqrt2[j]),
            fmt_f64(series.b2[j]),
        )
        .unwrap();
    }
    out
}

fn stop_label(stop: &StopReason) -> Value {
    match stop {
        StopReason::Converged => json!("converged"),
        StopReason::MaxSteps => json!("max_steps"),
        StopReason::Breakdown { step } => json!({ "breakdown_at_step": step }),
    }
}

/// Run metadata plus per-configuration `γ`, `α` and status. `source` describes where the
/// matrix came from.
pub fn summary_json(art: &RunArtifact, source: Value) -> Value {
    let sc = &art.scenario;
    let configs: Vec<Value> = art
        .bounds
        .iter()
        .map(|c| {
            let cfg = &c.config;
            let mut entry = json!({
                "m": cfg.m,
                "j_max": cfg.j_max,
                "k1": cfg.k1,
                "k2": cfg.k2,
            });
            let obj = entry.as_object_mut().unwrap();
            match &c.result {
                Ok(s) => {
                    obj.insert("status".into(), json!("ok"));
                    obj.insert("file".into(), json!(bounds_file_name(cfg)));
                    obj.insert("gamma_m".into(), json!(s.gamma_m));
                    obj.insert("alpha".into(), json!(s.alpha.value));
                    obj.insert("alpha_unreliable".into(), json!(s.alpha.unreliable));
                    obj.insert("alpha_max_amplification".into(), json!(s.alpha.max_amplification));
                    obj.insert("theta".into(), json!(s.theta));
                    obj.insert("well_posed".into(), json!(s.well_posed));
                    obj.insert("krylov_truncated".into(), json!(s.krylov_truncated));
                }
                Err(e) => {
                    obj.insert("status".into(), json!("error"));
                    obj.insert("error".into(), json!(e.to_string()));
                }
            }
            entry
        })
        .collect();
    let norms = art.residual_norms();
    json!({
        "tool": "blockcg",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": sc.id,
        "source": source,
        "n": sc.dim(),
        "s": sc.s,
        "tol": sc.tol,
        "max_m": sc.effective_max_m(),
        "seed": sc.seed,
        "iterations": art.iterations(),
        "stop": stop_label(&art.trace.stop),
        "converged": art.converged(),
        "initial_residual": norms.first(),
        "final_residual": norms.last(),
        "onset": art.onset,
        "max_shortcut_gap": art.trace.max_shortcut_gap,
        "configs": configs,
    })
}

fn write_file(dir: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> io::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body)?;
    written.push(path);
    Ok(())
}

/// Writes the requested artifacts into `dir`, creating it if needed. Failed configurations
/// get no bounds file; their error appears in the summary.
pub fn emit(art: &RunArtifact, source: Value, dir: &Path, csv: bool, json_out: bool) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if csv {
        write_file(dir, RESIDUALS_FILE, &residuals_csv(art), &mut written)?;
        for c in &art.bounds {
            if let Ok(series) = &c.result {
                write_file(dir, &bounds_file_name(&c.config), &bounds_csv(series), &mut written)?;
            }
        }
    }
    if json_out {
        let mut body = serde_json::to_string_pretty(&summary_json(art, source)).map_err(io::Error::other)?;
        body.push('\n');
        write_file(dir, SUMMARY_FILE, &body, &mut written)?;
    }
    Ok(written)
}
