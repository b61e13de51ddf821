//! Human-readable summary of an artifact directory: one table row per
//! inequality check, the attractor convergence history, and a file inventory.
//! Regeneration is byte-for-byte idempotent because the summary is a pure
//! function of the artifact contents.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("artifact directory {dir} holds none of the expected files: {expected:?}")]
    Empty { dir: String, expected: Vec<String> },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

const ESTIMATE_FILES: [&str; 6] = [
    "estimates/absorbing_l2.json",
    "estimates/time_integrals.json",
    "estimates/h1_uniform.json",
    "estimates/ut_uniform.json",
    "estimates/tail_decay.json",
    "estimates/h1_cauchy.json",
];

fn expected_files() -> Vec<String> {
    let mut v = vec![
        "resolved_config.toml".to_string(),
        "structure.json".to_string(),
        "simulate/meta.json".to_string(),
        "attractor/manifest.json".to_string(),
    ];
    v.extend(ESTIMATE_FILES.iter().map(|s| s.to_string()));
    v
}

fn read_json(dir: &Path, rel: &str) -> Option<Result<Value, String>> {
    let path = dir.join(rel);
    if !path.exists() {
        return None;
    }
    Some(
        fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str(&text).map_err(|e| e.to_string())),
    )
}

fn num(v: &Value, key: &str) -> f64 {
    v.get(key).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

fn flag(v: &Value, key: &str) -> &'static str {
    match v.get(key).and_then(Value::as_bool) {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "?",
    }
}

fn inventory(dir: &Path, prefix: &Path, files: &mut Vec<String>) -> std::io::Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        let rel = prefix.join(entry.file_name());
        if path.is_dir() {
            inventory(&path, &rel, files)?;
        } else if rel != Path::new("summary.txt") {
            files.push(rel.display().to_string());
        }
    }
    Ok(())
}

/// Builds `summary.txt` in the artifact directory and returns its content.
pub fn export_report(dir: &Path) -> Result<String, ReportError> {
    let any_known = expected_files().iter().any(|rel| dir.join(rel).exists());
    if !any_known {
        return Err(ReportError::Empty {
            dir: dir.display().to_string(),
            expected: expected_files(),
        });
    }

    let mut out = String::new();
    let push_line = |s: &str, out: &mut String| {
        out.push_str(s);
        out.push('\n');
    };
    push_line("pullback-lab experiment summary", &mut out);
    push_line("===============================", &mut out);

    // Structural conditions.
    match read_json(dir, "structure.json") {
        Some(Ok(v)) => {
            push_line("", &mut out);
            push_line("structural conditions", &mut out);
            if let Some(conds) = v.get("conditions").and_then(Value::as_array) {
                for c in conds {
                    let _ = writeln!(
                        out,
                        "  {:<22} violations={:<6} worst_margin={:>13.5e}  {}",
                        c.get("condition").and_then(Value::as_str).unwrap_or("?"),
                        c.get("violations").and_then(Value::as_u64).unwrap_or(0),
                        num(c, "worst_margin"),
                        flag(c, "pass"),
                    );
                }
            }
        }
        Some(Err(e)) => push_line(&format!("structure.json: unreadable ({e})"), &mut out),
        None => {}
    }

    // Simulation residual audit.
    match read_json(dir, "simulate/meta.json") {
        Some(Ok(v)) => {
            push_line("", &mut out);
            let _ = writeln!(
                out,
                "simulation: steps={} residual_violations={} endpoint_l2_sq={:.5e}",
                v.get("steps").and_then(Value::as_u64).unwrap_or(0),
                v.get("residual_violations")
                    .and_then(Value::as_u64)
                    .unwrap_or(0),
                num(&v, "endpoint_l2_sq"),
            );
        }
        Some(Err(e)) => push_line(&format!("simulate/meta.json: unreadable ({e})"), &mut out),
        None => {}
    }

    // Inequality checkers: one row per bound-versus-observation entry.
    let mut wrote_header = false;
    for rel in ESTIMATE_FILES {
        match read_json(dir, rel) {
            Some(Ok(v)) => {
                if !wrote_header {
                    push_line("", &mut out);
                    push_line("inequality checks (bound vs observed)", &mut out);
                    let _ = writeln!(
                        out,
                        "  {:<14} {:<24} {:>8} {:>8} {:>13} {:>13} {:>13}  verdict",
                        "check", "quantity", "horizon", "radius", "bound", "observed", "margin",
                    );
                    wrote_header = true;
                }
                let check = v.get("check").and_then(Value::as_str).unwrap_or("?");
                if let Some(entries) = v.get("entries").and_then(Value::as_array) {
                    for e in entries {
                        let radius = e
                            .get("radius")
                            .and_then(Value::as_f64)
                            .map(|r| format!("{r:.3}"))
                            .unwrap_or_else(|| "-".into());
                        let verdict = if e.get("guard").map(|g| !g.is_null()).unwrap_or(false) {
                            "guard"
                        } else {
                            flag(e, "pass")
                        };
                        let _ = writeln!(
                            out,
                            "  {:<14} {:<24} {:>8.3} {:>8} {:>13.5e} {:>13.5e} {:>13.5e}  {}",
                            check,
                            e.get("label").and_then(Value::as_str).unwrap_or("?"),
                            num(e, "horizon"),
                            radius,
                            num(e, "bound"),
                            num(e, "observed"),
                            num(e, "margin"),
                            verdict,
                        );
                    }
                }
                let mut tail_info = String::new();
                if let Some(k) = v.get("empirical_radius").and_then(Value::as_f64) {
                    let _ = write!(
                        tail_info,
                        "  empirical radius K={k:.4}, horizon T={:.3}",
                        num(&v, "empirical_horizon")
                    );
                }
                let _ = writeln!(
                    out,
                    "  -> {check}: {}{}",
                    flag(&v, "pass"),
                    tail_info
                );
            }
            Some(Err(e)) => push_line(&format!("{rel}: unreadable ({e})"), &mut out),
            None => {}
        }
    }

    // Attractor approximation and its diagnostics.
    match read_json(dir, "attractor/manifest.json") {
        Some(Ok(v)) => {
            push_line("", &mut out);
            let _ = writeln!(
                out,
                "attractor: converged={} horizon={:.3} diameter={:.5e} ensemble={} seed={}",
                v.get("converged").and_then(Value::as_bool).unwrap_or(false),
                num(&v, "horizon"),
                num(&v, "diameter"),
                v.get("ensemble").and_then(Value::as_u64).unwrap_or(0),
                v.get("seed").and_then(Value::as_u64).unwrap_or(0),
            );
            if let Some(history) = v.get("history").and_then(Value::as_array) {
                for step in history {
                    let _ = writeln!(
                        out,
                        "  ladder horizon {:>8.3}: hausdorff gap {:>13.5e}",
                        num(step, "horizon"),
                        num(step, "gap")
                    );
                }
            }
        }
        Some(Err(e)) => push_line(&format!("attractor/manifest.json: unreadable ({e})"), &mut out),
        None => {}
    }
    match read_json(dir, "attractor/invariance.json") {
        Some(Ok(v)) => {
            let _ = writeln!(
                out,
                "invariance: forward={:.5e} backward={:.5e} threshold={:.5e}  {}",
                num(&v, "distance_forward"),
                num(&v, "distance_backward"),
                num(&v, "threshold"),
                flag(&v, "pass"),
            );
        }
        Some(Err(e)) => push_line(&format!("attractor/invariance.json: unreadable ({e})"), &mut out),
        None => {}
    }
    for (rel, label) in [
        ("attractor/attraction_l2.json", "attraction (L2)"),
        ("attractor/attraction_h1.json", "attraction (H1)"),
    ] {
        match read_json(dir, rel) {
            Some(Ok(v)) => {
                let _ = writeln!(
                    out,
                    "{label}: final={:.5e} tol={:.5e}  {}",
                    num(&v, "final_distance"),
                    num(&v, "tol"),
                    flag(&v, "pass"),
                );
            }
            Some(Err(e)) => push_line(&format!("{rel}: unreadable ({e})"), &mut out),
            None => {}
        }
    }

    // Inventory of everything the run produced.
    push_line("", &mut out);
    push_line("artifacts", &mut out);
    let mut files = Vec::new();
    inventory(dir, Path::new(""), &mut files).map_err(|source| ReportError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    for f in files {
        let _ = writeln!(out, "  {f}");
    }

    fs::write(dir.join("summary.txt"), &out).map_err(|source| ReportError::Io {
        path: dir.join("summary.txt").display().to_string(),
        source,
    })?;
    Ok(out)
}
