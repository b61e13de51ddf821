//! Experiment orchestration: executes the configured task list in order,
//! writes one artifact tree per run, and aggregates pass/fail per task.
//! Partial failures do not stop the pipeline; a failing or erroring task is
//! recorded and the remaining tasks still run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pullback_lab::attractor::{
    approximate_attractor, check_attraction, check_invariance, sample_family, AttractorApprox,
    SetNorm,
};
use pullback_lab::energy::{energy_residual, energy_residual_slacks};
use pullback_lab::estimates::{
    check_absorbing_l2, check_h1_bound, check_h1_cauchy, check_tail, check_time_integrals,
    check_ut_bound, EstimateReport,
};
use pullback_lab::model::verify_structure;
use pullback_lab::solver::evolve;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, Resolved, TaskKind};
use crate::report::export_report;

/// 17-significant-digit float formatting: exact round trips in CSV artifacts.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TaskStatus {
    Passed,
    Failed,
    Errored(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskResult {
    pub name: String,
    pub status: TaskStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub results: Vec<TaskResult>,
}

impl RunSummary {
    /// 0 = all pass, 1 = some check failed, 3 = runtime/solver error.
    pub fn exit_code(&self) -> i32 {
        if self
            .results
            .iter()
            .any(|r| matches!(r.status, TaskStatus::Errored(_)))
        {
            3
        } else if self.results.iter().any(|r| r.status == TaskStatus::Failed) {
            1
        } else {
            0
        }
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Runs the configured tasks (or a single selected one) into `out_dir`.
/// A full run finishes by regenerating the human-readable summary.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    seed_override: Option<u64>,
    only: Option<TaskKind>,
) -> Result<RunSummary, ConfigError> {
    let mut effective = cfg.clone();
    if let Some(seed) = seed_override {
        effective.family.seed = seed;
    }
    let resolved = effective.resolve()?;

    fs::create_dir_all(out_dir).map_err(|source| ConfigError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let echo = effective.echo_toml();
    fs::write(out_dir.join("resolved_config.toml"), echo).map_err(|source| ConfigError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let tasks: Vec<TaskKind> = match only {
        Some(t) => vec![t],
        None => resolved.tasks.clone(),
    };

    let mut results = Vec::new();
    for task in tasks {
        let outcome = match task {
            TaskKind::VerifyStructure => task_verify_structure(&resolved, out_dir),
            TaskKind::Simulate => task_simulate(&resolved, out_dir),
            TaskKind::VerifyEstimates => task_verify_estimates(&resolved, out_dir),
            TaskKind::Attractor => task_attractor(&resolved, out_dir),
        };
        results.push(match outcome {
            Ok((pass, detail)) => TaskResult {
                name: task.name().to_string(),
                status: if pass {
                    TaskStatus::Passed
                } else {
                    TaskStatus::Failed
                },
                detail,
            },
            Err(msg) => TaskResult {
                name: task.name().to_string(),
                status: TaskStatus::Errored(msg.clone()),
                detail: msg,
            },
        });
    }

    if only.is_none() {
        let report_result = match export_report(out_dir) {
            Ok(_) => TaskResult {
                name: "report".into(),
                status: TaskStatus::Passed,
                detail: "summary.txt".into(),
            },
            Err(e) => TaskResult {
                name: "report".into(),
                status: TaskStatus::Errored(e.to_string()),
                detail: e.to_string(),
            },
        };
        results.push(report_result);
    }
    Ok(RunSummary { results })
}

fn task_verify_structure(resolved: &Resolved, out: &Path) -> Result<(bool, String), String> {
    let sc = &resolved.scenario;
    let plan = &resolved.plan;
    let report = verify_structure(
        &sc.model,
        &resolved.grid,
        (plan.structure_range[0], plan.structure_range[1]),
        plan.structure_samples,
    )
    .map_err(|e| e.to_string())?;
    write_json(&out.join("structure.json"), &report)?;
    let detail = report
        .conditions
        .iter()
        .map(|c| format!("{}:{}", c.condition, if c.pass { "ok" } else { "violated" }))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((report.pass, detail))
}

fn task_simulate(resolved: &Resolved, out: &Path) -> Result<(bool, String), String> {
    let sc = &resolved.scenario;
    let plan = &resolved.plan;
    let tau = plan.tau;
    let u0 = sample_family(&resolved.grid, &sc.family, tau, 1, sc.seed)
        .map_err(|e| e.to_string())?
        .remove(0);
    let traj = evolve(
        &sc.model,
        &sc.forcing,
        &resolved.grid,
        &u0,
        tau,
        tau + plan.simulate_time,
        &sc.controls,
    )
    .map_err(|e| e.to_string())?;

    // Per-step scalar diagnostics.
    let mut csv = String::from("t,l2_sq,h1_semi_sq,lp_p,potential,forcing_l2_sq");
    for k in &sc.controls.tail_radii {
        let _ = write!(csv, ",tail_{k}");
    }
    csv.push('\n');
    for d in &traj.diagnostics {
        let mut row = vec![
            fmt_float(d.t),
            fmt_float(d.l2_sq),
            fmt_float(d.h1_semi_sq),
            fmt_float(d.lp_p),
            fmt_float(d.potential),
            fmt_float(d.forcing_l2_sq),
        ];
        row.extend(d.tail_masses.iter().map(|&m| fmt_float(m)));
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write_bytes(&out.join("simulate/diagnostics.csv"), csv.as_bytes())?;

    // Energy-inequality residuals against the slack budget.
    let residuals = energy_residual(&sc.model, &sc.forcing, &traj).map_err(|e| e.to_string())?;
    let slacks =
        energy_residual_slacks(&sc.model, &traj, &sc.slack).map_err(|e| e.to_string())?;
    let mut res_csv = String::from("t,residual,slack,within\n");
    let mut violations = 0usize;
    for ((pair, r), s) in traj
        .diagnostics
        .windows(2)
        .zip(&residuals)
        .zip(&slacks)
    {
        let within = r <= s;
        if !within {
            violations += 1;
        }
        res_csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(pair[1].t),
            fmt_float(*r),
            fmt_float(*s),
            u8::from(within)
        ));
    }
    write_bytes(&out.join("simulate/residuals.csv"), res_csv.as_bytes())?;

    // Optional field snapshots, one row per recorded level.
    if !traj.snapshots.is_empty() {
        let mut snap = String::from("t,values...\n");
        for (t, field) in &traj.snapshots {
            let mut row = vec![fmt_float(*t)];
            row.extend(field.values().iter().map(|&v| fmt_float(v)));
            snap.push_str(&row.join(","));
            snap.push('\n');
        }
        write_bytes(&out.join("simulate/snapshots.csv"), snap.as_bytes())?;
    }

    #[derive(Serialize)]
    struct SimulateMeta {
        tau0: f64,
        tau1: f64,
        dt: f64,
        steps: usize,
        residual_violations: usize,
        endpoint_l2_sq: f64,
    }
    write_json(
        &out.join("simulate/meta.json"),
        &SimulateMeta {
            tau0: tau,
            tau1: tau + plan.simulate_time,
            dt: sc.controls.dt,
            steps: traj.diagnostics.len() - 1,
            residual_violations: violations,
            endpoint_l2_sq: pullback_lab::energy::l2_norm_sq(traj.endpoint()),
        },
    )?;
    Ok((
        violations == 0,
        format!(
            "{} steps, {} residual violations",
            traj.diagnostics.len() - 1,
            violations
        ),
    ))
}

fn task_verify_estimates(resolved: &Resolved, out: &Path) -> Result<(bool, String), String> {
    let sc = &resolved.scenario;
    let plan = &resolved.plan;
    let tau = plan.tau;
    let windowed: Vec<f64> = plan
        .horizons
        .iter()
        .copied()
        .filter(|&t| t > 2.0)
        .collect();
    if windowed.is_empty() {
        return Err("no configured horizon exceeds the two-unit estimate window".into());
    }
    let pairs: Vec<(f64, f64)> = plan.cauchy_pairs.iter().map(|p| (p[0], p[1])).collect();

    let reports: Vec<(&str, EstimateReport)> = vec![
        (
            "absorbing_l2",
            check_absorbing_l2(sc, tau, &plan.horizons).map_err(|e| e.to_string())?,
        ),
        (
            "time_integrals",
            check_time_integrals(sc, tau, *windowed.last().unwrap())
                .map_err(|e| e.to_string())?,
        ),
        (
            "h1_uniform",
            check_h1_bound(sc, tau, &windowed).map_err(|e| e.to_string())?,
        ),
        (
            "ut_uniform",
            check_ut_bound(sc, tau, &windowed).map_err(|e| e.to_string())?,
        ),
        (
            "tail_decay",
            check_tail(sc, tau, plan.eta, &plan.horizons, &plan.radii)
                .map_err(|e| e.to_string())?,
        ),
        (
            "h1_cauchy",
            check_h1_cauchy(sc, tau, &pairs).map_err(|e| e.to_string())?,
        ),
    ];

    let mut all_pass = true;
    let mut details = Vec::new();
    for (name, report) in &reports {
        write_json(&out.join(format!("estimates/{name}.json")), report)?;
        all_pass &= report.pass;
        details.push(format!("{name}:{}", if report.pass { "ok" } else { "fail" }));
    }
    Ok((all_pass, details.join(", ")))
}

fn member_csv(field: &pullback_lab::domain::Field) -> String {
    let grid = field.grid();
    let mut csv = String::from(if grid.dimension() == 1 {
        "x,value\n"
    } else {
        "x,y,value\n"
    });
    for (i, &v) in field.values().iter().enumerate() {
        let c = grid.node_coord(i);
        if grid.dimension() == 1 {
            csv.push_str(&format!("{},{}\n", fmt_float(c[0]), fmt_float(v)));
        } else {
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_float(c[0]),
                fmt_float(c[1]),
                fmt_float(v)
            ));
        }
    }
    csv
}

#[derive(Serialize)]
struct AttractorManifest {
    tau: f64,
    horizon: f64,
    ensemble: usize,
    seed: u64,
    converged: bool,
    diameter: f64,
    history: Vec<pullback_lab::attractor::LadderStep>,
    member_files: Vec<String>,
    pairwise_l2: Vec<f64>,
}

fn export_attractor(approx: &AttractorApprox, out: &Path) -> Result<(), String> {
    let mut member_files = Vec::new();
    for (i, member) in approx.members.iter().enumerate() {
        let rel = format!("attractor/members/member_{i:03}.csv");
        write_bytes(&out.join(&rel), member_csv(member).as_bytes())?;
        member_files.push(rel);
    }
    write_json(
        &out.join("attractor/manifest.json"),
        &AttractorManifest {
            tau: approx.tau,
            horizon: approx.horizon,
            ensemble: approx.ensemble,
            seed: approx.seed,
            converged: approx.converged,
            diameter: approx.diameter,
            history: approx.history.clone(),
            member_files,
            pairwise_l2: approx.pairwise.clone(),
        },
    )
}

fn task_attractor(resolved: &Resolved, out: &Path) -> Result<(bool, String), String> {
    let sc = &resolved.scenario;
    let plan = &resolved.plan;
    let tau = plan.tau;
    let approx =
        approximate_attractor(sc, tau, &plan.ladder, plan.tol_attractor).map_err(|e| e.to_string())?;
    export_attractor(&approx, out)?;

    let invariance = check_invariance(
        sc,
        &approx,
        plan.forward_time,
        &plan.ladder,
        plan.tol_attractor,
        plan.tol_invariance,
        plan.invariance_fraction,
    )
    .map_err(|e| e.to_string())?;
    write_json(&out.join("attractor/invariance.json"), &invariance)?;

    let attraction_l2 = check_attraction(
        sc,
        &approx,
        &sc.family,
        &plan.horizons,
        SetNorm::L2,
        plan.tol_attraction,
    )
    .map_err(|e| e.to_string())?;
    write_json(&out.join("attractor/attraction_l2.json"), &attraction_l2)?;

    let attraction_h1 = check_attraction(
        sc,
        &approx,
        &sc.family,
        &plan.horizons,
        SetNorm::H1,
        plan.tol_attraction,
    )
    .map_err(|e| e.to_string())?;
    write_json(&out.join("attractor/attraction_h1.json"), &attraction_h1)?;

    let pass =
        approx.converged && invariance.pass && attraction_l2.pass && attraction_h1.pass;
    Ok((
        pass,
        format!(
            "converged={}, invariance={}, attraction L2={}, H1={}",
            approx.converged, invariance.pass, attraction_l2.pass, attraction_h1.pass
        ),
    ))
}

/// Resolves the output directory from an override or the config default.
pub fn output_dir(cfg: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}
