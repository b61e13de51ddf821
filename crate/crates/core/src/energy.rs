//! Discrete functionals: norms, the potential integral, tail masses, weighted
//! time integrals over trajectories, and the per-step energy-inequality
//! residual.
//!
//! Quadrature is the midpoint rule with weight `h^n` at interior nodes (the
//! Dirichlet boundary contributes nothing). The gradient uses forward
//! differences including the node-to-boundary gaps, which makes the discrete
//! integration-by-parts identity `⟨-Δ_h u, u⟩ = ‖∇_h u‖²` exact — the energy
//! residual depends on it.

use serde::Serialize;

use crate::domain::{cutoff_theta, Field};
use crate::error::{Error, Result};
use crate::model::{ForcingSpec, ModelSpec};
use crate::solver::{StepDiagnostics, Trajectory};

/// `‖u‖²_{L²} = h^n Σ u_i²`.
pub fn l2_norm_sq(u: &Field) -> f64 {
    u.grid().cell_volume() * u.values().iter().map(|v| v * v).sum::<f64>()
}

/// `⟨u, v⟩_{L²}` on a shared grid.
pub fn inner_product(u: &Field, v: &Field) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(u.grid().cell_volume()
        * u.values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| a * b)
            .sum::<f64>())
}

/// `‖∇_h u‖²`: forward differences along each axis, counting the two
/// boundary gaps of every grid line against the Dirichlet zeros.
pub fn h1_seminorm_sq(u: &Field) -> f64 {
    let grid = u.grid();
    let n = grid.points_per_axis();
    let vals = u.values();
    let inv_h = 1.0 / grid.spacing();
    let mut acc = 0.0;
    match grid.dimension() {
        1 => {
            let mut prev = 0.0;
            for &v in vals {
                let d = (v - prev) * inv_h;
                acc += d * d;
                prev = v;
            }
            let d = (0.0 - prev) * inv_h;
            acc += d * d;
        }
        _ => {
            // x-direction edges, row by row.
            for j in 0..n {
                let mut prev = 0.0;
                for i in 0..n {
                    let v = vals[j * n + i];
                    let d = (v - prev) * inv_h;
                    acc += d * d;
                    prev = v;
                }
                let d = (0.0 - prev) * inv_h;
                acc += d * d;
            }
            // y-direction edges, column by column.
            for i in 0..n {
                let mut prev = 0.0;
                for j in 0..n {
                    let v = vals[j * n + i];
                    let d = (v - prev) * inv_h;
                    acc += d * d;
                    prev = v;
                }
                let d = (0.0 - prev) * inv_h;
                acc += d * d;
            }
        }
    }
    grid.cell_volume() * acc
}

/// Full `H¹` norm squared, `‖u‖² + ‖∇_h u‖²`.
pub fn h1_norm_sq(u: &Field) -> f64 {
    l2_norm_sq(u) + h1_seminorm_sq(u)
}

/// `‖u‖ᵖ_p = h^n Σ |u_i|^p`.
pub fn lp_norm_p(u: &Field, p: f64) -> f64 {
    u.grid().cell_volume() * u.values().iter().map(|v| v.abs().powf(p)).sum::<f64>()
}

/// `∫ F(x, u) dx` for the model's antiderivative.
pub fn potential_integral(model: &ModelSpec, u: &Field) -> f64 {
    let grid = u.grid();
    let dim = grid.dimension();
    grid.cell_volume()
        * u.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let x = grid.node_coord(i);
                model.f_antiderivative(&x[..dim], v)
            })
            .sum::<f64>()
}

/// `h^n Σ_{|x_i| ≥ k} u_i²` — the solution mass outside radius `k`.
pub fn tail_mass(u: &Field, k: f64) -> Result<f64> {
    let grid = u.grid();
    if !(0.0..=grid.radius()).contains(&k) {
        return Err(Error::RadiusTooLarge {
            radius: k,
            limit: grid.radius(),
        });
    }
    let k2 = k * k;
    Ok(grid.cell_volume()
        * u.values()
            .iter()
            .enumerate()
            .filter(|(i, _)| grid.node_radius_sq(*i) >= k2)
            .map(|(_, v)| v * v)
            .sum::<f64>())
}

/// Cutoff-weighted tail `h^n Σ θ(|x_i|²/k²) u_i²`, the quantity the tail
/// estimate actually controls. At `k = 0` the weight is identically one.
pub fn theta_weighted_tail(u: &Field, k: f64) -> Result<f64> {
    let grid = u.grid();
    if k < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cutoff radius must be nonnegative, got {k}"
        )));
    }
    if k == 0.0 {
        return Ok(l2_norm_sq(u));
    }
    let k2 = k * k;
    let mut acc = 0.0;
    for (i, &v) in u.values().iter().enumerate() {
        let w = cutoff_theta(grid.node_radius_sq(i) / k2)?;
        acc += w * v * v;
    }
    Ok(grid.cell_volume() * acc)
}

/// Which recorded diagnostic a weighted time integral runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    L2Sq,
    H1SemiSq,
    /// `‖u‖² + ‖∇u‖²`.
    H1Sq,
    LpP,
    ForcingL2Sq,
}

impl DiagnosticKind {
    fn value(&self, d: &StepDiagnostics) -> f64 {
        match self {
            DiagnosticKind::L2Sq => d.l2_sq,
            DiagnosticKind::H1SemiSq => d.h1_semi_sq,
            DiagnosticKind::H1Sq => d.l2_sq + d.h1_semi_sq,
            DiagnosticKind::LpP => d.lp_p,
            DiagnosticKind::ForcingL2Sq => d.forcing_l2_sq,
        }
    }
}

/// Trapezoid rule for `∫ e^{λξ} q(ξ) dξ` over the whole recorded trajectory.
pub fn weighted_time_integral(traj: &Trajectory, lambda: f64, kind: DiagnosticKind) -> Result<f64> {
    windowed_time_integral(traj, lambda, kind, traj.start_time, traj.end_time)
}

/// Trapezoid rule for `∫_a^b e^{λξ} q(ξ) dξ` with linear interpolation at the
/// window edges; `λ = 0` gives the plain time integral.
pub fn windowed_time_integral(
    traj: &Trajectory,
    lambda: f64,
    kind: DiagnosticKind,
    from: f64,
    to: f64,
) -> Result<f64> {
    let diags = &traj.diagnostics;
    if diags.len() < 2 {
        return Err(Error::MissingDiagnostics);
    }
    let a = from.max(traj.start_time);
    let b = to.min(traj.end_time);
    if b <= a {
        return Ok(0.0);
    }
    let eval = |d: &StepDiagnostics| (lambda * d.t).exp() * kind.value(d);
    let mut acc = 0.0;
    for pair in diags.windows(2) {
        let (d0, d1) = (&pair[0], &pair[1]);
        if d1.t <= a || d0.t >= b {
            continue;
        }
        let (lo, hi) = (d0.t.max(a), d1.t.min(b));
        // Linear interpolation of the weighted integrand inside the step.
        let f0 = eval(d0);
        let f1 = eval(d1);
        let span = d1.t - d0.t;
        let v_lo = f0 + (f1 - f0) * (lo - d0.t) / span;
        let v_hi = f0 + (f1 - f0) * (hi - d0.t) / span;
        acc += 0.5 * (v_lo + v_hi) * (hi - lo);
    }
    Ok(acc)
}

/// Discretization-slack model for inequality checks: `c (Δt + h²)` scaled by
/// the magnitude of whatever is being compared.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlackPolicy {
    pub c: f64,
}

impl Default for SlackPolicy {
    fn default() -> Self {
        SlackPolicy { c: 10.0 }
    }
}

impl SlackPolicy {
    pub fn slack(&self, dt: f64, h: f64, magnitude: f64) -> f64 {
        self.c * (dt + h * h) * magnitude.max(1.0)
    }
}

/// Per-step residual of the differential energy inequality
///
/// ```text
/// d/dt ‖u‖² + 2‖∇u‖² + (3/2)λ‖u‖² + 2α₁‖u‖ᵖ_p ≤ 2‖φ₁‖₁ + (2/λ)‖g‖²
/// ```
///
/// evaluated with the forward difference quotient of `‖u‖²` and the updated
/// state in every other term. Nonpositive values (up to discretization slack)
/// certify the the dissipation budget step by step.
pub fn energy_residual(
    model: &ModelSpec,
    _forcing: &ForcingSpec,
    traj: &Trajectory,
) -> Result<Vec<f64>> {
    let diags = &traj.diagnostics;
    if diags.len() < 2 {
        return Err(Error::MissingDiagnostics);
    }
    let dim_const = 2.0 * model.phi1.l1_norm(grid_dim(traj));
    Ok(diags
        .windows(2)
        .map(|pair| {
            let (d0, d1) = (&pair[0], &pair[1]);
            let dt = d1.t - d0.t;
            (d1.l2_sq - d0.l2_sq) / dt
                + 2.0 * d1.h1_semi_sq
                + 1.5 * model.lambda * d1.l2_sq
                + 2.0 * model.alpha1 * d1.lp_p
                - dim_const
                - (2.0 / model.lambda) * d1.forcing_l2_sq
        })
        .collect())
}

/// Slack budget aligned with [`energy_residual`]: one value per step, scaled
/// by the trajectory magnitudes entering the inequality.
pub fn energy_residual_slacks(
    model: &ModelSpec,
    traj: &Trajectory,
    policy: &SlackPolicy,
) -> Result<Vec<f64>> {
    let diags = &traj.diagnostics;
    if diags.len() < 2 {
        return Err(Error::MissingDiagnostics);
    }
    let h = traj.endpoint().grid().spacing();
    Ok(diags
        .windows(2)
        .map(|pair| {
            let (d0, d1) = (&pair[0], &pair[1]);
            let dt = d1.t - d0.t;
            let magnitude = d0
                .l2_sq
                .max(d1.l2_sq)
                .max(d1.h1_semi_sq)
                .max(model.alpha1 * d1.lp_p)
                .max(d1.forcing_l2_sq / model.lambda);
            policy.slack(dt, h, magnitude)
        })
        .collect())
}

fn grid_dim(traj: &Trajectory) -> usize {
    traj.endpoint().grid().dimension()
}
