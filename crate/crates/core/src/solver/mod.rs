//! Time integration of the discretized equation and the pullback solution
//! operator.
//!
//! The default scheme treats the stiff linear part implicitly and the
//! reaction and forcing explicitly:
//!
//! ```text
//! (I + Δt λ - Δt Δ_h) u⁺ = u + Δt (f(x, u) + g(x, t + Δt))
//! ```
//!
//! which is unconditionally stable in the linear part; the explicit reaction
//! term is safe under the one-sided slope margin `Δt α₃ ≤ 1/2`. The
//! fully-implicit variant runs Newton on the same system with `f(x, u⁺)` and
//! handles stiffer reaction regimes at the price of one factorization per
//! iteration.
//!
//! The two-parameter solution operator ("evolve from time τ to time τ + t")
//! satisfies the cocycle composition law exactly on aligned step sequences,
//! which is what the pullback machinery relies on.

pub mod banded;

use serde::Serialize;

use crate::domain::{Field, Grid};
use crate::energy;
use crate::error::{Error, Result};
use crate::model::{ForcingSpec, ModelSpec};
use banded::{BandedLu, BandedMatrix};

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Implicit linear part, explicit reaction and forcing.
    Imex,
    /// Newton iteration on the fully implicit update.
    FullyImplicit,
}

/// Step size, scheme selection and recording options.
#[derive(Clone, Debug, Serialize)]
pub struct SolverControls {
    pub dt: f64,
    pub scheme: Scheme,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Keep every `stride`-th field in the trajectory; 0 keeps endpoints only.
    pub snapshot_stride: usize,
    /// Radii at which per-step tail masses are recorded.
    pub tail_radii: Vec<f64>,
}

impl Default for SolverControls {
    fn default() -> Self {
        SolverControls {
            dt: 0.01,
            scheme: Scheme::Imex,
            newton_tol: 1e-10,
            newton_max_iter: 25,
            snapshot_stride: 0,
            tail_radii: Vec::new(),
        }
    }
}

impl SolverControls {
    pub fn with_dt(dt: f64) -> Self {
        SolverControls {
            dt,
            ..SolverControls::default()
        }
    }

    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.scheme == Scheme::Imex && self.dt * model.alpha3 > 0.5 {
            return Err(Error::InvalidParameter(format!(
                "imex scheme needs dt * alpha3 <= 1/2 for the explicit reaction \
                 term; got dt = {}, alpha3 = {}",
                self.dt, model.alpha3
            )));
        }
        if self.scheme == Scheme::FullyImplicit
            && (!(self.newton_tol > 0.0) || self.newton_max_iter == 0)
        {
            return Err(Error::InvalidParameter(
                "Newton controls must have a positive tolerance and at least one iteration"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Scalar functionals recorded at one time level.
#[derive(Clone, Debug, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub l2_sq: f64,
    pub h1_semi_sq: f64,
    pub lp_p: f64,
    pub potential: f64,
    pub forcing_l2_sq: f64,
    pub tail_masses: Vec<f64>,
}

impl StepDiagnostics {
    fn measure(
        model: &ModelSpec,
        forcing: &ForcingSpec,
        u: &Field,
        t: f64,
        radii: &[f64],
    ) -> Result<StepDiagnostics> {
        let tail_masses = radii
            .iter()
            .map(|&k| energy::tail_mass(u, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(StepDiagnostics {
            t,
            l2_sq: energy::l2_norm_sq(u),
            h1_semi_sq: energy::h1_seminorm_sq(u),
            lp_p: energy::lp_norm_p(u, model.p),
            potential: energy::potential_integral(model, u),
            forcing_l2_sq: forcing.g_l2_sq(t),
            tail_masses,
        })
    }
}

/// Time-stamped solution record produced by [`evolve`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub start_time: f64,
    pub end_time: f64,
    pub dt: f64,
    /// One record per time level, including the initial one.
    pub diagnostics: Vec<StepDiagnostics>,
    /// Sparse field snapshots `(t, u)` per the snapshot stride.
    pub snapshots: Vec<(f64, Field)>,
    endpoint: Field,
    penultimate: Option<Field>,
}

impl Trajectory {
    pub fn endpoint(&self) -> &Field {
        &self.endpoint
    }

    pub fn into_endpoint(self) -> Field {
        self.endpoint
    }

    /// Field one step before the endpoint, when the run took at least one step.
    pub fn penultimate(&self) -> Option<&Field> {
        self.penultimate.as_ref()
    }

    /// Size of the final (possibly shortened) step.
    pub fn final_step_size(&self) -> Option<f64> {
        let n = self.diagnostics.len();
        if n >= 2 {
            Some(self.diagnostics[n - 1].t - self.diagnostics[n - 2].t)
        } else {
            None
        }
    }
}

/// Banded representation of `c₀ I - c₁ Δ_h` with Dirichlet ghost zeros.
pub fn shifted_laplacian_matrix(grid: &Grid, c0: f64, c1: f64) -> BandedMatrix {
    let n = grid.points_per_axis();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    match grid.dimension() {
        1 => {
            let mut a = BandedMatrix::zeros(n, 1);
            for i in 0..n {
                a.set(i, i, c0 + 2.0 * c1 * inv_h2);
                if i > 0 {
                    a.set(i, i - 1, -c1 * inv_h2);
                }
                if i + 1 < n {
                    a.set(i, i + 1, -c1 * inv_h2);
                }
            }
            a
        }
        _ => {
            let total = n * n;
            let mut a = BandedMatrix::zeros(total, n);
            for j in 0..n {
                for i in 0..n {
                    let idx = j * n + i;
                    a.set(idx, idx, c0 + 4.0 * c1 * inv_h2);
                    if i > 0 {
                        a.set(idx, idx - 1, -c1 * inv_h2);
                    }
                    if i + 1 < n {
                        a.set(idx, idx + 1, -c1 * inv_h2);
                    }
                    if j > 0 {
                        a.set(idx, idx - n, -c1 * inv_h2);
                    }
                    if j + 1 < n {
                        a.set(idx, idx + n, -c1 * inv_h2);
                    }
                }
            }
            a
        }
    }
}

/// Direct solve of the stationary problem `(λ I - Δ_h) u = rhs`.
pub fn solve_stationary(grid: &Grid, lambda: f64, rhs: &Field) -> Result<Field> {
    if rhs.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "stationary solve needs lambda > 0, got {lambda}"
        )));
    }
    let lu = shifted_laplacian_matrix(grid, lambda, 1.0).factor()?;
    Field::new(*grid, lu.solve(rhs.values()))
}

/// Reusable stepping context: factored linear system for the nominal step
/// size plus cached node data.
pub struct Stepper<'a> {
    model: &'a ModelSpec,
    forcing: &'a ForcingSpec,
    grid: Grid,
    controls: &'a SolverControls,
    lu_nominal: BandedLu,
    base_nominal: BandedMatrix,
    rho: Vec<f64>,
    coords: Vec<[f64; 2]>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        model: &'a ModelSpec,
        forcing: &'a ForcingSpec,
        grid: &Grid,
        controls: &'a SolverControls,
    ) -> Result<Self> {
        model.validate()?;
        forcing.validate(model.lambda)?;
        controls.validate(model)?;
        if forcing.dim() != grid.dimension() {
            return Err(Error::GridMismatch);
        }
        let base = shifted_laplacian_matrix(grid, 1.0 + controls.dt * model.lambda, controls.dt);
        let lu = base.clone().factor()?;
        let coords: Vec<[f64; 2]> = (0..grid.node_count()).map(|i| grid.node_coord(i)).collect();
        let rho = coords
            .iter()
            .map(|c| forcing.spatial.eval(&c[..grid.dimension()]))
            .collect();
        Ok(Stepper {
            model,
            forcing,
            grid: *grid,
            controls,
            lu_nominal: lu,
            base_nominal: base,
            rho,
            coords,
        })
    }

    /// Advances `u` from `t` to `t + dt` with the nominal step size.
    pub fn step(&self, u: &Field, t: f64) -> Result<Field> {
        self.step_sized(u, t, self.controls.dt, Some((&self.base_nominal, &self.lu_nominal)))
    }

    /// Advances with an arbitrary step size, factoring on the fly.
    pub fn step_custom(&self, u: &Field, t: f64, dt: f64) -> Result<Field> {
        self.step_sized(u, t, dt, None)
    }

    fn step_sized(
        &self,
        u: &Field,
        t: f64,
        dt: f64,
        prefactored: Option<(&BandedMatrix, &BandedLu)>,
    ) -> Result<Field> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let t_next = t + dt;
        let owned;
        let (base, lu) = match prefactored {
            Some((b, l)) => (b, Some(l)),
            None => {
                owned = shifted_laplacian_matrix(
                    &self.grid,
                    1.0 + dt * self.model.lambda,
                    dt,
                );
                (&owned, None)
            }
        };
        let values = match self.controls.scheme {
            Scheme::Imex => {
                let a_next = self.forcing.a_eval(t_next);
                let dim = self.grid.dimension();
                let rhs: Vec<f64> = u
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &ui)| {
                        ui + dt
                            * (self.model.f_eval(&self.coords[i][..dim], ui)
                                + a_next * self.rho[i])
                    })
                    .collect();
                match lu {
                    Some(lu) => lu.solve(&rhs),
                    None => base.clone().factor()?.solve(&rhs),
                }
            }
            Scheme::FullyImplicit => self.newton_solve(u, t_next, dt, base)?,
        };
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp { time: t_next });
        }
        Field::new(self.grid, values)
    }

    fn newton_solve(
        &self,
        u: &Field,
        t_next: f64,
        dt: f64,
        base: &BandedMatrix,
    ) -> Result<Vec<f64>> {
        let dim = self.grid.dimension();
        let a_next = self.forcing.a_eval(t_next);
        let cell = self.grid.cell_volume();
        let mut w = u.values().to_vec();
        for _iter in 0..self.controls.newton_max_iter {
            // Residual G(w) = (c0 I - c1 Δ_h) w - Δt f(x, w) - u - Δt g.
            let mut residual = base.matvec(&w);
            for (i, r) in residual.iter_mut().enumerate() {
                *r -= dt * self.model.f_eval(&self.coords[i][..dim], w[i])
                    + u.values()[i]
                    + dt * a_next * self.rho[i];
                *r = -*r;
            }
            if !residual.iter().all(|v| v.is_finite()) {
                return Err(Error::BlowUp { time: t_next });
            }
            let mut jac = base.clone();
            for (i, &wi) in w.iter().enumerate() {
                jac.add(i, i, -dt * self.model.f_slope(&self.coords[i][..dim], wi));
            }
            let delta = jac.factor()?.solve(&residual);
            let mut delta_sq = 0.0;
            let mut w_sq = 0.0;
            for (wi, di) in w.iter_mut().zip(&delta) {
                *wi += di;
                delta_sq += di * di;
                w_sq += *wi * *wi;
            }
            let delta_norm = (cell * delta_sq).sqrt();
            let w_norm = (cell * w_sq).sqrt();
            if !delta_norm.is_finite() {
                return Err(Error::BlowUp { time: t_next });
            }
            if delta_norm <= self.controls.newton_tol * w_norm.max(1.0) {
                return Ok(w);
            }
        }
        Err(Error::NewtonDivergence {
            time: t_next,
            iterations: self.controls.newton_max_iter,
        })
    }
}

/// Single time step `t → t + Δt` (convenience wrapper building a one-shot
/// [`Stepper`]). Long runs should use [`evolve`], which factors once.
pub fn step(
    model: &ModelSpec,
    forcing: &ForcingSpec,
    grid: &Grid,
    u: &Field,
    t: f64,
    controls: &SolverControls,
) -> Result<Field> {
    Stepper::new(model, forcing, grid, controls)?.step(u, t)
}

/// Integrates from `tau0` to `tau1`, recording per-step diagnostics. The last
/// step is shortened so the final time lands exactly on `tau1`.
pub fn evolve(
    model: &ModelSpec,
    forcing: &ForcingSpec,
    grid: &Grid,
    u0: &Field,
    tau0: f64,
    tau1: f64,
    controls: &SolverControls,
) -> Result<Trajectory> {
    if !(tau1 > tau0) {
        return Err(Error::InvalidParameter(format!(
            "evolve needs tau1 > tau0, got [{tau0}, {tau1}]"
        )));
    }
    for &k in &controls.tail_radii {
        if !(0.0..=grid.radius()).contains(&k) {
            return Err(Error::RadiusTooLarge {
                radius: k,
                limit: grid.radius(),
            });
        }
    }
    let stepper = Stepper::new(model, forcing, grid, controls)?;
    let dt = controls.dt;
    let span = tau1 - tau0;
    let ratio = span / dt;
    let full_steps = (ratio + 1e-9).floor() as usize;
    let remainder = span - full_steps as f64 * dt;
    let has_tail_step = remainder > 1e-9 * dt.max(1.0);

    let mut diagnostics = Vec::with_capacity(full_steps + 2);
    let mut snapshots = Vec::new();
    diagnostics.push(StepDiagnostics::measure(
        model,
        forcing,
        u0,
        tau0,
        &controls.tail_radii,
    )?);
    if controls.snapshot_stride > 0 {
        snapshots.push((tau0, u0.clone()));
    }

    let total_steps = full_steps + usize::from(has_tail_step);
    let mut u = u0.clone();
    let mut penultimate = None;
    for j in 0..total_steps {
        let t_here = tau0 + j as f64 * dt;
        let (next, t_next) = if j < full_steps {
            // Record the final level as tau1 itself; when the span is an
            // exact multiple of dt the accumulated time can sit an ulp off.
            let t_next = if j + 1 == total_steps {
                tau1
            } else {
                tau0 + (j + 1) as f64 * dt
            };
            (stepper.step(&u, t_here), t_next)
        } else {
            (stepper.step_custom(&u, t_here, remainder), tau1)
        };
        let next = next?;
        diagnostics.push(StepDiagnostics::measure(
            model,
            forcing,
            &next,
            t_next,
            &controls.tail_radii,
        )?);
        if controls.snapshot_stride > 0 && (j + 1) % controls.snapshot_stride == 0 {
            snapshots.push((t_next, next.clone()));
        }
        if j + 1 == total_steps {
            penultimate = Some(std::mem::replace(&mut u, next));
        } else {
            u = next;
        }
    }
    if controls.snapshot_stride > 0
        && snapshots.last().map(|(t, _)| *t) != Some(tau1)
    {
        snapshots.push((tau1, u.clone()));
    }
    Ok(Trajectory {
        start_time: tau0,
        end_time: tau1,
        dt,
        diagnostics,
        snapshots,
        endpoint: u,
        penultimate,
    })
}

/// Pullback endpoint `φ(t, τ - t, u₀)`: start at `u₀` at time `τ - t` and
/// integrate up to the observation time `τ`, returning only the final field.
pub fn pullback_solve(
    model: &ModelSpec,
    forcing: &ForcingSpec,
    grid: &Grid,
    tau: f64,
    horizon: f64,
    u0: &Field,
    controls: &SolverControls,
) -> Result<Field> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pullback horizon must be positive, got {horizon}"
        )));
    }
    let mut endpoint_only = controls.clone();
    endpoint_only.snapshot_stride = 0;
    endpoint_only.tail_radii = Vec::new();
    Ok(evolve(model, forcing, grid, u0, tau - horizon, tau, &endpoint_only)?.into_endpoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;
    use crate::model::{SpatialProfile, TemporalKind};

    fn zero_forcing(dim: usize) -> ForcingSpec {
        ForcingSpec::new(
            dim,
            0.0,
            TemporalKind::Exponential { rate: 0.0 },
            SpatialProfile::Gaussian,
        )
        .unwrap()
    }

    fn constant_gaussian_forcing(dim: usize) -> ForcingSpec {
        ForcingSpec::new(
            dim,
            1.0,
            TemporalKind::Exponential { rate: 0.0 },
            SpatialProfile::Gaussian,
        )
        .unwrap()
    }

    #[test]
    fn controls_validation() {
        let model = ModelSpec::default_cubic(1.0);
        assert!(SolverControls::with_dt(0.01).validate(&model).is_ok());
        assert!(SolverControls::with_dt(0.0).validate(&model).is_err());
        assert!(SolverControls::with_dt(1.0).validate(&model).is_err()); // dt * alpha3 > 1/2
        let mut c = SolverControls::with_dt(1.0);
        c.scheme = Scheme::FullyImplicit;
        assert!(c.validate(&model).is_ok()); // implicit scheme has no such margin
    }

    #[test]
    fn eigenfunction_single_step_identity() {
        // f = 0, g = 0: one step divides the mode by 1 + Δt(λ + μ).
        let grid = build_grid(1, 8.0, 127).unwrap();
        let model = ModelSpec::linear(1.0);
        let forcing = zero_forcing(1);
        let controls = SolverControls::with_dt(0.05);
        let e1 = grid.sine_mode(&[1]).unwrap();
        let mu = grid.sine_eigenvalue(&[1]).unwrap();
        let u1 = step(&model, &forcing, &grid, &e1, 0.0, &controls).unwrap();
        let factor = 1.0 / (1.0 + 0.05 * (1.0 + mu));
        for (got, want) in u1.values().iter().zip(e1.values()) {
            assert!((got - want * factor).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_data_zero_forcing_stays_zero() {
        let grid = build_grid(2, 3.0, 9).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = zero_forcing(2);
        let controls = SolverControls::with_dt(0.1);
        let traj = evolve(
            &model,
            &forcing,
            &grid,
            &Field::zeros(grid),
            0.0,
            2.0,
            &controls,
        )
        .unwrap();
        assert!(traj.endpoint().values().iter().all(|&v| v == 0.0));
        assert!(traj.diagnostics.iter().all(|d| d.l2_sq == 0.0));
    }

    #[test]
    fn linear_decay_matches_geometric_closed_form() {
        let grid = build_grid(1, 8.0, 255).unwrap();
        let model = ModelSpec::linear(1.0);
        let forcing = zero_forcing(1);
        let controls = SolverControls::with_dt(0.02);
        let e1 = grid.sine_mode(&[1]).unwrap();
        let mu = grid.sine_eigenvalue(&[1]).unwrap();
        let steps = 200;
        let traj = evolve(
            &model,
            &forcing,
            &grid,
            &e1,
            0.0,
            steps as f64 * 0.02,
            &controls,
        )
        .unwrap();
        let got = crate::energy::l2_norm_sq(traj.endpoint()).sqrt();
        let want =
            crate::energy::l2_norm_sq(&e1).sqrt() * (1.0 + 0.02 * (1.0 + mu)).powi(-steps);
        assert!(
            (got - want).abs() <= 1e-12 * want,
            "got {got}, want {want}"
        );
    }

    #[test]
    fn nonlinear_decay_beats_linear_envelope() {
        // f(s)s ≤ 0 means the L² norm decays at least like e^{-λ t}.
        let grid = build_grid(1, 8.0, 127).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = zero_forcing(1);
        let controls = SolverControls::with_dt(0.01);
        let u0 = grid.sine_mode(&[2]).unwrap().scaled(1.5);
        let t = 3.0;
        let traj = evolve(&model, &forcing, &grid, &u0, 0.0, t, &controls).unwrap();
        let got = crate::energy::l2_norm_sq(traj.endpoint()).sqrt();
        let envelope = crate::energy::l2_norm_sq(&u0).sqrt() * (-t).exp();
        assert!(got <= envelope * (1.0 + 1e-6), "got {got} > envelope {envelope}");
    }

    #[test]
    fn cocycle_composition_is_exact_on_aligned_steps() {
        // Dyadic step and horizons keep every time level exactly
        // representable, so the two paths produce bit-identical endpoints.
        let grid = build_grid(1, 4.0, 63).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = ForcingSpec::new(
            1,
            0.5,
            TemporalKind::Exponential { rate: -0.125 },
            SpatialProfile::Gaussian,
        )
        .unwrap();
        let controls = SolverControls::with_dt(0.0625);
        let tau = 2.0;
        let (t1, t2) = (1.5, 2.5);
        let u0 = grid.sine_mode(&[1]).unwrap();

        let direct =
            pullback_solve(&model, &forcing, &grid, tau, t1 + t2, &u0, &controls).unwrap();
        let inner =
            pullback_solve(&model, &forcing, &grid, tau - t1, t2, &u0, &controls).unwrap();
        let outer = evolve(&model, &forcing, &grid, &inner, tau - t1, tau, &controls).unwrap();
        assert_eq!(direct.values(), outer.endpoint().values());
    }

    #[test]
    fn pullback_single_step_is_step() {
        let grid = build_grid(1, 4.0, 31).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = constant_gaussian_forcing(1);
        let controls = SolverControls::with_dt(0.25);
        let u0 = grid.sine_mode(&[1]).unwrap();
        let via_pullback =
            pullback_solve(&model, &forcing, &grid, 1.0, 0.25, &u0, &controls).unwrap();
        let via_step = step(&model, &forcing, &grid, &u0, 0.75, &controls).unwrap();
        assert_eq!(via_pullback.values(), via_step.values());
    }

    #[test]
    fn constant_forcing_linear_problem_converges_to_stationary_solution() {
        let grid = build_grid(1, 8.0, 255).unwrap();
        let model = ModelSpec::linear(1.0);
        let forcing = constant_gaussian_forcing(1);
        let controls = SolverControls::with_dt(0.02);
        let rho = Field::new(
            grid,
            (0..grid.node_count())
                .map(|i| forcing.spatial.eval(&grid.node_coord(i)[..1]))
                .collect(),
        )
        .unwrap();
        let stationary = solve_stationary(&grid, 1.0, &rho).unwrap();
        let u0 = grid.sine_mode(&[1]).unwrap().scaled(3.0);
        let endpoint =
            pullback_solve(&model, &forcing, &grid, 0.0, 40.0, &u0, &controls).unwrap();
        let gap = crate::energy::l2_norm_sq(&endpoint.sub(&stationary).unwrap()).sqrt();
        assert!(gap < 1e-6, "gap {gap}");
    }

    #[test]
    fn richardson_halved_steps_differ_at_second_order() {
        let grid = build_grid(1, 4.0, 63).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = constant_gaussian_forcing(1);
        let u0 = grid.sine_mode(&[1]).unwrap();
        let dt = 0.2;
        let full = step(&model, &forcing, &grid, &u0, 0.0, &SolverControls::with_dt(dt)).unwrap();
        let halves = {
            let c = SolverControls::with_dt(dt / 2.0);
            let mid = step(&model, &forcing, &grid, &u0, 0.0, &c).unwrap();
            step(&model, &forcing, &grid, &mid, dt / 2.0, &c).unwrap()
        };
        let diff = crate::energy::l2_norm_sq(&full.sub(&halves).unwrap()).sqrt();
        // One step of a first-order scheme: local defect O(dt²).
        assert!(diff < 1.0 * dt * dt, "diff {diff}");
        assert!(diff > 1e-6 * dt * dt); // and genuinely nonzero
    }

    #[test]
    fn fully_implicit_agrees_with_imex_to_first_order_and_handles_stiff_data() {
        let grid = build_grid(1, 4.0, 63).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = zero_forcing(1);
        let u0 = grid.sine_mode(&[1]).unwrap().scaled(0.8);
        let dt = 0.05;
        let imex = step(&model, &forcing, &grid, &u0, 0.0, &SolverControls::with_dt(dt)).unwrap();
        let mut c = SolverControls::with_dt(dt);
        c.scheme = Scheme::FullyImplicit;
        let implicit = step(&model, &forcing, &grid, &u0, 0.0, &c).unwrap();
        let gap = crate::energy::l2_norm_sq(&imex.sub(&implicit).unwrap()).sqrt();
        // The schemes differ only in where f is evaluated: O(dt²) per step.
        assert!(gap < 5.0 * dt * dt, "gap {gap}");

        // Amplitudes far beyond the explicit comfort zone still step stably.
        let big = grid.sine_mode(&[1]).unwrap().scaled(50.0);
        let stepped = step(&model, &forcing, &grid, &big, 0.0, &c).unwrap();
        assert!(crate::energy::l2_norm_sq(&stepped) < crate::energy::l2_norm_sq(&big));
    }

    #[test]
    fn endpoint_convergence_first_order_in_dt_second_order_in_h() {
        // Smooth data on the default model with constant forcing.
        let model = ModelSpec::default_cubic(1.0);
        let forcing = constant_gaussian_forcing(1);
        let l = 4.0;
        let t_final = 1.0;
        let profile = |x: f64| (-x * x).exp();

        // dt-refinement on a fixed grid: endpoint differences halve with dt.
        let grid = build_grid(1, l, 127).unwrap();
        let u0 = Field::new(
            grid,
            (0..grid.node_count())
                .map(|i| profile(grid.node_coord(i)[0]))
                .collect(),
        )
        .unwrap();
        let run = |dt: f64| {
            evolve(
                &model,
                &forcing,
                &grid,
                &u0,
                0.0,
                t_final,
                &SolverControls::with_dt(dt),
            )
            .unwrap()
            .into_endpoint()
        };
        let (e1, e2, e4) = (run(0.08), run(0.04), run(0.02));
        let d12 = crate::energy::l2_norm_sq(&e1.sub(&e2).unwrap()).sqrt();
        let d24 = crate::energy::l2_norm_sq(&e2.sub(&e4).unwrap()).sqrt();
        let ratio = d12 / d24;
        assert!((1.6..2.6).contains(&ratio), "dt ratio {ratio}");

        // h-refinement with N -> 2N+1 keeps the coarse nodes in place, so
        // endpoints compare pointwise; differences shrink by about four.
        let endpoints: Vec<(Grid, Field)> = [63usize, 127, 255]
            .iter()
            .map(|&n| {
                let g = build_grid(1, l, n).unwrap();
                let u0 = Field::new(
                    g,
                    (0..g.node_count())
                        .map(|i| profile(g.node_coord(i)[0]))
                        .collect(),
                )
                .unwrap();
                let e = evolve(
                    &model,
                    &forcing,
                    &g,
                    &u0,
                    0.0,
                    t_final,
                    &SolverControls::with_dt(0.005),
                )
                .unwrap()
                .into_endpoint();
                (g, e)
            })
            .collect();
        let shared_gap = |coarse: &(Grid, Field), fine: &(Grid, Field)| -> f64 {
            let n = coarse.0.points_per_axis();
            (0..n)
                .map(|i| (coarse.1.values()[i] - fine.1.values()[2 * i + 1]).abs())
                .fold(0.0f64, f64::max)
        };
        let g12 = shared_gap(&endpoints[0], &endpoints[1]);
        let g23 = shared_gap(&endpoints[1], &endpoints[2]);
        let ratio_h = g12 / g23;
        assert!((3.0..5.5).contains(&ratio_h), "h ratio {ratio_h}");
    }

    #[test]
    fn blow_up_reports_failing_time() {
        // Sign-flipped reaction grows superlinearly; the run must abort with
        // a finite failing time instead of returning garbage.
        let grid = build_grid(1, 4.0, 63).unwrap();
        let mut model = ModelSpec::default_cubic(1.0);
        model.kind = crate::model::NonlinearityKind::PolynomialOdd {
            beta: -1.0,
            psi: SpatialProfile::Zero,
        };
        let forcing = zero_forcing(1);
        let controls = SolverControls::with_dt(0.01);
        let u0 = grid.sine_mode(&[1]).unwrap().scaled(4.0);
        match evolve(&model, &forcing, &grid, &u0, 0.0, 5.0, &controls) {
            Err(Error::BlowUp { time }) => assert!(time > 0.0 && time < 5.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn continuity_in_initial_data_obeys_one_sided_lipschitz_envelope() {
        let grid = build_grid(1, 4.0, 63).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = constant_gaussian_forcing(1);
        let controls = SolverControls::with_dt(0.01);
        let u0 = grid.sine_mode(&[1]).unwrap();
        let eps = 1e-3;
        let v0 = u0.add_scaled(eps, &grid.sine_mode(&[3]).unwrap()).unwrap();
        let t = 2.0;
        let ut = pullback_solve(&model, &forcing, &grid, t, t, &u0, &controls).unwrap();
        let vt = pullback_solve(&model, &forcing, &grid, t, t, &v0, &controls).unwrap();
        let d0 = crate::energy::l2_norm_sq(&v0.sub(&u0).unwrap()).sqrt();
        let dt_gap = crate::energy::l2_norm_sq(&vt.sub(&ut).unwrap()).sqrt();
        // alpha3 = lambda = 1: envelope e^{(α₃-λ)t} (1 + O(Δt)) ≈ 1.
        assert!(dt_gap <= d0 * (1.0 + 0.05), "gap {dt_gap} vs {d0}");
    }

    #[test]
    fn trajectory_lands_exactly_on_final_time_with_shortened_step() {
        let grid = build_grid(1, 2.0, 15).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = zero_forcing(1);
        let controls = SolverControls::with_dt(0.3);
        let u0 = grid.sine_mode(&[1]).unwrap();
        let traj = evolve(&model, &forcing, &grid, &u0, 0.0, 1.0, &controls).unwrap();
        let last = traj.diagnostics.last().unwrap();
        assert_eq!(last.t, 1.0);
        let final_dt = traj.final_step_size().unwrap();
        assert!((final_dt - 0.1).abs() < 1e-12);
        assert!(traj.penultimate().is_some());
    }

    #[test]
    fn snapshot_stride_records_requested_levels() {
        let grid = build_grid(1, 2.0, 15).unwrap();
        let model = ModelSpec::default_cubic(1.0);
        let forcing = zero_forcing(1);
        let mut controls = SolverControls::with_dt(0.25);
        controls.snapshot_stride = 2;
        let u0 = grid.sine_mode(&[1]).unwrap();
        let traj = evolve(&model, &forcing, &grid, &u0, 0.0, 1.0, &controls).unwrap();
        let times: Vec<f64> = traj.snapshots.iter().map(|(t, _)| *t).collect();
        assert_eq!(times, vec![0.0, 0.5, 1.0]);
    }
}
