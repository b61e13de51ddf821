//! A fully specified experiment: grid, equation data, stepping controls, the
//! tempered family probing the dynamics, and the reproducibility knobs shared
//! by every checker.

use rayon::prelude::*;

use crate::attractor::{sample_family, TemperedFamily};
use crate::domain::{Field, Grid};
use crate::energy::SlackPolicy;
use crate::error::{Error, Result};
use crate::model::{ForcingSpec, ModelSpec};
use crate::solver::{evolve, pullback_solve, SolverControls, Trajectory};

#[derive(Clone, Debug)]
pub struct Scenario {
    pub grid: Grid,
    pub model: ModelSpec,
    pub forcing: ForcingSpec,
    pub controls: SolverControls,
    pub family: TemperedFamily,
    /// Members drawn from the family per pullback run.
    pub ensemble: usize,
    pub seed: u64,
    pub slack: SlackPolicy,
    /// Relative tolerance for the forcing-weight quadratures.
    pub quad_rel_tol: f64,
}

impl Scenario {
    pub fn new(
        grid: Grid,
        model: ModelSpec,
        forcing: ForcingSpec,
        controls: SolverControls,
        family: TemperedFamily,
    ) -> Scenario {
        Scenario {
            grid,
            model,
            forcing,
            controls,
            family,
            ensemble: 8,
            seed: 42,
            slack: SlackPolicy::default(),
            quad_rel_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.forcing.validate(self.model.lambda)?;
        self.controls.validate(&self.model)?;
        self.family.validate(self.model.lambda)?;
        if self.forcing.dim() != self.grid.dimension() {
            return Err(Error::GridMismatch);
        }
        if self.ensemble == 0 {
            return Err(Error::InvalidParameter(
                "ensemble must have at least one member".into(),
            ));
        }
        if !(self.quad_rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Family sample at the pullback start time `tau - horizon`.
    pub fn sample_at(&self, tau: f64, horizon: f64) -> Result<Vec<Field>> {
        sample_family(
            &self.grid,
            &self.family,
            tau - horizon,
            self.ensemble,
            self.seed,
        )
    }

    /// Pulls the whole family sample back to the observation time `tau`.
    /// Members run concurrently; the returned order matches the sample order,
    /// keeping reductions deterministic.
    pub fn pullback_ensemble(&self, tau: f64, horizon: f64) -> Result<Vec<Field>> {
        let u0s = self.sample_at(tau, horizon)?;
        u0s.par_iter()
            .map(|u0| {
                pullback_solve(
                    &self.model,
                    &self.forcing,
                    &self.grid,
                    tau,
                    horizon,
                    u0,
                    &self.controls,
                )
            })
            .collect()
    }

    /// Same pullback runs but retaining per-step diagnostics.
    pub fn pullback_trajectories(&self, tau: f64, horizon: f64) -> Result<Vec<Trajectory>> {
        let u0s = self.sample_at(tau, horizon)?;
        let mut controls = self.controls.clone();
        controls.snapshot_stride = 0;
        u0s.par_iter()
            .map(|u0| {
                evolve(
                    &self.model,
                    &self.forcing,
                    &self.grid,
                    u0,
                    tau - horizon,
                    tau,
                    &controls,
                )
            })
            .collect()
    }

    /// `∫_{-∞}^τ e^{λξ} ‖g‖² dξ` with the scenario's tolerance.
    pub fn forcing_weight(&self, tau: f64) -> Result<f64> {
        crate::model::weighted_forcing_integral(
            &self.forcing,
            self.model.lambda,
            tau,
            self.quad_rel_tol,
        )
    }
}
