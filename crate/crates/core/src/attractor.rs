//! Pullback attractor approximation and its verification suite.
//!
//! The attracting family `𝒜(τ)` is approximated by pulling a finite ensemble
//! of absorbing-ball states back from ever earlier start times `τ - t` and
//! watching the endpoint sets stabilize in the Hausdorff semi-distance. The
//! intersection-of-unions formula behind the abstract existence result is not
//! finitely computable; stabilization across a horizon ladder plus
//! seed-independence of the limit set is the computable surrogate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Field, Grid};
use crate::energy::{h1_norm_sq, l2_norm_sq};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::solver::evolve;

/// Time-indexed family of L² balls with radius
/// `r(t) = R₀ (1 + |τ* - t|)^σ e^{γ |τ* - t|}` backward from the anchor `τ*`.
/// Tempered (eligible as a pullback basin) iff `2γ < λ`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TemperedFamily {
    pub base_radius: f64,
    pub poly_degree: f64,
    pub exp_rate: f64,
    pub anchor: f64,
}

impl TemperedFamily {
    pub fn constant(radius: f64, anchor: f64) -> TemperedFamily {
        TemperedFamily {
            base_radius: radius,
            poly_degree: 0.0,
            exp_rate: 0.0,
            anchor,
        }
    }

    pub fn radius(&self, t: f64) -> f64 {
        let s = (self.anchor - t).abs();
        self.base_radius * (1.0 + s).powf(self.poly_degree) * (self.exp_rate * s).exp()
    }

    /// Weighted size `e^{λt} r(t)²`, the quantity that must vanish as
    /// `t → -∞` for membership in the tempered universe.
    pub fn weighted_size(&self, lambda: f64, t: f64) -> f64 {
        let r = self.radius(t);
        (lambda * t).exp() * r * r
    }

    pub fn validate(&self, lambda: f64) -> Result<()> {
        if !(self.base_radius > 0.0) {
            return Err(Error::InvalidFamily(format!(
                "base radius must be positive, got {}",
                self.base_radius
            )));
        }
        if !(self.poly_degree >= 0.0) || !(self.exp_rate >= 0.0) {
            return Err(Error::InvalidFamily(
                "growth exponents must be nonnegative".into(),
            ));
        }
        if !(2.0 * self.exp_rate < lambda) {
            return Err(Error::InvalidFamily(format!(
                "temperedness needs 2*gamma < lambda; got gamma = {}, lambda = {}",
                self.exp_rate, lambda
            )));
        }
        // Numeric decay probe past the knee of the weighted size.
        let net = lambda - 2.0 * self.exp_rate;
        let knee = (2.0 * self.poly_degree / net - 1.0).max(0.0);
        let probes: Vec<f64> = (1..=3)
            .map(|j| self.weighted_size(lambda, self.anchor - knee - 10.0 * j as f64))
            .collect();
        if !(probes[1] < probes[0] && probes[2] < probes[1]) {
            return Err(Error::InvalidFamily(
                "weighted size fails to decay backward in time".into(),
            ));
        }
        Ok(())
    }
}

/// Norm used for set-to-set distances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetNorm {
    L2,
    H1,
}

fn diff_norm(a: &Field, b: &Field, norm: SetNorm) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(match norm {
        SetNorm::L2 => l2_norm_sq(&d).sqrt(),
        SetNorm::H1 => h1_norm_sq(&d).sqrt(),
    })
}

/// Hausdorff semi-distance `d(Y, Z) = max_{y ∈ Y} min_{z ∈ Z} ‖y - z‖`.
/// Asymmetric by design: it measures how far `Y` sticks out of `Z`.
pub fn hausdorff_semidistance(ys: &[Field], zs: &[Field], norm: SetNorm) -> Result<f64> {
    if ys.is_empty() || zs.is_empty() {
        return Err(Error::EmptySet);
    }
    let grid = ys[0].grid();
    if ys.iter().chain(zs.iter()).any(|f| f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let mut worst = 0.0f64;
    for y in ys {
        let mut best = f64::INFINITY;
        for z in zs {
            best = best.min(diff_norm(y, z, norm)?);
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Draws `count` fields of exact L² radius `r(t)` from the family's ball:
/// the scaled first eigenfunction with both signs, then seeded band-limited
/// combinations of low sine modes. Same inputs always produce the same set.
pub fn sample_family(
    grid: &Grid,
    family: &TemperedFamily,
    t: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Field>> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let r = family.radius(t);
    if !r.is_finite() || !(r > 0.0) {
        return Err(Error::InvalidFamily(format!(
            "family radius at t = {t} is {r}"
        )));
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ t.to_bits().rotate_left(17) ^ 0x9e37_79b9_7f4a_7c15);
    let dim = grid.dimension();
    let max_mode = if dim == 1 {
        8.min(grid.points_per_axis())
    } else {
        4.min(grid.points_per_axis())
    };

    let mut members = Vec::with_capacity(count);
    for idx in 0..count {
        let field = match idx {
            0 => grid.sine_mode(&vec![1; dim])?,
            1 => grid.sine_mode(&vec![1; dim])?.scaled(-1.0),
            _ => {
                let mut f = Field::zeros(*grid);
                if dim == 1 {
                    for k in 1..=max_mode {
                        let c: f64 = StandardNormal.sample(&mut rng);
                        let mode = grid.sine_mode(&[k])?;
                        f = f.add_scaled(c / (k * k) as f64, &mode)?;
                    }
                } else {
                    for k in 1..=max_mode {
                        for l in 1..=max_mode {
                            let c: f64 = StandardNormal.sample(&mut rng);
                            let mode = grid.sine_mode(&[k, l])?;
                            f = f.add_scaled(c / (k * k + l * l) as f64, &mode)?;
                        }
                    }
                }
                f
            }
        };
        let norm = l2_norm_sq(&field).sqrt();
        if norm < 1e-14 {
            return Err(Error::InvalidParameter(
                "degenerate sample with vanishing norm".into(),
            ));
        }
        members.push(field.scaled(r / norm));
    }
    Ok(members)
}

/// One rung of the pullback horizon ladder.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LadderStep {
    pub horizon: f64,
    /// `max(d(E_prev, E_next), d(E_next, E_prev))` in L².
    pub gap: f64,
}

/// Finite endpoint-set approximation of the attracting family at one
/// observation time.
#[derive(Clone, Debug)]
pub struct AttractorApprox {
    pub tau: f64,
    /// Pullback horizon of the returned endpoint set.
    pub horizon: f64,
    pub members: Vec<Field>,
    pub ensemble: usize,
    pub seed: u64,
    pub converged: bool,
    pub history: Vec<LadderStep>,
    /// Max pairwise L² distance of the members.
    pub diameter: f64,
    /// Row-major pairwise L² distances.
    pub pairwise: Vec<f64>,
}

fn finish_approx(
    sc: &Scenario,
    tau: f64,
    horizon: f64,
    members: Vec<Field>,
    converged: bool,
    history: Vec<LadderStep>,
) -> Result<AttractorApprox> {
    let m = members.len();
    let mut pairwise = vec![0.0; m * m];
    let mut diameter = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            let d = diff_norm(&members[i], &members[j], SetNorm::L2)?;
            pairwise[i * m + j] = d;
            pairwise[j * m + i] = d;
            diameter = diameter.max(d);
        }
    }
    Ok(AttractorApprox {
        tau,
        horizon,
        members,
        ensemble: sc.ensemble,
        seed: sc.seed,
        converged,
        history,
        diameter,
        pairwise,
    })
}

/// Pullback approximation of `𝒜(τ)`: march up the horizon ladder until two
/// consecutive endpoint sets agree to `tol` in both Hausdorff directions.
/// Non-convergence within the ladder is reported, not raised.
pub fn approximate_attractor(
    sc: &Scenario,
    tau: f64,
    ladder: &[f64],
    tol: f64,
) -> Result<AttractorApprox> {
    sc.validate()?;
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "horizon ladder must be increasing and positive with at least two rungs".into(),
        ));
    }
    if sc.ensemble < 2 {
        return Err(Error::InvalidParameter(
            "attractor approximation needs an ensemble of at least 2".into(),
        ));
    }
    let mut history = Vec::new();
    let mut prev = sc.pullback_ensemble(tau, ladder[0])?;
    let mut prev_horizon = ladder[0];
    for &t in &ladder[1..] {
        let next = sc.pullback_ensemble(tau, t)?;
        let gap = hausdorff_semidistance(&prev, &next, SetNorm::L2)?
            .max(hausdorff_semidistance(&next, &prev, SetNorm::L2)?);
        history.push(LadderStep { horizon: t, gap });
        if gap <= tol {
            return finish_approx(sc, tau, t, next, true, history);
        }
        prev = next;
        prev_horizon = t;
    }
    finish_approx(sc, tau, prev_horizon, prev, false, history)
}

/// Invariance diagnostic: evolving `𝒜(τ)` forward by `s` should land on an
/// independently recomputed `𝒜(τ + s)` within set-approximation error.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub tau: f64,
    pub forward_time: f64,
    pub distance_forward: f64,
    pub distance_backward: f64,
    pub diameter: f64,
    pub threshold: f64,
    pub target_converged: bool,
    pub pass: bool,
}

pub fn check_invariance(
    sc: &Scenario,
    approx: &AttractorApprox,
    s: f64,
    ladder: &[f64],
    tol_attractor: f64,
    tol_invariance: f64,
    diameter_fraction: f64,
) -> Result<InvarianceReport> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "forward time must be positive, got {s}"
        )));
    }
    let tau = approx.tau;
    let forward: Vec<Field> = approx
        .members
        .par_iter()
        .map(|u| {
            evolve(
                &sc.model,
                &sc.forcing,
                &sc.grid,
                u,
                tau,
                tau + s,
                &sc.controls,
            )
            .map(|t| t.into_endpoint())
        })
        .collect::<Result<_>>()?;
    let target = approximate_attractor(sc, tau + s, ladder, tol_attractor)?;
    let distance_forward = hausdorff_semidistance(&forward, &target.members, SetNorm::L2)?;
    let distance_backward = hausdorff_semidistance(&target.members, &forward, SetNorm::L2)?;
    let diameter = approx.diameter.max(target.diameter);
    let threshold = tol_invariance.max(diameter_fraction * diameter);
    Ok(InvarianceReport {
        tau,
        forward_time: s,
        distance_forward,
        distance_backward,
        diameter,
        threshold,
        target_converged: target.converged,
        pass: distance_forward <= threshold && distance_backward <= threshold,
    })
}

/// Attraction diagnostic: pullback distances from a tempered family to the
/// approximated attractor along a horizon sequence.
#[derive(Clone, Debug, Serialize)]
pub struct AttractionReport {
    pub tau: f64,
    pub norm: SetNorm,
    pub horizons: Vec<f64>,
    pub distances: Vec<f64>,
    /// First horizon from which the sequence is nonincreasing, if any.
    pub decreasing_from: Option<f64>,
    pub final_distance: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_attraction(
    sc: &Scenario,
    approx: &AttractorApprox,
    basin: &TemperedFamily,
    horizons: &[f64],
    norm: SetNorm,
    tol: f64,
) -> Result<AttractionReport> {
    if horizons.is_empty() || horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "attraction horizons must be increasing and nonempty".into(),
        ));
    }
    basin.validate(sc.model.lambda)?;
    let tau = approx.tau;
    let mut distances = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let u0s = sample_family(&sc.grid, basin, tau - t, sc.ensemble, sc.seed)?;
        let endpoints: Vec<Field> = u0s
            .par_iter()
            .map(|u0| {
                crate::solver::pullback_solve(
                    &sc.model,
                    &sc.forcing,
                    &sc.grid,
                    tau,
                    t,
                    u0,
                    &sc.controls,
                )
            })
            .collect::<Result<_>>()?;
        distances.push(hausdorff_semidistance(&endpoints, &approx.members, norm)?);
    }
    let mut decreasing_from = None;
    for i in 0..distances.len() {
        if distances[i..]
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15)
        {
            decreasing_from = Some(horizons[i]);
            break;
        }
    }
    let final_distance = *distances.last().unwrap();
    let pass = decreasing_from.is_some() && final_distance <= tol;
    Ok(AttractionReport {
        tau,
        norm,
        horizons: horizons.to_vec(),
        distances,
        decreasing_from,
        final_distance,
        tol,
        pass,
    })
}
