//! Acceptance suite: one test per acceptance criterion, each printing a
//! single PASS line on success (run with `--nocapture` to see them).
//!
//! Shared expensive fixtures (the showcase scenario and its approximated
//! attractor) are computed once and reused across criteria.

use once_cell::sync::Lazy;

use pullback_lab::attractor::{
    approximate_attractor, check_attraction, check_invariance, hausdorff_semidistance,
    sample_family, AttractorApprox, SetNorm, TemperedFamily,
};
use pullback_lab::domain::{build_grid, Field};
use pullback_lab::energy::{
    energy_residual, energy_residual_slacks, h1_norm_sq, l2_norm_sq, SlackPolicy,
};
use pullback_lab::estimates::{
    check_absorbing_l2, check_h1_bound, check_h1_cauchy, check_tail, check_ut_bound,
    observed_ut_sq,
};
use pullback_lab::model::{
    forcing_tail_integral, verify_structure, ForcingSpec, ModelSpec, NonlinearityKind,
    SpatialProfile, TemporalKind,
};
use pullback_lab::scenario::Scenario;
use pullback_lab::solver::{evolve, solve_stationary, SolverControls};

const HORIZONS: [f64; 4] = [5.0, 10.0, 20.0, 40.0];

fn gaussian_forcing(amplitude: f64) -> ForcingSpec {
    ForcingSpec::new(
        1,
        amplitude,
        TemporalKind::Exponential { rate: 0.0 },
        SpatialProfile::Gaussian,
    )
    .unwrap()
}

/// Desk-scale showcase scenario: cubic model, constant Gaussian forcing,
/// N = 511 on [-8, 8].
fn showcase_scenario() -> Scenario {
    let grid = build_grid(1, 8.0, 511).unwrap();
    let mut sc = Scenario::new(
        grid,
        ModelSpec::default_cubic(1.0),
        gaussian_forcing(1.0),
        SolverControls::with_dt(0.01),
        TemperedFamily::constant(2.0, 0.0),
    );
    sc.ensemble = 8;
    sc.seed = 42;
    sc
}

fn linear_scenario() -> Scenario {
    Scenario {
        model: ModelSpec::linear(1.0),
        ..showcase_scenario()
    }
}

static SHOWCASE: Lazy<Scenario> = Lazy::new(showcase_scenario);

static SHOWCASE_ATTRACTOR: Lazy<AttractorApprox> =
    Lazy::new(|| approximate_attractor(&SHOWCASE, 0.0, &HORIZONS, 1e-4).unwrap());

#[test]
fn criterion_01_linear_decay_oracle() {
    // f = 0, g = 0, lambda = 1, first eigenfunction, dt = 1e-3, t = 5.
    let grid = build_grid(1, 8.0, 511).unwrap();
    let model = ModelSpec::linear(1.0);
    let forcing = gaussian_forcing(0.0);
    let dt = 1e-3;
    let controls = SolverControls::with_dt(dt);
    let raw = grid.sine_mode(&[1]).unwrap();
    let u0 = raw.scaled(1.0 / l2_norm_sq(&raw).sqrt());
    let t_final = 5.0;
    let steps = (t_final / dt).round() as i32;

    let traj = evolve(&model, &forcing, &grid, &u0, 0.0, t_final, &controls).unwrap();
    let got = l2_norm_sq(traj.endpoint()).sqrt();

    let mu_h = grid.sine_eigenvalue(&[1]).unwrap();
    let discrete = (1.0 + dt * (1.0 + mu_h)).powi(-steps);
    let rel = (got - discrete).abs() / discrete;
    assert!(rel <= 1e-10, "discrete closed form relative error {rel:.3e}");

    let mu_continuum = (std::f64::consts::PI / 16.0).powi(2);
    let continuum = (-(1.0 + mu_continuum) * t_final).exp();
    let gap = (got - continuum).abs();
    assert!(gap <= 1e-3, "continuum-rate gap {gap:.3e}");
    println!(
        "ACCEPTANCE 1 PASS linear decay: closed-form rel err {rel:.2e}, continuum gap {gap:.2e}"
    );
}

#[test]
fn criterion_02_energy_inequality_residuals() {
    // Showcase run of length 20: every per-step residual within slack, c = 10.
    let sc = &*SHOWCASE;
    let u0 = sample_family(&sc.grid, &sc.family, 0.0, 1, sc.seed)
        .unwrap()
        .remove(0);
    let traj = evolve(&sc.model, &sc.forcing, &sc.grid, &u0, 0.0, 20.0, &sc.controls).unwrap();
    let residuals = energy_residual(&sc.model, &sc.forcing, &traj).unwrap();
    let slacks = energy_residual_slacks(&sc.model, &traj, &SlackPolicy { c: 10.0 }).unwrap();
    let violations = residuals
        .iter()
        .zip(&slacks)
        .filter(|(r, s)| r > s)
        .count();
    assert_eq!(violations, 0, "raw positive residuals beyond slack");
    println!(
        "ACCEPTANCE 2 PASS energy inequality: {} steps, 0 residual violations",
        residuals.len()
    );
}

#[test]
fn criterion_03_absorbing_bound() {
    let report = check_absorbing_l2(&SHOWCASE, 0.0, &HORIZONS).unwrap();
    assert!(report.pass, "{report:?}");
    for e in report.entries.iter().filter(|e| e.horizon >= 10.0) {
        assert!(e.margin >= 0.0, "horizon {}: margin {}", e.horizon, e.margin);
    }
    println!(
        "ACCEPTANCE 3 PASS absorbing bound: worst margin {:.3e} over horizons >= 10",
        report
            .entries
            .iter()
            .filter(|e| e.horizon >= 10.0)
            .map(|e| e.margin)
            .fold(f64::INFINITY, f64::min)
    );
}

#[test]
fn criterion_04_h1_and_ut_bounds_with_refinement() {
    let sc = &*SHOWCASE;
    let windowed: Vec<f64> = HORIZONS.to_vec();
    let h1 = check_h1_bound(sc, 0.0, &windowed).unwrap();
    let ut = check_ut_bound(sc, 0.0, &windowed).unwrap();
    assert!(h1.pass && ut.pass, "h1 {h1:?}, ut {ut:?}");
    for e in h1.entries.iter().chain(&ut.entries) {
        if e.horizon >= 10.0 {
            assert!(e.margin >= 0.0, "{e:?}");
        }
    }

    // O(dt) error model of the endpoint derivative: halving dt moves the
    // backward difference by no more than 10%.
    let coarse = observed_ut_sq(sc, 0.0, 10.0).unwrap().sqrt();
    let mut refined_sc = sc.clone();
    refined_sc.controls.dt = sc.controls.dt / 2.0;
    let fine = observed_ut_sq(&refined_sc, 0.0, 10.0).unwrap().sqrt();
    let rel = (coarse - fine).abs() / coarse.max(fine);
    assert!(rel <= 0.10, "refinement moved u_t by {:.2}%", rel * 100.0);
    println!(
        "ACCEPTANCE 4 PASS H1/u_t bounds: margins >= 0, u_t refinement shift {:.2}%",
        rel * 100.0
    );
}

#[test]
fn criterion_05_tail_estimates() {
    let sc = &*SHOWCASE;
    let radii = [1.0, 2.0, 3.0, 4.0];
    let report = check_tail(sc, 0.0, 1e-3, &HORIZONS, &radii).unwrap();
    assert!(report.pass, "{report:?}");
    assert_eq!(report.monotone_in_radius, Some(true));
    let k_emp = report.empirical_radius.expect("finite empirical radius");
    let t_emp = report.empirical_horizon.expect("finite empirical horizon");
    assert!(
        k_emp <= sc.grid.radius() / std::f64::consts::SQRT_2 + 1e-12,
        "empirical radius {k_emp}"
    );

    // Gaussian forcing tail integrals against an independent brute-force
    // quadrature (fine Simpson far beyond the truncation box).
    for k in [1.0f64, 2.0, 3.0] {
        let got = forcing_tail_integral(&sc.forcing, 1.0, 0.0, k, 1e-12).unwrap();
        let oracle = {
            let n = 600_000usize;
            let (a, b) = (k, 40.0);
            let h = (b - a) / n as f64;
            let f = |x: f64| (-2.0 * x * x).exp();
            let mut acc = f(a) + f(b);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
            }
            2.0 * acc * h / 3.0 // both tails; temporal weight is 1 here
        };
        assert!(
            (got - oracle).abs() <= 1e-6,
            "k = {k}: got {got:.9e}, oracle {oracle:.9e}"
        );
    }
    println!(
        "ACCEPTANCE 5 PASS tails: empirical (K, T) = ({k_emp:.3}, {t_emp}), monotone in k, \
         quadrature agreement <= 1e-6"
    );
}

#[test]
fn criterion_06_attractor_convergence() {
    // Stationary linear configuration: the approximated attractor collapses
    // onto the direct-solve singleton in L2 and H1.
    let lin = linear_scenario();
    let approx = approximate_attractor(&lin, 0.0, &HORIZONS, 1e-6).unwrap();
    assert!(approx.converged);
    let rho = Field::new(
        lin.grid,
        (0..lin.grid.node_count())
            .map(|i| lin.forcing.spatial.eval(&lin.grid.node_coord(i)[..1]))
            .collect(),
    )
    .unwrap();
    let stationary = solve_stationary(&lin.grid, 1.0, &rho).unwrap();
    let mut worst_l2 = 0.0f64;
    let mut worst_h1 = 0.0f64;
    for m in &approx.members {
        let diff = m.sub(&stationary).unwrap();
        worst_l2 = worst_l2.max(l2_norm_sq(&diff).sqrt());
        worst_h1 = worst_h1.max(h1_norm_sq(&diff).sqrt());
    }
    assert!(worst_l2 <= 1e-6, "L2 gap {worst_l2:.3e}");
    assert!(worst_h1 <= 1e-6, "H1 gap {worst_h1:.3e}");

    // Default nonlinear configuration: ladder gaps decrease monotonically and
    // drop below 1e-4 by horizon 40.
    let approx_default = &*SHOWCASE_ATTRACTOR;
    assert!(approx_default.converged);
    assert!(approx_default.horizon <= 40.0);
    let gaps: Vec<f64> = approx_default.history.iter().map(|s| s.gap).collect();
    assert!(
        gaps.windows(2).all(|w| w[1] <= w[0]),
        "gaps not monotone: {gaps:?}"
    );
    assert!(*gaps.last().unwrap() <= 1e-4);

    // Seed independence of the limit set.
    let mut reseeded = SHOWCASE.clone();
    reseeded.seed = 4711;
    let other = approximate_attractor(&reseeded, 0.0, &HORIZONS, 1e-4).unwrap();
    let d_ab =
        hausdorff_semidistance(&approx_default.members, &other.members, SetNorm::L2).unwrap();
    let d_ba =
        hausdorff_semidistance(&other.members, &approx_default.members, SetNorm::L2).unwrap();
    assert!(d_ab <= 2e-4 && d_ba <= 2e-4, "seed gap {d_ab:.3e}/{d_ba:.3e}");
    println!(
        "ACCEPTANCE 6 PASS attractor convergence: singleton gaps (L2 {worst_l2:.2e}, H1 \
         {worst_h1:.2e}), ladder gaps {gaps:?}, seed gap {:.2e}",
        d_ab.max(d_ba)
    );
}

#[test]
fn criterion_07_invariance() {
    let report = check_invariance(
        &SHOWCASE,
        &SHOWCASE_ATTRACTOR,
        1.0,
        &HORIZONS,
        1e-4,
        1e-3,
        0.05,
    )
    .unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.distance_forward <= report.threshold);
    assert!(report.distance_backward <= report.threshold);
    println!(
        "ACCEPTANCE 7 PASS invariance: forward {:.2e}, backward {:.2e}, threshold {:.2e}",
        report.distance_forward, report.distance_backward, report.threshold
    );
}

#[test]
fn criterion_08_h1_attraction_and_cauchy() {
    let sc = &*SHOWCASE;
    let attraction = check_attraction(
        sc,
        &SHOWCASE_ATTRACTOR,
        &sc.family,
        &HORIZONS,
        SetNorm::H1,
        1e-3,
    )
    .unwrap();
    assert!(attraction.pass, "{attraction:?}");
    assert!(*attraction.distances.last().unwrap() <= 1e-3);

    let cauchy = check_h1_cauchy(sc, 0.0, &[(20.0, 40.0)]).unwrap();
    assert!(cauchy.pass, "{cauchy:?}");
    assert!(cauchy.entries[0].margin >= 0.0);
    println!(
        "ACCEPTANCE 8 PASS H1 attraction {:.2e} at t = 40; Cauchy margin {:.2e}",
        attraction.distances.last().unwrap(),
        cauchy.entries[0].margin
    );
}

#[test]
fn criterion_09_structural_validator() {
    let grid = build_grid(1, 8.0, 511).unwrap();

    let good = verify_structure(
        &ModelSpec::default_cubic(1.0),
        &grid,
        (-10.0, 10.0),
        10_000,
    )
    .unwrap();
    assert!(good.pass);
    assert!(good.conditions.iter().all(|c| c.violations == 0));

    // f(s) = +s^3 violates dissipativity.
    let mut grower = ModelSpec::default_cubic(1.0);
    grower.kind = NonlinearityKind::PolynomialOdd {
        beta: -1.0,
        psi: SpatialProfile::Zero,
    };
    let bad = verify_structure(&grower, &grid, (-10.0, 10.0), 10_000).unwrap();
    assert!(!bad.pass);
    let diss = &bad.conditions[0];
    assert_eq!(diss.condition, "dissipativity");
    assert!(diss.violations > 0 && diss.worst_margin < 0.0);
    assert!(diss.witness_s.is_finite());

    // f(s) = s against a declared slope cap of 1/2 violates the one-sided
    // slope condition.
    let mut steep = ModelSpec::default_cubic(1.0);
    steep.kind = NonlinearityKind::Linear { slope: 1.0 };
    steep.alpha3 = 0.5;
    let bad2 = verify_structure(&steep, &grid, (-10.0, 10.0), 10_000).unwrap();
    assert!(!bad2.pass);
    let slope = bad2
        .conditions
        .iter()
        .find(|c| c.condition == "one_sided_slope")
        .unwrap();
    assert!(slope.violations > 0 && slope.worst_margin < 0.0);
    println!(
        "ACCEPTANCE 9 PASS structural validator: default clean; tampered models rejected with \
         witnesses s = {:.3} and s = {:.3}",
        diss.witness_s, slope.witness_s
    );
}

#[test]
fn criterion_10_deterministic_artifacts() {
    use pullback_lab_cli::config::ExperimentConfig;
    use pullback_lab_cli::runner::run_experiment;

    // Reduced-size experiment exercising every task and artifact kind.
    let cfg: ExperimentConfig = toml::from_str(
        r#"
        [grid]
        dimension = 1
        radius = 8.0
        points_per_axis = 127

        [solver]
        dt = 0.02
        snapshot_stride = 20

        [family]
        ensemble = 4
        seed = 42

        [tasks]
        horizons = [3.0, 6.0]
        ladder = [3.0, 6.0, 12.0]
        radii = [1.0, 2.0, 4.0]
        simulate_time = 3.0
        cauchy_pairs = [[3.0, 6.0]]
        structure_samples = 500
        "#,
    )
    .unwrap();

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let sum_a = run_experiment(&cfg, dir_a.path(), None, None).unwrap();
    let sum_b = run_experiment(&cfg, dir_b.path(), None, None).unwrap();
    assert_eq!(sum_a.exit_code(), sum_b.exit_code());

    fn collect(dir: &std::path::Path, base: &std::path::Path, out: &mut Vec<String>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap())
            .collect();
        entries.sort_by_key(|e| e.file_name());
        for e in entries {
            let p = e.path();
            if p.is_dir() {
                collect(&p, base, out);
            } else {
                out.push(p.strip_prefix(base).unwrap().display().to_string());
            }
        }
    }
    let mut files_a = Vec::new();
    let mut files_b = Vec::new();
    collect(dir_a.path(), dir_a.path(), &mut files_a);
    collect(dir_b.path(), dir_b.path(), &mut files_b);
    assert_eq!(files_a, files_b);
    assert!(!files_a.is_empty());
    for rel in &files_a {
        let a = std::fs::read(dir_a.path().join(rel)).unwrap();
        let b = std::fs::read(dir_b.path().join(rel)).unwrap();
        assert_eq!(a, b, "artifact {rel} differs between identical runs");
    }
    println!(
        "ACCEPTANCE 10 PASS determinism: {} artifacts byte-identical across repeated runs",
        files_a.len()
    );
}
