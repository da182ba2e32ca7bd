use super::*;
use crate::mesh::generate_uniform_rectangle_mesh;
use crate::potential::{StirrerPotential, ZeroPotential};
use crate::propagator::linear_flow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn unit_square(n: usize) -> Arc<Mesh> {
    Arc::new(generate_uniform_rectangle_mesh(n, n, 1.0, 1.0).unwrap())
}

fn random_field(mesh: &Arc<Mesh>, rng: &mut impl Rng) -> GridFunction {
    let values = (0..mesh.n_cells())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridFunction::from_values(mesh.clone(), values)
}

#[test]
fn nonlinear_flow_basics() {
    let mesh = unit_square(2);
    let zero = GridFunction::zeros(mesh.clone());
    assert!(nonlinear_flow(&zero, 0.7, 1.0).values().iter().all(|v| v.norm() == 0.0));

    let ones = GridFunction::constant(mesh.clone(), Complex64::new(1.0, 0.0));
    let flipped = nonlinear_flow(&ones, PI, 1.0);
    for v in flipped.values() {
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = random_field(&mesh, &mut rng);
    let v = nonlinear_flow(&u, 0.37, 3.5);
    assert!((v.l2_norm() - u.l2_norm()).abs() <= 1e-15 * u.l2_norm());
    for (a, b) in v.values().iter().zip(u.values()) {
        assert!((a.norm() - b.norm()).abs() <= 4.0 * f64::EPSILON * b.norm().max(1.0));
    }
}

#[test]
fn potential_flow_basics() {
    let mesh = unit_square(3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = random_field(&mesh, &mut rng);

    let zero_phase = RealGridFunction::zeros(mesh.clone());
    let same = potential_flow(&u, &zero_phase);
    for (a, b) in same.values().iter().zip(u.values()) {
        assert_eq!(a, b);
    }

    let two_pi = RealGridFunction::constant(mesh.clone(), 2.0 * PI);
    let wrapped = potential_flow(&u, &two_pi);
    for (a, b) in wrapped.values().iter().zip(u.values()) {
        assert!((a - b).norm() <= 4.0 * f64::EPSILON * b.norm().max(1.0));
    }

    // Phase additivity.
    let g1 = RealGridFunction::sample(mesh.clone(), |p| 1.3 * p.x - p.y);
    let g2 = RealGridFunction::sample(mesh.clone(), |p| 0.4 * p.y * p.x);
    let g12 = RealGridFunction::from_values(
        mesh,
        g1.values().iter().zip(g2.values()).map(|(a, b)| a + b).collect(),
    );
    let seq = potential_flow(&potential_flow(&u, &g1), &g2);
    let once = potential_flow(&u, &g12);
    for (a, b) in seq.values().iter().zip(once.values()) {
        assert!((a - b).norm() <= 1e-14 * b.norm().max(1.0));
    }
}

#[test]
fn degenerate_split_reduces_to_linear_flow() {
    let mesh = unit_square(4);
    let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
    let mut config = SolverConfig::new(0.05, 0.05);
    config.lambda = 0.0;
    config.bc_mode = BcMode::InteriorOnly;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = random_field(&mesh, &mut rng);

    let pure = linear_flow(&u, 0.05, &a, &LinearSolver::DirectLu).unwrap();
    let lie = lie_step(&u, 0.0, &config, &a, &ZeroPotential).unwrap();
    let strang = strang_step(&u, 0.0, &config, &a, &ZeroPotential).unwrap();
    for ((p, l), s) in pure.values().iter().zip(lie.values()).zip(strang.values()) {
        assert_eq!(p, l);
        assert_eq!(p, s);
    }
}

#[test]
fn one_step_preserves_mass() {
    let mesh = unit_square(8);
    let a = assemble_laplacian(&mesh, BcMode::DirichletFlux);
    let config = SolverConfig::new(0.01, 0.01);
    let pot = StirrerPotential { v0: 10.0, eps: 0.2, omega: 3.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_field(&mesh, &mut rng);
    let v = lie_step(&u, 0.0, &config, &a, &pot).unwrap();
    assert!((v.l2_norm() - u.l2_norm()).abs() <= 1e-12 * u.l2_norm());
}

/// Reference integrator for the semi-discrete system
/// dU/dt = i (AU - λ|U|²U - V(t)U).
fn reference_solve(
    mesh: &Arc<Mesh>,
    a: &SparseOperator,
    pot: &dyn Potential,
    lambda: f64,
    u0: &GridFunction,
    tau: f64,
    substeps: usize,
) -> GridFunction {
    let n = mesh.n_cells();
    let rhs = |t: f64, u: &[Complex64]| -> Vec<Complex64> {
        let mut au = vec![Complex64::new(0.0, 0.0); n];
        a.apply_slice(u, &mut au);
        (0..n)
            .map(|k| {
                let v = pot.value(t, mesh.cells[k].center);
                Complex64::i() * (au[k] - lambda * u[k].norm_sqr() * u[k] - v * u[k])
            })
            .collect()
    };
    let mut u: Vec<Complex64> = u0.values().to_vec();
    let dt = tau / substeps as f64;
    let mut t = 0.0;
    for _ in 0..substeps {
        let k1 = rhs(t, &u);
        let u2: Vec<_> = (0..n).map(|i| u[i] + 0.5 * dt * k1[i]).collect();
        let k2 = rhs(t + 0.5 * dt, &u2);
        let u3: Vec<_> = (0..n).map(|i| u[i] + 0.5 * dt * k2[i]).collect();
        let k3 = rhs(t + 0.5 * dt, &u3);
        let u4: Vec<_> = (0..n).map(|i| u[i] + dt * k3[i]).collect();
        let k4 = rhs(t + dt, &u4);
        for i in 0..n {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += dt;
    }
    GridFunction::from_values(mesh.clone(), u)
}

#[test]
fn lie_step_local_error_is_second_order() {
    let mesh = unit_square(3);
    let a = assemble_laplacian(&mesh, BcMode::DirichletFlux);
    let pot = StirrerPotential { v0: 3.0, eps: 0.4, omega: 2.0 };
    let u0 = GridFunction::sample(mesh.clone(), |p| {
        Complex64::new(
            (-2.0 * ((p.x - 0.5).powi(2) + (p.y - 0.5).powi(2))).exp(),
            0.1 * p.x,
        )
    });
    let mut errors = Vec::new();
    for k in 0..3 {
        let tau = 0.02 / (1 << k) as f64;
        let config = SolverConfig::new(tau, tau);
        let stepped = lie_step(&u0, 0.0, &config, &a, &pot).unwrap();
        let reference = reference_solve(&mesh, &a, &pot, 1.0, &u0, tau, 400);
        errors.push(stepped.sub(&reference).l2_norm());
    }
    for w in errors.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!(slope >= 1.7, "local error order too low: {slope} ({errors:?})");
    }
}

#[test]
fn eigenvector_accumulates_the_pade_phase() {
    let mesh = unit_square(16);
    let a = assemble_laplacian(&mesh, BcMode::DirichletFlux);
    let u0 = GridFunction::sample(mesh.clone(), |p| {
        Complex64::new((PI * p.x).sin() * (PI * p.y).sin(), 0.0)
    });
    // P_h of the sine mode is an exact eigenvector of the Dirichlet-flux
    // operator on a uniform square mesh.
    let mu = a.apply(&u0).inner_product(&u0).re / u0.inner_product(&u0).re;

    let tau = 0.01;
    let n = 20;
    let mut config = SolverConfig::new(tau, tau * n as f64);
    config.lambda = 0.0;
    let out = run_simulation(&ZeroPotential, &u0, &config, RunOptions::default()).unwrap();

    let c = (Complex64::new(1.0, 0.0) + Complex64::new(0.0, 0.5 * tau * mu))
        / (Complex64::new(1.0, 0.0) - Complex64::new(0.0, 0.5 * tau * mu));
    let phase = c.powu(n);
    let expected = u0.map(|v| phase * v);
    let err = out.final_state.sub(&expected).l2_norm() / u0.l2_norm();
    assert!(err <= 1e-10, "eigenvector phase error {err}");
    for (a, b) in out.final_state.values().iter().zip(u0.values()) {
        assert!((a.norm() - b.norm()).abs() <= 1e-10);
    }
}

#[test]
fn run_simulation_single_step_equals_lie_step() {
    let mesh = unit_square(6);
    let a = assemble_laplacian(&mesh, BcMode::DirichletFlux);
    let pot = StirrerPotential { v0: 5.0, eps: 0.1, omega: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let u0 = random_field(&mesh, &mut rng);
    let config = SolverConfig::new(0.02, 0.02);
    let out = run_simulation(&pot, &u0, &config, RunOptions::default()).unwrap();
    let single = lie_step(&u0, 0.0, &config, &a, &pot).unwrap();
    for (a, b) in out.final_state.values().iter().zip(single.values()) {
        assert_eq!(a, b);
    }
    assert_eq!(out.diagnostics.records.len(), 2);
}

#[test]
fn discrete_energy_basics() {
    let mesh = unit_square(8);
    let zero = GridFunction::zeros(mesh.clone());
    assert_eq!(discrete_energy(&zero, 0.0, &ZeroPotential, 1.0), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let u = random_field(&mesh, &mut rng);
    let e = discrete_energy(&u, 0.0, &ZeroPotential, 0.0);
    assert!((e - 0.5 * u.h1_seminorm().powi(2)).abs() <= 1e-13 * e.abs().max(1.0));

    // Conserved exactly by the linear flow in interior-only mode.
    let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
    let v = linear_flow(&u, 0.03, &a, &LinearSolver::DirectLu).unwrap();
    let e2 = discrete_energy(&v, 0.03, &ZeroPotential, 0.0);
    assert!((e2 - e).abs() <= 1e-11 * e.abs());
}

#[test]
fn energy_drift_shrinks_with_tau() {
    // Time-independent potential; the splitting energy error is O(τ). The
    // interior-only operator makes E_h the exact invariant of the
    // semi-discrete flow (the Dirichlet-flux one adds a boundary quadratic
    // term not part of the H¹_h seminorm).
    let mesh = unit_square(12);
    let pot = StirrerPotential { v0: 10.0, eps: 0.3, omega: 0.0 };
    let u0 = GridFunction::sample(mesh.clone(), |p| {
        Complex64::new((-4.0 * ((p.x - 0.5).powi(2) + (p.y - 0.5).powi(2))).exp(), 0.0)
    });
    let drift_at = |tau: f64| {
        let mut config = SolverConfig::new(tau, 0.4);
        config.bc_mode = BcMode::InteriorOnly;
        let out = run_simulation(&pot, &u0, &config, RunOptions::default()).unwrap();
        let e0 = out.diagnostics.records[0].energy;
        out.diagnostics
            .records
            .iter()
            .map(|r| (r.energy - e0).abs())
            .fold(0.0, f64::max)
    };
    let drifts = [drift_at(0.02), drift_at(0.01), drift_at(0.005)];
    assert!(drifts[1] <= 0.8 * drifts[0], "energy drift not shrinking: {drifts:?}");
    assert!(drifts[2] <= 0.8 * drifts[1], "energy drift not shrinking: {drifts:?}");
}

#[test]
fn snapshots_are_taken_at_nearest_steps() {
    let mesh = unit_square(4);
    let u0 = GridFunction::constant(mesh, Complex64::new(1.0, 0.0));
    let config = SolverConfig::new(0.1, 1.0);
    let options = RunOptions {
        snapshot_times: &[0.0, 0.52, 1.0],
        ..Default::default()
    };
    let out = run_simulation(&ZeroPotential, &u0, &config, options).unwrap();
    assert_eq!(out.snapshots.len(), 3);
    assert_eq!(out.snapshots[0].0, 0.0);
    assert_eq!(out.snapshots[1].0, 0.52);
    // The 0.52 snapshot is the state at step 5.
    assert_eq!(out.snapshots[2].0, 1.0);
}

#[test]
fn diagnostics_csv_header_and_stride() {
    let mesh = unit_square(4);
    let u0 = GridFunction::constant(mesh, Complex64::new(1.0, 0.0));
    let config = SolverConfig::new(0.1, 1.0);
    let options = RunOptions { diag_stride: 4, ..Default::default() };
    let out = run_simulation(&ZeroPotential, &u0, &config, options).unwrap();
    // Steps 0, 4, 8, 10 (final always recorded).
    let ns: Vec<usize> = out.diagnostics.records.iter().map(|r| r.n).collect();
    assert_eq!(ns, vec![0, 4, 8, 10]);
    let mut buf = Vec::new();
    out.diagnostics.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("n,t,mass,h1,energy,linf\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn non_finite_states_abort_with_step_index() {
    let mesh = unit_square(2);
    let u0 = GridFunction::constant(mesh, Complex64::new(1e200, 0.0));
    let mut config = SolverConfig::new(0.1, 0.5);
    config.lambda = 1e200; // λ|U|² overflows, poisoning the phase
    let err = run_simulation(&ZeroPotential, &u0, &config, RunOptions::default());
    assert!(matches!(err, Err(SolveError::NonFinite { step: 1 })), "{err:?}");
}

#[test]
fn cfl_policy_is_enforced() {
    let mesh = unit_square(64); // h small enough for |log h|² to bite
    let a = assemble_laplacian(&mesh, BcMode::DirichletFlux);
    let mut config = SolverConfig::new(0.5, 0.5);
    assert!(config.cfl_value(mesh.h) > 1.0);

    config.cfl = CflPolicy::Error;
    let err = Stepper::new(&mesh, &a, &ZeroPotential, config);
    assert!(matches!(err, Err(SolveError::CflViolation { .. })));

    config.cfl = CflPolicy::Warn;
    assert!(Stepper::new(&mesh, &a, &ZeroPotential, config).is_ok());
    config.cfl = CflPolicy::Off;
    assert!(Stepper::new(&mesh, &a, &ZeroPotential, config).is_ok());
}

#[test]
fn config_validation_rejects_bad_step_counts() {
    let config = SolverConfig::new(0.3, 1.0);
    assert!(matches!(config.validate(), Err(SolveError::InvalidConfig(_))));
    assert!(SolverConfig::new(0.25, 1.0).validate().is_ok());
    assert!(SolverConfig::new(-0.1, 1.0).validate().is_err());
    assert!(SolverConfig::new(0.5, 0.25).validate().is_err());
}
