//! Convergence-study drivers: scenario presets, the Richardson time-order
//! estimate and spatial error measurement against closed-form references.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::config::{BuiltinMesh, InitialCondition, MeshSource, PotentialConfig};
use crate::field::GridFunction;
use crate::geometry::Point2;
use crate::gmsh::GmshError;
use crate::mesh::{Mesh, MeshError};
use crate::operator::BcMode;
use crate::potential::Potential;
use crate::propagator::{LinearSolver, SolveError};
use crate::solver::{run_simulation, RunOptions, Scheme, SolverConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown scenario `{0}` (available: paper-disk, paper-disk-vortex, square-eigenmode)")]
    UnknownScenario(String),
    #[error("time order estimate needs T/delta_t to be an even integer (T={t_final}, delta_t={delta_t})")]
    BadStepCount { t_final: f64, delta_t: f64 },
    #[error("resolutions produced a zero difference; the setup is degenerate")]
    DegenerateOrder,
    #[error("need at least 2 mesh resolutions (got {0})")]
    NeedTwoResolutions(usize),
    #[error("scenario `{0}` has no closed-form reference solution")]
    NoReference(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Gmsh(#[from] GmshError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Json(#[from] serde_json::Error),
}

/// A named preset bundling mesh source, potential, initial condition and the
/// solver parameters that do not depend on (τ, T).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub mesh: MeshSource,
    pub potential: PotentialConfig,
    pub initial: InitialCondition,
    pub lambda: f64,
    pub bc_mode: BcMode,
    pub linear_solver: LinearSolver,
    pub scheme: Scheme,
}

impl Scenario {
    /// The stirred-condensate run on the disk of radius 2: ψ₀ = e^{-2|x|²},
    /// V₀ = 100, ε = 0.2, λ = 100, ω = 1 (the order-study value; the vortex
    /// run uses ω = 30, see [`Scenario::paper_disk_vortex`]).
    ///
    /// The preset mesh is the coarse equilateral-lattice disk. Richardson
    /// differences of the Padé propagator are polluted by the stiff tail of
    /// the sampled initial state whenever τ²·T·λ_max(A)³ ≳ 1, so the order
    /// study needs λ_max(A) small; the lattice disk at spacing 0.25 keeps
    /// every N = 2⁵..2¹⁰ run of the extrapolation clean of that artifact.
    /// Pass a `.msh` path or a finer builtin to trade this off yourself.
    pub fn paper_disk(omega: f64) -> Self {
        Scenario {
            name: "paper-disk".into(),
            mesh: MeshSource::Builtin(BuiltinMesh::HexDisk { radius: 2.0, spacing: 0.25 }),
            potential: PotentialConfig::Stirrer { v0: 100.0, eps: 0.2, omega },
            initial: InitialCondition::Gaussian { alpha: 2.0, center: (0.0, 0.0) },
            lambda: 100.0,
            bc_mode: BcMode::DirichletFlux,
            linear_solver: LinearSolver::DirectLu,
            scheme: Scheme::Lie,
        }
    }

    /// The stirring configuration of the vortex-nucleation run (ω = 30) on a
    /// vortex-resolving mesh (~3k triangles).
    pub fn paper_disk_vortex() -> Self {
        let mut scenario = Self::paper_disk(30.0);
        scenario.name = "paper-disk-vortex".into();
        scenario.mesh = MeshSource::Builtin(BuiltinMesh::HexDisk { radius: 2.0, spacing: 0.1 });
        scenario
    }

    /// The free linear problem on the unit square with the (kx, ky) Dirichlet
    /// eigenmode as initial state; has a closed-form solution.
    pub fn square_eigenmode(n: usize, kx: u32, ky: u32) -> Self {
        Scenario {
            name: "square-eigenmode".into(),
            mesh: MeshSource::Builtin(BuiltinMesh::Rectangle { nx: n, ny: n, lx: 1.0, ly: 1.0 }),
            potential: PotentialConfig::Zero,
            initial: InitialCondition::Eigenmode { kx, ky },
            lambda: 0.0,
            bc_mode: BcMode::DirichletFlux,
            linear_solver: LinearSolver::DirectLu,
            scheme: Scheme::Lie,
        }
    }

    /// Looks up a preset by CLI name.
    pub fn by_name(name: &str, omega: Option<f64>) -> Result<Self, HarnessError> {
        match name {
            "paper-disk" => Ok(Self::paper_disk(omega.unwrap_or(1.0))),
            "paper-disk-vortex" => {
                let mut scenario = Self::paper_disk_vortex();
                if let Some(omega) = omega {
                    scenario.potential =
                        PotentialConfig::Stirrer { v0: 100.0, eps: 0.2, omega };
                }
                Ok(scenario)
            }
            "square-eigenmode" => Ok(Self::square_eigenmode(32, 1, 1)),
            other => Err(HarnessError::UnknownScenario(other.to_string())),
        }
    }

    pub fn build_mesh(&self) -> Result<Arc<Mesh>, HarnessError> {
        self.mesh.build()
    }

    pub fn build_potential(&self) -> Box<dyn Potential> {
        self.potential.build()
    }

    pub fn initial_state(&self, mesh: &Arc<Mesh>) -> GridFunction {
        self.initial.sample(mesh)
    }

    pub fn solver_config(&self, tau: f64, t_final: f64) -> SolverConfig {
        SolverConfig {
            tau,
            t_final,
            lambda: self.lambda,
            scheme: self.scheme,
            bc_mode: self.bc_mode,
            linear_solver: self.linear_solver,
            cfl: crate::solver::CflPolicy::Warn,
            dimension_d: 2,
        }
    }

    /// The exact solution ψ(t, x), where one exists for the preset.
    pub fn reference(&self) -> Option<impl Fn(f64, Point2) -> Complex64 + Send + Sync> {
        match (self.potential, self.initial, self.lambda) {
            (PotentialConfig::Zero, InitialCondition::Eigenmode { kx, ky }, l)
                if l == 0.0 =>
            {
                let pi = std::f64::consts::PI;
                let freq = (kx as f64 * kx as f64 + ky as f64 * ky as f64) * pi * pi;
                Some(move |t: f64, p: Point2| {
                    let phase = Complex64::new(0.0, -freq * t).exp();
                    phase * ((kx as f64 * pi * p.x).sin() * (ky as f64 * pi * p.y).sin())
                })
            }
            _ => None,
        }
    }
}

/// Result of one Richardson extrapolation: three runs at 2Δt, Δt, Δt/2 and
/// the extrapolated order m = log₂(err_coarse / err_fine).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderReport {
    pub delta_t: f64,
    /// ‖U_{2Δt} - U_{Δt}‖_{H¹_h} at t = T.
    pub err_coarse: f64,
    /// ‖U_{Δt} - U_{Δt/2}‖_{H¹_h} at t = T.
    pub err_fine: f64,
    pub m_lt: f64,
}

impl OrderReport {
    pub fn from_errors(delta_t: f64, err_coarse: f64, err_fine: f64) -> Result<Self, HarnessError> {
        if !(err_coarse > 0.0) || !(err_fine > 0.0) {
            return Err(HarnessError::DegenerateOrder);
        }
        Ok(OrderReport {
            delta_t,
            err_coarse,
            err_fine,
            m_lt: (err_coarse / err_fine).log2(),
        })
    }

    pub fn csv_header() -> &'static str {
        "dt,err_coarse,err_fine,m"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.delta_t, self.err_coarse, self.err_fine, self.m_lt)
    }
}

fn final_state(
    potential: &dyn Potential,
    u0: &GridFunction,
    config: &SolverConfig,
) -> Result<GridFunction, SolveError> {
    let options = RunOptions { diag_stride: usize::MAX, ..Default::default() };
    Ok(run_simulation(potential, u0, config, options)?.final_state)
}

/// Runs the scenario at τ ∈ {2Δt, Δt, Δt/2} from the same initial state on
/// the same mesh (concurrently; all three runs are independent) and
/// extrapolates the time order from the H¹_h differences at t = T.
pub fn time_order_estimate(
    scenario: &Scenario,
    delta_t: f64,
    t_final: f64,
) -> Result<OrderReport, HarnessError> {
    let n = t_final / delta_t;
    if !(n >= 2.0) || (n / 2.0 - (n / 2.0).round()).abs() > 1e-9 {
        return Err(HarnessError::BadStepCount { t_final, delta_t });
    }
    let mesh = scenario.build_mesh()?;
    let potential = scenario.build_potential();
    let u0 = scenario.initial_state(&mesh);

    let configs = [
        scenario.solver_config(2.0 * delta_t, t_final),
        scenario.solver_config(delta_t, t_final),
        scenario.solver_config(0.5 * delta_t, t_final),
    ];
    let mut finals: Vec<Result<GridFunction, SolveError>> = Vec::new();
    std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|config| s.spawn(|| final_state(potential.as_ref(), &u0, config)))
            .collect();
        for h in handles {
            finals.push(h.join().expect("order run panicked"));
        }
    });
    let fine = finals.pop().unwrap()?;
    let mid = finals.pop().unwrap()?;
    let coarse = finals.pop().unwrap()?;

    OrderReport::from_errors(
        delta_t,
        coarse.sub(&mid).h1_seminorm(),
        mid.sub(&fine).h1_seminorm(),
    )
}

/// Order estimates for N = 2^k, k in `k_range`, sharing runs between
/// consecutive k (the sweep needs one run per distinct τ = T/2^j).
pub fn time_order_sweep(
    scenario: &Scenario,
    t_final: f64,
    k_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<OrderReport>, HarnessError> {
    let (kmin, kmax) = (*k_range.start(), *k_range.end());
    assert!(kmin >= 1 && kmax >= kmin);
    let mesh = scenario.build_mesh()?;
    let potential = scenario.build_potential();
    let u0 = scenario.initial_state(&mesh);

    let js: Vec<u32> = (kmin - 1..=kmax + 1).collect();
    let configs: Vec<SolverConfig> = js
        .iter()
        .map(|&j| scenario.solver_config(t_final / (1u64 << j) as f64, t_final))
        .collect();
    let mut finals: Vec<Result<GridFunction, SolveError>> = Vec::new();
    std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|config| s.spawn(|| final_state(potential.as_ref(), &u0, config)))
            .collect();
        for h in handles {
            finals.push(h.join().expect("order run panicked"));
        }
    });
    let finals: Vec<GridFunction> = finals.into_iter().collect::<Result<_, _>>()?;

    let mut reports = Vec::new();
    for (i, &j) in js.iter().enumerate().skip(1).take((kmax - kmin + 1) as usize) {
        let delta_t = t_final / (1u64 << j) as f64;
        reports.push(OrderReport::from_errors(
            delta_t,
            finals[i - 1].sub(&finals[i]).h1_seminorm(),
            finals[i].sub(&finals[i + 1]).h1_seminorm(),
        )?);
    }
    Ok(reports)
}

/// One resolution of a spatial convergence study.
#[derive(Debug, Clone, Copy)]
pub struct SpaceOrderRow {
    pub h: f64,
    pub tau: f64,
    pub err: f64,
}

#[derive(Debug, Clone)]
pub struct SpaceOrderTable {
    pub rows: Vec<SpaceOrderRow>,
    /// Least-squares slope of log err against log h.
    pub slope: f64,
    /// Coefficient of determination of the log-log fit.
    pub r_squared: f64,
}

impl SpaceOrderTable {
    pub fn csv(&self) -> String {
        let mut out = String::from("h,tau,err\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.h, r.tau, r.err));
        }
        out
    }
}

/// Measures the H¹_h error at t = T against the scenario's closed-form
/// solution on each mesh of the family, slaving the time step to the mesh
/// size (τ_i ∝ h_i, anchored at `tau0` on the first mesh) so the measured
/// slope reflects the combined O(h + τ) error.
pub fn space_error_vs_reference(
    scenario: &Scenario,
    meshes: &[Arc<Mesh>],
    tau0: f64,
    t_final: f64,
) -> Result<SpaceOrderTable, HarnessError> {
    if meshes.len() < 2 {
        return Err(HarnessError::NeedTwoResolutions(meshes.len()));
    }
    let reference = scenario
        .reference()
        .ok_or_else(|| HarnessError::NoReference(scenario.name.clone()))?;
    let potential = scenario.build_potential();

    let h0 = meshes[0].h;
    let mut rows = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let tau_target = tau0 * mesh.h / h0;
        let n = (t_final / tau_target).round().max(1.0);
        let tau = t_final / n;
        let u0 = scenario.initial_state(mesh);
        let config = scenario.solver_config(tau, t_final);
        let numeric = final_state(potential.as_ref(), &u0, &config)?;
        let exact = GridFunction::sample(mesh.clone(), |p| reference(t_final, p));
        let err = numeric.sub(&exact).h1_seminorm();
        if !(err > 0.0) {
            return Err(HarnessError::DegenerateOrder);
        }
        rows.push(SpaceOrderRow { h: mesh.h, tau, err });
    }

    let (slope, r_squared) = log_log_fit(rows.iter().map(|r| (r.h, r.err)));
    Ok(SpaceOrderTable { rows, slope, r_squared })
}

/// Least-squares slope and R² of log y against log x.
pub fn log_log_fit(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let data: Vec<(f64, f64)> = points.map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = data.len() as f64;
    let mean_x = data.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = data.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = data.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = data.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}
