//! JSON run configuration: mesh source, potential, initial condition and
//! solver parameters.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::GridFunction;
use crate::geometry::Point2;
use crate::harness::HarnessError;
use crate::mesh::{
    build_fv_mesh_from_triangulation, disk_triangulation, generate_uniform_rectangle_mesh,
    hex_disk_triangulation, Mesh, DEFAULT_BUILD_TOL,
};
use crate::operator::BcMode;
use crate::potential::{Potential, StirrerPotential, ZeroPotential};
use crate::propagator::LinearSolver;
use crate::solver::{CflPolicy, Scheme, SolverConfig};

/// Where the mesh comes from: a GMSH `.msh` file or a builtin generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSource {
    Path(PathBuf),
    Builtin(BuiltinMesh),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case")]
pub enum BuiltinMesh {
    Rectangle { nx: usize, ny: usize, lx: f64, ly: f64 },
    /// Ring-structured disk triangulation with `6 rings²` triangles.
    Disk { radius: f64, rings: usize },
    /// Equilateral-lattice disk; best mesh quality, lattice-step boundary.
    HexDisk { radius: f64, spacing: f64 },
}

impl MeshSource {
    pub fn build(&self) -> Result<Arc<Mesh>, HarnessError> {
        let mesh = match self {
            MeshSource::Path(path) => {
                let text = std::fs::read_to_string(path)?;
                let tri = crate::gmsh::parse_gmsh(&text)?;
                build_fv_mesh_from_triangulation(&tri, DEFAULT_BUILD_TOL)?
            }
            MeshSource::Builtin(BuiltinMesh::Rectangle { nx, ny, lx, ly }) => {
                generate_uniform_rectangle_mesh(*nx, *ny, *lx, *ly)?
            }
            MeshSource::Builtin(BuiltinMesh::Disk { radius, rings }) => {
                let tri = disk_triangulation(*radius, *rings)?;
                build_fv_mesh_from_triangulation(&tri, DEFAULT_BUILD_TOL)?
            }
            MeshSource::Builtin(BuiltinMesh::HexDisk { radius, spacing }) => {
                let tri = hex_disk_triangulation(*radius, *spacing)?;
                build_fv_mesh_from_triangulation(&tri, DEFAULT_BUILD_TOL)?
            }
        };
        Ok(Arc::new(mesh))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PotentialConfig {
    Zero,
    Stirrer { v0: f64, eps: f64, omega: f64 },
}

impl PotentialConfig {
    pub fn build(&self) -> Box<dyn Potential> {
        match *self {
            PotentialConfig::Zero => Box::new(ZeroPotential),
            PotentialConfig::Stirrer { v0, eps, omega } => {
                Box::new(StirrerPotential { v0, eps, omega })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// ψ₀(x) = e^{-alpha |x - center|²}.
    Gaussian {
        alpha: f64,
        #[serde(default)]
        center: (f64, f64),
    },
    /// ψ₀(x) = sin(kx π x) sin(ky π y), an eigenmode of the Dirichlet
    /// Laplacian on the unit square.
    Eigenmode { kx: u32, ky: u32 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Gaussian { alpha: 2.0, center: (0.0, 0.0) }
    }
}

impl InitialCondition {
    pub fn evaluate(&self, p: Point2) -> Complex64 {
        match *self {
            InitialCondition::Gaussian { alpha, center } => {
                let dx = p.x - center.0;
                let dy = p.y - center.1;
                Complex64::new((-alpha * (dx * dx + dy * dy)).exp(), 0.0)
            }
            InitialCondition::Eigenmode { kx, ky } => {
                let pi = std::f64::consts::PI;
                Complex64::new(
                    (kx as f64 * pi * p.x).sin() * (ky as f64 * pi * p.y).sin(),
                    0.0,
                )
            }
        }
    }

    pub fn sample(&self, mesh: &Arc<Mesh>) -> GridFunction {
        GridFunction::sample(mesh.clone(), |p| self.evaluate(p))
    }
}

fn default_lambda() -> f64 {
    1.0
}

fn default_stride() -> usize {
    1
}

/// A full simulation run description, the `run`/`vortices` CLI input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub potential: PotentialConfig,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub tau: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub bc_mode: BcMode,
    #[serde(default)]
    pub solver: LinearSolver,
    #[serde(default)]
    pub cfl: CflPolicy,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Output directory for diagnostics, snapshots and field exports.
    #[serde(default)]
    pub outputs: Option<PathBuf>,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default = "default_stride")]
    pub diag_stride: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tau: self.tau,
            t_final: self.t_final,
            lambda: self.lambda,
            scheme: self.scheme,
            bc_mode: self.bc_mode,
            linear_solver: self.solver,
            cfl: self.cfl,
            dimension_d: 2,
        }
    }
}
