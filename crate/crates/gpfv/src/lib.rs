//! Finite-volume split-step solver for the two-dimensional Gross-Pitaevskii
//! equation i ∂_t ψ + Δψ = λ|ψ|²ψ + V(t,x)ψ with homogeneous Dirichlet
//! boundary conditions on admissible polygonal meshes.

pub mod cli;
pub mod config;
pub mod field;
pub mod geometry;
pub mod gmsh;
pub mod harness;
pub mod mesh;
pub mod operator;
pub mod potential;
pub mod propagator;
pub mod solver;
pub mod vorticity;
pub mod vtk;
