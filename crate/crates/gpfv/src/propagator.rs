//! The linear flow e^{iτA} as its mass-preserving Padé(1,1) rational
//! approximation (Id - iτ/2 A)⁻¹ (Id + iτ/2 A). The Cayley transform of a
//! self-adjoint operator is unitary in the mesh-weighted inner product, so
//! each application preserves the L²_h norm up to solver roundoff, and since
//! it commutes with A it also preserves the H¹_h seminorm of the
//! interior-only operator.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::GridFunction;
use crate::mesh::Mesh;
use crate::operator::SparseOperator;

/// How the complex sparse system of the Padé step is solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LinearSolver {
    /// Sparse LU factorization, computed once per (mesh, τ) and reused.
    DirectLu,
    /// Conjugate gradient on the normal equations in the weighted inner
    /// product (the system matrix is normal, so the normal equations read
    /// (Id + (τ/2)²A²) X = (Id + iτ/2 A) B and stay well conditioned).
    Cg { tol: f64, maxit: usize },
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver::DirectLu
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("sparse LU factorization failed: {0}")]
    Factorization(String),
    #[error("conjugate gradient stalled at relative residual {residual:.3e} after {maxit} iterations")]
    CgDidNotConverge { maxit: usize, residual: f64 },
    #[error("state became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("CFL condition violated: {detail}")]
    CflViolation { detail: String },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

enum Backend {
    DirectLu(Box<faer::sparse::linalg::solvers::Lu<usize, faer::c64>>),
    Cg { tol: f64, maxit: usize, weights: Vec<f64> },
}

/// One Padé(1,1) application of the linear flow, with the factorization (or
/// CG workspace) prepared once.
pub struct CayleyPropagator {
    a: SparseOperator,
    half_tau: f64,
    backend: Backend,
}

impl CayleyPropagator {
    pub fn new(
        a: &SparseOperator,
        mesh: &Arc<Mesh>,
        tau: f64,
        solver: &LinearSolver,
    ) -> Result<Self, SolveError> {
        let n = a.dim();
        let half_tau = 0.5 * tau;
        let backend = match *solver {
            LinearSolver::DirectLu => {
                // System matrix Id - i(τ/2)A.
                let mut triplets = Vec::with_capacity(a.nnz());
                for (r, c, v) in a.entries() {
                    let mut entry = Complex64::new(0.0, -half_tau * v);
                    if r == c {
                        entry += 1.0;
                    }
                    triplets.push(Triplet::new(r, c, entry));
                }
                let m = SparseColMat::try_new_from_triplets(n, n, &triplets)
                    .map_err(|e| SolveError::Factorization(format!("{e:?}")))?;
                let lu = m
                    .sp_lu()
                    .map_err(|e| SolveError::Factorization(format!("{e:?}")))?;
                Backend::DirectLu(Box::new(lu))
            }
            LinearSolver::Cg { tol, maxit } => {
                if !(tol > 0.0) || maxit == 0 {
                    return Err(SolveError::InvalidConfig(format!(
                        "cg needs tol > 0 and maxit > 0 (got tol={tol}, maxit={maxit})"
                    )));
                }
                Backend::Cg {
                    tol,
                    maxit,
                    weights: mesh.cells.iter().map(|c| c.area).collect(),
                }
            }
        };
        Ok(Self { a: a.clone(), half_tau, backend })
    }

    /// Solves (Id - iτ/2 A) X = (Id + iτ/2 A) U.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction, SolveError> {
        let n = self.a.dim();
        assert_eq!(u.len(), n, "propagator dimension does not match the grid function");
        let mut au = vec![Complex64::new(0.0, 0.0); n];
        self.a.apply_slice(u.values(), &mut au);
        let ic = Complex64::new(0.0, self.half_tau);
        let rhs: Vec<Complex64> = u
            .values()
            .iter()
            .zip(&au)
            .map(|(&v, &av)| v + ic * av)
            .collect();

        let x = match &self.backend {
            Backend::DirectLu(lu) => {
                let b = faer::Mat::from_fn(n, 1, |i, _| rhs[i]);
                let sol = lu.solve(&b);
                (0..n).map(|i| sol[(i, 0)]).collect()
            }
            Backend::Cg { tol, maxit, weights } => {
                self.solve_cg(&rhs, weights, *tol, *maxit)?
            }
        };
        Ok(GridFunction::from_values(u.mesh().clone(), x))
    }

    /// Weighted CG on (Id + c²A²) X = (Id + icA) B with c = τ/2.
    fn solve_cg(
        &self,
        b: &[Complex64],
        weights: &[f64],
        tol: f64,
        maxit: usize,
    ) -> Result<Vec<Complex64>, SolveError> {
        let n = b.len();
        let c = self.half_tau;
        let dot = |u: &[Complex64], v: &[Complex64]| -> f64 {
            u.iter()
                .zip(v)
                .zip(weights)
                .map(|((a, b), w)| w * (a * b.conj()).re)
                .sum()
        };
        let mut tmp = vec![Complex64::new(0.0, 0.0); n];
        let mut tmp2 = vec![Complex64::new(0.0, 0.0); n];
        let mut apply_normal = |x: &[Complex64], out: &mut Vec<Complex64>| {
            self.a.apply_slice(x, &mut tmp);
            self.a.apply_slice(&tmp, &mut tmp2);
            out.clear();
            out.extend(
                x.iter()
                    .zip(&tmp2)
                    .map(|(&xi, &aaxi)| xi + aaxi * (c * c)),
            );
        };

        // Right-hand side of the normal equations.
        let mut ab = vec![Complex64::new(0.0, 0.0); n];
        self.a.apply_slice(b, &mut ab);
        let ic = Complex64::new(0.0, c);
        let rhs: Vec<Complex64> = b.iter().zip(&ab).map(|(&bi, &abi)| bi + ic * abi).collect();

        let mut x = rhs.clone(); // the system is a small perturbation of Id
        let mut op_x = Vec::with_capacity(n);
        apply_normal(&x, &mut op_x);
        let mut r: Vec<Complex64> = rhs.iter().zip(&op_x).map(|(&b, &ax)| b - ax).collect();
        let mut p = r.clone();
        let b_norm = dot(&rhs, &rhs).sqrt().max(f64::MIN_POSITIVE);
        let mut rr = dot(&r, &r);
        let mut op_p = Vec::with_capacity(n);
        for _ in 0..maxit {
            if rr.sqrt() <= tol * b_norm {
                return Ok(x);
            }
            apply_normal(&p, &mut op_p);
            let alpha = rr / dot(&op_p, &p);
            for i in 0..n {
                x[i] += p[i] * alpha;
                r[i] -= op_p[i] * alpha;
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + p[i] * beta;
            }
        }
        if rr.sqrt() <= tol * b_norm {
            Ok(x)
        } else {
            Err(SolveError::CgDidNotConverge { maxit, residual: rr.sqrt() / b_norm })
        }
    }
}

/// Convenience single application; stepping loops should build the
/// propagator once instead.
pub fn linear_flow(
    u: &GridFunction,
    tau: f64,
    a: &SparseOperator,
    solver: &LinearSolver,
) -> Result<GridFunction, SolveError> {
    CayleyPropagator::new(a, u.mesh(), tau, solver)?.apply(u)
}
