//! The discrete Laplace operator as a sparse matrix.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::GridFunction;
use crate::mesh::{EdgeKind, Mesh};

/// Boundary treatment of the discrete Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcMode {
    /// Only interior-edge fluxes: (AU)_K = (1/|K|) Σ (|σ|/d_{K|L})(U_L - U_K).
    /// This operator satisfies ⟨-AU, U⟩ = ‖U‖²_{H¹_h} exactly.
    InteriorOnly,
    /// Additionally subtracts (1/|K|)(|σ|/d_{K,σ}) U_K per exterior edge,
    /// i.e. a homogeneous Dirichlet ghost value. The default for simulation
    /// runs, matching the boundary condition of the equation.
    #[default]
    DirichletFlux,
}

/// Row-compressed real sparse matrix on the cells of a mesh, applied to
/// complex grid functions. Row entries are stored by ascending column so the
/// application order (and hence the floating-point result) is reproducible.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    self_adjoint_weighted: bool,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Whether the operator is self-adjoint with respect to the |K|-weighted
    /// inner product.
    pub fn is_self_adjoint_weighted(&self) -> bool {
        self.self_adjoint_weighted
    }

    /// Stored entries in (row, col, value) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.col_idx[i], self.vals[i]))
        })
    }

    /// Value at (row, col); zeros outside the stored pattern.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        for i in self.row_ptr[row]..self.row_ptr[row + 1] {
            if self.col_idx[i] == col {
                return self.vals[i];
            }
        }
        0.0
    }

    pub fn apply_slice(&self, u: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(u.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += u[self.col_idx[i]] * self.vals[i];
            }
            out[r] = acc;
        }
    }

    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        assert_eq!(u.len(), self.dim, "operator dimension does not match the grid function");
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_slice(u.values(), &mut out);
        GridFunction::from_values(u.mesh().clone(), out)
    }

    /// Writes the matrix in coordinate text format, one `row col re im` line
    /// per stored entry (values are real; the `im` column is kept at 0).
    pub fn write_coo_text<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (r, c, v) in self.entries() {
            writeln!(w, "{} {} {} 0", r, c, v)?;
        }
        Ok(())
    }
}

/// Assembles the discrete Laplacian of the mesh in the requested boundary
/// mode. In both modes the matrix is self-adjoint with respect to the
/// weighted inner product and ⟨-AU, U⟩ ≥ 0.
pub fn assemble_laplacian(mesh: &Arc<Mesh>, bc_mode: BcMode) -> SparseOperator {
    let n = mesh.n_cells();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);

    let mut row: Vec<(usize, f64)> = Vec::new();
    for (k, cell) in mesh.cells.iter().enumerate() {
        row.clear();
        let mut diagonal = 0.0;
        for &e in &cell.edge_ids {
            let edge = &mesh.edges[e];
            match edge.kind {
                EdgeKind::Interior { .. } => {
                    let l = edge.neighbor_of(k).unwrap();
                    let t = edge.transmissibility();
                    diagonal -= t;
                    row.push((l, t));
                }
                EdgeKind::Exterior { .. } => {
                    if bc_mode == BcMode::DirichletFlux {
                        diagonal -= edge.measure / edge.d_k_sigma;
                    }
                }
            }
        }
        row.push((k, diagonal));
        row.sort_by_key(|&(c, _)| c);
        let inv_area = 1.0 / cell.area;
        for &(c, v) in &row {
            col_idx.push(c);
            vals.push(v * inv_area);
        }
        row_ptr.push(col_idx.len());
    }

    SparseOperator { dim: n, row_ptr, col_idx, vals, self_adjoint_weighted: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_uniform_rectangle_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(mesh: &Arc<Mesh>, rng: &mut impl Rng) -> GridFunction {
        let values = (0..mesh.n_cells())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        GridFunction::from_values(mesh.clone(), values)
    }

    #[test]
    fn two_cell_interior_only_matrix() {
        let mesh = Arc::new(generate_uniform_rectangle_mesh(2, 1, 2.0, 1.0).unwrap());
        let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
        assert_eq!(a.entry(0, 0), -1.0);
        assert_eq!(a.entry(0, 1), 1.0);
        assert_eq!(a.entry(1, 0), 1.0);
        assert_eq!(a.entry(1, 1), -1.0);
    }

    #[test]
    fn five_point_stencil_on_interior_cell() {
        // Dyadic spacing keeps every quantity exact in floating point.
        let s = 0.25;
        let mesh = Arc::new(generate_uniform_rectangle_mesh(4, 4, 1.0, 1.0).unwrap());
        let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
        let k = 5; // interior cell (1,1)
        assert_eq!(a.entry(k, k), -4.0 / (s * s));
        for n in [4, 6, 1, 9] {
            assert_eq!(a.entry(k, n), 1.0 / (s * s));
        }
    }

    #[test]
    fn dirichlet_flux_adds_boundary_terms() {
        let s = 0.25;
        let mesh = Arc::new(generate_uniform_rectangle_mesh(4, 4, 1.0, 1.0).unwrap());
        let a = assemble_laplacian(&mesh, BcMode::DirichletFlux);
        // Corner cell: 2 interior neighbors, 2 exterior edges with
        // |σ|/d_{K,σ} = s/(s/2) = 2.
        assert_eq!(a.entry(0, 0), (-2.0 - 2.0 * 2.0) / (s * s));
        // Interior cell unchanged.
        assert_eq!(a.entry(5, 5), -4.0 / (s * s));
    }

    #[test]
    fn weighted_self_adjointness_and_negativity() {
        let tri = crate::mesh::disk_triangulation(1.0, 5).unwrap();
        let mesh = Arc::new(crate::mesh::build_fv_mesh_from_triangulation(&tri, 1e-8).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for bc in [BcMode::InteriorOnly, BcMode::DirichletFlux] {
            let a = assemble_laplacian(&mesh, bc);
            for _ in 0..10 {
                let u = random_field(&mesh, &mut rng);
                let w = random_field(&mesh, &mut rng);
                let au_w = a.apply(&u).inner_product(&w);
                let u_aw = u.inner_product(&a.apply(&w));
                let scale = u.l2_norm() * w.l2_norm() * mesh.h.powi(-2);
                assert!((au_w - u_aw).norm() <= 1e-12 * scale);
                let quad = a.apply(&u).inner_product(&u);
                assert!(-quad.re >= -1e-12 * scale);
            }
        }
    }

    #[test]
    fn interior_only_quadratic_form_is_h1_seminorm() {
        let mesh = Arc::new(generate_uniform_rectangle_mesh(8, 8, 1.0, 1.0).unwrap());
        let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let u = random_field(&mesh, &mut rng);
            let quad = -a.apply(&u).inner_product(&u).re;
            let h1 = u.h1_seminorm().powi(2);
            assert!((quad - h1).abs() <= 1e-12 * h1.max(1.0));
        }
    }

    #[test]
    fn coo_export_format() {
        let mesh = Arc::new(generate_uniform_rectangle_mesh(2, 1, 2.0, 1.0).unwrap());
        let a = assemble_laplacian(&mesh, BcMode::InteriorOnly);
        let mut buf = Vec::new();
        a.write_coo_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "0 0 -1 0\n0 1 1 0\n1 0 1 0\n1 1 -1 0\n");
    }
}
