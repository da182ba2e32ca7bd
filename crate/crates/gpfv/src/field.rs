//! Grid functions (one value per control volume) with the mesh-induced
//! norms, interpolants and discrete gradients.

use std::ops::{Add, Mul};
use std::sync::Arc;

use num_complex::{Complex64, ComplexFloat};

use crate::geometry::{signed_area, Point2};
use crate::mesh::{EdgeKind, Mesh};

/// Scalar types a grid function can hold.
pub trait Value:
    ComplexFloat<Real = f64> + Mul<f64, Output = Self> + Add<Output = Self> + Send + Sync
{
}

impl Value for f64 {}
impl Value for Complex64 {}

/// One value per control volume, bound to a specific mesh.
#[derive(Debug, Clone)]
pub struct Field<T> {
    mesh: Arc<Mesh>,
    values: Vec<T>,
}

/// A complex-valued grid function U = (U_K).
pub type GridFunction = Field<Complex64>;
/// A real-valued grid function (potentials, vorticity, densities).
pub type RealGridFunction = Field<f64>;

impl<T: Value> Field<T> {
    pub fn from_values(mesh: Arc<Mesh>, values: Vec<T>) -> Self {
        assert_eq!(
            values.len(),
            mesh.n_cells(),
            "value count must match the cell count"
        );
        Self { mesh, values }
    }

    /// The pointwise evaluation interpolant: value at each cell center.
    pub fn sample(mesh: Arc<Mesh>, f: impl Fn(Point2) -> T) -> Self {
        let values = mesh.cells.iter().map(|c| f(c.center)).collect();
        Self { mesh, values }
    }

    /// The mean interpolant: per-cell average of `f`, computed with a
    /// centroid-fan quadrature exact for polynomials up to `quad_order`
    /// (1 = sub-triangle centroids, 2 = mid-edge three-point rule).
    pub fn cell_average(
        mesh: Arc<Mesh>,
        f: impl Fn(Point2) -> T,
        quad_order: usize,
    ) -> Self {
        assert!(
            quad_order == 1 || quad_order == 2,
            "supported quadrature orders are 1 and 2 (got {quad_order})"
        );
        let values = (0..mesh.n_cells())
            .map(|k| {
                let polygon = mesh.cell_polygon(k);
                let n = polygon.len();
                let gx = polygon.iter().map(|p| p.x).sum::<f64>() / n as f64;
                let gy = polygon.iter().map(|p| p.y).sum::<f64>() / n as f64;
                let g = Point2::new(gx, gy);
                let mut total_area = 0.0;
                let mut integral = T::zero();
                for i in 0..n {
                    let (a, b) = (polygon[i], polygon[(i + 1) % n]);
                    let area = signed_area(g, a, b).abs();
                    total_area += area;
                    let avg = match quad_order {
                        1 => {
                            let c = Point2::new((g.x + a.x + b.x) / 3.0, (g.y + a.y + b.y) / 3.0);
                            f(c)
                        }
                        _ => {
                            let s = f(g.midpoint(a)) + f(a.midpoint(b)) + f(b.midpoint(g));
                            s * (1.0 / 3.0)
                        }
                    };
                    integral = integral + avg * area;
                }
                integral * (1.0 / total_area)
            })
            .collect();
        Self { mesh, values }
    }

    pub fn constant(mesh: Arc<Mesh>, value: T) -> Self {
        let n = mesh.n_cells();
        Self { mesh, values: vec![value; n] }
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        Self::constant(mesh, T::zero())
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise map with the owning cell index.
    pub fn map_indexed(&self, f: impl Fn(usize, T) -> T) -> Self {
        Self {
            mesh: self.mesh.clone(),
            values: self.values.iter().enumerate().map(|(k, &v)| f(k, v)).collect(),
        }
    }

    pub fn same_mesh(&self, other: &Field<impl Value>) -> bool {
        self.mesh.id() == other.mesh.id()
    }

    fn assert_same_mesh(&self, other: &Field<impl Value>) {
        assert!(
            self.same_mesh(other),
            "grid functions are bound to different meshes"
        );
    }

    /// The L^p_h norm (Σ_K |K| |U_K|^p)^(1/p); `f64::INFINITY` selects the
    /// max norm. Panics for p < 1.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "L^p_h norm requires p >= 1 (got {p})");
        if p.is_infinite() {
            return self.linf_norm();
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&self.mesh.cells)
            .map(|(v, c)| c.area * v.abs().powf(p))
            .sum();
        sum.powf(1.0 / p)
    }

    /// The L^2_h norm.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self
            .values
            .iter()
            .zip(&self.mesh.cells)
            .map(|(v, c)| c.area * v.abs().powi(2))
            .sum();
        sum.sqrt()
    }

    /// The L^∞_h norm max_K |U_K|.
    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// The H^1_h semi-norm: sqrt of Σ over interior edges of
    /// (|σ|/d_{K|L}) |U_L - U_K|^2.
    pub fn h1_seminorm(&self) -> f64 {
        let mut sum = 0.0;
        for edge in &self.mesh.edges {
            if let EdgeKind::Interior { k, l, .. } = edge.kind {
                let diff = self.values[l] - self.values[k];
                sum += edge.transmissibility() * diff.abs().powi(2);
            }
        }
        sum.sqrt()
    }

    /// The mesh-weighted inner product ⟨U, W⟩ = Σ_K |K| U_K conj(W_K),
    /// sesquilinear in the second argument.
    pub fn inner_product(&self, other: &Field<T>) -> T {
        self.assert_same_mesh(other);
        let mut acc = T::zero();
        for ((u, w), c) in self.values.iter().zip(&other.values).zip(&self.mesh.cells) {
            acc = acc + *u * w.conj() * c.area;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.abs().is_finite())
    }
}

impl RealGridFunction {
    pub fn to_complex(&self) -> GridFunction {
        GridFunction {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl GridFunction {
    /// Linear combination a*self + b*other.
    pub fn linear_combination(&self, a: Complex64, other: &GridFunction, b: Complex64) -> Self {
        self.assert_same_mesh(other);
        Self {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &w)| a * u + b * w)
                .collect(),
        }
    }

    /// Difference self - other.
    pub fn sub(&self, other: &GridFunction) -> Self {
        self.linear_combination(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// The edge (diamond-cell) gradient: per interior edge
    /// d (U_L - U_K)/d_{K|L} ν_{K,σ}; per exterior edge -d U_K/d_{K,σ} ν_{K,σ}
    /// (homogeneous Dirichlet exterior value), with d = 2.
    pub fn edge_gradient(&self) -> EdgeField {
        const D: f64 = 2.0;
        let values = self
            .mesh
            .edges
            .iter()
            .map(|edge| {
                let coeff = match edge.kind {
                    EdgeKind::Interior { k, l, d_kl, .. } => {
                        (self.values[l] - self.values[k]) * (D / d_kl)
                    }
                    EdgeKind::Exterior { k } => -self.values[k] * (D / edge.d_k_sigma),
                };
                [coeff * edge.normal_k.x, coeff * edge.normal_k.y]
            })
            .collect();
        EdgeField { mesh: self.mesh.clone(), values }
    }

    /// The cell-centered gradient reconstruction: per cell
    /// (1/|K|) Σ over interior edges of (|σ|/d_{K|L}) (U_L - U_K) (x_σ - x_K).
    pub fn cell_gradient(&self) -> CellVectorField {
        let mut values = vec![[Complex64::new(0.0, 0.0); 2]; self.len()];
        for edge in &self.mesh.edges {
            if let EdgeKind::Interior { k, l, .. } = edge.kind {
                let t = edge.transmissibility();
                let diff_kl = (self.values[l] - self.values[k]) * t;
                let xk = self.mesh.cells[k].center;
                let dk = edge.x_sigma - xk;
                values[k][0] += diff_kl * dk.x;
                values[k][1] += diff_kl * dk.y;
                let xl = self.mesh.cells[l].center;
                let dl = edge.x_sigma - xl;
                let diff_lk = -diff_kl;
                values[l][0] += diff_lk * dl.x;
                values[l][1] += diff_lk * dl.y;
            }
        }
        for (v, c) in values.iter_mut().zip(&self.mesh.cells) {
            v[0] /= c.area;
            v[1] /= c.area;
        }
        CellVectorField { mesh: self.mesh.clone(), values }
    }
}

/// Writes a grid function as `cell_id,re,im` CSV rows.
pub fn write_grid_function_csv<W: std::io::Write>(
    u: &GridFunction,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "cell_id,re,im")?;
    for (k, v) in u.values().iter().enumerate() {
        writeln!(w, "{},{},{}", k, v.re, v.im)?;
    }
    Ok(())
}

/// One 2-vector per edge, constant on the diamond cell of the edge.
#[derive(Debug, Clone)]
pub struct EdgeField {
    mesh: Arc<Mesh>,
    values: Vec<[Complex64; 2]>,
}

/// One 2-vector per cell.
#[derive(Debug, Clone)]
pub struct CellVectorField {
    mesh: Arc<Mesh>,
    values: Vec<[Complex64; 2]>,
}

impl EdgeField {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[[Complex64; 2]] {
        &self.values
    }

    /// max over edges of the Euclidean vector norm.
    pub fn linf_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }
}

impl CellVectorField {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[[Complex64; 2]] {
        &self.values
    }
}

/// Residual of the discrete integration-by-parts identity
/// Σ_K Σ_{σ∈ℰ_K∩ℰ_int} (|σ|/d_{K|L})(U_K - U_L) W_K
///   = Σ_{σ∈ℰ_int} (|σ|/d_{K|L})(U_K - U_L)(W_K - W_L);
/// the returned magnitude is zero up to rounding for any pair.
pub fn discrete_ibp_residual(u: &GridFunction, w: &GridFunction) -> f64 {
    u.assert_same_mesh(w);
    let mesh = u.mesh();
    let mut lhs = Complex64::new(0.0, 0.0);
    for (k, cell) in mesh.cells.iter().enumerate() {
        for &e in &cell.edge_ids {
            let edge = &mesh.edges[e];
            if let EdgeKind::Interior { k: ek, l: el, .. } = edge.kind {
                let other = if ek == k { el } else { ek };
                lhs += edge.transmissibility()
                    * (u.values()[k] - u.values()[other])
                    * w.values()[k];
            }
        }
    }
    let mut rhs = Complex64::new(0.0, 0.0);
    for edge in &mesh.edges {
        if let EdgeKind::Interior { k, l, .. } = edge.kind {
            rhs += edge.transmissibility()
                * (u.values()[k] - u.values()[l])
                * (w.values()[k] - w.values()[l]);
        }
    }
    (lhs - rhs).norm()
}
