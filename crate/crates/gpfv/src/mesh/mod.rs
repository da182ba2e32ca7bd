//! Admissible finite-volume meshes.
//!
//! A mesh is a set of convex polygonal control volumes together with the
//! geometric edge data (transmissibilities, normals, center distances) that
//! the two-point flux approximation needs. Cell centers of neighboring cells
//! must be joined by a segment orthogonal to the shared edge; meshes built
//! from acute Delaunay triangulations with the circumcenter rule satisfy this
//! by construction, structured rectangle meshes trivially.

mod build;

pub use build::{
    build_fv_mesh_from_triangulation, disk_triangulation, generate_uniform_rectangle_mesh,
    hex_disk_triangulation, DEFAULT_BUILD_TOL,
};

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::geometry::{Point2, Vec2};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh dimensions must be positive (got nx={nx}, ny={ny}, lx={lx}, ly={ly})")]
    InvalidDimensions { nx: usize, ny: usize, lx: f64, ly: f64 },
    #[error("triangle {index} is degenerate (area {area:.3e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("triangle {index} is not acute: center-to-edge distance {distance:.3e} (tolerance {tol:.3e})")]
    NonAcuteTriangle { index: usize, distance: f64, tol: f64 },
    #[error("triangles {first} and {second} have coincident circumcenters (distance {distance:.3e})")]
    CoincidentCircumcenters { first: usize, second: usize, distance: f64 },
    #[error("triangulation is not conforming: edge ({a}, {b}) is shared by more than two triangles")]
    NonConforming { a: usize, b: usize },
    #[error("triangle {index} references node {node} but only {n_nodes} nodes exist")]
    DanglingNode { index: usize, node: usize, n_nodes: usize },
    #[error("mesh has no cells")]
    Empty,
    #[error("cell {index} is invalid: {reason}")]
    InvalidCell { index: usize, reason: String },
    #[error("edge {index} is invalid: {reason}")]
    InvalidEdge { index: usize, reason: String },
    #[error("mesh dump is malformed at line {line}: {reason}")]
    MalformedDump { line: usize, reason: String },
}

/// A control volume.
#[derive(Debug, Clone)]
pub struct Cell {
    /// The center x_K used by the two-point flux.
    pub center: Point2,
    /// Area |K|.
    pub area: f64,
    /// Indices into `Mesh::edges`; filled by `Mesh::new`.
    pub edge_ids: Vec<usize>,
    /// Diameter h_K.
    pub diameter: f64,
    /// Whether x_K lies on the domain boundary (only possible for cells
    /// touching it). Regular Voronoi meshes often have this; our structured
    /// and circumcenter meshes generally do not, so it is recorded but never
    /// required.
    pub on_boundary_center: bool,
}

/// Which cells an edge separates, with the interior-only distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeKind {
    Interior {
        k: usize,
        l: usize,
        /// Distance between the two cell centers.
        d_kl: f64,
        /// Distance from x_L to the edge.
        d_l_sigma: f64,
    },
    Exterior {
        k: usize,
    },
}

/// An edge of the mesh with its flux geometry.
#[derive(Debug, Clone)]
pub struct Edge {
    pub kind: EdgeKind,
    /// Length |σ|.
    pub measure: f64,
    /// Distance from x_K to the edge.
    pub d_k_sigma: f64,
    /// Unit normal ν_{K,σ}: from K towards L for interior edges, outward for
    /// exterior ones.
    pub normal_k: Vec2,
    /// Foot of the perpendicular from x_K on the edge line,
    /// x_σ = x_K + d_{K,σ} ν_{K,σ}.
    pub x_sigma: Point2,
    /// Endpoints of the edge segment (diagonal of the diamond cell).
    pub vertices: (Point2, Point2),
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        matches!(self.kind, EdgeKind::Interior { .. })
    }

    /// Index of the cell on the K side.
    pub fn cell_k(&self) -> usize {
        match self.kind {
            EdgeKind::Interior { k, .. } | EdgeKind::Exterior { k } => k,
        }
    }

    /// The cell across the edge from `cell`, if any.
    pub fn neighbor_of(&self, cell: usize) -> Option<usize> {
        match self.kind {
            EdgeKind::Interior { k, l, .. } if k == cell => Some(l),
            EdgeKind::Interior { k, l, .. } if l == cell => Some(k),
            _ => None,
        }
    }

    /// Transmissibility |σ|/d_{K|L} for interior edges; for exterior edges
    /// d_{K|L} is read as d_{K,σ}.
    pub fn transmissibility(&self) -> f64 {
        match self.kind {
            EdgeKind::Interior { d_kl, .. } => self.measure / d_kl,
            EdgeKind::Exterior { .. } => self.measure / self.d_k_sigma,
        }
    }
}

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(0);

/// An admissible finite-volume mesh. Immutable after construction.
#[derive(Debug)]
pub struct Mesh {
    pub cells: Vec<Cell>,
    pub edges: Vec<Edge>,
    /// Mesh size h = max over cells of the cell diameter.
    pub h: f64,
    /// Measured regularity constant: min over (K, σ ∈ ℰ_K) of
    /// min(d_{K,σ}/h_K, |σ|/h_K).
    pub xi: f64,
    /// Diameter of the domain (max distance between boundary vertices).
    pub domain_diameter: f64,
    id: u64,
}

impl Mesh {
    /// Assembles a mesh from cells and edges, filling in the per-cell edge
    /// lists and the derived global quantities. Cell/edge cross-references
    /// are consistent by construction.
    pub fn new(mut cells: Vec<Cell>, edges: Vec<Edge>) -> Result<Mesh, MeshError> {
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        for (i, c) in cells.iter_mut().enumerate() {
            if !(c.area > 0.0) || !c.area.is_finite() {
                return Err(MeshError::InvalidCell {
                    index: i,
                    reason: format!("area {} must be positive and finite", c.area),
                });
            }
            if !(c.diameter > 0.0) || !c.diameter.is_finite() {
                return Err(MeshError::InvalidCell {
                    index: i,
                    reason: format!("diameter {} must be positive and finite", c.diameter),
                });
            }
            if !c.center.is_finite() {
                return Err(MeshError::InvalidCell {
                    index: i,
                    reason: "center coordinates must be finite".into(),
                });
            }
            c.edge_ids.clear();
        }
        let n = cells.len();
        for (e, edge) in edges.iter().enumerate() {
            if !(edge.measure > 0.0) {
                return Err(MeshError::InvalidEdge {
                    index: e,
                    reason: format!("measure {} must be positive", edge.measure),
                });
            }
            if !(edge.d_k_sigma > 0.0) {
                return Err(MeshError::InvalidEdge {
                    index: e,
                    reason: format!("d_k_sigma {} must be positive", edge.d_k_sigma),
                });
            }
            match edge.kind {
                EdgeKind::Interior { k, l, d_kl, d_l_sigma } => {
                    if k == l {
                        return Err(MeshError::InvalidEdge {
                            index: e,
                            reason: "interior edge must join two distinct cells".into(),
                        });
                    }
                    if k >= n || l >= n {
                        return Err(MeshError::InvalidEdge {
                            index: e,
                            reason: format!("cell reference out of range ({k}, {l})"),
                        });
                    }
                    if !(d_kl > 0.0) || !(d_l_sigma > 0.0) {
                        return Err(MeshError::InvalidEdge {
                            index: e,
                            reason: "interior distances must be positive".into(),
                        });
                    }
                    cells[k].edge_ids.push(e);
                    cells[l].edge_ids.push(e);
                }
                EdgeKind::Exterior { k } => {
                    if k >= n {
                        return Err(MeshError::InvalidEdge {
                            index: e,
                            reason: format!("cell reference out of range ({k})"),
                        });
                    }
                    cells[k].edge_ids.push(e);
                }
            }
        }
        for (i, c) in cells.iter().enumerate() {
            if c.edge_ids.is_empty() {
                return Err(MeshError::InvalidCell {
                    index: i,
                    reason: "cell has no edges".into(),
                });
            }
        }

        let h = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        let mut xi = f64::INFINITY;
        for edge in &edges {
            let mut account = |cell: usize, d_sigma: f64| {
                let hk = cells[cell].diameter;
                xi = xi.min(d_sigma / hk).min(edge.measure / hk);
            };
            match edge.kind {
                EdgeKind::Interior { k, l, d_l_sigma, .. } => {
                    account(k, edge.d_k_sigma);
                    account(l, d_l_sigma);
                }
                EdgeKind::Exterior { k } => account(k, edge.d_k_sigma),
            }
        }

        // Domain diameter from boundary vertices (exact for convex domains).
        let boundary: Vec<Point2> = edges
            .iter()
            .filter(|e| !e.is_interior())
            .flat_map(|e| [e.vertices.0, e.vertices.1])
            .collect();
        let mut diam: f64 = 0.0;
        for (i, p) in boundary.iter().enumerate() {
            for q in &boundary[i + 1..] {
                diam = diam.max(p.dist(*q));
            }
        }

        Ok(Mesh {
            cells,
            edges,
            h,
            xi,
            domain_diameter: diam,
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
        })
    }

    /// Number of control volumes.
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Number of edges.
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Identity token; two grid functions interoperate only when bound to the
    /// same mesh instance.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Interior edges with their indices.
    pub fn interior_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_interior())
    }

    /// Edge-adjacent neighbor cells of `cell`.
    pub fn neighbors(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        self.cells[cell]
            .edge_ids
            .iter()
            .filter_map(move |&e| self.edges[e].neighbor_of(cell))
    }

    /// Vertices of the cell polygon in counterclockwise order, reconstructed
    /// from the vertex pairs of the cell's edges.
    pub fn cell_polygon(&self, cell: usize) -> Vec<Point2> {
        let edge_ids = &self.cells[cell].edge_ids;
        let key = |p: Point2| (p.x.to_bits(), p.y.to_bits());
        // Local adjacency: vertex -> (edge slot, endpoints).
        let mut adjacency: std::collections::HashMap<(u64, u64), Vec<usize>> =
            std::collections::HashMap::new();
        for (slot, &e) in edge_ids.iter().enumerate() {
            let (a, b) = self.edges[e].vertices;
            adjacency.entry(key(a)).or_default().push(slot);
            adjacency.entry(key(b)).or_default().push(slot);
        }
        let mut polygon = Vec::with_capacity(edge_ids.len());
        let mut used = vec![false; edge_ids.len()];
        let first = self.edges[edge_ids[0]].vertices;
        used[0] = true;
        polygon.push(first.0);
        let mut current = first.1;
        while polygon.len() < edge_ids.len() {
            polygon.push(current);
            let slot = adjacency[&key(current)]
                .iter()
                .copied()
                .find(|&s| !used[s])
                .expect("cell edges do not form a closed polygon");
            used[slot] = true;
            let (a, b) = self.edges[edge_ids[slot]].vertices;
            current = if key(a) == key(current) { b } else { a };
        }
        // Shoelace orientation.
        let mut twice_area = 0.0;
        for i in 0..polygon.len() {
            let p = polygon[i];
            let q = polygon[(i + 1) % polygon.len()];
            twice_area += p.x * q.y - q.x * p.y;
        }
        if twice_area < 0.0 {
            polygon.reverse();
        }
        polygon
    }

    /// Domain area from the divergence theorem over the boundary edges.
    pub fn domain_area(&self) -> f64 {
        let mut twice_area = 0.0;
        for edge in self.edges.iter().filter(|e| !e.is_interior()) {
            let mid = edge.vertices.0.midpoint(edge.vertices.1);
            twice_area += edge.measure * (mid.x * edge.normal_k.x + mid.y * edge.normal_k.y);
        }
        0.5 * twice_area
    }
}

/// A conforming triangulation, the input of the circumcenter mesh builder.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub nodes: Vec<Point2>,
    /// Node index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Node index pairs on the domain boundary (as present in the source;
    /// may be empty).
    pub boundary_edges: Vec<[usize; 2]>,
}

impl Triangulation {
    /// Builds a triangulation, flipping triangles to counterclockwise order.
    pub fn new(
        nodes: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<[usize; 2]>,
    ) -> Result<Triangulation, MeshError> {
        let n = nodes.len();
        let mut triangles = triangles;
        for (i, t) in triangles.iter_mut().enumerate() {
            for &v in t.iter() {
                if v >= n {
                    return Err(MeshError::DanglingNode { index: i, node: v, n_nodes: n });
                }
            }
            if crate::geometry::signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
                t.swap(1, 2);
            }
        }
        for (i, b) in boundary_edges.iter().enumerate() {
            for &v in b.iter() {
                if v >= n {
                    return Err(MeshError::DanglingNode { index: i, node: v, n_nodes: n });
                }
            }
        }
        Ok(Triangulation { nodes, triangles, boundary_edges })
    }
}

/// Report produced by [`validate_admissibility`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Largest angle (radians) between ν_{K,σ} and the center segment
    /// x_L - x_K over interior edges; 0 for an orthogonal mesh.
    pub max_orthogonality_defect: f64,
    /// Largest relative defect |2 d_{K,σ} - d_{K|L}| / d_{K|L} over interior
    /// edges; 0 when every edge is cut in half by the center segment.
    pub iso_defect: f64,
    /// Min over (K, σ) of min(d_{K,σ}/h_K, |σ|/h_K).
    pub measured_xi: f64,
    /// |Σ|K| - domain area| / domain area.
    pub area_residual: f64,
    /// Every cell touching the boundary has its center on the boundary.
    pub boundary_property: bool,
    /// iso_defect within tolerance.
    pub iso_property: bool,
    /// measured_xi is a valid regularity constant (in (0, 1)).
    pub reg_property: bool,
    /// Largest number of edges of any cell.
    pub max_edges_per_cell: usize,
}

impl ValidationReport {
    /// Whether the mesh supports the two-point flux at tolerance `tol`.
    pub fn is_admissible(&self, tol: f64) -> bool {
        self.max_orthogonality_defect <= tol && self.reg_property
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "orthogonality defect (rad): {:.3e}", self.max_orthogonality_defect)?;
        writeln!(f, "iso defect:                 {:.3e}", self.iso_defect)?;
        writeln!(f, "measured xi:                {:.6}", self.measured_xi)?;
        writeln!(f, "area residual:              {:.3e}", self.area_residual)?;
        writeln!(f, "(boundary) property:        {}", self.boundary_property)?;
        writeln!(f, "(iso) property:             {}", self.iso_property)?;
        writeln!(f, "(reg) property:             {}", self.reg_property)?;
        write!(f, "max edges per cell:         {}", self.max_edges_per_cell)
    }
}

/// Measures how far `mesh` is from the admissibility and isotropy properties.
/// Report-only; never fails.
pub fn validate_admissibility(mesh: &Mesh, tol: f64) -> ValidationReport {
    let mut max_orth: f64 = 0.0;
    let mut iso_defect: f64 = 0.0;
    for edge in &mesh.edges {
        if let EdgeKind::Interior { k, l, d_kl, .. } = edge.kind {
            let seg = mesh.cells[l].center - mesh.cells[k].center;
            let cosang = edge.normal_k.dot(seg) / seg.norm();
            let sinang = edge.normal_k.cross(seg) / seg.norm();
            max_orth = max_orth.max(sinang.abs().atan2(cosang).abs());
            iso_defect = iso_defect.max((2.0 * edge.d_k_sigma - d_kl).abs() / d_kl);
        }
    }

    let mut boundary_property = true;
    for cell in &mesh.cells {
        let touches = cell.edge_ids.iter().any(|&e| !mesh.edges[e].is_interior());
        if touches && !cell.on_boundary_center {
            boundary_property = false;
            break;
        }
    }

    let cell_area: f64 = mesh.cells.iter().map(|c| c.area).sum();
    let domain_area = mesh.domain_area();
    let area_residual = (cell_area - domain_area).abs() / domain_area.abs();

    ValidationReport {
        max_orthogonality_defect: max_orth,
        iso_defect,
        measured_xi: mesh.xi,
        area_residual,
        boundary_property,
        iso_property: iso_defect <= tol,
        reg_property: mesh.xi > 0.0 && mesh.xi < 1.0,
        max_edges_per_cell: mesh.cells.iter().map(|c| c.edge_ids.len()).max().unwrap_or(0),
    }
}

/// Writes the line-oriented mesh dump. Values are printed with the shortest
/// decimal form that parses back to the same 64-bit float.
///
/// Format: `CELL id cx cy area` and
/// `EDGE id kind K L |σ| dKL dKσ dLσ nx ny`, with `-` for the L-side entries
/// of exterior edges.
pub fn write_mesh_dump<W: std::io::Write>(mesh: &Mesh, w: &mut W) -> std::io::Result<()> {
    for (i, c) in mesh.cells.iter().enumerate() {
        writeln!(w, "CELL {} {} {} {}", i, c.center.x, c.center.y, c.area)?;
    }
    for (i, e) in mesh.edges.iter().enumerate() {
        match e.kind {
            EdgeKind::Interior { k, l, d_kl, d_l_sigma } => writeln!(
                w,
                "EDGE {} interior {} {} {} {} {} {} {} {}",
                i, k, l, e.measure, d_kl, e.d_k_sigma, d_l_sigma, e.normal_k.x, e.normal_k.y
            )?,
            EdgeKind::Exterior { k } => writeln!(
                w,
                "EDGE {} exterior {} - {} {} {} - {} {}",
                i, k, e.measure, e.d_k_sigma, e.d_k_sigma, e.normal_k.x, e.normal_k.y
            )?,
        }
    }
    Ok(())
}

/// One `CELL` line of a mesh dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpCell {
    pub id: usize,
    pub cx: f64,
    pub cy: f64,
    pub area: f64,
}

/// One `EDGE` line of a mesh dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpEdge {
    pub id: usize,
    pub interior: bool,
    pub k: usize,
    pub l: Option<usize>,
    pub measure: f64,
    pub d_kl: f64,
    pub d_k_sigma: f64,
    pub d_l_sigma: Option<f64>,
    pub nx: f64,
    pub ny: f64,
}

/// Parses a mesh dump back into its records.
pub fn parse_mesh_dump(
    text: &str,
) -> Result<(Vec<DumpCell>, Vec<DumpEdge>), MeshError> {
    let mut cells = Vec::new();
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |reason: &str| MeshError::MalformedDump {
            line: lineno + 1,
            reason: reason.to_string(),
        };
        match fields[0] {
            "CELL" => {
                if fields.len() != 5 {
                    return Err(bad("CELL line must have 5 fields"));
                }
                cells.push(DumpCell {
                    id: fields[1].parse().map_err(|_| bad("bad cell id"))?,
                    cx: fields[2].parse().map_err(|_| bad("bad cx"))?,
                    cy: fields[3].parse().map_err(|_| bad("bad cy"))?,
                    area: fields[4].parse().map_err(|_| bad("bad area"))?,
                });
            }
            "EDGE" => {
                if fields.len() != 11 {
                    return Err(bad("EDGE line must have 11 fields"));
                }
                let interior = match fields[2] {
                    "interior" => true,
                    "exterior" => false,
                    _ => return Err(bad("edge kind must be interior or exterior")),
                };
                edges.push(DumpEdge {
                    id: fields[1].parse().map_err(|_| bad("bad edge id"))?,
                    interior,
                    k: fields[3].parse().map_err(|_| bad("bad K"))?,
                    l: if fields[4] == "-" {
                        None
                    } else {
                        Some(fields[4].parse().map_err(|_| bad("bad L"))?)
                    },
                    measure: fields[5].parse().map_err(|_| bad("bad measure"))?,
                    d_kl: fields[6].parse().map_err(|_| bad("bad dKL"))?,
                    d_k_sigma: fields[7].parse().map_err(|_| bad("bad dKsigma"))?,
                    d_l_sigma: if fields[8] == "-" {
                        None
                    } else {
                        Some(fields[8].parse().map_err(|_| bad("bad dLsigma"))?)
                    },
                    nx: fields[9].parse().map_err(|_| bad("bad nx"))?,
                    ny: fields[10].parse().map_err(|_| bad("bad ny"))?,
                });
            }
            _ => return Err(bad("line must start with CELL or EDGE")),
        }
    }
    Ok((cells, edges))
}
