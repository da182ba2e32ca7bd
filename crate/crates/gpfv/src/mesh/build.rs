//! Mesh construction: structured rectangles, the circumcenter rule for
//! conforming triangulations, and two structured disk triangulations (a
//! ring-based one and a clipped equilateral lattice).

use std::collections::HashMap;

use crate::geometry::{circumcenter, signed_area, Point2, Vec2};

use super::{Cell, Edge, EdgeKind, Mesh, MeshError, Triangulation};

/// Default relative geometric tolerance of the triangulation builder:
/// a triangle is accepted as acute when every center-to-edge distance is at
/// least `tol * h_K`.
pub const DEFAULT_BUILD_TOL: f64 = 1e-8;

/// Builds a structured mesh of `nx * ny` axis-aligned rectangles covering
/// `[0, lx] x [0, ly]`, centers at the midpoints. Cells are indexed row-major
/// (`j * nx + i`). On square cells d_{K,σ} = d_{K|L}/2 holds exactly.
pub fn generate_uniform_rectangle_mesh(
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 || !(lx > 0.0) || !(ly > 0.0) {
        return Err(MeshError::InvalidDimensions { nx, ny, lx, ly });
    }
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    let id = |i: usize, j: usize| j * nx + i;
    let xc = |i: usize| (i as f64 + 0.5) * dx;
    let yc = |j: usize| (j as f64 + 0.5) * dy;
    let xn = |i: usize| i as f64 * dx;
    let yn = |j: usize| j as f64 * dy;

    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(Cell {
                center: Point2::new(xc(i), yc(j)),
                area: dx * dy,
                edge_ids: Vec::new(),
                diameter: dx.hypot(dy),
                on_boundary_center: false,
            });
        }
    }

    let mut edges = Vec::new();
    // Interior edges: the distances are assigned structurally so that the
    // (iso) property holds exactly in floating point.
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx {
                edges.push(Edge {
                    kind: EdgeKind::Interior {
                        k: id(i, j),
                        l: id(i + 1, j),
                        d_kl: dx,
                        d_l_sigma: 0.5 * dx,
                    },
                    measure: dy,
                    d_k_sigma: 0.5 * dx,
                    normal_k: Vec2::new(1.0, 0.0),
                    x_sigma: Point2::new(xn(i + 1), yc(j)),
                    vertices: (Point2::new(xn(i + 1), yn(j)), Point2::new(xn(i + 1), yn(j + 1))),
                });
            }
            if j + 1 < ny {
                edges.push(Edge {
                    kind: EdgeKind::Interior {
                        k: id(i, j),
                        l: id(i, j + 1),
                        d_kl: dy,
                        d_l_sigma: 0.5 * dy,
                    },
                    measure: dx,
                    d_k_sigma: 0.5 * dy,
                    normal_k: Vec2::new(0.0, 1.0),
                    x_sigma: Point2::new(xc(i), yn(j + 1)),
                    vertices: (Point2::new(xn(i), yn(j + 1)), Point2::new(xn(i + 1), yn(j + 1))),
                });
            }
        }
    }
    // Exterior edges, one per boundary side of a boundary cell.
    for j in 0..ny {
        edges.push(Edge {
            kind: EdgeKind::Exterior { k: id(0, j) },
            measure: dy,
            d_k_sigma: 0.5 * dx,
            normal_k: Vec2::new(-1.0, 0.0),
            x_sigma: Point2::new(0.0, yc(j)),
            vertices: (Point2::new(0.0, yn(j)), Point2::new(0.0, yn(j + 1))),
        });
        edges.push(Edge {
            kind: EdgeKind::Exterior { k: id(nx - 1, j) },
            measure: dy,
            d_k_sigma: 0.5 * dx,
            normal_k: Vec2::new(1.0, 0.0),
            x_sigma: Point2::new(lx, yc(j)),
            vertices: (Point2::new(lx, yn(j)), Point2::new(lx, yn(j + 1))),
        });
    }
    for i in 0..nx {
        edges.push(Edge {
            kind: EdgeKind::Exterior { k: id(i, 0) },
            measure: dx,
            d_k_sigma: 0.5 * dy,
            normal_k: Vec2::new(0.0, -1.0),
            x_sigma: Point2::new(xc(i), 0.0),
            vertices: (Point2::new(xn(i), 0.0), Point2::new(xn(i + 1), 0.0)),
        });
        edges.push(Edge {
            kind: EdgeKind::Exterior { k: id(i, ny - 1) },
            measure: dx,
            d_k_sigma: 0.5 * dy,
            normal_k: Vec2::new(0.0, 1.0),
            x_sigma: Point2::new(xc(i), ly),
            vertices: (Point2::new(xn(i), ly), Point2::new(xn(i + 1), ly)),
        });
    }

    Mesh::new(cells, edges)
}

/// Turns a conforming triangulation with acute triangles into an admissible
/// finite-volume mesh by the circumcenter rule: each triangle becomes a cell
/// with x_K at its circumcenter, so neighboring centers both lie on the
/// perpendicular bisector of the shared edge and the orthogonality property
/// holds by construction.
///
/// `tol` is relative to the triangle diameter; see [`DEFAULT_BUILD_TOL`].
pub fn build_fv_mesh_from_triangulation(
    tri: &Triangulation,
    tol: f64,
) -> Result<Mesh, MeshError> {
    let n_nodes = tri.nodes.len();
    let nt = tri.triangles.len();

    let mut centers = Vec::with_capacity(nt);
    let mut cells = Vec::with_capacity(nt);
    // Signed center-to-edge distance per triangle and local edge, positive
    // inside; kept for the edge pass below.
    let mut edge_dist = vec![[0.0f64; 3]; nt];

    for (t, tri_nodes) in tri.triangles.iter().enumerate() {
        for &v in tri_nodes {
            if v >= n_nodes {
                return Err(MeshError::DanglingNode { index: t, node: v, n_nodes });
            }
        }
        let [a, b, c] = [tri.nodes[tri_nodes[0]], tri.nodes[tri_nodes[1]], tri.nodes[tri_nodes[2]]];
        let diameter = a.dist(b).max(b.dist(c)).max(c.dist(a));
        let area = signed_area(a, b, c);
        if area.abs() <= tol * diameter * diameter {
            return Err(MeshError::DegenerateTriangle { index: t, area: area.abs() });
        }
        let cc = circumcenter(a, b, c)
            .ok_or(MeshError::DegenerateTriangle { index: t, area: area.abs() })?;
        // Local edges opposite no particular vertex: (a,b), (b,c), (c,a).
        for (le, (p, q)) in [(a, b), (b, c), (c, a)].into_iter().enumerate() {
            let len = p.dist(q);
            // Positive when the circumcenter is on the interior side of the
            // (counterclockwise) directed edge.
            let d = (q - p).cross(cc - p) / len;
            if d <= tol * diameter {
                return Err(MeshError::NonAcuteTriangle {
                    index: t,
                    distance: d,
                    tol: tol * diameter,
                });
            }
            edge_dist[t][le] = d;
        }
        centers.push(cc);
        cells.push(Cell {
            center: cc,
            area: area.abs(),
            edge_ids: Vec::new(),
            diameter,
            on_boundary_center: false,
        });
    }

    // Pair triangle sides; first-encounter order keeps the edge numbering
    // deterministic.
    struct Side {
        tri: usize,
        local: usize,
        nodes: (usize, usize),
    }
    let mut sides: Vec<Side> = Vec::with_capacity(3 * nt);
    let mut pair_of: HashMap<(usize, usize), (usize, Option<usize>)> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    for (t, tri_nodes) in tri.triangles.iter().enumerate() {
        for (le, (i, j)) in [(0usize, 1usize), (1, 2), (2, 0)]
            .map(|(u, v)| (tri_nodes[u], tri_nodes[v]))
            .into_iter()
            .enumerate()
        {
            let key = (i.min(j), i.max(j));
            sides.push(Side { tri: t, local: le, nodes: (i, j) });
            let side_id = sides.len() - 1;
            match pair_of.get_mut(&key) {
                None => {
                    pair_of.insert(key, (side_id, None));
                    order.push(key);
                }
                Some((_, second @ None)) => *second = Some(side_id),
                Some(_) => return Err(MeshError::NonConforming { a: key.0, b: key.1 }),
            }
        }
    }

    let mut edges = Vec::with_capacity(order.len());
    for key in order {
        let (first, second) = pair_of[&key];
        let s1 = &sides[first];
        let (p, q) = (tri.nodes[s1.nodes.0], tri.nodes[s1.nodes.1]);
        let len = p.dist(q);
        match second {
            Some(second) => {
                let s2 = &sides[second];
                let (k, l) = (s1.tri, s2.tri);
                let d_kl = centers[k].dist(centers[l]);
                let hmax = cells[k].diameter.max(cells[l].diameter);
                if d_kl <= tol * hmax {
                    return Err(MeshError::CoincidentCircumcenters {
                        first: k,
                        second: l,
                        distance: d_kl,
                    });
                }
                let normal_k = (centers[l] - centers[k]).normalized();
                let d_k_sigma = edge_dist[k][s1.local];
                let d_l_sigma = edge_dist[l][s2.local];
                edges.push(Edge {
                    kind: EdgeKind::Interior { k, l, d_kl, d_l_sigma },
                    measure: len,
                    d_k_sigma,
                    normal_k,
                    x_sigma: centers[k] + d_k_sigma * normal_k,
                    vertices: (p, q),
                });
            }
            None => {
                let k = s1.tri;
                // Outward normal: the triangle is counterclockwise, so the
                // interior lies left of the directed side.
                let dir = (q - p).normalized();
                let normal_k = Vec2::new(dir.y, -dir.x);
                let d_k_sigma = edge_dist[k][s1.local];
                edges.push(Edge {
                    kind: EdgeKind::Exterior { k },
                    measure: len,
                    d_k_sigma,
                    normal_k,
                    x_sigma: centers[k] + d_k_sigma * normal_k,
                    vertices: (p, q),
                });
            }
        }
    }

    // Property (boundary): flag cells whose center lies on one of their
    // boundary edges.
    for edge in &edges {
        if let EdgeKind::Exterior { k } = edge.kind {
            let cell = &mut cells[k];
            if edge.d_k_sigma <= 1e-12 * cell.diameter {
                cell.on_boundary_center = true;
            }
        }
    }

    Mesh::new(cells, edges)
}

/// Ring-structured triangulation of the disk of radius `radius` centered at
/// the origin: ring k carries 6k nodes, so all triangles stay close to
/// equilateral (and in particular acute) down to the center. `rings` rings
/// give `6 * rings^2` triangles. The boundary is the regular polygon with
/// `6 * rings` sides.
pub fn disk_triangulation(radius: f64, rings: usize) -> Result<Triangulation, MeshError> {
    if !(radius > 0.0) || rings == 0 {
        return Err(MeshError::InvalidDimensions {
            nx: rings,
            ny: rings,
            lx: radius,
            ly: radius,
        });
    }
    let dr = radius / rings as f64;
    let mut nodes = vec![Point2::new(0.0, 0.0)];
    let mut ring_start = vec![0usize; rings + 1];
    for k in 1..=rings {
        ring_start[k] = nodes.len();
        let n = 6 * k;
        let r = k as f64 * dr;
        for j in 0..n {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            nodes.push(Point2::new(r * theta.cos(), r * theta.sin()));
        }
    }

    let mut triangles = Vec::with_capacity(6 * rings * rings);
    // Innermost hexagon.
    for j in 0..6 {
        triangles.push([0, ring_start[1] + j, ring_start[1] + (j + 1) % 6]);
    }
    // Strip between consecutive rings: greedy merge of the two node circles,
    // always advancing the pointer that leaves the shorter diagonal. This
    // reproduces the balanced spiderweb pattern whose triangles stay acute.
    for k in 1..rings {
        let (n_in, n_out) = (6 * k, 6 * (k + 1));
        let inner = |i: usize| ring_start[k] + i % n_in;
        let outer = |o: usize| ring_start[k + 1] + o % n_out;
        let (mut i, mut o) = (0usize, 0usize);
        while i < n_in || o < n_out {
            let advance_outer = if o == n_out {
                false
            } else if i == n_in {
                true
            } else {
                let diag_outer = nodes[inner(i)].dist(nodes[outer(o + 1)]);
                let diag_inner = nodes[inner(i + 1)].dist(nodes[outer(o)]);
                diag_outer <= diag_inner
            };
            if advance_outer {
                triangles.push([outer(o), outer(o + 1), inner(i)]);
                o += 1;
            } else {
                triangles.push([inner(i), inner(i + 1), outer(o)]);
                i += 1;
            }
        }
    }

    let n_bnd = 6 * rings;
    let boundary_edges = (0..n_bnd)
        .map(|j| [ring_start[rings] + j, ring_start[rings] + (j + 1) % n_bnd])
        .collect();

    Triangulation::new(nodes, triangles, boundary_edges)
}

/// Triangular-lattice disk: the equilateral lattice of side `spacing`,
/// keeping every triangle whose vertices lie within `radius` of the origin.
/// All triangles are exactly equilateral, so the mesh is an exact local
/// Voronoi mesh (iso defect 0, regularity 1/(2√3)) with the best attainable
/// spectral cleanliness for sampled smooth data; the price is a lattice-step
/// boundary instead of an inscribed polygon.
pub fn hex_disk_triangulation(radius: f64, spacing: f64) -> Result<Triangulation, MeshError> {
    if !(radius > 0.0) || !(spacing > 0.0) || spacing > radius {
        return Err(MeshError::InvalidDimensions { nx: 0, ny: 0, lx: radius, ly: spacing });
    }
    let point = |i: i64, j: i64| {
        Point2::new(
            spacing * (i as f64 + 0.5 * j as f64),
            spacing * j as f64 * 3f64.sqrt() / 2.0,
        )
    };
    let inside = |p: Point2| p.x * p.x + p.y * p.y <= radius * radius;
    let mut node_ids: HashMap<(i64, i64), usize> = HashMap::new();
    let mut nodes: Vec<Point2> = Vec::new();
    let mut triangles = Vec::new();
    let range = (radius / spacing) as i64 + 2;
    for j in -range..=range {
        for i in -2 * range..=2 * range {
            let candidates = [
                [(i, j), (i + 1, j), (i, j + 1)],
                [(i + 1, j), (i + 1, j + 1), (i, j + 1)],
            ];
            for corners in candidates {
                if corners.iter().all(|&(u, v)| inside(point(u, v))) {
                    let ids = corners.map(|(u, v)| {
                        *node_ids.entry((u, v)).or_insert_with(|| {
                            nodes.push(point(u, v));
                            nodes.len() - 1
                        })
                    });
                    triangles.push(ids);
                }
            }
        }
    }
    if triangles.is_empty() {
        return Err(MeshError::Empty);
    }
    // Boundary edges: sides incident to exactly one kept triangle.
    let mut side_count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *side_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut boundary_edges: Vec<[usize; 2]> = side_count
        .iter()
        .filter(|&(_, &c)| c == 1)
        .map(|(&(a, b), _)| [a, b])
        .collect();
    boundary_edges.sort();
    Triangulation::new(nodes, triangles, boundary_edges)
}
