//! Reader and writer for the MSH 2.2 ASCII format (the `$MeshFormat`,
//! `$Nodes` and `$Elements` sections). Supported element types: 1 (2-node
//! line, collected as boundary edges), 2 (3-node triangle) and 15 (point,
//! skipped). Node z-coordinates and element tags are ignored.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::Point2;
use crate::mesh::{MeshError, Triangulation};

#[derive(Debug, Error)]
pub enum GmshError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("unsupported MSH version `{0}` (only 2.2 ASCII is supported)")]
    UnsupportedVersion(String),
    #[error("unsupported element type {etype} (element {id})")]
    UnsupportedElementType { id: usize, etype: usize },
    #[error("element {id} references unknown node {node}")]
    UnknownNode { id: usize, node: usize },
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.iter.by_ref() {
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                return Some((i + 1, trimmed));
            }
        }
        None
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> GmshError {
    GmshError::Malformed { line, reason: reason.into() }
}

/// Parses an MSH 2.2 ASCII document into a triangulation.
pub fn parse_gmsh(text: &str) -> Result<Triangulation, GmshError> {
    let mut lines = Lines { iter: text.lines().enumerate() };

    let mut nodes: Vec<Point2> = Vec::new();
    let mut node_index: HashMap<usize, usize> = HashMap::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut boundary_edges: Vec<[usize; 2]> = Vec::new();
    let (mut saw_format, mut saw_nodes, mut saw_elements) = (false, false, false);

    while let Some((lineno, line)) = lines.next_content() {
        match line {
            "$MeshFormat" => {
                let (l, header) = lines
                    .next_content()
                    .ok_or_else(|| malformed(lineno, "unterminated $MeshFormat"))?;
                let mut fields = header.split_whitespace();
                let version = fields.next().ok_or_else(|| malformed(l, "missing version"))?;
                let file_type = fields.next().ok_or_else(|| malformed(l, "missing file type"))?;
                if version != "2.2" || file_type != "0" {
                    return Err(GmshError::UnsupportedVersion(header.to_string()));
                }
                expect_end(&mut lines, "$EndMeshFormat", lineno)?;
                saw_format = true;
            }
            "$Nodes" => {
                let (l, count) = lines
                    .next_content()
                    .ok_or_else(|| malformed(lineno, "unterminated $Nodes"))?;
                let count: usize =
                    count.parse().map_err(|_| malformed(l, "bad node count"))?;
                for _ in 0..count {
                    let (l, entry) = lines
                        .next_content()
                        .ok_or_else(|| malformed(lineno, "truncated $Nodes section"))?;
                    let fields: Vec<&str> = entry.split_whitespace().collect();
                    if fields.len() != 4 {
                        return Err(malformed(l, "node line must be `id x y z`"));
                    }
                    let id: usize =
                        fields[0].parse().map_err(|_| malformed(l, "bad node id"))?;
                    let x: f64 = fields[1].parse().map_err(|_| malformed(l, "bad x"))?;
                    let y: f64 = fields[2].parse().map_err(|_| malformed(l, "bad y"))?;
                    node_index.insert(id, nodes.len());
                    nodes.push(Point2::new(x, y));
                }
                expect_end(&mut lines, "$EndNodes", lineno)?;
                saw_nodes = true;
            }
            "$Elements" => {
                let (l, count) = lines
                    .next_content()
                    .ok_or_else(|| malformed(lineno, "unterminated $Elements"))?;
                let count: usize =
                    count.parse().map_err(|_| malformed(l, "bad element count"))?;
                for _ in 0..count {
                    let (l, entry) = lines
                        .next_content()
                        .ok_or_else(|| malformed(lineno, "truncated $Elements section"))?;
                    let fields: Vec<&str> = entry.split_whitespace().collect();
                    if fields.len() < 3 {
                        return Err(malformed(l, "element line too short"));
                    }
                    let id: usize =
                        fields[0].parse().map_err(|_| malformed(l, "bad element id"))?;
                    let etype: usize =
                        fields[1].parse().map_err(|_| malformed(l, "bad element type"))?;
                    let ntags: usize =
                        fields[2].parse().map_err(|_| malformed(l, "bad tag count"))?;
                    let node_fields = &fields[3 + ntags..];
                    let resolve = |raw: &str| -> Result<usize, GmshError> {
                        let tag: usize =
                            raw.parse().map_err(|_| malformed(l, "bad node reference"))?;
                        node_index
                            .get(&tag)
                            .copied()
                            .ok_or(GmshError::UnknownNode { id, node: tag })
                    };
                    match etype {
                        1 => {
                            if node_fields.len() != 2 {
                                return Err(malformed(l, "line element needs 2 nodes"));
                            }
                            boundary_edges
                                .push([resolve(node_fields[0])?, resolve(node_fields[1])?]);
                        }
                        2 => {
                            if node_fields.len() != 3 {
                                return Err(malformed(l, "triangle element needs 3 nodes"));
                            }
                            triangles.push([
                                resolve(node_fields[0])?,
                                resolve(node_fields[1])?,
                                resolve(node_fields[2])?,
                            ]);
                        }
                        15 => {}
                        _ => return Err(GmshError::UnsupportedElementType { id, etype }),
                    }
                }
                expect_end(&mut lines, "$EndElements", lineno)?;
                saw_elements = true;
            }
            section if section.starts_with('$') && !section.starts_with("$End") => {
                // Unknown section (e.g. $PhysicalNames): skip to its end.
                let end = format!("$End{}", &section[1..]);
                loop {
                    match lines.next_content() {
                        Some((_, l)) if l == end => break,
                        Some(_) => {}
                        None => return Err(malformed(lineno, format!("unterminated {section}"))),
                    }
                }
            }
            _ => return Err(malformed(lineno, format!("unexpected content `{line}`"))),
        }
    }

    if !saw_format {
        return Err(GmshError::MissingSection("$MeshFormat"));
    }
    if !saw_nodes {
        return Err(GmshError::MissingSection("$Nodes"));
    }
    if !saw_elements {
        return Err(GmshError::MissingSection("$Elements"));
    }

    Ok(Triangulation::new(nodes, triangles, boundary_edges)?)
}

fn expect_end(lines: &mut Lines, end: &str, start_line: usize) -> Result<(), GmshError> {
    match lines.next_content() {
        Some((_, l)) if l == end => Ok(()),
        Some((l, other)) => Err(malformed(l, format!("expected {end}, found `{other}`"))),
        None => Err(malformed(start_line, format!("missing {end}"))),
    }
}

/// Writes a triangulation as MSH 2.2 ASCII. Boundary edges become 2-node
/// line elements, triangles 3-node elements; ids are 1-based and sequential.
pub fn write_gmsh<W: std::io::Write>(
    tri: &Triangulation,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "$MeshFormat")?;
    writeln!(w, "2.2 0 8")?;
    writeln!(w, "$EndMeshFormat")?;
    writeln!(w, "$Nodes")?;
    writeln!(w, "{}", tri.nodes.len())?;
    for (i, n) in tri.nodes.iter().enumerate() {
        writeln!(w, "{} {} {} 0", i + 1, n.x, n.y)?;
    }
    writeln!(w, "$EndNodes")?;
    writeln!(w, "$Elements")?;
    writeln!(w, "{}", tri.boundary_edges.len() + tri.triangles.len())?;
    let mut id = 1;
    for b in &tri.boundary_edges {
        writeln!(w, "{} 1 2 0 1 {} {}", id, b[0] + 1, b[1] + 1)?;
        id += 1;
    }
    for t in &tri.triangles {
        writeln!(w, "{} 2 2 0 1 {} {} {}", id, t[0] + 1, t[1] + 1, t[2] + 1)?;
        id += 1;
    }
    writeln!(w, "$EndElements")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE_TRIANGLE: &str = "\
$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
3
1 0 0 0
2 1 0 0
3 0.5 0.8 0
$EndNodes
$Elements
4
1 15 2 0 1 1
2 1 2 0 1 1 2
3 1 2 0 1 2 3
4 2 2 0 1 1 2 3
$EndElements
";

    #[test]
    fn parses_single_triangle() {
        let tri = parse_gmsh(SINGLE_TRIANGLE).unwrap();
        assert_eq!(tri.nodes.len(), 3);
        assert_eq!(tri.triangles.len(), 1);
        assert_eq!(tri.boundary_edges.len(), 2);
    }

    #[test]
    fn rejects_quadrangle_elements() {
        let text = SINGLE_TRIANGLE.replace("4 2 2 0 1 1 2 3", "4 3 2 0 1 1 2 3");
        let err = parse_gmsh(&text).unwrap_err();
        assert!(matches!(err, GmshError::UnsupportedElementType { etype: 3, .. }), "{err:?}");
    }

    #[test]
    fn rejects_dangling_node_reference() {
        let text = SINGLE_TRIANGLE.replace("4 2 2 0 1 1 2 3", "4 2 2 0 1 1 2 9");
        let err = parse_gmsh(&text).unwrap_err();
        assert!(matches!(err, GmshError::UnknownNode { node: 9, .. }), "{err:?}");
    }

    #[test]
    fn rejects_wrong_version() {
        let text = SINGLE_TRIANGLE.replace("2.2 0 8", "4.1 0 8");
        assert!(matches!(parse_gmsh(&text), Err(GmshError::UnsupportedVersion(_))));
    }

    #[test]
    fn rejects_missing_sections_and_bad_headers() {
        assert!(matches!(
            parse_gmsh("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"),
            Err(GmshError::MissingSection("$Nodes"))
        ));
        let text = SINGLE_TRIANGLE.replace("$EndNodes", "$EndElements");
        assert!(matches!(parse_gmsh(&text), Err(GmshError::Malformed { .. })));
    }

    #[test]
    fn two_triangle_square_is_conforming() {
        let text = "\
$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
2
1 2 2 0 1 1 2 3
2 2 2 0 1 1 3 4
$EndElements
";
        let tri = parse_gmsh(text).unwrap();
        assert_eq!(tri.triangles.len(), 2);
        // The diagonal (node 1, node 3) is shared by both triangles.
        let shared: Vec<_> = tri
            .triangles
            .iter()
            .filter(|t| t.contains(&0) && t.contains(&2))
            .collect();
        assert_eq!(shared.len(), 2);
    }

    #[test]
    fn skips_unknown_sections() {
        let text = SINGLE_TRIANGLE.replace(
            "$Nodes",
            "$PhysicalNames\n1\n2 1 \"outer\"\n$EndPhysicalNames\n$Nodes",
        );
        assert!(parse_gmsh(&text).is_ok());
    }

    #[test]
    fn write_parse_round_trip() {
        let tri = crate::mesh::disk_triangulation(2.0, 3).unwrap();
        let mut buf = Vec::new();
        write_gmsh(&tri, &mut buf).unwrap();
        let parsed = parse_gmsh(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed.nodes.len(), tri.nodes.len());
        assert_eq!(parsed.triangles.len(), tri.triangles.len());
        assert_eq!(parsed.boundary_edges.len(), tri.boundary_edges.len());
        for (a, b) in parsed.nodes.iter().zip(&tri.nodes) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
    }
}
