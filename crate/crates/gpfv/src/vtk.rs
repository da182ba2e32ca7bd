//! VTK legacy ASCII (version 2.0) export: the mesh as an UNSTRUCTURED_GRID
//! of polygon cells with one CELL_DATA scalar array per real field and two
//! (`<name>_abs`, `<name>_arg`) per complex field.

use std::collections::HashMap;
use std::io::Write;

use crate::field::{GridFunction, RealGridFunction};
use crate::mesh::Mesh;

/// A named cell field to export.
pub enum VtkField<'a> {
    Real(&'a str, &'a RealGridFunction),
    Complex(&'a str, &'a GridFunction),
}

impl VtkField<'_> {
    fn check_mesh(&self, mesh: &Mesh) {
        let id = match self {
            VtkField::Real(_, f) => f.mesh().id(),
            VtkField::Complex(_, f) => f.mesh().id(),
        };
        assert_eq!(id, mesh.id(), "VTK fields must share the target mesh");
    }
}

/// Writes the mesh and the given cell fields. Complex fields are split into
/// modulus and argument arrays with the argument wrapped to [-π, π).
pub fn export_vtk<W: Write>(
    mesh: &Mesh,
    fields: &[VtkField<'_>],
    w: &mut W,
) -> std::io::Result<()> {
    for f in fields {
        f.check_mesh(mesh);
    }

    // Deduplicate polygon vertices by exact bit pattern; shared vertices are
    // exact copies by construction.
    let mut point_ids: HashMap<(u64, u64), usize> = HashMap::new();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut polygons: Vec<Vec<usize>> = Vec::with_capacity(mesh.n_cells());
    for k in 0..mesh.n_cells() {
        let polygon = mesh.cell_polygon(k);
        let ids = polygon
            .iter()
            .map(|p| {
                let key = (p.x.to_bits(), p.y.to_bits());
                *point_ids.entry(key).or_insert_with(|| {
                    points.push((p.x, p.y));
                    points.len() - 1
                })
            })
            .collect();
        polygons.push(ids);
    }

    writeln!(w, "# vtk DataFile Version 2.0")?;
    writeln!(w, "gpfv fields")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", points.len())?;
    for (x, y) in &points {
        writeln!(w, "{} {} 0", x, y)?;
    }
    let list_len: usize = polygons.iter().map(|p| p.len() + 1).sum();
    writeln!(w, "CELLS {} {}", polygons.len(), list_len)?;
    for p in &polygons {
        write!(w, "{}", p.len())?;
        for id in p {
            write!(w, " {}", id)?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", polygons.len())?;
    for _ in &polygons {
        writeln!(w, "7")?; // VTK_POLYGON
    }

    if fields.is_empty() {
        return Ok(());
    }
    writeln!(w, "CELL_DATA {}", mesh.n_cells())?;
    for field in fields {
        match field {
            VtkField::Real(name, f) => {
                write_scalars(w, name, f.values().iter().copied())?;
            }
            VtkField::Complex(name, f) => {
                write_scalars(w, &format!("{name}_abs"), f.values().iter().map(|v| v.norm()))?;
                write_scalars(
                    w,
                    &format!("{name}_arg"),
                    f.values().iter().map(|v| {
                        let arg = v.arg();
                        if arg >= std::f64::consts::PI {
                            arg - 2.0 * std::f64::consts::PI
                        } else {
                            arg
                        }
                    }),
                )?;
            }
        }
    }
    Ok(())
}

fn write_scalars<W: Write>(
    w: &mut W,
    name: &str,
    values: impl Iterator<Item = f64>,
) -> std::io::Result<()> {
    writeln!(w, "SCALARS {} double 1", name)?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{}", v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_uniform_rectangle_mesh;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn parse_section_count(text: &str, keyword: &str) -> usize {
        let line = text.lines().find(|l| l.starts_with(keyword)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    }

    #[test]
    fn two_cell_mesh_with_one_real_field() {
        let mesh = Arc::new(generate_uniform_rectangle_mesh(2, 1, 2.0, 1.0).unwrap());
        let f = RealGridFunction::from_values(mesh.clone(), vec![1.0, -2.0]);
        let mut buf = Vec::new();
        export_vtk(&mesh, &[VtkField::Real("density", &f)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 2.0\n"));
        assert_eq!(parse_section_count(&text, "CELLS"), 2);
        assert_eq!(parse_section_count(&text, "POINTS"), 6); // 2 shared corners
        assert_eq!(parse_section_count(&text, "CELL_DATA"), 2);
        assert_eq!(text.matches("SCALARS").count(), 1);
        assert!(text.contains("SCALARS density double 1"));
    }

    #[test]
    fn complex_field_splits_into_abs_and_arg() {
        let mesh = Arc::new(generate_uniform_rectangle_mesh(2, 2, 1.0, 1.0).unwrap());
        let u = GridFunction::constant(mesh.clone(), Complex64::new(0.0, 1.0));
        let mut buf = Vec::new();
        export_vtk(&mesh, &[VtkField::Complex("psi", &u)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("SCALARS psi_abs double 1"));
        assert!(text.contains("SCALARS psi_arg double 1"));
        let abs_block: Vec<&str> = text
            .split("SCALARS psi_abs double 1\nLOOKUP_TABLE default\n")
            .nth(1)
            .unwrap()
            .lines()
            .take(4)
            .collect();
        assert!(abs_block.iter().all(|l| *l == "1"));
        let arg_block: Vec<&str> = text
            .split("SCALARS psi_arg double 1\nLOOKUP_TABLE default\n")
            .nth(1)
            .unwrap()
            .lines()
            .take(4)
            .collect();
        let half_pi = (std::f64::consts::PI / 2.0).to_string();
        assert!(arg_block.iter().all(|l| *l == half_pi));
    }

    #[test]
    fn argument_is_wrapped_to_half_open_interval() {
        let mesh = Arc::new(generate_uniform_rectangle_mesh(1, 1, 1.0, 1.0).unwrap());
        let u = GridFunction::constant(mesh.clone(), Complex64::new(-1.0, 0.0));
        let mut buf = Vec::new();
        export_vtk(&mesh, &[VtkField::Complex("psi", &u)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // arg(-1) = π maps to -π.
        assert!(text.contains(&(-std::f64::consts::PI).to_string()));
    }

    #[test]
    fn polygon_lengths_match_triangle_mesh() {
        let tri = crate::mesh::disk_triangulation(1.0, 3).unwrap();
        let mesh =
            Arc::new(crate::mesh::build_fv_mesh_from_triangulation(&tri, 1e-8).unwrap());
        let mut buf = Vec::new();
        export_vtk(&mesh, &[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(parse_section_count(&text, "CELLS"), mesh.n_cells());
        assert_eq!(parse_section_count(&text, "POINTS"), tri.nodes.len());
        let cell_types = text
            .lines()
            .skip_while(|l| !l.starts_with("CELL_TYPES"))
            .skip(1)
            .take(mesh.n_cells());
        assert!(cell_types.into_iter().all(|l| l == "7"));
    }
}
