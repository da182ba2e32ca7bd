//! Command-line front end: scenario execution, convergence studies, mesh
//! validation and vortex extraction.
//!
//! Exit codes: 0 on success, 1 on input/usage errors, 2 on numerical
//! failures (non-finite states, solver non-convergence).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::field::write_grid_function_csv;
use crate::gmsh::parse_gmsh;
use crate::harness::{
    space_error_vs_reference, time_order_estimate, HarnessError, OrderReport, Scenario,
};
use crate::mesh::{build_fv_mesh_from_triangulation, validate_admissibility, DEFAULT_BUILD_TOL};
use crate::propagator::SolveError;
use crate::solver::{run_simulation, RunOptions};
use crate::vorticity::{detect_vortices, pseudo_vorticity, write_vortex_csv};
use crate::vtk::{export_vtk, VtkField};

#[derive(Parser)]
#[command(name = "gpfv", version, about = "Finite-volume split-step solver for the 2D Gross-Pitaevskii equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a JSON config; writes diagnostics CSV,
    /// snapshot VTK files and the final state.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Richardson time-order estimate from three runs at 2dt, dt, dt/2.
    Order {
        /// Scenario preset (paper-disk, paper-disk-vortex, square-eigenmode).
        #[arg(long, default_value = "paper-disk")]
        scenario: String,
        /// Base time step dt.
        #[arg(long)]
        dt: f64,
        /// Final time.
        #[arg(long = "T")]
        t_final: f64,
        /// Stirrer frequency override.
        #[arg(long)]
        omega: Option<f64>,
        /// Also append the CSV row to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Spatial convergence against a closed-form reference on a mesh family.
    SpaceOrder {
        #[arg(long, default_value = "square-eigenmode")]
        scenario: String,
        /// Comma-separated square resolutions, e.g. 16,32,64.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        resolutions: Vec<usize>,
        /// Time step on the coarsest mesh (scaled with h on finer ones).
        #[arg(long, default_value_t = 0.005)]
        tau: f64,
        #[arg(long = "T", default_value_t = 0.1)]
        t_final: f64,
    },
    /// Check admissibility of a GMSH mesh; nonzero exit when the
    /// orthogonality defect exceeds the tolerance.
    ValidateMesh {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run a simulation and write the detected vortices of the final state.
    Vortices {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        threshold: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Entry point used by the `gpfv` binary; takes `argv` including the program
/// name and returns the process exit code.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own usage text; input errors exit with 1,
            // --help/--version with 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                HarnessError::Solve(SolveError::NonFinite { .. })
                | HarnessError::Solve(SolveError::CgDidNotConverge { .. })
                | HarnessError::DegenerateOrder => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { config } => run_command(&config),
        Command::Order { scenario, dt, t_final, omega, output } => {
            let scenario = Scenario::by_name(&scenario, omega)?;
            let report = time_order_estimate(&scenario, dt, t_final)?;
            println!("{}", OrderReport::csv_header());
            println!("{}", report.csv_row());
            if let Some(path) = output {
                let mut f = BufWriter::new(File::create(path)?);
                writeln!(f, "{}", OrderReport::csv_header())?;
                writeln!(f, "{}", report.csv_row())?;
            }
            Ok(())
        }
        Command::SpaceOrder { scenario, resolutions, tau, t_final } => {
            let base = Scenario::by_name(&scenario, None)?;
            let mut meshes = Vec::new();
            for n in &resolutions {
                let mut s = base.clone();
                if let Scenario { mesh: crate::config::MeshSource::Builtin(ref mut b), .. } = s {
                    if let crate::config::BuiltinMesh::Rectangle { nx, ny, .. } = b {
                        *nx = *n;
                        *ny = *n;
                    }
                }
                meshes.push(s.build_mesh()?);
            }
            let table = space_error_vs_reference(&base, &meshes, tau, t_final)?;
            print!("{}", table.csv());
            println!("slope,{}", table.slope);
            println!("r_squared,{}", table.r_squared);
            Ok(())
        }
        Command::ValidateMesh { input, tol } => {
            let text = std::fs::read_to_string(&input)?;
            let tri = parse_gmsh(&text)?;
            let mesh = build_fv_mesh_from_triangulation(&tri, DEFAULT_BUILD_TOL)?;
            let report = validate_admissibility(&mesh, tol);
            println!("cells: {}", mesh.n_cells());
            println!("edges: {}", mesh.n_edges());
            println!("h:     {}", mesh.h);
            println!("{report}");
            if report.max_orthogonality_defect > tol {
                return Err(HarnessError::Mesh(crate::mesh::MeshError::InvalidCell {
                    index: 0,
                    reason: format!(
                        "orthogonality defect {} exceeds tolerance {tol}",
                        report.max_orthogonality_defect
                    ),
                }));
            }
            Ok(())
        }
        Command::Vortices { config, threshold, output } => {
            let config = RunConfig::load(&config)?;
            let mesh = config.mesh.build()?;
            let potential = config.potential.build();
            let u0 = config.initial.sample(&mesh);
            let out = run_simulation(
                potential.as_ref(),
                &u0,
                &config.solver_config(),
                RunOptions { diag_stride: usize::MAX, ..Default::default() },
            )?;
            let omega_h = pseudo_vorticity(&out.final_state);
            let marks = detect_vortices(&omega_h, threshold);
            let path = output.unwrap_or_else(|| {
                config.outputs.clone().unwrap_or_default().join("vortices.csv")
            });
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            let mut f = BufWriter::new(File::create(&path)?);
            write_vortex_csv(&marks, &mut f)?;
            println!("{} vortices -> {}", marks.len(), path.display());
            Ok(())
        }
    }
}

fn run_command(config_path: &std::path::Path) -> Result<(), HarnessError> {
    let config = RunConfig::load(config_path)?;
    let out_dir = config.outputs.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let mesh = config.mesh.build()?;
    let potential = config.potential.build();
    let u0 = config.initial.sample(&mesh);

    let diag_file = File::create(out_dir.join("diagnostics.csv"))?;
    let mut diag_writer = BufWriter::new(diag_file);
    writeln!(diag_writer, "n,t,mass,h1,energy,linf")?;
    let options = RunOptions {
        diag_stride: config.diag_stride,
        snapshot_times: &config.snapshots,
        on_record: Some(Box::new(|r: &crate::solver::DiagRecord| {
            let _ = writeln!(
                diag_writer,
                "{},{},{},{},{},{}",
                r.n, r.t, r.mass, r.h1, r.energy, r.linf
            );
            let _ = diag_writer.flush();
        })),
    };
    let out = run_simulation(potential.as_ref(), &u0, &config.solver_config(), options)?;

    for (i, (t, state)) in out.snapshots.iter().enumerate() {
        let path = out_dir.join(format!("snapshot_{i:03}_t{t}.vtk"));
        let mut f = BufWriter::new(File::create(path)?);
        export_vtk(&mesh, &[VtkField::Complex("psi", state)], &mut f)?;
    }
    let omega_h = pseudo_vorticity(&out.final_state);
    let mut f = BufWriter::new(File::create(out_dir.join("final.vtk"))?);
    export_vtk(
        &mesh,
        &[VtkField::Complex("psi", &out.final_state), VtkField::Real("vorticity", &omega_h)],
        &mut f,
    )?;
    let mut f = BufWriter::new(File::create(out_dir.join("final_state.csv"))?);
    write_grid_function_csv(&out.final_state, &mut f)?;

    let first = out.diagnostics.records.first().expect("diagnostics never empty");
    let last = out.diagnostics.records.last().unwrap();
    println!(
        "{} steps, mass drift {:.3e}, outputs in {}",
        last.n,
        (last.mass - first.mass).abs() / first.mass,
        out_dir.display()
    );
    Ok(())
}

/// Builds the mesh referenced by a run config; kept public for integration
/// tests and examples that post-process the outputs.
pub fn load_mesh(config: &RunConfig) -> Result<Arc<crate::mesh::Mesh>, HarnessError> {
    config.mesh.build()
}
