//! Command-line front end: filter kernels, the Poisson and corner
//! studies, mesh quality reports, and convergence CSVs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use sisg::error::{Error, Result};
use sisg::field::ScalarField;
use sisg::mesh::Mesh;
use sisg::norms::{h1_error, l2_error, max_interior_edge_jump};
use sisg::problems::{corner, poisson};
use sisg::projection::{broken_estimate_ratio, project, ProjectionProblem, Source};
use sisg::savgol::{apply as savgol_apply, kernel, SGWindow};
use sisg::space::{Deriv, Family, FunctionSpace};
use sisg::util::set_threads;
use sisg::vtk;

#[derive(Parser)]
#[command(
    name = "sisg",
    about = "Finite-element smoothing filters on triangular meshes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for CSV and VTK artifacts.
    #[arg(long, global = true, default_value = "out")]
    outdir: PathBuf,
    /// Override the quadrature degree used for reported error norms.
    #[arg(long, global = true)]
    quad_degree: Option<usize>,
    /// Override the linear-solver relative tolerance.
    #[arg(long, global = true)]
    solver_tol: Option<f64>,
    /// Worker threads for element loops (results are identical for any
    /// value).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Print a Savitzky-Golay kernel.
    Savgol {
        /// Window length r.
        #[arg(long)]
        window: usize,
        /// Polynomial degree k (k < r).
        #[arg(long)]
        degree: usize,
        /// Derivative order extracted from the fit.
        #[arg(long, default_value_t = 0)]
        deriv: usize,
        /// 1-based evaluation position in the window (default: center).
        #[arg(long)]
        offset: Option<usize>,
        /// Optionally filter a comma-separated series and print the
        /// valid-region output.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        series: Option<Vec<f64>>,
    },
    /// Solve the oscillatory Poisson demo and filter a derivative.
    Poisson {
        /// Grid size (n-by-n cells).
        #[arg(long)]
        n: usize,
        /// Polynomial degree of the continuous space.
        #[arg(long)]
        degree: usize,
        /// Which derivative to filter.
        #[arg(long, value_enum, default_value_t = FilterDeriv::Dx)]
        filter_derivative: FilterDeriv,
    },
    /// Adaptive corner study; writes the study CSV and a final-mesh VTK.
    Corner {
        /// Non-increasing adaptivity tolerances.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        tolerances: Vec<f64>,
        /// Stop refining once the mesh reaches this many vertices.
        #[arg(long, default_value_t = 5000)]
        max_vertices: usize,
    },
    /// Report element quality of a mesh file.
    MeshQuality {
        /// Mesh file (`V T B` header format).
        #[arg(long)]
        mesh: PathBuf,
    },
    /// Convergence studies; writes one CSV per run.
    Study {
        #[arg(long, value_enum)]
        case: StudyCase,
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Number of uniform refinement levels (mesh sizes 4, 8, ...).
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FilterDeriv {
    Dx,
    Dy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StudyCase {
    L2Rates,
    H1Rates,
    Hypothesis,
    TheoremRatio,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Cg,
    Dg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(1);
    }
    set_threads(cli.threads);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// C-style `%.6e` formatting (two-digit signed exponent).
fn fmt_e6(x: f64) -> String {
    let s = format!("{x:.6e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
        }
        None => s,
    }
}

/// Best rational p/q with q <= max_den, by continued fractions; None if
/// no denominator that small matches to the tolerance.
fn rational_of(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let sign: i64 = if x < 0.0 { -1 } else { 1 };
    let target = x.abs();
    let mut v = target;
    let (mut h0, mut h1): (u64, u64) = (0, 1);
    let (mut k0, mut k1): (u64, u64) = (1, 0);
    for _ in 0..40 {
        let a = v.floor();
        if a > u32::MAX as f64 {
            return None;
        }
        let au = a as u64;
        let h2 = au.checked_mul(h1)?.checked_add(h0)?;
        let k2 = au.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (h1 as f64 / k1 as f64 - target).abs() <= tol {
            return Some((sign * h1 as i64, k1));
        }
        let frac = v - a;
        if frac < 1e-14 {
            return None;
        }
        v = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Common denominator <= 10^6 for all entries, when one exists.
fn common_denominator(values: &[f64]) -> Option<u64> {
    let mut den: u64 = 1;
    for &v in values {
        let (_, q) = rational_of(v, 1_000_000, 1e-11 * v.abs().max(1.0))?;
        den = den / gcd(den, q) * q;
        if den > 1_000_000 {
            return None;
        }
    }
    for &v in values {
        let scaled = v * den as f64;
        if (scaled - scaled.round()).abs() > 1e-6 {
            return None;
        }
    }
    Some(den)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Savgol {
            window,
            degree,
            deriv,
            offset,
            series,
        } => run_savgol(*window, *degree, *deriv, *offset, series.as_deref()),
        Command::Poisson {
            n,
            degree,
            filter_derivative,
        } => run_poisson(cli, *n, *degree, *filter_derivative),
        Command::Corner {
            tolerances,
            max_vertices,
        } => run_corner(cli, tolerances, *max_vertices),
        Command::MeshQuality { mesh } => run_mesh_quality(mesh),
        Command::Study {
            case,
            degree,
            family,
            levels,
        } => run_study(cli, *case, *degree, *family, *levels),
    }
}

fn run_savgol(
    window: usize,
    degree: usize,
    deriv: usize,
    offset: Option<usize>,
    series: Option<&[f64]>,
) -> Result<()> {
    let mut w = SGWindow::new(window, degree)?.with_derivative(deriv)?;
    if let Some(off) = offset {
        w = w.with_offset(off)?;
    }
    let c = kernel(&w)?;
    let decimals: Vec<String> = c.iter().map(|v| format!("{v:.15}")).collect();
    println!("{}", decimals.join(" "));
    if let Some(den) = common_denominator(&c) {
        let fractions: Vec<String> = c
            .iter()
            .map(|v| format!("{}/{den}", (v * den as f64).round() as i64))
            .collect();
        println!("{}", fractions.join(" "));
    }
    if let Some(series) = series {
        let out = savgol_apply(&w, series)?;
        let line: Vec<String> = out.iter().map(|v| format!("{v:.15}")).collect();
        println!("{}", line.join(" "));
    }
    Ok(())
}

fn run_poisson(cli: &Cli, n: usize, degree: usize, which: FilterDeriv) -> Result<()> {
    if n < 2 || degree < 1 {
        return Err(Error::InvalidArgument(
            "poisson demo needs --n >= 2 and --degree >= 1".into(),
        ));
    }
    let solver_tol = cli.solver_tol.unwrap_or(1e-12);
    let quad = cli.quad_degree.unwrap_or(2 * degree + 4);
    let u_h = poisson::solve_demo(n, degree, solver_tol)?;
    let exact = poisson::exact_solution();
    let report = h1_error(&u_h, &exact, quad)?;

    let (deriv, exact_deriv) = match which {
        FilterDeriv::Dx => (Deriv::Dx, poisson::exact_x_derivative()),
        FilterDeriv::Dy => (Deriv::Dy, poisson::exact_y_derivative()),
    };
    let filtered = poisson::filtered_derivative(&u_h, deriv)?;
    let filtered_err = l2_error(&filtered, &exact_deriv, quad)?;
    let raw_jump = max_interior_edge_jump(&u_h, deriv, 3);
    let filtered_jump = max_interior_edge_jump(&filtered, Deriv::Value, 3);

    println!("dofs: {}", u_h.space().n_dofs());
    println!("l2_error: {}", fmt_e6(report.l2_error));
    println!("h1_error: {}", fmt_e6(report.h1_error));
    println!("filtered_derivative_l2_error: {}", fmt_e6(filtered_err));
    println!("raw_derivative_max_jump: {}", fmt_e6(raw_jump));
    println!("filtered_derivative_max_jump: {}", fmt_e6(filtered_jump));

    std::fs::create_dir_all(&cli.outdir)?;
    let mesh = u_h.space().mesh();
    let u_vals = vtk::vertex_values(&u_h);
    vtk::write_vertex_grid(&cli.outdir.join("poisson_u.vtk"), mesh, &[("u", &u_vals)])?;
    let raw_vals = vtk::corner_values(&u_h, deriv);
    vtk::write_corner_grid(
        &cli.outdir.join("poisson_du_raw.vtk"),
        mesh,
        &[("du_raw", &raw_vals)],
    )?;
    let filt_vals = vtk::vertex_values(&filtered);
    vtk::write_vertex_grid(
        &cli.outdir.join("poisson_du_filtered.vtk"),
        mesh,
        &[("du_filtered", &filt_vals)],
    )?;
    Ok(())
}

fn run_corner(cli: &Cli, tolerances: &[f64], max_vertices: usize) -> Result<()> {
    let outcome = corner::adaptive_study(tolerances, max_vertices)?;
    let mut csv = String::from("N,tolerance,sisg_error,h1_error,epsilon\n");
    for r in &outcome.records {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n_vertices,
            fmt_e6(r.tolerance),
            fmt_e6(r.sisg_error),
            fmt_e6(r.h1_error),
            fmt_e6(r.epsilon)
        ));
        if !r.converged {
            eprintln!(
                "warning: tolerance {} stopped at the {}-vertex cap before convergence",
                fmt_e6(r.tolerance),
                max_vertices
            );
        }
        println!(
            "N {:>8}  tolerance {}  sisg_error {}  h1_error {}  epsilon {}",
            r.n_vertices,
            fmt_e6(r.tolerance),
            fmt_e6(r.sisg_error),
            fmt_e6(r.h1_error),
            fmt_e6(r.epsilon)
        );
    }
    std::fs::create_dir_all(&cli.outdir)?;
    std::fs::write(cli.outdir.join("corner_study.csv"), csv)?;

    let u_vals = vtk::vertex_values(&outcome.final_solution);
    let f_vals = vtk::vertex_values(&outcome.final_filtered);
    vtk::write_vertex_grid(
        &cli.outdir.join("corner_final.vtk"),
        &outcome.final_mesh,
        &[("u", &u_vals), ("filtered_du", &f_vals)],
    )?;
    Ok(())
}

fn run_mesh_quality(path: &Path) -> Result<()> {
    let mesh = Mesh::read_file(path)?;
    let q = mesh.quality_report()?;
    println!("vertices: {}", mesh.n_vertices());
    println!("elements: {}", mesh.n_triangles());
    println!("h_max: {:.6}", q.h_max());
    println!("h_min: {:.6}", q.h_min());
    println!("gamma: {:.6}", q.gamma);
    println!("quasi_uniform_ratio: {:.6}", q.quasi_uniform_ratio);
    Ok(())
}

fn run_study(
    cli: &Cli,
    case: StudyCase,
    degree: usize,
    family: FamilyArg,
    levels: usize,
) -> Result<()> {
    if !(1..=6).contains(&levels) {
        return Err(Error::InvalidArgument(
            "--levels must be between 1 and 6".into(),
        ));
    }
    let fam = match family {
        FamilyArg::Cg => Family::Cg,
        FamilyArg::Dg => Family::Dg,
    };
    if fam == Family::Cg && degree == 0 {
        return Err(Error::InvalidArgument(
            "continuous spaces need --degree >= 1".into(),
        ));
    }
    if degree > 4 {
        return Err(Error::InvalidArgument("--degree must be at most 4".into()));
    }
    match case {
        StudyCase::H1Rates if fam != Family::Cg => {
            return Err(Error::InvalidArgument(
                "h1-rates needs a continuous target (--family cg)".into(),
            ));
        }
        StudyCase::Hypothesis | StudyCase::TheoremRatio if degree > 2 => {
            return Err(Error::InvalidArgument(
                "hypothesis and theorem-ratio studies support --degree <= 2".into(),
            ));
        }
        _ => {}
    }

    let pi = std::f64::consts::PI;
    let u = ScalarField::with_gradient(
        move |x, y| (pi * x).sin() * (pi * y).cos(),
        move |x, y| {
            (
                pi * (pi * x).cos() * (pi * y).cos(),
                -pi * (pi * x).sin() * (pi * y).sin(),
            )
        },
    );
    let quad = cli.quad_degree.unwrap_or(2 * degree + 4);
    let solver_tol = cli.solver_tol.unwrap_or(1e-12);
    let t = match fam {
        Family::Cg => 1,
        Family::Dg => 0,
    };

    let fam_name = match family {
        FamilyArg::Cg => "cg",
        FamilyArg::Dg => "dg",
    };
    let case_name = match case {
        StudyCase::L2Rates => "l2_rates",
        StudyCase::H1Rates => "h1_rates",
        StudyCase::Hypothesis => "hypothesis",
        StudyCase::TheoremRatio => "theorem_ratio",
    };

    let mut csv = match case {
        StudyCase::L2Rates | StudyCase::H1Rates => "level,n,dofs,error,order\n".to_string(),
        StudyCase::Hypothesis | StudyCase::TheoremRatio => "level,n,dofs,ratio\n".to_string(),
    };
    let mut previous: Option<f64> = None;
    for level in 0..levels {
        let n = 4usize << level;
        let mesh = Arc::new(Mesh::build_structured(
            n,
            n,
            (0.0, 0.0, 1.0, 1.0),
            sisg::mesh::Diagonal::Right,
        )?);
        let space = FunctionSpace::new(mesh, fam, degree)?;
        let line = match case {
            StudyCase::L2Rates | StudyCase::H1Rates => {
                let mut problem = ProjectionProblem::new(Arc::clone(&space), Source::Field(&u));
                problem.solver_tol = solver_tol;
                let p = project(&problem)?;
                let err = match case {
                    StudyCase::L2Rates => l2_error(&p, &u, quad)?,
                    _ => h1_error(&p, &u, quad)?.h1_seminorm_error,
                };
                let order = previous
                    .map(|prev| format!("{:.3}", (prev / err).log2()))
                    .unwrap_or_default();
                previous = Some(err);
                format!(
                    "{},{},{},{},{}\n",
                    level,
                    n,
                    space.n_dofs(),
                    fmt_e6(err),
                    order
                )
            }
            StudyCase::Hypothesis => {
                let f = space.interpolate(&u)?;
                let ratio = broken_estimate_ratio(&u, &f, degree, t)?;
                format!("{},{},{},{}\n", level, n, space.n_dofs(), fmt_e6(ratio))
            }
            StudyCase::TheoremRatio => {
                let mut problem = ProjectionProblem::new(Arc::clone(&space), Source::Field(&u));
                problem.solver_tol = solver_tol;
                let p = project(&problem)?;
                let ratio = broken_estimate_ratio(&u, &p, degree, t)?;
                format!("{},{},{},{}\n", level, n, space.n_dofs(), fmt_e6(ratio))
            }
        };
        print!("{line}");
        csv.push_str(&line);
    }
    std::fs::create_dir_all(&cli.outdir)?;
    let name = format!("study_{case_name}_{fam_name}{degree}.csv");
    std::fs::write(cli.outdir.join(name), csv)?;
    Ok(())
}
