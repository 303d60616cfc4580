//! `wgfem solve ...`: run a benchmark and write the convergence table.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::adaptivity::{amwg_loop_with, AdaptConfig, AdaptRecord};
use crate::mesh::{write_mesh_text, Mesh};
use crate::problems::{make_problem, BenchmarkId};
use crate::wg_space::SpaceOrder;

pub const CSV_HEADER: &str = "iter,dofs,eta,eta_c,eta_nc,osc,stab,energy_err,total_err,effectivity";

#[derive(Debug, Parser)]
#[command(name = "wgfem", version, about = "Adaptive weak Galerkin solver for 2D linear elasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a benchmark problem and write one CSV row per level.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// patch, square-smooth or lshape2d
    #[arg(long)]
    problem: BenchmarkId,
    /// Dörfler marking parameter
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Stop when η² drops below this
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Do not solve on meshes with more free DOFs than this
    #[arg(long, default_value_t = 50_000)]
    max_dofs: usize,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Polynomial order of the interior space
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Directory for mesh_<iter>.txt snapshots
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Refine every element instead of Dörfler marking
    #[arg(long)]
    uniform: bool,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.16e}"),
        None => "nan".to_string(),
    }
}

pub fn csv_row(r: &AdaptRecord) -> String {
    format!(
        "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
        r.iter,
        r.dofs,
        r.eta,
        r.eta_c,
        r.eta_nc,
        r.osc,
        r.stab,
        fmt_opt(r.energy_err),
        fmt_opt(r.total_err),
        fmt_opt(r.effectivity)
    )
}

fn write_snapshot(dir: &Path, iter: usize, mesh: &Mesh) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(dir.join(format!("mesh_{iter}.txt")))?);
    write_mesh_text(mesh, &mut w)?;
    w.flush()
}

/// Parses `argv` (program name first) and runs it. Returns the exit status:
/// 0 on success, 1 on a solver or I/O failure, 2 on bad arguments.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let Command::Solve(args) = cli.command;

    let usage = |msg: String| {
        eprintln!("error: {msg}\n\nFor more information, try '--help'.");
        2
    };
    let order = match SpaceOrder::new(args.k) {
        Ok(o) => o,
        Err(e) => return usage(e.to_string()),
    };
    let problem = match make_problem(args.problem, args.mu, args.lambda) {
        Ok(p) => p,
        Err(e) => return usage(e.to_string()),
    };
    let config = AdaptConfig {
        theta: args.theta,
        tol: args.tol,
        max_dofs: args.max_dofs,
        max_iters: args.max_iters,
        order,
        uniform: args.uniform,
    };
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }

    let file = match File::create(&args.out) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", args.out.display());
            return 1;
        }
    };
    if let Some(dir) = &args.mesh_out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return 1;
        }
    }
    let mut csv = BufWriter::new(file);
    let mut io_error: Option<std::io::Error> = None;
    if let Err(e) = writeln!(csv, "{CSV_HEADER}") {
        io_error = Some(e);
    }

    let result = amwg_loop_with(&problem, Mesh::build_initial(args.problem.domain()), &config, |level| {
        if io_error.is_some() {
            return;
        }
        let r = level.record;
        let written = writeln!(csv, "{}", csv_row(r)).and_then(|_| csv.flush());
        let written = match (&args.mesh_out, written) {
            (Some(dir), Ok(())) => write_snapshot(dir, r.iter, level.mesh),
            (_, w) => w,
        };
        if let Err(e) = written {
            io_error = Some(e);
            return;
        }
        println!(
            "iter {:>3}  dofs {:>7}  eta {:.4e}  energy_err {}",
            r.iter,
            r.dofs,
            r.eta,
            r.energy_err.map_or("-".to_string(), |e| format!("{e:.4e}"))
        );
    });
    let flushed = csv.flush();

    if let Err(e) = result {
        eprintln!("error: {e}");
        return 1;
    }
    if let Some(e) = io_error.or(flushed.err()) {
        eprintln!("error: writing output: {e}");
        return 1;
    }
    0
}
