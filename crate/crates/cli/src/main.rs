//! Benchmark CLI: problem generation, compatible-matrix precomputation, and
//! single- or multi-method experiment runs.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver/runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use kacz::experiment::{self, MethodKind, ProblemKind, RunConfig, StartVector};
use kacz::linalg::{row_norms_squared, Vector};
use kacz::problems::ScanGeometry;
use kacz::tanabe;
use kacz::{mm, Error};

#[derive(Parser)]
#[command(name = "kacz", version, about = "Row-action solver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Problem: `tanabe`, `tomo`, or `file:DIR` (DIR holds A.mtx, b.mtx)
    #[arg(long, default_value = "tanabe")]
    problem: String,

    /// Tomography: number of projection angles
    #[arg(long, default_value_t = 12)]
    angles: usize,

    /// Tomography: parallel rays per angle
    #[arg(long, default_value_t = 17)]
    rays: usize,

    /// Tomography: image is GRID x GRID pixels
    #[arg(long, default_value_t = 16)]
    grid: usize,

    /// Tomography: detector span in pixel units (default sqrt(2) * grid)
    #[arg(long)]
    span: Option<f64>,

    /// Tomography: spread the angles over a full circle instead of [0, 180)
    #[arg(long, default_value_t = false)]
    full_circle: bool,
}

impl ProblemArgs {
    fn kind(&self) -> Result<ProblemKind, Error> {
        match self.problem.as_str() {
            "tanabe" => Ok(ProblemKind::Tanabe),
            "tomo" => {
                let mut g = ScanGeometry::new(self.angles, self.rays, self.grid)
                    .with_full_circle(self.full_circle);
                if let Some(span) = self.span {
                    g = g.with_span(span);
                }
                Ok(ProblemKind::Tomo(g))
            }
            other => {
                if let Some(dir) = other.strip_prefix("file:") {
                    Ok(ProblemKind::File(PathBuf::from(dir)))
                } else {
                    Err(Error::Config(format!(
                        "unknown problem '{other}' (expected tanabe, tomo, or file:DIR)"
                    )))
                }
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the problem matrices (A.mtx, b.mtx, x_star.mtx, phantom.pgm)
    Gen {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precompute and store the compatible matrices and gains
    /// (c.mtx, chat.mtx, cbar.mtx, gain_kt.mtx, gain_skt.mtx)
    Precompute {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one method and write errors.csv, solution.mtx (and recon.pgm)
    Run {
        #[command(flatten)]
        problem: ProblemArgs,
        /// kaczmarz, sym-kaczmarz, kt, skt, kt2, landweber, cimmino, cav,
        /// drop, sart, or cgmn
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 50)]
        iters: usize,
        /// `zeros`, `file:PATH`, or a comma-separated literal
        #[arg(long, default_value = "zeros")]
        x0: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several methods and write one <method>.csv per method
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated method list, or `all`
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, default_value_t = 50)]
        iters: usize,
        #[arg(long, default_value = "zeros")]
        x0: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_methods(spec: &str) -> Result<Vec<MethodKind>, Error> {
    if spec == "all" {
        return Ok(MethodKind::all().to_vec());
    }
    spec.split(',')
        .map(|tok| MethodKind::from_str(tok.trim()))
        .collect()
}

fn cmd_gen(problem: &ProblemArgs, out: &Path) -> Result<(), Error> {
    let kind = problem.kind()?;
    let p = experiment::load_problem(&kind)?;
    std::fs::create_dir_all(out)?;
    mm::write_matrix_file(out.join("A.mtx"), &p.a)?;
    mm::write_vector_file(out.join("b.mtx"), &p.b)?;
    if let Some(xs) = &p.x_star {
        mm::write_vector_file(out.join("x_star.mtx"), xs)?;
    }
    if let ProblemKind::Tomo(g) = &kind {
        let phantom = kacz::problems::head_phantom(g.grid);
        experiment::render_pgm(phantom.pixels.as_slice(), g.grid, out.join("phantom.pgm"))?;
    }
    println!("wrote {} ({})", out.display(), p.label);
    Ok(())
}

fn cmd_precompute(problem: &ProblemArgs, out: &Path) -> Result<(), Error> {
    let kind = problem.kind()?;
    let loaded = experiment::load_problem(&kind)?;
    let (p, dropped) = experiment::purge_zero_rows(loaded);
    std::fs::create_dir_all(out)?;

    let c = tanabe::build_c(&p.a)?;
    let chat = tanabe::build_c_hat(&p.a)?;
    let norms2 = row_norms_squared(&p.a);
    let m_diag = Vector::from_vec(norms2.iter().map(|v| 1.0 / v).collect());
    let cbar = tanabe::compose_c_bar(&c, &chat, &p.a, &m_diag);
    mm::write_matrix_file(out.join("c.mtx"), &c)?;
    mm::write_matrix_file(out.join("chat.mtx"), &chat)?;
    mm::write_matrix_file(out.join("cbar.mtx"), &cbar)?;

    let kt = tanabe::PrecomputedIteration::from_compatible(&p.a, &c)?;
    let skt = tanabe::PrecomputedIteration::from_compatible(&p.a, &cbar)?;
    mm::write_matrix_file(out.join("gain_kt.mtx"), kt.gain())?;
    mm::write_matrix_file(out.join("gain_skt.mtx"), skt.gain())?;

    if dropped.is_empty() {
        println!("wrote {} ({})", out.display(), p.label);
    } else {
        println!(
            "wrote {} ({}; dropped {} zero rows before factoring)",
            out.display(),
            p.label,
            dropped.len()
        );
    }
    Ok(())
}

fn cmd_run(
    problem: &ProblemArgs,
    method: &str,
    iters: usize,
    x0: &str,
    seed: u64,
    out: &Path,
) -> Result<(), Error> {
    let cfg = RunConfig {
        problem: problem.kind()?,
        method: MethodKind::from_str(method)?,
        x0: StartVector::parse(x0)?,
        iters,
        seed,
        output_dir: out.to_path_buf(),
    };
    let records = experiment::run_experiment(&cfg)?;
    if let Some(last) = records.last() {
        println!(
            "{}: k={} err_xstar={:.6e} err_xdagger={:.6e} err_shifted={:.6e}",
            cfg.method.name(),
            last.k,
            last.err_xstar,
            last.err_xdagger,
            last.err_shifted
        );
    }
    println!("wrote {}", out.join("errors.csv").display());
    Ok(())
}

fn cmd_compare(
    problem: &ProblemArgs,
    methods: &str,
    iters: usize,
    x0: &str,
    out: &Path,
) -> Result<(), Error> {
    let kind = problem.kind()?;
    let methods = parse_methods(methods)?;
    let x0 = StartVector::parse(x0)?;
    let results = experiment::compare(&kind, &methods, &x0, iters, out)?;
    for (method, records) in &results {
        if let Some(last) = records.last() {
            println!("{:<13} err_xdagger={:.6e}", method.name(), last.err_xdagger);
        }
    }
    println!("wrote {} CSV files to {}", results.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Gen { problem, out } => cmd_gen(problem, out),
        Command::Precompute { problem, out } => cmd_precompute(problem, out),
        Command::Run {
            problem,
            method,
            iters,
            x0,
            seed,
            out,
        } => cmd_run(problem, method, *iters, x0, *seed, out),
        Command::Compare {
            problem,
            methods,
            iters,
            x0,
            out,
        } => cmd_compare(problem, methods, *iters, x0, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Config(_) | Error::Parse { .. })) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("solver error: {e}");
            ExitCode::from(2)
        }
    }
}
