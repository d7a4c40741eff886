//! Experiment runner: wires problems, solvers, and metrics together and emits
//! error-curve CSVs, Matrix Market artifacts, and PGM reconstructions.
//!
//! Per outer iteration the runner records the three errors
//! `||y_k - x*||`, `||y_k - x_dagger||`, and `||y_k - x_dagger - P_N(A) x0||`,
//! with `x_dagger` and the nullspace shift computed once per problem.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{min_norm_lsq_default, project_nullspace, DenseMatrix, Vector, DEFAULT_TOL};
use crate::mm;
use crate::problems::{self, ProblemInstance, ScanGeometry};
use crate::rowaction;
use crate::sirt::{self, SirtKind};
use crate::tanabe::PrecomputedIteration;

/// Errors of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub k: usize,
    /// `||y_k - x*||`
    pub err_xstar: f64,
    /// `||y_k - x_dagger||`
    pub err_xdagger: f64,
    /// `||y_k - x_dagger - P_N(A) x0||`
    pub err_shifted: f64,
}

#[derive(Debug, Clone)]
pub enum ProblemKind {
    Tanabe,
    Tomo(ScanGeometry),
    /// Directory holding `A.mtx`, `b.mtx`, and optionally `x_star.mtx`.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Kaczmarz,
    SymKaczmarz,
    Kt,
    Skt,
    /// Two-step Kaczmarz-Tanabe: one record per pair of kt iterations.
    Kt2,
    Landweber,
    Cimmino,
    Cav,
    Drop,
    Sart,
    Cgmn,
}

impl MethodKind {
    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Kaczmarz => "kaczmarz",
            MethodKind::SymKaczmarz => "sym-kaczmarz",
            MethodKind::Kt => "kt",
            MethodKind::Skt => "skt",
            MethodKind::Kt2 => "kt2",
            MethodKind::Landweber => "landweber",
            MethodKind::Cimmino => "cimmino",
            MethodKind::Cav => "cav",
            MethodKind::Drop => "drop",
            MethodKind::Sart => "sart",
            MethodKind::Cgmn => "cgmn",
        }
    }

    pub fn all() -> &'static [MethodKind] {
        &[
            MethodKind::Kaczmarz,
            MethodKind::SymKaczmarz,
            MethodKind::Kt,
            MethodKind::Skt,
            MethodKind::Kt2,
            MethodKind::Landweber,
            MethodKind::Cimmino,
            MethodKind::Cav,
            MethodKind::Drop,
            MethodKind::Sart,
            MethodKind::Cgmn,
        ]
    }
}

impl std::str::FromStr for MethodKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MethodKind::all()
            .iter()
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub enum StartVector {
    Zeros,
    Literal(Vec<f64>),
    File(PathBuf),
}

impl StartVector {
    /// `zeros`, `file:PATH`, or a comma-separated literal like `7,6,10,6`.
    pub fn parse(spec: &str) -> Result<Self> {
        if spec == "zeros" {
            return Ok(StartVector::Zeros);
        }
        if let Some(path) = spec.strip_prefix("file:") {
            return Ok(StartVector::File(PathBuf::from(path)));
        }
        let values: Result<Vec<f64>> = spec
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Config(format!("invalid start-vector entry '{tok}'")))
            })
            .collect();
        Ok(StartVector::Literal(values?))
    }

    pub fn resolve(&self, n: usize) -> Result<Vector> {
        let v = match self {
            StartVector::Zeros => Vector::zeros(n),
            StartVector::Literal(values) => {
                Vector::checked_from_vec(values.clone(), "start vector literal")?
            }
            StartVector::File(path) => mm::read_vector_file(path)?,
        };
        if v.len() != n {
            return Err(Error::Config(format!(
                "start vector has length {}, problem needs {n}",
                v.len()
            )));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub method: MethodKind,
    pub x0: StartVector,
    pub iters: usize,
    /// Reserved for randomized harnesses; the solvers themselves are
    /// deterministic and ignore it.
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// Solver trajectory with its recorded errors.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub x: Vector,
    pub k: usize,
    pub history: Vec<ErrorRecord>,
}

/// Loads a problem description into a concrete instance.
pub fn load_problem(kind: &ProblemKind) -> Result<ProblemInstance> {
    match kind {
        ProblemKind::Tanabe => Ok(problems::tanabe_problem()),
        ProblemKind::Tomo(g) => Ok(problems::tomo_problem(g)),
        ProblemKind::File(dir) => {
            let a = mm::read_matrix_file(dir.join("A.mtx"))?;
            let b = mm::read_vector_file(dir.join("b.mtx"))?;
            if b.len() != a.rows() {
                return Err(Error::Config(format!(
                    "A is {}x{} but b has length {}",
                    a.rows(),
                    a.cols(),
                    b.len()
                )));
            }
            let x_star_path = dir.join("x_star.mtx");
            let x_star = if x_star_path.exists() {
                Some(mm::read_vector_file(&x_star_path)?)
            } else {
                None
            };
            Ok(ProblemInstance {
                a,
                b,
                x_star,
                nullspace_basis: None,
                label: format!("file {}", dir.display()),
            })
        }
    }
}

/// Drops all-zero rows of `A` (and the matching entries of `b`) so the
/// row-action solvers' no-zero-row precondition holds. Dropped rows have
/// `b_i = 0` in consistent problems, so the solution set, `R(A^T)`, and
/// `x_dagger` are unchanged. Returns the dropped row indices.
pub fn purge_zero_rows(p: ProblemInstance) -> (ProblemInstance, Vec<usize>) {
    let zeros = problems::zero_rows(&p.a);
    if zeros.is_empty() {
        return (p, zeros);
    }
    let keep: Vec<usize> = (0..p.a.rows()).filter(|i| !zeros.contains(i)).collect();
    let mut data = Vec::with_capacity(keep.len() * p.a.cols());
    let mut b = Vec::with_capacity(keep.len());
    for &i in &keep {
        data.extend_from_slice(p.a.row(i));
        b.push(p.b[i]);
    }
    let a = DenseMatrix::from_vec(keep.len(), p.a.cols(), data).expect("shape is consistent");
    let label = format!("{} [purged {} zero rows]", p.label, zeros.len());
    (
        ProblemInstance {
            a,
            b: Vector::from_vec(b),
            x_star: p.x_star,
            nullspace_basis: p.nullspace_basis,
            label,
        },
        zeros,
    )
}

/// Frozen per-problem reference vectors for the three error norms.
#[derive(Debug, Clone)]
pub struct Metrics {
    pub x_star: Vector,
    pub x_dagger: Vector,
    /// `x_dagger + P_N(A) x0`
    pub shift: Vector,
}

/// Computes the metric context, reusing `x_dagger` from `<cache_dir>/xdagger.mtx`
/// when a compatible cache exists.
pub fn metrics_for(p: &ProblemInstance, x0: &Vector, cache_dir: Option<&Path>) -> Result<Metrics> {
    let cache = cache_dir.map(|d| d.join("xdagger.mtx"));
    let x_dagger = match &cache {
        Some(path) if path.exists() => {
            let cached = mm::read_vector_file(path)?;
            if cached.len() == p.a.cols() {
                cached
            } else {
                compute_xdagger(p, cache.as_deref())?
            }
        }
        _ => compute_xdagger(p, cache.as_deref())?,
    };
    let pn = project_nullspace(&p.a, x0, DEFAULT_TOL)?;
    let shift = x_dagger.add(&pn.projection);
    let x_star = p.x_star.clone().unwrap_or_else(|| x_dagger.clone());
    Ok(Metrics {
        x_star,
        x_dagger,
        shift,
    })
}

fn compute_xdagger(p: &ProblemInstance, cache: Option<&Path>) -> Result<Vector> {
    let sol = min_norm_lsq_default(&p.a, &p.b)?;
    if let Some(path) = cache {
        mm::write_vector_file(path, &sol.x)?;
    }
    Ok(sol.x)
}

impl Metrics {
    pub fn record(&self, k: usize, x: &Vector) -> ErrorRecord {
        ErrorRecord {
            k,
            err_xstar: x.sub(&self.x_star).norm(),
            err_xdagger: x.sub(&self.x_dagger).norm(),
            err_shifted: x.sub(&self.shift).norm(),
        }
    }
}

/// Runs one method for `iters` outer iterations, recording errors after each.
/// Method-specific precomputation happens once, before the loop.
pub fn run_method(
    p: &ProblemInstance,
    method: MethodKind,
    x0: &Vector,
    iters: usize,
    metrics: &Metrics,
) -> Result<IterationState> {
    if iters == 0 {
        return Err(Error::Config("iters must be at least 1".to_string()));
    }
    let a = &p.a;
    let b = &p.b;

    let mut history = Vec::with_capacity(iters);
    let mut x = x0.clone();

    match method {
        MethodKind::Kaczmarz => {
            for k in 1..=iters {
                x = rowaction::kaczmarz_sweep(a, b, &x)?;
                history.push(metrics.record(k, &x));
            }
        }
        MethodKind::SymKaczmarz => {
            for k in 1..=iters {
                x = rowaction::symmetric_sweep(a, b, &x)?;
                history.push(metrics.record(k, &x));
            }
        }
        MethodKind::Kt => {
            let pre = PrecomputedIteration::kaczmarz_tanabe(a)?;
            for k in 1..=iters {
                x = pre.step(a, b, &x);
                history.push(metrics.record(k, &x));
            }
        }
        MethodKind::Skt => {
            let pre = PrecomputedIteration::symmetric(a)?;
            for k in 1..=iters {
                x = pre.step(a, b, &x);
                history.push(metrics.record(k, &x));
            }
        }
        MethodKind::Kt2 => {
            let pre = PrecomputedIteration::kaczmarz_tanabe(a)?;
            for k in 1..=iters {
                x = pre.step(a, b, &x);
                x = pre.step(a, b, &x);
                history.push(metrics.record(k, &x));
            }
        }
        MethodKind::Landweber
        | MethodKind::Cimmino
        | MethodKind::Cav
        | MethodKind::Drop
        | MethodKind::Sart => {
            let kind = match method {
                MethodKind::Landweber => SirtKind::Landweber,
                MethodKind::Cimmino => SirtKind::Cimmino,
                MethodKind::Cav => SirtKind::Cav,
                MethodKind::Drop => SirtKind::Drop,
                _ => SirtKind::Sart,
            };
            let v = sirt::build_sirt(a, kind)?;
            for k in 1..=iters {
                x = v.step(a, b, &x);
                history.push(metrics.record(k, &x));
            }
        }
        MethodKind::Cgmn => {
            let outcome = sirt::cgmn_solve_observed(a, b, &x, iters, DEFAULT_TOL, |k, xk| {
                history.push(metrics.record(k, xk));
            })?;
            x = outcome.x;
            // CG may stop early on convergence or breakdown; hold the final
            // iterate for the remaining records so curves stay comparable
            let tail = metrics.record(0, &x);
            while history.len() < iters {
                let k = history.len() + 1;
                history.push(ErrorRecord { k, ..tail.clone() });
            }
        }
    }

    Ok(IterationState {
        x,
        k: iters,
        history,
    })
}

/// Runs one configured experiment and writes `errors.csv`, `solution.mtx`,
/// and (for tomography problems) `recon.pgm` into the output directory.
pub fn run_experiment(cfg: &RunConfig) -> Result<Vec<ErrorRecord>> {
    if cfg.iters == 0 {
        return Err(Error::Config("iters must be at least 1".to_string()));
    }
    let loaded = load_problem(&cfg.problem)?;
    let (p, _) = purge_zero_rows(loaded);
    let x0 = cfg.x0.resolve(p.a.cols())?;
    fs::create_dir_all(&cfg.output_dir)?;
    let metrics = metrics_for(&p, &x0, Some(&cfg.output_dir))?;
    let state = run_method(&p, cfg.method, &x0, cfg.iters, &metrics)?;

    write_csv(&state.history, cfg.output_dir.join("errors.csv"))?;
    mm::write_vector_file(cfg.output_dir.join("solution.mtx"), &state.x)?;
    if let ProblemKind::Tomo(g) = &cfg.problem {
        render_pgm(state.x.as_slice(), g.grid, cfg.output_dir.join("recon.pgm"))?;
    }
    Ok(state.history)
}

/// Runs several methods on one problem, writing `<out>/<method>.csv` for each.
/// Method runs are independent and execute concurrently under the `parallel`
/// feature; the shared problem and metrics are computed once.
pub fn compare(
    problem: &ProblemKind,
    methods: &[MethodKind],
    x0: &StartVector,
    iters: usize,
    output_dir: &Path,
) -> Result<Vec<(MethodKind, Vec<ErrorRecord>)>> {
    if iters == 0 {
        return Err(Error::Config("iters must be at least 1".to_string()));
    }
    let loaded = load_problem(problem)?;
    let (p, _) = purge_zero_rows(loaded);
    let x0 = x0.resolve(p.a.cols())?;
    fs::create_dir_all(output_dir)?;
    let metrics = metrics_for(&p, &x0, Some(output_dir))?;

    let run_one = |&method: &MethodKind| -> Result<(MethodKind, Vec<ErrorRecord>)> {
        let state = run_method(&p, method, &x0, iters, &metrics)?;
        Ok((method, state.history))
    };

    #[cfg(feature = "parallel")]
    let results: Result<Vec<_>> = {
        use rayon::prelude::*;
        methods.par_iter().map(run_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<_>> = methods.iter().map(run_one).collect();

    let results = results?;
    for (method, records) in &results {
        write_csv(records, output_dir.join(format!("{}.csv", method.name())))?;
    }
    Ok(results)
}

/// Writes records as CSV with 17 significant digits (round-trip exact).
pub fn write_csv<P: AsRef<Path>>(records: &[ErrorRecord], path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "k,err_xstar,err_xdagger,err_shifted")?;
    for r in records {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e}",
            r.k, r.err_xstar, r.err_xdagger, r.err_shifted
        )?;
    }
    Ok(())
}

/// Reads back a CSV produced by [`write_csv`].
pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Vec<ErrorRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            if line.trim() != "k,err_xstar,err_xdagger,err_shifted" {
                return Err(Error::Parse {
                    line: 1,
                    msg: "unexpected CSV header".to_string(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse = |tok: &str| -> Result<f64> {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("invalid number '{tok}'"),
            })
        };
        records.push(ErrorRecord {
            k: fields[0].parse::<usize>().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("invalid iteration index '{}'", fields[0]),
            })?,
            err_xstar: parse(fields[1])?,
            err_xdagger: parse(fields[2])?,
            err_shifted: parse(fields[3])?,
        });
    }
    Ok(records)
}

/// Writes a square image as binary 8-bit PGM (P5, maxval 255), row-major top
/// to bottom. Values map linearly from `[min, max]`; a constant image maps to
/// mid-gray 128.
pub fn render_pgm<P: AsRef<Path>>(pixels: &[f64], grid: usize, path: P) -> Result<()> {
    if pixels.len() != grid * grid {
        return Err(Error::ShapeMismatch {
            expected: format!("{} pixels ({grid}x{grid})", grid * grid),
            got: format!("{}", pixels.len()),
        });
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in pixels {
        min = min.min(v);
        max = max.max(v);
    }
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{grid} {grid}\n255\n")?;
    let mut bytes = Vec::with_capacity(pixels.len());
    let spread = max - min;
    if spread <= 0.0 || !spread.is_finite() {
        bytes.resize(pixels.len(), 128u8);
    } else {
        let scale = 255.0 / spread;
        for &v in pixels {
            let byte = ((v - min) * scale).round().clamp(0.0, 255.0) as u8;
            bytes.push(byte);
        }
    }
    w.write_all(&bytes)?;
    Ok(())
}
