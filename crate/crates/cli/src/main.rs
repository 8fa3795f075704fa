//! `hadamard`: command-line front end.
//!
//! Every verb writes one JSON document to stdout (or `--out`). Errors go to
//! stderr as a single JSON line `{"error": kind, "message": text}`.
//! Exit codes: 0 success, 1 domain/input error, 2 usage error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hadamard_core::constructions::{
    catalog_matrix, conference_double, fourier, gauss_circulant, gauss_sequence, hadamard4_family, CatalogId,
};
use hadamard_core::cyclic::{cyclic_residuals, is_biunimodular, x_to_z, CyclicCandidate};
use hadamard_core::equivalence::{dephase, equivalent_within};
use hadamard_core::io::{matrix_from_csv, matrix_from_json, matrix_to_csv};
use hadamard_core::matrix::{is_hadamard, is_unitary, kron, modulus_residual, unitarity_residual, ToleranceSpec};
use hadamard_core::moduli::{analyze, residuals};
use hadamard_core::phase_bounds::{big_to_json, multiplicity_upper_bound, phi_lower_bound};
use hadamard_core::solver::{grid, solve_hadamard_report, trace_family, trace_phase_order, Solution, SolveConfig, SolveReport};
use hadamard_core::unitary_param::{hadamard_seed, ParamPoint};
use hadamard_core::{CMatrix, Complex64};
use rand::SeedableRng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hadamard", version, about = "Complex Hadamard matrices: construct, verify, search")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the solver (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Input {
    /// Input file; stdin when absent. JSON, or `i,j,re,im` CSV.
    #[arg(long = "in")]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a matrix.
    Construct {
        #[command(subcommand)]
        what: Construct,
        #[arg(long, value_enum, default_value = "json", global = true)]
        format: Format,
    },
    /// Unitarity and flatness report for a matrix.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Dephased form: left phases, core, right phases.
    Dephase {
        #[command(flatten)]
        input: Input,
    },
    /// Search for an equivalence between two matrices (order ≤ 6).
    Equiv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Lower bound on the number of free phases at order N.
    Phi {
        n: u64,
        /// Also print the upper bound 2^{N(N−3)/2} on the number of solutions.
        #[arg(long)]
        upper: bool,
    },
    /// Standard-form seed matrix of a parameter point.
    Seed {
        /// Parameter point JSON; a random point is drawn when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Moduli residuals of a parameter point.
    Residuals {
        #[command(flatten)]
        input: Input,
        /// Also report Jacobian rank and family dimension (needs a solution).
        #[arg(long)]
        analyze: bool,
    },
    /// Random-restart search for Hadamard matrices of order n.
    Solve {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Follow a solution family along one free phase.
    Trace {
        /// A solution, or a solve report (see --solution).
        #[command(flatten)]
        input: Input,
        /// Which solution of a solve report.
        #[arg(long, default_value_t = 0)]
        solution: usize,
        /// Free phase to step; defaults to the one best aligned with the family.
        #[arg(long)]
        phase: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        to: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Cyclic n-roots and bi-unimodular sequences.
    Cyclic {
        #[command(subcommand)]
        what: Cyclic,
    },
    /// List the built-in matrices, or build one.
    Catalog {
        id: Option<String>,
        /// Comma-separated phases.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum Construct {
    Fourier {
        #[arg(long)]
        n: usize,
    },
    /// Circulant matrix of a Gauss sequence.
    Gauss {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        b: i64,
    },
    /// The one-parameter order-4 family.
    Family4 {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
    },
    /// A catalog matrix.
    Catalog {
        id: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
    },
    /// Kronecker product of two matrix files.
    Kron {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Order-2n Hadamard matrix from a conference matrix.
    Double {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Subcommand)]
enum Cyclic {
    /// Residuals of a candidate `{"z": [[re, im], ...]}`.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Gauss sequence, its z vector, and checks.
    Gauss {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        b: i64,
    },
}

/// Failure reported on stderr with exit code 1.
struct Failure {
    kind: &'static str,
    message: String,
}

impl From<hadamard_core::Error> for Failure {
    fn from(e: hadamard_core::Error) -> Self {
        Failure { kind: e.kind(), message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure { kind: "io", message: format!("{}: {e}", path.display()) }
}

fn format_failure(e: serde_json::Error) -> Failure {
    Failure { kind: "format", message: e.to_string() }
}

type Out = Result<String, Failure>;

fn read_source(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| io_failure(p, e)),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| io_failure(Path::new("<stdin>"), e))?;
            Ok(s)
        }
    }
}

fn parse_matrix(text: &str) -> Result<CMatrix, Failure> {
    let t = text.trim_start();
    if t.starts_with('{') {
        Ok(matrix_from_json(t)?)
    } else {
        Ok(matrix_from_csv(t)?)
    }
}

fn read_matrix(path: Option<&Path>) -> Result<CMatrix, Failure> {
    parse_matrix(&read_source(path)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: Option<&Path>) -> Result<T, Failure> {
    serde_json::from_str(&read_source(path)?).map_err(format_failure)
}

fn to_json<T: serde::Serialize>(v: &T) -> Out {
    serde_json::to_string(v).map_err(format_failure)
}

fn emit_matrix(m: &CMatrix, format: Format) -> Out {
    match format {
        Format::Json => to_json(m),
        Format::Csv => Ok(matrix_to_csv(m).trim_end().to_string()),
    }
}

fn tolerance(eps: f64) -> Result<ToleranceSpec, Failure> {
    Ok(ToleranceSpec::uniform(eps)?)
}

fn pairs(z: &[Complex64]) -> Value {
    Value::Array(z.iter().map(|w| json!([w.re, w.im])).collect())
}

fn construct(what: &Construct, format: Format) -> Out {
    let m = match what {
        Construct::Fourier { n } => {
            if *n == 0 {
                return Err(hadamard_core::Error::Domain("n must be at least 1".into()).into());
            }
            if *n > hadamard_core::matrix::MAX_ORDER {
                return Err(hadamard_core::Error::Size { order: *n, max: hadamard_core::matrix::MAX_ORDER }.into());
            }
            fourier(*n)
        }
        Construct::Gauss { n, a, b } => gauss_circulant(*n, *a, *b)?,
        Construct::Family4 { t } => hadamard4_family(*t),
        Construct::Catalog { id, params } => catalog_matrix(id, params)?,
        Construct::Kron { a, b } => kron(&read_matrix(Some(a))?, &read_matrix(Some(b))?)?,
        Construct::Double { input } => conference_double(&read_matrix(input.input.as_deref())?)?,
    };
    emit_matrix(&m, format)
}

fn verify(input: &Input, eps: f64) -> Out {
    let m = read_matrix(input.input.as_deref())?;
    m.ensure_square()?;
    let tol = tolerance(eps)?;
    to_json(&json!({
        "n": m.n(),
        "unitary": is_unitary(&m, &tol),
        "hadamard": is_hadamard(&m, &tol),
        "max_unitarity_residual": unitarity_residual(&m),
        "max_modulus_residual": modulus_residual(&m),
    }))
}

fn equiv(a: &Path, b: &Path, eps: f64) -> Out {
    tolerance(eps)?;
    let (ma, mb) = (read_matrix(Some(a))?, read_matrix(Some(b))?);
    let w = equivalent_within(&ma, &mb, eps)?;
    to_json(&json!({ "equivalent": w.is_some(), "transform": w }))
}

fn phi(n: u64, with_upper: bool) -> Out {
    let b = phi_lower_bound(n)?;
    let mut v = serde_json::to_value(&b).map_err(format_failure)?;
    if with_upper {
        v["multiplicity_upper_bound"] = big_to_json(&multiplicity_upper_bound(n));
    }
    to_json(&v)
}

fn seed(input: Option<&Path>, n: Option<usize>, rng_seed: u64, format: Format) -> Out {
    let point: ParamPoint = match (input, n) {
        (Some(p), None) => read_json(Some(p))?,
        (None, Some(n)) => {
            if n < 2 {
                return Err(hadamard_core::Error::Domain(format!("order must be at least 2, got {n}")).into());
            }
            ParamPoint::random(n, &mut rand_chacha::ChaCha20Rng::seed_from_u64(rng_seed))
        }
        _ => {
            return Err(Failure { kind: "usage", message: "give exactly one of --in and --n".into() });
        }
    };
    emit_matrix(&hadamard_seed(&point)?, format)
}

fn solve(n: usize, restarts: usize, rng_seed: u64, max_iter: usize, tol: f64) -> Out {
    let mut cfg = SolveConfig::new(n, rng_seed);
    cfg.max_restarts = restarts;
    cfg.max_iterations = max_iter;
    cfg.tol = tol;
    to_json(&solve_hadamard_report(&cfg)?)
}

/// Accepts a bare solution, a solve report, or a parameter point.
fn load_solution(text: &str, index: usize) -> Result<Solution, Failure> {
    let v: Value = serde_json::from_str(text).map_err(format_failure)?;
    if v.get("solutions").is_some() {
        let r: SolveReport = serde_json::from_value(v).map_err(format_failure)?;
        let count = r.solutions.len();
        return r.solutions.into_iter().nth(index).ok_or(Failure {
            kind: "domain",
            message: format!("solution index {index} out of range (report has {count})"),
        });
    }
    if v.get("point").is_some() {
        let s: Solution = serde_json::from_value(v).map_err(format_failure)?;
        // recompute rather than trust the file
        return Ok(Solution::at(s.point)?);
    }
    let p: ParamPoint = serde_json::from_value(v).map_err(format_failure)?;
    Ok(Solution::at(p)?)
}

fn trace(input: &Input, index: usize, phase: Option<usize>, from: f64, to: f64, step: f64) -> Out {
    let start = load_solution(&read_source(input.input.as_deref())?, index)?;
    let k = match phase {
        Some(k) => k,
        None => *trace_phase_order(&start)?
            .first()
            .ok_or_else(|| hadamard_core::Error::Domain("start solution is isolated (family_dim = 0)".into()))?,
    };
    let g = grid(from, to, step)?;
    to_json(&trace_family(&start, k, &g)?)
}

fn cyclic(what: &Cyclic) -> Out {
    match what {
        Cyclic::Check { input, tol } => {
            let c: CyclicCandidate = read_json(input.input.as_deref())?;
            let r = cyclic_residuals(&c);
            let max = r.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            to_json(&json!({ "n": c.len(), "residuals": pairs(&r), "max_abs": max, "is_root": max <= *tol }))
        }
        Cyclic::Gauss { n, a, b } => {
            let x = gauss_sequence(*n, *a, *b)?;
            let z = x_to_z(&x)?;
            let r = cyclic_residuals(&z);
            let max = r.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            to_json(&json!({
                "n": n,
                "x": pairs(&x),
                "z": pairs(z.z()),
                "biunimodular": is_biunimodular(&x, 1e-10),
                "max_cyclic_residual": max,
            }))
        }
    }
}

fn catalog(id: Option<&str>, params: &[f64]) -> Out {
    match id {
        None => {
            let list: Vec<Value> = CatalogId::ALL
                .iter()
                .map(|c| {
                    json!({
                        "id": c.as_str(),
                        "order": c.order(),
                        "params": c.param_count(),
                        "conference": c.is_conference(),
                    })
                })
                .collect();
            to_json(&list)
        }
        Some(id) => to_json(&catalog_matrix(id, params)?),
    }
}

fn run(cli: &Cli) -> Out {
    match &cli.cmd {
        Cmd::Construct { what, format } => construct(what, *format),
        Cmd::Verify { input, tol } => verify(input, *tol),
        Cmd::Dephase { input } => to_json(&dephase(&read_matrix(input.input.as_deref())?)?),
        Cmd::Equiv { a, b, tol } => equiv(a, b, *tol),
        Cmd::Phi { n, upper } => phi(*n, *upper),
        Cmd::Seed { input, n, seed: s, format } => seed(input.as_deref(), *n, *s, *format),
        Cmd::Residuals { input, analyze: full } => {
            let p: ParamPoint = read_json(input.input.as_deref())?;
            if *full {
                to_json(&analyze(&p)?)
            } else {
                to_json(&residuals(&p)?)
            }
        }
        Cmd::Solve { n, restarts, seed: s, max_iter, tol } => solve(*n, *restarts, *s, *max_iter, *tol),
        Cmd::Trace { input, solution, phase, from, to, step } => trace(input, *solution, *phase, *from, *to, *step),
        Cmd::Cyclic { what } => cyclic(what),
        Cmd::Catalog { id, params } => catalog(id.as_deref(), params),
    }
}

fn report(f: &Failure) {
    let line = json!({ "error": f.kind, "message": f.message });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            report(&Failure { kind: "usage", message: "--threads must be positive".into() });
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            report(&Failure { kind: "internal", message: e.to_string() });
            return ExitCode::from(1);
        }
    }
    let out = match run(&cli) {
        Ok(s) => s,
        Err(f) => {
            report(&f);
            return ExitCode::from(if f.kind == "usage" { 2 } else { 1 });
        }
    };
    let written = match &cli.out {
        Some(p) => fs::write(p, format!("{out}\n")).map_err(|e| io_failure(p, e)),
        None => {
            let mut stdout = io::stdout().lock();
            match writeln!(stdout, "{out}").and_then(|_| stdout.flush()) {
                // reader went away (e.g. `| head`); nothing left to report to
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| io_failure(Path::new("<stdout>"), e)),
            }
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f);
            ExitCode::from(1)
        }
    }
}
