//! `gdirac`: batch interface to the graph Dirac toolkit.
//!
//! Exit status: 0 success, 1 usage, 2 validation (input, preconditions),
//! 3 numeric failure or failed certification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gdirac_core::conditions::{check_selfadjoint, matrix_to_json, trace_dimension};
use gdirac_core::form::{beta_constant, interpolation_norm, power_norm, spectral_surrogate};
use gdirac_core::graph::{vertex_residuals, GraphDocument, MetricGraph, PhysicalParams};
use gdirac_core::model::{builtin_document, builtin_model, model_f, realize};
use gdirac_core::oracle::{dense_eigensystem, discretize, eigs_window, symmetry_residual};
use gdirac_core::spectral::{spectral_report, terminal_pair_candidates, threshold_modes};
use gdirac_core::weyl::secular;
use gdirac_core::{Complex64, Conditions, Error};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Largest operator handled by the dense `form-norm` decomposition.
const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "gdirac", version, about = "Dirac operators on metric graphs")]
pub struct RunConfig {
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Function {
    /// `f` for the builtin model document, `secular` otherwise.
    Auto,
    /// det(B M(z) - A) with the graph's condition matrices.
    Secular,
    /// The closed form f(z) of the builtin model.
    F,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Self-adjointness checks: A B* - B A*, rank [A | B], discrete symmetry.
    Check {
        graph: PathBuf,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "L")]
        halfline_length: Option<f64>,
    },
    /// Secular function on a line z = x + i zim, as CSV.
    Secular {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        zmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        zmax: f64,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        zim: f64,
        #[arg(long, value_enum, default_value_t = Function::Auto)]
        function: Function,
    },
    /// Spectral report as JSON.
    Report {
        graph: PathBuf,
        #[arg(long, default_value_t = 5)]
        jmax: usize,
    },
    /// Discrete-oracle eigenvalues in a window, as CSV.
    Eigs {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        min: f64,
        #[arg(long, allow_hyphen_values = true)]
        max: f64,
        #[arg(long, default_value_t = 1.0 / 400.0)]
        h: f64,
        #[arg(long = "L")]
        halfline_length: Option<f64>,
    },
    /// Threshold eigenfunctions and the terminal-pair candidates, as JSON.
    Thresholds { graph: PathBuf },
    /// Interpolation norm against the fractional power norm of 1 + H^2.
    FormNorm {
        graph: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "L")]
        halfline_length: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The builtin 3-star model: graph document and condition matrices.
    ModelStar,
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let text = e.to_string();
        match e {
            Error::Pole { .. }
            | Error::BranchPoint { .. }
            | Error::KernelEmpty { .. }
            | Error::ContourCrossesCut
            | Error::ContourTouchesPole
            | Error::EigenvalueLost { .. }
            | Error::MissingDecomposition => Failure::Numeric(text),
            _ => Failure::Validation(text),
        }
    }
}

type Outcome = Result<Vec<u8>, Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&config) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Validation(m) => eprintln!("gdirac: invalid input: {m}"),
                Failure::Numeric(m) => eprintln!("gdirac: numeric failure: {m}"),
            }
            f.code()
        }
    }
}

fn execute(config: &RunConfig) -> Result<(), Failure> {
    let threads = std::env::var("GDIRAC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Validation(e.to_string()))?;
    let (bytes, certified) = pool.install(|| dispatch(&config.command))?;
    emit(config.out.as_deref(), &bytes)?;
    if let Some(reason) = certified {
        return Err(Failure::Numeric(reason));
    }
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Validation(e.to_string());
    match out {
        None => std::io::stdout().write_all(bytes).map_err(io),
        Some(path) => {
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(bytes).map_err(io)?;
            tmp.persist(path).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<(GraphDocument, MetricGraph<f64>, PhysicalParams<f64>, Conditions), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let doc = GraphDocument::from_json(&text)?;
    let (g, p, cm) = realize(&doc)?;
    Ok((doc, g, p, cm))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s.into_bytes()
}

fn default_length(p: &PhysicalParams<f64>, g: &MetricGraph<f64>, given: Option<f64>) -> Option<f64> {
    if g.is_compact() {
        None
    } else {
        Some(given.unwrap_or(12.0 * p.light_speed / p.threshold()))
    }
}

/// Result bytes and, when a certification failed, the reason.
fn dispatch(cmd: &Command) -> Result<(Vec<u8>, Option<String>), Failure> {
    match cmd {
        Command::Check { graph, h, halfline_length } => check(graph, *h, *halfline_length),
        Command::Secular { graph, zmin, zmax, samples, zim, function } => {
            secular_scan(graph, *zmin, *zmax, *samples, *zim, *function).map(|b| (b, None))
        }
        Command::Report { graph, jmax } => {
            let (_, g, p, cm) = load(graph)?;
            let report = spectral_report(&g, &cm, &p, *jmax)?;
            Ok((json_bytes(&report.to_json(&g)), None))
        }
        Command::Eigs { graph, min, max, h, halfline_length } => eigs(graph, *min, *max, *h, *halfline_length).map(|b| (b, None)),
        Command::Thresholds { graph } => thresholds(graph),
        Command::FormNorm { graph, theta, h, halfline_length, seed } => {
            form_norm(graph, *theta, *h, *halfline_length, *seed).map(|b| (b, None))
        }
        Command::ModelStar => {
            let (g, _, cm) = builtin_model::<f64>();
            let doc = serde_json::to_value(builtin_document()).expect("documents serialize");
            let v = json!({
                "graph": doc,
                "trace_dimension": trace_dimension(&g),
                "a": matrix_to_json(&cm.a),
                "b": matrix_to_json(&cm.b),
            });
            Ok((json_bytes(&v), None))
        }
    }
}

fn check(path: &Path, h: Option<f64>, l: Option<f64>) -> Result<(Vec<u8>, Option<String>), Failure> {
    let (_, g, p, cm) = load(path)?;
    let sa = check_selfadjoint(&cm)?;
    let h = h.unwrap_or_else(|| g.min_segment_length().unwrap_or(1.0) / 16.0);
    let op = discretize(&g, &p, h, default_length(&p, &g, l))?;
    let herm = op.hermiticity_residual();
    let sym = symmetry_residual(&op);
    let v = json!({
        "ab_residual": sa.hermitian_residual,
        "hermitian_compat": sa.hermitian_compat,
        "rank": sa.rank,
        "rank_full": sa.rank_full,
        "trace_dimension": cm.dimension(),
        "h": h,
        "operator_hermiticity": herm,
        "symmetry_residual": sym,
    });
    let ok = sa.hermitian_compat && sa.rank_full && herm <= 1e-13 && sym <= 1e-12;
    Ok((json_bytes(&v), (!ok).then(|| "self-adjointness checks failed".to_string())))
}

fn secular_scan(path: &Path, zmin: f64, zmax: f64, samples: usize, zim: f64, function: Function) -> Outcome {
    use rayon::prelude::*;
    if !(zmin < zmax) || samples < 2 || !zim.is_finite() {
        return Err(Failure::Validation("need zmin < zmax and at least 2 samples".into()));
    }
    let (doc, g, p, cm) = load(path)?;
    let is_model = doc.model.map(|m| (m.a, m.b)) == Some((0.0, 1.0));
    let function = match function {
        Function::Auto if is_model => Function::F,
        Function::Auto => Function::Secular,
        other => other,
    };
    if function == Function::F && !is_model {
        return Err(Failure::Validation("f(z) is defined for the builtin model with a = 0, b = 1 only".into()));
    }
    let rows: Vec<(Complex64, Option<Complex64>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = zmin + (zmax - zmin) * i as f64 / (samples - 1) as f64;
            let z = Complex64::new(x, zim);
            let value = match function {
                Function::Secular => secular(&g, &cm, z, &p),
                Function::F | Function::Auto => model_f(z),
            };
            match value {
                Ok(s) => Ok((z, Some(s))),
                Err(Error::Pole { .. }) | Err(Error::BranchPoint { .. }) => Ok((z, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, Error>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::Numeric(e.to_string());
    w.write_record(["z_re", "z_im", "s_re", "s_im", "s_abs", "pole_flag"]).map_err(csv_err)?;
    for (z, s) in rows {
        let rec = match s {
            Some(s) => [num(z.re), num(z.im), num(s.re), num(s.im), num(s.norm()), "0".into()],
            None => [num(z.re), num(z.im), "nan".into(), "nan".into(), "nan".into(), "1".into()],
        };
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Failure::Numeric(e.to_string()))
}

fn eigs(path: &Path, min: f64, max: f64, h: f64, l: Option<f64>) -> Outcome {
    if !(min < max) {
        return Err(Failure::Validation("need min < max".into()));
    }
    let (_, g, p, _) = load(path)?;
    let op = discretize(&g, &p, h, default_length(&p, &g, l))?;
    let sys = eigs_window(&op, min, max);
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::Numeric(e.to_string());
    w.write_record(["index", "lambda"]).map_err(csv_err)?;
    for (i, x) in sys.eigenvalues.iter().enumerate() {
        w.write_record([i.to_string(), num(*x)]).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Failure::Numeric(e.to_string()))
}

fn thresholds(path: &Path) -> Result<(Vec<u8>, Option<String>), Failure> {
    let (_, g, p, cm) = load(path)?;
    let ids = |support: &[usize]| support.iter().map(|&e| g.edge(e).id.clone()).collect::<Vec<_>>();
    let worst = |psi: &gdirac_core::Spinor| vertex_residuals(&g, psi).iter().map(|r| r.max_abs()).fold(0.0, f64::max);
    let modes = threshold_modes(&g, &cm, &p)?;
    let mut bad = false;
    let kernel: Vec<Value> = modes
        .iter()
        .map(|m| {
            let r = worst(&m.spinor);
            bad |= r > 1e-10;
            json!({"lambda": m.lambda, "edges": ids(&m.support), "vertex_residual": r})
        })
        .collect();
    let candidates: Vec<Value> = terminal_pair_candidates(&g, &p)
        .iter()
        .map(|m| {
            let r = worst(&m.spinor);
            json!({"lambda": m.lambda, "edges": ids(&m.support), "vertex_residual": r, "admissible": r <= 1e-12})
        })
        .collect();
    let v = json!({"modes": kernel, "terminal_pair_candidates": candidates});
    Ok((json_bytes(&v), bad.then(|| "threshold mode violates the vertex conditions".to_string())))
}

fn form_norm(path: &Path, theta: f64, h: Option<f64>, l: Option<f64>, seed: u64) -> Outcome {
    let (_, g, p, _) = load(path)?;
    let h = h.unwrap_or_else(|| g.min_segment_length().unwrap_or(1.0) / 16.0);
    let op = discretize(&g, &p, h, default_length(&p, &g, l))?;
    if op.dimension() > DENSE_LIMIT {
        return Err(Failure::Validation(format!(
            "operator dimension {} exceeds {DENSE_LIMIT}; use a coarser h or shorter L",
            op.dimension()
        )));
    }
    let sys = dense_eigensystem(&op);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = DVector::from_fn(op.dimension(), |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let y = y.unscale(y.norm());
    let (s, coeffs) = spectral_surrogate(&sys, &y)?;
    let interp = interpolation_norm(&s, &coeffs, theta)?;
    let power = power_norm(&s, &coeffs, theta)?;
    let v = json!({
        "theta": theta,
        "interpolation_norm": interp,
        "power_norm": power,
        "ratio": interp / power,
        "expected_ratio": beta_constant(theta),
        "dimension": op.dimension(),
        "h": h,
    });
    Ok(json_bytes(&v))
}
