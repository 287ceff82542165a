//! `hciz` — command-line laboratory for spherical (HCIZ-type) matrix
//! integrals.
//!
//! Subcommands: `measure`, `transform`, `exact`, `mc`, `bounds`,
//! `converge`, `dilute`. Inputs are JSON files (measures and spectra);
//! outputs are JSON objects or CSV tables. Every run echoes its fully
//! resolved configuration: JSON outputs carry a `config` field, CSV
//! outputs start with a `# config {…}` comment line. Errors print a
//! one-line JSON diagnostic to stderr and exit with code 2 (domain
//! errors) or 3 (insufficient-precision errors). The `HCIZ_THREADS`
//! environment variable caps the worker-thread count; results are
//! independent of it by the Monte Carlo reduction contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hciz::asymptotics::{
    convergence_study, dilute_rank_limit, sandwich_bounds, ConvergenceReport, Method, RankRule,
};
use hciz::exact::hciz_exact_auto;
use hciz::mc::{hciz_mc_estimate, McParams};
use hciz::measures::{sample_spectrum, SpectralMeasure, Spectrum};
use hciz::transforms::{f_beta, v_branch_detailed, BetaClass};
use hciz::{Error, Result};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "hciz",
    version,
    about = "Numerical laboratory for spherical (HCIZ-type) matrix integrals"
)]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a measure file; optionally emit a quantile-sampled spectrum.
    Measure(MeasureArgs),
    /// Tabulate the branch function v(t) and limit function f^(β)(t) over a t-grid.
    Transform(TransformArgs),
    /// Exact evaluation of log I_N(A, B) for β = 2.
    Exact(ExactArgs),
    /// Monte Carlo estimate of log I_N^(β)(A, B) for β ∈ {1, 2, 4}.
    Mc(McArgs),
    /// Two-sided sandwich bounds on log I from recursive rank-one peeling.
    Bounds(BoundsArgs),
    /// Dimension-ladder convergence study toward the small-rank limit.
    Converge(ConvergeArgs),
    /// Dilute extensive-rank study at fixed dimension.
    Dilute(DiluteArgs),
}

#[derive(Args)]
struct MeasureArgs {
    /// Measure description (JSON file).
    #[arg(long)]
    measure: PathBuf,
    /// Emit the n-point deterministic quantile spectrum instead of the
    /// canonical measure record.
    #[arg(long)]
    sample: Option<usize>,
    /// Seed recorded for reproducibility (quantile sampling is deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TransformArgs {
    /// Measure description (JSON file).
    #[arg(long)]
    measure: PathBuf,
    /// Symmetry class: 1, 2 or 4.
    #[arg(long, default_value_t = 2)]
    beta: u8,
    /// Evaluation grid, `lo:hi:step` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    t_grid: String,
}

#[derive(Args)]
struct ExactArgs {
    /// Spectrum of A (JSON file with a "values" array).
    #[arg(long, visible_alias = "a")]
    a_spectrum: PathBuf,
    /// Spectrum of B (JSON file with a "values" array).
    #[arg(long, visible_alias = "b")]
    b_spectrum: PathBuf,
    /// Working precision for confluent (repeated-eigenvalue) evaluation.
    #[arg(long, default_value_t = 256)]
    precision_bits: u32,
}

#[derive(Args)]
struct McArgs {
    /// Symmetry class: 1, 2 or 4.
    #[arg(long, default_value_t = 2)]
    beta: u8,
    /// Matrix dimension; must match both spectrum files.
    #[arg(long)]
    n: usize,
    /// Number of Haar samples.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent RNG streams; part of the reproducibility key.
    #[arg(long, default_value_t = 8)]
    chunks: u32,
    /// Spectrum of A (JSON file with a "values" array).
    #[arg(long, visible_alias = "a")]
    a_spectrum: PathBuf,
    /// Spectrum of B (JSON file with a "values" array).
    #[arg(long, visible_alias = "b")]
    b_spectrum: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    /// Spectrum of A (nonnegative; JSON file with a "values" array).
    #[arg(long, visible_alias = "a")]
    a_spectrum: PathBuf,
    /// Spectrum of B (JSON file with a "values" array).
    #[arg(long, visible_alias = "b")]
    b_spectrum: PathBuf,
    /// Symmetry class: 1, 2 or 4.
    #[arg(long, default_value_t = 2)]
    beta: u8,
    /// Factor evaluation: "exact" (β = 2 only) or "mc".
    #[arg(long, default_value = "exact")]
    method: String,
    #[arg(long, default_value_t = 256)]
    precision_bits: u32,
    /// Monte Carlo samples per factor (mc method).
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 8)]
    chunks: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Limiting measure μ for the B-spectra (JSON file).
    #[arg(long)]
    measure: PathBuf,
    /// Nonzero eigenvalue of the small-rank perturbation.
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// Rank schedule M(N): one | cbrt | sqrt | n-over-log-n.
    #[arg(long)]
    rank: String,
    /// Dimension ladder, comma-separated (e.g. 8,16,32,64).
    #[arg(long)]
    dims: String,
    /// Symmetry class: 1, 2 or 4.
    #[arg(long, default_value_t = 2)]
    beta: u8,
    /// Integral evaluation: "exact" (β = 2 only) or "mc".
    #[arg(long, default_value = "exact")]
    method: String,
    #[arg(long, default_value_t = 256)]
    precision_bits: u32,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 8)]
    chunks: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DiluteArgs {
    /// Measure ν for the nonzero A-eigenvalues (JSON file).
    #[arg(long)]
    nu: PathBuf,
    /// Limiting measure μ for the B-spectrum (JSON file).
    #[arg(long)]
    mu: PathBuf,
    /// Rank fractions in (0, 1], `lo:hi:step` or comma-separated.
    #[arg(long)]
    a_grid: String,
    /// Matrix dimension.
    #[arg(long)]
    n: usize,
    /// Symmetry class: 1, 2 or 4.
    #[arg(long, default_value_t = 2)]
    beta: u8,
    /// Integral evaluation: "exact" (β = 2 only) or "mc".
    #[arg(long, default_value = "exact")]
    method: String,
    #[arg(long, default_value_t = 256)]
    precision_bits: u32,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 8)]
    chunks: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let diag = json!({"error": "usage", "message": e.to_string()});
            eprintln!("{diag}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = init_thread_cap() {
        return fail(&e);
    }
    match run(&cli).and_then(|text| write_output(cli.output.as_deref(), &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

/// Print the one-line JSON diagnostic and pick the exit code.
fn fail(err: &Error) -> ExitCode {
    let diag = json!({"error": err.kind(), "message": err.to_string()});
    eprintln!("{diag}");
    ExitCode::from(if err.is_precision() { 3 } else { 2 })
}

/// Apply the `HCIZ_THREADS` cap before any parallel work starts.
fn init_thread_cap() -> Result<()> {
    let Ok(raw) = std::env::var("HCIZ_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::InvalidArgument(format!(
            "HCIZ_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    if threads == 0 {
        return Err(Error::InvalidArgument(
            "HCIZ_THREADS must be at least 1".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<String> {
    let out = cli.output.as_ref().map(|p| p.display().to_string());
    match &cli.command {
        Command::Measure(a) => run_measure(a, out),
        Command::Transform(a) => run_transform(a, out),
        Command::Exact(a) => run_exact(a, out),
        Command::Mc(a) => run_mc(a, out),
        Command::Bounds(a) => run_bounds(a, out),
        Command::Converge(a) => run_converge(a, out),
        Command::Dilute(a) => run_dilute(a, out),
    }
}

// ---------------------------------------------------------------------------
// Input parsing
// ---------------------------------------------------------------------------

fn read_measure(path: &Path) -> Result<SpectralMeasure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidMeasure(format!("{}: {e}", path.display())))
}

fn read_spectrum(path: &Path) -> Result<Spectrum> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

/// `lo:hi:step` (inclusive arithmetic grid) or a comma-separated list.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parse_one = |part: &str| -> Result<f64> {
        part.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("'{part}' is not a number in '{text}'")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "grid '{text}' must have the form lo:hi:step"
            )));
        }
        let (lo, hi, step) = (parse_one(parts[0])?, parse_one(parts[1])?, parse_one(parts[2])?);
        if !lo.is_finite() || !hi.is_finite() || !step.is_finite() || step <= 0.0 || hi < lo {
            return Err(Error::InvalidArgument(format!(
                "grid '{text}' needs finite lo ≤ hi and step > 0"
            )));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| lo + step * k as f64).collect())
    } else {
        text.split(',').map(parse_one).collect()
    }
}

fn parse_dims(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| {
                Error::InvalidArgument(format!("'{part}' is not a dimension in '{text}'"))
            })
        })
        .collect()
}

fn parse_method(kind: &str, precision_bits: u32, samples: u64, chunks: u32) -> Result<Method> {
    match kind {
        "exact" => Ok(Method::Exact { precision_bits }),
        "mc" => Ok(Method::Mc { samples, chunks }),
        other => Err(Error::InvalidArgument(format!(
            "method must be 'exact' or 'mc', got '{other}'"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Shortest round-trip decimal rendering ('.' decimal separator always).
fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// CSV for the study drivers: config header, the nine fixed columns, one
/// trailing summary line.
fn render_report(report: &ConvergenceReport, config: &Value) -> String {
    let mut out = format!("# config {config}\n");
    out.push_str("n,m,lhs,rhs,gap,lower,upper,method,stderr\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.n,
            row.m,
            fmt_f64(row.lhs),
            fmt_f64(row.rhs),
            fmt_f64(row.gap),
            fmt_opt(row.lower),
            fmt_opt(row.upper),
            row.method,
            fmt_opt(row.stderr),
        ));
    }
    let summary = json!({
        "max_gap": report.max_gap(),
        "final_gap": report.final_gap(),
        "monotone": report.monotone(),
    });
    out.push_str(&format!("# summary {summary}\n"));
    out
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn run_measure(args: &MeasureArgs, output: Option<String>) -> Result<String> {
    let m = read_measure(&args.measure)?;
    let config = json!({
        "subcommand": "measure",
        "measure": args.measure.display().to_string(),
        "sample": args.sample,
        "seed": args.seed,
        "output": output,
    });
    let mut v = match args.sample {
        Some(n) => {
            let s = sample_spectrum(&m, n, args.seed)?;
            let mut v = serde_json::to_value(&s).expect("spectra serialize");
            v["n"] = json!(n);
            v
        }
        None => {
            let mut v = serde_json::to_value(&m).expect("measures serialize");
            v["support"] = json!([m.support_min(), m.support_max()]);
            v["mean"] = json!(m.mean());
            v
        }
    };
    v["config"] = config;
    Ok(format!("{v}\n"))
}

fn run_transform(args: &TransformArgs, output: Option<String>) -> Result<String> {
    let m = read_measure(&args.measure)?;
    let beta = BetaClass::from_beta(args.beta)?;
    let grid = parse_grid(&args.t_grid)?;
    let config = json!({
        "subcommand": "transform",
        "measure": args.measure.display().to_string(),
        "beta": args.beta,
        "t_grid": args.t_grid,
        "points": grid.len(),
        "output": output,
    });
    let mut out = format!("# config {config}\n");
    out.push_str("t,v,f_beta,branch\n");
    for &t in &grid {
        let (v, branch) = v_branch_detailed(&m, t, beta);
        let f = f_beta(&m, t, beta)?;
        out.push_str(&format!(
            "{},{},{},{branch}\n",
            fmt_f64(t),
            fmt_f64(v),
            fmt_f64(f)
        ));
    }
    Ok(out)
}

fn run_exact(args: &ExactArgs, output: Option<String>) -> Result<String> {
    let a = read_spectrum(&args.a_spectrum)?;
    let b = read_spectrum(&args.b_spectrum)?;
    let v = hciz_exact_auto(&a, &b, args.precision_bits)?;
    let out = json!({
        "sign": v.sign(),
        "log_abs": v.log_abs(),
        "n": a.dim(),
        "config": {
            "subcommand": "exact",
            "a_spectrum": args.a_spectrum.display().to_string(),
            "b_spectrum": args.b_spectrum.display().to_string(),
            "precision_bits": args.precision_bits,
            "beta": 2,
            "output": output,
        },
    });
    Ok(format!("{out}\n"))
}

fn run_mc(args: &McArgs, output: Option<String>) -> Result<String> {
    let a = read_spectrum(&args.a_spectrum)?;
    let b = read_spectrum(&args.b_spectrum)?;
    for s in [&a, &b] {
        if s.dim() != args.n {
            return Err(Error::DimensionMismatch {
                left: s.dim(),
                right: args.n,
            });
        }
    }
    let beta = BetaClass::from_beta(args.beta)?;
    let params = McParams::new(beta, args.samples, args.seed, args.chunks)?;
    let est = hciz_mc_estimate(&a, &b, &params)?;
    let out = json!({
        "log_mean": est.log_mean,
        "stderr": est.stderr,
        "samples": est.samples,
        "config": {
            "subcommand": "mc",
            "beta": args.beta,
            "n": args.n,
            "samples": args.samples,
            "seed": args.seed,
            "chunks": args.chunks,
            "a_spectrum": args.a_spectrum.display().to_string(),
            "b_spectrum": args.b_spectrum.display().to_string(),
            "output": output,
        },
    });
    Ok(format!("{out}\n"))
}

fn run_bounds(args: &BoundsArgs, output: Option<String>) -> Result<String> {
    let a = read_spectrum(&args.a_spectrum)?;
    let b = read_spectrum(&args.b_spectrum)?;
    let beta = BetaClass::from_beta(args.beta)?;
    let method = parse_method(&args.method, args.precision_bits, args.samples, args.chunks)?;
    let s = sandwich_bounds(&a, &b, beta, &method, args.seed)?;
    let mut v = serde_json::to_value(s).expect("bounds serialize");
    v["n"] = json!(a.dim());
    v["config"] = json!({
        "subcommand": "bounds",
        "a_spectrum": args.a_spectrum.display().to_string(),
        "b_spectrum": args.b_spectrum.display().to_string(),
        "beta": args.beta,
        "method": method,
        "seed": args.seed,
        "output": output,
    });
    Ok(format!("{v}\n"))
}

fn run_converge(args: &ConvergeArgs, output: Option<String>) -> Result<String> {
    let m = read_measure(&args.measure)?;
    let rule: RankRule = args.rank.parse()?;
    let dims = parse_dims(&args.dims)?;
    let beta = BetaClass::from_beta(args.beta)?;
    let method = parse_method(&args.method, args.precision_bits, args.samples, args.chunks)?;
    let report = convergence_study(&m, rule, args.t, &dims, beta, &method, args.seed)?;
    let config = json!({
        "subcommand": "converge",
        "measure": args.measure.display().to_string(),
        "t": args.t,
        "rank": rule.label(),
        "dims": dims,
        "beta": args.beta,
        "method": method,
        "seed": args.seed,
        "output": output,
    });
    Ok(render_report(&report, &config))
}

fn run_dilute(args: &DiluteArgs, output: Option<String>) -> Result<String> {
    let nu = read_measure(&args.nu)?;
    let mu = read_measure(&args.mu)?;
    let grid = parse_grid(&args.a_grid)?;
    let beta = BetaClass::from_beta(args.beta)?;
    let method = parse_method(&args.method, args.precision_bits, args.samples, args.chunks)?;
    let report = dilute_rank_limit(&nu, &mu, &grid, args.n, beta, &method, args.seed)?;
    let config = json!({
        "subcommand": "dilute",
        "nu": args.nu.display().to_string(),
        "mu": args.mu.display().to_string(),
        "a_grid": grid,
        "n": args.n,
        "beta": args.beta,
        "method": method,
        "seed": args.seed,
        "output": output,
    });
    Ok(render_report(&report, &config))
}
