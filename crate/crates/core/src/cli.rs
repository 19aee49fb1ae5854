//! Command-line front end. [`run`] parses the arguments, dispatches and
//! returns the exit code: 0 on success, 1 when validation fails and 2 on
//! usage or input errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::causal::{brute_force_causal, repeated_success, CausalReport, RationalJson};
use crate::diagop::{io, mask_string, DiagOperator};
use crate::game::{
    outcome_distribution, sample_game, success_probability_exact, target_parity, GameRound, WinningStrategy,
};
use crate::process::{build_w, naive_even_w, process_layout, validate_process, ProcessMatrix, ValidationConfig};
use crate::scalar::{Dyadic, Scalar};

/// Largest layout width printed or exported densely.
pub const MAX_DENSE_WIDTH: u32 = 24;

#[derive(Debug, Parser)]
#[command(name = "ccorder", version, about = "Classical processes without predefined causal order")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the n-party process W_n.
    BuildW(BuildArgs),
    /// Check a process for logical consistency.
    Validate(ValidateArgs),
    /// Exact success probabilities of the winning strategy.
    Play(PlayArgs),
    /// Monte-Carlo estimate of the success probability.
    Sample(SampleArgs),
    /// The bound under a predefined causal order.
    CausalBound(CausalArgs),
    /// Write W_n in a file format readable by `validate`.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Monomials,
    Dense,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Machine-readable JSON output.
    #[arg(long)]
    pub json: bool,
    /// Print numbers as floating point instead of exact fractions.
    #[arg(long)]
    pub float: bool,
    /// Write the output to a file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Monomials)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Operator file: JSON, or dense CSV together with --n.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
    /// Validate W_n, or give the layout of a CSV file.
    #[arg(long)]
    pub n: Option<usize>,
    /// Validate the naive even construction instead of W_n.
    #[arg(long)]
    pub naive: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[arg(long)]
    pub n: usize,
    /// Value of M for a single round; requires --inputs.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated input bits for a single round.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Option<Vec<u8>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CausalArgs {
    #[arg(long)]
    pub n: usize,
    /// Also search all deterministic protocols (n <= 3).
    #[arg(long)]
    pub brute_force: bool,
    /// Also report the chance of winning this many rounds in a row.
    #[arg(long)]
    pub rounds: Option<u32>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub n: usize,
    /// `monomials` writes the JSON schema, `dense` writes CSV.
    #[arg(long, value_enum, default_value_t = Format::Monomials)]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    /// The report is still written before exiting with code 1.
    Validation {
        checks: Vec<&'static str>,
        text: String,
        path: Option<PathBuf>,
    },
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Runs one command. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match &cli.command {
        Command::BuildW(a) => build_cmd(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Play(a) => play_cmd(a),
        Command::Sample(a) => sample_cmd(a),
        Command::CausalBound(a) => causal_cmd(a),
        Command::Export(a) => export_cmd(a),
    };
    match result {
        Ok((text, path)) => match emit(out, path, &text) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                2
            }
        },
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Validation { checks, text, path }) => {
            if let Err(e) = emit(out, path, &text) {
                let _ = writeln!(err, "error: {e}");
            }
            let _ = writeln!(err, "validation failed: {}", checks.join(", "));
            1
        }
    }
}

type Outcome = Result<(String, Option<PathBuf>), Failure>;

fn emit(out: &mut dyn Write, path: Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(path) => write_atomic(&path, text.as_bytes()),
        None => out.write_all(text.as_bytes()),
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `x` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-5..17).contains(&magnitude) {
        format!("{:.*}", (16 - magnitude).max(0) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

fn dyadic_text(d: Dyadic, float: bool) -> String {
    if float {
        format_float(d.to_f64())
    } else {
        d.to_string()
    }
}

fn rational_text(r: &BigRational, float: bool) -> String {
    if float {
        format_float(rational_f64(r))
    } else {
        r.to_string()
    }
}

fn rational_f64(r: &BigRational) -> f64 {
    Scalar::to_f64(r)
}

fn dyadic_json(d: Dyadic, float: bool) -> Value {
    if float {
        json!(d.to_f64())
    } else {
        json!({"num": d.numerator(), "log2den": d.log2_denominator()})
    }
}

fn rational_json(r: &BigRational, float: bool) -> Value {
    if float {
        json!(rational_f64(r))
    } else {
        serde_json::to_value(RationalJson(r.clone())).expect("rational serializes")
    }
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn exact_w(n: usize) -> Result<ProcessMatrix<Dyadic>, Failure> {
    Ok(build_w::<Dyadic>(n)?)
}

fn check_dense_width(op: &DiagOperator<Dyadic>) -> Result<(), Failure> {
    let width = op.layout().width();
    if width > MAX_DENSE_WIDTH {
        return Err(Failure::Usage(format!("dense output needs 2^{width} entries; the limit is 2^{MAX_DENSE_WIDTH}")));
    }
    Ok(())
}

fn operator_text(op: &DiagOperator<Dyadic>, format: Format, json: bool, float: bool) -> Result<String, Failure> {
    match (format, json) {
        (Format::Monomials, true) if !float => Ok(io::to_json(op) + "\n"),
        (Format::Monomials, _) => {
            let monomial = op.to_monomial_form();
            let terms = monomial.terms().expect("monomial form");
            if json {
                let rows: Vec<Value> =
                    terms.iter().map(|(&mask, c)| json!({"mask": format!("{mask:x}"), "value": c.to_f64()})).collect();
                return Ok(to_json_text(&json!({"layout": op.layout().to_string(), "terms": rows})));
            }
            let mut s = format!("layout {}\n{} terms\n", op.layout(), terms.len());
            for (&mask, c) in terms {
                let _ = writeln!(s, "{} {}", dyadic_text(*c, float), mask_string(op.layout(), mask));
            }
            Ok(s)
        }
        (Format::Dense, _) => {
            check_dense_width(op)?;
            let dense = op.to_dense();
            if json {
                let rows: Vec<Value> = dense.iter().map(|d| dyadic_json(*d, float)).collect();
                return Ok(to_json_text(&json!({"layout": op.layout().to_string(), "entries": rows})));
            }
            if !float {
                return Ok(io::to_csv(op));
            }
            let mut s = String::from("index,value\n");
            for (index, d) in dense.iter().enumerate() {
                let _ = writeln!(s, "{index},{}", format_float(d.to_f64()));
            }
            Ok(s)
        }
    }
}

fn build_cmd(a: &BuildArgs) -> Outcome {
    let w = exact_w(a.n)?;
    let text = operator_text(w.operator(), a.format, a.output.json, a.output.float)?;
    Ok((text, a.output.out.clone()))
}

fn export_cmd(a: &ExportArgs) -> Outcome {
    let w = exact_w(a.n)?;
    let text = match a.format {
        Format::Monomials => io::to_json(w.operator()) + "\n",
        Format::Dense => {
            check_dense_width(w.operator())?;
            io::to_csv(w.operator())
        }
    };
    Ok((text, a.out.clone()))
}

fn load_operator(a: &ValidateArgs) -> Result<DiagOperator<Dyadic>, Failure> {
    match (&a.file, a.n) {
        (Some(path), n) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            if text.trim_start().starts_with('{') {
                Ok(io::from_json(&text)?)
            } else {
                let n = n.ok_or_else(|| Failure::Usage("a CSV file needs --n for its layout".into()))?;
                Ok(io::from_csv(process_layout(n), &text)?)
            }
        }
        (None, Some(n)) if a.naive => Ok(naive_even_w::<Dyadic>(n)?),
        (None, Some(n)) => Ok(exact_w(n)?.into_operator()),
        (None, None) => Err(Failure::Usage("validate needs --file or --n".into())),
    }
}

fn validate_cmd(a: &ValidateArgs) -> Outcome {
    let op = load_operator(a)?;
    let process = ProcessMatrix::from_exact_operator(op)?;
    let report = validate_process(process.operator(), &ValidationConfig::default())?;
    let failing = report.failing_checks();
    let text = if a.output.json {
        let mut v = serde_json::to_value(&report).expect("report serializes");
        v["n"] = json!(process.parties());
        v["passed"] = json!(report.passed());
        v["bilinear_norm"]["exhaustive"] = json!(report.bilinear_norm.exhaustive);
        to_json_text(&v)
    } else {
        let mut s = format!("n = {}\nlayout {}\n", process.parties(), process.layout());
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        let _ = writeln!(s, "nonneg: {}", mark(report.nonneg));
        let _ = writeln!(s, "channel_norm: {}", mark(report.channel_norm));
        let b = &report.bilinear_norm;
        let _ = writeln!(
            s,
            "bilinear_norm: {} ({} of {} {} tuples failed)",
            mark(b.passed()),
            b.failed,
            b.checked,
            if b.exhaustive { "enumerated" } else { "sampled" }
        );
        let _ = writeln!(s, "term_structure: {}", mark(report.term_structure));
        s.push_str("signaling (row O_j, column I_i):\n");
        for row in &report.signaling {
            let line: String = row.iter().map(|&b| if b { '1' } else { '.' }).collect();
            let _ = writeln!(s, "  {line}");
        }
        s
    };
    if failing.is_empty() {
        Ok((text, a.output.out.clone()))
    } else {
        Err(Failure::Validation { checks: failing, text, path: a.output.out.clone() })
    }
}

fn play_cmd(a: &PlayArgs) -> Outcome {
    let float = a.output.float;
    match (a.m, &a.inputs) {
        (None, None) => {
            let result = success_probability_exact(a.n)?;
            let text = if a.output.json {
                let per_m: Vec<Value> = result.per_m.iter().map(|d| dyadic_json(*d, float)).collect();
                to_json_text(&json!({"n": a.n, "per_m": per_m, "p_succ": rational_json(&result.p_succ, float)}))
            } else {
                let mut s = format!("n = {}\n", a.n);
                for (m, p) in result.per_m.iter().enumerate() {
                    let _ = writeln!(s, "m = {m}: {}", dyadic_text(*p, float));
                }
                let _ = writeln!(s, "p_succ = {}", rational_text(&result.p_succ, float));
                s
            };
            Ok((text, a.output.out.clone()))
        }
        (Some(m), Some(inputs)) => {
            let round = GameRound::new(a.n, m, inputs.clone())?;
            let w = exact_w(a.n)?;
            let strategy = WinningStrategy::new(a.n)?;
            let behaviors = crate::game::Strategy::behaviors(&strategy, m, &round.inputs);
            let dist = outcome_distribution(&w, &behaviors)?;
            let target = target_parity(&round.inputs, m);
            let n = a.n;
            let bits = |idx: usize| -> Vec<u8> { (0..n).map(|k| (idx >> (n - 1 - k) & 1) as u8).collect() };
            let success: Dyadic =
                dist.iter().enumerate().filter(|(idx, _)| bits(*idx)[m] == target).map(|(_, p)| *p).sum();
            let text = if a.output.json {
                let rows: Vec<Value> = dist
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !num_traits::Zero::is_zero(*p))
                    .map(|(idx, p)| {
                        let mut row = json!({"x": bits(idx)});
                        if float {
                            row["p"] = json!(p.to_f64());
                        } else {
                            row["num"] = json!(p.numerator());
                            row["log2den"] = json!(p.log2_denominator());
                        }
                        row
                    })
                    .collect();
                to_json_text(&json!({
                    "n": n,
                    "m": m,
                    "a": round.inputs,
                    "distribution": rows,
                    "success": dyadic_json(success, float),
                }))
            } else {
                let a_text: Vec<String> = round.inputs.iter().map(u8::to_string).collect();
                let mut s = format!("n = {n}, m = {m}, a = {}\n", a_text.join(","));
                for (idx, p) in dist.iter().enumerate() {
                    if !num_traits::Zero::is_zero(p) {
                        let x: String = bits(idx).iter().map(u8::to_string).collect();
                        let _ = writeln!(s, "x = {x}: {}", dyadic_text(*p, float));
                    }
                }
                let _ = writeln!(s, "P(x_{m} = {target}) = {}", dyadic_text(success, float));
                s
            };
            Ok((text, a.output.out.clone()))
        }
        _ => Err(Failure::Usage("--m and --inputs must be given together".into())),
    }
}

fn sample_cmd(a: &SampleArgs) -> Outcome {
    let report = sample_game(a.n, a.shots, a.seed)?;
    let float = a.output.float;
    let estimate = BigRational::new(report.wins.into(), report.shots.into());
    let text = if a.output.json {
        let per_m: Vec<Value> = report.per_m.iter().map(|c| json!({"shots": c.shots, "wins": c.wins})).collect();
        to_json_text(&json!({
            "n": report.n,
            "shots": report.shots,
            "seed": report.seed,
            "wins": report.wins,
            "estimate": rational_json(&estimate, float),
            "per_m": per_m,
            "rng": report.rng,
        }))
    } else {
        let mut s =
            format!("n = {}, shots = {}, seed = {}, rng = {}\n", report.n, report.shots, report.seed, report.rng);
        for (m, c) in report.per_m.iter().enumerate() {
            let _ = writeln!(s, "m = {m}: {} of {}", c.wins, c.shots);
        }
        let _ = writeln!(s, "wins = {}", report.wins);
        let _ = writeln!(s, "estimate = {}", rational_text(&estimate, float));
        s
    };
    Ok((text, a.output.out.clone()))
}

fn causal_cmd(a: &CausalArgs) -> Outcome {
    let brute = if a.brute_force { Some(brute_force_causal(a.n)?) } else { None };
    let report = CausalReport::new(a.n, brute.as_ref())?;
    let rounds = a.rounds.map(|r| repeated_success(a.n, r).map(|v| (r, v))).transpose()?;
    let float = a.output.float;
    let text = if a.output.json {
        let mut v = serde_json::to_value(&report).expect("report serializes");
        if float {
            for key in ["value", "bound", "brute_force", "best_fixed_order"] {
                if let Some(entry) = v.get_mut(key) {
                    let num = entry["num"].as_f64().unwrap_or(f64::NAN);
                    let den = entry["den"].as_f64().unwrap_or(f64::NAN);
                    *entry = json!(num / den);
                }
            }
        }
        if let Some((r, value)) = &rounds {
            v["repeated"] = json!({"rounds": r, "value": rational_json(value, float)});
        }
        to_json_text(&v)
    } else {
        let mut s = format!("n = {}\nmodel: {}\n", a.n, report.model);
        for assumption in report.assumptions {
            let _ = writeln!(s, "  - {assumption}");
        }
        let _ = writeln!(s, "bound = {}", rational_text(&report.bound.0, float));
        let _ = writeln!(s, "forwarding = {}", rational_text(&report.value.0, float));
        let _ = writeln!(s, "first party = {}", report.witness.first);
        if let Some(b) = &brute {
            let _ = writeln!(s, "brute-force = {} over {} protocols", rational_text(&b.value, float), b.protocols);
            let _ = writeln!(s, "best fixed order = {}", rational_text(&b.best_fixed_order, float));
            let _ = writeln!(s, "match = {}", report.matches_bound.unwrap_or(false));
        }
        if let Some((r, value)) = &rounds {
            let _ = writeln!(s, "win {r} rounds = {}", rational_text(value, float));
        }
        s
    };
    Ok((text, a.output.out.clone()))
}
