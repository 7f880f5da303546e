//! Command-line front end for the qkd-rates library.
//!
//! Four subcommands: `rate` prints secret-key-rate rows over an error-rate
//! sweep, `pmax` locates the threshold error rate where a rate curve reaches
//! zero, `capacity` prints coherent-information lower bounds for the
//! depolarizing channel, and `schur` exports a labeled Schur basis as JSON.
//!
//! Output is CSV (RFC-4180-style, `\n` line endings) or JSON with stable key
//! order. Probabilities are printed with 7 decimals; rates carry 10
//! significant digits. Exit codes: 0 success, 2 usage or domain error,
//! 3 numerical non-convergence, 4 work budget exceeded.

use clap::{Args, Parser, Subcommand, ValueEnum};
use qkd_rates::capacity::{conc_rate, pmax_capacity};
use qkd_rates::channels::{depolarizing, ProtocolKind};
use qkd_rates::keyrates::{bb84_iter_rate, bb84_rate, sixstate_rate, RateResult};
use qkd_rates::optimize::{maximize_q, maximize_qq, pmax_search, QMode, RateSpec};
use qkd_rates::schur_efm::schur_basis;
use qkd_rates::Error as LibError;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qkdrates",
    version,
    about = "Secret-key rates, thresholds, and depolarizing-capacity bounds \
             for repetition-code preprocessing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format (default: csv, except `schur` which is JSON-only)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker thread-pool size (default: hardware count); any value yields
    /// identical numerical output
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Key-rate rows (p, q, Q, rate, i_xy, i_xe) over an error-rate sweep
    Rate(RateArgs),
    /// Threshold error rate where the selected rate curve reaches zero
    Pmax(PmaxArgs),
    /// Coherent-information lower bound of the depolarizing channel under a
    /// concatenated repetition code
    Capacity(CapacityArgs),
    /// Labeled orthonormal Schur basis of (C^q)^⊗n, as JSON
    Schur(SchurArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Protocol {
    Bb84,
    #[value(alias = "sixstate")]
    SixState,
}

impl Protocol {
    fn kind(self) -> ProtocolKind {
        match self {
            Protocol::Bb84 => ProtocolKind::Bb84,
            Protocol::SixState => ProtocolKind::SixState,
        }
    }
    fn name(self) -> &'static str {
        match self {
            Protocol::Bb84 => "bb84",
            Protocol::SixState => "six-state",
        }
    }
}

#[derive(Args)]
struct RateArgs {
    /// Protocol whose effective error model to use
    #[arg(long, value_enum)]
    protocol: Option<Protocol>,
    /// Repetition block length (single preprocessing round)
    #[arg(long, conflicts_with_all = ["iterated", "m1", "m2"])]
    m: Option<u32>,
    /// Two-round concatenated preprocessing (BB84 only)
    #[arg(long, requires = "m1", requires = "m2")]
    iterated: bool,
    /// Inner block length of the two-round scheme
    #[arg(long, requires = "iterated")]
    m1: Option<u32>,
    /// Outer block length of the two-round scheme
    #[arg(long, requires = "iterated")]
    m2: Option<u32>,
    /// Single error-rate sample
    #[arg(long, conflicts_with = "p_range")]
    p: Option<f64>,
    /// Error-rate sweep start:stop:step
    #[arg(long)]
    p_range: Option<String>,
    /// First-round flip probability
    #[arg(long, conflicts_with = "optimize_q")]
    q: Option<f64>,
    /// Second-round flip probability (requires --iterated)
    #[arg(long = "Q", requires = "iterated", conflicts_with = "optimize_q")]
    big_q: Option<f64>,
    /// Maximize the rate over q (and Q with --iterated) at every p
    #[arg(long)]
    optimize_q: bool,
    /// Optimizer interval tolerance on the flip probabilities
    #[arg(long, default_value_t = 1e-6)]
    tol_q: f64,
}

#[derive(Args)]
struct PmaxArgs {
    /// Protocol whose rate curve to bisect
    #[arg(long, value_enum)]
    protocol: Option<Protocol>,
    /// Repetition block length (single preprocessing round)
    #[arg(long, conflicts_with_all = ["iterated", "m1", "m2", "capacity"])]
    m: Option<u32>,
    /// Threshold of the depolarizing-capacity bound instead of a key rate
    #[arg(long, conflicts_with_all = ["iterated", "q", "big_q", "optimize_q", "protocol"])]
    capacity: bool,
    /// Two-round concatenated preprocessing (BB84 only)
    #[arg(long, requires = "m1", requires = "m2")]
    iterated: bool,
    /// Inner block length (two-round scheme or capacity bound)
    #[arg(long)]
    m1: Option<u32>,
    /// Outer block length (two-round scheme or capacity bound)
    #[arg(long)]
    m2: Option<u32>,
    /// First-round flip probability
    #[arg(long, conflicts_with = "optimize_q")]
    q: Option<f64>,
    /// Second-round flip probability (requires --iterated)
    #[arg(long = "Q", requires = "iterated", conflicts_with = "optimize_q")]
    big_q: Option<f64>,
    /// Re-maximize the rate over the flip probabilities at every probed p
    #[arg(long)]
    optimize_q: bool,
    /// Bisection tolerance on p
    #[arg(long, default_value_t = 1e-7)]
    tol_p: f64,
}

#[derive(Args)]
struct CapacityArgs {
    /// Inner (phase-flip) repetition length
    #[arg(long)]
    m1: u32,
    /// Outer (bit-flip) repetition length
    #[arg(long)]
    m2: u32,
    /// Single depolarizing-parameter sample
    #[arg(long, conflicts_with = "p_range")]
    p: Option<f64>,
    /// Depolarizing-parameter sweep start:stop:step
    #[arg(long)]
    p_range: Option<String>,
}

#[derive(Args)]
struct SchurArgs {
    /// Number of tensor factors
    #[arg(long)]
    n: u32,
    /// Local dimension
    #[arg(long)]
    q: u32,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<LibError> for Failure {
    fn from(e: LibError) -> Self {
        let code = match e {
            LibError::Domain(_) | LibError::Shape(_) | LibError::Unsupported(_) => 2,
            LibError::NotConverged(_)
            | LibError::NoBracket { .. }
            | LibError::NotPositive { .. }
            | LibError::Labeling(_) => 3,
            LibError::Budget { .. } => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

fn parse_p_samples(p: Option<f64>, p_range: &Option<String>) -> Result<Vec<f64>, Failure> {
    match (p, p_range) {
        (Some(v), None) => Ok(vec![v]),
        (None, Some(spec)) => {
            let parts: Vec<&str> = spec.split(':').collect();
            if parts.len() != 3 {
                return Err(Failure::usage(format!(
                    "--p-range wants start:stop:step, got `{spec}`"
                )));
            }
            let nums: Vec<f64> = parts
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::usage(format!("--p-range `{spec}`: {e}")))?;
            let (start, stop, step) = (nums[0], nums[1], nums[2]);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(Failure::usage(format!(
                    "--p-range `{spec}`: need stop >= start and step > 0"
                )));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        (Some(_), Some(_)) => Err(Failure::usage("give exactly one of --p and --p-range")),
        (None, None) => Err(Failure::usage("one of --p or --p-range is required")),
    }
}

#[derive(Serialize)]
struct RateRow {
    p: f64,
    q: f64,
    #[serde(rename = "Q")]
    big_q: f64,
    rate: f64,
    i_xy: f64,
    i_xe: f64,
}

#[derive(Serialize)]
struct RateReport {
    command: &'static str,
    protocol: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m1: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m2: Option<u32>,
    optimize_q: bool,
    rows: Vec<RateRow>,
}

fn cmd_rate(args: &RateArgs) -> Result<Output, Failure> {
    let protocol = args.protocol.unwrap_or(Protocol::Bb84);
    if args.iterated && protocol == Protocol::SixState {
        return Err(Failure::usage("--iterated supports only --protocol bb84"));
    }
    let samples = parse_p_samples(args.p, &args.p_range)?;
    let q_fixed = args.q.unwrap_or(0.0);
    let big_q_fixed = args.big_q.unwrap_or(0.0);

    let eval_fixed = |p: f64, q: f64, big_q: f64| -> Result<RateResult, LibError> {
        if args.iterated {
            bb84_iter_rate(args.m1.unwrap(), args.m2.unwrap(), p, q, big_q)
        } else {
            let m = args.m.ok_or_else(|| {
                LibError::Domain("--m is required unless --iterated is given".into())
            })?;
            match protocol {
                Protocol::Bb84 => bb84_rate(m, p, q),
                Protocol::SixState => sixstate_rate(m, p, q),
            }
        }
    };

    let mut rows = Vec::with_capacity(samples.len());
    for &p in &samples {
        let r = if args.optimize_q {
            if args.iterated {
                let best = maximize_qq(
                    |q, big_q| {
                        eval_fixed(p, q, big_q).map(|r| r.rate)
                    },
                    args.tol_q,
                )?;
                eval_fixed(p, best.argmax.0, best.argmax.1.unwrap_or(0.0))?
            } else {
                let best = maximize_q(|q| eval_fixed(p, q, 0.0).map(|r| r.rate), args.tol_q)?;
                eval_fixed(p, best.argmax.0, 0.0)?
            }
        } else {
            eval_fixed(p, q_fixed, big_q_fixed)?
        };
        rows.push(RateRow {
            p,
            q: r.params.q,
            big_q: r.params.big_q,
            rate: r.rate,
            i_xy: r.i_xy,
            i_xe: r.i_xe,
        });
    }

    let mut csv = String::from("p,q,Q,rate,i_xy,i_xe\n");
    for r in &rows {
        csv.push_str(&format!(
            "{:.7},{:.7},{:.7},{:.9e},{:.9e},{:.9e}\n",
            r.p, r.q, r.big_q, r.rate, r.i_xy, r.i_xe
        ));
    }
    let report = RateReport {
        command: "rate",
        protocol: protocol.name(),
        m: args.m,
        m1: args.m1,
        m2: args.m2,
        optimize_q: args.optimize_q,
        rows,
    };
    Ok(Output { csv, json: to_json(&report)? })
}

#[derive(Serialize)]
struct PmaxReport {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol: Option<&'static str>,
    capacity: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m1: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m2: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    big_q: Option<f64>,
    optimize_q: bool,
    p_max: f64,
}

fn cmd_pmax(args: &PmaxArgs) -> Result<Output, Failure> {
    let protocol = args.protocol.unwrap_or(Protocol::Bb84);
    let p_max;
    let report;
    if args.capacity {
        let (m1, m2) = match (args.m1, args.m2) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Failure::usage("--capacity wants --m1 and --m2")),
        };
        p_max = pmax_capacity(m1, m2, args.tol_p)?;
        report = PmaxReport {
            command: "pmax",
            protocol: None,
            capacity: true,
            m: None,
            m1: Some(m1),
            m2: Some(m2),
            q: None,
            big_q: None,
            optimize_q: false,
            p_max,
        };
    } else {
        if args.iterated && protocol == Protocol::SixState {
            return Err(Failure::usage("--iterated supports only --protocol bb84"));
        }
        let spec = if args.iterated {
            RateSpec::Iterated { m1: args.m1.unwrap(), m2: args.m2.unwrap() }
        } else {
            let m = args
                .m
                .ok_or_else(|| Failure::usage("one of --m, --iterated, --capacity is required"))?;
            RateSpec::Single { kind: protocol.kind(), m }
        };
        let q_mode = if args.optimize_q {
            QMode::Optimize
        } else {
            QMode::Fixed { q: args.q.unwrap_or(0.0), big_q: args.big_q.unwrap_or(0.0) }
        };
        p_max = pmax_search(spec, q_mode, args.tol_p)?;
        report = PmaxReport {
            command: "pmax",
            protocol: Some(protocol.name()),
            capacity: false,
            m: args.m,
            m1: if args.iterated { args.m1 } else { None },
            m2: if args.iterated { args.m2 } else { None },
            q: if args.optimize_q { None } else { Some(args.q.unwrap_or(0.0)) },
            big_q: if args.optimize_q || !args.iterated {
                None
            } else {
                Some(args.big_q.unwrap_or(0.0))
            },
            optimize_q: args.optimize_q,
            p_max,
        };
    }
    Ok(Output { csv: format!("p_max\n{p_max:.7}\n"), json: to_json(&report)? })
}

#[derive(Serialize)]
struct CapacityRow {
    p: f64,
    rate: f64,
}

#[derive(Serialize)]
struct CapacityReport {
    command: &'static str,
    m1: u32,
    m2: u32,
    rows: Vec<CapacityRow>,
}

fn cmd_capacity(args: &CapacityArgs) -> Result<Output, Failure> {
    let samples = parse_p_samples(args.p, &args.p_range)?;
    let mut rows = Vec::with_capacity(samples.len());
    for &p in &samples {
        let rate = conc_rate(args.m1, args.m2, &depolarizing(p)?)?;
        rows.push(CapacityRow { p, rate });
    }
    let mut csv = String::from("p,rate\n");
    for r in &rows {
        csv.push_str(&format!("{:.7},{:.9e}\n", r.p, r.rate));
    }
    let report = CapacityReport { command: "capacity", m1: args.m1, m2: args.m2, rows };
    Ok(Output { csv, json: to_json(&report)? })
}

#[derive(Serialize)]
struct SchurCoeff {
    state: Vec<u8>,
    amplitude: f64,
}

#[derive(Serialize)]
struct SchurVectorReport {
    nu: Vec<u32>,
    weyl: Vec<Vec<u8>>,
    tableau: Vec<Vec<u32>>,
    gelfand: Vec<u32>,
    coeffs: Vec<SchurCoeff>,
}

#[derive(Serialize)]
struct SchurReport {
    command: &'static str,
    n: u32,
    q: u32,
    vectors: Vec<SchurVectorReport>,
}

fn cmd_schur(args: &SchurArgs) -> Result<Output, Failure> {
    let basis = schur_basis(args.n, args.q)?;
    let vectors = basis
        .vectors
        .into_iter()
        .map(|v| SchurVectorReport {
            nu: v.nu,
            weyl: v.weyl,
            tableau: v.tableau,
            gelfand: v.gelfand,
            coeffs: v
                .coeffs
                .into_iter()
                .map(|(state, amplitude)| SchurCoeff { state, amplitude })
                .collect(),
        })
        .collect();
    let report = SchurReport { command: "schur", n: args.n, q: args.q, vectors };
    Ok(Output { csv: String::new(), json: to_json(&report)? })
}

struct Output {
    csv: String,
    json: String,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure { code: 3, message: format!("serialization failed: {e}") })
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        // Ignore the error from a pool that is already installed: the first
        // builder wins and output does not depend on pool size anyway.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let is_schur = matches!(cli.command, Command::Schur(_));
    let format = cli.format.unwrap_or(if is_schur { Format::Json } else { Format::Csv });
    if is_schur && format == Format::Csv {
        return Err(Failure::usage("schur output is JSON-only; drop --format csv"));
    }
    let out = match &cli.command {
        Command::Rate(args) => cmd_rate(args)?,
        Command::Pmax(args) => cmd_pmax(args)?,
        Command::Capacity(args) => cmd_capacity(args)?,
        Command::Schur(args) => cmd_schur(args)?,
    };
    let text = match format {
        Format::Csv => out.csv,
        Format::Json => out.json,
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure { code: 3, message: format!("{}: {e}", path.display()) })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qkdrates: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
