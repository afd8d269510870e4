//! Command-line front end. [`run`] does all the work so it can be driven
//! in-process; the binary only forwards `std::env::args`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::expr::SmoothExpr;
use crate::geometry::{Convention, Curvature, MetricSpec, TensorValue};
use crate::rwfl::{self, RwflConfig};
use crate::space::{qdist_with, WeilPoint};
use crate::weil::{lift_expr_with, Tolerance, WeilElement, WeilVector};

pub const GRAMMAR: &str = "\
Expression grammar:
  identifiers x1..x999; infix + - * / with usual precedence; ^ integer powers;
  function call name(expr); parentheses; decimal literals with optional
  exponent; whitespace insignificant.

  expr   := term (('+' | '-') term)*
  term   := unary (('*' | '/') unary)*
  unary  := '-' unary | power
  power  := atom ('^' '-'? integer)*
  atom   := number | 'x' index | name '(' expr ')' | '(' expr ')'
  name   := exp | log | sin | cos | tan | sqrt | atan | tanh | recip

The printer emits the fully parenthesized canonical form.";

#[derive(Parser, Debug)]
#[command(
    name = "weiljet",
    version,
    about = "Truncated-jet calculus, lifted curvature and FLRW collapse runs"
)]
#[command(after_help = GRAMMAR)]
struct Cli {
    /// Write output to this path (atomically), or `-` for standard output
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<String>,
    /// Output format; each command has its own default
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Absolute threshold for "real part is zero"
    #[arg(long, global = true, value_parser = positive)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Jet arithmetic
    #[command(subcommand)]
    Jet(JetCmd),
    /// Points of a space at a Weil stage
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Lifted curvature chain of a metric at a point
    Curvature(CurvatureArgs),
    /// FLRW scenario runner
    #[command(subcommand)]
    Rwfl(RwflCmd),
}

#[derive(Subcommand, Debug)]
enum JetCmd {
    /// Lift an expression to the stage ℝ[ε]/(ε^{K+1})
    #[command(after_help = GRAMMAR)]
    Eval {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        expr: String,
        /// Comma-separated base point
        #[arg(long, allow_hyphen_values = true, value_parser = reals)]
        at: Reals,
        /// Add ε to this argument (1-based)
        #[arg(long)]
        seed: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum SpaceCmd {
    /// Smallest k with the two points k-neighbours, or "inf"
    Qdist {
        /// Point JSON, inline or a file path
        #[arg(long)]
        point_a: String,
        #[arg(long)]
        point_b: String,
    },
}

#[derive(Args, Debug)]
struct CurvatureArgs {
    /// Metric JSON file: {"dim": n, "components": [["expr", ...], ...]}
    #[arg(long)]
    metric: PathBuf,
    /// Point JSON, inline or a file path
    #[arg(long)]
    at: String,
    /// Re-stage the point at this order
    #[arg(long)]
    order: Option<usize>,
    /// Use E = Ric + ½ℛg + Λg instead of Ric − ½ℛg + Λg
    #[arg(long)]
    paper_sign: bool,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
}

#[derive(Subcommand, Debug)]
enum RwflCmd {
    /// Backward evolution on a geometric time grid
    Evolve(EvolveArgs),
    /// Monad-collapse schedule at the singular point
    Collapse {
        #[arg(long)]
        order: usize,
        /// First stage of the schedule (defaults to the order)
        #[arg(long)]
        start_k: Option<usize>,
        /// Number of chart generators at the singular point
        #[arg(long, default_value_t = 1)]
        generators: usize,
    },
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<i64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    s_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    paper_sign: bool,
    #[arg(long)]
    collapse_start_k: Option<usize>,
}

#[derive(Clone, Debug)]
struct Reals(Vec<f64>);

fn reals(s: &str) -> std::result::Result<Reals, String> {
    if s.trim().is_empty() {
        return Ok(Reals(Vec::new()));
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Reals)
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// Exit status for a library error: 2 for bad input, 3 for numerical
/// failures, 4 for I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 4,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let text = e.render().to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return 1;
        }
    };
    let result = execute(&cli).and_then(|body| emit(cli.output.as_deref(), &body, stdout));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(output: Option<&str>, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match output {
        None | Some("-") => {
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
        Some(path) => write_atomic(Path::new(path), body)?,
    }
    Ok(())
}

fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<String> {
    let tol = cli
        .tolerance
        .map_or_else(Tolerance::default, Tolerance::uniform);
    match &cli.command {
        Command::Jet(JetCmd::Eval {
            order,
            expr,
            at,
            seed,
        }) => jet_eval(
            *order,
            expr,
            &at.0,
            *seed,
            tol,
            cli.format.unwrap_or(Format::Json),
        ),
        Command::Space(SpaceCmd::Qdist { point_a, point_b }) => {
            let a = read_point(point_a)?;
            let b = read_point(point_b)?;
            let d = qdist_with(&a, &b, tol)?;
            Ok(match cli.format.unwrap_or(Format::Json) {
                Format::Json => format!("{}\n", serde_json::to_string(&d).expect("serializable")),
                Format::Csv => format!("qdist\n{d}\n"),
            })
        }
        Command::Curvature(args) => curvature(args, tol, cli.format.unwrap_or(Format::Json)),
        Command::Rwfl(RwflCmd::Evolve(args)) => {
            evolve(args, tol, cli.format.unwrap_or(Format::Csv))
        }
        Command::Rwfl(RwflCmd::Collapse {
            order,
            start_k,
            generators,
        }) => collapse(
            *order,
            *start_k,
            *generators,
            cli.format.unwrap_or(Format::Csv),
        ),
    }
}

fn jet_eval(
    order: usize,
    expr: &str,
    at: &[f64],
    seed: Option<usize>,
    tol: Tolerance,
    format: Format,
) -> Result<String> {
    let f = SmoothExpr::parse(expr, at.len())?;
    let mut args: Vec<WeilElement> = at
        .iter()
        .map(|&p| WeilElement::from_real(p, order))
        .collect();
    if let Some(i) = seed {
        if i == 0 || i > at.len() {
            return Err(Error::VariableOutOfRange {
                index: i,
                arity: at.len(),
            });
        }
        args[i - 1] = &args[i - 1] + &WeilElement::epsilon(order);
    }
    let args = if args.is_empty() {
        WeilVector::empty(order)
    } else {
        WeilVector::new(args)?
    };
    let jet = lift_expr_with(&f, &args, tol)?;
    Ok(match format {
        Format::Json => format!("{}\n", serde_json::to_string(&jet).expect("serializable")),
        Format::Csv => {
            let mut out = String::from("degree,coeff\n");
            for (j, c) in jet.coeffs().iter().enumerate() {
                let _ = writeln!(out, "{j},{c}");
            }
            out
        }
    })
}

fn read_text(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        Ok(std::fs::read_to_string(arg)?)
    }
}

fn read_point(arg: &str) -> Result<WeilPoint> {
    serde_json::from_str(&read_text(arg)?).map_err(|e| Error::Config(format!("point: {e}")))
}

fn curvature(args: &CurvatureArgs, tol: Tolerance, format: Format) -> Result<String> {
    let metric = MetricSpec::from_json(&std::fs::read_to_string(&args.metric)?)?;
    let mut rho = read_point(&args.at)?;
    if let Some(k) = args.order {
        rho = rho.at_order(k);
    }
    let conv = Convention::new(args.paper_sign, args.lambda);
    let c = Curvature::compute_with(&metric, &rho, conv, tol)?;
    Ok(match format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&c.to_json()).expect("serializable")
        ),
        Format::Csv => curvature_csv(&c),
    })
}

fn curvature_csv(c: &Curvature) -> String {
    let order = c.scalar.order();
    let mut out = String::from("quantity,index");
    for j in 0..=order {
        let _ = write!(out, ",c{j}");
    }
    out.push('\n');
    let mut row = |name: &str, index: &str, e: &WeilElement| {
        let _ = write!(out, "{name},{index}");
        for v in e.coeffs() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    };
    let tensors: [(&str, &TensorValue); 6] = [
        ("metric", &c.metric),
        ("inverse", &c.inverse),
        ("christoffel", &c.christoffel),
        ("riemann", &c.riemann),
        ("ricci", &c.ricci),
        ("einstein", &c.einstein),
    ];
    for (name, t) in tensors {
        let n = t.dim();
        for (flat, e) in t.entries().iter().enumerate() {
            let mut idx = vec![0; t.rank()];
            let mut rest = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rest % n;
                rest /= n;
            }
            let label: Vec<String> = idx.iter().map(usize::to_string).collect();
            row(name, &label.join(":"), e);
        }
    }
    row("scalar", "", &c.scalar);
    row("kretschmann", "", &c.kretschmann);
    out
}

fn evolve(args: &EvolveArgs, tol: Tolerance, format: Format) -> Result<String> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg: RwflConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    macro_rules! take {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field {
                cfg.$field = v;
            })*
        };
    }
    take!(kappa, order, t_start, t_end, ratio, s_min, lambda);
    if args.paper_sign {
        cfg.paper_sign = true;
    }
    if args.collapse_start_k.is_some() {
        cfg.collapse_start_k = args.collapse_start_k;
    }
    cfg.validate()?;
    let records = rwfl::evolve_backwards_with(&cfg, tol)?;
    Ok(match format {
        Format::Csv => rwfl::to_csv(&records),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&records).expect("serializable")
        ),
    })
}

fn collapse(
    order: usize,
    start_k: Option<usize>,
    generators: usize,
    format: Format,
) -> Result<String> {
    let start = start_k.unwrap_or(order);
    if start > order {
        return Err(Error::Config(format!(
            "start k {start} exceeds order {order}"
        )));
    }
    let center = rwfl::singular_center(generators, order);
    let seq = rwfl::monad_collapse(start, &center)?;
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("k,dim,singleton\n");
            for (k, _, dim) in &seq {
                let _ = writeln!(out, "{k},{dim},{}", *k == 0);
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = seq
                .iter()
                .map(|(k, _, dim)| json!({"k": k, "dim": dim, "singleton": *k == 0}))
                .collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(&rows).expect("serializable")
            )
        }
    })
}
