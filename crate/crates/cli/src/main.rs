//! `takagi`: evaluate and analyse functions with ±1 Faber–Schauder
//! coefficients, writing CSV or JSON.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration, 3 a
//! coefficient table too shallow for the requested level.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use takagi::exact::{format_rational, parse_rational, DECIMAL_DIGITS};
use takagi::extrema::grid_extrema;
use takagi::follmer::{PathPowerSums, RationalPolynomial, ResidualRow};
use takagi::modulus::{modulus_csv, modulus_scan, modulus_scan_all, witness_csv, witness_ratios, WitnessKind};
use takagi::quadvar::{counterexample_series, level_sums, qv_approx, qv_profile, QVRow, QVSeries, SeriesKind};
use takagi::table::{rational_columns, time_columns, value_columns, VALUE_HEADER};
use takagi::{
    CoefficientScheme, DyadicRational, Execution, GridPath, QuadValue, Rational, TakagiError, TakagiFunction,
};

#[derive(Parser)]
#[command(name = "takagi", version, about = "Exact analysis of generalized Takagi functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Common {
    /// Coefficient scheme: all_plus, alt_m, alt_mk, block:P, half_split,
    /// neg_half_split, bernoulli:P[:SEED], file:PATH, neg:SPEC
    #[arg(long, default_value = "all_plus")]
    scheme: String,
    /// Seed for bernoulli schemes that do not name one
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Value at one point: exact at dyadic and supported thirds points,
    /// otherwise truncated with a certified bound
    Eval {
        #[command(flatten)]
        common: Common,
        /// Point as an exact fraction p/q
        #[arg(long)]
        t: String,
        /// Error tolerance for points without an exact route
        #[arg(long, default_value = "1/100000000")]
        tol: String,
    },
    /// Exact values on the grid {j / 2^N}
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: u32,
    },
    /// Grid maxima, minima and oscillation
    Extrema {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: u32,
    },
    /// Quadratic variation <x>^n_t
    Qv {
        #[command(flatten)]
        common: Common,
        /// Single partition level
        #[arg(long, default_value_t = 8, conflicts_with = "levels")]
        level: u32,
        /// Report every level up to this one
        #[arg(long)]
        levels: Option<u32>,
        #[arg(long, default_value = "1")]
        t: String,
        /// Tabulate t = k * stride / 2^level instead of a single t
        #[arg(long, conflicts_with_all = ["levels", "t"])]
        stride: Option<u64>,
    },
    /// Covariation <x,y>^n_t and <x+y>^n_t
    Cov {
        #[command(flatten)]
        common: Common,
        /// Scheme of the second function
        #[arg(long, default_value = "alt_m")]
        with: String,
        #[arg(long, default_value_t = 8, conflicts_with = "levels")]
        level: u32,
        #[arg(long)]
        levels: Option<u32>,
        #[arg(long, default_value = "1")]
        t: String,
    },
    /// Even and odd subsequences of <x̂+y> and <x̂,y> with distances to their limits
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 12)]
        levels: u32,
        #[arg(long, default_value = "1")]
        t: String,
    },
    /// Largest increments over grid pairs (t, t+h) against the modulus ω(h)
    Modulus {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: u32,
        /// Single step; every grid step when omitted
        #[arg(long)]
        h: Option<String>,
    },
    /// Exact increments along the witness sequences of the modulus
    Witness {
        #[command(flatten)]
        common: Common,
        /// part_a, part_b or both
        #[arg(long, default_value = "both")]
        kind: String,
        #[arg(long, default_value_t = 12)]
        levels: u32,
    },
    /// Residual of the pathwise Itô formula for a polynomial
    Ito {
        #[command(flatten)]
        common: Common,
        /// Coefficients, constant term first: 0,0,1 is u^2
        #[arg(long, default_value = "0,0,1")]
        poly: String,
        #[arg(long, default_value_t = 12, conflicts_with = "levels")]
        level: u32,
        #[arg(long)]
        levels: Option<u32>,
        #[arg(long, default_value = "1")]
        t: String,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Eval { common, .. }
            | Command::Sample { common, .. }
            | Command::Extrema { common, .. }
            | Command::Qv { common, .. }
            | Command::Cov { common, .. }
            | Command::Counterexample { common, .. }
            | Command::Modulus { common, .. }
            | Command::Witness { common, .. }
            | Command::Ito { common, .. } => common,
        }
    }
}

enum Failure {
    Config(String),
    Depth(String),
    Io(String),
}

impl From<TakagiError> for Failure {
    fn from(e: TakagiError) -> Self {
        match e {
            TakagiError::DepthExceeded { .. } => Failure::Depth(e.to_string()),
            TakagiError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Run<T> = Result<T, Failure>;

/// The rendered artifact in both formats; only the requested one is used.
struct Artifact {
    csv: String,
    json: Value,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn scheme(common: &Common, spec: &str) -> Run<TakagiFunction> {
    Ok(TakagiFunction::new(CoefficientScheme::parse_spec(spec, common.seed)?))
}

fn dyadic(s: &str) -> Run<DyadicRational> {
    Ok(s.parse::<DyadicRational>()?)
}

fn level_range(t: &DyadicRational, level: u32, levels: Option<u32>) -> Vec<u32> {
    match levels {
        Some(top) => (t.exponent().max(1)..=top).collect(),
        None => vec![level],
    }
}

fn series_row_csv(kind: &str, row: &QVRow) -> String {
    format!("{kind},{},{},{}", row.level, time_columns(&row.t), value_columns(&row.value))
}

fn eval(common: &Common, t: &str, tol: &str) -> Run<Artifact> {
    let x = scheme(common, &common.scheme)?;
    let t: Rational = parse_rational(t)?;
    let tol: Rational = parse_rational(tol)?;
    let (method, value, bound) = if let Some(d) = DyadicRational::from_rational(&t) {
        ("dyadic", x.eval_dyadic(&d)?, QuadValue::zero())
    } else {
        match x.eval_thirds(&t) {
            Ok(v) => ("thirds", v, QuadValue::zero()),
            Err(TakagiError::NotThirdsPoint(_) | TakagiError::UnsupportedFunction(_)) => {
                let a = x.eval_approx(&t, &tol)?;
                ("approx", a.value, a.bound)
            }
            Err(e) => return Err(e.into()),
        }
    };
    let csv = format!(
        "t_num,t_den,method,value_exact,{VALUE_HEADER},bound_decimal\n{},{method},{value},{},{}\n",
        rational_columns(&t),
        value_columns(&value),
        bound.to_decimal(DECIMAL_DIGITS)
    );
    let json = json!({
        "scheme": x.scheme().to_string(),
        "t": format_rational(&t),
        "method": method,
        "value": to_json(&value),
        "value_exact": value.to_string(),
        "bound": to_json(&bound),
    });
    Ok(Artifact { csv, json })
}

fn sample(common: &Common, grid: u32) -> Run<Artifact> {
    let x = scheme(common, &common.scheme)?;
    let path = GridPath::build(x.scheme(), grid, Execution::default())?;
    let mut csv = String::from("t_num,t_den,value_decimal,value_a_num,value_a_den,value_b_num,value_b_den\n");
    let mut rows = Vec::with_capacity(path.len());
    for j in 0..path.len() {
        let (t, v) = (path.point(j), path.value(j));
        let (a, b) = (v.rational_part(), v.sqrt2_part());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            time_columns(&t),
            v.to_decimal(DECIMAL_DIGITS),
            a.numer(),
            a.denom(),
            b.numer(),
            b.denom()
        );
        if common.format == Format::Json {
            rows.push(json!({ "t": to_json(&t), "value": to_json(&v) }));
        }
    }
    let json = json!({ "scheme": x.scheme().to_string(), "level": grid, "rows": rows });
    Ok(Artifact { csv, json })
}

fn extrema(common: &Common, grid: u32) -> Run<Artifact> {
    let x = scheme(common, &common.scheme)?;
    let r = grid_extrema(&x, grid)?;
    let mut csv = format!("kind,level,t_num,t_den,{VALUE_HEADER}\n");
    for t in &r.argmax {
        let _ = writeln!(csv, "max,{grid},{},{}", time_columns(t), value_columns(&r.max));
    }
    for t in &r.argmin {
        let _ = writeln!(csv, "min,{grid},{},{}", time_columns(t), value_columns(&r.min));
    }
    let _ = writeln!(csv, "oscillation,{grid},,,{}", value_columns(&r.oscillation));
    let mut json = to_json(&r);
    json["scheme"] = json!(x.scheme().to_string());
    Ok(Artifact { csv, json })
}

fn qv(common: &Common, level: u32, levels: Option<u32>, t: &str, stride: Option<u64>) -> Run<Artifact> {
    let x = scheme(common, &common.scheme)?;
    let series = match stride {
        Some(s) => qv_profile(&x, level, s)?,
        None => {
            let t = dyadic(t)?;
            let rows = level_range(&t, level, levels)
                .into_iter()
                .map(|n| {
                    Ok(QVRow {
                        level: n,
                        t: t.clone(),
                        value: qv_approx(&x, n, &t)?,
                        distance: None,
                    })
                })
                .collect::<Run<Vec<_>>>()?;
            QVSeries { kind: SeriesKind::Qv, rows }
        }
    };
    Ok(Artifact {
        csv: series.to_csv(),
        json: json!({ "scheme": x.scheme().to_string(), "series": to_json(&series) }),
    })
}

fn cov(common: &Common, with: &str, level: u32, levels: Option<u32>, t: &str) -> Run<Artifact> {
    let x = scheme(common, &common.scheme)?;
    let y = scheme(common, with)?;
    let t = dyadic(t)?;
    let mut cov = QVSeries { kind: SeriesKind::Covariation, rows: Vec::new() };
    let mut sum = QVSeries { kind: SeriesKind::QvOfSum, rows: Vec::new() };
    for n in level_range(&t, level, levels) {
        let s = level_sums(&x, &y, n, &t, Execution::default())?;
        let row = |value| QVRow { level: n, t: t.clone(), value, distance: None };
        cov.rows.push(row(s.cov));
        sum.rows.push(row(s.qv_sum));
    }
    let mut csv = format!("kind,level,t_num,t_den,{VALUE_HEADER}\n");
    for (kind, series) in [("covariation", &cov), ("qv_of_sum", &sum)] {
        for row in &series.rows {
            let _ = writeln!(csv, "{}", series_row_csv(kind, row));
        }
    }
    let json = json!({
        "x": x.scheme().to_string(),
        "y": y.scheme().to_string(),
        "covariation": to_json(&cov),
        "qv_of_sum": to_json(&sum),
    });
    Ok(Artifact { csv, json })
}

fn counterexample(levels: u32, t: &str) -> Run<Artifact> {
    let t = dyadic(t)?;
    let c = counterexample_series(levels, &t)?;
    Ok(Artifact { csv: c.to_csv(), json: to_json(&c) })
}

fn modulus(common: &Common, grid: u32, h: Option<&str>) -> Run<Artifact> {
    let x = scheme(common, &common.scheme)?;
    let reports = match h {
        Some(h) => vec![modulus_scan(&x, grid, &dyadic(h)?)?],
        None => modulus_scan_all(&x, grid, Execution::default())?,
    };
    let label = x.scheme().to_string();
    Ok(Artifact {
        csv: modulus_csv(&label, &reports),
        json: json!({ "scheme": label, "reports": to_json(&reports) }),
    })
}

fn witness(kind: &str, levels: u32) -> Run<Artifact> {
    let kinds = match kind {
        "both" => vec![WitnessKind::PartA, WitnessKind::PartB],
        k => vec![k.parse::<WitnessKind>()?],
    };
    let mut rows = Vec::new();
    for k in kinds {
        rows.extend(witness_ratios(k, 1..=levels)?);
    }
    Ok(Artifact { csv: witness_csv(&rows), json: to_json(&rows) })
}

fn ito(common: &Common, poly: &str, level: u32, levels: Option<u32>, t: &str) -> Run<Artifact> {
    let x = scheme(common, &common.scheme)?;
    let f: RationalPolynomial = poly.parse()?;
    let t = dyadic(t)?;
    let degree = f.degree().unwrap_or(0);
    let mut rows = Vec::new();
    for n in level_range(&t, level, levels) {
        let sums = PathPowerSums::compute(&x, n, &t, degree, Execution::default())?;
        rows.push(ResidualRow {
            level: n,
            t: t.clone(),
            mesh: takagi::exact::pow2(-(n as i64)),
            residual: sums.residual(&f)?,
        });
    }
    let mut csv = format!("kind,level,t_num,t_den,{VALUE_HEADER}\n");
    for r in &rows {
        let _ = writeln!(csv, "residual,{},{},{}", r.level, time_columns(&r.t), value_columns(&r.residual));
    }
    let json = json!({ "scheme": x.scheme().to_string(), "poly": f.to_string(), "rows": to_json(&rows) });
    Ok(Artifact { csv, json })
}

fn run(command: &Command) -> Run<Artifact> {
    match command {
        Command::Eval { common, t, tol } => eval(common, t, tol),
        Command::Sample { common, grid } => sample(common, *grid),
        Command::Extrema { common, grid } => extrema(common, *grid),
        Command::Qv { common, level, levels, t, stride } => qv(common, *level, *levels, t, *stride),
        Command::Cov { common, with, level, levels, t } => cov(common, with, *level, *levels, t),
        Command::Counterexample { levels, t, .. } => counterexample(*levels, t),
        Command::Modulus { common, grid, h } => modulus(common, *grid, h.as_deref()),
        Command::Witness { kind, levels, .. } => witness(kind, *levels),
        Command::Ito { common, poly, level, levels, t } => ito(common, poly, *level, *levels, t),
    }
}

fn configure_threads() -> Run<()> {
    let Ok(value) = std::env::var("TAKAGI_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("TAKAGI_THREADS must be a positive integer, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn write_artifact(common: &Common, artifact: Artifact) -> Run<()> {
    let text = match common.format {
        Format::Csv => artifact.csv,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&artifact.json).expect("serializable");
            s.push('\n');
            s
        }
    };
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|_| run(&cli.command))
        .and_then(|a| write_artifact(cli.command.common(), a));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Depth(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
