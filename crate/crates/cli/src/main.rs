//! `parrondo`: simulate, classify and map greedy collective Parrondo games.
//!
//! Exit codes: 0 success, 2 invalid input, 3 no recognizable behaviour
//! within the step budget, 4 a boundary sign that cannot be decided.

mod grid;

use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use parrondo::classifier::{boundary_root, classify, critical_values, Classification, Curve, Regime};
use parrondo::dynamics::{detect_with, iterate, DetectOptions};
use parrondo::model::stationary_exact;
use parrondo::numerics::{format_rational, format_real, parse_rational};
use parrondo::oracle::sweep;
use parrondo::profit::{mu, mu_b_forever_exact};
use parrondo::rug::Rational;
use parrondo::{BehaviorKind, DetectedBehavior, Error, Params, PrecisionConfig, SimplexPoint, Trajectory};

use grid::{Point, Range};

#[derive(Parser)]
#[command(name = "parrondo", version, about = "Greedy collective Parrondo games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the greedy map and report the detected behaviour.
    Simulate(SimulateArgs),
    /// Predict the asymptotic behaviour at (rho, phi).
    Classify(ParamArgs),
    /// Locate the phi root of one boundary curve.
    Boundary(BoundaryArgs),
    /// The nine critical values at rho = 1/3.
    #[command(name = "table2")]
    CriticalValues(CriticalValuesArgs),
    /// Classification over a (rho, phi) grid.
    Regionmap(RegionmapArgs),
    /// Closed-form average profit per predicted behaviour.
    Profit(ProfitArgs),
    /// Random starts at each grid point checked against the prediction.
    Sweep(SweepArgs),
}

/// `--bits 53` selects IEEE double emulation, for reproducing roundoff
/// artefacts; otherwise at least 64 bits are required.
fn precision(bits: u32) -> Result<PrecisionConfig, Error> {
    if bits == 53 {
        Ok(PrecisionConfig::legacy_double())
    } else {
        PrecisionConfig::new(bits)
    }
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct ParamArgs {
    /// Game B bias, a fraction like 1/3 or a decimal.
    #[arg(long, value_parser = rational)]
    rho: Rational,
    /// Fraction of the population playing each turn.
    #[arg(long, value_parser = rational)]
    phi: Rational,
    /// Working mantissa bits.
    #[arg(long, default_value_t = 256)]
    bits: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

impl ParamArgs {
    fn params(&self) -> Result<Params, Error> {
        Params::new(self.rho.clone(), self.phi.clone(), precision(self.bits)?)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = rational)]
    rho: Rational,
    #[arg(long, value_parser = rational)]
    phi: Rational,
    #[arg(long, value_parser = rational)]
    x0: Rational,
    #[arg(long, value_parser = rational)]
    x1: Rational,
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    #[arg(long, default_value_t = 256)]
    bits: u32,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long, value_parser = rational)]
    rho: Rational,
    /// G:n:m, E:n, E:n:m, H:n:m or b:n.
    #[arg(long)]
    curve: String,
    #[arg(long, default_value_t = 18)]
    digits: usize,
    #[arg(long, default_value_t = 256)]
    bits: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct CriticalValuesArgs {
    #[arg(long, default_value_t = 18)]
    digits: usize,
    #[arg(long, default_value_t = 256)]
    bits: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct RegionmapArgs {
    /// a:b:steps
    #[arg(long)]
    rho_range: Range,
    /// a:b:steps
    #[arg(long)]
    phi_range: Range,
    #[arg(long, default_value_t = 256)]
    bits: u32,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ProfitArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Decimal places printed.
    #[arg(long, default_value_t = 30)]
    digits: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// A grid point rho,phi; repeatable.
    #[arg(long = "point")]
    points: Vec<Point>,
    #[arg(long, requires = "phi_range")]
    rho_range: Option<Range>,
    #[arg(long, requires = "rho_range")]
    phi_range: Option<Range>,
    #[arg(long, default_value_t = 1000)]
    starts: usize,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    bits: u32,
}

enum Failure {
    Core(Error),
    Usage(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Undetected { .. } | Error::UnrecognizedCycle { .. } => 3,
        Error::BoundaryAmbiguous { .. } | Error::NoSignChange { .. } | Error::PredicateAmbiguous(_) => 4,
        Error::Parse { .. }
        | Error::InvalidParams(_)
        | Error::InvalidState(_)
        | Error::InvalidPrecision(_)
        | Error::BadIndex { .. }
        | Error::Precondition(_) => 2,
        _ => 1,
    }
}

type Outcome = Result<u8, Failure>;
type Out<'a> = BufWriter<io::StdoutLock<'a>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, &mut out),
        Command::Classify(a) => cmd_classify(a, &mut out),
        Command::Boundary(a) => boundary(a, &mut out),
        Command::CriticalValues(a) => cmd_critical_values(a, &mut out),
        Command::Regionmap(a) => regionmap(a, &mut out),
        Command::Profit(a) => profit(a, &mut out),
        Command::Sweep(a) => cmd_sweep(a, &mut out),
    };
    let flushed = out.flush();
    let code = match result.and_then(|code| flushed.map(|_| code).map_err(Failure::Io)) {
        Ok(code) => code,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            1
        }
    };
    ExitCode::from(code)
}

fn behaviour_label(d: &DetectedBehavior) -> String {
    match d.kind {
        BehaviorKind::BForeverEquilibrium => "B-forever equilibrium".into(),
        BehaviorKind::Cycle => format!("cycle {}", d.pattern),
    }
}

fn triple(x: &SimplexPoint, places: usize) -> [String; 3] {
    x.coords().clone().map(|c| format_real(&c, places))
}

fn simulate(a: SimulateArgs, out: &mut Out) -> Outcome {
    let prec = precision(a.bits)?;
    let params = Params::new(a.rho, a.phi, prec.clone())?;
    let start = SimplexPoint::from_x0_x1(prec.real(&a.x0), prec.real(&a.x1))?;
    let opts = DetectOptions {
        budget: a.steps,
        ..Default::default()
    };
    let (traj, found): (Trajectory, Result<DetectedBehavior, Error>) = match detect_with(&start, &params, &opts) {
        Ok((d, t)) => (t, Ok(d)),
        Err(e @ (Error::Undetected { .. } | Error::UnrecognizedCycle { .. })) => {
            (iterate(&start, &params, a.steps), Err(e))
        }
        Err(e) => return Err(e.into()),
    };
    let places = prec.decimal_digits();
    let label = match &found {
        Ok(d) => behaviour_label(d),
        Err(e) => format!("undetected: {e}"),
    };
    match a.format {
        Format::Json => {
            let rows: Vec<_> = (0..traj.games.len())
                .map(|t| {
                    let [x0, x1, x2] = triple(&traj.states[t], places);
                    json!({"t": t, "game": traj.games[t], "x0": x0, "x1": x1, "x2": x2})
                })
                .collect();
            let behavior = match &found {
                Ok(d) => json!({
                    "label": label,
                    "pattern": d.pattern,
                    "period": d.pattern.period(),
                    "transient": d.transient_length,
                    "steps": d.steps,
                    "cycle_states": d.cycle_states.iter().map(|x| triple(x, places)).collect::<Vec<_>>(),
                }),
                Err(_) => json!({"label": label}),
            };
            serde_json::to_writer_pretty(&mut *out, &json!({"rows": rows, "behavior": behavior}))?;
            writeln!(out)?;
        }
        _ => {
            writeln!(out, "t,game,x0,x1,x2")?;
            for t in 0..traj.games.len() {
                let [x0, x1, x2] = triple(&traj.states[t], places);
                writeln!(out, "{t},{},{x0},{x1},{x2}", traj.games[t])?;
            }
            writeln!(out, "# {label}")?;
            if let Ok(d) = &found {
                writeln!(out, "# period {}", d.pattern.period())?;
                writeln!(out, "# transient {}", d.transient_length)?;
                writeln!(out, "# steps {}", d.steps)?;
            }
        }
    }
    match found {
        Ok(_) => Ok(0),
        Err(e) => Err(e.into()),
    }
}

fn exact_pi(rho: &Rational) -> String {
    let [a, b, c] = stationary_exact(rho);
    format!("({a},{b},{c})")
}

fn regime_line(c: &Classification, rho: &Rational) -> String {
    match c.regime {
        Regime::GasEquilibrium => format!("{} pi={}", c.regime, exact_pi(rho)),
        Regime::CycleSet => format!("{} cycles={}", c.regime, c.cycles_label()),
    }
}

fn cmd_classify(a: ParamArgs, out: &mut Out) -> Outcome {
    let params = a.params()?;
    let c = classify(&params)?;
    if let Format::Json = a.format {
        let value = json!({
            "rho": format_rational(&a.rho, 40),
            "phi": format_rational(&a.phi, 40),
            "pi": stationary_exact(&a.rho).map(|r| r.to_string()),
            "classification": c,
        });
        serde_json::to_writer_pretty(&mut *out, &value)?;
        writeln!(out)?;
        return Ok(0);
    }
    writeln!(out, "{}", regime_line(&c, &a.rho))?;
    writeln!(out, "phi-case {}", c.phi_case)?;
    if c.unstable_equilibrium {
        writeln!(out, "unstable-equilibrium pi={}", exact_pi(&a.rho))?;
    }
    if let Some(s) = c.s {
        writeln!(out, "s={s}")?;
    }
    if !c.band.is_empty() {
        let tests: Vec<String> = c.band.iter().map(|t| format!("{}{}", t.curve, t.sign)).collect();
        writeln!(out, "band {}", tests.join(" "))?;
    }
    if let Some(r) = c.region12 {
        writeln!(out, "region12={r}")?;
    }
    Ok(0)
}

fn boundary(a: BoundaryArgs, out: &mut Out) -> Outcome {
    let curve: Curve = a.curve.parse()?;
    let root = boundary_root(curve, &a.rho, a.digits, a.bits)?;
    if let Format::Json = a.format {
        serde_json::to_writer_pretty(&mut *out, &root)?;
        writeln!(out)?;
    } else {
        writeln!(out, "{} {} rounded={}", root.curve, root.truncated, root.rounded)?;
    }
    Ok(0)
}

fn cmd_critical_values(a: CriticalValuesArgs, out: &mut Out) -> Outcome {
    let rows = critical_values(a.digits, a.bits)?;
    if let Format::Json = a.format {
        serde_json::to_writer_pretty(&mut *out, &rows)?;
        writeln!(out)?;
        return Ok(0);
    }
    for r in rows {
        writeln!(
            out,
            "{} {} rounded={} above={}",
            r.curve,
            r.truncated,
            r.rounded,
            r.forms.replace(", ", ";")
        )?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct MapRow {
    rho: String,
    phi: String,
    regime: String,
    cycles: String,
    region12: String,
}

fn map_row(rho: &Rational, phi: &Rational, prec: &PrecisionConfig) -> (MapRow, Option<Error>) {
    let mut row = MapRow {
        rho: format_rational(rho, 40),
        phi: format_rational(phi, 40),
        regime: String::new(),
        cycles: String::new(),
        region12: String::new(),
    };
    let c = Params::new(rho.clone(), phi.clone(), prec.clone()).and_then(|p| classify(&p));
    match c {
        Ok(c) => {
            row.regime = c.regime.to_string();
            row.cycles = match c.regime {
                Regime::GasEquilibrium => "B-forever".into(),
                Regime::CycleSet => c.cycles_label(),
            };
            row.region12 = c.region12.map(|r| r.to_string()).unwrap_or_default();
            (row, None)
        }
        Err(e) => {
            row.regime = "undecided".into();
            (row, Some(e))
        }
    }
}

fn regionmap(a: RegionmapArgs, out: &mut Out) -> Outcome {
    let prec = precision(a.bits)?;
    let grid = grid::product(&a.rho_range, &a.phi_range);
    for (rho, phi) in &grid {
        Params::new(rho.clone(), phi.clone(), prec.clone())?;
    }
    let rows: Vec<(MapRow, Option<Error>)> = grid.par_iter().map(|(r, p)| map_row(r, p, &prec)).collect();
    let mut code = 0;
    for (row, err) in &rows {
        if let Some(e) = err {
            eprintln!("rho={} phi={}: {e}", row.rho, row.phi);
            code = code.max(error_code(e));
        }
    }
    if let Format::Json = a.format {
        let rows: Vec<&MapRow> = rows.iter().map(|(r, _)| r).collect();
        serde_json::to_writer_pretty(&mut *out, &rows)?;
        writeln!(out)?;
    } else {
        let mut w = csv::Writer::from_writer(&mut *out);
        for (r, _) in &rows {
            w.serialize(r).map_err(|e| io::Error::other(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(code)
}

fn profit(a: ProfitArgs, out: &mut Out) -> Outcome {
    let params = a.params.params()?;
    let c = classify(&params)?;
    let mut lines: Vec<(String, String)> = Vec::new();
    match c.regime {
        Regime::GasEquilibrium => {
            let exact = mu_b_forever_exact(params.rho(), params.phi());
            let value = if exact == 0 {
                "0".to_string()
            } else {
                format_rational(&exact, a.digits)
            };
            lines.push((String::new(), value));
        }
        Regime::CycleSet => {
            for &pattern in &c.cycles {
                lines.push((pattern.to_string(), format_real(&mu(pattern, &params)?, a.digits)));
            }
        }
    }
    if let Format::Json = a.params.format {
        let value: Vec<_> = lines
            .iter()
            .map(|(p, v)| json!({"behavior": if p.is_empty() { "B-forever" } else { p.as_str() }, "mu": v}))
            .collect();
        serde_json::to_writer_pretty(&mut *out, &value)?;
        writeln!(out)?;
        return Ok(0);
    }
    for (pattern, value) in lines {
        if pattern.is_empty() {
            writeln!(out, "mu={value}")?;
        } else {
            writeln!(out, "{pattern} mu={value}")?;
        }
    }
    Ok(0)
}

fn cmd_sweep(a: SweepArgs, out: &mut Out) -> Outcome {
    let mut grid: Vec<(Rational, Rational)> = a.points.into_iter().map(|Point(r, p)| (r, p)).collect();
    if let (Some(r), Some(p)) = (&a.rho_range, &a.phi_range) {
        grid.extend(grid::product(r, p));
    }
    if grid.is_empty() {
        return Err(Failure::Usage(
            "give at least one --point or a --rho-range/--phi-range pair".into(),
        ));
    }
    let prec = precision(a.bits)?;
    let summary = sweep(&grid, a.starts, a.budget, a.seed, &prec)?;
    eprintln!(
        "{} agreements, {} disagreements, {} undetected",
        summary.agreements, summary.disagreements, summary.undetected
    );
    serde_json::to_writer_pretty(&mut *out, &summary)?;
    writeln!(out)?;
    Ok(0)
}
