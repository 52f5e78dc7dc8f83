use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graphsteer::states::DEFAULT_SQUEEZING;
use graphsteer::sweep::{
    self, default_quantities, parse_quantities, Axis, OutputFormat, SweepConfig, DEFAULT_POINTS,
    QUANTITY_GRAMMAR,
};
use graphsteer::FamilyKind;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "graphsteer",
    version,
    about = "EPR steering in Gaussian weighted graph states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate steering, monogamy, nullifier and entanglement quantities
    /// over a grid of the free transmittance or weight factor.
    Sweep(SweepArgs),
    /// Check closed-form equivalence, purity, nullifiers, monogamy and
    /// symmetry invariants over a grid.
    Verify(VerifyArgs),
    /// Locate zero crossings and one-way windows of every pairwise and
    /// one-vs-two steering quantity.
    Boundaries(BoundaryArgs),
    /// Dump the covariance matrix, weights, nullifiers and symplectic
    /// eigenvalues of one family member.
    State(StateArgs),
}

#[derive(Args)]
struct Common {
    /// State family: tripartite | fourmode
    #[arg(long)]
    family: String,
    /// Squeezing parameter r of every input
    #[arg(long = "r", default_value_t = DEFAULT_SQUEEZING)]
    r: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Sweep axis: t2 | weight (C_BC for tripartite, C_A for fourmode)
    #[arg(long, default_value = "weight")]
    axis: String,
    /// Inclusive range LO:HI on the axis; clamped to T2 in [0.001, 0.999]
    #[arg(long)]
    range: Option<String>,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Comma-separated quantities: G(X->Y), MONO(k|i|j), MONOIN(k|i|j),
    /// NULL(a), LN(X|Y); mode sets are letters, e.g. G(A->CD).
    /// Defaults to every pairwise and one-vs-rest steering value, plus the
    /// A/B versus CD groupings for fourmode.
    #[arg(long)]
    quantities: Option<String>,
    /// Output format: csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Weight range LO:HI; defaults to the family's published range
    #[arg(long)]
    range: Option<String>,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
}

#[derive(Args)]
struct BoundaryArgs {
    #[command(flatten)]
    common: Common,
    /// Scan points along the weight axis before bisection
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StateArgs {
    #[command(flatten)]
    common: Common,
    /// Free transmittance T2 in (0, 1)
    #[arg(long, default_value_t = 0.5)]
    t2: f64,
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Io(String),
    Verify,
}

impl From<graphsteer::Error> for Failure {
    fn from(e: graphsteer::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Usage(format!("invalid range {s:?}; expected LO:HI"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn with_output<F>(path: Option<&PathBuf>, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let io_err = |e: io::Error| {
        Failure::Io(match path {
            Some(p) => format!("{}: {e}", p.display()),
            None => e.to_string(),
        })
    };
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(io_err)?);
            write(&mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            match write(&mut w).and_then(|()| w.flush()) {
                // Closed by a downstream `head` or similar.
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(io_err),
            }
        }
    }
}

fn family(c: &Common) -> Result<FamilyKind, Failure> {
    Ok(c.family.parse::<FamilyKind>()?)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let kind = family(&args.common)?;
    let quantities = match &args.quantities {
        Some(list) => parse_quantities(list)?,
        None => default_quantities(kind),
    };
    let config = SweepConfig {
        family: kind,
        axis: args.axis.parse::<Axis>()?,
        range: args.range.as_deref().map(parse_range).transpose()?,
        points: args.points,
        r: args.common.r,
        quantities,
        format: args.format.parse::<OutputFormat>()?,
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(format!("{e}\nvalid quantity names: {QUANTITY_GRAMMAR}")))?;
    let data = sweep::run_sweep(&config)?;
    with_output(args.out.as_ref(), |w| match config.format {
        OutputFormat::Csv => sweep::write_csv(w, &data),
        OutputFormat::Json => sweep::write_json(w, &config, &data),
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let kind = family(&args.common)?;
    let range = args.range.as_deref().map(parse_range).transpose()?;
    let report = sweep::run_verify(kind, args.common.r, range, args.points)?;
    with_output(None, |w| writeln!(w, "{report}"))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn cmd_boundaries(args: BoundaryArgs) -> Result<(), Failure> {
    let kind = family(&args.common)?;
    let format = args.format.parse::<OutputFormat>()?;
    let rows = sweep::run_boundaries(kind, args.common.r, args.points)?;
    with_output(args.out.as_ref(), |w| {
        sweep::write_boundaries(w, &rows, format)
    })
}

fn cmd_state(args: StateArgs) -> Result<(), Failure> {
    let kind = family(&args.common)?;
    let format = args.format.parse::<OutputFormat>()?;
    let dump = sweep::state_dump(kind, args.t2, args.common.r)?;
    with_output(args.out.as_ref(), |w| sweep::write_state(w, &dump, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Boundaries(a) => cmd_boundaries(a),
        Command::State(a) => cmd_state(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY_FAILED),
    }
}
