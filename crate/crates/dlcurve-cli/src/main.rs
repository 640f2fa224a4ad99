//! Command-line front end: run individual computations or the full
//! verification pipeline and emit human-readable tables or machine-readable
//! JSON reports.
//!
//! Exit codes: 0 all sections pass, 1 a computed claim was contradicted,
//! 2 invalid input, 3 a resource cap was hit on an explicit request.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod report;
mod sections;

use report::{Report, ReportParams};

#[derive(Parser)]
#[command(
    name = "dlcurve",
    version,
    about = "Point counts, L-polynomials, valuations and class group checks \
             for the curve uv^q - vu^q = 1"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point counts N_m = |Z(F_{q^m})| for m up to --ext
    Count(CommonOpts),
    /// Fit the L-polynomial over F_q and report p-rank and class number
    Lpoly(CommonOpts),
    /// Extremal classification over F_{q^2}
    Extremal(CommonOpts),
    /// Boundary valuations and principal divisors of the line pencil
    Valuations(CommonOpts),
    /// Structure of the boundary class group source
    Gamma(CommonOpts),
    /// Brute-force divisor class group oracle (small q)
    Classgroup(CommonOpts),
    /// Run every section and the p-torsion certificate
    Verify(CommonOpts),
}

impl Command {
    fn opts(&self) -> &CommonOpts {
        match self {
            Command::Count(o)
            | Command::Lpoly(o)
            | Command::Extremal(o)
            | Command::Valuations(o)
            | Command::Gamma(o)
            | Command::Classgroup(o)
            | Command::Verify(o) => o,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Lpoly(_) => "lpoly",
            Command::Extremal(_) => "extremal",
            Command::Valuations(_) => "valuations",
            Command::Gamma(_) => "gamma",
            Command::Classgroup(_) => "classgroup",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// The Deligne-Lusztig parameter q (a prime power)
    #[arg(long)]
    q: u64,
    /// Extension degree bound for point counts
    #[arg(long)]
    ext: Option<u32>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Also write the JSON report to this path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on scanned field sizes: q^m <= 2^this
    #[arg(long, default_value_t = 27)]
    max_field_log2: u32,
    /// Starting precision for series expansions
    #[arg(long)]
    precision: Option<usize>,
    /// Place-degree bound D for the class group oracle
    #[arg(long)]
    place_bound: Option<u32>,
    /// Form-degree bound E for the class group oracle
    #[arg(long)]
    form_bound: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error in {}: {}", e.location, e.source);
            ExitCode::from(e.exit_code)
        }
    }
}

/// An error annotated with the failing module and operation.
pub struct CliError {
    pub location: String,
    pub source: dlcurve::Error,
    pub exit_code: u8,
}

impl CliError {
    fn new(location: &str, source: dlcurve::Error) -> CliError {
        let exit_code = match &source {
            dlcurve::Error::FieldTooLarge(_) | dlcurve::Error::PrecisionError(_) => 3,
            _ => 2,
        };
        CliError {
            location: location.to_string(),
            source,
            exit_code,
        }
    }
}

fn run(command: &Command) -> Result<ExitCode, CliError> {
    let opts = command.opts();
    let ctx = dlcurve::CurveContext::with_max_field_log2(opts.q, opts.max_field_log2)
        .map_err(|e| CliError::new("curve::CurveContext::new", e))?;
    let params = ReportParams {
        command: command.name().to_string(),
        ext: opts.ext,
        max_field_log2: opts.max_field_log2,
        precision: opts.precision,
        place_bound: opts.place_bound,
        form_bound: opts.form_bound,
    };
    let mut report = Report::new(&ctx, params);
    match command {
        Command::Count(o) => {
            report.push(sections::counts(&ctx, o.ext, true)?);
        }
        Command::Lpoly(_) => {
            report.push(sections::l_polynomial(&ctx)?);
        }
        Command::Extremal(_) => {
            report.push(sections::extremal(&ctx)?);
        }
        Command::Valuations(o) => {
            report.push(sections::valuations(&ctx, o.precision)?);
        }
        Command::Gamma(_) => {
            report.push(sections::gamma(&ctx)?);
        }
        Command::Classgroup(o) => {
            report.push(sections::class_group(&ctx, o.place_bound, o.form_bound, true)?);
        }
        Command::Verify(o) => {
            report.push(sections::counts(&ctx, o.ext, false)?);
            report.push(sections::l_polynomial(&ctx)?);
            report.push(sections::extremal(&ctx)?);
            report.push(sections::valuations(&ctx, o.precision)?);
            report.push(sections::gamma(&ctx)?);
            report.push(sections::class_group(&ctx, o.place_bound, o.form_bound, false)?);
            report.push(sections::certificate(&ctx)?);
        }
    }
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    match opts.format {
        Format::Json => println!("{json}"),
        Format::Table => print!("{}", report.to_table()),
    }
    if let Some(path) = &opts.out {
        std::fs::write(path, format!("{json}\n")).map_err(|e| {
            CliError::new(
                "cli::write_report",
                dlcurve::Error::InvalidParameter(format!("cannot write {}: {e}", path.display())),
            )
        })?;
    }
    if report.all_pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
