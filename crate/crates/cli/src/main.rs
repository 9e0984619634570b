use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mobishift_cli::reports::{
    fleet_report, fleet_report_table, regress_reader, regression_report_table, RegressOptions, DEFAULT_SEED,
};
use mobishift_core::api::{
    calculate_payload, case_report, factors_response, parse_calculation_request, sweep, to_payload, ApiError,
    CaseQuery, GridSpec, SweepKind, SweepQuery,
};
use mobishift_core::fleet::synthetic::{generate, write_csv, SyntheticFleetConfig};
use mobishift_core::fleet::{read_fleet_usage, FleetUsageEntry, Predictor};
use mobishift_core::render::{case_csv, case_table, factors_csv, factors_table, sweep_csv, sweep_table};
use mobishift_core::{Dataset, Error, FactorMode, Region};

#[derive(Parser)]
#[command(name = "mobishift", version, about = "Life-cycle emissions of car-sharing participation")]
struct Cli {
    /// Directory whose JSON files replace the bundled datasets.
    #[arg(long, global = true, env = "MOBISHIFT_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Per-PKT emission factors for a grid and LTM scenario.
    Factors {
        /// Grid label (NL, AB, CA, ...) or an intensity in g/kWh.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        scenario: Option<u8>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Reproduce a bundled case study.
    Case(CaseArgs),
    /// Personal what-if calculation from a request file (`-` for stdin).
    Calc {
        #[arg(long)]
        input: PathBuf,
    },
    /// Sensitivity sweep over bus occupancy or grid intensity.
    Sweep(SweepArgs),
    /// End-of-life logistic regression on an inspection CSV.
    Regress(RegressArgs),
    /// Car-sharing fleet mileage and private-car lifetime checks.
    Fleet {
        /// JSON array or CSV of city,total_vkt_annual,fleet_size.
        #[arg(long)]
        usage: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Write a seeded synthetic inspection CSV.
    Synth(SynthArgs),
    /// Run the JSON service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Static files (the calculator UI build) served for non-API paths.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseChoice {
    Nl,
    Sf,
    Calgary,
    All,
}

impl CaseChoice {
    fn regions(self) -> Vec<Region> {
        match self {
            CaseChoice::Nl => vec![Region::Netherlands],
            CaseChoice::Sf => vec![Region::SanFrancisco],
            CaseChoice::Calgary => vec![Region::Calgary],
            CaseChoice::All => Region::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct CaseArgs {
    #[arg(value_enum)]
    case: CaseChoice,
    #[arg(long)]
    scenario: Option<u8>,
    #[arg(long)]
    no_modal_shift: bool,
    #[arg(long, value_parser = parse_factor_mode)]
    factor_mode: Option<FactorMode>,
    /// Allow scenarios the case does not list.
    #[arg(long)]
    lenient: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(value_parser = parse_sweep_kind)]
    kind: SweepKind,
    #[arg(long, value_parser = parse_region)]
    case: Option<Region>,
    /// Comma-separated values; grid labels are accepted for the grid sweep.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    points: Vec<String>,
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Recompute the aggregate `other` factor at each point.
    #[arg(long)]
    recompute_other: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PredictorChoice {
    Age,
    Mileage,
    Both,
}

#[derive(Args)]
struct RegressArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, value_enum, default_value_t = PredictorChoice::Both)]
    predictor: PredictorChoice,
    #[arg(long, default_value_t = 2013)]
    reference_year: i32,
    #[arg(long, default_value_t = 2)]
    lookahead: i32,
    /// Seed for the class-balancing subsample.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    vehicles: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 2013)]
    reference_year: i32,
    #[arg(long, default_value_t = 2)]
    lookahead: i32,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_factor_mode(s: &str) -> Result<FactorMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sweep_kind(s: &str) -> Result<SweepKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_region(s: &str) -> Result<Region, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failures after argument parsing. Bad choices of case, scenario or grid are
/// usage errors; everything else is a data or domain error.
enum Failure {
    Engine(Error),
    Request(ApiError),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        let code = match self {
            Failure::Engine(e) => e.code(),
            Failure::Request(e) => e.code.as_str(),
        };
        match code {
            "unknown_case" | "unknown_scenario" | "unknown_grid" | "scenario_not_applicable" => 2,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Engine(e) => format!("{}: {e}", e.code()),
            Failure::Request(e) => e.to_string(),
        }
    }
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io { path: path.to_owned(), source }
}

fn read_input(path: &Path) -> Result<String, Error> {
    let mut s = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut s).map_err(|e| io_error(path, e))?;
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut s)).map_err(|e| io_error(path, e))?;
    }
    Ok(s)
}

fn load_usage(path: &Path) -> Result<Vec<FleetUsageEntry>, Error> {
    let text = read_input(path)?;
    let is_json =
        path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('[');
    if is_json {
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput { field: "usage".into(), message: e.to_string() })
    } else {
        read_fleet_usage(text.as_bytes())
    }
}

fn render<T>(format: Format, value: &T, table: impl Fn(&T) -> String, csv: impl Fn(&T) -> String) -> String
where
    T: serde::Serialize,
{
    match format {
        Format::Json => to_payload(value),
        Format::Table => table(value),
        Format::Csv => csv(value),
    }
}

fn no_csv(what: &str) -> Result<String, Failure> {
    Err(Failure::Engine(Error::InvalidInput {
        field: "format".into(),
        message: format!("{what} has no CSV rendering; use table or json"),
    }))
}

fn run(cli: Cli) -> Result<String, Failure> {
    if let Command::Synth(a) = &cli.command {
        return synth(a).map(|()| String::new());
    }
    if let Command::Serve { port, host, static_dir } = cli.command {
        let dataset = Dataset::load(cli.data_dir.as_deref())?;
        return serve(dataset, &host, port, static_dir).map(|()| String::new());
    }
    let dataset = Dataset::load(cli.data_dir.as_deref())?;
    let out = match cli.command {
        Command::Factors { grid, scenario, format } => {
            let grid = grid.map(|g| g.parse::<GridSpec>()).transpose()?;
            let f = factors_response(&dataset, grid.as_ref(), scenario)?;
            render(format, &f, factors_table, factors_csv)
        }
        Command::Case(a) => {
            let q = CaseQuery {
                scenario: a.scenario,
                no_modal_shift: a.no_modal_shift,
                factor_mode: a.factor_mode,
                lenient: a.lenient,
            };
            let reports =
                a.case.regions().into_iter().map(|r| case_report(&dataset, r, &q)).collect::<Result<Vec<_>, _>>()?;
            match (a.case, a.format) {
                // A single case prints exactly what GET /case-studies/{id} returns.
                (CaseChoice::All, Format::Json) => to_payload(&reports),
                (_, Format::Json) => to_payload(&reports[0]),
                (_, Format::Table) => reports.iter().map(case_table).collect::<Vec<_>>().join("\n"),
                (_, Format::Csv) => reports.iter().map(case_csv).collect::<Vec<_>>().join("\n"),
            }
        }
        Command::Calc { input } => {
            let body = read_input(&input)?;
            let req = parse_calculation_request(&body).map_err(Failure::Request)?;
            calculate_payload(&dataset, &req)?
        }
        Command::Sweep(a) => {
            let q = SweepQuery {
                case: a.case,
                points: a.points,
                min: a.min,
                max: a.max,
                steps: a.steps,
                recompute_other: a.recompute_other,
            };
            let s = sweep(&dataset, a.kind, &q)?;
            render(a.format, &s, sweep_table, sweep_csv)
        }
        Command::Regress(a) => {
            if a.format == Format::Csv {
                return no_csv("regress");
            }
            let predictors = match a.predictor {
                PredictorChoice::Age => vec![Predictor::Age],
                PredictorChoice::Mileage => vec![Predictor::Mileage],
                PredictorChoice::Both => vec![Predictor::Age, Predictor::Mileage],
            };
            let opts = RegressOptions {
                reference_year: a.reference_year,
                lookahead_years: a.lookahead,
                seed: a.seed,
                predictors,
            };
            let file = File::open(&a.csv).map_err(|e| io_error(&a.csv, e))?;
            let report = regress_reader(io::BufReader::new(file), &opts)?;
            render(a.format, &report, regression_report_table, |_| String::new())
        }
        Command::Fleet { usage, format } => {
            if format == Format::Csv {
                return no_csv("fleet");
            }
            let usage = usage.as_deref().map(load_usage).transpose()?;
            let report = fleet_report(&dataset, usage.as_deref())?;
            render(format, &report, fleet_report_table, |_| String::new())
        }
        Command::Synth(_) | Command::Serve { .. } => unreachable!("handled above"),
    };
    Ok(out)
}

fn synth(a: &SynthArgs) -> Result<(), Failure> {
    let cfg = SyntheticFleetConfig {
        vehicles: a.vehicles,
        seed: a.seed,
        reference_year: a.reference_year,
        lookahead_years: a.lookahead,
        ..SyntheticFleetConfig::default()
    };
    let fleet = generate(&cfg)?;
    match &a.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            write_csv(&fleet.records, io::BufWriter::new(file))?;
            eprintln!(
                "wrote {} records for {} vehicles ({} ELVs) to {}",
                fleet.records.len(),
                fleet.vehicles,
                fleet.planted_elvs.len(),
                path.display()
            );
        }
        None => write_csv(&fleet.records, io::stdout().lock())?,
    }
    Ok(())
}

fn serve(dataset: Dataset, host: &str, port: u16, static_dir: Option<PathBuf>) -> Result<(), Failure> {
    let addr = format!("{host}:{port}");
    let rt = tokio::runtime::Runtime::new().map_err(|e| io_error(Path::new(&addr), e))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| io_error(Path::new(&addr), e))?;
        eprintln!("listening on http://{}", listener.local_addr().map_err(|e| io_error(Path::new(&addr), e))?);
        let app = mobishift_cli::router(Arc::new(dataset), static_dir);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| io_error(Path::new(&addr), e))?;
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
