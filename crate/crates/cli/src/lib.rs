//! The `coach` command line: simulated deployments, the model suite, power
//! and SUS calculations, and the REST service.

pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use coach_core::{Dataset, DatasetError};
use coach_service::ServiceConfig;
use coach_sim::{run_cohort, SimError, TraineeParams};
use coach_stats::{chisq_power, chisq_power_n, fit_models, proportions_table, sus_composite, GroupBy, ModelId, ModelResult, PowerSpec, StatsError, SuiteReport};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::EmptyDataset
            | StatsError::BadDesign(_)
            | StatsError::BadItemCount(_)
            | StatsError::OutOfRange { .. }
            | StatsError::BadPowerSpec(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "coach", version, about = "Habit-coaching study toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a cohort and write the dataset as CSV.
    Simulate(SimulateArgs),
    /// Fit the mixed-model suite to a dataset.
    Fit(FitArgs),
    /// Sample size for a chi-square goodness-of-fit test.
    Power(PowerArgs),
    /// System Usability Scale score from ten item responses.
    Sus(SusArgs),
    /// Run the REST service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of trainees.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// RNG seed; defaults to the seed in the parameter set.
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file overriding trainee parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value = "dataset.csv")]
    pub out: PathBuf,
    /// Also write a bar chart of report proportions by condition.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV as written by `simulate` or the service export.
    pub data: PathBuf,
    /// Models to fit: `all` or any of I..VIII, comma separated.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    pub model: Vec<String>,
    /// JSON output; defaults to `<data stem>.fit.json` beside the data.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long)]
    pub w: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub df: u32,
    #[arg(long, default_value_t = 0.80)]
    pub power: f64,
}

#[derive(Debug, Args)]
pub struct SusArgs {
    /// Ten responses on the 1..5 scale, in questionnaire order.
    #[arg(required = true, num_args = 1..)]
    pub items: Vec<u8>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TOML config; `COACH_*` environment variables override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub bind: Option<std::net::SocketAddr>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Honor the X-Test-Clock header.
    #[arg(long)]
    pub test_clock: bool,
}

pub fn load_params(path: Option<&Path>) -> Result<TraineeParams, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(io_err(p))?;
            Ok(TraineeParams::from_toml_str(&text)?)
        }
        None => Ok(TraineeParams::default()),
    }
}

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(contents).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Dataset, CliError> {
    let params = load_params(args.params.as_deref())?;
    let seed = args.seed.unwrap_or(params.seed);
    let ds = run_cohort(args.n as usize, &params, seed)?;
    write_atomic(&args.out, ds.to_csv_string().as_bytes())?;
    if let Some(svg_path) = &args.svg {
        let table = proportions_table(&ds, GroupBy::Condition)?;
        let chart = svg::proportions_chart(&format!("Report proportions by condition (n={}, seed={seed})", args.n), &table);
        write_atomic(svg_path, chart.as_bytes())?;
    }
    Ok(ds)
}

pub fn parse_models(names: &[String]) -> Result<Vec<ModelId>, CliError> {
    if names.iter().any(|n| n.eq_ignore_ascii_case("all")) {
        return Ok(Vec::new());
    }
    names
        .iter()
        .map(|n| n.trim().parse::<ModelId>().map_err(|_| CliError::Usage(format!("unknown model {n:?}; use all or I..VIII"))))
        .collect()
}

pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    Ok(Dataset::read_csv(std::io::BufReader::new(file))?)
}

pub struct FitOutput {
    pub results: Vec<ModelResult>,
    pub json_path: PathBuf,
}

impl FitOutput {
    pub fn tables(&self) -> String {
        self.results.iter().map(ModelResult::to_table).collect::<Vec<_>>().join("\n")
    }

    /// The first fit that failed numerically, if any.
    pub fn failure(&self) -> Option<String> {
        self.results.iter().find_map(|m| {
            m.fits.iter().find_map(|f| f.result.as_ref().err().map(|e| format!("model {} / {}: {e}", m.spec.key, f.response.name())))
        })
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<FitOutput, CliError> {
    let models = parse_models(&args.model)?;
    let ds = read_dataset(&args.data)?;
    let results = fit_models(&ds, &models)?;
    let json_path = args.json.clone().unwrap_or_else(|| {
        let stem = args.data.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
        args.data.with_file_name(format!("{stem}.fit.json"))
    });
    let json = serde_json::to_string_pretty(&SuiteReport(&results)).expect("fit results serialize");
    write_atomic(&json_path, json.as_bytes())?;
    Ok(FitOutput { results, json_path })
}

pub fn cmd_power(args: &PowerArgs) -> Result<String, CliError> {
    let spec = PowerSpec { w: args.w, alpha: args.alpha, df: args.df, power: args.power };
    let n = chisq_power_n(&spec)?;
    let achieved = chisq_power(spec.w, spec.alpha, spec.df, n);
    Ok(format!(
        "n = {n}\nassumed power = {:.2} (achieved {achieved:.4}) for w = {}, alpha = {}, df = {}",
        spec.power, spec.w, spec.alpha, spec.df
    ))
}

pub fn cmd_sus(args: &SusArgs) -> Result<f64, CliError> {
    Ok(sus_composite(&args.items)?)
}

pub fn serve_config(args: &ServeArgs) -> Result<ServiceConfig, CliError> {
    let mut cfg = ServiceConfig::load(args.config.as_deref()).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(b) = args.bind {
        cfg.bind = b;
    }
    if let Some(d) = &args.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(c) = &args.catalog {
        cfg.catalog_path = Some(c.clone());
    }
    cfg.test_mode |= args.test_clock;
    Ok(cfg)
}

pub fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let cfg = serve_config(args)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    rt.block_on(coach_service::serve(cfg)).map_err(|e| match e {
        coach_service::ServiceError::Io(e) => CliError::Io(e.to_string()),
        other => CliError::Usage(other.to_string()),
    })
}

/// Runs one command, printing its output. Numerical failures in `fit` still
/// print the tables before reporting the error.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => {
            let ds = cmd_simulate(&a)?;
            println!("wrote {} rows to {}", ds.len(), a.out.display());
        }
        Command::Fit(a) => {
            let out = cmd_fit(&a)?;
            println!("{}", out.tables());
            println!("wrote {}", out.json_path.display());
            if let Some(msg) = out.failure() {
                return Err(CliError::Numerical(msg));
            }
        }
        Command::Power(a) => println!("{}", cmd_power(&a)?),
        Command::Sus(a) => println!("{:.1}", cmd_sus(&a)?),
        Command::Serve(a) => cmd_serve(&a)?,
    }
    Ok(())
}
