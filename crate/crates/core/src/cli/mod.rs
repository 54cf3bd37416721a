//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 physics, configuration or I/O error.

mod figures;
mod jobs;
mod output;

pub use jobs::{CouplingReport, CouplingsJob, PulseJob, RunConfig, SpectrumJob};
pub use output::{digest, read_manifest, RunManifest};

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::propagation::{DEFAULT_MIN_TRANSMISSION, DEFAULT_SWEEP_FWHMS};
use crate::scheme::{ControlField, LevelConfig, Model, ModelSelection, SchemeConfig};
use crate::susceptibility::{DopplerConfig, FrequencyGrid};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "AUTLER_TOWNES_THREADS";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "autler-townes", version, about = "Dressed D1 susceptibility spectra and slow-light pulse propagation")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Probe susceptibility on a detuning grid.
    Spectrum(SpectrumArgs),
    /// Gaussian pulse through a slab, optionally searching the carrier detuning.
    Pulse(PulseArgs),
    /// Data bundles for the headline figures.
    Figures(FiguresArgs),
    /// Table of derived dipole amplitudes and control couplings.
    Couplings(CouplingsArgs),
    /// Re-run the configuration stored in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct SchemeArgs {
    /// Control detuning from the |m'> -> |n> transition, units of gamma [default: 0].
    #[arg(long)]
    delta: Option<f64>,
    /// Control Rabi frequency on |m'> -> |n>, units of gamma [default: 15].
    #[arg(long)]
    rabi: Option<f64>,
    /// Excited hyperfine splitting, units of gamma [default: 255.2].
    #[arg(long)]
    splitting: Option<f64>,
    /// `key = value` scheme configuration; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DopplerArgs {
    /// rms Doppler shift k.v in units of gamma; enables thermal averaging.
    #[arg(long)]
    doppler_width: Option<f64>,
    /// Gauss-Hermite order of the thermal average.
    #[arg(long, default_value_t = 64)]
    doppler_order: usize,
    /// Counterpropagating control and probe (default is copropagating).
    #[arg(long)]
    counterpropagating: bool,
}

impl DopplerArgs {
    fn resolve(&self) -> Option<DopplerConfig> {
        self.doppler_width.map(|w| DopplerConfig {
            enabled: true,
            thermal_width: w,
            quadrature_order: self.doppler_order,
            copropagating: !self.counterpropagating,
        })
    }
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SpectrumArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// full, lambda, both (paired columns) or off (control-free baseline) [default: full].
    #[arg(long, value_parser = parse_model_selection)]
    model: Option<ModelSelection>,
    /// Probe detuning grid `min:max:count` in units of gamma.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid, default_value = "-30:30:4001")]
    grid: FrequencyGrid,
    #[command(flatten)]
    doppler: DopplerArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct PulseArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// full or lambda [default: full].
    #[arg(long, value_parser = parse_model)]
    model: Option<Model>,
    /// Optical-depth parameter n0 (lambda/2pi)^2 L.
    #[arg(long, default_value_t = 25.0)]
    cooperativity: f64,
    /// Carrier detuning of the pulse, units of gamma.
    #[arg(long)]
    carrier: Option<f64>,
    /// Intensity FWHM of the Gaussian pulse, units of 1/gamma; searched when omitted.
    #[arg(long)]
    fwhm: Option<f64>,
    /// Search carriers `min:max[:count]` for the best proxy efficiency.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    optimize_carrier: Option<(f64, f64, usize)>,
    /// Smallest transmission accepted by the search.
    #[arg(long, default_value_t = DEFAULT_MIN_TRANSMISSION)]
    min_transmission: f64,
    #[command(flatten)]
    doppler: DopplerArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Figure {
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    #[value(name = "5")]
    Five,
    All,
}

#[derive(Args, Debug)]
struct FiguresArgs {
    #[arg(long, value_enum, default_value = "all")]
    which: Figure,
    /// Output directory; each figure gets a `figN` subdirectory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct CouplingsArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
    /// Also write `couplings.json` and a manifest into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_grid(s: &str) -> Result<FrequencyGrid, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_model_selection(s: &str) -> Result<ModelSelection, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<Model, String> {
    match s.parse::<ModelSelection>().map_err(|e| e.to_string())? {
        ModelSelection::Full => Ok(Model::Full),
        ModelSelection::Lambda => Ok(Model::Lambda),
        other => Err(format!("model {other} is not available for pulses (use full or lambda)")),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number {v:?}"));
    let (lo, hi, n) = match parts.as_slice() {
        [lo, hi] => (num(lo)?, num(hi)?, 71),
        [lo, hi, n] => (num(lo)?, num(hi)?, n.trim().parse().map_err(|_| format!("bad count {n:?}"))?),
        _ => return Err(format!("range {s:?} is not of the form min:max[:count]")),
    };
    if !(lo < hi) || n < 2 {
        return Err(format!("range {s:?} needs min < max and at least 2 points"));
    }
    Ok((lo, hi, n))
}

/// Scheme parameters with precedence: flags, then config file, then caesium defaults.
struct ResolvedScheme {
    level: LevelConfig,
    control: ControlField,
    model: Option<ModelSelection>,
}

fn resolve_scheme(args: &SchemeArgs) -> Result<ResolvedScheme, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
            SchemeConfig::parse(&text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?
        }
        None => SchemeConfig::default(),
    };
    let mut level = file.level_config(&LevelConfig::cesium_d1());
    if let Some(s) = args.splitting {
        level.hyperfine_splitting = s;
    }
    level.check().map_err(|e| CliError::Failure(e.to_string()))?;
    let detuning = args.delta.or(file.control_detuning_gamma).unwrap_or(0.0);
    let rabi = args.rabi.or(file.rabi_gamma).unwrap_or(15.0);
    let control = ControlField::new(detuning, rabi).map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(ResolvedScheme { level, control, model: file.model })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
}

fn spectrum_config(args: &SpectrumArgs) -> Result<RunConfig, CliError> {
    let r = resolve_scheme(&args.scheme)?;
    Ok(RunConfig::Spectrum(SpectrumJob {
        level: r.level,
        control: r.control,
        model: args.model.or(r.model).unwrap_or(ModelSelection::Full),
        grid: args.grid,
        doppler: args.doppler.resolve(),
    }))
}

fn pulse_config(args: &PulseArgs) -> Result<RunConfig, CliError> {
    let r = resolve_scheme(&args.scheme)?;
    let model = match (args.model, r.model) {
        (Some(m), _) => m,
        (None, Some(ModelSelection::Lambda)) => Model::Lambda,
        (None, Some(ModelSelection::Full)) | (None, None) => Model::Full,
        (None, Some(other)) => {
            return Err(CliError::Failure(format!("config model {other} is not available for pulses")));
        }
    };
    let carriers = match (args.optimize_carrier, args.carrier) {
        (Some((lo, hi, n)), _) => linspace(lo, hi, n),
        (None, Some(c)) => vec![c],
        // default search around the control-dressed resonance
        (None, None) => linspace(r.control.detuning - 5.0, r.control.detuning + 2.0, 71),
    };
    let fwhms = match args.fwhm {
        Some(f) => vec![f],
        None => DEFAULT_SWEEP_FWHMS.to_vec(),
    };
    Ok(RunConfig::Pulse(PulseJob {
        level: r.level,
        control: r.control,
        model,
        cooperativity: args.cooperativity,
        carriers,
        fwhms,
        min_transmission: args.min_transmission,
        doppler: args.doppler.resolve(),
    }))
}

/// Execute a resolved configuration into `dir` and write its manifest.
pub fn run_config(config: &RunConfig, dir: &Path) -> Result<PathBuf, CliError> {
    let files = config.execute(dir)?;
    output::write_manifest(dir, config, &files)
}

fn figure_ids(which: Figure) -> Vec<u8> {
    match which {
        Figure::Two => vec![2],
        Figure::Three => vec![3],
        Figure::Four => vec![4],
        Figure::Five => vec![5],
        Figure::All => figures::FIGURE_IDS.to_vec(),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum(args) => {
            let manifest = run_config(&spectrum_config(&args)?, &args.out)?;
            eprintln!("wrote {}", manifest.display());
        }
        Command::Pulse(args) => {
            let manifest = run_config(&pulse_config(&args)?, &args.out)?;
            eprintln!("wrote {}", manifest.display());
        }
        Command::Figures(args) => {
            for id in figure_ids(args.which) {
                let dir = args.out.join(format!("fig{id}"));
                let manifest = run_config(&RunConfig::Figure { id }, &dir)?;
                eprintln!("wrote {}", manifest.display());
            }
        }
        Command::Couplings(args) => {
            let r = resolve_scheme(&args.scheme)?;
            let job = CouplingsJob { level: r.level, control: r.control };
            let report = job.report()?;
            if args.json {
                print!("{}", String::from_utf8_lossy(&output::json(&report)?));
            } else {
                print!("{}", jobs::render_couplings(&report));
            }
            if let Some(dir) = args.out {
                run_config(&RunConfig::Couplings(job), &dir)?;
            }
        }
        Command::Replay(args) => {
            let manifest = read_manifest(&args.manifest)?;
            if digest(&manifest.config) != manifest.config_digest {
                return Err(CliError::Failure("manifest digest does not match its configuration".into()));
            }
            let path = run_config(&manifest.config, &args.out)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parse `args` (including the program name) and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|_| dispatch(cli)) {
        Ok(()) => 0,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) | CliError::Failure(m) => m,
            };
            eprintln!("error: {msg}");
            e.code()
        }
    }
}
