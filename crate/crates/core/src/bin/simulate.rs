//! Sweep driver: reproduces the communication and sensing parameter sweeps
//! from a declarative TOML configuration.
//!
//!     simulate comm  --config sweep.toml --out results/
//!     simulate radar --config sweep.toml --out results/ --workers 8
//!
//! See the repository README for the configuration schema.

use clap::{Args, Parser, Subcommand};
use isac_sim::error::{Result, SimError};
use isac_sim::frontend::{Engine, SamplingMode};
use isac_sim::harness::{
    report, run_comm, run_radar, CpChoice, RadarSpec, SeedSpec, SweepAxes, SweepSpec,
};
use isac_sim::io::{read_mask, read_trace, write_radar_image};
use isac_sim::jitter::PsdMask;
use isac_sim::ofdm::Modulation;
use isac_sim::radar::Target;
use isac_sim::window::WindowKind;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "simulate", about = "OFDM sampling-jitter sweep simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Communication sweep: EVM and SIR over the configured axes.
    Comm(RunArgs),
    /// Radar sweep: PPLR/PSLR/ISLR and image SIR over the configured axes.
    Radar(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Sweep configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON results and image dumps.
    #[arg(long)]
    out: PathBuf,
    /// Override the engine axis.
    #[arg(long, value_parser = parse_engine)]
    engine: Option<Engine>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Inject a DAC jitter trace from a binary trace file.
    #[arg(long)]
    dac_trace: Option<PathBuf>,
    /// Inject an ADC jitter trace from a binary trace file.
    #[arg(long)]
    adc_trace: Option<PathBuf>,
}

fn parse_engine(s: &str) -> std::result::Result<Engine, String> {
    match s {
        "farrow" => Ok(Engine::Farrow),
        "sinc-oracle" => Ok(Engine::SincOracle),
        other => Err(format!("unknown engine '{other}' (farrow|sinc-oracle)")),
    }
}

#[derive(Deserialize)]
struct ConfigFile {
    axes: AxesSection,
    seeds: SeedsSection,
    ofdm: OfdmSection,
    #[serde(default)]
    radar: Option<RadarSection>,
    /// Optional mask file path, relative to the config file.
    #[serde(default)]
    mask_file: Option<String>,
}

#[derive(Deserialize)]
struct AxesSection {
    mode: Vec<String>,
    engine: Vec<String>,
    rms_sj_s: Vec<f64>,
    eta: Vec<usize>,
    n: Vec<usize>,
    n_cp: Vec<String>,
    modulation: Vec<String>,
}

#[derive(Deserialize)]
struct SeedsSection {
    count: u64,
    base: u64,
}

#[derive(Deserialize)]
struct OfdmSection {
    m: usize,
    b_hz: f64,
    #[serde(default = "default_f_if")]
    f_if_hz: f64,
}

fn default_f_if() -> f64 {
    1e9
}

#[derive(Deserialize)]
struct RadarSection {
    targets: Vec<TargetSection>,
    window: String,
    #[serde(default = "default_zp_cuts")]
    zp_cuts: usize,
    #[serde(default = "default_zp_sir")]
    zp_sir: usize,
    #[serde(default)]
    write_images: bool,
}

#[derive(Deserialize)]
struct TargetSection {
    range_m: f64,
    doppler_norm: f64,
    #[serde(default = "default_amp")]
    amplitude: f64,
}

fn default_amp() -> f64 {
    1.0
}

fn default_zp_cuts() -> usize {
    8
}

fn default_zp_sir() -> usize {
    4
}

fn parse_mode(s: &str) -> Result<SamplingMode> {
    match s {
        "bb" => Ok(SamplingMode::Bb),
        "bp" => Ok(SamplingMode::Bp),
        other => Err(SimError::Config(format!("unknown mode '{other}' (bb|bp)"))),
    }
}

fn parse_cp(s: &str) -> Result<CpChoice> {
    match s {
        "0" => Ok(CpChoice::Zero),
        "N/4" => Ok(CpChoice::QuarterN),
        "N" => Ok(CpChoice::FullN),
        other => Err(SimError::Config(format!(
            "unknown n_cp '{other}' (0|N/4|N)"
        ))),
    }
}

fn parse_modulation(s: &str) -> Result<Modulation> {
    match s {
        "qpsk" => Ok(Modulation::Qpsk),
        "16qam" => Ok(Modulation::Qam16),
        "64qam" => Ok(Modulation::Qam64),
        "256qam" => Ok(Modulation::Qam256),
        other => Err(SimError::Config(format!(
            "unknown modulation '{other}' (qpsk|16qam|64qam|256qam)"
        ))),
    }
}

fn parse_window(s: &str) -> Result<WindowKind> {
    if s == "rect" {
        return Ok(WindowKind::Rectangular);
    }
    if let Some(db) = s.strip_prefix("cheb") {
        let sidelobe_db: f64 = db
            .parse()
            .map_err(|_| SimError::Config(format!("bad window '{s}'")))?;
        return Ok(WindowKind::Chebyshev { sidelobe_db });
    }
    Err(SimError::Config(format!(
        "unknown window '{s}' (rect|cheb<dB>)"
    )))
}

fn load_spec(args: &RunArgs) -> Result<(SweepSpec, Option<RadarSpec>)> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| SimError::io(args.config.display().to_string(), e))?;
    let file: ConfigFile =
        toml::from_str(&text).map_err(|e| SimError::Parse(format!("config: {e}")))?;

    let mask = match &file.mask_file {
        Some(rel) => {
            let base = args.config.parent().unwrap_or(Path::new("."));
            read_mask(&base.join(rel))?
        }
        None => PsdMask::lmx2594(),
    };

    let engines = match args.engine {
        Some(e) => vec![e],
        None => file
            .axes
            .engine
            .iter()
            .map(|s| parse_engine(s).map_err(SimError::Config))
            .collect::<Result<_>>()?,
    };

    let injected = match (&args.dac_trace, &args.adc_trace) {
        (Some(d), Some(a)) => Some((read_trace(d)?, read_trace(a)?)),
        (None, None) => None,
        _ => {
            return Err(SimError::Config(
                "--dac-trace and --adc-trace must be given together".into(),
            ))
        }
    };

    let spec = SweepSpec {
        axes: SweepAxes {
            mode: file
                .axes
                .mode
                .iter()
                .map(|s| parse_mode(s))
                .collect::<Result<_>>()?,
            engine: engines,
            rms_sj_s: file.axes.rms_sj_s.clone(),
            eta: file.axes.eta.clone(),
            n: file.axes.n.clone(),
            n_cp: file
                .axes
                .n_cp
                .iter()
                .map(|s| parse_cp(s))
                .collect::<Result<_>>()?,
            modulation: file
                .axes
                .modulation
                .iter()
                .map(|s| parse_modulation(s))
                .collect::<Result<_>>()?,
        },
        seeds: SeedSpec {
            count: file.seeds.count,
            base: args.seed.unwrap_or(file.seeds.base),
        },
        m: file.ofdm.m,
        b_hz: file.ofdm.b_hz,
        f_if_hz: file.ofdm.f_if_hz,
        mask,
        injected,
    };

    let radar = file
        .radar
        .map(|r| -> Result<RadarSpec> {
            Ok(RadarSpec {
                targets: r
                    .targets
                    .iter()
                    .map(|t| {
                        let mut tgt = Target::new(t.range_m, t.doppler_norm);
                        tgt.amplitude_re = t.amplitude;
                        tgt
                    })
                    .collect(),
                window: parse_window(&r.window)?,
                zp_cuts: r.zp_cuts,
                zp_sir: r.zp_sir,
                write_images: r.write_images,
            })
        })
        .transpose()?;

    Ok((spec, radar))
}

fn run(cli: Cli) -> Result<()> {
    let args = match &cli.command {
        Command::Comm(a) | Command::Radar(a) => a,
    };
    if let Some(workers) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| SimError::Config(format!("worker pool: {e}")))?;
    }
    let (spec, radar) = load_spec(args)?;
    match &cli.command {
        Command::Comm(_) => {
            let rows = run_comm(&spec)?;
            report(&rows, &args.out, "comm")?;
            eprintln!(
                "comm sweep: {} rows -> {}",
                rows.len(),
                args.out.display()
            );
        }
        Command::Radar(_) => {
            let radar = radar.ok_or_else(|| {
                SimError::Config("radar sweep needs a [radar] config section".into())
            })?;
            let outcomes = run_radar(&spec, &radar)?;
            let rows: Vec<_> = outcomes.iter().map(|o| o.row.clone()).collect();
            report(&rows, &args.out, "radar")?;
            if radar.write_images {
                let img_dir = args.out.join("images");
                std::fs::create_dir_all(&img_dir)
                    .map_err(|e| SimError::io(img_dir.display().to_string(), e))?;
                for o in &outcomes {
                    if let Some(img) = &o.image {
                        write_radar_image(&img_dir.join(&o.image_key), img)?;
                    }
                }
            }
            eprintln!(
                "radar sweep: {} rows -> {}",
                rows.len(),
                args.out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
