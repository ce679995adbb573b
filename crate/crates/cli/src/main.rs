use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pskpam::analytic::{AnalyticError, QuadratureSpec, SubsetScaling};
use pskpam::channel::{ChannelError, ChannelParams};
use pskpam::constellation::{self, ConstellationError, Family, NormMode};
use pskpam::design::{optimize_kn, DesignError, DesignOptions, ObjectiveMode};
use pskpam::harness::{
    analytic_metadata, bundled_figure, config_hash, emit_plot, format_analytic_csv,
    format_constellation_csv, format_design_csv, format_ser_csv, parse_snr_grid, read_curve_csv,
    reproduce, run_analytic_curve, ser_metadata, write_file, ConstellationSpec, CurveMode,
    DecoderOptions, Experiment, ExperimentConfig, FigureConfig, HarnessError, OutputPaths,
    PlotOptions, Receiver, RunMetadata, Series,
};

#[derive(Parser)]
#[command(
    name = "pskpam",
    version,
    about = "PSK-PAM constellations under bounded phase error"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the points of a constellation as CSV.
    Constellation(ConstellationArgs),
    /// Monte Carlo symbol error rate over an SNR grid.
    Ser(SerArgs),
    /// Analytic union-bound or dominant-term curve over an SNR grid.
    Analytic(AnalyticArgs),
    /// Pick the (K, N) factorization of M minimizing the dominant error term.
    Design(DesignArgs),
    /// Render CSV curves into one SVG.
    Plot(PlotArgs),
    /// Regenerate a bundled figure (fig3 .. fig7).
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long, default_value = "psk-pam")]
    family: Family,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value = "mean")]
    norm: NormMode,
}

#[derive(Args)]
struct GridArgs {
    /// JSON experiment config; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Phase-error bound `a` in radians.
    #[arg(long, allow_hyphen_values = true)]
    phase_bound: Option<f64>,
    /// `start:step:stop` or a comma-separated list, in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reestimate: Option<OnOff>,
    #[arg(long)]
    receiver: Option<Receiver>,
}

#[derive(Args)]
struct ConstellationArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SerArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// CSV output (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also plot the curve to this SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "union")]
    mode: CurveMode,
    #[arg(long, default_value = "default")]
    objective: ObjectiveMode,
    /// Ray gain used by the union bound.
    #[arg(long, default_value = "derived")]
    subset_scaling: SubsetScaling,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    m: usize,
    #[arg(long, allow_hyphen_values = true)]
    phase_bound: f64,
    /// Single SNR in dB at which candidates are compared.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long, default_value = "mean")]
    norm: NormMode,
    #[arg(long, default_value = "default")]
    objective: ObjectiveMode,
    /// Rank by the ring-averaged union bound instead of the dominant terms.
    #[arg(long)]
    full_union: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// `ser` or `analytic` CSV files, one series each.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    title: Option<String>,
    #[arg(long, default_value_t = 1e-7)]
    log_floor: f64,
}

#[derive(Args)]
struct ReproduceArgs {
    figure: String,
    /// Output directory (default `out/<figure>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override trials per point of every simulated series.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Figure config to use instead of the bundled one.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn build_config(grid: &GridArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &grid.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let Some(m) = grid.shape.m else {
                bail!(HarnessError::Config(
                    "either --config or --m is required".into()
                ));
            };
            ExperimentConfig {
                name: None,
                constellation: ConstellationSpec {
                    family: grid.shape.family,
                    m,
                    k: grid.shape.k,
                    norm: grid.shape.norm,
                },
                phase_bound: 0.0,
                snr_db: Vec::new(),
                trials_per_point: 100_000,
                master_seed: 1,
                decoder: DecoderOptions::default(),
                output: OutputPaths::default(),
            }
        }
    };
    if grid.config.is_some() && grid.shape.m.is_some() {
        cfg.constellation = ConstellationSpec {
            family: grid.shape.family,
            m: grid.shape.m.unwrap_or(cfg.constellation.m),
            k: grid.shape.k,
            norm: grid.shape.norm,
        };
    }
    if let Some(a) = grid.phase_bound {
        cfg.phase_bound = a;
    }
    if let Some(text) = &grid.snr_db {
        cfg.snr_db = parse_snr_grid(text).map_err(HarnessError::Config)?;
    }
    if let Some(t) = grid.trials {
        cfg.trials_per_point = t;
    }
    if let Some(s) = grid.seed {
        cfg.master_seed = s;
    }
    if let Some(r) = grid.reestimate {
        cfg.decoder.allow_reestimate = matches!(r, OnOff::On);
    }
    if let Some(r) = grid.receiver {
        cfg.decoder.receiver = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_constellation(args: &ConstellationArgs) -> Result<()> {
    let Some(m) = args.shape.m else {
        bail!(HarnessError::Config("--m is required".into()));
    };
    let c = constellation::build(args.shape.family, m, args.shape.k, args.shape.norm)?;
    let meta = RunMetadata::new("constellation")
        .with("constellation", c.label())
        .with("geometry", c.geometry_note())
        .with("norm_mode", c.norm_mode())
        .with("radius", c.radius());
    emit(args.out.as_deref(), &format_constellation_csv(&meta, &c))
}

fn cmd_ser(args: &SerArgs) -> Result<()> {
    let cfg = build_config(&args.grid)?;
    let exp = Experiment::new(cfg.clone())?;
    let rows = exp.run_sweep()?;
    let meta = ser_metadata(&cfg, exp.constellation());
    emit(args.out.as_deref(), &format_ser_csv(&meta, &rows))?;
    if let Some(svg) = &args.svg {
        let series = Series {
            name: meta.get("label").unwrap_or("ser").to_string(),
            points: rows.iter().map(|r| (r.snr_db, r.ser)).collect(),
        };
        emit_plot(&[series], svg, &PlotOptions::default())?;
    }
    Ok(())
}

fn cmd_analytic(args: &AnalyticArgs) -> Result<()> {
    let cfg = build_config(&args.grid)?;
    let c = cfg.validate()?;
    let quad = QuadratureSpec::default();
    let rows = run_analytic_curve(&cfg, &quad, args.mode, args.objective, args.subset_scaling)?;
    let meta = analytic_metadata(&cfg, &c, args.mode, args.objective, args.subset_scaling);
    emit(args.out.as_deref(), &format_analytic_csv(&meta, &rows))
}

fn cmd_design(args: &DesignArgs) -> Result<()> {
    let grid = parse_snr_grid(&args.snr_db).map_err(HarnessError::Config)?;
    let [snr_db] = grid[..] else {
        bail!(HarnessError::Config(format!(
            "design needs exactly one --snr-db value (got {})",
            grid.len()
        )));
    };
    let params = ChannelParams::from_snr_db(snr_db, args.phase_bound)?;
    let options = DesignOptions {
        objective_mode: args.objective,
        full_union: args.full_union,
    };
    let report = optimize_kn(
        args.m,
        &params,
        &QuadratureSpec::default(),
        args.norm,
        options,
    )?;
    let inputs = format!(
        "m={} phase_bound={} snr_db={snr_db} norm={} objective={} full_union={}",
        args.m, args.phase_bound, args.norm, args.objective, args.full_union
    );
    let meta = RunMetadata::new("design")
        .with("config_hash", config_hash(inputs.as_bytes()))
        .with("seed", "n/a")
        .with("m", args.m)
        .with("phase_bound", args.phase_bound)
        .with("snr_db", snr_db)
        .with("power_p", params.power())
        .with("norm_mode", args.norm)
        .with("generator", "n/a")
        .with("objective_mode", args.objective)
        .with("full_union", args.full_union)
        .with("best", format!("({},{})", report.best.0, report.best.1));
    emit(args.out.as_deref(), &format_design_csv(&meta, &report))?;
    eprintln!("best: ({},{})", report.best.0, report.best.1);
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let series = args
        .inputs
        .iter()
        .map(|p| read_curve_csv(p))
        .collect::<Result<Vec<_>, _>>()?;
    let options = PlotOptions {
        title: args.title.clone(),
        log_floor: args.log_floor,
        ..PlotOptions::default()
    };
    emit_plot(&series, &args.out, &options)?;
    Ok(())
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<()> {
    let figure = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: path.clone(),
                source,
            })?;
            FigureConfig::from_json(&text).map_err(|source| HarnessError::Json {
                path: path.clone(),
                source,
            })?
        }
        None => bundled_figure(&args.figure)?,
    }
    .with_overrides(args.trials, args.seed);
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(&figure.figure));
    let output = reproduce(&figure, &out_dir)?;
    for path in &output.csv_paths {
        println!("{}", path.display());
    }
    println!("{}", output.svg_path.display());
    Ok(())
}

fn error_code(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<HarnessError>() {
        e.code()
    } else if let Some(e) = err.downcast_ref::<DesignError>() {
        e.code()
    } else if let Some(e) = err.downcast_ref::<AnalyticError>() {
        e.code()
    } else if let Some(e) = err.downcast_ref::<ConstellationError>() {
        e.code()
    } else if err.downcast_ref::<ChannelError>().is_some() {
        "INVALID_CHANNEL"
    } else {
        "ERROR"
    }
}

fn report(code: &str, message: &str) {
    let message = message
        .replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', " ");
    eprintln!("error: code={code} message=\"{message}\"");
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Constellation(a) => cmd_constellation(a),
        Command::Ser(a) => cmd_ser(a),
        Command::Analytic(a) => cmd_analytic(a),
        Command::Design(a) => cmd_design(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            report("USAGE", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report(error_code(&err), &format!("{err:#}"));
            ExitCode::FAILURE
        }
    }
}
