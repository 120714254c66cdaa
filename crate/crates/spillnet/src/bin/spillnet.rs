use clap::{Args, Parser, Subcommand};
use spillnet::pipeline::{self, RunConfig, Stage};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "spillnet",
    about = "Time-varying causality networks of return spillovers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Run configuration file (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Override the kernel bandwidth M.
    #[arg(long)]
    bandwidth: Option<usize>,
    /// Override the base significance level.
    #[arg(long)]
    base_level: Option<f64>,
    /// Override the rolling window length in months.
    #[arg(long)]
    window_months: Option<u32>,
    /// Override the rolling drift in months.
    #[arg(long)]
    drift_months: Option<u32>,
    /// Override the root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Lint the configuration and input data.
    Validate(CommonArgs),
    /// Generate the synthetic world defined by the config's [world] table.
    Synth(CommonArgs),
    /// Fit the per-market filters and emit standardized residuals.
    Filter(CommonArgs),
    /// Run the pairwise causality tests and build the window networks.
    Network(CommonArgs),
    /// Compute graph metrics and centrality trend tests.
    Metrics(CommonArgs),
    /// Fit the per-window spatial probit models.
    Probit(CommonArgs),
    /// Condense metrics and probit outputs into the report tables.
    Report(CommonArgs),
    /// Run a set of stages in dependency order.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated subset of stages
        /// (synth,filter,network,metrics,probit,report).
        #[arg(long, value_delimiter = ',')]
        stages: Option<Vec<String>>,
    },
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, spillnet::Error> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(b) = common.bandwidth {
        cfg.causality.bandwidth = b;
    }
    if let Some(l) = common.base_level {
        cfg.causality.base_level = l;
    }
    if let Some(w) = common.window_months {
        cfg.rolling.window_months = w;
    }
    if let Some(d) = common.drift_months {
        cfg.rolling.drift_months = d;
    }
    if let Some(s) = common.seed {
        cfg.run.seed = s;
    }
    if let Some(o) = &common.output {
        cfg.paths.output = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute() -> Result<(), spillnet::Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(common) => {
            let cfg = load_config(&common)?;
            pipeline::validate(&cfg)?;
            println!(
                "configuration and data are valid (hash {})",
                cfg.config_hash()
            );
            Ok(())
        }
        Command::Synth(common) => run_stages(&common, &[Stage::Synth]),
        Command::Filter(common) => run_stages(&common, &[Stage::Filter]),
        Command::Network(common) => run_stages(&common, &[Stage::Network]),
        Command::Metrics(common) => run_stages(&common, &[Stage::Metrics]),
        Command::Probit(common) => run_stages(&common, &[Stage::Probit]),
        Command::Report(common) => run_stages(&common, &[Stage::Report]),
        Command::Run { common, stages } => {
            let cfg = load_config(&common)?;
            let stage_list: Vec<Stage> = match stages {
                Some(names) => names
                    .iter()
                    .map(|s| Stage::parse(s))
                    .collect::<Result<_, _>>()?,
                None => cfg
                    .run
                    .stages
                    .iter()
                    .map(|s| Stage::parse(s))
                    .collect::<Result<_, _>>()?,
            };
            let manifest = pipeline::run(&cfg, &stage_list)?;
            for timing in &manifest.stages {
                println!("stage {:<8} {:8.2}s", timing.stage, timing.seconds);
            }
            println!("done (config hash {})", manifest.config_hash);
            Ok(())
        }
    }
}

fn run_stages(common: &CommonArgs, stages: &[Stage]) -> Result<(), spillnet::Error> {
    let cfg = load_config(common)?;
    let manifest = pipeline::run(&cfg, stages)?;
    for timing in &manifest.stages {
        println!("stage {:<8} {:8.2}s", timing.stage, timing.seconds);
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
