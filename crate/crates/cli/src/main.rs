use std::path::PathBuf;
use std::process::ExitCode;

use bandgcn::graphs::EdgeRule;
use bandgcn::preprocess::BandName;
use bandgcn_cli::commands;
use bandgcn_cli::{CliError, ExperimentConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bandgcn", version, about = "Band-wise EEG seizure detection with a graph convolutional network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a setting, e.g. `--set gcn.epochs=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::load(self.config.as_deref(), &self.overrides)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Shared,
    SharedMidline,
}

impl From<RuleArg> for EdgeRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Shared => EdgeRule::SharedElectrode,
            RuleArg::SharedMidline => EdgeRule::SharedOrMidlineNeighbor,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic EDF recording and its annotation CSV.
    Synth {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write per-band train/test feature CSVs.
    Features {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the full experiment for every configured band.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Re-execute the configuration recorded in a run manifest.
        #[arg(long, conflicts_with = "config")]
        from_manifest: Option<PathBuf>,
        /// Output directory; defaults to `experiment.output_dir`.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Score each window of an EDF file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        edf: PathBuf,
        #[arg(long)]
        band: String,
        #[arg(long, value_enum, default_value = "shared-midline")]
        edge_rule: RuleArg,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check the montage graph and optionally export its edges.
    ValidateGraph {
        #[arg(long, value_enum, default_value = "shared-midline")]
        edge_rule: RuleArg,
        #[arg(long)]
        edges: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { config, out } => {
            let r = commands::cmd_synth(&config.load()?, &out)?;
            println!("{} ({} seizures), {}", r.edf.display(), r.n_seizures, r.annotations.display());
        }
        Command::Features { config, out } => {
            let m = commands::cmd_features(&config.load()?, &out)?;
            for b in &m.bands {
                println!("{}: {} train rows, {} test rows", b.band, b.train_rows, b.test_rows);
            }
        }
        Command::Run { config, from_manifest, out } => {
            let manifest = match from_manifest {
                Some(path) => {
                    let out = out.ok_or_else(|| CliError::Config("--from-manifest needs --out".into()))?;
                    commands::cmd_run_from_manifest(&path, &out)?
                }
                None => {
                    let cfg = config.load()?;
                    let out = out.unwrap_or_else(|| cfg.experiment.output_dir.clone());
                    commands::cmd_run(&cfg, &out)?
                }
            };
            for b in &manifest.bands {
                match &b.error {
                    None => println!("{}: {}", b.band, b.status),
                    Some(e) => println!("{}: {} ({e})", b.band, b.status),
                }
            }
            if manifest.bands.iter().all(|b| b.error.is_some()) {
                return Err(CliError::Data("every band failed".into()));
            }
        }
        Command::Predict {
            model,
            edf,
            band,
            edge_rule,
            out,
        } => {
            let band: BandName = band.parse().map_err(CliError::Config)?;
            let preds = commands::cmd_predict(&model, &edf, band, edge_rule.into(), &out)?;
            let ictal = preds.iter().filter(|p| p.label == 1).count();
            println!("{} windows, {ictal} predicted ictal", preds.len());
        }
        Command::ValidateGraph { edge_rule, edges } => {
            let r = commands::cmd_validate_graph(edge_rule.into(), edges.as_deref())?;
            println!(
                "{} nodes, {} edges, {} component(s), spectral radius {:.12}",
                r.n_nodes, r.n_edges, r.components, r.spectral_radius
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
