mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use farmscape::config::Profile;

#[derive(Debug, Parser)]
#[command(name = "farmscape", version, about = "Spatial natural-enemy and farm-economics simulator")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file; missing keys take profile defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Parameter profile (overrides `profile` in the config file).
    #[arg(long, global = true, value_parser = parse_profile)]
    pub profile: Option<Profile>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of replicate landscapes.
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially. Outputs do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: farmscape::Error| e.to_string())
}

/// Farm structure overrides. Unset values come from the scaling laws.
#[derive(Debug, Clone, Args)]
pub struct FarmArgs {
    /// Farm size in ha.
    #[arg(long)]
    pub farm_size: Option<f64>,
    /// Mean field size in ha.
    #[arg(long)]
    pub field_size: Option<f64>,
    /// Grassland share of the area.
    #[arg(long)]
    pub grassland: Option<f64>,
    /// Hedgerow share of the area.
    #[arg(long, conflicts_with = "margin_fraction")]
    pub hedgerow: Option<f64>,
    /// Hedgerows as a fraction of all field-margin cells.
    #[arg(long)]
    pub margin_fraction: Option<f64>,
    /// Pesticide expenditure in €/ha/yr.
    #[arg(long)]
    pub pesticide: Option<f64>,
    /// Relative change of the pesticide expenditure (−1 removes it).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub pesticide_change: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one landscape raster.
    GenerateLandscape {
        #[command(flatten)]
        farm: FarmArgs,
    },
    /// Simulate one farm over the replicate landscapes.
    Simulate {
        #[command(flatten)]
        farm: FarmArgs,
        /// Also write the equilibrium field of the first replicate.
        #[arg(long)]
        write_field: bool,
    },
    /// Natural-enemy density against pesticide use for hedgerow and grassland layouts.
    SweepFig3,
    /// Pesticide and habitat policies for small and large farms.
    PolicyGrid,
    /// Income change over farm size and hedgerow share without pesticides.
    PhaseDiagram,
    /// Calibrate the yield parameters against farm-size-binned targets.
    Calibrate {
        /// Target CSV (farm_size_ha,field,value,stddev,weight); defaults to the bundled table.
        #[arg(long)]
        targets: Option<PathBuf>,
    },
    /// Recalibrate under an altered ecological parameter and rerun the scenarios.
    Sensitivity {
        /// snref_x2, piref_x2, q_half or all.
        #[arg(long, default_value = "all")]
        id: String,
        /// Target CSV; defaults to the bundled table.
        #[arg(long)]
        targets: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
