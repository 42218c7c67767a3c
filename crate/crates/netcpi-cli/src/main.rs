//! Command-line interface for the production-network inflation toolkit.
//!
//! Exit codes: 0 success, 1 data error, 2 numeric error (singular or
//! non-productive systems), 3 usage error.

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use netcpi::mxnsim::{Scenario, ShockKind};

#[derive(Debug)]
pub enum CliError {
    Data(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    pub out_dir: PathBuf,
    pub tol_identity: f64,
    pub tol_solve: f64,
    pub seed: u64,
}

#[derive(Parser)]
#[command(
    name = "netcpi",
    about = "Production-network CPI accounting for small open economies",
    version
)]
struct Cli {
    /// Directory for output CSV files and run metadata.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Tolerance for data-file accounting identities.
    #[arg(long, global = true, default_value_t = netcpi::TOL_IDENTITY)]
    tol_identity: f64,
    /// Tolerance for internally generated identities.
    #[arg(long, global = true, default_value_t = netcpi::TOL_SOLVE)]
    tol_solve: f64,
    /// Seed for synthetic generators.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Closed,
    SoeNoNetwork,
    SoeNetwork,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Island,
    Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ShockArg {
    #[value(name = "zN")]
    ZN,
    #[value(name = "pM")]
    PM,
}

#[derive(Subcommand)]
enum Command {
    /// Check a table file's accounting identities.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Emit direct, export-adjusted, and network-adjusted shares per table.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Evaluate CPI responses along a shock file and difference them into
    /// inflation, with the per-channel decomposition and moments.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        /// CSV of dated log levels: date,series,id,value with series Z|W|PM.
        #[arg(long)]
        shocks: PathBuf,
        /// Base period all series are measured against.
        #[arg(long)]
        base: String,
        #[arg(long, value_enum, default_value_t = VariantArg::SoeNetwork)]
        variant: VariantArg,
        /// Differencing lag for inflation (4 = quarterly year-over-year).
        #[arg(long, default_value_t = 4)]
        lag: usize,
        /// Expenditure over GDP, used by the closed variant.
        #[arg(long, default_value_t = 1.0)]
        e_over_ngdp: f64,
        /// Use the raw no-network counterfactual (shares untouched) instead
        /// of reallocating intermediate spending onto value added.
        #[arg(long)]
        raw_no_network: bool,
    },
    /// Impulse responses of the dynamic three-sector model.
    Simulate {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long, value_enum)]
        shock: ShockArg,
        /// Shock size in log points (e.g. -0.01 for a -1% impulse).
        #[arg(long, default_value_t = -0.01, allow_hyphen_values = true)]
        size: f64,
        #[arg(long, default_value_t = 80)]
        horizon: usize,
    },
    /// Two-way fixed-effects regression on country,sector,y rows.
    Regress {
        #[arg(long)]
        input: PathBuf,
    },
    /// Solve the endogenous factor-share system for one table.
    SolveShares {
        #[arg(long)]
        input: PathBuf,
        /// JSON file: {"theta_consumer": .., "theta_producers": [..]}.
        #[arg(long)]
        params: PathBuf,
        /// JSON file with z_hat/pm_hat/x_hat/l_bar_hat arrays and m_hat.
        #[arg(long)]
        shocks: PathBuf,
    },
    /// Classify countries as small open economies from macro records.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output is not an error.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let common = Common {
        out_dir: cli.out_dir.clone(),
        tol_identity: cli.tol_identity,
        tol_solve: cli.tol_solve,
        seed: cli.seed,
    };
    if let Err(e) = std::fs::create_dir_all(&common.out_dir) {
        eprintln!(
            "cannot create output directory {}: {e}",
            common.out_dir.display()
        );
        std::process::exit(1);
    }

    let result = match &cli.command {
        Command::Validate { input } => commands::cmd_validate(&common, input),
        Command::Stats { input } => commands::cmd_stats(&common, input),
        Command::Decompose {
            input,
            shocks,
            base,
            variant,
            lag,
            e_over_ngdp,
            raw_no_network,
        } => commands::cmd_decompose(
            &common,
            input,
            shocks,
            base,
            *variant,
            *lag,
            *e_over_ngdp,
            *raw_no_network,
        ),
        Command::Simulate {
            scenario,
            shock,
            size,
            horizon,
        } => {
            let scenario = match scenario {
                ScenarioArg::Island => Scenario::Island,
                ScenarioArg::Network => Scenario::Intersectoral,
            };
            let shock = match shock {
                ShockArg::ZN => ShockKind::ProductivityN,
                ShockArg::PM => ShockKind::ImportPrice,
            };
            commands::cmd_simulate(&common, scenario, shock, *size, *horizon)
        }
        Command::Regress { input } => commands::cmd_regress(&common, input),
        Command::SolveShares {
            input,
            params,
            shocks,
        } => commands::cmd_solve_shares(&common, input, params, shocks),
        Command::Classify { input } => commands::cmd_classify(&common, input),
    };

    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
