mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::{CliError, BAD_ARGS};

#[derive(Parser, Debug)]
#[command(name = "blowup", version, about = "Self-similar and steady profiles, phase portraits and PDE blow-up runs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output root; each run writes into its own subdirectory.
    #[arg(long, global = true, env = "BLOWUP_OUT_DIR", default_value = "blowup-out")]
    pub out_dir: PathBuf,
    /// Relative tolerance of the shooting integrator.
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    /// Absolute tolerance of the shooting integrator.
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    /// Worker threads for parameter sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also run the module's invariant checks; exit 2 if any fails.
    #[arg(long, global = true)]
    pub check: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vector field on the compactified plane, equilibria and heteroclinic orbits.
    Portrait(commands::PortraitArgs),
    /// Scan α for self-similar profiles of the model equation.
    Profiles(commands::ProfilesArgs),
    /// Continue solution branches in n from a seed dimension.
    Branches(commands::BranchesArgs),
    /// Self-similar profiles of the semilinear heat equation.
    Heat(commands::HeatArgs),
    /// Time-dependent radial run from a JSON configuration.
    Evolve(commands::EvolveArgs),
    /// Classify radial steady states on the unit ball.
    Bvp(commands::BvpArgs),
    /// Kummer function samples and positive zeros.
    Specfun(commands::SpecfunArgs),
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::args(e.to_string()))?;
    }
    for (name, v) in [("rtol", cli.global.rtol), ("atol", cli.global.atol)] {
        if v.is_some_and(|x| !(x > 0.0 && x < 1.0)) {
            return Err(CliError::args(format!("--{name} must lie in (0, 1)")));
        }
    }
    let g = &cli.global;
    match cli.command {
        Command::Portrait(a) => commands::portrait(g, a),
        Command::Profiles(a) => commands::profiles(g, a),
        Command::Branches(a) => commands::branches(g, a),
        Command::Heat(a) => commands::heat(g, a),
        Command::Evolve(a) => commands::evolve(g, a),
        Command::Bvp(a) => commands::bvp(g, a),
        Command::Specfun(a) => commands::specfun(g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { BAD_ARGS } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
