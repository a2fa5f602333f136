use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod files;

#[derive(Parser)]
#[command(name = "b2i", version, about = "Convert binary masks into instance label maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert masks with the first mix_params entry of the config
    Convert(ConvertArgs),
    /// Pick the best grid entry per image against reference counts
    Tune(TuneArgs),
    /// Score every method against reference counts
    Eval(EvalArgs),
    /// Write synthetic scenes with ground truth
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Mask PNG or a directory of mask PNGs
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
    /// JSON pipeline configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub common: Common,
    /// Reference counts CSV; listed images use their count as the dymorph target
    #[arg(long)]
    pub refs: Option<PathBuf>,
    /// Also write a colored overlay per image
    #[arg(long)]
    pub overlay: bool,
    /// Seed of the overlay palette
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub common: Common,
    /// Reference counts CSV (required)
    #[arg(long)]
    pub refs: Option<PathBuf>,
    #[arg(long)]
    pub overlay: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Reference counts CSV with an optional class column (required)
    #[arg(long)]
    pub refs: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Write the 60-scene benchmark suite
    #[arg(long, conflicts_with = "spec")]
    pub suite: bool,
    /// JSON file holding one scene spec or a list of them
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Suite seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Convert(a) => commands::convert(&a),
        Command::Tune(a) => commands::tune(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Synth(a) => commands::synth(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
