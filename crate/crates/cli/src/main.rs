mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::inputs::{CliError, Output};

/// Diagnostics for nonsingular Z^d-actions on atomic spaces.
///
/// Exit status: 0 when every check passes, 1 when a verification fails
/// (the report is still written), 2 on invalid input or usage.
#[derive(Parser, Debug)]
#[command(name = "maharam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximal-average statistic a_n as CSV.
    Stat(StatArgs),
    /// Conservativity verdict from the a_n trend of g_1 <= g_2 <= ...
    Verdict(VerdictArgs),
    /// Cocycle identity and generator commutativity on sample atoms.
    CocycleCheck(CocycleArgs),
    /// Isometry and duality of the dual operator.
    DualityCheck(DualityArgs),
    /// Measure preservation of the Maharam extension and the extension identity.
    MaharamVerify(MaharamArgs),
    /// Conservative/dissipative labels of the atoms in S_radius.
    Hopf(HopfArgs),
    /// Normal form of a dissipative region with its equivalence report.
    Krengel(KrengelArgs),
    /// Example actions.
    Zoo {
        #[command(subcommand)]
        command: ZooCommand,
    },
}

#[derive(Subcommand, Debug)]
enum ZooCommand {
    /// Builders and fixtures with their parameters and ground truth.
    List(OutArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutArgs {
    /// Output file; defaults to $MAHARAM_OUT_DIR/<command>.<ext>, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// `zoo:NAME`, a fixture name, a JSON file, or inline JSON.
    #[arg(long)]
    pub action: Option<String>,
    /// Builder parameters, `k=v,k=v`.
    #[arg(long)]
    pub params: Option<String>,
    /// JSON file mirroring the flags; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct StatArgs {
    #[command(flatten)]
    pub common: Common,
    /// Function g: `atom:A`, `atoms:A;B`, `exhaustion:m`, `all`, `c*term`, joined with `+`.
    #[arg(long)]
    pub g: Option<String>,
    /// Increasing window sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// `corner` or `centered`.
    #[arg(long)]
    pub window: Option<String>,
    /// Fill the ms column with wall-clock times (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct VerdictArgs {
    #[command(flatten)]
    pub common: Common,
    /// Increasing sequence g_1, g_2, ... (repeat the flag).
    #[arg(long)]
    pub g: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub theta_dec: Option<f64>,
    #[arg(long)]
    pub theta_stab: Option<f64>,
    /// Fail (exit 1) unless the verdict has this label.
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CocycleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Checks all t, u in the centered window of this radius.
    #[arg(long)]
    pub radius: Option<usize>,
    /// Sample atoms are S_samples.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DualityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub g: Option<String>,
    /// Single group element, e.g. `1` or `1,0`; default sweeps the centered window.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Test set A for the duality pair, same syntax as a g term.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct MaharamArgs {
    #[command(flatten)]
    pub common: Common,
    /// Single group element; default sweeps the centered window.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// JSON file of rects `[{"atom": A, "a": 0, "b": 1}, ...]`.
    #[arg(long)]
    pub rects: Option<PathBuf>,
    /// Levels m of the extension identity.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Tolerance for the two sides of the extension identity.
    #[arg(long)]
    pub ext_tol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct HopfArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub radius: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct KrengelArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dissipative region, same syntax as a g term.
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Verify this normal form (JSON) instead of computing one.
    #[arg(long)]
    pub form: Option<PathBuf>,
    /// Also report the limit of a_n for this g.
    #[arg(long)]
    pub g: Option<String>,
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Stat(a) => commands::stat(a),
        Command::Verdict(a) => commands::verdict(a),
        Command::CocycleCheck(a) => commands::cocycle_check(a),
        Command::DualityCheck(a) => commands::duality_check(a),
        Command::MaharamVerify(a) => commands::maharam_verify(a),
        Command::Hopf(a) => commands::hopf(a),
        Command::Krengel(a) => commands::krengel(a),
        Command::Zoo {
            command: ZooCommand::List(out),
        } => commands::zoo_list(out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).and_then(|output| output.emit()) {
        Ok(pass) => ExitCode::from(if pass { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
