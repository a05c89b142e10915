//! `amact`: batch front end for the certified constructions.
//!
//! Exit status: 0 on verified success, 2 when a computed verdict fails,
//! 1 on usage or configuration errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "amact", version, about = "Certified amenable actions of amalgamated free products")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write a CSV table of the main rows.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Preset file to use instead of the shipped presets.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Recorded in reports; all constructions are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Boundary ratios of a standard finite set.
    Ratio(RatioArgs),
    /// Equal-cardinality Følner matching of an interval in Z against squares in Z^2.
    MatchFolner(MatchArgs),
    /// Følner sets of prescribed sizes in a free abelian group.
    PrescribedFolner(PrescribedArgs),
    /// Prefix evidence that an amalgam preset satisfies the four action conditions.
    CheckAprime(AprimeArgs),
    /// Build a generic action, certify it and replay the certificate.
    BuildAction(BuildArgs),
    /// Replay a saved certificate.
    Verify(VerifyArgs),
    /// Quotient graph and circuit witness for a double.
    BassSerre {
        #[command(subcommand)]
        cmd: BassSerreCmd,
    },
    /// Inspect shipped presets.
    Presets {
        #[command(subcommand)]
        cmd: PresetsCmd,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `{0, …, n-1}` in Z.
    ZInterval,
    /// `{0, …, n-1}²` in Z².
    Z2Box,
    /// Word-metric ball of radius k in Z².
    Z2Ball,
}

#[derive(Args, Debug)]
pub struct RatioArgs {
    #[arg(value_enum)]
    pub shape: Shape,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    /// Positive rational `p/q`.
    #[arg(long)]
    pub eps: String,
    /// `C0 = {0, …, c0-1}`.
    #[arg(long, default_value_t = 10)]
    pub c0: usize,
    /// Largest square side examined.
    #[arg(long, default_value_t = 100_000)]
    pub max_stream: usize,
}

#[derive(Args, Debug)]
pub struct PrescribedArgs {
    /// Strictly ascending sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,9,13,20,25,33,41,50,61,72,85,99,113,128,145,162,181,200")]
    pub sizes: Vec<usize>,
    /// Group preset (free abelian).
    #[arg(long, default_value = "z2d")]
    pub group: String,
}

#[derive(Args, Debug)]
pub struct AprimeArgs {
    #[arg(long, default_value = "zxz2-sym3")]
    pub preset: String,
    #[arg(long, default_value_t = 200)]
    pub prefix: usize,
    #[arg(long, default_value_t = 3)]
    pub pairs: usize,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long, default_value = "zxz2-sym3")]
    pub preset: String,
    /// Largest syllable length of the witnessed words.
    #[arg(long = "L", short = 'L', default_value_t = 2)]
    pub max_len: usize,
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    #[arg(long, default_value_t = 200)]
    pub prefix: usize,
    /// Transversal radius for infinite factors.
    #[arg(long, default_value_t = 2)]
    pub radius: usize,
    /// Number of Følner pairs to match.
    #[arg(long, default_value_t = 1)]
    pub matches: usize,
    /// Write the full certificate (JSON) here.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value = "zxz2-sym3")]
    pub preset: String,
    #[arg(long)]
    pub certificate: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub prefix: usize,
}

#[derive(Subcommand, Debug)]
pub enum BassSerreCmd {
    /// The double of a group preset over a subgroup.
    Double(DoubleArgs),
}

#[derive(Args, Debug)]
pub struct DoubleArgs {
    #[arg(long)]
    pub group: String,
    /// Generators of A, comma separated, or `all`.
    #[arg(long)]
    pub sub: String,
    /// Write the quotient graph as adjacency text here.
    #[arg(long)]
    pub adjacency: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum PresetsCmd {
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
