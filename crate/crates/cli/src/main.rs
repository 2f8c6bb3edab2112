mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nfl_lab::domain::DEFAULT_FUNCTION_CAP;
use nfl_lab::machine::MassForm;
use nfl_lab::measures::MaxConvention;

use output::Format;

/// Exact, exhaustive checks of no-free-lunch results on small finite search spaces.
#[derive(Debug, Parser)]
#[command(name = "nfl-lab", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Number of search points; X is the first n non-empty strings in canonical order.
    #[arg(long, global = true, default_value_t = 8)]
    pub x_size: usize,
    /// Number of values; Y is the first m strings of length 1 and up.
    #[arg(long, global = true, default_value_t = 2)]
    pub y_size: usize,
    /// Largest |X| for the exhaustive verification suites.
    #[arg(long, global = true, default_value_t = 3)]
    pub max_x: usize,
    /// Longest program enumerated by the reference machine.
    #[arg(long, global = true, default_value_t = 16)]
    pub max_len: usize,
    /// Step budget per program run.
    #[arg(long, global = true, default_value_t = 256)]
    pub max_steps: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Upper bound on |Y|^|X| for anything that enumerates functions.
    #[arg(long, global = true, default_value_t = DEFAULT_FUNCTION_CAP)]
    pub cap: u128,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Self-delimiting codes.
    Codec {
        #[command(subcommand)]
        op: CodecOp,
    },
    /// Budgeted complexity of one function or string.
    Complexity {
        /// Function as comma-separated values, `needle:i` or `constant:y`.
        #[arg(long, conflicts_with = "string")]
        function: Option<String>,
        /// Raw bitstring, conditioned on the context.
        #[arg(long)]
        string: Option<String>,
        #[arg(long, default_value = "shortest-program")]
        form: MassForm,
    },
    /// Universal-mass surrogate over every function of the context.
    Mass {
        #[arg(long, default_value = "shortest-program")]
        form: MassForm,
    },
    /// Dump a problem distribution.
    Dist {
        /// uniform | niah | needle:i | point:v1,v2,.. | block-uniform:seed | simplex:seed | universal[:form]
        #[arg(long, default_value = "uniform")]
        dist: String,
    },
    /// Exact expected performance of an optimiser.
    Expect {
        #[arg(long, default_value = "uniform")]
        dist: String,
        /// mptm | mptm:max-achieved | mmax:k
        #[arg(long, default_value = "mptm")]
        measure: String,
        /// enumerative | permuted:i,j,.. | random:seed | hillclimb:seed | appendix-a:k | appendix-b:k
        #[arg(long, default_value = "enumerative")]
        optimiser: String,
    },
    /// Run verification suites; exit status 1 if any assertion fails.
    Verify {
        /// A suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 50)]
        class_samples: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "shortest-program")]
        form: MassForm,
        #[arg(long, default_value_t = nfl_lab::optimisers::DEFAULT_TREE_CAP)]
        tree_cap: u128,
    },
    /// Worked examples on the configured context.
    Demo {
        #[command(subcommand)]
        kind: DemoKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum CodecOp {
    EncodeNat { n: usize },
    EncodeString { x: String },
    EncodeList { items: Vec<String> },
    /// Encode a function of the configured context.
    EncodeFunction { function: String },
    EncodeContext,
    DecodeNat { bits: String },
    DecodeString { bits: String },
    DecodeList { bits: String },
    DecodeFunction { bits: String },
    DecodeContext { bits: String },
}

#[derive(Debug, Subcommand)]
pub enum DemoKind {
    /// A permuted enumeration beating plain enumeration on a distribution that is not block uniform.
    Prop1 {
        #[arg(long, default_value = "universal")]
        dist: String,
    },
    /// Needle functions of equal histogram but unequal surrogate mass.
    Universal {
        #[arg(long, default_value = "shortest-program")]
        form: MassForm,
    },
    /// The appendix optimiser pair under the surrogate mass and under NIAH.
    Mptm {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "shortest-program")]
        form: MassForm,
        #[arg(long, default_value = "max-y")]
        convention: MaxConvention,
    },
    /// The function on which an optimiser does worst.
    Worst {
        #[arg(long, default_value = "enumerative")]
        optimiser: String,
        #[arg(long, default_value = "mptm")]
        measure: String,
    },
    /// An optimiser as a decision tree.
    Tree {
        #[arg(long, default_value = "enumerative")]
        optimiser: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => match output::emit(&report, cli.global.format, cli.global.out.as_deref()) {
            Ok(()) if report.passed == Some(false) => ExitCode::from(1),
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
