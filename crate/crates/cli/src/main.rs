mod commands;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppda_core::policy::AugMode;

#[derive(Parser, Debug)]
#[command(name = "ppda", version, about = "Virtual IMU synthesis and augmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize baseline IMU traces for a bundle and write them as CSV.
    Simulate {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write augmented mini-batches to a file.
    Augment {
        #[command(flatten)]
        run: RunArgs,
        /// Number of batches; defaults to one pass over the windows.
        #[arg(long)]
        batches: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stream augmented mini-batches to one client and adapt to its rewards.
    Serve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Port to listen on; 0 picks a free one.
        #[arg(long)]
        port: u16,
        /// Batches per round; weights are updated at the end of each round.
        #[arg(long)]
        round: Option<u64>,
        /// Stop after this many batches.
        #[arg(long)]
        max_batches: Option<u64>,
        /// At a round boundary with no rewards yet, wait this long for one.
        #[arg(long, default_value_t = 0)]
        reward_wait_ms: u64,
        /// Write the final policy weights here as JSON.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Inspect or create policy files.
    Policy {
        #[command(subcommand)]
        action: PolicyAction,
    },
    /// Write a synthetic bundle document.
    Fixture {
        #[arg(long, value_enum)]
        kind: FixtureKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        len: usize,
        #[arg(long, default_value_t = 50.0)]
        rate: f64,
        #[arg(long, default_value = "s01")]
        subject: String,
        /// Seed for the `posed` fixture.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum PolicyAction {
    /// Print the sub-policy count and sampling probabilities.
    Inspect {
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Weights saved by `serve --state-out`.
        #[arg(long)]
        state: Option<PathBuf>,
        /// How many of the most likely sub-policies to list when not uniform.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Write a policy file with the default grids.
    Init {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Ppda)]
        mode: ModeArg,
        /// Identity vs one fixed augmentation instead of the full product.
        #[arg(long)]
        binary: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the mode in the policy file.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Subject bundle documents, one per flag.
    #[arg(long = "bundle")]
    bundles: Vec<PathBuf>,
    /// CSV traces for signal mode, instead of bundles.
    #[arg(long, conflicts_with = "bundles")]
    traces: Option<PathBuf>,
    /// Per-sample labels for `--traces`, whitespace separated.
    #[arg(long, requires = "traces")]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    window: usize,
    #[arg(long, default_value_t = 25)]
    stride: usize,
    #[arg(long, default_value_t = 64)]
    batch: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Stda,
    Ppda,
}

impl From<ModeArg> for AugMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Stda => AugMode::Stda,
            ModeArg::Ppda => AugMode::Ppda,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FixtureKind {
    Walking,
    /// Upright and motionless.
    Static,
    /// A random chain in a random constant pose.
    Posed,
    Spin,
    Bend,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { bundle, out, seed } => commands::simulate(&bundle, &out, seed),
        Command::Augment { run, batches, out } => commands::augment(&run, batches, &out),
        Command::Serve {
            run,
            host,
            port,
            round,
            max_batches,
            reward_wait_ms,
            state_out,
        } => serve::serve(&serve::ServeArgs {
            run,
            host,
            port,
            round,
            max_batches,
            reward_wait: std::time::Duration::from_millis(reward_wait_ms),
            state_out,
        }),
        Command::Policy { action } => match action {
            PolicyAction::Inspect { policy, state, top } => commands::policy_inspect(policy.as_deref(), state.as_deref(), top),
            PolicyAction::Init { out, mode, binary } => commands::policy_init(out.as_deref(), mode.into(), binary),
        },
        Command::Fixture {
            kind,
            out,
            len,
            rate,
            subject,
            seed,
        } => commands::fixture(kind, &out, len, rate, &subject, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
