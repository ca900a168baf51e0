//! `lipgame` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input (the message names the violated
//! axiom or invariant), 3 enumeration budget exceeded.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipgame::Error;

#[derive(Parser)]
#[command(name = "lipgame", version, about = "Analyse games with the lexicographical improvement property")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Game file (JSON).
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest profile space to enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Every coalition member strictly gains.
    Strict,
    /// Nobody loses and someone strictly gains.
    WeakSsne,
    /// Every member gains more than `--alpha`.
    Alpha,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FunctionArg {
    /// Private-cost vector.
    Pi,
    /// Player-by-facility cost matrix of used facilities.
    Psi,
    /// Unsorted facility-cost vector.
    Upsilon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    First,
    Best,
    Random,
}

#[derive(Args, Clone)]
pub struct MoveArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    pub mode: ModeArg,
    /// Largest coalition considered; all players when absent.
    #[arg(long)]
    pub max_coalition: Option<usize>,
    /// Gain threshold for `--mode alpha`, as a decimal or fraction.
    #[arg(long)]
    pub alpha: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a vector function decreases along every improving move.
    CheckLip {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        moves: MoveArgs,
        #[arg(long, value_enum, default_value_t = FunctionArg::Pi)]
        function: FunctionArg,
    },
    /// Exponent, bounds and path-length bound of the power potential.
    Potential {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_coalition: Option<usize>,
        #[arg(long, value_enum, default_value_t = FunctionArg::Pi)]
        function: FunctionArg,
    },
    /// Improvement dynamics.
    Dynamics {
        #[command(subcommand)]
        action: DynamicsCommand,
    },
    /// Enumerate strong equilibria (strict mode) or super strong ones (weak-ssne).
    SneEnum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
        mode: ModeArg,
    },
    /// Min-max fair profiles, sorted-lex minimizers and their Pareto status.
    Fairness {
        #[command(flatten)]
        common: Common,
    },
    /// Strong price of stability and anarchy.
    Efficiency {
        #[command(flatten)]
        common: Common,
        /// Norm: 1, an integer p >= 2, or inf.
        #[arg(long, default_value = "1")]
        p: String,
    },
    /// Strong equilibria of bottleneck routing games.
    Routing {
        #[command(subcommand)]
        action: RoutingCommand,
    },
    /// Splittable games.
    Splittable {
        #[command(subcommand)]
        action: SplittableCommand,
    },
}

#[derive(Subcommand)]
enum DynamicsCommand {
    /// Follow improving moves from a start profile.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        moves: MoveArgs,
        /// Comma-separated start profile; all zeros when absent.
        #[arg(long)]
        start: Option<String>,
        #[arg(long, value_enum, default_value_t = RuleArg::First)]
        rule: RuleArg,
        #[arg(long)]
        step_cap: Option<u64>,
    },
    /// Build the improvement graph and report acyclicity and path lengths.
    Graph {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        moves: MoveArgs,
    },
}

#[derive(Subcommand)]
enum RoutingCommand {
    /// Identical arc costs: balanced paths through a minimum cut.
    SneIdentical {
        #[command(flatten)]
        common: Common,
    },
    /// Convex arc costs: minimum of the scaled flow potential.
    SneConvex {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum SplittableCommand {
    /// Approximate strong equilibrium within `--alpha`.
    Approx {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: String,
        /// Random coalitions sampled by the final check.
        #[arg(long, default_value_t = 256)]
        coalition_samples: usize,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Budget(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, outcome) = match cli.command {
        Command::CheckLip { common, moves, function } => {
            let r = commands::check_lip(&common, &moves, function);
            (common, r)
        }
        Command::Potential {
            common,
            max_coalition,
            function,
        } => {
            let r = commands::potential(&common, max_coalition, function);
            (common, r)
        }
        Command::Dynamics {
            action:
                DynamicsCommand::Run {
                    common,
                    moves,
                    start,
                    rule,
                    step_cap,
                },
        } => {
            let r = commands::dynamics_run(&common, &moves, start.as_deref(), rule, step_cap);
            (common, r)
        }
        Command::Dynamics {
            action: DynamicsCommand::Graph { common, moves },
        } => {
            let r = commands::dynamics_graph(&common, &moves);
            (common, r)
        }
        Command::SneEnum { common, mode } => {
            let r = commands::sne_enum(&common, mode);
            (common, r)
        }
        Command::Fairness { common } => {
            let r = commands::fairness(&common);
            (common, r)
        }
        Command::Efficiency { common, p } => {
            let r = commands::efficiency(&common, &p);
            (common, r)
        }
        Command::Routing {
            action: RoutingCommand::SneIdentical { common },
        } => {
            let r = commands::routing(&common, false);
            (common, r)
        }
        Command::Routing {
            action: RoutingCommand::SneConvex { common },
        } => {
            let r = commands::routing(&common, true);
            (common, r)
        }
        Command::Splittable {
            action:
                SplittableCommand::Approx {
                    common,
                    alpha,
                    coalition_samples,
                },
        } => {
            let r = commands::splittable_approx(&common, &alpha, coalition_samples);
            (common, r)
        }
    };
    match outcome {
        Ok(report) => {
            match common.format {
                Format::Json => println!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
