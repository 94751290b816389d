use std::io::{self, IsTerminal};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semp::driver::{self, Options};

/// Type checker and interpreter for session-typed staged programs.
#[derive(Parser)]
#[command(name = "semp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a program and print the type of every declaration.
    Check {
        file: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run `main` on the concurrent runtime.
    Run {
        file: String,
        #[command(flatten)]
        common: Common,
        /// Print every reduction.
        #[arg(long)]
        trace: bool,
        /// Print every reduction as a JSON line.
        #[arg(long)]
        trace_json: bool,
        #[arg(long, default_value_t = semp::runtime::DEFAULT_MAX_STEPS)]
        max_steps: usize,
        /// Pick threads in a seeded random order.
        #[arg(long, requires = "seed")]
        randomize: bool,
        #[arg(long, requires = "randomize")]
        seed: Option<u64>,
    },
    /// Evaluate a pure term (or the `main` of a file).
    Eval {
        /// A term, or a program file.
        input: String,
        /// Program whose declarations the term may use.
        #[arg(long)]
        with: Option<String>,
        #[arg(long, default_value_t = semp::eval::DEFAULT_FUEL)]
        fuel: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Print the dual of a session type.
    Dual {
        #[arg(name = "TYPE")]
        ty: String,
        /// Program whose type aliases the type may use.
        #[arg(long)]
        with: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Diagnostics as JSON lines.
    #[arg(long)]
    json: bool,
}

fn color() -> bool {
    std::env::var("SEMP_COLOR").map_or(true, |v| v != "0") && io::stderr().is_terminal()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut opts = Options {
        color: color(),
        ..Options::default()
    };
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let status = match cli.command {
        Command::Check { file, common } => {
            opts.json = common.json;
            driver::cmd_check(&file, &opts, &mut out, &mut err)
        }
        Command::Run {
            file,
            common,
            trace,
            trace_json,
            max_steps,
            randomize,
            seed,
        } => {
            opts.json = common.json;
            opts.trace = trace;
            opts.trace_json = trace_json;
            opts.max_steps = max_steps;
            opts.seed = seed.filter(|_| randomize);
            driver::cmd_run(&file, &opts, &mut out, &mut err)
        }
        Command::Eval {
            input,
            with,
            fuel,
            common,
        } => {
            opts.json = common.json;
            opts.fuel = fuel;
            driver::cmd_eval(&input, with.as_deref(), &opts, &mut out, &mut err)
        }
        Command::Dual { ty, with, common } => {
            opts.json = common.json;
            driver::cmd_dual(&ty, with.as_deref(), &opts, &mut out, &mut err)
        }
    };
    ExitCode::from(status as u8)
}
