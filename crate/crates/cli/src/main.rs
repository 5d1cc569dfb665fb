use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zonecheck::explorer::{reachability, ExploreError, Inclusion, Options, SearchOrder, Verdict, DEFAULT_BUDGET};
use zonecheck::model_io::parse_model;
use zonecheck::oracles::oracle_check;

#[derive(Parser, Debug)]
#[command(name = "zonecheck", version, about = "Reachability checker for timed automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether an accepting state of a .ta model is reachable
    Check(CheckArgs),
    /// Compare the quadratic inclusion test with a brute-force grid on random zones
    #[command(hide = true)]
    OracleCheck {
        #[arg(long, default_value_t = 2012)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        clocks: usize,
        #[arg(long, default_value_t = 10_000)]
        iters: u64,
    },
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(value_name = "FILE")]
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = InclusionArg::Alu)]
    inclusion: InclusionArg,
    #[arg(long, value_enum, default_value_t = SearchArg::Bfs)]
    search: SearchArg,
    /// Print the path to the accepting state
    #[arg(long)]
    trace: bool,
    /// Print exploration statistics
    #[arg(long)]
    stats: bool,
    /// Give up after visiting this many nodes
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Exit with status 1 unless the verdict matches
    #[arg(long, value_enum)]
    expect: Option<ExpectArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InclusionArg {
    None,
    Subset,
    Alu,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SearchArg {
    Bfs,
    Dfs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExpectArg {
    Reachable,
    Unreachable,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn check(args: CheckArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.file.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let automaton = match parse_model(&text) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}: {e}", args.file.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let options = Options {
        inclusion: match args.inclusion {
            InclusionArg::None => Inclusion::None,
            InclusionArg::Subset => Inclusion::Subset,
            InclusionArg::Alu => Inclusion::Alu,
        },
        search: match args.search {
            SearchArg::Bfs => SearchOrder::Bfs,
            SearchArg::Dfs => SearchOrder::Dfs,
        },
        trace: args.trace,
        budget: args.budget,
    };
    let result = match reachability(&automaton, &options) {
        Ok(r) => r,
        Err(ExploreError::BudgetExceeded { budget, .. }) => {
            eprintln!("error: node budget of {budget} exhausted");
            return ExitCode::from(EXIT_BUDGET);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("{}", result.verdict);
    if let Some(trace) = &result.trace {
        let names = automaton.states();
        for step in trace {
            println!(
                "{} --transition#{}--> {}",
                names[step.source], step.transition, names[step.target]
            );
        }
    }
    if args.stats {
        println!("{}", result.stats_line());
    }
    let expected = args.expect.map(|e| match e {
        ExpectArg::Reachable => Verdict::Reachable,
        ExpectArg::Unreachable => Verdict::Unreachable,
    });
    match expected {
        Some(v) if v != result.verdict => ExitCode::from(EXIT_MISMATCH),
        _ => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check(args) => check(args),
        Command::OracleCheck { seed, clocks, iters } => {
            if clocks == 0 || clocks > 8 {
                eprintln!("error: --clocks must be between 1 and 8");
                return ExitCode::from(EXIT_USAGE);
            }
            match oracle_check(seed, clocks, iters) {
                Ok(n) => {
                    println!("agreed on {n} zone pairs");
                    ExitCode::SUCCESS
                }
                Err(d) => {
                    println!("disagreement");
                    println!("{d}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
