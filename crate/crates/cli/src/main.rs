use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cllr_cli::{
    emit_dot, run, script_graph, selftest, CliConfig, OutputFormat, DEFAULT_DEPTH, EXIT_USAGE,
};
use cllr_core::consistency::Rule;
use cllr_core::syntax::parse_script;

#[derive(Parser)]
#[command(
    name = "cllr",
    version,
    about = "Check consistency, refinement and process equations"
)]
struct Args {
    /// Bound on the number of explored states.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Identify states up to alpha-equivalence only.
    #[arg(long, global = true)]
    alpha_only: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the queries of a script.
    Run { file: PathBuf },
    /// Write the transition graph of every term in a script.
    Dot {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the randomised property suites.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Switch off predicate rules, e.g. `--disable-rule 11`.
        #[arg(long, hide = true)]
        disable_rule: Vec<u8>,
    },
}

fn load(file: &PathBuf) -> Result<cllr_core::syntax::Script, ExitCode> {
    let src = fs::read_to_string(file).map_err(|e| {
        eprintln!("error: {}: {e}", file.display());
        ExitCode::from(EXIT_USAGE as u8)
    })?;
    parse_script(&src).map_err(|e| {
        eprintln!("error: {}:{e}", file.display());
        ExitCode::from(EXIT_USAGE as u8)
    })
}

fn rule(n: u8) -> Option<Rule> {
    use Rule::*;
    [
        Rp1, Rp2, Rp3, Rp4, Rp5, Rp6, Rp7, Rp8, Rp9, Rp10, Rp11, Rp12, Rp13, Rp14, Rp15,
    ]
    .get(usize::from(n).checked_sub(1)?)
    .copied()
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut config = CliConfig {
        max_states: args.max_states as usize,
        format: match args.format {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
        },
        alpha_only: args.alpha_only,
        ..CliConfig::default()
    };
    match args.command {
        Command::Run { file } => {
            let script = match load(&file) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let outcome = run(&config, &script);
            print!("{}", outcome.render(config.format));
            ExitCode::from(outcome.exit_code as u8)
        }
        Command::Dot { file, out } => {
            let script = match load(&file) {
                Ok(s) => s,
                Err(code) => return code,
            };
            config.dot_output = Some(out.clone());
            let (l, f) = script_graph(&config, &script);
            if let Err(e) = emit_dot(&l, f.as_ref(), &out) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
            if !l.is_complete() {
                eprintln!("warning: exploration stopped at {} states", l.len());
                return ExitCode::from(cllr_cli::EXIT_UNKNOWN as u8);
            }
            ExitCode::SUCCESS
        }
        Command::Selftest {
            seed,
            depth,
            cases,
            disable_rule,
        } => {
            config.seed = seed;
            let mut disabled = Vec::new();
            for n in disable_rule {
                match rule(n) {
                    Some(r) => disabled.push(r),
                    None => {
                        eprintln!("error: no rule numbered {n}");
                        return ExitCode::from(EXIT_USAGE as u8);
                    }
                }
            }
            let outcome = selftest(&config, depth, cases, &disabled);
            print!("{}", outcome.render());
            ExitCode::from(outcome.exit_code as u8)
        }
    }
}
