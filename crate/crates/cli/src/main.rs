//! `shiftreset`: evaluate, translate and compare terms of the lambda-calculus
//! with shift and reset.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "shiftreset", version, about = "Workbench for shift/reset term equivalence")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Opts {
    /// Observational semantics for bisim and falsify.
    #[arg(long, global = true, value_enum, default_value_t = Semantics::Relaxed)]
    pub semantics: Semantics,
    /// Reduction steps per evaluation.
    #[arg(long, global = true, default_value_t = 2000)]
    pub fuel: usize,
    /// Node budget for game arguments and contexts.
    #[arg(long, global = true, default_value_t = 5)]
    pub closure_budget: usize,
    /// Game rounds, or the derivation length for `kh`.
    #[arg(long, global = true, default_value_t = 3)]
    pub depth: usize,
    /// Largest falsifier context.
    #[arg(long, global = true, default_value_t = 6)]
    pub ctx_size: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Report games with big steps only.
    #[arg(long, global = true)]
    pub big_step: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    Relaxed,
    /// Programs under a top-level reset.
    Original,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed term.
    Eval { term: String },
    /// Print the reduction sequence of a closed term.
    Trace { term: String },
    /// Is a closed term stuck?
    Stuck { term: String },
    /// CPS-translate a term.
    Cps { term: String },
    /// Compare the beta-eta normal forms of two CPS images.
    CpsEquiv { left: String, right: String },
    /// Search for an equational derivation using the eight axioms.
    Kh { left: String, right: String },
    /// Play the bisimulation game.
    Bisim { left: String, right: String },
    /// Search for a distinguishing context.
    Falsify { left: String, right: String },
    /// Both games and both falsifiers.
    Compare { left: String, right: String },
    /// The example corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Run every entry and check its expectations.
    Run {
        /// Corpus file to use instead of the built-in one.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// List entry names and terms.
    List {
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = &cli.opts;
    let result = match &cli.command {
        Command::Eval { term } => commands::eval(opts, term),
        Command::Trace { term } => commands::trace(opts, term),
        Command::Stuck { term } => commands::stuck(opts, term),
        Command::Cps { term } => commands::cps(opts, term),
        Command::CpsEquiv { left, right } => commands::cps_equiv(opts, left, right),
        Command::Kh { left, right } => commands::kh(opts, left, right),
        Command::Bisim { left, right } => commands::bisim(opts, left, right),
        Command::Falsify { left, right } => commands::falsify(opts, left, right),
        Command::Compare { left, right } => commands::compare(opts, left, right),
        Command::Corpus { action } => match action {
            CorpusAction::Run { file } => commands::corpus_run(opts, file.as_deref()),
            CorpusAction::List { file } => commands::corpus_list(opts, file.as_deref()),
        },
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults() {
        let cli = Cli::parse_from(["shiftreset", "eval", "x"]);
        assert_eq!(cli.opts.fuel, 2000);
        assert_eq!(cli.opts.closure_budget, 5);
        assert_eq!(cli.opts.depth, 3);
        assert_eq!(cli.opts.ctx_size, 6);
        assert_eq!(cli.opts.semantics, Semantics::Relaxed);
    }
}
