use std::path::PathBuf;

use clap::{Parser, Subcommand};

use entail_cli::commands::{self, OutputFormat, ReduceMode};

/// Exact consistency checking, tight frequency bounds, and maximum-entropy
/// estimates for itemset frequency constraints.
#[derive(Parser)]
#[command(name = "entail", version)]
struct Cli {
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether an instance's frequencies are consistent.
    ///
    /// Exits 0 when consistent, 1 when inconsistent, 2 on malformed input.
    Check {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Write a satisfying distribution (at most N+1 states) here.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// On a closure violation, list every missing subset instead of just
        /// the first.
        #[arg(long)]
        closure: bool,
        /// Raise the exact solver's attribute cap (default 16, max 24).
        #[arg(long)]
        k_limit: Option<usize>,
    },
    /// Compute the tight interval of consistent frequencies for a query.
    ///
    /// With --threshold, exits 0 when the maximum exceeds it and 1 otherwise.
    Bounds {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Query itemset as comma-separated attribute names; defaults to the
        /// file's query field.
        #[arg(long)]
        query: Option<String>,
        /// Rational threshold to compare the maximum against.
        #[arg(long)]
        threshold: Option<String>,
        /// Write both endpoint witnesses to PREFIX.lo.json / PREFIX.hi.json.
        #[arg(long, value_name = "PREFIX")]
        witness: Option<String>,
        /// Raise the exact solver's attribute cap (default 16, max 24).
        #[arg(long)]
        k_limit: Option<usize>,
    },
    /// Estimate the query frequency under the maximum-entropy distribution.
    ///
    /// With --threshold, answers yes/no/indeterminate (exit 0/1/3).
    Maxent {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Query itemset as comma-separated attribute names; defaults to the
        /// file's query field.
        #[arg(long)]
        query: Option<String>,
        /// Rational threshold for the decision form.
        #[arg(long)]
        threshold: Option<String>,
        /// Convergence tolerance on the largest constraint violation.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Maximum number of fitting sweeps.
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Attribute cap for the dense fit (max 24).
        #[arg(long)]
        k_limit: Option<usize>,
    },
    /// Generate an entailment instance from a DIMACS CNF formula.
    Reduce {
        /// DIMACS CNF file (clauses of at most three literals).
        dimacs: PathBuf,
        /// Which instance to generate.
        #[arg(long, value_enum)]
        mode: ReduceMode,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the determined probability of a member pattern.
    Project {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Family member as comma-separated attribute names.
        #[arg(long)]
        member: String,
        /// 0/1 pattern aligned with the listed member attributes.
        #[arg(long)]
        pattern: String,
    },
    /// Run the built-in cross-check suites and print a pass/fail table.
    Selftest {
        /// Cases per suite.
        #[arg(long, default_value_t = 25)]
        cases: usize,
        /// Seed for the generated corpora.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let format = cli.format;
    let outcome = match cli.command {
        Command::Check { instance, witness, closure, k_limit } => {
            commands::cmd_check(&instance, witness.as_deref(), closure, k_limit, format)
        }
        Command::Bounds { instance, query, threshold, witness, k_limit } => commands::cmd_bounds(
            &instance,
            query.as_deref(),
            threshold.as_deref(),
            witness.as_deref(),
            k_limit,
            format,
        ),
        Command::Maxent { instance, query, threshold, tol, max_iter, k_limit } => {
            commands::cmd_maxent(
                &instance,
                query.as_deref(),
                threshold.as_deref(),
                tol,
                max_iter,
                k_limit,
                format,
            )
        }
        Command::Reduce { dimacs, mode, output } => {
            commands::cmd_reduce(&dimacs, mode, output.as_deref())
        }
        Command::Project { instance, member, pattern } => {
            commands::cmd_project(&instance, &member, &pattern, format)
        }
        Command::Selftest { cases, seed } => commands::cmd_selftest(cases, seed, format),
    };
    let code = match outcome {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.code
        }
    };
    std::process::exit(code);
}
