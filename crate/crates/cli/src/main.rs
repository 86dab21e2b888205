use std::path::PathBuf;
use std::process::ExitCode;

use asbpir::commands::{self, Report};
use asbpir::reproduce::{self, Budget};
use asbpir::{CliError, EXIT_BUDGET, EXIT_NEGATIVE, EXIT_OK};
use asbpir_core::PropertyKind;
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "asbpir", version, about = "All-symbol PIR and batch codes over small finite fields")]
struct Cli {
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel checks and searches.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a matrix has a property for a given t.
    Check {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        property: PropertyKind,
        #[arg(long)]
        t: usize,
        /// Only use recovery sets with at most this many columns.
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Build a matrix from a named family.
    Construct {
        #[arg(long)]
        family: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        n: Option<usize>,
        /// Tag for `paper_example`: gf3_5x10 or gf2_4x8.
        #[arg(long)]
        example: Option<String>,
        /// Source matrix for `replicate` (once) or `block_diagonal` (twice).
        #[arg(long)]
        input: Vec<PathBuf>,
        #[arg(long)]
        lambda: Option<usize>,
        /// Output path; `.json` selects the JSON form. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Length bounds for (k, t, q), and code-level bounds for a matrix.
    Bounds {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Smallest length of a code with the property.
    Search {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        q: u32,
        #[arg(long, value_parser = parse_kind)]
        property: PropertyKind,
        /// Candidates to examine before giving up.
        #[arg(long)]
        budget: Option<u64>,
        /// Cache file; defaults to $ASBPIR_CACHE.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        n_start: Option<usize>,
        #[arg(long)]
        n_end: Option<usize>,
        /// Decide both all-symbol kinds on every candidate (t = 3 check).
        #[arg(long)]
        audit: bool,
        #[arg(long)]
        candidate_cap: Option<u64>,
    },
    /// Confirm that the minimal length equals a claimed value.
    Verify {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        q: u32,
        #[arg(long, value_parser = parse_kind)]
        property: PropertyKind,
        #[arg(long)]
        claimed: usize,
        #[arg(long)]
        candidate_cap: Option<u64>,
    },
    /// Serve a request with disjoint recovery sets.
    Serve {
        #[arg(long)]
        matrix: PathBuf,
        /// Tokens `COLUMN[:MULT]`, `0[:MULT]` or `[v1,..,vk][:MULT]`.
        #[arg(long)]
        request: String,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Run a named claim end to end.
    Reproduce {
        /// Claim id, or `list`.
        #[arg(long)]
        claim: String,
        /// `full` or a candidate count per search.
        #[arg(long, default_value = "full")]
        budget: String,
    },
}

fn parse_kind(s: &str) -> Result<PropertyKind, String> {
    s.parse().map_err(|_| "expected one of pir, batch, fpir, fbatch, aspir, asbatch".to_string())
}

fn reproduce(claim: &str, budget: &str) -> Result<Report, CliError> {
    if claim == "list" {
        let text: String = reproduce::CLAIMS.iter().map(|(id, title)| format!("{id:<20} {title}\n")).collect();
        let claims: Vec<_> = reproduce::CLAIMS.iter().map(|(id, title)| json!({ "id": id, "title": title })).collect();
        return Ok(Report { json: json!({ "command": "reproduce", "claims": claims }), text, exit: EXIT_OK });
    }
    let budget: Budget = budget.parse()?;
    let rep = reproduce::run_claim(claim, budget)?;
    let exit = if rep.passed {
        EXIT_OK
    } else if rep.budget_exceeded {
        EXIT_BUDGET
    } else {
        EXIT_NEGATIVE
    };
    let mut json = serde_json::to_value(&rep).expect("report serializes");
    json["command"] = json!("reproduce");
    Ok(Report { text: rep.text(), json, exit })
}

fn run(cli: Cli) -> Result<Report, CliError> {
    match cli.command {
        Command::Check { matrix, property, t, max_size } => {
            commands::check(&commands::CheckArgs { matrix, property, t, max_size })
        }
        Command::Construct { family, k, t, q, n, example, input, lambda, out } => {
            commands::construct(&commands::ConstructArgs { family, k, t, q, n, example, inputs: input, lambda, out })
        }
        Command::Bounds { k, t, q, matrix } => commands::bounds(&commands::BoundsArgs { k, t, q, matrix }),
        Command::Search { k, t, q, property, budget, cache, n_start, n_end, audit, candidate_cap } => {
            commands::search(&commands::SearchArgs {
                k,
                t,
                q,
                property,
                budget,
                cache,
                n_start,
                n_end,
                audit,
                candidate_cap,
            })
        }
        Command::Verify { k, t, q, property, claimed, candidate_cap } => {
            commands::verify(&commands::VerifyArgs { k, t, q, property, claimed, candidate_cap })
        }
        Command::Serve { matrix, request, max_size } => {
            commands::serve(&commands::ServeArgs { matrix, request, max_size })
        }
        Command::Reproduce { claim, budget } => reproduce(&claim, &budget),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("asbpir: cannot configure {n} threads: {e}");
            return ExitCode::from(asbpir::EXIT_USAGE as u8);
        }
    }
    match run(cli) {
        Ok(report) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("report serializes"));
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(report.exit as u8)
        }
        Err(e) => {
            if json {
                let doc = json!({ "error": e.to_string(), "exit_code": e.exit_code() });
                println!("{}", serde_json::to_string_pretty(&doc).expect("error serializes"));
            }
            eprintln!("asbpir: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
