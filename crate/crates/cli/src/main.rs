use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use elgot::format::{locate_flatten_error, parse_system, parse_terms, parse_tree, ParseError};
use elgot::laws::{Suite, SuiteReport};
use elgot::load::{parse_algebra, LoadError, LoadedAlgebra, Rendered};
use elgot::rational::unfold;
use elgot::system::{flatten, FreshNames};
use elgot::VarId;

const DEFAULT_SEED: u64 = 1;

const GRAMMAR: &str = "\
FILE FORMATS
  Lines are whitespace-insensitive between tokens; `#` starts a comment.

  System file (.eq):
    sig NAME ARITY                    one per operation
    var x = NAME(x1,...,xn)           operation node over variables
    var x = param P                   parameter (carrier element or label)

  Tree file (.rt): a system file plus one `root x` line.

  Term file (.tm): `sig` lines and `var x = TERM`, where TERM is a variable,
    `param P`, or `NAME(TERM,...)` (`c()` for a constant).

  Algebra file (.alg):
    carrier a b c                     finite carrier
    sig NAME ARITY                    declare an operation (needed for join-only ops)
    table NAME(a,b) = c               one line per argument tuple
    order a <= b, bottom a            least solutions by Kleene iteration
    join a b = c, bottom a            join of leaves (every op is a join)
    unary [fixpoint a]                closed form for one unary operation
    label y = a                       extended algebra on HA + Y over the above
    metric epsilon E tolerance T      contractions on [0,1], with
    fn NAME EXPR                      affine EXPR over x y z w u v, e.g. (x+y)/4
    free y z                          free rational trees over labels y z
  Precedence: metric, free, join, unary, order/bottom.

JSON OUTPUT
  solve, stream   {\"VAR\": VALUE, ...}   (keys sorted; numbers for metric carriers)
  unfold          {\"depth\": N, \"tree\": \"(op a ^)\"}
  minimize        {\"states\": N, \"tree\": \"<tree file>\"}
  flatten         {\"system\": \"<system file>\", \"embedding\": {\"VAR\": \"VAR\"}}
  laws            {\"algebra\": KIND, \"seed\": N, \"trials\": N, \"failures\": N,
                   \"suites\": [{\"suite\", \"seed\", \"trials\", \"failures\": [{\"seed\", \"detail\"}]}]}
  check-em        [{\"law\", \"trials\", \"failures\": [{\"seed\", \"tree\", \"lhs\", \"rhs\"}]}]

EXIT STATUS
  0 success, 1 law counterexample or solver error, 2 parse or usage error.";

/// Solve flat equation systems in Elgot algebras and check their laws.
#[derive(Parser)]
#[command(name = "elgot", version, after_long_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Solution,
    Functoriality,
    Compositionality,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Solution => vec![Suite::Solution],
            SuiteArg::Functoriality => vec![Suite::Functoriality],
            SuiteArg::Compositionality => vec![Suite::Compositionality],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a system in an algebra.
    Solve {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print a tree down to a depth as an s-expression; `^` marks a cut.
    Unfold {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the minimal tree file for a tree.
    Minimize {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run randomized law suites against an algebra.
    Laws {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check the unit and multiplication laws of the induced monad algebra.
    CheckEm {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Flatten a term file into a flat system.
    Flatten {
        #[arg(long)]
        terms: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Solve the stream system for prefix·cycle^ω with x_n = op(a_n, x_{n+1}).
    Stream {
        #[arg(long, value_delimiter = ',')]
        prefix: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        cycle: Vec<String>,
        #[arg(long)]
        op: String,
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

enum Failure {
    /// Exit status 2.
    Input(String),
    /// Exit status 1.
    Solver(String),
    /// Exit status 1, report already printed.
    Laws,
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<(String, String), Failure> {
    let name = path.display().to_string();
    let src = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{name}: {e}")))?;
    Ok((name, src))
}

fn load_algebra(path: &Path) -> Result<LoadedAlgebra, Failure> {
    let (name, src) = read(path)?;
    Ok(parse_algebra(&name, &src)?)
}

fn print(format: Format, text: impl FnOnce() -> String, value: impl FnOnce() -> Value) {
    match format {
        Format::Text => print!("{}", text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value()).expect("serializable")),
    }
}

fn print_solution(format: Format, sol: &[(VarId, Rendered)]) {
    print(
        format,
        || sol.iter().map(|(x, v)| format!("{x} = {v}\n")).collect(),
        || {
            let map: Map<String, Value> = sol
                .iter()
                .map(|(x, v)| (x.to_string(), serde_json::to_value(v).expect("serializable")))
                .collect();
            Value::Object(map)
        },
    );
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve {
            system,
            algebra,
            format,
        } => {
            let alg = load_algebra(&algebra)?;
            let (name, src) = read(&system)?;
            let sys = parse_system(&name, &src)?;
            let sol = alg.solve(&sys).map_err(|e| Failure::Solver(e.to_string()))?;
            print_solution(format, &sol);
        }
        Command::Unfold { tree, depth, format } => {
            let (name, src) = read(&tree)?;
            let t = parse_tree(&name, &src)?;
            let sexpr = unfold(&t, depth).to_string();
            print(
                format,
                || format!("{sexpr}\n"),
                || json!({ "depth": depth, "tree": sexpr }),
            );
        }
        Command::Minimize { tree, format } => {
            let (name, src) = read(&tree)?;
            let m = parse_tree(&name, &src)?.minimize();
            print(
                format,
                || m.to_string(),
                || json!({ "states": m.state_count(), "tree": m.to_string() }),
            );
        }
        Command::Laws {
            algebra,
            suite,
            trials,
            seed,
            format,
        } => {
            let alg = load_algebra(&algebra)?;
            let reports: Vec<SuiteReport> = suite
                .suites()
                .into_iter()
                .map(|s| alg.run_suite(s, trials as usize, seed))
                .collect();
            let failures: usize = reports.iter().map(|r| r.failures.len()).sum();
            print(
                format,
                || {
                    let mut out = String::new();
                    for r in &reports {
                        out += &format!("{}: {} trials, {} failures\n", r.suite, r.trials, r.failures.len());
                        for c in &r.failures {
                            out += &format!("  seed {}: {}\n", c.seed, c.detail);
                        }
                    }
                    out + &format!("{failures} failures (algebra {}, seed {seed})\n", alg.kind())
                },
                || {
                    json!({
                        "algebra": alg.kind(),
                        "seed": seed,
                        "trials": trials,
                        "failures": failures,
                        "suites": reports,
                    })
                },
            );
            if failures > 0 {
                return Err(Failure::Laws);
            }
        }
        Command::CheckEm {
            algebra,
            trials,
            seed,
            format,
        } => {
            let alg = load_algebra(&algebra)?;
            let reports = alg.check_em(trials as usize, seed).map_err(|e| match e {
                LoadError::NotFinite(_) => Failure::Input(e.to_string()),
                other => Failure::Solver(other.to_string()),
            })?;
            print(
                format,
                || {
                    let mut out = String::new();
                    for r in &reports {
                        out += &format!("{}: {} trials, {} failures\n", r.law, r.trials, r.failures.len());
                        for c in &r.failures {
                            out += &format!("  seed {}: {} gives {} but {}\n", c.seed, c.tree, c.lhs, c.rhs);
                        }
                    }
                    out
                },
                || serde_json::to_value(&reports).expect("serializable"),
            );
            if reports.iter().any(|r| !r.passed()) {
                return Err(Failure::Laws);
            }
        }
        Command::Flatten { terms, format } => {
            let (name, src) = read(&terms)?;
            let (sig, eqs) = parse_terms(&name, &src)?;
            let flat = flatten(&sig, eqs, &mut FreshNames::new())
                .map_err(|e| Failure::Input(locate_flatten_error(&name, &src, &e).to_string()))?;
            print(
                format,
                || flat.system.to_string(),
                || {
                    let embedding: Map<String, Value> = flat
                        .embedding
                        .iter()
                        .map(|(x, y)| (x.to_string(), Value::from(y.to_string())))
                        .collect();
                    json!({ "system": flat.system.to_string(), "embedding": embedding })
                },
            );
        }
        Command::Stream {
            prefix,
            cycle,
            op,
            algebra,
            format,
        } => {
            let alg = load_algebra(&algebra)?;
            let sol = alg
                .stream(&prefix, &cycle, &op)
                .map_err(|e| Failure::Solver(e.to_string()))?;
            print_solution(format, &sol);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Laws) => ExitCode::from(1),
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
