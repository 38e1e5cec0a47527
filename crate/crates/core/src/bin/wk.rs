//! `wk`: command-line front end.
//!
//! Exit codes: 0 on success (and for `equiv`, equivalence), 1 for a
//! counterexample or a rejected derivation, 2 for any input or domain error.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use wk_core::automaton::{format_word, parse_word};
use wk_core::equivalence::{decide_equiv, decide_expr_equiv, Verdict};
use wk_core::kleene::{automaton_to_expr, expr_to_automaton};
use wk_core::proof::{check_derivation, parse_script, semantic_audit};
use wk_core::{normalize, Configuration, DerivativeEval, Error, Expr, ExprParser, Semiring, WeightedAutomaton};

#[derive(Parser)]
#[command(name = "wk", version, about = "Weighted automata and weighted regular expressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weight of a word under an expression or an automaton configuration.
    #[command(group(ArgGroup::new("input").required(true).args(["expr", "automaton"])))]
    Eval {
        #[command(flatten)]
        expr: ExprOpts,
        #[arg(long, conflicts_with = "expr")]
        automaton: Option<PathBuf>,
        /// Start configuration, e.g. `{s0:1}`; defaults to the first state.
        #[arg(long, requires = "automaton")]
        start: Option<String>,
        /// Letters, concatenated or separated by spaces or commas; `''` is ε.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Decide language equivalence of two expressions or two configurations.
    #[command(group(ArgGroup::new("input").required(true).args(["expr", "automaton"])))]
    Equiv {
        #[command(flatten)]
        expr: ExprOpts,
        #[arg(long, requires = "expr", required_unless_present = "automaton", allow_hyphen_values = true)]
        expr2: Option<String>,
        #[arg(long, conflicts_with = "expr")]
        automaton: Option<PathBuf>,
        #[arg(long, requires = "automaton")]
        start: Option<String>,
        /// Defaults to the first automaton.
        #[arg(long, requires = "automaton")]
        automaton2: Option<PathBuf>,
        #[arg(long, requires = "automaton")]
        start2: Option<String>,
    },
    /// Expression for a state, by elimination of the state variables.
    ToExpr {
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        normalize: bool,
    },
    /// Automaton of the derivatives of an expression; its start state is q0.
    #[command(group(ArgGroup::new("input").required(true).args(["expr"])))]
    ToAutomaton {
        #[command(flatten)]
        expr: ExprOpts,
    },
    /// Canonical form of an expression.
    #[command(group(ArgGroup::new("input").required(true).args(["expr"])))]
    Normalize {
        #[command(flatten)]
        expr: ExprOpts,
    },
    /// Replay a derivation script and audit it on short words.
    CheckProof {
        #[arg(long)]
        script: PathBuf,
        /// Word length for the semantic audit; 0 skips it.
        #[arg(long, default_value_t = 4)]
        audit: usize,
        #[arg(long, short)]
        quiet: bool,
    },
    /// Subset construction of a Boolean automaton.
    Determinize {
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long)]
        start: Option<String>,
    },
    /// Graphviz rendering of an automaton.
    Dot {
        #[arg(long)]
        automaton: PathBuf,
    },
}

#[derive(Args)]
struct ExprOpts {
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    #[arg(long, default_value = "integers")]
    semiring: String,
    /// Letters separated by spaces or commas; defaults to the letters used.
    #[arg(long)]
    alphabet: Option<String>,
}

impl ExprOpts {
    fn semiring(&self) -> Result<Semiring, Error> {
        self.semiring.parse()
    }

    fn declared_alphabet(&self) -> Option<Vec<String>> {
        self.alphabet.as_ref().map(|a| {
            a.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect()
        })
    }

    fn parse(&self, text: &str) -> Result<Expr, Error> {
        let mut p = ExprParser::new(self.semiring()?);
        if let Some(a) = self.declared_alphabet() {
            p = p.alphabet(&a);
        }
        p.parse(text)
    }

    fn alphabet_for(&self, exprs: &[&Expr]) -> Vec<String> {
        self.declared_alphabet().unwrap_or_else(|| {
            let letters: BTreeSet<String> = exprs.iter().flat_map(|e| e.letters()).collect();
            letters.into_iter().collect()
        })
    }

    fn required(&self) -> Result<Expr, Error> {
        match &self.expr {
            Some(t) => self.parse(t),
            None => Err(Error::syntax(0, 0, "--expr is required")),
        }
    }
}

/// Largest expression, counted as a tree, that is printed.
const MAX_NODES: usize = 1_000_000;

enum Outcome {
    Ok(String),
    Rejected(String),
}

fn load(path: &PathBuf) -> Result<WeightedAutomaton, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Construction(format!("cannot read {}: {e}", path.display())))?;
    WeightedAutomaton::parse(&text)
}

fn start_of(aut: &WeightedAutomaton, start: &Option<String>) -> Result<Configuration, Error> {
    match start {
        Some(s) => aut.parse_configuration(s),
        None if aut.num_states() > 0 => Ok(aut.unit(0)),
        None => Err(Error::UndeclaredState("automaton has no states".into())),
    }
}

fn verdict(v: Verdict) -> Outcome {
    match v {
        Verdict::Equivalent => Outcome::Ok("EQUIVALENT".into()),
        Verdict::Counterexample { word, left, right } => {
            Outcome::Rejected(format!("COUNTEREXAMPLE {} {left} {right}", format_word(&word)))
        }
    }
}

fn run(cmd: Command) -> Result<Outcome, Error> {
    Ok(match cmd {
        Command::Eval {
            expr,
            automaton,
            start,
            word,
        } => {
            if let Some(path) = automaton {
                let aut = load(&path)?;
                let cfg = start_of(&aut, &start)?;
                let w = parse_word(&word, aut.alphabet())?;
                Outcome::Ok(aut.eval_word(&cfg, &w)?.to_string())
            } else {
                let e = expr.required()?;
                let alphabet = expr.alphabet_for(&[&e]);
                let w = parse_word(&word, &alphabet)?;
                let mut ev = DerivativeEval::new(expr.semiring()?);
                Outcome::Ok(ev.eval(&e, &w)?.to_string())
            }
        }
        Command::Equiv {
            expr,
            expr2,
            automaton,
            start,
            automaton2,
            start2,
        } => {
            if let Some(path) = automaton {
                let l = load(&path)?;
                let r = match &automaton2 {
                    Some(p) => load(p)?,
                    None => l.clone(),
                };
                let (sl, sr) = (start_of(&l, &start)?, start_of(&r, &start2)?);
                verdict(decide_equiv(&l, &sl, &r, &sr)?)
            } else {
                let e1 = expr.required()?;
                let e2 = match &expr2 {
                    Some(t) => expr.parse(t)?,
                    None => return Err(Error::syntax(0, 0, "--expr2 is required with --expr")),
                };
                let alphabet = expr.alphabet_for(&[&e1, &e2]);
                verdict(decide_expr_equiv(&e1, &e2, expr.semiring()?, &alphabet)?)
            }
        }
        Command::ToExpr {
            automaton,
            state,
            normalize: norm,
        } => {
            let aut = load(&automaton)?;
            let e = automaton_to_expr(&aut, aut.state_id(&state)?)?;
            if norm {
                Outcome::Ok(normalize(&e, aut.semiring()).expr().render(MAX_NODES)?)
            } else {
                // Zero-weight branches are kept, so the tree grows fast.
                Outcome::Ok(e.render(MAX_NODES).map_err(|e| {
                    Error::Construction(format!("{e}; `--normalize` drops the zero-weight branches"))
                })?)
            }
        }
        Command::ToAutomaton { expr } => {
            let e = expr.required()?;
            let alphabet = expr.alphabet_for(&[&e]);
            let s = expr_to_automaton(&e, expr.semiring()?, &alphabet)?;
            Outcome::Ok(s.automaton.to_text().trim_end().to_string())
        }
        Command::Normalize { expr } => {
            let e = expr.required()?;
            Outcome::Ok(normalize(&e, expr.semiring()?).expr().render(MAX_NODES)?)
        }
        Command::CheckProof { script, audit, quiet } => {
            let text = std::fs::read_to_string(&script)
                .map_err(|e| Error::Construction(format!("cannot read {}: {e}", script.display())))?;
            let d = parse_script(&text)?;
            let replay = match check_derivation(&d) {
                Ok(r) => r,
                Err(Error::Proof { step, message }) => {
                    return Ok(Outcome::Rejected(format!("INVALID at step {step}: {message}")));
                }
                Err(e) => return Err(e),
            };
            let mut out = if quiet { Vec::new() } else { replay.trace.clone() };
            if audit > 0 {
                let report = semantic_audit(&d, audit)?;
                if let Some((label, word, l, r)) = report.failures.first() {
                    return Ok(Outcome::Rejected(format!(
                        "AUDIT FAILED at step {label}: {} weighs {l} before and {r} after",
                        format_word(word)
                    )));
                }
                out.push(format!(
                    "audit: {} equalities agree on {} words up to length {audit}",
                    report.pairs, report.words
                ));
            }
            out.push(format!(
                "VALID ({} primitive steps, level {})",
                replay.primitive_steps, d.level
            ));
            Outcome::Ok(out.join("\n"))
        }
        Command::Determinize { automaton, start } => {
            let aut = load(&automaton)?;
            let dfa = aut.subset_construct(&start_of(&aut, &start)?)?;
            Outcome::Ok(dfa.to_text(&aut).trim_end().to_string())
        }
        Command::Dot { automaton } => Outcome::Ok(load(&automaton)?.to_dot().trim_end().to_string()),
    })
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Ok(text)) => {
            emit(&text);
            ExitCode::SUCCESS
        }
        Ok(Outcome::Rejected(text)) => {
            emit(&text);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
