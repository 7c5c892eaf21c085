//! `tensorfree run <scenario.json> <command>`: JSON report on stdout (or
//! `--out`), summary on stderr.
//!
//! Exit codes: 0 passed, 1 failed with a witness, 2 invalid scenario or
//! inputs, 3 enumeration limit exceeded.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use tensorfree::counterexample::{counterexample_analysis, default_alpha, summary as counterexample_summary};
use tensorfree::error::Error;
use tensorfree::freeness::{centered_value, singleton_grouping, test_freeness, FreenessOptions};
use tensorfree::groups::{commutator_witness, is_free_collection, prop_1_6_instance};
use tensorfree::scalar::format;
use tensorfree::scenario::{run_identity, Bounds, BoundsSpec, Scenario, IDENTITY_NAMES};
use tensorfree::spaces::{check_axioms, GramMode, MomentOracle, DEFAULT_GRAM_CAP};
use tensorfree::starwords::{alternating_blocks, parse_word, Letter};
use tensorfree::tfc::{check_tfc, find_dominating, theorem_1_8_instance_check, theorem_summary, TfcOptions};

#[derive(Parser)]
#[command(
    name = "tensorfree",
    version,
    about = "Bounded *-freeness checks for tensor products"
)]
struct Cli {
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand)]
enum Top {
    /// Load a scenario file and run one check on it.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[command(subcommand)]
    check: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Word length bound.
    #[arg(long, global = true)]
    max_len: Option<usize>,
    /// Alternating block bound for group searches.
    #[arg(long, global = true)]
    max_blocks: Option<usize>,
    /// Exponent bound for group searches.
    #[arg(long, global = true)]
    max_exp: Option<u32>,
    /// Word length of the Gram basis.
    #[arg(long, global = true)]
    gram_len: Option<usize>,
    /// Exact Gram checks (default).
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Floating-point Gram checks.
    #[arg(long, global = true)]
    float: bool,
    /// Eigenvalue tolerance in float mode.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a *-word in the tensor, or in one factor.
    Moments {
        word: String,
        /// Evaluate in factor K (1-based) instead of the tensor.
        #[arg(long)]
        factor: Option<usize>,
        /// Center each maximal single-variable block first.
        #[arg(long)]
        centered: bool,
    },
    /// Bounded *-freeness of D, with one companion report per factor.
    TestFreeness,
    /// Tensor freeness conditions for factor K.
    CheckTfc {
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Smallest factor whose freeness conditions hold.
    FindDominating,
    /// Group-level freeness of the diagonal elements.
    GroupFreeness,
    /// Freeness of the diagonal elements and of their projections.
    #[command(name = "prop-1-6")]
    Prop16,
    /// Case split and claims of the unitary classification theorem.
    #[command(name = "theorem-1-8")]
    Theorem18,
    /// Analysis of the K-factor table example.
    CounterexampleK { k: usize },
    /// Identity and inequality checks on the scenario's inputs.
    Identities { name: String },
    /// Unitality, positivity and traciality of every factor and the tensor.
    CheckAxioms,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Moments { .. } => "moments",
            Command::TestFreeness => "test-freeness",
            Command::CheckTfc { .. } => "check-tfc",
            Command::FindDominating => "find-dominating",
            Command::GroupFreeness => "group-freeness",
            Command::Prop16 => "prop-1-6",
            Command::Theorem18 => "theorem-1-8",
            Command::CounterexampleK { .. } => "counterexample-k",
            Command::Identities { .. } => "identities",
            Command::CheckAxioms => "check-axioms",
        }
    }
}

#[derive(Serialize)]
struct RunReport {
    scenario: String,
    command: &'static str,
    bounds: Bounds,
    passed: bool,
    result: Value,
}

struct Outcome {
    passed: bool,
    summary: String,
    result: Value,
}

fn to_value<T: Serialize>(v: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn gram_mode(flags: &Flags) -> GramMode {
    if flags.float {
        GramMode::Float {
            tolerance: flags.tolerance,
        }
    } else {
        GramMode::Exact
    }
}

fn execute(scenario: &Scenario, check: &Command, bounds: &Bounds, flags: &Flags) -> anyhow::Result<Outcome> {
    let tensor = &scenario.tensor;
    let freeness_opts = FreenessOptions {
        max_len: bounds.max_len,
        max_blocks: None,
        word_cap: bounds.word_cap,
    };
    let tfc_opts = TfcOptions::new(bounds.max_len).with_gram_len(bounds.gram_len);
    Ok(match check {
        Command::Moments { word, factor, centered } => {
            let w = parse_word(word)?;
            let oracle: Box<dyn MomentOracle> = match factor {
                Some(k) if *k >= 1 && *k <= tensor.num_factors() => Box::new(tensor.factor_view(k - 1)),
                Some(k) => return Err(Error::InvalidScenario(format!("no factor {k}")).into()),
                None => Box::new(tensor.clone()),
            };
            let value = if *centered {
                let blocks: Vec<&[Letter]> = alternating_blocks(w.letters()).into_iter().map(|(_, b)| b).collect();
                centered_value(oracle.as_ref(), &blocks)?
            } else {
                oracle.moment(&w)?
            };
            let v = format(&value);
            Outcome {
                passed: true,
                summary: format!("{}phi({w}) = {v}", if *centered { "centered " } else { "" }),
                result: json!({"word": w.to_string(), "factor": factor, "centered": centered, "value": v}),
            }
        }
        Command::TestFreeness => {
            let verdict = test_freeness(tensor, &singleton_grouping(tensor), freeness_opts)?;
            let mut companions = Vec::new();
            let mut lines = vec![format!("D: {verdict}")];
            for k in 0..tensor.num_factors() {
                let view = tensor.factor_view(k);
                let v = test_freeness(&view, &singleton_grouping(&view), freeness_opts)?;
                lines.push(format!("{}: {v}", tensor.factor_name(k)));
                companions.push(json!({
                    "factor": k + 1,
                    "name": tensor.factor_name(k),
                    "declared_free": tensor.factor_declared_free(k),
                    "verdict": v,
                }));
            }
            Outcome {
                passed: verdict.free,
                summary: lines.join("\n"),
                result: json!({"tensor": verdict, "factors": companions}),
            }
        }
        Command::CheckTfc { k } => {
            if *k == 0 || *k > tensor.num_factors() {
                return Err(Error::InvalidScenario(format!("no factor {k}")).into());
            }
            match check_tfc(tensor, k - 1, tfc_opts) {
                Ok(r) => Outcome {
                    passed: r.satisfied,
                    summary: r.to_string(),
                    result: to_value(&r)?,
                },
                Err(Error::FactorNotFree { factor, witness }) => Outcome {
                    passed: false,
                    summary: format!("factor {factor} is not free: witness {witness}"),
                    result: json!({"factor": factor, "factor_not_free": witness}),
                },
                Err(e) => return Err(e.into()),
            }
        }
        Command::FindDominating => {
            let r = find_dominating(tensor, tfc_opts)?;
            Outcome {
                passed: r.dominating.is_some(),
                summary: match r.dominating {
                    Some(k) => format!("dominating factor {k} at length {}", r.max_len),
                    None => format!("no dominating factor at length {}", r.max_len),
                },
                result: to_value(&r)?,
            }
        }
        Command::GroupFreeness => {
            let g = scenario.group()?;
            let verdict = is_free_collection(&g.presentation, &g.elements, bounds.search())?;
            let p = &scenario.file.parameters;
            let commutator = match (p.m, p.n, p.i, p.j) {
                (Some(m), Some(n), Some(i), Some(j)) if i >= 1 && j >= 1 => Some(commutator_witness(
                    &g.presentation,
                    &g.elements,
                    i as usize - 1,
                    j as usize - 1,
                    m,
                    n,
                )?),
                _ => None,
            };
            let mut summary = if verdict.free {
                format!("free within {} blocks, exponent {}", bounds.max_blocks, bounds.max_exp)
            } else {
                format!("not free: {} = e", verdict.witness.as_deref().unwrap_or("?"))
            };
            if let Some(c) = &commutator {
                summary += &format!("; commutator {} reduces to e: {}", c.word, c.reduces_to_identity);
            }
            Outcome {
                passed: verdict.free,
                summary,
                result: json!({"verdict": verdict, "commutator": commutator}),
            }
        }
        Command::Prop16 => {
            let g = scenario.group()?;
            let r = prop_1_6_instance(&g.presentation, &g.elements, bounds.search())?;
            Outcome {
                passed: !r.implementation_suspect,
                summary: if r.collection_free {
                    format!("collection free; dominating factor {:?}", r.dominating)
                } else {
                    format!(
                        "collection not free: {}",
                        r.collection_witness.as_deref().unwrap_or("?")
                    )
                },
                result: to_value(&r)?,
            }
        }
        Command::Theorem18 => {
            let r = theorem_1_8_instance_check(tensor, tfc_opts)?;
            Outcome {
                passed: r.consistent,
                summary: theorem_summary(&r),
                result: to_value(&r)?,
            }
        }
        Command::CounterexampleK { k } => {
            let alpha = scenario.alpha()?.unwrap_or_else(default_alpha);
            let r = counterexample_analysis(*k, &alpha, bounds.max_len)?;
            Outcome {
                passed: r.consistent,
                summary: counterexample_summary(&r),
                result: to_value(&r)?,
            }
        }
        Command::Identities { name } => {
            let names: Vec<&str> = if name == "all" {
                IDENTITY_NAMES.to_vec()
            } else if IDENTITY_NAMES.contains(&name.as_str()) {
                vec![name.as_str()]
            } else {
                return Err(Error::InvalidScenario(format!(
                    "unknown identity `{name}` (expected all or one of {})",
                    IDENTITY_NAMES.join(", ")
                ))
                .into());
            };
            let mut entries = Vec::new();
            let (mut passed, mut failed) = (0, 0);
            for n in names {
                for (idx, input) in scenario.file.identities.get(n).into_iter().flatten().enumerate() {
                    let entry = match run_identity(n, input) {
                        Ok(o) => {
                            if o.passed() {
                                passed += 1;
                            } else {
                                failed += 1;
                            }
                            json!({"name": n, "input": idx, "passed": o.passed(), "outcome": o})
                        }
                        Err(Error::HypothesisNotMet(reason)) => {
                            json!({"name": n, "input": idx, "hypothesis_not_met": reason})
                        }
                        Err(e) => return Err(e.into()),
                    };
                    entries.push(entry);
                }
            }
            Outcome {
                passed: failed == 0,
                summary: format!("{passed} passed, {failed} failed, {} inputs", entries.len()),
                result: json!({"checks": entries}),
            }
        }
        Command::CheckAxioms => {
            let mode = gram_mode(flags);
            let mut reports = Vec::new();
            let mut lines = Vec::new();
            let mut ok = true;
            for k in 0..tensor.num_factors() {
                let view = tensor.factor_view(k);
                let r = check_axioms(&view, &view.variables(), bounds.gram_len, mode, DEFAULT_GRAM_CAP)?;
                ok &= r.unital && r.hermitian && r.positive_semidefinite;
                lines.push(format!("{}: {r}", tensor.factor_name(k)));
                reports.push(json!({"factor": k + 1, "report": r}));
            }
            let r = check_axioms(tensor, &tensor.indices(), bounds.gram_len, mode, DEFAULT_GRAM_CAP)?;
            ok &= r.unital && r.hermitian && r.positive_semidefinite;
            lines.push(format!("tensor: {r}"));
            Outcome {
                passed: ok,
                summary: lines.join("\n"),
                result: json!({"factors": reports, "tensor": r}),
            }
        }
    })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::LimitExceeded { .. }) => 3,
        _ => 2,
    }
}

fn run(args: RunArgs) -> anyhow::Result<u8> {
    let scenario = Scenario::load(&args.scenario)?;
    let overrides = BoundsSpec {
        max_len: args.flags.max_len,
        max_blocks: args.flags.max_blocks,
        max_exp: args.flags.max_exp,
        gram_len: args.flags.gram_len,
        word_cap: None,
    };
    let bounds = scenario.bounds(&overrides);
    let start = Instant::now();
    let outcome = execute(&scenario, &args.check, &bounds, &args.flags)?;
    let report = RunReport {
        scenario: scenario.file.name.clone(),
        command: args.check.name(),
        bounds,
        passed: outcome.passed,
        result: outcome.result,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.flags.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    eprintln!("{}", outcome.summary);
    eprintln!(
        "{}: {} in {:.2?}",
        report.command,
        if report.passed { "passed" } else { "FAILED" },
        start.elapsed()
    );
    Ok(if report.passed { 0 } else { 1 })
}

fn main() -> ExitCode {
    let Top::Run(args) = Cli::parse().command;
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
