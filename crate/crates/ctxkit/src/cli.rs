//! Subcommand dispatch. Every report goes to stdout as one JSON document.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ctxkit_core::catalog::{catalog_get, specialize, CatalogId, InequalityExpr};
use ctxkit_core::linalg::{DensityMatrix, TOL};
use ctxkit_core::observables::{build_ks18, ObservableSet};
use ctxkit_core::parity::{ks_colorable, parity_stats, Colorability};
use ctxkit_core::quantum::{
    certify_state_independence, evaluate_inequality, make_state, max_quantum_value, require_valid, StateSpec,
};
use ctxkit_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::json::{describe_state, named_state, parse_inequality, parse_state, parse_subs, EstimateReportJson, InequalityJson};
use crate::{parallel, CliError};

/// Qubit count used for `ineq9` and `mermin11` when `--n` is absent.
pub const DEFAULT_MERMIN_N: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "ctxkit", version, about = "State-independent noncontextuality inequalities")]
pub struct Cli {
    /// Add wall-clock timing to the report (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct IneqArgs {
    /// Catalog id or path to an inequality JSON file.
    #[arg(long)]
    pub inequality: String,
    /// Qubit count for the Mermin-star inequalities.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact classical bound by exhaustive search.
    Bound(IneqArgs),
    /// Inequality value at a state.
    Quantum {
        #[command(flatten)]
        ineq: IneqArgs,
        /// Named state or path to a state JSON file.
        #[arg(long)]
        state: String,
    },
    /// State-independence certificate, classical bound and gap.
    Certify(IneqArgs),
    /// Largest eigenvalue of the Bell operator.
    Maxval(IneqArgs),
    /// 0/1 colorability and parity statistics of the 18-ray set.
    Colorability,
    /// Monte Carlo run of the sequential-measurement protocol.
    Simulate {
        #[command(flatten)]
        ineq: IneqArgs,
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write a per-term table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Min, max and mean over seeded Haar-random states.
    Sweep {
        #[command(flatten)]
        ineq: IneqArgs,
        #[arg(long, default_value_t = 1000)]
        states: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write a per-state table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Substitute fixed ±1 values and recompute the bound.
    Specialize {
        #[command(flatten)]
        ineq: IneqArgs,
        /// JSON object mapping labels to ±1.
        #[arg(long)]
        subs: PathBuf,
    },
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub version: &'static str,
    pub inputs: Value,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

/// What a process run would produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Catalog entry, or an inequality JSON file when `arg` names an existing path.
pub fn resolve_inequality(arg: &str, n: Option<usize>) -> Result<InequalityExpr, CliError> {
    match arg.parse::<CatalogId>() {
        Ok(id) => {
            let n = if id.needs_n() { Some(n.unwrap_or(DEFAULT_MERMIN_N)) } else { n };
            Ok(catalog_get(arg, n)?)
        }
        Err(_) if Path::new(arg).is_file() => parse_inequality(&read(Path::new(arg))?),
        Err(e) => Err(e.into()),
    }
}

pub fn resolve_state(arg: &str) -> Result<StateSpec, CliError> {
    if let Some(s) = named_state(arg) {
        return Ok(s);
    }
    if Path::new(arg).is_file() {
        return parse_state(&read(Path::new(arg))?);
    }
    Err(Error::NotFound(format!("unknown state '{arg}'")).into())
}

fn setup(ineq: &IneqArgs) -> Result<(InequalityExpr, ObservableSet), CliError> {
    let expr = resolve_inequality(&ineq.inequality, ineq.n)?;
    let set = expr.set_id.build()?;
    Ok((expr, set))
}

fn ineq_inputs(expr: &InequalityExpr) -> Value {
    json!({ "inequality": expr.id, "set_id": expr.set_id.to_string() })
}

fn state_for(spec: &StateSpec, set: &ObservableSet) -> Result<DensityMatrix, CliError> {
    Ok(make_state(spec, set.dimension())?)
}

/// Run one parsed command.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let start = Instant::now();
    let (command, inputs, results) = match &cli.command {
        Command::Bound(a) => {
            let (expr, _) = setup(a)?;
            let r = parallel::classical_bound(&expr)?;
            let witness: BTreeMap<String, i64> =
                r.witness.iter().map(|(l, s)| (l.to_string(), s.value())).collect();
            let results = json!({
                "classical_bound": r.bound,
                "evaluations": r.evaluations,
                "witness": witness,
            });
            ("bound", ineq_inputs(&expr), results)
        }
        Command::Quantum { ineq, state } => {
            let (expr, set) = setup(ineq)?;
            let spec = resolve_state(state)?;
            let rho = state_for(&spec, &set)?;
            let value = evaluate_inequality(&rho, &set, &expr)?;
            let mut inputs = ineq_inputs(&expr);
            inputs["state"] = json!(describe_state(&spec));
            ("quantum", inputs, json!({ "value": value }))
        }
        Command::Certify(a) => {
            let (expr, set) = setup(a)?;
            require_valid(&expr, &set)?;
            let cert = certify_state_independence(&set, &expr, TOL)?;
            let bound = parallel::classical_bound(&expr)?.bound;
            let gap = cert.is_state_independent.then_some(cert.constant - bound as f64);
            let results = json!({
                "classical_bound": bound,
                "quantum_constant": cert.constant,
                "state_independent": cert.is_state_independent,
                "residual": cert.residual,
                "gap": gap,
            });
            ("certify", ineq_inputs(&expr), results)
        }
        Command::Maxval(a) => {
            let (expr, set) = setup(a)?;
            let v = max_quantum_value(&set, &expr)?;
            ("maxval", ineq_inputs(&expr), json!({ "max_quantum_value": v }))
        }
        Command::Colorability => {
            let (rays, set) = build_ks18()?;
            let coloring = ks_colorable(&rays)?;
            let stats = parity_stats(&set)?;
            let witness = match &coloring.verdict {
                Colorability::Sat(ones) => json!(ones.iter().map(|l| l.to_string()).collect::<Vec<_>>()),
                Colorability::Unsat => Value::Null,
            };
            let occurrences: BTreeMap<String, usize> =
                stats.occurrences.iter().map(|(l, n)| (l.to_string(), *n)).collect();
            let results = json!({
                "colorable": matches!(coloring.verdict, Colorability::Sat(_)),
                "witness": witness,
                "nodes": coloring.nodes,
                "context_count": stats.context_count,
                "occurrences": occurrences,
                "all_occurrences_even": stats.all_occurrences_even(),
                "minus_contexts": stats.minus_contexts,
                "parity_contradiction": stats.parity_contradiction,
            });
            ("colorability", json!({ "set_id": "ks18" }), results)
        }
        Command::Simulate { ineq, state, shots, seed, csv } => {
            let (expr, set) = setup(ineq)?;
            let spec = resolve_state(state)?;
            let rho = state_for(&spec, &set)?;
            let report = parallel::run_protocol(&rho, &set, &expr, *shots, *seed)?;
            if let Some(path) = csv {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["term_index", "term", "estimate", "stderr", "shots"])?;
                for (i, (t, e)) in expr.terms.iter().zip(&report.terms).enumerate() {
                    w.serialize((i, t.to_string(), e.estimate, e.standard_error, e.shots))?;
                }
                w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
            }
            let desc = describe_state(&spec);
            let results = serde_json::to_value(EstimateReportJson::new(&expr.id, &desc, &report))?;
            let mut inputs = ineq_inputs(&expr);
            inputs["state"] = json!(desc);
            inputs["shots"] = json!(shots);
            inputs["seed"] = json!(seed);
            ("simulate", inputs, results)
        }
        Command::Sweep { ineq, states, seed, csv } => {
            let (expr, set) = setup(ineq)?;
            let values = parallel::haar_sweep(&set, &expr, *states, *seed)?;
            let summary = parallel::summarize(&values)
                .ok_or_else(|| CliError::Usage("--states must be positive".into()))?;
            if let Some(path) = csv {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["state_index", "value"])?;
                for (i, v) in values.iter().enumerate() {
                    w.serialize((i, v))?;
                }
                w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
            }
            let results = json!({
                "count": values.len(),
                "min": summary.min,
                "max": summary.max,
                "mean": summary.mean,
            });
            let mut inputs = ineq_inputs(&expr);
            inputs["states"] = json!(states);
            inputs["seed"] = json!(seed);
            ("sweep", inputs, results)
        }
        Command::Specialize { ineq, subs } => {
            let (expr, _) = setup(ineq)?;
            let map = parse_subs(&read(subs)?)?;
            let (special, constant) = specialize(&expr, &map)?;
            let bound = parallel::classical_bound(&special)?.bound;
            let results = json!({
                "expression": InequalityJson::from(&special),
                "dropped_constant": constant,
                "classical_bound": bound,
            });
            let subs_json: BTreeMap<String, i64> = map.iter().map(|(l, s)| (l.to_string(), s.value())).collect();
            let mut inputs = ineq_inputs(&expr);
            inputs["subs"] = json!(subs_json);
            ("specialize", inputs, results)
        }
    };
    let timing_ms = cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok(Report { command, version: env!("CARGO_PKG_VERSION"), inputs, results, timing_ms })
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message }).to_string()
}

/// Parse `argv` (program name first), run, and collect exit code and output.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: e.to_string(), stderr: String::new() }
                }
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: error_json("invalid_argument", e.to_string().trim()),
                },
            };
        }
    };
    match execute(&cli) {
        Ok(report) => match serde_json::to_string(&report) {
            Ok(s) => Outcome { code: 0, stdout: s, stderr: String::new() },
            Err(e) => Outcome { code: 1, stdout: String::new(), stderr: error_json("internal", &e.to_string()) },
        },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: error_json(e.kind(), &e.to_string()) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Outcome {
        dispatch(std::iter::once("ctxkit").chain(args.iter().copied()))
    }

    #[test]
    fn missing_n_falls_back_to_three_qubits() {
        let out = run(&["bound", "--inequality", "mermin11"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("mermin_star:3"));
    }

    #[test]
    fn bad_flag_is_invalid_input() {
        let out = run(&["bound", "--nope"]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("invalid_argument"));
    }

    #[test]
    fn timing_is_opt_in() {
        assert!(!run(&["maxval", "--inequality", "chsh8"]).stdout.contains("timing_ms"));
        assert!(run(&["--timing", "maxval", "--inequality", "chsh8"]).stdout.contains("timing_ms"));
    }
}
