//! Command-line front end. `run` returns the exit code and report instead of
//! exiting so it can be driven from tests.

use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::bank::{named_witness_variant, NamedWitness, BANK_IDS};
use crate::bloch::{matched_witness_search, max_over_class, rational_threshold, OptimizerOptions, SearchOptions, WitnessSpec};
use crate::decomp::verify_decomposition;
use crate::error::{Error, Result};
use crate::graph::named_pure_state;
use crate::io;
use crate::pauli::{char_from_density, CharTensor, DensityMatrix, PauliString, SeparabilityClass};
use crate::suite::{paper_suite, SuiteOptions};
use crate::xstate::{theorem2_verdict, Verdict, XState};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub report: String,
}

#[derive(Parser, Debug)]
#[command(name = "sepcert", version, about = "Separability certificates for few-qubit states")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Numerical tolerance for state validation and decomposition checks
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Grid resolution for oracles and scans
    #[arg(long, global = true, default_value_t = 48)]
    resolution: usize,
    /// Optimizer starts per partition
    #[arg(long, global = true, default_value_t = 32)]
    starts: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Characteristic function (Pauli expansion) of a state
    Charfn { state: String },
    /// Separability verdict for a three-qubit X state
    Xcheck { xstate: String },
    /// Witness bound over a separability class
    Bound {
        #[arg(long)]
        witness: String,
        #[arg(long)]
        class: Option<String>,
    },
    /// Critical white-noise mixing parameter of a witness and pure state
    Threshold {
        #[arg(long)]
        witness: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        class: Option<String>,
    },
    /// Matched-witness search for an entanglement certificate
    Certify {
        state: String,
        #[arg(long)]
        class: String,
        /// Comma-separated support strings (default: nonzero non-identity entries)
        #[arg(long, value_delimiter = ',')]
        support: Option<Vec<String>>,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
    },
    /// Check an explicit separable decomposition against a state
    VerifyDecomp {
        decomp: String,
        state: String,
        #[arg(long)]
        class: String,
    },
    /// Built-in witnesses
    Bank {
        #[command(subcommand)]
        action: BankAction,
    },
    /// Run every reproduction check
    PaperSuite {
        #[arg(long)]
        out: Option<String>,
        /// Use the raw cluster tri-separability witness
        #[arg(long)]
        no_repair: bool,
    },
}

#[derive(Subcommand, Debug)]
enum BankAction {
    List,
    Show {
        id: String,
        /// Show the unrepaired variant
        #[arg(long)]
        raw: bool,
    },
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{path}: {e}")))
}

fn load_state(arg: &str, tol: f64) -> Result<DensityMatrix> {
    let rho = if Path::new(arg).exists() {
        io::state_from_json(&read(arg)?)?
    } else {
        named_pure_state(arg).map_err(|_| Error::Input(format!("{arg} is neither a file nor a named state")))?
    };
    let v = rho.validate(tol);
    if !v.valid {
        return Err(Error::Input(format!(
            "not a density matrix: hermiticity defect {:.3e}, trace defect {:.3e}, min eigenvalue {:.3e}",
            v.hermiticity_defect, v.trace_defect, v.min_eigenvalue
        )));
    }
    Ok(rho)
}

enum WitnessSource {
    Bank(NamedWitness),
    File(WitnessSpec),
}

impl WitnessSource {
    fn spec(&self) -> &WitnessSpec {
        match self {
            WitnessSource::Bank(w) => &w.spec,
            WitnessSource::File(s) => s,
        }
    }

    fn class(&self, arg: Option<&str>) -> Result<SeparabilityClass> {
        let n = self.spec().n();
        match (arg, self) {
            (Some(c), _) => load_class(c, n),
            (None, WitnessSource::Bank(w)) => Ok(w.class.clone()),
            (None, WitnessSource::File(_)) => Err(Error::Input("--class is required for witness files".into())),
        }
    }
}

fn load_witness(arg: &str) -> Result<WitnessSource> {
    if BANK_IDS.contains(&arg) {
        return Ok(WitnessSource::Bank(named_witness_variant(arg, true)?));
    }
    if !Path::new(arg).exists() {
        return Err(Error::Input(format!("{arg} is neither a bank id nor a file")));
    }
    Ok(WitnessSource::File(io::witness_from_json(&read(arg)?)?))
}

fn load_class(arg: &str, n: usize) -> Result<SeparabilityClass> {
    if Path::new(arg).is_file() {
        io::class_from_str(&read(arg)?, n)
    } else {
        io::class_from_str(arg, n)
    }
}

fn optimizer(g: &Global) -> OptimizerOptions {
    OptimizerOptions { starts: g.starts, seed: g.seed, ..OptimizerOptions::default() }
}

fn render(g: &Global, text: String, value: Value) -> String {
    if g.json {
        serde_json::to_string_pretty(&value).expect("json value")
    } else {
        text
    }
}

fn charfn(g: &Global, state: &str) -> Result<CommandResult> {
    let rho = load_state(state, g.tol)?;
    let r = char_from_density(&rho)?;
    let entries = r.nonzero(g.tol);
    let mut text = format!("n = {}, {} nonzero entries (R_s = tr(rho s))\n", r.n(), entries.len());
    for (s, v) in &entries {
        text.push_str(&format!("{s}  {v:+.12}\n"));
    }
    let value = json!({
        "n": r.n(),
        "entries": entries.iter().map(|(s, v)| json!({"string": s.to_string(), "value": v})).collect::<Vec<_>>(),
    });
    Ok(CommandResult { exit_code: EXIT_PASS, report: render(g, text, value) })
}

fn load_xstate(arg: &str, tol: f64) -> Result<XState> {
    let text = read(arg)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Input(e.to_string()))?;
    if v.get("diag").is_some() {
        io::xstate_from_json(&text)
    } else {
        XState::from_density(&io::state_from_json(&text)?, tol)
    }
}

fn xcheck(g: &Global, path: &str) -> Result<CommandResult> {
    let x = load_xstate(path, g.tol)?;
    let v = theorem2_verdict(&x);
    let c = &v.certificate;
    let word = match v.verdict {
        Verdict::Separable => "separable",
        Verdict::Entangled => "entangled",
    };
    let text = format!(
        "{word}, margin {:+.6e}\n  diagonal bound {:.12}\n  Rvalue/8      {:.12}\n  Rvalue {:.12} ({} branch), Q {:.6e}, r {:.6e}\n  R_111 R_122 R_212 R_221 = {:?}\n",
        v.margin,
        v.lhs,
        v.rhs,
        c.rvalue,
        c.branch.name(),
        c.q,
        c.r,
        c.r_char
    );
    let value = json!({
        "verdict": word,
        "margin": v.margin,
        "lhs": v.lhs,
        "rhs": v.rhs,
        "certificate": {"rvalue": c.rvalue, "branch": c.branch.name(), "q": c.q, "r": c.r, "r_vector": c.r_vector, "r_char": c.r_char},
    });
    let exit_code = if v.verdict == Verdict::Separable { EXIT_PASS } else { EXIT_FAIL };
    Ok(CommandResult { exit_code, report: render(g, text, value) })
}

fn bound(g: &Global, witness: &str, class: Option<&str>) -> Result<CommandResult> {
    let w = load_witness(witness)?;
    let class = w.class(class)?;
    let res = max_over_class(w.spec(), &class, &optimizer(g))?;
    let mut text = format!("bound {:.12} (M_0 = {:.12})\n", res.bound, res.constant());
    for (p, v) in &res.per_partition {
        text.push_str(&format!("  {:<10} {v:.12}\n", p.to_string()));
    }
    text.push_str(&format!("argmax {}\n", res.argmax));
    if !res.converged {
        text.push_str("warning: some starts hit the sweep limit\n");
    }
    let value = json!({
        "bound": res.bound,
        "per_partition": res.per_partition.iter().map(|(p, v)| json!({"partition": p.to_string(), "bound": v})).collect::<Vec<_>>(),
        "argmax": res.argmax.to_string(),
        "converged": res.converged,
    });
    Ok(CommandResult { exit_code: EXIT_PASS, report: render(g, text, value) })
}

fn threshold(g: &Global, witness: &str, state: &str, class: Option<&str>) -> Result<CommandResult> {
    let w = load_witness(witness)?;
    let class = w.class(class)?;
    let pure = char_from_density(&load_state(state, g.tol)?)?;
    if pure.n() != w.spec().n() {
        return Err(Error::DimensionMismatch(format!("witness on {} qubits, state on {}", w.spec().n(), pure.n())));
    }
    let inner = w.spec().inner(&pure);
    if inner <= 0.0 {
        return Err(Error::NonPositiveInner(inner));
    }
    let b = max_over_class(w.spec(), &class, &optimizer(g))?.bound;
    let exact = rational_threshold(b, inner).ok();
    let p = exact.map(|r| *r.numer() as f64 / *r.denom() as f64).unwrap_or(b / inner);
    let mut text = format!("{p}\n");
    text.push_str(&format!("  bound {b:.12}, inner product {inner:.12}"));
    if let Some(r) = exact {
        text.push_str(&format!(", exact {r}"));
    }
    text.push('\n');
    let value = json!({"threshold": p, "bound": b, "inner": inner, "exact": exact.map(|r| r.to_string())});
    Ok(CommandResult { exit_code: EXIT_PASS, report: render(g, text, value) })
}

fn default_support(r: &CharTensor, tol: f64) -> Vec<PauliString> {
    r.nonzero(tol).into_iter().map(|(s, _)| s).filter(|s| !s.is_identity()).collect()
}

fn certify(g: &Global, state: &str, class: &str, support: Option<&[String]>, restarts: usize) -> Result<CommandResult> {
    let rho = load_state(state, g.tol)?;
    let r = char_from_density(&rho)?;
    let class = load_class(class, r.n())?;
    let support = match support {
        Some(list) => list.iter().map(|s| PauliString::parse(s.trim())).collect::<Result<Vec<_>>>()?,
        None => default_support(&r, g.tol),
    };
    let opts = SearchOptions {
        restarts,
        seed: g.seed,
        optimizer: OptimizerOptions { starts: 8, seed: g.seed, ..OptimizerOptions::default() },
        final_optimizer: optimizer(g),
        ..SearchOptions::default()
    };
    let w = matched_witness_search(&r, &support, &class, &opts)?;
    let entangled = w.p < 1.0;
    let word = if entangled { "entangled (outside the class)" } else { "inconclusive" };
    let mut text = format!("{word}: p-ratio {:.9}\n  bound {:.9}, inner product {:.9}, {} evaluations\n", w.p, w.bound, w.inner, w.evaluations);
    for (s, v) in w.witness.terms() {
        text.push_str(&format!("  {s}  {v:+.9}\n"));
    }
    let value = json!({
        "verdict": if entangled { "entangled" } else { "inconclusive" },
        "p": w.p,
        "bound": w.bound,
        "inner": w.inner,
        "witness": serde_json::from_str::<Value>(&io::witness_to_json(&w.witness)).expect("json"),
    });
    Ok(CommandResult { exit_code: if entangled { EXIT_FAIL } else { EXIT_INCONCLUSIVE }, report: render(g, text, value) })
}

fn verify_decomp(g: &Global, decomp: &str, state: &str, class: &str) -> Result<CommandResult> {
    let target = load_state(state, g.tol)?;
    let class = load_class(class, target.n())?;
    let d = io::decomposition_from_json(&read(decomp)?, target.n())?;
    let v = verify_decomposition(&d, &target, &class, g.tol)?;
    let text = format!(
        "{}\n  components {}\n  max |entry error| {:.3e}\n  min factor eigenvalue {:.3e}\n  max factor trace defect {:.3e}\n  weight sum defect {:.3e}, min weight {:.3e}\n  partitions in class {}\n",
        if v.pass { "verified" } else { "not verified" },
        d.components.len(),
        v.max_abs_error,
        v.min_factor_eigenvalue,
        v.max_factor_trace_defect,
        v.weight_sum_defect,
        v.min_weight,
        v.partitions_in_class
    );
    let value = json!({
        "pass": v.pass,
        "components": d.components.len(),
        "max_abs_error": v.max_abs_error,
        "min_factor_eigenvalue": v.min_factor_eigenvalue,
        "max_factor_trace_defect": v.max_factor_trace_defect,
        "weight_sum_defect": v.weight_sum_defect,
        "min_weight": v.min_weight,
        "partitions_in_class": v.partitions_in_class,
    });
    Ok(CommandResult { exit_code: if v.pass { EXIT_PASS } else { EXIT_FAIL }, report: render(g, text, value) })
}

fn class_label(c: &SeparabilityClass) -> String {
    c.partitions().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
}

fn bank(g: &Global, action: &BankAction) -> Result<CommandResult> {
    match action {
        BankAction::List => {
            let ws = BANK_IDS.iter().map(|id| named_witness_variant(id, true)).collect::<Result<Vec<_>>>()?;
            let mut text = String::new();
            for w in &ws {
                text.push_str(&format!("{:<18} state {:<9} bound {:<3} threshold {:<5} terms {}\n", w.id, w.state, w.bound, w.threshold.to_string(), w.spec.len()));
            }
            let value = json!(ws
                .iter()
                .map(|w| json!({"id": w.id, "state": w.state, "bound": w.bound, "threshold": w.threshold.to_string(), "terms": w.spec.len()}))
                .collect::<Vec<_>>());
            Ok(CommandResult { exit_code: EXIT_PASS, report: render(g, text, value) })
        }
        BankAction::Show { id, raw } => {
            let w = named_witness_variant(id, !raw)?;
            let mut text = format!("{}\n  state     {}\n  class     {}\n  bound     {}\n  threshold {}\n  terms\n", w.id, w.state, class_label(&w.class), w.bound, w.threshold);
            for (s, v) in w.spec.terms() {
                text.push_str(&format!("    {s}  {v:+}\n"));
            }
            for n in &w.notes {
                text.push_str(&format!("  note: {n}\n"));
            }
            let value = json!({
                "id": w.id,
                "state": w.state,
                "class": w.class.partitions().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "bound": w.bound,
                "threshold": w.threshold.to_string(),
                "terms": w.spec.terms().map(|(s, v)| json!({"string": s.to_string(), "coeff": v})).collect::<Vec<_>>(),
                "notes": w.notes,
            });
            Ok(CommandResult { exit_code: EXIT_PASS, report: render(g, text, value) })
        }
    }
}

fn suite(g: &Global, out: Option<&str>, no_repair: bool) -> Result<CommandResult> {
    let opts = SuiteOptions { resolution: g.resolution, starts: g.starts, seed: g.seed, repair: !no_repair };
    let report = paper_suite(&opts);
    let json = report.to_json();
    if let Some(path) = out {
        std::fs::write(path, format!("{json}\n")).map_err(|e| Error::Input(format!("{path}: {e}")))?;
    }
    let text = if g.json { json } else { report.to_table() };
    Ok(CommandResult { exit_code: if report.pass { EXIT_PASS } else { EXIT_FAIL }, report: text })
}

pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            return CommandResult { exit_code: code, report: e.to_string() };
        }
    };
    let g = &cli.global;
    let out = match &cli.command {
        Command::Charfn { state } => charfn(g, state),
        Command::Xcheck { xstate } => xcheck(g, xstate),
        Command::Bound { witness, class } => bound(g, witness, class.as_deref()),
        Command::Threshold { witness, state, class } => threshold(g, witness, state, class.as_deref()),
        Command::Certify { state, class, support, restarts } => certify(g, state, class, support.as_deref(), *restarts),
        Command::VerifyDecomp { decomp, state, class } => verify_decomp(g, decomp, state, class),
        Command::Bank { action } => bank(g, action),
        Command::PaperSuite { out, no_repair } => suite(g, out.as_deref(), *no_repair),
    };
    out.unwrap_or_else(|e| CommandResult { exit_code: EXIT_INPUT, report: format!("error: {e}") })
}
