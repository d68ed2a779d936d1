//! `peerclass` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 mechanism
//! precondition not met, 4 property violation detected.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use peerclass::adversarial::{generate, Family};
use peerclass::io::{facts_to_json, graph_digest, graph_to_json, parse_graph_json, parse_rational_list};
use peerclass::measures::sample_selection;
use peerclass::verify::{claimed_bound, default_palette, ic_audit, quality_floor, sweep, sweep_csv, BoundFormulas, EnsembleSpec};
use peerclass::{
    coincidence, expected_coincidence, rankings, scores, worthy_set, Error, MeasureKind, Mechanism, MechanismConfig,
    Outcome, Rational, WeightedDigraph,
};

#[derive(Parser, Debug)]
#[command(name = "peerclass", version, about = "Incentive-compatible worthy/unworthy classification on review graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-agent score, ranking and worthy flag.
    Score {
        /// Graph JSON file, or `-` for stdin.
        graph: PathBuf,
        #[arg(long)]
        alpha: Rational,
    },
    /// Run one mechanism on one graph and print its output as JSON.
    Classify {
        graph: PathBuf,
        #[arg(long)]
        mechanism: Mechanism,
        #[arg(long)]
        alpha: Rational,
        /// Out-degree cap; defaults to the graph's largest out-degree.
        #[arg(long)]
        delta: Option<usize>,
        /// Realise a probabilistic assignment with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Coincidence of a mechanism with the worthy set, on one graph or over an
    /// ensemble. Exits 4 if a guaranteed bound is violated.
    Eval {
        /// Graph JSON file; without it a seeded ensemble is evaluated.
        graph: Option<PathBuf>,
        #[arg(long)]
        mechanism: Mechanism,
        #[arg(long)]
        alpha: Rational,
        #[arg(long)]
        delta: Option<usize>,
        /// Measures to report (C, C', C''); all three by default.
        #[arg(long = "measure")]
        measures: Vec<MeasureKind>,
        #[command(flatten)]
        ensemble: EnsembleArgs,
    },
    /// Fuzz a mechanism with single-agent manipulations. Violations are printed
    /// as JSON lines; exits 4 if there are any.
    IcAudit {
        #[arg(long)]
        mechanism: Mechanism,
        #[arg(long, default_value = "1/2")]
        alpha: Rational,
        #[arg(long, default_value_t = 3)]
        delta: usize,
        /// Total manipulations, spread evenly over the ensemble graphs.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        ensemble: EnsembleArgs,
    },
    /// Emit an adversarial instance with its golden facts.
    Adversary {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: Rational,
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Write `<family>-<label>.graph.json` and `.facts.json` files here
        /// instead of printing one JSON document.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Empirical minima against the known quality band, as CSV.
    Sweep {
        /// Comma-separated list or inclusive `start:stop:step` range.
        #[arg(long)]
        alphas: String,
        #[arg(long)]
        delta: usize,
        #[command(flatten)]
        ensemble: EnsembleArgs,
    },
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Random graphs in the ensemble.
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    ensemble_seed: u64,
    /// Weights to draw from, e.g. `-1,0,1`.
    #[arg(long)]
    palette: Option<String>,
    /// Leave the adversarial family members out of the ensemble.
    #[arg(long)]
    no_adversarial: bool,
}

impl EnsembleArgs {
    fn spec(&self, n: usize, delta: usize, alpha: &Rational) -> Result<EnsembleSpec, Failure> {
        let mut e = EnsembleSpec::new(n, delta, alpha.clone(), self.count, self.ensemble_seed);
        if let Some(p) = &self.palette {
            e.weight_palette = parse_rational_list(p)?;
        } else {
            e.weight_palette = default_palette();
        }
        e.include_adversarial = !self.no_adversarial;
        e.validate()?;
        Ok(e)
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Precondition(String),
    Violation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Precondition(_) => 3,
            Failure::Violation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Precondition(m) | Failure::Violation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = match &e {
            Error::BetaNotPositive { .. } => format!("{e}; the W/U/B mechanisms need delta < alpha n"),
            _ => e.to_string(),
        };
        if e.is_precondition() {
            Failure::Precondition(msg)
        } else {
            Failure::Input(msg)
        }
    }
}

fn read_graph(path: &Path) -> Result<WeightedDigraph, Failure> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Failure::Input(format!("stdin: {e}")))?
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
    };
    parse_graph_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn config(alpha: &Rational, delta: Option<usize>, g: Option<&WeightedDigraph>) -> Result<MechanismConfig, Failure> {
    let delta = delta.or(g.map(WeightedDigraph::max_out_degree)).unwrap_or(0);
    Ok(MechanismConfig::new(alpha.clone(), delta)?)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn run_score(graph: &Path, alpha: &Rational) -> Result<(), Failure> {
    let g = read_graph(graph)?;
    let worthy = worthy_set(&g, alpha)?;
    let (s, r) = (scores(&g), rankings(&g));
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "id\tscore\tranking\tworthy");
    for x in g.agents() {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", x.0, s[x.0], r[x.0], worthy.contains(x));
    }
    Ok(())
}

fn run_classify(graph: &Path, mech: &Mechanism, alpha: &Rational, delta: Option<usize>, seed: Option<u64>) -> Result<(), Failure> {
    let g = read_graph(graph)?;
    let cfg = config(alpha, delta, Some(&g))?;
    let mut doc = json!({
        "mechanism": mech.name(),
        "n": g.n(),
        "alpha": alpha,
        "delta": cfg.delta,
        "digest": graph_digest(&g),
    });
    match mech.outcome(&g, &cfg)? {
        Outcome::Deterministic(m) => {
            doc["worthy"] = json!(m.ids());
        }
        Outcome::Probabilistic(a) => {
            doc["probabilities"] = json!(a.probabilities());
            // the worthy list of a probabilistic mechanism is one seeded draw
            doc["worthy"] = match seed {
                Some(s) => json!(sample_selection(&a, s).ids()),
                None => Value::Null,
            };
            doc["seed"] = json!(seed);
        }
    }
    print_json(&doc);
    Ok(())
}

fn measures_or_all(measures: &[MeasureKind]) -> Vec<MeasureKind> {
    if measures.is_empty() {
        vec![MeasureKind::MainC, MeasureKind::WorthyOnlyCPrime, MeasureKind::NormalizedCDoublePrime]
    } else {
        measures.to_vec()
    }
}

fn run_eval(
    graph: Option<&Path>,
    mech: &Mechanism,
    alpha: &Rational,
    delta: Option<usize>,
    measures: &[MeasureKind],
    ens: &EnsembleArgs,
) -> Result<(), Failure> {
    let measures = measures_or_all(measures);
    let mut violated = Vec::new();
    let mut rows = Vec::new();
    match graph {
        Some(path) => {
            let g = read_graph(path)?;
            let cfg = config(alpha, delta, Some(&g))?;
            let ideal = worthy_set(&g, alpha)?;
            let outcome = mech.outcome(&g, &cfg)?;
            for kind in measures {
                let value = match &outcome {
                    Outcome::Deterministic(m) => coincidence(m, &ideal, kind)?,
                    Outcome::Probabilistic(a) => expected_coincidence(a, &ideal, kind)?,
                };
                let bound = claimed_bound(mech, kind, &cfg, g.n());
                if bound.as_ref().is_some_and(|b| value < *b) {
                    violated.push(kind.to_string());
                }
                let band = BoundFormulas::for_measure(kind, alpha, cfg.delta, g.n());
                rows.push(json!({
                    "measure": kind.as_str(),
                    "value": value,
                    "guarantee": bound,
                    "lower_formula": band.lower,
                    "upper_formula": band.upper,
                }));
            }
            print_json(&json!({
                "mechanism": mech.name(),
                "n": g.n(),
                "alpha": alpha,
                "delta": cfg.delta,
                "digest": graph_digest(&g),
                "worthy_set": ideal.ids(),
                "measures": rows,
            }));
        }
        None => {
            let e = ens.spec(ens.n, delta.unwrap_or(1), alpha)?;
            for kind in measures {
                let report = quality_floor(mech, &e, kind)?;
                if !report.violations.is_empty() {
                    violated.push(format!("{kind} on {}", report.violations.join(", ")));
                }
                rows.push(json!({
                    "measure": report.measure,
                    "minimum": report.minimum,
                    "guarantee": report.claimed_bound,
                    "lower_formula": report.formulas.lower,
                    "upper_formula": report.formulas.upper,
                    "evaluated": report.evaluated(),
                    "refused": report.refused(),
                    "violations": report.violations,
                }));
            }
            print_json(&json!({
                "mechanism": mech.name(),
                "n": e.n,
                "alpha": alpha,
                "delta": e.delta,
                "count": e.count,
                "seed": e.seed,
                "measures": rows,
            }));
        }
    }
    if violated.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{} falls below its guaranteed bound: {}", mech.name(), violated.join("; "))))
    }
}

fn run_ic_audit(mech: &Mechanism, alpha: &Rational, delta: usize, trials: usize, ens: &EnsembleArgs) -> Result<(), Failure> {
    let e = ens.spec(ens.n, delta, alpha)?;
    let per_instance = trials.div_ceil(e.count).max(1);
    let report = ic_audit(mech, &e, per_instance)?;
    let mut out = std::io::stdout().lock();
    for v in &report.violations {
        let _ = writeln!(out, "{}", v.to_json_line());
    }
    eprintln!(
        "{}: {} instances, {} manipulations, {} refused, {} violations",
        report.mechanism,
        report.instances,
        report.manipulations,
        report.precondition_failures.len(),
        report.violations.len()
    );
    if !report.is_clean() {
        return Err(Failure::Violation(format!("{} is not incentive compatible on this ensemble", report.mechanism)));
    }
    if report.manipulations == 0 {
        let reason = report.precondition_failures.first().map(|f| f.reason.clone()).unwrap_or_default();
        return Err(Failure::Precondition(format!("every instance was refused: {reason}")));
    }
    Ok(())
}

fn file_stem(family: Family, label: &str) -> String {
    let label: String = label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else if c == '\'' { 'p' } else { '-' }).collect();
    format!("{family}-{label}")
}

fn run_adversary(
    family: Family,
    n: usize,
    alpha: &Rational,
    delta: Option<usize>,
    k: usize,
    out_dir: Option<&Path>,
) -> Result<(), Failure> {
    let inst = generate(family, n, alpha, delta, k)?;
    inst.verify().map_err(|e| Failure::Violation(format!("generated facts do not hold: {e}")))?;
    let facts = inst.facts();
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
            for (fg, doc) in inst.graphs.iter().zip(&facts) {
                let stem = file_stem(family, &fg.label);
                for (suffix, body) in [("graph.json", graph_to_json(&fg.graph)), ("facts.json", facts_to_json(doc))] {
                    let path = dir.join(format!("{stem}.{suffix}"));
                    fs::write(&path, body + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    println!("{}", path.display());
                }
            }
        }
        None => {
            let graphs: Vec<Value> = inst
                .graphs
                .iter()
                .zip(&facts)
                .map(|(fg, doc)| {
                    let graph: Value = serde_json::from_str(&graph_to_json(&fg.graph)).expect("graph JSON is valid");
                    json!({ "label": fg.label, "graph": graph, "facts": doc })
                })
                .collect();
            print_json(&json!({ "family": family.as_str(), "roles": inst.roles, "graphs": graphs }));
        }
    }
    Ok(())
}

fn run_sweep(alphas: &str, delta: usize, ens: &EnsembleArgs) -> Result<(), Failure> {
    let alphas = parse_rational_list(alphas)?;
    let first = alphas.first().cloned().unwrap_or_else(|| Rational::new(1, 2));
    let e = ens.spec(ens.n, delta, &first)?;
    let rows = sweep(&alphas, &e, &peerclass::verify::default_runs())?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Score { graph, alpha } => run_score(&graph, &alpha),
        Command::Classify { graph, mechanism, alpha, delta, seed } => run_classify(&graph, &mechanism, &alpha, delta, seed),
        Command::Eval { graph, mechanism, alpha, delta, measures, ensemble } => {
            run_eval(graph.as_deref(), &mechanism, &alpha, delta, &measures, &ensemble)
        }
        Command::IcAudit { mechanism, alpha, delta, trials, ensemble } => run_ic_audit(&mechanism, &alpha, delta, trials, &ensemble),
        Command::Adversary { family, n, alpha, delta, k, out_dir } => {
            run_adversary(family, n, &alpha, delta, k, out_dir.as_deref())
        }
        Command::Sweep { alphas, delta, ensemble } => run_sweep(&alphas, delta, &ensemble),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
