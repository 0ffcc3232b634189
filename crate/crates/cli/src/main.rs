//! `qualinet`: validate, compile and query activity-based quality networks.
//!
//! Exit status is 0 on success, 1 on domain errors and 2 on usage errors
//! (bad arguments, unreadable input paths).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qualinet::analysis::{
    compare_scenarios, explain_target, resolve_evidence, run_scenario, sensitivity, Observation,
    Scenario, SwingStatistic,
};
use qualinet::model::{export_matrix, QualityModel};
use qualinet::{compile, json, parse_model, resolve_goal, Network};

#[derive(Parser)]
#[command(name = "qualinet", version, about = "Activity-based quality models as Bayesian networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Goal to compile for (name or target activity); needed when a model has several
    #[arg(long, global = true)]
    goal: Option<String>,
    /// Write output here instead of stdout
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    /// Human-readable text instead of JSON
    #[arg(long, global = true)]
    pretty: bool,
    /// Reserved; inference is exact and ignores it
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a model
    Validate { model: PathBuf },
    /// Facts x activities impact matrix
    Matrix { model: PathBuf },
    /// Compile a model into a network document
    Compile { model: PathBuf },
    /// Posteriors under ad hoc evidence
    Infer {
        /// Network document, or a model to compile on the fly
        network: PathBuf,
        /// Scenario file supplying evidence
        evidence: Option<PathBuf>,
        /// Extra observation, `NODE=VALUE`; numbers are raw indicator values
        #[arg(long = "set", value_name = "NODE=VALUE")]
        set: Vec<String>,
    },
    /// Run one scenario file
    Scenario { network: PathBuf, scenario: PathBuf },
    /// Run several scenarios side by side
    Compare {
        network: PathBuf,
        #[arg(num_args = 2.., required = true)]
        scenarios: Vec<PathBuf>,
        /// CSV instead of JSON
        #[arg(long, conflicts_with = "pretty")]
        csv: bool,
    },
    /// Rank candidate nodes by their swing on a target
    Sensitivity {
        network: PathBuf,
        #[arg(long)]
        target: String,
        /// Sweep the probability of this target state instead of the mean
        #[arg(long)]
        state: Option<String>,
        /// Comma-separated candidates; defaults to the fact indicators
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<String>,
        /// Scenario file with base evidence
        #[arg(long)]
        evidence: Option<PathBuf>,
    },
    /// Most probable fact indicator states given a desired target
    Explain {
        network: PathBuf,
        #[arg(long)]
        target: String,
        /// State label, or raw value for an indicator target
        #[arg(long)]
        value: String,
    },
    /// Serve the HTTP API
    Serve {
        network: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory of static UI assets
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    fn domain(e: impl std::fmt::Display) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<QualityModel, Failure> {
    let text = read_input(path)?;
    parse_model(&text).map_err(|e| Failure::Domain(format!("{}:\n{e}", path.display())))
}

fn compile_model(model: &QualityModel, goal: Option<&str>) -> Result<Network, Failure> {
    let goal = resolve_goal(model, goal).map_err(Failure::domain)?;
    compile(model, goal).map_err(Failure::domain)
}

/// A `.json` path is read as a compiled network; anything else is compiled
/// as a model.
fn load_network(path: &Path, goal: Option<&str>) -> Result<Network, Failure> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = read_input(path)?;
        Network::from_json(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
    } else {
        compile_model(&load_model(path)?, goal)
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn parse_observation(text: &str) -> Observation {
    match text.parse::<f64>() {
        Ok(v) => Observation::Value(v),
        Err(_) => Observation::Label(text.to_owned()),
    }
}

fn validate(model: &QualityModel) -> String {
    format!(
        "{} activities, {} facts, {} impacts, {} indicators\n",
        model.activities.len(),
        model.facts.len(),
        model.impacts.len(),
        model.indicators.len()
    )
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    let goal = g.goal.as_deref();
    if g.seed.is_some() {
        log::debug!("--seed has no effect on exact inference");
    }
    match cli.command {
        Command::Validate { model } => {
            let model = load_model(&model)?;
            for goal in &model.goals {
                compile::<f64>(&model, goal)
                    .map_err(|e| Failure::Domain(format!("goal `{}`: {e}", goal.name)))?;
            }
            Ok(validate(&model))
        }
        Command::Matrix { model } => {
            let view = export_matrix(&load_model(&model)?);
            Ok(if g.pretty { view.to_string() } else { json::to_string(&view) })
        }
        Command::Compile { model } => {
            let net = compile_model(&load_model(&model)?, goal)?;
            Ok(net.to_json())
        }
        Command::Infer { network, evidence, set } => {
            let net = load_network(&network, goal)?;
            let mut scenario = match evidence {
                Some(path) => load_scenario(&path)?,
                None => Scenario::new("ad hoc"),
            };
            for item in &set {
                let (node, value) = item
                    .split_once('=')
                    .ok_or_else(|| Failure::Usage(format!("--set expects NODE=VALUE, got `{item}`")))?;
                scenario.evidence.insert(node.trim().to_owned(), parse_observation(value.trim()));
            }
            if g.pretty {
                let report = run_scenario(&net, &scenario).map_err(Failure::domain)?;
                Ok(report.to_text(&net))
            } else {
                qualinet_server::infer_json(&net, &scenario.evidence).map_err(Failure::domain)
            }
        }
        Command::Scenario { network, scenario } => {
            let net = load_network(&network, goal)?;
            let report = run_scenario(&net, &load_scenario(&scenario)?).map_err(Failure::domain)?;
            Ok(if g.pretty { report.to_text(&net) } else { json::to_string(&report) })
        }
        Command::Compare { network, scenarios, csv } => {
            let net = load_network(&network, goal)?;
            let scenarios = scenarios
                .iter()
                .map(|p| load_scenario(p))
                .collect::<Result<Vec<_>, _>>()?;
            let table = compare_scenarios(&net, &scenarios).map_err(Failure::domain)?;
            Ok(if csv {
                table.to_csv()
            } else if g.pretty {
                table.to_text()
            } else {
                json::to_string(&table)
            })
        }
        Command::Sensitivity { network, target, state, candidates, evidence } => {
            let net = load_network(&network, goal)?;
            let node = net
                .get(&target)
                .ok_or_else(|| Failure::Domain(format!("unknown node `{target}`")))?;
            let statistic = match &state {
                None => None,
                Some(label) => Some(SwingStatistic::Probability(node.state_index(label).ok_or_else(
                    || Failure::Domain(format!("node `{target}` has no state `{label}`")),
                )?)),
            };
            let candidates = if candidates.is_empty() {
                net.fact_indicators()
                    .into_iter()
                    .map(|i| net.node(i).id.clone())
                    .filter(|id| *id != target)
                    .collect()
            } else {
                candidates
            };
            let observations = match evidence {
                Some(path) => load_scenario(&path)?.evidence,
                None => BTreeMap::new(),
            };
            let (base, _) = resolve_evidence(&net, &observations).map_err(Failure::domain)?;
            let swings =
                sensitivity(&net, &target, statistic, &candidates, &base).map_err(Failure::domain)?;
            if !g.pretty {
                return Ok(json::to_string(&swings));
            }
            let width = swings.iter().map(|s| s.node.len()).max().unwrap_or(0);
            let mut out = String::new();
            for s in &swings {
                let _ = writeln!(
                    out,
                    "{:<width$}  swing={:.4}  min={:.4} ({})  max={:.4} ({})",
                    s.node, s.swing, s.min, s.min_state, s.max, s.max_state
                );
            }
            Ok(out)
        }
        Command::Explain { network, target, value } => {
            let net = load_network(&network, goal)?;
            let explanation =
                explain_target(&net, &target, &parse_observation(&value)).map_err(Failure::domain)?;
            if !g.pretty {
                return Ok(json::to_string(&explanation));
            }
            let mut out = format!("{target} = {value}\n");
            for (id, label) in &explanation.assignment {
                let _ = writeln!(out, "  {id} {label}");
            }
            let _ = writeln!(out, "joint probability {:.6e}", explanation.probability);
            Ok(out)
        }
        Command::Serve { network, port, host, static_dir } => {
            let net = load_network(&network, goal)?;
            let runtime = tokio::runtime::Runtime::new().map_err(Failure::domain)?;
            runtime
                .block_on(qualinet_server::serve(net, SocketAddr::new(host, port), static_dir))
                .map_err(Failure::domain)?;
            Ok(String::new())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QUALINET_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let output = cli.global.output.clone();
    let text = match run(cli) {
        Ok(text) => text,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            eprintln!("Usage: qualinet <COMMAND> [OPTIONS]; see `qualinet --help`");
            return ExitCode::from(2);
        }
        Err(Failure::Domain(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };
    let written = match &output {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
