use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;

use gips_core::encode::{apply_selection, generate, Encoded};
use gips_core::gipsl::{compile, TypedSpec};
use gips_core::model::{load_graph, load_metamodel, serialize_graph, serialize_model, Graph, Metamodel};
use gips_core::solve::{export_lp, solve, Limits, Solution, Status};
use gips_core::vne::{
    embed_incremental, generate_scenario, mdvne_metamodel, mdvne_spec, verify_embedding, ScenarioConfig, REPORT_VERSION,
};

const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(name = "gips", version, about = "Compile graph specifications to 0/1 programs, solve them and apply the result")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and typecheck a spec, and validate a model if given.
    Check(Inputs),
    /// Match, generate, solve and apply the selected matches.
    Solve(SolveArgs),
    /// Write the generated program as an LP file and stop.
    ExportLp {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed the requests of a generated scenario one after another.
    Vne(VneArgs),
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    spec: PathBuf,
    /// Model document. Uses its own node and edge types when it declares any.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Schema document, for models without inline types. Defaults to the built-in MdVNE schema.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Where to write the modified model. Without it the model is only reported on.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the LP file here and stop before solving.
    #[arg(long, value_name = "PATH")]
    export_lp: Option<PathBuf>,
    #[arg(long, value_name = "SECONDS", value_parser = positive_secs)]
    time_limit: Option<Duration>,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VneArgs {
    /// Scenario config (TOML).
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-request solver time limit.
    #[arg(long, value_name = "SECONDS", value_parser = positive_secs)]
    time_limit: Option<Duration>,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Where to write the final substrate model.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn positive_secs(s: &str) -> Result<Duration, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err("time limit must be positive".into());
    }
    Ok(Duration::from_secs_f64(v))
}

struct Loaded {
    spec: TypedSpec,
    model: Option<Graph>,
    inline_schema: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(inputs: &Inputs) -> Result<Loaded> {
    let model_text = inputs.model.as_deref().map(read).transpose()?;
    let inline = match &model_text {
        Some(t) => Some(load_metamodel(t).with_context(|| format!("schema in {}", inputs.model.as_ref().unwrap().display()))?),
        None => None,
    };
    let inline_schema = inline.as_ref().is_some_and(|mm| !mm.node_types().is_empty());
    let mm: Arc<Metamodel> = if inline_schema {
        Arc::new(inline.unwrap())
    } else if let Some(p) = &inputs.schema {
        Arc::new(load_metamodel(&read(p)?).with_context(|| format!("schema {}", p.display()))?)
    } else {
        mdvne_metamodel()
    };
    let spec = compile(&read(&inputs.spec)?, &mm).with_context(|| format!("spec {}", inputs.spec.display()))?;
    for w in &spec.warnings {
        warn!("{}: {w}", inputs.spec.display());
    }
    let model = match (&model_text, &inputs.model) {
        (Some(t), Some(p)) => {
            let g = load_graph(t, mm.clone()).with_context(|| format!("model {}", p.display()))?;
            g.validate().with_context(|| format!("model {}", p.display()))?;
            Some(g)
        }
        _ => None,
    };
    Ok(Loaded { spec, model, inline_schema })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct SelectedMatch {
    var: usize,
    mapping: String,
    #[serde(rename = "match")]
    matched: String,
}

#[derive(Serialize)]
struct SolveReport {
    version: u32,
    status: Status,
    objective: Option<f64>,
    vars: usize,
    rows: usize,
    nodes: u64,
    solve_ms: f64,
    root_bound: Option<f64>,
    selected: Vec<SelectedMatch>,
    warnings: Vec<String>,
}

impl SolveReport {
    fn new(enc: &Encoded, sol: &Solution) -> Self {
        let selected = enc
            .table
            .selected(&sol.assignment)
            .map(|(var, mapping, m)| SelectedMatch { var, mapping: mapping.to_string(), matched: m.to_string() })
            .collect();
        SolveReport {
            version: REPORT_VERSION,
            status: sol.status,
            objective: sol.objective_value,
            vars: enc.problem.variables.len(),
            rows: enc.problem.rows.len(),
            nodes: sol.stats.nodes,
            solve_ms: sol.stats.wall_ms,
            root_bound: sol.stats.root_bound,
            selected,
            warnings: enc.warnings.clone(),
        }
    }
}

fn generate_for(inputs: &Inputs) -> Result<(Loaded, Graph, Encoded)> {
    let loaded = load(inputs)?;
    let Some(model) = loaded.model.clone() else { bail!("--model is required") };
    let enc = generate(&loaded.spec, &model).context("generating the program")?;
    for w in &enc.warnings {
        warn!("{w}");
    }
    info!("{} variables, {} rows", enc.problem.variables.len(), enc.problem.rows.len());
    Ok((loaded, model, enc))
}

fn cmd_check(inputs: &Inputs) -> Result<u8> {
    let loaded = load(inputs)?;
    println!(
        "ok: {} rules, {} mappings, {} constraints, {} objectives",
        loaded.spec.rules.len(),
        loaded.spec.mappings.len(),
        loaded.spec.constraints.len(),
        loaded.spec.objectives.len()
    );
    if let Some(g) = &loaded.model {
        println!("model: {} nodes, {} edges", g.node_count(), g.edge_count());
    }
    Ok(0)
}

fn cmd_export_lp(inputs: &Inputs, out: &Path) -> Result<u8> {
    let (_, _, enc) = generate_for(inputs)?;
    write(out, &export_lp(&enc.problem, &enc.table)?)?;
    println!("wrote {} ({} variables, {} rows)", out.display(), enc.problem.variables.len(), enc.problem.rows.len());
    Ok(0)
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    if let Some(lp) = &args.export_lp {
        return cmd_export_lp(&args.inputs, lp);
    }
    let (loaded, model, enc) = generate_for(&args.inputs)?;
    let sol = solve(&enc.problem, Limits { time: args.time_limit, nodes: None })?;
    let report = SolveReport::new(&enc, &sol);
    if let Some(p) = &args.report {
        write(p, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    let obj = sol.objective_value.map_or("-".to_string(), |v| format!("{v}"));
    println!(
        "{}: objective {obj}, {} of {} variables selected, {} nodes, {:.1} ms",
        sol.status,
        report.selected.len(),
        report.vars,
        sol.stats.nodes,
        sol.stats.wall_ms
    );
    match sol.status {
        Status::Infeasible => {
            eprintln!("infeasible: model left unchanged");
            return Ok(EXIT_INFEASIBLE);
        }
        Status::Timeout => {
            match sol.objective_value {
                Some(v) => eprintln!("time limit reached; best incumbent {v} not applied"),
                None => eprintln!("time limit reached without a feasible selection"),
            }
            return Ok(EXIT_TIMEOUT);
        }
        Status::Optimal => {}
    }
    for s in &report.selected {
        println!("  {} {}", s.mapping, s.matched);
    }
    if let Some(out) = &args.out {
        let next = apply_selection(&loaded.spec, &model, &enc.table, &sol.assignment)?;
        let text = if loaded.inline_schema { serialize_model(&next) } else { serialize_graph(&next) };
        write(out, &text)?;
    }
    Ok(0)
}

fn cmd_vne(args: &VneArgs) -> Result<u8> {
    let mut cfg = ScenarioConfig::from_toml(&read(&args.config)?).with_context(|| format!("config {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let mm = mdvne_metamodel();
    let spec = mdvne_spec(&mm);
    let scenario = generate_scenario(&cfg, mm)?;
    let run = embed_incremental(&scenario.substrate, &scenario.vnrs, &spec, Limits { time: args.time_limit, nodes: None })?;
    print!("{}", run.report.to_text());
    if let Some(p) = &args.report {
        write(p, &(run.report.to_json() + "\n"))?;
    }
    if let Some(p) = &args.out {
        write(p, &serialize_graph(&run.model))?;
    }
    let violations = verify_embedding(&run.report, &scenario.substrate, &run.model);
    for v in &violations {
        eprintln!("violation: {v}");
    }
    Ok(if violations.is_empty() { 0 } else { EXIT_ERROR })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Check(inputs) => cmd_check(inputs),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::ExportLp { inputs, out } => cmd_export_lp(inputs, out),
        Cmd::Vne(args) => cmd_vne(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
