//! `ctt`: validate, inspect, score, export and solve curriculum-based
//! timetabling instances.
//!
//! Exit status is 0 on success, 1 for invalid or infeasible input and 2 for
//! usage and syntax errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ctt_core::control::{
    self, Clock, DiveKind, RunStatus, StrategyConfig, StrategyKind, SurfaceKind,
};
use ctt_core::evaluation::{check_hard, evaluate, parse_solution, write_solution};
use ctt_core::formulations::{
    build_monolithic_with, build_surface, build_surface2, Neighborhood, PeriodAssignment,
    SurfaceOptions,
};
use ctt_core::instance::{
    build_multirooms, instance_stats, parse_ctt_with, Instance, MultiRoomPolicy, WeightVector,
};
use ctt_core::milp::{export_mps, parse_mps, MilpModel};
use ctt_core::solver::{branch_and_bound, SolveConfig, SolveStatus};

#[derive(Parser)]
#[command(name = "ctt", version, about = "Curriculum-based course timetabling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that an instance parses and is consistent.
    Validate(InstanceArgs),
    /// Print size and conflict-graph statistics.
    Stats {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        json: bool,
    },
    /// Score a timetable against an instance.
    Evaluate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Solution file, one `course room day period` line per event.
        solution: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a formulation as MPS.
    Build(BuildArgs),
    /// Run the anytime or contract strategy.
    Solve(SolveArgs),
    /// Solve an MPS file with the built-in branch-and-bound. Writes the
    /// `name value` solution format read by the external-solver adapter.
    Milp(MilpArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file in `.ctt` format.
    instance: PathBuf,
    /// Weights of capacity, spread, compactness and stability.
    #[arg(long, value_parser = parse_weights, default_value = "1,5,2,1")]
    weights: WeightVector,
}

#[derive(Clone, Copy, ValueEnum)]
enum Formulation {
    Monolithic,
    Surface,
    Surface2,
    PeriodFixed,
    DayFixed,
    DayDecomp,
    DayFixedZeroStability,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum)]
    formulation: Formulation,
    /// Timetable whose periods define a dive.
    #[arg(long)]
    basis: Option<PathBuf>,
    #[arg(long, default_value = "median-split", value_parser = parse_policy)]
    policy: MultiRoomPolicy,
    /// Omit implied-bound cuts from the full model.
    #[arg(long)]
    no_implied_cuts: bool,
    /// Omit clique cuts from the surface.
    #[arg(long)]
    no_clique_cuts: bool,
    /// Add the stratified capacity rows to the surface; its bound is then
    /// no longer valid.
    #[arg(long)]
    stratified: bool,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceArg {
    Surface,
    Surface2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "contract", value_parser = parse_from_str::<StrategyKind>)]
    strategy: StrategyKind,
    /// Start from the preset for this many CPU units of 780 s each.
    #[arg(long, default_value_t = 1.0)]
    cpu_units: f64,
    #[arg(long, value_enum)]
    surface: Option<SurfaceArg>,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<MultiRoomPolicy>,
    /// Dive kinds in order, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<DiveKind>)]
    dives: Option<Vec<DiveKind>>,
    /// Surface budget in seconds.
    #[arg(long)]
    surface_time: Option<f64>,
    /// Per-dive budget in seconds, as `kind=seconds`; repeatable.
    #[arg(long, value_parser = parse_dive_budget)]
    dive_time: Vec<(DiveKind, f64)>,
    /// Budget of the whole run in seconds.
    #[arg(long)]
    total_time: Option<f64>,
    /// Count nodes instead of seconds: surface node budget.
    #[arg(long, requires = "dive_nodes")]
    surface_nodes: Option<u64>,
    /// Node budget of each dive.
    #[arg(long, requires = "surface_nodes")]
    dive_nodes: Option<u64>,
    /// Node budget of the whole run.
    #[arg(long, requires = "surface_nodes")]
    total_nodes: Option<u64>,
    /// A dive stops once its gap reaches this fraction.
    #[arg(long)]
    gap_stop: Option<f64>,
    #[arg(long)]
    no_implied_cuts: bool,
    /// Skip clique separation at the surface root.
    #[arg(long)]
    no_separation: bool,
    /// Reserved; the search is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the best timetable.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Where to write the report; standard output when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    /// Where to write ledger events as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct MilpArgs {
    model: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Also write `LOWER_BOUND <value>` here.
    #[arg(long)]
    bound: Option<PathBuf>,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
}

fn parse_weights(s: &str) -> Result<WeightVector, String> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| format!("`{p}` is not a weight"))
        })
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        &[c, s, k, r] => Ok(WeightVector::new(c, s, k, r)),
        _ => Err("expected four comma-separated weights".into()),
    }
}

fn parse_policy(s: &str) -> Result<MultiRoomPolicy, String> {
    s.parse()
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn parse_dive_budget(s: &str) -> Result<(DiveKind, f64), String> {
    let (kind, secs) = s.split_once('=').ok_or("expected `kind=seconds`")?;
    let secs: f64 = secs
        .parse()
        .map_err(|_| format!("`{secs}` is not a number"))?;
    Ok((kind.parse()?, secs))
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &InstanceArgs) -> Result<Instance, Failure> {
    let text = read(&args.instance)?;
    parse_ctt_with(&text, args.weights).map_err(|e| {
        let message = format!("{}: {e}", args.instance.display());
        if e.is_syntax() {
            Failure::usage(message)
        } else {
            Failure::invalid(message)
        }
    })
}

fn validate(args: &InstanceArgs) -> Outcome {
    let inst = load(args)?;
    println!(
        "{}: valid ({} courses, {} events)",
        inst.name,
        inst.courses.len(),
        inst.total_events()
    );
    Ok(ExitCode::SUCCESS)
}

fn stats(args: &InstanceArgs, json: bool) -> Outcome {
    let s = instance_stats(&load(args)?);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&s).expect("stats serialise")
        );
    } else {
        println!("{s}");
    }
    Ok(ExitCode::SUCCESS)
}

fn evaluate_cmd(args: &InstanceArgs, solution: &Path, json: bool) -> Outcome {
    let inst = load(args)?;
    let sol = parse_solution(&inst, &read(solution)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", solution.display())))?;
    let violations = check_hard(&inst, &sol);
    let (penalties, objective) = evaluate(&inst, &sol);
    if json {
        let doc = serde_json::json!({
            "penalties": penalties,
            "objective": objective,
            "feasible": violations.is_empty(),
            "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        println!("penalties  {penalties}");
        println!("objective  {objective}");
        println!(
            "feasible   {}",
            if violations.is_empty() { "yes" } else { "no" }
        );
        for v in &violations {
            eprintln!("violation: {v}");
        }
    }
    Ok(if violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn build(args: &BuildArgs) -> Outcome {
    let inst = load(&args.instance)?;
    let failed = |e: &dyn std::fmt::Display| Failure::invalid(e.to_string());
    let base = || build_monolithic_with(&inst, !args.no_implied_cuts).map_err(|e| failed(&e));
    let dive = |kind: DiveKind| -> Result<MilpModel, Failure> {
        let path = args
            .basis
            .as_ref()
            .ok_or_else(|| Failure::usage("dive formulations need --basis"))?;
        let sol = parse_solution(&inst, &read(path)?)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let basis = PeriodAssignment::from_solution(&inst, &sol);
        basis.validate(&inst).map_err(|e| failed(&e))?;
        Neighborhood::from_surface(kind, &basis, 0.0, 0)
            .restrict(&inst, &base()?)
            .map_err(|e| failed(&e))
    };
    let model = match args.formulation {
        Formulation::Monolithic => base()?,
        Formulation::Surface => build_surface(
            &inst,
            &SurfaceOptions {
                clique_cuts: !args.no_clique_cuts,
                stratified: args.stratified,
            },
        )
        .map_err(|e| failed(&e))?,
        Formulation::Surface2 => {
            build_surface2(&inst, &build_multirooms(&inst, args.policy)).map_err(|e| failed(&e))?
        }
        Formulation::PeriodFixed => dive(DiveKind::PeriodFixed)?,
        Formulation::DayFixed => dive(DiveKind::DayFixed)?,
        Formulation::DayDecomp => dive(DiveKind::DayDecomp)?,
        Formulation::DayFixedZeroStability => dive(DiveKind::DayFixedZeroStability)?,
    };
    emit(args.output.as_deref(), &export_mps(&model))?;
    eprintln!(
        "{}: {} variables, {} constraints",
        model.name,
        model.num_vars(),
        model.num_constraints()
    );
    Ok(ExitCode::SUCCESS)
}

fn strategy_config(args: &SolveArgs) -> Result<StrategyConfig, Failure> {
    let bad = |e: control::ControlError| Failure::usage(e.to_string());
    let mut c = StrategyConfig::for_cpu_units(args.cpu_units).map_err(bad)?;
    c.strategy = args.strategy;
    if let Some(s) = args.surface {
        let policy = args.policy.unwrap_or_default();
        c.surface = match s {
            SurfaceArg::Surface => SurfaceKind::Surface,
            SurfaceArg::Surface2 => SurfaceKind::Surface2(policy),
        };
    } else if let (Some(p), SurfaceKind::Surface2(_)) = (args.policy, c.surface) {
        c.surface = SurfaceKind::Surface2(p);
    }
    if let Some(d) = &args.dives {
        c.dive_sequence = d.clone();
        let kept: BTreeMap<DiveKind, f64> = c
            .dive_budgets
            .iter()
            .filter(|(k, _)| d.contains(k))
            .map(|(&k, &v)| (k, v))
            .collect();
        c.dive_budgets = kept;
    }
    if let Some(t) = args.surface_time {
        c.surface_budget = Some(t);
    }
    for &(k, t) in &args.dive_time {
        c.dive_budgets.insert(k, t);
    }
    if let Some(t) = args.total_time {
        c.total_budget = Some(t);
    }
    if let (Some(s), Some(d)) = (args.surface_nodes, args.dive_nodes) {
        c = c.node_limited(s, d, args.total_nodes);
    }
    if let Some(g) = args.gap_stop {
        c.dive_gap_stop = g;
    }
    c.implied_cuts = !args.no_implied_cuts;
    c.separation = !args.no_separation;
    c.validate().map_err(bad)?;
    Ok(c)
}

fn solve(args: &SolveArgs) -> Outcome {
    let inst = load(&args.instance)?;
    let config = strategy_config(args)?;
    let report = control::run(&inst, &config).map_err(|e| Failure::invalid(e.to_string()))?;
    if let (Some(path), Some(sol)) = (&args.output, &report.solution) {
        write(path, &write_solution(&inst, sol))?;
    }
    if let Some(path) = &args.events {
        write(path, &report.events_jsonl())?;
    }
    let text = match args.format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json() + "\n",
    };
    emit(args.report.as_deref(), &text)?;
    if config.clock == Clock::Wall {
        eprintln!(
            "elapsed {:.3}s",
            report.events.last().map_or(0.0, |e| e.time)
        );
    }
    Ok(match report.status {
        RunStatus::Infeasible => {
            eprintln!("{}: infeasible", inst.name);
            ExitCode::from(1)
        }
        _ => ExitCode::SUCCESS,
    })
}

fn milp(args: &MilpArgs) -> Outcome {
    let model = parse_mps(&read(&args.model)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.model.display())))?;
    let config = SolveConfig {
        time_limit: args.time_limit.map(Duration::from_secs_f64),
        node_limit: args.node_limit,
        ..SolveConfig::default()
    };
    let result = branch_and_bound(&model, &config).map_err(|e| Failure::usage(e.to_string()))?;
    eprintln!(
        "{}: {} after {} nodes, bound {}",
        model.name,
        result.status.name(),
        result.nodes,
        result.lower_bound
    );
    let Some(sol) = &result.incumbent else {
        return Ok(ExitCode::from(1));
    };
    write(&args.solution, &model.write_solution(&sol.values))?;
    if let Some(path) = &args.bound {
        write(path, &format!("LOWER_BOUND {}\n", result.lower_bound))?;
    }
    Ok(if matches!(result.status, SolveStatus::Infeasible) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Stats { instance, json } => stats(instance, *json),
        Command::Evaluate {
            instance,
            solution,
            json,
        } => evaluate_cmd(instance, solution, *json),
        Command::Build(a) => build(a),
        Command::Solve(a) => solve(a),
        Command::Milp(a) => milp(a),
    };
    outcome.unwrap_or_else(|f| {
        eprintln!("error: {}", f.message);
        ExitCode::from(f.code)
    })
}
