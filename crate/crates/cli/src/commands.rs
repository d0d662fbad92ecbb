use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use shiftplan::domain::{Scenario, ShiftPlan};
use shiftplan::experiment::{compare_point, evaluate_plan, ExperimentKind, ExperimentSpec};
use shiftplan::io::{self, IoError};
use shiftplan::planner::{self, PlanError};
use shiftplan::roster::{build_roster, verify_roster, RosterError};
use shiftplan_milp::{export_lp, SolveOptions, Status};

use crate::output::Outputs;
use crate::{Cli, CliError, Command};

struct Context {
    spec: ExperimentSpec,
    base_dir: PathBuf,
    out_dir: PathBuf,
    opts: SolveOptions,
    seed: Option<u64>,
}

fn plan_error(e: PlanError) -> CliError {
    match e {
        PlanError::NoSolution(Status::Infeasible) => CliError::Infeasible(e.to_string()),
        PlanError::Domain(_) | PlanError::BadDesired { .. } => CliError::Config(e.to_string()),
        PlanError::Benchmark(ref b) if !matches!(b, shiftplan::benchmark::BenchmarkError::Verification { .. }) => {
            CliError::Config(e.to_string())
        }
        PlanError::Benchmark(_) => CliError::Verification(e.to_string()),
        _ => CliError::Solver(e.to_string()),
    }
}

fn roster_error(e: RosterError) -> CliError {
    match e {
        RosterError::CircularBoundary => CliError::Config(e.to_string()),
        _ => CliError::Verification(e.to_string()),
    }
}

fn load(cli: &Cli) -> Result<Context, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let spec = ExperimentSpec::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out_dir = match (&cli.out, &spec.output) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => base_dir.join(dir),
        (None, None) => PathBuf::from("."),
    };
    let mut opts = SolveOptions::default();
    if let Some(g) = cli.gap {
        if !(g.is_finite() && g >= 0.0) {
            return Err(CliError::Config(format!("--gap must be a non-negative number, got {g}")));
        }
        opts.rel_gap = g;
    }
    Ok(Context { spec, base_dir, out_dir, opts, seed: cli.seed })
}

/// Runs the selected command and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let ctx = load(cli)?;
    let out = match cli.command {
        Command::Plan => cmd_plan(&ctx)?,
        Command::Sweep => cmd_sweep(&ctx)?,
        Command::Compare => cmd_compare(&ctx)?,
        Command::Roster => cmd_roster(&ctx)?,
        Command::ExportLp => cmd_export_lp(&ctx)?,
    };
    out.commit(&ctx.out_dir)
}

fn cmd_plan(ctx: &Context) -> Result<Outputs, CliError> {
    let sc = &ctx.spec.scenario;
    let outcome = evaluate_plan(sc, &ctx.opts).map_err(plan_error)?;
    info!("plan: status {}, {} nodes, gap {}", outcome.result.status, outcome.result.nodes, outcome.relative_gap);
    let mut out = Outputs::default();
    out.csv("plan.csv", &io::plan_rows(&outcome.result.plan), io::PLAN_HEADER)?;
    out.csv("supply.csv", &outcome.supply_rows(sc), io::SUPPLY_HEADER)?;
    out.json("summary.json", &outcome.summary(sc, ctx.seed))?;
    Ok(out)
}

fn cmd_sweep(ctx: &Context) -> Result<Outputs, CliError> {
    if !ctx.spec.kind.is_sweep() {
        return Err(CliError::Config(format!("sweep needs a sweep kind, config has {:?}", ctx.spec.kind)));
    }
    let points = ctx.spec.sweep_scenarios().map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<_> = points
        .par_iter()
        .map(|(v, sc)| {
            let o = evaluate_plan(sc, &ctx.opts).map_err(plan_error)?;
            info!("sweep value {v}: gap {}, {} nodes", o.relative_gap, o.result.nodes);
            Ok((o.sweep_row(*v, sc), o.normalized_rows(*v, sc)))
        })
        .collect::<Result<_, CliError>>()?;
    let (rows, curves): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let curves: Vec<_> = curves.into_iter().flatten().collect();
    let mut out = Outputs::default();
    out.csv("sweep.csv", &rows, io::SWEEP_HEADER)?;
    out.csv("sweep_supply.csv", &curves, io::NORMALIZED_SUPPLY_HEADER)?;
    Ok(out)
}

fn cmd_compare(ctx: &Context) -> Result<Outputs, CliError> {
    if ctx.spec.kind != ExperimentKind::CompareBaselines {
        return Err(CliError::Config(format!("compare needs kind compare_baselines, config has {:?}", ctx.spec.kind)));
    }
    let points = ctx.spec.compare_scenarios().map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<_> = points
        .par_iter()
        .map(|sc| compare_point(&ctx.spec, sc, &ctx.opts).map_err(plan_error))
        .collect::<Result<_, CliError>>()?;
    let (rows, robust): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let robust: Vec<_> = robust.into_iter().flatten().collect();
    let mut out = Outputs::default();
    out.csv("compare.csv", &rows, io::COMPARE_HEADER)?;
    out.csv("compare_robustness.csv", &robust, io::ROBUSTNESS_HEADER)?;
    Ok(out)
}

fn read_plan_file(ctx: &Context, name: &str) -> Result<ShiftPlan, CliError> {
    let path = ctx.base_dir.join(name);
    let file = std::fs::File::open(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    io::read_plan(file).map_err(|e| match e {
        IoError::Io(source) => CliError::Io { path, source },
        other => CliError::Config(format!("{}: {other}", path.display())),
    })
}

fn cmd_roster(ctx: &Context) -> Result<Outputs, CliError> {
    let sc: &Scenario = &ctx.spec.scenario;
    let plan = match &ctx.spec.plan_file {
        Some(name) => read_plan_file(ctx, name)?,
        None => planner::plan_with(sc, &ctx.opts).map_err(plan_error)?.plan,
    };
    let roster = build_roster(&plan, sc).map_err(roster_error)?;
    let report = verify_roster(&roster, &plan, sc);
    if !report.ok {
        let found = serde_json::to_string(&report.violations).unwrap_or_default();
        return Err(CliError::Verification(found));
    }
    let mut out = Outputs::default();
    out.csv("roster.csv", &io::roster_rows(&roster, sc.delta), io::ROSTER_HEADER)?;
    Ok(out)
}

fn cmd_export_lp(ctx: &Context) -> Result<Outputs, CliError> {
    let (model, _) = planner::build_reward_mip(&ctx.spec.scenario).map_err(plan_error)?;
    let mut out = Outputs::default();
    out.text("model.lp", export_lp(&model));
    Ok(out)
}
