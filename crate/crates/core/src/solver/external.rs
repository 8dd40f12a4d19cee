//! Runs an external MILP solver through files: the model goes out as MPS,
//! the point comes back as `name value` lines and is checked here before it
//! is believed.

use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{export_mps, MilpError, MilpModel, SolutionStatus, TOLERANCE};

use super::{SolveConfig, SolveResult, SolveStatus};

/// How to call the external solver. Arguments may contain the placeholders
/// `{mps}`, `{solution}`, `{bound}` and `{time_limit}` (seconds, empty when
/// unlimited).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub program: String,
    pub args: Vec<String>,
    pub work_dir: PathBuf,
    /// Solution file name, relative to `work_dir`.
    pub solution_file: String,
    /// Optional file holding `LOWER_BOUND <value>`.
    pub bound_file: Option<String>,
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("external solver failed: {0}")]
    ProcessFailure(String),
    #[error("cannot read the external solution: {0}")]
    Unparsable(#[from] MilpError),
    #[error("bad bound file: {0}")]
    BadBound(String),
    #[error("external solution is inconsistent with the model: {0}")]
    Inconsistent(String),
}

fn parse_bound(text: &str) -> Result<f64, ExternalError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    match fields.as_slice() {
        ["LOWER_BOUND", v] => v
            .parse()
            .map_err(|_| ExternalError::BadBound(format!("`{v}` is not a number"))),
        _ => Err(ExternalError::BadBound(
            "expected `LOWER_BOUND <value>`".into(),
        )),
    }
}

/// Solves `model` with an external process. Only the time limit of
/// `config` is passed on.
pub fn external_solve(
    model: &MilpModel,
    adapter: &AdapterConfig,
    config: &SolveConfig,
) -> Result<SolveResult, ExternalError> {
    let start = Instant::now();
    fs::create_dir_all(&adapter.work_dir)?;
    let mps = adapter.work_dir.join("model.mps");
    let solution = adapter.work_dir.join(&adapter.solution_file);
    let bound = adapter
        .bound_file
        .as_ref()
        .map(|b| adapter.work_dir.join(b));
    for stale in [Some(&solution), bound.as_ref()].into_iter().flatten() {
        if stale.exists() {
            fs::remove_file(stale)?;
        }
    }
    fs::write(&mps, export_mps(model))?;

    let time_limit = config
        .time_limit
        .map(|t| t.as_secs_f64().to_string())
        .unwrap_or_default();
    let fill = |arg: &str| {
        arg.replace("{mps}", &mps.to_string_lossy())
            .replace("{solution}", &solution.to_string_lossy())
            .replace(
                "{bound}",
                &bound
                    .as_ref()
                    .map(|b| b.to_string_lossy().into_owned())
                    .unwrap_or_default(),
            )
            .replace("{time_limit}", &time_limit)
    };
    let output = Command::new(&adapter.program)
        .args(adapter.args.iter().map(|a| fill(a)))
        .current_dir(&adapter.work_dir)
        .output()
        .map_err(|e| {
            ExternalError::ProcessFailure(format!("cannot start `{}`: {e}", adapter.program))
        })?;
    if !output.status.success() {
        return Err(ExternalError::ProcessFailure(format!(
            "exit status {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let text = fs::read_to_string(&solution).map_err(|e| {
        ExternalError::ProcessFailure(format!("no solution file {}: {e}", solution.display()))
    })?;
    let mut sol = model.import_solution(&text)?;
    if let Some(v) = sol.violated.take() {
        return Err(ExternalError::Inconsistent(v));
    }
    let lower_bound = match &bound {
        Some(path) if path.exists() => parse_bound(&fs::read_to_string(path)?)?,
        _ => f64::NEG_INFINITY,
    };
    if lower_bound > sol.objective + TOLERANCE {
        return Err(ExternalError::Inconsistent(format!(
            "lower bound {lower_bound} exceeds the objective {}",
            sol.objective
        )));
    }
    let status = if lower_bound >= sol.objective - TOLERANCE {
        SolveStatus::Optimal
    } else {
        SolveStatus::Feasible
    };
    sol.status = if status == SolveStatus::Optimal {
        SolutionStatus::Optimal
    } else {
        SolutionStatus::Feasible
    };
    Ok(SolveResult {
        status,
        incumbent: Some(sol),
        lower_bound,
        nodes: 0,
        wall_time: start.elapsed(),
        lp_iterations: 0,
    })
}
