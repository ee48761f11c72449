//! Run configuration: an optional TOML file, an optional preset and command
//! line overrides, applied in that order of increasing priority.
//!
//! ```toml
//! preset = "l1-k10"
//! method = "fedualex"
//! eta_c = 0.03
//! eval_every = "auto"
//!
//! [problem]
//! lambda = 0.1
//!
//! [grid]
//! eta_s = [1.0, 0.1]
//!
//! [seeds]
//! count = 10
//! ```

use std::path::{Path, PathBuf};

use fedualex::fedsim::{
    preset, EvalPoint, OutputSequence, ProblemSpec, SimConfig, DEFAULT_ETA_C_GRID, DEFAULT_ETA_C_GRID_NUCLEAR,
    DEFAULT_ETA_S_GRID,
};
use fedualex::optimizers::Method;
use fedualex::problems::ProblemKind;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum EvalEvery {
    Rounds(usize),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemTable {
    kind: Option<String>,
    m: Option<usize>,
    n: Option<usize>,
    p: Option<usize>,
    lambda: Option<f64>,
    radius: Option<f64>,
    data_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridTable {
    eta_s: Option<Vec<f64>>,
    eta_c: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedsTable {
    count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<String>,
    method: Option<String>,
    clients: Option<usize>,
    rounds: Option<usize>,
    local_steps: Option<usize>,
    eta_s: Option<f64>,
    eta_c: Option<f64>,
    sigma: Option<f64>,
    participation: Option<f64>,
    seed: Option<u64>,
    eval_every: Option<EvalEvery>,
    eval_point: Option<String>,
    output_sequence: Option<String>,
    output: Option<PathBuf>,
    problem: Option<ProblemTable>,
    grid: Option<GridTable>,
    seeds: Option<SeedsTable>,
}

/// Values given on the command line. `None` leaves the file or preset value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<String>,
    pub method: Option<String>,
    pub clients: Option<usize>,
    pub rounds: Option<usize>,
    pub local_steps: Option<usize>,
    pub eta_s: Option<f64>,
    pub eta_c: Option<f64>,
    pub sigma: Option<f64>,
    pub participation: Option<f64>,
    pub seed: Option<u64>,
    /// A round count or `auto`.
    pub eval_every: Option<String>,
    pub eval_point: Option<String>,
    pub deployable_output: bool,
    pub output: Option<PathBuf>,
    pub seeds: Option<usize>,
}

/// Everything a subcommand needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub sim: SimConfig,
    pub output: Option<PathBuf>,
    pub eta_s_grid: Vec<f64>,
    pub eta_c_grid: Vec<f64>,
    pub seeds: usize,
}

fn parse_named<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| CliError::config(key, e.to_string()))
}

fn parse_kind(value: &str) -> Result<ProblemKind> {
    match value {
        "l1" => Ok(ProblemKind::L1),
        "nuclear" => Ok(ProblemKind::Nuclear),
        "quadratic" => Ok(ProblemKind::Quadratic),
        other => Err(CliError::config(
            "problem.kind",
            format!("unknown kind `{other}` (expected l1, nuclear or quadratic)"),
        )),
    }
}

fn parse_eval_every(value: &EvalEvery) -> Result<Option<usize>> {
    match value {
        EvalEvery::Word(w) if w == "auto" => Ok(None),
        EvalEvery::Word(w) => w
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::config("eval_every", format!("expected a round count or `auto`, got `{w}`"))),
        EvalEvery::Rounds(0) => Err(CliError::config("eval_every", "must be >= 1")),
        EvalEvery::Rounds(n) => Ok(Some(*n)),
    }
}

fn problem_from_table(t: &ProblemTable, base: Option<ProblemSpec>) -> Result<ProblemSpec> {
    let mut spec = match (&t.kind, base) {
        (Some(kind), base) => {
            let kind = parse_kind(kind)?;
            match base {
                Some(b) if b.kind == kind => b,
                _ => match kind {
                    ProblemKind::L1 => ProblemSpec::l1(600, 300),
                    ProblemKind::Nuclear => ProblemSpec::nuclear(600, 300, 20),
                    ProblemKind::Quadratic => ProblemSpec::quadratic(600),
                },
            }
        }
        (None, Some(b)) => b,
        (None, None) => return Err(CliError::config("problem.kind", "required when no preset is given")),
    };
    if let Some(v) = t.m {
        spec.m = v;
    }
    if let Some(v) = t.n {
        spec.n = v;
    }
    if let Some(v) = t.p {
        spec.p = v;
    }
    if let Some(v) = t.lambda {
        spec.lambda = v;
    }
    if let Some(v) = t.radius {
        spec.radius = v;
    }
    if let Some(v) = t.data_seed {
        spec.data_seed = v;
    }
    Ok(spec)
}

/// Reads `path` (if any) and applies `flags` on top.
pub fn parse_config(path: Option<&Path>, flags: &Overrides) -> Result<RunSettings> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    parse_config_str(&text, flags)
}

/// [`parse_config`] on file contents already in memory.
pub fn parse_config_str(text: &str, flags: &Overrides) -> Result<RunSettings> {
    let file: FileConfig = toml::from_str(text).map_err(|e| CliError::config("config", e.message().to_string()))?;

    let method: Method = match flags.method.as_deref().or(file.method.as_deref()) {
        Some(m) => parse_named("method", m)?,
        None => Method::FeDualEx,
    };
    let preset_name = flags.preset.as_deref().or(file.preset.as_deref());
    let base = match preset_name {
        Some(name) => Some(preset(name, method).map_err(|e| CliError::config("preset", e.to_string()))?),
        None => None,
    };

    let problem = match (&file.problem, &base) {
        (Some(t), b) => problem_from_table(t, b.as_ref().map(|b| b.problem.clone()))?,
        (None, Some(b)) => b.problem.clone(),
        (None, None) => return Err(CliError::config("problem", "give a preset or a [problem] table")),
    };
    let mut sim = match base {
        Some(b) => SimConfig { problem, method, ..b },
        None => SimConfig::new(method, problem),
    };

    macro_rules! layer {
        ($($field:ident),+) => {
            $(
                if let Some(v) = file.$field {
                    sim.$field = v;
                }
                if let Some(v) = flags.$field {
                    sim.$field = v;
                }
            )+
        };
    }
    layer!(clients, rounds, local_steps, eta_s, eta_c, sigma, participation, seed);

    if let Some(v) = &file.eval_every {
        sim.eval_every = parse_eval_every(v)?;
    }
    if let Some(v) = &flags.eval_every {
        sim.eval_every = parse_eval_every(&EvalEvery::Word(v.clone()))?;
    }
    if let Some(v) = flags.eval_point.as_deref().or(file.eval_point.as_deref()) {
        sim.eval_point = parse_named::<EvalPoint>("eval_point", v)?;
    }
    if let Some(v) = &file.output_sequence {
        sim.output = parse_named::<OutputSequence>("output_sequence", v)?;
    }
    if flags.deployable_output {
        sim.output = OutputSequence::Server;
    }

    sim.validate().map_err(|e| match e {
        fedualex::Error::InvalidArgument { reason, .. } => match reason.split_once(": ") {
            Some((key, rest)) => CliError::config(key, rest),
            None => CliError::config("config", reason),
        },
        other => CliError::Core(other),
    })?;

    let grid = file.grid.unwrap_or_default();
    let default_c: &[f64] = if sim.problem.kind == ProblemKind::Nuclear {
        &DEFAULT_ETA_C_GRID_NUCLEAR
    } else {
        &DEFAULT_ETA_C_GRID
    };
    let eta_s_grid = grid.eta_s.unwrap_or_else(|| DEFAULT_ETA_S_GRID.to_vec());
    let eta_c_grid = grid.eta_c.unwrap_or_else(|| default_c.to_vec());
    for (key, g) in [("grid.eta_s", &eta_s_grid), ("grid.eta_c", &eta_c_grid)] {
        if g.is_empty() || g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(CliError::config(key, "must be a non-empty list of positive step sizes"));
        }
    }
    let seeds = flags.seeds.or(file.seeds.and_then(|s| s.count)).unwrap_or(10);
    if seeds == 0 {
        return Err(CliError::config("seeds.count", "must be >= 1"));
    }

    Ok(RunSettings {
        sim,
        output: flags.output.clone().or(file.output),
        eta_s_grid,
        eta_c_grid,
        seeds,
    })
}
