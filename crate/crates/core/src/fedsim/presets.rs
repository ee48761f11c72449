use super::config::{EvalPoint, ProblemSpec, SimConfig};
use crate::error::{Error, Result};
use crate::optimizers::Method;

pub const PRESET_NAMES: [&str; 4] = ["l1-k1", "l1-k10", "nuclear-k1", "nuclear-k10"];

/// Step sizes `(η^s, η^c)` picked by the default grid search (lowest final
/// gap, data seed 0, run seed 0). Combinations not listed were not searched.
fn tuned(preset: &str, method: Method) -> Option<(f64, f64)> {
    use Method::*;
    Some(match (preset, method) {
        ("l1-k10", FeDualEx) => (0.3, 0.01),
        ("l1-k10", FedMiP) => (0.03, 0.03),
        ("l1-k10", FedDualAvg) => (0.3, 0.01),
        ("l1-k10", FedMiD) => (1.0, 0.01),
        ("nuclear-k10", FeDualEx) => (1.0, 1.0),
        _ => return None,
    })
}

/// Frozen experiment settings: `m = 600`, `n = 300`, `M = 100`, `σ = 0.1`,
/// `λ = 0.1`, `D = 0.05`, and `p = 20` for the nuclear problem, with the
/// local-step/round pairs `K = 1, R = 5000` and `K = 10, R = 500` (ℓ1) or
/// `K = 1, R = 100` and `K = 10, R = 20` (nuclear).
///
/// Metrics are taken at the last output point: averaging the iterates of the
/// single-call baselines hides the cycling that keeps their gap high.
///
/// Step sizes are the tuned ones for `method` where available, otherwise
/// `η^s = 1`, `η^c = 0.1`.
pub fn preset(name: &str, method: Method) -> Result<SimConfig> {
    let (problem, local_steps, rounds) = match name {
        "l1-k1" => (ProblemSpec::l1(600, 300), 1, 5000),
        "l1-k10" => (ProblemSpec::l1(600, 300), 10, 500),
        "nuclear-k1" => (ProblemSpec::nuclear(600, 300, 20), 1, 100),
        "nuclear-k10" => (ProblemSpec::nuclear(600, 300, 20), 10, 20),
        other => {
            return Err(Error::invalid(
                "preset",
                format!("unknown preset `{other}` (expected one of {})", PRESET_NAMES.join(", ")),
            ))
        }
    };
    let (eta_s, eta_c) = tuned(name, method).unwrap_or((1.0, 0.1));
    Ok(SimConfig {
        clients: 100,
        rounds,
        local_steps,
        eta_s,
        eta_c,
        sigma: 0.1,
        eval_point: EvalPoint::Last,
        ..SimConfig::new(method, problem)
    })
}
