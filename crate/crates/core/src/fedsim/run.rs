use std::time::Instant;

use rand::seq::index;

use super::config::{EvalPoint, OutputSequence, SimConfig};
use crate::bregman::Regularizer;
use crate::error::{Error, Result};
use crate::optimizers::{
    DualExtrapolation, Ergodic, FeDualEx, FedDualAvg, FedMiD, FedMiP, FederatedMethod, GradientOracle, Method,
    StepSizes,
};
use crate::pair::PrimalPair;
use crate::problems::{numerical_rank, sparsity, NoiseModel, ProblemInstance, SaddleProblem};
use crate::rng;
use crate::scalar::Scalar;

/// Environment variable holding the worker-pool size.
pub const THREADS_ENV: &str = "FEDUALEX_THREADS";

/// Gaps above this abort the run.
pub const DIVERGENCE_GAP: f64 = 1e6;

/// Metrics at one evaluation round. The gap is taken at the configured
/// evaluation point; sparsity and rank always describe the most recent
/// output point, since averaging iterates with moving supports fills in
/// every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    /// Completed communication rounds (0 is the initial point).
    pub round: usize,
    /// Local steps summed over participating clients.
    pub cumulative_local_steps: u64,
    pub duality_gap: f64,
    pub sparsity_x: f64,
    pub sparsity_y: f64,
    pub rank_x: usize,
    pub rank_y: usize,
    /// Wall time since the run started. Not part of the deterministic
    /// output.
    pub wall_ms: f64,
    pub seed: u64,
}

impl RunRecord {
    /// Equality of every field except `wall_ms`, bitwise on floats.
    pub fn same_metrics(&self, other: &Self) -> bool {
        self.method == other.method
            && self.round == other.round
            && self.cumulative_local_steps == other.cumulative_local_steps
            && self.duality_gap.to_bits() == other.duality_gap.to_bits()
            && self.sparsity_x.to_bits() == other.sparsity_x.to_bits()
            && self.sparsity_y.to_bits() == other.sparsity_y.to_bits()
            && self.rank_x == other.rank_x
            && self.rank_y == other.rank_y
            && self.seed == other.seed
    }

    /// Gradient queries implied by the local step count.
    pub fn oracle_calls(&self) -> u64 {
        self.cumulative_local_steps * self.method.oracle_calls_per_step()
    }
}

/// Result of a run with the final evaluated point kept.
#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    pub records: Vec<RunRecord>,
    /// Point evaluated in the last record.
    pub solution: PrimalPair<T>,
    /// Gradient queries counted by the oracle.
    pub oracle_calls: u64,
}

/// Uniform sample without replacement of `⌈fraction·M⌉` clients for the
/// given round, sorted ascending.
pub fn sample_clients(clients: usize, fraction: f64, seed: u64, round: usize) -> Vec<usize> {
    let count = ((fraction * clients as f64 - 1e-9).ceil() as usize).clamp(1, clients.max(1));
    if count >= clients {
        return (0..clients).collect();
    }
    let mut rng = rng::stream(seed, &[rng::SAMPLING, round as u64]);
    let mut picked = index::sample(&mut rng, clients, count).into_vec();
    picked.sort_unstable();
    picked
}

/// Rayon pool sized by [`THREADS_ENV`], defaulting to rayon's choice.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            Error::invalid(
                "worker_pool",
                format!("{THREADS_ENV} must be a positive integer, got `{v}`"),
            )
        })?;
        if n == 0 {
            return Err(Error::invalid("worker_pool", format!("{THREADS_ENV} must be >= 1")));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::invalid("worker_pool", e.to_string()))
}

pub(crate) fn build_method<T: Scalar>(
    cfg: &SimConfig,
    init: PrimalPair<T>,
    reg: Regularizer<T>,
) -> Result<Box<dyn FederatedMethod<T>>> {
    let steps = StepSizes::new(T::lit(cfg.eta_c), T::lit(cfg.eta_s))?;
    let k = cfg.local_steps;
    Ok(match cfg.method {
        Method::FeDualEx => Box::new(FeDualEx::new(init, reg, steps, k)?),
        Method::FedMiP => Box::new(FedMiP::new(init, reg, steps, k)?),
        Method::FedMiD => Box::new(FedMiD::new(init, reg, steps, k)?),
        Method::FedDualAvg => Box::new(FedDualAvg::new(init, reg, steps, k)?),
        m @ (Method::SeqStochasticDe | Method::SeqCompositeDe) => {
            Box::new(DualExtrapolation::new(init, reg, steps.eta_c)?.for_simulation(m, k)?)
        }
    })
}

/// Gap at `z`, sparsity and rank at `structure`.
fn evaluate<T: Scalar>(
    problem: &ProblemInstance<T>,
    z: &PrimalPair<T>,
    structure: &PrimalPair<T>,
    cfg: &SimConfig,
    round: usize,
    steps: u64,
    started: Instant,
) -> Result<RunRecord> {
    let diverged = |detail: String| Error::Diverged { round, detail };
    if !z.is_finite() || !structure.is_finite() {
        return Err(diverged("non-finite evaluation point".into()));
    }
    let gap = problem.duality_gap(z)?.to_f64().unwrap_or(f64::NAN);
    if !gap.is_finite() || gap > DIVERGENCE_GAP {
        return Err(diverged(format!("duality gap {gap:e}")));
    }
    Ok(RunRecord {
        method: cfg.method,
        round,
        cumulative_local_steps: steps,
        duality_gap: gap,
        sparsity_x: sparsity(structure.x.as_slice()),
        sparsity_y: sparsity(structure.y.as_slice()),
        rank_x: if structure.x.is_empty() {
            0
        } else {
            numerical_rank(&structure.x)?
        },
        rank_y: if structure.y.is_empty() {
            0
        } else {
            numerical_rank(&structure.y)?
        },
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        seed: cfg.seed,
    })
}

/// Runs `cfg` and returns the metric series.
pub fn run_experiment(cfg: &SimConfig) -> Result<Vec<RunRecord>> {
    Ok(run_experiment_in::<f64>(cfg)?.records)
}

/// Runs `cfg` in scalar type `T` on the configured worker pool.
pub fn run_experiment_in<T: Scalar>(cfg: &SimConfig) -> Result<RunOutcome<T>> {
    cfg.validate()?;
    let problem: ProblemInstance<T> = cfg.problem.build()?;
    worker_pool()?.install(|| simulate(cfg, &problem))
}

/// Runs `cfg` on an already built problem in the current thread pool.
pub fn simulate<T: Scalar>(cfg: &SimConfig, problem: &ProblemInstance<T>) -> Result<RunOutcome<T>> {
    cfg.validate()?;
    let started = Instant::now();
    let init = problem.init_point(cfg.seed)?;
    let sigma = if cfg.method == Method::SeqCompositeDe {
        0.0
    } else {
        cfg.sigma
    };
    let oracle = GradientOracle::new(problem, NoiseModel::new(T::lit(sigma), cfg.seed)?);
    let mut method = build_method(cfg, init.clone(), problem.regularizer())?;

    let mut records = vec![evaluate(problem, &init, &init, cfg, 0, 0, started)?];
    let mut ergodic = Ergodic::new(init.shape());
    let mut last = init.clone();
    let mut evaluated = init;
    let mut steps = 0u64;
    let every = cfg.eval_interval();
    let per_round = cfg.participants_per_round();

    for r in 0..cfg.rounds {
        let participants = if cfg.method.is_sequential() {
            vec![0]
        } else {
            sample_clients(cfg.clients, cfg.participation, cfg.seed, r)
        };
        debug_assert_eq!(participants.len(), per_round);
        let report = method.run_round(r, &participants, &oracle).map_err(|e| match e {
            Error::Diverged { detail, .. } => Error::Diverged { round: r, detail },
            other => other,
        })?;
        steps += (participants.len() * cfg.local_steps) as u64;
        match cfg.output {
            OutputSequence::Shadow => {
                for z in &report.outputs {
                    ergodic.push(z);
                }
                if let Some(z) = report.outputs.last() {
                    last = z.clone();
                }
            }
            OutputSequence::Server => {
                ergodic.push(&report.server_point);
                last = report.server_point;
            }
        }
        let done = r + 1;
        if done % every == 0 || done == cfg.rounds {
            let z = match cfg.eval_point {
                EvalPoint::Ergodic => ergodic.mean().unwrap_or_else(|| last.clone()),
                EvalPoint::Last => last.clone(),
            };
            records.push(evaluate(problem, &z, &last, cfg, done, steps, started)?);
            evaluated = z;
        }
    }
    Ok(RunOutcome {
        records,
        solution: evaluated,
        oracle_calls: oracle.calls(),
    })
}
