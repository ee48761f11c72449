//! Step-level updates of FeDualEx, its primal twin FedMiP, the composite
//! convex baselines FedMiD and FedDualAvg, and the sequential dual
//! extrapolation methods.
//!
//! Every federated method runs its participating clients in lockstep: at
//! each local step the gradient queries of all clients are issued as one
//! batch, and reductions over clients run in ascending client order, so
//! results do not depend on how the per-client work is scheduled.

mod dual_avg;
mod fedualex;
mod mirror;
mod oracle;
mod sequential;

use std::fmt;
use std::str::FromStr;

pub use dual_avg::FedDualAvg;
pub use fedualex::{
    fedualex_local_step, fedualex_local_steps, fedualex_server_round, shadow_primal, FeDualEx, FeDualExClientState,
    FeDualExServerState, HalfStepOutput,
};
pub use mirror::{fedmid_local_steps, fedmip_local_steps, FedMiD, FedMiP, MirrorProxClientState};
pub use oracle::GradientOracle;
pub use sequential::{DualExtrapolation, SequentialStep};

use crate::bregman::client_weight;
use crate::error::{Error, Result};
use crate::pair::{Pair, PairShape, PrimalPair};
use crate::problems::{HalfStep, NoiseKey};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    FeDualEx,
    FedMiP,
    FedMiD,
    FedDualAvg,
    /// Sequential stochastic dual extrapolation (single client, `σ ≥ 0`).
    SeqStochasticDe,
    /// Sequential composite dual extrapolation (exact gradients).
    SeqCompositeDe,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::FeDualEx,
        Method::FedMiP,
        Method::FedMiD,
        Method::FedDualAvg,
        Method::SeqStochasticDe,
        Method::SeqCompositeDe,
    ];

    /// Gradient queries per local step and client.
    pub fn oracle_calls_per_step(self) -> u64 {
        match self {
            Method::FedMiD | Method::FedDualAvg => 1,
            _ => 2,
        }
    }

    pub fn is_sequential(self) -> bool {
        matches!(self, Method::SeqStochasticDe | Method::SeqCompositeDe)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::FeDualEx => "fedualex",
            Method::FedMiP => "fedmip",
            Method::FedMiD => "fedmid",
            Method::FedDualAvg => "feddualavg",
            Method::SeqStochasticDe => "seq_stochastic_de",
            Method::SeqCompositeDe => "seq_composite_de",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::invalid("Method", format!("unknown method `{s}`")))
    }
}

/// Client and server step sizes `η^c`, `η^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes<T> {
    pub eta_c: T,
    pub eta_s: T,
}

impl<T: Scalar> StepSizes<T> {
    pub fn new(eta_c: T, eta_s: T) -> Result<Self> {
        let s = Self { eta_c, eta_s };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta_c", self.eta_c), ("eta_s", self.eta_s)] {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::invalid("StepSizes", format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Position `(r, k)` of a local step within a run with `K` local steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalStep {
    pub round: usize,
    pub local_steps: usize,
    pub k: usize,
}

impl LocalStep {
    pub fn new(round: usize, local_steps: usize, k: usize) -> Self {
        Self { round, local_steps, k }
    }

    /// Step `t` of a sequential run, the same position as step `t` of a
    /// single-client federated run with `η^s = 1`.
    pub fn sequential(t: usize) -> Self {
        Self {
            round: 0,
            local_steps: 1,
            k: t,
        }
    }

    /// `η^c (η^s r K + k)`
    pub fn weight<T: Scalar>(&self, steps: StepSizes<T>) -> T {
        client_weight(steps.eta_c, steps.eta_s, self.round, self.local_steps, self.k)
    }

    /// `η^c (η^s r K + k + 1)`
    pub fn next_weight<T: Scalar>(&self, steps: StepSizes<T>) -> T {
        client_weight(steps.eta_c, steps.eta_s, self.round, self.local_steps, self.k + 1)
    }

    pub fn key(&self, client: usize, half: HalfStep) -> NoiseKey {
        NoiseKey::new(client, self.round, self.local_steps, self.k, half)
    }
}

/// Output of one communication round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport<T> {
    /// The round's contribution to the returned ergodic average, in step
    /// order (shadow half points for FeDualEx).
    pub outputs: Vec<PrimalPair<T>>,
    /// Primal image of the server state after aggregation.
    pub server_point: PrimalPair<T>,
}

/// A federated optimizer driven one communication round at a time.
pub trait FederatedMethod<T: Scalar>: Send {
    fn method(&self) -> Method;

    fn initial_point(&self) -> &PrimalPair<T>;

    /// Runs `K` local steps on every participant, then aggregates.
    /// `participants` must be sorted and non-empty.
    fn run_round(
        &mut self,
        round: usize,
        participants: &[usize],
        oracle: &GradientOracle<'_, T>,
    ) -> Result<RoundReport<T>>;
}

/// Running uniform average of a point sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Ergodic<T> {
    sum: PrimalPair<T>,
    count: usize,
}

impl<T: Scalar> Ergodic<T> {
    pub fn new(shape: PairShape) -> Self {
        Self {
            sum: Pair::zeros(shape),
            count: 0,
        }
    }

    pub fn push(&mut self, z: &PrimalPair<T>) {
        self.sum.axpy(T::one(), z);
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Option<PrimalPair<T>> {
        (self.count > 0).then(|| self.sum.scale(T::one() / T::from_count(self.count)))
    }
}

/// Client average in ascending order; a single client's point is returned
/// unchanged.
pub(crate) fn client_mean<T: Scalar>(points: &[&PrimalPair<T>]) -> PrimalPair<T> {
    match points {
        [only] => (*only).clone(),
        _ => Pair::mean(points),
    }
}

pub(crate) fn check_finite<T: Scalar>(p: &Pair<T>, round: usize, what: &str) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::Diverged {
            round,
            detail: format!("non-finite {what}"),
        })
    }
}

/// Server aggregation `current + η^s (mean(finals) − current)`.
///
/// The mean is taken relative to the first client, so identical client
/// states average exactly, and with `η^s = 1` the mean is returned as is;
/// a single client with a unit server step thus hands its state over
/// bit for bit.
pub(crate) fn server_step<T: Scalar>(
    current: &Pair<T>,
    finals: &[&Pair<T>],
    eta_s: T,
    op: &'static str,
) -> Result<Pair<T>> {
    let Some(first) = finals.first() else {
        return Err(Error::invalid(op, "empty participant set"));
    };
    for f in finals {
        current.ensure_same_shape(f, op)?;
    }
    let mut mean = (*first).clone();
    if finals.len() > 1 {
        let deltas: Vec<Pair<T>> = finals.iter().map(|f| f.sub(first)).collect();
        let refs: Vec<&Pair<T>> = deltas.iter().collect();
        mean.axpy(T::one(), &Pair::mean(&refs));
    }
    if eta_s == T::one() {
        return Ok(mean);
    }
    let mut next = current.clone();
    next.axpy(eta_s, &mean.sub(current));
    Ok(next)
}
