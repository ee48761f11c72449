use super::fedualex::{fedualex_local_step, FeDualExClientState};
use super::oracle::GradientOracle;
use super::{FederatedMethod, LocalStep, Method, RoundReport, StepSizes};
use crate::bregman::{GeneralizedDgf, Regularizer};
use crate::error::{Error, Result};
use crate::pair::{DualPoint, Pair, PrimalPair};
use crate::scalar::Scalar;

/// Points produced by one sequential step.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialStep<T> {
    pub z: PrimalPair<T>,
    pub z_half: PrimalPair<T>,
}

/// Sequential composite dual extrapolation with `ℓ_t = h + tηψ`.
///
/// With a noisy oracle this is the stochastic method, with an exact one the
/// deterministic method. Step `t` performs exactly the arithmetic of local
/// step `t` of a single-client FeDualEx run with `η^s = 1`.
#[derive(Debug, Clone)]
pub struct DualExtrapolation<T: Scalar> {
    state: FeDualExClientState<T>,
    anchor: DualPoint<T>,
    init: PrimalPair<T>,
    reg: Regularizer<T>,
    steps: StepSizes<T>,
    t: usize,
    method: Method,
    steps_per_round: usize,
}

impl<T: Scalar> DualExtrapolation<T> {
    pub fn new(init: PrimalPair<T>, reg: Regularizer<T>, eta: T) -> Result<Self> {
        Ok(Self {
            state: FeDualExClientState {
                client: 0,
                varsigma: Pair::zeros(init.shape()),
            },
            anchor: init.clone(),
            init,
            reg,
            steps: StepSizes::new(eta, T::one())?,
            t: 0,
            method: Method::SeqStochasticDe,
            steps_per_round: 1,
        })
    }

    /// Labels the run and sets how many steps one simulator round covers.
    pub fn for_simulation(mut self, method: Method, steps_per_round: usize) -> Result<Self> {
        if !method.is_sequential() {
            return Err(Error::invalid(
                "DualExtrapolation",
                format!("{method} is not a sequential method"),
            ));
        }
        if steps_per_round == 0 {
            return Err(Error::invalid("DualExtrapolation", "steps_per_round must be >= 1"));
        }
        self.method = method;
        self.steps_per_round = steps_per_round;
        Ok(self)
    }

    pub fn step(&mut self, oracle: &GradientOracle<'_, T>) -> Result<SequentialStep<T>> {
        let at = LocalStep::sequential(self.t);
        let out = fedualex_local_step(&mut self.state, &self.anchor, self.reg, self.steps, at, oracle)?;
        self.t += 1;
        Ok(SequentialStep {
            z: out.z,
            z_half: out.z_half,
        })
    }

    pub fn varsigma(&self) -> &DualPoint<T> {
        &self.state.varsigma
    }

    pub fn steps_taken(&self) -> usize {
        self.t
    }

    /// `∇ℓ*_t(ς̄ − ς_t)`, the point the next step starts from.
    pub fn current_point(&self) -> Result<PrimalPair<T>> {
        let ell = GeneralizedDgf::new(self.reg, LocalStep::sequential(self.t).weight(self.steps))?;
        ell.grad_conjugate(&self.anchor.sub(&self.state.varsigma))
    }
}

impl<T: Scalar> FederatedMethod<T> for DualExtrapolation<T> {
    fn method(&self) -> Method {
        self.method
    }

    fn initial_point(&self) -> &PrimalPair<T> {
        &self.init
    }

    /// Runs `steps_per_round` steps; participants are ignored.
    fn run_round(
        &mut self,
        _round: usize,
        _participants: &[usize],
        oracle: &GradientOracle<'_, T>,
    ) -> Result<RoundReport<T>> {
        let mut outputs = Vec::with_capacity(self.steps_per_round);
        for _ in 0..self.steps_per_round {
            outputs.push(self.step(oracle)?.z_half);
        }
        Ok(RoundReport {
            outputs,
            server_point: self.current_point()?,
        })
    }
}
