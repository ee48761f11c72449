use rayon::prelude::*;

use super::oracle::GradientOracle;
use super::{check_finite, server_step, FederatedMethod, LocalStep, Method, RoundReport, StepSizes};
use crate::bregman::{GeneralizedDgf, Regularizer};
use crate::error::Result;
use crate::pair::{DualPoint, Pair, PrimalPair};
use crate::problems::{HalfStep, NoiseKey};
use crate::scalar::Scalar;

/// Federated composite dual averaging.
///
/// Clients run `μ ← μ − η^c g(x)` with `x = ∇(h + η̃_{r,k} ψ)*(μ)` and
/// `η̃_{r,k} = η^c (η^s r K + k)`; the server averages the duals.
#[derive(Debug, Clone)]
pub struct FedDualAvg<T: Scalar> {
    /// Server dual `μ_r`, started at `∇h(z_0) = z_0`.
    pub mu: DualPoint<T>,
    init: PrimalPair<T>,
    reg: Regularizer<T>,
    steps: StepSizes<T>,
    local_steps: usize,
}

impl<T: Scalar> FedDualAvg<T> {
    pub fn new(init: PrimalPair<T>, reg: Regularizer<T>, steps: StepSizes<T>, local_steps: usize) -> Result<Self> {
        steps.validate()?;
        Ok(Self {
            mu: init.clone(),
            init,
            reg,
            steps,
            local_steps,
        })
    }
}

impl<T: Scalar> FederatedMethod<T> for FedDualAvg<T> {
    fn method(&self) -> Method {
        Method::FedDualAvg
    }

    fn initial_point(&self) -> &PrimalPair<T> {
        &self.init
    }

    /// Outputs the projection of the client-averaged dual at every query.
    fn run_round(
        &mut self,
        round: usize,
        participants: &[usize],
        oracle: &GradientOracle<'_, T>,
    ) -> Result<RoundReport<T>> {
        let mut mus: Vec<DualPoint<T>> = participants.iter().map(|_| self.mu.clone()).collect();
        let mut outputs = Vec::with_capacity(self.local_steps);
        for k in 0..self.local_steps {
            let at = LocalStep::new(round, self.local_steps, k);
            let ell = GeneralizedDgf::new(self.reg, at.weight(self.steps))?;
            let xs = mus
                .par_iter()
                .map(|mu| ell.grad_conjugate(mu))
                .collect::<Result<Vec<_>>>()?;
            outputs.push(match xs.as_slice() {
                [only] => only.clone(),
                _ => ell.grad_conjugate(&Pair::mean(&mus.iter().collect::<Vec<_>>()))?,
            });
            let keys: Vec<NoiseKey> = participants.iter().map(|&c| at.key(c, HalfStep::First)).collect();
            let g = oracle.query(&xs.iter().collect::<Vec<_>>(), &keys)?;
            for (mu, g) in mus.iter_mut().zip(&g) {
                mu.axpy(-self.steps.eta_c, g);
                check_finite(mu, round, "client dual variable")?;
            }
        }
        let finals: Vec<&DualPoint<T>> = mus.iter().collect();
        self.mu = server_step(&self.mu, &finals, self.steps.eta_s, "feddualavg server round")?;
        check_finite(&self.mu, round, "server dual variable")?;
        let next = LocalStep::new(round + 1, self.local_steps, 0);
        let server_point = GeneralizedDgf::new(self.reg, next.weight(self.steps))?.grad_conjugate(&self.mu)?;
        Ok(RoundReport { outputs, server_point })
    }
}
