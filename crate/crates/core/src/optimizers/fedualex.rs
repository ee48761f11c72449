use rayon::prelude::*;

use super::{check_finite, server_step, FederatedMethod, LocalStep, Method, RoundReport, StepSizes};
use crate::bregman::{client_weight, GeneralizedDgf, Regularizer};
use crate::error::Result;
use crate::pair::{DualPoint, Pair, PrimalPair};
use crate::problems::{HalfStep, NoiseKey};
use crate::scalar::Scalar;

use super::oracle::GradientOracle;

/// Dual iterate `ς^m_{r,k}` of one client.
#[derive(Debug, Clone, PartialEq)]
pub struct FeDualExClientState<T> {
    pub client: usize,
    pub varsigma: DualPoint<T>,
}

/// What one local step leaves behind for the server's shadow sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfStepOutput<T> {
    /// `z^m_{r,k}`
    pub z: PrimalPair<T>,
    /// `ω^m_{r,k+1/2} = ς̄ − ς^m_{r,k} − η^c g(z^m_{r,k}; ξ)`
    pub omega: DualPoint<T>,
    /// `z^m_{r,k+1/2} = ∇ℓ*_{r,k+1}(ω^m_{r,k+1/2})`
    pub z_half: PrimalPair<T>,
}

/// Advances every client by one local step in lockstep: both gradient
/// queries are issued as one batch across clients.
///
/// `z = ∇ℓ*_{r,k}(ς̄ − ς)`, `z_half = ∇ℓ*_{r,k+1}(ς̄ − ς − η^c g(z))`,
/// `ς ← ς + η^c g(z_half)`.
pub fn fedualex_local_steps<T: Scalar>(
    clients: &mut [FeDualExClientState<T>],
    anchor: &DualPoint<T>,
    reg: Regularizer<T>,
    steps: StepSizes<T>,
    at: LocalStep,
    oracle: &GradientOracle<'_, T>,
) -> Result<Vec<HalfStepOutput<T>>> {
    let ell_k = GeneralizedDgf::new(reg, at.weight(steps))?;
    let ell_next = GeneralizedDgf::new(reg, at.next_weight(steps))?;
    let eta = steps.eta_c;

    let shifted: Vec<DualPoint<T>> = clients.iter().map(|c| anchor.sub(&c.varsigma)).collect();
    let zs = shifted
        .par_iter()
        .map(|w| ell_k.grad_conjugate(w))
        .collect::<Result<Vec<_>>>()?;
    let keys: Vec<NoiseKey> = clients.iter().map(|c| at.key(c.client, HalfStep::First)).collect();
    let g1 = oracle.query(&zs.iter().collect::<Vec<_>>(), &keys)?;

    let omegas: Vec<DualPoint<T>> = shifted.iter().zip(&g1).map(|(w, g)| w.sub(&g.scale(eta))).collect();
    let halves = omegas
        .par_iter()
        .map(|w| ell_next.grad_conjugate(w))
        .collect::<Result<Vec<_>>>()?;
    let keys: Vec<NoiseKey> = clients.iter().map(|c| at.key(c.client, HalfStep::Second)).collect();
    let g2 = oracle.query(&halves.iter().collect::<Vec<_>>(), &keys)?;

    for (c, g) in clients.iter_mut().zip(&g2) {
        c.varsigma.axpy(eta, g);
        check_finite(&c.varsigma, at.round, "client dual variable")?;
    }
    Ok(zs
        .into_iter()
        .zip(omegas)
        .zip(halves)
        .map(|((z, omega), z_half)| HalfStepOutput { z, omega, z_half })
        .collect())
}

/// Single-client form of [`fedualex_local_steps`].
pub fn fedualex_local_step<T: Scalar>(
    client: &mut FeDualExClientState<T>,
    anchor: &DualPoint<T>,
    reg: Regularizer<T>,
    steps: StepSizes<T>,
    at: LocalStep,
    oracle: &GradientOracle<'_, T>,
) -> Result<HalfStepOutput<T>> {
    let mut out = fedualex_local_steps(std::slice::from_mut(client), anchor, reg, steps, at, oracle)?;
    Ok(out.remove(0))
}

/// Shadow projection `ẑ = ∇ℓ*(mean_m ω^m)` of the across-client average of
/// half-step duals. With one client this is that client's own half point.
pub fn shadow_primal<T: Scalar>(outputs: &[HalfStepOutput<T>], ell: &GeneralizedDgf<T>) -> Result<PrimalPair<T>> {
    if let [only] = outputs {
        return Ok(only.z_half.clone());
    }
    let omegas: Vec<&DualPoint<T>> = outputs.iter().map(|o| &o.omega).collect();
    ell.grad_conjugate(&Pair::mean(&omegas))
}

/// Server dual `ς_r`, the fixed anchor `ς̄` and the step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeDualExServerState<T> {
    pub varsigma: DualPoint<T>,
    pub anchor: DualPoint<T>,
    pub steps: StepSizes<T>,
}

/// `ς_{r+1} = ς_r + η^s Δ_r` with `Δ_r = mean_m ς^m_{r,K} − ς_r`; clients
/// are averaged in the order given.
pub fn fedualex_server_round<T: Scalar>(
    server: &mut FeDualExServerState<T>,
    client_finals: &[&DualPoint<T>],
) -> Result<()> {
    server.varsigma = server_step(
        &server.varsigma,
        client_finals,
        server.steps.eta_s,
        "fedualex_server_round",
    )?;
    Ok(())
}

/// Federated dual extrapolation.
#[derive(Debug, Clone)]
pub struct FeDualEx<T: Scalar> {
    pub server: FeDualExServerState<T>,
    reg: Regularizer<T>,
    local_steps: usize,
    init: PrimalPair<T>,
}

impl<T: Scalar> FeDualEx<T> {
    /// `ς_0 = 0` and `ς̄ = ∇ℓ(z_0) = z_0`, so the first projection returns
    /// `z_0`.
    pub fn new(init: PrimalPair<T>, reg: Regularizer<T>, steps: StepSizes<T>, local_steps: usize) -> Result<Self> {
        steps.validate()?;
        Ok(Self {
            server: FeDualExServerState {
                varsigma: Pair::zeros(init.shape()),
                anchor: init.clone(),
                steps,
            },
            reg,
            local_steps,
            init,
        })
    }
}

impl<T: Scalar> FederatedMethod<T> for FeDualEx<T> {
    fn method(&self) -> Method {
        Method::FeDualEx
    }

    fn initial_point(&self) -> &PrimalPair<T> {
        &self.init
    }

    fn run_round(
        &mut self,
        round: usize,
        participants: &[usize],
        oracle: &GradientOracle<'_, T>,
    ) -> Result<RoundReport<T>> {
        let steps = self.server.steps;
        let mut clients: Vec<FeDualExClientState<T>> = participants
            .iter()
            .map(|&client| FeDualExClientState {
                client,
                varsigma: self.server.varsigma.clone(),
            })
            .collect();
        let mut outputs = Vec::with_capacity(self.local_steps);
        for k in 0..self.local_steps {
            let at = LocalStep::new(round, self.local_steps, k);
            let half = fedualex_local_steps(&mut clients, &self.server.anchor, self.reg, steps, at, oracle)?;
            let ell = GeneralizedDgf::new(self.reg, at.next_weight(steps))?;
            outputs.push(shadow_primal(&half, &ell)?);
        }
        let finals: Vec<&DualPoint<T>> = clients.iter().map(|c| &c.varsigma).collect();
        fedualex_server_round(&mut self.server, &finals)?;
        check_finite(&self.server.varsigma, round, "server dual variable")?;

        let t = client_weight(steps.eta_c, steps.eta_s, round + 1, self.local_steps, 0);
        let server_point =
            GeneralizedDgf::new(self.reg, t)?.grad_conjugate(&self.server.anchor.sub(&self.server.varsigma))?;
        Ok(RoundReport { outputs, server_point })
    }
}
