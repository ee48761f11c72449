use rayon::prelude::*;

use super::oracle::GradientOracle;
use super::{check_finite, client_mean, server_step, FederatedMethod, LocalStep, Method, RoundReport, StepSizes};
use crate::bregman::{GeneralizedDgf, Regularizer};
use crate::error::Result;
use crate::pair::PrimalPair;
use crate::problems::{HalfStep, NoiseKey};
use crate::scalar::Scalar;

/// Primal iterate `z^m_{r,k}` of one client.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorProxClientState<T> {
    pub client: usize,
    pub z: PrimalPair<T>,
}

fn query_all<T: Scalar>(
    points: &[&PrimalPair<T>],
    clients: &[MirrorProxClientState<T>],
    at: LocalStep,
    half: HalfStep,
    oracle: &GradientOracle<'_, T>,
) -> Result<Vec<PrimalPair<T>>> {
    let keys: Vec<NoiseKey> = clients.iter().map(|c| at.key(c.client, half)).collect();
    oracle.query(points, &keys)
}

/// `∇(h + ηψ)*(z − η g)` for every `(z, g)` pair.
fn mirror_steps<T: Scalar>(
    from: &[&PrimalPair<T>],
    grads: &[PrimalPair<T>],
    ell: &GeneralizedDgf<T>,
    eta: T,
) -> Result<Vec<PrimalPair<T>>> {
    from.par_iter()
        .zip(grads.par_iter())
        .map(|(z, g)| ell.grad_conjugate(&z.sub(&g.scale(eta))))
        .collect()
}

/// One mirror-prox local step on every client in lockstep:
/// `z_half = ∇(h + η^c ψ)*(z − η^c g(z))`,
/// `z ← ∇(h + η^c ψ)*(z − η^c g(z_half))`. Returns the half points.
pub fn fedmip_local_steps<T: Scalar>(
    clients: &mut [MirrorProxClientState<T>],
    reg: Regularizer<T>,
    steps: StepSizes<T>,
    at: LocalStep,
    oracle: &GradientOracle<'_, T>,
) -> Result<Vec<PrimalPair<T>>> {
    let ell = GeneralizedDgf::new(reg, steps.eta_c)?;
    let zs: Vec<&PrimalPair<T>> = clients.iter().map(|c| &c.z).collect();
    let g1 = query_all(&zs, clients, at, HalfStep::First, oracle)?;
    let halves = mirror_steps(&zs, &g1, &ell, steps.eta_c)?;
    let g2 = query_all(
        &halves.iter().collect::<Vec<_>>(),
        clients,
        at,
        HalfStep::Second,
        oracle,
    )?;
    let next = mirror_steps(&zs, &g2, &ell, steps.eta_c)?;
    for (c, z) in clients.iter_mut().zip(next) {
        check_finite(&z, at.round, "client iterate")?;
        c.z = z;
    }
    Ok(halves)
}

/// One composite mirror-descent local step on every client in lockstep:
/// `z ← ∇(h + η^c ψ)*(z − η^c g(z))`.
pub fn fedmid_local_steps<T: Scalar>(
    clients: &mut [MirrorProxClientState<T>],
    reg: Regularizer<T>,
    steps: StepSizes<T>,
    at: LocalStep,
    oracle: &GradientOracle<'_, T>,
) -> Result<()> {
    let ell = GeneralizedDgf::new(reg, steps.eta_c)?;
    let zs: Vec<&PrimalPair<T>> = clients.iter().map(|c| &c.z).collect();
    let g = query_all(&zs, clients, at, HalfStep::First, oracle)?;
    let next = mirror_steps(&zs, &g, &ell, steps.eta_c)?;
    for (c, z) in clients.iter_mut().zip(next) {
        check_finite(&z, at.round, "client iterate")?;
        c.z = z;
    }
    Ok(())
}

/// Server state shared by the two primal-averaging methods.
#[derive(Debug, Clone)]
struct PrimalServer<T: Scalar> {
    z: PrimalPair<T>,
    init: PrimalPair<T>,
    reg: Regularizer<T>,
    steps: StepSizes<T>,
    local_steps: usize,
}

impl<T: Scalar> PrimalServer<T> {
    fn new(init: PrimalPair<T>, reg: Regularizer<T>, steps: StepSizes<T>, local_steps: usize) -> Result<Self> {
        steps.validate()?;
        Ok(Self {
            z: init.clone(),
            init,
            reg,
            steps,
            local_steps,
        })
    }

    fn clients(&self, participants: &[usize]) -> Vec<MirrorProxClientState<T>> {
        participants
            .iter()
            .map(|&client| MirrorProxClientState {
                client,
                z: self.z.clone(),
            })
            .collect()
    }

    /// `z_{r+1} = ∇(h + η^s η^c K ψ)*(z_r + η^s Δ_r)`.
    fn aggregate(&mut self, round: usize, clients: &[MirrorProxClientState<T>]) -> Result<PrimalPair<T>> {
        let finals: Vec<&PrimalPair<T>> = clients.iter().map(|c| &c.z).collect();
        let moved = server_step(&self.z, &finals, self.steps.eta_s, "primal server round")?;
        let weight = self.steps.eta_s * self.steps.eta_c * T::from_count(self.local_steps);
        self.z = GeneralizedDgf::new(self.reg, weight)?.grad_conjugate(&moved)?;
        check_finite(&self.z, round, "server iterate")?;
        Ok(self.z.clone())
    }
}

/// Federated mirror prox, the primal twin of FeDualEx.
#[derive(Debug, Clone)]
pub struct FedMiP<T: Scalar> {
    server: PrimalServer<T>,
}

impl<T: Scalar> FedMiP<T> {
    pub fn new(init: PrimalPair<T>, reg: Regularizer<T>, steps: StepSizes<T>, local_steps: usize) -> Result<Self> {
        Ok(Self {
            server: PrimalServer::new(init, reg, steps, local_steps)?,
        })
    }

    pub fn server_point(&self) -> &PrimalPair<T> {
        &self.server.z
    }
}

impl<T: Scalar> FederatedMethod<T> for FedMiP<T> {
    fn method(&self) -> Method {
        Method::FedMiP
    }

    fn initial_point(&self) -> &PrimalPair<T> {
        &self.server.init
    }

    /// Outputs the client average of the half points at every local step.
    fn run_round(
        &mut self,
        round: usize,
        participants: &[usize],
        oracle: &GradientOracle<'_, T>,
    ) -> Result<RoundReport<T>> {
        let s = &self.server;
        let mut clients = s.clients(participants);
        let mut outputs = Vec::with_capacity(s.local_steps);
        for k in 0..s.local_steps {
            let at = LocalStep::new(round, s.local_steps, k);
            let halves = fedmip_local_steps(&mut clients, s.reg, s.steps, at, oracle)?;
            outputs.push(client_mean(&halves.iter().collect::<Vec<_>>()));
        }
        let server_point = self.server.aggregate(round, &clients)?;
        Ok(RoundReport { outputs, server_point })
    }
}

/// Federated composite mirror descent.
#[derive(Debug, Clone)]
pub struct FedMiD<T: Scalar> {
    server: PrimalServer<T>,
}

impl<T: Scalar> FedMiD<T> {
    pub fn new(init: PrimalPair<T>, reg: Regularizer<T>, steps: StepSizes<T>, local_steps: usize) -> Result<Self> {
        Ok(Self {
            server: PrimalServer::new(init, reg, steps, local_steps)?,
        })
    }

    pub fn server_point(&self) -> &PrimalPair<T> {
        &self.server.z
    }
}

impl<T: Scalar> FederatedMethod<T> for FedMiD<T> {
    fn method(&self) -> Method {
        Method::FedMiD
    }

    fn initial_point(&self) -> &PrimalPair<T> {
        &self.server.init
    }

    /// Outputs the client average of the query points `z_{r,k}`.
    fn run_round(
        &mut self,
        round: usize,
        participants: &[usize],
        oracle: &GradientOracle<'_, T>,
    ) -> Result<RoundReport<T>> {
        let s = &self.server;
        let mut clients = s.clients(participants);
        let mut outputs = Vec::with_capacity(s.local_steps);
        for k in 0..s.local_steps {
            let at = LocalStep::new(round, s.local_steps, k);
            outputs.push(client_mean(&clients.iter().map(|c| &c.z).collect::<Vec<_>>()));
            fedmid_local_steps(&mut clients, s.reg, s.steps, at, oracle)?;
        }
        let server_point = self.server.aggregate(round, &clients)?;
        Ok(RoundReport { outputs, server_point })
    }
}
