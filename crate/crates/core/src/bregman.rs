//! Euclidean distance-generating function, its regularized (generalized)
//! variant `ℓ_t = ½‖·‖² + t·ψ`, and the closed-form maps `∇ℓ_t*` for the
//! two regularizer families used by the benchmarks.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{norms, thin_svd, Matrix};
use crate::pair::{DualPoint, Pair, PrimalPair};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegularizerKind {
    /// `ψ = 0`, unconstrained.
    None,
    /// `ψ = λ‖·‖₁` plus the indicator of the `ℓ∞` ball of radius `D`.
    L1Box,
    /// `ψ = λ‖·‖_*` plus the indicator of the spectral-norm ball of radius `D`.
    NuclearSpectralBox,
}

impl fmt::Display for RegularizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegularizerKind::None => "none",
            RegularizerKind::L1Box => "l1_box",
            RegularizerKind::NuclearSpectralBox => "nuclear_spectral_box",
        })
    }
}

impl FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(RegularizerKind::None),
            "l1_box" => Ok(RegularizerKind::L1Box),
            "nuclear_spectral_box" => Ok(RegularizerKind::NuclearSpectralBox),
            other => Err(Error::invalid("RegularizerKind", format!("unknown kind `{other}`"))),
        }
    }
}

/// Regularizer `ψ(z) = ψ(x) + ψ(y)` applied identically to both blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularizer<T> {
    pub kind: RegularizerKind,
    pub lambda: T,
    /// Radius `D` of the feasible ball (ignored for [`RegularizerKind::None`]).
    pub radius: T,
}

impl<T: Scalar> Regularizer<T> {
    pub fn new(kind: RegularizerKind, lambda: T, radius: T) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::invalid("Regularizer", "lambda must be finite and >= 0"));
        }
        if !(radius > T::zero()) {
            return Err(Error::invalid("Regularizer", "radius must be > 0"));
        }
        Ok(Self { kind, lambda, radius })
    }

    pub fn none() -> Self {
        Self {
            kind: RegularizerKind::None,
            lambda: T::zero(),
            radius: T::infinity(),
        }
    }

    pub fn l1_box(lambda: T, radius: T) -> Result<Self> {
        Self::new(RegularizerKind::L1Box, lambda, radius)
    }

    pub fn nuclear_box(lambda: T, radius: T) -> Result<Self> {
        Self::new(RegularizerKind::NuclearSpectralBox, lambda, radius)
    }

    /// `λ` times the block norm, without the indicator.
    pub fn penalty(&self, block: &Matrix<T>) -> Result<T> {
        match self.kind {
            RegularizerKind::None => Ok(T::zero()),
            RegularizerKind::L1Box => Ok(self.lambda * norms::l1(block.as_slice())?),
            RegularizerKind::NuclearSpectralBox => {
                if block.is_empty() {
                    Ok(T::zero())
                } else {
                    Ok(self.lambda * norms::nuclear(block)?)
                }
            }
        }
    }

    /// Norm in which the feasible ball is measured (`ℓ∞` or spectral).
    pub fn ball_norm(&self, block: &Matrix<T>) -> Result<T> {
        match self.kind {
            RegularizerKind::None | RegularizerKind::L1Box => norms::linf(block.as_slice()),
            RegularizerKind::NuclearSpectralBox => {
                if block.is_empty() {
                    Ok(T::zero())
                } else {
                    norms::spectral(block)
                }
            }
        }
    }

    pub fn is_feasible(&self, z: &PrimalPair<T>, slack: T) -> Result<bool> {
        if self.kind == RegularizerKind::None {
            return Ok(z.is_finite());
        }
        let bound = self.radius + slack;
        Ok(self.ball_norm(&z.x)? <= bound && self.ball_norm(&z.y)? <= bound)
    }

    /// Closed-form `argmin_z {½‖z − w‖² + t·ψ(z)}` for a single block.
    pub fn prox_block(&self, w: &Matrix<T>, t_eff: T) -> Result<Matrix<T>> {
        match self.kind {
            RegularizerKind::None => Ok(w.clone()),
            RegularizerKind::L1Box => {
                let lam = t_eff * self.lambda;
                let d = self.radius;
                Ok(w.map(|a| soft_threshold_clip(a, lam, d)))
            }
            RegularizerKind::NuclearSpectralBox => {
                if w.is_empty() {
                    Ok(w.clone())
                } else {
                    svt_clip(w, t_eff * self.lambda, self.radius)
                }
            }
        }
    }
}

/// Regularized distance-generating function `ℓ_t(z) = ½‖z‖² + t_eff·ψ(z)`.
///
/// `t_eff` is the accumulated regularization weight in step-size units, e.g.
/// `η^c (η^s r K + k)` for a federated client or `t η` for a sequential run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedDgf<T> {
    pub reg: Regularizer<T>,
    pub t_eff: T,
}

impl<T: Scalar> GeneralizedDgf<T> {
    pub fn new(reg: Regularizer<T>, t_eff: T) -> Result<Self> {
        if !(t_eff >= T::zero()) {
            return Err(Error::invalid("GeneralizedDgf", "t_eff must be >= 0"));
        }
        Ok(Self { reg, t_eff })
    }

    /// Plain `ℓ = ½‖·‖²` restricted to the feasible set.
    pub fn base(reg: Regularizer<T>) -> Self {
        Self { reg, t_eff: T::zero() }
    }

    /// `ℓ_t(z)`; infinite outside the feasible set.
    pub fn value(&self, z: &PrimalPair<T>) -> Result<T> {
        if !self.reg.is_feasible(z, T::zero())? {
            return Ok(T::infinity());
        }
        let psi = self.reg.penalty(&z.x)? + self.reg.penalty(&z.y)?;
        Ok(T::lit(0.5) * z.norm_sq() + self.t_eff * psi)
    }

    /// Mirror map `∇ℓ_t*(ω) = argmin_z {½‖z‖² − ⟨ω, z⟩ + t_eff·ψ(z)}`.
    pub fn grad_conjugate(&self, omega: &DualPoint<T>) -> Result<PrimalPair<T>> {
        Ok(Pair {
            x: self.reg.prox_block(&omega.x, self.t_eff)?,
            y: self.reg.prox_block(&omega.y, self.t_eff)?,
        })
    }
}

/// `V_{z'}(z) = ½‖z − z'‖²` for the Euclidean base function.
pub fn bregman_div<T: Scalar>(z: &PrimalPair<T>, anchor: &PrimalPair<T>) -> Result<T> {
    z.ensure_same_shape(anchor, "bregman_div")?;
    Ok(T::lit(0.5) * z.sub(anchor).norm_sq())
}

/// Generalized divergence `Ṽ_{ς'}(z) = ℓ_t(z) − ℓ_t(z') − ⟨ς', z − z'⟩`
/// with `z' = ∇ℓ_t*(ς')`.
pub fn generalized_bregman_div<T: Scalar>(
    ell: &GeneralizedDgf<T>,
    z: &PrimalPair<T>,
    anchor_dual: &DualPoint<T>,
) -> Result<T> {
    z.ensure_same_shape(anchor_dual, "generalized_bregman_div")?;
    let zp = ell.grad_conjugate(anchor_dual)?;
    Ok(ell.value(z)? - ell.value(&zp)? - anchor_dual.dot(&z.sub(&zp)))
}

/// `argmin_z {⟨g, z⟩ + Ṽ^{ℓ_t}_{anchor}(z)} = ∇ℓ_t*(anchor − g)`.
pub fn generalized_prox<T: Scalar>(
    ell: &GeneralizedDgf<T>,
    anchor: &DualPoint<T>,
    g: &DualPoint<T>,
) -> Result<PrimalPair<T>> {
    anchor.ensure_same_shape(g, "generalized_prox")?;
    ell.grad_conjugate(&anchor.sub(g))
}

/// Accumulated weight `η^c (η^s r K + k)` of client step `k` in round `r`.
pub fn client_weight<T: Scalar>(eta_c: T, eta_s: T, round: usize, local_steps: usize, k: usize) -> T {
    eta_c * (eta_s * T::from_count(round * local_steps) + T::from_count(k))
}

/// Soft-threshold level `λ' = λ η^c (η^s r K + k)`.
pub fn effective_threshold<T: Scalar>(lambda: T, eta_c: T, eta_s: T, round: usize, local_steps: usize, k: usize) -> T {
    lambda * client_weight(eta_c, eta_s, round, local_steps, k)
}

/// Shrink `ω` toward zero by `λ'`, then clip to `[−D, D]`.
#[inline]
pub fn soft_threshold_clip<T: Scalar>(omega: T, lambda_eff: T, radius: T) -> T {
    let a = omega.abs();
    if a <= lambda_eff {
        T::zero()
    } else if a <= lambda_eff + radius {
        (a - lambda_eff) * omega.signum()
    } else {
        radius * omega.signum()
    }
}

/// Singular-value soft-thresholding with spectral clipping:
/// `U diag(min(max(σᵢ − λ', 0), D)) Vᵀ`.
pub fn svt_clip<T: Scalar>(omega: &Matrix<T>, lambda_eff: T, radius: T) -> Result<Matrix<T>> {
    if omega.as_slice().iter().all(|&x| x == T::zero()) {
        omega.ensure_finite("svt_clip")?;
        return Ok(Matrix::zeros(omega.rows(), omega.cols()));
    }
    let svd = thin_svd(omega)?;
    let shrunk: Vec<T> = svd
        .s
        .iter()
        .map(|&s| (s - lambda_eff).max(T::zero()).min(radius))
        .collect();
    Ok(svd.recompose_with(&shrunk))
}

/// Problem constants that enter the federated client step-size rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizeSchedule<T> {
    /// Lipschitz constant of the gradient operator.
    pub beta: T,
    /// Bound on the divergence over the domain.
    pub diameter: T,
    /// Bound on the stochastic gradient norm.
    pub grad_bound: T,
    pub sigma: T,
    pub clients: usize,
    pub local_steps: usize,
    pub rounds: usize,
}

/// Client step size minimizing the federated ergodic-gap bound:
///
/// `min{ 1/(5β²), B^¼/(20^¼ β^½ G^½ K^¾ R^¼), B^½ M^½/(5^½ σ R^½ K^½), 1/(2^¾ β^½ G^½ K R^½) }`,
/// the noise term dropped when `σ = 0`.
pub fn client_step_size<T: Scalar>(s: &StepSizeSchedule<T>) -> Result<T> {
    let positive = [s.beta, s.diameter, s.grad_bound];
    if positive.iter().any(|&v| !(v > T::zero())) || s.clients == 0 || s.local_steps == 0 || s.rounds == 0 {
        return Err(Error::invalid(
            "client_step_size",
            "beta, diameter, grad_bound, clients, local_steps and rounds must be positive",
        ));
    }
    if !(s.sigma >= T::zero()) {
        return Err(Error::invalid("client_step_size", "sigma must be >= 0"));
    }
    let (beta, b, g) = (s.beta, s.diameter, s.grad_bound);
    let m = T::from_count(s.clients);
    let k = T::from_count(s.local_steps);
    let r = T::from_count(s.rounds);
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let three_quarters = T::lit(0.75);

    let mut best = T::one() / (T::lit(5.0) * beta * beta);
    let drift = b.powf(quarter)
        / (T::lit(20.0).powf(quarter) * beta.sqrt() * g.sqrt() * k.powf(three_quarters) * r.powf(quarter));
    best = best.min(drift);
    if s.sigma > T::zero() {
        let noise = (b * m).sqrt() / (T::lit(5.0).sqrt() * s.sigma * r.powf(half) * k.powf(half));
        best = best.min(noise);
    }
    let consensus = T::one() / (T::lit(2.0).powf(three_quarters) * beta.sqrt() * g.sqrt() * k * r.sqrt());
    Ok(best.min(consensus))
}
