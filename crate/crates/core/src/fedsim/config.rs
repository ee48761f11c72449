use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::optimizers::Method;
use crate::problems::{
    generate_l1_problem, generate_nuclear_problem, generate_quadratic_problem, ProblemInstance, ProblemKind,
};
use crate::scalar::Scalar;

/// Which benchmark to build and with what regularization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Primal dimension (rows of `x`/`X`).
    pub m: usize,
    /// Dual dimension (rows of `y`/`Y`); unused by the quadratic problem.
    pub n: usize,
    /// Columns of `X`, `Y` and `B` for the nuclear problem.
    pub p: usize,
    pub lambda: f64,
    pub radius: f64,
    /// Seed of the problem data, kept apart from the run seed so that
    /// repeated seeds solve the same instance.
    pub data_seed: u64,
}

impl ProblemSpec {
    pub fn l1(m: usize, n: usize) -> Self {
        Self {
            kind: ProblemKind::L1,
            m,
            n,
            p: 1,
            lambda: 0.1,
            radius: 0.05,
            data_seed: 0,
        }
    }

    pub fn nuclear(m: usize, n: usize, p: usize) -> Self {
        Self {
            kind: ProblemKind::Nuclear,
            m,
            n,
            p,
            lambda: 0.1,
            radius: 0.05,
            data_seed: 0,
        }
    }

    pub fn quadratic(m: usize) -> Self {
        Self {
            kind: ProblemKind::Quadratic,
            m,
            n: 0,
            p: 1,
            lambda: 0.02,
            radius: 0.05,
            data_seed: 0,
        }
    }

    pub fn build<T: Scalar>(&self) -> Result<ProblemInstance<T>> {
        let (lambda, radius) = (T::lit(self.lambda), T::lit(self.radius));
        Ok(match self.kind {
            ProblemKind::L1 => ProblemInstance::L1(
                generate_l1_problem(self.m, self.n, self.data_seed)?.with_regularization(lambda, radius)?,
            ),
            ProblemKind::Nuclear => ProblemInstance::Nuclear(
                generate_nuclear_problem(self.m, self.n, self.p, self.data_seed)?
                    .with_regularization(lambda, radius)?,
            ),
            ProblemKind::Quadratic => ProblemInstance::Quadratic(
                generate_quadratic_problem(self.m, self.data_seed)?.with_regularization(lambda, radius)?,
            ),
        })
    }
}

/// Point at which metrics are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalPoint {
    /// Uniform average of the output sequence so far.
    #[default]
    Ergodic,
    /// Most recent element of the output sequence.
    Last,
}

/// Sequence the returned solution is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputSequence {
    /// Per-step shadow points computed from the simulator's view of all
    /// clients (client averages for the primal methods).
    #[default]
    Shadow,
    /// Primal image of the server state at round boundaries, the only
    /// output available to a real deployment.
    Server,
}

macro_rules! named_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::invalid(stringify!($ty), format!("unknown value `{other}`"))),
                }
            }
        }
    };
}

named_enum!(EvalPoint { Ergodic => "ergodic", Last => "last" });
named_enum!(OutputSequence { Shadow => "shadow", Server => "server" });

/// Full description of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub method: Method,
    pub problem: ProblemSpec,
    /// `M`
    pub clients: usize,
    /// `R`
    pub rounds: usize,
    /// `K`
    pub local_steps: usize,
    pub eta_s: f64,
    pub eta_c: f64,
    pub sigma: f64,
    pub participation: f64,
    pub seed: u64,
    /// Evaluate every this many rounds; `None` picks 10 for runs of at
    /// least 5000 rounds and 1 otherwise.
    pub eval_every: Option<usize>,
    pub eval_point: EvalPoint,
    pub output: OutputSequence,
}

impl SimConfig {
    pub fn new(method: Method, problem: ProblemSpec) -> Self {
        Self {
            method,
            problem,
            clients: 1,
            rounds: 1,
            local_steps: 1,
            eta_s: 1.0,
            eta_c: 0.1,
            sigma: 0.0,
            participation: 1.0,
            seed: 0,
            eval_every: None,
            eval_point: EvalPoint::Ergodic,
            output: OutputSequence::Shadow,
        }
    }

    pub fn eval_interval(&self) -> usize {
        match self.eval_every {
            Some(e) => e,
            None if self.rounds >= 5000 => 10,
            None => 1,
        }
    }

    /// Clients sampled per round.
    pub fn participants_per_round(&self) -> usize {
        if self.method.is_sequential() {
            1
        } else {
            ((self.participation * self.clients as f64 - 1e-9).ceil() as usize).clamp(1, self.clients.max(1))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| Err(Error::invalid("SimConfig", format!("{key}: {reason}")));
        if self.clients == 0 {
            return bad("clients", "must be >= 1");
        }
        if self.local_steps == 0 {
            return bad("local_steps", "must be >= 1");
        }
        if !(self.eta_c > 0.0) || !self.eta_c.is_finite() {
            return bad("eta_c", "must be finite and > 0");
        }
        if !(self.eta_s > 0.0) || !self.eta_s.is_finite() {
            return bad("eta_s", "must be finite and > 0");
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return bad("sigma", "must be finite and >= 0");
        }
        if !(self.participation > 0.0 && self.participation <= 1.0) {
            return bad("participation", "must lie in (0, 1]");
        }
        if self.participation * (self.clients as f64) < 1.0 - 1e-9 {
            return bad("participation", "participation * clients must be >= 1");
        }
        if self.eval_every == Some(0) {
            return bad("eval_every", "must be >= 1");
        }
        if !(self.problem.lambda >= 0.0) || !self.problem.lambda.is_finite() {
            return bad("lambda", "must be finite and >= 0");
        }
        if !(self.problem.radius > 0.0) || !self.problem.radius.is_finite() {
            return bad("radius", "must be finite and > 0");
        }
        let p = &self.problem;
        let dims_ok = match p.kind {
            ProblemKind::L1 => p.m >= 1 && p.n >= 1,
            ProblemKind::Nuclear => p.m >= 1 && p.n >= 1 && p.p >= 2 && p.p % 2 == 0,
            ProblemKind::Quadratic => p.m >= 1,
        };
        if !dims_ok {
            return bad("problem", "dimensions out of range (nuclear p must be even and >= 2)");
        }
        Ok(())
    }
}
