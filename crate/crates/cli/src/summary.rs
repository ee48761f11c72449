use std::fmt;

use fedualex::fedsim::RunRecord;
use fedualex::optimizers::Method;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: Method,
    pub final_round: usize,
    pub final_gap: f64,
    pub final_sparsity_x: f64,
    pub final_sparsity_y: f64,
    pub final_rank_x: usize,
    pub final_rank_y: usize,
    /// Earliest round attaining the smallest gap.
    pub best_round: usize,
    pub best_gap: f64,
    pub oracle_calls: u64,
}

pub fn summarize(records: &[RunRecord]) -> Result<Summary> {
    let last = records
        .last()
        .ok_or_else(|| CliError::config("records", "nothing to summarize"))?;
    let mut best = &records[0];
    for r in &records[1..] {
        if r.duality_gap < best.duality_gap {
            best = r;
        }
    }
    Ok(Summary {
        method: last.method,
        final_round: last.round,
        final_gap: last.duality_gap,
        final_sparsity_x: last.sparsity_x,
        final_sparsity_y: last.sparsity_y,
        final_rank_x: last.rank_x,
        final_rank_y: last.rank_y,
        best_round: best.round,
        best_gap: best.duality_gap,
        oracle_calls: last.oracle_calls(),
    })
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method        {}", self.method)?;
        writeln!(f, "final round   {}", self.final_round)?;
        writeln!(f, "final gap     {:e}", self.final_gap)?;
        writeln!(
            f,
            "sparsity x/y  {:.4} / {:.4}",
            self.final_sparsity_x, self.final_sparsity_y
        )?;
        writeln!(f, "rank x/y      {} / {}", self.final_rank_x, self.final_rank_y)?;
        writeln!(f, "best round    {} (gap {:e})", self.best_round, self.best_gap)?;
        write!(f, "oracle calls  {}", self.oracle_calls)
    }
}
