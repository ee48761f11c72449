use super::config::SimConfig;
use super::run::{run_experiment, RunRecord};
use crate::error::{Error, Result};
use crate::optimizers::Method;

/// Server step sizes searched by default.
pub const DEFAULT_ETA_S_GRID: [f64; 5] = [1.0, 3e-1, 1e-1, 3e-2, 1e-2];
/// Client step sizes searched for the ℓ1 experiment.
pub const DEFAULT_ETA_C_GRID: [f64; 7] = [1.0, 3e-1, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
/// Client step sizes searched for the nuclear experiment.
pub const DEFAULT_ETA_C_GRID_NUCLEAR: [f64; 9] = [10.0, 3.0, 1.0, 3e-1, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

/// One grid cell and how its run ended.
#[derive(Debug, Clone)]
pub struct GridCell {
    pub eta_s: f64,
    pub eta_c: f64,
    pub outcome: Result<Vec<RunRecord>>,
}

impl GridCell {
    pub fn final_gap(&self) -> Option<f64> {
        self.outcome.as_ref().ok()?.last().map(|r| r.duality_gap)
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub best: SimConfig,
    pub best_index: usize,
    pub cells: Vec<GridCell>,
}

/// Picks the cell with the smallest final gap; ties go to the larger `η^c`,
/// then the larger `η^s`. Cells without a gap are skipped.
pub fn select_best(cells: &[GridCell]) -> Option<usize> {
    let key = |c: &GridCell| c.final_gap().map(|g| (g, c.eta_c, c.eta_s));
    let mut best: Option<(usize, (f64, f64, f64))> = None;
    for (i, c) in cells.iter().enumerate() {
        let Some(k) = key(c) else { continue };
        let better = match best {
            None => true,
            Some((_, b)) => k.0 < b.0 || (k.0 == b.0 && (k.1 > b.1 || (k.1 == b.1 && k.2 > b.2))),
        };
        if better {
            best = Some((i, k));
        }
    }
    best.map(|(i, _)| i)
}

/// Runs `run` on every `(η^s, η^c)` combination. Diverged cells are kept in
/// the result but never selected; any other error aborts the search.
pub fn grid_search_with(
    base: &SimConfig,
    eta_s_grid: &[f64],
    eta_c_grid: &[f64],
    mut run: impl FnMut(&SimConfig) -> Result<Vec<RunRecord>>,
) -> Result<GridResult> {
    if eta_s_grid.is_empty() || eta_c_grid.is_empty() {
        return Err(Error::invalid("grid_search", "grids must be non-empty"));
    }
    let mut cells = Vec::with_capacity(eta_s_grid.len() * eta_c_grid.len());
    for &eta_s in eta_s_grid {
        for &eta_c in eta_c_grid {
            let cfg = SimConfig {
                eta_s,
                eta_c,
                ..base.clone()
            };
            let outcome = run(&cfg);
            if let Err(e) = &outcome {
                if !matches!(e, Error::Diverged { .. }) {
                    return Err(e.clone());
                }
            }
            cells.push(GridCell { eta_s, eta_c, outcome });
        }
    }
    let best_index = select_best(&cells).ok_or(Error::NoViableConfig { runs: cells.len() })?;
    let best = SimConfig {
        eta_s: cells[best_index].eta_s,
        eta_c: cells[best_index].eta_c,
        ..base.clone()
    };
    Ok(GridResult {
        best,
        best_index,
        cells,
    })
}

pub fn grid_search(base: &SimConfig, eta_s_grid: &[f64], eta_c_grid: &[f64]) -> Result<GridResult> {
    grid_search_with(base, eta_s_grid, eta_c_grid, run_experiment)
}

/// Pointwise statistics over seeds at one evaluation round.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRecord {
    pub method: Method,
    pub round: usize,
    pub cumulative_local_steps: u64,
    pub seeds: usize,
    pub gap_mean: f64,
    pub gap_std: f64,
    pub sparsity_x_mean: f64,
    pub sparsity_x_std: f64,
    pub sparsity_y_mean: f64,
    pub sparsity_y_std: f64,
    pub rank_x_mean: f64,
    pub rank_x_std: f64,
    pub rank_y_mean: f64,
    pub rank_y_std: f64,
}

#[derive(Debug, Clone)]
pub struct SeedSummary {
    pub aggregate: Vec<AggregateRecord>,
    /// Per-seed series of the runs that completed.
    pub runs: Vec<Vec<RunRecord>>,
    /// Seeds whose run diverged.
    pub diverged: Vec<u64>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    // offsets from the first value keep identical inputs exact
    let first = values.first().copied().unwrap_or(f64::NAN);
    let mean = first + values.iter().map(|v| v - first).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregates equally long per-seed series round by round.
pub fn aggregate(runs: &[Vec<RunRecord>]) -> Result<Vec<AggregateRecord>> {
    let Some(first) = runs.first() else {
        return Ok(Vec::new());
    };
    if runs.iter().any(|r| r.len() != first.len()) {
        return Err(Error::invalid("aggregate", "series lengths differ"));
    }
    let mut out = Vec::with_capacity(first.len());
    for (i, head) in first.iter().enumerate() {
        let column = |f: &dyn Fn(&RunRecord) -> f64| -> Vec<f64> { runs.iter().map(|r| f(&r[i])).collect() };
        let (gap_mean, gap_std) = mean_std(&column(&|r| r.duality_gap));
        let (sparsity_x_mean, sparsity_x_std) = mean_std(&column(&|r| r.sparsity_x));
        let (sparsity_y_mean, sparsity_y_std) = mean_std(&column(&|r| r.sparsity_y));
        let (rank_x_mean, rank_x_std) = mean_std(&column(&|r| r.rank_x as f64));
        let (rank_y_mean, rank_y_std) = mean_std(&column(&|r| r.rank_y as f64));
        out.push(AggregateRecord {
            method: head.method,
            round: head.round,
            cumulative_local_steps: head.cumulative_local_steps,
            seeds: runs.len(),
            gap_mean,
            gap_std,
            sparsity_x_mean,
            sparsity_x_std,
            sparsity_y_mean,
            sparsity_y_std,
            rank_x_mean,
            rank_x_std,
            rank_y_mean,
            rank_y_std,
        });
    }
    Ok(out)
}

/// Runs `cfg` with seeds `seed, seed+1, …, seed+n−1` and aggregates the
/// completed runs. Diverged seeds are listed, not aggregated.
pub fn repeat_seeds_with(
    cfg: &SimConfig,
    n_seeds: usize,
    mut run: impl FnMut(&SimConfig) -> Result<Vec<RunRecord>>,
) -> Result<SeedSummary> {
    if n_seeds == 0 {
        return Err(Error::invalid("repeat_seeds", "n_seeds must be >= 1"));
    }
    let mut runs = Vec::new();
    let mut diverged = Vec::new();
    for i in 0..n_seeds as u64 {
        let seed = cfg.seed.wrapping_add(i);
        match run(&SimConfig { seed, ..cfg.clone() }) {
            Ok(r) => runs.push(r),
            Err(Error::Diverged { .. }) => diverged.push(seed),
            Err(e) => return Err(e),
        }
    }
    if runs.is_empty() {
        return Err(Error::NoViableConfig { runs: n_seeds });
    }
    Ok(SeedSummary {
        aggregate: aggregate(&runs)?,
        runs,
        diverged,
    })
}

pub fn repeat_seeds(cfg: &SimConfig, n_seeds: usize) -> Result<SeedSummary> {
    repeat_seeds_with(cfg, n_seeds, run_experiment)
}
