//! Multi-threaded drivers. Work is split into independent pieces and the
//! results are reassembled in a fixed order, so the output matches the
//! sequential functions of the core crate exactly.

use bell_asym_core::adversary::{block_count, combine_blocks, simulate_block, BlockTally};
use bell_asym_core::asymmetry::{assemble_curve, budget_grid};
use bell_asym_core::{
    solve_adversarial_bound, CurvePoint, Error, EveStrategy, GameTable, KnowledgeBudget,
    SimulationReport, SolverOptions, SweepConfig,
};
use rayon::prelude::*;

/// Parallel counterpart of [`bell_asym_core::simulate`].
pub fn simulate_parallel(
    g: &GameTable,
    e: &EveStrategy,
    shots: u64,
    seed: u64,
) -> Result<SimulationReport, Error> {
    if shots == 0 {
        return Err(Error::Parameter("at least one shot is required".into()));
    }
    e.validate(g)?;
    let tallies: Vec<BlockTally> = (0..block_count(shots))
        .into_par_iter()
        .map(|b| simulate_block(g, e, shots, seed, b))
        .collect();
    Ok(combine_blocks(&tallies))
}

/// Parallel counterpart of [`bell_asym_core::sweep_curve`]. Fails as a whole
/// if any gridpoint fails.
pub fn sweep_parallel(g: &GameTable, cfg: &SweepConfig) -> Result<Vec<CurvePoint>, Error> {
    let opts = SolverOptions::with_heights(cfg.heights);
    let values = budget_grid(cfg)?
        .into_par_iter()
        .map(|(a, b)| {
            let budget = KnowledgeBudget::for_game(g, a, b)?;
            Ok(solve_adversarial_bound(g, &budget, &opts)?.value)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    assemble_curve(cfg, &values)
}
