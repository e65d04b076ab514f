//! Monte Carlo play of an adversary strategy against the referee.
//!
//! Shot `k` draws its randomness from a ChaCha8 stream keyed by the seed,
//! starting at word position `16 k` (one 64-byte block per shot). Shots are
//! tallied in fixed blocks of [`SIMULATION_BLOCK`] and blocks are combined in
//! index order, so any sharding of blocks across workers reproduces the
//! sequential report bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EveStrategy;
use crate::game::GameTable;
use crate::Error;

/// Shots per tally block.
pub const SIMULATION_BLOCK: u64 = 1 << 16;

const WORDS_PER_SHOT: u128 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub shots: u64,
    pub empirical_value: f64,
    /// Sample standard deviation of the pay-off over `sqrt(shots)`.
    pub stderr_value: f64,
    pub setting_freqs_a: Vec<f64>,
    pub setting_freqs_b: Vec<f64>,
}

/// Sums collected over one block of shots.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTally {
    pub shots: u64,
    pub sum: f64,
    pub sum_sq: f64,
    pub counts_a: Vec<u64>,
    pub counts_b: Vec<u64>,
}

struct Sampler<'a> {
    g: &'a GameTable,
    e: &'a EveStrategy,
    joint_cdf: Vec<f64>,
}

fn pick(cdf_source: impl Iterator<Item = f64>, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in cdf_source.enumerate() {
        if p > 0.0 {
            last = i;
        }
        acc += p;
        if u < acc && p > 0.0 {
            return i;
        }
    }
    last
}

impl<'a> Sampler<'a> {
    fn new(g: &'a GameTable, e: &'a EveStrategy) -> Self {
        let mut acc = 0.0;
        let joint_cdf = e
            .joint_weights()
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Sampler { g, e, joint_cdf }
    }

    fn shot(&self, rng: &mut ChaCha8Rng) -> (usize, usize, f64) {
        let lb = self.e.alphabet_sizes().1;
        let u: f64 = rng.random();
        let pair = self
            .joint_cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or_else(|| {
                self.e
                    .joint_weights()
                    .iter()
                    .rposition(|&w| w > 0.0)
                    .unwrap_or(0)
            });
        let (l1, l2) = (pair / lb, pair % lb);
        let x = pick(self.e.settings_a.row(l1).iter().copied(), rng.random());
        let y = pick(self.e.settings_b.row(l2).iter().copied(), rng.random());
        let a = pick(self.e.response_a[l1].row(x).iter().copied(), rng.random());
        let b = pick(self.e.response_b[l2].row(y).iter().copied(), rng.random());
        (x, y, self.g.coeff(x, a, y, b))
    }
}

/// Tallies block `block` (shots `block * SIMULATION_BLOCK ..`) of a run of
/// `shots` total shots.
pub fn simulate_block(
    g: &GameTable,
    e: &EveStrategy,
    shots: u64,
    seed: u64,
    block: u64,
) -> BlockTally {
    let sampler = Sampler::new(g, e);
    let start = block * SIMULATION_BLOCK;
    let end = (start + SIMULATION_BLOCK).min(shots);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = BlockTally {
        shots: end.saturating_sub(start),
        sum: 0.0,
        sum_sq: 0.0,
        counts_a: vec![0; g.n_settings_a()],
        counts_b: vec![0; g.n_settings_b()],
    };
    for k in start..end {
        rng.set_word_pos(k as u128 * WORDS_PER_SHOT);
        let (x, y, v) = sampler.shot(&mut rng);
        tally.sum += v;
        tally.sum_sq += v * v;
        tally.counts_a[x] += 1;
        tally.counts_b[y] += 1;
    }
    tally
}

pub fn block_count(shots: u64) -> u64 {
    shots.div_ceil(SIMULATION_BLOCK)
}

/// Combines block tallies, which must be given in block order.
pub fn combine_blocks(tallies: &[BlockTally]) -> SimulationReport {
    let shots: u64 = tallies.iter().map(|t| t.shots).sum();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let n_a = tallies.first().map_or(0, |t| t.counts_a.len());
    let n_b = tallies.first().map_or(0, |t| t.counts_b.len());
    let (mut ca, mut cb) = (vec![0u64; n_a], vec![0u64; n_b]);
    for t in tallies {
        sum += t.sum;
        sum_sq += t.sum_sq;
        ca.iter_mut().zip(&t.counts_a).for_each(|(c, d)| *c += d);
        cb.iter_mut().zip(&t.counts_b).for_each(|(c, d)| *c += d);
    }
    let n = shots as f64;
    let mean = sum / n;
    let stderr = if shots > 1 {
        let var = ((sum_sq - sum * mean) / (n - 1.0)).max(0.0);
        libm::sqrt(var / n)
    } else {
        0.0
    };
    SimulationReport {
        shots,
        empirical_value: mean,
        stderr_value: stderr,
        setting_freqs_a: ca.iter().map(|&c| c as f64 / n).collect(),
        setting_freqs_b: cb.iter().map(|&c| c as f64 / n).collect(),
    }
}

/// Plays `shots` independent rounds: `(l1, l2)` from the joint weights, then
/// `x ~ p(.|l1)`, `y ~ p(.|l2)`, then outcomes from the response tables.
pub fn simulate(
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
        .map(|b| simulate_block(g, e, shots, seed, b))
        .collect();
    Ok(combine_blocks(&tallies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin_game;
    use crate::lhv::{classical_bound, DEFAULT_ENUMERATION_CAP};

    #[test]
    fn single_shot_returns_a_coefficient() {
        let g = builtin_game("i3322").unwrap();
        let cb = classical_bound(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        let e = EveStrategy::from_deterministic(&g, &cb.strategy).unwrap();
        for seed in 0..20 {
            let r = simulate(&g, &e, 1, seed).unwrap();
            assert!(g.coefficients().contains(&r.empirical_value));
            assert_eq!(r.stderr_value, 0.0);
        }
        assert!(simulate(&g, &e, 0, 1).is_err());
    }

    #[test]
    fn classical_chsh_strategy_statistics() {
        let g = builtin_game("chsh").unwrap();
        let cb = classical_bound(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        let e = EveStrategy::from_deterministic(&g, &cb.strategy).unwrap();
        let shots = 200_000;
        let r = simulate(&g, &e, shots, 7).unwrap();
        assert!((r.empirical_value - 0.5).abs() < 4.0 * r.stderr_value);
        let sigma = (0.25 / shots as f64).sqrt();
        for f in r.setting_freqs_a.iter().chain(&r.setting_freqs_b) {
            assert!((f - 0.5).abs() < 4.0 * sigma, "{f}");
        }
        assert_eq!(r, simulate(&g, &e, shots, 7).unwrap());
        assert_ne!(r, simulate(&g, &e, shots, 8).unwrap());
    }

    #[test]
    fn blocks_are_independent_of_grouping() {
        let g = builtin_game("chsh").unwrap();
        let cb = classical_bound(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        let e = EveStrategy::from_deterministic(&g, &cb.strategy).unwrap();
        let shots = 3 * SIMULATION_BLOCK + 11;
        let whole = simulate(&g, &e, shots, 3).unwrap();
        let blocks: Vec<_> = (0..block_count(shots))
            .rev()
            .map(|b| simulate_block(&g, &e, shots, 3, b))
            .collect();
        let reordered: Vec<_> = blocks.into_iter().rev().collect();
        assert_eq!(combine_blocks(&reordered), whole);
        assert_eq!(whole.shots, shots);
    }
}
