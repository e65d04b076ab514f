//! Adversary-prepared local strategies.
//!
//! Eve holds hidden values `(l1, l2)` drawn from a joint distribution. Each
//! `l1` fixes a distribution of Alice's setting and a local response table,
//! and likewise `l2` for Bob. The settings the referee actually produces must
//! look untouched: their joint distribution is the product of the game's
//! marginals.

mod entropy;
mod simulate;

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

pub use entropy::{
    conditional_min_entropy, min_entropy, relative_knowledge, ConditionalSettings, KnowledgeBudget,
};
pub(crate) use entropy::{max_abs_diff, min_entropy_unchecked};
pub use simulate::{
    block_count, combine_blocks, simulate, simulate_block, BlockTally, SimulationReport,
    SIMULATION_BLOCK,
};

use crate::game::GameTable;
use crate::lhv::{BellBox, DeterministicStrategy};
use crate::stochastic::validate_distribution;
use crate::{Error, Party, StochasticMatrix, CONSISTENCY_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct EveStrategy {
    alphabet: (usize, usize),
    // [l1][l2]
    joint_weights: Vec<f64>,
    settings_a: StochasticMatrix,
    settings_b: StochasticMatrix,
    // one (N x M) table per hidden value
    response_a: Vec<StochasticMatrix>,
    response_b: Vec<StochasticMatrix>,
}

impl EveStrategy {
    /// Checks internal consistency only; [`EveStrategy::validate`] checks it
    /// against a game.
    pub fn new(
        joint_weights: Vec<f64>,
        settings_a: StochasticMatrix,
        settings_b: StochasticMatrix,
        response_a: Vec<StochasticMatrix>,
        response_b: Vec<StochasticMatrix>,
    ) -> Result<Self, Error> {
        let alphabet = (settings_a.rows(), settings_b.rows());
        if joint_weights.len() != alphabet.0 * alphabet.1 {
            return Err(Error::Shape(format!(
                "{} joint weights for alphabets {}x{}",
                joint_weights.len(),
                alphabet.0,
                alphabet.1
            )));
        }
        if response_a.len() != alphabet.0 || response_b.len() != alphabet.1 {
            return Err(Error::Shape(
                "one response table per hidden value required".to_string(),
            ));
        }
        let (n_a, n_b) = (settings_a.cols(), settings_b.cols());
        let m_a = response_a.first().map_or(0, StochasticMatrix::cols);
        let m_b = response_b.first().map_or(0, StochasticMatrix::cols);
        if response_a
            .iter()
            .any(|r| r.rows() != n_a || r.cols() != m_a)
            || response_b
                .iter()
                .any(|r| r.rows() != n_b || r.cols() != m_b)
        {
            return Err(Error::Shape(
                "response tables disagree on settings/outcomes".to_string(),
            ));
        }
        validate_distribution(&joint_weights, "joint hidden-variable weights")?;
        Ok(EveStrategy {
            alphabet,
            joint_weights,
            settings_a,
            settings_b,
            response_a,
            response_b,
        })
    }

    /// Singleton alphabets: settings follow the game marginals and the
    /// responses are those of `s`.
    pub fn from_deterministic(g: &GameTable, s: &DeterministicStrategy) -> Result<Self, Error> {
        s.check_shape(g)?;
        EveStrategy::new(
            vec![1.0],
            StochasticMatrix::from_rows(&[g.marginal_a().to_vec()])?,
            StochasticMatrix::from_rows(&[g.marginal_b().to_vec()])?,
            vec![StochasticMatrix::deterministic(
                g.n_outcomes_a(),
                s.alice.outputs(),
            )],
            vec![StochasticMatrix::deterministic(
                g.n_outcomes_b(),
                s.bob.outputs(),
            )],
        )
    }

    pub fn alphabet_sizes(&self) -> (usize, usize) {
        self.alphabet
    }

    #[inline]
    pub fn weight(&self, l1: usize, l2: usize) -> f64 {
        self.joint_weights[l1 * self.alphabet.1 + l2]
    }

    pub fn joint_weights(&self) -> &[f64] {
        &self.joint_weights
    }

    pub fn settings(&self, party: Party) -> &StochasticMatrix {
        match party {
            Party::A => &self.settings_a,
            Party::B => &self.settings_b,
        }
    }

    pub fn responses(&self, party: Party) -> &[StochasticMatrix] {
        match party {
            Party::A => &self.response_a,
            Party::B => &self.response_b,
        }
    }

    /// Marginal weight of each hidden value of `party`.
    pub fn party_weights(&self, party: Party) -> Vec<f64> {
        let (la, lb) = self.alphabet;
        match party {
            Party::A => (0..la)
                .map(|i| (0..lb).map(|j| self.weight(i, j)).sum())
                .collect(),
            Party::B => (0..lb)
                .map(|j| (0..la).map(|i| self.weight(i, j)).sum())
                .collect(),
        }
    }

    /// Number of nonzero joint weights.
    pub fn support_size(&self) -> usize {
        self.joint_weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn conditional_settings(&self, party: Party) -> ConditionalSettings {
        ConditionalSettings::new(self.settings(party).clone(), self.party_weights(party))
            .expect("weights validated at construction")
    }

    /// Relative knowledge of `party`'s setting against the game marginal.
    pub fn relative_knowledge(&self, g: &GameTable, party: Party) -> Result<f64, Error> {
        relative_knowledge(&self.conditional_settings(party), g.marginal(party))
    }

    /// Joint setting distribution `q(x, y)` produced by the strategy.
    pub fn joint_settings(&self) -> Vec<f64> {
        let (n_a, n_b) = (self.settings_a.cols(), self.settings_b.cols());
        let mut q = vec![0.0; n_a * n_b];
        for l1 in 0..self.alphabet.0 {
            let pa = self.settings_a.row(l1);
            for l2 in 0..self.alphabet.1 {
                let w = self.weight(l1, l2);
                if w == 0.0 {
                    continue;
                }
                let pb = self.settings_b.row(l2);
                for x in 0..n_a {
                    for y in 0..n_b {
                        q[x * n_b + y] += w * pa[x] * pb[y];
                    }
                }
            }
        }
        q
    }

    fn check_shape(&self, g: &GameTable) -> Result<(), Error> {
        let dims = |party: Party| {
            (
                self.settings(party).cols(),
                self.responses(party)
                    .first()
                    .map_or(g.n_outcomes(party), StochasticMatrix::cols),
            )
        };
        for party in [Party::A, Party::B] {
            if dims(party) != (g.n_settings(party), g.n_outcomes(party)) {
                return Err(Error::Shape(format!(
                    "strategy for party {party} has (settings, outcomes) {:?}, game has ({}, {})",
                    dims(party),
                    g.n_settings(party),
                    g.n_outcomes(party)
                )));
            }
        }
        Ok(())
    }

    /// Shapes match `g`, each party's setting statistics reproduce its
    /// marginal, and the joint setting distribution is the product of the
    /// marginals (all within 1e-9).
    pub fn validate(&self, g: &GameTable) -> Result<(), Error> {
        self.check_shape(g)?;
        for party in [Party::A, Party::B] {
            let deviation = max_abs_diff(
                &self.conditional_settings(party).mixture(),
                g.marginal(party),
            );
            if deviation > CONSISTENCY_TOL {
                return Err(Error::MarginalMismatch { party, deviation });
            }
        }
        let q = self.joint_settings();
        let n_b = g.n_settings_b();
        let deviation = q
            .iter()
            .enumerate()
            .map(|(i, v)| (v - g.setting_weight(i / n_b, i % n_b)).abs())
            .fold(0.0, f64::max);
        if deviation > CONSISTENCY_TOL {
            return Err(Error::CorrelatedSettings { deviation });
        }
        Ok(())
    }

    /// The same strategy seen with Alice and Bob exchanged; pairs with
    /// [`crate::transpose_game`].
    pub fn swap_parties(&self) -> EveStrategy {
        let (la, lb) = self.alphabet;
        let mut w = vec![0.0; la * lb];
        for i in 0..la {
            for j in 0..lb {
                w[j * la + i] = self.weight(i, j);
            }
        }
        EveStrategy {
            alphabet: (lb, la),
            joint_weights: w,
            settings_a: self.settings_b.clone(),
            settings_b: self.settings_a.clone(),
            response_a: self.response_b.clone(),
            response_b: self.response_a.clone(),
        }
    }

    /// Convex mixture: with probability `t` Eve plays `self`, otherwise
    /// `other`. The hidden alphabets are concatenated, so the value of the
    /// mixture is the weighted mean of the two values.
    pub fn mix(&self, other: &EveStrategy, t: f64) -> Result<EveStrategy, Error> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter(format!(
                "mixing weight {t} outside [0, 1]"
            )));
        }
        let (la, lb) = self.alphabet;
        let (oa, ob) = other.alphabet;
        let cols = lb + ob;
        let mut w = vec![0.0; (la + oa) * cols];
        for i in 0..la {
            for j in 0..lb {
                w[i * cols + j] = t * self.weight(i, j);
            }
        }
        for i in 0..oa {
            for j in 0..ob {
                w[(la + i) * cols + lb + j] = (1.0 - t) * other.weight(i, j);
            }
        }
        let stack = |p: &StochasticMatrix, q: &StochasticMatrix| {
            let rows: Vec<Vec<f64>> = p
                .iter_rows()
                .chain(q.iter_rows())
                .map(<[f64]>::to_vec)
                .collect();
            StochasticMatrix::from_rows(&rows)
        };
        EveStrategy::new(
            w,
            stack(&self.settings_a, &other.settings_a)?,
            stack(&self.settings_b, &other.settings_b)?,
            self.response_a
                .iter()
                .chain(&other.response_a)
                .cloned()
                .collect(),
            self.response_b
                .iter()
                .chain(&other.response_b)
                .cloned()
                .collect(),
        )
    }
}

/// Alice-side partial sums `T[y][b] = sum_x p(x|l1) sum_a p(a|x,l1) c[x][a][y][b]`.
fn alice_partials(g: &GameTable, e: &EveStrategy, l1: usize) -> Vec<f64> {
    let (n_a, m_a, n_b, m_b) = (
        g.n_settings_a(),
        g.n_outcomes_a(),
        g.n_settings_b(),
        g.n_outcomes_b(),
    );
    let px = e.settings_a.row(l1);
    let resp = &e.response_a[l1];
    let mut t = vec![0.0; n_b * m_b];
    for x in 0..n_a {
        if px[x] == 0.0 {
            continue;
        }
        for a in 0..m_a {
            let pa = px[x] * resp.get(x, a);
            if pa == 0.0 {
                continue;
            }
            for y in 0..n_b {
                for b in 0..m_b {
                    t[y * m_b + b] += pa * g.coeff(x, a, y, b);
                }
            }
        }
    }
    t
}

/// Average game value over Eve's hidden values, each pair `(l1, l2)` playing
/// the product box of its responses on its own setting distribution.
pub fn evaluate_eve_value(g: &GameTable, e: &EveStrategy) -> Result<f64, Error> {
    e.validate(g)?;
    Ok(eve_value_unchecked(g, e))
}

pub(crate) fn eve_value_unchecked(g: &GameTable, e: &EveStrategy) -> f64 {
    let (n_b, m_b) = (g.n_settings_b(), g.n_outcomes_b());
    let (la, lb) = e.alphabet;
    let mut total = 0.0;
    for l1 in 0..la {
        if (0..lb).all(|l2| e.weight(l1, l2) == 0.0) {
            continue;
        }
        let t = alice_partials(g, e, l1);
        for l2 in 0..lb {
            let w = e.weight(l1, l2);
            if w == 0.0 {
                continue;
            }
            let py = e.settings_b.row(l2);
            let resp = &e.response_b[l2];
            let mut v = 0.0;
            for y in 0..n_b {
                for b in 0..m_b {
                    v += py[y] * resp.get(y, b) * t[y * m_b + b];
                }
            }
            total += w * v;
        }
    }
    total
}

/// The box an experimenter reconstructs from the strategy's statistics,
/// `p(ab|xy) = P(a, b, x, y) / (p(x) p(y))`. It can signal even though every
/// hidden-value box is local.
pub fn effective_box(g: &GameTable, e: &EveStrategy) -> Result<BellBox, Error> {
    for party in [Party::A, Party::B] {
        if let Some(setting) = g.marginal(party).iter().position(|&p| p <= 0.0) {
            return Err(Error::ZeroMarginal { party, setting });
        }
    }
    e.validate(g)?;
    let (n_a, m_a, n_b, m_b) = (
        g.n_settings_a(),
        g.n_outcomes_a(),
        g.n_settings_b(),
        g.n_outcomes_b(),
    );
    // joint[x][y][a][b]
    let mut joint = vec![0.0; n_a * n_b * m_a * m_b];
    let (la, lb) = e.alphabet;
    for l1 in 0..la {
        let (px, ra) = (e.settings_a.row(l1), &e.response_a[l1]);
        for l2 in 0..lb {
            let w = e.weight(l1, l2);
            if w == 0.0 {
                continue;
            }
            let (py, rb) = (e.settings_b.row(l2), &e.response_b[l2]);
            for x in 0..n_a {
                for y in 0..n_b {
                    let wxy = w * px[x] * py[y];
                    if wxy == 0.0 {
                        continue;
                    }
                    for a in 0..m_a {
                        for b in 0..m_b {
                            joint[((x * n_b + y) * m_a + a) * m_b + b] +=
                                wxy * ra.get(x, a) * rb.get(y, b);
                        }
                    }
                }
            }
        }
    }
    Ok(BellBox::from_fn((n_a, n_b), (m_a, m_b), |a, b, x, y| {
        joint[((x * n_b + y) * m_a + a) * m_b + b] / g.setting_weight(x, y)
    }))
}
