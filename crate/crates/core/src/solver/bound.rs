use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::alphabet::{build_expanded_alphabet, ExpandedAlphabet};
use crate::adversary::{evaluate_eve_value, EveStrategy, KnowledgeBudget};
use crate::game::GameTable;
use crate::lp::{lp_solve, ColumnSource, Constraint, LpOptions};
use crate::{Error, Party, StochasticMatrix, CONSISTENCY_TOL};

/// Default number of heights per peak set.
pub const DEFAULT_HEIGHTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub heights: usize,
    pub lp: LpOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            heights: DEFAULT_HEIGHTS,
            lp: LpOptions::default(),
        }
    }
}

impl SolverOptions {
    pub fn with_heights(heights: usize) -> Self {
        SolverOptions {
            heights,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub pivots: usize,
    pub phase_one_pivots: usize,
    pub lp_rows: usize,
    pub lp_columns: usize,
    pub atoms_a: usize,
    pub atoms_b: usize,
    /// Nonzero joint weights in the witness.
    pub support_size: usize,
    pub feasibility_residual: f64,
    /// Conditional min-entropy above its floor, per party.
    pub budget_slack_a: f64,
    pub budget_slack_b: f64,
    pub budget_tight_a: bool,
    pub budget_tight_b: bool,
    /// The game has non-uniform marginals, for which the bound is not
    /// validated.
    pub unvalidated_marginals: bool,
    /// Search iterations (oracle only).
    pub iterations: usize,
    /// The search stopped at the iteration cap while still improving (oracle only).
    pub stagnated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub witness: EveStrategy,
    pub budget: KnowledgeBudget,
    pub diagnostics: Diagnostics,
}

/// Columns are atom pairs `(i, j)`, indexed `i * |B| + j`. Rows: one per
/// setting pair `(x, y)` (joint setting probability), then Alice's and Bob's
/// conditional min-entropy.
struct PairColumns<'a> {
    g: &'a GameTable,
    alice: &'a ExpandedAlphabet,
    bob: &'a ExpandedAlphabet,
}

impl PairColumns<'_> {
    fn settings_rows(&self) -> usize {
        self.g.n_settings_a() * self.g.n_settings_b()
    }
}

impl ColumnSource for PairColumns<'_> {
    fn num_rows(&self) -> usize {
        self.settings_rows() + 2
    }

    fn num_columns(&self) -> usize {
        self.alice.len() * self.bob.len()
    }

    fn column(&self, j: usize, coeffs: &mut [f64]) -> f64 {
        let g = self.g;
        let (ia, ib) = (j / self.bob.len(), j % self.bob.len());
        let (ra, fa) = self.alice.split(ia);
        let (rb, fb) = self.bob.split(ib);
        let (f, h) = (self.alice.response(fa), self.bob.response(fb));
        let (pa, pb) = (self.alice.row(ra), self.bob.row(rb));
        let n_b = g.n_settings_b();
        let mut cost = 0.0;
        for x in 0..g.n_settings_a() {
            for y in 0..n_b {
                let w = pa[x] * pb[y];
                coeffs[x * n_b + y] = w;
                cost += w * g.coeff(x, f.output(x), y, h.output(y));
            }
        }
        let k = self.settings_rows();
        coeffs[k] = self.alice.row_entropy(ra);
        coeffs[k + 1] = self.bob.row_entropy(rb);
        cost
    }

    /// For a fixed Alice atom and Bob setting row the reduced cost separates
    /// over `y`, so Bob's best response is chosen per setting.
    fn price(&self, duals: &[f64], objective_weight: f64) -> Option<(usize, f64)> {
        let g = self.g;
        let (n_a, n_b, m_b) = (g.n_settings_a(), g.n_settings_b(), g.n_outcomes_b());
        let k = self.settings_rows();
        let (pi_a, pi_b) = (duals[k], duals[k + 1]);
        let mut z = vec![0.0; n_b * m_b];
        let mut zmax = vec![0.0; n_b];
        let mut zarg = vec![0usize; n_b];
        let mut best: Option<(usize, f64)> = None;
        for ia in 0..self.alice.len() {
            let (ra, fa) = self.alice.split(ia);
            let f = self.alice.response(fa);
            let pa = self.alice.row(ra);
            z.iter_mut().for_each(|v| *v = 0.0);
            for x in 0..n_a {
                if pa[x] == 0.0 {
                    continue;
                }
                let a = f.output(x);
                for y in 0..n_b {
                    let dual = duals[x * n_b + y];
                    for b in 0..m_b {
                        z[y * m_b + b] += pa[x] * (objective_weight * g.coeff(x, a, y, b) - dual);
                    }
                }
            }
            for y in 0..n_b {
                let row = &z[y * m_b..(y + 1) * m_b];
                let mut arg = 0;
                for b in 1..m_b {
                    if row[b] > row[arg] {
                        arg = b;
                    }
                }
                zarg[y] = arg;
                zmax[y] = row[arg];
            }
            let base = -pi_a * self.alice.row_entropy(ra);
            for rb in 0..self.bob.n_rows() {
                let pb = self.bob.row(rb);
                let mut d = base - pi_b * self.bob.row_entropy(rb);
                for y in 0..n_b {
                    d += pb[y] * zmax[y];
                }
                if best.is_none_or(|(_, v)| d > v) {
                    let code = (0..n_b).fold(0usize, |acc, y| {
                        acc * m_b + if pb[y] > 0.0 { zarg[y] } else { 0 }
                    });
                    let ib = rb * self.bob.n_responses() + code;
                    best = Some((ia * self.bob.len() + ib, d));
                }
            }
        }
        best
    }
}

/// Largest game value over adversary strategies whose relative knowledge of
/// each party's setting is at most the budget, with the referee's setting
/// statistics left unchanged.
pub fn solve_adversarial_bound(
    g: &GameTable,
    budget: &KnowledgeBudget,
    opts: &SolverOptions,
) -> Result<BoundResult, Error> {
    for (party, xi) in [(Party::A, budget.xi_x), (Party::B, budget.xi_y)] {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::BudgetRange { party, value: xi });
        }
    }
    let alice = build_expanded_alphabet(g, Party::A, opts.heights)?;
    let bob = build_expanded_alphabet(g, Party::B, opts.heights)?;
    let src = PairColumns {
        g,
        alice: &alice,
        bob: &bob,
    };

    let mut rows = Vec::with_capacity(src.num_rows());
    for x in 0..g.n_settings_a() {
        for y in 0..g.n_settings_b() {
            rows.push(Constraint::eq(g.setting_weight(x, y)));
        }
    }
    let floor_a = budget.min_conditional_entropy(Party::A);
    let floor_b = budget.min_conditional_entropy(Party::B);
    rows.push(Constraint::ge(floor_a));
    rows.push(Constraint::ge(floor_b));

    let sol = lp_solve(&rows, &src, opts.lp)?;
    let witness = assemble_witness(g, &alice, &bob, &sol.solution)?;
    let value = evaluate_eve_value(g, &witness)?;
    if (value - sol.optimum).abs() > CONSISTENCY_TOL {
        return Err(Error::Internal(format!(
            "witness value {value} differs from LP optimum {}",
            sol.optimum
        )));
    }
    for party in [Party::A, Party::B] {
        if budget.entropy(party) > 0.0 {
            let xi = witness.relative_knowledge(g, party)?;
            if xi > budget.xi(party) + CONSISTENCY_TOL {
                return Err(Error::Internal(format!(
                    "witness knowledge {xi} of party {party} exceeds budget {}",
                    budget.xi(party)
                )));
            }
        }
    }
    let k = src.settings_rows();
    let slack_a = sol.row_activity[k] - floor_a;
    let slack_b = sol.row_activity[k + 1] - floor_b;
    let diagnostics = Diagnostics {
        pivots: sol.pivots,
        phase_one_pivots: sol.phase_one_pivots,
        lp_rows: rows.len(),
        lp_columns: src.num_columns(),
        atoms_a: alice.len(),
        atoms_b: bob.len(),
        support_size: witness.support_size(),
        feasibility_residual: sol.residual,
        budget_slack_a: slack_a,
        budget_slack_b: slack_b,
        budget_tight_a: slack_a <= CONSISTENCY_TOL,
        budget_tight_b: slack_b <= CONSISTENCY_TOL,
        unvalidated_marginals: !g.has_uniform_marginals(),
        iterations: 1,
        stagnated: false,
    };
    Ok(BoundResult {
        value,
        witness,
        budget: *budget,
        diagnostics,
    })
}

fn assemble_witness(
    g: &GameTable,
    alice: &ExpandedAlphabet,
    bob: &ExpandedAlphabet,
    solution: &[(usize, f64)],
) -> Result<EveStrategy, Error> {
    let mut ia: Vec<usize> = solution.iter().map(|&(j, _)| j / bob.len()).collect();
    let mut ib: Vec<usize> = solution.iter().map(|&(j, _)| j % bob.len()).collect();
    ia.sort_unstable();
    ia.dedup();
    ib.sort_unstable();
    ib.dedup();
    let total: f64 = solution.iter().map(|s| s.1).sum();
    let mut weights = vec![0.0; ia.len() * ib.len()];
    for &(j, w) in solution {
        let r = ia.binary_search(&(j / bob.len())).expect("collected above");
        let c = ib.binary_search(&(j % bob.len())).expect("collected above");
        weights[r * ib.len() + c] += w / total;
    }
    let side = |alpha: &ExpandedAlphabet, atoms: &[usize], m: usize| -> Result<_, Error> {
        let rows: Vec<Vec<f64>> = atoms
            .iter()
            .map(|&i| alpha.row(alpha.split(i).0).to_vec())
            .collect();
        let responses = atoms
            .iter()
            .map(|&i| {
                StochasticMatrix::deterministic(m, alpha.response(alpha.split(i).1).outputs())
            })
            .collect();
        Ok((StochasticMatrix::from_rows(&rows)?, responses))
    };
    let (sa, resp_a) = side(alice, &ia, g.n_outcomes_a())?;
    let (sb, resp_b) = side(bob, &ib, g.n_outcomes_b())?;
    EveStrategy::new(weights, sa, sb, resp_a, resp_b)
}
