//! Local search over general adversary strategies, used to cross-check the
//! LP bound from below. It shares no discretization with the LP: setting
//! rows are arbitrary points of the simplex moved by projected gradient
//! steps.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bound::{BoundResult, Diagnostics};
use crate::adversary::{evaluate_eve_value, min_entropy_unchecked, EveStrategy, KnowledgeBudget};
use crate::game::{transpose_game, GameTable};
use crate::lhv::{classical_bound, ResponseFunction, DEFAULT_ENUMERATION_CAP};
use crate::lp::{lp_solve, Constraint, DenseColumns, LpOptions, LpSolution};
use crate::{Error, Party, StochasticMatrix, CONSISTENCY_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Free atoms per party; defaults to `2 * N * M`.
    pub free_atoms: Option<usize>,
    pub max_iters: usize,
    /// Most uniform-row anchor atoms per party.
    pub anchor_cap: usize,
    pub lp: LpOptions,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            restarts: 4,
            seed: 0,
            free_atoms: None,
            max_iters: 60,
            anchor_cap: 64,
            lp: LpOptions::default(),
        }
    }
}

const IMPROVEMENT_TOL: f64 = 1e-12;
const ROW_STEPS: usize = 25;
const LN_2: f64 = core::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq)]
struct Atom {
    row: Vec<f64>,
    response: Vec<usize>,
    anchor: bool,
}

/// One party's perspective: `own` atoms against `other` atoms in a game
/// where the own party plays Alice.
struct View<'a> {
    g: &'a GameTable,
    // [own][other]
    weights: Vec<f64>,
    // [x_own][y_other]
    pair_duals: Vec<f64>,
    pi_own: f64,
    pi_other: f64,
}

fn pair_value(g: &GameTable, a: &Atom, b: &Atom) -> f64 {
    let mut v = 0.0;
    for x in 0..g.n_settings_a() {
        if a.row[x] == 0.0 {
            continue;
        }
        for y in 0..g.n_settings_b() {
            v += a.row[x] * b.row[y] * g.coeff(x, a.response[x], y, b.response[y]);
        }
    }
    v
}

fn constraints(g: &GameTable, budget: &KnowledgeBudget) -> Vec<Constraint> {
    let mut rows = Vec::new();
    for x in 0..g.n_settings_a() {
        for y in 0..g.n_settings_b() {
            rows.push(Constraint::eq(g.setting_weight(x, y)));
        }
    }
    rows.push(Constraint::ge(budget.min_conditional_entropy(Party::A)));
    rows.push(Constraint::ge(budget.min_conditional_entropy(Party::B)));
    rows
}

fn solve_weights(
    g: &GameTable,
    rows: &[Constraint],
    alice: &[Atom],
    bob: &[Atom],
    lp: LpOptions,
) -> Result<LpSolution, Error> {
    let (n_a, n_b) = (g.n_settings_a(), g.n_settings_b());
    let mut src = DenseColumns::new(rows.len());
    let eb: Vec<f64> = bob.iter().map(|b| min_entropy_unchecked(&b.row)).collect();
    for a in alice {
        let ea = min_entropy_unchecked(&a.row);
        for (b, &eb) in bob.iter().zip(&eb) {
            let mut col = Vec::with_capacity(rows.len());
            for x in 0..n_a {
                for y in 0..n_b {
                    col.push(a.row[x] * b.row[y]);
                }
            }
            col.push(ea);
            col.push(eb);
            src.push(pair_value(g, a, b), col);
        }
    }
    Ok(lp_solve(rows, &src, lp)?)
}

fn dense_weights(sol: &LpSolution, len: usize) -> Vec<f64> {
    let mut w = vec![0.0; len];
    for &(j, v) in &sol.solution {
        w[j] = v;
    }
    w
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    let mut p: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
}

/// Greedy per-setting responses of atoms carrying weight, others fixed.
fn improve_responses(view: &View, own: &mut [Atom], other: &[Atom]) {
    let g = view.g;
    let lo = other.len();
    for (i, atom) in own.iter_mut().enumerate() {
        let w = &view.weights[i * lo..(i + 1) * lo];
        if w.iter().all(|&v| v == 0.0) {
            continue;
        }
        for x in 0..g.n_settings_a() {
            let score = |a: usize| {
                other
                    .iter()
                    .zip(w)
                    .filter(|(_, &wj)| wj > 0.0)
                    .map(|(b, &wj)| {
                        wj * (0..g.n_settings_b())
                            .map(|y| b.row[y] * g.coeff(x, a, y, b.response[y]))
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            };
            let current = score(atom.response[x]);
            let (best, v) = argmax((0..g.n_outcomes_a()).map(score));
            if v > current + IMPROVEMENT_TOL {
                atom.response[x] = best;
            }
        }
    }
}

/// Reduced cost of pairing `row` (best response per setting) with `b`:
/// returns the value and the response.
fn reduced_cost(view: &View, row: &[f64], b: &Atom) -> (f64, Vec<usize>, Vec<f64>) {
    let g = view.g;
    let n_b = g.n_settings_b();
    let mut response = Vec::with_capacity(g.n_settings_a());
    let mut kmax = Vec::with_capacity(g.n_settings_a());
    let mut d = 0.0;
    for x in 0..g.n_settings_a() {
        let (a, k) = argmax((0..g.n_outcomes_a()).map(|a| {
            (0..n_b)
                .map(|y| {
                    b.row[y] * (g.coeff(x, a, y, b.response[y]) - view.pair_duals[x * n_b + y])
                })
                .sum::<f64>()
        }));
        response.push(a);
        kmax.push(k);
        d += row[x] * k;
    }
    d -= view.pi_own * min_entropy_unchecked(row) + view.pi_other * min_entropy_unchecked(&b.row);
    (d, response, kmax)
}

/// Moves unused free atoms towards rows whose column would enter the
/// weight LP. The current weights stay feasible, so the LP value cannot drop.
fn reposition_unused(view: &View, own: &mut [Atom], other: &[Atom]) {
    let lo = other.len();
    for (i, atom) in own.iter_mut().enumerate() {
        if atom.anchor || view.weights[i * lo..(i + 1) * lo].iter().any(|&v| v > 0.0) {
            continue;
        }
        let mut row = atom.row.clone();
        let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
        for step in 0..ROW_STEPS {
            let (j, (d, response, kmax)) = other
                .iter()
                .map(|b| reduced_cost(view, &row, b))
                .enumerate()
                .fold(
                    None::<(usize, (f64, Vec<usize>, Vec<f64>))>,
                    |acc, (j, r)| match acc {
                        Some((_, ref a)) if a.0 >= r.0 => acc,
                        _ => Some((j, r)),
                    },
                )
                .expect("at least one partner atom");
            let _ = j;
            if best.as_ref().is_none_or(|b| d > b.0) {
                best = Some((d, row.clone(), response));
            }
            let (peak, p) = argmax(row.iter().copied());
            let mut grad = kmax;
            grad[peak] += view.pi_own / (p * LN_2);
            let eta = 0.5 / (1 + step) as f64;
            let moved: Vec<f64> = row.iter().zip(&grad).map(|(r, g)| r + eta * g).collect();
            row = project_simplex(&moved);
        }
        let (_, row, response) = best.expect("at least one step");
        atom.row = row;
        atom.response = response;
    }
}

/// Objective-gradient direction for the rows of free atoms that carry weight.
fn used_row_directions(view: &View, own: &[Atom], other: &[Atom]) -> Vec<Option<Vec<f64>>> {
    let g = view.g;
    let (n_b, lo) = (g.n_settings_b(), other.len());
    own.iter()
        .enumerate()
        .map(|(i, atom)| {
            let w = &view.weights[i * lo..(i + 1) * lo];
            let total: f64 = w.iter().sum();
            if atom.anchor || total == 0.0 {
                return None;
            }
            let mut grad: Vec<f64> = (0..g.n_settings_a())
                .map(|x| {
                    other
                        .iter()
                        .zip(w)
                        .map(|(b, &wj)| {
                            wj * (0..n_b)
                                .map(|y| {
                                    b.row[y]
                                        * (g.coeff(x, atom.response[x], y, b.response[y])
                                            - view.pair_duals[x * n_b + y])
                                })
                                .sum::<f64>()
                        })
                        .sum()
                })
                .collect();
            let (peak, p) = argmax(atom.row.iter().copied());
            grad[peak] += total * view.pi_own / (p * LN_2);
            Some(grad)
        })
        .collect()
}

struct Search<'a> {
    g: &'a GameTable,
    gt: GameTable,
    rows: Vec<Constraint>,
    opts: &'a OracleOptions,
    pivots: usize,
}

impl Search<'_> {
    fn lp(&mut self, alice: &[Atom], bob: &[Atom]) -> Result<LpSolution, Error> {
        let sol = solve_weights(self.g, &self.rows, alice, bob, self.opts.lp)?;
        self.pivots += sol.pivots;
        Ok(sol)
    }

    fn views(&self, sol: &LpSolution, la: usize, lb: usize) -> (View<'_>, View<'_>) {
        let w = dense_weights(sol, la * lb);
        let (n_a, n_b) = (self.g.n_settings_a(), self.g.n_settings_b());
        let k = n_a * n_b;
        let mut wt = vec![0.0; la * lb];
        for i in 0..la {
            for j in 0..lb {
                wt[j * la + i] = w[i * lb + j];
            }
        }
        let mut dt = vec![0.0; k];
        for x in 0..n_a {
            for y in 0..n_b {
                dt[y * n_a + x] = sol.duals[x * n_b + y];
            }
        }
        (
            View {
                g: self.g,
                weights: w,
                pair_duals: sol.duals[..k].to_vec(),
                pi_own: sol.duals[k],
                pi_other: sol.duals[k + 1],
            },
            View {
                g: &self.gt,
                weights: wt,
                pair_duals: dt,
                pi_own: sol.duals[k + 1],
                pi_other: sol.duals[k],
            },
        )
    }
}

fn anchors(
    g: &GameTable,
    party: Party,
    cap: usize,
    classical: &ResponseFunction,
    rng: &mut ChaCha8Rng,
) -> Vec<Atom> {
    let (n, m) = (g.n_settings(party), g.n_outcomes(party));
    let count = ResponseFunction::count(n, m);
    let row = g.marginal(party).to_vec();
    let mut codes: Vec<u64> = if count <= cap as u128 {
        (0..count as u64).collect()
    } else {
        let mut c = vec![classical.code(m)];
        while c.len() < cap {
            let code = rng.random_range(0..count.min(u64::MAX as u128) as u64);
            if !c.contains(&code) {
                c.push(code);
            }
        }
        c
    };
    codes.sort_unstable();
    codes
        .into_iter()
        .map(|code| Atom {
            row: row.clone(),
            response: ResponseFunction::from_code(code, n, m).outputs().to_vec(),
            anchor: true,
        })
        .collect()
}

fn random_atoms(g: &GameTable, party: Party, count: usize, rng: &mut ChaCha8Rng) -> Vec<Atom> {
    let (n, m) = (g.n_settings(party), g.n_outcomes(party));
    (0..count)
        .map(|_| {
            let row = if rng.random_bool(0.5) {
                let mut r = vec![0.0; n];
                r[rng.random_range(0..n)] = 1.0;
                r
            } else {
                let raw: Vec<f64> = (0..n)
                    .map(|_| -libm::log(1.0 - rng.random::<f64>()))
                    .collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|v| v / total).collect()
            };
            Atom {
                row,
                response: (0..n).map(|_| rng.random_range(0..m)).collect(),
                anchor: false,
            }
        })
        .collect()
}

fn witness(
    g: &GameTable,
    alice: &[Atom],
    bob: &[Atom],
    sol: &LpSolution,
) -> Result<EveStrategy, Error> {
    let lb = bob.len();
    let mut ia: Vec<usize> = sol.solution.iter().map(|s| s.0 / lb).collect();
    let mut ib: Vec<usize> = sol.solution.iter().map(|s| s.0 % lb).collect();
    ia.sort_unstable();
    ia.dedup();
    ib.sort_unstable();
    ib.dedup();
    let total: f64 = sol.solution.iter().map(|s| s.1).sum();
    let mut w = vec![0.0; ia.len() * ib.len()];
    for &(j, v) in &sol.solution {
        let r = ia.binary_search(&(j / lb)).expect("collected");
        let c = ib.binary_search(&(j % lb)).expect("collected");
        w[r * ib.len() + c] += v / total;
    }
    let side = |atoms: &[Atom], idx: &[usize], m: usize| -> Result<_, Error> {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| atoms[i].row.clone()).collect();
        let resp = idx
            .iter()
            .map(|&i| StochasticMatrix::deterministic(m, &atoms[i].response))
            .collect();
        Ok((StochasticMatrix::from_rows(&rows)?, resp))
    };
    let (sa, ra) = side(alice, &ia, g.n_outcomes_a())?;
    let (sb, rb) = side(bob, &ib, g.n_outcomes_b())?;
    EveStrategy::new(w, sa, sb, ra, rb)
}

/// Best strategy found by alternating weight LPs, greedy responses and
/// projected-gradient moves of setting rows, over `restarts` random starts.
/// Each restart's value never decreases from one iteration to the next.
pub fn coordinate_ascent_oracle(
    g: &GameTable,
    budget: &KnowledgeBudget,
    opts: &OracleOptions,
) -> Result<BoundResult, Error> {
    if opts.restarts == 0 {
        return Err(Error::Parameter("at least one restart is required".into()));
    }
    for (party, xi) in [(Party::A, budget.xi_x), (Party::B, budget.xi_y)] {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::BudgetRange { party, value: xi });
        }
    }
    let classical = classical_bound(g, DEFAULT_ENUMERATION_CAP)?.strategy;
    let mut search = Search {
        g,
        gt: transpose_game(g),
        rows: constraints(g, budget),
        opts,
        pivots: 0,
    };
    let mut best: Option<(f64, EveStrategy, LpSolution)> = None;
    let mut iterations = 0;
    let mut stagnated = false;

    for restart in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(
            opts.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let free = |party: Party| {
            opts.free_atoms
                .unwrap_or(2 * g.n_settings(party) * g.n_outcomes(party))
        };
        let mut alice = anchors(g, Party::A, opts.anchor_cap, &classical.alice, &mut rng);
        alice.extend(random_atoms(g, Party::A, free(Party::A), &mut rng));
        let mut bob = anchors(g, Party::B, opts.anchor_cap, &classical.bob, &mut rng);
        bob.extend(random_atoms(g, Party::B, free(Party::B), &mut rng));

        let mut sol = search.lp(&alice, &bob)?;
        let mut value = sol.optimum;
        let mut stall = 0;
        let mut converged = false;
        for _ in 0..opts.max_iters {
            iterations += 1;
            let before = value;
            {
                let (va, _) = search.views(&sol, alice.len(), bob.len());
                improve_responses(&va, &mut alice, &bob);
                reposition_unused(&va, &mut alice, &bob);
            }
            sol = search.lp(&alice, &bob)?;
            {
                let (_, vb) = search.views(&sol, alice.len(), bob.len());
                improve_responses(&vb, &mut bob, &alice);
                reposition_unused(&vb, &mut bob, &alice);
            }
            sol = search.lp(&alice, &bob)?;
            if sol.optimum + CONSISTENCY_TOL < value {
                return Err(Error::Internal(format!(
                    "oracle value dropped from {value} to {}",
                    sol.optimum
                )));
            }
            value = sol.optimum;

            // Rows that carry weight: accept a move only if the LP improves.
            for party in [Party::A, Party::B] {
                let dirs = {
                    let (va, vb) = search.views(&sol, alice.len(), bob.len());
                    match party {
                        Party::A => used_row_directions(&va, &alice, &bob),
                        Party::B => used_row_directions(&vb, &bob, &alice),
                    }
                };
                for (i, dir) in dirs.into_iter().enumerate() {
                    let Some(dir) = dir else { continue };
                    for eta in [1.0, 0.25, 0.05] {
                        let atoms = match party {
                            Party::A => &mut alice,
                            Party::B => &mut bob,
                        };
                        let old = atoms[i].row.clone();
                        let moved: Vec<f64> =
                            old.iter().zip(&dir).map(|(r, d)| r + eta * d).collect();
                        atoms[i].row = project_simplex(&moved);
                        match search.lp(&alice, &bob) {
                            Ok(s) if s.optimum > value + IMPROVEMENT_TOL => {
                                value = s.optimum;
                                sol = s;
                                break;
                            }
                            _ => {
                                let atoms = match party {
                                    Party::A => &mut alice,
                                    Party::B => &mut bob,
                                };
                                atoms[i].row = old;
                            }
                        }
                    }
                }
            }

            if value <= before + IMPROVEMENT_TOL {
                stall += 1;
                if stall >= 3 {
                    converged = true;
                    break;
                }
            } else {
                stall = 0;
            }
        }
        if !converged {
            stagnated = true;
        }
        let e = witness(g, &alice, &bob, &sol)?;
        let v = evaluate_eve_value(g, &e)?;
        if best.as_ref().is_none_or(|b| v > b.0 + IMPROVEMENT_TOL) {
            best = Some((v, e, sol));
        }
    }

    let (value, witness, sol) = best.expect("at least one restart");
    let k = g.n_settings_a() * g.n_settings_b();
    let slack_a = sol.row_activity[k] - budget.min_conditional_entropy(Party::A);
    let slack_b = sol.row_activity[k + 1] - budget.min_conditional_entropy(Party::B);
    let diagnostics = Diagnostics {
        pivots: search.pivots,
        phase_one_pivots: 0,
        lp_rows: search.rows.len(),
        lp_columns: 0,
        atoms_a: witness.alphabet_sizes().0,
        atoms_b: witness.alphabet_sizes().1,
        support_size: witness.support_size(),
        feasibility_residual: sol.residual,
        budget_slack_a: slack_a,
        budget_slack_b: slack_b,
        budget_tight_a: slack_a <= CONSISTENCY_TOL,
        budget_tight_b: slack_b <= CONSISTENCY_TOL,
        unvalidated_marginals: !g.has_uniform_marginals(),
        iterations,
        stagnated,
    };
    Ok(BoundResult {
        value,
        witness,
        budget: *budget,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_adversarial_bound, SolverOptions};
    use crate::{algebraic_max, builtin_game};

    fn budget(g: &GameTable, a: f64, b: f64) -> KnowledgeBudget {
        KnowledgeBudget::for_game(g, a, b).unwrap()
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        assert_eq!(project_simplex(&[3.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        let p = project_simplex(&[0.9, -2.0, 0.4]);
        assert!((p[0] - 0.75).abs() < 1e-15 && p[1] == 0.0 && (p[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn no_knowledge_gives_classical_bound() {
        let g = builtin_game("chsh").unwrap();
        let r =
            coordinate_ascent_oracle(&g, &budget(&g, 0.0, 0.0), &OracleOptions::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-6);
        r.witness.validate(&g).unwrap();
    }

    #[test]
    fn full_knowledge_chsh() {
        let g = builtin_game("chsh").unwrap();
        let r =
            coordinate_ascent_oracle(&g, &budget(&g, 1.0, 1.0), &OracleOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = builtin_game("chsh").unwrap();
        let opts = OracleOptions {
            restarts: 2,
            seed: 11,
            ..OracleOptions::default()
        };
        let a = coordinate_ascent_oracle(&g, &budget(&g, 0.5, 0.0), &opts).unwrap();
        let b = coordinate_ascent_oracle(&g, &budget(&g, 0.5, 0.0), &opts).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn stays_below_lp_bound() {
        let g = builtin_game("i3322").unwrap();
        let opts = OracleOptions {
            restarts: 2,
            ..OracleOptions::default()
        };
        for (xa, xb) in [(0.5, 0.0), (0.0, 0.5), (1.0, 0.0)] {
            let b = budget(&g, xa, xb);
            let o = coordinate_ascent_oracle(&g, &b, &opts).unwrap();
            let s = solve_adversarial_bound(&g, &b, &SolverOptions::with_heights(4)).unwrap();
            assert!(
                o.value <= s.value + 1e-6,
                "({xa},{xb}): oracle {} > lp {}",
                o.value,
                s.value
            );
            assert!(o.value >= 0.375 - 1e-9 && o.value <= algebraic_max(&g) + 1e-9);
            o.witness.validate(&g).unwrap();
            assert!(o.witness.relative_knowledge(&g, Party::A).unwrap() <= xa + 1e-9);
        }
    }

    #[test]
    fn rejects_zero_restarts() {
        let g = builtin_game("chsh").unwrap();
        let opts = OracleOptions {
            restarts: 0,
            ..OracleOptions::default()
        };
        assert!(coordinate_ascent_oracle(&g, &budget(&g, 0.0, 0.0), &opts).is_err());
    }
}
