//! Asymmetry indicators: how much the bound changes depending on which
//! party's settings the adversary knows about.
//!
//! For a budget `(xi_x, xi_y)` the point records `r_xy = R(xi_x, xi_y)` and
//! the mirrored `r_yx = R(xi_y, xi_x)`, both from separate solver runs.
//! `d_a = R(xi_x, 0) - R(0, 0)` and `d_b = R(0, xi_y) - R(0, 0)` measure how
//! fast each side's knowledge raises the bound.

use alloc::format;
use alloc::vec::Vec;

use crate::adversary::KnowledgeBudget;
use crate::game::{transpose_game, GameTable};
use crate::solver::{solve_adversarial_bound, SolverOptions, DEFAULT_HEIGHTS};
use crate::{Error, CONSISTENCY_TOL};

/// Values closer to zero than this are reported as exactly zero.
const ZERO_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepMode {
    /// Points `(xi, 0)` against `(0, xi)`.
    #[default]
    OneParam,
    /// The full grid of `(xi_x, xi_y)` pairs.
    TwoParam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepConfig {
    /// Gridpoints on `[0, 1]`, both endpoints included.
    pub steps: usize,
    pub heights: usize,
    pub mode: SweepMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            steps: 21,
            heights: DEFAULT_HEIGHTS,
            mode: SweepMode::OneParam,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.steps < 2 {
            return Err(Error::Parameter(format!(
                "a sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if self.heights < 2 {
            return Err(Error::Parameter(format!(
                "at least 2 heights are required, got {}",
                self.heights
            )));
        }
        Ok(())
    }

    /// The budget values along one axis.
    pub fn axis(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    1.0
                } else {
                    i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub xi_x: f64,
    pub xi_y: f64,
    pub r_xy: f64,
    pub r_yx: f64,
    pub delta: f64,
    pub d_a: f64,
    pub d_b: f64,
}

fn snap(v: f64) -> f64 {
    if v.abs() < ZERO_SNAP {
        0.0
    } else {
        v
    }
}

fn point(xi_x: f64, xi_y: f64, r_xy: f64, r_yx: f64, base: f64, r_a: f64, r_b: f64) -> CurvePoint {
    CurvePoint {
        xi_x,
        xi_y,
        r_xy,
        r_yx,
        delta: snap((r_xy - r_yx).abs()),
        d_a: snap(r_a - base),
        d_b: snap(r_b - base),
    }
}

fn bound(g: &GameTable, xi_x: f64, xi_y: f64, heights: usize) -> Result<f64, Error> {
    let budget = KnowledgeBudget::for_game(g, xi_x, xi_y)?;
    Ok(solve_adversarial_bound(g, &budget, &SolverOptions::with_heights(heights))?.value)
}

/// Compares knowledge `xi` about Alice's settings with the same knowledge
/// about Bob's.
pub fn delta_one_param(g: &GameTable, xi: f64, heights: usize) -> Result<CurvePoint, Error> {
    let base = bound(g, 0.0, 0.0, heights)?;
    let r_xy = bound(g, xi, 0.0, heights)?;
    let r_yx = bound(g, 0.0, xi, heights)?;
    Ok(point(xi, 0.0, r_xy, r_yx, base, r_xy, r_yx))
}

/// Compares the budget `(xi_x, xi_y)` with its mirror `(xi_y, xi_x)`.
pub fn delta_two_param(
    g: &GameTable,
    xi_x: f64,
    xi_y: f64,
    heights: usize,
) -> Result<CurvePoint, Error> {
    let base = bound(g, 0.0, 0.0, heights)?;
    let r_xy = bound(g, xi_x, xi_y, heights)?;
    let r_yx = bound(g, xi_y, xi_x, heights)?;
    let r_a = bound(g, xi_x, 0.0, heights)?;
    let r_b = bound(g, 0.0, xi_y, heights)?;
    Ok(point(xi_x, xi_y, r_xy, r_yx, base, r_a, r_b))
}

/// Every budget a sweep needs, without repeats. Solve them in any order and
/// pass the values, in this order, to [`assemble_curve`].
pub fn budget_grid(cfg: &SweepConfig) -> Result<Vec<(f64, f64)>, Error> {
    cfg.validate()?;
    let axis = cfg.axis();
    Ok(match cfg.mode {
        SweepMode::OneParam => axis
            .iter()
            .map(|&xi| (xi, 0.0))
            .chain(axis[1..].iter().map(|&xi| (0.0, xi)))
            .collect(),
        SweepMode::TwoParam => axis
            .iter()
            .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
            .collect(),
    })
}

fn check_nondecreasing(values: impl Iterator<Item = f64>, what: &str) -> Result<(), Error> {
    let mut prev = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v + CONSISTENCY_TOL < prev {
            return Err(Error::Internal(format!(
                "{what} decreases at gridpoint {i}: {prev} then {v}"
            )));
        }
        prev = v;
    }
    Ok(())
}

/// Builds the curve from solved budgets, checking that each side's bound is
/// non-decreasing along the grid.
pub fn assemble_curve(cfg: &SweepConfig, values: &[f64]) -> Result<Vec<CurvePoint>, Error> {
    let grid = budget_grid(cfg)?;
    if values.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{} values for {} budgets",
            values.len(),
            grid.len()
        )));
    }
    let axis = cfg.axis();
    let n = axis.len();
    match cfg.mode {
        SweepMode::OneParam => {
            let side_a = &values[..n];
            let side_b = || core::iter::once(values[0]).chain(values[n..].iter().copied());
            check_nondecreasing(side_a.iter().copied(), "bound with knowledge of X")?;
            check_nondecreasing(side_b(), "bound with knowledge of Y")?;
            let base = values[0];
            Ok(axis
                .iter()
                .zip(side_a.iter().zip(side_b()))
                .map(|(&xi, (&ra, rb))| point(xi, 0.0, ra, rb, base, ra, rb))
                .collect())
        }
        SweepMode::TwoParam => {
            let r = |i: usize, j: usize| values[i * n + j];
            for i in 0..n {
                check_nondecreasing((0..n).map(|j| r(i, j)), "bound along xi_y")?;
                check_nondecreasing((0..n).map(|j| r(j, i)), "bound along xi_x")?;
            }
            let base = r(0, 0);
            let mut out = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    out.push(point(
                        axis[i],
                        axis[j],
                        r(i, j),
                        r(j, i),
                        base,
                        r(i, 0),
                        r(0, j),
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// Solves every gridpoint in order and assembles the curve. Nothing is
/// returned if any solve fails.
pub fn sweep_curve(g: &GameTable, cfg: &SweepConfig) -> Result<Vec<CurvePoint>, Error> {
    let values = budget_grid(cfg)?
        .into_iter()
        .map(|(a, b)| bound(g, a, b, cfg.heights))
        .collect::<Result<Vec<_>, _>>()?;
    assemble_curve(cfg, &values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryReport {
    pub transpose_invariant: bool,
    /// False when the two parties have different numbers of settings or
    /// outcomes, which rules out invariance.
    pub shapes_match: bool,
    /// First `(x, a, y, b)` in lexicographic order where the table and its
    /// transpose disagree.
    pub first_differing_entry: Option<(usize, usize, usize, usize)>,
    /// Whether the setting marginals of the two parties agree.
    pub marginals_match: bool,
}

/// Whether the table is unchanged when the parties swap roles.
pub fn check_symmetry(g: &GameTable) -> SymmetryReport {
    let shapes_match = g.n_settings_a() == g.n_settings_b() && g.n_outcomes_a() == g.n_outcomes_b();
    if !shapes_match {
        return SymmetryReport {
            transpose_invariant: false,
            shapes_match,
            first_differing_entry: None,
            marginals_match: false,
        };
    }
    let t = transpose_game(g);
    let first_differing_entry = g
        .entries()
        .find(|&(x, a, y, b, v)| t.coeff(x, a, y, b) != v)
        .map(|(x, a, y, b, _)| (x, a, y, b));
    let marginals_match = g.marginal_a() == g.marginal_b();
    SymmetryReport {
        transpose_invariant: first_differing_entry.is_none() && marginals_match,
        shapes_match,
        first_differing_entry,
        marginals_match,
    }
}
