//! Deterministic local strategies, boxes and the classical bound.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::game::GameTable;
use crate::{Error, Party, NORMALIZATION_TOL};

/// Default cap on the number of deterministic strategy pairs enumerated.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Boxes within this distance of no-signaling are reported as no-signaling.
pub const NO_SIGNALING_TOL: f64 = 1e-9;

/// A deterministic response `setting -> outcome` for one party.
///
/// Encoded as an integer in base `n_outcomes` with one digit per setting,
/// setting 0 being the most significant digit, so integer order equals
/// lexicographic order of the output tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResponseFunction {
    outputs: Vec<usize>,
}

impl ResponseFunction {
    pub fn new(outputs: Vec<usize>) -> Self {
        ResponseFunction { outputs }
    }

    pub fn constant(n_settings: usize, outcome: usize) -> Self {
        ResponseFunction {
            outputs: vec![outcome; n_settings],
        }
    }

    pub fn from_code(mut code: u64, n_settings: usize, n_outcomes: usize) -> Self {
        let mut outputs = vec![0; n_settings];
        for slot in outputs.iter_mut().rev() {
            *slot = (code % n_outcomes as u64) as usize;
            code /= n_outcomes as u64;
        }
        ResponseFunction { outputs }
    }

    pub fn code(&self, n_outcomes: usize) -> u64 {
        self.outputs
            .iter()
            .fold(0u64, |acc, &o| acc * n_outcomes as u64 + o as u64)
    }

    /// Number of responses `n_outcomes^n_settings`, saturating.
    pub fn count(n_settings: usize, n_outcomes: usize) -> u128 {
        (n_outcomes as u128)
            .checked_pow(n_settings as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    #[inline]
    pub fn output(&self, setting: usize) -> usize {
        self.outputs[setting]
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

/// A pair of deterministic responses `f: x -> a`, `g: y -> b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicStrategy {
    pub alice: ResponseFunction,
    pub bob: ResponseFunction,
}

impl DeterministicStrategy {
    pub fn new(alice: ResponseFunction, bob: ResponseFunction) -> Self {
        DeterministicStrategy { alice, bob }
    }

    pub fn check_shape(&self, g: &GameTable) -> Result<(), Error> {
        let ok = |f: &ResponseFunction, party: Party| {
            f.len() == g.n_settings(party) && f.outputs().iter().all(|&o| o < g.n_outcomes(party))
        };
        if ok(&self.alice, Party::A) && ok(&self.bob, Party::B) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "strategy {:?}/{:?} does not fit the game",
                self.alice.outputs(),
                self.bob.outputs()
            )))
        }
    }

    /// `sum_{x,y} p(x) p(y) c[x][f(x)][y][g(y)]`.
    pub fn value(&self, g: &GameTable) -> f64 {
        let mut total = 0.0;
        for x in 0..g.n_settings_a() {
            let a = self.alice.output(x);
            for y in 0..g.n_settings_b() {
                total += g.setting_weight(x, y) * g.coeff(x, a, y, self.bob.output(y));
            }
        }
        total
    }

    /// The product box `p(ab|xy) = [a = f(x)] [b = g(y)]`.
    pub fn to_box(&self, g: &GameTable) -> BellBox {
        BellBox::from_fn(
            (g.n_settings_a(), g.n_settings_b()),
            (g.n_outcomes_a(), g.n_outcomes_b()),
            |a, b, x, y| {
                if self.alice.output(x) == a && self.bob.output(y) == b {
                    1.0
                } else {
                    0.0
                }
            },
        )
    }
}

/// Streams every deterministic strategy pair in lexicographic `(f, g)` order.
#[derive(Debug, Clone)]
pub struct StrategyIter {
    dims: [usize; 4],
    n_bob: u64,
    next: u64,
    total: u64,
}

impl Iterator for StrategyIter {
    type Item = DeterministicStrategy;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.total {
            return None;
        }
        let [n_a, m_a, n_b, m_b] = self.dims;
        let (fa, gb) = (self.next / self.n_bob, self.next % self.n_bob);
        self.next += 1;
        Some(DeterministicStrategy::new(
            ResponseFunction::from_code(fa, n_a, m_a),
            ResponseFunction::from_code(gb, n_b, m_b),
        ))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for StrategyIter {}

fn strategy_count(g: &GameTable) -> (u128, u128) {
    (
        ResponseFunction::count(g.n_settings_a(), g.n_outcomes_a()),
        ResponseFunction::count(g.n_settings_b(), g.n_outcomes_b()),
    )
}

fn check_cap(g: &GameTable, cap: u128) -> Result<(u64, u64), Error> {
    let (na, nb) = strategy_count(g);
    let required = na.saturating_mul(nb);
    if required > cap || required > u64::MAX as u128 {
        return Err(Error::Capacity { required, cap });
    }
    Ok((na as u64, nb as u64))
}

pub fn enumerate_strategies(g: &GameTable, cap: u128) -> Result<StrategyIter, Error> {
    let (na, nb) = check_cap(g, cap)?;
    Ok(StrategyIter {
        dims: [
            g.n_settings_a(),
            g.n_outcomes_a(),
            g.n_settings_b(),
            g.n_outcomes_b(),
        ],
        n_bob: nb,
        next: 0,
        total: na * nb,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalBound {
    pub value: f64,
    /// Lexicographically smallest maximizing pair.
    pub strategy: DeterministicStrategy,
    pub alice_responses_scanned: u64,
}

/// Maximum game value over deterministic local strategies.
///
/// For each Alice response the best Bob response is chosen independently
/// per setting `y`, which reproduces the full `(f, g)` scan at a fraction of
/// the cost; ties keep the smallest `(f, g)`.
pub fn classical_bound(g: &GameTable, cap: u128) -> Result<ClassicalBound, Error> {
    let (na, _) = check_cap(g, cap)?;
    let (n_a, m_a, n_b, m_b) = (
        g.n_settings_a(),
        g.n_outcomes_a(),
        g.n_settings_b(),
        g.n_outcomes_b(),
    );
    let mut best: Option<(f64, u64, Vec<usize>)> = None;
    let mut partial = vec![0.0; n_b * m_b];
    for code in 0..na {
        let f = ResponseFunction::from_code(code, n_a, m_a);
        for y in 0..n_b {
            for b in 0..m_b {
                let mut s = 0.0;
                for x in 0..n_a {
                    s += g.marginal_a()[x] * g.coeff(x, f.output(x), y, b);
                }
                partial[y * m_b + b] = g.marginal_b()[y] * s;
            }
        }
        let mut value = 0.0;
        let mut bob = Vec::with_capacity(n_b);
        for y in 0..n_b {
            let row = &partial[y * m_b..(y + 1) * m_b];
            let mut arg = 0;
            for b in 1..m_b {
                if row[b] > row[arg] {
                    arg = b;
                }
            }
            value += row[arg];
            bob.push(arg);
        }
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, code, bob));
        }
    }
    let (value, code, bob) = best.expect("at least one response exists");
    Ok(ClassicalBound {
        value,
        strategy: DeterministicStrategy::new(
            ResponseFunction::from_code(code, n_a, m_a),
            ResponseFunction::new(bob),
        ),
        alice_responses_scanned: na,
    })
}

/// A two-party box `{p(ab|xy)}`: one outcome distribution per setting pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BellBox {
    settings: (usize, usize),
    outcomes: (usize, usize),
    // [x][y][a][b]
    probs: Vec<f64>,
}

impl BellBox {
    pub fn new(
        settings: (usize, usize),
        outcomes: (usize, usize),
        probs: Vec<f64>,
    ) -> Result<Self, Error> {
        let bx = BellBox {
            settings,
            outcomes,
            probs,
        };
        if bx.probs.len() != settings.0 * settings.1 * outcomes.0 * outcomes.1 {
            return Err(Error::Shape(format!(
                "box needs {} entries",
                settings.0 * settings.1 * outcomes.0 * outcomes.1
            )));
        }
        let block = outcomes.0 * outcomes.1;
        for (i, chunk) in bx.probs.chunks(block).enumerate() {
            let total: f64 = chunk.iter().sum();
            if chunk.iter().any(|p| !p.is_finite() || *p < 0.0)
                || (total - 1.0).abs() > NORMALIZATION_TOL
            {
                return Err(Error::InvalidDistribution {
                    what: format!("box block (x={}, y={})", i / settings.1, i % settings.1),
                    reason: format!("entries sum to {total} or are negative"),
                });
            }
        }
        Ok(bx)
    }

    /// Builds a box from `p(a, b, x, y)` without validation.
    pub fn from_fn(
        settings: (usize, usize),
        outcomes: (usize, usize),
        mut p: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut probs = Vec::with_capacity(settings.0 * settings.1 * outcomes.0 * outcomes.1);
        for x in 0..settings.0 {
            for y in 0..settings.1 {
                for a in 0..outcomes.0 {
                    for b in 0..outcomes.1 {
                        probs.push(p(a, b, x, y));
                    }
                }
            }
        }
        BellBox {
            settings,
            outcomes,
            probs,
        }
    }

    pub fn settings(&self) -> (usize, usize) {
        self.settings
    }

    pub fn outcomes(&self) -> (usize, usize) {
        self.outcomes
    }

    #[inline]
    pub fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        let (n_b, (m_a, m_b)) = (self.settings.1, self.outcomes);
        self.probs[((x * n_b + y) * m_a + a) * m_b + b]
    }

    /// Convex combination `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &BellBox, t: f64) -> Result<BellBox, Error> {
        if self.settings != other.settings || self.outcomes != other.outcomes {
            return Err(Error::Shape("mixing boxes of different shapes".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| t * p + (1.0 - t) * q)
            .collect();
        Ok(BellBox {
            probs,
            ..self.clone()
        })
    }
}

pub fn evaluate_box_value(g: &GameTable, bx: &BellBox) -> Result<f64, Error> {
    if bx.settings != (g.n_settings_a(), g.n_settings_b())
        || bx.outcomes != (g.n_outcomes_a(), g.n_outcomes_b())
    {
        return Err(Error::Shape(format!(
            "box {:?}/{:?} does not match game settings ({}, {}) outcomes ({}, {})",
            bx.settings,
            bx.outcomes,
            g.n_settings_a(),
            g.n_settings_b(),
            g.n_outcomes_a(),
            g.n_outcomes_b()
        )));
    }
    let mut total = 0.0;
    for x in 0..g.n_settings_a() {
        for y in 0..g.n_settings_b() {
            let mut block = 0.0;
            for a in 0..g.n_outcomes_a() {
                for b in 0..g.n_outcomes_b() {
                    block += bx.prob(a, b, x, y) * g.coeff(x, a, y, b);
                }
            }
            total += g.setting_weight(x, y) * block;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoSignalingReport {
    /// Bob's outcome statistics do not depend on Alice's setting.
    pub is_no_signaling_a_to_b: bool,
    /// Alice's outcome statistics do not depend on Bob's setting.
    pub is_no_signaling_b_to_a: bool,
    pub max_violation: f64,
}

pub fn check_no_signaling(bx: &BellBox) -> NoSignalingReport {
    let ((n_a, n_b), (m_a, m_b)) = (bx.settings, bx.outcomes);
    let bob_marginal = |b, x, y| (0..m_a).map(|a| bx.prob(a, b, x, y)).sum::<f64>();
    let alice_marginal = |a, x, y| (0..m_b).map(|b| bx.prob(a, b, x, y)).sum::<f64>();

    let mut a_to_b = 0.0f64;
    for y in 0..n_b {
        for b in 0..m_b {
            let vals: Vec<f64> = (0..n_a).map(|x| bob_marginal(b, x, y)).collect();
            a_to_b = a_to_b.max(spread(&vals));
        }
    }
    let mut b_to_a = 0.0f64;
    for x in 0..n_a {
        for a in 0..m_a {
            let vals: Vec<f64> = (0..n_b).map(|y| alice_marginal(a, x, y)).collect();
            b_to_a = b_to_a.max(spread(&vals));
        }
    }
    NoSignalingReport {
        is_no_signaling_a_to_b: a_to_b <= NO_SIGNALING_TOL,
        is_no_signaling_b_to_a: b_to_a <= NO_SIGNALING_TOL,
        max_violation: a_to_b.max(b_to_a),
    }
}

// max_i v_i - min_i v_i, i.e. the largest pairwise |v_i - v_j|.
fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{algebraic_max, builtin_game, transpose_game};

    fn brute_force(g: &GameTable) -> (f64, DeterministicStrategy) {
        let mut best: Option<(f64, DeterministicStrategy)> = None;
        for s in enumerate_strategies(g, DEFAULT_ENUMERATION_CAP).unwrap() {
            let v = evaluate_box_value(g, &s.to_box(g)).unwrap();
            if best.as_ref().is_none_or(|(b, _)| v > *b + 1e-12) {
                best = Some((v, s));
            }
        }
        best.unwrap()
    }

    #[test]
    fn response_codes_are_lexicographic() {
        let all: Vec<_> = (0..8)
            .map(|c| ResponseFunction::from_code(c, 3, 2))
            .collect();
        assert_eq!(all[1].outputs(), &[0, 0, 1]);
        assert_eq!(all[4].outputs(), &[1, 0, 0]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for (c, f) in all.iter().enumerate() {
            assert_eq!(f.code(2), c as u64);
        }
    }

    #[test]
    fn enumeration_counts() {
        let chsh = builtin_game("chsh").unwrap();
        assert_eq!(
            enumerate_strategies(&chsh, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .count(),
            16
        );
        let i3322 = builtin_game("i3322").unwrap();
        let all: Vec<_> = enumerate_strategies(&i3322, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .collect();
        assert_eq!(all.len(), 256);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let tiny = GameTable::zeros((1, 1), (1, 1)).unwrap();
        assert_eq!(
            enumerate_strategies(&tiny, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .count(),
            1
        );
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let g = GameTable::zeros((13, 13), (2, 2)).unwrap();
        let err = enumerate_strategies(&g, DEFAULT_ENUMERATION_CAP).unwrap_err();
        assert!(matches!(err, Error::Capacity { required, .. } if required == 1 << 26));
        assert!(classical_bound(&g, DEFAULT_ENUMERATION_CAP).is_err());
        assert!(classical_bound(&g, 1 << 26).is_ok());
    }

    #[test]
    fn chsh_all_zero_strategy_value() {
        let g = builtin_game("chsh").unwrap();
        let s = DeterministicStrategy::new(
            ResponseFunction::constant(2, 0),
            ResponseFunction::constant(2, 0),
        );
        assert_eq!(evaluate_box_value(&g, &s.to_box(&g)).unwrap(), 0.5);
        assert_eq!(s.value(&g), 0.5);
    }

    #[test]
    fn uniform_box_value_is_scaled_sum() {
        let g = builtin_game("i3322").unwrap();
        let bx = BellBox::from_fn((4, 4), (2, 2), |_, _, _, _| 0.25);
        let expected: f64 = g
            .entries()
            .map(|(x, _, y, _, v)| v * g.setting_weight(x, y))
            .sum::<f64>()
            / 4.0;
        assert!((evaluate_box_value(&g, &bx).unwrap() - expected).abs() < 1e-15);
        let zero = GameTable::zeros((4, 4), (2, 2)).unwrap();
        assert_eq!(evaluate_box_value(&zero, &bx).unwrap(), 0.0);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = builtin_game("chsh").unwrap();
        let bx = BellBox::from_fn((4, 4), (2, 2), |_, _, _, _| 0.25);
        assert!(matches!(evaluate_box_value(&g, &bx), Err(Error::Shape(_))));
    }

    #[test]
    fn classical_bounds_match_enumeration() {
        let chsh = builtin_game("chsh").unwrap();
        let cb = classical_bound(&chsh, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(cb.value, 0.5);
        let (v, s) = brute_force(&chsh);
        assert_eq!(v, 0.5);
        assert_eq!(cb.strategy, s);

        // Frozen from the 256-pair enumeration: 6/16.
        let i3322 = builtin_game("i3322").unwrap();
        let cb = classical_bound(&i3322, DEFAULT_ENUMERATION_CAP).unwrap();
        let (v, s) = brute_force(&i3322);
        assert_eq!(v, 0.375);
        assert!((cb.value - 0.375).abs() < 1e-12);
        assert_eq!(cb.strategy, s);
        assert!(cb.value <= algebraic_max(&i3322));
        assert_eq!(
            classical_bound(&transpose_game(&i3322), DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .value,
            cb.value
        );

        let zero = GameTable::zeros((3, 2), (2, 3)).unwrap();
        assert_eq!(
            classical_bound(&zero, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn product_boxes_do_not_signal() {
        let g = builtin_game("i3322").unwrap();
        let boxes: Vec<BellBox> = enumerate_strategies(&g, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .step_by(37)
            .map(|s| s.to_box(&g))
            .collect();
        for bx in &boxes {
            let r = check_no_signaling(bx);
            assert!(r.is_no_signaling_a_to_b && r.is_no_signaling_b_to_a);
            assert_eq!(r.max_violation, 0.0);
        }
        let mixed = boxes[0]
            .mix(&boxes[1], 0.3)
            .unwrap()
            .mix(&boxes[2], 0.6)
            .unwrap();
        let r = check_no_signaling(&mixed);
        assert!(r.is_no_signaling_a_to_b && r.is_no_signaling_b_to_a);
    }

    #[test]
    fn signaling_box_is_flagged() {
        // Bob outputs Alice's setting.
        let bx = BellBox::from_fn(
            (2, 2),
            (2, 2),
            |a, b, x, _| if a == 0 && b == x { 1.0 } else { 0.0 },
        );
        let r = check_no_signaling(&bx);
        assert!(!r.is_no_signaling_a_to_b);
        assert!(r.is_no_signaling_b_to_a);
        assert_eq!(r.max_violation, 1.0);
    }

    #[test]
    fn box_validation() {
        assert!(BellBox::new((1, 1), (2, 2), vec![0.25; 4]).is_ok());
        assert!(BellBox::new((1, 1), (2, 2), vec![0.3; 4]).is_err());
        assert!(BellBox::new((1, 1), (2, 2), vec![0.25; 3]).is_err());
    }
}
