//! Min-entropy accounting for the adversary's knowledge of the settings.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::game::GameTable;
use crate::stochastic::validate_distribution;
use crate::{Error, Party, StochasticMatrix, CONSISTENCY_TOL, NORMALIZATION_TOL};

/// `-log2 max_x p(x)`, in bits.
pub fn min_entropy(p: &[f64]) -> Result<f64, Error> {
    validate_distribution(p, "min-entropy argument")?;
    Ok(min_entropy_unchecked(p))
}

pub(crate) fn min_entropy_unchecked(p: &[f64]) -> f64 {
    let peak = p.iter().copied().fold(0.0, f64::max);
    let h = -libm::log2(peak);
    // -log2(1) is -0.0
    if h == 0.0 {
        0.0
    } else {
        h
    }
}

/// Per-hidden-value setting distributions `p(x|l)` with weights `w(l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSettings {
    dist: StochasticMatrix,
    weights: Vec<f64>,
}

impl ConditionalSettings {
    pub fn new(dist: StochasticMatrix, weights: Vec<f64>) -> Result<Self, Error> {
        if weights.len() != dist.rows() {
            return Err(Error::Shape(format!(
                "{} weights for {} hidden values",
                weights.len(),
                dist.rows()
            )));
        }
        validate_distribution(&weights, "hidden-variable weights")?;
        Ok(ConditionalSettings { dist, weights })
    }

    pub fn dist(&self) -> &StochasticMatrix {
        &self.dist
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_l w(l) p(x|l)`: the setting statistics the party observes.
    pub fn mixture(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dist.cols()];
        for (w, row) in self.weights.iter().zip(self.dist.iter_rows()) {
            for (acc, p) in m.iter_mut().zip(row) {
                *acc += w * p;
            }
        }
        m
    }
}

/// `-sum_l w(l) log2 max_x p(x|l)`, in bits.
pub fn conditional_min_entropy(cs: &ConditionalSettings) -> f64 {
    cs.weights
        .iter()
        .zip(cs.dist.iter_rows())
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, row)| w * min_entropy_unchecked(row))
        .sum()
}

/// Fraction of the reference min-entropy removed by conditioning on the
/// hidden variable: `(H(X) - H(X|L)) / H(X)`.
///
/// Values within 1e-9 outside `[0, 1]` are clamped. Larger excursions
/// (possible only for non-uniform references) are returned unchanged.
pub fn relative_knowledge(cs: &ConditionalSettings, reference: &[f64]) -> Result<f64, Error> {
    let h = min_entropy(reference)?;
    if reference.len() != cs.dist.cols() {
        return Err(Error::Shape(format!(
            "reference over {} settings, conditionals over {}",
            reference.len(),
            cs.dist.cols()
        )));
    }
    let deviation = max_abs_diff(&cs.mixture(), reference);
    if deviation > CONSISTENCY_TOL {
        return Err(Error::InvalidDistribution {
            what: "conditional settings".to_string(),
            reason: format!("mixture deviates from the reference by {deviation:e}"),
        });
    }
    if h <= NORMALIZATION_TOL {
        return Err(Error::UndefinedRatio);
    }
    let xi = (h - conditional_min_entropy(cs)) / h;
    Ok(snap_unit(xi))
}

pub(crate) fn snap_unit(xi: f64) -> f64 {
    if (-CONSISTENCY_TOL..0.0).contains(&xi) {
        0.0
    } else if xi > 1.0 && xi <= 1.0 + CONSISTENCY_TOL {
        1.0
    } else {
        xi
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Knowledge budget `(xi_X, xi_Y)` and the reference entropies it is
/// measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnowledgeBudget {
    pub xi_x: f64,
    pub xi_y: f64,
    /// `H(X)` in bits (`log2 N_A` for uniform settings).
    pub entropy_x: f64,
    pub entropy_y: f64,
}

impl KnowledgeBudget {
    pub fn for_game(g: &GameTable, xi_x: f64, xi_y: f64) -> Result<Self, Error> {
        for (party, xi) in [(Party::A, xi_x), (Party::B, xi_y)] {
            if !(0.0..=1.0).contains(&xi) {
                return Err(Error::BudgetRange { party, value: xi });
            }
        }
        Ok(KnowledgeBudget {
            xi_x,
            xi_y,
            entropy_x: min_entropy_unchecked(g.marginal_a()),
            entropy_y: min_entropy_unchecked(g.marginal_b()),
        })
    }

    pub fn xi(&self, party: Party) -> f64 {
        match party {
            Party::A => self.xi_x,
            Party::B => self.xi_y,
        }
    }

    pub fn entropy(&self, party: Party) -> f64 {
        match party {
            Party::A => self.entropy_x,
            Party::B => self.entropy_y,
        }
    }

    /// Lower limit on the conditional min-entropy: `(1 - xi) H`.
    pub fn min_conditional_entropy(&self, party: Party) -> f64 {
        (1.0 - self.xi(party)) * self.entropy(party)
    }

    pub fn swapped(&self) -> Self {
        KnowledgeBudget {
            xi_x: self.xi_y,
            xi_y: self.xi_x,
            entropy_x: self.entropy_y,
            entropy_y: self.entropy_x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(r: &[&[f64]]) -> StochasticMatrix {
        StochasticMatrix::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn min_entropy_examples() {
        assert_eq!(min_entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(min_entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        // a peak of 2^-0.5 leaves half a bit
        let peak = core::f64::consts::FRAC_1_SQRT_2;
        let h = min_entropy(&[peak, 1.0 - peak]).unwrap();
        assert!((h - 0.5).abs() < 1e-12, "{h}");
        assert!(min_entropy(&[0.5, 0.6]).is_err());
    }

    #[test]
    fn conditional_min_entropy_examples() {
        let uniform =
            ConditionalSettings::new(rows(&[&[0.25; 4], &[0.25; 4]]), vec![0.3, 0.7]).unwrap();
        assert!((conditional_min_entropy(&uniform) - 2.0).abs() < 1e-15);
        let det =
            ConditionalSettings::new(rows(&[&[1.0, 0.0], &[0.0, 1.0]]), vec![0.5, 0.5]).unwrap();
        assert_eq!(conditional_min_entropy(&det), 0.0);
        let half =
            ConditionalSettings::new(rows(&[&[1.0, 0.0], &[0.5, 0.5]]), vec![0.5, 0.5]).unwrap();
        assert_eq!(conditional_min_entropy(&half), 0.5);
        assert!(ConditionalSettings::new(rows(&[&[1.0, 0.0]]), vec![0.5, 0.5]).is_err());
        assert!(
            ConditionalSettings::new(rows(&[&[1.0, 0.0], &[0.0, 1.0]]), vec![0.5, 0.6]).is_err()
        );
    }

    #[test]
    fn relative_knowledge_examples() {
        let uniform = ConditionalSettings::new(rows(&[&[0.5, 0.5]]), vec![1.0]).unwrap();
        assert_eq!(relative_knowledge(&uniform, &[0.5, 0.5]).unwrap(), 0.0);
        let det =
            ConditionalSettings::new(rows(&[&[1.0, 0.0], &[0.0, 1.0]]), vec![0.5, 0.5]).unwrap();
        assert_eq!(relative_knowledge(&det, &[0.5, 0.5]).unwrap(), 1.0);
        let q = libm::exp2(-0.5);
        let half = ConditionalSettings::new(rows(&[&[q, 1.0 - q], &[1.0 - q, q]]), vec![0.5, 0.5])
            .unwrap();
        assert!((relative_knowledge(&half, &[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn relative_knowledge_errors() {
        let one = ConditionalSettings::new(rows(&[&[1.0]]), vec![1.0]).unwrap();
        assert_eq!(relative_knowledge(&one, &[1.0]), Err(Error::UndefinedRatio));
        let skew = ConditionalSettings::new(rows(&[&[1.0, 0.0]]), vec![1.0]).unwrap();
        assert!(relative_knowledge(&skew, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn budget_range() {
        let g = crate::builtin_game("i3322").unwrap();
        let b = KnowledgeBudget::for_game(&g, 0.25, 1.0).unwrap();
        assert_eq!(b.entropy_x, 2.0);
        assert_eq!(b.min_conditional_entropy(Party::A), 1.5);
        assert!(matches!(
            KnowledgeBudget::for_game(&g, 2.0, 0.0),
            Err(Error::BudgetRange {
                party: Party::A,
                ..
            })
        ));
        assert!(KnowledgeBudget::for_game(&g, 0.0, -0.1).is_err());
    }
}
