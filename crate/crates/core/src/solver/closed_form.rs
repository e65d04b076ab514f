use crate::game::{algebraic_max, GameTable};
use crate::Error;

/// Which party's setting Eve knows completely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnowledgeSide {
    A,
    B,
    Both,
}

/// The bound at full knowledge of one or both settings (uniform marginals).
///
/// With `xi_X = 1` Eve's hidden value can carry `x` itself; since her two
/// hidden values may be correlated, Bob's response effectively depends on
/// `x`, giving `(1/(N_A N_B)) sum_x max_a sum_y max_b c[x][a][y][b]`.
pub fn closed_form_full_knowledge(g: &GameTable, side: KnowledgeSide) -> Result<f64, Error> {
    if !g.has_uniform_marginals() {
        return Err(Error::Unsupported(
            "closed-form full-knowledge bounds assume uniform setting marginals".into(),
        ));
    }
    let (n_a, m_a, n_b, m_b) = (
        g.n_settings_a(),
        g.n_outcomes_a(),
        g.n_settings_b(),
        g.n_outcomes_b(),
    );
    let norm = (n_a * n_b) as f64;
    let value = match side {
        KnowledgeSide::Both => algebraic_max(g),
        KnowledgeSide::A => {
            let mut total = 0.0;
            for x in 0..n_a {
                let best = (0..m_a)
                    .map(|a| {
                        (0..n_b)
                            .map(|y| {
                                (0..m_b)
                                    .map(|b| g.coeff(x, a, y, b))
                                    .fold(f64::NEG_INFINITY, f64::max)
                            })
                            .sum::<f64>()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                total += best;
            }
            total / norm
        }
        KnowledgeSide::B => {
            let mut total = 0.0;
            for y in 0..n_b {
                let best = (0..m_b)
                    .map(|b| {
                        (0..n_a)
                            .map(|x| {
                                (0..m_a)
                                    .map(|a| g.coeff(x, a, y, b))
                                    .fold(f64::NEG_INFINITY, f64::max)
                            })
                            .sum::<f64>()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                total += best;
            }
            total / norm
        }
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{builtin_game, transpose_game};

    #[test]
    fn builtin_values() {
        let chsh = builtin_game("chsh").unwrap();
        assert_eq!(
            closed_form_full_knowledge(&chsh, KnowledgeSide::A).unwrap(),
            1.0
        );
        assert_eq!(
            closed_form_full_knowledge(&chsh, KnowledgeSide::B).unwrap(),
            1.0
        );
        let g = builtin_game("i3322").unwrap();
        assert_eq!(
            closed_form_full_knowledge(&g, KnowledgeSide::A).unwrap(),
            0.6875
        );
        assert_eq!(
            closed_form_full_knowledge(&g, KnowledgeSide::B).unwrap(),
            0.5625
        );
        assert_eq!(
            closed_form_full_knowledge(&g, KnowledgeSide::Both).unwrap(),
            0.75
        );
        let t = transpose_game(&g);
        assert_eq!(
            closed_form_full_knowledge(&t, KnowledgeSide::A).unwrap(),
            0.5625
        );
    }

    #[test]
    fn rejects_non_uniform_marginals() {
        let g = GameTable::new(
            (2, 2),
            (2, 2),
            [0.0; 16].to_vec(),
            Some([0.3, 0.7].to_vec()),
            None,
        )
        .unwrap();
        assert!(matches!(
            closed_form_full_knowledge(&g, KnowledgeSide::A),
            Err(Error::Unsupported(_))
        ));
    }
}
