//! Nonlocal-game representation of a Bell inequality.
//!
//! A game is a real coefficient table `c[x][a][y][b]` (the product of the
//! winning-set indicator and the pay-off) together with one setting
//! distribution per party. The joint setting distribution is always the
//! product of the two marginals.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::stochastic::{is_uniform, uniform, validate_distribution};
use crate::{Error, Party};

/// Names accepted by [`builtin_game`].
pub const BUILTIN_GAMES: &[&str] = &["chsh", "i3322"];

#[derive(Debug, Clone, PartialEq)]
pub struct GameTable {
    n_settings_a: usize,
    n_settings_b: usize,
    n_outcomes_a: usize,
    n_outcomes_b: usize,
    coeff: Vec<f64>,
    marginal_a: Vec<f64>,
    marginal_b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameMetadata {
    pub name: String,
    pub description: String,
    pub source: String,
}

impl GameTable {
    /// Builds and validates a game. `coeff` is laid out as `[x][a][y][b]`
    /// (row-major); `None` marginals default to uniform.
    pub fn new(
        settings: (usize, usize),
        outcomes: (usize, usize),
        coeff: Vec<f64>,
        marginal_a: Option<Vec<f64>>,
        marginal_b: Option<Vec<f64>>,
    ) -> Result<Self, Error> {
        let (n_a, n_b) = settings;
        let (m_a, m_b) = outcomes;
        if n_a == 0 || n_b == 0 || m_a == 0 || m_b == 0 {
            return Err(Error::InvalidGame(
                "setting and outcome counts must be at least 1".to_string(),
            ));
        }
        let expected = n_a * m_a * n_b * m_b;
        if coeff.len() != expected {
            return Err(Error::Shape(format!(
                "coefficient table needs {expected} entries, got {}",
                coeff.len()
            )));
        }
        if let Some(i) = coeff.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGame(format!(
                "coefficient #{i} is not finite"
            )));
        }
        let marginal_a = marginal_a.unwrap_or_else(|| uniform(n_a));
        let marginal_b = marginal_b.unwrap_or_else(|| uniform(n_b));
        if marginal_a.len() != n_a || marginal_b.len() != n_b {
            return Err(Error::Shape(format!(
                "marginal lengths ({}, {}) do not match setting counts ({n_a}, {n_b})",
                marginal_a.len(),
                marginal_b.len()
            )));
        }
        validate_distribution(&marginal_a, "marginal A")?;
        validate_distribution(&marginal_b, "marginal B")?;
        Ok(GameTable {
            n_settings_a: n_a,
            n_settings_b: n_b,
            n_outcomes_a: m_a,
            n_outcomes_b: m_b,
            coeff,
            marginal_a,
            marginal_b,
        })
    }

    /// All-zero game with uniform marginals.
    pub fn zeros(settings: (usize, usize), outcomes: (usize, usize)) -> Result<Self, Error> {
        let len = settings.0 * settings.1 * outcomes.0 * outcomes.1;
        Self::new(settings, outcomes, vec![0.0; len], None, None)
    }

    pub fn n_settings_a(&self) -> usize {
        self.n_settings_a
    }

    pub fn n_settings_b(&self) -> usize {
        self.n_settings_b
    }

    pub fn n_outcomes_a(&self) -> usize {
        self.n_outcomes_a
    }

    pub fn n_outcomes_b(&self) -> usize {
        self.n_outcomes_b
    }

    pub fn n_settings(&self, party: Party) -> usize {
        match party {
            Party::A => self.n_settings_a,
            Party::B => self.n_settings_b,
        }
    }

    pub fn n_outcomes(&self, party: Party) -> usize {
        match party {
            Party::A => self.n_outcomes_a,
            Party::B => self.n_outcomes_b,
        }
    }

    pub fn marginal_a(&self) -> &[f64] {
        &self.marginal_a
    }

    pub fn marginal_b(&self) -> &[f64] {
        &self.marginal_b
    }

    pub fn marginal(&self, party: Party) -> &[f64] {
        match party {
            Party::A => &self.marginal_a,
            Party::B => &self.marginal_b,
        }
    }

    pub fn has_uniform_marginals(&self) -> bool {
        is_uniform(&self.marginal_a) && is_uniform(&self.marginal_b)
    }

    #[inline]
    pub fn index(&self, x: usize, a: usize, y: usize, b: usize) -> usize {
        ((x * self.n_outcomes_a + a) * self.n_settings_b + y) * self.n_outcomes_b + b
    }

    #[inline]
    pub fn coeff(&self, x: usize, a: usize, y: usize, b: usize) -> f64 {
        self.coeff[self.index(x, a, y, b)]
    }

    /// The flat `[x][a][y][b]` table.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeff
    }

    /// Iterates `(x, a, y, b, value)` in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        let (ma, nb, mb) = (self.n_outcomes_a, self.n_settings_b, self.n_outcomes_b);
        self.coeff.iter().enumerate().map(move |(i, &v)| {
            let b = i % mb;
            let y = (i / mb) % nb;
            let a = (i / (mb * nb)) % ma;
            let x = i / (mb * nb * ma);
            (x, a, y, b, v)
        })
    }

    /// Referee probability of the setting pair `(x, y)`.
    #[inline]
    pub fn setting_weight(&self, x: usize, y: usize) -> f64 {
        self.marginal_a[x] * self.marginal_b[y]
    }

    /// Same table with every coefficient multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self, Error> {
        let mut g = self.clone();
        g.coeff.iter_mut().for_each(|c| *c *= s);
        if g.coeff.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGame(
                "scaling produced a non-finite coefficient".into(),
            ));
        }
        Ok(g)
    }
}

/// Party-swapped game: `c'[y][b][x][a] = c[x][a][y][b]`.
pub fn transpose_game(g: &GameTable) -> GameTable {
    let mut coeff = vec![0.0; g.coeff.len()];
    let (n_b, m_b, n_a, m_a) = (
        g.n_settings_b,
        g.n_outcomes_b,
        g.n_settings_a,
        g.n_outcomes_a,
    );
    for (x, a, y, b, v) in g.entries() {
        coeff[((y * m_b + b) * n_a + x) * m_a + a] = v;
    }
    GameTable {
        n_settings_a: n_b,
        n_settings_b: n_a,
        n_outcomes_a: m_b,
        n_outcomes_b: m_a,
        coeff,
        marginal_a: g.marginal_b.clone(),
        marginal_b: g.marginal_a.clone(),
    }
}

/// `sum_{x,y} p(x) p(y) max_{a,b} c[x][a][y][b]`: the value when both
/// outcomes may depend on both settings.
pub fn algebraic_max(g: &GameTable) -> f64 {
    let mut total = 0.0;
    for x in 0..g.n_settings_a {
        for y in 0..g.n_settings_b {
            let mut best = f64::NEG_INFINITY;
            for a in 0..g.n_outcomes_a {
                for b in 0..g.n_outcomes_b {
                    best = best.max(g.coeff(x, a, y, b));
                }
            }
            total += g.setting_weight(x, y) * best;
        }
    }
    total
}

// Rows are (y, b), columns are (x, a), both in lexicographic order.
const CHSH_TABLE: [[f64; 4]; 4] = [
    [1.0, -1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0, -1.0],
];

const I3322_TABLE: [[f64; 8]; 8] = [
    [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
    [2.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
];

fn from_printed_table<const R: usize, const C: usize>(
    table: &[[f64; C]; R],
    settings: usize,
    outcomes: usize,
) -> GameTable {
    let mut coeff = vec![0.0; R * C];
    for (row, values) in table.iter().enumerate() {
        let (y, b) = (row / outcomes, row % outcomes);
        for (col, &v) in values.iter().enumerate() {
            let (x, a) = (col / outcomes, col % outcomes);
            coeff[((x * outcomes + a) * settings + y) * outcomes + b] = v;
        }
    }
    GameTable::new(
        (settings, settings),
        (outcomes, outcomes),
        coeff,
        None,
        None,
    )
    .expect("built-in table is well formed")
}

pub fn builtin_game(name: &str) -> Result<GameTable, Error> {
    match name {
        "chsh" => Ok(from_printed_table(&CHSH_TABLE, 2, 2)),
        "i3322" => Ok(from_printed_table(&I3322_TABLE, 4, 2)),
        _ => Err(Error::UnknownGame {
            name: name.to_string(),
            available: BUILTIN_GAMES.join(", "),
        }),
    }
}

pub fn builtin_metadata(name: &str) -> Result<GameMetadata, Error> {
    let description = match name {
        "chsh" => "CHSH game, +-1 pay-off table, two settings and two outcomes per party",
        "i3322" => {
            "I3322 in a nonnegative representation with an added marginal setting \
             (four settings, two outcomes per party)"
        }
        _ => {
            return Err(Error::UnknownGame {
                name: name.to_string(),
                available: BUILTIN_GAMES.join(", "),
            })
        }
    };
    Ok(GameMetadata {
        name: name.to_string(),
        description: description.to_string(),
        source: "built-in".to_string(),
    })
}
