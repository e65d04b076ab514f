use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::adversary::min_entropy_unchecked;
use crate::game::GameTable;
use crate::lhv::ResponseFunction;
use crate::{Error, Party, NORMALIZATION_TOL};

// Larger alphabets are not useful for an exhaustive LP anyway.
const MAX_SETTINGS: usize = 16;
const MAX_RESPONSES: u128 = 1 << 16;

/// A setting distribution taking value `peak_prob` on a peak set and
/// `tail_prob` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelDistribution {
    n_settings: usize,
    peak_set: Vec<usize>,
    peak_prob: f64,
    tail_prob: f64,
}

impl TwoLevelDistribution {
    pub fn new(n_settings: usize, mut peak_set: Vec<usize>, peak_prob: f64) -> Result<Self, Error> {
        peak_set.sort_unstable();
        peak_set.dedup();
        let k = peak_set.len();
        if k == 0 || peak_set.iter().any(|&x| x >= n_settings) {
            return Err(Error::Parameter(format!(
                "peak set {peak_set:?} must be a nonempty subset of 0..{n_settings}"
            )));
        }
        let tail_prob = if k == n_settings {
            0.0
        } else {
            (1.0 - k as f64 * peak_prob) / (n_settings - k) as f64
        };
        let tail_prob = if tail_prob.abs() < NORMALIZATION_TOL {
            0.0
        } else {
            tail_prob
        };
        let total = k as f64 * peak_prob + (n_settings - k) as f64 * tail_prob;
        if tail_prob < 0.0
            || peak_prob + NORMALIZATION_TOL < tail_prob
            || (total - 1.0).abs() > NORMALIZATION_TOL
        {
            return Err(Error::Parameter(format!(
                "height {peak_prob} is not valid for a peak set of size {k} over {n_settings} settings"
            )));
        }
        Ok(TwoLevelDistribution {
            n_settings,
            peak_set,
            peak_prob,
            tail_prob,
        })
    }

    pub fn uniform(n_settings: usize) -> Self {
        TwoLevelDistribution {
            n_settings,
            peak_set: (0..n_settings).collect(),
            peak_prob: 1.0 / n_settings as f64,
            tail_prob: 0.0,
        }
    }

    pub fn peak_set(&self) -> &[usize] {
        &self.peak_set
    }

    pub fn peak_prob(&self) -> f64 {
        self.peak_prob
    }

    pub fn tail_prob(&self) -> f64 {
        self.tail_prob
    }

    pub fn probs(&self) -> Vec<f64> {
        let mut p = vec![self.tail_prob; self.n_settings];
        for &x in &self.peak_set {
            p[x] = self.peak_prob;
        }
        p
    }
}

/// Atoms of one party: every deterministic response combined with every
/// setting row of the two-level grid. Atom `i` is setting row
/// `i / n_responses` with response code `i % n_responses`.
#[derive(Debug, Clone)]
pub struct ExpandedAlphabet {
    party: Party,
    n_settings: usize,
    n_outcomes: usize,
    n_responses: usize,
    heights: usize,
    settings: Vec<TwoLevelDistribution>,
    rows: Vec<Vec<f64>>,
    min_entropy: Vec<f64>,
    log_peak: Vec<f64>,
}

impl ExpandedAlphabet {
    pub fn party(&self) -> Party {
        self.party
    }

    pub fn heights(&self) -> usize {
        self.heights
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn n_responses(&self) -> usize {
        self.n_responses
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len() * self.n_responses
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn settings(&self) -> &[TwoLevelDistribution] {
        &self.settings
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r]
    }

    /// `-log2` of the peak probability of row `r`.
    #[inline]
    pub fn row_entropy(&self, r: usize) -> f64 {
        self.min_entropy[r]
    }

    /// `log2` of the peak probability of row `r`.
    pub fn log_peak(&self, r: usize) -> f64 {
        self.log_peak[r]
    }

    #[inline]
    pub fn split(&self, atom: usize) -> (usize, usize) {
        (atom / self.n_responses, atom % self.n_responses)
    }

    pub fn response(&self, code: usize) -> ResponseFunction {
        ResponseFunction::from_code(code as u64, self.n_settings, self.n_outcomes)
    }

    pub fn atom(&self, atom: usize) -> (ResponseFunction, &TwoLevelDistribution) {
        let (r, code) = self.split(atom);
        (self.response(code), &self.settings[r])
    }

    pub fn atoms(&self) -> impl Iterator<Item = (ResponseFunction, &TwoLevelDistribution)> + '_ {
        (0..self.len()).map(move |i| self.atom(i))
    }
}

/// Builds the atoms of `party` with `heights` grid points per peak set,
/// geometrically spaced from `1/N` to `1/|S|`.
pub fn build_expanded_alphabet(
    g: &GameTable,
    party: Party,
    heights: usize,
) -> Result<ExpandedAlphabet, Error> {
    if heights < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 heights, got {heights}"
        )));
    }
    let (n, m) = (g.n_settings(party), g.n_outcomes(party));
    let n_responses = ResponseFunction::count(n, m);
    if n > MAX_SETTINGS || n_responses > MAX_RESPONSES {
        return Err(Error::Capacity {
            required: n_responses.max(1u128 << n.min(127)),
            cap: MAX_RESPONSES,
        });
    }
    let mut settings = vec![TwoLevelDistribution::uniform(n)];
    let mut rows = vec![settings[0].probs()];
    let base = 1.0 / n as f64;
    for mask in 1u32..(1 << n) {
        let peak: Vec<usize> = (0..n).filter(|&x| mask >> x & 1 == 1).collect();
        let k = peak.len();
        if k == n {
            continue;
        }
        for step in 1..heights {
            let h = if step == heights - 1 {
                1.0 / k as f64
            } else {
                base * libm::pow(n as f64 / k as f64, step as f64 / (heights - 1) as f64)
            };
            let dist = TwoLevelDistribution::new(n, peak.clone(), h)?;
            let p = dist.probs();
            let duplicate = rows.iter().any(|q| {
                q.iter()
                    .zip(&p)
                    .all(|(u, v)| (u - v).abs() <= NORMALIZATION_TOL)
            });
            if !duplicate {
                rows.push(p);
                settings.push(dist);
            }
        }
    }
    let min_entropy: Vec<f64> = rows.iter().map(|r| min_entropy_unchecked(r)).collect();
    let log_peak = min_entropy.iter().map(|h| -h).collect();
    Ok(ExpandedAlphabet {
        party,
        n_settings: n,
        n_outcomes: m,
        n_responses: n_responses as usize,
        heights,
        settings,
        rows,
        min_entropy,
        log_peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin_game;

    #[test]
    fn chsh_two_heights() {
        let g = builtin_game("chsh").unwrap();
        let alpha = build_expanded_alphabet(&g, Party::A, 2).unwrap();
        assert_eq!(alpha.len(), 12);
        assert_eq!(alpha.n_rows(), 3);
        for r in 0..alpha.n_rows() {
            let row = alpha.row(r);
            let uniform = row.iter().all(|&p| p == 0.5);
            let point = row.iter().filter(|&&p| p == 1.0).count() == 1;
            assert!(uniform || point, "{row:?}");
        }
    }

    #[test]
    fn i3322_counts() {
        // 14 proper peak sets, 3 non-uniform heights each, plus one uniform row.
        let g = builtin_game("i3322").unwrap();
        let alpha = build_expanded_alphabet(&g, Party::B, 4).unwrap();
        assert_eq!(alpha.n_rows(), 1 + 14 * 3);
        assert_eq!(alpha.len(), 16 * 43);
        assert!(alpha.len() <= 16 * 15 * 4);
        let alpha8 = build_expanded_alphabet(&g, Party::A, 8).unwrap();
        assert_eq!(alpha8.n_rows(), 99);
    }

    #[test]
    fn grid_is_geometric_between_endpoints() {
        let g = builtin_game("i3322").unwrap();
        let alpha = build_expanded_alphabet(&g, Party::A, 5).unwrap();
        let single: Vec<f64> = alpha
            .settings()
            .iter()
            .filter(|d| d.peak_set() == [2])
            .map(|d| d.peak_prob())
            .collect();
        assert_eq!(single.len(), 4);
        assert_eq!(*single.last().unwrap(), 1.0);
        let ratios: Vec<f64> = single.windows(2).map(|w| w[1] / w[0]).collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() < 1e-12);
        }
        assert!((single[0] / 0.25 - ratios[0]).abs() < 1e-12);
        for r in 0..alpha.n_rows() {
            assert!((alpha.log_peak(r) + alpha.row_entropy(r)).abs() == 0.0);
            let total: f64 = alpha.row(r).iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn atoms_decode() {
        let g = builtin_game("chsh").unwrap();
        let alpha = build_expanded_alphabet(&g, Party::A, 3).unwrap();
        let (f, d) = alpha.atom(6);
        assert_eq!(f.outputs(), &[1, 0]);
        assert_eq!(d, &alpha.settings()[1]);
        assert_eq!(alpha.atoms().count(), alpha.len());
    }

    #[test]
    fn parameter_errors() {
        let g = builtin_game("chsh").unwrap();
        assert!(matches!(
            build_expanded_alphabet(&g, Party::A, 1),
            Err(Error::Parameter(_))
        ));
        assert!(TwoLevelDistribution::new(3, vec![0], 0.2).is_err());
        assert!(TwoLevelDistribution::new(3, vec![], 0.5).is_err());
        assert!(TwoLevelDistribution::new(3, vec![3], 0.5).is_err());
        let d = TwoLevelDistribution::new(4, vec![1, 3], 0.4).unwrap();
        for (p, q) in d.probs().iter().zip([0.1, 0.4, 0.1, 0.4]) {
            assert!((p - q).abs() < 1e-15);
        }
    }
}
