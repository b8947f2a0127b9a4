use serde::{Deserialize, Serialize};

use crate::corpus::LabelScheme;

/// Floor applied before taking logs so saturated softmax outputs stay finite.
pub const PROB_FLOOR: f64 = 1e-12;

/// Row-major `T x K` matrix of per-token state distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posteriors {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Posteriors {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "posterior data has the wrong length"
        );
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn num_states(&self) -> usize {
        self.cols
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.cols..(t + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn log_prob(&self, t: usize, k: usize) -> f64 {
        self.row(t)[k].max(PROB_FLOOR).ln()
    }

    /// Sum of floored log-probabilities along a label path.
    pub fn path_score(&self, labels: &[usize]) -> f64 {
        labels
            .iter()
            .enumerate()
            .map(|(t, &k)| self.log_prob(t, k))
            .sum()
    }

    /// Largest deviation of a row sum from one.
    pub fn max_row_error(&self) -> f64 {
        (0..self.rows)
            .map(|t| (self.row(t).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Sums each five-state image's preimage probabilities (`O <- O + C`,
/// `IE <- IE + C_IE`, `IP <- IP + C_IP` for the eight-state scheme).
pub fn collapse_posteriors(p: &Posteriors, from: &LabelScheme) -> Posteriors {
    assert_eq!(
        p.num_states(),
        from.num_states(),
        "posteriors do not match the scheme"
    );
    let map = from.to_five_map();
    let mut data = vec![0.0; p.len() * 5];
    for t in 0..p.len() {
        for (k, &v) in p.row(t).iter().enumerate() {
            data[t * 5 + map[k]] += v;
        }
    }
    Posteriors::new(p.len(), 5, data)
}

/// Per-token argmax; ties go to the earlier state.
pub fn argmax_decode(p: &Posteriors) -> Vec<usize> {
    (0..p.len())
        .map(|t| {
            let row = p.row(t);
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_state_collapse_example() {
        let p = Posteriors::from_rows(&[vec![0.2, 0.1, 0.1, 0.1, 0.1, 0.3, 0.05, 0.05]]);
        let q = collapse_posteriors(&p, &LabelScheme::eight());
        let want = [0.5, 0.1, 0.15, 0.15, 0.1];
        for (a, b) in q.row(0).iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn one_hot_c_collapses_to_o() {
        let mut row = vec![0.0; 8];
        row[5] = 1.0;
        let q = collapse_posteriors(&Posteriors::from_rows(&[row]), &LabelScheme::eight());
        assert_eq!(q.row(0), [1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn five_state_collapse_is_identity() {
        let p = Posteriors::from_rows(&[vec![0.1, 0.2, 0.3, 0.15, 0.25]]);
        assert_eq!(collapse_posteriors(&p, &LabelScheme::five()), p);
    }

    #[test]
    fn argmax_ties_and_failure_case() {
        let p = Posteriors::from_rows(&[vec![0.4, 0.4, 0.2, 0.0, 0.0]]);
        assert_eq!(argmax_decode(&p), [0]);
        let peaked = |k: usize| {
            let mut r = vec![0.05; 5];
            r[k] = 0.8;
            r
        };
        let p = Posteriors::from_rows(&[peaked(0), peaked(2), peaked(2), peaked(3)]);
        assert_eq!(argmax_decode(&p), [0, 2, 2, 3]);
    }
}
