//! Integer-program decoding.
//!
//! Binary variables `x[t][k]` select one state per token. The objective is
//! `sum x[t][k] * log p[t][k]`; constraints are one state per token, no
//! illegal first or last state, and `x[t][k] + x[t+1][j] <= 1` for every
//! illegal transition `(k, j)`. Solved exactly by branch and bound over the
//! LP relaxation. Branching fixes a variable to one (restricting the token
//! to that state) or to zero (removing the state).

use super::dp::constrained_decode_dp;
use super::legality::LegalityMatrix;
use super::posteriors::Posteriors;
use super::simplex::{LinearProgram, LpOutcome};

const INTEGRALITY_TOL: f64 = 1e-6;
const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpOptions {
    /// Seed the incumbent with the dynamic-programming optimum.
    pub warm_start: bool,
}

impl Default for IlpOptions {
    fn default() -> Self {
        Self { warm_start: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpSolution {
    pub labels: Vec<usize>,
    pub objective: f64,
    /// LP relaxations solved.
    pub nodes: usize,
}

/// Decodes with default options; equals [`constrained_decode_dp`].
pub fn ilp_decode(p: &Posteriors, legality: &LegalityMatrix) -> Option<Vec<usize>> {
    solve_ilp(p, legality, IlpOptions::default()).map(|s| s.labels)
}

pub fn solve_ilp(
    p: &Posteriors,
    legality: &LegalityMatrix,
    options: IlpOptions,
) -> Option<IlpSolution> {
    let t_len = p.len();
    let k = p.num_states();
    assert_eq!(
        k,
        legality.num_states(),
        "posteriors do not match the automaton"
    );
    if t_len == 0 {
        return Some(IlpSolution {
            labels: Vec::new(),
            objective: 0.0,
            nodes: 0,
        });
    }
    let mut root = vec![vec![true; k]; t_len];
    for s in 0..k {
        root[0][s] &= legality.can_start(s);
        root[t_len - 1][s] &= legality.can_end(s);
    }

    let mut incumbent: Option<(Vec<usize>, f64)> = None;
    if options.warm_start {
        {
            let path = constrained_decode_dp(p, legality)?;
            let score = p.path_score(&path);
            incumbent = Some((path, score));
        }
    }

    let mut nodes = 0;
    let mut stack = vec![root];
    while let Some(allowed) = stack.pop() {
        nodes += 1;
        let Some((lp, vars)) = relaxation(p, legality, &allowed) else {
            continue;
        };
        let LpOutcome::Optimal { x, value } = lp.solve() else {
            continue;
        };
        if let Some((_, best)) = &incumbent {
            if value <= best + BOUND_TOL {
                continue;
            }
        }
        let fractional = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > INTEGRALITY_TOL && **v < 1.0 - INTEGRALITY_TOL)
            .min_by(|a, b| (a.1 - 0.5).abs().total_cmp(&(b.1 - 0.5).abs()));
        match fractional {
            None => {
                let mut labels = vec![0; t_len];
                for (v, &(t, s)) in x.iter().zip(&vars) {
                    if *v > 0.5 {
                        labels[t] = s;
                    }
                }
                debug_assert!(legality.is_legal(&labels));
                let score = p.path_score(&labels);
                if incumbent.as_ref().is_none_or(|(_, best)| score > *best) {
                    incumbent = Some((labels, score));
                }
            }
            Some((i, _)) => {
                let (t, s) = vars[i];
                let mut without = allowed.clone();
                without[t][s] = false;
                let mut with = allowed;
                with[t]
                    .iter_mut()
                    .enumerate()
                    .for_each(|(j, a)| *a = j == s);
                stack.push(without);
                stack.push(with);
            }
        }
    }
    incumbent.map(|(labels, objective)| IlpSolution {
        labels,
        objective,
        nodes,
    })
}

/// Builds the LP relaxation over the allowed variables, or `None` if some
/// token has no allowed state left.
fn relaxation(
    p: &Posteriors,
    legality: &LegalityMatrix,
    allowed: &[Vec<bool>],
) -> Option<(LinearProgram, Vec<(usize, usize)>)> {
    let k = p.num_states();
    let mut index = vec![vec![usize::MAX; k]; allowed.len()];
    let mut vars = Vec::new();
    for (t, row) in allowed.iter().enumerate() {
        for (s, &ok) in row.iter().enumerate() {
            if ok {
                index[t][s] = vars.len();
                vars.push((t, s));
            }
        }
    }
    let mut lp = LinearProgram {
        num_vars: vars.len(),
        objective: vars.iter().map(|&(t, s)| p.log_prob(t, s)).collect(),
        ..Default::default()
    };
    for (t, row) in index.iter().enumerate() {
        let cols: Vec<(usize, f64)> = row
            .iter()
            .filter(|&&i| i != usize::MAX)
            .map(|&i| (i, 1.0))
            .collect();
        if cols.is_empty() {
            return None;
        }
        lp.eq.push((cols, 1.0));
        if t + 1 < index.len() {
            for a in 0..k {
                for b in 0..k {
                    let (ia, ib) = (row[a], index[t + 1][b]);
                    if ia != usize::MAX && ib != usize::MAX && !legality.allowed(a, b) {
                        lp.le.push((vec![(ia, 1.0), (ib, 1.0)], 1.0));
                    }
                }
            }
        }
    }
    Some((lp, vars))
}
