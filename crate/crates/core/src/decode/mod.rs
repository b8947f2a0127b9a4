//! Turning posteriors into label sequences.

mod dp;
mod ilp;
mod legality;
mod posteriors;
mod simplex;

use std::str::FromStr;

pub use dp::constrained_decode_dp;
pub use ilp::{ilp_decode, solve_ilp, IlpOptions, IlpSolution};
pub use legality::LegalityMatrix;
pub use posteriors::{argmax_decode, collapse_posteriors, Posteriors, PROB_FLOOR};
pub use simplex::{LinearProgram, LpOutcome};

use crate::corpus::LabelScheme;

pub fn is_legal(labels: &[usize], legality: &LegalityMatrix) -> bool {
    legality.is_legal(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeMethod {
    Argmax,
    Dp,
    Ilp,
}

impl FromStr for DecodeMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "argmax" => Ok(Self::Argmax),
            "dp" => Ok(Self::Dp),
            "ilp" => Ok(Self::Ilp),
            other => Err(format!(
                "unknown decoder `{other}` (expected argmax, dp or ilp)"
            )),
        }
    }
}

impl std::fmt::Display for DecodeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Argmax => "argmax",
            Self::Dp => "dp",
            Self::Ilp => "ilp",
        })
    }
}

/// Decodes scheme posteriors into scheme labels.
///
/// `Argmax` works directly in the scheme's state space. The constrained
/// decoders collapse to five states, solve there and lift each token back
/// to its most probable preimage state, so the five-state image of the
/// result is the constrained optimum. Schemes whose automaton is not a
/// five-state projection are decoded directly against their own automaton.
pub fn decode(p: &Posteriors, scheme: &LabelScheme, method: DecodeMethod) -> Vec<usize> {
    let solve = |q: &Posteriors, legality: &LegalityMatrix| match method {
        DecodeMethod::Argmax => unreachable!(),
        DecodeMethod::Dp => constrained_decode_dp(q, legality),
        DecodeMethod::Ilp => ilp_decode(q, legality),
    };
    match method {
        DecodeMethod::Argmax => argmax_decode(p),
        _ if scheme.is_projected() && covers_five(scheme) => {
            let q = collapse_posteriors(p, scheme);
            let five = solve(&q, &LegalityMatrix::five()).expect("the all-O path is always legal");
            lift(p, scheme, &five)
        }
        _ => solve(p, scheme.legality()).unwrap_or_else(|| argmax_decode(p)),
    }
}

fn covers_five(scheme: &LabelScheme) -> bool {
    (0..5).all(|f| (0..scheme.num_states()).any(|s| scheme.to_five(s).index() == f))
}

fn lift(p: &Posteriors, scheme: &LabelScheme, five: &[usize]) -> Vec<usize> {
    five.iter()
        .enumerate()
        .map(|(t, &f)| {
            let row = p.row(t);
            (0..scheme.num_states())
                .filter(|&s| scheme.to_five(s).index() == f)
                .fold(None, |best: Option<usize>, s| match best {
                    Some(b) if row[b] >= row[s] => Some(b),
                    _ => Some(s),
                })
                .expect("every five-state label has a preimage")
        })
        .collect()
}
