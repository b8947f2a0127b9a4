use super::legality::LegalityMatrix;
use super::posteriors::Posteriors;

/// Exact maximum of the summed log-probability over legal label paths.
///
/// Suffix values are computed right to left; the path is then read off left
/// to right taking the smallest optimal state at each step, which yields the
/// lexicographically smallest optimal path. Returns `None` when the
/// automaton admits no path of this length.
pub fn constrained_decode_dp(p: &Posteriors, legality: &LegalityMatrix) -> Option<Vec<usize>> {
    let t_len = p.len();
    let k = p.num_states();
    assert_eq!(
        k,
        legality.num_states(),
        "posteriors do not match the automaton"
    );
    if t_len == 0 {
        return Some(Vec::new());
    }
    let mut value = vec![f64::NEG_INFINITY; t_len * k];
    for s in 0..k {
        if legality.can_end(s) {
            value[(t_len - 1) * k + s] = p.log_prob(t_len - 1, s);
        }
    }
    for t in (0..t_len - 1).rev() {
        for s in 0..k {
            let best = (0..k)
                .filter(|&j| legality.allowed(s, j))
                .map(|j| value[(t + 1) * k + j])
                .fold(f64::NEG_INFINITY, f64::max);
            if best > f64::NEG_INFINITY {
                value[t * k + s] = p.log_prob(t, s) + best;
            }
        }
    }
    let pick = |candidates: &mut dyn Iterator<Item = usize>, t: usize| -> Option<usize> {
        let mut best: Option<usize> = None;
        for s in candidates {
            let v = value[t * k + s];
            if v > f64::NEG_INFINITY && best.is_none_or(|b| v > value[t * k + b]) {
                best = Some(s);
            }
        }
        best
    };
    let mut path = Vec::with_capacity(t_len);
    let mut prev = pick(&mut (0..k).filter(|&s| legality.can_start(s)), 0)?;
    path.push(prev);
    for t in 1..t_len {
        prev = pick(&mut (0..k).filter(|&j| legality.allowed(prev, j)), t)?;
        path.push(prev);
    }
    Some(path)
}
