//! Start/transition/end constraints over a label inventory.
//!
//! Tables can be written as text:
//!
//! ```text
//! start: O, BE, BE_IP
//! end: O, IP, BE_IP
//! trans: O -> O, BE, BE_IP
//! trans: BE -> IE, IP
//! ```

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::corpus::SchemeError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalityMatrix {
    n: usize,
    start: Vec<bool>,
    end: Vec<bool>,
    /// Row-major `n x n`; `allowed[from * n + to]`.
    allowed: Vec<bool>,
}

impl LegalityMatrix {
    /// A matrix that forbids everything.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            start: vec![false; n],
            end: vec![false; n],
            allowed: vec![false; n * n],
        }
    }

    /// The five-state automaton over `O, BE, IE, IP, BE_IP` (in that order).
    pub fn five() -> Self {
        use crate::corpus::FiveState::*;
        let mut m = Self::empty(5);
        for s in [O, BE, BeIp] {
            m.start[s as usize] = true;
        }
        for s in [O, IP, BeIp] {
            m.end[s as usize] = true;
        }
        let opens = [O, BE, BeIp];
        for from in [O, IP, BeIp] {
            for to in opens {
                m.allow(from as usize, to as usize);
            }
        }
        for from in [BE, IE] {
            m.allow(from as usize, IE as usize);
            m.allow(from as usize, IP as usize);
        }
        m
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn allow(&mut self, from: usize, to: usize) {
        self.allowed[from * self.n + to] = true;
    }

    pub fn set_start(&mut self, state: usize, legal: bool) {
        self.start[state] = legal;
    }

    pub fn set_end(&mut self, state: usize, legal: bool) {
        self.end[state] = legal;
    }

    pub fn can_start(&self, state: usize) -> bool {
        self.start[state]
    }

    pub fn can_end(&self, state: usize) -> bool {
        self.end[state]
    }

    pub fn allowed(&self, from: usize, to: usize) -> bool {
        self.allowed[from * self.n + to]
    }

    /// Lifts a matrix through a state projection: `(a, b)` is legal iff
    /// `(project[a], project[b])` is legal in `base`.
    pub fn project(base: &LegalityMatrix, project: &[usize]) -> Self {
        let n = project.len();
        let mut m = Self::empty(n);
        for a in 0..n {
            m.start[a] = base.can_start(project[a]);
            m.end[a] = base.can_end(project[a]);
            for b in 0..n {
                m.allowed[a * n + b] = base.allowed(project[a], project[b]);
            }
        }
        m
    }

    pub fn is_legal(&self, labels: &[usize]) -> bool {
        match (labels.first(), labels.last()) {
            (None, _) => true,
            (Some(&first), Some(&last)) => {
                self.can_start(first)
                    && self.can_end(last)
                    && labels.windows(2).all(|w| self.allowed(w[0], w[1]))
            }
            _ => unreachable!(),
        }
    }

    /// States that lie on at least one complete legal path.
    pub fn useful_states(&self) -> Vec<bool> {
        let forward = self.closure(|s| self.start[s], |a, b| self.allowed(a, b));
        let backward = self.closure(|s| self.end[s], |a, b| self.allowed(b, a));
        forward
            .iter()
            .zip(&backward)
            .map(|(f, b)| *f && *b)
            .collect()
    }

    fn closure(
        &self,
        seed: impl Fn(usize) -> bool,
        edge: impl Fn(usize, usize) -> bool,
    ) -> Vec<bool> {
        let mut seen: Vec<bool> = (0..self.n).map(&seed).collect();
        let mut queue: VecDeque<usize> = (0..self.n).filter(|&s| seen[s]).collect();
        while let Some(a) = queue.pop_front() {
            for b in 0..self.n {
                if !seen[b] && edge(a, b) {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        seen
    }

    /// Parses the text table format. `names` gives the state inventory.
    pub fn parse(text: &str, names: &[String]) -> Result<Self, SchemeError> {
        let mut m = Self::empty(names.len());
        let index = |name: &str, line: usize| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| SchemeError::Syntax {
                    line,
                    message: format!("unknown state `{name}`"),
                })
        };
        let list = |rest: &str, line: usize| -> Result<Vec<usize>, SchemeError> {
            rest.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| index(s, line))
                .collect()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, rest)) = content.split_once(':') else {
                return Err(SchemeError::Syntax {
                    line,
                    message: format!("expected `key: value`, got `{content}`"),
                });
            };
            match key.trim() {
                "start" => list(rest, line)?
                    .into_iter()
                    .for_each(|s| m.start[s] = true),
                "end" => list(rest, line)?.into_iter().for_each(|s| m.end[s] = true),
                "trans" => {
                    let Some((from, to)) = rest.split_once("->") else {
                        return Err(SchemeError::Syntax {
                            line,
                            message: "expected `trans: FROM -> TO[,TO...]`".into(),
                        });
                    };
                    let from = index(from.trim(), line)?;
                    for to in list(to, line)? {
                        m.allow(from, to);
                    }
                }
                other => {
                    return Err(SchemeError::Syntax {
                        line,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Ok(m)
    }

    /// Renders the table in the text format accepted by [`LegalityMatrix::parse`].
    pub fn render(&self, names: &[String]) -> String {
        let pick = |flags: &[bool]| {
            flags
                .iter()
                .enumerate()
                .filter(|(_, f)| **f)
                .map(|(i, _)| names[i].as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = format!("start: {}\nend: {}\n", pick(&self.start), pick(&self.end));
        for from in 0..self.n {
            let row = &self.allowed[from * self.n..(from + 1) * self.n];
            if row.iter().any(|a| *a) {
                out.push_str(&format!("trans: {} -> {}\n", names[from], pick(row)));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_names() -> Vec<String> {
        ["O", "BE", "IE", "IP", "BE_IP"].map(String::from).to_vec()
    }

    fn seq(labels: &str) -> Vec<usize> {
        let names = five_names();
        labels
            .split_whitespace()
            .map(|l| names.iter().position(|n| n == l).unwrap())
            .collect()
    }

    #[test]
    fn five_state_legality_examples() {
        let m = LegalityMatrix::five();
        assert!(!m.is_legal(&seq("O IE IE IP")));
        assert!(m.is_legal(&seq("BE IE IP O")));
        assert!(m.is_legal(&seq("O")));
        assert!(!m.is_legal(&seq("BE")));
        assert!(m.is_legal(&seq("BE_IP BE_IP O O")));
        assert!(!m.is_legal(&seq("BE O")));
    }

    #[test]
    fn text_format_round_trips() {
        let m = LegalityMatrix::five();
        let text = m.render(&five_names());
        assert_eq!(LegalityMatrix::parse(&text, &five_names()).unwrap(), m);
    }

    #[test]
    fn parse_reports_unknown_states() {
        let err = LegalityMatrix::parse("start: O\ntrans: O -> XX\n", &five_names()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn every_five_state_is_useful() {
        assert!(LegalityMatrix::five().useful_states().iter().all(|u| *u));
    }
}
