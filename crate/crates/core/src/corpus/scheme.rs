//! Label state inventories and their legality automata.
//!
//! Every scheme projects onto the five-state space `O, BE, IE, IP, BE_IP`.
//! Built-in schemes:
//!
//! * `five`: the projection target itself.
//! * `eight`: adds the repair states `C`, `C_IE`, `C_IP`.
//! * `extended`: `O` plus every non-`O` eight-state label split into a
//!   repetition (`R-`) and a non-repetition (`N-`) variant, 15 states.
//!
//! Custom inventories are loaded from text:
//!
//! ```text
//! name = custom
//! state O O
//! state R-BE BE rep
//! state N-C O repair other
//! # optional: start:/end:/trans: lines, otherwise projected from five states
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::sentence::EditKind;
use crate::decode::LegalityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FiveState {
    O = 0,
    BE = 1,
    IE = 2,
    IP = 3,
    BeIp = 4,
}

impl FiveState {
    pub const ALL: [FiveState; 5] = [
        FiveState::O,
        FiveState::BE,
        FiveState::IE,
        FiveState::IP,
        FiveState::BeIp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FiveState::O => "O",
            FiveState::BE => "BE",
            FiveState::IE => "IE",
            FiveState::IP => "IP",
            FiveState::BeIp => "BE_IP",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDef {
    pub name: String,
    pub five: FiveState,
    /// Marks a repair word (`C`-family).
    pub repair: bool,
    pub kind: Option<EditKind>,
}

impl StateDef {
    fn new(name: impl Into<String>, five: FiveState, repair: bool, kind: Option<EditKind>) -> Self {
        Self {
            name: name.into(),
            five,
            repair,
            kind,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid scheme: {0}")]
    Invalid(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScheme {
    name: String,
    states: Vec<StateDef>,
    legality: LegalityMatrix,
    projected: bool,
}

impl LabelScheme {
    /// Builds a scheme whose automaton is the projection of the five-state one.
    pub fn projected(name: impl Into<String>, states: Vec<StateDef>) -> Result<Self, SchemeError> {
        let to_five: Vec<usize> = states.iter().map(|s| s.five.index()).collect();
        let legality = LegalityMatrix::project(&LegalityMatrix::five(), &to_five);
        Self::with_legality(name, states, legality, true)
    }

    pub fn with_legality(
        name: impl Into<String>,
        states: Vec<StateDef>,
        legality: LegalityMatrix,
        projected: bool,
    ) -> Result<Self, SchemeError> {
        let scheme = Self {
            name: name.into(),
            states,
            legality,
            projected,
        };
        scheme.check()?;
        Ok(scheme)
    }

    fn check(&self) -> Result<(), SchemeError> {
        let invalid = |m: String| Err(SchemeError::Invalid(m));
        if self.legality.num_states() != self.states.len() {
            return invalid("legality table size does not match the state list".into());
        }
        if !self
            .states
            .iter()
            .any(|s| s.five == FiveState::O && !s.repair && s.kind.is_none())
        {
            return invalid("scheme has no plain `O` state".into());
        }
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].iter().any(|p| p.name == s.name) {
                return invalid(format!("duplicate state `{}`", s.name));
            }
            if s.name.is_empty() || s.name.chars().any(|c| c.is_whitespace() || c == ',') {
                return invalid(format!("bad state name `{}`", s.name));
            }
        }
        let useful = self.legality.useful_states();
        if let Some(i) = useful.iter().position(|u| !u) {
            return invalid(format!(
                "state `{}` is not on any legal path",
                self.states[i].name
            ));
        }
        Ok(())
    }

    pub fn five() -> Self {
        let states = FiveState::ALL
            .iter()
            .map(|&f| StateDef::new(f.name(), f, false, None))
            .collect();
        Self::projected("five", states).expect("built-in scheme")
    }

    pub fn eight() -> Self {
        Self::projected("eight", eight_states(None, "")).expect("built-in scheme")
    }

    /// 15 states: `O` plus repetition/other variants of the other seven.
    pub fn extended() -> Self {
        let mut states = vec![StateDef::new("O", FiveState::O, false, None)];
        for (kind, prefix) in [(EditKind::Repetition, "R-"), (EditKind::Other, "N-")] {
            states.extend(eight_states(Some(kind), prefix).into_iter().skip(1));
        }
        Self::projected("extended", states).expect("built-in scheme")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "five" | "5" => Some(Self::five()),
            "eight" | "8" => Some(Self::eight()),
            "extended" | "15" => Some(Self::extended()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[StateDef] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn legality(&self) -> &LegalityMatrix {
        &self.legality
    }

    /// True when the automaton is exactly the projection of the five-state one,
    /// so decoding can run in the collapsed space.
    pub fn is_projected(&self) -> bool {
        self.projected
    }

    pub fn state(&self, index: usize) -> &StateDef {
        &self.states[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn state_names(&self) -> Vec<String> {
        self.states.iter().map(|s| s.name.clone()).collect()
    }

    pub fn names<'a>(&'a self, labels: &[usize]) -> Vec<&'a str> {
        labels
            .iter()
            .map(|&l| self.states[l].name.as_str())
            .collect()
    }

    pub fn parse_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>, SchemeError> {
        labels
            .iter()
            .map(|l| {
                self.index_of(l.as_ref())
                    .ok_or_else(|| SchemeError::UnknownLabel(l.as_ref().to_string()))
            })
            .collect()
    }

    pub fn to_five(&self, state: usize) -> FiveState {
        self.states[state].five
    }

    pub fn to_five_map(&self) -> Vec<usize> {
        self.states.iter().map(|s| s.five.index()).collect()
    }

    /// Edit states are those whose five-state image is not `O`.
    pub fn is_edit(&self, state: usize) -> bool {
        self.states[state].five != FiveState::O
    }

    pub fn has_repair_states(&self) -> bool {
        self.states.iter().any(|s| s.repair)
    }

    /// Whether states carry repetition/other tags (needed for correction detection).
    pub fn is_typed(&self) -> bool {
        self.states.iter().any(|s| s.kind.is_some() && s.repair)
    }

    /// Finds the state for a token role, relaxing the repair flag and then
    /// the kind tag when the inventory cannot express them.
    pub fn lookup(&self, five: FiveState, repair: bool, kind: Option<EditKind>) -> Option<usize> {
        let kind = if five == FiveState::O && !repair {
            None
        } else {
            kind
        };
        let find = |r: bool, k: Option<EditKind>| {
            self.states
                .iter()
                .position(|s| s.five == five && s.repair == r && s.kind == k)
        };
        find(repair, kind)
            .or_else(|| find(false, kind))
            .or_else(|| find(repair, None))
            .or_else(|| find(false, None))
    }

    pub fn from_text(text: &str) -> Result<Self, SchemeError> {
        let mut name = None;
        let mut states = Vec::new();
        let mut automaton = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |message: String| SchemeError::Syntax { line, message };
            if let Some(rest) = content.strip_prefix("name") {
                let value = rest
                    .trim_start()
                    .strip_prefix('=')
                    .ok_or_else(|| syntax("expected `name = ...`".into()))?;
                name = Some(value.trim().to_string());
            } else if let Some(rest) = content.strip_prefix("state ") {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let (state_name, five) = match fields.as_slice() {
                    [n, f, ..] => (*n, *f),
                    _ => {
                        return Err(syntax(
                            "expected `state NAME FIVE [repair] [rep|other]`".into(),
                        ))
                    }
                };
                let five = FiveState::from_name(five)
                    .ok_or_else(|| syntax(format!("unknown five-state label `{five}`")))?;
                let mut repair = false;
                let mut kind = None;
                for flag in &fields[2..] {
                    match *flag {
                        "repair" => repair = true,
                        "rep" => kind = Some(EditKind::Repetition),
                        "other" => kind = Some(EditKind::Other),
                        f => return Err(syntax(format!("unknown state flag `{f}`"))),
                    }
                }
                states.push(StateDef::new(state_name, five, repair, kind));
            } else {
                automaton.push_str(content);
                automaton.push('\n');
            }
        }
        let name = name.unwrap_or_else(|| "custom".to_string());
        if automaton.is_empty() {
            Self::projected(name, states)
        } else {
            let names: Vec<String> = states.iter().map(|s| s.name.clone()).collect();
            let legality = LegalityMatrix::parse(&automaton, &names)?;
            let projected = legality
                == LegalityMatrix::project(
                    &LegalityMatrix::five(),
                    &states.iter().map(|s| s.five.index()).collect::<Vec<_>>(),
                );
            Self::with_legality(name, states, legality, projected)
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("name = {}\n", self.name);
        for s in &self.states {
            out.push_str(&format!("state {} {}", s.name, s.five.name()));
            if s.repair {
                out.push_str(" repair");
            }
            match s.kind {
                Some(EditKind::Repetition) => out.push_str(" rep"),
                Some(EditKind::Other) => out.push_str(" other"),
                None => {}
            }
            out.push('\n');
        }
        out.push_str(&self.legality.render(&self.state_names()));
        out
    }
}

fn eight_states(kind: Option<EditKind>, prefix: &str) -> Vec<StateDef> {
    let mut states: Vec<StateDef> = FiveState::ALL
        .iter()
        .map(|&f| StateDef::new(format!("{prefix}{}", f.name()), f, false, kind))
        .collect();
    states[0].kind = None;
    for (name, five) in [
        ("C", FiveState::O),
        ("C_IE", FiveState::IE),
        ("C_IP", FiveState::IP),
    ] {
        states.push(StateDef::new(format!("{prefix}{name}"), five, true, kind));
    }
    states
}
