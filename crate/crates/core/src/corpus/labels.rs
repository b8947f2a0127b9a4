use super::scheme::{FiveState, LabelScheme};
use super::sentence::{AnnotationError, EditKind, Sentence, SpanKind};

/// Assigns one state per token.
///
/// A token inside any reparandum is an edit word. It *begins* an edit
/// region when the previous token is outside every reparandum or closes one
/// (is the last word of some reparandum). Beginning and closing give
/// `BE_IP`, beginning only gives `BE`, closing only `IP`, neither `IE`.
/// Repair words map to `C`, or to `C_IE`/`C_IP` when they are also inside
/// a reparandum. Typed schemes tag edit states with the kind of the
/// innermost reparandum and repair states with the kind of their repair.
pub fn derive_labels(s: &Sentence, scheme: &LabelScheme) -> Result<Vec<usize>, AnnotationError> {
    s.validate()?;
    let n = s.len();
    let mut in_edit = vec![false; n];
    let mut closes = vec![false; n];
    let mut repair_kind: Vec<Option<EditKind>> = vec![None; n];
    for span in &s.spans {
        for t in span.reparandum.clone() {
            in_edit[t] = true;
        }
        closes[span.reparandum.end - 1] = true;
        let kind = span.kind.edit_kind();
        for t in span.repair.clone() {
            repair_kind[t] = Some(match repair_kind[t] {
                Some(EditKind::Other) => EditKind::Other,
                _ => kind,
            });
        }
    }

    let unexpressible = |role: String| AnnotationError::Unexpressible {
        scheme: scheme.name().to_string(),
        role,
    };
    let mut labels = Vec::with_capacity(n);
    for t in 0..n {
        let five = if in_edit[t] {
            let begins = t == 0 || !in_edit[t - 1] || closes[t - 1];
            match (begins, closes[t]) {
                (true, true) => FiveState::BeIp,
                (true, false) => FiveState::BE,
                (false, true) => FiveState::IP,
                (false, false) => FiveState::IE,
            }
        } else {
            FiveState::O
        };
        let edit_kind = s.innermost_reparandum(t).map(|sp| sp.kind.edit_kind());
        let state = match repair_kind[t] {
            Some(rk) => scheme
                .states()
                .iter()
                .position(|d| {
                    d.five == five && d.repair && (d.kind == Some(rk) || !scheme.is_typed())
                })
                .or_else(|| scheme.lookup(five, false, edit_kind)),
            None => scheme.lookup(five, false, edit_kind),
        };
        labels.push(state.ok_or_else(|| unexpressible(format!("{} at token {t}", five.name())))?);
    }
    Ok(labels)
}

/// Element-wise projection onto the five-state space. Returned indices are
/// positions in [`LabelScheme::five`].
pub fn collapse_labels(labels: &[usize], from: &LabelScheme) -> Vec<usize> {
    labels.iter().map(|&l| from.to_five(l).index()).collect()
}

/// Gold correction words: repair tokens of correction spans.
pub fn gold_correction_words(s: &Sentence) -> Vec<usize> {
    let mut out: Vec<usize> = s
        .spans
        .iter()
        .filter(|sp| sp.kind == SpanKind::Correction)
        .flat_map(|sp| sp.repair.clone())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_annotated_line;

    fn labels(line: &str, scheme: &LabelScheme) -> Vec<String> {
        let s = parse_annotated_line(line).unwrap();
        let l = derive_labels(&s, scheme).unwrap();
        assert!(scheme.legality().is_legal(&l));
        scheme.names(&l).into_iter().map(String::from).collect()
    }

    #[test]
    fn restart_is_one_word_edit() {
        assert_eq!(
            labels("[ by + ] it was attached", &LabelScheme::five()),
            ["BE_IP", "O", "O", "O"]
        );
    }

    #[test]
    fn eight_state_marks_repair() {
        assert_eq!(
            labels("[ I just + I ] enjoy", &LabelScheme::eight()),
            ["BE", "IP", "C", "O"]
        );
    }

    #[test]
    fn flattened_repetition_chain() {
        assert_eq!(
            labels("[S the + th- + the ] decision", &LabelScheme::five()),
            ["BE_IP", "BE_IP", "O", "O"]
        );
        assert_eq!(
            labels("[S the + th- + the ] decision", &LabelScheme::eight()),
            ["BE_IP", "BE_IP", "C", "O"]
        );
    }

    #[test]
    fn interregnum_is_outside() {
        assert_eq!(
            labels("[S it's + {uh} it's ] almost like", &LabelScheme::five()),
            ["BE_IP", "O", "O", "O", "O"]
        );
    }

    #[test]
    fn nested_repair_inside_reparandum_gets_c_states() {
        // inner repair "b c" lies inside the outer reparandum
        let got = labels("[ x [ a + b c ] + z ] w", &LabelScheme::eight());
        let five = labels("[ x [ a + b c ] + z ] w", &LabelScheme::five());
        assert_eq!(five, ["BE", "IP", "BE", "IP", "O", "O"]);
        assert_eq!(got, ["BE", "IP", "BE", "C_IP", "C", "O"]);
    }

    #[test]
    fn extended_scheme_tags_kinds() {
        assert_eq!(
            labels(
                "[S it's + it's ] [ we + you'd ] have",
                &LabelScheme::extended()
            ),
            ["R-BE_IP", "R-C", "N-BE_IP", "N-C", "O"]
        );
    }

    #[test]
    fn collapse_eight_to_five() {
        let eight = LabelScheme::eight();
        let five = LabelScheme::five();
        let l = eight.parse_labels(&["BE", "IP", "C", "O"]).unwrap();
        assert_eq!(
            five.names(&collapse_labels(&l, &eight)),
            ["BE", "IP", "O", "O"]
        );
        let l = eight.parse_labels(&["BE", "C_IE", "C_IP", "O"]).unwrap();
        assert_eq!(
            five.names(&collapse_labels(&l, &eight)),
            ["BE", "IE", "IP", "O"]
        );
        assert_eq!(collapse_labels(&[0, 0, 0], &five), [0, 0, 0]);
    }

    #[test]
    fn gold_corrections_are_repair_words() {
        let s = parse_annotated_line("[ I just + I ] enjoy").unwrap();
        assert_eq!(gold_correction_words(&s), [2]);
        let s = parse_annotated_line("[S it's + it's ] fine").unwrap();
        assert!(gold_correction_words(&s).is_empty());
    }
}
