//! Bracket annotation grammar.
//!
//! ```text
//! [ I/PRP just/RB + I/PRP ] enjoy/VBP working/VBG
//! [S it's + {uh} it's ] almost like
//! [S the + th- + the ] decision
//! ```
//!
//! `[` or `[S` opens a disfluency, `+` marks the interruption point, `{...}`
//! directly after a `+` holds the interregnum and `]` closes. Plain brackets
//! take exactly one `+`; `[S` chains may take several, each segment before a
//! `+` being the reparandum of the next. Brackets nest. POS tags are written
//! inline as `word/POS`.
//!
//! A full `.dis` line may carry tab-separated fields: `annotation`,
//! `id<TAB>annotation` or `id<TAB>annotation<TAB>POS POS ...`.

use thiserror::Error;

use super::sentence::{AnnotationError, DisfluencySpan, Sentence, NO_POS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

fn syntax<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax {
        offset,
        message: message.into(),
    })
}

#[derive(Debug)]
enum Lexeme {
    Open { marked: bool },
    Plus,
    Close,
    LBrace,
    RBrace,
    Word { surface: String, pos: String },
}

fn lex(text: &str, base: usize) -> Result<Vec<(usize, Lexeme)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut end = start;
        while let Some(&(i, c)) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            end = i + c.len_utf8();
            chars.next();
        }
        let offset = base + text[..start].chars().count();
        lex_chunk(&text[start..end], offset, &mut out)?;
    }
    Ok(out)
}

fn lex_chunk(chunk: &str, offset: usize, out: &mut Vec<(usize, Lexeme)>) -> Result<(), ParseError> {
    match chunk {
        "[" => out.push((offset, Lexeme::Open { marked: false })),
        "[S" => out.push((offset, Lexeme::Open { marked: true })),
        "+" => out.push((offset, Lexeme::Plus)),
        "]" => out.push((offset, Lexeme::Close)),
        "{" => out.push((offset, Lexeme::LBrace)),
        "}" => out.push((offset, Lexeme::RBrace)),
        _ if chunk.starts_with('{') => {
            out.push((offset, Lexeme::LBrace));
            lex_chunk(&chunk[1..], offset + 1, out)?;
        }
        _ if chunk.ends_with('}') => {
            let word = &chunk[..chunk.len() - 1];
            lex_chunk(word, offset, out)?;
            out.push((offset + word.chars().count(), Lexeme::RBrace));
        }
        _ => {
            if let Some(i) = chunk.find(['[', ']', '{', '}']) {
                return syntax(
                    offset + chunk[..i].chars().count(),
                    format!("stray bracket in `{chunk}`"),
                );
            }
            let (surface, pos) = match chunk.rsplit_once('/') {
                Some((w, p)) if !w.is_empty() && !p.is_empty() => (w, p),
                _ => (chunk, ""),
            };
            out.push((
                offset,
                Lexeme::Word {
                    surface: surface.to_string(),
                    pos: pos.to_string(),
                },
            ));
        }
    }
    Ok(())
}

struct Frame {
    offset: usize,
    marked: bool,
    start: usize,
    plus: Vec<(usize, usize)>,
    interregna: Vec<std::ops::Range<usize>>,
    /// No word or bracket seen since the last `+`.
    after_plus: bool,
}

type TaggedWord = (String, String);

/// Parses the annotation field of a line into words and spans.
fn parse_structure(
    text: &str,
    base: usize,
) -> Result<(Vec<TaggedWord>, Vec<DisfluencySpan>), ParseError> {
    let mut words = Vec::new();
    let mut spans = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut brace: Option<(usize, usize)> = None;

    for (offset, lexeme) in lex(text, base)? {
        if brace.is_some() && !matches!(lexeme, Lexeme::Word { .. } | Lexeme::RBrace) {
            return syntax(offset, "only words may appear inside an interregnum");
        }
        match lexeme {
            Lexeme::Word { surface, pos } => {
                words.push((surface, pos));
                if brace.is_none() {
                    if let Some(f) = stack.last_mut() {
                        f.after_plus = false;
                    }
                }
            }
            Lexeme::Open { marked } => {
                if let Some(f) = stack.last_mut() {
                    f.after_plus = false;
                }
                stack.push(Frame {
                    offset,
                    marked,
                    start: words.len(),
                    plus: Vec::new(),
                    interregna: Vec::new(),
                    after_plus: false,
                });
            }
            Lexeme::Plus => {
                let Some(f) = stack.last_mut() else {
                    return syntax(offset, "`+` outside a bracket");
                };
                if !f.marked && !f.plus.is_empty() {
                    return syntax(offset, "plain bracket with more than one `+`");
                }
                f.plus.push((words.len(), offset));
                f.interregna.push(words.len()..words.len());
                f.after_plus = true;
            }
            Lexeme::LBrace => {
                let Some(f) = stack.last() else {
                    return syntax(offset, "interregnum outside a bracket");
                };
                if !f.after_plus {
                    return syntax(offset, "interregnum must directly follow `+`");
                }
                brace = Some((words.len(), offset));
            }
            Lexeme::RBrace => {
                let Some((start, _)) = brace.take() else {
                    return syntax(offset, "unmatched `}`");
                };
                let f = stack.last_mut().expect("brace opened inside a frame");
                *f.interregna.last_mut().expect("brace follows `+`") = start..words.len();
                f.after_plus = false;
            }
            Lexeme::Close => {
                let Some(f) = stack.pop() else {
                    return syntax(offset, "unmatched `]`");
                };
                if f.plus.is_empty() {
                    return syntax(offset, "bracket without `+`");
                }
                let mut seg_start = f.start;
                for (i, &(ip, plus_offset)) in f.plus.iter().enumerate() {
                    let interregnum = f.interregna[i].clone();
                    let repair_end = f.plus.get(i + 1).map_or(words.len(), |p| p.0);
                    if seg_start == ip {
                        return syntax(plus_offset, "empty reparandum before `+`");
                    }
                    let mut span = DisfluencySpan::new(
                        seg_start..ip,
                        interregnum.clone(),
                        interregnum.end..repair_end,
                        f.marked,
                    );
                    span.chained = i > 0;
                    spans.push(span);
                    seg_start = interregnum.end;
                }
                if let Some(parent) = stack.last_mut() {
                    parent.after_plus = false;
                }
            }
        }
    }
    if let Some((_, offset)) = brace {
        return syntax(offset, "unclosed `{`");
    }
    if let Some(f) = stack.last() {
        return syntax(f.offset, "unclosed `[`");
    }
    Ok((words, spans))
}

/// Parses one `.dis` line (see module docs for the field layout).
pub fn parse_annotated_line(line: &str) -> Result<Sentence, ParseError> {
    let line = line.trim_end_matches(['\n', '\r']);
    let fields: Vec<&str> = line.split('\t').collect();
    let (id, annotation, pos_field, base) = match fields.as_slice() {
        [a] => ("", *a, None, 0),
        [id, a] => (*id, *a, None, id.chars().count() + 1),
        [id, a, p] => (*id, *a, Some(*p), id.chars().count() + 1),
        _ => return syntax(0, "too many tab-separated fields"),
    };
    let (mut words, spans) = parse_structure(annotation, base)?;
    if let Some(p) = pos_field {
        let tags: Vec<&str> = p.split_whitespace().collect();
        if tags.len() != words.len() {
            return syntax(
                base + annotation.chars().count() + 1,
                format!("{} POS tags for {} words", tags.len(), words.len()),
            );
        }
        for (w, t) in words.iter_mut().zip(tags) {
            w.1 = t.to_string();
        }
    }
    Ok(Sentence::new(id.trim(), words, spans)?)
}

struct Group {
    spans: Vec<usize>,
    start: usize,
    end: usize,
    reparandum_len: usize,
}

/// Renders the annotation field in canonical whitespace.
pub fn render(s: &Sentence) -> String {
    let spans = &s.spans;
    let mut groups = Vec::new();
    for (i, first) in spans.iter().enumerate() {
        if first.chained {
            continue;
        }
        let mut chain = vec![i];
        loop {
            let last = &spans[*chain.last().unwrap()];
            match spans.iter().position(|sp| {
                sp.chained && sp.marked && sp.reparandum == last.repair && !last.repair.is_empty()
            }) {
                Some(j) if !chain.contains(&j) => chain.push(j),
                _ => break,
            }
        }
        let end = spans[*chain.last().unwrap()].end();
        groups.push(Group {
            start: first.reparandum.start,
            end,
            reparandum_len: first.reparandum.len(),
            spans: chain,
        });
    }
    let mut used = vec![false; groups.len()];
    let mut out = Vec::new();
    render_range(s, &groups, &mut used, 0, s.len(), &mut out);
    out.join(" ")
}

fn render_range(
    s: &Sentence,
    groups: &[Group],
    used: &mut [bool],
    lo: usize,
    hi: usize,
    out: &mut Vec<String>,
) {
    let mut p = lo;
    while p < hi {
        let next = groups
            .iter()
            .enumerate()
            .filter(|(g, gr)| !used[*g] && gr.start == p && gr.end <= hi)
            .max_by_key(|(g, gr)| (gr.end, gr.reparandum_len, std::cmp::Reverse(*g)))
            .map(|(g, _)| g);
        let Some(g) = next else {
            out.push(word(s, p));
            p += 1;
            continue;
        };
        used[g] = true;
        let group = &groups[g];
        let first = &s.spans[group.spans[0]];
        out.push(if first.marked { "[S" } else { "[" }.to_string());
        render_range(
            s,
            groups,
            used,
            first.reparandum.start,
            first.reparandum.end,
            out,
        );
        for &i in &group.spans {
            let span = &s.spans[i];
            out.push("+".to_string());
            let inter = span.interregnum.clone();
            for t in inter.clone() {
                let mut w = word(s, t);
                if t == inter.start {
                    w.insert(0, '{');
                }
                if t + 1 == inter.end {
                    w.push('}');
                }
                out.push(w);
            }
            render_range(s, groups, used, span.repair.start, span.repair.end, out);
        }
        out.push("]".to_string());
        p = group.end;
    }
}

fn word(s: &Sentence, t: usize) -> String {
    let tok = &s.tokens[t];
    if tok.pos == NO_POS {
        tok.surface.clone()
    } else {
        format!("{}/{}", tok.surface, tok.pos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SpanKind;

    pub const ANNOTATED_EXAMPLES: [&str; 7] = [
        "[ I just + I ] enjoy working",
        "[ we + you'd ] have to just",
        "[ we want + {well} in our area we want ] to",
        "[S it's + {uh} it's ] almost like",
        "[S the + th- + the ] decision was",
        "[ by + ] it was attached to",
        "[ we would like + ] let's go to the",
    ];

    #[test]
    fn restart_example() {
        let s = parse_annotated_line("[ by + ] it was attached to").unwrap();
        assert_eq!(s.spans.len(), 1);
        let sp = &s.spans[0];
        assert_eq!((sp.reparandum.clone(), sp.repair.clone()), (0..1, 1..1));
        assert_eq!(sp.kind, SpanKind::Restart);
    }

    #[test]
    fn repetition_with_interregnum() {
        let s = parse_annotated_line("[S it's + {uh} it's ] almost like").unwrap();
        let sp = &s.spans[0];
        assert_eq!(
            (
                sp.reparandum.clone(),
                sp.interregnum.clone(),
                sp.repair.clone()
            ),
            (0..1, 1..2, 2..3)
        );
        assert_eq!(sp.kind, SpanKind::Repetition);
        assert!(s.tokens[1].is_filled_pause);
    }

    #[test]
    fn plain_sentence() {
        let s = parse_annotated_line("hello world").unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.spans.is_empty());
    }

    #[test]
    fn flattened_chain_decomposes_left_to_right() {
        let s = parse_annotated_line("[S the + th- + the ] decision").unwrap();
        assert_eq!(s.spans.len(), 2);
        assert_eq!(
            (s.spans[0].reparandum.clone(), s.spans[0].repair.clone()),
            (0..1, 1..2)
        );
        assert_eq!(
            (s.spans[1].reparandum.clone(), s.spans[1].repair.clone()),
            (1..2, 2..3)
        );
        assert!(s.spans[1].chained);
    }

    #[test]
    fn table_one_round_trips() {
        for line in ANNOTATED_EXAMPLES {
            let s = parse_annotated_line(line).unwrap();
            assert_eq!(render(&s), line);
        }
    }

    #[test]
    fn nested_and_tagged_round_trip() {
        for line in [
            "[ [ a + b ] + c ] d",
            "[ x [ a + b c ] + z ] w",
            "[ [ a + b ] + ] c",
            "[S a + [ b + ] ] c",
            "[ I/PRP just/RB + {uh/UH you/PRP know/VBP} I/PRP ] enjoy/VBP",
        ] {
            let s = parse_annotated_line(line).unwrap();
            assert_eq!(render(&s), line);
            assert_eq!(parse_annotated_line(&render(&s)).unwrap(), s);
        }
    }

    #[test]
    fn pos_and_id_fields() {
        let s = parse_annotated_line("utt1\t[ I + we ] go\tPRP PRP VBP").unwrap();
        assert_eq!(s.id, "utt1");
        assert_eq!(s.tokens[1].pos, "PRP");
        let s = parse_annotated_line("[ I/PRP + we/PRP ] go/VBP").unwrap();
        assert_eq!(s.tokens[2].pos, "VBP");
    }

    fn err_offset(line: &str) -> usize {
        match parse_annotated_line(line).unwrap_err() {
            ParseError::Syntax { offset, .. } => offset,
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn errors_name_offsets() {
        assert_eq!(err_offset("[ a + b"), 0);
        assert_eq!(err_offset("a b ]"), 4);
        assert_eq!(err_offset("[ a + b + c ]"), 8);
        assert_eq!(err_offset("[ a b ]"), 6);
        assert_eq!(err_offset("{uh} a"), 0);
        assert_eq!(err_offset("[ a {uh} + b ]"), 4);
        assert_eq!(err_offset("[ + b ]"), 2);
        assert_eq!(err_offset("id\t[ a + b"), 3);
    }
}
