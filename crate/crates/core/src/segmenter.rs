//! Rule-based sentence segmentation with positional markers.
//!
//! An answer is split into units at terminal punctuation (`. ! ?` plus the
//! fullwidth `。 ！ ？ ；`), while heading and list-item lines stay whole.
//! Every byte of the source is assigned to exactly one segment: a unit's
//! span keeps its terminal delimiter, and the whitespace between two units
//! rides along as the leading bytes of the following segment. The marked
//! rendering appends ` [Sentence i]` immediately after each unit's
//! delimiter, so stripping the markers reproduces the source byte-for-byte.
//!
//! ASCII terminal punctuation only closes a unit when followed by
//! whitespace or end of input (so `3.14` and `e.g.x` stay intact), while
//! the fullwidth set closes unconditionally (CJK prose carries no
//! inter-sentence spaces). Abbreviation periods are deliberately not
//! special-cased.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Escape prefix for source text that already looks like a marker. It breaks
/// the space-bracket adjacency the stripper matches on, and doubles itself.
const ESCAPE: char = '\u{241B}';

fn marker_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[Sentence [0-9]+\]").unwrap())
}

fn inserted_marker_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r" \[Sentence [0-9]+\]").unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Plain,
    Heading,
    ListItem,
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SegmentKind::Plain => "plain",
            SegmentKind::Heading => "heading",
            SegmentKind::ListItem => "list_item",
        };
        f.write_str(name)
    }
}

/// One contiguous span of the source answer.
///
/// `text` is the exact source substring: delimiter included, and for every
/// segment after the first, any whitespace separating it from the previous
/// unit included as leading bytes. Concatenating all segment texts in order
/// is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub text: String,
    pub kind: SegmentKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentedAnswer {
    pub segments: Vec<Segment>,
    #[serde(rename = "answer_order")]
    pub marked_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SegmentError {
    #[error("answer text is empty or whitespace-only")]
    EmptyInput,
}

const ASCII_TERMINALS: [char; 3] = ['.', '!', '?'];
const FULLWIDTH_TERMINALS: [char; 4] = ['。', '！', '？', '；'];

fn is_terminal(ch: char) -> bool {
    ASCII_TERMINALS.contains(&ch) || FULLWIDTH_TERMINALS.contains(&ch)
}

fn is_fullwidth_terminal(ch: char) -> bool {
    FULLWIDTH_TERMINALS.contains(&ch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineClass {
    Blank,
    Plain,
    Heading,
    ListItem,
}

fn classify_line(content: &str) -> LineClass {
    let trimmed = content.trim();
    if trimmed.is_empty() {
        return LineClass::Blank;
    }
    if is_list_item_line(trimmed) {
        return LineClass::ListItem;
    }
    if is_heading_line(trimmed) {
        return LineClass::Heading;
    }
    LineClass::Plain
}

/// Numbered markers (`1.` `1、` `1．` `1)` `1）` `(1)` `（1）`, 1-3 digits so
/// years stay prose) and bullets (`- ` `* ` `•` `·`).
fn is_list_item_line(trimmed: &str) -> bool {
    let mut chars = trimmed.chars();
    let first = match chars.next() {
        Some(ch) => ch,
        None => return false,
    };
    match first {
        '-' | '*' => matches!(chars.next(), Some(' ') | Some('\t')),
        '•' | '·' => true,
        '(' | '（' => {
            let mut digits = 0;
            for ch in chars.by_ref() {
                if ch.is_ascii_digit() {
                    digits += 1;
                    if digits > 3 {
                        return false;
                    }
                } else {
                    return digits > 0 && matches!(ch, ')' | '）');
                }
            }
            false
        }
        d if d.is_ascii_digit() => {
            let mut digits = 1;
            let mut delim = None;
            for ch in chars.by_ref() {
                if ch.is_ascii_digit() {
                    digits += 1;
                    if digits > 3 {
                        return false;
                    }
                } else {
                    delim = Some(ch);
                    break;
                }
            }
            if !matches!(delim, Some('.') | Some('、') | Some('．') | Some(')') | Some('）')) {
                return false;
            }
            // "3.14" is a decimal, not an enumerator
            !matches!(chars.next(), Some(next) if next.is_ascii_digit())
        }
        _ => false,
    }
}

/// Markdown-style `#` headings and label lines ending with a colon.
fn is_heading_line(trimmed: &str) -> bool {
    if trimmed.ends_with(':') || trimmed.ends_with('：') {
        return true;
    }
    let mut chars = trimmed.chars();
    let mut hashes = 0;
    for ch in chars.by_ref() {
        match ch {
            '#' => {
                hashes += 1;
                if hashes > 6 {
                    return false;
                }
            }
            ' ' | '\t' => return hashes > 0,
            _ => return false,
        }
    }
    false
}

/// One unit discovered by the scan: where its core (content plus delimiter)
/// ends, and what kind of unit it is.
struct UnitDraft {
    core_end: usize,
    kind: SegmentKind,
}

/// Splits an answer into marked segments.
///
/// The returned segments partition `raw` exactly; `marked_text` is `raw`
/// with ` [Sentence i]` inserted after each unit's delimiter and any
/// pre-existing marker-shaped text escaped, so [`strip_markers`] inverts it
/// byte-for-byte.
pub fn segment(raw: &str) -> Result<SegmentedAnswer, SegmentError> {
    if raw.trim().is_empty() {
        return Err(SegmentError::EmptyInput);
    }

    let mut units: Vec<UnitDraft> = Vec::new();
    let mut open = false;
    let mut last_content_end = 0usize;

    let mut line_start = 0usize;
    while line_start < raw.len() {
        let line_end = match raw[line_start..].find('\n') {
            Some(off) => line_start + off + 1,
            None => raw.len(),
        };
        let line = &raw[line_start..line_end];
        let body = line.strip_suffix('\n').unwrap_or(line);
        let body = body.strip_suffix('\r').unwrap_or(body);

        let class = classify_line(body);
        match class {
            LineClass::Blank => {}
            LineClass::Heading | LineClass::ListItem => {
                if open {
                    units.push(UnitDraft {
                        core_end: last_content_end,
                        kind: SegmentKind::Plain,
                    });
                    open = false;
                }
                let kind = if class == LineClass::Heading {
                    SegmentKind::Heading
                } else {
                    SegmentKind::ListItem
                };
                let core_end = if line.ends_with('\n') {
                    line_end
                } else {
                    // final line without newline: the marker goes after the
                    // last content character, trailing whitespace after it
                    line_start + last_non_ws_end(line)
                };
                units.push(UnitDraft { core_end, kind });
            }
            LineClass::Plain => {
                scan_plain_line(
                    raw,
                    line_start,
                    line_end,
                    &mut units,
                    &mut open,
                    &mut last_content_end,
                );
            }
        }
        line_start = line_end;
    }
    if open {
        units.push(UnitDraft {
            core_end: last_content_end,
            kind: SegmentKind::Plain,
        });
    }

    debug_assert!(!units.is_empty());
    let segments = build_segments(raw, &units);
    let marked_text = render_segments(&segments);
    Ok(SegmentedAnswer {
        segments,
        marked_text,
    })
}

/// Byte offset just past the last non-whitespace character of `s` (0 if none).
fn last_non_ws_end(s: &str) -> usize {
    s.char_indices()
        .rev()
        .find(|(_, ch)| !ch.is_whitespace())
        .map(|(idx, ch)| idx + ch.len_utf8())
        .unwrap_or(0)
}

fn scan_plain_line(
    raw: &str,
    line_start: usize,
    line_end: usize,
    units: &mut Vec<UnitDraft>,
    open: &mut bool,
    last_content_end: &mut usize,
) {
    let mut chars = raw[line_start..line_end].char_indices().peekable();
    while let Some((off, ch)) = chars.next() {
        if ch.is_whitespace() {
            continue;
        }
        *open = true;
        let mut run_end = line_start + off + ch.len_utf8();
        *last_content_end = run_end;
        if !is_terminal(ch) {
            continue;
        }
        // consume the whole punctuation run ("?!", "...", "！？") as one delimiter
        let mut fullwidth = is_fullwidth_terminal(ch);
        while let Some(&(next_off, next_ch)) = chars.peek() {
            if !is_terminal(next_ch) {
                break;
            }
            fullwidth |= is_fullwidth_terminal(next_ch);
            run_end = line_start + next_off + next_ch.len_utf8();
            chars.next();
        }
        *last_content_end = run_end;
        // a line's own newline counts as following whitespace; running out
        // of characters means end of input, because only the final line
        // lacks a newline
        let followed_by_ws_or_end = match chars.peek() {
            None => true,
            Some(&(_, next_ch)) => next_ch.is_whitespace(),
        };
        if fullwidth || followed_by_ws_or_end {
            units.push(UnitDraft {
                core_end: run_end,
                kind: SegmentKind::Plain,
            });
            *open = false;
        }
    }
}

fn build_segments(raw: &str, units: &[UnitDraft]) -> Vec<Segment> {
    let mut segments = Vec::with_capacity(units.len());
    let mut span_start = 0usize;
    for (index, unit) in units.iter().enumerate() {
        let span_end = if index + 1 == units.len() {
            raw.len()
        } else {
            unit.core_end
        };
        segments.push(Segment {
            index,
            text: raw[span_start..span_end].to_string(),
            kind: unit.kind,
        });
        span_start = unit.core_end;
    }
    segments
}

/// Renders segment texts with their positional markers.
///
/// Exactly one ASCII space precedes each `[Sentence i]`. The marker lands
/// right after the unit's delimiter: after the trailing newline of a heading
/// or list line, otherwise after the last non-whitespace character, with any
/// remaining trailing whitespace preserved after the marker. Deterministic
/// and idempotent for a given value.
pub fn render_marked(segmented: &SegmentedAnswer) -> String {
    render_segments(&segmented.segments)
}

fn render_segments(segments: &[Segment]) -> String {
    let mut out = String::new();
    for segment in segments {
        let keeps_newline =
            segment.kind != SegmentKind::Plain && segment.text.ends_with('\n');
        let split = if keeps_newline {
            segment.text.len()
        } else {
            last_non_ws_end(&segment.text)
        };
        out.push_str(&escape(&segment.text[..split]));
        out.push_str(&format!(" [Sentence {}]", segment.index));
        out.push_str(&escape(&segment.text[split..]));
    }
    out
}

/// Number of inserted `[Sentence i]` markers in a marked text. Escaped
/// marker-shaped source text does not count.
pub fn inserted_marker_count(marked: &str) -> usize {
    inserted_marker_pattern().find_iter(marked).count()
}

/// Removes inserted markers and unescapes pre-existing marker-shaped text,
/// recovering the exact source bytes of the segmented answer.
pub fn strip_markers(marked: &str) -> String {
    let stripped = inserted_marker_pattern().replace_all(marked, "");
    unescape(&stripped)
}

fn escape(chunk: &str) -> String {
    let doubled = if chunk.contains(ESCAPE) {
        let mut s = String::with_capacity(chunk.len());
        for ch in chunk.chars() {
            s.push(ch);
            if ch == ESCAPE {
                s.push(ESCAPE);
            }
        }
        s
    } else {
        chunk.to_string()
    };
    marker_pattern()
        .replace_all(&doubled, |caps: &regex::Captures<'_>| {
            format!("{ESCAPE}{}", &caps[0])
        })
        .into_owned()
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        if ch == ESCAPE {
            if chars.peek() == Some(&ESCAPE) {
                out.push(ESCAPE);
                chars.next();
            }
            // a lone escape is an inserted prefix: drop it
        } else {
            out.push(ch);
        }
    }
    out
}
