//! Shared text-scanning helpers: token windows for keyword-proximity
//! recognizers, and boundary-aware occurrence search used by the rewriter,
//! the de-masker, and leak checks.
//!
//! "Boundary-aware" means a candidate occurrence is rejected when flanked by
//! a letter or digit: registered value "34" must not be found (or replaced)
//! inside "$134,000".

/// Byte ranges of whitespace-separated tokens.
pub fn token_ranges(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, text.len()));
    }
    out
}

/// Lowercase, keep alphanumerics, map everything else to spaces, collapse.
fn normalize_fragment(s: &str) -> String {
    let mapped: String = s
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { ' ' })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True when any keyword appears within `window` tokens of the byte span.
///
/// Keywords may be multi-word ("years old"); matching is case-insensitive
/// and punctuation-insensitive on whole words.
pub fn keyword_within(text: &str, span: (usize, usize), keywords: &[&str], window: usize) -> bool {
    let ranges = token_ranges(text);
    if ranges.is_empty() {
        return false;
    }
    let first = ranges
        .iter()
        .position(|&(s, e)| s < span.1 && span.0 < e)
        .unwrap_or(0);
    let last = ranges
        .iter()
        .rposition(|&(s, e)| s < span.1 && span.0 < e)
        .unwrap_or(first);
    let lo = first.saturating_sub(window);
    let hi = (last + window + 1).min(ranges.len());
    let window_text = ranges[lo..hi]
        .iter()
        .map(|&(s, e)| &text[s..e])
        .collect::<Vec<_>>()
        .join(" ");
    let haystack = format!(" {} ", normalize_fragment(&window_text));
    keywords.iter().any(|kw| {
        let needle = format!(" {} ", normalize_fragment(kw));
        haystack.contains(&needle)
    })
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// True when the byte range is not flanked by a letter or digit.
pub fn boundary_ok(text: &str, start: usize, end: usize) -> bool {
    let before_ok = text[..start].chars().next_back().is_none_or(|c| !is_word_char(c));
    let after_ok = text[end..].chars().next().is_none_or(|c| !is_word_char(c));
    before_ok && after_ok
}

fn matches_at(text: &str, pos: usize, needle: &str, case_insensitive: bool) -> bool {
    let Some(slice) = text.get(pos..) else { return false };
    if case_insensitive {
        let mut hay = slice.chars();
        for nc in needle.chars() {
            match hay.next() {
                Some(hc) if hc.to_lowercase().eq(nc.to_lowercase()) => {}
                _ => return false,
            }
        }
        true
    } else {
        slice.starts_with(needle)
    }
}

/// Byte length of the haystack prefix matching `needle` at `pos`.
///
/// Differs from `needle.len()` only under case-insensitive matching of
/// characters whose cases have different UTF-8 lengths.
fn matched_len(text: &str, pos: usize, needle: &str, case_insensitive: bool) -> usize {
    if !case_insensitive {
        return needle.len();
    }
    let mut len = 0;
    let mut hay = text[pos..].chars();
    for _ in needle.chars() {
        len += hay.next().map_or(0, |c| c.len_utf8());
    }
    len
}

/// All boundary-respecting occurrences of `needle`, as byte ranges.
pub fn find_occurrences(text: &str, needle: &str, case_insensitive: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if needle.is_empty() {
        return out;
    }
    let mut pos = 0;
    while pos < text.len() {
        if matches_at(text, pos, needle, case_insensitive) {
            let end = pos + matched_len(text, pos, needle, case_insensitive);
            if boundary_ok(text, pos, end) {
                out.push((pos, end));
                pos = end;
                continue;
            }
        }
        pos += text[pos..].chars().next().map_or(1, |c| c.len_utf8());
    }
    out
}

/// Boundary-aware containment check.
pub fn contains_value(text: &str, needle: &str, case_insensitive: bool) -> bool {
    !find_occurrences(text, needle, case_insensitive).is_empty()
}

/// One substitution rule for [`replace_all`].
#[derive(Debug, Clone)]
pub struct Substitution {
    pub needle: String,
    pub replacement: String,
    pub case_insensitive: bool,
}

/// Single-pass, longest-needle-first substitution.
///
/// The text is scanned once left to right; at each position the longest
/// matching needle (with valid boundaries) wins, and replacements are never
/// re-scanned, so "Ann Lee" is rewritten whole even when "Ann" is also
/// registered, and one substitution's output can't be corrupted by another.
pub fn replace_all(text: &str, subs: &[Substitution]) -> String {
    let mut order: Vec<&Substitution> = subs.iter().filter(|s| !s.needle.is_empty()).collect();
    order.sort_by_key(|s| std::cmp::Reverse(s.needle.len()));
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    while pos < text.len() {
        let hit = order.iter().find_map(|s| {
            if matches_at(text, pos, &s.needle, s.case_insensitive) {
                let end = pos + matched_len(text, pos, &s.needle, s.case_insensitive);
                if boundary_ok(text, pos, end) {
                    return Some((end, &s.replacement));
                }
            }
            None
        });
        match hit {
            Some((end, replacement)) => {
                out.push_str(replacement);
                pos = end;
            }
            None => {
                let ch = text[pos..].chars().next().expect("in bounds");
                out.push(ch);
                pos += ch.len_utf8();
            }
        }
    }
    out
}
