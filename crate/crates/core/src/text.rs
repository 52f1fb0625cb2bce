//! Tokenization shared by every module that compares text.
//!
//! A token is either a word (a run of alphanumeric characters, optionally
//! joined by one of `' - . / : @ &` between alphanumerics, so that
//! `couldn't`, `14-16` and `7:30` stay whole) or a single punctuation
//! character. Whitespace only separates.

const JOINERS: &[char] = &['\'', '-', '.', '/', ':', '@', '&'];

pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() {
            let start = i;
            i += 1;
            while i < chars.len() {
                if chars[i].is_alphanumeric() {
                    i += 1;
                } else if JOINERS.contains(&chars[i])
                    && i + 1 < chars.len()
                    && chars[i + 1].is_alphanumeric()
                {
                    i += 2;
                } else {
                    break;
                }
            }
            tokens.push(chars[start..i].iter().collect());
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }
    tokens
}

/// Tokenized form of `text`: tokens joined by single spaces.
pub fn normalize(text: &str) -> String {
    tokenize(text).join(" ")
}

/// Finds non-overlapping occurrences of token patterns in `tokens`.
///
/// Patterns are tried longest first (token count, then character length,
/// then lexicographically), and a position claimed by a longer pattern is
/// never reused. Returns `(start, end, pattern_index)` sorted by `start`.
pub fn match_spans(tokens: &[String], patterns: &[Vec<String>]) -> Vec<(usize, usize, usize)> {
    let mut order: Vec<usize> = (0..patterns.len())
        .filter(|&i| !patterns[i].is_empty())
        .collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&patterns[a], &patterns[b]);
        pb.len()
            .cmp(&pa.len())
            .then_with(|| char_len(pb).cmp(&char_len(pa)))
            .then_with(|| pa.cmp(pb))
    });

    let mut claimed = vec![false; tokens.len()];
    let mut spans = Vec::new();
    for idx in order {
        let pat = &patterns[idx];
        if pat.len() > tokens.len() {
            continue;
        }
        let mut start = 0;
        while start + pat.len() <= tokens.len() {
            let end = start + pat.len();
            if tokens[start..end] == pat[..] && !claimed[start..end].iter().any(|&c| c) {
                claimed[start..end].iter_mut().for_each(|c| *c = true);
                spans.push((start, end, idx));
                start = end;
            } else {
                start += 1;
            }
        }
    }
    spans.sort_unstable();
    spans
}

fn char_len(tokens: &[String]) -> usize {
    tokens.iter().map(|t| t.chars().count()).sum()
}
