//! Whitespace tokenizer with span tracking.
//!
//! Rules, in order, per whitespace-separated chunk:
//!   1. trailing `.` `,` `?` `!` `;` `:` characters detach as single-char
//!      tokens (repeatedly, preserving their order);
//!   2. a remaining trailing `'s` detaches as its own token;
//!   3. whatever is left is one token.
//!
//! Detokenization joins tokens with single spaces, omitting the space
//! before punctuation tokens and before `'s`. For text produced by the
//! realizer (single internal spaces, no leading/trailing whitespace) the
//! round trip is lossless.

const TRAILING_PUNCT: [char; 6] = ['.', ',', '?', '!', ';', ':'];

/// Token byte ranges within `text`.
pub fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let bytes = text.as_bytes();
    let mut start = 0;
    while start < bytes.len() {
        if bytes[start].is_ascii_whitespace() {
            start += 1;
            continue;
        }
        let mut end = start;
        while end < bytes.len() && !bytes[end].is_ascii_whitespace() {
            end += 1;
        }
        split_chunk(text, start, end, &mut spans);
        start = end;
    }
    spans
}

fn split_chunk(text: &str, start: usize, end: usize, spans: &mut Vec<(usize, usize)>) {
    let mut base_end = end;
    let mut tail: Vec<(usize, usize)> = Vec::new();
    loop {
        let chunk = &text[start..base_end];
        if chunk.len() > 1 && chunk.ends_with(TRAILING_PUNCT) {
            tail.push((base_end - 1, base_end));
            base_end -= 1;
            continue;
        }
        if chunk.len() > 2 && chunk.ends_with("'s") {
            tail.push((base_end - 2, base_end));
            base_end -= 2;
            continue;
        }
        break;
    }
    if base_end > start {
        spans.push((start, base_end));
    }
    spans.extend(tail.into_iter().rev());
}

pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text)
        .into_iter()
        .map(|(s, e)| text[s..e].to_string())
        .collect()
}

/// Inverse of [`tokenize`] for realizer-produced text.
pub fn detokenize(tokens: &[String]) -> String {
    let mut out = String::new();
    for token in tokens {
        let attached =
            token == "'s" || (token.len() == 1 && token.chars().all(|c| TRAILING_PUNCT.contains(&c)));
        if !out.is_empty() && !attached {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_final_punctuation_and_commas() {
        assert_eq!(
            tokenize("Homework 3 is due Friday."),
            vec!["Homework", "3", "is", "due", "Friday", "."]
        );
        assert_eq!(
            tokenize("I met John Smith, a manager."),
            vec!["I", "met", "John", "Smith", ",", "a", "manager", "."]
        );
    }

    #[test]
    fn empty_input_has_no_tokens() {
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("   "), Vec::<String>::new());
    }

    #[test]
    fn possessives_detach() {
        assert_eq!(
            tokenize("John Smith's office is GHC122."),
            vec!["John", "Smith", "'s", "office", "is", "GHC122", "."]
        );
    }

    #[test]
    fn internal_dots_survive() {
        assert_eq!(
            tokenize("her email address: amy3@example.com."),
            vec!["her", "email", "address", ":", "amy3@example.com", "."]
        );
        assert_eq!(tokenize("$3.99,"), vec!["$3.99", ","]);
    }

    #[test]
    fn lone_punctuation_chunk() {
        assert_eq!(tokenize("a . b"), vec!["a", ".", "b"]);
    }

    #[test]
    fn detokenize_round_trips() {
        for text in [
            "Homework 3 is due Friday.",
            "I met John Smith, a manager.",
            "John Smith's office is GHC122.",
            "her email address: amy3@example.com.",
            "Who is attending the weekly standup?",
        ] {
            assert_eq!(detokenize(&tokenize(text)), text);
        }
    }

    #[test]
    fn spans_slice_back_to_tokens() {
        let text = "I moved the budget review to Friday.";
        for (s, e) in token_spans(text) {
            assert!(!text[s..e].contains(' '));
            assert!(!text[s..e].is_empty());
        }
    }
}
