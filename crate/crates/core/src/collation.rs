//! Serbian Latin alphabetical order.
//!
//! a b c č ć d dž đ e f g h i j k l lj m n nj o p r s š t u v z ž, with the
//! digraphs dž, lj and nj treated as single letters. Cyrillic input is
//! transliterated first; foreign q, w, x, y are slotted in at their Latin
//! positions.

use std::cmp::Ordering;

use crate::normalize::normalize_word;

const ALPHABET: [&str; 34] = [
    "a", "b", "c", "č", "ć", "d", "dž", "đ", "e", "f", "g", "h", "i", "j", "k", "l", "lj", "m", "n", "nj", "o", "p",
    "q", "r", "s", "š", "t", "u", "v", "w", "x", "y", "z", "ž",
];

/// Sort key: whitespace < digits < letters < everything else.
pub fn collation_key(text: &str) -> Vec<u32> {
    let norm = normalize_word(text);
    let mut key = Vec::with_capacity(norm.len());
    let mut rest = norm.as_str();
    while let Some(c) = rest.chars().next() {
        if c.is_whitespace() {
            key.push(1);
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if let Some(d) = c.to_digit(10) {
            key.push(10 + d);
            rest = &rest[c.len_utf8()..];
            continue;
        }
        // Longest letter first so digraphs win over their first character.
        let letter = ALPHABET
            .iter()
            .enumerate()
            .filter(|(_, l)| rest.starts_with(*l))
            .max_by_key(|(_, l)| l.len());
        match letter {
            Some((rank, l)) => {
                key.push(100 + rank as u32);
                rest = &rest[l.len()..];
            }
            None => {
                key.push(1000 + c as u32);
                rest = &rest[c.len_utf8()..];
            }
        }
    }
    key
}

/// Total order: collation key, then raw text as a tie-breaker.
pub fn compare(a: &str, b: &str) -> Ordering {
    collation_key(a).cmp(&collation_key(b)).then_with(|| a.cmp(b))
}
