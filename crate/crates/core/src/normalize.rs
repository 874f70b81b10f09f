//! Script and case normalization for Serbian text.
//!
//! Serbian is written in both Cyrillic and Latin; everything that compares
//! words (matching, stemming, dedup keys) goes through [`normalize_word`].

/// Maps a single Serbian Cyrillic letter to its Latin spelling.
fn cyrillic_to_latin(c: char) -> Option<&'static str> {
    let s = match c {
        'а' => "a",
        'б' => "b",
        'в' => "v",
        'г' => "g",
        'д' => "d",
        'ђ' => "đ",
        'е' => "e",
        'ж' => "ž",
        'з' => "z",
        'и' => "i",
        'ј' => "j",
        'к' => "k",
        'л' => "l",
        'љ' => "lj",
        'м' => "m",
        'н' => "n",
        'њ' => "nj",
        'о' => "o",
        'п' => "p",
        'р' => "r",
        'с' => "s",
        'т' => "t",
        'ћ' => "ć",
        'у' => "u",
        'ф' => "f",
        'х' => "h",
        'ц' => "c",
        'ч' => "č",
        'џ' => "dž",
        'ш' => "š",
        'А' => "A",
        'Б' => "B",
        'В' => "V",
        'Г' => "G",
        'Д' => "D",
        'Ђ' => "Đ",
        'Е' => "E",
        'Ж' => "Ž",
        'З' => "Z",
        'И' => "I",
        'Ј' => "J",
        'К' => "K",
        'Л' => "L",
        'Љ' => "Lj",
        'М' => "M",
        'Н' => "N",
        'Њ' => "Nj",
        'О' => "O",
        'П' => "P",
        'Р' => "R",
        'С' => "S",
        'Т' => "T",
        'Ћ' => "Ć",
        'У' => "U",
        'Ф' => "F",
        'Х' => "H",
        'Ц' => "C",
        'Ч' => "Č",
        'Џ' => "Dž",
        'Ш' => "Š",
        _ => return None,
    };
    Some(s)
}

/// Transliterates Serbian Cyrillic to Latin, leaving every other character alone.
pub fn transliterate(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match cyrillic_to_latin(c) {
            Some(latin) => out.push_str(latin),
            None => out.push(c),
        }
    }
    out
}

/// Lowercases and, if `to_latin`, transliterates. Typographic apostrophes are
/// folded to ASCII so "k’o" and "k'o" compare equal.
pub fn normalize(text: &str, to_latin: bool) -> String {
    let lowered = text.to_lowercase().replace(['’', 'ʼ', '`'], "'");
    if to_latin {
        transliterate(&lowered)
    } else {
        lowered
    }
}

/// Lowercase + Latin script; the canonical form used for comparisons.
pub fn normalize_word(word: &str) -> String {
    normalize(word, true)
}
