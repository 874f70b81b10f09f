mod common;

use simile_core::dedup::KeyMaker;
use simile_core::stemmer::Stemmer;

#[test]
fn contract_examples() {
    let s = Stemmer::default();
    assert_eq!(s.stem_phrase("radi kao konj"), "rad ka konj");
    let k = KeyMaker::default();
    let beo = k.key_of("beo kao sneg").unwrap();
    assert_eq!(k.key_of("bela kao sneg").unwrap(), beo);
    assert_eq!(k.key_of("belo kao sneg").unwrap(), beo);
}

#[test]
fn idempotent_on_lexicon() {
    let s = Stemmer::default();
    for word in common::read_fixture("lexicon.txt").lines().filter(|l| !l.is_empty()) {
        let once = s.stem(word);
        assert_eq!(s.stem(&once), once, "{word}");
    }
}

#[test]
fn gender_triples_share_a_stem() {
    let s = Stemmer::default();
    for line in common::read_fixture("gender_triples.tsv").lines() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let forms: Vec<&str> = line.split('\t').collect();
        assert_eq!(forms.len(), 3, "{line}");
        let stems: Vec<String> = forms.iter().map(|f| s.stem(f)).collect();
        assert!(stems.iter().all(|x| *x == stems[0]), "{forms:?} -> {stems:?}");
    }
}
