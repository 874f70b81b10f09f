mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use simile_core::dedup::KeyMaker;
use simile_core::store::{CorpusStore, Origin, Provenance, Status, StoreError, TickClock};

const TEXTS: [&str; 8] = [
    "radi kao konj",
    "beo kao sneg",
    "bela kao sneg",
    "lep kao cvet",
    "smorio se kao zmaj",
    "radi k'o pravnik",
    "gladan kao vuk",
    "Бео као снег",
];

#[derive(Debug, Clone)]
enum Op {
    Add(usize, usize),
    SetStatus(usize, usize),
    Edit(usize, usize),
    Import(Vec<usize>),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0..TEXTS.len(), 0..3usize).prop_map(|(t, o)| Op::Add(t, o)),
        5 => (0..12usize, 0..3usize).prop_map(|(i, s)| Op::SetStatus(i, s)),
        1 => (0..12usize, 0..TEXTS.len()).prop_map(|(i, t)| Op::Edit(i, t)),
        1 => prop::collection::vec(0..TEXTS.len(), 0..4).prop_map(Op::Import),
    ]
}

fn check_invariants(store: &CorpusStore, keys: &KeyMaker) {
    for e in store.entries() {
        assert_eq!(e.stem_key, keys.key_of(&e.text).unwrap(), "entry {}", e.id);
        assert_eq!(e.status_from_history(), Some(e.status), "entry {}", e.id);
    }
    let approved: BTreeSet<u64> = store
        .entries()
        .iter()
        .filter(|e| e.status == Status::Approved)
        .map(|e| e.id)
        .collect();
    let public: BTreeSet<u64> = store.public_listing().iter().map(|e| e.id).collect();
    assert_eq!(public, approved);
    let stats = store.stats();
    assert_eq!(stats.total, store.len());
    assert_eq!(stats.by_status.total(), stats.total);
    assert_eq!(
        stats.by_status.approved,
        stats.mined.approved + stats.manual.approved + stats.seed.approved
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifecycle_invariants(ops in prop::collection::vec(op(), 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.log");
        let keys = KeyMaker::default();
        let mut store = CorpusStore::open(&path, keys.clone()).unwrap().with_clock(TickClock::starting_at(0));
        let mut len = 0;
        for op in ops {
            match op {
                Op::Add(t, o) => {
                    let origin = Origin::ALL[o];
                    store.add_entry(TEXTS[t], origin, Provenance::Contributor { note: String::new() }, "p").unwrap();
                }
                Op::SetStatus(i, s) => {
                    let id = i as u64 + 1;
                    let to = Status::ALL[s];
                    let before = store.get(id).cloned();
                    match store.set_status(id, to, "curator") {
                        Ok(e) => {
                            let from = before.as_ref().unwrap().status;
                            prop_assert!(from.can_become(to));
                            prop_assert_eq!(e.status, to);
                        }
                        Err(StoreError::UnknownId(_)) => prop_assert!(before.is_none()),
                        Err(StoreError::IllegalTransition { from, .. }) => {
                            prop_assert!(!from.can_become(to));
                            prop_assert_eq!(store.get(id), before.as_ref());
                        }
                        Err(e) => panic!("{e}"),
                    }
                }
                Op::Edit(i, t) => {
                    let id = i as u64 + 1;
                    let r = store.edit_text(id, TEXTS[t], "curator");
                    prop_assert_eq!(r.is_ok(), id as usize <= store.len());
                }
                Op::Import(lines) => {
                    let text: String = lines.iter().map(|&t| format!("{}\n", TEXTS[t])).collect();
                    let report = store.import_seed(text.as_bytes(), "vuk", "curator").unwrap();
                    prop_assert_eq!(report.added, lines.len());
                }
            }
            prop_assert!(store.len() >= len, "entry count decreased");
            len = store.len();
            check_invariants(&store, &keys);
        }
        let reopened = CorpusStore::open(&path, keys.clone()).unwrap();
        prop_assert_eq!(reopened.entries(), store.entries());
    }
}

#[test]
fn seed_import_reports_planted_overlap() {
    let mut store = CorpusStore::in_memory(KeyMaker::default());
    for text in ["bela kao sneg", "radi kao konj", "lep kao cvet"] {
        store
            .add_entry(
                text,
                Origin::Mined,
                Provenance::Document {
                    doc_id: "d".into(),
                    sentence_offset: 0,
                },
                "miner",
            )
            .unwrap();
    }
    let seed = common::read_fixture("seed10.txt");
    assert_eq!(seed.lines().count(), 10);
    let report = store.import_seed(seed.as_bytes(), "seed10", "curator").unwrap();
    assert_eq!(report.added, 10);
    assert_eq!(report.overlap_with_mined, 1);
    let stats = store.stats();
    assert_eq!(stats.seed.approved, 10);
    assert_eq!(stats.seed_mined_overlap, 1);
}

#[test]
fn seed_import_into_empty_store() {
    let mut store = CorpusStore::in_memory(KeyMaker::default());
    let report = store
        .import_seed(common::read_fixture("seed10.txt").as_bytes(), "seed10", "c")
        .unwrap();
    assert_eq!((report.added, report.overlap_with_mined), (10, 0));
    assert_eq!(store.public_listing().len(), 10);
}

#[test]
fn approved_listing_is_alphabetical() {
    let mut store = CorpusStore::in_memory(KeyMaker::default());
    store
        .import_seed(common::read_fixture("seed10.txt").as_bytes(), "seed10", "c")
        .unwrap();
    let texts: Vec<&str> = store.public_listing().iter().map(|e| e.text.as_str()).collect();
    assert_eq!(
        texts,
        [
            "beo kao sneg",
            "crn kao gavran",
            "gladan kao pas",
            "lak kao pero",
            "mokar kao miš",
            "mudar kao sova",
            "pijan kao čep",
            "star kao Biblija",
            "tih kao bubica",
            "zdrav kao dren",
        ]
    );
}
