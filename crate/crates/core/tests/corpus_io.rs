mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Cursor;

use apirec_core::{load_snippets, parse_facts, write_facts, write_snippets, Error};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

/// Value of a string field, found by plain text search.
fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let start = line.find(&format!("\"{key}\":\""))? + key.len() + 4;
    let end = line[start..].find('"')?;
    Some(&line[start..start + end])
}

fn array<'a>(line: &'a str, key: &str) -> Vec<&'a str> {
    let Some(at) = line.find(&format!("\"{key}\":[")) else {
        return Vec::new();
    };
    let rest = &line[at + key.len() + 4..];
    let body = &rest[..rest.find(']').unwrap()];
    body.split(',').map(|s| s.trim_matches('"')).filter(|s| !s.is_empty()).collect()
}

#[test]
fn tiny_fixture_counts_match_a_line_scan() {
    let text = fixture("tiny.facts");
    let mut projects = BTreeSet::new();
    let mut declarations = 0;
    let mut invocations = BTreeSet::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        projects.insert(field(line, "project").unwrap());
        declarations += 1;
        invocations.extend(array(line, "invocations"));
    }
    assert_eq!((projects.len(), declarations, invocations.len()), (3, 12, 9));

    let corpus = parse_facts(Cursor::new(text.as_str())).unwrap();
    assert_eq!(corpus.len(), projects.len());
    assert_eq!(corpus.declaration_total(), declarations);
    assert_eq!(corpus.vocabulary().len(), invocations.len());
    // ids are dense, in first-seen order
    for (i, (id, s)) in corpus.vocabulary().iter().enumerate() {
        assert_eq!(id.index(), i);
        assert!(invocations.contains(s));
    }
}

#[test]
fn tiny_snippets_fixture() {
    let text = fixture("tiny.snippets");
    let keys: BTreeSet<&str> = text.lines().skip(1).filter_map(|l| field(l, "key")).collect();
    let snippets = load_snippets(Cursor::new(text.as_str())).unwrap();
    assert_eq!(snippets.len(), 5);
    assert_eq!(snippets.keys().map(String::as_str).collect::<BTreeSet<_>>(), keys);
    assert!(snippets["beta/Client.send"].contains("socket.write(b);\n"));
}

#[test]
fn invocation_frequencies_count_repeats() {
    let corpus = parse_facts(Cursor::new(fixture("tiny.facts"))).unwrap();
    let alpha = corpus.project(corpus.project_index("alpha").unwrap());
    let info = corpus.vocabulary().get("io/Log/info()").unwrap();
    let freqs = alpha.invocation_frequencies();
    assert_eq!(freqs.iter().find(|f| f.0 == info).unwrap().1, 4);
    // three projects invoke it, in six declarations
    assert_eq!(corpus.project_count(info), 3);
    assert_eq!(corpus.declaration_count(info), 6);
}

#[test]
fn malformed_input_is_rejected() {
    let header = "{\"format\":\"focus-facts\",\"version\":1}\n";
    let cases = [
        ("", "empty"),
        (header, "empty"),
        ("{\"format\":\"focus-snippets\",\"version\":1}\n{}", "parse"),
        ("{\"format\":\"focus-facts\",\"version\":2}\n", "parse"),
        ("{\"project\":\"a\",\"declaration\":\"d\"}\n", "parse"),
    ];
    for (text, kind) in cases {
        let err = parse_facts(Cursor::new(text)).unwrap_err();
        match (kind, &err) {
            ("empty", Error::EmptyCorpus) | ("parse", Error::Parse { .. }) => {}
            _ => panic!("{text:?}: {err:?}"),
        }
    }
    let rows = [
        "{\"project\":\"a\",\"declaration\":\"d\",\"invocations\":[\"x\"]}",
        "{\"project\":\"b\",\"declaration\":\"d\",\"invocations\":[\"x\"]}",
        "{\"project\":\"a\",\"declaration\":\"e\",\"invocations\":[\"y\"]}",
    ];
    let err = parse_facts(Cursor::new(format!("{header}{}\n", rows.join("\n")))).unwrap_err();
    assert!(matches!(err, Error::NonContiguousProject { line: 4, .. }), "{err:?}");
    let dup = format!("{header}{}\n{}\n", rows[0], rows[0]);
    assert!(matches!(parse_facts(Cursor::new(dup)).unwrap_err(), Error::DuplicateDeclaration { line: 3, .. }));
    let unknown = format!("{header}{{\"project\":\"a\",\"declaration\":\"d\",\"extra\":1}}\n");
    assert!(matches!(parse_facts(Cursor::new(unknown)).unwrap_err(), Error::Parse { line: 2, .. }));
}

#[test]
fn duplicate_snippet_keys_are_rejected() {
    let text = "{\"format\":\"focus-snippets\",\"version\":1}\n{\"key\":\"k\",\"body\":\"a\"}\n{\"key\":\"k\",\"body\":\"b\"}\n";
    assert!(matches!(load_snippets(Cursor::new(text)).unwrap_err(), Error::DuplicateSnippet { line: 3, .. }));
    assert!(load_snippets(Cursor::new("")).unwrap().is_empty());
}

proptest! {
    #[test]
    fn facts_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = support::random_corpus(&mut rng, 6, 8, 20);
        let mut buf = Vec::new();
        write_facts(&corpus, &mut buf).unwrap();
        let back = parse_facts(Cursor::new(&buf)).unwrap();
        let mut again = Vec::new();
        write_facts(&back, &mut again).unwrap();
        prop_assert_eq!(&buf, &again);
        prop_assert_eq!(back.len(), corpus.len());
        for (a, b) in corpus.projects().iter().zip(back.projects()) {
            prop_assert_eq!(&a.id, &b.id);
            for (x, y) in a.declarations.iter().zip(&b.declarations) {
                let xs: Vec<_> = x.invocations().iter().map(|&i| corpus.canonical(i)).collect();
                let ys: Vec<_> = y.invocations().iter().map(|&i| back.canonical(i)).collect();
                prop_assert_eq!(xs, ys);
            }
        }
    }

    #[test]
    fn snippets_round_trip(entries in prop::collection::btree_map("[a-z/]{1,12}", "(?s).{0,40}", 0..8)) {
        let map: BTreeMap<String, String> = entries;
        let mut buf = Vec::new();
        write_snippets(&map, &mut buf).unwrap();
        prop_assert_eq!(load_snippets(Cursor::new(&buf)).unwrap(), map);
    }
}
