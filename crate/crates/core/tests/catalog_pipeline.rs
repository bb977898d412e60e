use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use movidx::catalog::{ingest_documents, save_catalog, FragmentRecord, FrameRef, FrameSource};
use movidx::detectors::{DetectorGrammar, GrammarRule, MediaKind, SyntheticFrame};
use movidx::{
    build_index, flatten_storyboard, ingest_pipeline, load_catalog, load_index, parse_address, save_index,
    Catalog, CatalogError,
};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/electric_current_catalog.json")
}

fn catalog() -> Catalog {
    load_catalog(fixture()).expect("fixture loads")
}

#[test]
fn fixture_catalog_is_valid_and_sorted() {
    let c = catalog();
    assert_eq!(c.fragments.len(), 3);
    let order: Vec<&str> = c.fragments.iter().map(|f| f.fragment_id.as_str()).collect();
    assert_eq!(order, ["shock-clip", "coulomb-count", "ohm-demo"]);
    assert!(c.overlap_warnings().is_empty());
}

#[test]
fn dangling_address_is_rejected() {
    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(fixture()).unwrap()).unwrap();
    value["fragments"][2]["story_address"] = "E1,E2,B3".into();
    let err = Catalog::from_json(&value.to_string()).unwrap_err();
    assert!(matches!(err, CatalogError::DanglingAddress { .. }), "{err}");
}

#[test]
fn malformed_file_reports_position() {
    let err = Catalog::from_json("{\"storyboard\": {\n  \"main_problem\": 3").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
}

#[test]
fn storyboard_only_catalog_indexes_like_the_board() {
    let c = catalog();
    let bare = Catalog::new(c.storyboard.clone(), c.grammar.clone(), Vec::new()).unwrap();
    let direct = build_index(&flatten_storyboard(&c.storyboard).unwrap()).unwrap();
    assert_eq!(ingest_pipeline(&bare, None).unwrap(), direct);
}

#[test]
fn fragment_ids_are_traceable() {
    let c = catalog();
    let docs = ingest_documents(&c, None).unwrap();
    let frames: BTreeMap<&str, usize> = c
        .fragments
        .iter()
        .map(|f| (f.fragment_id.as_str(), f.frames.len()))
        .collect();
    for d in &docs {
        match d.id.split_once('/') {
            Some((frag, i)) => assert!(i.parse::<usize>().unwrap() < frames[frag], "{}", d.id),
            None => assert!(c.storyboard.contains(&parse_address(&d.id).unwrap())),
        }
    }
    let index = ingest_pipeline(&c, None).unwrap();
    let hits: BTreeSet<&str> = index
        .postings("fragment_story_b1_b2_b3")
        .into_iter()
        .map(|(id, _)| id)
        .collect();
    assert_eq!(hits, BTreeSet::from(["shock-clip/0", "shock-clip/1"]));
}

#[test]
fn storyboard_postings_survive_fragment_removal() {
    let c = catalog();
    let full = ingest_pipeline(&c, None).unwrap();
    let board_only = build_index(&flatten_storyboard(&c.storyboard).unwrap()).unwrap();
    for term in board_only.terms() {
        let kept: Vec<_> = full
            .postings(term)
            .into_iter()
            .filter(|(id, _)| !id.contains('/'))
            .collect();
        assert_eq!(kept, board_only.postings(term), "{term}");
    }
}

#[test]
fn uniform_pgm_frame_lands_in_bin_zero() {
    let dir = tempfile::tempdir().unwrap();
    let frame = SyntheticFrame::uniform(20, 10, 0).unwrap();
    fs::write(dir.path().join("black.pgm"), frame.to_pgm()).unwrap();

    let base = catalog();
    let grammar = DetectorGrammar::new(vec![GrammarRule::new(MediaKind::Image, "histogram", &[("bins", "4")])]).unwrap();
    let fragment = FragmentRecord {
        fragment_id: "dark".into(),
        source: "night.mpg".into(),
        start_ms: 0,
        end_ms: 40,
        story_address: parse_address("B1").unwrap(),
        frames: vec![FrameRef {
            source: FrameSource::Path("black.pgm".into()),
            width: 20,
            height: 10,
        }],
        media_metadata: BTreeMap::new(),
    };
    let c = Catalog::new(base.storyboard, grammar, vec![fragment]).unwrap();
    let path = dir.path().join("catalog.json");
    save_catalog(&c, &path).unwrap();

    let index = ingest_pipeline(&load_catalog(&path).unwrap(), None).unwrap();
    assert_eq!(index.postings("histogram_dominant_bin_0"), [("dark/0", 1)]);

    let tiled = ingest_pipeline(&load_catalog(&path).unwrap(), Some(5)).unwrap();
    assert_eq!(tiled.doc_ids(), index.doc_ids());
    assert_eq!(tiled.postings("tile_0_0_histogram_dominant_bin_0"), [("dark/0", 1)]);
    assert!(tiled.postings("histogram_dominant_bin_0").is_empty());
}

#[test]
fn missing_frame_file_names_the_fragment() {
    let base = catalog();
    let fragment = FragmentRecord {
        fragment_id: "ghost".into(),
        source: "s".into(),
        start_ms: 0,
        end_ms: 1,
        story_address: parse_address("M1").unwrap(),
        frames: vec![FrameRef {
            source: FrameSource::Path("/nonexistent/frame.pgm".into()),
            width: 4,
            height: 4,
        }],
        media_metadata: BTreeMap::new(),
    };
    let c = Catalog::new(base.storyboard, DetectorGrammar::default(), vec![fragment]).unwrap();
    let err = ingest_pipeline(&c, None).unwrap_err();
    assert!(matches!(err, CatalogError::Detection { ref fragment_id, frame_index: 0, .. } if fragment_id == "ghost"));
}

#[test]
fn truncated_index_file_fails_to_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.json");
    save_index(&ingest_pipeline(&catalog(), None).unwrap(), &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(load_index(&path).is_err());
}

#[test]
fn overlapping_fragments_only_warn() {
    let base = catalog();
    let mut fragments = base.fragments.clone();
    let mut twin = fragments[0].clone();
    twin.fragment_id = "shock-clip-b".into();
    twin.start_ms = 100;
    twin.end_ms = 3000;
    fragments.push(twin);
    let c = Catalog::new(base.storyboard, base.grammar, fragments).unwrap();
    let warnings = c.overlap_warnings();
    assert_eq!(warnings.len(), 1);
    assert_eq!((warnings[0].first.as_str(), warnings[0].second.as_str()), ("shock-clip", "shock-clip-b"));
}
