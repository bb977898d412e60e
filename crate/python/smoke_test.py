"""Smoke test for the `movidx` Python extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/movidx-*.whl
Then run: python python/smoke_test.py
"""

import json
import pathlib
import tempfile

import movidx

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures"


def check_storyboard():
    board = movidx.Storyboard.load(str(FIXTURES / "electric_current_storyboard.json"))
    assert board.validate() == []
    assert board.get_unit("E1,M2")[2] == "Ohm's Law: I = V/R"
    assert movidx.parse_address("B1, M2") == "B1,M2"
    assert movidx.character_type("Song") == "Word, metaphors"
    try:
        movidx.parse_address("B1,M3")
    except ValueError:
        pass
    else:
        raise AssertionError("non-consecutive stage accepted")
    assert movidx.Storyboard.from_json(board.to_json()) == board
    return board


def check_index(board):
    docs = board.flatten()
    index = movidx.Index.build(docs)
    expected = {
        "ohm": {"E1", "E1,M2"},
        "shock": {"B1,B2", "B1,B2,B3", "B1,B2,M3"},
        "coulombs": {"M1,B2", "M1,M2"},
        "shock AND video": {"B1,B2,B3"},
    }
    for query, ids in expected.items():
        hits = index.query(query)
        assert {doc for doc, _ in hits} == ids, (query, hits)
        assert hits == movidx.scan_query(docs, query)
    with tempfile.TemporaryDirectory() as tmp:
        path = str(pathlib.Path(tmp) / "index.json")
        index.save(path)
        assert movidx.Index.load(path) == index


def check_partition():
    layout = movidx.ast_partition(5, 100, 100)
    assert layout.tiles == [
        ("RST", 0, 0, 40, 50),
        ("RET", 0, 50, 40, 50),
        ("RST", 40, 0, 40, 50),
        ("RET", 40, 50, 40, 50),
        ("IRCET", 80, 0, 20, 100),
    ]
    assert layout.verify()["covered"]
    assert layout.stats()["class_counts"] == {"RST": 2, "RET": 2, "IRCET": 1}
    try:
        movidx.ast_partition(64, 64, 3)
    except ValueError as e:
        assert "a = 0" in str(e)
    else:
        raise AssertionError("undersized frame accepted")


def check_detect():
    grammar = json.dumps([{"kind": "image", "detector": "histogram", "params": {"bins": 4}}])
    frame = b"P5\n4 4\n255\n" + bytes(16)
    tuples = movidx.detect(frame, grammar, "obj")
    assert ("obj", "histogram", "dominant_bin", "0") in tuples
    tiled = movidx.detect(movidx.synthetic_frame(3, 32, 24), grammar, "obj", ast=4)
    assert any(path.startswith("tile_") for _, path, _, _ in tiled)


def check_catalog():
    catalog = movidx.Catalog.load(str(FIXTURES / "electric_current_catalog.json"))
    plain, tiled = catalog.ingest(), catalog.ingest(ast=5)
    assert plain.to_json() == catalog.ingest().to_json()
    assert plain.doc_ids == tiled.doc_ids
    assert {d for d, _ in plain.query("fragment_story_b1_b2_b3")} == {"shock-clip/0", "shock-clip/1"}


def check_bench():
    report = movidx.run_bench(docs=2000, vocab=300, queries=20, seed=1)
    assert report["results_equal"]


if __name__ == "__main__":
    board = check_storyboard()
    check_index(board)
    check_partition()
    check_detect()
    check_catalog()
    check_bench()
    print("python smoke test: ok")
