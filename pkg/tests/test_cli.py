import json

import pytest

from ltlqbe.cli import main

EX1 = {
    "format": 1,
    "signature": ["T", "V"],
    "positives": [
        {"name": "p1", "facts": [["T", 2], ["V", 4]]},
        {"name": "p2", "facts": [["T", 1], ["V", 4]]},
    ],
    "negatives": [
        {"name": "n1", "facts": [["T", 1]]},
        {"name": "n2", "facts": [["V", 4]]},
        {"name": "n3", "facts": [["V", 1], ["T", 2]]},
    ],
}

EX2 = {
    "format": 1,
    "signature": ["T", "V"],
    "positives": [
        {"facts": [["T", 2], ["V", 4]]},
        {"facts": [["V", 1], ["T", 4]]},
    ],
    "negatives": [{"facts": [["T", 1]]}, {"facts": [["V", 4]]}],
}


@pytest.fixture
def ex1(tmp_path):
    p = tmp_path / "ex1.json"
    p.write_text(json.dumps(EX1))
    return str(p)


@pytest.fixture
def ex2(tmp_path):
    p = tmp_path / "ex2.json"
    p.write_text(json.dumps(EX2))
    return str(p)


def run(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out.strip()
    return rc, out


def test_separable_exit_zero_and_witness(ex1, capsys):
    rc, out = run(capsys, ["separable", "--class", "path-diamond", "--input", ex1, "--emit-query"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["separable"] is True and doc["format"] == 1
    assert "witness" in doc and "stats" in doc


def test_separable_exit_one(ex2, capsys):
    rc, out = run(capsys, ["separable", "--class", "path-diamond", "--input", ex2])
    assert rc == 1
    assert json.loads(out)["separable"] is False


def test_separable_minimize_and_oracle_check(ex1, capsys):
    rc, out = run(
        capsys,
        [
            "separable",
            "--class",
            "path-diamond",
            "--input",
            ex1,
            "--minimize",
            "--oracle-check",
        ],
    )
    assert rc == 0
    assert "witness" in json.loads(out)


def test_separable_with_horn_ontology(tmp_path, capsys):
    doc = dict(EX1)
    doc["positives"] = [
        {"facts": [["H", 3], ["V", 4]]},
        {"facts": [["T", 1], ["V", 4]]},
    ]
    inp = tmp_path / "horn.json"
    inp.write_text(json.dumps(doc))
    onto = tmp_path / "onto.ltl"
    onto.write_text("X H -> T\n")
    rc, out = run(
        capsys,
        ["separable", "--class", "path-diamond", "--input", str(inp), "--ontology", str(onto)],
    )
    assert rc == 0


def test_malformed_json_exit_two(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    rc = main(["separable", "--class", "path-diamond", "--input", str(p)])
    assert rc == 2


def test_missing_format_exit_two(tmp_path):
    p = tmp_path / "v0.json"
    p.write_text(json.dumps({"positives": [], "negatives": []}))
    assert main(["separable", "--class", "path-diamond", "--input", str(p)]) == 2


def test_bad_class_exit_two(ex1):
    assert main(["separable", "--class", "nope", "--input", ex1]) == 2


def test_eval_command(tmp_path, capsys):
    data = tmp_path / "d.json"
    data.write_text(json.dumps({"format": 1, "facts": [["T", 2], ["V", 4]]}))
    rc, out = run(capsys, ["eval", "--query", "F(T & F F V)", "--data", str(data)])
    assert rc == 0 and out == "true"
    rc, out = run(capsys, ["eval", "--query", "F(V & F T)", "--data", str(data)])
    assert rc == 1 and out == "false"
    rc, out = run(capsys, ["eval", "--query", "true", "--data", str(data), "--at", "7"])
    assert rc == 0 and out == "true"


def test_eval_with_ontology(tmp_path, capsys):
    data = tmp_path / "d.json"
    data.write_text(json.dumps({"format": 1, "facts": [["H", 3], ["V", 4]]}))
    onto = tmp_path / "o.ltl"
    onto.write_text("X H -> T\n")
    rc, out = run(
        capsys,
        ["eval", "--query", "F(T & F F V)", "--data", str(data), "--ontology", str(onto)],
    )
    assert rc == 0 and out == "true"


def test_eval_bad_query_exit_two(tmp_path):
    data = tmp_path / "d.json"
    data.write_text(json.dumps({"format": 1, "facts": []}))
    assert main(["eval", "--query", "F(", "--data", str(data)]) == 2


def test_canonical_command(tmp_path, capsys):
    onto = tmp_path / "o.ltl"
    onto.write_text("A -> C\nA -> X B\nB -> X X B\nB -> X C\n")
    data = tmp_path / "d.json"
    data.write_text(json.dumps({"format": 1, "facts": [["A", 0]]}))
    rc, out = run(capsys, ["canonical", "--ontology", str(onto), "--data", str(data)])
    assert rc == 0
    doc = json.loads(out)
    assert doc["handle"] == 2 and doc["period"] == 2
    assert doc["prefix"] == [["A", "C"], ["B"]] and doc["loop"] == [["C"], ["B"]]


def test_canonical_round_trip(tmp_path, capsys):
    from ltlqbe import horn
    from ltlqbe.core import DataInstance, LassoModel, eval_lasso, parse_query

    onto = tmp_path / "o.ltl"
    onto.write_text("X H -> T\n")
    data = tmp_path / "d.json"
    data.write_text(json.dumps({"format": 1, "facts": [["H", 3], ["V", 4]]}))
    rc, out = run(capsys, ["canonical", "--ontology", str(onto), "--data", str(data)])
    doc = json.loads(out)
    lasso = LassoModel(
        tuple(frozenset(s) for s in doc["prefix"]), tuple(frozenset(s) for s in doc["loop"])
    )
    q = parse_query("F(T & F F V)")
    o = horn.load_ontology("X H -> T")
    d = DataInstance.of([("H", 3), ("V", 4)])
    assert eval_lasso(lasso, q, 0) == horn.certain_answer(o, d, q, 0)


def test_canonical_inconsistent_exit_two(tmp_path):
    onto = tmp_path / "o.ltl"
    onto.write_text("A -> false\n")
    data = tmp_path / "d.json"
    data.write_text(json.dumps({"format": 1, "facts": [["A", 0]]}))
    assert main(["canonical", "--ontology", str(onto), "--data", str(data)]) == 2


def test_from_words(capsys):
    rc, out = run(capsys, ["from-words", "--positives", "ab,cab", "--negatives", "ba"])
    assert rc == 0 and json.loads(out)["separable"] is True
    rc, out = run(capsys, ["from-words", "--positives", "ab", "--negatives", "ab"])
    assert rc == 1
    rc, out = run(capsys, ["from-words", "--positives", "a", "--negatives", "b"])
    assert rc == 0
    rc, out = run(
        capsys,
        ["from-words", "--positives", "xaby,zab", "--negatives", "axb", "--mode", "subword"],
    )
    assert rc == 0 and json.loads(out)["mode"] == "subword"


def test_from_words_matches_direct_subsequence_check(capsys):
    import itertools
    import random

    def is_subseq(s, w):
        it = iter(w)
        return all(ch in it for ch in s)

    rng = random.Random(9)
    for _ in range(30):
        words = ["".join(rng.choice("ab") for _ in range(rng.randrange(1, 5))) for _ in range(3)]
        pos, neg = words[:2], words[2:]
        expected = False
        shortest = min(pos, key=len)
        for r in range(1, len(shortest) + 1):
            for combo in itertools.combinations(shortest, r):
                cand = "".join(combo)
                if all(is_subseq(cand, w) for w in pos) and not any(
                    is_subseq(cand, w) for w in neg
                ):
                    expected = True
        rc, out = run(
            capsys,
            ["from-words", "--positives", ",".join(pos), "--negatives", ",".join(neg)],
        )
        assert (rc == 0) == expected, (pos, neg)
