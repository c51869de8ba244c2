import json

import pytest

from contsem.cli import main
from contsem.structures import load_presheaf, load_structure

STRUCTURE = {
    "spaces": [
        {
            "id": "X",
            "points": ["a", "b", "c"],
            "dist": [
                ["0", "1/4", "1/2"],
                ["1/4", "0", "1/4"],
                ["1/2", "1/4", "0"],
            ],
        },
        {"id": "Y", "grid": 2},
        {
            "id": "XX",
            "points": ["aa", "ab", "ba", "bb"],
            "dist": [
                ["0", "1/4", "1/4", "1/4"],
                ["1/4", "0", "1/4", "1/4"],
                ["1/4", "1/4", "0", "1/4"],
                ["1/4", "1/4", "1/4", "0"],
            ],
        },
    ],
    "maps": [
        {
            "id": "g",
            "source": "X",
            "target": "Y",
            "assignment": {"a": "0", "b": "1/2", "c": "1"},
            "modulus": "linear:2",
        }
    ],
    "constants": [{"id": "c", "space": "Y", "point": "0"}],
    "predicates": [
        {
            "id": "P",
            "space": "Y",
            "values": {"0": "0", "1/2": "1/2", "1": "1"},
            "modulus": "id",
        },
        {
            "id": "Q",
            "space": "X",
            "values": {"a": "0", "b": "1/3", "c": "1/3"},
            "modulus": "linear:2",
        },
    ],
    "families": [
        {
            "id": "R",
            "space": "X",
            "thresholds": {"a": "0", "b": "1", "c": "1"},
        }
    ],
}

PRESHEAF = {
    "category": {
        "objects": ["a", "b"],
        "morphisms": [
            {"id": "1_a", "source": "a", "target": "a"},
            {"id": "1_b", "source": "b", "target": "b"},
            {"id": "f", "source": "b", "target": "a"},
        ],
        "composition": [
            ["1_a", "1_a", "1_a"],
            ["1_b", "1_b", "1_b"],
            ["1_a", "f", "f"],
            ["f", "1_b", "f"],
        ],
    },
    "spaces": {
        "a": {"points": ["p", "q"], "dist": [["0", "1/2"], ["1/2", "0"]]},
        "b": {"points": ["u"], "dist": [["0"]]},
    },
    "restrictions": {
        "1_a": {"p": "p", "q": "q"},
        "1_b": {"u": "u"},
        "f": {"p": "u", "q": "u"},
    },
    "predicates": {
        "R": {"a": {"p": "1/4", "q": "1/2"}, "b": {"u": "0"}}
    },
}


@pytest.fixture
def structure_file(tmp_path):
    path = tmp_path / "structure.json"
    path.write_text(json.dumps(STRUCTURE))
    return str(path)


@pytest.fixture
def presheaf_file(tmp_path):
    path = tmp_path / "presheaf.json"
    path.write_text(json.dumps(PRESHEAF))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_validate(structure_file, capsys):
    code, report = run(capsys, ["validate", structure_file])
    assert code == 0
    assert report["status"] == "ok"
    assert report["spaces"] == ["X", "XX", "Y"]
    assert report["predicates"] == ["P", "Q"]


def test_validate_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "spaces": [{"id": "B", "points": ["a", "b"],
                    "dist": [["0", "2"], ["2", "0"]]}]
    }))
    code, report = run(capsys, ["validate", str(bad)])
    assert code == 1
    assert "carrier" in report["error"]


def test_validate_missing_file(capsys):
    code, report = run(capsys, ["validate", "/nonexistent.json"])
    assert code == 1


def test_eval_closed(structure_file, capsys):
    code, report = run(
        capsys, ["eval", structure_file, "--formula", "inf y:Y. d(c, y)"]
    )
    assert code == 0
    assert report["value"] == "0"


def test_eval_env_space_binding(structure_file, capsys):
    code, report = run(
        capsys,
        ["eval", structure_file, "--formula", "P(y)", "--env", "y=Y"],
    )
    assert code == 0
    assert report["predicate"]["values"] == {"0": "0", "1/2": "1/2", "1": "1"}


def test_eval_env_point_binding(structure_file, capsys):
    code, report = run(
        capsys,
        ["eval", structure_file, "--formula", "P(y)", "--env", "y=c"],
    )
    assert code == 0
    assert report["value"] == "0"


def test_eval_syntax_error(structure_file, capsys):
    code, report = run(capsys, ["eval", structure_file, "--formula", "d(x, y"])
    assert code == 1
    assert "end of input" in report["error"]


def test_envelope(structure_file, capsys):
    code, report = run(
        capsys,
        ["envelope", structure_file, "--family", "R", "--modulus", "linear:2"],
    )
    assert code == 0
    assert report["predicate"]["values"] == {"a": "0", "b": "1/2", "c": "1"}


def test_quantify(structure_file, capsys):
    # build a product-shaped structure on the fly
    code, report = run(
        capsys,
        ["eval", structure_file, "--formula", "inf y:Y. d(y, x)", "--env", "x=Y"],
    )
    assert code == 0
    assert set(report["predicate"]["values"].values()) == {"0"}


def test_classify(structure_file, capsys):
    code, report = run(
        capsys, ["classify", structure_file, "--predicate", "P", "--grid", "2"]
    )
    assert code == 0
    assert report["assignment"] == {"0": "0", "1/2": "1/2", "1": "1"}


def test_classify_off_grid(structure_file, capsys):
    code, report = run(
        capsys, ["classify", structure_file, "--predicate", "Q", "--grid", "4"]
    )
    assert code == 1
    assert "least compatible grid: 3" in report["error"]


def test_presheaf_check(presheaf_file, capsys):
    code, report = run(capsys, ["presheaf-check", presheaf_file])
    assert code == 0
    assert report["objects"] == ["a", "b"]
    assert report["predicates"] == ["R"]


def test_presheaf_classify(presheaf_file, capsys):
    code, report = run(
        capsys, ["presheaf-classify", presheaf_file, "--predicate", "R"]
    )
    assert code == 0
    char = report["characteristic"]
    assert char["a"]["p"]["theta"] == {"1_a": "1/4", "f": "0"}
    assert char["a"]["p"]["nu"] == "1/4"
    assert char["b"]["u"]["theta"] == {"1_b": "0"}


def test_laws_suite(capsys):
    code, report = run(
        capsys, ["laws", "--suite", "envelope", "--seed", "7", "--size", "4"]
    )
    assert code == 0
    assert report["status"] == "ok"
    assert report["suites"][0]["checks"] > 0


def test_laws_determinism(capsys):
    main(["laws", "--suite", "classifier", "--seed", "5", "--size", "6"])
    first = capsys.readouterr().out
    main(["laws", "--suite", "classifier", "--seed", "5", "--size", "6"])
    second = capsys.readouterr().out
    assert first == second


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_mode_flag(tmp_path, capsys):
    path = tmp_path / "ext.json"
    path.write_text(json.dumps({
        "spaces": [{"id": "E", "points": ["a", "b"],
                    "dist": [["0", "3"], ["3", "0"]]}]
    }))
    code, _ = run(capsys, ["--mode", "extended-nonneg", "validate", str(path)])
    assert code == 0
    code, _ = run(capsys, ["validate", str(path)])
    assert code == 1  # distance 3 exceeds the unit carrier


def test_structure_round_trip(structure_file):
    st = load_structure(structure_file)
    assert set(st.signature.spaces) == {"X", "Y", "XX"}
    assert st.signature.maps["g"].modulus is not None
    assert st.families["R"].thresholds["a"] == 0


def test_presheaf_round_trip(presheaf_file):
    F, preds = load_presheaf(presheaf_file)
    assert set(F.category.objects) == {"a", "b"}
    assert "R" in preds
