from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import CUBIC3, P1, P2
from stokes_mutant.cli import (
    EXIT_INVALID,
    EXIT_MALFORMED,
    EXIT_OK,
    dubrovin_check,
    dumps,
    load,
    main,
    parse_document,
    parse_word,
    to_json,
)
from stokes_mutant.mutation import BraidWord, random_mutation_system, random_stokes_data

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def test_validate_fixture(capsys):
    assert main(["mutsys", "validate", str(FIXTURES / "sd_t2.json")]) == EXIT_OK
    assert main(["mutsys", "validate", str(FIXTURES / "b_system_p2.json")]) == EXIT_OK


def test_validate_rejects_broken_data(tmp_path):
    doc = json.loads((FIXTURES / "sd_t2.json").read_text())
    doc["f_star"][0][1] = [5.0, 0.0]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["mutsys", "validate", str(path)]) == EXIT_INVALID


@pytest.mark.parametrize("text", ["{not json", json.dumps({"format": "other", "version": 1}),
                                  json.dumps({"format": "stokes-mutant", "version": 99, "kind": "stokes-data"})])
def test_malformed_input(tmp_path, text):
    path = tmp_path / "m.json"
    path.write_text(text)
    assert main(["mutsys", "validate", str(path)]) == EXIT_MALFORMED


def test_bad_braid_word_is_malformed(tmp_path):
    assert main(["mutsys", "mutate", str(FIXTURES / "sd_t2.json"), "s7"]) == EXIT_MALFORMED


def test_mutate_twice_equals_full_twist(tmp_path):
    outs = {}
    for w in ("s1 s1", "D D", "s1", "D"):
        p = tmp_path / f"{w.replace(' ', '_')}.json"
        assert main(["mutsys", "mutate", str(FIXTURES / "sd_t2.json"), w, "--out", str(p)]) == EXIT_OK
        outs[w] = p.read_bytes()
    assert outs["s1 s1"] == outs["D D"]
    assert outs["s1"] == outs["D"]
    assert outs["s1"] != outs["s1 s1"]


def test_mutate_output_validates(tmp_path):
    p = tmp_path / "out.json"
    assert main(["mutsys", "mutate", str(FIXTURES / "b_system_p2.json"), "s1 s2^-1", "--out", str(p)]) == EXIT_OK
    assert main(["mutsys", "validate", str(p)]) == EXIT_OK
    doc = json.loads(p.read_text())
    assert doc["meta"]["braid_applied"] == "s1 s2^-1"


def test_factor_identity(tmp_path):
    p = tmp_path / "f.json"
    assert main(["mutsys", "factor", str(FIXTURES / "identity_multiplier_p2.json"), "--out", str(p)]) == EXIT_OK
    doc = json.loads(p.read_text())
    assert doc["kind"] == "stokes-factors" and doc["factors"]
    assert all(f["identity"] for f in doc["factors"])


def test_round_trip_fixtures():
    for name in ("sd_t2.json", "identity_multiplier_p2.json", "b_system_p2.json"):
        text = (FIXTURES / name).read_text()
        obj, doc = load(FIXTURES / name)
        assert dumps(json.loads(text)) == text
        if isinstance(obj, tuple):
            continue
        assert dumps(to_json(obj, doc.get("meta"), doc.get("side"))) == text


def test_round_trip_random(rng):
    for dims in ((1, 2), (2, 1, 1)):
        for obj in (random_stokes_data(rng, dims), random_mutation_system(rng, dims)):
            text = dumps(to_json(obj))
            again = parse_document(json.loads(text))
            assert dumps(to_json(again)) == text
            assert np.array_equal(again.f, obj.f)


def test_parse_word_half_twist():
    assert parse_word("D", 3) == BraidWord(3, ((1, 1), (2, 1), (1, 1)))
    assert parse_word("D^-1", 2) == BraidWord(2, ((1, -1),))
    with pytest.raises(ValueError):
        parse_word("x1", 2)


def test_fano_commands(tmp_path):
    p = tmp_path / "e.json"
    assert main(["fano", "euler-matrix", "--pn", "2", "--out", str(p)]) == EXIT_OK
    assert json.loads(p.read_text())["euler_matrix"] == [[1, 3, 6], [0, 1, 3], [0, 0, 1]]
    assert main(["fano", "info", "--ci", "4", "3", "--out", str(p)]) == EXIT_OK
    info = json.loads(p.read_text())
    assert info["index"] == 2 and info["primitive_dim"] == 10 and info["cohomology_dim"] == 14
    assert main(["fano", "gamma-basis", "--pn", "1", "--out", str(p)]) == EXIT_OK
    assert json.loads(p.read_text())["convention"] == "b"


def test_stokes_compute(tmp_path):
    p = tmp_path / "a.json"
    assert main(["stokes", "compute", "--pn", "1", "--out", str(p)]) == EXIT_OK
    assert main(["mutsys", "validate", str(p)]) == EXIT_OK
    doc = json.loads(p.read_text())
    assert doc["side"] == "A" and doc["meta"]["theta0"] == 0.1


def test_unsupported_variety_exit_code():
    # index one is outside the pipeline's scope: reported as unusable input
    assert main(["stokes", "compute", "--ci", "4", "4"]) == EXIT_MALFORMED


def test_dubrovin_check_projective_line(tmp_path):
    md, js = tmp_path / "r.md", tmp_path / "r.json"
    assert main(["dubrovin", "check", "--pn", "1", "--theta0", "0.1", "--report", str(md), "--out", str(js)]) == EXIT_OK
    rep = json.loads(js.read_text())
    assert rep["verdict"] == "pass"
    assert "pass" in md.read_text().lower()


def test_dubrovin_report_cubic():
    rep = dubrovin_check(CUBIC3, 0.1)
    assert rep.verdict
    assert rep.max_distance <= 1e-3 and rep.residual_agreement <= 1e-8
    assert rep.gram_difference <= 1e-3
    assert all(rep.bookkeeping.values())


def test_dubrovin_report_gram_projective_plane():
    rep = dubrovin_check(P2, 0.1)
    assert rep.verdict
    assert np.allclose(rep.gram_b, [[1, 3, 6], [0, 1, 3], [0, 0, 1]], atol=1e-9)


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "stokes_mutant.cli", "mutsys", "validate",
                          str(FIXTURES / "sd_t2.json")], capture_output=True, text=True)
    assert res.returncode == EXIT_OK


@pytest.mark.parametrize("spec", [(4, 2), (5, 2, 2), (6, 3)])
def test_dubrovin_report_other_samples(spec):
    from stokes_mutant.cohomology import CompleteIntersection

    rep = dubrovin_check(CompleteIntersection(spec[0], spec[1:]), 0.1)
    assert rep.verdict and rep.residual_agreement <= 1e-8
