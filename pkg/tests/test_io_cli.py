import csv
import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmflats import io
from rmflats.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, ExperimentConfig, build_parser, main
from rmflats.flats import random_flat_set
from rmflats.gf import GF
from rmflats.lifted import BaseCode
from rmflats.poly import ReducedPoly, TruthTable, degree

FIXTURES = Path(__file__).parent / "fixtures"


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4, 8, 9]), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_truth_table_round_trip(q, n, seed):
    F = GF(q)
    f = TruthTable(F, n, np.random.default_rng(seed).integers(0, q, size=q ** n))
    text = io.dumps_truth_table(f)
    assert io.loads_truth_table(text) == f
    lines = text.splitlines()
    assert len(lines) == 1 + (F.r > 1) + -(-q ** n // 32)
    if F.r > 1:
        assert tuple(map(int, lines[1].split())) == F.modulus


def test_truth_table_errors():
    with pytest.raises(io.FormatError):
        io.loads_truth_table("2 1 2\n0 1 1\n")
    with pytest.raises(io.FormatError):
        io.loads_truth_table("2 2 1\n0 1 1 0\n")          # missing modulus line
    with pytest.raises(io.FormatError):
        io.loads_truth_table("2 2 1\n1 0 1\n0 1 1 0\n")   # reducible modulus
    with pytest.raises(io.FormatError):
        io.loads_truth_table("3 1 1\n0 1 5\n")


def test_flat_set_round_trip(rng):
    for q, n, t in [(2, 3, 1), (4, 2, 1), (3, 3, 2), (9, 2, 1)]:
        S = random_flat_set(GF(q), n, t, 7, rng)
        assert io.loads_flat_set(io.dumps_flat_set(S)) == S
    with pytest.raises(io.FormatError):
        io.loads_flat_set("2 1 3 1\n0 | 1 ; 2\n")
    with pytest.raises(io.FormatError):
        io.loads_flat_set("2 1 3 1\n0 1\n")


def test_base_code_round_trip():
    for path in FIXTURES.glob("*.base"):
        B = io.read_base_code(path)
        assert io.dumps_base_code(B) == path.read_text()
    assert io.read_base_code(FIXTURES / "rm_q2_t2_d1.base") == BaseCode.reed_muller(GF(2), 2, 1)
    with pytest.raises(io.FormatError):
        io.loads_base_code("2 1 2\n0 0 0\n")


def test_json_encoding(capsys):
    F = GF(3)
    doc = io.encode({"x": Fraction(2, 6), "p": ReducedPoly(F, 1, {(2,): 1}), "v": np.int64(3)})
    assert doc["x"] == {"exact": "1/3", "value": 1 / 3}
    assert io.decode_fraction(doc["x"]) == Fraction(1, 3)
    assert doc["p"] == {"n": 1, "terms": [[[2], 1]]} and doc["v"] == 3
    io.dump_json(None, {"a": 1})
    assert json.loads(capsys.readouterr().out) == {"a": 1}


def test_config_round_trip():
    parser = build_parser()
    argv = ["correct", "--fn", "f.tt", "--degree", "0", "--max-iters", "5", "--check-distance"]
    cfg = ExperimentConfig.from_namespace(parser.parse_args(argv))
    assert cfg.options["degree"] == 0
    again = ExperimentConfig.from_namespace(parser.parse_args(cfg.to_argv()))
    assert again == cfg
    cfg2 = ExperimentConfig.from_namespace(parser.parse_args(["gen", "random-function", "--n", "2", "--seed", "0"]))
    assert cfg2.options["seed"] == 0 and cfg2.positional == ("random-function",)


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.tt", tmp_path / "b.tt"
    for path in (a, b):
        code, _, _ = run(["gen", "corrupted-codeword", "--p", 3, "--n", 3, "--degree", 2,
                          "--corruptions", 2, "--seed", 7, "--out", path], capsys)
        assert code == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    side = json.loads((tmp_path / "a.tt.truth.json").read_text())
    f = io.read_truth_table(a)
    g = TruthTable(f.field, 3, np.array(side["original_values"]))
    assert degree(g) <= 2 and f.hamming(g) == 2 == len(side["corrupted_points"])


def test_cli_end_to_end(tmp_path, capsys):
    fn = tmp_path / "f.tt"
    run(["gen", "corrupted-codeword", "--p", 2, "--n", 4, "--degree", 1, "--seed", 3, "--out", fn], capsys)
    code, out, _ = run(["test", "--fn", fn, "--degree", 1], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["result"]["epsilon"]["exact"] == "1/4"   # planes through one point of F_2^4
    code, out, _ = run(["test", "--fn", fn, "--degree", 1, "--samples", 500, "--seed", 1], capsys)
    assert code == EXIT_OK and json.loads(out)["result"]["mode"] == "monte-carlo"
    fixed = tmp_path / "g.tt"
    code, out, _ = run(["correct", "--fn", fn, "--degree", 1, "--check-distance", "--emit-fn", fixed], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["result"]["converged"] and doc["result"]["iterations"] == 1
    assert degree(io.read_truth_table(fixed)) <= 1
    for cmd in ("shadow", "expansion", "spectra"):
        code, out, _ = run([cmd, "--fn", fn, "--degree", 1], capsys)
        assert code == EXIT_OK, out
    code, out, _ = run(["expansion", "--zoom", "hyperplane", "--p", 2, "--n", 4, "--flat-dim", 2], capsys)
    assert code == EXIT_VIOLATION and json.loads(out)["result"]["stay"]["exact"] == "8/21"
    code, out, _ = run(["lifted", "test", "--base", FIXTURES / "rm_q2_t2_d1.base", "--fn", fn,
                        "--flat-dim", 3], capsys)
    assert code == EXIT_OK and json.loads(out)["result"]["member"] is False
    code, out, _ = run(["lifted", "correct", "--base", FIXTURES / "rm_q2_t2_d1.base", "--fn", fn], capsys)
    assert code == EXIT_OK and json.loads(out)["result"]["converged"]


def test_cli_usage_errors(tmp_path, capsys):
    assert run(["test", "--fn", tmp_path / "missing.tt", "--degree", 1], capsys)[0] == EXIT_USAGE
    fn = tmp_path / "f.tt"
    run(["gen", "random-function", "--n", 3, "--seed", 0, "--out", fn], capsys)
    code, _, err = run(["test", "--fn", fn, "--degree", 1, "--samples", 10], capsys)
    assert code == EXIT_USAGE and "seed" in err
    assert run(["bogus"], capsys)[0] == EXIT_USAGE
    assert run(["shadow", "--fn", fn, "--degree", 1, "--cap", 3], capsys)[0] == EXIT_USAGE
    assert run(["shadow", "--fn", fn, "--degree", 1], capsys)[0] in (EXIT_OK, EXIT_VIOLATION)
    bad = tmp_path / "bad.tt"
    bad.write_text("2 1 2\n0 1\n")
    assert run(["correct", "--fn", bad, "--degree", 1], capsys)[0] == EXIT_USAGE


def test_experiment_writes_csv(tmp_path, capsys):
    out = tmp_path / "zoom.csv"
    assert run(["experiment", "zoom-expansion", "--out", out], capsys)[0] == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 16
    row = next(r for r in rows if r["instance"] == "q2-t2-hyperplane")
    assert row["stay"] == "8/21"
