import json

import pytest

from wfseq import settings
from wfseq.cli import get_command_line_parser, main


def _parse(*argv):
    return get_command_line_parser().parse_args(list(argv))


def test_degree_range():
    assert _parse("dims", "--r", "0..5").r == [0, 5]
    assert _parse("dims", "--r", "3").r == [3, 3]
    assert _parse("dims").r == [0, 5]


@pytest.mark.parametrize("value", ["a..b", "5..1", "-1"])
def test_bad_degree_range(value):
    with pytest.raises(SystemExit) as e:
        _parse("dims", "--r", value)
    assert e.value.code == 2


def test_comma_separated_lemmas():
    assert _parse("unisolvency", "--lemma", "S0, V3").lemma == ["S0", "V3"]


def test_sequence_names_are_upper_cased():
    args = _parse("exactness", "--seq", "slvv", "--bc", "zero")
    checks = args.func(args)
    assert [c["check_id"] for c in checks] == ["exact-3d-slvv-zero"]


def test_face_split_variants():
    args = _parse("exactness", "--dim", "2", "--seq", "SLV", "--bc", "none", "--r", "1")
    checks = args.func(args)
    assert [c["check_id"] for c in checks] == ["exact-2d-slv-curl-none", "exact-2d-slv-div-none"]


def test_unisolvency_skips_low_degrees():
    args = _parse("unisolvency", "--r", "3..4", "--lemma", "S2,V3")
    ids = [c["check_id"] for c in args.func(args)]
    assert ids == ["dofs-s2-4", "dofs-v3-3", "dofs-v3-4"]


def test_float_tolerance_only_in_float_mode():
    args = _parse("dims", "--table", "ct", "--tol", "0.1")
    assert "tol" not in args.func(args)[0]["params"]
    args = _parse("dims", "--table", "ct", "--mode", "float", "--tol", "0.1")
    assert args.func(args)[0]["params"]["tol"] == 0.1


def test_dims_to_stdout(capsys):
    assert main(["dims", "--table", "ct", "--r", "1"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert document["passed"]
    assert [c["check_id"] for c in document["checks"]] == ["dims-ct"]


def test_report_written_to_output_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "OUTPUT_DIR", tmp_path)
    status = main(["dims", "--table", "ct", "--r", "1", "--format", "md", "--output", "out/d.md"])
    assert status == 0
    assert "1 passed, 0 failed" in (tmp_path / "out" / "d.md").read_text()


def test_unknown_lemma_exits_2():
    assert main(["unisolvency", "--lemma", "S9"]) == 2


def test_unknown_sequence_exits_2():
    assert main(["exactness", "--seq", "XYZW"]) == 2


def test_empty_report_selection_exits_2():
    assert main(["report", "--only", "nothing-matches"]) == 2


def test_report_runs_a_suite_subset(capsys):
    assert main(["report", "--only", "dims-spot"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert len(document["checks"]) == 3


def test_identity_below_its_degree_exits_2():
    assert main(["identity", "--r", "0"]) == 2
