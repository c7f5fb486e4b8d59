import json

import pytest
from sympy import QQ

from wfseq.errors import InvalidSpec
from wfseq.reports import (
    RUNNERS,
    CheckResult,
    digest,
    render_json,
    render_md,
    run_check,
)


def _check(check_id, kind, **params):
    return {"check_id": check_id, "kind": kind, "claim": f"{kind} claim", "params": params}


def test_digest_is_stable_under_key_order():
    assert digest({"a": 1, "b": [QQ(1, 2)]}) == digest({"b": ["1/2"], "a": 1})
    assert digest({"a": 1}) != digest({"a": 2})


def test_result_document():
    result = CheckResult("x", "claim", {"r": 3}, False, {"rank": 2})
    document = result.to_document()
    assert document["status"] == "fail"
    assert document["witness_digest"] == digest({"rank": 2})
    assert set(document) == {"check_id", "claim", "params", "status", "witness_digest"}


def test_spot_dimension_check():
    result = run_check(_check("spot", "spot_dims", family="CalV2", degree=1, bc="zero", expected=38))
    assert result.passed
    assert result.witness == {"ring-CalV2_1": 38}


def test_failed_certification_is_a_result():
    result = run_check(_check("spot", "spot_dims", family="V3", degree=0, expected=13))
    assert result.status == "fail"


def test_face_split_dims_check():
    result = run_check(_check("dims-ct", "dims", table="ct", r=[1, 2]))
    assert result.passed
    assert all(computed == formula for computed, formula in result.witness.values())


def test_unisolvency_witness():
    result = run_check(_check("dofs-v3-3", "unisolvency", lemma="V3", r=3))
    assert result.passed
    assert result.witness["count"] == result.witness["rank"] == 12


def test_exactness_over_a_degree_range():
    result = run_check(
        _check("exact", "exactness", seq="SLV", bc="none", dim=2, variant="div", r=[1, 2])
    )
    assert result.passed
    assert len(result.witness["sequences"]) == 2


def test_unknown_kind():
    with pytest.raises(KeyError):
        run_check(_check("x", "sideways"))


def test_every_kind_has_a_runner():
    assert len(RUNNERS) == 15


def test_json_report_is_deterministic():
    results = [
        CheckResult("b", "second", {"r": 1}, True, {"w": QQ(1, 3)}),
        CheckResult("a", "first", {}, True, {}),
    ]
    text = render_json(results)
    assert text == render_json(list(reversed(results)))
    document = json.loads(text)
    assert document["passed"]
    assert [c["check_id"] for c in document["checks"]] == ["a", "b"]
    assert text.endswith("\n")


def test_markdown_report():
    results = [
        CheckResult("a", "first", {}, True, {}),
        CheckResult("b", "second", {}, False, {}),
    ]
    text = render_md(results)
    assert "| a | pass | first |" in text
    assert text.endswith("1 passed, 1 failed\n")


def test_raising_runner_gives_a_failing_result(monkeypatch):
    def runner(params):
        raise InvalidSpec(f"Unknown family {params['family']}")

    monkeypatch.setitem(RUNNERS, "sideways", runner)
    result = run_check(_check("x", "sideways", family="Q9"))
    assert result.status == "fail"
    assert result.witness == {"error": "InvalidSpec: Unknown family Q9"}
    assert result.to_document()["witness_digest"] == digest(result.witness)


def test_identity_below_its_degree_fails_without_raising():
    result = run_check(_check("identity-0", "identity", r=0, samples=1, seed=1))
    assert not result.passed
    assert result.witness["error"].startswith("UnsupportedDegree")
