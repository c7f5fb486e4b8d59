import pytest

from wfseq import settings, suite
from wfseq.errors import ConfigError
from wfseq.reports import RUNNERS


def _write(tmp_path, monkeypatch, text):
    path = tmp_path / "suite.yaml"
    path.write_text(text)
    monkeypatch.setattr(settings, "SUITE_PATH", path)


def test_shipped_suite_is_valid():
    ids = suite.check_ids()
    assert len(ids) == len(set(ids))
    assert all(entry["kind"] in RUNNERS for entry in suite.load_suite()["checks"])
    assert "dims-smooth" in ids


def test_seed_fills_missing_params():
    checks = suite.checks(seed=7, only=["dims-smooth"])
    assert [c["check_id"] for c in checks] == ["dims-smooth"]
    assert checks[0]["params"]["seed"] == 7


def test_only_filters_by_prefix():
    checks = suite.checks(only=["unisolvency-", "dofs-"])
    assert checks
    assert all(c["kind"] == "unisolvency" for c in checks)


def test_missing_file(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "SUITE_PATH", tmp_path / "nope.yaml")
    with pytest.raises(ConfigError, match="does not exist"):
        suite.load_suite()


@pytest.mark.parametrize(
    "text,message",
    [
        ("- 1\n- 2\n", "mapping with a list"),
        ("checks:\n  - id: a\n    kind: dims\n", "missing claim, params"),
        (
            "checks:\n"
            "  - {id: a, kind: dims, claim: c, params: {}}\n"
            "  - {id: a, kind: dims, claim: c, params: {}}\n",
            "Duplicate check id a",
        ),
        ("checks:\n  - {id: a, kind: sideways, claim: c, params: {}}\n", "unknown kind"),
        ("checks:\n  - {id: a, kind: dims, claim: c, params: [1]}\n", "must be a mapping"),
    ],
    ids=["not-a-mapping", "missing-keys", "duplicate", "unknown-kind", "bad-params"],
)
def test_invalid_suites(tmp_path, monkeypatch, text, message):
    _write(tmp_path, monkeypatch, text)
    with pytest.raises(ConfigError, match=message):
        suite.load_suite()
