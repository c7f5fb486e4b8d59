from wfseq import ratlin
from wfseq.fespace import contains, membership


def assert_fields_equal(a, b):
    assert a.layout == b.layout
    assert ratlin.equal(a.coefficients, b.coefficients), "fields differ"


def assert_in_space(field, space):
    assert membership(field, space), f"field is not in {space.label}"


def assert_subspace(inner, outer):
    assert contains(outer, inner), f"{inner.label} is not contained in {outer.label}"


def assert_passed(report):
    assert report.passed, report


def assert_failed(report):
    assert not report.passed, report


def assert_all_results(report):
    failed = [name for name, ok in report.results.items() if not ok]
    assert not failed, f"failed: {failed}"


def assert_covers_internal_edges(report, prefix):
    for k in range(3):
        name = f"{prefix} {k}"
        assert name in report.results, f"{name!r} missing from {sorted(report.results)}"
        assert report.results[name], f"{name!r} failed"
