from wfseq.dispatcher import run_checks, worker_count

from .assertions import assert_passed


def _spot(check_id, expected):
    return {
        "check_id": check_id,
        "kind": "spot_dims",
        "claim": "spot dimension",
        "params": {"family": "CalV3", "degree": 0, "bc": "none", "expected": expected},
    }


def test_worker_count():
    assert worker_count(10, threads=4) == 4
    assert worker_count(2, threads=4) == 2
    assert worker_count(0, threads=4) == 1
    assert worker_count(3, threads=0) == 1


def test_worker_count_defaults_to_settings():
    # WFSEQ_THREADS is 1 under pytest
    assert worker_count(5) == 1


def test_inline_results_come_back_sorted():
    results = run_checks([_spot("b", 4), _spot("a", 5)], threads=1)
    assert [r.check_id for r in results] == ["a", "b"]
    assert not results[0].passed
    assert_passed(results[1])
