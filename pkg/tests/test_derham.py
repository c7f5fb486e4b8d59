import numpy as np
import pytest

from wfseq.derham import (
    POTENTIAL_CLAUSES,
    SequenceSpec,
    all_sequences,
    check_exactness,
    check_potentials,
    dim_table,
    rank_nullity_audit,
    solve_potential,
)
from wfseq.errors import HypothesisViolated, InvalidSpec
from wfseq.fespace import TABLE_FAMILIES, SpaceSpec, build_space, random_member

from .assertions import assert_passed


def _clause(label):
    return next(c for c in POTENTIAL_CLAUSES if c.label == label)


@pytest.mark.parametrize("bc", ["none", "zero"])
def test_slvv_is_exact(bc):
    report = check_exactness(SequenceSpec("SLVV", bc, 3))
    assert_passed(report)
    assert report.alternating_sum == (1 if bc == "none" else 0)
    assert report.dims[0] == (28 if bc == "none" else 0)


@pytest.mark.parametrize("variant", ["curl", "div"])
@pytest.mark.parametrize("bc", ["none", "zero"])
def test_face_split_sequences_are_exact(bc, variant):
    assert_passed(check_exactness(SequenceSpec("SLV", bc, 2, dim=2, variant=variant)))


def test_float_mode_agrees_on_a_small_sequence():
    report = check_exactness(SequenceSpec("VVV", "none", 2, dim=2), mode="float")
    assert_passed(report)
    assert report.summary()["exact"]


def test_unknown_sequence():
    with pytest.raises(InvalidSpec, match="Unknown 3D sequence"):
        SequenceSpec("XYZW", "none", 3)


def test_unknown_variant():
    with pytest.raises(InvalidSpec, match="Unknown 2D variant"):
        SequenceSpec("SLV", "none", 2, dim=2, variant="grad")


def test_sequence_spaces_step_down_in_degree():
    seq = SequenceSpec("SSSL", "zero", 4)
    assert [s.label for s in seq.spaces] == ["ring-S0_4", "ring-S1_3", "ring-S2_2", "ring-L3_1"]


def test_all_sequences_counts():
    assert len(all_sequences(3)) == 8
    assert len(all_sequences(3, r2d=2)) == 20


def test_face_split_dimension_table():
    rows = dim_table(range(1, 3), TABLE_FAMILIES["ct"])
    assert rows
    assert all(row.matches for row in rows)


def test_rank_nullity_with_closed_forms():
    sums = rank_nullity_audit(3, computed=False)
    assert sums[("SLVV", "none")] == (1, 1)
    assert all(total == expected for total, expected in sums.values())


def test_rank_nullity_builds_every_space():
    sums = rank_nullity_audit(3)
    assert sums == rank_nullity_audit(3, computed=False)
    assert sums[("SSLV", "zero")] == (0, 0)


def test_grad_potentials():
    report = check_potentials(_clause("grad: L0 -> V1"), 1, samples=3, rng=np.random.default_rng(1))
    assert_passed(report)
    assert report.solved == 3


def test_div_potentials_onto_piecewise_constants():
    report = check_potentials(_clause("div: L2 -> V3"), 0, samples=3, rng=np.random.default_rng(2))
    assert_passed(report)


def test_potential_needs_curl_free_target(wf, rng):
    target_space = build_space(SpaceSpec("V1", 1), wf)
    target = random_member(target_space, rng)
    source = build_space(SpaceSpec("L0", 2), wf)
    with pytest.raises(HypothesisViolated, match="curl = 0"):
        solve_potential(target, source, "grad", target_space)


def test_zero_target_has_zero_potential(wf):
    target_space = build_space(SpaceSpec("V3", 0), wf)
    source = build_space(SpaceSpec("L2", 1), wf)
    zero = target_space.combination([0] * target_space.dim)
    assert solve_potential(zero, source, "div").is_zero()
