"""Local de Rham sequences on a split tetrahedron or a split face.

Exactness is certified by rank arithmetic on exact matrices: every arrow's
image is compared with the kernel of the next arrow, the head map must have
the constants (or nothing) as kernel and the last map must be onto.
"""

from dataclasses import dataclass

import numpy as np

from . import ratlin, settings
from .errors import HypothesisViolated, InvalidSpec, NoFormula, NoSolution
from .fespace import (
    SpaceSpec,
    build_space,
    formula_dimension,
    intersect,
    membership,
    random_member,
    subspace,
)
from .logger import log_call, logger
from .pwpoly import PiecewiseField, operator
from .splitgeom import reference_face, reference_split


OPS_3D = ("grad", "curl", "div")

# name: {bc: families}
SEQUENCES_3D = {
    "VVVV": {"none": ("V0", "V1", "V2", "V3"), "zero": ("V0", "V1", "V2", "V3")},
    "SLVV": {"none": ("S0", "L1", "V2", "V3"), "zero": ("S0", "L1", "CalV2", "V3")},
    "SSLV": {"none": ("S0", "S1", "L2", "V3"), "zero": ("S0", "S1", "L2", "CalV3")},
    "SSSL": {"none": ("S0", "S1", "S2", "L3"), "zero": ("S0", "S1", "S2", "L3")},
}

# name: {variant: families}; grad/curl or rot/div
SEQUENCES_2D = {
    "VVV": {"curl": ("ctL0", "ctVcurl1", "ctV2"), "div": ("ctL0", "ctVdiv1", "ctV2")},
    "SLV": {"curl": ("ctS0", "ctL1", "ctV2"), "div": ("ctS0", "ctL1", "ctV2")},
    "SSL": {"curl": ("ctS0", "ctScurl1", "ctL2"), "div": ("ctS0", "ctSdiv1", "ctL2")},
}

OPS_2D = {"curl": ("grad", "curl"), "div": ("rot", "div")}


@dataclass(frozen=True)
class SequenceSpec:
    name: str
    bc: str
    r: int
    dim: int = 3
    variant: str = "curl"

    def __post_init__(self):
        table = SEQUENCES_3D if self.dim == 3 else SEQUENCES_2D
        if self.dim not in (2, 3) or self.name not in table:
            msg = f"Unknown {self.dim}D sequence {self.name!r}"
            raise InvalidSpec(msg)
        if self.bc not in ("none", "zero"):
            msg = f"Unknown boundary condition {self.bc!r}"
            raise InvalidSpec(msg)
        if self.dim == 2 and self.variant not in OPS_2D:
            msg = f"Unknown 2D variant {self.variant!r}; expected curl or div"
            raise InvalidSpec(msg)

    @property
    def families(self):
        if self.dim == 3:
            return SEQUENCES_3D[self.name][self.bc]
        return SEQUENCES_2D[self.name][self.variant]

    @property
    def ops(self):
        return OPS_3D if self.dim == 3 else OPS_2D[self.variant]

    @property
    def spaces(self):
        return [SpaceSpec(f, self.r - i, self.bc) for i, f in enumerate(self.families)]

    @property
    def label(self):
        suffix = f"/{self.variant}" if self.dim == 2 else ""
        return f"{self.name}{suffix}[{self.bc}, r={self.r}]"

    def default_mesh(self):
        return reference_split() if self.dim == 3 else reference_face()


@dataclass(frozen=True)
class ArrowReport:
    op: str
    rank: int
    kernel_dim: int
    image_dim: int
    maps_into: bool
    composes_to_zero: bool


@dataclass(frozen=True)
class ExactnessReport:
    seq: SequenceSpec
    dims: tuple
    arrows: tuple
    head_ok: bool
    tail_ok: bool
    alternating_sum: int
    expected_sum: int
    mode: str = "exact"

    @property
    def exact_at(self):
        """image of each arrow equals the kernel of the next one."""
        return tuple(
            a.rank == b.kernel_dim for a, b in zip(self.arrows, self.arrows[1:])
        )

    @property
    def passed(self):
        return (
            self.head_ok
            and self.tail_ok
            and all(self.exact_at)
            and all(a.maps_into and a.composes_to_zero for a in self.arrows)
            and self.alternating_sum == self.expected_sum
        )

    def summary(self):
        return {
            "sequence": self.seq.label,
            "dims": list(self.dims),
            "ranks": [a.rank for a in self.arrows],
            "alternating_sum": self.alternating_sum,
            "exact": self.passed,
        }


def _rank(m, mode, tol):
    if mode == "float":
        return ratlin.float_rank(m, tol)
    return ratlin.rank_or_zero(m)


def _maps_into(target, images, mode, tol):
    if images.shape[1] == 0 or ratlin.is_zero(images):
        return True
    if target.dim == 0:
        return False
    if mode == "float":
        joined = ratlin.hstack(target.basis, images)
        return ratlin.float_rank(joined, tol) == ratlin.float_rank(target.basis, tol)
    return ratlin.in_column_span(target.basis, images)


def image_matrix(op, space):
    """op applied to every basis field, as columns on the target layout."""
    derivative = operator(op, space.layout)
    if space.dim == 0:
        return derivative, ratlin.zeros(derivative.target.size, 0)
    return derivative, ratlin.normal(derivative.matrix * space.basis)


@log_call
def check_exactness(seq, mesh=None, mode="exact", tol=None):
    """Certify a sequence; failures come back as a report, never an exception."""
    mesh = mesh or seq.default_mesh()
    tol = settings.FLOAT_TOL if tol is None else tol
    spaces = [build_space(s, mesh) for s in seq.spaces]
    images = [image_matrix(op, space) for op, space in zip(seq.ops, spaces)]
    arrows = []
    for i, (op, (_, m)) in enumerate(zip(seq.ops, images)):
        target = spaces[i + 1]
        rank = _rank(m, mode, tol)
        if i + 1 < len(images) and m.shape[1]:
            following = images[i + 1][0].matrix
            composes = ratlin.is_zero(following * m)
        else:
            composes = True
        arrows.append(
            ArrowReport(
                op=op,
                rank=rank,
                kernel_dim=spaces[i].dim - rank,
                image_dim=rank,
                maps_into=_maps_into(target, m, mode, tol),
                composes_to_zero=composes,
            )
        )
    expected_kernel = 0 if seq.bc == "zero" else 1
    dims = tuple(s.dim for s in spaces)
    alternating = sum((-1) ** i * d for i, d in enumerate(dims))
    report = ExactnessReport(
        seq=seq,
        dims=dims,
        arrows=tuple(arrows),
        head_ok=arrows[0].kernel_dim == expected_kernel,
        tail_ok=arrows[-1].rank == dims[-1],
        alternating_sum=alternating,
        expected_sum=expected_kernel,
        mode=mode,
    )
    logger.debug("exactness", **report.summary())
    return report


@dataclass(frozen=True)
class PotentialClause:
    """op maps the source space onto the kernel part of the target space.

    ``source`` is a tuple of (family, bc) pairs whose spaces are intersected;
    source degrees are one above the target degree.
    """

    op: str
    target: tuple
    source: tuple

    @property
    def label(self):
        source = " ∩ ".join(_pair_label(p) for p in self.source)
        return f"{self.op}: {source} -> {_pair_label(self.target)}"

    def target_spec(self, r):
        return SpaceSpec(self.target[0], r, self.target[1])

    def source_specs(self, r):
        return [SpaceSpec(f, r + 1, bc) for f, bc in self.source]


def _pair_label(pair):
    family, bc = pair
    return f"ring-{family}" if bc == "zero" else family


POTENTIAL_CLAUSES = (
    PotentialClause("div", ("CalV3", "zero"), (("L2", "zero"),)),
    PotentialClause("div", ("V3", "zero"), (("L2", "none"), ("V2", "zero"))),
    PotentialClause("div", ("V3", "none"), (("L2", "none"),)),
    PotentialClause("div", ("L3", "zero"), (("S2", "zero"),)),
    PotentialClause("div", ("L3", "none"), (("S2", "none"),)),
    PotentialClause("curl", ("CalV2", "zero"), (("L1", "zero"),)),
    PotentialClause("curl", ("V2", "none"), (("L1", "none"),)),
    PotentialClause("curl", ("L2", "zero"), (("S1", "zero"),)),
    PotentialClause("curl", ("L2", "none"), (("S1", "none"),)),
    PotentialClause("curl", ("S2", "zero"), (("S1", "zero"),)),
    PotentialClause("curl", ("S2", "none"), (("S1", "none"),)),
    PotentialClause("grad", ("V1", "zero"), (("L0", "zero"),)),
    PotentialClause("grad", ("V1", "none"), (("L0", "none"),)),
    PotentialClause("grad", ("L1", "zero"), (("S0", "zero"),)),
    PotentialClause("grad", ("L1", "none"), (("S0", "none"),)),
    PotentialClause("grad", ("S1", "zero"), (("S0", "zero"),)),
    PotentialClause("grad", ("S1", "none"), (("S0", "none"),)),
)

# The operator a potential's image must be annihilated by
_NEXT_OP = {"grad": "curl", "curl": "div", "div": None}


def source_space(specs, mesh):
    spaces = [build_space(s, mesh) for s in specs]
    out = spaces[0]
    for other in spaces[1:]:
        out = intersect(out, other)
    return out


def _check_hypothesis(target, op, target_space):
    if target_space is not None and not membership(target, target_space):
        msg = f"Target is not a member of {target_space.label}"
        raise HypothesisViolated(msg)
    following = _NEXT_OP[op]
    if following is None:
        return
    derivative = operator(following, target.layout)
    if not ratlin.is_zero(derivative.matrix * target.coefficients):
        msg = f"Target of {op} must satisfy {following} = 0"
        raise HypothesisViolated(msg)


def solve_potential(target, source, op, target_space=None):
    """A member w of source (a SpaceBasis) with op(w) = target exactly.

    Raises HypothesisViolated when target is not curl-free (grad), not
    div-free (curl) or outside target_space, and NoSolution when no potential
    exists in source.
    """
    _check_hypothesis(target, op, target_space)
    if target.is_zero():
        return PiecewiseField(source.layout, ratlin.zeros(source.layout.size, 1))
    derivative, m = image_matrix(op, source)
    if derivative.target != target.layout:
        msg = f"{op} of {source.label} does not land on {target.layout}"
        raise HypothesisViolated(msg)
    if source.dim == 0:
        msg = f"{source.label} is trivial, cannot reach a nonzero target"
        raise NoSolution(msg)
    x = ratlin.solve(m, target.coefficients)
    return source.combination(ratlin.entries(x))


def kernel_part(space, op):
    """Members of space annihilated by op; the whole space when op is None."""
    if op is None or space.dim == 0:
        return space
    derivative = operator(op, space.layout)
    return subspace(space, derivative.matrix, f"ker {op} ∩ {space.label}")


@dataclass(frozen=True)
class PotentialReport:
    clause: PotentialClause
    r: int
    samples: int
    solved: int
    failures: tuple = ()

    @property
    def passed(self):
        return self.solved == self.samples and not self.failures


@log_call
def check_potentials(clause, r, mesh=None, samples=5, rng=None):
    """Solve for potentials of random targets drawn from the clause's kernel part."""
    mesh = mesh or reference_split()
    rng = rng if rng is not None else np.random.default_rng(settings.SEED)
    target_space = build_space(clause.target_spec(r), mesh)
    targets = kernel_part(target_space, _NEXT_OP[clause.op])
    source = source_space(clause.source_specs(r), mesh)
    solved, failures = 0, []
    for _ in range(samples):
        target = random_member(targets, rng)
        try:
            w = solve_potential(target, source, clause.op, target_space)
        except NoSolution as e:
            failures.append(str(e))
            continue
        derivative = operator(clause.op, source.layout)
        if derivative(w) == target and membership(w, source):
            solved += 1
        else:
            failures.append("potential does not reproduce its target")
    return PotentialReport(clause, r, samples, solved, tuple(failures))


@dataclass(frozen=True)
class DimRow:
    spec: SpaceSpec
    computed: int
    formula: int | None

    @property
    def matches(self):
        return self.formula is None or self.computed == self.formula


def dim_table(r_range, families, mesh=None, mode="exact", tol=None):
    """Computed and closed-form dimensions side by side.

    families is a list of SpaceSpecs whose degree is ignored.
    """
    rows = []
    for r in r_range:
        for spec in families:
            spec = spec.with_degree(r)
            target = mesh
            if target is None:
                target = reference_split() if spec.dim == 3 else reference_face()
            space = build_space(spec, target)
            computed = space.dim
            if mode == "float":
                computed = ratlin.float_rank(space.basis, settings.FLOAT_TOL if tol is None else tol)
            try:
                formula = formula_dimension(spec)
            except NoFormula:
                formula = None
            rows.append(DimRow(spec, computed, formula))
    logger.debug("dimension table", rows=len(rows), mismatches=sum(not r.matches for r in rows))
    return rows


def _dimension(spec, mesh, computed):
    if not computed:
        try:
            return formula_dimension(spec)
        except NoFormula:
            pass
    return build_space(spec, mesh).dim


def rank_nullity_audit(r, computed=True, mesh=None):
    """Alternating sums of the dimensions of the smooth sequences.

    Every space is built and its dimension taken from its basis. With
    computed=False the closed forms are summed instead, falling back to the
    built space below a formula's range.
    Returns {(name, bc): (sum, expected)}.
    """
    out = {}
    for name in ("SLVV", "SSLV", "SSSL"):
        for bc in ("none", "zero"):
            seq = SequenceSpec(name, bc, r)
            target = mesh or seq.default_mesh()
            dims = [_dimension(s, target, computed) for s in seq.spaces]
            total = sum((-1) ** i * d for i, d in enumerate(dims))
            out[(name, bc)] = (total, 1 if bc == "none" else 0)
    return out


def all_sequences(r, r2d=None):
    """Every 3D sequence at degree r and every 2D sequence at degree r2d."""
    out = [
        SequenceSpec(name, bc, r) for name in SEQUENCES_3D for bc in ("zero", "none")
    ]
    if r2d is not None:
        out.extend(
            SequenceSpec(name, bc, r2d, dim=2, variant=variant)
            for name in SEQUENCES_2D
            for variant in OPS_2D
            for bc in ("zero", "none")
        )
    return out
