"""Run one named check and render collections of results.

A check is a dict with ``check_id``, ``kind``, ``params`` and ``claim``.
Every kind maps to a runner returning (passed, witness); the witness holds
the exact data the verdict was drawn from, as strings and ints, and its
digest goes into the report so a failure can be reproduced.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import derham, dofproj, globalfe, ratlin, settings
from .errors import WfseqError
from .fespace import TABLE_FAMILIES, SpaceSpec, build_space, reproduces_polynomials
from .logger import logger
from .splitgeom import reference_split


def _range(value):
    if isinstance(value, int):
        return range(value, value + 1)
    lo, hi = value
    return range(lo, hi + 1)


def _seed(params):
    return params.get("seed", settings.SEED)


def run_dims(params):
    families = TABLE_FAMILIES[params["table"]]
    rows = derham.dim_table(
        _range(params["r"]), families, mode=params.get("mode", "exact"), tol=params.get("tol")
    )
    witness = {f"{row.spec.label}": [row.computed, row.formula] for row in rows}
    return all(row.matches for row in rows), witness


def run_spot_dims(params):
    spec = SpaceSpec(params["family"], params["degree"], params.get("bc", "none"))
    mesh = reference_split()
    dim = build_space(spec, mesh).dim
    return dim == params["expected"], {spec.label: dim}


def run_exactness(params):
    reports = [
        derham.check_exactness(
            derham.SequenceSpec(
                params["seq"],
                params.get("bc", "none"),
                r,
                dim=params.get("dim", 3),
                variant=params.get("variant", "curl"),
            ),
            mode=params.get("mode", "exact"),
            tol=params.get("tol"),
        )
        for r in _range(params["r"])
    ]
    return all(rep.passed for rep in reports), {"sequences": [rep.summary() for rep in reports]}


def run_rank_nullity(params):
    sums = derham.rank_nullity_audit(params["r"], computed=params.get("computed", True))
    witness = {f"{name}/{bc}": list(values) for (name, bc), values in sorted(sums.items())}
    return all(total == expected for total, expected in sums.values()), witness


def run_potentials(params):
    clauses = {clause.label: clause for clause in derham.POTENTIAL_CLAUSES}
    clause = clauses[params["clause"]]
    report = derham.check_potentials(
        clause,
        params["r"],
        samples=params.get("samples", 10),
        rng=np.random.default_rng(_seed(params)),
    )
    return report.passed, {"solved": report.solved, "failures": list(report.failures)}


def run_polynomial_reproduction(params):
    spec = SpaceSpec(params["family"], params["r"])
    ok = reproduces_polynomials(spec, reference_split())
    return ok, {spec.label: ok}


def run_unisolvency(params):
    report = dofproj.check_unisolvency(params["lemma"], params["r"])
    witness = {"count": report.count, "dim": report.dim, "rank": report.rank, **report.counts}
    return report.passed, witness


def run_commute(params):
    report = dofproj.check_commute(
        params["diagram"], params["r"], samples=params.get("samples", 5), seed=_seed(params)
    )
    return report.passed, {name: list(flags) for name, flags in report.residuals.items()}


def run_frame_invariance(params):
    report = dofproj.check_frame_invariance(params["lemma"], params["r"], params.get("degree"))
    return report.passed, {"equal": report.equal, "degree": report.degree}


def run_jump_lemmas(params):
    report = dofproj.check_jump_lemmas(
        params["r"], samples=params.get("samples", 25), seed=_seed(params)
    )
    return report.passed, dict(report.results)


def _property(fn):
    def run(params):
        report = fn(params["r"], samples=params.get("samples", 25), seed=_seed(params))
        return report.passed, dict(report.results)

    return run


def run_conformity(params):
    report = globalfe.check_global_conformity(params["family"], params["degree"])
    return report.passed, {"dim": report.dim, **report.results}


RUNNERS = {
    "dims": run_dims,
    "spot_dims": run_spot_dims,
    "exactness": run_exactness,
    "rank_nullity": run_rank_nullity,
    "potentials": run_potentials,
    "polynomial_reproduction": run_polynomial_reproduction,
    "unisolvency": run_unisolvency,
    "commute": run_commute,
    "frame_invariance": run_frame_invariance,
    "jump_lemmas": run_jump_lemmas,
    "identity": _property(globalfe.check_appendix_identity),
    "theta": _property(globalfe.check_theta_properties),
    "extension": _property(globalfe.check_extension_property),
    "global_sequence": _property(globalfe.check_global_sequence),
    "conformity": run_conformity,
}


def _plain(value):
    """A JSON-ready copy with exact numbers written as strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_plain(v) for v in value]
    if value is None or isinstance(value, bool | int | str):
        return value
    return ratlin.format_rational(value)


def digest(witness):
    encoded = json.dumps(_plain(witness), sort_keys=True).encode()
    return hashlib.sha256(encoded).hexdigest()


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    claim: str
    params: dict
    passed: bool
    witness: dict

    @property
    def status(self):
        return "pass" if self.passed else "fail"

    def to_document(self):
        return {
            "check_id": self.check_id,
            "claim": self.claim,
            "params": _plain(self.params),
            "status": self.status,
            "witness_digest": digest(self.witness),
        }


def run_check(check):
    """Run one check; a WfseqError raised by its runner becomes a failing result."""
    logger.info("running check", check_id=check["check_id"], kind=check["kind"])
    runner = RUNNERS[check["kind"]]
    try:
        passed, witness = runner(check["params"])
    except WfseqError as e:
        logger.exception("check raised", check_id=check["check_id"])
        passed, witness = False, {"error": f"{type(e).__name__}: {e}"}
    return CheckResult(
        check["check_id"], check["claim"], dict(check["params"]), bool(passed), _plain(witness)
    )


def render_json(results):
    documents = [r.to_document() for r in sorted(results, key=lambda r: r.check_id)]
    passed = all(r.passed for r in results)
    return json.dumps({"passed": passed, "checks": documents}, indent=2, sort_keys=True) + "\n"


def render_md(results):
    lines = ["| check | status | claim | witness |", "| --- | --- | --- | --- |"]
    for r in sorted(results, key=lambda r: r.check_id):
        lines.append(f"| {r.check_id} | {r.status} | {r.claim} | `{digest(r.witness)[:12]}` |")
    failed = sum(not r.passed for r in results)
    lines.extend(["", f"{len(results) - failed} passed, {failed} failed"])
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "md": render_md}
