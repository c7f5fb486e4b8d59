"""Command line entry point: every certification as a subcommand.

Each subcommand turns its arguments into a list of checks, hands them to the
dispatcher and writes the rendered report to stdout or --output. The exit
status is 0 when every check passed, 1 when any failed and 2 when the
arguments or the suite file are invalid.
"""

import argparse
import sys
from pathlib import Path

from . import settings, suite
from .derham import OPS_2D, POTENTIAL_CLAUSES, SEQUENCES_2D, SEQUENCES_3D
from .dispatcher import run_checks
from .dofproj import DIAGRAMS, LEMMAS
from .errors import ConfigError, InvalidSpec, UnsupportedDegree
from .fespace import TABLE_FAMILIES
from .globalfe import GLOBAL_FAMILIES, IDENTITY_MIN_DEGREE, GlobalSpaceSpec
from .logger import logger
from .reports import RENDERERS


class DegreeRange(argparse.Action):
    """Parse "3" or "0..5" into an inclusive [lo, hi] pair."""

    def __call__(self, parser, namespace, values, option_string=None):
        lo, sep, hi = values.partition("..")
        try:
            bounds = [int(lo), int(hi if sep else lo)]
        except ValueError:
            parser.error(f"{option_string} expects N or LO..HI, got {values!r}")
        if bounds[0] < 0 or bounds[0] > bounds[1]:
            parser.error(f"{option_string} range {values!r} is empty or negative")
        setattr(namespace, self.dest, bounds)


class SplitCommaSeparatedString(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, [v.strip() for v in values.split(",") if v.strip()])


def _degrees(args):
    lo, hi = args.r
    return range(lo, hi + 1)


def _check(check_id, kind, claim, **params):
    return {"check_id": check_id, "kind": kind, "claim": claim, "params": params}


def _bcs(bc):
    return ("none", "zero") if bc == "both" else (bc,)


def dims_checks(args):
    tables = TABLE_FAMILIES if args.table == "all" else [args.table]
    return [
        _check(
            f"dims-{table}",
            "dims",
            f"{table} families match their closed forms",
            table=table,
            r=list(args.r),
            mode=args.mode,
            **_tol(args),
        )
        for table in tables
    ]


def _tol(args):
    return {"tol": args.tol} if args.mode == "float" and args.tol is not None else {}


def exactness_checks(args):
    table = SEQUENCES_3D if args.dim == 3 else SEQUENCES_2D
    names = list(table) if args.seq == "ALL" else [args.seq]
    for name in names:
        if name not in table:
            msg = f"{args.dim}D sequences are {', '.join(table)}; got {name}"
            raise ConfigError(msg)
    variants = [args.variant] if args.dim == 2 else ["curl"]
    if args.dim == 2 and args.variant == "both":
        variants = list(OPS_2D)
    out = []
    for name in names:
        for bc in _bcs(args.bc):
            for variant in variants:
                suffix = f"-{variant}" if args.dim == 2 else ""
                out.append(
                    _check(
                        f"exact-{args.dim}d-{name.lower()}{suffix}-{bc}",
                        "exactness",
                        f"{name} [{bc}] is exact",
                        seq=name,
                        bc=bc,
                        dim=args.dim,
                        variant=variant,
                        r=list(args.r),
                        mode=args.mode,
                        **_tol(args),
                    )
                )
    return out


def potentials_checks(args):
    out = []
    for n, clause in enumerate(POTENTIAL_CLAUSES):
        if args.op != "all" and clause.op != args.op:
            continue
        for r in _degrees(args):
            out.append(
                _check(
                    f"onto-{clause.op}-{n:02d}-{r}",
                    "potentials",
                    clause.label,
                    clause=clause.label,
                    r=r,
                    samples=args.samples,
                    seed=args.seed,
                )
            )
    return out


def unisolvency_checks(args):
    lemmas = args.lemma or list(LEMMAS)
    out = []
    for name in lemmas:
        if name not in LEMMAS:
            msg = f"Unknown lemma {name}; expected one of {', '.join(LEMMAS)}"
            raise ConfigError(msg)
        for r in _degrees(args):
            if r < LEMMAS[name].min_degree:
                continue
            out.append(
                _check(
                    f"dofs-{name.lower()}-{r}",
                    "unisolvency",
                    f"the {name} DOFs determine {LEMMAS[name].target_spec(r).label}",
                    lemma=name,
                    r=r,
                )
            )
    if not out:
        msg = f"No lemma in {', '.join(lemmas)} has DOFs for r in {args.r[0]}..{args.r[1]}"
        raise ConfigError(msg)
    return out


def commute_checks(args):
    diagrams = list(DIAGRAMS) if args.diagram == "ALL" else [args.diagram]
    out = []
    for diagram in diagrams:
        lemmas = DIAGRAMS[diagram]
        minimum = max(LEMMAS[name].min_degree for name in lemmas)
        for r in _degrees(args):
            if r < minimum:
                continue
            out.append(
                _check(
                    f"commute-{diagram.lower()}-{r}",
                    "commute",
                    f"the {diagram} projections commute with grad, curl and div",
                    diagram=diagram,
                    r=r,
                    samples=args.samples,
                    seed=args.seed,
                )
            )
    if not out:
        msg = f"{args.diagram} needs a larger degree than {args.r[1]}"
        raise ConfigError(msg)
    return out


def jump_lemma_checks(args):
    return [
        _check(
            f"jumps-{r}",
            "jump_lemmas",
            "jump moments control face continuity",
            r=r,
            samples=args.samples,
            seed=args.seed,
        )
        for r in _degrees(args)
    ]


def identity_checks(args):
    out = [
        _check(
            f"identity-{r}",
            "identity",
            "curl jump equals the tangential jump of grad(v . n) when v x n = 0",
            r=r,
            samples=args.samples,
            seed=args.seed,
        )
        for r in _degrees(args)
        if r >= IDENTITY_MIN_DEGREE
    ]
    if not out:
        msg = f"The identity needs r >= {IDENTITY_MIN_DEGREE}, got {args.r[0]}..{args.r[1]}"
        raise ConfigError(msg)
    return out


_GLOBAL_PROPERTIES = {
    "theta": "theta of curl and div traces vanishes on continuous global fields",
    "extension": "C1 fields extend across the shared face",
    "global_sequence": "glued SLVV members form a complex",
}


def global_checks(args):
    families = args.family or list(GLOBAL_FAMILIES)
    out = []
    for r in _degrees(args):
        for family in families:
            if family not in GLOBAL_FAMILIES:
                msg = f"Unknown global family {family}; expected one of {', '.join(GLOBAL_FAMILIES)}"
                raise ConfigError(msg)
            lemma = LEMMAS[GLOBAL_FAMILIES[family][0]]
            if r < lemma.min_degree:
                continue
            spec = GlobalSpaceSpec(family, r - lemma.offset)
            out.append(
                _check(
                    f"global-{family.lower()}-{r}",
                    "conformity",
                    f"glued {spec.family}_{spec.degree} is conforming",
                    family=family,
                    degree=spec.degree,
                )
            )
        for kind, claim in _GLOBAL_PROPERTIES.items():
            out.append(
                _check(
                    f"global-{kind.replace('_', '-')}-{r}",
                    kind,
                    claim,
                    r=r,
                    samples=args.samples,
                    seed=args.seed,
                )
            )
    return out


def report_checks(args):
    checks = suite.checks(seed=args.seed, only=args.only)
    if not checks:
        msg = f"No suite check id starts with any of {', '.join(args.only)}"
        raise ConfigError(msg)
    return checks


def _output_path(path):
    path = Path(path)
    return path if path.is_absolute() else settings.OUTPUT_DIR / path


def write_report(results, args):
    text = RENDERERS[args.format](results)
    if args.output is None:
        sys.stdout.write(text)
    else:
        path = _output_path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("report written", path=str(path))


def run(args):
    """Run the checks selected by args and return the exit status."""
    checks = args.func(args)
    results = run_checks(checks)
    write_report(results, args)
    return 0 if all(r.passed for r in results) else 1


def _add_common(parser, r_default=None, samples=None):
    if r_default is not None:
        parser.add_argument(
            "--r",
            default=r_default,
            action=DegreeRange,
            help="Degree or inclusive range, e.g. 3 or 0..5",
        )
    parser.add_argument("--seed", type=int, default=settings.SEED)
    parser.add_argument("--output", default=None, help="Write the report here instead of stdout")
    parser.add_argument("--format", choices=sorted(RENDERERS), default="json")
    if samples is not None:
        parser.add_argument("--samples", type=int, default=samples)


def _add_mode(parser):
    parser.add_argument("--mode", choices=["exact", "float"], default="exact")
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="Rank tolerance in float mode; ignored in exact mode",
    )


def get_command_line_parser():
    parser = argparse.ArgumentParser(prog="wfseq")
    subparsers = parser.add_subparsers(required=True)

    dims_parser = subparsers.add_parser("dims", help="Dimension tables against closed forms")
    _add_common(dims_parser, [0, 5])
    _add_mode(dims_parser)
    dims_parser.add_argument("--table", choices=["all", *TABLE_FAMILIES], default="all")
    dims_parser.set_defaults(func=dims_checks)

    exactness_parser = subparsers.add_parser("exactness", help="Exactness of local sequences")
    _add_common(exactness_parser, [3, 3])
    _add_mode(exactness_parser)
    exactness_parser.add_argument("--seq", type=str.upper, default="ALL")
    exactness_parser.add_argument("--bc", choices=["none", "zero", "both"], default="both")
    exactness_parser.add_argument("--dim", type=int, choices=[2, 3], default=3)
    exactness_parser.add_argument("--variant", choices=["curl", "div", "both"], default="both")
    exactness_parser.set_defaults(func=exactness_checks)

    potentials_parser = subparsers.add_parser("potentials", help="Surjectivity witnesses")
    _add_common(potentials_parser, [2, 2], samples=10)
    potentials_parser.add_argument("--op", choices=["all", "grad", "curl", "div"], default="all")
    potentials_parser.set_defaults(func=potentials_checks)

    unisolvency_parser = subparsers.add_parser("unisolvency", help="Unisolvency of local DOFs")
    _add_common(unisolvency_parser, [3, 3])
    unisolvency_parser.add_argument(
        "--lemma",
        action=SplitCommaSeparatedString,
        default=None,
        help=f"Comma-separated subset of {','.join(LEMMAS)}",
    )
    unisolvency_parser.set_defaults(func=unisolvency_checks)

    commute_parser = subparsers.add_parser("commute", help="Commuting projection diagrams")
    _add_common(commute_parser, [3, 3], samples=5)
    commute_parser.add_argument(
        "--diagram", type=str.upper, choices=["ALL", *DIAGRAMS], default="ALL"
    )
    commute_parser.set_defaults(func=commute_checks)

    jump_parser = subparsers.add_parser("jump-lemmas", help="Face continuity from jump moments")
    _add_common(jump_parser, [3, 3], samples=25)
    jump_parser.set_defaults(func=jump_lemma_checks)

    global_parser = subparsers.add_parser("global", help="Two-tetrahedron global spaces")
    _add_common(global_parser, [3, 3], samples=5)
    global_parser.add_argument(
        "--family",
        action=SplitCommaSeparatedString,
        default=None,
        help=f"Comma-separated subset of {','.join(GLOBAL_FAMILIES)}",
    )
    global_parser.set_defaults(func=global_checks)

    identity_parser = subparsers.add_parser("identity", help="Curl jump identity on a face")
    _add_common(identity_parser, [2, 3], samples=25)
    identity_parser.set_defaults(func=identity_checks)

    report_parser = subparsers.add_parser("report", help="Run the acceptance suite")
    _add_common(report_parser)
    report_parser.add_argument(
        "--only",
        action=SplitCommaSeparatedString,
        default=None,
        help="Comma-separated check id prefixes, e.g. dims,exact-3d",
    )
    report_parser.set_defaults(func=report_checks)

    return parser


def main(argv=None):
    args = get_command_line_parser().parse_args(argv)
    try:
        return run(args)
    except (ConfigError, InvalidSpec, UnsupportedDegree) as e:
        logger.error("invalid configuration", error=str(e))
        return 2
