"""YAML-backed access to the acceptance suite.

The suite lives at ``settings.SUITE_PATH`` (``wfseq/suite.yaml`` unless
``WFSEQ_SUITE_PATH`` says otherwise). Each entry has an ``id``, a ``kind``
known to ``wfseq.reports``, a ``claim`` and a ``params`` mapping.
"""

import functools

import yaml

from . import settings
from .errors import ConfigError
from .reports import RUNNERS


REQUIRED_KEYS = ("id", "kind", "claim", "params")


@functools.cache
def load_suite() -> dict:
    path = settings.SUITE_PATH
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        msg = f"Suite file {path} does not exist"
        raise ConfigError(msg)
    suite = yaml.safe_load(text)
    validate_suite(suite)
    return suite


def validate_suite(suite):
    if not isinstance(suite, dict) or not isinstance(suite.get("checks"), list):
        msg = "Suite must be a mapping with a list of checks"
        raise ConfigError(msg)
    seen = set()
    for n, entry in enumerate(suite["checks"]):
        missing = [key for key in REQUIRED_KEYS if key not in (entry or {})]
        if missing:
            msg = f"Check #{n} is missing {', '.join(missing)}"
            raise ConfigError(msg)
        if entry["id"] in seen:
            msg = f"Duplicate check id {entry['id']}"
            raise ConfigError(msg)
        seen.add(entry["id"])
        if entry["kind"] not in RUNNERS:
            msg = f"Check {entry['id']} has unknown kind {entry['kind']}"
            raise ConfigError(msg)
        if not isinstance(entry["params"], dict):
            msg = f"Params of check {entry['id']} must be a mapping"
            raise ConfigError(msg)


def checks(seed=None, only=None):
    """The suite as dispatcher checks.

    seed fills in checks that don't fix their own; only keeps checks whose
    id starts with one of the given prefixes.
    """
    out = []
    for entry in load_suite()["checks"]:
        if only and not any(entry["id"].startswith(prefix) for prefix in only):
            continue
        params = dict(entry["params"])
        if seed is not None:
            params.setdefault("seed", seed)
        out.append(
            {"check_id": entry["id"], "kind": entry["kind"], "claim": entry["claim"], "params": params}
        )
    return out


def check_ids():
    return [entry["id"] for entry in load_suite()["checks"]]
