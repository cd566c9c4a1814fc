"""Size caps for brute-force and constructor guards.

All caps live in one dict so the CLI (and tests) can override them in a
single place.  The DEVKIT_CAPS environment variable, when set, must hold a
JSON object whose keys are a subset of DEFAULT_CAPS; unknown keys are
rejected loudly rather than ignored.
"""

from __future__ import annotations

import json
import os

from .errors import SchemaError

DEFAULT_CAPS = {
    # constructor guards on ring descriptors
    "max_t_degree": 8,          # residue / Galois ring extension degree d
    "max_precision": 16,        # nilpotency exponent N of the p-part
    "max_high": 64,             # Laurent window ceiling
    "max_low": 16,              # Laurent window floor depth
    # brute-force guards
    "equivariant_dim": 16384,   # flattened prime-linear system width (2**14)
    "enumeration": 65536,       # largest carrier we will enumerate
    "group_order": 24,          # group-variant coset search
    "numeric_modulus": 6,       # numeric-variant per-factor modulus
    "numeric_dims": 3,          # numeric-variant number of factors
    "cofinality": 64,           # monoid-variant cofinality search bound
    "tower_budget": 16,         # hard ceiling on extension tower level
}


def load_caps(env: str | None = None) -> dict:
    """Return the active caps, applying DEVKIT_CAPS overrides if present.

    >>> load_caps('{"max_precision": 4}')["max_precision"]
    4
    >>> load_caps('{"max_precision": 4}')["max_high"]
    64
    """
    caps = dict(DEFAULT_CAPS)
    raw = env if env is not None else os.environ.get("DEVKIT_CAPS")
    if not raw:
        return caps
    try:
        overrides = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"DEVKIT_CAPS is not valid JSON: {exc}") from None
    if not isinstance(overrides, dict):
        raise SchemaError("DEVKIT_CAPS must be a JSON object")
    for key, value in overrides.items():
        if key not in DEFAULT_CAPS:
            raise SchemaError(f"DEVKIT_CAPS has unknown cap {key!r}")
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise SchemaError(f"cap {key!r} must be a positive integer")
        caps[key] = value
    return caps


CAPS = load_caps()
