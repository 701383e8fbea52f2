"""Global numerical defaults and resource caps."""

from __future__ import annotations

import os

#: Default tolerance for algebraic identities (isometry, unitarity, stabilizers).
TOL = 1e-10
#: Default tolerance for eigenproblems.
EIG_TOL = 1e-8
#: Largest vertex count a tiling patch may reach before ``Overflow`` is raised.
VERTEX_CAP = 20000

_DEFAULT_DIM_CAP = 4**12


def dim_cap() -> int:
    """Maximal total dimension of a dense tensor; ``HTN_DIM_CAP`` overrides."""
    value = os.environ.get("HTN_DIM_CAP")
    if value is None:
        return _DEFAULT_DIM_CAP
    return int(float(value))


class CapExceeded(RuntimeError):
    """A dense object would exceed the configured dimension cap."""
