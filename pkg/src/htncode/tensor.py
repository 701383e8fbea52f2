"""Dense tensors with labelled legs and numerical isometry classification."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import config


class DimensionMismatch(ValueError):
    pass


class DuplicatePairing(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """A complex array whose axes carry unique string labels.

    ``logical`` names the legs that are bulk (logical) indices; every other leg
    is planar.
    """

    labels: tuple[str, ...]
    data: np.ndarray
    logical: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "logical", frozenset(self.logical))
        if data.ndim != len(self.labels):
            raise ValueError(f"{len(self.labels)} labels for a rank-{data.ndim} array")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels in {self.labels}")
        if not self.logical <= set(self.labels):
            raise ValueError("logical legs must be among the labels")
        if data.size > config.dim_cap():
            raise config.CapExceeded(f"tensor of size {data.size} exceeds cap {config.dim_cap()}")

    @property
    def dims(self) -> dict[str, int]:
        return dict(zip(self.labels, self.data.shape))

    @property
    def planar(self) -> tuple[str, ...]:
        return tuple(lab for lab in self.labels if lab not in self.logical)

    def dim(self, labels: Iterable[str]) -> int:
        dims = self.dims
        return math.prod(dims[lab] for lab in labels)

    def transpose(self, labels: Sequence[str]) -> "DenseTensor":
        axes = [self.labels.index(lab) for lab in labels]
        return DenseTensor(tuple(labels), self.data.transpose(axes), self.logical)

    def matrix(self, rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
        """Reshape into a matrix with ``rows`` legs as row index."""
        t = self.transpose(list(rows) + list(cols))
        return t.data.reshape(self.dim(rows), self.dim(cols))

    def relabel(self, mapping: dict[str, str]) -> "DenseTensor":
        labels = tuple(mapping.get(lab, lab) for lab in self.labels)
        logical = frozenset(mapping.get(lab, lab) for lab in self.logical)
        return DenseTensor(labels, self.data, logical)

    def project(self, label: str, state: np.ndarray) -> "DenseTensor":
        """Contract leg ``label`` against the vector ``state`` (no conjugation)."""
        axis = self.labels.index(label)
        data = np.tensordot(np.asarray(state, dtype=complex), self.data, axes=([0], [axis]))
        labels = self.labels[:axis] + self.labels[axis + 1 :]
        return DenseTensor(labels, data, self.logical - {label})

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def to_json(self) -> str:
        flat = self.data.reshape(-1)
        payload = {
            "legs": [{"label": lab, "dim": int(n)} for lab, n in zip(self.labels, self.data.shape)],
            "re": [float(v) for v in flat.real],
            "im": [float(v) for v in flat.imag],
        }
        if self.logical:
            payload["logical"] = sorted(self.logical)
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "DenseTensor":
        payload = json.loads(text)
        labels = [leg["label"] for leg in payload["legs"]]
        shape = [leg["dim"] for leg in payload["legs"]]
        data = (np.asarray(payload["re"]) + 1j * np.asarray(payload["im"])).reshape(shape)
        return cls(tuple(labels), data, frozenset(payload.get("logical", ())))


def contract(a: DenseTensor, b: DenseTensor, pairs: Sequence[tuple[str, str]]) -> DenseTensor:
    """Sum over each ``(label in a, label in b)`` pair.

    The result keeps the remaining legs of ``a`` followed by those of ``b``.
    """
    left = [p[0] for p in pairs]
    right = [p[1] for p in pairs]
    if len(set(left)) != len(left) or len(set(right)) != len(right):
        raise DuplicatePairing(f"a leg appears twice in {pairs}")
    da, db = a.dims, b.dims
    for x, y in pairs:
        if x not in da or y not in db:
            raise KeyError(f"unknown leg in pair ({x}, {y})")
        if da[x] != db[y]:
            raise DimensionMismatch(f"{x} has dim {da[x]} but {y} has dim {db[y]}")
    rest_a = [lab for lab in a.labels if lab not in left]
    rest_b = [lab for lab in b.labels if lab not in right]
    clash = set(rest_a) & set(rest_b)
    if clash:
        raise ValueError(f"open legs {sorted(clash)} would collide after contraction")
    data = np.tensordot(
        a.data, b.data, axes=([a.labels.index(x) for x in left], [b.labels.index(y) for y in right])
    )
    logical = (a.logical - set(left)) | (b.logical - set(right))
    return DenseTensor(tuple(rest_a + rest_b), data, logical)


def isometry_defect(t: DenseTensor, inputs: Sequence[str]) -> float:
    """Max deviation of M^dagger M / c from the identity, M mapping ``inputs`` to the rest.

    ``c = tr(M^dagger M) / dim(inputs)``.  Returns ``inf`` if the input space is
    larger than the output space or the tensor vanishes.
    """
    outputs = [lab for lab in t.labels if lab not in inputs]
    din, dout = t.dim(inputs), t.dim(outputs)
    if din > dout:
        return math.inf
    m = t.matrix(outputs, inputs)
    gram = m.conj().T @ m
    c = np.trace(gram).real / din
    if c <= 0:
        return math.inf
    return float(np.abs(gram / c - np.eye(din)).max())


def isometry_check(t: DenseTensor, inputs: Sequence[str], tol: float = config.TOL) -> bool:
    """True iff the map from legs ``inputs`` (S) to the other legs is proportional to an isometry."""
    return isometry_defect(t, inputs) <= tol


def k_isometric(
    t: DenseTensor, k: int, legs: Sequence[str] | str = "all", tol: float = config.TOL
) -> bool:
    """Isometric for every ``k``-subset S of ``legs`` (``"all"`` or ``"planar"``)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pool = _leg_pool(t, legs)
    return all(isometry_check(t, s, tol) for s in itertools.combinations(pool, k))


def _leg_pool(t: DenseTensor, legs) -> tuple[str, ...]:
    if legs == "all":
        return t.labels
    if legs == "planar":
        return t.planar
    return tuple(legs)


def is_perfect(t: DenseTensor, tol: float = config.TOL) -> bool:
    """k-isometric for every k up to half the number of legs."""
    n = len(t.labels)
    if n < 2:
        raise ValueError("need at least two legs")
    return all(k_isometric(t, k, "all", tol) for k in range(1, n // 2 + 1))


def cyclic_blocks(order: Sequence[str], k: int) -> list[tuple[str, ...]]:
    n = len(order)
    if k >= n:
        return [tuple(order)]
    return [tuple(order[(s + i) % n] for i in range(k)) for s in range(n)]


def is_block_perfect(
    t: DenseTensor, cyclic_order: Sequence[str] | None = None, tol: float = config.TOL
) -> bool:
    """Isometric for every cyclically contiguous block of up to half the legs."""
    order = tuple(cyclic_order) if cyclic_order is not None else t.labels
    if sorted(order) != sorted(t.labels):
        raise ValueError("cyclic order must list every leg once")
    n = len(order)
    if n < 2:
        raise ValueError("need at least two legs")
    return all(
        isometry_check(t, block, tol) for k in range(1, n // 2 + 1) for block in cyclic_blocks(order, k)
    )
