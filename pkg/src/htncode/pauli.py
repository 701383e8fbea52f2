"""Generalized (Weyl) Pauli strings over Z_d for d in {2, 4}, and operator pushing.

A string is ``i**phase * prod_k X_k**x[k] Z_k**z[k]`` with the clock/shift
convention ``X|k> = |k+1 mod d>`` and ``Z|k> = w**k |k>``, ``w = exp(2 pi i/d)``.
Since ``Z X = w X Z`` and ``w = i**(4/d)``, phases stay in powers of ``i``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np



class SiteMismatch(ValueError):
    pass


class NotWeyl(ValueError):
    """Conjugation by the edge tensor leaves the Weyl group."""


class NoPush(ValueError):
    """No admissible group element clears the operator from the forbidden legs."""


@lru_cache(maxsize=None)
def shift(d: int) -> np.ndarray:
    return np.roll(np.eye(d), 1, axis=0).astype(complex)


@lru_cache(maxsize=None)
def clock(d: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


@dataclass(frozen=True)
class QuditPauliString:
    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0
    d: int = 4

    def __post_init__(self):
        if self.d not in (2, 4):
            raise ValueError("only qubits and ququarts are supported")
        if len(self.x) != len(self.z):
            raise SiteMismatch("x and z exponent vectors differ in length")
        object.__setattr__(self, "x", tuple(int(a) % self.d for a in self.x))
        object.__setattr__(self, "z", tuple(int(b) % self.d for b in self.z))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def identity(cls, n: int, d: int = 4) -> "QuditPauliString":
        return cls((0,) * n, (0,) * n, 0, d)

    @classmethod
    def single(cls, n: int, site: int, x: int = 0, z: int = 0, d: int = 4) -> "QuditPauliString":
        xs, zs = [0] * n, [0] * n
        xs[site], zs[site] = x, z
        return cls(tuple(xs), tuple(zs), 0, d)

    @classmethod
    def from_powers(cls, ops: str, d: int = 4) -> "QuditPauliString":
        """Parse compact site-ordered notation such as ``"I Z Z^2 Z"`` or ``"XZZXI"``."""
        tokens = ops.split() if " " in ops.strip() else re.findall(r"[IXZ](?:\^\d+)?", ops)
        xs, zs = [], []
        for tok in tokens:
            m = re.fullmatch(r"([IXZ])(?:\^(\d+))?", tok)
            if not m:
                raise ValueError(f"bad token {tok!r}")
            power = int(m.group(2) or 1)
            xs.append(power if m.group(1) == "X" else 0)
            zs.append(power if m.group(1) == "Z" else 0)
        return cls(tuple(xs), tuple(zs), 0, d)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.n) if self.x[k] or self.z[k])

    def is_identity(self, up_to_phase: bool = True) -> bool:
        return not self.support and (up_to_phase or self.phase == 0)

    def __mul__(self, other: "QuditPauliString") -> "QuditPauliString":
        return pauli_multiply(self, other)

    def __pow__(self, k: int) -> "QuditPauliString":
        out = QuditPauliString.identity(self.n, self.d)
        for _ in range(k % (2 * self.d) if k >= 0 else 0):
            out = out * self
        return out

    def strip_phase(self) -> "QuditPauliString":
        return QuditPauliString(self.x, self.z, 0, self.d)

    def restrict(self, sites: Sequence[int]) -> "QuditPauliString":
        return QuditPauliString(
            tuple(self.x[s] for s in sites), tuple(self.z[s] for s in sites), 0, self.d
        )

    def local(self, site: int) -> np.ndarray:
        return weyl(self.x[site], self.z[site], self.d)

    def matrix(self) -> np.ndarray:
        """Dense ``d**n`` realization."""
        mats = [self.local(k) for k in range(self.n)]
        return (1j**self.phase) * reduce(np.kron, mats, np.eye(1, dtype=complex))

    def __str__(self) -> str:
        parts = []
        for k in range(self.n):
            if self.x[k]:
                parts.append(f"X{k}" + (f"^{self.x[k]}" if self.x[k] != 1 else ""))
            if self.z[k]:
                parts.append(f"Z{k}" + (f"^{self.z[k]}" if self.z[k] != 1 else ""))
        body = " ".join(parts) if parts else "I"
        return f"i^{self.phase} · {body}"

    @classmethod
    def parse(cls, text: str, n: int, d: int = 4) -> "QuditPauliString":
        """Inverse of ``str``: ``"i^1 · X0 Z1^3"``."""
        phase = 0
        m = re.match(r"\s*i\^(\d+)\s*·\s*(.*)$", text)
        if m:
            phase, text = int(m.group(1)), m.group(2)
        xs, zs = [0] * n, [0] * n
        out = cls(tuple(xs), tuple(zs), phase, d)
        for tok in text.split():
            if tok == "I":
                continue
            t = re.fullmatch(r"([XZ])(\d+)(?:\^(\d+))?", tok)
            if not t:
                raise ValueError(f"bad token {tok!r}")
            site, power = int(t.group(2)), int(t.group(3) or 1)
            if site >= n:
                raise SiteMismatch(f"site {site} outside {n} sites")
            if t.group(1) == "X":
                term = cls.single(n, site, x=power, d=d)
            else:
                term = cls.single(n, site, z=power, d=d)
            out = out * term
        return out


def weyl(a: int, b: int, d: int = 4) -> np.ndarray:
    return np.linalg.matrix_power(shift(d), a % d) @ np.linalg.matrix_power(clock(d), b % d)


def pauli_multiply(a: QuditPauliString, b: QuditPauliString) -> QuditPauliString:
    """Product ``a * b`` with the commutation phase ``w**(z_a . x_b)``."""
    if a.n != b.n or a.d != b.d:
        raise SiteMismatch(f"cannot multiply {a.n}-site d={a.d} by {b.n}-site d={b.d}")
    d = a.d
    cross = sum(za * xb for za, xb in zip(a.z, b.x))
    phase = a.phase + b.phase + (4 // d) * cross
    x = tuple(p + q for p, q in zip(a.x, b.x))
    z = tuple(p + q for p, q in zip(a.z, b.z))
    return QuditPauliString(x, z, phase, d)


def commutes(a: QuditPauliString, b: QuditPauliString) -> bool:
    sym = sum(xa * zb - za * xb for xa, za, xb, zb in zip(a.x, a.z, b.x, b.z))
    return sym % a.d == 0


def embed(op: QuditPauliString, sites: Sequence[int], n: int) -> QuditPauliString:
    xs, zs = [0] * n, [0] * n
    for k, s in enumerate(sites):
        xs[s], zs[s] = op.x[k], op.z[k]
    return QuditPauliString(tuple(xs), tuple(zs), op.phase, op.d)


@dataclass(frozen=True)
class StabilizerGroup:
    generators: tuple[QuditPauliString, ...]

    @property
    def n(self) -> int:
        return self.generators[0].n

    def elements(self, extra: Sequence[QuditPauliString] = ()) -> list[tuple[tuple[int, ...], QuditPauliString]]:
        """All products ``prod g_i**e_i`` in lexicographic exponent order.

        ``extra`` operators (e.g. a logical fixing the projected bulk state) are
        appended as further generators.  Duplicates are kept; the first
        occurrence in canonical order wins in searches.
        """
        gens = list(self.generators) + list(extra)
        d = gens[0].d
        powers = [[g**k for k in range(d)] for g in gens]
        out = []
        for exps in itertools.product(range(d), repeat=len(gens)):
            el = QuditPauliString.identity(self.n, d)
            for g, e in zip(powers, exps):
                el = el * g[e]
            out.append((exps, el))
        return out

    def mutually_commute(self) -> bool:
        return all(commutes(a, b) for a, b in itertools.combinations(self.generators, 2))


def weyl_decompose(m: np.ndarray, d: int) -> tuple[int, int, int] | None:
    """Return ``(a, b, phase)`` with ``m == i**phase X**a Z**b`` up to 1e-9, else None."""
    for a in range(d):
        for b in range(d):
            w = weyl(a, b, d)
            c = np.trace(w.conj().T @ m) / d
            for ph in range(4):
                if abs(c - 1j**ph) < 1e-9 and np.abs(m - (1j**ph) * w).max() < 1e-9:
                    return a, b, ph
    return None


def push_through_B(
    op: QuditPauliString, b: np.ndarray, direction: str = "forward"
) -> QuditPauliString:
    """Move a single-site operator across an edge tensor.

    For ``b[s, t]`` contracted between a leg ``s`` carrying ``op`` and a leg ``t``
    (``direction="forward"``), returns ``op'`` with ``op^T b = b op'``, so that
    acting with ``op`` before the edge equals acting with ``op'`` after it.
    ``"backward"`` uses ``b^T``.  Global phases are dropped.
    """
    if op.n != 1:
        raise SiteMismatch("push_through_B acts on single-site operators")
    mat = b if direction == "forward" else b.T
    pushed = np.linalg.solve(mat, op.matrix().T @ mat)
    hit = weyl_decompose(pushed, op.d)
    if hit is None:
        # Accept up to a global phase.
        for a in range(op.d):
            for bb in range(op.d):
                w = weyl(a, bb, op.d)
                c = np.trace(w.conj().T @ pushed) / op.d
                if abs(abs(c) - 1) < 1e-9 and np.abs(pushed - c * w).max() < 1e-9:
                    return QuditPauliString((a,), (bb,), 0, op.d)
        raise NotWeyl("edge tensor maps this Pauli outside the Weyl group")
    a, bb, _ = hit
    return QuditPauliString((a,), (bb,), 0, op.d)


def push_through_code(
    op: QuditPauliString,
    group: StabilizerGroup,
    avoid: Iterable[int],
    allowed_logicals: Sequence[QuditPauliString] = (),
) -> tuple[QuditPauliString, QuditPauliString]:
    """Multiply ``op`` by a group element so that it acts trivially on ``avoid``.

    The admissible group is generated by the stabilizers and
    ``allowed_logicals`` (logicals whose +1 eigenstate the bulk leg is
    projected on).  Returns ``(result, element)``; the first admissible element
    in canonical exponent order wins.
    """
    avoid = set(avoid)
    for _, g in group.elements(allowed_logicals):
        out = op * g
        if not avoid & set(out.support):
            return out, g
    raise NoPush(f"{op} cannot be cleared from legs {sorted(avoid)}")


def hermitian_paulis(d: int) -> list[tuple[str, np.ndarray]]:
    """Named Hermitian single-site operators built from the Weyl group."""
    x, z = shift(d), clock(d)
    ops = [("X+X†", x + x.conj().T), ("i(X-X†)", 1j * (x - x.conj().T))]
    ops += [("Z+Z†", z + z.conj().T), ("i(Z-Z†)", 1j * (z - z.conj().T))]
    if d == 2:
        return [("X", x), ("Y", 1j * x @ z), ("Z", z)]
    x2, z2 = np.linalg.matrix_power(x, 2), np.linalg.matrix_power(z, 2)
    ops += [("X^2", x2), ("Z^2", z2), ("X^2Z^2", x2 @ z2)]
    return ops
