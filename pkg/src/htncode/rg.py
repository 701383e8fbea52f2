"""One-site scaling superoperators and their Hermitian eigenoperators.

The layer map takes an operator on the outer leg opposite the inner leg of a
single vertex tensor, dresses it with the edge tensor, and closes every other
leg between the tensor and its conjugate.  The result acts on the inner leg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import config
from .codes import build_A_prime, build_B, build_pentagon
from .tensor import DenseTensor

#: Scale factor per tiling; only {5,4} is known.
SCALE_FACTORS = {(5, 4): 2 + math.sqrt(3)}


class DegenerateSpectrum(UserWarning):
    """An eigenvalue carries more than one Hermitian eigenoperator."""


@dataclass(frozen=True, eq=False)
class Superoperator:
    """``matrix`` acts on row-major vectorized d x d operators."""

    matrix: np.ndarray
    bulk_state: np.ndarray | None
    d: int

    def __call__(self, op: np.ndarray) -> np.ndarray:
        return (self.matrix @ np.asarray(op, dtype=complex).reshape(-1)).reshape(self.d, self.d)

    def unitality_defect(self) -> float:
        return float(np.abs(self(np.eye(self.d)) - np.eye(self.d)).max())


def layer_map(
    tensor: DenseTensor, edge: np.ndarray | None, inner: str, outer: str, bulk_state=None
) -> Superoperator:
    """Scaling superoperator of one vertex tensor.

    ``bulk_state`` projects the logical leg (if the tensor has one).  The map is
    ``S(O) = W^dagger (B^dagger O B) W`` traced over the remaining legs, with
    ``W`` the tensor read as a map from ``inner`` to ``outer`` and the rest,
    normalized so that ``S(1) = 1``.
    """
    t = tensor
    if "j" in t.labels:
        if bulk_state is None:
            raise ValueError("a bulk state is required for tensors with a logical leg")
        t = t.project("j", np.asarray(bulk_state, dtype=complex))
    rest = [lab for lab in t.labels if lab not in (inner, outer)]
    w = t.transpose([inner, outer] + rest).data
    d_in, d_out = w.shape[0], w.shape[1]
    w = w.reshape(d_in, d_out, -1)
    b = np.eye(d_out) if edge is None else np.asarray(edge)
    # S[(a, a'), (o, o')] acting on O[o, o'] after the edge dressing B^dagger O B.
    core = np.einsum("aor,bpr->abop", w.conj(), w)
    dress = np.einsum("xo,yp->opxy", b.conj(), b)
    mat = np.einsum("abop,opxy->abxy", core, dress).reshape(d_in * d_in, d_out * d_out)
    unit = (mat @ np.eye(d_out).reshape(-1)).reshape(d_in, d_in)
    c = np.trace(unit).real / d_in
    return Superoperator(mat / c, None if bulk_state is None else np.asarray(bulk_state), d_in)


def scaling_superoperator(bulk_state, edge: str = "hadamard4") -> Superoperator:
    """The {5,4} one-site layer map of A' with its logical leg projected on ``bulk_state``."""
    state = np.asarray(bulk_state, dtype=complex)
    if abs(np.linalg.norm(state) - 1) > 1e-10:
        raise ValueError("bulk state must be normalized")
    return layer_map(build_A_prime(), build_B(edge), "p0", "p2", state)


@dataclass
class Eigenoperator:
    eigenvalue: float
    operator: np.ndarray
    delta: float | None
    residual: float

    def to_dict(self) -> dict:
        return {
            "lambda": self.eigenvalue,
            "delta": self.delta,
            "residual": self.residual,
            "re": self.operator.real.round(14).tolist(),
            "im": self.operator.imag.round(14).tolist(),
        }


@dataclass
class Spectrum:
    entries: list[Eigenoperator]
    degenerate: bool
    eigenvalues: list[complex] = field(default_factory=list)

    @property
    def positive(self) -> list[Eigenoperator]:
        return [e for e in self.entries if e.eigenvalue > 0]

    def nontrivial(self) -> Eigenoperator | None:
        """Leading eigenoperator orthogonal to the identity."""
        for e in self.entries:
            d = e.operator.shape[0]
            if abs(np.trace(e.operator)) / (np.linalg.norm(e.operator) * math.sqrt(d)) < 1e-8:
                return e
        return None


def _hermitian_basis(d: int) -> list[np.ndarray]:
    basis = []
    for i in range(d):
        m = np.zeros((d, d), complex)
        m[i, i] = 1
        basis.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), complex)
            m[i, j] = m[j, i] = 1 / math.sqrt(2)
            basis.append(m)
            m = np.zeros((d, d), complex)
            m[i, j], m[j, i] = -1j / math.sqrt(2), 1j / math.sqrt(2)
            basis.append(m)
    return basis


def fix_phase(op: np.ndarray) -> np.ndarray:
    """Unit Frobenius norm with a deterministic phase.

    The largest entry (first in row-major order) is made real positive.  A
    Hermitian operator only has a sign to fix, so there the entry is made to
    have positive real part, or positive imaginary part when purely imaginary.
    """
    op = op / np.linalg.norm(op)
    flat = op.reshape(-1)
    mags = np.abs(flat)
    k = int(np.flatnonzero(mags >= mags.max() - 1e-9)[0])
    c = flat[k]
    if np.allclose(op, op.conj().T, atol=1e-12):
        lead = c.real if abs(c.real) > 1e-9 else c.imag
        return op if lead > 0 else -op
    return op * (abs(c) / c)


def primary_spectrum(
    s: Superoperator, scale: float = SCALE_FACTORS[(5, 4)], tol: float = config.EIG_TOL
) -> Spectrum:
    """Hermitian eigenoperators of ``s`` with nonzero real eigenvalue, sorted descending.

    Each real eigenvalue's Hermitian eigenspace is found as the null space of
    ``S - lambda`` on the real vector space of Hermitian matrices.  An
    eigenspace of dimension above one sets ``degenerate``; the identity is
    split off first when it lies in the eigenspace.
    """
    d = s.d
    vals = scipy.linalg.eigvals(s.matrix)
    real = sorted({round(v.real, 10) for v in vals if abs(v.imag) <= tol and abs(v) > tol}, reverse=True)
    basis = _hermitian_basis(d)
    entries, degenerate = [], False
    for lam in real:
        # Polish the eigenvalue against the full list.
        lam = float(min((v.real for v in vals if abs(v.imag) <= tol), key=lambda x: abs(x - lam)))
        cols = [np.concatenate([(s(h) - lam * h).real.reshape(-1), (s(h) - lam * h).imag.reshape(-1)]) for h in basis]
        m = np.array(cols).T
        _, sv, vt = np.linalg.svd(m)
        null = vt[np.sum(sv > tol * max(1.0, sv[0])):]
        if len(null) == 0:
            continue
        ops = [sum(c * h for c, h in zip(vec, basis)) for vec in null]
        if len(ops) > 1:
            degenerate = True
            ident = np.eye(d) / math.sqrt(d)
            in_span = _project_span(ops, ident)
            if np.linalg.norm(in_span - ident) < 1e-8:
                ops = [ident] + _orthogonal_complement(ops, ident)
        for op in ops:
            op = fix_phase(op)
            res = float(np.linalg.norm(s(op) - lam * op))
            delta = -math.log(lam) / math.log(scale) if lam > 0 else None
            entries.append(Eigenoperator(lam, op, delta, res))
    entries.sort(key=lambda e: -e.eigenvalue)
    return Spectrum(entries, degenerate, [complex(v) for v in vals])


def _flat(op):
    return np.concatenate([op.real.reshape(-1), op.imag.reshape(-1)])


def _project_span(ops, target):
    q, _ = np.linalg.qr(np.array([_flat(o) for o in ops]).T)
    v = q @ (q.T @ _flat(target))
    n = target.size
    return (v[:n] + 1j * v[n:]).reshape(target.shape)


def _orthogonal_complement(ops, target):
    t = _flat(target) / np.linalg.norm(_flat(target))
    out = []
    for o in ops:
        v = _flat(o)
        v = v - t * (t @ v)
        for u in out:
            uf = _flat(u)
            v = v - uf * (uf @ v)
        if np.linalg.norm(v) > 1e-8:
            v = v / np.linalg.norm(v)
            n = target.size
            out.append((v[:n] + 1j * v[n:]).reshape(target.shape))
    return out


def predicted_lambda(alpha: float) -> float:
    return math.sqrt(2 * alpha * math.sqrt(max(0.0, 1 - alpha**2)))


def predicted_eigenoperator(lam: float) -> np.ndarray:
    m = np.array(
        [[1, 0, lam, 0], [0, 1, 0, lam], [lam, 0, -1, 0], [0, lam, 0, -1]], dtype=complex
    )
    return m / math.sqrt(1 + lam**2)


def operator_overlap(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


def happy_layer_maps(d: int = 2, bulk_states=None) -> list[Superoperator]:
    """Pentagon layer maps for every (inner, outer) pair of planar legs and bulk states."""
    t = build_pentagon(d)
    if bulk_states is None:
        plus = np.ones(d) / math.sqrt(d)
        bulk_states = [np.eye(d)[0], np.eye(d)[1], plus]
    maps = []
    for state in bulk_states:
        for i in range(5):
            for o in range(5):
                if i != o:
                    maps.append(layer_map(t, None, f"p{i}", f"p{o}", state))
    return maps


def traceless_basis(d: int) -> list[np.ndarray]:
    return [h for h in _hermitian_basis(d) if abs(np.trace(h)) < 1e-12] + [
        (np.diag([1.0] * k + [-k] + [0.0] * (d - k - 1)) / math.sqrt(k * (k + 1))).astype(complex)
        for k in range(1, d)
    ]


def happy_rg_check(d: int = 2, tol: float = config.TOL, return_norm: bool = False):
    """True iff every traceless input leaves no traceless part under every pentagon layer map."""
    worst = 0.0
    for s in happy_layer_maps(d):
        for op in traceless_basis(s.d):
            out = s(op)
            traceless = out - np.trace(out) / s.d * np.eye(s.d)
            worst = max(worst, float(np.linalg.norm(traceless)))
    ok = worst <= tol
    return (ok, worst) if return_norm else ok


def alpha_sweep(alphas, edge: str = "hadamard4") -> list[dict]:
    """Leading nontrivial eigenvalue and scaling dimension along the alpha family."""
    from .codes import alpha_state

    rows = []
    for a in alphas:
        spectrum = primary_spectrum(scaling_superoperator(alpha_state(a), edge))
        e = spectrum.nontrivial()
        lam = e.eigenvalue if e is not None else 0.0
        delta = e.delta if e is not None else None
        rows.append({"alpha": float(a), "lambda": lam, "delta": delta, "predicted": predicted_lambda(a)})
    return rows
