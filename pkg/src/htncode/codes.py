"""The explicit encoding tensors, edge tensors and fixed-area projection."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .pauli import QuditPauliString, StabilizerGroup
from .tensor import DenseTensor

D = 4

# Logical basis states of the [[4,1,2]]_4 code, 1/2 times the sum of these kets.
CODEWORDS_4112 = {
    0: ((0, 0, 0, 0), (1, 1, 1, 1), (2, 2, 2, 2), (3, 3, 3, 3)),
    1: ((0, 1, 2, 3), (1, 2, 3, 0), (2, 3, 0, 1), (3, 0, 1, 2)),
    2: ((0, 2, 0, 2), (1, 3, 1, 3), (2, 0, 2, 0), (3, 1, 3, 1)),
    3: ((0, 3, 2, 1), (1, 0, 3, 2), (2, 1, 0, 3), (3, 2, 1, 0)),
}

STABILIZERS_4112 = StabilizerGroup(
    (
        QuditPauliString.from_powers("X X X X"),
        QuditPauliString.from_powers("I Z Z^2 Z"),
        QuditPauliString.from_powers("Z Z^2 Z I"),
    )
)
LOGICAL_X_4112 = QuditPauliString.from_powers("I X X^2 X^3")
LOGICAL_Z_4112 = QuditPauliString.from_powers("I I Z^3 Z")


def planar_labels(q: int) -> tuple[str, ...]:
    return tuple(f"p{k}" for k in range(q))


@lru_cache(maxsize=None)
def _a_prime_array() -> np.ndarray:
    arr = np.zeros((D,) * 5, dtype=complex)
    for j, kets in CODEWORDS_4112.items():
        for ket in kets:
            arr[(j,) + ket] = 0.5
    arr.setflags(write=False)
    return arr


def build_A_prime() -> DenseTensor:
    """5-leg ququart tensor: logical ``j`` and planar ``p0..p3`` in cyclic order."""
    return DenseTensor(("j",) + planar_labels(4), _a_prime_array().copy(), frozenset({"j"}))


def logical_states_4112() -> np.ndarray:
    """Rows are the four codewords as 256-component vectors."""
    return _a_prime_array().reshape(D, -1).copy()


def build_B(name: str) -> np.ndarray:
    """4x4 edge tensor: ``hadamard4``, ``qft4`` or ``identity``."""
    if name == "hadamard4":
        h = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=complex)
        return h / 2
    if name == "qft4":
        return np.array([[1j ** (j * k) for k in range(D)] for j in range(D)]) / 2
    if name == "identity":
        return np.eye(D, dtype=complex)
    raise ValueError(f"unknown edge tensor {name!r}")


EDGE_NAMES = ("hadamard4", "qft4", "identity")

# Frequently quoted variant of H_4 with the third row's sign pattern off by one
# entry; it is neither unitary nor a Hadamard matrix.
SIGN_SLIP_H4 = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, 1, -1], [1, -1, -1, 1]], dtype=complex) / 2


def sign_slip_finding() -> dict:
    """Unitarity and symmetry of the sign-slipped matrix next to the Sylvester one."""
    m = SIGN_SLIP_H4
    return {
        "matrix": (2 * m.real).astype(int).tolist(),
        "unitary": is_unitary(m),
        "symmetric": is_symmetric(m),
        "unitarityDefect": float(np.abs(m @ m.conj().T - np.eye(D)).max()),
        "replacement": "hadamard4",
    }


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.abs(m @ m.conj().T - np.eye(m.shape[0])).max() <= tol)


def is_symmetric(m: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.abs(m - m.T).max() <= tol)


def x_eigenstate(k: int = 1) -> np.ndarray:
    """Logical-basis coefficients of the logical-X eigenstates; ``k=1`` is the uniform one."""
    return np.array([1j ** (-(k - 1) * j) for j in range(D)]) / 2


def z_eigenstate(k: int = 0) -> np.ndarray:
    v = np.zeros(D, dtype=complex)
    v[k] = 1
    return v


def alpha_state(alpha: float) -> np.ndarray:
    """``alpha |0> + sqrt(1 - alpha^2) |2>`` in the logical basis."""
    v = np.zeros(D, dtype=complex)
    v[0], v[2] = alpha, np.sqrt(max(0.0, 1 - alpha**2))
    return v


def build_fixed_area_state() -> DenseTensor:
    """A' with its logical leg projected on the uniform logical-X eigenstate."""
    return build_A_prime().project("j", x_eigenstate(1))


def five_qudit_code(d: int = 2) -> tuple[StabilizerGroup, QuditPauliString, QuditPauliString]:
    """Stabilizers ``X Z Z^-1 X^-1 I`` (cyclic shifts) with logicals ``X^5``, ``Z^5``."""
    base = [(1, 0), (0, 1), (0, -1), (-1, 0), (0, 0)]
    gens = []
    for s in range(4):
        xz = base[-s:] + base[:-s] if s else base
        gens.append(QuditPauliString(tuple(a for a, _ in xz), tuple(b for _, b in xz), 0, d))
    lx = QuditPauliString((1,) * 5, (0,) * 5, 0, d)
    lz = QuditPauliString((0,) * 5, (1,) * 5, 0, d)
    return StabilizerGroup(tuple(gens)), lx, lz


@lru_cache(maxsize=None)
def _pentagon_array(d: int) -> np.ndarray:
    group, lx, lz = five_qudit_code(d)
    dim = d**5
    proj = np.eye(dim, dtype=complex)
    for g in list(group.generators) + [lz]:
        m = g.matrix()
        proj = proj @ sum(np.linalg.matrix_power(m, k) for k in range(d)) / d
    # The +1 eigenspace of Z^5 within the code is one-dimensional.
    vals, vecs = np.linalg.eigh((proj + proj.conj().T) / 2)
    zero = vecs[:, np.argmax(vals)]
    zero = zero / np.linalg.norm(zero)
    top = np.argmax(np.abs(zero))
    zero = zero * abs(zero[top]) / zero[top]
    words = [zero]
    xm = lx.matrix()
    for _ in range(d - 1):
        words.append(xm @ words[-1])
    arr = np.array(words).reshape((d,) * 6)
    arr.setflags(write=False)
    return arr


def build_pentagon(d: int = 2) -> DenseTensor:
    """6-leg perfect tensor of the five-qudit code (logical ``j``, planar ``p0..p4``)."""
    return DenseTensor(("j",) + planar_labels(5), _pentagon_array(d).copy(), frozenset({"j"}))


VERTEX_TENSORS = {"a4112": build_A_prime, "pentagon513": build_pentagon}
