"""Entanglement spectra, entropies, mutual information and area-law checks.

Entropies are in natural-log units.  For a network state the Schmidt
spectrum comes from a minimum-cut Gram factorization, so no reduced density
matrix of a large region is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .network import (
    CodeNetwork,
    boundary_keys,
    entanglement_entropy,
    node_schmidt_probabilities,
    sandwich,
    schmidt_probabilities,
    _free_keys,
)
from .reconstruction import MoveSet, build_moveset, greedy
from .tensor import DenseTensor
from .tiling import BoundaryRegion, minimal_cut

LOG4 = math.log(4)


class NoComplementaryRecovery(UserWarning):
    """Greedy wedges of a region and its complement leave bulk vertices uncovered."""


def von_neumann(probs: np.ndarray) -> float:
    return entanglement_entropy(np.asarray(probs, dtype=float))


def matrix_entropy(rho: np.ndarray) -> float:
    vals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    vals = np.clip(vals, 0, None)
    vals = vals / vals.sum()
    return von_neumann(vals)


@dataclass
class EntanglementReport:
    region: list[int]
    entropy: float
    schmidt_values: list[float]
    cut_length: int | None = None
    bulk_entropy: float | None = None

    @property
    def rank(self) -> int:
        return len(self.schmidt_values)

    def to_dict(self) -> dict:
        out = {
            "region": self.region,
            "entropy": self.entropy,
            "entropy_over_log4": self.entropy / LOG4,
            "schmidtValues": self.schmidt_values,
            "cutLength": self.cut_length,
        }
        if self.bulk_entropy is not None:
            out["bulkEntropy"] = self.bulk_entropy
        return out


def _report(probs, region_legs, cut_length=None, bulk=None, tol=1e-14) -> EntanglementReport:
    probs = np.asarray(probs, dtype=float)
    probs = probs[probs > tol * max(1.0, probs.max())]
    values = np.sqrt(np.sort(probs)[::-1])
    return EntanglementReport(sorted(region_legs), von_neumann(probs), values.tolist(), cut_length, bulk)


def entanglement(state, region: BoundaryRegion | Sequence, with_cut: bool = True) -> EntanglementReport:
    """Schmidt spectrum of a pure boundary state across ``region``.

    ``state`` is a dense boundary tensor (legs in boundary order) or a
    ``CodeNetwork`` with every bulk leg projected.
    """
    if isinstance(state, CodeNetwork):
        legs = sorted(region.legs if isinstance(region, BoundaryRegion) else region)
        probs = schmidt_probabilities(state, [("b", b) for b in legs])
        cut = None
        if with_cut and 0 < len(legs) < state.tiling.n_boundary:
            cut = minimal_cut(state.tiling, state.tiling.region(legs)).length
        return _report(probs, legs, cut)
    t = state if isinstance(state, DenseTensor) else DenseTensor(
        tuple(f"b{i}" for i in range(np.ndim(state))), np.asarray(state)
    )
    legs = sorted(region.legs if isinstance(region, BoundaryRegion) else region)
    rows = [t.labels[i] for i in legs]
    cols = [lab for lab in t.labels if lab not in rows]
    if not rows or not cols:
        return _report(np.array([1.0]), legs)
    m = t.matrix(rows, cols)
    s = np.linalg.svd(m, compute_uv=False)
    probs = s**2 / (s**2).sum()
    return _report(probs, legs)


def mutual_information(net: CodeNetwork, a: Sequence[int], b: Sequence[int]) -> float:
    """``S_A + S_B - S_AB`` for disjoint boundary regions of a projected network."""
    if set(a) & set(b):
        raise ValueError("regions must be disjoint")
    s = lambda legs: von_neumann(schmidt_probabilities(net, [("b", i) for i in legs]))
    return s(a) + s(b) - s(list(a) + list(b))


def pair_density(net: CodeNetwork, a: int, b: int) -> np.ndarray:
    """Normalized two-site reduced density matrix, site ``a`` first."""
    nodes = net.nodes()
    keep = [("b", a), ("b", b)]
    rho = sandwich(nodes, [k for k in _free_keys(nodes) if k not in keep], keep)
    return rho / np.trace(rho).real


def pair_statistics(rho: np.ndarray, d: int) -> dict:
    """Entropies and mutual information of a two-site density matrix."""
    r = rho.reshape(d, d, d, d)
    ra = np.einsum("ijkj->ik", r)
    rb = np.einsum("ijil->jl", r)
    sa, sb, sab = matrix_entropy(ra), matrix_entropy(rb), matrix_entropy(rho)
    return {"S_a": sa, "S_b": sb, "S_ab": sab, "I": sa + sb - sab}


def mi_bound_holds(rho: np.ndarray, op_a: np.ndarray, op_b: np.ndarray, d: int, tol: float = 1e-12) -> bool:
    """``I(A:B) >= C^2 / (2 |O_A|^2 |O_B|^2)`` with operator norms."""
    ab = np.kron(op_a, op_b)
    ea = np.trace(rho @ np.kron(op_a, np.eye(d))).real
    eb = np.trace(rho @ np.kron(np.eye(d), op_b)).real
    c = np.trace(rho @ ab).real - ea * eb
    na, nb = np.linalg.norm(op_a, 2), np.linalg.norm(op_b, 2)
    bound = c**2 / (2 * na**2 * nb**2)
    return pair_statistics(rho, d)["I"] >= bound - tol


@dataclass
class RTReport:
    region: list[int]
    entropy: float
    cut_length: int
    bulk_entropy: float
    chi: int
    complementary: bool

    @property
    def residual(self) -> float:
        return self.entropy - (self.cut_length * math.log(self.chi) + self.bulk_entropy)

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "S_A": self.entropy,
            "cutLength": self.cut_length,
            "S_a": self.bulk_entropy,
            "residual": self.residual,
            "complementaryRecovery": self.complementary,
        }


def bulk_wedge_entropy(net: CodeNetwork, wedge: frozenset[int]) -> float:
    """Entropy of the logical bulk state restricted to ``wedge``.

    Product factors contribute nothing; each joint factor contributes the
    entropy of its reduction to the vertices inside the wedge.
    """
    total = 0.0
    for verts, state in net.joint:
        inside = [i for i, v in enumerate(verts) if v in wedge]
        if not inside or len(inside) == len(verts):
            continue
        rest = [i for i in range(len(verts)) if i not in inside]
        t = np.asarray(state).transpose(inside + rest)
        m = t.reshape(math.prod(t.shape[: len(inside)]), -1)
        s = np.linalg.svd(m, compute_uv=False)
        total += von_neumann(s**2 / (s**2).sum())
    return total


def rt_check(net: CodeNetwork, region: BoundaryRegion, moves: MoveSet | None = None) -> RTReport:
    """``S_A`` against ``|gamma_A| log chi + S_a`` for a network with a fixed bulk state.

    The bulk state is the network's projection (``bulk``) plus any joint
    logical states.  ``complementary`` is False when the two greedy wedges do
    not cover the bulk, in which case the comparison is informational.
    """
    n = net.tiling.n_boundary
    if not region.legs or len(region.legs) == n:
        return RTReport(sorted(region.legs), 0.0, 0, 0.0, net.chi, True)
    moves = moves or build_moveset(net)
    a = greedy(net, region, moves).vertices
    ac = greedy(net, region.complement(), moves).vertices
    complementary = len(a | ac) == net.tiling.n_vertices
    s_a = von_neumann(schmidt_probabilities(net, boundary_keys(region)))
    cut = minimal_cut(net.tiling, region).length
    return RTReport(sorted(region.legs), s_a, cut, bulk_wedge_entropy(net, a), net.chi, complementary)


def flat_spectrum_check(net: CodeNetwork, region: BoundaryRegion, rel_tol: float = 1e-8) -> bool:
    """True iff all nonzero Schmidt weights across ``region`` agree within ``rel_tol``."""
    if not region.legs or len(region.legs) == net.tiling.n_boundary:
        return True
    probs = schmidt_probabilities(net, boundary_keys(region))
    return spectrum_spread(probs) <= rel_tol


def spectrum_spread(probs: np.ndarray, zero_tol: float = 1e-10) -> float:
    """Relative spread ``(max - min) / max`` of the nonzero weights."""
    probs = np.asarray(probs, dtype=float)
    nz = probs[probs > zero_tol * probs.max()]
    return float((nz.max() - nz.min()) / nz.max())


@dataclass
class DecompositionReport:
    region: list[int]
    lhs: float
    area_term: float
    wedge_term: float
    residual_vertices: list[int]

    @property
    def rhs(self) -> float:
        return self.area_term + self.wedge_term

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "areaTerm": self.area_term,
            "wedgeTerm": self.wedge_term,
            "gap": self.gap,
            "residual": self.residual_vertices,
        }


def htn_entropy_decomposition(
    net: CodeNetwork, region: BoundaryRegion, moves: MoveSet | None = None
) -> DecompositionReport:
    """Both sides of the residual-region entropy decomposition.

    The area term is the entanglement that the residual tensors (with their
    bulk state) mediate between the legs facing the wedge of ``region`` and
    those facing the complementary wedge; edges joining the two wedges
    directly add ``log chi`` each.  The wedge term is the bulk entropy of the
    reconstruction wedge.  The gap is reported, not asserted.
    """
    tiling = net.tiling
    n = tiling.n_boundary
    if net.open_vertices:
        raise ValueError("the decomposition needs every bulk leg fixed")
    if not region.legs or len(region.legs) == n:
        return DecompositionReport(sorted(region.legs), 0.0, 0.0, 0.0, [])
    moves = moves or build_moveset(net)
    a = greedy(net, region, moves).vertices
    ac = greedy(net, region.complement(), moves).vertices
    r = sorted(set(range(tiling.n_vertices)) - a - ac)
    lhs = von_neumann(schmidt_probabilities(net, boundary_keys(region)))
    direct = sum(1 for u, _, v, _ in tiling.edges if (u in a and v in ac) or (u in ac and v in a))
    # Boundary legs sitting on the opposite wedge cross the cut as well.
    direct += sum(
        1 for b, (v, _) in enumerate(tiling.boundary) if (b in region.legs and v in ac) or (b not in region.legs and v in a)
    )
    area = direct * math.log(net.chi)
    if r:
        nodes = net.nodes(r)
        side_a = []
        for key in _free_keys(nodes):
            if key[0] == "b":
                if key[1] in region.legs:
                    side_a.append(key)
            elif key[0] == "e":
                u, _, v, _ = tiling.edges[key[1]]
                other = v if u in r else u
                if other in a:
                    side_a.append(key)
            elif key[0] == "j":
                raise ValueError("residual vertices must carry a fixed bulk state")
        area += von_neumann(node_schmidt_probabilities(nodes, side_a))
    return DecompositionReport(sorted(region.legs), lhs, area, bulk_wedge_entropy(net, a), r)
