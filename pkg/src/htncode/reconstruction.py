"""Greedy bulk reconstruction, wedges, residual regions and erasures.

Moves are admitted only after the local map they stand for passes an
isometry check on the actual vertex and edge tensors of the network.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import config
from .codes import (
    LOGICAL_X_4112,
    LOGICAL_Z_4112,
    STABILIZERS_4112,
    x_eigenstate,
    z_eigenstate,
)
from .network import CodeNetwork, sandwich
from .pauli import QuditPauliString, NoPush, NotWeyl, embed, push_through_B, push_through_code
from .tensor import DenseTensor, contract, isometry_check
from .tiling import BoundaryRegion, Cut, TilingParams, build_tiling, minimal_cut, subpatch


@dataclass(frozen=True)
class GreedyMove:
    """One admitted absorption step.

    ``legs_required`` are the known ``(vertex, slot)`` legs, ``legs_gained``
    the newly known ones (the far sides of unknown legs) plus logicals.
    """

    kind: str
    footprint: tuple[int, ...]
    legs_required: tuple[tuple[int, int], ...]
    legs_gained: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "footprint": list(self.footprint),
            "legsRequired": [list(x) for x in self.legs_required],
            "legsGained": [list(x) for x in self.legs_gained],
        }


@dataclass(frozen=True)
class MoveSet:
    """Admissible known-leg patterns for single-vertex and adjacent-pair moves.

    ``single`` holds sets of known slots; ``pair[(su, sv)]`` holds pairs of
    known-slot sets for two vertices joined through slots ``su`` and ``sv``.
    """

    mode: str
    q: int
    single: frozenset[frozenset[int]]
    pair: dict = field(default_factory=dict)
    rejected: tuple[str, ...] = ()

    @property
    def single_kind(self) -> str:
        return "happy_single" if self.mode == "happy" else "htn_w"

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "single": sorted(sorted(s) for s in self.single),
            "pair": {
                f"{su},{sv}": sorted([sorted(a), sorted(b)] for a, b in pats)
                for (su, sv), pats in sorted(self.pair.items())
            },
            "rejected": list(self.rejected),
        }


def _planar(q: int) -> list[str]:
    return [f"p{k}" for k in range(q)]


def validate_single(tensor: DenseTensor, known: Iterable[int], tol: float = config.TOL) -> bool:
    """Isometry from the logical leg and unknown planar legs onto the known ones."""
    known = set(known)
    q = len(tensor.planar)
    inputs = ["j"] + [f"p{k}" for k in range(q) if k not in known]
    return isometry_check(tensor, inputs, tol)


def pair_tensor(tensor: DenseTensor, edge: np.ndarray | None, su: int, sv: int) -> DenseTensor:
    """Two copies of ``tensor`` joined through ``edge`` on slots ``su`` / ``sv``.

    Legs are ``ju, u<k>`` (k != su) and ``jv, v<k>`` (k != sv).
    """
    q = len(tensor.planar)
    u = tensor.relabel({"j": "ju", **{f"p{k}": f"u{k}" for k in range(q)}})
    v = tensor.relabel({"j": "jv", **{f"p{k}": f"v{k}" for k in range(q)}})
    if edge is not None:
        b = DenseTensor(("s", "t"), edge)
        u = contract(u, b, [(f"u{su}", "s")]).relabel({"t": f"u{su}"})
    return contract(u, v, [(f"u{su}", f"v{sv}")])


def validate_pair(
    tensor: DenseTensor, edge, su: int, sv: int, known_u, known_v, tol: float = config.TOL
) -> bool:
    q = len(tensor.planar)
    t = pair_tensor(tensor, edge, su, sv)
    inputs = ["ju", "jv"]
    inputs += [f"u{k}" for k in range(q) if k != su and k not in set(known_u)]
    inputs += [f"v{k}" for k in range(q) if k != sv and k not in set(known_v)]
    return isometry_check(t, inputs, tol)


def build_moveset(net: CodeNetwork, mode: str | None = None, tol: float = config.TOL) -> MoveSet:
    """Validate every candidate move pattern against the network's tensors.

    ``happy`` mode: single-vertex moves with at least ceil((q+1)/2) known legs.
    ``htn`` mode: any validated single-vertex pattern (w') plus adjacent-pair
    patterns (u') with at least four known external legs.
    """
    mode = mode or ("happy" if net.edge is None else "htn")
    key = (net.vertex_tensor.labels, net.vertex_tensor.data.tobytes(),
           None if net.edge is None else net.edge.tobytes(), mode, tol)
    if key not in _MOVESET_CACHE:
        _MOVESET_CACHE[key] = _validate_moves(net.vertex_tensor, net.edge, mode, tol)
    return _MOVESET_CACHE[key]


_MOVESET_CACHE: dict = {}


def _validate_moves(tensor: DenseTensor, edge, mode: str, tol: float) -> MoveSet:
    q = len(tensor.planar)
    threshold = math.ceil((q + 1) / 2) if mode == "happy" else 1
    single, rejected = set(), []
    for r in range(threshold, q + 1):
        for known in itertools.combinations(range(q), r):
            if validate_single(tensor, known, tol):
                single.add(frozenset(known))
            elif mode == "happy":
                rejected.append(f"happy_single known={list(known)}")
    pair: dict = {}
    if mode == "htn":
        for su, sv in itertools.product(range(q), repeat=2):
            ext_u = [k for k in range(q) if k != su]
            ext_v = [k for k in range(q) if k != sv]
            ext = [("u", k) for k in ext_u] + [("v", k) for k in ext_v]
            pats = set()
            for r in range(4, len(ext) + 1):
                for known in itertools.combinations(ext, r):
                    ku = frozenset(k for s, k in known if s == "u")
                    kv = frozenset(k for s, k in known if s == "v")
                    # Patterns a single-vertex move already covers are not pair moves.
                    if ku in single or kv in single:
                        continue
                    if validate_pair(tensor, edge, su, sv, ku, kv, tol):
                        pats.add((ku, kv))
            pair[(su, sv)] = frozenset(pats)
    return MoveSet(mode, q, frozenset(single), pair, tuple(rejected))


@dataclass(frozen=True)
class Wedge:
    vertices: frozenset[int]
    cut: Cut
    source: BoundaryRegion
    moves: tuple[GreedyMove, ...] = ()

    def to_dict(self) -> dict:
        return {
            "wedge": sorted(self.vertices),
            "cut": self.cut.to_dict(),
            "source": sorted(self.source.legs),
            "moves": [m.to_dict() for m in self.moves],
        }


def _far_side(tiling, v: int, k: int):
    kind, i = tiling.slots[v][k]
    if kind != "edge":
        return None
    a, sa, b, sb = tiling.edges[i]
    return (b, sb) if (a, sa) == (v, k) else (a, sa)


def greedy(
    net: CodeNetwork,
    region: BoundaryRegion,
    moves: MoveSet | None = None,
    shuffle: random.Random | None = None,
) -> Wedge:
    """Fixed point of admitted moves starting from the legs of ``region``.

    Candidates are tried lowest vertex id first (single moves before pair
    moves at equal id).  ``shuffle`` randomizes that order instead; the
    closure does not depend on it.
    """
    tiling = net.tiling
    moves = moves or build_moveset(net)
    q = tiling.q
    known: set[tuple[int, int]] = {tiling.boundary[b] for b in region.legs}
    absorbed: set[int] = set()
    applied: list[GreedyMove] = []

    def known_slots(v):
        return frozenset(k for k in range(q) if (v, k) in known)

    def absorb(kind, verts):
        req, gained = [], []
        for v in verts:
            for k in range(q):
                far = _far_side(tiling, v, k)
                if (v, k) in known:
                    req.append((v, k))
                elif far is not None and far[0] not in verts and far[0] not in absorbed:
                    gained.append(far)
        absorbed.update(verts)
        known.update(gained)
        applied.append(GreedyMove(kind, tuple(verts), tuple(req), tuple(gained)))

    while True:
        cands = []
        for v in range(tiling.n_vertices):
            if v in absorbed:
                continue
            cands.append((v, 0, (v,)))
            if moves.pair:
                for k in range(q):
                    far = _far_side(tiling, v, k)
                    if far and far[0] > v and far[0] not in absorbed:
                        cands.append((v, 1, (v, far[0]), k, far[1]))
        if shuffle is not None:
            shuffle.shuffle(cands)
        done = False
        for c in cands:
            if c[1] == 0:
                if known_slots(c[0]) in moves.single:
                    absorb(moves.single_kind, c[2])
                    done = True
                    break
            else:
                u, w = c[2]
                su, sw = c[3], c[4]
                pats = moves.pair.get((su, sw), ())
                if (known_slots(u) - {su}, known_slots(w) - {sw}) in pats:
                    absorb("htn_u", c[2])
                    done = True
                    break
        if not done:
            break
    return Wedge(frozenset(absorbed), wedge_cut(tiling, absorbed, region), region, tuple(applied))


def wedge_cut(tiling, vertices: Iterable[int], region: BoundaryRegion) -> Cut:
    """Legs bounding the wedge: edges leaving it and its boundary legs outside ``region``."""
    vs = set(vertices)
    edges = frozenset(e for e, (u, _, v, _) in enumerate(tiling.edges) if (u in vs) != (v in vs))
    legs = frozenset(b for b, (v, _) in enumerate(tiling.boundary) if v in vs and b not in region.legs)
    return Cut(edges, legs)


def residual_region(net: CodeNetwork, region: BoundaryRegion, moves: MoveSet | None = None) -> frozenset[int]:
    a = greedy(net, region, moves).vertices
    ac = greedy(net, region.complement(), moves).vertices
    return frozenset(range(net.tiling.n_vertices)) - a - ac


@dataclass(frozen=True)
class ErasureReport:
    erased: tuple[int, ...]
    wedge: Wedge
    excluded: frozenset[int]

    def to_dict(self) -> dict:
        out = self.wedge.to_dict()
        out["erased"] = list(self.erased)
        out["excluded"] = sorted(self.excluded)
        return out


def erasure_map(net: CodeNetwork, erased: Iterable[int], moves: MoveSet | None = None) -> ErasureReport:
    erased = tuple(sorted(set(erased)))
    n = net.tiling.n_boundary
    if any(not 0 <= b < n for b in erased):
        raise ValueError("erased sites must be boundary legs")
    rest = BoundaryRegion(frozenset(range(n)) - set(erased), n)
    w = greedy(net, rest, moves)
    return ErasureReport(erased, w, frozenset(range(net.tiling.n_vertices)) - w.vertices)


# --- isometry proofs along the greedy sweep ---------------------------------


def _move_nodes(net: CodeNetwork, verts: Sequence[int], before: set[int]):
    """Local ket nodes of a move plus its traced and open keys."""
    tiling = net.tiling
    vs = set(verts)
    nodes = [net.vertex_node(v) for v in verts]
    traced, opened = [], []
    for v in verts:
        if net.bulk[v] is None:
            opened.append(("j", v))
        for k in range(tiling.q):
            kind, i = tiling.slots[v][k]
            key = net.slot_key(v, k)
            if kind == "leg":
                traced.append(key)
                continue
            a, _, b, _ = tiling.edges[i]
            w = b if a == v else a
            if w in before:
                traced.append(key)
            elif w in vs:
                if v == a and net.edge is not None:
                    nodes.append((net.edge, (("e", i, 0), ("e", i, 1))))
            else:
                if net.edge is not None:
                    far = ("e", i, 1 - key[2])
                    nodes.append((net.edge, (key, far) if key[2] == 0 else (far, key)))
                    opened.append(far)
                else:
                    opened.append(key)
    return nodes, traced, opened


def decomposed_isometry_defect(net: CodeNetwork, moves: MoveSet | None = None) -> float:
    """V^dagger V evaluated tile by tile along the greedy sweep from the full boundary.

    Each move's local double layer must be proportional to the identity on its
    open legs; the largest deviation is returned (inf if the sweep stalls).
    """
    full = BoundaryRegion(frozenset(range(net.tiling.n_boundary)), net.tiling.n_boundary)
    w = greedy(net, full, moves)
    if len(w.vertices) != net.tiling.n_vertices:
        return math.inf
    worst = 0.0
    before: set[int] = set()
    for mv in w.moves:
        nodes, traced, opened = _move_nodes(net, mv.footprint, before)
        m = sandwich(nodes, traced, opened)
        c = np.trace(m).real / m.shape[0]
        if c <= 0:
            return math.inf
        worst = max(worst, float(np.abs(m / c - np.eye(m.shape[0])).max()))
        before.update(mv.footprint)
    return worst


def wedge_soundness(net: CodeNetwork, wedge: Wedge, tol: float = config.TOL) -> bool:
    """Dense check that the wedge tensors map (wedge logicals + cut legs) isometrically into the source."""
    vs = sorted(wedge.vertices)
    if not vs:
        return True
    nodes = net.nodes(vs)
    # Edge tensors owned by outside vertices are dropped: unitary on an input leg.
    keys = {k for _, ks in nodes for k in ks}
    traced = [("b", b) for b in wedge.source.legs if ("b", b) in keys]
    count: dict = {}
    for _, ks in nodes:
        for k in ks:
            count[k] = count.get(k, 0) + 1
    opened = [k for k, c in count.items() if c == 1 and k not in set(traced)]
    m = sandwich(nodes, traced, opened)
    c = np.trace(m).real / m.shape[0]
    return c > 0 and float(np.abs(m / c - np.eye(m.shape[0])).max()) <= tol


# --- state-dependent reconstruction on three tensors ---------------------------


SCENARIOS = {"XZ": ("x", "z"), "ZX": ("z", "x")}


@dataclass(frozen=True)
class PushStep:
    vertex: int
    before: str
    after: str
    element: str

    def to_dict(self):
        return {"vertex": self.vertex, "before": self.before, "after": self.after, "element": self.element}


@dataclass
class StateDependentReport:
    scenario: str
    reconstructible_on: str
    mi_a: float
    mi_ac: float
    quantum_mi_a: float
    quantum_mi_ac: float
    cut_length: int
    region: list[int]
    edge: str
    push_edge: str
    representatives: dict
    verified: dict

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "reconstructibleOn": self.reconstructible_on,
            "miA": self.mi_a,
            "miAc": self.mi_ac,
            "miA_over_log4": self.mi_a / math.log(4),
            "miAc_over_log4": self.mi_ac / math.log(4),
            "quantumMiA": self.quantum_mi_a,
            "quantumMiAc": self.quantum_mi_ac,
            "cutLength": self.cut_length,
            "regionA": self.region,
            "edge": self.edge,
            "pushEdge": self.push_edge,
            "representatives": self.representatives,
            "verified": self.verified,
        }


def three_vertex_patch():
    """Centre vertex with its neighbours across slots 0 and 2 of a {5,4} patch.

    Returns ``(tiling, centre, left, right, region_a)``: left is the neighbour
    across slot 0, and ``region_a`` is the half of the eight legs that runs
    counterclockwise up to and including the left neighbour's far leg.
    """
    parent = build_tiling(TilingParams(5, 4, 1))
    left = _far_side(parent, 0, 0)[0]
    right = _far_side(parent, 0, 2)[0]
    sub, keep = subpatch(parent, [0, left, right])
    c, l, r = keep.index(0), keep.index(left), keep.index(right)
    far_leg = [b for b, (v, k) in enumerate(sub.boundary) if v == l and _opposite(sub, v, k)][0]
    n = sub.n_boundary
    region = BoundaryRegion.interval(far_leg - n // 2 + 1, n // 2, n)
    return sub, c, l, r, region


def _opposite(tiling, v, k) -> bool:
    # The slot opposite the one attached to the centre.
    attached = [s for s in range(tiling.q) if tiling.slots[v][s][0] == "edge"][0]
    return k == (attached + tiling.q // 2) % tiling.q


def _logical_state(kind: str) -> np.ndarray:
    return x_eigenstate(1) if kind == "x" else z_eigenstate(0)


def _entropy(rho: np.ndarray) -> float:
    vals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    vals = vals[vals > 1e-14]
    return float(-(vals * np.log(vals)).sum())


def _region_rho(states: np.ndarray, legs: Sequence[int], n: int, chi: int) -> list[np.ndarray]:
    out = []
    rest = [b for b in range(n) if b not in set(legs)]
    for psi in states:
        t = psi.reshape((chi,) * n).transpose(list(legs) + rest)
        m = t.reshape(chi ** len(legs), -1)
        out.append(m @ m.conj().T)
    return out


def logical_mutual_information(states: np.ndarray, legs: Sequence[int], n: int, chi: int):
    """Classical and quantum mutual information between a logical index and ``legs``.

    ``states[j]`` is the normalized boundary image of logical basis state j.
    The classical value treats j as a uniformly random label (Holevo
    quantity); the quantum value uses the maximally entangled reference.
    """
    rhos = _region_rho(states, legs, n, chi)
    avg = sum(rhos) / len(rhos)
    s_avg = _entropy(avg)
    holevo = s_avg - sum(_entropy(r) for r in rhos) / len(rhos)
    rest = [b for b in range(n) if b not in set(legs)]
    rhos_c = _region_rho(states, rest, n, chi)
    s_ref = math.log(len(states))
    # Reference plus A is the complement of A^c in the pure Choi state.
    quantum = s_ref + s_avg - _entropy(sum(rhos_c) / len(rhos_c))
    return holevo, quantum


def _patch_states(net: CodeNetwork) -> np.ndarray:
    from .network import contract_network

    t = contract_network(net)
    n = net.tiling.n_boundary
    labels = [f"b{b}" for b in range(n)]
    c = net.open_vertices[0]
    mat = t.matrix([f"j{c}"], labels)
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def state_dependent_experiment(scenario: str = "XZ", edge: str = "hadamard4") -> StateDependentReport:
    if scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {sorted(SCENARIOS)}")
    tiling, c, l, r, region = three_vertex_patch()
    kl, kr = SCENARIOS[scenario]
    bulk = [None] * 3
    bulk[l], bulk[r] = _logical_state(kl), _logical_state(kr)
    net = CodeNetwork.build(tiling, "a4112", edge, bulk)
    states = _patch_states(net)
    n = tiling.n_boundary
    a_legs = sorted(region.legs)
    ac_legs = sorted(region.complement().legs)
    mi_a, q_a = logical_mutual_information(states, a_legs, n, net.chi)
    mi_ac, q_ac = logical_mutual_information(states, ac_legs, n, net.chi)
    side = "A" if mi_a >= mi_ac else "Ac"
    target = region if side == "A" else region.complement()
    push_net = CodeNetwork.build(tiling, "a4112", "qft4", bulk)
    reps, verified = {}, {}
    for name, op in (("X", LOGICAL_X_4112), ("Z", LOGICAL_Z_4112)):
        chain = push_logical(push_net, c, op, target, {l: kl, r: kr})
        reps[name] = chain
        verified[name] = verify_boundary_representative(push_net, c, op, chain["boundary"])
    return StateDependentReport(
        scenario, side, mi_a, mi_ac, q_a, q_ac, minimal_cut(tiling, region).length,
        a_legs, edge, "qft4", reps, verified,
    )


def _allowed(kind: str | None):
    if kind == "x":
        return (LOGICAL_X_4112,)
    if kind == "z":
        return (LOGICAL_Z_4112,)
    return ()


def push_logical(
    net: CodeNetwork, centre: int, op: QuditPauliString, target: BoundaryRegion, projected: dict
) -> dict:
    """Push a logical operator of ``centre`` onto boundary legs of ``target``.

    Searches representatives at the centre in canonical stabilizer order;
    components on internal legs cross the edge tensor and are cleared at the
    neighbour with its stabilizers and the logical fixed by its projection.
    Raises NoPush when nothing works.
    """
    tiling = net.tiling
    q = tiling.q
    outside = {k for k in range(q) if tiling.slots[centre][k][0] == "leg"
               and tiling.slots[centre][k][1] not in target.legs}
    for _, g in STABILIZERS_4112.elements():
        rep = op * g
        if outside & set(rep.support):
            continue
        steps = [PushStep(centre, str(op), str(rep), str(g))]
        pieces: dict[int, QuditPauliString] = {}
        ok = True
        for k in range(q):
            if tiling.slots[centre][k][0] == "leg":
                continue
            single = rep.restrict([k])
            if single.is_identity():
                continue
            w, m = _far_side(tiling, centre, k)
            try:
                moved = push_through_B(single, net.edge)
                arrived = embed(moved, [m], q)
                avoid = {s for s in range(q) if tiling.slots[w][s][0] == "edge"
                         or tiling.slots[w][s][1] not in target.legs}
                out, h = push_through_code(arrived, STABILIZERS_4112, avoid, _allowed(projected.get(w)))
            except (NotWeyl, NoPush):
                ok = False
                break
            steps.append(PushStep(w, str(arrived), str(out), str(h)))
            pieces[w] = out
        if not ok:
            continue
        pieces[centre] = QuditPauliString(
            tuple(rep.x[k] if tiling.slots[centre][k][0] == "leg" else 0 for k in range(q)),
            tuple(rep.z[k] if tiling.slots[centre][k][0] == "leg" else 0 for k in range(q)),
        )
        boundary = [[0, 0] for _ in range(tiling.n_boundary)]
        for v, piece in pieces.items():
            for k in range(q):
                kind, b = tiling.slots[v][k]
                if kind == "leg" and (piece.x[k] or piece.z[k]):
                    boundary[b] = [piece.x[k], piece.z[k]]
        bstring = QuditPauliString(tuple(x for x, _ in boundary), tuple(z for _, z in boundary))
        return {"steps": [s.to_dict() for s in steps], "boundary": str(bstring),
                "support": list(bstring.support)}
    raise NoPush(f"no representative of {op} reaches the target region")


def verify_boundary_representative(
    net: CodeNetwork, centre: int, logical: QuditPauliString, boundary: str, tol: float = config.TOL
) -> bool:
    """Dense check ``O_boundary V = e^{i phi} V L`` on the patch encoding map."""
    from .network import contract_network

    n = net.tiling.n_boundary
    t = contract_network(net)
    labels = [f"b{b}" for b in range(n)]
    v = t.transpose([f"j{centre}"] + labels).data  # axes: logical, boundary legs
    lmat = _logical_matrix(logical)
    # V L: act with L on the logical index of the encoder.
    rhs = np.tensordot(lmat, v, axes=([0], [0]))
    op = QuditPauliString.parse(boundary, n)
    lhs = v
    for b in range(n):
        if op.x[b] or op.z[b]:
            lhs = np.moveaxis(np.tensordot(op.local(b), lhs, axes=([1], [b + 1])), 0, b + 1)
    lhs = lhs * (1j**op.phase)
    flat_l, flat_r = lhs.reshape(-1), rhs.reshape(-1)
    c = np.vdot(flat_r, flat_l) / np.vdot(flat_r, flat_r)
    return bool(abs(abs(c) - 1) <= 1e-8 and np.abs(flat_l - c * flat_r).max() <= tol)


def _logical_matrix(logical: QuditPauliString) -> np.ndarray:
    """Action on the logical index: ``L[j, j'] = <j| L |j'>`` in the code basis."""
    from .codes import logical_states_4112

    words = logical_states_4112()
    m = logical.matrix()
    return words.conj() @ m @ words.T
