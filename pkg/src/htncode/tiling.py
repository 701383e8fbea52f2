"""Finite layered patches of regular {p,q} hyperbolic tilings.

Vertices carry ``q`` leg slots in counterclockwise order.  A patch is grown
tile-layer by tile-layer around a central vertex: tile-layer ``t`` consists of
every tile incident to a vertex of layer ``t - 1``, and the vertices those tiles
introduce form layer ``t``.  Geometry lives in the Poincare disk, so vertex
identification is done by position while the combinatorics (slots, faces,
boundary order) follow from orientation-preserving Mobius frames.
"""

from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from . import config


class NonHyperbolic(ValueError):
    """Raised when ``p*q <= 2*(p+q)`` for a patch with at least one layer."""


class Overflow(RuntimeError):
    """Raised when a patch would exceed ``config.VERTEX_CAP`` vertices."""


@dataclass(frozen=True)
class TilingParams:
    p: int
    q: int
    layers: int = 1

    def __post_init__(self):
        if self.p < 3 or self.q < 3:
            raise ValueError(f"need p >= 3 and q >= 3, got p={self.p}, q={self.q}")
        if self.layers < 0:
            raise ValueError("layers must be non-negative")

    @property
    def hyperbolic(self) -> bool:
        return self.p * self.q > 2 * (self.p + self.q)


@dataclass(frozen=True)
class BoundaryRegion:
    """A subset of boundary-leg indices of a tiling."""

    legs: frozenset[int]
    n_boundary: int

    def __post_init__(self):
        bad = [i for i in self.legs if not 0 <= i < self.n_boundary]
        if bad:
            raise ValueError(f"invalid boundary leg indices {sorted(bad)}")

    @classmethod
    def interval(cls, start: int, length: int, n_boundary: int) -> "BoundaryRegion":
        """Cyclically contiguous legs ``start, start+1, ..., start+length-1``."""
        legs = frozenset((start + i) % n_boundary for i in range(length))
        return cls(legs, n_boundary)

    @classmethod
    def of(cls, legs, n_boundary: int) -> "BoundaryRegion":
        return cls(frozenset(int(i) for i in legs), n_boundary)

    def complement(self) -> "BoundaryRegion":
        return BoundaryRegion(frozenset(range(self.n_boundary)) - self.legs, self.n_boundary)

    def __len__(self) -> int:
        return len(self.legs)

    def __iter__(self):
        return iter(sorted(self.legs))

    def is_connected(self) -> bool:
        """True for cyclically contiguous regions (and the empty/full region)."""
        n = self.n_boundary
        if len(self.legs) in (0, n):
            return True
        starts = [i for i in self.legs if (i - 1) % n not in self.legs]
        return len(starts) == 1


@dataclass(frozen=True)
class Cut:
    """A set of crossed internal edges and boundary legs.

    ``length`` is the number of crossed legs, i.e. the discrete area |gamma_A|.
    """

    edges: frozenset[int]
    legs: frozenset[int] = frozenset()

    @property
    def length(self) -> int:
        return len(self.edges) + len(self.legs)

    def to_dict(self) -> dict:
        return {"edges": sorted(self.edges), "legs": sorted(self.legs), "length": self.length}


# --- Mobius geometry ------------------------------------------------------


def _rot(theta: float) -> np.ndarray:
    return np.array([[cmath.exp(0.5j * theta), 0], [0, cmath.exp(-0.5j * theta)]])


def _trans(dist: float) -> np.ndarray:
    c, s = math.cosh(dist / 2), math.sinh(dist / 2)
    return np.array([[c, s], [s, c]], dtype=complex)


def _apply(m: np.ndarray, z: complex) -> complex:
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def _inverse(m: np.ndarray) -> np.ndarray:
    # SU(1,1) elements have unit determinant.
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


class _Universe:
    """Lazily explored infinite tiling; vertices are Mobius frames."""

    def __init__(self, p: int, q: int):
        self.p, self.q = p, q
        half_edge = math.acosh(math.cos(math.pi / p) / math.sin(math.pi / q))
        self.edge = 2 * half_edge
        self.frames: list[np.ndarray] = [np.eye(2, dtype=complex)]
        self.pos: list[complex] = [0j]
        self.nbr: list[list[tuple[int, int] | None]] = [[None] * q]
        self._buckets: dict[tuple[int, int], list[int]] = {}
        self._index(0)

    def _key(self, z: complex) -> tuple[int, int]:
        return (round(z.real * 1e6), round(z.imag * 1e6))

    def _index(self, v: int):
        self._buckets.setdefault(self._key(self.pos[v]), []).append(v)

    def _find(self, z: complex) -> int | None:
        kx, ky = self._key(z)
        tol = 1e-7 * max(1.0 - abs(z) ** 2, 1e-12)
        for dx, dy in itertools.product((-1, 0, 1), repeat=2):
            for v in self._buckets.get((kx + dx, ky + dy), ()):
                if abs(self.pos[v] - z) < max(tol, 1e-9):
                    return v
        return None

    def _slot_towards(self, v: int, z: complex) -> int:
        w = _apply(_inverse(self.frames[v]), z)
        k = round(cmath.phase(w) / (2 * math.pi / self.q)) % self.q
        return k

    def neighbor(self, v: int, k: int) -> tuple[int, int]:
        """Return ``(w, m)``: the vertex across slot ``k`` of ``v`` and its slot back."""
        hit = self.nbr[v][k]
        if hit is not None:
            return hit
        step = _rot(2 * math.pi * k / self.q) @ _trans(self.edge)
        frame = self.frames[v] @ step @ _rot(math.pi)
        z = _apply(frame, 0j)
        w = self._find(z)
        if w is None:
            if len(self.pos) > 40 * config.VERTEX_CAP:
                raise Overflow("tiling exploration exceeded the vertex cap")
            w = len(self.pos)
            self.frames.append(frame)
            self.pos.append(z)
            self.nbr.append([None] * self.q)
            self._index(w)
            m = 0
        else:
            m = self._slot_towards(w, self.pos[v])
        self.nbr[v][k] = (w, m)
        self.nbr[w][m] = (v, k)
        return w, m

    def face(self, v: int, k: int) -> tuple[int, ...]:
        """Vertices of the tile lying counterclockwise of slot ``k`` at ``v``."""
        verts = []
        cur, slot = v, k
        for _ in range(self.p):
            verts.append(cur)
            w, m = self.neighbor(cur, slot)
            cur, slot = w, (m - 1) % self.q
        if cur != v:
            raise RuntimeError("face tracing did not close; numerical failure")
        return tuple(verts)


@dataclass(frozen=True)
class HyperbolicTiling:
    """A finite vertex-centred patch.

    ``slots[v][k]`` is ``("edge", e)`` for an internal edge id or
    ``("leg", b)`` for a boundary leg index.  ``edges[e] = (u, su, v, sv)``
    with ``u < v`` (or ``u == v`` never happens).  ``boundary[b] = (v, k)``
    enumerates dangling legs counterclockwise; ``leg_points[b]`` is the
    position of the (absent) vertex that leg ``b`` points to.
    """

    params: TilingParams
    layer: tuple[int, ...]
    positions: tuple[complex, ...]
    edges: tuple[tuple[int, int, int, int], ...]
    boundary: tuple[tuple[int, int], ...]
    slots: tuple[tuple[tuple[str, int], ...], ...]
    tiles: tuple[tuple[int, ...], ...] = field(default=())
    leg_points: tuple[complex, ...] = field(default=(), compare=False)

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def n_vertices(self) -> int:
        return len(self.layer)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    def edge_pairs(self) -> list[tuple[int, int]]:
        return [(u, v) for u, _, v, _ in self.edges]

    def edge_tags(self) -> list[str]:
        """``boundary-adjacent`` if an endpoint carries a dangling leg."""
        has_leg = {v for v, _ in self.boundary}
        return [
            "boundary-adjacent" if (u in has_leg or v in has_leg) else "internal"
            for u, v in self.edge_pairs()
        ]

    def legs_of(self, v: int) -> list[int]:
        return [i for kind, i in self.slots[v] if kind == "leg"]

    def neighbors(self, v: int) -> list[int]:
        out = []
        for kind, e in self.slots[v]:
            if kind == "edge":
                a, _, b, _ = self.edges[e]
                out.append(b if a == v else a)
        return out

    def region(self, legs) -> BoundaryRegion:
        return BoundaryRegion.of(legs, self.n_boundary)

    def interval(self, start: int, length: int) -> BoundaryRegion:
        return BoundaryRegion.interval(start, length, self.n_boundary)

    def connected_regions(self) -> list[BoundaryRegion]:
        """Every proper nonempty cyclically contiguous region."""
        n = self.n_boundary
        return [self.interval(s, ln) for s in range(n) for ln in range(1, n)]

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_vertices))
        for e, (u, _, v, _) in enumerate(self.edges):
            g.add_edge(u, v, id=e)
        return g

    def to_json(self) -> str:
        data = {
            "p": self.p,
            "q": self.q,
            "layers": self.params.layers,
            "vertices": [{"id": v, "layer": t} for v, t in enumerate(self.layer)],
            "edges": [[u, v] for u, v in self.edge_pairs()],
            "boundary": [[v, k] for v, k in self.boundary],
        }
        return json.dumps(data)

    def to_dot(self, highlight: dict[int, str] | None = None) -> str:
        highlight = highlight or {}
        lines = ["graph tiling {", "  node [shape=circle, fontsize=8];"]
        for v, z in enumerate(self.positions):
            attrs = f'pos="{4 * z.real:.4f},{4 * z.imag:.4f}!", label="{v}"'
            if v in highlight:
                attrs += f', style=filled, fillcolor="{highlight[v]}"'
            lines.append(f"  {v} [{attrs}];")
        for u, v in self.edge_pairs():
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_tiling(params: TilingParams) -> HyperbolicTiling:
    """Grow a vertex-centred patch of ``params.layers`` tile-layers.

    Raises:
        NonHyperbolic: ``layers >= 1`` and the tiling is Euclidean or spherical.
        Overflow: the patch exceeds ``config.VERTEX_CAP`` vertices.
    """
    p, q = params.p, params.q
    if params.layers >= 1 and not params.hyperbolic:
        raise NonHyperbolic(f"{{{p},{q}}} is not hyperbolic: {p * q} <= {2 * (p + q)}")
    if params.layers == 0:
        slots = tuple(("leg", k) for k in range(q))
        uni = _Universe(p, q)
        points = tuple(uni.pos[uni.neighbor(0, k)[0]] for k in range(q)) if params.hyperbolic else ()
        return HyperbolicTiling(
            params, (0,), (0j,), (), tuple((0, k) for k in range(q)), (slots,), (), points
        )

    uni = _Universe(p, q)
    order = [0]
    layer_of = {0: 0}
    tiles: list[tuple[int, ...]] = []
    seen_tiles: set[frozenset[int]] = set()
    frontier = [0]
    for t in range(1, params.layers + 1):
        new = []
        for v in frontier:
            for k in range(q):
                tile = uni.face(v, k)
                key = frozenset(tile)
                if key in seen_tiles:
                    continue
                seen_tiles.add(key)
                tiles.append(tile)
                for w in tile:
                    if w not in layer_of:
                        layer_of[w] = t
                        order.append(w)
                        new.append(w)
                        if len(order) > config.VERTEX_CAP:
                            raise Overflow(f"patch exceeds {config.VERTEX_CAP} vertices")
        frontier = new

    ids = {w: i for i, w in enumerate(order)}
    # Induced subgraph: every tiling edge between two patch vertices is kept.
    edges = []
    slot_table: list[list[tuple[str, int] | None]] = [[None] * q for _ in order]
    for w in order:
        for k in range(q):
            x, m = uni.neighbor(w, k)
            if x in ids and ids[w] < ids[x]:
                edges.append((ids[w], k, ids[x], m))
    edges.sort()
    for e, (u, su, v, sv) in enumerate(edges):
        slot_table[u][su] = ("edge", e)
        slot_table[v][sv] = ("edge", e)

    boundary = _boundary_walk(order, ids, uni, slot_table)
    for b, (v, k) in enumerate(boundary):
        slot_table[v][k] = ("leg", b)
    if any(s is None for row in slot_table for s in row):
        raise RuntimeError("boundary walk missed dangling legs (patch has holes)")

    return HyperbolicTiling(
        params=params,
        layer=tuple(layer_of[w] for w in order),
        positions=tuple(uni.pos[w] for w in order),
        edges=tuple(edges),
        boundary=tuple(boundary),
        slots=tuple(tuple(row) for row in slot_table),
        tiles=tuple(tuple(ids[w] for w in tile) for tile in tiles),
        leg_points=tuple(uni.pos[uni.neighbor(order[v], k)[0]] for v, k in boundary),
    )


def _boundary_walk(order, ids, uni, slot_table) -> list[tuple[int, int]]:
    q = uni.q
    dangling = [(ids[w], k) for w in order for k in range(q) if slot_table[ids[w]][k] is None]
    # Seed: the dangling leg of the lowest vertex id with the smallest polar angle.
    def angle(vk):
        v, k = vk
        z, _ = uni.neighbor(order[v], k)
        return cmath.phase(uni.pos[z]) % (2 * math.pi)

    seed = min(dangling, key=lambda vk: (angle(vk), vk))
    walk = [seed]
    v, k = seed
    while True:
        k = (k + 1) % q
        while slot_table[v][k] is not None:
            _, e = slot_table[v][k]
            w, m = _other_end(slot_table, v, k, e, uni, order, ids)
            v, k = w, (m + 1) % q
        if (v, k) == seed:
            break
        walk.append((v, k))
        if len(walk) > len(dangling):
            raise RuntimeError("boundary walk did not close")
    if len(walk) != len(dangling):
        raise RuntimeError("patch boundary is not a single cycle")
    # Orient counterclockwise around the origin.
    angles = np.unwrap([angle(vk) for vk in walk])
    if angles[-1] < angles[0]:
        walk = [walk[0]] + walk[:0:-1]
    return walk


def _other_end(slot_table, v, k, e, uni, order, ids):
    w, m = uni.neighbor(order[v], k)
    return ids[w], m


def subpatch(tiling: HyperbolicTiling, vertices) -> tuple[HyperbolicTiling, list[int]]:
    """Induced sub-patch on ``vertices`` (renumbered in increasing parent id).

    Every slot not matched inside the sub-patch becomes a boundary leg; legs
    are again ordered counterclockwise.  Returns the patch and the parent ids.
    """
    keep = sorted(set(vertices))
    if not keep:
        raise ValueError("sub-patch needs at least one vertex")
    new_id = {v: i for i, v in enumerate(keep)}
    q = tiling.q
    edges = []
    far: dict[tuple[int, int], complex] = {}
    for v in keep:
        for k, (kind, i) in enumerate(tiling.slots[v]):
            if kind == "leg":
                far[(new_id[v], k)] = tiling.leg_points[i]
                continue
            a, sa, b, sb = tiling.edges[i]
            w, m = (b, sb) if (a, sa) == (v, k) else (a, sa)
            if w in new_id:
                if new_id[v] < new_id[w]:
                    edges.append((new_id[v], k, new_id[w], m))
            else:
                far[(new_id[v], k)] = tiling.positions[w]
    edges.sort()
    table: list[list] = [[None] * q for _ in keep]
    for e, (u, su, v, sv) in enumerate(edges):
        table[u][su] = ("edge", e)
        table[v][sv] = ("edge", e)
    # Angles are taken around the first kept vertex, moved to the origin.
    a0 = tiling.positions[keep[0]]

    def angle(vk):
        z = far[vk]
        return cmath.phase((z - a0) / (1 - a0.conjugate() * z)) % (2 * math.pi)

    seed = min(far, key=lambda vk: (angle(vk), vk))
    walk = [seed]
    v, k = seed
    while True:
        k = (k + 1) % q
        while table[v][k] is not None:
            a, sa, b, sb = edges[table[v][k][1]]
            v, m = (b, sb) if (a, sa) == (v, k) else (a, sa)
            k = (m + 1) % q
        if (v, k) == seed:
            break
        walk.append((v, k))
        if len(walk) > len(far):
            raise RuntimeError("sub-patch boundary did not close")
    if len(walk) != len(far):
        raise ValueError("sub-patch boundary is not a single cycle")
    angles = np.unwrap([angle(vk) for vk in walk])
    if angles[-1] < angles[0]:
        walk = [walk[0]] + walk[:0:-1]
    for b, (v, k) in enumerate(walk):
        table[v][k] = ("leg", b)
    sub = HyperbolicTiling(
        params=tiling.params,
        layer=tuple(tiling.layer[v] for v in keep),
        positions=tuple(tiling.positions[v] for v in keep),
        edges=tuple(edges),
        boundary=tuple(walk),
        slots=tuple(tuple(row) for row in table),
        tiles=tuple(t for t in tiling.tiles if set(t) <= set(keep)),
        leg_points=tuple(far[vk] for vk in walk),
    )
    return sub, keep


def minimal_cut(tiling: HyperbolicTiling, region: BoundaryRegion) -> Cut:
    """Minimum set of crossed legs separating ``region`` from its complement.

    Max-flow/min-cut runs on the leg-augmented graph in which each boundary leg
    is its own unit-capacity edge.  Among all minimum cuts the lexicographically
    smallest one is returned, with internal edges ordered before boundary legs.
    """
    if not region.legs or len(region.legs) == tiling.n_boundary:
        raise ValueError("region must be nonempty and proper")
    items = [("edge", e) for e in range(len(tiling.edges))]
    items += [("leg", b) for b in range(tiling.n_boundary)]
    committed: list[tuple[str, int]] = []
    value, carrying = _cut_flow(tiling, region, frozenset())
    target = value
    for item in items:
        # Every minimum-cut item carries flow in every maximum flow.
        if item not in carrying:
            continue
        trial = frozenset(committed + [item])
        v, c = _cut_flow(tiling, region, trial)
        if v == target - len(trial):
            committed.append(item)
            carrying = c
            if len(committed) == target:
                break
    cut = Cut(
        frozenset(i for kind, i in committed if kind == "edge"),
        frozenset(i for kind, i in committed if kind == "leg"),
    )
    assert cut.length == value
    return cut


def _cut_flow(tiling, region, removed) -> tuple[int, frozenset]:
    """Max-flow value and the items carrying flow, with ``removed`` items deleted.

    Nodes are the vertices, one node per boundary leg, then source and sink.
    """
    nv, nb = tiling.n_vertices, tiling.n_boundary
    src, snk = nv + nb, nv + nb + 1
    big = 10 * (len(tiling.edges) + nb + 1)
    rows, cols, caps, arcs = [], [], [], {}
    for e, (u, _, v, _) in enumerate(tiling.edges):
        if ("edge", e) not in removed:
            rows += [u, v]
            cols += [v, u]
            caps += [1, 1]
            arcs[(u, v)] = arcs[(v, u)] = ("edge", e)
    has_s = has_t = False
    for b, (v, _) in enumerate(tiling.boundary):
        node = nv + b
        if ("leg", b) not in removed:
            rows += [node, v]
            cols += [v, node]
            caps += [1, 1]
            arcs[(node, v)] = arcs[(v, node)] = ("leg", b)
        if b in region.legs:
            rows.append(src), cols.append(node), caps.append(big)
            has_s = True
        else:
            rows.append(node), cols.append(snk), caps.append(big)
            has_t = True
    if not (has_s and has_t):
        return 0, frozenset()
    g = scipy.sparse.csr_array(
        (np.array(caps, dtype=np.int32), (np.array(rows), np.array(cols))), shape=(snk + 1, snk + 1)
    )
    res = scipy.sparse.csgraph.maximum_flow(g, src, snk)
    flow = res.flow.tocoo()
    carrying = frozenset(arcs[(a, b)] for a, b, f in zip(flow.row, flow.col, flow.data) if f > 0 and (a, b) in arcs)
    return int(res.flow_value), carrying


def _cut_value(tiling, region, removed) -> int:
    return _cut_flow(tiling, region, removed)[0]


def separates(tiling: HyperbolicTiling, region: BoundaryRegion, cut: Cut) -> bool:
    """True if removing the cut disconnects every region leg from every complement leg."""
    g = nx.Graph()
    g.add_nodes_from(range(tiling.n_vertices))
    for e, (u, _, v, _) in enumerate(tiling.edges):
        if e not in cut.edges:
            g.add_edge(u, v)
    for b, (v, _) in enumerate(tiling.boundary):
        if b not in cut.legs:
            g.add_edge(("L", b), v)
    side = set()
    for b in region.legs:
        if b not in cut.legs:
            side |= nx.node_connected_component(g, ("L", b))
    return not any(("L", b) in side for b in region.complement().legs)


def dof_counting(tiling: HyperbolicTiling) -> tuple[int, int]:
    """``(bulk legs, boundary legs)``: one logical leg per vertex."""
    return tiling.n_vertices, tiling.n_boundary
