"""Code networks on tilings: assembly, contraction, sandwiches and spectra.

A network is flattened into a list of ``(array, keys)`` pairs.  Keys are
hashable leg identifiers shared by the two tensors they connect:

* ``("b", i)``       boundary leg ``i``
* ``("j", v)``       logical leg of vertex ``v`` (open unless projected)
* ``("e", e, s)``    side ``s`` (0 = lower vertex id) of internal edge ``e``

Bra copies of a key are ``("bra", key)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx
import numpy as np
import opt_einsum as oe
from opt_einsum.path_random import RandomGreedy

from . import config
from .codes import VERTEX_TENSORS, build_B, is_symmetric, is_unitary
from .tensor import DenseTensor
from .tiling import BoundaryRegion, HyperbolicTiling

Key = Hashable
Node = tuple[np.ndarray, tuple[Key, ...]]


@dataclass(frozen=True, eq=False)
class CodeNetwork:
    """A tiling dressed with vertex tensors, edge tensors and a bulk configuration.

    ``bulk[v]`` is ``None`` for an open logical leg or a state vector to project
    on.  ``joint`` holds entangled logical states: ``(vertices, tensor)`` with
    one tensor axis per listed vertex; those vertices must be open in ``bulk``.
    """

    tiling: HyperbolicTiling
    vertex_tensor: DenseTensor
    edge: np.ndarray | None = None
    bulk: tuple[np.ndarray | None, ...] = ()
    joint: tuple[tuple[tuple[int, ...], np.ndarray], ...] = ()
    tensor_name: str = "custom"
    edge_name: str = "identity"

    def __post_init__(self):
        t = self.vertex_tensor
        if len(t.planar) != self.tiling.q:
            raise ValueError(f"vertex tensor has {len(t.planar)} planar legs, tiling needs {self.tiling.q}")
        if not self.bulk:
            object.__setattr__(self, "bulk", (None,) * self.tiling.n_vertices)
        if len(self.bulk) != self.tiling.n_vertices:
            raise ValueError("bulk configuration must list every vertex")
        if self.edge is not None:
            if not is_unitary(self.edge):
                raise ValueError("edge tensor must be unitary")
            if not is_symmetric(self.edge):
                raise ValueError("edge tensor must be symmetric")
        covered = [v for verts, _ in self.joint for v in verts]
        if len(covered) != len(set(covered)) or any(self.bulk[v] is not None for v in covered):
            raise ValueError("joint bulk states must cover distinct open vertices")

    @classmethod
    def build(
        cls,
        tiling: HyperbolicTiling,
        tensor: str = "a4112",
        edge: str = "hadamard4",
        bulk=None,
        d: int | None = None,
    ) -> "CodeNetwork":
        """Named construction.  ``bulk`` is None (all open), one vector, or a per-vertex list."""
        if tensor == "pentagon513":
            vt = VERTEX_TENSORS[tensor](d or 2)
        else:
            vt = VERTEX_TENSORS[tensor]()
        b = None if edge == "identity" else build_B(edge)
        if bulk is None:
            cfg = (None,) * tiling.n_vertices
        elif isinstance(bulk, np.ndarray) and bulk.ndim == 1:
            cfg = (bulk,) * tiling.n_vertices
        else:
            cfg = tuple(bulk)
        return cls(tiling, vt, b, cfg, (), tensor, edge)

    def with_bulk(self, bulk, joint=()) -> "CodeNetwork":
        if isinstance(bulk, np.ndarray) and bulk.ndim == 1:
            bulk = (bulk,) * self.tiling.n_vertices
        return CodeNetwork(
            self.tiling, self.vertex_tensor, self.edge, tuple(bulk), tuple(joint),
            self.tensor_name, self.edge_name,
        )

    @property
    def chi(self) -> int:
        return self.vertex_tensor.data.shape[1]

    @property
    def logical_dim(self) -> int:
        return self.vertex_tensor.dims["j"]

    @property
    def open_vertices(self) -> list[int]:
        joint = {v for verts, _ in self.joint for v in verts}
        return [v for v, s in enumerate(self.bulk) if s is None and v not in joint]

    def slot_key(self, v: int, k: int) -> Key:
        kind, i = self.tiling.slots[v][k]
        if kind == "leg":
            return ("b", i)
        u = self.tiling.edges[i][0]
        side = 0 if (u == v and self.tiling.edges[i][1] == k) else 1
        if self.edge is None:
            side = 0
        return ("e", i, side)

    def vertex_node(self, v: int) -> Node:
        t = self.vertex_tensor
        planar = [f"p{k}" for k in range(self.tiling.q)]
        data = t.transpose(["j"] + planar).data
        keys = tuple(self.slot_key(v, k) for k in range(self.tiling.q))
        state = self.bulk[v]
        if state is None:
            return data, (("j", v),) + keys
        return np.tensordot(np.asarray(state, dtype=complex), data, axes=([0], [0])), keys

    def nodes(self, vertices: Iterable[int] | None = None) -> list[Node]:
        """Ket network restricted to ``vertices`` (edge tensors go with the lower endpoint)."""
        vs = range(self.tiling.n_vertices) if vertices is None else sorted(vertices)
        chosen = set(vs)
        out = [self.vertex_node(v) for v in vs]
        if self.edge is not None:
            for e, (u, _, w, _) in enumerate(self.tiling.edges):
                if u in chosen:
                    out.append((self.edge, (("e", e, 0), ("e", e, 1))))
        for verts, state in self.joint:
            if verts[0] in chosen:
                out.append((np.asarray(state, dtype=complex), tuple(("j", v) for v in verts)))
        return out

    def open_keys(self) -> list[Key]:
        keys = [("b", i) for i in range(self.tiling.n_boundary)]
        return keys + [("j", v) for v in self.open_vertices]

    def key_dim(self, key: Key) -> int:
        if key[0] == "j":
            return self.logical_dim
        return self.chi


def _free_keys(nodes: Sequence[Node]) -> list[Key]:
    count: dict[Key, int] = {}
    for _, keys in nodes:
        for k in keys:
            count[k] = count.get(k, 0) + 1
    return [k for k, c in count.items() if c == 1]


def einsum_nodes(
    nodes: Sequence[Node], output: Sequence[Key], optimize="random-greedy", memory_limit=None
) -> np.ndarray:
    """Contract ``nodes`` with opt_einsum, returning axes in ``output`` order.

    ``"random-greedy"`` uses a fresh seeded optimizer per call, so paths (and
    hence rounding) are reproducible.
    """
    if optimize == "random-greedy":
        optimize = RandomGreedy(max_repeats=16)
    symbols: dict[Key, str] = {}

    def sym(k):
        if k not in symbols:
            symbols[k] = oe.get_symbol(len(symbols))
        return symbols[k]

    terms = ["".join(sym(k) for k in keys) for _, keys in nodes]
    expr = ",".join(terms) + "->" + "".join(sym(k) for k in output)
    arrays = [a for a, _ in nodes]
    return oe.contract(expr, *arrays, optimize=optimize, memory_limit=memory_limit)


def _check_cap(dims: Iterable[int]):
    size = math.prod(dims)
    if size > config.dim_cap():
        raise config.CapExceeded(f"dense object of size {size} exceeds cap {config.dim_cap()}")


def contract_network(net: CodeNetwork, optimize="random-greedy") -> DenseTensor:
    """Dense tensor with legs ``b0..`` (boundary order) then ``j<v>`` for open bulk legs."""
    out = net.open_keys()
    _check_cap(net.key_dim(k) for k in out)
    data = einsum_nodes(net.nodes(), out, optimize=optimize)
    labels = tuple(f"b{k[1]}" if k[0] == "b" else f"j{k[1]}" for k in out)
    logical = frozenset(lab for lab in labels if lab.startswith("j"))
    return DenseTensor(labels, data, logical)


def _bra(nodes: Sequence[Node], shared: set) -> list[Node]:
    return [
        (a.conj(), tuple(k if k in shared else ("bra", k) for k in keys)) for a, keys in nodes
    ]


def sandwich(
    nodes: Sequence[Node],
    traced: Iterable[Key],
    kept: Sequence[Key],
    ops: Mapping[Key, np.ndarray] | None = None,
    optimize="random-greedy",
) -> np.ndarray:
    """Double layer ``sum_traced psi psi^*`` as a matrix over ``kept`` (ket rows, bra columns).

    ``ops[key]`` is applied to the ket leg ``key`` before tracing.
    """
    traced = set(traced)
    ops = dict(ops or {})
    ket = list(nodes)
    shared = set(traced)
    for key, op in ops.items():
        if key not in traced:
            raise ValueError("operators must act on traced legs")
        # op[k_new, k_old] acting on the ket; the new index meets the bra.
        ket = [(a, tuple(("op", key) if k == key else k for k in keys)) for a, keys in ket]
        ket.append((np.asarray(op, dtype=complex), (key, ("op", key))))
    bra = _bra(nodes, shared)
    out = list(kept) + [("bra", k) for k in kept]
    dims = {}
    for a, keys in nodes:
        dims.update(zip(keys, a.shape))
    _check_cap([dims[k] ** 2 for k in kept])
    arr = einsum_nodes(ket + bra, out, optimize=optimize)
    n = math.prod(dims[k] for k in kept)
    return arr.reshape(n, n)


def norm_squared(net: CodeNetwork) -> float:
    nodes = net.nodes()
    return float(sandwich(nodes, _free_keys(nodes), []).real[0, 0])


def reduced_density(net: CodeNetwork, keys: Sequence[Key]) -> np.ndarray:
    """Normalized reduced density matrix on open legs ``keys``."""
    nodes = net.nodes()
    free = _free_keys(nodes)
    rho = sandwich(nodes, [k for k in free if k not in set(keys)], keys)
    return rho / np.trace(rho).real


def correlator(net: CodeNetwork, ops: Sequence[tuple[int, np.ndarray]]) -> complex:
    """``<psi| prod O_i |psi> / <psi|psi>`` for operators on distinct boundary sites."""
    sites = [s for s, _ in ops]
    if len(set(sites)) != len(sites):
        raise ValueError("operator sites must be distinct")
    if net.open_vertices:
        raise ValueError("correlators need every bulk leg projected")
    nodes = net.nodes()
    free = _free_keys(nodes)
    num = sandwich(nodes, free, [], {("b", s): o for s, o in ops})[0, 0]
    den = sandwich(nodes, free, [])[0, 0]
    return complex(num / den)


def connected_correlator(net: CodeNetwork, site_a: int, op_a, site_b: int, op_b) -> complex:
    ab = correlator(net, [(site_a, op_a), (site_b, op_b)])
    return ab - correlator(net, [(site_a, op_a)]) * correlator(net, [(site_b, op_b)])


def encoding_isometry_check(net: CodeNetwork, tol: float = config.TOL, dense_limit: int = 4**6) -> bool:
    """True iff the bulk-to-boundary map V satisfies V^dagger V proportional to 1.

    Small logical spaces are checked densely; larger ones through the
    tile-by-tile decomposition along the greedy sweep from the full boundary.
    """
    if any(s is not None for s in net.bulk) or net.joint:
        raise ValueError("all bulk legs must be open")
    n_log = len(net.open_vertices)
    if net.logical_dim**n_log > net.chi**net.tiling.n_boundary:
        return False
    if net.logical_dim**n_log <= dense_limit:
        return dense_isometry_defect(net) <= tol
    from .reconstruction import decomposed_isometry_defect

    return decomposed_isometry_defect(net) <= tol


def dense_isometry_defect(net: CodeNetwork) -> float:
    nodes = net.nodes()
    logical = [("j", v) for v in net.open_vertices]
    gram = sandwich(nodes, [("b", i) for i in range(net.tiling.n_boundary)], logical)
    # sandwich returns sum psi psi^*, i.e. (V^dagger V)^T; proportionality is unaffected.
    c = np.trace(gram).real / gram.shape[0]
    if c <= 0:
        return math.inf
    return float(np.abs(gram / c - np.eye(gram.shape[0])).max())


# --- Schmidt spectra across a bipartition of open legs ----------------------


def schmidt_probabilities(
    net: CodeNetwork, keys: Iterable[Key], method: str = "cut"
) -> np.ndarray:
    """Normalized Schmidt weights (descending) of the network state across ``keys`` | rest.

    Every bulk leg must be projected, jointly fixed, or listed on one side
    (open logical legs act as ordinary parties).  By default the network is
    split along a minimum cut and the spectrum is obtained from the two
    half-network Gram matrices, so neither side is ever formed densely.
    ``method="dense"`` forms the reduced density matrix of the smaller side
    instead.
    """
    return node_schmidt_probabilities(net.nodes(), keys, method)


def node_schmidt_probabilities(nodes: Sequence[Node], keys: Iterable[Key], method: str = "cut") -> np.ndarray:
    keys = set(keys)
    free = _free_keys(nodes)
    side_a = [k for k in free if k in keys]
    side_b = [k for k in free if k not in keys]
    if len(side_a) != len(keys):
        raise ValueError("keys must be open legs of the network")
    if not side_a or not side_b:
        return np.array([1.0])
    dims = {}
    for a, ks in nodes:
        dims.update(zip(ks, a.shape))
    if method == "dense":
        da = math.prod(dims[k] for k in side_a)
        db = math.prod(dims[k] for k in side_b)
        small = side_a if da <= db else side_b
        rho = sandwich(nodes, [k for k in free if k not in set(small)], small)
        return _spectrum_from_psd(rho)
    return _cut_spectrum(nodes, set(side_a), set(side_b), dims)


def _spectrum_from_psd(m: np.ndarray, projector_min: int = 256) -> np.ndarray:
    m = (m + m.conj().T) / 2
    m = m / np.trace(m).real
    if m.shape[0] >= projector_min:
        # m @ m = c m means m = c * projector: the spectrum is flat and its
        # rank is tr(m) / c, so the diagonalization can be skipped.
        tr = np.trace(m).real
        sq = m @ m
        c = np.trace(sq).real / tr
        if c > 0 and np.abs(sq - c * m).max() <= 1e-12 * c:
            rank = int(round(tr / c))
            return np.full(rank, 1.0 / rank)
    vals = np.linalg.eigvalsh(m)
    vals = np.clip(vals, 0, None)
    vals = vals / vals.sum()
    return np.sort(vals)[::-1]


def _identity_factor(m: np.ndarray) -> float | None:
    """``c`` if ``m`` equals ``c`` times the identity (relative 1e-12), else None."""
    n = m.shape[0]
    c = np.trace(m).real / n
    if c > 0 and np.abs(m - c * np.eye(n)).max() <= 1e-12 * c:
        return c
    return None


def _as_real(nodes: Sequence[Node]) -> list[Node]:
    if all(np.isrealobj(a) or not np.abs(a.imag).any() for a, _ in nodes):
        return [(np.ascontiguousarray(np.real(a)), k) for a, k in nodes]
    return list(nodes)


def _cut_spectrum(nodes, side_a, side_b, dims) -> np.ndarray:
    nodes = _as_real(nodes)
    g = nx.DiGraph()
    owner: dict[Key, list[int]] = {}
    for i, (_, ks) in enumerate(nodes):
        g.add_node(i)
        for k in ks:
            owner.setdefault(k, []).append(i)
    big = 1e9
    for k, idx in owner.items():
        cap = math.log(dims[k])
        if len(idx) == 2:
            a, b = idx
            g.add_edge(a, b, capacity=cap)
            g.add_edge(b, a, capacity=cap)
        elif k in side_a:
            g.add_edge("S", ("leg", k), capacity=big)
            g.add_edge(("leg", k), idx[0], capacity=cap)
            g.add_edge(idx[0], ("leg", k), capacity=cap)
        else:
            g.add_edge(("leg", k), "T", capacity=big)
            g.add_edge(("leg", k), idx[0], capacity=cap)
            g.add_edge(idx[0], ("leg", k), capacity=cap)
    _, (s_side, _) = nx.minimum_cut(g, "S", "T")
    x = sorted(i for i in s_side if isinstance(i, int))
    y = sorted(i for i in range(len(nodes)) if i not in set(x))
    nx_nodes = [nodes[i] for i in x]
    ny_nodes = [nodes[i] for i in y]
    keys_x = {k for _, ks in nx_nodes for k in ks}
    keys_y = {k for _, ks in ny_nodes for k in ks}
    crossing = sorted((k for k in keys_x & keys_y), key=repr)
    a_x = [k for k in side_a if k in keys_x]
    ac_x = sorted((k for k in side_b if k in keys_x), key=repr)
    a_y = sorted((k for k in side_a if k in keys_y), key=repr)
    ac_y = [k for k in side_b if k in keys_y]
    dc = math.prod(dims[k] for k in crossing)
    dacx = math.prod(dims[k] for k in ac_x)
    day = math.prod(dims[k] for k in a_y)
    _check_cap([(dc * dacx * day) ** 2])
    # P^dagger P lives on (crossing, ac_x) and Q Q^dagger on (crossing, a_y);
    # both are padded with identities to the joint space (crossing, ac_x, a_y).
    if nx_nodes:
        dx = sandwich(nx_nodes, a_x, crossing + ac_x).T
    else:
        dx = np.ones((1, 1))
    if ny_nodes:
        dy = sandwich(ny_nodes, ac_y, crossing + a_y)
    else:
        dy = np.ones((1, 1))
    n = dc * dacx * day
    cx, cy = _identity_factor(dx), _identity_factor(dy)
    if cx is not None or cy is not None:
        # One half is an isometry; the other Gram matrix carries the spectrum
        # (each of its eigenvalues repeated by the padding dimension).
        if cx is not None:
            probs = _spectrum_from_psd(dy)
            pad = dacx
        else:
            probs = _spectrum_from_psd(dx)
            pad = day
        probs = np.repeat(probs, pad) / pad
        return probs
    dx = dx.reshape(dc, dacx, dc, dacx)
    dy = dy.reshape(dc, day, dc, day)
    pp = np.einsum("aAbB,yY->aAybBY", dx, np.eye(day)).reshape(n, n)
    qq = np.einsum("aybY,xX->axybXY", dy, np.eye(dacx)).reshape(n, n)
    vals, vecs = np.linalg.eigh((pp + pp.conj().T) / 2)
    vals = np.clip(vals, 0, None)
    keep = vals > 1e-13 * vals.max()
    root = vecs[:, keep] * np.sqrt(vals[keep])
    return _spectrum_from_psd(root.conj().T @ qq @ root)


def entanglement_entropy(probs: np.ndarray, tol: float = 1e-14) -> float:
    p = probs[probs > tol]
    return float(-(p * np.log(p)).sum())


def boundary_keys(region: BoundaryRegion) -> list[Key]:
    return [("b", i) for i in sorted(region.legs)]
