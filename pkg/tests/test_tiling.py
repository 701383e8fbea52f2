import itertools
import json

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from htncode import config
from htncode.tiling import (
    BoundaryRegion,
    NonHyperbolic,
    Overflow,
    TilingParams,
    build_tiling,
    dof_counting,
    minimal_cut,
    separates,
    subpatch,
)

SMALL = [(5, 4), (4, 5), (7, 3), (6, 4), (4, 6)]


def brute_force_cut(tiling, region):
    """Minimum cut by enumerating which vertices sit on the region's side."""
    n = tiling.n_vertices
    best = None
    for mask in range(1 << n):
        side = {v for v in range(n) if mask >> v & 1}
        value = sum(1 for u, _, v, _ in tiling.edges if (u in side) != (v in side))
        for b, (v, _) in enumerate(tiling.boundary):
            if (b in region.legs) != (v in side):
                value += 1
        best = value if best is None else min(best, value)
    return best


@pytest.mark.parametrize("p,q", SMALL)
def test_one_layer_is_q_polygons_around_a_vertex(p, q):
    t = build_tiling(TilingParams(p, q, 1))
    assert t.n_vertices == 1 + q * (p - 2)
    assert len(t.edges) == q * (p - 1)
    assert t.n_boundary == q * t.n_vertices - 2 * len(t.edges)


@pytest.mark.parametrize(
    "p,q,layers,v,b",
    [(5, 4, 1, 13, 20), (5, 4, 2, 61, 76), (4, 5, 1, 11, 25), (4, 5, 2, 51, 95), (7, 3, 1, 16, 12), (7, 3, 2, 61, 33)],
)
def test_golden_counts(p, q, layers, v, b):
    t = build_tiling(TilingParams(p, q, layers))
    assert (t.n_vertices, t.n_boundary) == (v, b)


@pytest.mark.parametrize("p,q", [(5, 4), (4, 5), (7, 3)])
def test_faces_are_p_gons_and_planar(p, q):
    t = build_tiling(TilingParams(p, q, 2))
    g = t.graph
    assert nx.check_planarity(g)[0]
    basis = nx.minimum_cycle_basis(g)
    assert len(basis) == len(t.edges) - t.n_vertices + 1
    assert all(len(c) == p for c in basis)
    assert len(t.tiles) == len(basis)


@pytest.mark.parametrize("p,q", SMALL)
def test_slots_are_consistent(p, q):
    t = build_tiling(TilingParams(p, q, 2))
    assert all(len(s) == q for s in t.slots)
    for e, (u, su, v, sv) in enumerate(t.edges):
        assert u < v
        assert t.slots[u][su] == ("edge", e) and t.slots[v][sv] == ("edge", e)
    for b, (v, k) in enumerate(t.boundary):
        assert t.slots[v][k] == ("leg", b)
    # Interior layers are saturated.
    for v, layer in enumerate(t.layer):
        if layer < 2:
            assert len(t.neighbors(v)) == q


def test_boundary_is_counterclockwise(t54_2):
    import cmath

    angles = [cmath.phase(z) for z in t54_2.leg_points]
    turns = sum(((b - a + cmath.pi) % (2 * cmath.pi)) - cmath.pi for a, b in zip(angles, angles[1:] + angles[:1]))
    assert turns == pytest.approx(2 * cmath.pi, abs=1e-6)


@pytest.mark.parametrize("p,q", [(4, 4), (3, 6), (6, 3), (3, 3), (3, 5)])
def test_non_hyperbolic_rejected(p, q):
    with pytest.raises(NonHyperbolic):
        build_tiling(TilingParams(p, q, 1))


def test_bad_params():
    with pytest.raises(ValueError):
        TilingParams(2, 5, 1)
    with pytest.raises(ValueError):
        TilingParams(5, 4, -1)


def test_overflow(monkeypatch):
    monkeypatch.setattr(config, "VERTEX_CAP", 50)
    with pytest.raises(Overflow):
        build_tiling(TilingParams(5, 4, 2))


def test_layers_zero_is_single_vertex():
    t = build_tiling(TilingParams(5, 4, 0))
    assert t.n_vertices == 1 and t.n_boundary == 4 and not t.edges


def test_deterministic_export():
    a = build_tiling(TilingParams(5, 4, 2))
    b = build_tiling(TilingParams(5, 4, 2))
    assert a.to_json() == b.to_json()
    data = json.loads(a.to_json())
    assert set(data) == {"p", "q", "layers", "vertices", "edges", "boundary"}
    assert len(data["vertices"]) == 61 and data["vertices"][0] == {"id": 0, "layer": 0}
    assert "graph tiling" in a.to_dot() and a.to_dot().count("--") == len(a.edges)


@pytest.mark.parametrize("p,q", [(5, 4), (4, 5), (7, 3)])
def test_min_cut_matches_brute_force(p, q):
    t = build_tiling(TilingParams(p, q, 1))
    for region in t.connected_regions()[:: max(1, t.n_boundary // 6)]:
        cut = minimal_cut(t, region)
        assert cut.length == brute_force_cut(t, region)
        assert separates(t, region, cut)


def test_min_cut_disconnected_regions_brute_force(t54):
    for legs in [(0, 5), (0, 1, 10, 11), (2, 3, 4, 12, 13, 17)]:
        region = t54.region(legs)
        assert minimal_cut(t54, region).length == brute_force_cut(t54, region)


def test_min_cut_is_lexicographically_smallest(t54):
    region = t54.interval(0, 5)
    cut = minimal_cut(t54, region)
    items = [("edge", e) for e in range(len(t54.edges))] + [("leg", b) for b in range(t54.n_boundary)]
    chosen = sorted([("edge", e) for e in cut.edges] + [("leg", b) for b in cut.legs], key=items.index)
    # No lexicographically smaller cut of the same size separates the region.
    for combo in itertools.combinations(items, cut.length):
        if list(combo) >= chosen:
            break
        trial = type(cut)(
            frozenset(i for k, i in combo if k == "edge"), frozenset(i for k, i in combo if k == "leg")
        )
        assert not separates(t54, region, trial)


def test_min_cut_rejects_trivial_regions(t54):
    with pytest.raises(ValueError):
        minimal_cut(t54, t54.region([]))


@given(st.integers(0, 75), st.integers(1, 75))
def test_min_cut_symmetric_and_bounded(start, length):
    t = build_tiling(TilingParams(5, 4, 2))
    region = t.interval(start, length)
    if len(region) == t.n_boundary:
        return
    c = minimal_cut(t, region)
    assert c.length == minimal_cut(t, region.complement()).length
    assert c.length <= min(len(region), t.n_boundary - len(region))


@given(st.integers(0, 19), st.integers(1, 9), st.integers(1, 9))
def test_min_cut_subadditive(start, la, lb):
    t = build_tiling(TilingParams(5, 4, 1))
    a = t.interval(start, la)
    b = t.interval(start + la, lb)
    ab = t.region(a.legs | b.legs)
    if len(ab) == t.n_boundary:
        return
    assert minimal_cut(t, ab).length <= minimal_cut(t, a).length + minimal_cut(t, b).length


def test_regions():
    r = BoundaryRegion.interval(18, 4, 20)
    assert sorted(r.legs) == [0, 1, 18, 19]
    assert r.is_connected()
    assert not BoundaryRegion.of([0, 2], 20).is_connected()
    assert len(r.complement()) == 16
    with pytest.raises(ValueError):
        BoundaryRegion.of([20], 20)


def test_dof_counting():
    for layers in (1, 2, 3):
        bulk, boundary = dof_counting(build_tiling(TilingParams(7, 3, layers)))
        assert bulk > boundary
        bulk, boundary = dof_counting(build_tiling(TilingParams(5, 4, layers)))
        assert bulk < boundary


def test_subpatch_of_everything_is_identity(t54_2):
    sub, keep = subpatch(t54_2, range(t54_2.n_vertices))
    assert keep == list(range(t54_2.n_vertices))
    assert sub.edges == t54_2.edges and sub.boundary == t54_2.boundary


def test_subpatch_three_vertices(t54):
    nb = t54.neighbors(0)
    sub, keep = subpatch(t54, [0, nb[0], nb[2]])
    assert sub.n_vertices == 3 and len(sub.edges) == 2 and sub.n_boundary == 8


def test_edge_tags(t54_2):
    tags = t54_2.edge_tags()
    assert "internal" in tags and "boundary-adjacent" in tags
