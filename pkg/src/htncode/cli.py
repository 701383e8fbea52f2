"""Command-line entry point: one subcommand per experiment.

Every subcommand writes deterministic JSON (or CSV/DOT where noted) to stdout
or ``--out``.  Exit status is 0 on success, 2 when a check fails, 1 on a
runtime error and 64 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config
from .codes import (
    CODEWORDS_4112,
    EDGE_NAMES,
    LOGICAL_X_4112,
    LOGICAL_Z_4112,
    STABILIZERS_4112,
    VERTEX_TENSORS,
    alpha_state,
    build_A_prime,
    build_B,
    build_fixed_area_state,
    build_pentagon,
    is_symmetric,
    is_unitary,
    logical_states_4112,
    sign_slip_finding,
    x_eigenstate,
    z_eigenstate,
)
from .entropy import LOG4, entanglement, htn_entropy_decomposition, rt_check
from .network import CodeNetwork, contract_network, correlator, encoding_isometry_check
from .pauli import NotWeyl, QuditPauliString, hermitian_paulis, push_through_B
from .reconstruction import (
    SCENARIOS,
    build_moveset,
    erasure_map,
    greedy,
    push_logical,
    state_dependent_experiment,
    three_vertex_patch,
    verify_boundary_representative,
)
from .rg import alpha_sweep, happy_rg_check, primary_spectrum, scaling_superoperator
from .tensor import is_block_perfect, is_perfect, isometry_defect
from .tiling import BoundaryRegion, NonHyperbolic, Overflow, TilingParams, build_tiling, dof_counting

EX_USAGE = 64

COMMANDS = ("tiling", "verify", "reconstruct", "erasures", "entropy", "correlators", "rg", "push", "state-dep")

DEFAULTS = {
    "p": 5,
    "q": 4,
    "layers": 1,
    "tensor": "a4112",
    "edge": "hadamard4",
    "d": None,
    "bulk": "x1",
    "tol": config.TOL,
    "eig_tol": config.EIG_TOL,
    "jobs": 1,
    "dim_cap": None,
    "out": None,
    "format": "json",
    "region": None,
    "sites": None,
    "sweep": False,
    "max_len": None,
    "rt": False,
    "decompose": False,
    "state_out": None,
    "dot": None,
    "op": None,
    "op_b": None,
    "alpha": None,
    "alpha_sweep": None,
    "happy": False,
    "scenario": "XZ",
    "logical": "both",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None

    def validate(self):
        o = self.options
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if o["tensor"] not in VERTEX_TENSORS:
            raise UsageError(f"--tensor must be one of {sorted(VERTEX_TENSORS)}")
        if o["edge"] not in EDGE_NAMES:
            raise UsageError(f"--edge must be one of {list(EDGE_NAMES)}")
        if o["tensor"] == "pentagon513" and o["edge"] != "identity":
            # Pentagon networks carry no edge tensors.
            o["edge"] = "identity"
        if o["jobs"] < 1:
            raise UsageError("--jobs must be positive")
        if o["tol"] <= 0 or o["eig_tol"] <= 0:
            raise UsageError("tolerances must be positive")
        if o["scenario"] not in (*SCENARIOS, "both"):
            raise UsageError("--scenario must be XZ, ZX or both")
        if o["logical"] not in ("X", "Z", "both"):
            raise UsageError("--logical must be X, Z or both")
        return self


# --- argument parsing -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("run options")
    g.add_argument("--config", help="JSON file of option defaults; explicit flags win")
    g.add_argument("--out", help="write the result here instead of stdout")
    g.add_argument("--tol", type=float, help="tolerance for algebraic identities (default 1e-10)")
    g.add_argument("--eig-tol", type=float, help="tolerance for eigenproblems (default 1e-8)")
    g.add_argument("--jobs", type=int, help="worker processes for sweeps (default 1)")
    g.add_argument("--dim-cap", type=float, help="dense size cap; same as HTN_DIM_CAP (default 4^12)")
    n = p.add_argument_group("network")
    n.add_argument("--p", type=int, help="polygon sides (default 5)")
    n.add_argument("--q", type=int, help="polygons per vertex (default 4)")
    n.add_argument("--layers", type=int, help="tile layers around the centre (default 1)")
    n.add_argument("--tensor", help="vertex tensor: a4112 or pentagon513 (default a4112)")
    n.add_argument("--edge", help="edge tensor: hadamard4, qft4 or identity (default hadamard4)")
    n.add_argument("--d", type=int, help="qudit dimension of pentagon513 (default 2)")
    n.add_argument(
        "--bulk",
        help="bulk product state: x1..x4, z0..z3, alpha:A, plus, open (default x1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="htncode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    helps = {
        "tiling": "build a {p,q} patch and export it as JSON or DOT",
        "verify": "check the code, edge tensors and encoding isometry",
        "reconstruct": "greedy wedge, cut and residual of a boundary interval",
        "erasures": "bulk region that survives erasing boundary sites",
        "entropy": "entanglement spectra, RT checks and interval sweeps",
        "correlators": "connected two-point functions as CSV",
        "rg": "scaling superoperator spectra and alpha sweeps",
        "push": "push logical operators of the three-tensor patch to the boundary",
        "state-dep": "state-dependent reconstruction on the three-tensor patch",
    }
    subs = {}
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name], description=helps[name], argument_default=argparse.SUPPRESS)
        _common(sp)
        subs[name] = sp
    subs["tiling"].add_argument("--format", choices=["json", "dot"], help="output format (default json)")
    for name in ("reconstruct", "entropy"):
        subs[name].add_argument("--region", help="boundary interval a..b (inclusive, may wrap)")
    for name in ("reconstruct", "erasures"):
        subs[name].add_argument("--dot", help="also write a DOT overlay of the wedges here")
    subs["erasures"].add_argument("--sites", help="comma separated boundary legs to erase")
    e = subs["entropy"]
    e.add_argument("--sweep", action="store_true", help="CSV over all intervals")
    e.add_argument("--max-len", type=int, help="longest interval in a sweep")
    e.add_argument("--rt", action="store_true", help="add the discrete RT comparison")
    e.add_argument("--decompose", action="store_true", help="add the residual-region decomposition")
    e.add_argument("--state-out", help="export the dense boundary state as tensor JSON")
    c = subs["correlators"]
    c.add_argument("--op", help="operator name on the first site (default: first Hermitian Pauli)")
    c.add_argument("--op-b", help="operator name on the second site (default: same as --op)")
    r = subs["rg"]
    r.add_argument("--alpha", type=float, help="bulk state alpha|0>+sqrt(1-alpha^2)|2>")
    r.add_argument("--alpha-sweep", help="start:stop:step, CSV (alpha, lambda, delta)")
    r.add_argument("--happy", action="store_true", help="pentagon layer map triviality check")
    for name in ("push", "state-dep"):
        subs[name].add_argument("--scenario", help="XZ, ZX or both (default XZ)")
    subs["push"].add_argument("--logical", help="X, Z or both (default both)")
    return parser


def parse_config(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    options = dict(DEFAULTS)
    path = ns.pop("config", None)
    if path:
        with open(path) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        for k, v in loaded.items():
            key = k.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"unknown config key {k!r}")
            options[key] = v
    options.update(ns)
    return RunConfig(command, options).validate()


# --- helpers ----------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(_jsonable(v) for v in obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _tiling(cfg: RunConfig):
    return build_tiling(TilingParams(cfg.p, cfg.q, cfg.layers))


def _d(cfg: RunConfig) -> int:
    if cfg.tensor == "pentagon513":
        return cfg.d or 2
    return 4


def parse_bulk(text: str, d: int):
    """Named single-vertex bulk state, or None for open logical legs."""
    text = text.strip().lower()
    if text == "open":
        return None
    if text.startswith("alpha:"):
        if d != 4:
            raise UsageError("alpha states need the ququart code")
        a = float(text.split(":", 1)[1])
        if not 0 <= a <= 1:
            raise UsageError("alpha must lie in [0, 1]")
        return alpha_state(a)
    if text == "plus":
        return np.ones(d, dtype=complex) / math.sqrt(d)
    if len(text) == 2 and text[0] in "xz" and text[1].isdigit():
        k = int(text[1])
        if text[0] == "z" and k < d:
            v = np.zeros(d, dtype=complex)
            v[k] = 1
            return v
        if text[0] == "x" and 1 <= k <= d:
            return np.array([np.exp(-2j * math.pi * (k - 1) * j / d) for j in range(d)]) / math.sqrt(d)
    raise UsageError(f"unknown bulk state {text!r}")


def _network(cfg: RunConfig, bulk: str | None = None) -> CodeNetwork:
    tiling = _tiling(cfg)
    state = parse_bulk(bulk if bulk is not None else cfg.bulk, _d(cfg))
    return CodeNetwork.build(tiling, cfg.tensor, cfg.edge, state, d=cfg.d)


def parse_interval(text: str, n: int) -> BoundaryRegion:
    try:
        a, b = (int(x) for x in text.split(".."))
    except ValueError:
        raise UsageError("--region must look like a..b") from None
    if not (0 <= a < n and 0 <= b < n):
        raise UsageError(f"region endpoints must lie in 0..{n - 1}")
    return BoundaryRegion.interval(a, (b - a) % n + 1, n)


def parse_range(text: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError("--alpha-sweep must look like start:stop:step") from None
    if step <= 0 or stop < start:
        raise UsageError("--alpha-sweep needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _pmap(fn, items, jobs: int):
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _overlay(tiling, colors: dict) -> str:
    highlight = {}
    for color, verts in colors.items():
        for v in verts:
            highlight[v] = color
    return tiling.to_dot(highlight)


# --- subcommands --------------------------------------------------------------------


def cmd_tiling(cfg: RunConfig):
    tiling = _tiling(cfg)
    if cfg.format == "dot":
        return tiling.to_dot(), True
    data = json.loads(tiling.to_json())
    bulk, boundary = dof_counting(tiling)
    data["bulkLegCount"], data["boundaryLegCount"] = bulk, boundary
    data["isometryPossible"] = bulk <= boundary
    return data, True


def _code_checks(tol: float) -> dict:
    words = logical_states_4112()
    stab_dev = max(
        float(np.abs(g.matrix() @ w - w).max()) for g in STABILIZERS_4112.generators for w in words
    )
    t = build_A_prime()
    arr = t.data
    cyclic = all(np.array_equal(arr, arr.transpose([0] + [1 + (k + s) % 4 for k in range(4)])) for s in range(1, 4))
    w_defects = {
        ",".join(map(str, known)): isometry_defect(t, ["j"] + [f"p{k}" for k in range(4) if k not in known])
        for known in itertools.combinations(range(4), 3)
    }
    return {
        "stabilizerDeviation": stab_dev,
        "stabilizersPass": stab_dev <= 1e-12,
        "cyclicInvariance": bool(cyclic),
        "wPrimeDefects": w_defects,
        "wPrimePass": max(w_defects.values()) <= tol,
        "codewordCount": len(CODEWORDS_4112),
        "fixedAreaBlockPerfect": is_block_perfect(build_fixed_area_state(), tol=tol),
        "planarPerfect": is_perfect(t.project("j", z_eigenstate(0)), tol=tol),
    }


def _edge_report(name: str, tiling, tol: float) -> dict:
    b = build_B(name)
    net = CodeNetwork.build(tiling, "a4112", name)
    moves = build_moveset(net, tol=tol)
    pushes = {}
    for label, op in (("X", QuditPauliString.single(1, 0, x=1)), ("Z", QuditPauliString.single(1, 0, z=1))):
        try:
            pushes[label] = str(push_through_B(op, b))
        except NotWeyl:
            pushes[label] = None
    patterns = sum(len(v) for v in moves.pair.values())
    return {
        "unitary": is_unitary(b, tol),
        "symmetric": is_symmetric(b, tol),
        "uPrimePatterns": patterns,
        "uPrimePass": patterns > 0 and name != "identity",
        "paulisThroughEdge": pushes,
    }


def cmd_verify(cfg: RunConfig):
    tol = cfg.tol
    tiling = _tiling(cfg)
    out: dict = {"tensor": cfg.tensor, "edge": cfg.edge}
    ok = True
    if cfg.tensor == "a4112":
        code = _code_checks(tol)
        out["code"] = code
        ok &= code["stabilizersPass"] and code["cyclicInvariance"] and code["wPrimePass"]
        if tiling.q == 4:
            edges = {name: _edge_report(name, tiling, tol) for name in EDGE_NAMES}
            out["edges"] = edges
            out["passingEdges"] = sorted(n for n, r in edges.items() if r["uPrimePass"] and r["unitary"])
            out["signSlipH4"] = sign_slip_finding()
            if cfg.edge != "identity":
                ok &= cfg.edge in out["passingEdges"]
    else:
        t = build_pentagon(_d(cfg))
        out["code"] = {"perfect": is_perfect(t, tol=tol), "d": _d(cfg)}
        ok &= out["code"]["perfect"]
    net = CodeNetwork.build(tiling, cfg.tensor, cfg.edge, None, d=cfg.d)
    moves = build_moveset(net, tol=tol)
    out["moves"] = moves.summary()
    bulk, boundary = dof_counting(tiling)
    out["counting"] = {"bulkLegCount": bulk, "boundaryLegCount": boundary}
    iso = encoding_isometry_check(net, tol)
    out["encodingIsometry"] = iso
    ok &= iso
    out["pass"] = bool(ok)
    return out, bool(ok)


def cmd_reconstruct(cfg: RunConfig):
    net = _network(cfg, "open")
    if not cfg.region:
        raise UsageError("reconstruct needs --region a..b")
    region = parse_interval(cfg.region, net.tiling.n_boundary)
    moves = build_moveset(net, tol=cfg.tol)
    w = greedy(net, region, moves)
    wc = greedy(net, region.complement(), moves)
    residual = sorted(set(range(net.tiling.n_vertices)) - w.vertices - wc.vertices)
    out = w.to_dict()
    out["residual"] = residual
    out["complementWedge"] = sorted(wc.vertices)
    out["moveSet"] = moves.mode
    if cfg.dot:
        with open(cfg.dot, "w") as fh:
            fh.write(_overlay(net.tiling, {"lightblue": w.vertices, "pink": wc.vertices, "gold": residual}))
    return out, True


def cmd_erasures(cfg: RunConfig):
    net = _network(cfg, "open")
    if not cfg.sites:
        raise UsageError("erasures needs --sites i,j,k")
    try:
        sites = [int(s) for s in str(cfg.sites).split(",") if s.strip()]
    except ValueError:
        raise UsageError("--sites must be comma separated integers") from None
    report = erasure_map(net, sites, build_moveset(net, tol=cfg.tol))
    if cfg.dot:
        with open(cfg.dot, "w") as fh:
            fh.write(_overlay(net.tiling, {"lightblue": report.wedge.vertices, "gray": report.excluded}))
    return report.to_dict(), True


def _sweep_row(args):
    net, start, length = args
    region = net.tiling.interval(start, length)
    rep = entanglement(net, region)
    return [start, length, rep.entropy, rep.cut_length]


def cmd_entropy(cfg: RunConfig):
    net = _network(cfg)
    if net.open_vertices:
        raise UsageError("entropy needs a projected bulk (use --bulk other than open)")
    n = net.tiling.n_boundary
    if cfg.state_out:
        state = contract_network(net).to_json()
        with open(cfg.state_out, "w") as fh:
            fh.write(state)
    if cfg.sweep:
        top = min(cfg.max_len or n - 1, n - 1)
        items = [(net, s, length) for length in range(1, top + 1) for s in range(n)]
        rows = _pmap(_sweep_row, items, cfg.jobs)
        return _csv(["regionStart", "regionLen", "S_A", "cutLength"], rows), True
    if not cfg.region:
        raise UsageError("entropy needs --region a..b or --sweep")
    region = parse_interval(cfg.region, n)
    out = entanglement(net, region).to_dict()
    out["entropySymbolic"] = f"{out['entropy_over_log4']:.12g} log 4"
    ok = True
    if cfg.rt:
        rt = rt_check(net, region, build_moveset(net, tol=cfg.tol))
        out["rt"] = rt.to_dict()
        if rt.complementary:
            ok = abs(rt.residual) <= cfg.eig_tol
    if cfg.decompose:
        out["decomposition"] = htn_entropy_decomposition(net, region).to_dict()
    return out, ok


def _expect(args):
    net, sites = args
    return correlator(net, sites)


def cmd_correlators(cfg: RunConfig):
    net = _network(cfg)
    if net.open_vertices:
        raise UsageError("correlators need a projected bulk")
    ops = dict(hermitian_paulis(net.chi))
    name_a = cfg.op or next(iter(ops))
    name_b = cfg.op_b or name_a
    for name in (name_a, name_b):
        if name not in ops:
            raise UsageError(f"unknown operator {name!r}; choose from {sorted(ops)}")
    op_a, op_b = ops[name_a], ops[name_b]
    n = net.tiling.n_boundary
    # One-site expectations are shared by every pair.
    ea = _pmap(_expect, [(net, [(i, op_a)]) for i in range(n)], cfg.jobs)
    eb = ea if name_a == name_b else _pmap(_expect, [(net, [(i, op_b)]) for i in range(n)], cfg.jobs)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    joint = _pmap(_expect, [(net, [(i, op_a), (j, op_b)]) for i, j in pairs], cfg.jobs)
    rows = []
    for (i, j), ab in zip(pairs, joint):
        c = ab - ea[i] * eb[j]
        rows.append([i, j, c.real, c.imag])
    return _csv(["site_i", "site_j", "re", "im"], rows), True


def _spectrum_dict(state, edge: str, tol: float) -> dict:
    s = scaling_superoperator(state, edge)
    spectrum = primary_spectrum(s, tol=tol)
    lead = spectrum.nontrivial()
    return {
        "unitalityDefect": s.unitality_defect(),
        "degenerate": spectrum.degenerate,
        "eigenoperators": [e.to_dict() for e in spectrum.entries],
        "positiveCount": len(spectrum.positive),
        "lambda": lead.eigenvalue if lead else 0.0,
        "delta": lead.delta if lead else None,
    }


def _alpha_row(args):
    alpha, edge = args
    return alpha_sweep([alpha], edge)[0]


def cmd_rg(cfg: RunConfig):
    if cfg.happy:
        ok, norm = happy_rg_check(_d(cfg), cfg.tol, return_norm=True)
        return {"pass": ok, "worstTracelessNorm": norm, "d": _d(cfg)}, ok
    if cfg.alpha_sweep:
        rows = _pmap(_alpha_row, [(a, cfg.edge) for a in parse_range(cfg.alpha_sweep)], cfg.jobs)
        return _csv(
            ["alpha", "lambda", "delta"],
            [[r["alpha"], r["lambda"], "" if r["delta"] is None else r["delta"]] for r in rows],
        ), True
    if cfg.alpha is not None:
        if not 0 <= cfg.alpha <= 1:
            raise UsageError("--alpha must lie in [0, 1]")
        state = alpha_state(cfg.alpha)
        out = _spectrum_dict(state, cfg.edge, cfg.eig_tol)
        out["alpha"] = cfg.alpha
        out["predictedLambda"] = math.sqrt(2 * cfg.alpha * math.sqrt(max(0.0, 1 - cfg.alpha**2)))
        return out, True
    state = parse_bulk(cfg.bulk, 4)
    if state is None:
        raise UsageError("rg needs a projected bulk state")
    out = _spectrum_dict(state, cfg.edge, cfg.eig_tol)
    out["bulk"] = cfg.bulk
    return out, True


def _scenarios(cfg):
    return list(SCENARIOS) if cfg.scenario == "both" else [cfg.scenario]


def cmd_push(cfg: RunConfig):
    tiling, c, l, r, region = three_vertex_patch()
    out, ok = {}, True
    logicals = {"X": LOGICAL_X_4112, "Z": LOGICAL_Z_4112}
    names = list(logicals) if cfg.logical == "both" else [cfg.logical]
    for sc in _scenarios(cfg):
        kl, kr = SCENARIOS[sc]
        bulk = [None] * 3
        bulk[l] = x_eigenstate(1) if kl == "x" else z_eigenstate(0)
        bulk[r] = x_eigenstate(1) if kr == "x" else z_eigenstate(0)
        net = CodeNetwork.build(tiling, "a4112", "qft4", bulk)
        # The left neighbour in Z fixes A; otherwise the mirror half.
        target = region if kl == "x" else region.complement()
        res = {"region": sorted(target.legs), "edge": "qft4"}
        for name in names:
            chain = push_logical(net, c, logicals[name], target, {l: kl, r: kr})
            chain["verified"] = verify_boundary_representative(net, c, logicals[name], chain["boundary"], cfg.tol)
            ok &= chain["verified"]
            res[name] = chain
        out[sc] = res
    return out, bool(ok)


def cmd_state_dep(cfg: RunConfig):
    reports = {sc: state_dependent_experiment(sc, cfg.edge if cfg.edge != "identity" else "hadamard4")
               for sc in _scenarios(cfg)}
    out = {sc: r.to_dict() for sc, r in reports.items()}
    ok = True
    for sc, r in reports.items():
        big, small = (r.mi_a, r.mi_ac) if sc == "XZ" else (r.mi_ac, r.mi_a)
        ok &= abs(big - LOG4) <= cfg.eig_tol and abs(small) <= cfg.eig_tol
        ok &= all(r.verified.values())
    if len(reports) > 1:
        ok &= len({r.cut_length for r in reports.values()}) == 1
    out["pass"] = bool(ok)
    return out, bool(ok)


HANDLERS = {
    "tiling": cmd_tiling,
    "verify": cmd_verify,
    "reconstruct": cmd_reconstruct,
    "erasures": cmd_erasures,
    "entropy": cmd_entropy,
    "correlators": cmd_correlators,
    "rg": cmd_rg,
    "push": cmd_push,
    "state-dep": cmd_state_dep,
}


def run(cfg: RunConfig) -> int:
    saved = os.environ.get("HTN_DIM_CAP")
    if cfg.dim_cap is not None:
        os.environ["HTN_DIM_CAP"] = str(int(cfg.dim_cap))
    try:
        payload, ok = HANDLERS[cfg.command](cfg)
    finally:
        if cfg.dim_cap is not None:
            if saved is None:
                os.environ.pop("HTN_DIM_CAP", None)
            else:
                os.environ["HTN_DIM_CAP"] = saved
    text = payload if isinstance(payload, str) else dumps(payload)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 2


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except SystemExit as exc:
        # argparse exits on --help (0) and on bad flags (64).
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    except UsageError as exc:
        print(f"htncode: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except NonHyperbolic as exc:
        print(f"htncode: NonHyperbolic: {exc}", file=sys.stderr)
        return 1
    except (config.CapExceeded, Overflow, ValueError, OSError) as exc:
        print(f"htncode: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
