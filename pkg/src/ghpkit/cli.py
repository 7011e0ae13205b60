"""Command-line front end.  All file and terminal I/O lives here.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import _numeric as num
from .cghp import BOUNDS, EXACT, CghpCertificate, cgh_distance, cghp_distance, project_subspace
from .errors import BudgetExceeded, ValidationError
from .flatmetrics import (FiniteMeasure, GroundSpace, hausdorff_distance, prokhorov_distance, strassen_coupling,
                          total_variation)
from .ghp import check_convergence, empirical_weak_distance, ghp_distance, integral_ghp
from .graphs import RootedGraph, bs_distance
from .spaces import FiniteSpace, SubspaceSpec, closed_ball, discontinuity_radii, validate_space

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3
PRINT_THRESHOLD = 1e-12
NORMS = ("euclidean", "l1", "linf")
METRICS = ("hausdorff", "tv", "prokhorov", "cgh", "cghp", "ghp", "integral-ghp", "bs")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing


def _number(x):
    """JSON number or "p/q" string.  Floats stay floats (they select the float backend)."""
    if isinstance(x, bool):
        raise ValidationError("non-numeric entry", (), f"boolean {x!r}")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError("non-numeric entry", (), f"cannot parse {x!r}") from exc
    raise ValidationError("non-numeric entry", (), f"unexpected {type(x).__name__}")


def _load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError("malformed document", (), f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("document must be an object", ())
    return doc


def _resolve(names, ref, what="root"):
    if isinstance(ref, int) and not isinstance(ref, bool):
        if not 0 <= ref < len(names):
            raise ValidationError(f"{what} index out of range", (ref,))
        return ref
    if ref in names:
        return names.index(ref)
    raise ValidationError(f"unknown {what} name", (), f"{what} {ref!r} is not a point")


def _coords_metric(coords, norm):
    pts = [[_number(c) for c in p] for p in coords]
    if len({len(p) for p in pts}) > 1:
        raise ValidationError("coordinate vectors differ in length", ())
    out = []
    for p in pts:
        row = []
        for q in pts:
            diffs = [abs(a - b) for a, b in zip(p, q)]
            if norm == "l1":
                row.append(sum(diffs, 0))
            elif norm == "linf":
                row.append(max(diffs, default=0))
            else:
                sq = sum((x * x for x in diffs), 0)
                r = math.isqrt(sq) if isinstance(sq, int) else None
                if r is not None and r * r == sq:
                    row.append(r)
                else:
                    row.append(math.sqrt(float(sq)))
        out.append(row)
    return out


def parse_space(doc: dict, backend: str | None = None) -> FiniteSpace:
    has_metric, has_coords = "metric" in doc, "coords" in doc
    if has_metric == has_coords:
        raise ValidationError("exactly one of metric and coords is required", ())
    if has_metric:
        dist = [[_number(x) for x in row] for row in doc["metric"]]
    else:
        norm = doc.get("norm", "euclidean")
        if norm not in NORMS:
            raise ValidationError("unknown norm", (), f"norm {norm!r}")
        dist = _coords_metric(doc["coords"], norm)
    n = len(dist)
    names = [str(p) for p in doc.get("points", range(n))]
    if len(names) != n:
        raise ValidationError("points length mismatch", (len(names), n))
    if len(set(names)) != n:
        raise ValidationError("duplicate point names", ())
    root = _resolve(names, doc.get("root", 0))
    mass = doc.get("mass")
    if isinstance(mass, dict):
        mass = [mass.get(p, 0) for p in names]
    if mass is not None:
        mass = [_number(x) for x in mass]
    return validate_space(dist, root, mass, names, backend)


def parse_graph(doc: dict) -> RootedGraph:
    names = [str(v) for v in doc.get("vertices", [])]
    if not names:
        raise ValidationError("graph needs vertices", ())
    if len(set(names)) != len(names):
        raise ValidationError("duplicate vertex names", ())
    edges = [(_resolve(names, e[0], "vertex"), _resolve(names, e[1], "vertex")) for e in doc.get("edges", [])]
    root = _resolve(names, doc.get("root", 0))
    return RootedGraph(len(names), tuple(edges), root, tuple(names))


def space_to_doc(X: FiniteSpace) -> dict:
    names = [X.label(i) for i in range(X.n)]
    return {"points": names, "metric": [[_out(x) for x in row] for row in X.dist],
            "root": names[X.root], "mass": [_out(x) for x in X.mass]}


def graph_to_doc(G: RootedGraph) -> dict:
    names = list(G.labels) if G.labels else [str(i) for i in range(G.n)]
    return {"kind": "graph", "vertices": names, "edges": [[names[u], names[v]] for u, v in G.edges],
            "root": names[G.root]}


def _is_graph(doc) -> bool:
    return doc.get("kind") == "graph" or "edges" in doc


# ---------------------------------------------------------------------------
# output


def _out(x):
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else num.fmt(x)
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return float(f"{x:.12g}")
    return x


def _approx(x):
    return None if x is None else float(f"{float(x):.12g}")


def _plan_doc(plan, X, Y, verbose=False):
    out = []
    for i, row in enumerate(plan.alpha):
        for j, v in enumerate(row):
            if verbose or float(v) >= PRINT_THRESHOLD:
                out.append([X.label(i), Y.label(j), _out(v)])
    return out


def _cert_doc(cert: CghpCertificate, X, Y, verbose=False) -> dict:
    R = cert.correspondence
    return {"mode": cert.mode,
            "correspondence": [[X.label(i), Y.label(j)] for i, j in R.sorted_pairs()],
            "distortion_half": _out(cert.distortion_half),
            "coupling_term": _out(cert.coupling_term),
            "plan": _plan_doc(cert.plan, X, Y, verbose)}


def _emit(doc: dict, stream=None):
    stream = stream or sys.stdout
    json.dump(doc, stream, indent=2, sort_keys=True)
    stream.write("\n")


# ---------------------------------------------------------------------------
# commands


def _spaces(args, a, b):
    X = parse_space(_load(a), args.backend)
    Y = parse_space(_load(b), args.backend)
    return X, Y


def _same_ground(X: FiniteSpace, Y: FiniteSpace) -> GroundSpace:
    if X.dist != Y.dist or X.labels != Y.labels:
        raise ValidationError("flat metrics need both files on the same points and metric", ())
    return GroundSpace(X.dist, X.backend)


def _flat_set(doc: dict, X: FiniteSpace):
    if "set" in doc:
        return [_resolve(list(X.labels), s, "set member") for s in doc["set"]]
    return [i for i in range(X.n) if X.mass[i] > 0]


def cmd_validate(args) -> dict:
    doc = _load(args.file)
    if _is_graph(doc):
        G = parse_graph(doc)
        return {"valid": True, "kind": "graph", "n": G.n, "edges": len(G.edges)}
    X = parse_space(doc, args.backend)
    return {"valid": True, "kind": "space", "n": X.n, "backend": X.backend, "total_mass": _out(X.total_mass)}


def cmd_ball(args) -> dict:
    X = parse_space(_load(args.file), args.backend)
    r = num.to_number(_number(args.radius), X.backend)
    if r < 0:
        raise ValidationError("radius must be nonnegative", ())
    B = closed_ball(X, r)
    doc = space_to_doc(B)
    doc["backend"] = B.backend
    return doc


def cmd_radii(args) -> dict:
    X = parse_space(_load(args.file), args.backend)
    return {"discontinuity_radii": [_out(r) for r in discontinuity_radii(X)], "backend": X.backend}


def cmd_dist(args) -> dict:
    m = args.metric
    if m == "bs":
        G1, G2 = parse_graph(_load(args.a)), parse_graph(_load(args.b))
        res = bs_distance(G1, G2)
        return {"metric": "bs", "value": _out(res.distance), "approx": _approx(res.distance),
                "alpha": res.alpha, "agree_upto": res.agree_upto}
    da, db = _load(args.a), _load(args.b)
    X, Y = parse_space(da, args.backend), parse_space(db, args.backend)
    out = {"metric": m, "backend": X.backend if X.backend == Y.backend else num.FLOAT}
    if m in ("hausdorff", "tv", "prokhorov"):
        G = _same_ground(X, Y)
        if m == "hausdorff":
            v = hausdorff_distance(_flat_set(da, X), _flat_set(db, Y), G)
        elif m == "tv":
            v = total_variation(FiniteMeasure(G, X.mass), FiniteMeasure(G, Y.mass))
        else:
            res = prokhorov_distance(FiniteMeasure(G, X.mass), FiniteMeasure(G, Y.mass))
            v = res.p
            out["witness"] = {"plan": _plan_doc(res.plan, X, Y, args.verbose)}
    elif m in ("cgh", "cghp"):
        fn = cgh_distance if m == "cgh" else cghp_distance
        cert = fn(X, Y, args.mode, args.budget)
        v = cert.value
        out["bracket"] = [_out(cert.lower), _out(cert.upper)]
        out["witness"] = _cert_doc(cert, X, Y, args.verbose)
    elif m == "ghp":
        res = ghp_distance(X, Y, args.tol, args.budget)
        v = res.value
        out["bracket"] = [_out(res.lo), _out(res.hi)]
        wit = []
        for tag, w in zip(("XY", "YX"), res.witnesses):
            if getattr(w, "certificate", None) is None:
                continue
            src, dst = (X, Y) if tag == "XY" else (Y, X)
            wit.append({"direction": tag, "a": _out(w.value),
                        "ball": [src.label(i) for i in w.ball],
                        "support": [dst.label(j) for j in w.support],
                        "mass": {dst.label(j): _out(w.mass[j]) for j in w.support}})
        out["witness"] = wit
    else:  # integral-ghp
        v = integral_ghp(X, Y, args.budget)
    out["value"] = _out(v)
    out["approx"] = _approx(v)
    return out


def cmd_coupling(args) -> dict:
    X, Y = _spaces(args, args.a, args.b)
    G = _same_ground(X, Y)
    mu, nu = FiniteMeasure(G, X.mass), FiniteMeasure(G, Y.mass)
    plan = strassen_coupling(mu, nu)
    p = prokhorov_distance(mu, nu).p
    far = sum((plan.alpha[i][j] for i in range(G.n) for j in range(G.n) if G.dist[i][j] > p), num.zero(G.backend))
    return {"prokhorov": _out(p), "far_mass": _out(far), "plan": _plan_doc(plan, X, Y, args.verbose),
            "backend": G.backend}


def cmd_project(args) -> dict:
    X, Y = _spaces(args, args.a, args.b)
    sub = _load(args.subspec)
    names = list(X.labels)
    support = [_resolve(names, s, "support point") for s in sub.get("support", names)]
    masses = sub.get("mass")
    if isinstance(masses, dict):
        chosen = {_resolve(names, k, "support point"): _number(v) for k, v in masses.items()}
    else:
        chosen = {i: X.mass[i] for i in support}
    full = [chosen.get(i, 0) if i in support else 0 for i in range(X.n)]
    xsub = SubspaceSpec.exact(X, support, full)
    radius = args.radius if args.radius is not None else sub.get("radius")
    if radius is not None:
        radius = _number(radius)
    cert = cghp_distance(X, Y, EXACT, args.budget)
    proj = project_subspace(X, Y, xsub, cert, radius, args.budget)
    doc = space_to_doc(proj.space)
    return {"cghp": _out(cert.value), "subspace": doc, "bound": _out(proj.bound),
            "verified": _out(proj.verified),
            "correspondence": [[names[xsub.support[i]], proj.space.label(j)]
                               for i, j in proj.correspondence.sorted_pairs()]}


def cmd_converge(args) -> dict:
    limit = parse_space(_load(args.limit), args.backend)
    seq = [parse_space(_load(p), args.backend) for p in args.seq]
    criteria = tuple(c.strip() for c in args.criteria.split(",") if c.strip())
    radii = [_number(r) for r in args.radii.split(",")] if args.radii else []
    rep = check_convergence(seq, limit, criteria, radii, args.tol, args.budget)
    return {"ghp": [_out(v) for v in rep.ghp],
            "balls": {num.fmt(r): [_out(v) for v in vals] for r, vals in rep.balls.items()},
            "integral": [_out(v) for v in rep.integral],
            "radii": [_out(r) for r in rep.radii], "trends": rep.trends}


def _dir_spaces(d, backend):
    files = sorted(Path(d).glob("*.json"))
    if not files:
        raise UsageError(f"no *.json files in {d}")
    return [parse_space(_load(f), backend) for f in files]


def cmd_weak(args) -> dict:
    A = _dir_spaces(args.dir_a, args.backend)
    B = _dir_spaces(args.dir_b, args.backend)
    res = empirical_weak_distance(A, B, args.tol, args.budget)
    return {"value": _out(res.value), "approx": _approx(res.value), "sizes": [len(A), len(B)]}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghpkit", description="Distances between finite pointed measured metric spaces.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=num.BACKENDS, default=None,
                        help="numeric backend (default: rational unless the input has floats)")
    common.add_argument("--budget", type=int, default=25, help="cell budget for exact searches")
    common.add_argument("--tol", type=float, default=1e-6, help="bisection tolerance")
    common.add_argument("--verbose", "-v", action="store_true", help="print every plan entry")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the output")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a space or graph file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)
    s = sub.add_parser("ball", parents=[common], help="closed ball around the root")
    s.add_argument("file")
    s.add_argument("radius")
    s.set_defaults(func=cmd_ball)
    s = sub.add_parser("radii", parents=[common], help="discontinuity radii")
    s.add_argument("file")
    s.set_defaults(func=cmd_radii)
    s = sub.add_parser("dist", parents=[common], help="distance between two files")
    s.add_argument("metric", choices=METRICS)
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--mode", choices=(EXACT, BOUNDS), default=EXACT)
    s.set_defaults(func=cmd_dist)
    s = sub.add_parser("coupling", parents=[common], help="Strassen coupling of two measures on one ground")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_coupling)
    s = sub.add_parser("project", parents=[common], help="carry a subspace of A over to B")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("subspec")
    s.add_argument("--radius", default=None)
    s.set_defaults(func=cmd_project)
    s = sub.add_parser("converge", parents=[common], help="convergence criteria for a sequence")
    s.add_argument("limit")
    s.add_argument("seq", nargs="+")
    s.add_argument("--criteria", default="ghp,balls,integral")
    s.add_argument("--radii", default="", help="comma-separated radii for the ball criterion")
    s.set_defaults(func=cmd_converge)
    s = sub.add_parser("weak-dist", parents=[common], help="Prokhorov distance of two collections of spaces")
    s.add_argument("dir_a")
    s.add_argument("dir_b")
    s.set_defaults(func=cmd_weak)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for bad usage
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    t0 = time.perf_counter()
    try:
        doc = args.func(args)
    except UsageError as exc:
        _emit({"error": "usage", "message": str(exc)}, stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        _emit({"error": "validation", "invariant": exc.invariant, "witness": list(exc.witness),
               "message": str(exc)}, stderr)
        return EXIT_INVALID
    except BudgetExceeded as exc:
        _emit({"error": "budget", "invariant": exc.what, "witness": [exc.size, exc.budget],
               "message": str(exc)}, stderr)
        return EXIT_BUDGET
    doc["command"] = args.command
    if args.timing:
        doc["timing_s"] = round(time.perf_counter() - t0, 6)
    _emit(doc, stdout)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
