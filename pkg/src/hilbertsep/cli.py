"""``hilbertsep`` command line.

Exit codes: 0 success, 1 usage or input error, 2 invalid domain, 3 point or
dimension problem, 4 not separable, 5 solver failure, 6 verification failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from hilbertsep import embed, geometry as geo, oracle, svm
from hilbertsep.errors import (
    DimensionMismatch, DimensionNot2, GeometryError, HilbertSepError, LPError,
    MalformedHyperplane, NotInterior, NotSeparable, OracleError,
)
from hilbertsep.render import render_svg

EXIT_USAGE, EXIT_DOMAIN, EXIT_POINT, EXIT_SEPARABLE, EXIT_SOLVER, EXIT_VERIFY = 1, 2, 3, 4, 5, 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- file formats -------------------------------------------------------------


def load_domain(path):
    try:
        data = json.loads(Path(path).read_text())
        planes = [(h["w"], h["c"]) for h in data["hyperplanes"]]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read domain file {path}: {exc}") from exc
    d = data.get("dimension")
    if d is not None and any(len(w) != d for w, _ in planes):
        raise MalformedHyperplane(f"hyperplane normals do not all have length {d}")
    return geo.validate_domain(planes)


def _parse_label(token):
    token = token.strip()
    if token in ("+1", "1"):
        return 1
    if token in ("-1", "0"):
        return -1
    raise UsageError(f"bad label {token!r}; expected +1, -1, 1 or 0")


def read_points(path):
    """Points CSV: header row, coordinate columns, optional trailing ``label``.

    Returns ``(header, coordinate strings, points, labels or None)``.
    """
    try:
        rows = [r for r in csv.reader(Path(path).read_text().splitlines()) if r]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise UsageError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    try:
        [float(h) for h in header]
    except ValueError:
        pass
    else:
        raise UsageError(f"{path} has no header row")
    has_label = header[-1].lower() == "label"
    ncoord = len(header) - has_label
    raw, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise UsageError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        raw.append([t.strip() for t in row[:ncoord]])
        if has_label:
            labels.append(_parse_label(row[-1]))
    try:
        X = np.array([[float(t) for t in r] for r in raw], dtype=float).reshape(len(raw), ncoord)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    return header[:ncoord], raw, X, (np.array(labels, dtype=int) if has_label else None)


def read_dataset(domain, path):
    _, _, X, y = read_points(path)
    if y is None:
        raise UsageError(f"{path} needs a label column")
    if X.shape[1] != domain.dimension:
        raise DimensionMismatch(f"points have {X.shape[1]} coordinates, domain has dimension "
                                f"{domain.dimension}")
    return svm.make_dataset(domain, X, y)


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _fmt(v):
    return f"{v:.6g}"


def _vec(v):
    return "(" + ", ".join(_fmt(x) for x in v) + ")"


def _point(text, name):
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError as exc:
        raise UsageError(f"{name} must be comma-separated numbers") from exc


# --- commands -----------------------------------------------------------------


def cmd_validate(args):
    dom = load_domain(args.domain)
    lo, hi = dom.bbox
    print(f"valid: d={dom.dimension} m={dom.n_facets}, interior point {_vec(dom.center)}")
    print("bounding box: " + " x ".join(f"[{_fmt(a)}, {_fmt(b)}]" for a, b in zip(lo, hi)))
    print(f"inradius: {_fmt(dom.inradius)}")
    return 0


def cmd_dist(args):
    dom = load_domain(args.domain)
    p, q = _point(args.p, "p"), _point(args.q, "q")
    metric = {"hilbert": geo.HILBERT, "funk": geo.FUNK, "rfunk": "rfunk"}[args.metric]
    if args.method == "both":
        a = geo.distance(dom, p, q, metric, geo.CHORD)
        b = geo.distance(dom, p, q, metric, geo.BIRKHOFF)
        print(f"chord: {a:.6f}")
        print(f"birkhoff: {b:.6f}")
        print(f"difference: {abs(a - b):.6e}")
    else:
        print(f"{geo.distance(dom, p, q, metric, args.method):.6f}")
    return 0


def cmd_train(args):
    dom = load_domain(args.domain)
    data = read_dataset(dom, args.data)
    if args.soft:
        model = svm.train_soft(dom, data, args.epsilon, args.C, args.metric, args.normalization)
        print(f"{'r':>10} {'Xi':>12} {'score':>12}")
        for r, Xi, score in model.info["scan"]:
            print(f"{r:10.6f} {Xi:12.6f} {score:12.6f}")
        print(f"selected r_s={model.margin:.6f} Xi={model.Xi:.6f} score={model.info['score']:.6f}")
    else:
        model = svm.train_hard(dom, data, args.epsilon, args.metric, args.normalization)
        print(f"margin: {model.margin:.6f}")
        print(f"separator: w={_vec(model.w)} c={_fmt(model.c)}")
    _write_json(args.out, model.to_dict())
    print(f"wrote {args.out}")
    return 0


def _load_model(path):
    raw = _read_json(path)
    try:
        return svm.SeparatorModel.from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path} is not a separator model: {exc}") from exc


def _emit_predictions(header, raw, labels, boundary):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header + ["label", "boundary"])
    for coords, s, b in zip(raw, labels, boundary):
        writer.writerow(coords + [f"{int(s):+d}", "boundary" if b else ""])
    sys.stdout.write(buf.getvalue())


def cmd_predict(args):
    model = _load_model(args.model)
    header, raw, X, _ = read_points(args.points)
    labels, boundary = svm.predict(model, X)
    _emit_predictions(header, raw, labels, boundary)
    return 0


def cmd_nn(args):
    dom = load_domain(args.domain)
    data = read_dataset(dom, args.data)
    model = embed.train_nn(dom, data)
    out = {"kind": "nn", "domain": dom.to_dict(), **model.to_dict()}
    _write_json(args.out, out)
    beta = "inf" if math.isinf(model.beta) else f"{model.beta:.6f}"
    print(f"beta: {beta}")
    if not model.separated:
        print("warning: beta <= 1, the classes are not separated by their centres", file=sys.stderr)
    print(f"wrote {args.out}")
    return 0


def cmd_nn_predict(args):
    raw_model = _read_json(args.model)
    try:
        dom = geo.validate_domain([(h["w"], h["c"]) for h in raw_model["domain"]["hyperplanes"]])
        model = embed.NnModel.from_dict(raw_model)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.model} is not a nearest-centre model: {exc}") from exc
    header, raw, X, _ = read_points(args.points)
    out = [embed.classify_nn(model, dom, x) for x in X]
    _emit_predictions(header, raw, [o.label for o in out], [o.boundary for o in out])
    return 0


def cmd_verify(args):
    dom = load_domain(args.domain)
    model = _load_model(args.model)
    data = read_dataset(dom, args.data)
    try:
        cert = oracle.certify_margin(dom, data, model.w, model.c, model.margin, model.metric,
                                     tol=args.tol)
    except OracleError as exc:
        print(f"FAIL: {type(exc).__name__}: {exc}")
        return EXIT_VERIFY
    if model.kind == "soft":
        for i, dist in enumerate(cert.distances):
            print(f"{i:4d} {dist:.6f}")
        print(f"soft model: r_s={model.margin:.6f} is not a certified margin")
        return 0
    for i, (dist, ok) in enumerate(zip(cert.distances, cert.passed)):
        print(f"{i:4d} {dist:.6f} {'PASS' if ok else 'FAIL'}")
    failed = int(np.sum(~cert.passed))
    print(f"claimed margin {model.margin:.6f}, tol {args.tol:g}: "
          + ("all PASS" if not failed else f"{failed} FAIL"))
    return 0 if not failed else EXIT_VERIFY


def _ball_arg(text):
    vals = _point(text, "--ball")
    if len(vals) < 2:
        raise UsageError("--ball needs coordinates followed by a radius")
    return vals[:-1], float(vals[-1])


def cmd_render(args):
    dom = load_domain(args.domain)
    if dom.dimension != 2:
        raise DimensionNot2(f"rendering needs d=2, domain has d={dom.dimension}")
    points = labels = model = None
    if args.data:
        _, _, points, labels = read_points(args.data)
        geo._clearance_matrix(dom, points)
    if args.model:
        model = _load_model(args.model)
    balls = [_ball_arg(b) for b in args.ball]
    svg = render_svg(dom, points, labels, model, balls, args.metric)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


def _square(lo=0.0, hi=1.0):
    return {"dimension": 2, "hyperplanes": [
        {"w": [1.0, 0.0], "c": 0.0 - lo}, {"w": [-1.0, 0.0], "c": hi},
        {"w": [0.0, 1.0], "c": 0.0 - lo}, {"w": [0.0, -1.0], "c": hi}]}


DEMO_FILES = {
    "square.json": _square(),
    "halfspace.json": {"dimension": 2, "hyperplanes": [{"w": [1.0, 0.0], "c": 0.0}]},
    "empty.json": {"dimension": 2, "hyperplanes": [
        {"w": [1.0, 0.0], "c": -0.6}, {"w": [-1.0, 0.0], "c": 0.4},
        {"w": [0.0, 1.0], "c": 0.0}, {"w": [0.0, -1.0], "c": 1.0}]},
    "cube.json": {"dimension": 3, "hyperplanes": [
        {"w": [float(s * (i == k)) for k in range(3)], "c": 0.0 if s > 0 else 1.0}
        for i in range(3) for s in (1, -1)]},
    "two_points.csv": "x,y,label\n0.5,0.75,+1\n0.5,0.25,-1\n",
    "interleaved.csv": "x,y,label\n0.3,0.3,+1\n0.7,0.7,+1\n0.3,0.7,-1\n0.7,0.3,-1\n",
    "symmetric.csv": "x,y,label\n0.4,0.8,+1\n0.6,0.8,+1\n0.4,0.2,-1\n0.6,0.2,-1\n",
    "query.csv": "x,y\n0.5,0.9\n0.5,0.5\n0.2,0.1\n",
}


def cmd_demo(args):
    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in DEMO_FILES.items():
        text = content if isinstance(content, str) else json.dumps(content, indent=2) + "\n"
        (out / name).write_text(text)
        print(out / name)
    return 0


def build_parser():
    ap = _Parser(prog="hilbertsep", description="Hilbert-geometry separators on polytopes.")
    ap.add_argument("--lp-dump", action="store_true",
                    help="write every LP solved to lp_dump/ in LP text format")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a domain file")
    p.add_argument("domain")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dist", help="distance between two interior points")
    p.add_argument("domain")
    p.add_argument("p", help="comma-separated coordinates")
    p.add_argument("q", help="comma-separated coordinates")
    p.add_argument("--metric", choices=("hilbert", "funk", "rfunk"), default="hilbert")
    p.add_argument("--method", choices=("chord", "birkhoff", "both"), default="birkhoff")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("train", help="train a margin separator")
    p.add_argument("domain")
    p.add_argument("data")
    p.add_argument("--metric", choices=(geo.HILBERT, geo.FUNK), default=geo.HILBERT)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--soft", action="store_true")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--out", default="model.json")
    p.add_argument("--normalization", choices=("two", "exhaustive"), default="two")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label points with a separator model")
    p.add_argument("model")
    p.add_argument("points")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("nn", help="train the nearest-centre classifier")
    p.add_argument("domain")
    p.add_argument("data")
    p.add_argument("--out", default="nn.json")
    p.set_defaults(func=cmd_nn)

    p = sub.add_parser("nn-predict", help="label points with a nearest-centre model")
    p.add_argument("model")
    p.add_argument("points")
    p.set_defaults(func=cmd_nn_predict)

    p = sub.add_parser("verify", help="check a model's margin with the distance oracle")
    p.add_argument("domain")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="draw a planar scene as SVG")
    p.add_argument("domain")
    p.add_argument("data", nargs="?")
    p.add_argument("model", nargs="?")
    p.add_argument("--ball", action="append", default=[], metavar="X,Y,R")
    p.add_argument("--metric", choices=(geo.HILBERT, geo.FUNK), default=geo.HILBERT)
    p.add_argument("--out", default="scene.svg")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("demo", help="write small example inputs to a directory")
    p.add_argument("dir")
    p.set_defaults(func=cmd_demo)
    return ap


def _exit_code(exc):
    if isinstance(exc, (NotInterior, DimensionMismatch, DimensionNot2)):
        return EXIT_POINT
    if isinstance(exc, GeometryError):
        return EXIT_DOMAIN
    if isinstance(exc, NotSeparable):
        return EXIT_SEPARABLE
    if isinstance(exc, LPError):
        return EXIT_SOLVER
    return EXIT_USAGE


def main(argv=None):
    args = build_parser().parse_args(argv)
    saved = os.environ.get("HILBERTSEP_LP_DUMP")
    if args.lp_dump:
        os.environ["HILBERTSEP_LP_DUMP"] = "1"
    try:
        return args.func(args)
    except (HilbertSepError, UsageError) as exc:
        name = type(exc).__name__
        print(f"error: {name}: {exc}" if not isinstance(exc, UsageError) else f"error: {exc}",
              file=sys.stderr)
        return _exit_code(exc)
    finally:
        if args.lp_dump:  # main() may be called repeatedly in one process
            if saved is None:
                os.environ.pop("HILBERTSEP_LP_DUMP", None)
            else:
                os.environ["HILBERTSEP_LP_DUMP"] = saved


if __name__ == "__main__":
    sys.exit(main())
