"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 numeric error, 4 when a
certificate rejects a property that should hold inside the sqrt(2) ball.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULT_TOL, Tolerances
from .convexity import (
    certify,
    detect_commutation,
    partial_angle_sums,
    partial_singular_sums,
    perturb_to_distinct,
    radius_scan,
    trace_offsets,
)
from .distance import distance_profile
from .errors import DegenerateSpectrumError, GeodesicError, NumericError, RadiusError, ValidationError
from .flow import track_frame
from .linalg import SQRT2, as_hermitian
from .norms import CartanVector, norm_value, parse_norm
from .serialize import dumps, matrix_from_json, matrix_to_json, path_from_json, path_to_json

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_REJECTED = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--grid", type=int, default=401, help="grid size G (default 401)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-config", type=Path, help="flat JSON file of tolerance overrides")
    p.add_argument("--out", type=Path, help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="unitary-geodesics", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="track eigenangles and certify partial angle sums")
    p.add_argument("path", type=Path)
    p.add_argument("--vectors", action="store_true", help="include eigenvectors in the frame")

    p = sub.add_parser("distance", parents=[common], help="distance profile d(1, u(t)) for a norm")
    p.add_argument("path", type=Path)
    p.add_argument("--norm", required=True, help="norm spec (JSON or inline, e.g. schatten:2)")

    p = sub.add_parser("certify", parents=[common], help="certify convexity of sampled values from CSV")
    p.add_argument("samples", type=Path)
    p.add_argument("--t-column", default=None, help="parameter column (default: first)")
    p.add_argument("--column", default=None, help="value column (default: second)")
    p.add_argument("--label", default=None)
    p.add_argument("--sense", choices=("convex", "concave"), default="convex")
    p.add_argument("--expect", action="store_true", help="exit 4 unless the verdict is linear or --sense")

    p = sub.add_parser("perturb", parents=[common], help="perturb y to make the spectrum distinct on the grid")
    p.add_argument("path", type=Path)

    p = sub.add_parser("radius-scan", parents=[common], help="random convexity scan and optimality witness search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--outside-trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("commute", parents=[common], help="detect [x, y] = 0 from strict convexity")
    p.add_argument("path", type=Path)
    p.add_argument("--mu", required=True, help="strictly decreasing weights, comma separated")

    p = sub.add_parser("norms", parents=[common], help="evaluate norms of a Hermitian matrix")
    p.add_argument("matrix", type=Path)
    p.add_argument("--norm", action="append", required=True, help="repeatable norm spec")
    return parser


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read JSON from {path}: {exc}") from exc


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _envelope(command: str, body: dict) -> dict:
    return {"version": __version__, "command": command, **body}


def _cmd_analyze(args, tol):
    path = path_from_json(_read_json(args.path), tol)
    grid = path.grid(args.grid)
    try:
        frame = track_frame(path, args.grid, tol)
        frame_json = frame.to_json(include_vectors=args.vectors) | {"tracked": True}
        angles = frame.angles
    except DegenerateSpectrumError as exc:
        # crossings (e.g. commuting generators): report per-point sorted angles
        angles = path.angles_on(grid)
        frame_json = {
            "grid": grid.tolist(),
            "angles": angles.tolist(),
            "ball_ok": [bool(b) for b in path.radius_on(grid) < SQRT2],
            "tracked": False,
            "collision_t": exc.t,
        }
    sums = partial_angle_sums(angles)
    certs = [certify(sums[:, m], grid, f"s_{m + 1}", tol) for m in range(path.n)]
    totals = sums[:, -1:]
    tails = [certify(totals[:, 0] - (sums[:, m - 2] if m > 1 else 0.0), grid, f"tail_{m}", tol, "concave")
             for m in range(1, path.n + 1)]
    inside = all(frame_json["ball_ok"])
    singular = []
    if inside:
        ss = partial_singular_sums(path, args.grid)
        singular = [certify(ss[:, m], grid, f"sigma_{m + 1}", tol) for m in range(path.n)]
    kinks = path.n**2
    body = {
        "frame": frame_json,
        "inside_ball": inside,
        "trace_offsets": trace_offsets(angles, grid, path.x, path.y).tolist(),
        "certificates": [c.to_json() | {"piecewise_linear": c.piecewise_linear(kinks)} for c in certs],
        "tail_certificates": [c.to_json() for c in tails],
        "singular_certificates": [c.to_json() for c in singular],
    }
    rejected = inside and any(c.verdict == "nonconvex" for c in certs + tails + singular)
    if args.format == "csv":
        head = ["t"] + [f"theta_{k + 1}" for k in range(path.n)] + [f"s_{m + 1}" for m in range(path.n)]
        rows = [head] + [[repr(float(t))] + [repr(float(v)) for v in angles[i]] + [repr(float(v)) for v in sums[i]]
                         for i, t in enumerate(grid)]
        return _csv_text(rows), rejected
    return dumps(_envelope("analyze", body)), rejected


def _cmd_distance(args, tol):
    path = path_from_json(_read_json(args.path), tol)
    norm = parse_norm(args.norm)
    prof = distance_profile(path, norm, args.grid, tol)
    rejected = prof.certificate is not None and prof.certificate.verdict == "nonconvex"
    if args.format == "csv":
        rows = [["t", "distance", "inside_ball"]] + [
            [repr(float(t)), repr(float(d)), str(bool(b)).lower()]
            for t, d, b in zip(prof.grid, prof.distances, prof.inside_ball)
        ]
        return _csv_text(rows), rejected
    return dumps(_envelope("distance", prof.to_json())), rejected


def _cmd_certify(args, tol):
    try:
        with open(args.samples, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
            fields = reader.fieldnames or []
    except OSError as exc:
        raise ValidationError(f"cannot read {args.samples}: {exc}") from exc
    if len(fields) < 2:
        raise ValidationError("samples CSV needs a header with at least two columns")
    tcol = args.t_column or fields[0]
    vcol = args.column or fields[1]
    for col in (tcol, vcol):
        if col not in fields:
            raise ValidationError(f"column {col!r} not in CSV header {fields}")
    try:
        grid = np.array([float(r[tcol]) for r in rows])
        values = np.array([float(r[vcol]) for r in rows])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"non-numeric sample: {exc}") from exc
    cert = certify(values, grid, args.label or vcol, tol, args.sense)
    rejected = args.expect and cert.verdict not in ("linear", args.sense)
    if args.format == "csv":
        rows = [["label", "verdict", "min_second_difference", "offending_index"],
                [cert.label, cert.verdict, repr(cert.min_second_difference), "" if cert.offending_index is None else str(cert.offending_index)]]
        return _csv_text(rows), rejected
    return dumps(_envelope("certify", cert.to_json())), rejected


def _cmd_perturb(args, tol):
    path = path_from_json(_read_json(args.path), tol)
    rep = perturb_to_distinct(path, args.grid, args.seed, tol)
    body = {
        "z": matrix_to_json(rep.z),
        "magnitude": rep.magnitude,
        "y_new": matrix_to_json(rep.y_new),
        "min_gap_achieved": rep.min_gap_achieved,
        "attempts": rep.attempts,
        "path": path_to_json(rep.path),
    }
    if args.format == "csv":
        rows = [["magnitude", "min_gap_achieved", "attempts"],
                [repr(rep.magnitude), repr(rep.min_gap_achieved), str(rep.attempts)]]
        return _csv_text(rows), False
    return dumps(_envelope("perturb", body)), False


def _cmd_radius_scan(args, tol):
    res = radius_scan(args.n, args.trials, args.seed, args.grid, args.outside_trials, args.workers, tol)
    rejected = res.inside_violations > 0
    if args.format == "json":
        body = {
            "n": res.n,
            "trials": res.trials,
            "seed": res.seed,
            "inside_violations": res.inside_violations,
            "outside_example": None if res.outside_example is None else res.outside_example.to_json(),
        }
        return dumps(_envelope("radius-scan", body)), rejected
    return _csv_text(res.csv_rows()), rejected


def _cmd_commute(args, tol):
    path = path_from_json(_read_json(args.path), tol)
    try:
        mu = CartanVector(tuple(float(v) for v in args.mu.split(",") if v.strip()))
    except ValueError as exc:
        raise ValidationError(f"bad --mu: {exc}") from exc
    rec = detect_commutation(path, args.grid, mu, tol)
    if args.format == "csv":
        rows = [["commute", "min_curvature", "commutator_norm", "consistent"],
                [str(rec.commute).lower(), repr(rec.min_curvature), repr(rec.commutator_norm), str(rec.consistent).lower()]]
        return _csv_text(rows), not rec.consistent
    return dumps(_envelope("commute", rec.to_json())), not rec.consistent


def _cmd_norms(args, tol):
    x = as_hermitian(matrix_from_json(_read_json(args.matrix), hermitian=True), tol, "matrix")
    specs = [parse_norm(s) for s in args.norm]
    values = [{"norm": s.to_json(), "value": norm_value(s, x)} for s in specs]
    if args.format == "csv":
        rows = [["norm", "value"]] + [[json.dumps(v["norm"], sort_keys=True), repr(v["value"])] for v in values]
        return _csv_text(rows), False
    return dumps(_envelope("norms", {"matrix": matrix_to_json(x), "values": values})), False


COMMANDS = {
    "analyze": _cmd_analyze,
    "distance": _cmd_distance,
    "certify": _cmd_certify,
    "perturb": _cmd_perturb,
    "radius-scan": _cmd_radius_scan,
    "commute": _cmd_commute,
    "norms": _cmd_norms,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = Tolerances.from_json(args.tol_config) if args.tol_config else DEFAULT_TOL
        text, rejected = COMMANDS[args.command](args, tol)
    except (ValidationError, RadiusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        where = getattr(exc, "t", None)
        suffix = f" (t = {where:.12g})" if where is not None and "t =" not in str(exc) else ""
        print(f"numeric error: {exc}{suffix}", file=sys.stderr)
        return EXIT_NUMERIC
    except GeodesicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if rejected:
        print("certification rejected an expected convexity property", file=sys.stderr)
        return EXIT_REJECTED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
