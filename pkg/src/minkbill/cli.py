"""Command-line front end: ``minkbill <command> [options]``.

Every output starts with a ``#`` header holding the tool version, the full
configuration and the seed.  Exit status is 0 on success, 1 when
``projectivity --strict`` reaches a negative verdict, and 2 on any error; in
the last case a JSON error record is written to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .blmetric import IntegrationConfig, bl_matrix, bl_sphericity_defect
from .bodies import body_from_spec, project_to_boundary
from .errors import GeometryError, SpecError
from .involutions import (
    DefectConfig,
    ellipsoid_verdict,
    reports_to_jsonl,
    two_patch_defect,
)
from .patches import patch_from_spec
from .phasecurves import classify_field, field_from_spec, hamiltonian_of, phase_conic
from .quadrics import QUADRIC_TOL, classify_conic, fit_quadric, planar_section
from .reflectors import (
    InvolutionField,
    MinkowskiLaw,
    ProjectiveLaw,
    StandardLaw,
    format_trajectory,
    trajectory,
)


class CommandError(Exception):
    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


def _load_json(value: str, flag: str):
    """Inline JSON or the path of a JSON file."""
    text = value
    if not value.lstrip().startswith(("{", "[")):
        try:
            text = Path(value).read_text()
        except OSError as exc:
            raise CommandError(flag, f"cannot read {value!r}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CommandError(flag, f"invalid JSON: {exc.msg}") from exc


def _required(args, name: str):
    value = getattr(args, name.replace("-", "_"))
    if value is None:
        raise CommandError(name, f"--{name} is required for {args.command}")
    return value


def _vector(args, name: str, dim: int | None = None) -> np.ndarray:
    raw = _load_json(_required(args, name), name)
    try:
        v = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CommandError(name, "expected a list of numbers") from exc
    if v.ndim != 1 or (dim is not None and len(v) != dim):
        raise CommandError(name, f"expected a vector of length {dim}")
    return v


def _body(args, name: str):
    spec = _load_json(_required(args, name), name)
    try:
        return spec, body_from_spec(spec)
    except SpecError as exc:
        raise CommandError(f"{name}.{exc.field}", str(exc)) from exc


def _patch(args, name: str):
    spec = _load_json(_required(args, name), name)
    try:
        return spec, patch_from_spec(spec)
    except SpecError as exc:
        raise CommandError(f"{name}.{exc.field}", str(exc)) from exc


def _header(command: str, config: dict, seed) -> str:
    lines = [f"# minkbill {__version__}", f"# command: {command}",
             "# config: " + json.dumps(config, sort_keys=True), f"# seed: {seed}"]
    return "\n".join(lines) + "\n"


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> tuple[dict, str, str | None]:
    table_spec, table = _body(args, "table")
    law_name = args.law or "minkowski"
    config = {"table": table_spec, "law": law_name, "n": args.n}
    if law_name == "minkowski":
        dual_spec, dual = _body(args, "body")
        if dual.dim != table.dim:
            raise CommandError("body", "table and dual body dimensions differ")
        config["body"] = dual_spec
        law = MinkowskiLaw(table, dual)
    elif law_name == "standard":
        law = StandardLaw(table)
    elif law_name == "projective":
        metric = None
        if args.metric is not None:
            metric = np.asarray(_load_json(args.metric, "metric"), dtype=float)
            config["metric"] = metric.tolist()
        try:
            field = (InvolutionField.euclidean_normal(table) if metric is None
                     else InvolutionField.metric_normal(table, metric))
        except GeometryError as exc:
            raise CommandError("metric", str(exc)) from exc
        law = ProjectiveLaw(field)
    else:
        raise CommandError("law", f"unknown law {law_name!r}")
    q0 = _vector(args, "q0", table.dim)
    v0 = _vector(args, "v0", table.dim)
    config.update(q0=q0.tolist(), v0=v0.tolist())
    start = project_to_boundary(table, q0)
    traj = trajectory(table, law, start, v0, args.n)
    worst = max((b.gauge_residual for b in traj.bounces), default=0.0)
    summary = f"# bounces: {len(traj.bounces)}, max gauge residual: {worst!r}"
    return config, format_trajectory(traj), summary


def cmd_projectivity(args):
    cfg = DefectConfig(samples=args.samples, seed=args.seed)
    base = {"samples": args.samples, "tol": args.tol, "workers": args.workers}
    if args.body2 is not None:
        s1_spec, s1 = _patch(args, "body")
        s2_spec, s2 = _patch(args, "body2")
        count = args.alpha_grid or 9
        config = dict(base, body=s1_spec, body2=s2_spec, cone=args.cone, alpha_grid=count)
        reports, skipped = two_patch_defect(s1, s2, cone=args.cone, count=count, cfg=cfg,
                                            workers=args.workers)
        if not reports:
            raise GeometryError("every direction in the cone failed")
        worst = max(reports, key=lambda r: r.fit_rms)
        ok = worst.fit_rms <= args.tol
        summary = {"mode": "two_patch", "verdict": ok, "max_defect": worst.fit_rms,
                   "argmax_alpha": worst.alpha.tolist(), "skipped": skipped, "tol": args.tol}
        line = (f"same quadric: {'consistent' if ok else 'inconsistent'}; "
                f"max defect {worst.fit_rms:.3e} at alpha {worst.alpha.tolist()}")
    else:
        spec, body = _body(args, "body")
        count = max(args.alpha_grid or 0, 40 if body.dim == 2 else 200)  # verdict minimum
        config = dict(base, body=spec, alpha_grid=count, integrator=args.integrator)
        bl_cfg = IntegrationConfig(mode=args.integrator, seed=args.seed,
                                   samples=args.bl_samples)
        v = ellipsoid_verdict(body, count, args.tol, cfg, bl_cfg, workers=args.workers)
        reports, ok = v.reports, v.is_ellipsoid_like
        summary = dict(v.summary(), mode="single_body")
        line = (f"verdict: {'ellipsoid' if ok else 'not an ellipsoid'}; "
                f"max defect {v.max_defect:.3e} at alpha {v.argmax_direction.tolist()}; "
                f"BL sphericity defect {v.bl_cross_check:.3e}")
    body_text = reports_to_jsonl(reports) + _dumps({"summary": summary}) + "\n"
    status = 1 if (args.strict and not ok) else 0
    return config, body_text, line, status


def cmd_blmetric(args):
    spec, body = _body(args, "body")
    cfg = IntegrationConfig(mode=args.integrator, seed=args.seed, samples=args.bl_samples,
                            workers=args.workers)
    bl = bl_matrix(body, cfg)
    record = bl.record()
    record["sphericity_defect"] = bl_sphericity_defect(body, bl)
    config = {"body": spec, "integrator": args.integrator, "samples": args.bl_samples}
    return config, _dumps(record) + "\n", None


def cmd_phasecurve(args):
    spec = _load_json(_required(args, "field"), "field")
    try:
        field = field_from_spec(spec)
    except SpecError as exc:
        raise CommandError(f"field.{exc.field}", str(exc)) from exc
    z0 = _vector(args, "z0", 2)
    H = hamiltonian_of(field)
    conic = phase_conic(field, z0)
    cls = classify_field(field)
    record = {
        "hamiltonian": {"a": H.a, "c": H.c, "d": H.d, "e": H.e, "f": H.f},
        "level": float(H(z0)),
        "conic": conic.record(),
        "conic_type": classify_conic(conic),
        "field_class": cls.tag, "case": cls.case, "detail": cls.detail,
        "parameter": cls.parameter,
    }
    return {"field": spec, "z0": z0.tolist()}, _dumps(record) + "\n", None


def _read_points(value: str) -> np.ndarray:
    if value.lstrip().startswith("["):
        pts = np.asarray(_load_json(value, "points"), dtype=float)
    else:
        try:
            pts = np.loadtxt(value, delimiter=None if not value.endswith(".csv") else ",",
                             comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise CommandError("points", f"cannot read points: {exc}") from exc
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise CommandError("points", "expected one point per row")
    return pts


def cmd_quadricfit(args):
    if args.points is not None:
        pts = _read_points(args.points)
        config = {"points": args.points, "count": len(pts)}
    else:
        spec, body = _body(args, "body")
        plane = _load_json(_required(args, "plane"), "plane")
        try:
            o, u, v = (np.asarray(plane[k], dtype=float) for k in ("point", "u", "v"))
        except (KeyError, TypeError) as exc:
            raise CommandError("plane", "needs keys point, u and v") from exc
        for name, vec in (("point", o), ("u", u), ("v", v)):
            if vec.shape != (body.dim,):
                raise CommandError(f"plane.{name}", f"expected length {body.dim}")
        pts = planar_section(body, o, u, v)
        config = {"body": spec, "plane": {"point": o.tolist(), "u": u.tolist(), "v": v.tolist()}}
    fit = fit_quadric(pts)
    tol = args.tol if args.tol is not None else QUADRIC_TOL
    record = {"quadric": fit.quadric.record(), "residual": fit.residual,
              "degenerate": fit.degenerate, "is_quadric": fit.is_quadric(tol), "tol": tol,
              "points": len(pts)}
    if fit.quadric.dim == 2:
        record["conic_type"] = classify_conic(fit.quadric)
    return config, _dumps(record) + "\n", None


COMMANDS = {
    "simulate": cmd_simulate,
    "projectivity": cmd_projectivity,
    "blmetric": cmd_blmetric,
    "phasecurve": cmd_phasecurve,
    "quadricfit": cmd_quadricfit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minkbill", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"minkbill {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("simulate", help="iterate a billiard orbit")
    common(p)
    p.add_argument("--table", help="table body spec (JSON or file)")
    p.add_argument("--body", help="dual body spec for the Minkowski law")
    p.add_argument("--law", choices=["minkowski", "projective", "standard"], default="minkowski")
    p.add_argument("--metric", help="Gram matrix for projective metric normals")
    p.add_argument("--q0", help="start point, projected radially to the boundary")
    p.add_argument("--v0", help="initial velocity, pointing into the table")
    p.add_argument("--n", type=int, default=10, help="number of bounces")

    p = sub.add_parser("projectivity", help="projectivity defect sweep and verdict")
    common(p)
    p.add_argument("--body", help="body spec, or first patch spec with --body2")
    p.add_argument("--body2", help="second patch spec (two-germ mode)")
    p.add_argument("--alpha-grid", type=int, help="number of directions")
    p.add_argument("--samples", type=int, help="chord pairs per direction")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--cone", type=float, default=0.2, help="cone half-angle (two-germ mode)")
    p.add_argument("--integrator", choices=["mc", "cubature"], default="cubature")
    p.add_argument("--bl-samples", type=int, default=2_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strict", action="store_true", help="exit 1 on a negative verdict")

    p = sub.add_parser("blmetric", help="Binet-Legendre matrix of a body")
    common(p)
    p.add_argument("--body")
    p.add_argument("--integrator", choices=["mc", "cubature"], default="cubature")
    p.add_argument("--samples", dest="bl_samples", type=int, default=2_000_000)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("phasecurve", help="phase conic of a linear planar field")
    common(p)
    p.add_argument("--field", help='field spec {"M": [[..],[..]], "b": [..]}')
    p.add_argument("--z0", help="point on the orbit")

    p = sub.add_parser("quadricfit", help="fit a quadric to points or a plane section")
    common(p)
    p.add_argument("--points", help="points file (whitespace or .csv) or inline JSON list")
    p.add_argument("--body")
    p.add_argument("--plane", help='{"point": [..], "u": [..], "v": [..]}')
    p.add_argument("--tol", type=float)
    return parser


def _error(field: str, exc: Exception) -> int:
    record = {"error": type(exc).__name__, "field": field, "message": str(exc)}
    sys.stderr.write(_dumps(record) + "\n")
    return 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
    except CommandError as exc:
        return _error(exc.field, exc)
    except SpecError as exc:
        return _error(exc.field, exc)
    except (GeometryError, ValueError, np.linalg.LinAlgError) as exc:
        return _error(getattr(exc, "field", args.command), exc)
    config, text, summary, *rest = result
    status = rest[0] if rest else 0
    output = _header(args.command, config, args.seed) + text
    if args.out:
        Path(args.out).write_text(output)
        if summary:
            print(summary)
    else:
        sys.stdout.write(output)
        if summary:
            print(summary if summary.startswith("#") else "# " + summary)
    return status


if __name__ == "__main__":
    sys.exit(main())
