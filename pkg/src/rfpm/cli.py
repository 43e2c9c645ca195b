"""Command-line surface for the toolkit.

Every command writes its outputs atomically and drops a run manifest
(``<out>.manifest.json``) recording the full argument vector plus the
interpretation flags of this build; data files reference the manifest by
name. ``rerun --manifest`` replays a manifest and reproduces the outputs
byte for byte (timestamp aside). All floats are printed with 17
significant digits so files round-trip exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .field import (
    FieldConvention,
    load_field,
    sample_field,
    save_field,
)
from .gla import (
    AnnealSchedule,
    OptimizerSpec,
    estimate_mean_gla,
    estimate_tail,
    run_optimizer,
)
from .lattice import ORIGIN, BoxSpec, GridSpec
from .polygon import (
    check_polygon_invariants,
    polygon_svg,
    polygon_trace_lines,
    run_construction,
)
from .potts import (
    BoundaryCondition,
    GibbsParams,
    GroundStateParams,
    MCParams,
    exact_gibbs,
    free,
    ground_state,
    magnetization,
    origin_occupation,
    wired,
)
from .scaling import (
    ScalingSeries,
    correlation_length,
    fit_power_exponent,
    theorem1_experiment,
    theorem2_experiment,
)

INTERPRETATION_FLAGS = {
    "field_convention_default": "unit-variance field, strength enters as eps*h",
    "color_range": "alpha runs over 0..q-1",
    "field_support": "field applied at every site of the box",
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _atomic_write(path: str, text: str) -> None:
    dirname = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(dirname, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _manifest_path(out_base: str) -> str:
    return out_base + ".manifest.json"


def _write_manifest(out_base: str, command: str, argv: list[str], parameters: dict) -> str:
    path = _manifest_path(out_base)
    doc = {
        "command": command,
        "argv": list(argv),
        "parameters": {k: v for k, v in sorted(parameters.items())},
        "interpretation_flags": INTERPRETATION_FLAGS,
        "tool_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return os.path.basename(path)


def _manifest_header(manifest_name: str) -> str:
    return f"# manifest: {manifest_name}\n"


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("RFPM_THREADS")
    return int(env) if env else 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_bc(text: str) -> BoundaryCondition:
    if text == "free":
        return free()
    if text == "wired":
        return wired(0)
    if text.startswith("wired:"):
        return wired(int(text.split(":", 1)[1]))
    raise ValueError(f"bad boundary condition {text!r}; use free, wired, or wired:<color>")


def _parse_spec(args) -> BoxSpec | GridSpec:
    if getattr(args, "grid", None):
        nx, ny = (int(t) for t in args.grid.lower().split("x"))
        return GridSpec(nx, ny)
    return BoxSpec(args.N)


def _conv(args) -> FieldConvention:
    return FieldConvention.from_short(args.convention)


def _optimizer(args) -> OptimizerSpec:
    return OptimizerSpec(
        method=args.method,
        max_size=getattr(args, "max_size", 8),
        schedule=AnnealSchedule(
            t0=getattr(args, "t0", 1.0),
            tend=getattr(args, "tend", 0.02),
            sweeps=getattr(args, "sweeps", 20000),
        ),
        steps=getattr(args, "steps", None),
    )


def _gla_csv_row(seed, spec, q, eps, res) -> str:
    n = spec.N if isinstance(spec, BoxSpec) else -1
    return ",".join(
        [
            str(seed), str(n), str(q), _fmt(float(eps)), res.method,
            _fmt(res.score), str(res.animal.size), str(res.animal.boundary_size),
            str(res.evaluations),
        ]
    )


_GLA_CSV_HEADER = "seed,N,q,eps,method,score,animal_size,boundary,evaluations"


# ---------------------------------------------------------------------------
# plot emission


def emit_plot_data(series: ScalingSeries, fit, path_base: str, x_map="log", y_map="log",
                   manifest_name: str = "") -> None:
    """CSV of raw+transformed points and a hand-rolled SVG with the fit line."""
    from .scaling import _resolve_map

    if not series.points:
        raise ValueError("refusing to plot an empty series")
    fx, fy = _resolve_map(x_map), _resolve_map(y_map)
    rows = ["x,y,yerr,tx,ty,fit_ty"]
    pts = []
    for x, y, yerr in series.points:
        tx, ty = fx(x), fy(y)
        fit_ty = fit.intercept + fit.slope * tx if fit else float("nan")
        pts.append((tx, ty, yerr, fit_ty))
        rows.append(
            ",".join([_fmt(float(x)), _fmt(float(y)), _fmt(float(yerr)),
                      _fmt(tx), _fmt(ty), _fmt(fit_ty)])
        )
    header = _manifest_header(manifest_name) if manifest_name else ""
    _atomic_write(path_base + ".points.csv", header + "\n".join(rows) + "\n")
    _atomic_write(path_base + ".plot.svg", _series_svg(pts, fit))


def _series_svg(pts, fit, width=640, height=480, pad=60) -> str:
    txs = [p[0] for p in pts]
    tys = [p[1] for p in pts] + [p[3] for p in pts if math.isfinite(p[3])]
    x0, x1 = min(txs), max(txs)
    y0, y1 = min(tys), max(tys)
    xr = (x1 - x0) or 1.0
    yr = (y1 - y0) or 1.0

    def sx(v):
        return pad + (v - x0) / xr * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / yr * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
        f'height="{height - 2 * pad}" fill="none" stroke="black"/>',
    ]
    if fit is not None:
        xa, xb = min(txs), max(txs)
        ya = fit.intercept + fit.slope * xa
        yb = fit.intercept + fit.slope * xb
        parts.append(
            f'<line x1="{sx(xa):.2f}" y1="{sy(ya):.2f}" x2="{sx(xb):.2f}" '
            f'y2="{sy(yb):.2f}" stroke="steelblue" stroke-width="1.5"/>'
        )
    for tx, ty, yerr, _ in pts:
        if yerr > 0:
            parts.append(
                f'<line x1="{sx(tx):.2f}" y1="{sy(ty - yerr):.2f}" '
                f'x2="{sx(tx):.2f}" y2="{sy(ty + yerr):.2f}" stroke="crimson"/>'
            )
        parts.append(
            f'<circle cx="{sx(tx):.2f}" cy="{sy(ty):.2f}" r="3" fill="crimson"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_field_gen(args, argv):
    spec = BoxSpec(args.N)
    f = sample_field(spec, args.q, args.eps, args.seed, _conv(args))
    save_field(f, args.out)
    _write_manifest(args.out, "field-gen", argv, dict(
        N=args.N, q=args.q, eps=args.eps, seed=args.seed, convention=args.convention,
    ))
    return 0


def _load_or_make_field(args):
    if getattr(args, "field", None):
        return load_field(args.field)
    spec = _parse_spec(args)
    return sample_field(spec, args.q, args.eps, args.field_seed, _conv(args))


def _cmd_gla_exact(args, argv):
    f = load_field(args.field)
    res = run_optimizer(f, OptimizerSpec(method="exact", max_size=args.max_size))
    line = _gla_csv_row(f.seed, f.spec, f.q, f.epsilon, res)
    print(line)
    if args.out:
        name = _write_manifest(args.out, "gla-exact", argv, dict(
            field=args.field, max_size=args.max_size))
        _atomic_write(args.out, _manifest_header(name) + _GLA_CSV_HEADER + "\n" + line + "\n")
    return 0


def _cmd_gla_heur(args, argv):
    f = load_field(args.field)
    res = run_optimizer(f, _optimizer(args), seed=args.seed)
    line = _gla_csv_row(f.seed, f.spec, f.q, f.epsilon, res)
    print(line)
    if args.out:
        name = _write_manifest(args.out, "gla-heur", argv, dict(
            field=args.field, method=args.method, seed=args.seed))
        _atomic_write(args.out, _manifest_header(name) + _GLA_CSV_HEADER + "\n" + line + "\n")
    return 0


def _cmd_gla_scan(args, argv):
    spec = BoxSpec(args.N)
    opt = _optimizer(args)
    name = _write_manifest(args.out, "gla-scan", argv, dict(
        N=args.N, q=args.q, eps=args.eps, convention=args.convention,
        samples=args.samples, seed=args.seed, method=args.method,
    ))
    rows = [_GLA_CSV_HEADER]
    scores = []
    for i in range(args.samples):
        seed = args.seed + i
        f = sample_field(spec, args.q, args.eps, seed, _conv(args))
        res = run_optimizer(f, opt, seed=seed)
        scores.append(res.score)
        rows.append(_gla_csv_row(seed, spec, args.q, args.eps, res))
    _atomic_write(args.out + ".csv", _manifest_header(name) + "\n".join(rows) + "\n")
    arr = np.array(scores)
    summary = {
        "manifest": name,
        "mean": float(arr.mean()),
        "stderr": float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0,
        "samples": args.samples,
    }
    _atomic_write(args.out + ".summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_tail(args, argv):
    spec = BoxSpec(args.N)
    u_list = [float(t) for t in args.u.split(",")]
    name = _write_manifest(args.out, "tail", argv, dict(
        N=args.N, q=args.q, eps=args.eps, convention=args.convention,
        u=args.u, samples=args.samples, seed=args.seed, method=args.method,
    ))
    tails = estimate_tail(
        spec, args.q, args.eps, _conv(args), u_list, args.samples,
        _optimizer(args), args.seed,
    )
    rows = ["u,exceed_count,samples,fraction,bound,center"]
    for t in tails:
        rows.append(",".join([
            _fmt(t.u), str(t.exceed_count), str(t.samples),
            _fmt(t.fraction), _fmt(t.bound), _fmt(t.center),
        ]))
    _atomic_write(args.out + ".csv", _manifest_header(name) + "\n".join(rows) + "\n")
    summary = {
        "manifest": name,
        "center": tails[0].center if tails else None,
        "tails": [
            {"u": t.u, "fraction": t.fraction, "bound": t.bound} for t in tails
        ],
    }
    _atomic_write(args.out + ".summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_polygon(args, argv):
    spec = BoxSpec(args.N)
    f = sample_field(spec, args.q, args.eps, args.field_seed, _conv(args))
    records = run_construction(
        f, max_level=args.levels, variant=args.variant, seed=args.seed
    )
    for r in records:
        check_polygon_invariants(r.polygon)
    name = _write_manifest(args.out, "polygon", argv, dict(
        N=args.N, q=args.q, eps=args.eps, levels=args.levels,
        variant=args.variant, seed=args.seed, field_seed=args.field_seed,
    ))
    _atomic_write(
        args.out + ".trace",
        _manifest_header(name) + "\n".join(polygon_trace_lines(records)) + "\n",
    )
    _atomic_write(args.out + ".svg", polygon_svg(records[-1].polygon))
    return 0


def _cmd_gibbs_exact(args, argv):
    spec = _parse_spec(args)
    f = sample_field(spec, args.q, args.eps, args.field_seed, _conv(args))
    bc = _parse_bc(args.bc)
    table = exact_gibbs(spec, args.q, f, GibbsParams(beta=args.beta, epsilon=args.eps), bc)
    site = ORIGIN if isinstance(spec, BoxSpec) else spec.sites()[0]
    name = _write_manifest(args.out, "gibbs-exact", argv, dict(
        q=args.q, eps=args.eps, beta=args.beta, bc=args.bc, field_seed=args.field_seed,
    ))
    doc = {
        "manifest": name,
        "n_states": int(table.states.shape[0]),
        "marginal_site": list(site),
        "marginal": [float(p) for p in table.marginal(site)],
        "min_energy": float(table.energies.min()),
    }
    _atomic_write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_mc(args, argv):
    spec = _parse_spec(args)
    f = sample_field(spec, args.q, args.eps, args.field_seed, _conv(args))
    bc = _parse_bc(args.bc)
    mc = MCParams(sweeps=args.sweeps, burnin=args.burnin)
    site = ORIGIN if isinstance(spec, BoxSpec) else spec.sites()[0]
    p = origin_occupation(spec, args.q, f, args.beta, args.eps, bc, mc, args.seed)
    name = _write_manifest(args.out, "mc", argv, dict(
        q=args.q, eps=args.eps, beta=args.beta, bc=args.bc,
        sweeps=args.sweeps, burnin=args.burnin, seed=args.seed,
        field_seed=args.field_seed,
    ))
    doc = {"manifest": name, "site": list(site), "occupation0": p}
    _atomic_write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_ground_state(args, argv):
    spec = BoxSpec(args.N)
    f = sample_field(spec, args.q, args.eps, args.field_seed, _conv(args))
    bc = _parse_bc(args.bc)
    config, e = ground_state(
        spec, args.q, f, args.eps, bc, method=args.method, seed=args.seed
    )
    name = _write_manifest(args.out, "ground-state", argv, dict(
        N=args.N, q=args.q, eps=args.eps, bc=args.bc, method=args.method,
        seed=args.seed, field_seed=args.field_seed,
    ))
    side = spec.side
    lines = [
        f"# manifest: {name}",
        f"RFPM-SPINS v1 N={args.N} q={args.q} bc={args.bc} energy={e:.17g}",
    ]
    for row in range(side):
        digits = config.spins[row * side : (row + 1) * side]
        lines.append("".join(str(int(d)) for d in digits))
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_magnetization(args, argv):
    mc = MCParams(sweeps=args.sweeps, burnin=args.burnin,
                  gs_params=GroundStateParams(sweeps=args.gs_sweeps))
    m, se = magnetization(
        BoxSpec(args.N), args.q, args.eps, args.beta, args.samples, mc, args.seed,
        convention=_conv(args),
    )
    name = _write_manifest(args.out, "magnetization", argv, dict(
        N=args.N, q=args.q, eps=args.eps, beta=str(args.beta),
        samples=args.samples, seed=args.seed,
    ))
    doc = {"manifest": name, "m": m, "stderr": se}
    _atomic_write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_corrlen(args, argv):
    mc = MCParams(sweeps=args.sweeps, burnin=args.burnin,
                  gs_params=GroundStateParams(sweeps=args.gs_sweeps))
    res = correlation_length(
        args.eps, args.q, args.threshold, args.beta,
        (args.n_start, args.n_max), (args.samples, args.seed), mc_params=mc,
        convention=_conv(args),
    )
    name = _write_manifest(args.out, "corrlen", argv, dict(
        eps=args.eps, q=args.q, threshold=args.threshold, beta=str(args.beta),
        n_start=args.n_start, n_max=args.n_max, samples=args.samples, seed=args.seed,
    ))
    doc = {
        "manifest": name,
        "found": res.found,
        "L": res.L,
        "bracket": list(res.bracket),
        "m_at_L": res.m_at_L,
        "evaluations": [[n, m, se] for n, m, se in res.evaluations],
    }
    _atomic_write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def _series_csv(series: ScalingSeries, manifest_name: str) -> str:
    rows = ["x,y,yerr"]
    for x, y, yerr in series.points:
        rows.append(",".join([_fmt(float(x)), _fmt(float(y)), _fmt(float(yerr))]))
    return _manifest_header(manifest_name) + "\n".join(rows) + "\n"


def _fit_doc(fit, fit_error, manifest_name):
    doc = {"manifest": manifest_name, "fit_error": fit_error}
    if fit is not None:
        doc.update(
            slope=fit.slope, intercept=fit.intercept,
            stderr_slope=fit.stderr_slope, residuals=list(fit.residuals),
        )
    return doc


def _cmd_thm2(args, argv):
    n_list = [int(t) for t in args.N.split(",")]
    result = theorem2_experiment(
        n_list, args.q, args.eps, _conv(args), _optimizer(args),
        args.samples, args.seed,
    )
    name = _write_manifest(args.out, "thm2", argv, dict(
        N=args.N, q=args.q, eps=args.eps, convention=args.convention,
        samples=args.samples, seed=args.seed, method=args.method,
    ))
    _atomic_write(args.out + ".series.csv", _series_csv(result.series, name))
    _atomic_write(
        args.out + ".fit.json",
        json.dumps(_fit_doc(result.fit, result.fit_error, name), indent=2, sort_keys=True) + "\n",
    )
    if result.fit is not None:
        emit_plot_data(result.series, result.fit, args.out,
                       x_map="loglog", y_map="log", manifest_name=name)
    return 0


def _cmd_thm1(args, argv):
    eps_list = [float(t) for t in args.eps.split(",")]
    mc = MCParams(gs_params=GroundStateParams(sweeps=args.gs_sweeps))
    result = theorem1_experiment(
        eps_list, args.q, args.threshold, math.inf,
        (args.n_start, args.n_max), (args.samples, args.seed), mc_params=mc,
        convention=_conv(args),
    )
    name = _write_manifest(args.out, "thm1", argv, dict(
        eps=args.eps, q=args.q, threshold=args.threshold,
        n_start=args.n_start, n_max=args.n_max,
        samples=args.samples, seed=args.seed,
    ))
    _atomic_write(args.out + ".series.csv", _series_csv(result.series, name))
    doc = _fit_doc(result.fit, result.fit_error, name)
    doc["lengths"] = [
        {"eps": r.epsilon, "found": r.found, "L": r.L, "bracket": list(r.bracket)}
        for r in result.details
    ]
    _atomic_write(args.out + ".fit.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if result.fit is not None:
        emit_plot_data(result.series, result.fit, args.out,
                       x_map="identity", y_map="loglog", manifest_name=name)
    return 0


def _cmd_fit(args, argv):
    points = []
    with open(args.series) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("x,"):
                continue
            x, y, yerr = (float(t) for t in line.split(",")[:3])
            points.append((x, y, yerr))
    series = ScalingSeries(points=tuple(sorted(points)))
    fit = fit_power_exponent(series, x_map=args.x_map, y_map=args.y_map)
    name = _write_manifest(args.out, "fit", argv, dict(
        series=args.series, x_map=args.x_map, y_map=args.y_map,
    ))
    _atomic_write(
        args.out, json.dumps(_fit_doc(fit, None, name), indent=2, sort_keys=True) + "\n"
    )
    emit_plot_data(series, fit, args.out, x_map=args.x_map, y_map=args.y_map,
                   manifest_name=name)
    return 0


def _cmd_rerun(args, argv):
    with open(args.manifest) as fh:
        doc = json.load(fh)
    return main(doc["argv"])


# ---------------------------------------------------------------------------
# parser assembly


def _add_common_field_args(p, with_field_seed=True):
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--convention", choices=["unit", "literal"], default="unit")
    if with_field_seed:
        p.add_argument("--field-seed", type=int, default=0)


def _add_optimizer_args(p, default_method="anneal"):
    p.add_argument("--method", choices=["exact", "greedy", "anneal"], default=default_method)
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--tend", type=float, default=0.02)
    p.add_argument("--sweeps", type=int, default=20000)


def build_parser() -> _Parser:
    parser = _Parser(prog="rfpm")
    parser.add_argument("--threads", type=int, default=None)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("field-gen")
    p.add_argument("--N", type=int, required=True)
    _add_common_field_args(p, with_field_seed=False)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_field_gen)

    p = sub.add_parser("gla-exact")
    p.add_argument("--field", required=True)
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_gla_exact)

    p = sub.add_parser("gla-heur")
    p.add_argument("--field", required=True)
    _add_optimizer_args(p, default_method="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_gla_heur)

    p = sub.add_parser("gla-scan")
    p.add_argument("--N", type=int, required=True)
    _add_common_field_args(p, with_field_seed=False)
    _add_optimizer_args(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gla_scan)

    p = sub.add_parser("tail")
    p.add_argument("--N", type=int, required=True)
    _add_common_field_args(p, with_field_seed=False)
    _add_optimizer_args(p, default_method="greedy")
    p.add_argument("--u", required=True, help="comma-separated thresholds")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_tail)

    p = sub.add_parser("polygon")
    p.add_argument("--N", type=int, required=True)
    _add_common_field_args(p)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--variant", choices=["deterministic", "stochastic"],
                   default="deterministic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_polygon)

    p = sub.add_parser("gibbs-exact")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--grid", default=None, help="WxH grid instead of a box")
    _add_common_field_args(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--bc", default="free")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gibbs_exact)

    p = sub.add_parser("mc")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--grid", default=None)
    _add_common_field_args(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--bc", default="free")
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--burnin", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_mc)

    p = sub.add_parser("ground-state")
    p.add_argument("--N", type=int, required=True)
    _add_common_field_args(p)
    p.add_argument("--bc", default="free")
    p.add_argument("--method", choices=["exhaustive", "anneal", "icm"], default="anneal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_ground_state)

    p = sub.add_parser("magnetization")
    p.add_argument("--N", type=int, required=True)
    _add_common_field_args(p, with_field_seed=False)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--burnin", type=int, default=500)
    p.add_argument("--gs-sweeps", type=int, default=150)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_magnetization)

    p = sub.add_parser("corrlen")
    _add_common_field_args(p, with_field_seed=False)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=math.inf)
    p.add_argument("--n-start", type=int, default=1)
    p.add_argument("--n-max", type=int, default=32)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--burnin", type=int, default=500)
    p.add_argument("--gs-sweeps", type=int, default=150)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_corrlen)

    p = sub.add_parser("thm2")
    p.add_argument("--N", required=True, help="comma-separated box sizes")
    _add_common_field_args(p, with_field_seed=False)
    _add_optimizer_args(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_thm2)

    p = sub.add_parser("thm1")
    p.add_argument("--eps", required=True, help="comma-separated strengths")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--convention", choices=["unit", "literal"], default="unit")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--n-start", type=int, default=1)
    p.add_argument("--n-max", type=int, default=32)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--gs-sweeps", type=int, default=150)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_thm1)

    p = sub.add_parser("fit")
    p.add_argument("--series", required=True)
    p.add_argument("--x-map", default="log")
    p.add_argument("--y-map", default="log")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("rerun")
    p.add_argument("--manifest", required=True)
    p.set_defaults(fn=_cmd_rerun)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args, argv)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"rfpm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
