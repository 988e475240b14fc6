"""Command-line front end: experiment drivers writing CSV, JSON, and SVG.

Five subcommands cover the package's capabilities:

  convergence   error-vs-resolution sweeps with log-log slope summaries
  reconstruct   single-grid reconstruction dump (JSON cells, optional SVG)
  stability     Monte-Carlo inverse-stability constants as JSON
  pbdw          state-estimation error/bound tables as CSV
  cs            certified sparse-recovery trials as CSV

Every artifact embeds the full effective configuration (defaults resolved),
so a run is reproducible from its output alone.  CSV files are UTF-8 with LF
line endings: '#'-prefixed comment lines carry configuration and summaries,
one header row precedes the data, and floats are written with 17 significant
digits so downstream fits do not depend on the reader's parser.  Exit codes:
0 success, 2 configuration error, 3 numerical instability, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import HalfPlane, Point, line_segment_in_box
from .measurements import (
    Disk,
    Grid,
    HalfPlaneShape,
    NoiseModel,
    RotatedSquare,
    add_noise,
    lq_error,
    measure,
)
from .pbdw import (
    UnstableConfiguration,
    best_fit,
    e_n,
    generalized_interpolation,
    mu_stability,
    norm_constants,
    random_problem,
    riesz_norm,
)
from .recon import reconstruct
from .sparse import CertificationError, certify, decode, l1_tail, rip1_lower
from .stability import DegeneratePairError, canonical_pair, estimate_C0, ratio, verify_alpha

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_IO = 4

METHODS = ("pc", "l1", "li", "licc")

# Solver slack added to the theoretical estimation bound before flagging it.
BOUND_SLACK = 1e-8


def _fmt(x: float) -> str:
    """Float to 17 significant digits (full round-trip precision)."""
    return format(float(x), ".17g")


def _fmtbool(b: bool) -> str:
    return "true" if b else "false"


@dataclass(frozen=True)
class RunConfig:
    """One command invocation: subcommand name plus its resolved parameters.

    params holds only JSON-native values (the noise order p is kept as the
    string '1', '2', or 'inf'), so the config serializes losslessly and a
    run can be reproduced from the echo embedded in its artifact.
    """

    command: str
    params: dict

    def as_dict(self) -> dict:
        return {"command": self.command, "params": dict(self.params)}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))


def _noise_p(text: str) -> float:
    if text == "inf":
        return math.inf
    if text in ("1", "2"):
        return float(text)
    raise ValueError("noise order p must be 1, 2, or inf")


def _build_shape(p: dict):
    kind = p["shape"]
    if kind == "disk":
        return Disk((p["cx"], p["cy"]), p["r"])
    if kind == "square":
        return RotatedSquare((p["cx"], p["cy"]), p["half_width"], p["angle"])
    if kind == "halfplane":
        return HalfPlaneShape(HalfPlane(p["theta"], p["c"], Point(0.5, 0.5)))
    raise ValueError(f"unknown shape: {kind}")


def _maybe_noisy(field, p: dict, seed: int):
    if p["noise_eps"] == 0.0:
        return field
    model = NoiseModel(_noise_p(p["noise_p"]), p["noise_eps"], seed)
    noisy, _ = add_noise(field, model)
    return noisy


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------


def _slope(points: list[tuple[float, float]]) -> float:
    """Least-squares slope of log(err) against log(h) over the finest grids.

    Uses the three largest L (smallest h); with fewer than three points all
    of them enter the fit.  Nonpositive errors make the fit undefined (nan).
    """
    pts = sorted(points)[: min(3, len(points))]
    if any(e <= 0.0 for _, e in pts) or len(pts) < 2:
        return math.nan
    hs = np.log([h for h, _ in pts])
    es = np.log([e for _, e in pts])
    return float(np.polyfit(hs, es, 1)[0])


def cmd_convergence(config: RunConfig) -> str:
    """Error-vs-resolution sweep over methods and grid sizes, as CSV text.

    One data row per (method, L), grouped by L so each grid is measured
    once; noise (when enabled) is drawn once per L with seed seed + L and
    shared by all methods.  Appended '# slope' comment rows carry the
    per-method log-log slope over the three finest grids.
    """
    p = config.params
    shape = _build_shape(p)
    methods = p["methods"]
    rows: list[str] = []
    errs: dict[str, list[tuple[float, float]]] = {m: [] for m in methods}
    for L in p["L"]:
        grid = Grid(L)
        field = _maybe_noisy(measure(shape, grid), p, p["seed"] + L)
        for mth in methods:
            t0 = time.perf_counter()
            rec = reconstruct(field, mth, p["weight"])
            dt = time.perf_counter() - t0
            err = lq_error(shape, rec, p["q"])
            errs[mth].append((grid.h, err))
            rows.append(
                ",".join(
                    (
                        mth,
                        str(L),
                        _fmt(grid.h),
                        _fmt(p["q"]),
                        p["noise_p"],
                        _fmt(p["noise_eps"]),
                        str(p["seed"]),
                        _fmt(err),
                        _fmt(dt),
                    )
                )
            )
    lines = [
        "# shaperec convergence",
        f"# config: {config.to_json()}",
        "method,L,h,q,noise_p,noise_eps,seed,lq_error,fit_seconds",
    ]
    lines.extend(rows)
    lines.append("# slope: log-log fit of lq_error against h over the three finest L")
    for mth in methods:
        lines.append(f"# slope,{mth},{_fmt(_slope(errs[mth]))}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------

RECONSTRUCT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["grid", "config", "cells", "error", "interface_stats"],
    "properties": {
        "grid": {
            "type": "object",
            "required": ["L", "h"],
            "properties": {"L": {"type": "integer", "minimum": 1}, "h": {"type": "number"}},
        },
        "config": {"type": "object"},
        "cells": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["i", "j", "kind"],
                "properties": {
                    "i": {"type": "integer", "minimum": 1},
                    "j": {"type": "integer", "minimum": 1},
                    "kind": {"enum": ["constant", "interface"]},
                    "value": {"type": "number"},
                    "theta": {"type": "number"},
                    "c": {"type": "number"},
                },
                "oneOf": [
                    {"properties": {"kind": {"const": "constant"}}, "required": ["value"]},
                    {"properties": {"kind": {"const": "interface"}}, "required": ["theta", "c"]},
                ],
            },
        },
        "error": {
            "type": "object",
            "required": ["l1", "l2", "l1_inner", "l2_inner"],
            "properties": {k: {"type": "number"} for k in ("l1", "l2", "l1_inner", "l2_inner")},
        },
        "interface_stats": {
            "type": "object",
            "required": ["count", "midpoint_inside", "midpoint_outside", "mean_signed_distance"],
            "properties": {
                "count": {"type": "integer", "minimum": 0},
                "midpoint_inside": {"type": "integer", "minimum": 0},
                "midpoint_outside": {"type": "integer", "minimum": 0},
                "mean_signed_distance": {"type": "number"},
            },
        },
    },
}


def _svg_scene(shape, rec) -> str:
    """SVG 1.1 document: light grid, true boundary, fitted interface segments.

    Geometry is emitted in unit-square coordinates (viewBox 0 0 1 1); the
    y axis is flipped (SVG y grows downward) so the picture matches the
    mathematical orientation.  Interface segments are each cell's fitted
    line clipped to the cell box.
    """
    L = rec.grid.L
    h = rec.grid.h
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        'viewBox="0 0 1 1" width="640" height="640">',
        '<rect x="0" y="0" width="1" height="1" fill="#ffffff"/>',
    ]
    grid_lines = []
    for k in range(L + 1):
        t = _fmt(k * h)
        grid_lines.append(f'<line x1="{t}" y1="0" x2="{t}" y2="1"/>')
        grid_lines.append(f'<line x1="0" y1="{t}" x2="1" y2="{t}"/>')
    parts.append('<g stroke="#dddddd" stroke-width="0.0012">')
    parts.extend(grid_lines)
    parts.append("</g>")
    bx, by = shape.boundary_polyline(720)
    if len(bx):
        pts = " ".join(f"{_fmt(x)},{_fmt(1.0 - y)}" for x, y in zip(bx, by))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="#2b6cb0" stroke-width="0.004"/>'
        )
    parts.append('<g stroke="#c53030" stroke-width="0.005" stroke-linecap="round">')
    for i, j, cr in rec.interface_cells():
        center = Point((i - 0.5) * h, (j - 0.5) * h)
        seg = line_segment_in_box(cr.hp, center, h)
        if seg is None:
            continue
        (x0, y0), (x1, y1) = seg
        parts.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(1.0 - y0)}" '
            f'x2="{_fmt(x1)}" y2="{_fmt(1.0 - y1)}"/>'
        )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_reconstruct(config: RunConfig) -> tuple[str, str | None]:
    """Single-grid reconstruction as a JSON document plus an optional SVG.

    The JSON lists every cell (constants by value, interfaces by angle and
    offset relative to the cell center), L1/L2 errors over all cells and
    over inner cells only, and sign statistics of the signed distance from
    each fitted segment's midpoint to the true boundary (negative means
    inside the shape).
    """
    p = config.params
    shape = _build_shape(p)
    grid = Grid(p["L"])
    field = _maybe_noisy(measure(shape, grid), p, p["seed"])
    rec = reconstruct(field, p["method"], p["weight"])
    h = grid.h
    cells = []
    for i in range(1, grid.L + 1):
        for j in range(1, grid.L + 1):
            cr = rec.cell(i, j)
            if cr.kind == "constant":
                cells.append({"i": i, "j": j, "kind": "constant", "value": cr.value})
            else:
                center = Point((i - 0.5) * h, (j - 0.5) * h)
                cells.append(
                    {
                        "i": i,
                        "j": j,
                        "kind": "interface",
                        "theta": cr.hp.theta,
                        "c": cr.hp.offset_at(center),
                    }
                )
    inside = outside = 0
    dists: list[float] = []
    for i, j, cr in rec.interface_cells():
        center = Point((i - 0.5) * h, (j - 0.5) * h)
        seg = line_segment_in_box(cr.hp, center, h)
        if seg is None:
            continue
        mx = 0.5 * (seg[0].x + seg[1].x)
        my = 0.5 * (seg[0].y + seg[1].y)
        d = float(shape.signed_distance(mx, my))
        dists.append(d)
        if d < 0.0:
            inside += 1
        else:
            outside += 1
    doc = {
        "grid": {"L": grid.L, "h": h},
        "config": config.as_dict(),
        "cells": cells,
        "error": {
            "l1": lq_error(shape, rec, 1.0),
            "l2": lq_error(shape, rec, 2.0),
            "l1_inner": lq_error(shape, rec, 1.0, inner_only=True),
            "l2_inner": lq_error(shape, rec, 2.0, inner_only=True),
        },
        "interface_stats": {
            "count": inside + outside,
            "midpoint_inside": inside,
            "midpoint_outside": outside,
            "mean_signed_distance": float(np.mean(dists)) if dists else 0.0,
        },
    }
    svg = _svg_scene(shape, rec) if p["svg"] is not None else None
    return json.dumps(doc, indent=1) + "\n", svg


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------

STABILITY_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["C0_hat", "argmax_pair", "alpha_check", "samples", "seed", "h", "config"],
    "properties": {
        "C0_hat": {"type": "number"},
        "argmax_pair": {
            "type": "object",
            "required": ["theta1", "c1", "theta2", "c2"],
            "properties": {k: {"type": "number"} for k in ("theta1", "c1", "theta2", "c2")},
        },
        "alpha_check": {"type": "number"},
        "samples": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer"},
        "h": {"type": "number"},
        "config": {"type": "object"},
    },
}


def cmd_stability(config: RunConfig) -> str:
    """Monte-Carlo inverse-stability constants as a JSON document.

    C0_hat is the sampled maximum of the volume-to-measurement ratio (never
    below the injected extremal pair), argmax_pair the half-plane pair that
    attained it, and alpha_check the sampled maximum of the reciprocal
    quantity, which never exceeds 1.  With samples=0 both values come from
    the extremal pair alone.
    """
    p = config.params
    c0, best = estimate_C0(p["samples"], p["h"], p["seed"])
    a, b = best.pair
    if p["samples"] == 0:
        alpha = 1.0 / ratio(*canonical_pair(), p["h"]).ratio
    else:
        alpha = verify_alpha(p["samples"], p["h"], p["seed"])
    doc = {
        "C0_hat": c0,
        "argmax_pair": {"theta1": a.theta, "c1": a.c, "theta2": b.theta, "c2": b.c},
        "alpha_check": alpha,
        "samples": p["samples"],
        "seed": p["seed"],
        "h": p["h"],
        "config": config.as_dict(),
    }
    return json.dumps(doc, indent=1) + "\n"


# ---------------------------------------------------------------------------
# pbdw
# ---------------------------------------------------------------------------


def cmd_pbdw(config: RunConfig) -> str:
    """State-estimation trials as CSV text with two sections.

    Each trial draws a fresh random problem (seed seed + trial), one random
    state, and one noise vector of Euclidean norm noise_eta.  The main
    section reports both estimators' errors against the stability bound
    mu * (e_n + noise_W) plus a fixed solver slack; trials whose reduced
    space is unobservable are reported with status unstable-configuration
    and empty numeric fields instead of aborting the run.  The second
    section (after the '# norm-comparison' marker) compares the native
    stability constant with the product bound from the Euclidean data norm.
    """
    p = config.params
    rows: list[str] = []
    normrows: list[str] = []
    for t in range(p["trials"]):
        prob = random_problem(p["D"], p["m"], p["n"], p["seed"] + t)
        rng = np.random.default_rng([p["seed"], t])
        u = rng.standard_normal(p["D"])
        g = rng.standard_normal(p["m"])
        try:
            mu = mu_stability(prob)
        except UnstableConfiguration:
            rows.append(f"{t},,,,,,,,unstable-configuration")
            continue
        eta = np.zeros(p["m"])
        if p["noise_eta"] > 0.0:
            eta = g * (p["noise_eta"] / float(np.linalg.norm(g)))
        z = prob.meas @ u + eta
        en = e_n(prob, u)
        nw = riesz_norm(prob, eta)
        u_tilde, _ = best_fit(prob, z)
        u_star = generalized_interpolation(prob, z)
        eb = float(np.linalg.norm(u - u_tilde))
        eg = float(np.linalg.norm(u - u_star))
        bound = mu * (en + nw) + BOUND_SLACK
        rows.append(
            ",".join(
                (
                    str(t),
                    _fmt(mu),
                    _fmt(en),
                    _fmt(nw),
                    _fmt(eb),
                    _fmt(eg),
                    _fmtbool(eb <= bound),
                    _fmtbool(eg <= bound),
                    "ok",
                )
            )
        )
        tw = norm_constants(prob, "riesz")
        t2 = norm_constants(prob, "l2")
        normrows.append(
            ",".join(
                (
                    str(t),
                    _fmt(tw.mu),
                    _fmt(t2.alpha * t2.mu),
                    _fmtbool(tw.mu <= t2.alpha * t2.mu),
                )
            )
        )
    lines = [
        "# shaperec pbdw",
        f"# config: {config.to_json()}",
        "trial,mu,e_n,noise_W,err_bestfit,err_geninterp,bound_ok_bestfit,bound_ok_geninterp,status",
    ]
    lines.extend(rows)
    lines.append("# norm-comparison")
    lines.append("trial,mu_W,alpha2_mu2,inequality_ok")
    lines.extend(normrows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# cs
# ---------------------------------------------------------------------------


def cmd_cs(config: RunConfig) -> str:
    """Certified sparse-recovery trials as CSV text.

    Certifies a measurement matrix by seed sweep first (failure is a
    numerical-instability error), then per trial decodes one compressible
    vector (reported as e_n, err, iop_ratio rows) and one exactly sparse
    vector (counted as exact when the decode is bitwise equal).  Header
    comments carry the certified seed, its expansion deficit, and a sampled
    lower bound of the matrix's sparse ell_1 frame constant; '# summary'
    rows carry the worst ratio and the exact-recovery count.
    """
    p = config.params
    n = p["n"]
    level = p["l"] if p["l"] is not None else 2 * n
    mat, report, cseed = certify(
        p["m"], p["N"], p["d"], level, start_seed=p["seed"], max_tries=p["max_tries"]
    )
    rip = rip1_lower(mat, level, p["rip1_trials"], p["seed"])
    rng = np.random.default_rng(p["seed"])
    rows: list[str] = []
    worst = 0.0
    exact = 0
    for t in range(p["trials"]):
        while True:
            u = rng.standard_normal(p["N"]) * 10.0 ** rng.uniform(-3.0, math.log10(0.5))
            u[rng.choice(p["N"], size=n, replace=False)] += rng.standard_normal(n)
            tail = l1_tail(u, n)
            if tail > 0.0:
                break
        u_hat = decode(mat, mat.matvec(u), n)
        err = float(np.abs(u - u_hat).sum())
        ratio_t = err / tail
        worst = max(worst, ratio_t)
        rows.append(f"{t},{_fmt(tail)},{_fmt(err)},{_fmt(ratio_t)}")
        v = np.zeros(p["N"])
        v[rng.choice(p["N"], size=n, replace=False)] = rng.standard_normal(n)
        if np.array_equal(decode(mat, mat.matvec(v), n), v):
            exact += 1
    lines = [
        "# shaperec cs",
        f"# config: {config.to_json()}",
        f"# certified-seed,{cseed}",
        f"# eps-hat,{_fmt(report.eps_hat)}",
        f"# rip1-lower,{_fmt(rip)}",
        "trial,e_n,err,iop_ratio",
    ]
    lines.extend(rows)
    lines.append(f"# summary,max_iop_ratio,{_fmt(worst)}")
    lines.append(f"# summary,exact_sparse_recoveries,{exact},{p['trials']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def _add_shape_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--shape", choices=("disk", "square", "halfplane"), default="disk")
    ap.add_argument("--cx", type=float, default=0.53, help="disk/square center x")
    ap.add_argument("--cy", type=float, default=0.51, help="disk/square center y")
    ap.add_argument("--r", type=float, default=0.325, help="disk radius")
    ap.add_argument("--half-width", type=float, default=0.25, help="square half-width")
    ap.add_argument("--angle", type=float, default=0.0, help="square rotation angle")
    ap.add_argument("--theta", type=float, default=0.6, help="half-plane normal angle")
    ap.add_argument("--c", type=float, default=0.0, help="half-plane offset from (0.5, 0.5)")


def _add_noise_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--noise-p", choices=("1", "2", "inf"), default="inf")
    ap.add_argument("--noise-eps", type=float, default=0.0)


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _str_list(text: str) -> list[str]:
    return [tok for tok in text.split(",") if tok]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shaperec",
        description="Shape recovery experiments: reconstruction, stability, "
        "state estimation, and sparse recovery.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    pcv = sub.add_parser("convergence", help="error-vs-resolution sweep to CSV")
    _add_shape_args(pcv)
    _add_noise_args(pcv)
    pcv.add_argument("--L", type=_int_list, default=[16, 32, 64, 128, 256])
    pcv.add_argument("--methods", type=_str_list, default=list(METHODS))
    pcv.add_argument("--q", type=float, default=1.0)
    pcv.add_argument("--weight", type=float, default=100.0)
    pcv.add_argument("--seed", type=int, default=0)
    pcv.add_argument("--out", required=True)

    prc = sub.add_parser("reconstruct", help="single-grid reconstruction to JSON/SVG")
    _add_shape_args(prc)
    _add_noise_args(prc)
    prc.add_argument("--L", type=int, default=32)
    prc.add_argument("--method", choices=METHODS, default="licc")
    prc.add_argument("--weight", type=float, default=100.0)
    prc.add_argument("--seed", type=int, default=0)
    prc.add_argument("--out", required=True)
    prc.add_argument("--svg", default=None)

    pst = sub.add_parser("stability", help="inverse-stability constants to JSON")
    pst.add_argument("--samples", type=int, default=100000)
    pst.add_argument("--h", type=float, default=0.125)
    pst.add_argument("--seed", type=int, default=0)
    pst.add_argument("--out", required=True)

    ppb = sub.add_parser("pbdw", help="state-estimation trials to CSV")
    ppb.add_argument("--D", type=int, default=50)
    ppb.add_argument("--m", type=int, default=10)
    ppb.add_argument("--n", type=int, default=5)
    ppb.add_argument("--trials", type=int, default=100)
    ppb.add_argument("--noise-eta", type=float, default=0.01)
    ppb.add_argument("--seed", type=int, default=0)
    ppb.add_argument("--out", required=True)

    pcs = sub.add_parser("cs", help="certified sparse-recovery trials to CSV")
    pcs.add_argument("--m", type=int, default=12)
    pcs.add_argument("--N", type=int, default=16)
    pcs.add_argument("--d", type=int, default=3)
    pcs.add_argument("--n", type=int, default=2)
    pcs.add_argument("--l", type=int, default=None, help="certification set size (default 2n)")
    pcs.add_argument("--trials", type=int, default=1000)
    pcs.add_argument("--rip1-trials", type=int, default=20000)
    pcs.add_argument("--max-tries", type=int, default=1000)
    pcs.add_argument("--seed", type=int, default=0)
    pcs.add_argument("--out", required=True)

    return ap


_SHAPE_KEYS = ("shape", "cx", "cy", "r", "half_width", "angle", "theta", "c")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    """Namespace to RunConfig, with command-specific validation."""
    cmd = ns.command
    p: dict = {}
    if cmd == "convergence":
        for k in _SHAPE_KEYS:
            p[k] = getattr(ns, k)
        if not ns.L:
            raise ValueError("at least one grid size is required")
        for L in ns.L:
            if L < 1 or L & (L - 1) != 0:
                raise ValueError(f"grid sizes must be powers of two, got {L}")
        bad = [m for m in ns.methods if m not in METHODS]
        if bad or not ns.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")
        if ns.q < 1.0:
            raise ValueError("q must be >= 1")
        p.update(
            L=list(ns.L),
            methods=list(ns.methods),
            q=ns.q,
            weight=ns.weight,
            noise_p=ns.noise_p,
            noise_eps=ns.noise_eps,
            seed=ns.seed,
            out=ns.out,
        )
    elif cmd == "reconstruct":
        for k in _SHAPE_KEYS:
            p[k] = getattr(ns, k)
        p.update(
            L=ns.L,
            method=ns.method,
            weight=ns.weight,
            noise_p=ns.noise_p,
            noise_eps=ns.noise_eps,
            seed=ns.seed,
            out=ns.out,
            svg=ns.svg,
        )
    elif cmd == "stability":
        if ns.samples < 0:
            raise ValueError("samples must be nonnegative")
        if ns.h <= 0.0:
            raise ValueError("h must be positive")
        p.update(samples=ns.samples, h=ns.h, seed=ns.seed, out=ns.out)
    elif cmd == "pbdw":
        if not (ns.D >= ns.m >= 1 and ns.n >= 1):
            raise ValueError("pbdw needs D >= m >= 1 and n >= 1")
        if ns.noise_eta < 0.0:
            raise ValueError("noise_eta must be nonnegative")
        p.update(
            D=ns.D, m=ns.m, n=ns.n, trials=ns.trials, noise_eta=ns.noise_eta,
            seed=ns.seed, out=ns.out,
        )
    elif cmd == "cs":
        if ns.n not in (1, 2):
            raise ValueError("sparsity n must be 1 or 2")
        p.update(
            m=ns.m, N=ns.N, d=ns.d, n=ns.n, l=ns.l, trials=ns.trials,
            rip1_trials=ns.rip1_trials, max_tries=ns.max_tries,
            seed=ns.seed, out=ns.out,
        )
    else:
        raise ValueError(f"unknown command: {cmd}")
    return RunConfig(cmd, p)


def run(config: RunConfig) -> list[tuple[str, str]]:
    """Execute one configured command; returns (path, text) artifacts."""
    if config.command == "convergence":
        return [(config.params["out"], cmd_convergence(config))]
    if config.command == "reconstruct":
        doc, svg = cmd_reconstruct(config)
        arts = [(config.params["out"], doc)]
        if svg is not None:
            arts.append((config.params["svg"], svg))
        return arts
    if config.command == "stability":
        return [(config.params["out"], cmd_stability(config))]
    if config.command == "pbdw":
        return [(config.params["out"], cmd_pbdw(config))]
    if config.command == "cs":
        return [(config.params["out"], cmd_cs(config))]
    raise ValueError(f"unknown command: {config.command}")


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        config = config_from_args(ns)
        artifacts = run(config)
    except (CertificationError, UnstableConfiguration, DegeneratePairError) as exc:
        print(f"shaperec: numerical instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except ValueError as exc:
        print(f"shaperec: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        for path, text in artifacts:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            print(f"wrote {path}")
    except OSError as exc:
        print(f"shaperec: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
