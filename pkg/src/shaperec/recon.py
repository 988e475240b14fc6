"""Subcell interface reconstruction from 3x3 stencils of cell averages.

Each inner cell is reconstructed from the 3x3 block of averages around it by
fitting either a constant (all-0 / all-1) or a half-plane whose boundary
crosses the stencil, minimizing a discrete residual norm on the nine
averages.  The fit is derivative-free: a coarse sweep over angles with a
golden-section line search in the offset, followed by a compass refinement
of the best (theta, c) pair.  The residual along the offset is unimodal in
practice; the sweep guards against stray local minima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .geometry import (
    Cell,
    HalfPlane,
    Point,
    _unit_normal,
    crosses_cell,
    halfplane_square_fraction,
    lowfrac_batch,
    square_fraction,
)
from .measurements import CellAverageField, Grid

# Stencil ordering: index k covers (i', j') with i' slowest, so the central
# entry sits at index 4.
_DX = (-1, -1, -1, 0, 0, 0, 1, 1, 1)
_DY = (-1, 0, 1, -1, 0, 1, -1, 0, 1)
_OFFS = np.array([(dx, dy) for dx, dy in zip(_DX, _DY)], dtype=float)

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class NormSpec:
    """Residual norm on the nine stencil averages.

    kind 'lp' uses ||r||_p; kind 'wl2' uses a weighted Euclidean norm with
    weight `center_weight` on the central entry and 1 elsewhere.
    """

    kind: str
    p: float = 2.0
    center_weight: float = 1.0

    @staticmethod
    def lp(p: float) -> "NormSpec":
        if p < 1.0:
            raise ValueError("p must be >= 1")
        return NormSpec("lp", p=float(p))

    @staticmethod
    def weighted_l2(center_weight: float) -> "NormSpec":
        if center_weight <= 0.0:
            raise ValueError("center weight must be positive")
        return NormSpec("wl2", center_weight=float(center_weight))

    def residual(self, r: np.ndarray) -> float:
        r = np.asarray(r, dtype=float)
        return float(self.residual_batch(r[None, :])[0])

    def residual_batch(self, r: np.ndarray) -> np.ndarray:
        if self.kind == "lp":
            if self.p == 1.0:
                return np.abs(r).sum(axis=-1)
            if self.p == 2.0:
                return np.sqrt((r * r).sum(axis=-1))
            if math.isinf(self.p):
                return np.abs(r).max(axis=-1)
            return (np.abs(r) ** self.p).sum(axis=-1) ** (1.0 / self.p)
        w = np.ones(9)
        w[4] = self.center_weight
        return np.sqrt((w * r * r).sum(axis=-1))


@dataclass(frozen=True)
class StencilData:
    """Nine cell averages of a 3x3 stencil (central entry at index 4)."""

    values: np.ndarray
    h: float

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (9,):
            raise ValueError("stencil needs exactly nine values")
        object.__setattr__(self, "values", vals)
        if self.h <= 0.0:
            raise ValueError("h must be positive")


@dataclass(frozen=True)
class CellRecon:
    """Per-cell reconstruction: a constant in [0,1] or a half-plane indicator."""

    kind: str
    value: float = 0.0
    hp: HalfPlane | None = None

    @staticmethod
    def constant(value: float) -> "CellRecon":
        return CellRecon("constant", value=float(value))

    @staticmethod
    def interface(hp: HalfPlane) -> "CellRecon":
        return CellRecon("interface", hp=hp)

    def values_at(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(np.broadcast(x, np.asarray(y)).shape, self.value)
        nx, ny = self.hp.normal()
        val = nx * (x - self.hp.anchor.x) + ny * (np.asarray(y) - self.hp.anchor.y)
        return (val >= self.hp.c).astype(float)


@dataclass(frozen=True)
class Reconstruction:
    """Cellwise reconstruction over a grid (cells row-major, i slowest)."""

    grid: Grid
    cells: tuple[CellRecon, ...]

    def __post_init__(self) -> None:
        if len(self.cells) != self.grid.n:
            raise ValueError("one cell reconstruction per grid cell required")
        object.__setattr__(self, "cells", tuple(self.cells))

    def cell(self, i: int, j: int) -> CellRecon:
        return self.cells[(i - 1) * self.grid.L + (j - 1)]

    def interface_cells(self) -> Iterator[tuple[int, int, CellRecon]]:
        L = self.grid.L
        for k, cr in enumerate(self.cells):
            if cr.kind == "interface":
                yield k // L + 1, k % L + 1, cr


def piecewise_constant(field: CellAverageField) -> Reconstruction:
    """Reconstruction that keeps each cell average as a constant, clipped to [0,1]."""
    vals = np.clip(field.values, 0.0, 1.0)
    return Reconstruction(field.grid, tuple(CellRecon.constant(v) for v in vals))


def stencil_averages(hp: HalfPlane, h: float, center: Point | tuple[float, float]) -> np.ndarray:
    """Exact averages of a half-plane indicator over the 3x3 stencil at `center`."""
    cx, cy = center
    out = np.empty(9)
    for k in range(9):
        out[k] = square_fraction(hp, (cx + _DX[k] * h, cy + _DY[k] * h), h)
    return out


def _make_theta_residual(z: np.ndarray, h: float, norm: NormSpec):
    """Factory: (nx, ny) -> res(c), with the per-theta constants hoisted.

    For the common norms (p=1, p=2, weighted l2) away from axis-aligned
    normals, the nine upper-side fractions (the same closed form as
    geometry._lowfrac) are fused with the accumulation in one loop; this
    function dominates the fit cost, so no intermediate list is built.
    """
    z_list = [float(v) for v in z]
    if norm.kind == "lp":
        p = norm.p
        weights = None
    else:
        p = 2.0
        weights = [1.0] * 9
        weights[4] = norm.center_weight
    inv_h = 1.0 / h

    def at_theta(nx: float, ny: float):
        a, b = abs(nx), abs(ny)
        pairs = [(h * (_DX[k] * nx + _DY[k] * ny), z_list[k]) for k in range(9)]
        if min(a, b) >= 1e-12:
            half = (a + b) / 2.0
            span = a + b
            two_ab = 2.0 * a * b
            if weights is not None:
                wts = weights

                def res(c):
                    acc = 0.0
                    k = 0
                    for pk, zk in pairs:
                        s = (c - pk) * inv_h + half
                        if s < 0.0:
                            s = 0.0
                        elif s > span:
                            s = span
                        q = s * s
                        da = s - a
                        if da > 0.0:
                            q -= da * da
                        db = s - b
                        if db > 0.0:
                            q -= db * db
                        d = zk - (1.0 - q / two_ab)
                        acc += wts[k] * (d * d)
                        k += 1
                    return math.sqrt(acc)

                return res
            if p == 1.0:
                def res(c):
                    acc = 0.0
                    for pk, zk in pairs:
                        s = (c - pk) * inv_h + half
                        if s < 0.0:
                            s = 0.0
                        elif s > span:
                            s = span
                        q = s * s
                        da = s - a
                        if da > 0.0:
                            q -= da * da
                        db = s - b
                        if db > 0.0:
                            q -= db * db
                        d = zk - (1.0 - q / two_ab)
                        acc += d if d >= 0.0 else -d
                    return acc

                return res
            if p == 2.0:
                def res(c):
                    acc = 0.0
                    for pk, zk in pairs:
                        s = (c - pk) * inv_h + half
                        if s < 0.0:
                            s = 0.0
                        elif s > span:
                            s = span
                        q = s * s
                        da = s - a
                        if da > 0.0:
                            q -= da * da
                        db = s - b
                        if db > 0.0:
                            q -= db * db
                        d = zk - (1.0 - q / two_ab)
                        acc += d * d
                    return math.sqrt(acc)

                return res

        # Axis-aligned normals and uncommon norms share a two-stage path.
        if min(a, b) < 1e-12:
            big = max(a, b, 1e-12)

            def fractions(c):
                out = []
                for pk, _ in pairs:
                    t = (c - pk) * inv_h
                    s = 0.5 + t / big
                    if s < 0.0:
                        s = 0.0
                    elif s > 1.0:
                        s = 1.0
                    out.append(1.0 - s)
                return out
        else:
            def fractions(c):
                out = []
                for pk, _ in pairs:
                    s = (c - pk) * inv_h + half
                    if s < 0.0:
                        s = 0.0
                    elif s > span:
                        s = span
                    q = s * s
                    da = s - a
                    if da > 0.0:
                        q -= da * da
                    db = s - b
                    if db > 0.0:
                        q -= db * db
                    out.append(1.0 - q / two_ab)
                return out

        if weights is not None:
            def res(c):
                fr = fractions(c)
                return math.sqrt(
                    sum(weights[k] * (z_list[k] - fr[k]) ** 2 for k in range(9))
                )
        elif p == 1.0:
            def res(c):
                fr = fractions(c)
                return sum(abs(z_list[k] - fr[k]) for k in range(9))
        elif p == 2.0:
            def res(c):
                fr = fractions(c)
                return math.sqrt(sum((z_list[k] - fr[k]) ** 2 for k in range(9)))
        elif math.isinf(p):
            def res(c):
                fr = fractions(c)
                return max(abs(z_list[k] - fr[k]) for k in range(9))
        else:
            def res(c):
                fr = fractions(c)
                return sum(abs(z_list[k] - fr[k]) ** p for k in range(9)) ** (1.0 / p)
        return res

    return at_theta


_SCAN_C = 49


def _angle_gap(a: int, b: int, n: int) -> int:
    d = abs(a - b) % n
    return min(d, n - d)


def _sweep_table(z: np.ndarray, h: float, norm: NormSpec, n_angles: int, iters: int):
    """Best offset per sweep angle: uniform c scan, then bracketed golden section.

    The scan guards against multimodality in c (the ell_1 residual is only
    piecewise smooth); the golden section refines within the best bracket.
    Returns per-angle arrays (theta, c, res).
    """
    thetas = np.arange(n_angles) * (2.0 * math.pi / n_angles)
    nx = np.cos(thetas)
    ny = np.sin(thetas)
    ax, ay = np.abs(nx), np.abs(ny)
    cmax = 1.5 * h * (ax + ay)
    proj = h * (_OFFS[:, 0][None, :] * nx[:, None] + _OFFS[:, 1][None, :] * ny[:, None])

    def evaluate(c: np.ndarray) -> np.ndarray:
        t = (c[:, None] - proj) / h
        fr = 1.0 - lowfrac_batch(ax[:, None], ay[:, None], t)
        return norm.residual_batch(z[None, :] - fr)

    grid = np.linspace(-1.0, 1.0, _SCAN_C)
    cs = cmax[:, None] * grid[None, :]
    t = (cs[:, :, None] - proj[:, None, :]) / h
    fr = 1.0 - lowfrac_batch(ax[:, None, None], ay[:, None, None], t)
    fscan = norm.residual_batch(z[None, None, :] - fr)
    kbest = np.argmin(fscan, axis=1)
    lo = np.clip(kbest - 1, 0, _SCAN_C - 1)
    hi = np.clip(kbest + 1, 0, _SCAN_C - 1)
    a = cmax * grid[lo]
    b = cmax * grid[hi]
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = evaluate(x1)
    f2 = evaluate(x2)
    for _ in range(iters):
        m = f1 < f2
        b = np.where(m, x2, b)
        a = np.where(m, a, x1)
        x1_new = np.where(m, b - _INVPHI * (b - a), x2)
        x2_new = np.where(m, x1, a + _INVPHI * (b - a))
        feval = evaluate(np.where(m, x1_new, x2_new))
        f1, f2 = np.where(m, feval, f2), np.where(m, f1, feval)
        x1, x2 = x1_new, x2_new
    fbest = np.minimum(f1, f2)
    cbest = np.where(f1 <= f2, x1, x2)
    better_scan = fscan[np.arange(n_angles), kbest] < fbest
    fbest = np.where(better_scan, fscan[np.arange(n_angles), kbest], fbest)
    cbest = np.where(better_scan, cmax * grid[kbest], cbest)
    return thetas, cbest, fbest


def _v_search(theta0, z, h, norm, dtheta0, dtheta_min=1e-7, max_moves=400):
    """Pattern search on V(theta) = min_c residual(theta, c).

    The (theta, c) valley is diagonal and can be knife-edge sharp, so a
    joint pattern search stalls; minimizing out c at every theta probe makes
    the one-dimensional landscape tractable.  The inner minimization scans
    _SCAN_C offsets and refines the best bracket by golden section.
    """
    at_theta = _make_theta_residual(z, h, norm)
    grid = np.linspace(-1.0, 1.0, _SCAN_C)
    offx, offy = _OFFS[:, 0], _OFFS[:, 1]

    def v_eval(theta):
        nx, ny = _unit_normal(theta)
        res_c = at_theta(nx, ny)
        cm = 1.5 * h * (abs(nx) + abs(ny))
        proj = h * (offx * nx + offy * ny)
        t = (cm * grid[:, None] - proj[None, :]) / h
        fr = 1.0 - lowfrac_batch(abs(nx), abs(ny), t)
        fscan = norm.residual_batch(z[None, :] - fr)
        best_k = int(np.argmin(fscan))
        best_r = float(fscan[best_k])
        a = cm * grid[max(best_k - 1, 0)]
        b = cm * grid[min(best_k + 1, _SCAN_C - 1)]
        x1 = b - _INVPHI * (b - a)
        x2 = a + _INVPHI * (b - a)
        f1 = res_c(x1)
        f2 = res_c(x2)
        for _ in range(30):
            if f1 < f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - _INVPHI * (b - a)
                f1 = res_c(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + _INVPHI * (b - a)
                f2 = res_c(x2)
        if f1 <= f2 and f1 <= best_r:
            return f1, x1
        if f2 < f1 and f2 <= best_r:
            return f2, x2
        return best_r, cm * grid[best_k]

    theta = theta0
    best, c = v_eval(theta)
    dtheta = dtheta0
    moves = 0
    while dtheta > dtheta_min and moves < max_moves:
        moved = False
        for s in (1, -1):
            r, c_try = v_eval(theta + s * dtheta)
            moves += 1
            if r < best:
                theta = (theta + s * dtheta) % (2.0 * math.pi)
                best, c = r, c_try
                moved = True
                break
        if not moved:
            dtheta *= 0.5
    return theta, c, best


def _compass(theta0, c0, res0, z, h, norm, dtheta0, dc0=None, tol=1e-12, max_evals=4000):
    """Joint pattern search over (theta, c) with shrinking steps.

    Diagonal moves are included: the residual valley rotates with theta, so
    axis-only steps stall on it.  Used as the final polish after _v_search.
    """
    at_theta = _make_theta_residual(z, h, norm)
    memo_theta, memo_cm, memo_res = None, 0.0, None

    def clamped_eval(theta, c):
        # The probe pattern revisits the current theta often; cache its closure.
        nonlocal memo_theta, memo_cm, memo_res
        if theta != memo_theta:
            nx, ny = _unit_normal(theta)
            memo_cm = 1.5 * h * (abs(nx) + abs(ny))
            memo_res = at_theta(nx, ny)
            memo_theta = theta
        cm = memo_cm
        if c > cm:
            c = cm
        elif c < -cm:
            c = -cm
        return memo_res(c), c

    theta, c, best = theta0, c0, res0
    dtheta = dtheta0
    dc = h / 4.0 if dc0 is None else dc0
    evals = 0
    while (dtheta > 1e-12 or dc > tol * h) and evals < max_evals:
        moved = False
        for sth, sc in (
            (1, 0), (-1, 0), (0, 1), (0, -1),
            (1, 1), (1, -1), (-1, 1), (-1, -1),
        ):
            r, c_cl = clamped_eval(theta + sth * dtheta, c + sc * dc)
            evals += 1
            if r < best:
                theta = (theta + sth * dtheta) % (2.0 * math.pi)
                c, best = c_cl, r
                moved = True
                break
        if not moved:
            dtheta *= 0.5
            dc *= 0.5
    return theta, c, best


def fit_stencil(
    z: StencilData,
    norm: NormSpec,
    n_angles: int = 256,
    sweep_iters: int = 16,
) -> tuple[CellRecon, float]:
    """Best fit of a crossing half-plane or a 0/1 constant to stencil averages.

    Returns the winning cell reconstruction (half-planes are anchored at the
    stencil center, offset limited to |c| <= (3h/2)(|cos t|+|sin t|)) and its
    residual in `norm`.  Ties go to smaller |c|, then smaller theta, then to
    the constants.  Doubling n_angles never increases the returned residual
    because the nested coarser sweeps are refined alongside the full one.
    """
    vals = z.values
    h = z.h
    vmax = float(vals.max())
    vmin = float(vals.min())
    if vmax - vmin < DEGENERATE_TOL:
        const = 1.0 if vals[4] >= 0.5 else 0.0
        return CellRecon.constant(const), norm.residual(vals - const)

    res0 = norm.residual(vals)
    res1 = norm.residual(vals - 1.0)
    if res1 < res0:
        const_val, const_res = 1.0, res1
    else:
        const_val, const_res = 0.0, res0

    thetas, cbest, fbest = _sweep_table(vals, h, norm, n_angles, sweep_iters)
    abs_c = np.abs(cbest)
    # Refine from two well-separated sweep basins at every nested
    # half-resolution level down to 256 angles; taking the overall minimum
    # makes doubling n_angles monotone (the coarser levels' refinements are
    # reproduced exactly).
    best: tuple[float, float, float, float] | None = None
    step = 1
    while True:
        level_n = n_angles // step
        idx = np.arange(0, n_angles, step)
        order = idx[np.lexsort((thetas[idx], abs_c[idx], fbest[idx]))]
        starts: list[int] = []
        for k in order:
            if all(_angle_gap(k, s, n_angles) >= 5 * step for s in starts):
                starts.append(int(k))
            if len(starts) == 2:
                break
        level_best = math.inf
        for k in starts:
            # The second basin only matters when its sweep value is already
            # competitive and the first is not essentially exact; both rules
            # use level-local data only, which keeps the nesting (and hence
            # monotonicity in n_angles) intact.
            if fbest[k] > 1.25 * level_best or level_best < 1e-11:
                continue
            th1, c1, r1 = _v_search(
                float(thetas[k]), vals, h, norm, dtheta0=math.pi / level_n
            )
            if r1 > fbest[k]:
                th1, c1, r1 = float(thetas[k]), float(cbest[k]), float(fbest[k])
            theta, c, res = _compass(
                th1, c1, r1, vals, h, norm, dtheta0=4e-7, dc0=1e-5 * h
            )
            level_best = min(level_best, res)
            cand = (res, abs(c), theta, c)
            if best is None or cand < best:
                best = cand
        if level_n % 2 == 0 and level_n // 2 >= 256:
            step *= 2
        else:
            break
    plane_res, _, theta, c = best

    if plane_res < const_res:
        return CellRecon.interface(HalfPlane(theta, c, Point(0.0, 0.0))), plane_res
    return CellRecon.constant(const_val), const_res


def _dominated_constant(z9: np.ndarray, vmin: float, vmax: float, norm: NormSpec) -> float | None:
    """Constant that provably wins the stencil fit, or None.

    Applies when every average sits strictly on one side of 1/2.  Any
    half-plane whose line meets the central cell leaves the stencil corner
    opposite its normal exactly empty and covers at most half of the edge
    neighbour along its dominant axis, so its residual is at least the
    two-cell misfit floor; a half-plane missing the central cell on the
    far side pays the full central misfit.  When the best 0/1 constant
    undercuts both floors by a safety margin (which absorbs the fraction
    clamping roundoff of the search's residual evaluation), every candidate
    the search could return materializes, after the usual demotion of
    non-crossing fits, as that same rounded constant, so the search can be
    skipped without changing the reconstruction.
    """
    if vmin > 0.5:
        m = vmin
        const_res = norm.residual(z9 - 1.0)
        value = 1.0
    elif vmax < 0.5:
        m = 1.0 - vmax
        const_res = norm.residual(z9)
        value = 0.0
    else:
        return None
    edge = m - 0.5
    w_eff = 1.0
    if norm.kind == "wl2":
        w_eff = math.sqrt(norm.center_weight)
        cross_floor = math.hypot(m, edge)
    elif norm.p == 1.0:
        cross_floor = m + edge
    elif math.isinf(norm.p):
        cross_floor = m
    else:
        cross_floor = (m**norm.p + edge**norm.p) ** (1.0 / norm.p)
    margin = 0.01 * max(1.0, w_eff)
    if const_res < min(cross_floor, w_eff * m) - margin:
        return value
    return None


_NORMS = {
    "l1": NormSpec.lp(1.0),
    "li": NormSpec.lp(2.0),
}


def reconstruct(field: CellAverageField, method: str, center_weight: float = 100.0) -> Reconstruction:
    """Cellwise reconstruction of a shape from its (possibly noisy) averages.

    Methods: 'pc' keeps the averages as constants; 'l1', 'li', 'licc' fit
    half-planes per stencil under the ell_1, ell_2, and center-weighted
    ell_2 residual norms respectively.  Boundary cells of the nonlinear
    methods are set to constant 0; fitted half-planes that do not cross
    their central cell are demoted to the rounded central fraction.
    """
    if method == "pc":
        return piecewise_constant(field)
    if method == "licc":
        norm = NormSpec.weighted_l2(center_weight)
    elif method in _NORMS:
        norm = _NORMS[method]
    else:
        raise ValueError(f"unknown method: {method}")

    L = field.grid.L
    if L < 3:
        raise ValueError("nonlinear reconstruction needs L >= 3")
    h = field.grid.h
    vals2 = field.as_grid()
    cells: list[CellRecon] = [CellRecon.constant(0.0)] * (L * L)
    zero = CellRecon.constant(0.0)
    one = CellRecon.constant(1.0)

    # Vectorized degenerate-stencil detection (max-min over the 3x3 block).
    blmax = vals2[1:-1, 1:-1].copy()
    blmin = vals2[1:-1, 1:-1].copy()
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            blk = vals2[1 + di : L - 1 + di, 1 + dj : L - 1 + dj]
            np.maximum(blmax, blk, out=blmax)
            np.minimum(blmin, blk, out=blmin)
    degenerate = (blmax - blmin) < DEGENERATE_TOL

    for i in range(2, L):
        r = i - 1
        for j in range(2, L):
            cidx = (i - 1) * L + (j - 1)
            cc = j - 1
            if degenerate[r - 1, cc - 1]:
                cells[cidx] = one if vals2[r, cc] >= 0.5 else zero
                continue
            z9 = vals2[r - 1 : r + 2, cc - 1 : cc + 2].reshape(9)
            dom = _dominated_constant(
                z9, float(blmin[r - 1, cc - 1]), float(blmax[r - 1, cc - 1]), norm
            )
            if dom is not None:
                cells[cidx] = one if dom >= 0.5 else zero
                continue
            fit, _ = fit_stencil(StencilData(z9, h), norm)
            if fit.kind == "constant":
                cells[cidx] = one if fit.value >= 0.5 else zero
                continue
            center = Point((i - 0.5) * h, (j - 0.5) * h)
            hp = HalfPlane(fit.hp.theta, fit.hp.c, center)
            if crosses_cell(hp, Cell(i, j, h)):
                cells[cidx] = CellRecon.interface(hp)
            else:
                frac = halfplane_square_fraction(hp.theta, hp.c, h)
                cells[cidx] = one if frac >= 0.5 else zero
    return Reconstruction(field.grid, tuple(cells))
