"""Independent brute-force ground truth for the solvers and estimators.

Everything here is exhaustive or bisection-based and deliberately shares
no code with the solver module: ratios, domination checks and
multiplication norms are recomputed inline from the norm oracles in
``core``.  Dimension caps are hard errors; these routines exist for desk
scale only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DiscreteMeasure,
    Lp,
    SpaceDescriptor,
    SpaceError,
    norm_values,
)

__all__ = [
    "GridSpec",
    "OracleError",
    "brute_weight_search",
    "exhaustive_tuple_search",
    "brute_convexification",
    "hilbert_weight_oracle",
]


class OracleError(ValueError):
    """Grid cap exceeded or dimensions beyond the oracle's remit."""


@dataclass(frozen=True)
class GridSpec:
    """Per-variable ranges and step counts with a total point budget cap."""

    lo: float = 0.05
    hi: float = 4.0
    steps: int = 40
    cap: int = 2_000_000

    def axis(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)

    def check(self, n_vars: int):
        if self.steps**n_vars > self.cap:
            raise OracleError(
                f"grid of {self.steps}^{n_vars} points exceeds the cap {self.cap}"
            )


def _mult_norm_lp(g: np.ndarray, r: float, p: float, w: np.ndarray) -> float:
    """|| M_g : L_r -> L_p || recomputed inline (no solver code)."""
    if not np.any(g > 0):
        return 0.0
    if p == r:
        return float(np.max(g))
    if p < r:
        s = 1.0 / (1.0 / p - 1.0 / r)
        return float(np.sum(g**s * w) ** (1.0 / s))
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return float(np.max(g * w ** (inv_p - 1.0 / r)))


def _domain_sphere_grid(dim: int, angle_steps: int) -> np.ndarray:
    """A dense grid on the Euclidean unit sphere for dim <= 3."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = np.linspace(0.0, 2 * np.pi, angle_steps, endpoint=False)
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    if dim == 3:
        us = np.linspace(-1.0, 1.0, angle_steps // 2)
        ps = np.linspace(0.0, 2 * np.pi, angle_steps, endpoint=False)
        pts = []
        for u in us:
            s = math.sqrt(max(0.0, 1 - u * u))
            for ph in ps:
                pts.append([s * math.cos(ph), s * math.sin(ph), u])
        return np.asarray(pts)
    raise OracleError("dense sphere grids are available for dimension <= 3 only")


def brute_weight_search(
    matrix: np.ndarray,
    r: float,
    C: float,
    codomain_p: float,
    nu: DiscreteMeasure,
    grid: GridSpec | None = None,
    conc: float = 1.0,
) -> dict:
    """Exhaustive scan over the weight grid for a matrix operator.

    Checks the domination integral |Tx|^r / omega <= ||x||^r on a dense
    Euclidean x-grid and the multiplication-norm bound
    ||M_{omega^{1/r}}: L_r -> L_p|| <= C * conc; returns the feasible
    weight minimizing the multiplication norm, or an infeasibility
    report.  Codomain dimension is capped at 4.
    """
    grid = grid or GridSpec()
    matrix = np.asarray(matrix, dtype=float)
    m, d = matrix.shape
    if m > 4:
        raise OracleError("brute weight search is capped at 4 codomain atoms")
    grid.check(m)
    if d <= 3:
        xs = _domain_sphere_grid(d, 720 if d == 2 else 48)
    else:
        rng = np.random.default_rng(20240)
        xs = rng.normal(size=(4000, d))
        xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    images_r = np.abs(xs @ matrix.T) ** r * nu.weights[None, :]  # (n_x, m)
    axis = grid.axis()
    best = None
    limit = C * conc
    step = (grid.hi - grid.lo) / max(grid.steps - 1, 1)
    for combo in itertools.product(axis, repeat=m):
        omega = np.asarray(combo)
        dom = np.max(images_r @ (1.0 / omega))
        if dom > 1.0 + 1e-12:
            continue
        mult = _mult_norm_lp(omega ** (1.0 / r), r, codomain_p, nu.weights)
        if best is None or mult < best["mult_norm"]:
            best = {"omega": omega, "mult_norm": float(mult)}
    # the feasibility boundary falls between grid lines; allow one grid
    # step of relative slack on the multiplication-norm bound
    slack = 1.0
    if best is not None:
        slack = 1.0 + 2.0 * step / max(float(np.max(best["omega"])), 1e-9)
    if best is None or best["mult_norm"] > limit * slack:
        report = {"feasible": False, "mult_limit": float(limit)}
        if best is not None:
            report["best_mult_norm"] = float(best["mult_norm"])
            report["best_omega"] = [float(v) for v in best["omega"]]
        return report
    best["feasible"] = True
    best["omega"] = [float(v) for v in best["omega"]]
    best["mult_limit"] = float(limit)
    return best


def exhaustive_tuple_search(
    space: SpaceDescriptor,
    measure: DiscreteMeasure,
    r: float,
    kind: str,
    tuple_size: int = 2,
    grid: GridSpec | None = None,
) -> tuple[float, np.ndarray]:
    """Exhaustive nonnegative grid search for the best ratio.

    Capped at 3 atoms and tuple size 3.  Returns (best ratio, witness
    matrix).  The ratio is recomputed inline from the norm oracle.
    """
    grid = grid or GridSpec(lo=0.0, hi=1.0, steps=6)
    n = measure.n
    if n > 3 or tuple_size > 3:
        raise OracleError("exhaustive tuple search is capped at 3 atoms / size 3")
    grid.check(n * tuple_size)
    axis = grid.axis()
    best_val, best_mat = 0.0, None
    for flat in itertools.product(axis, repeat=n * tuple_size):
        mat = np.asarray(flat).reshape(tuple_size, n)
        if not np.any(mat):
            continue
        envelope = np.sum(mat**r, axis=0) ** (1.0 / r)
        lattice_side = norm_values(space, envelope, measure)
        norms = np.array([norm_values(space, row, measure) for row in mat])
        sum_side = float(np.sum(norms**r) ** (1.0 / r))
        if kind == "convexity":
            if sum_side <= 0:
                continue
            val = lattice_side / sum_side
        else:
            if lattice_side <= 0:
                continue
            val = sum_side / lattice_side
        if val > best_val:
            best_val, best_mat = val, mat
    return float(best_val), best_mat


def brute_convexification(
    space: SpaceDescriptor,
    measure: DiscreteMeasure,
    x_abs: np.ndarray,
    parts: int = 2,
    steps: int = 21,
    cap: int = 2_000_000,
) -> float:
    """Exhaustive decomposition search for the lattice-norm envelope.

    Splits each coordinate of |x| over ``parts`` summands on a simplex
    grid and minimizes the summed norms.  Exact up to the grid
    resolution from above (every grid decomposition is admissible).
    """
    x_abs = np.asarray(x_abs, dtype=float)
    n = x_abs.size
    if n > 3 or parts > 3:
        raise OracleError("brute convexification is capped at 3 atoms / 3 parts")
    fracs = np.linspace(0.0, 1.0, steps)
    if parts == 2:
        splits = [(f, 1.0 - f) for f in fracs]
    else:
        splits = [
            (f1, f2, 1.0 - f1 - f2)
            for f1 in fracs
            for f2 in fracs
            if f1 + f2 <= 1.0 + 1e-12
        ]
    if len(splits) ** n > cap:
        raise OracleError("decomposition grid exceeds the cap")
    best = norm_values(space, x_abs, measure)
    for combo in itertools.product(range(len(splits)), repeat=n):
        mat = np.zeros((parts, n))
        for j, ci in enumerate(combo):
            for a in range(parts):
                mat[a, j] = splits[ci][a] * x_abs[j]
        cost = float(sum(norm_values(space, row, measure) for row in mat))
        if cost < best:
            best = cost
    return float(best)


def hilbert_weight_oracle(
    matrix: np.ndarray,
    p: float,
    nu: DiscreteMeasure,
    C: float = 1.0,
    rel_width: float = 0.01,
) -> tuple[float, float]:
    """Bracket the minimal multiplication norm for r = 2, Euclidean domain.

    The domination constraint is the largest-eigenvalue condition
    lambda_max(T' diag(nu u) T) <= C^2 with u = 1/omega, a convex program
    in u.  Bisects on the objective level; feasibility of a level is
    decided by projected subgradient descent on lambda_max over the level
    set of the objective (with radial retraction, which preserves
    feasibility of the level constraint).  Returns a two-sided bracket
    (lo, hi) of relative width <= ``rel_width``.
    """
    matrix = np.asarray(matrix, dtype=float)
    m, d = matrix.shape
    if m > 6 or d > 6:
        raise OracleError("the eigenvalue weight oracle is capped at dimension 6")
    if not (p < 2):
        raise OracleError("the closed-form objective needs codomain exponent p < 2")
    w = nu.weights
    live = np.linalg.norm(matrix, axis=1) > 0
    if not np.any(live):
        return 0.0, 0.0
    mat = matrix[live]
    wl = w[live]
    s = 1.0 / (1.0 / p - 0.5)

    def objective(u):  # || u^{-1/2} ||_{L_s(nu)}
        return float(np.sum(u ** (-s / 2.0) * wl) ** (1.0 / s))

    def lam_max(u):
        h = mat.T @ (mat * (wl * u)[:, None])
        vals, vecs = np.linalg.eigh(h)
        return float(vals[-1]), vecs[:, -1]

    a_exp = s / 2.0 + 1.0
    coef = (s / 2.0) * wl

    def modular(u):
        return float(np.sum(u ** (-s / 2.0) * wl))

    def project(w_pt, level):
        """Euclidean projection onto { u > 0 : objective(u) <= level }.

        The constraint sum nu_i u_i^{-s/2} <= level^s is separable, so the
        KKT system is u_i = w_i + theta (s/2) nu_i u_i^{-(s/2+1)} with one
        scalar multiplier theta, solved by nested bisections (u_i is
        increasing in theta, the modular decreasing).
        """
        w_pt = np.maximum(w_pt, 1e-14)
        cap = level**s
        if modular(w_pt) <= cap:
            return w_pt

        def u_of_theta(theta):
            # vectorized bisection for the per-coordinate KKT roots
            lo_i = np.maximum.reduce(
                [w_pt, 0.5 * (theta * coef) ** (1.0 / a_exp), np.full_like(w_pt, 1e-14)]
            )
            hi_i = w_pt + theta * coef * lo_i ** (-a_exp)
            for _ in range(44):
                mid = 0.5 * (lo_i + hi_i)
                neg = mid - w_pt - theta * coef * mid ** (-a_exp) < 0
                lo_i = np.where(neg, mid, lo_i)
                hi_i = np.where(neg, hi_i, mid)
            return 0.5 * (lo_i + hi_i)

        th_lo, th_hi = 0.0, 1.0
        for _ in range(160):
            if modular(u_of_theta(th_hi)) <= cap:
                break
            th_hi *= 2.0
        else:
            return None
        for _ in range(44):
            mid = 0.5 * (th_lo + th_hi)
            if modular(u_of_theta(mid)) <= cap:
                th_hi = mid
            else:
                th_lo = mid
        return u_of_theta(th_hi)

    def smoothed_grad(u, temp):
        """Subgradient of lambda_max in u, softmax-smoothed over near ties."""
        h = mat.T @ (mat * (wl * u)[:, None])
        vals, vecs = np.linalg.eigh(h)
        wts = np.exp((vals - vals[-1]) / max(temp, 1e-12))
        wts /= wts.sum()
        contrib = (mat @ vecs) ** 2  # (atoms, eigenvectors)
        return float(vals[-1]), wl * (contrib @ wts)

    def feasible(level, starts, iters=240):
        """Try to reach lambda_max <= C^2 on { objective <= level }.

        Projected subgradient with Polyak steps aimed slightly below the
        target; near-degenerate top eigenvalues are handled by softmax
        smoothing of the eigenvector subgradient.
        """
        target = C * C * 0.995
        for u_start in starts:
            u = project(np.maximum(u_start, 1e-14), level)
            if u is None:
                continue
            lam, _ = lam_max(u)
            best = lam
            best_u = u.copy()
            for _ in range(iters):
                if lam <= C * C:
                    return True, u
                temp = max(1e-10 * lam, 0.05 * (lam - target))
                lam, grad = smoothed_grad(u, temp)
                gn2 = float(grad @ grad)
                if gn2 < 1e-30:
                    break
                step = (lam - target) / gn2
                u = project(u - step * grad, level)
                if u is None:
                    break
                lam, _ = lam_max(u)
                if lam < best:
                    best, best_u = lam, u.copy()
            if best <= C * C:
                return True, best_u
        return False, starts[0]

    # initial upper level: scale the uniform direction to the constraint
    u0 = np.ones(wl.size)
    lam0, _ = lam_max(u0)
    u_feas = u0 * (C * C / lam0)
    hi = objective(u_feas)
    lo = 0.0
    u_warm = u_feas
    rng = np.random.default_rng(1805)
    while hi - lo > rel_width * hi:
        mid = 0.5 * (lo + hi)
        starts = [u_warm, np.ones(wl.size), rng.exponential(size=wl.size)]
        ok, u_mid = feasible(mid, starts)
        if ok:
            hi = mid
            u_warm = u_mid
        else:
            lo = mid
    return float(lo), float(hi)
