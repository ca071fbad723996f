"""Quasi-normed function spaces over finite discrete measure spaces.

A finite discrete measure space is a list of atoms with strictly positive
weights.  On top of it this module evaluates the concrete quasi-norm
families

* ``Lp(p)``            with 0 < p <= inf,
* ``MixedNorm``        iterated L_(p1,p2) norms on a product grid of atoms,
* ``Lorentz(p, q)``    via the decreasing rearrangement,
* ``Orlicz(phi)``      Luxemburg norm, found by bisection,

and two combinators:

* ``power_space(X, r)``  the r-th power X^r with norm
  ``|| x ||_{X^r} = || |x|^{1/r} ||_X ** r``, simplified to a concrete
  family whenever a closed form exists,
* ``DualSpace(X)``       the Koethe dual, valid when a closed-form dual is
  registered (L_p and mixed norms with exponents in [1, inf]).

``koethe_dual_norm`` evaluates the dual norm for arbitrary spaces (exact
when registered, otherwise a certified lower bound from multi-start
maximization of the pairing over the unit ball), and
``convexification_norm`` encloses the largest lattice norm below a
quasi-norm between a decomposition upper bound and a dual-witness lower
bound.

All norm evaluations are pure functions of (descriptor, values, measure);
nothing is cached.  Norms factor out the largest entry before raising to
powers, so they are exactly equivariant under scalings that are exact in
floating point (powers of two in particular) and safe against overflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

INF = math.inf

__all__ = [
    "SpaceError",
    "DimensionMismatch",
    "InvalidExponent",
    "OrliczBracketingError",
    "UnsupportedDual",
    "DiscreteMeasure",
    "LatticeFunction",
    "StepFunction",
    "YoungFunction",
    "Lp",
    "MixedNorm",
    "Lorentz",
    "Orlicz",
    "PowerSpace",
    "DualSpace",
    "SpaceDescriptor",
    "SearchBudget",
    "norm",
    "norm_values",
    "power_space",
    "dual_space",
    "koethe_dual_norm",
    "convexification_norm",
    "decreasing_rearrangement",
    "sup_pairing",
    "axiom_two_exponent",
    "registered_constant",
    "holder_conjugate",
    "space_label",
    "space_to_json",
    "space_from_json",
    "measure_to_json",
    "measure_from_json",
    "dumps_canonical",
]


class SpaceError(ValueError):
    """Base error for invalid space descriptors or arguments."""


class DimensionMismatch(SpaceError):
    """Function does not live on the measure the descriptor expects."""


class InvalidExponent(SpaceError):
    """Exponent outside the admissible range (e.g. p <= 0)."""


class OrliczBracketingError(SpaceError):
    """Luxemburg bisection could not bracket; the Young function is broken."""


class UnsupportedDual(SpaceError):
    """No closed-form Koethe dual is registered for this descriptor."""


def holder_conjugate(p: float) -> float:
    """p' with 1/p + 1/p' = 1, for 1 <= p <= inf."""
    if p < 1:
        raise InvalidExponent(f"conjugate undefined for p={p} < 1")
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


# ---------------------------------------------------------------------------
# measures and lattice functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite atom set with strictly positive weights.

    Immutable after construction; the weight array is read-only.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise SpaceError("a measure needs at least one atom")
        if not np.all(np.isfinite(w)) or not np.all(w > 0):
            raise SpaceError("atom weights must be strictly positive and finite")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def same_as(self, other: "DiscreteMeasure") -> bool:
        return self.n == other.n and np.array_equal(self.weights, other.weights)


@dataclass(frozen=True, eq=False)
class LatticeFunction:
    """A real function on the atoms of a discrete measure."""

    values: np.ndarray
    measure: DiscreteMeasure

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise SpaceError("values must be a flat vector")
        if v.size != self.measure.n:
            raise DimensionMismatch(
                f"function has {v.size} values but the measure has {self.measure.n} atoms"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def abs(self) -> "LatticeFunction":
        return LatticeFunction(np.abs(self.values), self.measure)

    def abs_power(self, alpha: float) -> "LatticeFunction":
        """|x|^alpha pointwise, alpha > 0 (0^alpha = 0)."""
        if alpha <= 0:
            raise InvalidExponent("pointwise power needs alpha > 0")
        return LatticeFunction(np.abs(self.values) ** alpha, self.measure)

    def __mul__(self, other: "LatticeFunction") -> "LatticeFunction":
        if not self.measure.same_as(other.measure):
            raise DimensionMismatch("pointwise product of functions on different measures")
        return LatticeFunction(self.values * other.values, self.measure)

    def integral(self) -> float:
        return float(np.sum(self.values * self.measure.weights))


# ---------------------------------------------------------------------------
# Young functions and descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class YoungFunction:
    """A registered Young function phi: nondecreasing, phi(0)=0, phi -> inf.

    Families:
      * ``power``      phi(s) = s**p
      * ``power_log``  phi(s) = s**(p/root) * log(1 + s**(1/root))
      * ``custom``     a user callable (must accept ndarrays); ``root``
                       composes phi(s) = fn(s**(1/root))

    ``root`` tracks composition with s -> s**(1/root), which is how powers
    of Orlicz spaces change the Young function.  For the plain power family
    the root folds into the exponent.
    """

    family: str
    p: float = 1.0
    root: float = 1.0
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.family not in ("power", "power_log", "custom"):
            raise SpaceError(f"unknown Young function family {self.family!r}")
        if self.family != "custom" and self.p <= 0:
            raise InvalidExponent("Young function exponent must be positive")
        if self.root <= 0:
            raise InvalidExponent("Young function root must be positive")
        if self.family == "custom" and self.fn is None:
            raise SpaceError("custom Young function needs a callable")
        if self.family == "power" and self.root != 1.0:
            # canonical form: fold the root into the exponent
            object.__setattr__(self, "p", self.p / self.root)
            object.__setattr__(self, "root", 1.0)

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.family == "power":
            return s**self.p
        if self.family == "power_log":
            si = s ** (1.0 / self.root)
            return si**self.p * np.log1p(si)
        return np.asarray(self.fn(s ** (1.0 / self.root)), dtype=float)

    def powered(self, r: float) -> "YoungFunction":
        """The Young function of the r-th power space: s -> phi(s**(1/r))."""
        if r <= 0:
            raise InvalidExponent("power exponent must be positive")
        if self.family == "power":
            return YoungFunction("power", p=self.p / r)
        return YoungFunction(self.family, p=self.p, root=self.root * r, fn=self.fn)

    @property
    def is_convex_norm(self) -> bool:
        """True when the Luxemburg functional is known to be a norm."""
        if self.family == "power":
            return self.p >= 1
        if self.family == "power_log":
            return self.p / self.root >= 1 and self.root <= 1
        return False


@dataclass(frozen=True)
class Lp:
    """L_p over a discrete measure, 0 < p <= inf."""

    p: float

    def __post_init__(self):
        if not (self.p > 0):
            raise InvalidExponent(f"L_p needs p > 0, got {self.p}")


@dataclass(frozen=True, eq=False)
class MixedNorm:
    """Iterated norm on an (n1 x n2) grid of atoms, outer exponent first.

    The ambient atoms are the flattened grid in row-major order with the
    tensor weights mu1[i] * mu2[j]; the inner index j is integrated first
    with exponent p2, then the outer index i with exponent p1.
    """

    p1: float
    p2: float
    mu1: DiscreteMeasure
    mu2: DiscreteMeasure

    def __post_init__(self):
        if not (self.p1 > 0) or not (self.p2 > 0):
            raise InvalidExponent("mixed norm exponents must be positive")

    @property
    def grid(self) -> tuple[int, int]:
        return (self.mu1.n, self.mu2.n)

    def ambient_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(np.outer(self.mu1.weights, self.mu2.weights).ravel())


@dataclass(frozen=True)
class Lorentz:
    """Lorentz space L_{p,q}, 0 < p < inf, 0 < q <= inf."""

    p: float
    q: float

    def __post_init__(self):
        if not (0 < self.p < INF):
            raise InvalidExponent(f"Lorentz first exponent must be finite positive, got {self.p}")
        if not (self.q > 0):
            raise InvalidExponent(f"Lorentz second exponent must be positive, got {self.q}")


@dataclass(frozen=True)
class Orlicz:
    """Orlicz space with the Luxemburg norm."""

    phi: YoungFunction


@dataclass(frozen=True)
class PowerSpace:
    """Unsimplified r-th power wrapper; norm evaluates definitionally."""

    base: "SpaceDescriptor"
    r: float

    def __post_init__(self):
        if not (self.r > 0):
            raise InvalidExponent("power exponent must be positive")


@dataclass(frozen=True)
class DualSpace:
    """Koethe dual wrapper; norm evaluates through the registered dual."""

    base: "SpaceDescriptor"


SpaceDescriptor = Union[Lp, MixedNorm, Lorentz, Orlicz, PowerSpace, DualSpace]


@dataclass(frozen=True)
class SearchBudget:
    """Budget for multi-start searches; all randomness flows from ``seed``."""

    starts: int = 8
    iters: int = 120
    seed: int = 0
    tuple_sizes: tuple[int, ...] = (1, 2, 4, 8)
    parts: int = 4
    samples: int = 48


# ---------------------------------------------------------------------------
# norm evaluation
# ---------------------------------------------------------------------------


def _lp_values(av: np.ndarray, w: np.ndarray, p: float) -> float:
    """L_p norm of nonnegative values against weights, overflow safe.

    The largest entry is factored out before raising to the p-th power, so
    the result scales exactly with exact scalings of the input.
    """
    if math.isinf(p):
        return float(av.max()) if av.size else 0.0
    m = float(av.max()) if av.size else 0.0
    if m == 0.0:
        return 0.0
    return m * float(np.sum((av / m) ** p * w)) ** (1.0 / p)


def _lp_rows(a: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    """Row-wise L_p norms of a nonnegative matrix against weights."""
    if math.isinf(p):
        return a.max(axis=1)
    m = a.max(axis=1)
    out = np.zeros(a.shape[0])
    nz = m > 0
    if np.any(nz):
        scaled = a[nz] / m[nz, None]
        out[nz] = m[nz] * np.sum(scaled**p * w, axis=1) ** (1.0 / p)
    return out


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Nonincreasing step function on [0, total); levels strictly decreasing."""

    levels: np.ndarray
    lengths: np.ndarray

    @property
    def breakpoints(self) -> np.ndarray:
        return np.cumsum(self.lengths)

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def integral(self) -> float:
        return float(np.sum(self.levels * self.lengths))


def decreasing_rearrangement(x: LatticeFunction) -> StepFunction:
    """Decreasing rearrangement of |x| as a step function.

    Equal levels are merged, so the result does not depend on atom order.
    """
    av = np.abs(x.values)
    order = np.argsort(-av, kind="stable")
    levels = av[order]
    lengths = x.measure.weights[order]
    merged_levels = []
    merged_lengths = []
    for lv, ln in zip(levels, lengths):
        if merged_levels and lv == merged_levels[-1]:
            merged_lengths[-1] += ln
        else:
            merged_levels.append(lv)
            merged_lengths.append(ln)
    return StepFunction(np.array(merged_levels), np.array(merged_lengths))


def _lorentz_values(av: np.ndarray, w: np.ndarray, p: float, q: float) -> float:
    """Lorentz norm from the step rearrangement.

    For q < inf the exact integral of (t^{1/p} f*(t))^q dt/t over each step
    is summed in closed form; for q = inf the supremum is attained at the
    right endpoints of the steps.
    """
    order = np.argsort(-av, kind="stable")
    levels = av[order]
    lengths = w[order]
    t_right = np.cumsum(lengths)
    m = float(levels[0]) if levels.size else 0.0
    if m == 0.0:
        return 0.0
    if math.isinf(q):
        return float(np.max(levels * t_right ** (1.0 / p)))
    t_left = t_right - lengths
    pieces = (levels / m) ** q * (t_right ** (q / p) - t_left ** (q / p))
    return m * float((p / q) * np.sum(pieces)) ** (1.0 / q)


def _luxemburg(phi: YoungFunction, av: np.ndarray, w: np.ndarray, rtol: float = 1e-10) -> float:
    """Luxemburg norm inf { lam > 0 : sum phi(|x|/lam) mu <= 1 } by bisection.

    Brackets by doubling/halving, then bisects to the declared relative
    tolerance.  Values are normalized by max|x| first, so the result is
    exactly equivariant under exact scalings.
    """
    m = float(av.max()) if av.size else 0.0
    if m == 0.0:
        return 0.0
    z = av / m

    def modular(lam: float) -> float:
        return float(np.sum(phi(z / lam) * w))

    lo = hi = 1.0
    guard = 0
    if modular(hi) > 1.0:
        while modular(hi) > 1.0:
            hi *= 2.0
            guard += 1
            if guard > 400:
                raise OrliczBracketingError("modular never drops below 1; phi looks broken")
        lo = hi / 2.0
    else:
        while modular(lo) <= 1.0:
            lo /= 2.0
            guard += 1
            if guard > 400 or lo < 1e-280:
                # modular stays <= 1 down to 0: phi fails phi -> inf
                raise OrliczBracketingError("modular never exceeds 1; phi looks broken")
        hi = lo * 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if modular(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return m * hi


def norm_values(space: SpaceDescriptor, values: np.ndarray, measure: DiscreteMeasure) -> float:
    """Quasi-norm of raw values on a measure; see :func:`norm`."""
    av = np.abs(np.asarray(values, dtype=float))
    if av.size != measure.n:
        raise DimensionMismatch(
            f"function has {av.size} values but the measure has {measure.n} atoms"
        )
    if isinstance(space, Lp):
        return _lp_values(av, measure.weights, space.p)
    if isinstance(space, MixedNorm):
        n1, n2 = space.grid
        if av.size != n1 * n2:
            raise DimensionMismatch(f"mixed norm expects {n1 * n2} atoms, got {av.size}")
        expected = np.outer(space.mu1.weights, space.mu2.weights).ravel()
        if not np.allclose(measure.weights, expected, rtol=1e-12, atol=0.0):
            raise DimensionMismatch("measure is not the tensor product of the grid measures")
        grid = av.reshape(n1, n2)
        inner = _lp_rows(grid, space.mu2.weights, space.p2)
        return _lp_values(inner, space.mu1.weights, space.p1)
    if isinstance(space, Lorentz):
        return _lorentz_values(av, measure.weights, space.p, space.q)
    if isinstance(space, Orlicz):
        return _luxemburg(space.phi, av, measure.weights)
    if isinstance(space, PowerSpace):
        root = norm_values(space.base, av ** (1.0 / space.r), measure)
        return root**space.r
    if isinstance(space, DualSpace):
        return norm_values(dual_space(space.base), av, measure)
    raise SpaceError(f"unknown space descriptor {space!r}")


def norm(space: SpaceDescriptor, x: LatticeFunction) -> float:
    """Evaluate the quasi-norm of ``x`` in the space ``space``.

    Exact up to floating point, except the Orlicz norm which carries the
    bisection tolerance 1e-10 (relative).  norm(|x|) == norm(x) holds
    bitwise, and norm(0) == 0.
    """
    return norm_values(space, x.values, x.measure)


# ---------------------------------------------------------------------------
# powers and duals
# ---------------------------------------------------------------------------


def power_space(space: SpaceDescriptor, r: float) -> SpaceDescriptor:
    """The r-th power X^r, simplified to a concrete family when possible.

    Simplification rules: Lp -> Lp(p/r), mixed -> exponents divided by r,
    Lorentz -> both exponents divided by r, Orlicz -> phi(s**(1/r)).
    Nested powers flatten: (X^r)^s = X^{rs}.
    """
    if not (r > 0):
        raise InvalidExponent("power exponent must be positive")
    if isinstance(space, Lp):
        return Lp(space.p / r)
    if isinstance(space, MixedNorm):
        return MixedNorm(space.p1 / r, space.p2 / r, space.mu1, space.mu2)
    if isinstance(space, Lorentz):
        return Lorentz(space.p / r, space.q / r)
    if isinstance(space, Orlicz):
        return Orlicz(space.phi.powered(r))
    if isinstance(space, PowerSpace):
        return power_space(space.base, space.r * r)
    return PowerSpace(space, r)


def dual_space(space: SpaceDescriptor) -> SpaceDescriptor:
    """Registered closed-form Koethe dual, or raise :class:`UnsupportedDual`.

    Registered pairs: L_p <-> L_{p'} for 1 <= p <= inf, and mixed norms
    with both exponents in [1, inf] (dual exponents taken componentwise).
    """
    if isinstance(space, Lp):
        if space.p < 1:
            raise UnsupportedDual(f"no closed-form dual for L_p with p={space.p} < 1")
        return Lp(holder_conjugate(space.p))
    if isinstance(space, MixedNorm):
        if space.p1 < 1 or space.p2 < 1:
            raise UnsupportedDual("no closed-form dual for mixed norms with an exponent < 1")
        return MixedNorm(
            holder_conjugate(space.p1), holder_conjugate(space.p2), space.mu1, space.mu2
        )
    if isinstance(space, DualSpace):
        return dual_space(dual_space(space.base))
    raise UnsupportedDual(f"no closed-form dual registered for {space_label(space)}")


def _rng_streams(seed: int, n: int) -> list[np.random.Generator]:
    """Deterministic child generators; results merge in stream order."""
    seq = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in seq.spawn(n)]


def _refine_nonneg(
    objective: Callable[[np.ndarray], float],
    start: np.ndarray,
    rng: np.random.Generator,
    iters: int,
) -> tuple[float, np.ndarray]:
    """Coordinate-wise multiplicative ascent with a shrinking step.

    Maximizes ``objective`` over nonnegative vectors; the objective must be
    scale-invariant or handle its own normalization.
    """
    x = np.array(start, dtype=float)
    best = objective(x)
    step = 0.5
    stall = 0
    for _ in range(iters):
        improved = False
        for j in range(x.size):
            for factor in (1.0 + step, 1.0 / (1.0 + step)):
                trial = x.copy()
                trial[j] = trial[j] * factor if trial[j] > 0 else step
                val = objective(trial)
                if val > best * (1 + 1e-14) and np.isfinite(val):
                    best, x, improved = val, trial, True
        if not improved:
            stall += 1
            step *= 0.5
            if step < 1e-9 or stall > 30:
                break
    return best, x


def sup_pairing(
    space: SpaceDescriptor,
    measure: DiscreteMeasure,
    g: np.ndarray,
    budget: SearchBudget | None = None,
) -> tuple[float, np.ndarray, bool]:
    """sup { sum_i z_i g_i mu_i : z >= 0, ||z||_space <= 1 } for g >= 0.

    Returns (value, witness z on the unit sphere, exact flag).  Closed
    forms: any L_p (single-atom extremals for p <= 1, the Hoelder extremal
    for 1 < p < inf, the constant function for p = inf) and mixed norms
    with both exponents >= 1 (iterated extremals).  Everything else is a
    lower bound from multi-start coordinate ascent.
    """
    g = np.asarray(g, dtype=float)
    w = measure.weights
    if np.all(g <= 0):
        z = np.ones(measure.n)
        nz = norm_values(space, z, measure)
        return 0.0, z / nz if nz > 0 else z, True
    if isinstance(space, Lp):
        p = space.p
        if math.isinf(p):
            z = np.ones(measure.n)
            return float(np.sum(g * w)), z, True
        if p <= 1:
            vals = g * w ** (1.0 - 1.0 / p)
            i = int(np.argmax(vals))
            z = np.zeros(measure.n)
            z[i] = w[i] ** (-1.0 / p)
            return float(vals[i]), z, True
        pp = holder_conjugate(p)
        value = _lp_values(g, w, pp)
        z = np.where(g > 0, g ** (pp / p), 0.0)
        nz = _lp_values(z, w, p)
        z = z / nz if nz > 0 else np.ones(measure.n) / _lp_values(np.ones(measure.n), w, p)
        return value, z, True
    if isinstance(space, MixedNorm) and space.p1 >= 1 and space.p2 >= 1:
        n1, n2 = space.grid
        G = g.reshape(n1, n2)
        row_vals = np.zeros(n1)
        row_wit = np.zeros((n1, n2))
        inner = Lp(space.p2)
        for i in range(n1):
            v, zi, _ = sup_pairing(inner, space.mu2, G[i], budget)
            row_vals[i] = v
            row_wit[i] = zi
        outer = Lp(space.p1)
        v, c, _ = sup_pairing(outer, space.mu1, row_vals, budget)
        z = (row_wit * c[:, None]).ravel()
        return v, z, True
    if isinstance(space, PowerSpace):
        # ||z||_{X^r} <= 1 iff || |z|^{1/r} ||_X <= 1; no closed form in general
        pass
    if isinstance(space, DualSpace):
        try:
            return sup_pairing(dual_space(space.base), measure, g, budget)
        except UnsupportedDual:
            pass
    budget = budget or SearchBudget()

    def objective(d: np.ndarray) -> float:
        nrm = norm_values(space, d, measure)
        if nrm <= 0:
            return 0.0
        return float(np.sum(d * g * w)) / nrm

    starts: list[np.ndarray] = [np.ones(measure.n), np.where(g > 0, g, 0.0) + 1e-12]
    for i in range(measure.n):
        e = np.zeros(measure.n)
        e[i] = 1.0
        starts.append(e + 1e-15)
    rngs = _rng_streams(budget.seed, budget.starts)
    for rng in rngs:
        starts.append(rng.exponential(size=measure.n))
    best_val, best_x = 0.0, starts[0]
    for k, s in enumerate(starts):
        rng = np.random.default_rng(np.random.SeedSequence(budget.seed).spawn(len(starts))[k])
        val, x = _refine_nonneg(objective, s, rng, budget.iters)
        if val > best_val:
            best_val, best_x = val, x
    nz = norm_values(space, best_x, measure)
    witness = best_x / nz if nz > 0 else best_x
    return best_val, witness, False


def koethe_dual_norm(
    space: SpaceDescriptor,
    y: LatticeFunction,
    budget: SearchBudget | None = None,
) -> tuple[float, str]:
    """Dual norm sup_{||x||_X <= 1} |integral of x y| of ``y``.

    Exact for registered closed-form pairs, otherwise a certified lower
    bound (status ``"lower-bound"``) from multi-start maximization of the
    pairing of |x| against |y| over the unit ball.
    """
    if not np.any(y.values):
        return 0.0, "exact"
    try:
        d = dual_space(space)
        return norm(d, y), "exact"
    except UnsupportedDual:
        value, _, _ = sup_pairing(space, y.measure, np.abs(y.values), budget)
        return value, "lower-bound"


# ---------------------------------------------------------------------------
# convexification
# ---------------------------------------------------------------------------


def _decomposition_cost(space, measure, parts: np.ndarray) -> float:
    return float(sum(norm_values(space, row, measure) for row in parts))


def convexification_norm(
    space: SpaceDescriptor,
    x: LatticeFunction,
    budget: SearchBudget | None = None,
) -> tuple[float, float]:
    """Enclose the largest lattice norm below the quasi-norm at |x|.

    The upper bound searches decompositions |x| <= sum_i |x_i| (greedy
    atom splitting plus local mass-transfer refinement); the lower bound
    pairs |x| against nonnegative dual witnesses v with
    <v, |z|> <= ||z|| on an adversarially grown witness set (the dual ball
    of the convexification coincides with that of the original monotone
    quasi-norm).  Returns (upper bound, upper - lower).  A gap above
    tolerance after the budget is exhausted is reported, never fatal.
    """
    from . import _simplex

    budget = budget or SearchBudget()
    av = np.abs(x.values)
    measure = x.measure
    n = measure.n
    w = measure.weights
    if not np.any(av):
        return 0.0, 0.0

    # ---- upper bound: decomposition search -------------------------------
    whole = av[None, :]
    atoms = np.diag(av)[np.nonzero(av)[0], :]
    best_cost = min(_decomposition_cost(space, measure, whole),
                    _decomposition_cost(space, measure, atoms))
    candidates = [whole, atoms]
    rngs = _rng_streams(budget.seed, max(1, budget.starts // 2))
    for rng in rngs:
        k = int(rng.integers(2, max(3, budget.parts + 1)))
        shares = rng.exponential(size=(k, n))
        shares /= shares.sum(axis=0, keepdims=True)
        candidates.append(shares * av[None, :])
    for cand in candidates:
        parts = np.array(cand, dtype=float)
        cost = _decomposition_cost(space, measure, parts)
        step = 0.5
        for _ in range(budget.iters):
            improved = False
            k = parts.shape[0]
            for j in range(n):
                if av[j] == 0:
                    continue
                for a in range(k):
                    if parts[a, j] <= 0:
                        continue
                    for b in range(k):
                        if a == b:
                            continue
                        trial = parts.copy()
                        moved = step * trial[a, j]
                        trial[a, j] -= moved
                        trial[b, j] += moved
                        c2 = _decomposition_cost(space, measure, trial)
                        if c2 < cost * (1 - 1e-14):
                            parts, cost, improved = trial, c2, True
            if not improved:
                step *= 0.5
                if step < 1e-6:
                    break
        if cost < best_cost:
            best_cost = cost
    upper = best_cost

    # ---- lower bound: dual witness via cut generation --------------------
    # maximize <v, |x|>_mu subject to <v, |z|>_mu <= ||z|| on a witness set,
    # then calibrate v against adversarially searched z.
    witnesses: list[np.ndarray] = [np.ones(n)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        witnesses.append(e)
    if np.any(av):
        witnesses.append(av / av.max())
    lower = 0.0
    v = np.zeros(n)
    for _ in range(12):
        rows = np.array([z * w for z in witnesses])
        rhs = np.array([norm_values(space, z, measure) for z in witnesses])
        res = _simplex.solve_lp(
            c=-(av * w),
            a_ub=rows,
            b_ub=rhs,
            lb=np.zeros(n),
            ub=np.full(n, 1e9),
        )
        if res.status != "optimal":
            break
        v = res.x
        val, z_bad, _ = sup_pairing(space, measure, v, budget)
        if val <= 1.0 + 1e-9:
            break
        witnesses.append(z_bad)
    # calibration: scale v so the pairing bound holds on everything found
    cal, _, _ = sup_pairing(space, measure, v, budget)
    if cal > 0:
        v = v / max(1.0, cal)
    lower = float(np.sum(v * av * w))
    lower = min(lower, upper)
    return upper, upper - lower


# ---------------------------------------------------------------------------
# descriptor metadata: axiom (II) exponent and registered best constants
# ---------------------------------------------------------------------------


def axiom_two_exponent(space: SpaceDescriptor) -> tuple[float, bool]:
    """Declared t for the t-mean triangle inequality, with an exactness flag.

    The inequality ||(|x|^t + |y|^t)^{1/t}|| <= (||x||^t + ||y||^t)^{1/t}
    holds with constant one exactly when X^t is normed by its computed
    functional.  For Lorentz spaces with q > p no power of the raw
    functional is subadditive (two atoms already give a counterexample),
    so the declared t is only approximate there.
    """
    if isinstance(space, Lp):
        return (1.0, True) if math.isinf(space.p) else (min(space.p, 1.0), True)
    if isinstance(space, MixedNorm):
        t = min(space.p1, space.p2, 1.0)
        return (t, True)
    if isinstance(space, Lorentz):
        t = min(space.p, space.q, 1.0)
        return (t, space.q <= space.p)
    if isinstance(space, Orlicz):
        if space.phi.family == "power":
            return (min(space.phi.p, 1.0), True)
        base_exact = space.phi.is_convex_norm
        return (min(1.0 / space.phi.root, 1.0), base_exact)
    if isinstance(space, PowerSpace):
        t, exact = axiom_two_exponent(space.base)
        return (t / space.r, exact)
    if isinstance(space, DualSpace):
        try:
            return axiom_two_exponent(dual_space(space.base))
        except UnsupportedDual:
            return (1.0, False)
    raise SpaceError(f"unknown space descriptor {space!r}")


def registered_constant(
    space: SpaceDescriptor, r: float, kind: str, n_atoms: int
) -> float | None:
    """Exact best convexity/concavity constant where a closed form is known.

    For L_p on n atoms (any weights):

        convexity   M = max(1, n^(1/p - 1/r))
        concavity   M = max(1, n^(1/r - 1/p))

    (the constant 1 cases are the classical r <= p, resp. r >= p, facts;
    the weighted n-power cases follow by transporting to L_1 where the
    weights cancel).  Mixed norms are registered with constant 1 for
    r <= min(p1,p2) (convexity) and r >= max(p1,p2) (concavity).  Powers
    transport via M^{(r)}(X^t) = M^{(rt)}(X)^t and duals via
    M^{(r)}(X^dual) = M_{(r')}(X) for 1 <= r.  Returns None when nothing
    exact is registered (Lorentz with p != q, Orlicz beyond plain powers).
    """
    if kind not in ("convexity", "concavity"):
        raise SpaceError(f"kind must be convexity or concavity, got {kind!r}")
    if isinstance(space, Lorentz) and space.p == space.q:
        space = Lp(space.p)
    if isinstance(space, Orlicz) and space.phi.family == "power":
        space = Lp(space.phi.p)
    if isinstance(space, Lp):
        inv_p = 0.0 if math.isinf(space.p) else 1.0 / space.p
        if kind == "convexity":
            return max(1.0, float(n_atoms) ** (inv_p - 1.0 / r))
        return max(1.0, float(n_atoms) ** (1.0 / r - inv_p))
    if isinstance(space, MixedNorm):
        if kind == "convexity" and r <= min(space.p1, space.p2):
            return 1.0
        if kind == "concavity" and r >= max(space.p1, space.p2):
            return 1.0
        return None
    if isinstance(space, PowerSpace):
        base = registered_constant(space.base, r * space.r, kind, n_atoms)
        return None if base is None else base**space.r
    if isinstance(space, DualSpace):
        if r < 1:
            return None
        try:
            dual_space(space.base)
        except UnsupportedDual:
            return None
        rp = holder_conjugate(r) if r > 1 else INF
        other = "concavity" if kind == "convexity" else "convexity"
        if math.isinf(rp):
            return None
        return registered_constant(space.base, rp, other, n_atoms)
    return None


# ---------------------------------------------------------------------------
# labels and JSON codec
# ---------------------------------------------------------------------------


def _fmt_exp(p: float) -> str:
    if math.isinf(p):
        return "inf"
    return f"{p:g}"


def space_label(space: SpaceDescriptor) -> str:
    """Compact human-readable label, used in CSV reports."""
    if isinstance(space, Lp):
        return f"Lp({_fmt_exp(space.p)})"
    if isinstance(space, MixedNorm):
        return f"Mixed({_fmt_exp(space.p1)},{_fmt_exp(space.p2)};{space.mu1.n}x{space.mu2.n})"
    if isinstance(space, Lorentz):
        return f"Lorentz({_fmt_exp(space.p)},{_fmt_exp(space.q)})"
    if isinstance(space, Orlicz):
        ph = space.phi
        if ph.family == "power":
            return f"Orlicz(s^{_fmt_exp(ph.p)})"
        if ph.family == "power_log":
            return f"Orlicz(s^{_fmt_exp(ph.p)}log;root={_fmt_exp(ph.root)})"
        return "Orlicz(custom)"
    if isinstance(space, PowerSpace):
        return f"Power({space_label(space.base)},{_fmt_exp(space.r)})"
    if isinstance(space, DualSpace):
        return f"Dual({space_label(space.base)})"
    return repr(space)


def measure_to_json(m: DiscreteMeasure) -> list[float]:
    return [float(v) for v in m.weights]


def measure_from_json(obj: Sequence[float]) -> DiscreteMeasure:
    return DiscreteMeasure(np.asarray(obj, dtype=float))


def space_to_json(space: SpaceDescriptor) -> dict:
    """Canonical JSON encoding; plain numbers round-trip bit exactly."""
    if isinstance(space, Lp):
        return {"kind": "lp", "p": space.p}
    if isinstance(space, MixedNorm):
        return {
            "kind": "mixed",
            "p1": space.p1,
            "p2": space.p2,
            "mu1": measure_to_json(space.mu1),
            "mu2": measure_to_json(space.mu2),
        }
    if isinstance(space, Lorentz):
        return {"kind": "lorentz", "p": space.p, "q": space.q}
    if isinstance(space, Orlicz):
        ph = space.phi
        if ph.family == "custom":
            raise SpaceError("custom Young functions have no JSON encoding")
        return {"kind": "orlicz", "family": ph.family, "p": ph.p, "root": ph.root}
    if isinstance(space, PowerSpace):
        return {"kind": "power", "base": space_to_json(space.base), "r": space.r}
    if isinstance(space, DualSpace):
        return {"kind": "dual", "base": space_to_json(space.base)}
    raise SpaceError(f"unknown space descriptor {space!r}")


def space_from_json(obj: dict) -> SpaceDescriptor:
    kind = obj.get("kind")
    if kind == "lp":
        return Lp(float(obj["p"]))
    if kind == "mixed":
        return MixedNorm(
            float(obj["p1"]),
            float(obj["p2"]),
            measure_from_json(obj["mu1"]),
            measure_from_json(obj["mu2"]),
        )
    if kind == "lorentz":
        return Lorentz(float(obj["p"]), float(obj["q"]))
    if kind == "orlicz":
        return Orlicz(
            YoungFunction(obj["family"], p=float(obj["p"]), root=float(obj.get("root", 1.0)))
        )
    if kind == "power":
        return PowerSpace(space_from_json(obj["base"]), float(obj["r"]))
    if kind == "dual":
        return DualSpace(space_from_json(obj["base"]))
    raise SpaceError(f"unknown space kind {kind!r}")


def dumps_canonical(obj) -> str:
    """Deterministic JSON: sorted keys, fixed separators, repr floats."""
    return json.dumps(obj, sort_keys=True, indent=2)
