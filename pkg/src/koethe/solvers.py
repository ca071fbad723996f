"""Certificate-producing solvers for weighted norm inequalities.

Given a homogeneous operator T represented into a quasi-normed function
space Y over nu (and out of either a quasi-normed domain E or a function
space X over mu), the central problem is: assuming the vector-valued
inequality

    || (sum_k |psi(T x_k)|^r)^{1/r} ||_Y  <=  C * (domain r-sum of x_k)

holds, produce weights realizing the single-vector weighted inequality

    integral |psi(Tx)|^r / omega2  d nu  <=  integral |phi(x)|^r omega1 d mu
    (right side = ||x||_E^r when the domain is a plain quasi-normed space)

together with the norm bounds

    sup_{||y||_{L_r(nu)} <= 1} || omega2^{1/r} y ||_Y  <=  C * M_(r)(Y)
    sup_{||x||_X <= 1} || omega1^{1/r} x ||_{L_r(mu)}  <=  M^{(r)}(X).

Solvers here certify numerically: every certificate records bounds that
are recomputed from raw data at construction, plus the worst domination
violation an adversarial search could find.  Inner maximizations are
nonconvex except for r = 2 with a Euclidean domain, where the domination
constraint is a largest-eigenvalue condition and is checked exactly.

Three engines are provided:

* ``solve_weight_pair``  minimizes the multiplication norm of omega2
  subject to domination.  The default "direct" method runs subgradient
  descent on the scale-invariant composite log objective (the rescaling
  trick makes the domination constraint an exact post-hoc scaling); the
  "scaling" method reduces the exponent by s = t/2, runs the minimax
  engine on the induced pairing form against the dual of Y^s, and
  extracts the weight from the resulting functional.  The two routes are
  independent and are cross-checked in the tests.
* ``solve_minimax``      a cutting-plane feasibility solver producing the
  pair of positive functionals that turn a dominated bilinear form into a
  product bound; cuts are affine in the functionals.
* ``solve_pietsch``      column-generation LP for the domination measure
  of an operator on a sup-normed coordinate domain.

The LP master used everywhere is the self-contained bounded simplex from
``_simplex``; no external solver is involved.  All randomness flows from
the seed in :class:`SolverConfig`, so identical configs give identical
certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import _simplex
from .core import (
    INF,
    DiscreteMeasure,
    LatticeFunction,
    Lp,
    SearchBudget,
    SpaceDescriptor,
    SpaceError,
    holder_conjugate,
    measure_to_json,
    norm_values,
    power_space,
    registered_constant,
    space_label,
    space_to_json,
    sup_pairing,
)

__all__ = [
    "SolverConfig",
    "SolverInfeasible",
    "IllPosedFactorization",
    "NormedDomain",
    "SpaceDomain",
    "OperatorSpec",
    "FormSpec",
    "WeightCertificate",
    "MinimaxCertificate",
    "PietschCertificate",
    "FactorizationResult",
    "VerificationReport",
    "euclidean_domain",
    "sup_domain",
    "multiplication_norm",
    "solve_weight_pair",
    "solve_weight_domain",
    "solve_minimax",
    "solve_pietsch",
    "pietsch_upper_bound",
    "build_factorization_range",
    "build_factorization_domain",
    "verify_weight_certificate",
]


class SolverInfeasible(RuntimeError):
    """No certificate within tolerance; carries the best attempt found."""

    def __init__(self, message, residual=None, witness=None, best=None):
        super().__init__(message)
        self.residual = residual
        self.witness = witness
        self.best = best


class IllPosedFactorization(RuntimeError):
    """The weight vanishes where the operator does not; certificate violated."""


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    tolerance: float = 1e-6
    lp_tolerance: float = 1e-9
    max_iterations: int = 300
    inner_starts: int = 10
    inner_iters: int = 80
    verify_samples: int = 120
    method: str = "direct"  # weight pair: "direct" | "scaling"


# ---------------------------------------------------------------------------
# operator and domain descriptions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormedDomain:
    """A plain quasi-normed domain E, represented by ||x||_E on one atom."""

    norm_fn: Callable[[np.ndarray], float]
    dim: int
    name: str = "custom"
    euclidean: bool = False


def euclidean_domain(dim: int) -> NormedDomain:
    return NormedDomain(lambda x: float(np.linalg.norm(x)), dim, "euclidean", True)


def sup_domain(dim: int) -> NormedDomain:
    return NormedDomain(lambda x: float(np.max(np.abs(x))), dim, "sup", False)


@dataclass(frozen=True, eq=False)
class SpaceDomain:
    """A function-space domain X(mu) reached through a homogeneous phi >= 0.

    ``phi_abs`` maps a coefficient vector of length ``dim`` to nonnegative
    lattice values over mu; the identity representation (dim == number of
    atoms, phi = absolute value) is the default.
    """

    space: SpaceDescriptor
    measure: DiscreteMeasure
    dim: int | None = None
    phi_abs: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.dim is None:
            object.__setattr__(self, "dim", self.measure.n)

    def phi_abs_values(self, x: np.ndarray) -> np.ndarray:
        if self.phi_abs is None:
            return np.abs(np.asarray(x, dtype=float))
        return np.asarray(self.phi_abs(np.asarray(x, dtype=float)), dtype=float)


Domain = Union[NormedDomain, SpaceDomain]


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """A homogeneous operator with lattice representations on both sides.

    Either ``matrix`` (codomain values = matrix @ x) or ``apply_fn`` must
    be given.  ``psi_abs_fn`` post-composes with the codomain
    representation; by default |psi(Tx)| = |Tx| entrywise.  Homogeneity
    T(lam x) = lam T(x) for lam >= 0 is spot-checked at construction.
    """

    domain: Domain
    codomain_space: SpaceDescriptor
    codomain_measure: DiscreteMeasure
    matrix: np.ndarray | None = None
    apply_fn: Callable[[np.ndarray], np.ndarray] | None = None
    psi_abs_fn: Callable[[np.ndarray], np.ndarray] | None = None
    rep_domain: str = "B"
    rep_codomain: str = "C"

    def __post_init__(self):
        if self.matrix is None and self.apply_fn is None:
            raise SpaceError("operator needs a matrix or an apply callback")
        if self.matrix is not None:
            m = np.array(self.matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != self.codomain_measure.n:
                raise SpaceError(
                    f"matrix shape {m.shape} does not match codomain atoms "
                    f"{self.codomain_measure.n}"
                )
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)
        rng = np.random.default_rng(1234)
        for _ in range(3):
            x = rng.normal(size=self.input_dim)
            lam = float(rng.uniform(0.1, 3.0))
            lhs = self.apply(lam * x)
            rhs = lam * self.apply(x)
            scale = np.max(np.abs(rhs)) + 1e-30
            if np.max(np.abs(lhs - rhs)) > 1e-7 * scale:
                raise SpaceError("operator failed the homogeneity spot check")

    @property
    def input_dim(self) -> int:
        if self.matrix is not None:
            return int(self.matrix.shape[1])
        return int(self.domain.dim)

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.matrix is not None:
            return self.matrix @ x
        return np.asarray(self.apply_fn(x), dtype=float)

    def apply_abs(self, x: np.ndarray) -> np.ndarray:
        """|psi(T x)| as nonnegative lattice values over the codomain."""
        if self.psi_abs_fn is not None:
            return np.asarray(self.psi_abs_fn(np.asarray(x, dtype=float)), dtype=float)
        return np.abs(self.apply(x))

    def domain_norm(self, x: np.ndarray) -> float:
        if isinstance(self.domain, NormedDomain):
            return float(self.domain.norm_fn(np.asarray(x, dtype=float)))
        return norm_values(
            self.domain.space, self.domain.phi_abs_values(x), self.domain.measure
        )

    def domain_tuple_norm(self, mat: np.ndarray, r: float) -> float:
        """The domain side of the vector-valued inequality for a tuple."""
        if isinstance(self.domain, NormedDomain):
            norms = np.array([self.domain_norm(row) for row in mat])
            return float(np.sum(norms**r) ** (1.0 / r))
        phi = np.array([self.domain.phi_abs_values(row) for row in mat])
        envelope = np.sum(phi**r, axis=0) ** (1.0 / r)
        return norm_values(self.domain.space, envelope, self.domain.measure)

    def zero_codomain_atoms(self) -> np.ndarray:
        """Boolean mask of atoms where psi(Tx) vanishes for every probe."""
        if self.matrix is not None and self.psi_abs_fn is None:
            return np.all(self.matrix == 0.0, axis=1)
        rng = np.random.default_rng(98765)
        peak = np.zeros(self.codomain_measure.n)
        for _ in range(32):
            peak = np.maximum(peak, self.apply_abs(rng.normal(size=self.input_dim)))
        for i in range(self.input_dim):
            e = np.zeros(self.input_dim)
            e[i] = 1.0
            peak = np.maximum(peak, self.apply_abs(e))
            peak = np.maximum(peak, self.apply_abs(-e))
        return peak == 0.0

    def is_zero(self) -> bool:
        return bool(np.all(self.zero_codomain_atoms()))

    def to_json(self) -> dict:
        dom: dict
        if isinstance(self.domain, NormedDomain):
            dom = {"kind": self.domain.name, "dim": self.domain.dim}
        else:
            dom = {
                "kind": "space",
                "space": space_to_json(self.domain.space),
                "measure": measure_to_json(self.domain.measure),
                "dim": self.domain.dim,
            }
        if self.matrix is None:
            raise SpaceError("only matrix operators have a JSON encoding")
        return {
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "domain": dom,
            "codomain": {
                "space": space_to_json(self.codomain_space),
                "measure": measure_to_json(self.codomain_measure),
            },
        }


# ---------------------------------------------------------------------------
# adversarial inner searches
# ---------------------------------------------------------------------------


def _refine_signed(objective, start, iters):
    """Greedy coordinate refinement (multiplicative, sign flip, zero).

    Maximizes a scale-invariant objective over signed vectors.
    """
    x = np.array(start, dtype=float)
    best = objective(x)
    step = 0.5
    for _ in range(iters):
        improved = False
        for j in range(x.size):
            base = x[j]
            moves = [base * (1 + step), base / (1 + step), -base, 0.0]
            if base == 0.0:
                moves.extend([step, -step])
            for mv in moves:
                trial = x.copy()
                trial[j] = mv
                val = objective(trial)
                if np.isfinite(val) and val > best * (1 + 1e-13) + 1e-300:
                    best, x, improved = val, trial, True
        if not improved:
            step *= 0.5
            if step < 1e-8:
                break
    return best, x


def _adversarial_max(objective, dim, cfg: SolverConfig, seed_shift=0, extra_starts=()):
    """Multi-start maximization of a scale-invariant objective over R^dim."""
    streams = np.random.SeedSequence(cfg.seed + seed_shift).spawn(cfg.inner_starts)
    starts = [np.ones(dim)]
    for i in range(min(dim, 8)):
        e = np.zeros(dim)
        e[i] = 1.0
        starts.append(e)
    starts.extend(np.asarray(s, dtype=float) for s in extra_starts)
    for st in streams:
        starts.append(np.random.default_rng(st).normal(size=dim))
    best_val, best_x = -np.inf, starts[0]
    for s in starts:
        if not np.any(s):
            continue
        val, x = _refine_signed(objective, s, cfg.inner_iters)
        if val > best_val:
            best_val, best_x = val, x
    return best_val, best_x


def _domination_sup(op: OperatorSpec, r: float, u_full: np.ndarray, cfg: SolverConfig,
                    omega1: np.ndarray | None = None, seed_shift=0):
    """sup over x of (integral |psi Tx|^r u dnu) / (domain r-term).

    The domain r-term is ||x||_E^r for plain domains and
    integral |phi x|^r omega1 dmu for function-space domains.  Exact via
    the largest eigenvalue for r = 2 with a Euclidean domain and a matrix
    operator; the worst value found otherwise.
    """
    nu_w = op.codomain_measure.weights

    if (
        isinstance(op.domain, NormedDomain)
        and op.domain.euclidean
        and r == 2.0
        and op.matrix is not None
        and op.psi_abs_fn is None
    ):
        weighted = op.matrix.T @ (op.matrix * (nu_w * u_full)[:, None])
        vals, vecs = np.linalg.eigh(weighted)
        return float(vals[-1]), vecs[:, -1]

    if isinstance(op.domain, NormedDomain):

        def objective(x):
            den = op.domain_norm(x) ** r
            if den <= 0:
                return -np.inf
            a = op.apply_abs(x) ** r
            return float(np.sum(a * u_full * nu_w)) / den

    else:
        mu_w = op.domain.measure.weights

        def objective(x):
            phi = op.domain.phi_abs_values(x) ** r
            den = float(np.sum(phi * omega1 * mu_w))
            a = op.apply_abs(x) ** r
            num = float(np.sum(a * u_full * nu_w))
            if den <= 0:
                return np.inf if num > 0 else -np.inf
            return num / den

    val, x = _adversarial_max(objective, op.input_dim, cfg, seed_shift=seed_shift)
    return val, x


# ---------------------------------------------------------------------------
# multiplication norms
# ---------------------------------------------------------------------------


def multiplication_norm(
    g: np.ndarray,
    r: float,
    space: SpaceDescriptor,
    measure: DiscreteMeasure,
    cfg: SolverConfig | None = None,
) -> tuple[float, str]:
    """Norm of M_g : L_r(nu) -> Y(nu), g >= 0.

    Closed forms for Y = L_p: Hoelder gives ||g||_{L_s} with
    1/s = 1/p - 1/r when p < r, the sup norm of g when p = r, and a
    single-atom extremal when p > r.  Everything else is a numerical
    lower-bound supremum (reported as such).
    """
    g = np.asarray(g, dtype=float)
    w = measure.weights
    if not np.any(g > 0):
        return 0.0, "closed-form"
    if isinstance(space, Lp):
        p = space.p
        if p == r:
            return float(np.max(g)), "closed-form"
        if p < r:
            s = 1.0 / (1.0 / p - 1.0 / r)
            m = float(g.max())
            return m * float(np.sum((g / m) ** s * w)) ** (1.0 / s), "closed-form"
        inv_p = 0.0 if math.isinf(p) else 1.0 / p
        return float(np.max(g * w ** (inv_p - 1.0 / r))), "closed-form"
    cfg = cfg or SolverConfig()

    def objective(y):
        ya = np.abs(y)
        den = norm_values(Lp(r), ya, measure)
        if den <= 0:
            return -np.inf
        return norm_values(space, g * ya, measure) / den

    val, _ = _adversarial_max(objective, measure.n, cfg, seed_shift=771)
    return float(val), "numerical"


def _mult_norm_value_grad(u, r, space, measure, cfg):
    """Value and gradient of u -> || M_{u^{-1/r}} : L_r -> Y || on u > 0.

    Closed-form gradient for Y = L_p; a Danskin subgradient at the best
    inner witness with finite differences on the codomain norm otherwise.
    """
    w = measure.weights
    g = u ** (-1.0 / r)
    if isinstance(space, Lp):
        p = space.p
        if p < r:
            s = 1.0 / (1.0 / p - 1.0 / r)
            m = float(g.max())
            val = m * float(np.sum((g / m) ** s * w)) ** (1.0 / s)
            # d val / d g_i = (val / sum)^(1-s)-style closed form
            core = np.sum(g**s * w)
            dval_dg = g ** (s - 1.0) * w * core ** (1.0 / s - 1.0)
        elif p == r:
            i = int(np.argmax(g))
            val = float(g[i])
            dval_dg = np.zeros_like(g)
            dval_dg[i] = 1.0
        else:
            inv_p = 0.0 if math.isinf(p) else 1.0 / p
            scaled = g * w ** (inv_p - 1.0 / r)
            i = int(np.argmax(scaled))
            val = float(scaled[i])
            dval_dg = np.zeros_like(g)
            dval_dg[i] = w[i] ** (inv_p - 1.0 / r)
    else:
        def objective(y):
            ya = np.abs(y)
            den = norm_values(Lp(r), ya, measure)
            if den <= 0:
                return -np.inf
            return norm_values(space, g * ya, measure) / den

        val, y_star = _adversarial_max(objective, measure.n, cfg, seed_shift=773)
        ya = np.abs(y_star)
        den = norm_values(Lp(r), ya, measure)
        ya = ya / den
        base = g * ya
        val = norm_values(space, base, measure)
        dval_dg = np.zeros_like(g)
        h = 1e-6 * (np.max(base) + 1e-30)
        for i in range(g.size):
            bumped = base.copy()
            bumped[i] += h
            dval_dg[i] = (norm_values(space, bumped, measure) - val) / h * ya[i]
    dg_du = (-1.0 / r) * u ** (-1.0 / r - 1.0)
    return val, dval_dg * dg_du


# ---------------------------------------------------------------------------
# weight certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightCertificate:
    """Weights realizing a weighted norm inequality, with recomputed bounds.

    ``bounds`` carries the recomputed norm values next to the limits they
    must respect, and records whether each auxiliary constant came from a
    registered closed form or a numerical estimate.  ``residual`` is the
    worst domination violation (relative) found by adversarial search.
    """

    kind: str  # "range" | "domain"
    r: float
    constant: float
    omega2: np.ndarray | None
    omega1: np.ndarray | None
    bounds: dict
    residual: float
    metadata: dict

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "r": self.r,
            "constant": self.constant,
            "omega2": None if self.omega2 is None else [float(v) for v in self.omega2],
            "omega1": None if self.omega1 is None else [float(v) for v in self.omega1],
            "bounds": self.bounds,
            "residual": self.residual,
            "metadata": self.metadata,
        }


def _concavity_constant(space, measure, r, supplied, cfg) -> tuple[float, str]:
    if supplied is not None:
        return float(supplied), "supplied"
    reg = registered_constant(space, r, "concavity", measure.n)
    if reg is not None:
        return reg, "registered"
    from .constants import estimate_space_constant

    est = estimate_space_constant(
        space, measure, r, "concavity",
        SearchBudget(starts=4, iters=40, seed=cfg.seed + 17),
    )
    return est.value, "estimate"


def _convexity_constant(space, measure, r, supplied, cfg) -> tuple[float, str]:
    if supplied is not None:
        return float(supplied), "supplied"
    reg = registered_constant(space, r, "convexity", measure.n)
    if reg is not None:
        return reg, "registered"
    from .constants import estimate_space_constant

    est = estimate_space_constant(
        space, measure, r, "convexity",
        SearchBudget(starts=4, iters=40, seed=cfg.seed + 19),
    )
    return est.value, "estimate"


def _finalize_pair_certificate(op, r, C, omega2, omega1, cfg, conc, conc_src,
                               conv=None, conv_src=None, extra=None):
    """Recompute every recorded bound from the raw weights."""
    nu = op.codomain_measure
    active = omega2 > 0
    u_full = np.where(active, 1.0 / np.where(active, omega2, 1.0), 0.0)
    # zero weights are only allowed where the operator vanishes
    dead = op.zero_codomain_atoms()
    if np.any(~active & ~dead):
        raise SolverInfeasible(
            "weight vanishes on an atom where the operator does not",
            witness=np.nonzero(~active & ~dead)[0].tolist(),
        )
    if isinstance(op.domain, NormedDomain):
        dom_sup, witness = _domination_sup(op, r, u_full, cfg, seed_shift=31)
        residual = dom_sup - 1.0
        domain_bound_value = 1.0
        domain_limit = 1.0
    else:
        dom_sup, witness = _domination_sup(op, r, u_full, cfg, omega1=omega1, seed_shift=31)
        residual = dom_sup - 1.0
        Xr = power_space(op.domain.space, r)
        val, _, _ = sup_pairing(Xr, op.domain.measure, omega1)
        domain_bound_value = val ** (1.0 / r)
        domain_limit = conv
    g = omega2 ** (1.0 / r)
    mult, mult_method = multiplication_norm(g, r, op.codomain_space, nu, cfg)
    bounds = {
        "mult_norm": float(mult),
        "mult_limit": float(C * conc),
        "mult_method": mult_method,
        "domain_weight_norm": float(domain_bound_value),
        "domain_weight_limit": float(domain_limit),
        "concavity_constant": {"value": float(conc), "source": conc_src},
    }
    if conv is not None:
        bounds["convexity_constant"] = {"value": float(conv), "source": conv_src}
    meta = {"seed": cfg.seed, "method": cfg.method}
    if extra:
        meta.update(extra)
    cert = WeightCertificate(
        kind="range",
        r=r,
        constant=float(C),
        omega2=omega2,
        omega1=omega1,
        bounds=bounds,
        residual=float(residual),
        metadata=meta,
    )
    tol = cfg.tolerance
    if residual > tol:
        raise SolverInfeasible(
            "domination violated beyond tolerance after rescaling",
            residual=float(residual),
            witness=np.asarray(witness).tolist(),
            best=cert,
        )
    if mult > C * conc * (1 + tol):
        raise SolverInfeasible(
            "multiplication norm exceeds C * M_(r)(Y); "
            "the hypothesis constant C looks too small",
            residual=float(mult - C * conc),
            witness=np.asarray(witness).tolist(),
            best=cert,
        )
    return cert


def solve_weight_pair(
    op: OperatorSpec,
    r: float,
    C: float,
    cfg: SolverConfig | None = None,
    concavity_constant: float | None = None,
    convexity_constant: float | None = None,
) -> WeightCertificate:
    """Weight(s) for an r-convex operator into an r-concave codomain.

    ``C`` is the constant with which the vector-valued hypothesis is
    assumed; it is folded into the multiplication-norm bound by
    homogeneity, so the domination side is certified with constant one.
    Raises :class:`SolverInfeasible` when no weight meets the bound within
    tolerance (the usual cause is a hypothesis constant below the true
    one).
    """
    cfg = cfg or SolverConfig()
    if C <= 0:
        raise SpaceError("hypothesis constant must be positive")
    conc, conc_src = _concavity_constant(
        op.codomain_space, op.codomain_measure, r, concavity_constant, cfg
    )
    if op.is_zero():
        nu = op.codomain_measure
        omega2 = np.zeros(nu.n)
        omega1 = None
        if isinstance(op.domain, SpaceDomain):
            omega1 = np.zeros(op.domain.measure.n)
        bounds = {
            "mult_norm": 0.0,
            "mult_limit": float(C * conc),
            "mult_method": "closed-form",
            "domain_weight_norm": 0.0,
            "domain_weight_limit": 1.0,
            "concavity_constant": {"value": float(conc), "source": conc_src},
        }
        return WeightCertificate(
            "range", r, float(C), omega2, omega1, bounds, 0.0,
            {"seed": cfg.seed, "method": "zero-operator"},
        )
    if isinstance(op.domain, NormedDomain):
        if cfg.method == "scaling":
            return _solve_pair_scaling(op, r, C, cfg, conc, conc_src)
        return _solve_pair_direct(op, r, C, cfg, conc, conc_src)
    return _solve_pair_space_domain(
        op, r, C, cfg, conc, conc_src, convexity_constant
    )


def _solve_pair_direct(op, r, C, cfg, conc, conc_src):
    """Scale-invariant subgradient descent on log h(u)/r + log F(u).

    h(u) is the worst weighted image mass over the domain unit sphere
    (linear in u for each fixed x, so convex), F(u) the multiplication
    norm of u^{-1/r}; both are positively homogeneous, which makes the
    composite scale-invariant.  The minimizer is rescaled afterwards so
    the domination constraint holds exactly.
    """
    nu = op.codomain_measure
    dead = op.zero_codomain_atoms()
    act = ~dead
    n_act = int(act.sum())

    def h_and_grad(u_act):
        u_full = np.zeros(nu.n)
        u_full[act] = u_act
        val, x = _domination_sup(op, r, u_full, cfg, seed_shift=7)
        a = op.apply_abs(np.asarray(x)) ** r * nu.weights
        if isinstance(op.domain, NormedDomain):
            den = op.domain_norm(np.asarray(x)) ** r
            a = a / den
        return val, a[act], x

    def f_and_grad(u_act):
        return _mult_norm_value_grad(
            u_act, r, op.codomain_space, _restrict_measure(nu, act), cfg
        )

    v = np.zeros(n_act)
    u0 = np.ones(n_act)
    h0, _, _ = h_and_grad(u0)
    if h0 > 0:
        v = np.full(n_act, -math.log(h0))  # start where h(u) = 1
    best = None
    step = 0.5
    val_h, grad_h, _ = h_and_grad(np.exp(v))
    val_f, grad_f = f_and_grad(np.exp(v))
    current = math.log(max(val_h, 1e-300)) / r + math.log(max(val_f, 1e-300))
    for it in range(cfg.max_iterations):
        u = np.exp(v)
        grad_v = u * (grad_h / (r * max(val_h, 1e-300)) + grad_f / max(val_f, 1e-300))
        gnorm = float(np.linalg.norm(grad_v))
        if gnorm < 1e-14:
            break
        accepted = False
        while step > 1e-12:
            v_try = v - step * grad_v / gnorm
            u_try = np.exp(np.clip(v_try, -60, 60))
            h_try, gh_try, _ = h_and_grad(u_try)
            f_try, gf_try = f_and_grad(u_try)
            val_try = math.log(max(h_try, 1e-300)) / r + math.log(max(f_try, 1e-300))
            if val_try < current - 1e-14:
                v = np.clip(v_try, -60, 60)
                val_h, grad_h, val_f, grad_f = h_try, gh_try, f_try, gf_try
                current = val_try
                accepted = True
                step *= 1.3
                break
            step *= 0.5
        if best is None or current < best[0]:
            best = (current, v.copy())
        if not accepted and step <= 1e-12:
            break
    if best is not None and best[0] < current:
        v = best[1]
    u = np.exp(v)
    # exact rescale: tighten domination, then fold into the weight
    u_full = np.zeros(nu.n)
    u_full[act] = u
    h_final, _ = _domination_sup(op, r, u_full, cfg, seed_shift=91)
    omega2 = np.zeros(nu.n)
    omega2[act] = h_final * (1 + 1e-12) / u
    return _finalize_pair_certificate(
        op, r, C, omega2, None, cfg, conc, conc_src,
        extra={"iterations": cfg.max_iterations, "path": "direct"},
    )


def _restrict_measure(measure: DiscreteMeasure, mask: np.ndarray) -> DiscreteMeasure:
    return DiscreteMeasure(measure.weights[mask])


def _solve_pair_space_domain(op, r, C, cfg, conc, conc_src, convexity_constant):
    """Joint cutting-plane solve for (omega1, omega2) on a space domain.

    Works on u = 1/omega2 (restricted to live atoms) and omega1; the
    domination constraints and the omega1 norm bound are linear, the
    multiplication-norm objective enters through supporting cuts.
    """
    nu = op.codomain_measure
    mu = op.domain.measure
    conv, conv_src = _convexity_constant(op.domain.space, mu, r, convexity_constant, cfg)
    dead = op.zero_codomain_atoms()
    act = ~dead
    n_act = int(act.sum())
    n_mu = mu.n
    nu_act = _restrict_measure(nu, act)
    Xr = power_space(op.domain.space, r)

    def a_vec(x):
        return (op.apply_abs(x) ** r * nu.weights)[act]

    def b_vec(x):
        return op.domain.phi_abs_values(x) ** r * mu.weights

    # scale anchor: uniform u with worst domination ratio one against omega1=1
    rng = np.random.default_rng(cfg.seed + 5)
    probes = [rng.normal(size=op.input_dim) for _ in range(16)]
    ratios = []
    for x in probes:
        a, b = a_vec(x), b_vec(x)
        sb = float(np.sum(b))
        if sb > 0 and np.sum(a) > 0:
            ratios.append(float(np.sum(a)) / sb)
    scale = max(ratios) if ratios else 1.0
    u_ref = 1.0 / max(scale, 1e-12)
    u_lo = np.full(n_act, u_ref * 1e-7)
    u_hi = np.full(n_act, u_ref * 1e7)

    dom_cuts: list[tuple[np.ndarray, np.ndarray]] = []
    bound_cuts: list[np.ndarray] = []
    obj_cuts: list[tuple[np.ndarray, float]] = []  # tau >= g.u + const

    # seed the bound cuts with coordinate and constant witnesses
    seeds_z = [np.ones(n_mu)]
    for i in range(n_mu):
        e = np.zeros(n_mu)
        e[i] = 1.0
        seeds_z.append(e)
    for z in seeds_z:
        nz = norm_values(op.domain.space, z, mu)
        if nz > 0:
            bound_cuts.append((z / nz) ** r * mu.weights)
    for x in probes:
        dom_cuts.append((a_vec(x), b_vec(x)))

    u_cur = np.full(n_act, u_ref)
    omega1 = np.ones(n_mu)
    iterations = 0
    for outer in range(max(8, cfg.max_iterations // 10)):
        iterations = outer + 1
        fval, fgrad = _mult_norm_value_grad(u_cur, r, op.codomain_space, nu_act, cfg)
        obj_cuts.append((fgrad, fval - float(fgrad @ u_cur)))
        # assemble LP over (u, omega1, tau)
        nv = n_act + n_mu + 1
        a_ub, b_ub = [], []
        for gvec, const in obj_cuts:
            row = np.zeros(nv)
            row[:n_act] = gvec
            row[-1] = -1.0
            a_ub.append(row)
            b_ub.append(-const)
        for a, b in dom_cuts:
            row = np.zeros(nv)
            row[:n_act] = a
            row[n_act:-1] = -b
            a_ub.append(row)
            b_ub.append(0.0)
        for zrow in bound_cuts:
            row = np.zeros(nv)
            row[n_act:-1] = zrow
            a_ub.append(row)
            b_ub.append(conv**r)
        lb = np.concatenate([u_lo, np.zeros(n_mu), [0.0]])
        ub = np.concatenate([u_hi, np.full(n_mu, 1e9), [1e9]])
        c = np.zeros(nv)
        c[-1] = 1.0
        res = _simplex.solve_lp(c, a_ub=np.array(a_ub), b_ub=np.array(b_ub), lb=lb, ub=ub)
        if res.status != "optimal":
            break
        u_cur = np.maximum(res.x[:n_act], u_lo)
        omega1 = np.maximum(res.x[n_act:-1], 0.0)
        # separation: domination and omega1-bound violations
        u_full = np.zeros(nu.n)
        u_full[act] = u_cur
        viol, x_bad = _domination_sup(op, r, u_full, cfg, omega1=omega1, seed_shift=101 + outer)
        new_cut = False
        if viol > 1 + cfg.tolerance * 0.1:
            dom_cuts.append((a_vec(np.asarray(x_bad)), b_vec(np.asarray(x_bad))))
            new_cut = True
        bval, z_bad, _ = sup_pairing(Xr, mu, omega1)
        if bval > conv**r * (1 + cfg.tolerance * 0.1):
            zb = np.abs(z_bad) ** r * mu.weights
            bound_cuts.append(zb)
            new_cut = True
        if not new_cut and outer > 0:
            break
    # finalize: make the omega1 bound tight, then rescale omega2 for domination
    bval, _, _ = sup_pairing(Xr, mu, omega1)
    if bval > 0:
        omega1 = omega1 * (conv**r / bval)
    u_full = np.zeros(nu.n)
    u_full[act] = u_cur
    beta, _ = _domination_sup(op, r, u_full, cfg, omega1=omega1, seed_shift=301)
    omega2 = np.zeros(nu.n)
    omega2[act] = beta * (1 + 1e-12) / u_cur
    return _finalize_pair_certificate(
        op, r, C, omega2, omega1, cfg, conc, conc_src, conv, conv_src,
        extra={"iterations": iterations, "path": "space-domain"},
    )


def _solve_pair_scaling(op, r, C, cfg, conc, conc_src):
    """Exponent-halving reduction through the minimax engine.

    For a codomain L_p with p < r: pick t with the triangle inequality in
    the t-mean (t = min(p, 1)), put s = t/2, and consider the pairing form
    u(x, y) = integral |Tx/C|^s y dnu on E x L_{(p/s)'}.  The minimax
    engine returns a positive functional on the dual side; its density g
    yields the weight omega2 = C^r g^{r/s - 1} after the exact rescale.
    """
    Y = op.codomain_space
    if not isinstance(Y, Lp) or not (Y.p < r):
        raise SpaceError("the scaling route needs a codomain L_p with p < r")
    nu = op.codomain_measure
    p = Y.p
    t = min(p, 1.0)
    s = t / 2.0
    r1 = r / s
    r2 = holder_conjugate(r1)
    dual_p = holder_conjugate(p / s)
    dirac = DiscreteMeasure(np.ones(1))

    def u_form(x, y):
        return float(np.sum((op.apply_abs(x) / C) ** s * y * nu.weights))

    form = FormSpec(
        u=u_form,
        phi1=lambda x: np.array([op.domain_norm(x) ** s]),
        phi2=lambda y: np.abs(y),
        space1=Lp(r1),
        measure1=dirac,
        space2=Lp(dual_p),
        measure2=nu,
        r1=r1,
        r2=r2,
        dim1=op.input_dim,
        dim2=nu.n,
        conv1=1.0,
        conv2=1.0,
        scale1=lambda lam, x: lam ** (1.0 / s) * x,
    )
    mm = solve_minimax(form, cfg)
    g2 = np.maximum(mm.phi2, 0.0)
    exponent = r / s - 1.0
    dead = op.zero_codomain_atoms()
    omega2 = np.where(dead, 0.0, C**r * g2**exponent)
    # exact rescale to domination with constant one
    act = ~dead
    u_full = np.zeros(nu.n)
    with np.errstate(divide="ignore"):
        u_full[act] = 1.0 / omega2[act]
    if not np.all(np.isfinite(u_full[act])):
        raise SolverInfeasible(
            "minimax functional vanished on a live atom", best=mm
        )
    beta, _ = _domination_sup(op, r, u_full, cfg, seed_shift=411)
    omega2[act] = omega2[act] * beta * (1 + 1e-12)
    return _finalize_pair_certificate(
        op, r, C, omega2, None, cfg, conc, conc_src,
        extra={"path": "scaling", "minimax_iterations": mm.metadata.get("iterations")},
    )


def solve_weight_domain(
    op: OperatorSpec,
    r: float,
    C: float,
    cfg: SolverConfig | None = None,
) -> WeightCertificate:
    """Weight omega1 for an r-concave operator on an r-convex domain.

    Finds omega1 >= 0 with ||Tx||_F <= (integral |x|^r omega1 dmu)^{1/r}
    for all x while keeping sup_{||x||_X <= 1} of the same integral below
    C^r.  Kelley cutting planes: domination constraints are linear lower
    bounds in omega1, and the norm bound enters through unit-ball
    witnesses, which are exact for L_p and mixed-norm domains.
    """
    cfg = cfg or SolverConfig()
    if not isinstance(op.domain, SpaceDomain):
        raise SpaceError("solve_weight_domain needs a function-space domain")
    mu = op.domain.measure
    nu = op.codomain_measure
    n_mu = mu.n
    Xr = power_space(op.domain.space, r)

    def f_norm(x):
        return norm_values(op.codomain_space, op.apply_abs(x), nu)

    def b_vec(x):
        return op.domain.phi_abs_values(x) ** r * mu.weights

    if op.is_zero():
        omega1 = np.zeros(n_mu)
        bounds = {
            "domain_weight_norm": 0.0,
            "domain_weight_limit": float(C),
        }
        return WeightCertificate(
            "domain", r, float(C), None, omega1, bounds, 0.0,
            {"seed": cfg.seed, "method": "zero-operator"},
        )

    def dom_violation(omega1, shift):
        def objective(x):
            num = f_norm(x) ** r
            den = float(np.sum(op.domain.phi_abs_values(x) ** r * mu.weights * omega1))
            if den <= 0:
                return np.inf if num > 0 else -np.inf
            return num / den

        return _adversarial_max(objective, op.input_dim, cfg, seed_shift=shift)

    rng = np.random.default_rng(cfg.seed + 3)
    witnesses = [rng.normal(size=op.input_dim) for _ in range(12)]
    for i in range(min(op.input_dim, 8)):
        e = np.zeros(op.input_dim)
        e[i] = 1.0
        witnesses.append(e)
    bound_cuts = []
    seeds_z = [np.ones(n_mu)] + [np.eye(n_mu)[i] for i in range(n_mu)]
    for z in seeds_z:
        nz = norm_values(op.domain.space, z, mu)
        if nz > 0:
            bound_cuts.append((z / nz) ** r * mu.weights)
    omega1 = np.ones(n_mu)
    iterations = 0
    for outer in range(max(8, cfg.max_iterations // 10)):
        iterations = outer + 1
        nv = n_mu + 1  # omega1, tau
        a_ub, b_ub = [], []
        for x in witnesses:
            b = b_vec(x)
            rhs = f_norm(x) ** r
            if rhs <= 0 and not np.any(b):
                continue
            row = np.zeros(nv)
            row[:n_mu] = -b
            a_ub.append(row)
            b_ub.append(-rhs)
        for zrow in bound_cuts:
            row = np.zeros(nv)
            row[:n_mu] = zrow
            row[-1] = -1.0
            a_ub.append(row)
            b_ub.append(0.0)
        c = np.zeros(nv)
        c[-1] = 1.0
        res = _simplex.solve_lp(
            c, a_ub=np.array(a_ub), b_ub=np.array(b_ub),
            lb=np.zeros(nv), ub=np.full(nv, 1e9),
        )
        if res.status != "optimal":
            break
        omega1 = np.maximum(res.x[:n_mu], 0.0)
        new_cut = False
        viol, x_bad = dom_violation(omega1, 501 + outer)
        if viol > 1 + cfg.tolerance * 0.1:
            witnesses.append(np.asarray(x_bad, dtype=float))
            new_cut = True
        bval, z_bad, _ = sup_pairing(Xr, mu, omega1)
        if bval > res.x[-1] * (1 + cfg.tolerance * 0.1) + 1e-15:
            bound_cuts.append(np.abs(z_bad) ** r * mu.weights)
            new_cut = True
        if not new_cut and outer > 0:
            break
    # rescale to exact domination
    beta, x_bad = dom_violation(omega1, 901)
    if beta > 0 and np.isfinite(beta):
        omega1 = omega1 * beta * (1 + 1e-12)
    bval, _, _ = sup_pairing(Xr, mu, omega1)
    bound_value = bval ** (1.0 / r)
    beta2, wit2 = dom_violation(omega1, 903)
    residual = beta2 - 1.0
    bounds = {
        "domain_weight_norm": float(bound_value),
        "domain_weight_limit": float(C),
    }
    cert = WeightCertificate(
        "domain", r, float(C), None, omega1, bounds, float(residual),
        {"seed": cfg.seed, "method": "kelley", "iterations": iterations},
    )
    if residual > cfg.tolerance:
        raise SolverInfeasible(
            "domain domination violated beyond tolerance",
            residual=float(residual), witness=np.asarray(wit2).tolist(), best=cert,
        )
    if bound_value > C * (1 + cfg.tolerance):
        raise SolverInfeasible(
            "weight norm exceeds the hypothesis constant C",
            residual=float(bound_value - C), witness=None, best=cert,
        )
    return cert


# ---------------------------------------------------------------------------
# minimax engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FormSpec:
    """A homogeneous pairing represented into two function spaces.

    ``u(x, y)`` must be positively homogeneous in each argument, and
    ``phi1``/``phi2`` map domain elements to nonnegative lattice values
    over ``measure1``/``measure2``.  The exponents satisfy
    1/t = 1/r1 + 1/r2.  ``conv1``/``conv2`` supply the convexity
    constants of the representing spaces (registered values are used when
    omitted).
    """

    u: Callable[[np.ndarray, np.ndarray], float]
    phi1: Callable[[np.ndarray], np.ndarray]
    phi2: Callable[[np.ndarray], np.ndarray]
    space1: SpaceDescriptor
    measure1: DiscreteMeasure
    space2: SpaceDescriptor
    measure2: DiscreteMeasure
    r1: float
    r2: float
    dim1: int
    dim2: int
    conv1: float | None = None
    conv2: float | None = None
    # scalar action of the homogeneous structure on each side; the
    # exponent-halving reduction re-parametrizes it to lam -> lam^{1/s} x
    scale1: Callable[[float, np.ndarray], np.ndarray] | None = None
    scale2: Callable[[float, np.ndarray], np.ndarray] | None = None

    def act1(self, lam: float, x: np.ndarray) -> np.ndarray:
        return lam * x if self.scale1 is None else self.scale1(lam, x)

    def act2(self, lam: float, y: np.ndarray) -> np.ndarray:
        return lam * y if self.scale2 is None else self.scale2(lam, y)

    def __post_init__(self):
        rng = np.random.default_rng(4321)
        for _ in range(3):
            x = rng.normal(size=self.dim1)
            y = rng.normal(size=self.dim2)
            lam = float(rng.uniform(0.2, 2.5))
            if abs(self.u(self.act1(lam, x), y) - lam * self.u(x, y)) > 1e-7 * (
                1 + abs(self.u(x, y))
            ) * lam:
                raise SpaceError("form failed the homogeneity spot check (first slot)")
            if abs(self.u(x, self.act2(lam, y)) - lam * self.u(x, y)) > 1e-7 * (
                1 + abs(self.u(x, y))
            ) * lam:
                raise SpaceError("form failed the homogeneity spot check (second slot)")
            p1 = self.phi1(self.act1(lam, x))
            if np.max(np.abs(p1 - lam * self.phi1(x))) > 1e-7 * (1 + np.max(p1)):
                raise SpaceError("phi1 failed the homogeneity spot check")
            if np.any(p1 < 0):
                raise SpaceError("phi1 must be nonnegative")

    @property
    def t(self) -> float:
        return 1.0 / (1.0 / self.r1 + 1.0 / self.r2)


@dataclass(frozen=True)
class MinimaxCertificate:
    """Positive functionals splitting a dominated pairing into a product.

    ``phi1``/``phi2`` are densities against the respective measures; the
    margins record how far inside the dual balls they sit and the worst
    product-bound violation the verifier's samples found.
    """

    phi1: np.ndarray
    phi2: np.ndarray
    dual_margin1: float
    dual_margin2: float
    product_margin: float
    metadata: dict

    def to_json(self) -> dict:
        return {
            "phi1": [float(v) for v in self.phi1],
            "phi2": [float(v) for v in self.phi2],
            "dual_margin1": self.dual_margin1,
            "dual_margin2": self.dual_margin2,
            "product_margin": self.product_margin,
            "metadata": self.metadata,
        }


def solve_minimax(form: FormSpec, cfg: SolverConfig | None = None) -> MinimaxCertificate:
    """Cutting-plane search for the pair of positive functionals.

    Maintains affine cuts of two kinds over the pair (phi1, phi2): tuple
    cuts (the weighted functional mass of a tuple must dominate its
    pairing mass, affine in the functionals) and dual-ball membership
    cuts.  An LP maximizes the minimum margin; violated cuts are found by
    adversarial search and added until no violation above tolerance
    remains within the budget.
    """
    cfg = cfg or SolverConfig()
    n1, n2 = form.measure1.n, form.measure2.n
    w1, w2 = form.measure1.weights, form.measure2.weights
    M1 = form.conv1
    if M1 is None:
        M1 = registered_constant(form.space1, form.r1, "convexity", n1)
    M2 = form.conv2
    if M2 is None:
        M2 = registered_constant(form.space2, form.r2, "convexity", n2)
    if M1 is None or M2 is None:
        raise SpaceError("supply convexity constants for unregistered spaces")
    t = form.t
    pow1 = power_space(form.space1, form.r1)
    pow2 = power_space(form.space2, form.r2)

    dual_cuts1: list[np.ndarray] = []
    dual_cuts2: list[np.ndarray] = []

    def add_dual_cut(which, z):
        z = np.abs(np.asarray(z, dtype=float))
        space, measure = (pow1, form.measure1) if which == 1 else (pow2, form.measure2)
        nz = norm_values(space, z, measure)
        if nz <= 0:
            return
        (dual_cuts1 if which == 1 else dual_cuts2).append(z / nz)

    for i in range(n1):
        add_dual_cut(1, np.eye(n1)[i])
    add_dual_cut(1, np.ones(n1))
    for i in range(n2):
        add_dual_cut(2, np.eye(n2)[i])
    add_dual_cut(2, np.ones(n2))

    tuple_cuts: list[tuple[np.ndarray, np.ndarray, float]] = []

    def add_pair_cut(x, y, g1, g2):
        """Cut from a single pair, rescaled by the current functional mass."""
        p1 = form.phi1(x) ** form.r1
        p2 = form.phi2(y) ** form.r2
        a1 = M1 * float(np.sum(g1 * p1 * w1)) ** (1.0 / form.r1)
        a2 = M2 * float(np.sum(g2 * p2 * w2)) ** (1.0 / form.r2)
        if a1 > 0 and a2 > 0:
            xs, ys = form.act1(1.0 / a1, x), form.act2(1.0 / a2, y)
            p1 = form.phi1(xs) ** form.r1
            p2 = form.phi2(ys) ** form.r2
            uval = abs(form.u(xs, ys)) ** t
        else:
            uval = abs(form.u(x, y)) ** t
        c1 = (t / form.r1) * M1**form.r1 * p1 * w1
        c2 = (t / form.r2) * M2**form.r2 * p2 * w2
        scale = max(uval, float(np.max(c1, initial=0.0)), float(np.max(c2, initial=0.0)), 1e-12)
        tuple_cuts.append((c1 / scale, c2 / scale, uval / scale))

    def product_gap(g1, g2, shift):
        """Worst violation of |u| <= a1 a2 over sampled pairs (normalized)."""

        def objective(xy):
            x, y = xy[: form.dim1], xy[form.dim1 :]
            p1 = form.phi1(x) ** form.r1
            p2 = form.phi2(y) ** form.r2
            a1 = M1 * float(np.sum(g1 * p1 * w1)) ** (1.0 / form.r1)
            a2 = M2 * float(np.sum(g2 * p2 * w2)) ** (1.0 / form.r2)
            uval = abs(form.u(x, y))
            if a1 * a2 <= 0:
                return np.inf if uval > 1e-14 else -np.inf
            return uval / (a1 * a2)

        val, xy = _adversarial_max(objective, form.dim1 + form.dim2, cfg, seed_shift=shift)
        return val, xy[: form.dim1], xy[form.dim1 :]

    g1 = np.zeros(n1)
    g2 = np.zeros(n2)
    iterations = 0
    for outer in range(cfg.max_iterations):
        # LP over (g1, g2, delta): maximize the minimum margin delta
        nv = n1 + n2 + 1
        a_ub, b_ub = [], []
        for z in dual_cuts1:
            row = np.zeros(nv)
            row[:n1] = z * w1
            row[-1] = 1.0
            a_ub.append(row)
            b_ub.append(1.0)
        for z in dual_cuts2:
            row = np.zeros(nv)
            row[n1 : n1 + n2] = z * w2
            row[-1] = 1.0
            a_ub.append(row)
            b_ub.append(1.0)
        for c1, c2, d in tuple_cuts:
            row = np.zeros(nv)
            row[:n1] = -c1
            row[n1 : n1 + n2] = -c2
            row[-1] = 1.0
            a_ub.append(row)
            b_ub.append(-d)
        c = np.zeros(nv)
        c[-1] = -1.0  # maximize delta
        res = _simplex.solve_lp(
            c, a_ub=np.array(a_ub), b_ub=np.array(b_ub),
            lb=np.zeros(nv), ub=np.full(nv, 1e9),
        )
        if res.status != "optimal":
            raise SolverInfeasible("minimax master LP failed", best=None)
        g1 = res.x[:n1]
        g2 = res.x[n1 : n1 + n2]
        delta = res.x[-1]
        new_cut = False
        val1, z1, _ = sup_pairing(pow1, form.measure1, g1)
        if val1 > 1 + cfg.lp_tolerance * 10:
            add_dual_cut(1, z1)
            new_cut = True
        val2, z2, _ = sup_pairing(pow2, form.measure2, g2)
        if val2 > 1 + cfg.lp_tolerance * 10:
            add_dual_cut(2, z2)
            new_cut = True
        gap, x_bad, y_bad = product_gap(g1, g2, 601 + outer)
        if gap > 1 + cfg.tolerance:
            add_pair_cut(x_bad, y_bad, g1, g2)
            new_cut = True
        if not new_cut:
            iterations = outer
            break
        iterations = outer + 1
    val1, _, _ = sup_pairing(pow1, form.measure1, g1)
    val2, _, _ = sup_pairing(pow2, form.measure2, g2)
    gap, _, _ = product_gap(g1, g2, 997)
    cert = MinimaxCertificate(
        phi1=g1,
        phi2=g2,
        dual_margin1=float(1.0 - val1),
        dual_margin2=float(1.0 - val2),
        product_margin=float(1.0 - gap),
        metadata={
            "seed": cfg.seed,
            "iterations": iterations,
            "tuple_cuts": len(tuple_cuts),
            "dual_cuts": len(dual_cuts1) + len(dual_cuts2),
            "conv1": float(M1),
            "conv2": float(M2),
        },
    )
    if gap > 1 + cfg.tolerance * 10:
        raise SolverInfeasible(
            "minimax budget exhausted with an open product-bound violation; "
            "either the tolerance is too tight or the hypothesis constant is wrong",
            residual=float(gap - 1.0),
            best=cert,
        )
    return cert


# ---------------------------------------------------------------------------
# domination measures on sup-normed coordinate domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PietschCertificate:
    """Probability weights realizing coordinate domination.

    lambda lives on the simplex over the coordinate functionals;
    ``residual`` is the worst violation of
    ||Tx||^r <= pi^r sum_j lambda_j |x_j|^r found adversarially.
    """

    lam: np.ndarray
    pi_r: float
    r: float
    residual: float
    metadata: dict

    def to_json(self) -> dict:
        return {
            "lambda": [float(v) for v in self.lam],
            "pi_r": self.pi_r,
            "r": self.r,
            "residual": self.residual,
            "metadata": self.metadata,
        }


def pietsch_upper_bound(op: OperatorSpec, r: float) -> float:
    """A feasible upper bound for the r-summing norm on a coordinate domain.

    Hoelder against the column norms c_j gives
    ||Tx||^r <= (sum c)^{r-1} sum_j c_j |x_j|^r, so lambda_j = c_j / sum c
    dominates with pi = sum_j c_j.  Crude but always feasible.
    """
    cols = []
    for j in range(op.input_dim):
        e = np.zeros(op.input_dim)
        e[j] = 1.0
        cols.append(norm_values(op.codomain_space, op.apply_abs(e), op.codomain_measure))
    return float(np.sum(cols))


def solve_pietsch(
    op: OperatorSpec,
    r: float,
    pi_r: float,
    cfg: SolverConfig | None = None,
) -> PietschCertificate:
    """Column-generation LP for the domination weights on the simplex.

    The domain is the coordinate box of size N (sup norm); witnesses x
    contribute the constraint pi^r sum_j lambda_j |x_j|^r >= ||Tx||^r.
    Violated witnesses are found by multi-start maximization over the box
    (all sign-pattern vertices are included for small N).
    """
    cfg = cfg or SolverConfig()
    if r < 1:
        raise SpaceError("coordinate domination needs r >= 1")
    if pi_r <= 0:
        raise SpaceError("pi_r must be positive")
    N = op.input_dim
    nu = op.codomain_measure

    def image_norm(x):
        return norm_values(op.codomain_space, op.apply_abs(x), nu)

    witnesses: list[np.ndarray] = [np.eye(N)[i] for i in range(N)]
    witnesses.append(np.ones(N))
    if N <= 10:
        for bits in range(2 ** (N - 1)):
            signs = np.array([1.0 if (bits >> k) & 1 else -1.0 for k in range(N)])
            witnesses.append(signs)
    lam = np.full(N, 1.0 / N)
    iterations = 0

    def violation(lam, shift):
        def objective(x):
            sup = float(np.max(np.abs(x)))
            if sup <= 0:
                return -np.inf
            xs = x / sup
            return image_norm(xs) ** r - pi_r**r * float(np.sum(lam * np.abs(xs) ** r))

        val, x = _adversarial_max(objective, N, cfg, seed_shift=shift)
        return val, x

    for outer in range(max(10, cfg.max_iterations // 10)):
        iterations = outer + 1
        nv = N + 1  # lambda, delta
        a_ub, b_ub = [], []
        for x in witnesses:
            sup = float(np.max(np.abs(x)))
            if sup <= 0:
                continue
            xs = x / sup
            row = np.zeros(nv)
            row[:N] = -pi_r**r * np.abs(xs) ** r
            row[-1] = 1.0
            a_ub.append(row)
            b_ub.append(-image_norm(xs) ** r)
        a_eq = [np.concatenate([np.ones(N), [0.0]])]
        b_eq = [1.0]
        c = np.zeros(nv)
        c[-1] = -1.0
        res = _simplex.solve_lp(
            c,
            a_ub=np.array(a_ub),
            b_ub=np.array(b_ub),
            a_eq=np.array(a_eq),
            b_eq=np.array(b_eq),
            lb=np.concatenate([np.zeros(N), [-1e9]]),
            ub=np.concatenate([np.ones(N), [1e9]]),
        )
        if res.status != "optimal":
            raise SolverInfeasible("domination master LP failed")
        lam = np.clip(res.x[:N], 0.0, None)
        val, x_bad = violation(lam, 41 + outer)
        if val > cfg.tolerance * pi_r**r:
            sup = float(np.max(np.abs(x_bad)))
            witnesses.append(np.asarray(x_bad) / sup)
        else:
            break
    val, x_bad = violation(lam, 977)
    residual = float(max(val, 0.0))
    cert = PietschCertificate(
        lam=lam,
        pi_r=float(pi_r),
        r=float(r),
        residual=residual,
        metadata={"seed": cfg.seed, "iterations": iterations, "witnesses": len(witnesses)},
    )
    if residual > cfg.tolerance * pi_r**r:
        raise SolverInfeasible(
            "domination infeasible at tolerance; pi_r looks below the true "
            "summing norm",
            residual=residual,
            witness=np.asarray(x_bad).tolist(),
            best=cert,
        )
    return cert


# ---------------------------------------------------------------------------
# factorizations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FactorizationResult:
    """T = M_g . R (range version) or T = R . M_f (domain version)."""

    side: str  # "range" | "domain"
    multiplier: np.ndarray
    operator_matrix: np.ndarray
    norm_mult: float
    norm_r: float
    norm_product: float
    bound: float
    composition_residual: float

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "multiplier": [float(v) for v in self.multiplier],
            "operator_matrix": [[float(v) for v in row] for row in self.operator_matrix],
            "norm_mult": self.norm_mult,
            "norm_r": self.norm_r,
            "norm_product": self.norm_product,
            "bound": self.bound,
            "composition_residual": self.composition_residual,
        }


def _operator_norm_into_lr(mat, op, r, cfg):
    """|| R : E -> L_r(nu) || for the matrix R against the domain norm."""
    nu_w = op.codomain_measure.weights
    if isinstance(op.domain, NormedDomain) and op.domain.euclidean and r == 2.0:
        weighted = mat.T @ (mat * nu_w[:, None])
        return float(np.sqrt(max(np.linalg.eigvalsh(weighted)[-1], 0.0)))

    def objective(x):
        den = op.domain_norm(x)
        if den <= 0:
            return -np.inf
        vals = np.abs(mat @ x)
        return norm_values(Lp(r), vals, op.codomain_measure) / den

    val, _ = _adversarial_max(objective, mat.shape[1], cfg, seed_shift=551)
    return float(val)


def build_factorization_range(
    cert: WeightCertificate, op: OperatorSpec, cfg: SolverConfig | None = None
) -> FactorizationResult:
    """Split T = M_g . R with g = omega2^{1/r} and R = T / g.

    R maps the domain into L_r(nu) with norm at most one (up to
    tolerance) by the domination inequality; the multiplication operator
    carries the bound C * M_(r)(Y).  Atoms with g = 0 use the 0/0 = 0
    convention, legitimate because the weight vanishes only where the
    operator does.
    """
    cfg = cfg or SolverConfig()
    if cert.kind != "range" or cert.omega2 is None:
        raise SpaceError("range factorization needs a certificate with omega2")
    if op.matrix is None:
        raise SpaceError("only linear (matrix) operators factorize")
    if cert.r < 1:
        raise SpaceError("factorization needs r >= 1")
    g = cert.omega2 ** (1.0 / cert.r)
    live = g > 0
    if np.any(~live & ~np.all(op.matrix == 0.0, axis=1)):
        raise IllPosedFactorization(
            "multiplier vanishes on a row the operator does not"
        )
    rmat = np.zeros_like(op.matrix)
    rmat[live] = op.matrix[live] / g[live, None]
    norm_r = _operator_norm_into_lr(rmat, op, cert.r, cfg)
    norm_mult, _ = multiplication_norm(
        g, cert.r, op.codomain_space, op.codomain_measure, cfg
    )
    rng = np.random.default_rng(cfg.seed + 7)
    resid = 0.0
    for _ in range(cfg.verify_samples):
        x = rng.normal(size=op.input_dim)
        tx = op.apply(x)
        comp = g * (rmat @ x)
        scale = np.max(np.abs(tx)) + 1e-300
        resid = max(resid, float(np.max(np.abs(tx - comp)) / scale))
    bound = cert.bounds["mult_limit"]
    return FactorizationResult(
        side="range",
        multiplier=g,
        operator_matrix=rmat,
        norm_mult=float(norm_mult),
        norm_r=float(norm_r),
        norm_product=float(norm_mult * norm_r),
        bound=float(bound),
        composition_residual=resid,
    )


def build_factorization_domain(
    cert: WeightCertificate, op: OperatorSpec, cfg: SolverConfig | None = None
) -> FactorizationResult:
    """Split T = R . M_f with f = omega1^{1/r}.

    R is defined on the range of M_f by R(f x) = T x and extended by zero
    on the band where f vanishes; well-posedness requires T to vanish on
    that band, otherwise the certificate is violated and the build is
    rejected.
    """
    cfg = cfg or SolverConfig()
    if cert.kind != "domain" or cert.omega1 is None:
        raise SpaceError("domain factorization needs a certificate with omega1")
    if op.matrix is None:
        raise SpaceError("only linear (matrix) operators factorize")
    if cert.r < 1:
        raise SpaceError("factorization needs r >= 1")
    mu = op.domain.measure
    f = cert.omega1 ** (1.0 / cert.r)
    live = f > 0
    col_norms = np.linalg.norm(op.matrix, axis=0)
    if np.any(~live & (col_norms > 1e-9 * max(col_norms.max(), 1e-300))):
        raise IllPosedFactorization(
            "the operator acts on the band where the multiplier vanishes"
        )
    rmat = np.zeros_like(op.matrix)
    rmat[:, live] = op.matrix[:, live] / f[live][None, :]

    def objective(y):
        den = norm_values(Lp(cert.r), np.abs(y), mu)
        if den <= 0:
            return -np.inf
        return norm_values(op.codomain_space, np.abs(rmat @ y), op.codomain_measure) / den

    norm_r, _ = _adversarial_max(objective, mu.n, cfg, seed_shift=553)
    Xr = power_space(op.domain.space, cert.r)
    bval, _, _ = sup_pairing(Xr, mu, cert.omega1)
    norm_mult = bval ** (1.0 / cert.r)
    rng = np.random.default_rng(cfg.seed + 9)
    resid = 0.0
    for _ in range(cfg.verify_samples):
        x = rng.normal(size=op.input_dim)
        tx = op.apply(x)
        comp = rmat @ (f * x)
        scale = np.max(np.abs(tx)) + 1e-300
        resid = max(resid, float(np.max(np.abs(tx - comp)) / scale))
    return FactorizationResult(
        side="domain",
        multiplier=f,
        operator_matrix=rmat,
        norm_mult=float(norm_mult),
        norm_r=float(norm_r),
        norm_product=float(norm_mult * norm_r),
        bound=float(cert.constant),
        composition_residual=resid,
    )


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    checks: dict
    domination_residual: float
    reverse_worst: float
    reverse_limit: float
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": self.checks,
            "domination_residual": self.domination_residual,
            "reverse_worst": self.reverse_worst,
            "reverse_limit": self.reverse_limit,
            "notes": list(self.notes),
        }


def verify_weight_certificate(
    cert: WeightCertificate,
    op: OperatorSpec,
    cfg: SolverConfig | None = None,
    tuples: int = 100,
) -> VerificationReport:
    """Re-check a certificate from raw data; failures land in the report.

    (a) the domination inequality on random and adversarial inputs,
    (b) the recorded norm bounds, recomputed,
    (c) the reverse direction: random tuples must satisfy the
        vector-valued inequality with constant C * M_(r)(Y) * M^{(r)}(X)
        (times 1 + 1e-6).
    """
    cfg = cfg or SolverConfig()
    r = cert.r
    nu = op.codomain_measure
    notes = []
    checks = {}

    if cert.kind == "range":
        omega2 = cert.omega2
        active = omega2 > 0
        u_full = np.where(active, 1.0 / np.where(active, omega2, 1.0), 0.0)
        bad_zero = ~active & ~op.zero_codomain_atoms()
        if np.any(bad_zero):
            checks["weight_support"] = False
            notes.append("omega2 vanishes where the operator does not")
            dom_res = INF
        else:
            checks["weight_support"] = True
            if isinstance(op.domain, NormedDomain):
                sup, _ = _domination_sup(op, r, u_full, cfg, seed_shift=61)
            else:
                sup, _ = _domination_sup(
                    op, r, u_full, cfg, omega1=cert.omega1, seed_shift=61
                )
            dom_res = sup - 1.0
        checks["domination"] = bool(dom_res <= cfg.tolerance)
        g = omega2 ** (1.0 / r)
        mult, _ = multiplication_norm(g, r, op.codomain_space, nu, cfg)
        limit = cert.bounds["mult_limit"]
        checks["mult_bound"] = bool(mult <= limit * (1 + cfg.tolerance))
        conv = cert.bounds.get("convexity_constant", {}).get("value", 1.0)
        conc = cert.bounds["concavity_constant"]["value"]
        if cert.omega1 is not None:
            Xr = power_space(op.domain.space, r)
            val, _, _ = sup_pairing(Xr, op.domain.measure, cert.omega1)
            checks["domain_weight_bound"] = bool(
                val ** (1.0 / r) <= cert.bounds["domain_weight_limit"] * (1 + cfg.tolerance)
            )
        reverse_limit = cert.constant * conc * conv * (1 + 1e-6)
        rng = np.random.default_rng(cfg.seed + 13)
        worst = 0.0
        for _ in range(tuples):
            k = int(rng.integers(1, 5))
            mat = rng.normal(size=(k, op.input_dim))
            den = op.domain_tuple_norm(mat, r)
            if den <= 0:
                continue
            images = np.array([op.apply_abs(row) for row in mat])
            envelope = np.sum(images**r, axis=0) ** (1.0 / r)
            num = norm_values(op.codomain_space, envelope, nu)
            worst = max(worst, num / den)
        checks["reverse_vector_valued"] = bool(worst <= reverse_limit)
        passed = all(checks.values())
        return VerificationReport(
            passed=passed,
            checks=checks,
            domination_residual=float(dom_res),
            reverse_worst=float(worst),
            reverse_limit=float(reverse_limit),
            notes=tuple(notes),
        )

    # domain certificate
    omega1 = cert.omega1
    mu = op.domain.measure

    def objective(x):
        num = norm_values(op.codomain_space, op.apply_abs(x), nu) ** r
        den = float(np.sum(op.domain.phi_abs_values(x) ** r * mu.weights * omega1))
        if den <= 0:
            return np.inf if num > 0 else -np.inf
        return num / den

    sup, _ = _adversarial_max(objective, op.input_dim, cfg, seed_shift=63)
    dom_res = sup - 1.0
    checks["domination"] = bool(dom_res <= cfg.tolerance)
    Xr = power_space(op.domain.space, r)
    bval, _, _ = sup_pairing(Xr, mu, omega1)
    checks["weight_bound"] = bool(
        bval ** (1.0 / r) <= cert.constant * (1 + cfg.tolerance)
    )
    reverse_limit = cert.constant * (1 + 1e-6)
    rng = np.random.default_rng(cfg.seed + 13)
    worst = 0.0
    for _ in range(tuples):
        k = int(rng.integers(1, 5))
        mat = rng.normal(size=(k, op.input_dim))
        phi = np.array([op.domain.phi_abs_values(row) for row in mat])
        envelope = np.sum(phi**r, axis=0) ** (1.0 / r)
        den = norm_values(op.domain.space, envelope, mu)
        if den <= 0:
            continue
        num = float(
            np.sum(
                np.array(
                    [norm_values(op.codomain_space, op.apply_abs(row), nu) for row in mat]
                )
                ** r
            )
            ** (1.0 / r)
        )
        worst = max(worst, num / den)
    checks["reverse_vector_valued"] = bool(worst <= reverse_limit)
    passed = all(checks.values())
    return VerificationReport(
        passed=passed,
        checks=checks,
        domination_residual=float(dom_res),
        reverse_worst=float(worst),
        reverse_limit=float(reverse_limit),
        notes=tuple(notes),
    )
