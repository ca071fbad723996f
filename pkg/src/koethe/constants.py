"""Convexity and concavity constants of spaces and operators.

The two ratio functionals compare, for a tuple x_1..x_k and exponent r,

    convexity    || (sum |x_k|^r)^{1/r} ||_X   vs   (sum ||x_k||_X^r)^{1/r}
    concavity    (sum ||x_k||_X^r)^{1/r}       vs   || (sum |x_k|^r)^{1/r} ||_X

and the best constants are the suprema of the ratios over all tuples.
Estimators report certified lower bounds only (the witness ratio is
recomputed at construction); "exact" status is claimed only when a
registered closed form agrees with the witness.  The search runs over
nonnegative tuples for spaces (the ratios only see |x_k|) and over signed
tuples for operators.

``power_transport`` maps a tuple for (X, r) to one for (X^t, r/t) by
x -> |x|^t; the two ratios then satisfy ratio(X^t, r/t) = ratio(X, r)^t
pointwise, which transports best constants between powers of a space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DiscreteMeasure,
    LatticeFunction,
    SearchBudget,
    SpaceDescriptor,
    SpaceError,
    measure_to_json,
    norm_values,
    registered_constant,
    space_label,
    space_to_json,
)

__all__ = [
    "TupleWitness",
    "ConstantEstimate",
    "convexity_ratio",
    "concavity_ratio",
    "estimate_space_constant",
    "estimate_operator_constant",
    "power_transport",
]


@dataclass(frozen=True)
class TupleWitness:
    """A tuple of lattice functions on one measure, with its exponent r."""

    vectors: tuple[LatticeFunction, ...]
    r: float

    def __post_init__(self):
        if not self.vectors:
            raise SpaceError("tuple witness must be nonempty")
        m = self.vectors[0].measure
        for v in self.vectors[1:]:
            if not v.measure.same_as(m):
                raise SpaceError("all tuple vectors must live on the same measure")
        if not (self.r > 0):
            raise SpaceError("tuple exponent must be positive")

    @property
    def measure(self) -> DiscreteMeasure:
        return self.vectors[0].measure

    def as_matrix(self) -> np.ndarray:
        return np.array([v.values for v in self.vectors], dtype=float)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "measure": measure_to_json(self.measure),
            "vectors": [[float(t) for t in v.values] for v in self.vectors],
        }


def _ratio_parts(space, tup: TupleWitness) -> tuple[float, float]:
    mat = np.abs(tup.as_matrix())
    if not np.any(mat):
        raise SpaceError("tuple must not be all zero")
    envelope = np.sum(mat**tup.r, axis=0) ** (1.0 / tup.r)
    lattice_side = norm_values(space, envelope, tup.measure)
    norms = np.array([norm_values(space, row, tup.measure) for row in mat])
    sum_side = float(np.sum(norms**tup.r) ** (1.0 / tup.r))
    return lattice_side, sum_side


def convexity_ratio(space: SpaceDescriptor, tup: TupleWitness) -> float:
    """|| (sum |x_k|^r)^{1/r} ||_X / (sum ||x_k||_X^r)^{1/r}."""
    lattice_side, sum_side = _ratio_parts(space, tup)
    if lattice_side == 0.0:
        return 0.0
    return lattice_side / sum_side


def concavity_ratio(space: SpaceDescriptor, tup: TupleWitness) -> float:
    """(sum ||x_k||_X^r)^{1/r} / || (sum |x_k|^r)^{1/r} ||_X."""
    lattice_side, sum_side = _ratio_parts(space, tup)
    if sum_side == 0.0:
        return 0.0
    if lattice_side == 0.0:
        raise SpaceError("lattice-side norm vanished on a nonzero tuple")
    return sum_side / lattice_side


def power_transport(tup: TupleWitness, t: float) -> TupleWitness:
    """Transport a tuple for (X, r) to one for (X^t, r/t) via x -> |x|^t."""
    if not (t > 0):
        raise SpaceError("transport exponent must be positive")
    vectors = tuple(
        LatticeFunction(np.abs(v.values) ** t, v.measure) for v in tup.vectors
    )
    return TupleWitness(vectors, tup.r / t)


@dataclass(frozen=True)
class ConstantEstimate:
    """Best ratio found, with the witness that attains it.

    ``value`` is always the ratio recomputed from the witness, so it is a
    true lower bound for the best constant.  ``status`` is "exact" only
    when a registered closed form matches the witness ratio.
    """

    value: float
    witness: TupleWitness
    kind: str  # "convexity" | "concavity"
    status: str  # "exact" | "lower-bound"
    budget_used: dict
    registered: float | None = None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "kind": self.kind,
            "status": self.status,
            "registered": self.registered,
            "budget_used": self.budget_used,
            "witness": self.witness.to_json(),
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _ratio_fn(space, r, kind):
    return convexity_ratio if kind == "convexity" else concavity_ratio


def _estimate_from_tuples(eval_ratio, n, r, measure, budget, signed=False):
    """Shared multi-start + coordinate refinement over tuple matrices."""
    rng_master = np.random.SeedSequence(budget.seed)
    best_val = -np.inf
    best_mat = None

    def as_tuple(mat):
        return TupleWitness(
            tuple(LatticeFunction(row, measure) for row in mat), r
        )

    def safe_ratio(mat):
        if not np.any(np.abs(mat)):
            return -np.inf
        try:
            return eval_ratio(as_tuple(mat))
        except SpaceError:
            return -np.inf

    seeds = []
    for k in budget.tuple_sizes:
        # coordinate tuples catch the classical extremal configurations
        coord = np.zeros((k, n))
        for i in range(k):
            coord[i, i % n] = 1.0
        seeds.append(coord)
        seeds.append(np.ones((k, n)))
    streams = rng_master.spawn(budget.starts * len(budget.tuple_sizes))
    idx = 0
    for k in budget.tuple_sizes:
        for _ in range(budget.starts):
            rng = np.random.default_rng(streams[idx])
            idx += 1
            mat = rng.exponential(size=(k, n))
            if signed:
                mat *= rng.choice([-1.0, 1.0], size=(k, n))
            mat *= rng.random(size=(k, n)) > 0.25
            seeds.append(mat)
    refine_streams = np.random.SeedSequence(budget.seed + 1).spawn(len(seeds))
    for mat0, stream in zip(seeds, refine_streams):
        mat = np.array(mat0, dtype=float)
        val = safe_ratio(mat)
        step = 0.5
        rng = np.random.default_rng(stream)
        for _ in range(budget.iters):
            improved = False
            flat = mat.ravel()
            for j in range(flat.size):
                moves = [flat[j] * (1 + step), flat[j] / (1 + step), 0.0]
                if signed:
                    moves.append(-flat[j])
                if flat[j] == 0.0:
                    moves.append(step)
                for mv in moves:
                    trial = flat.copy()
                    trial[j] = mv
                    v2 = safe_ratio(trial.reshape(mat.shape))
                    if v2 > val * (1 + 1e-13):
                        val = v2
                        flat = trial
                        improved = True
                mat = flat.reshape(mat.shape)
            if not improved:
                step *= 0.5
                if step < 1e-7:
                    break
        if val > best_val:
            best_val, best_mat = val, mat
    return best_val, best_mat, as_tuple


def estimate_space_constant(
    space: SpaceDescriptor,
    measure: DiscreteMeasure,
    r: float,
    kind: str,
    budget: SearchBudget | None = None,
) -> ConstantEstimate:
    """Lower-bound estimate of the best convexity or concavity constant.

    Multi-start random nonnegative tuples plus coordinate-wise
    multiplicative refinement with a shrinking step.  A zero budget
    returns the singleton-tuple ratio 1.
    """
    if kind not in ("convexity", "concavity"):
        raise SpaceError(f"kind must be convexity or concavity, got {kind!r}")
    budget = budget or SearchBudget()
    n = measure.n
    eval_ratio = lambda tup: _ratio_fn(space, r, kind)(space, tup)
    reg = registered_constant(space, r, kind, n)
    if budget.starts == 0 or budget.iters == 0:
        ones = TupleWitness((LatticeFunction(np.ones(n), measure),), r)
        value = eval_ratio(ones)
        status = (
            "exact"
            if reg is not None and abs(value - reg) <= 1e-9 * max(1.0, reg)
            else "lower-bound"
        )
        return ConstantEstimate(
            value, ones, kind, status, {"starts": 0, "iters": 0, "seed": budget.seed}, reg
        )
    best_val, best_mat, as_tuple = _estimate_from_tuples(
        eval_ratio, n, r, measure, budget, signed=False
    )
    witness = as_tuple(np.abs(best_mat))
    value = eval_ratio(witness)  # recompute independently from the witness
    status = "lower-bound"
    if reg is not None and abs(value - reg) <= 1e-7 * max(1.0, reg):
        status = "exact"
        value = min(value, reg)
    return ConstantEstimate(
        value,
        witness,
        kind,
        status,
        {
            "starts": budget.starts,
            "iters": budget.iters,
            "seed": budget.seed,
            "tuple_sizes": list(budget.tuple_sizes),
        },
        reg,
    )


def estimate_operator_constant(
    op,
    r: float,
    kind: str,
    budget: SearchBudget | None = None,
) -> ConstantEstimate:
    """Lower-bound estimate of the operator convexity/concavity constant.

    Convexity compares || (sum |T x_k|^r)^{1/r} ||_Y against the domain
    r-sum; concavity compares (sum ||T x_k||_Y^r)^{1/r} against the
    lattice r-envelope in the domain space (which must be a function
    space).  The search runs over signed tuples since T need not be a
    lattice homomorphism.
    """
    from .solvers import OperatorSpec, SpaceDomain  # local import, no cycle at module load

    if kind not in ("convexity", "concavity"):
        raise SpaceError(f"kind must be convexity or concavity, got {kind!r}")
    if not isinstance(op, OperatorSpec):
        raise SpaceError("estimate_operator_constant expects an OperatorSpec")
    budget = budget or SearchBudget()
    d = op.input_dim
    nu = op.codomain_measure
    Y = op.codomain_space

    def conv_ratio(mat: np.ndarray) -> float:
        images = np.array([op.apply_abs(row) for row in mat])
        envelope = np.sum(images**r, axis=0) ** (1.0 / r)
        num = norm_values(Y, envelope, nu)
        den = op.domain_tuple_norm(mat, r)
        if den == 0.0:
            return -np.inf
        return num / den

    def conc_ratio(mat: np.ndarray) -> float:
        if not isinstance(op.domain, SpaceDomain):
            raise SpaceError("operator concavity needs a function-space domain")
        images = np.array([op.apply_abs(row) for row in mat])
        num = float(np.sum(np.array([norm_values(Y, im, nu) for im in images]) ** r) ** (1.0 / r))
        phi = np.array([op.domain.phi_abs_values(row) for row in mat])
        envelope = np.sum(phi**r, axis=0) ** (1.0 / r)
        den = norm_values(op.domain.space, envelope, op.domain.measure)
        if den == 0.0:
            return -np.inf
        return num / den

    ratio = conv_ratio if kind == "convexity" else conc_ratio
    if op.is_zero():
        mat = np.ones((1, d))
        wit = TupleWitness((LatticeFunction(np.ones(d), DiscreteMeasure(np.ones(d))),), r)
        return ConstantEstimate(0.0, wit, kind, "exact", {"starts": 0, "iters": 0, "seed": budget.seed}, 0.0)

    rng_master = np.random.SeedSequence(budget.seed)
    seeds = []
    for k in budget.tuple_sizes:
        coord = np.zeros((k, d))
        for i in range(k):
            coord[i, i % d] = 1.0
        seeds.append(coord)
        seeds.append(np.ones((k, d)))
    streams = rng_master.spawn(budget.starts * len(budget.tuple_sizes))
    idx = 0
    for k in budget.tuple_sizes:
        for _ in range(budget.starts):
            rng = np.random.default_rng(streams[idx])
            idx += 1
            seeds.append(rng.normal(size=(k, d)))
    best_val, best_mat = -np.inf, seeds[0]
    for mat0 in seeds:
        mat = np.array(mat0, dtype=float)
        try:
            val = ratio(mat)
        except SpaceError:
            raise
        step = 0.5
        for _ in range(budget.iters):
            improved = False
            flat = mat.ravel()
            for j in range(flat.size):
                moves = [flat[j] * (1 + step), flat[j] / (1 + step), -flat[j], 0.0]
                if flat[j] == 0.0:
                    moves.extend([step, -step])
                for mv in moves:
                    trial = flat.copy()
                    trial[j] = mv
                    v2 = ratio(trial.reshape(mat.shape))
                    if np.isfinite(v2) and v2 > val * (1 + 1e-13):
                        val, flat, improved = v2, trial, True
                mat = flat.reshape(mat.shape)
            if not improved:
                step *= 0.5
                if step < 1e-7:
                    break
        if val > best_val:
            best_val, best_mat = val, mat
    # package the witness on a nominal uniform measure over coefficients
    wit_measure = DiscreteMeasure(np.ones(d))
    witness = TupleWitness(tuple(LatticeFunction(row, wit_measure) for row in best_mat), r)
    value = float(ratio(best_mat))
    return ConstantEstimate(
        value,
        witness,
        kind,
        "lower-bound",
        {"starts": budget.starts, "iters": budget.iters, "seed": budget.seed,
         "tuple_sizes": list(budget.tuple_sizes)},
        None,
    )
