"""Homogeneous representations and block-operator reduction.

A representation pulls elements of a homogeneous set into nonnegative
lattice data, which is what the weight solvers consume.  The registered
kinds are:

  A  a Banach space probed through a finite grid of dual functionals
     (a computable surrogate for the full dual ball; the grid's declared
     defect states how much of the norm the grid can miss),
  B  a quasi-normed space collapsed to its norm on a single atom,
  C  the identity on a function space,
  D  Bochner-style blocks over L_r (implemented as kind E with X = L_r),
  E  blocks over a function space X(mu): an element is one inner-space
     vector per atom, and the representation takes per-atom inner norms.

``lift_vector_valued`` turns a block operator between two vector-valued
spaces into an :class:`~koethe.solvers.OperatorSpec` whose domain and
codomain data are the per-atom inner norms, so ``solve_weight_pair``
produces the weight pair for the block inequality.  Block elements are
flattened row-major (atom index outer, inner coordinate inner).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    DiscreteMeasure,
    LatticeFunction,
    Lp,
    SpaceDescriptor,
    SpaceError,
    norm_values,
)
from .solvers import OperatorSpec, SolverConfig, SpaceDomain

__all__ = [
    "Representation",
    "VectorValuedSpace",
    "BlockOperator",
    "make_representation",
    "lift_vector_valued",
    "check_vv_inequality",
]


@dataclass(frozen=True, eq=False)
class Representation:
    """A homogeneous map from elements to lattice values over a measure."""

    kind: str
    measure: DiscreteMeasure
    fn: Callable[[np.ndarray], np.ndarray]
    nonneg: bool
    metadata: dict

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)
        if out.size != self.measure.n:
            raise SpaceError("representation output does not match its measure")
        return out

    def __post_init__(self):
        rng = np.random.default_rng(777)
        dim = self.metadata.get("dim")
        if dim:
            for _ in range(3):
                x = rng.normal(size=dim)
                lam = float(rng.uniform(0.2, 2.0))
                a = self(lam * x)
                b = lam * self(x)
                if np.max(np.abs(a - b)) > 1e-9 * (1 + np.max(np.abs(b))):
                    raise SpaceError("representation failed the homogeneity spot check")
                if self.nonneg and np.any(self(x) < -1e-12):
                    raise SpaceError("representation output must be nonnegative")


def make_representation(kind: str, **params) -> Representation:
    """Build one of the registered representations.

    kind "A": params ``dual_grid`` (k x d matrix of functionals) and
    ``defect`` (declared relative underestimation of the norm by the
    grid); output is the signed functional values on k uniform atoms.
    kind "B": params ``norm_fn`` and ``dim``; output is ||x|| on one atom.
    kind "C": params ``measure``; the identity.
    kind "D": params ``inner_norm``, ``inner_dim``, ``measure``, ``r``;
    same as kind E with outer space L_r.
    kind "E": params ``inner_norm``, ``inner_dim``, ``measure``; per-atom
    inner norms of a flattened block element.
    """
    if kind == "A":
        grid = np.asarray(params["dual_grid"], dtype=float)
        if grid.ndim != 2 or grid.size == 0:
            raise SpaceError("kind A needs a nonempty dual functional grid")
        defect = float(params.get("defect", 0.0))
        measure = DiscreteMeasure(np.ones(grid.shape[0]))
        return Representation(
            "A",
            measure,
            lambda x: grid @ x,
            nonneg=False,
            metadata={"dim": grid.shape[1], "defect": defect},
        )
    if kind == "B":
        norm_fn = params["norm_fn"]
        dim = int(params["dim"])
        measure = DiscreteMeasure(np.ones(1))
        return Representation(
            "B",
            measure,
            lambda x: np.array([float(norm_fn(x))]),
            nonneg=True,
            metadata={"dim": dim},
        )
    if kind == "C":
        measure = params["measure"]
        return Representation(
            "C", measure, lambda x: np.asarray(x, dtype=float), nonneg=False,
            metadata={"dim": measure.n},
        )
    if kind in ("D", "E"):
        inner_norm = params["inner_norm"]
        inner_dim = int(params["inner_dim"])
        measure = params["measure"]

        def fn(x):
            blocks = np.asarray(x, dtype=float).reshape(measure.n, inner_dim)
            return np.array([float(inner_norm(row)) for row in blocks])

        return Representation(
            kind, measure, fn, nonneg=True,
            metadata={"dim": measure.n * inner_dim, "inner_dim": inner_dim,
                      "outer_space": params.get("outer_space"),
                      "r": params.get("r")},
        )
    raise SpaceError(f"unknown representation kind {kind!r}")


@dataclass(frozen=True, eq=False)
class VectorValuedSpace:
    """X(mu, E): per-atom blocks normed by the outer norm of inner norms."""

    outer: SpaceDescriptor
    measure: DiscreteMeasure
    inner_norm: Callable[[np.ndarray], float]
    inner_dim: int

    def representation(self) -> Representation:
        return make_representation(
            "E",
            inner_norm=self.inner_norm,
            inner_dim=self.inner_dim,
            measure=self.measure,
            outer_space=self.outer,
        )

    def block_norms(self, x: np.ndarray) -> np.ndarray:
        blocks = np.asarray(x, dtype=float).reshape(self.measure.n, self.inner_dim)
        return np.array([float(self.inner_norm(row)) for row in blocks])

    def norm(self, x: np.ndarray) -> float:
        return norm_values(self.outer, self.block_norms(x), self.measure)

    @property
    def dim(self) -> int:
        return self.measure.n * self.inner_dim


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """A linear operator between two vector-valued spaces, as one matrix.

    The matrix acts on flattened block elements (row-major, atom-first).
    """

    domain: VectorValuedSpace
    codomain: VectorValuedSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise SpaceError(
                f"block matrix shape {m.shape} does not match "
                f"({self.codomain.dim}, {self.domain.dim})"
            )
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def diagonal(cls, domain, codomain, scalars) -> "BlockOperator":
        """Per-atom scalar blocks (needs matching inner dimensions)."""
        if domain.inner_dim != codomain.inner_dim or domain.measure.n != codomain.measure.n:
            raise SpaceError("diagonal blocks need matching shapes")
        scalars = np.asarray(scalars, dtype=float)
        mat = np.kron(np.diag(scalars), np.eye(domain.inner_dim))
        return cls(domain, codomain, mat)

    def to_json(self) -> dict:
        return {
            "outer_in": self.domain.measure.n,
            "inner_in": self.domain.inner_dim,
            "outer_out": self.codomain.measure.n,
            "inner_out": self.codomain.inner_dim,
            "matrix": [[float(v) for v in row] for row in self.matrix],
        }


def lift_vector_valued(block_op: BlockOperator, r: float,
                       cfg: SolverConfig | None = None) -> OperatorSpec:
    """Reduce a block operator to representation-level scalar data.

    The resulting operator maps coefficient vectors (flattened blocks) to
    the per-atom codomain inner norms; its domain is the outer space with
    the per-atom domain inner norms as the representation.  Feeding it to
    ``solve_weight_pair`` yields the weight pair for the block-level
    weighted inequality.
    """
    dom = block_op.domain
    cod = block_op.codomain
    mat = block_op.matrix

    def phi_abs(x):
        return dom.block_norms(x)

    def psi_abs(x):
        return cod.block_norms(mat @ np.asarray(x, dtype=float))

    return OperatorSpec(
        domain=SpaceDomain(dom.outer, dom.measure, dim=dom.dim, phi_abs=phi_abs),
        codomain_space=cod.outer,
        codomain_measure=cod.measure,
        apply_fn=lambda x: mat @ np.asarray(x, dtype=float),
        psi_abs_fn=psi_abs,
        rep_domain="E",
        rep_codomain="E",
    )


def check_vv_inequality(op: OperatorSpec, r: float, tuples) -> float:
    """Worst ratio of the vector-valued inequality over the given tuples.

    Each tuple is a matrix whose rows are flattened domain elements; the
    ratio compares the codomain r-envelope norm against the domain one.
    Used both as a hypothesis screen and as the reverse check that a
    weighted inequality implies the vector-valued one up to constants.
    """
    worst = 0.0
    for mat in tuples:
        mat = np.atleast_2d(np.asarray(mat, dtype=float))
        den = op.domain_tuple_norm(mat, r)
        if den <= 0:
            continue
        images = np.array([op.apply_abs(row) for row in mat])
        envelope = np.sum(images**r, axis=0) ** (1.0 / r)
        num = norm_values(op.codomain_space, envelope, op.codomain_measure)
        worst = max(worst, num / den)
    return float(worst)
