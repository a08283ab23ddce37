"""
Constraint sets and the projection operators onto their physical subspace.

Three constructions are provided:

* U(1) group averaging of ``exp(-i ξ Φ)`` over ``K`` equally spaced angles,
  exact for constraints with integer spectrum when ``K > 2 max|λ|``;
* the spectral projector onto the null space of ``Σ_a Φ_a²``;
* a weighted quadrature of ``exp(-i ξ^a Φ_a) f(ξ)`` over a box.

Invariance under the constraint flow is a first-class property and is only
reported by :func:`projector_diagnostics`, never enforced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fock import (
    FockSpace, OperatorMatrix, commutator, displacement_matrix, embed_mode_operator,
    hermitian_eigendecomposition, interior_mask, matrix_exponential, quadrature_operators,
    spectral_norm,
)
from .quadrature import QuadratureRule

__all__ = [
    "CLOSED_FIRST_CLASS", "OPEN_FIRST_CLASS", "SECOND_CLASS", "UNVERIFIED",
    "ConstraintSet", "Projector", "ProjectorReport", "Weight",
    "AliasingError", "QuadratureError",
    "projector_from_matrix", "check_closed_first_class", "projector_group_average_u1",
    "projector_spectral", "projector_weighted_integral", "projector_diagnostics",
    "gaussian_weight", "uniform_weight", "vacuum_projector",
]

CLOSED_FIRST_CLASS = "closed_first_class"
OPEN_FIRST_CLASS = "open_first_class"
SECOND_CLASS = "second_class"
UNVERIFIED = "unverified"

VALID_TOL = 1e-10
RANK_TOL = 1e-8


class AliasingError(ValueError):
    """Too few averaging angles for the constraint spectrum."""


class QuadratureError(ValueError):
    """Operator quadrature did not converge under refinement."""


@dataclass(eq=False)
class ConstraintSet:
    """Hermitian constraint operators with optional structure constants.

    ``structure_c[a, b, c]`` and ``structure_h[a, b]`` are the coefficients
    in ``[Φ_a, Φ_b] = i c_ab^c Φ_c`` and ``[Φ_a, H] = i h_a^b Φ_b``.
    ``classification`` starts out unverified and is only changed by
    :func:`check_closed_first_class`.
    """

    phis: list
    structure_c: np.ndarray | None = None
    structure_h: np.ndarray | None = None
    classification: str = field(default=UNVERIFIED, init=False)

    def __post_init__(self):
        phis = []
        for phi in self.phis:
            if not phi.hermitian:
                phi = OperatorMatrix(phi.space, phi.entries, hermitian=True)
            phis.append(phi)
        if len({phi.space for phi in phis}) > 1:
            raise ValueError("constraints live on different spaces")
        self.phis = phis
        a = len(phis)
        if self.structure_c is not None:
            self.structure_c = np.asarray(self.structure_c, dtype=float).reshape(a, a, a)
        if self.structure_h is not None:
            self.structure_h = np.asarray(self.structure_h, dtype=float).reshape(a, a)

    @property
    def space(self) -> FockSpace | None:
        return self.phis[0].space if self.phis else None

    def __len__(self):
        return len(self.phis)

    def generator(self, xi: Sequence[float]) -> OperatorMatrix:
        """``ξ^a Φ_a`` as a hermitian operator."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape != (len(self.phis),):
            raise ValueError(f"need {len(self.phis)} multipliers, got {xi.shape}")
        total = sum(x * phi.entries for x, phi in zip(xi, self.phis))
        return OperatorMatrix(self.space, total, hermitian=True)


@dataclass(frozen=True, eq=False)
class Projector:
    """Candidate projection operator with its construction diagnostics.

    ``hermiticity_residual`` is measured before the final symmetrization
    ``E <- (E + E†)/2``; ``idempotency_residual`` after it. ``valid``
    requires both to be at most ``1e-10``, a trace within ``1e-8`` of an
    integer, and, where the construction knows its constraint, ``||Φ E||``
    at most ``1e-10``.
    """

    matrix: OperatorMatrix
    method: str
    idempotency_residual: float
    hermiticity_residual: float
    rank: int
    trace: float
    valid: bool
    constraint_residual: float | None = None

    @property
    def space(self) -> FockSpace:
        return self.matrix.space

    @property
    def empty(self) -> bool:
        return self.rank == 0

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.entries


def projector_from_matrix(space: FockSpace, entries: np.ndarray, method: str, *,
                          constraint_residual: float | None = None) -> Projector:
    entries = np.asarray(entries, dtype=complex)
    herm = spectral_norm(entries - entries.conj().T)
    entries = 0.5 * (entries + entries.conj().T)
    idem = spectral_norm(entries @ entries - entries)
    trace = float(np.trace(entries).real)
    rank = int(round(trace))
    valid = (idem <= VALID_TOL and herm <= VALID_TOL and abs(trace - rank) <= RANK_TOL
             and (constraint_residual is None or constraint_residual <= VALID_TOL))
    return Projector(OperatorMatrix(space, entries, hermitian=True), method, idem, herm,
                     rank, trace, valid, constraint_residual)


def vacuum_projector(space: FockSpace, mode: int) -> Projector:
    """Closed form ``I ⊗ |0><0|`` with the vacuum on ``mode``."""
    keep = (space.occupations[:, mode] == 0).astype(complex)
    return projector_from_matrix(space, np.diag(keep), "closed_form")


def _interior_norm(op: np.ndarray, mask: np.ndarray) -> float:
    return spectral_norm(op[:, mask]) if mask.any() else 0.0


def check_closed_first_class(cs: ConstraintSet, h: OperatorMatrix | None = None, *,
                             margin: int = 1, tol: float = VALID_TOL) -> tuple[float, float]:
    """Residuals of the closed first-class relations on interior states.

    Returns ``(residual_cc, residual_ch)``: the largest spectral norms of
    ``[Φ_a, Φ_b] − i c_ab^c Φ_c`` and ``[Φ_a, H] − i h_a^b Φ_b`` applied to
    basis states at least ``margin`` quanta from the cutoff, divided by
    ``max(1, ||Φ||²)`` and ``max(1, ||Φ|| ||H||)`` respectively. When both
    are at most ``tol`` the set is marked closed first class.
    """
    if not cs.phis:
        cs.classification = CLOSED_FIRST_CLASS
        return 0.0, 0.0
    if cs.structure_c is None:
        raise ValueError("structure constants c_ab^c are required")
    if h is not None and cs.structure_h is None:
        raise ValueError("structure constants h_a^b are required when H is given")
    mask = interior_mask(cs.space, margin)
    norms = [phi.norm() for phi in cs.phis]
    scale_cc = max(1.0, max(norms) ** 2)
    n = len(cs.phis)

    residual_cc = 0.0
    for a in range(n):
        for b in range(n):
            lhs = commutator(cs.phis[a], cs.phis[b]).entries
            rhs = 1j * sum(cs.structure_c[a, b, c] * cs.phis[c].entries for c in range(n))
            residual_cc = max(residual_cc, _interior_norm(lhs - rhs, mask) / scale_cc)

    residual_ch = 0.0
    if h is not None:
        scale_ch = max(1.0, max(norms) * h.norm())
        for a in range(n):
            lhs = commutator(cs.phis[a], h).entries
            rhs = 1j * sum(cs.structure_h[a, b] * cs.phis[b].entries for b in range(n))
            residual_ch = max(residual_ch, _interior_norm(lhs - rhs, mask) / scale_ch)

    if residual_cc <= tol and residual_ch <= tol:
        cs.classification = CLOSED_FIRST_CLASS
    return residual_cc, residual_ch


def projector_group_average_u1(phi: OperatorMatrix, k: int | None = None, *,
                               strict: bool = True, integer_tol: float = 1e-8) -> Projector:
    """Average ``exp(-2πi j Φ / K)`` over ``j = 0..K-1``.

    ``Φ`` must have a numerically integer spectrum. The default ``K`` is
    ``2 max|λ| + 1``. A smaller ``K`` raises :class:`AliasingError`, or with
    ``strict=False`` returns the aliased average marked invalid.
    """
    w, v = hermitian_eigendecomposition(phi)
    rounded = np.round(w)
    if np.max(np.abs(w - rounded), initial=0.0) > integer_tol:
        raise ValueError("group averaging needs an integer constraint spectrum")
    need = 2 * int(np.max(np.abs(rounded), initial=0.0)) + 1
    k = need if k is None else int(k)
    if k < 1:
        raise ValueError("need at least one averaging angle")
    if k < need and strict:
        raise AliasingError(f"K={k} aliases the spectrum; need K >= {need}")

    # every exp(-iξΦ) shares Φ's eigenbasis, so the average is taken on the phases
    phases = np.exp(-2j * np.pi * np.outer(np.arange(k), w) / k).mean(axis=0)
    total = (v * phases) @ v.conj().T
    leak = spectral_norm(phi.entries @ total) / max(1.0, phi.norm())
    return projector_from_matrix(phi.space, total, "group_average_u1", constraint_residual=leak)


def projector_spectral(cs: ConstraintSet, zero_tol: float = 1e-10) -> Projector:
    """Projector onto the eigenvectors of ``Σ Φ_a²`` with eigenvalue at most
    ``zero_tol`` times the largest one. May be empty (rank 0)."""
    if not cs.phis:
        raise ValueError("spectral projector needs at least one constraint")
    c = sum(phi.entries @ phi.entries for phi in cs.phis)
    w, v = hermitian_eigendecomposition(OperatorMatrix(cs.space, c, hermitian=True))
    top = np.max(np.abs(w), initial=0.0)
    keep = w <= zero_tol * top if top > 0 else np.ones_like(w, dtype=bool)
    basis = v[:, keep]
    return projector_from_matrix(cs.space, basis @ basis.conj().T, "spectral_kernel")


@dataclass(frozen=True)
class Weight:
    """Density ``f(ξ)`` against Lebesgue measure, evaluated on node arrays ``(n, dim)``."""

    name: str
    func: Callable[[np.ndarray], np.ndarray]

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.atleast_2d(xi)), dtype=float).reshape(-1)


def gaussian_weight() -> Weight:
    """``exp(-(ξ_1² + ξ_2²)/4) / 2π``; with a canonical pair it yields the vacuum projector."""
    return Weight("gaussian_pair", lambda xi: np.exp(-np.sum(xi ** 2, axis=1) / 4) / (2 * np.pi))


def uniform_weight(period: float = 2 * np.pi) -> Weight:
    """Normalized Haar density ``1/period`` on ``[0, period)``."""
    return Weight("uniform", lambda xi: np.full(xi.shape[0], 1.0 / period))


def _generator_quadrature(phis, weight: Weight, rule: QuadratureRule) -> np.ndarray:
    cs = ConstraintSet(list(phis))
    f = weight(rule.nodes) * rule.weights
    total = np.zeros_like(cs.phis[0].entries)
    for xi, fw in zip(rule.nodes, f):
        if fw == 0.0:
            continue
        total += fw * matrix_exponential(cs.generator(xi), -1j).entries
    return total


def _displacement_quadrature(phis, weight: Weight, rule: QuadratureRule, mode: int,
                             chunk: int = 4096) -> np.ndarray:
    space = phis[0].space
    q, p = quadrature_operators(space, mode)
    if spectral_norm(phis[0].entries - p.entries) > 1e-12 or spectral_norm(phis[1].entries - q.entries) > 1e-12:
        raise ValueError(f"displacement family expects (P, Q) of mode {mode}")
    levels = int(space.occupations[:, mode].max()) + 1
    f = weight(rule.nodes) * rule.weights
    local = np.zeros((levels, levels), dtype=complex)
    for start in range(0, len(rule), chunk):
        xi = rule.nodes[start:start + chunk]
        # exp(-i(ξ1 P + ξ2 Q)) = D(α) with α = (ξ1 − i ξ2)/√2
        alpha = (xi[:, 0] - 1j * xi[:, 1]) / math.sqrt(2)
        local += np.einsum("n,nij->ij", f[start:start + chunk], displacement_matrix(alpha, levels))
    return embed_mode_operator(space, mode, local).entries


def projector_weighted_integral(phis: Sequence[OperatorMatrix], weight: Weight, rule: QuadratureRule, *,
                                displacement_mode: int | None = None, refine: bool = True,
                                refine_tol: float = 1e-6) -> Projector:
    """Quadrature of ``∫ exp(-i ξ^a Φ_a) f(ξ) dξ``.

    By default the exponentials of the truncated generators are used; that
    is exact when the ``Φ_a`` preserve the truncation (e.g. angular momentum
    on a total-quanta space). For a canonical pair ``(P, Q)`` of one mode,
    pass ``displacement_mode`` so that the compression of the exact
    displacement operator is integrated instead; exponentials of truncated
    quadratures are badly wrong at the displacements the Gaussian weight
    still samples.

    With ``refine``, the rule is rebuilt with twice the nodes per axis and
    :class:`QuadratureError` is raised if the two results differ by more
    than ``refine_tol``. Custom rules are not refined.
    """
    phis = list(phis)
    if not phis or rule.dim != len(phis):
        raise ValueError(f"rule dimension {rule.dim} does not match {len(phis)} constraints")
    space = phis[0].space

    def integrate(r):
        if displacement_mode is not None:
            if len(phis) != 2:
                raise ValueError("displacement family needs exactly two constraints")
            return _displacement_quadrature(phis, weight, r, displacement_mode)
        return _generator_quadrature(phis, weight, r)

    total = integrate(rule)
    finer = rule.refined() if refine else None
    if finer is not None:
        change = spectral_norm(integrate(finer) - total)
        if change > refine_tol:
            raise QuadratureError(f"refinement changed the projector by {change:.3e}")
    method = weight.name if weight.name in ("gaussian_pair",) else "custom_weight"
    return projector_from_matrix(space, total, method)


@dataclass(frozen=True)
class ProjectorReport:
    idempotency_residual: float
    hermiticity_residual: float
    rank: int
    invariance_residual: float


def projector_diagnostics(projector: Projector, cs: ConstraintSet | None = None,
                          taus: Sequence = ()) -> ProjectorReport:
    """Idempotency, hermiticity, rank, and ``max_τ ||exp(-i τ^a Φ_a) E − E||``.

    The last entry is zero when no constraints or ``τ`` are supplied. It is
    small only for first-class constraints; for others it is reported as is.
    """
    e = projector.entries
    idem = spectral_norm(e @ e - e)
    herm = spectral_norm(e - e.conj().T)
    inv = 0.0
    if cs is not None and cs.phis:
        for tau in taus:
            u = matrix_exponential(cs.generator(np.atleast_1d(tau)), -1j).entries
            inv = max(inv, spectral_norm(u @ e - e))
    return ProjectorReport(idem, herm, projector.rank, inv)
