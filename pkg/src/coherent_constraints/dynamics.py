"""
Projected time evolution, propagator kernels, and the two worked examples.

Propagators are dense matrices; kernels are their matrix elements between
truncated coherent states. The first example (planar rotation constraint)
uses weyl labels, the second (vacuum-pinned mode) canonical labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bessel import bessel_i0
from .coherent import (
    CANONICAL, WEYL, CoherentLabel, coherent_amplitudes, coherent_state, overlap_closed_form,
)
from .fock import (
    FockSpace, OperatorMatrix, build_space, hermitian_eigendecomposition, matrix_exponential,
    spectral_norm,
)
from .projectors import ConstraintSet, Projector, vacuum_projector
from .quadrature import trapezoid

__all__ = [
    "TrotterPlan", "KernelReport", "FactorizationReport", "TrotterStudy",
    "evolve_projected_trotter", "evolve_projected_exact", "evolve_with_multipliers",
    "trotter_convergence", "kernel_grid", "example1_closed_form", "example2_factorization",
    "vacuum_normalization", "partial_vacuum_expectation", "lattice_equivalence_check",
]


def _entries(op) -> np.ndarray:
    return op.entries if hasattr(op, "entries") else np.asarray(op)


def _space(op) -> FockSpace:
    return op.matrix.space if isinstance(op, Projector) else op.space


def _same_space(*ops):
    spaces = {_space(op) for op in ops}
    if len(spaces) != 1:
        raise ValueError("operators live on different spaces")
    return spaces.pop()


@dataclass(frozen=True, eq=False)
class TrotterPlan:
    """Piecewise-constant multiplier schedule, one row ``λ_l`` per slice."""

    T: float
    lambda_schedule: np.ndarray

    def __post_init__(self):
        sched = np.asarray(self.lambda_schedule, dtype=float)
        if sched.ndim == 1:
            sched = sched[:, None]
        if sched.shape[0] < 1:
            raise ValueError("schedule needs at least one slice")
        object.__setattr__(self, "lambda_schedule", sched)

    @property
    def N(self) -> int:
        return self.lambda_schedule.shape[0]

    @property
    def epsilon(self) -> float:
        return self.T / self.N

    @classmethod
    def random(cls, T: float, slices: int, constraints: int, rng: np.random.Generator,
               low: float = -5.0, high: float = 5.0) -> "TrotterPlan":
        return cls(T, rng.uniform(low, high, size=(slices, constraints)))


def evolve_projected_trotter(h: OperatorMatrix, e: Projector, T: float, n: int) -> OperatorMatrix:
    """``E (exp(-i T/N H) E)^N``: N short-time factors between N+1 projections."""
    space = _same_space(h, e)
    if n < 1:
        raise ValueError("need at least one slice")
    e_mat = _entries(e)
    step = matrix_exponential(OperatorMatrix(space, h.entries, hermitian=True), -1j * T / n).entries @ e_mat
    out = e_mat
    for _ in range(n):
        out = step @ out
    return OperatorMatrix(space, out)


def evolve_projected_exact(h: OperatorMatrix, e: Projector, T: float) -> OperatorMatrix:
    """``E exp(-i T EHE) E``, unitary on the range of ``E``."""
    space = _same_space(h, e)
    e_mat = _entries(e)
    ehe = e_mat @ h.entries @ e_mat
    skew = spectral_norm(ehe - ehe.conj().T)
    if skew > 1e-10 * max(1.0, spectral_norm(ehe)):
        raise ValueError(f"EHE is not hermitian (residual {skew:.3e})")
    gen = OperatorMatrix(space, 0.5 * (ehe + ehe.conj().T), hermitian=True)
    u = matrix_exponential(gen, -1j * T).entries
    return OperatorMatrix(space, e_mat @ u @ e_mat)


def evolve_with_multipliers(h: OperatorMatrix, cs: ConstraintSet, plan: TrotterPlan,
                            e: Projector | None = None) -> OperatorMatrix:
    """``[Π_{l=N..1} exp(-i ε (H + λ_l^a Φ_a))] E``, later slices to the left.

    Without ``E`` the bare time-ordered product is returned.
    """
    space = _same_space(h, *cs.phis)
    if plan.lambda_schedule.shape[1] != len(cs):
        raise ValueError(f"schedule has {plan.lambda_schedule.shape[1]} multipliers, "
                         f"constraint set has {len(cs)}")
    out = np.eye(space.dimension, dtype=complex) if e is None else _entries(e).copy()
    for lam in plan.lambda_schedule:
        gen = OperatorMatrix(space, h.entries + cs.generator(lam).entries, hermitian=True)
        out = matrix_exponential(gen, -1j * plan.epsilon).entries @ out
    return OperatorMatrix(space, out)


@dataclass(frozen=True)
class TrotterStudy:
    slices: tuple
    errors: tuple
    slope: float
    local_slopes: tuple
    reduction: float


def trotter_convergence(h: OperatorMatrix, e: Projector, T: float,
                        slices: Sequence[int]) -> TrotterStudy:
    """Spectral-norm distance of the projected Trotter product from the exact
    projected propagator for each slice count.

    ``slope`` is the negated least-squares slope of ``log error`` against
    ``log N`` over all slice counts; ``local_slopes`` are the same between
    consecutive counts; ``reduction`` is first error over last error.
    """
    exact = evolve_projected_exact(h, e, T).entries
    slices = tuple(int(n) for n in slices)
    errors = tuple(spectral_norm(evolve_projected_trotter(h, e, T, n).entries - exact) for n in slices)
    logn, loge = np.log(slices), np.log(errors)
    slope = -float(np.polyfit(logn, loge, 1)[0]) if len(slices) > 1 else float("nan")
    local = tuple(float(-d) for d in np.diff(loge) / np.diff(logn))
    return TrotterStudy(slices, errors, slope, local, errors[0] / errors[-1])


@dataclass
class KernelReport:
    """Matrix kernel values, with closed-form comparison where available."""

    labels: list
    matrix_values: np.ndarray
    closed_form_values: np.ndarray | None = None
    abs_error: np.ndarray | None = None
    rel_error: np.ndarray | None = None
    cutoff: str = ""

    @property
    def max_abs_error(self) -> float:
        return float(np.max(self.abs_error)) if self.abs_error is not None else float("nan")


def kernel_grid(op, label_pairs: Sequence[tuple[CoherentLabel, CoherentLabel]], *,
                closed_form: Callable | None = None, guard: float = 3.0) -> KernelReport:
    """``<label''|Op|label'>`` between weyl coherent states for each pair."""
    matrix = _entries(op)
    space = _space(op)
    pairs = list(label_pairs)
    values = np.empty(len(pairs), dtype=complex)
    for i, (bra, ket) in enumerate(pairs):
        for lab in (bra, ket):
            if np.max(np.abs(lab.z)) > guard:
                raise ValueError(f"label with |z| = {np.max(np.abs(lab.z)):.3g} exceeds guard {guard}")
        b = coherent_state(space, bra.with_convention(WEYL)).amplitudes
        k = coherent_state(space, ket.with_convention(WEYL)).amplitudes
        values[i] = np.vdot(b, matrix @ k)
    report = KernelReport(pairs, values, cutoff=repr(space))
    if closed_form is not None:
        exact = np.array([closed_form(pair) for pair in pairs], dtype=complex)
        report.closed_form_values = exact
        report.abs_error = np.abs(values - exact)
        report.rel_error = report.abs_error / np.maximum(np.abs(exact), np.finfo(float).tiny)
    return report


def example1_closed_form(label_pair: tuple[CoherentLabel, CoherentLabel]) -> complex:
    """Rotation-averaged two-mode coherent-state kernel.

    ``exp(-(|z''|² + |z'|²)/2) I0(sqrt((z''*_1² + z''*_2²)(z'_1² + z'_2²)))``
    """
    bra, ket = label_pair
    if bra.modes != 2 or ket.modes != 2:
        raise ValueError("the rotation example has two modes")
    zb, zk = bra.z, ket.z
    arg = np.sqrt(complex(np.sum(np.conj(zb) ** 2) * np.sum(zk ** 2)))
    gauss = math.exp(-0.5 * (np.vdot(zb, zb).real + np.vdot(zk, zk).real))
    return gauss * bessel_i0(arg)


def partial_vacuum_expectation(h: OperatorMatrix, mode: int = 1) -> OperatorMatrix:
    """``<0|H|0>`` on ``mode`` of a two-mode per_mode space, as an operator on the other mode."""
    space = h.space
    if space.scheme != "per_mode" or space.modes != 2:
        raise ValueError("partial expectation needs a two-mode per_mode space")
    free = 1 - mode
    reduced = build_space(1, n_max=space.cutoffs[free])
    rows = np.flatnonzero(space.occupations[:, mode] == 0)
    order = np.argsort(space.occupations[rows, free])
    rows = rows[order]
    return OperatorMatrix(reduced, h.entries[np.ix_(rows, rows)])


def vacuum_normalization(half_width: float = 8.0, points: int = 129) -> float:
    """``∫ |<0|r,s>|² dr ds / 2π`` by the 2-d trapezoid rule."""
    rule = trapezoid(points, -half_width, half_width, dim=2)
    vac = CoherentLabel([0.0], [0.0], CANONICAL)
    vals = np.array([abs(overlap_closed_form(vac, CoherentLabel([r], [s], CANONICAL))) ** 2
                     for r, s in rule.nodes])
    return float(rule.weights @ vals / (2 * np.pi))


@dataclass
class FactorizationReport:
    symbol_residual: float
    factorization_residual: float
    labels_checked: int = 0
    pairs_checked: int = 0
    details: dict = field(default_factory=dict)


def _split(label: CoherentLabel, mode: int) -> tuple[CoherentLabel, CoherentLabel]:
    free = 1 - mode
    return (CoherentLabel([label.p[free]], [label.q[free]], label.convention),
            CoherentLabel([label.p[mode]], [label.q[mode]], label.convention))


def example2_factorization(h: OperatorMatrix, labels: Sequence[CoherentLabel],
                           label_pairs: Sequence[tuple[CoherentLabel, CoherentLabel]] = (),
                           T: float = 1.0, *, e: Projector | None = None,
                           constrained_mode: int = 1) -> FactorizationReport:
    """Reduction checks for the vacuum-pinned second mode.

    ``symbol_residual`` compares the projected, renormalized diagonal symbol
    ``<x|EHE|x>/<x|E|x>`` with the plain symbol at ``(p, q, 0, 0)``.
    ``factorization_residual`` compares the projected propagator kernel on
    the full space with the free-mode kernel generated by ``<0|H|0>`` times
    ``<r'',s''|0><0|r',s'>``.
    """
    space = h.space
    closed = vacuum_projector(space, constrained_mode)
    if e is None:
        e = closed
    elif spectral_norm(_entries(e) - closed.entries) > 1e-6:
        raise ValueError("projector is not I ⊗ |0><0| on the constrained mode")
    e_mat = _entries(e)
    ehe = e_mat @ h.entries @ e_mat

    sym_err = 0.0
    for lab in labels:
        x = coherent_state(space, lab).amplitudes
        ex = e_mat @ x
        lhs = np.vdot(x, ehe @ x) / np.vdot(x, ex)
        pinned = lab.p.copy(), lab.q.copy()
        pinned[0][constrained_mode] = 0.0
        pinned[1][constrained_mode] = 0.0
        y = coherent_state(space, CoherentLabel(*pinned, lab.convention)).amplitudes
        rhs = np.vdot(y, h.entries @ y) / np.vdot(y, y)
        sym_err = max(sym_err, abs(lhs - rhs))

    fact = 0.0
    if label_pairs:
        full = evolve_projected_exact(h, e, T).entries
        h_eff = partial_vacuum_expectation(h, constrained_mode)
        reduced = matrix_exponential(OperatorMatrix(h_eff.space, h_eff.entries, hermitian=True),
                                     -1j * T).entries
        vac = CoherentLabel([0.0], [0.0], CANONICAL)
        for bra, ket in label_pairs:
            k_full = np.vdot(coherent_state(space, bra).amplitudes,
                             full @ coherent_state(space, ket).amplitudes)
            (bf, bc), (kf, kc) = _split(bra, constrained_mode), _split(ket, constrained_mode)
            k_red = np.vdot(coherent_state(h_eff.space, bf).amplitudes,
                            reduced @ coherent_state(h_eff.space, kf).amplitudes)
            pinned = (overlap_closed_form(bc, vac.with_convention(bc.convention))
                      * overlap_closed_form(vac.with_convention(kc.convention), kc))
            fact = max(fact, abs(k_full - k_red * pinned))
    return FactorizationReport(float(sym_err), float(fact), len(labels), len(label_pairs))


def _phase_space_grid(modes: int, half_width: float, points: int):
    rule = trapezoid(points, -half_width, half_width, dim=2 * modes)
    z = (rule.nodes[:, modes:] + 1j * rule.nodes[:, :modes]) / math.sqrt(2)
    return z, rule.weights / (2 * np.pi) ** modes


@dataclass(frozen=True)
class LatticeCheck:
    residual: float
    matrix_error: float


def lattice_equivalence_check(h: OperatorMatrix, e: Projector,
                              label_pairs: Sequence[tuple[CoherentLabel, CoherentLabel]],
                              n: int, T: float = 1.0, *, half_width: float = 5.0, points: int = 32,
                              max_dimension: int = 100, budget: int = 4_000_000,
                              chunk: int = 1 << 15) -> LatticeCheck:
    """Compare two lattice forms of the projected propagator kernel.

    The first inserts ``n - 1`` phase-space resolutions of unity between
    factors ``E exp(-iεH) E``. The second uses rescaled states
    ``|x>> = E|x>/M_x`` with factors ``<<x|exp(-iεH)|y>>`` and measure
    weights ``M_x² = <x|E|x>``, times ``M'' M'`` at the ends. Both share
    the trapezoid grid, so ``residual`` is round-off. ``matrix_error`` is
    the distance of the first form from the exact product
    ``<x''|(E exp(-iεH) E)^n|x'>``, i.e. the quadrature error.
    """
    space = _same_space(h, e)
    if space.dimension > max_dimension:
        raise ValueError(f"dimension {space.dimension} too large for phase-space lattice sums")
    if points ** (2 * space.modes) > budget:
        raise ValueError("quadrature budget exceeded")
    if n < 1:
        raise ValueError("need at least one slice")
    e_mat = _entries(e)
    d = space.dimension
    u = matrix_exponential(OperatorMatrix(space, h.entries, hermitian=True), -1j * T / n).entries
    slice_op = e_mat @ u @ e_mat

    # resolution of unity G = Σ w |x><x| and its rescaled counterpart Σ w M_x² |x>><<x|
    z, w = _phase_space_grid(space.modes, half_width, points)
    g = np.zeros((d, d), dtype=complex)
    g_rescaled = np.zeros((d, d), dtype=complex)
    for start in range(0, len(w), chunk):
        amps = coherent_amplitudes(space, z[start:start + chunk])
        ww = w[start:start + chunk]
        g += (amps.T * ww) @ amps.conj()
        proj = amps @ e_mat.T
        m2 = np.sum(np.abs(proj) ** 2, axis=1)
        alive = m2 > 1e-26
        resc = proj[alive] / np.sqrt(m2[alive])[:, None]
        g_rescaled += (resc.T * (ww[alive] * m2[alive])) @ resc.conj()

    lattice = slice_op
    rescaled = u
    exact = slice_op
    for _ in range(n - 1):
        lattice = slice_op @ g @ lattice
        rescaled = u @ g_rescaled @ rescaled
        exact = slice_op @ exact

    residual = 0.0
    matrix_error = 0.0
    for bra, ket in label_pairs:
        b = coherent_state(space, bra).amplitudes
        k = coherent_state(space, ket).amplitudes
        eb, ek = e_mat @ b, e_mat @ k
        mb, mk = np.linalg.norm(eb), np.linalg.norm(ek)
        lat = np.vdot(b, lattice @ k)
        if mb > 1e-13 and mk > 1e-13:
            res = mb * mk * np.vdot(eb / mb, rescaled @ (ek / mk))
        else:
            res = 0.0
        residual = max(residual, abs(lat - res))
        matrix_error = max(matrix_error, abs(lat - np.vdot(b, exact @ k)))
    return LatticeCheck(float(residual), float(matrix_error))
