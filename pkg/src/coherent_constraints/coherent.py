"""
Canonical coherent states on truncated Fock spaces.

Labels carry one of two phase conventions. ``weyl`` states are
``exp(i(p·Q − q·P))|0>``; ``canonical`` states are
``exp(−i q·P) exp(i p·Q)|0> = exp(−i p·q/2) × weyl``. Both use
``z = (q + i p)/√2``. States are assembled from the closed-form Fock
coefficients, restricted to the admitted basis, and left unnormalized; the
lost probability is recorded as ``norm_deficit``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fock import FockSpace, OperatorMatrix, StateVector, spectral_norm
from .quadrature import trapezoid

__all__ = [
    "WEYL", "CANONICAL", "CoherentLabel", "RescaledState", "LabelPath",
    "AnnihilatedStateError", "coherent_state", "coherent_amplitudes",
    "overlap_closed_form", "upper_symbol", "unity_resolution_residual",
    "rescaled_state", "geometric_one_form_check", "circular_path", "linear_path",
]

WEYL = "weyl"
CANONICAL = "canonical"
_CONVENTIONS = (WEYL, CANONICAL)

DEFAULT_MAX_DEFICIT = 1e-12


class AnnihilatedStateError(ValueError):
    """The projector maps the coherent state to (numerically) zero."""


@dataclass(frozen=True, eq=False)
class CoherentLabel:
    """Phase-space point ``(p, q)`` with one entry per mode."""

    p: np.ndarray
    q: np.ndarray
    convention: str = WEYL

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if p.shape != q.shape or p.ndim != 1:
            raise ValueError("p and q must be 1-d arrays of equal length")
        if self.convention not in _CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_z(cls, z, convention: str = WEYL) -> "CoherentLabel":
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return cls(math.sqrt(2) * z.imag, math.sqrt(2) * z.real, convention)

    @property
    def z(self) -> np.ndarray:
        return (self.q + 1j * self.p) / math.sqrt(2)

    @property
    def modes(self) -> int:
        return self.p.shape[0]

    def with_convention(self, convention: str) -> "CoherentLabel":
        return CoherentLabel(self.p, self.q, convention)

    def phase(self) -> complex:
        """Factor relating this label's state to the weyl state."""
        if self.convention == CANONICAL:
            return complex(np.exp(-0.5j * float(self.p @ self.q)))
        return 1.0 + 0j


def coherent_amplitudes(space: FockSpace, z: np.ndarray) -> np.ndarray:
    """Weyl-convention amplitudes for a batch of points ``z`` of shape ``(M, J)``.

    Returns an ``(M, D)`` array.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    if z.shape[1] != space.modes:
        raise ValueError(f"labels have {z.shape[1]} modes, space has {space.modes}")
    occ = space.occupations
    top = int(occ.max()) + 1
    # per-mode table z^n / sqrt(n!) by recurrence, avoids factorial overflow
    table = np.empty(z.shape + (top,), dtype=complex)
    table[..., 0] = 1.0
    for n in range(1, top):
        table[..., n] = table[..., n - 1] * z / math.sqrt(n)
    amps = np.exp(-0.5 * np.sum(np.abs(z) ** 2, axis=1))[:, None].astype(complex)
    for j in range(space.modes):
        amps = amps * table[:, j, occ[:, j]]
    return amps


def coherent_state(space: FockSpace, label: CoherentLabel, *,
                   max_deficit: float | None = None) -> StateVector:
    """Truncated coherent state ``|p,q>``.

    A ``UserWarning`` is issued when the truncation discards more than
    ``max_deficit`` of the probability (no warning when ``None``).
    """
    if label.modes != space.modes:
        raise ValueError(f"label has {label.modes} modes, space has {space.modes}")
    amps = coherent_amplitudes(space, label.z[None, :])[0] * label.phase()
    deficit = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    if max_deficit is not None and deficit > max_deficit:
        warnings.warn(f"coherent state truncation discards {deficit:.3e} of the norm")
    return StateVector(space, amps, norm_deficit=deficit, truncated=True)


def overlap_closed_form(bra: CoherentLabel, ket: CoherentLabel, *, bridge: bool = False) -> complex:
    """``<bra|ket>`` from the Gaussian formula.

    Labels of different conventions are only combined when ``bridge`` is set,
    in which case each side contributes its own phase.
    """
    if bra.modes != ket.modes:
        raise ValueError("labels have different mode counts")
    if bra.convention != ket.convention and not bridge:
        raise ValueError("mixing weyl and canonical labels requires bridge=True")
    za, zb = bra.z, ket.z
    exponent = -0.5 * np.vdot(za, za).real + np.vdot(za, zb) - 0.5 * np.vdot(zb, zb).real
    return complex(np.conj(bra.phase()) * ket.phase() * np.exp(exponent))


def upper_symbol(h: OperatorMatrix, label: CoherentLabel) -> complex:
    """Normalized diagonal coherent-state expectation ``<p,q|H|p,q>/<p,q|p,q>``."""
    psi = coherent_state(h.space, label).amplitudes
    norm2 = float(np.vdot(psi, psi).real)
    if norm2 < 1e-300:
        raise ValueError("truncated coherent state has zero norm")
    return complex(np.vdot(psi, h.entries @ psi) / norm2)


def unity_resolution_residual(space: FockSpace, half_width: float = 6.0, points: int = 64, *,
                              max_quanta: int | None = None, chunk: int = 1 << 16) -> float:
    """Spectral-norm error of the phase-space resolution of unity on a low-lying block.

    The integral of ``|p,q><p,q| dp dq / (2π)^J`` is taken with the
    trapezoid rule on ``[-half_width, half_width]^(2J)`` and compared with
    the identity on the states of total quanta ``<= max_quanta`` (half the
    cutoff by default). A negative ``max_quanta`` selects the empty block.
    """
    if points < 8:
        raise ValueError("resolution-of-unity grid needs at least 8 points per axis")
    if max_quanta is None:
        max_quanta = min(space.cutoffs) // 2
    block = np.flatnonzero(space.occupations.sum(axis=1) <= max_quanta)
    if block.size == 0:
        return 0.0
    rule = trapezoid(points, -half_width, half_width, dim=2 * space.modes)
    j = space.modes
    acc = np.zeros((block.size, block.size), dtype=complex)
    for start in range(0, len(rule), chunk):
        nodes = rule.nodes[start:start + chunk]
        w = rule.weights[start:start + chunk]
        # node layout: (p_1..p_J, q_1..q_J)
        z = (nodes[:, j:] + 1j * nodes[:, :j]) / math.sqrt(2)
        amps = coherent_amplitudes(space, z)[:, block]
        acc += (amps.T * w) @ amps.conj()
    acc /= (2 * np.pi) ** j
    return spectral_norm(acc - np.eye(block.size))


@dataclass(frozen=True, eq=False)
class RescaledState:
    """Unit vector ``E|p,q>/||E|p,q>||`` with ``M = ||E|p,q>||``."""

    base: CoherentLabel
    projector: object = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    M: float


def _projector_matrix(projector) -> OperatorMatrix:
    return projector.matrix if hasattr(projector, "matrix") else projector


def rescaled_state(label: CoherentLabel, projector, *, min_norm: float = 1e-13) -> RescaledState:
    """Project a coherent state and rescale it to unit length.

    Raises :class:`AnnihilatedStateError` when ``||E|p,q>|| <= min_norm``.
    """
    e = _projector_matrix(projector)
    v = e.entries @ coherent_state(e.space, label).amplitudes
    m = float(np.linalg.norm(v))
    if m <= min_norm:
        raise AnnihilatedStateError(f"projector annihilates the coherent state at p={label.p}, q={label.q}")
    return RescaledState(label, projector, v / m, m)


@dataclass(frozen=True)
class LabelPath:
    """Curve ``t -> (p(t), q(t))`` in phase space with its analytic velocity."""

    point: Callable[[float], tuple[np.ndarray, np.ndarray]]
    velocity: Callable[[float], tuple[np.ndarray, np.ndarray]]
    t_range: tuple[float, float] = (0.0, 2 * np.pi)
    convention: str = CANONICAL

    def label(self, t: float) -> CoherentLabel:
        p, q = self.point(t)
        return CoherentLabel(p, q, self.convention)


def circular_path(center_p, center_q, radius: float, mode: int,
                  convention: str = CANONICAL) -> LabelPath:
    """Circle ``p = p0 + r cos t``, ``q = q0 + r sin t`` in one mode, others fixed."""
    center_p = np.asarray(center_p, dtype=float)
    center_q = np.asarray(center_q, dtype=float)
    unit = np.zeros_like(center_p)
    unit[mode] = 1.0

    def point(t):
        return center_p + radius * np.cos(t) * unit, center_q + radius * np.sin(t) * unit

    def velocity(t):
        return -radius * np.sin(t) * unit, radius * np.cos(t) * unit

    return LabelPath(point, velocity, (0.0, 2 * np.pi), convention)


def linear_path(start_p, start_q, dp, dq, convention: str = CANONICAL) -> LabelPath:
    """Straight segment ``(p, q) = start + t (dp, dq)`` for ``t`` in ``[0, 1]``."""
    start_p, start_q = np.asarray(start_p, float), np.asarray(start_q, float)
    dp, dq = np.asarray(dp, float), np.asarray(dq, float)
    return LabelPath(lambda t: (start_p + t * dp, start_q + t * dq),
                     lambda t: (dp, dq), (0.0, 1.0), convention)


def _vacuum_pair_projector_check(e: OperatorMatrix, constrained_mode: int):
    space = e.space
    if space.scheme != "per_mode" or space.modes != 2:
        raise ValueError("one-form check needs a two-mode per_mode space")
    target = np.diag((space.occupations[:, constrained_mode] == 0).astype(complex))
    if spectral_norm(e.entries - target) > 1e-6:
        raise ValueError("projector is not I ⊗ |0><0| on the constrained mode")


def _kinematic_one_form(p, q, dp, dq, convention) -> float:
    if convention == CANONICAL:
        return float(p @ dq)
    return float(p @ dq - q @ dp) / 2


def geometric_one_form_check(path: LabelPath, projector, steps: int = 64, *,
                             h: float = 1e-3, constrained_mode: int = 1) -> float:
    """Largest deviation of the projected one-form from its reduced analytic value.

    Along the path the rescaled states ``u = E|x>/||E|x>||`` give the
    one-form ``i<u|du/dt>``, evaluated here by a central difference with
    step ``h``. For ``E = I ⊗ |0><0|`` it should equal the kinematic term of
    the free mode minus ``Im d/dt ln <0|r,s>`` of the constrained mode.
    """
    if not 0 < h <= 1e-1:
        raise ValueError(f"finite-difference step {h} outside (0, 0.1]")
    e = _projector_matrix(projector)
    _vacuum_pair_projector_check(e, constrained_mode)
    free = [m for m in range(2) if m != constrained_mode]

    def u(t):
        return rescaled_state(path.label(t), projector).amplitudes

    worst = 0.0
    for t in np.linspace(*path.t_range, steps):
        lhs = 1j * np.vdot(u(t), u(t + h) - u(t - h)) / (2 * h)
        p, q = path.point(t)
        dp, dq = path.velocity(t)
        rhs = _kinematic_one_form(p[free], q[free], dp[free], dq[free], path.convention)
        if path.convention == CANONICAL:
            # <0|r,s> carries the phase exp(-i r s / 2)
            c = constrained_mode
            rhs += 0.5 * (dp[c] * q[c] + p[c] * dq[c])
        worst = max(worst, abs(lhs - rhs))
    return worst
