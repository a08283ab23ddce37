"""
Truncated bosonic Fock spaces and dense operator algebra on them.

Two truncation schemes are supported. ``per_mode`` keeps occupations
``n_j <= n_max_j`` independently for every mode (a tensor product, mode 0
most significant in the flat index). ``total_quanta`` keeps every
multi-index with ``sum(n) <= N_max``; on that space number-conserving
operators such as the planar angular momentum are represented exactly.

Ladder operators drop transitions that would leave the truncated basis.
Canonical relations therefore hold only on interior states, see
:func:`interior_mask`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "DEFAULT_MAX_DIMENSION", "HERMITIAN_TOL", "UNITARY_TOL",
    "FockSpace", "OperatorMatrix", "StateVector",
    "build_space", "interior_mask", "spectral_norm",
    "identity", "annihilation", "creation", "number_operator",
    "quadrature_operators", "angular_momentum", "embed_mode_operator",
    "displacement_matrix", "commutator", "matrix_exponential",
    "hermitian_eigendecomposition",
]

DEFAULT_MAX_DIMENSION = 100_000
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12

PER_MODE = "per_mode"
TOTAL_QUANTA = "total_quanta"


def _compositions(modes: int, budget: int) -> Iterator[tuple[int, ...]]:
    # lexicographic order over multi-indices with sum <= budget
    if modes == 1:
        for n in range(budget + 1):
            yield (n,)
        return
    for n in range(budget + 1):
        for rest in _compositions(modes - 1, budget - n):
            yield (n,) + rest


@dataclass(frozen=True, eq=False)
class FockSpace:
    """Truncated multimode Fock basis with a flat-index map.

    Use :func:`build_space` rather than the constructor.
    """

    modes: int
    scheme: str
    cutoffs: tuple[int, ...]
    occupations: np.ndarray = field(repr=False)
    _index: dict = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.occupations.shape[0]

    @property
    def total_cutoff(self) -> int:
        """Largest total quanta present in the basis."""
        return int(self.occupations.sum(axis=1).max())

    def flatten(self, multi_index: Sequence[int]) -> int:
        try:
            return self._index[tuple(int(n) for n in multi_index)]
        except KeyError:
            raise KeyError(f"{tuple(multi_index)} is not admitted by {self}") from None

    def unflatten(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.dimension:
            raise IndexError(f"flat index {flat} out of range 0..{self.dimension - 1}")
        return tuple(int(n) for n in self.occupations[flat])

    def contains(self, multi_index: Sequence[int]) -> bool:
        return tuple(int(n) for n in multi_index) in self._index

    def basis_vector(self, multi_index: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=complex)
        v[self.flatten(multi_index)] = 1.0
        return v

    def _key(self):
        return (self.modes, self.scheme, self.cutoffs)

    def __eq__(self, other):
        return isinstance(other, FockSpace) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FockSpace(modes={self.modes}, scheme={self.scheme!r}, cutoffs={self.cutoffs}, D={self.dimension})"


def build_space(modes: int, *, n_max: int | Sequence[int] | None = None,
                total_quanta: int | None = None,
                max_dimension: int = DEFAULT_MAX_DIMENSION) -> FockSpace:
    """Build a truncated Fock space.

    Parameters
    ----------
    modes : int
        Number of bosonic modes J, at least one.
    n_max : int or sequence of int, optional
        Per-mode occupation cutoff (``per_mode`` scheme).
    total_quanta : int, optional
        Cutoff on the summed occupation (``total_quanta`` scheme).
    max_dimension : int
        Refuse to build spaces larger than this.

    Exactly one of ``n_max`` and ``total_quanta`` must be given.
    """
    if modes < 1:
        raise ValueError("a Fock space needs at least one mode")
    if (n_max is None) == (total_quanta is None):
        raise ValueError("give exactly one of n_max (per_mode) or total_quanta")

    if n_max is not None:
        cutoffs = (int(n_max),) * modes if np.isscalar(n_max) else tuple(int(n) for n in n_max)
        if len(cutoffs) != modes:
            raise ValueError(f"expected {modes} per-mode cutoffs, got {len(cutoffs)}")
        if min(cutoffs) < 0:
            raise ValueError("cutoffs must be non-negative")
        dim = math.prod(n + 1 for n in cutoffs)
        scheme = PER_MODE
    else:
        if total_quanta < 0:
            raise ValueError("cutoffs must be non-negative")
        cutoffs = (int(total_quanta),)
        dim = math.comb(total_quanta + modes, modes)
        scheme = TOTAL_QUANTA

    if dim > max_dimension:
        raise ValueError(f"dimension {dim} exceeds the ceiling {max_dimension}")

    if scheme == PER_MODE:
        occ = np.array(list(np.ndindex(*(n + 1 for n in cutoffs))), dtype=np.int64)
    else:
        occ = np.array(list(_compositions(modes, cutoffs[0])), dtype=np.int64)
    occ = occ.reshape(dim, modes)
    index = {tuple(int(n) for n in row): i for i, row in enumerate(occ)}
    return FockSpace(modes, scheme, cutoffs, occ, index)


def interior_mask(space: FockSpace, margin: int = 1) -> np.ndarray:
    """Boolean mask of basis states at least ``margin`` quanta away from the cutoff.

    Products of truncated ladder operators with at most ``margin`` raising
    steps act exactly on these states.
    """
    occ = space.occupations
    if space.scheme == PER_MODE:
        return np.all(occ <= np.array(space.cutoffs) - margin, axis=1)
    return occ.sum(axis=1) <= space.cutoffs[0] - margin


def spectral_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        return float(np.linalg.norm(a))
    return float(np.linalg.svd(a, compute_uv=False)[0])


def _norm_at_most(x: np.ndarray, bound: float) -> bool:
    # Frobenius norm bounds the spectral norm from above; only fall back to SVD
    # when the cheap bound is inconclusive.
    if np.linalg.norm(x) <= bound:
        return True
    return spectral_norm(x) <= bound


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex operator on a :class:`FockSpace`.

    Setting ``hermitian`` or ``unitary`` triggers a verification at
    construction; a failed check raises ``ValueError``.
    """

    space: FockSpace
    entries: np.ndarray = field(repr=False)
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        d = self.space.dimension
        if entries.shape != (d, d):
            raise ValueError(f"entries have shape {entries.shape}, space needs {(d, d)}")
        object.__setattr__(self, "entries", entries)
        if self.hermitian:
            diff = entries - entries.conj().T
            # ||A||_F / sqrt(D) <= ||A||_2, so the cheap test is conservative
            if np.any(diff) and not _norm_at_most(diff, HERMITIAN_TOL * np.linalg.norm(entries) / math.sqrt(d)):
                if spectral_norm(diff) > HERMITIAN_TOL * spectral_norm(entries):
                    raise ValueError("operator flagged hermitian fails the hermiticity check")
        if self.unitary:
            defect = entries.conj().T @ entries - np.eye(d)
            if not _norm_at_most(defect, UNITARY_TOL):
                raise ValueError("operator flagged unitary fails the unitarity check")

    @property
    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.entries.conj().T, self.hermitian, self.unitary)

    def norm(self) -> float:
        return spectral_norm(self.entries)

    def _check(self, other: "OperatorMatrix"):
        if self.space != other.space:
            raise ValueError(f"operators live on different spaces: {self.space} vs {other.space}")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.space, self.entries @ other.entries)
        if isinstance(other, StateVector):
            if other.space != self.space:
                raise ValueError("state and operator live on different spaces")
            return StateVector(self.space, self.entries @ other.amplitudes)
        return self.entries @ other

    def __add__(self, other: "OperatorMatrix"):
        self._check(other)
        return OperatorMatrix(self.space, self.entries + other.entries,
                              hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other: "OperatorMatrix"):
        self._check(other)
        return OperatorMatrix(self.space, self.entries - other.entries,
                              hermitian=self.hermitian and other.hermitian)

    def __neg__(self):
        return OperatorMatrix(self.space, -self.entries, self.hermitian)

    def __mul__(self, scalar):
        scalar = complex(scalar)
        return OperatorMatrix(self.space, scalar * self.entries,
                              hermitian=self.hermitian and scalar.imag == 0)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class StateVector:
    """Ket on a :class:`FockSpace`.

    ``norm_deficit`` is ``1 - ||amplitudes||**2`` for states assembled from
    truncated closed-form coefficients, zero otherwise.
    """

    space: FockSpace
    amplitudes: np.ndarray = field(repr=False)
    norm_deficit: float = 0.0
    truncated: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dimension,):
            raise ValueError(f"amplitudes have shape {amps.shape}, space needs {(self.space.dimension,)}")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        if other.space != self.space:
            raise ValueError("states live on different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def identity(space: FockSpace) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.dimension), hermitian=True, unitary=True)


def _check_mode(space: FockSpace, mode: int):
    if not 0 <= mode < space.modes:
        raise IndexError(f"mode {mode} out of range for {space.modes} modes")


def annihilation(space: FockSpace, mode: int) -> OperatorMatrix:
    """Lowering operator ``a_mode`` with ``a|n> = sqrt(n)|n-1>``."""
    _check_mode(space, mode)
    d = space.dimension
    a = np.zeros((d, d), dtype=complex)
    for col, occ in enumerate(space.occupations):
        n = occ[mode]
        if n == 0:
            continue
        lowered = occ.copy()
        lowered[mode] -= 1
        # both schemes are closed under lowering, so the target always exists
        a[space.flatten(lowered), col] = math.sqrt(n)
    return OperatorMatrix(space, a)


def creation(space: FockSpace, mode: int) -> OperatorMatrix:
    """Raising operator; transitions past the cutoff are dropped."""
    return annihilation(space, mode).dag


def number_operator(space: FockSpace, mode: int | None = None) -> OperatorMatrix:
    """Occupation of one mode, or the total number of quanta when ``mode`` is None."""
    if mode is None:
        n = space.occupations.sum(axis=1)
    else:
        _check_mode(space, mode)
        n = space.occupations[:, mode]
    return OperatorMatrix(space, np.diag(n.astype(complex)), hermitian=True)


def quadrature_operators(space: FockSpace, mode: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Position and momentum ``Q = (a + a†)/√2``, ``P = (a − a†)/(i√2)``."""
    a = annihilation(space, mode).entries
    ad = a.conj().T
    q = (a + ad) / math.sqrt(2)
    p = (a - ad) / (1j * math.sqrt(2))
    return OperatorMatrix(space, q, hermitian=True), OperatorMatrix(space, p, hermitian=True)


def angular_momentum(space: FockSpace, first: int = 0, second: int = 1) -> OperatorMatrix:
    """Planar angular momentum ``Q_second P_first − P_second Q_first``.

    Built in the normal-ordered form ``−i(a_2† a_1 − a_1† a_2)``, which equals
    the quadrature expression in infinite dimensions and stays exactly
    hermitian and number-conserving after truncation. The literal product of
    truncated quadratures loses one of the two hopping terms on the outermost
    shell.
    """
    _check_mode(space, first)
    _check_mode(space, second)
    if first == second:
        raise ValueError("angular momentum needs two distinct modes")
    a1 = annihilation(space, first).entries
    a2 = annihilation(space, second).entries
    hop = a2.conj().T @ a1
    return OperatorMatrix(space, -1j * (hop - hop.conj().T), hermitian=True)


def embed_mode_operator(space: FockSpace, mode: int, local: np.ndarray) -> OperatorMatrix:
    """Compress ``I ⊗ local ⊗ I`` (``local`` acting on ``mode``) onto ``space``."""
    _check_mode(space, mode)
    local = np.asarray(local, dtype=complex)
    occ = space.occupations
    need = int(occ[:, mode].max()) + 1
    if local.shape[0] < need or local.shape[0] != local.shape[1]:
        raise ValueError(f"local operator must be square with at least {need} levels")
    others = np.delete(occ, mode, axis=1)
    same_rest = np.all(others[:, None, :] == others[None, :, :], axis=2)
    n = occ[:, mode]
    full = np.where(same_rest, local[n[:, None], n[None, :]], 0.0)
    return OperatorMatrix(space, full)


def displacement_matrix(alpha, levels: int) -> np.ndarray:
    """Fock-basis block ``<m|D(alpha)|n>``, ``m, n < levels``, of the exact displacement.

    ``D(alpha) = exp(alpha a† − alpha* a)``. The entries are those of the
    infinite-dimensional operator, obtained column by column from
    ``D|n+1> = (a† − alpha*) D|n> / sqrt(n+1)``. ``alpha`` may be an array;
    the result then carries its shape in front.
    """
    alpha = np.asarray(alpha, dtype=complex)
    batch = alpha.shape
    alpha = alpha.reshape(-1, 1)
    sq = np.sqrt(np.arange(levels))
    out = np.zeros((alpha.shape[0], levels, levels), dtype=complex)
    col = np.empty((alpha.shape[0], levels), dtype=complex)
    col[:, 0] = 1.0
    for m in range(1, levels):
        col[:, m] = col[:, m - 1] * alpha[:, 0] / sq[m]
    col *= np.exp(-0.5 * np.abs(alpha) ** 2)
    out[:, :, 0] = col
    for n in range(levels - 1):
        raised = np.zeros_like(col)
        raised[:, 1:] = sq[1:] * col[:, :-1]
        col = (raised - np.conj(alpha) * col) / math.sqrt(n + 1)
        out[:, :, n + 1] = col
    return out.reshape(batch + (levels, levels))


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """``AB − BA``."""
    if a.space != b.space:
        raise ValueError(f"operators live on different spaces: {a.space} vs {b.space}")
    return OperatorMatrix(a.space, a.entries @ b.entries - b.entries @ a.entries)


def hermitian_eigendecomposition(a: OperatorMatrix, *, check: bool = True):
    """Ascending eigenvalues and unitary eigenvectors of a hermitian operator.

    Raises ``ValueError`` if ``a`` is not hermitian-flagged, or, with
    ``check``, if ``V diag(w) V†`` misses ``A`` by more than ``1e-10 ||A||``.
    """
    if not a.hermitian:
        a = OperatorMatrix(a.space, a.entries, hermitian=True)
    w, v = np.linalg.eigh(a.entries)
    if check:
        residual = spectral_norm((v * w) @ v.conj().T - a.entries)
        if residual > 1e-10 * max(spectral_norm(a.entries), np.finfo(float).tiny):
            raise ValueError(f"eigendecomposition residual {residual:.3e} too large")
    return w, v


def matrix_exponential(a: OperatorMatrix, t: complex = 1.0) -> OperatorMatrix:
    """``exp(t A)``.

    Hermitian-flagged generators go through the eigendecomposition, so an
    imaginary ``t`` yields an exactly unitary (to round-off) result, flagged
    as such. Other generators use scaling and squaring with a Padé
    approximant.
    """
    t = complex(t)
    if not np.all(np.isfinite(a.entries)) or not np.isfinite(t):
        raise ValueError("non-finite entries in matrix exponential")
    if a.hermitian:
        w, v = np.linalg.eigh(a.entries)
        u = (v * np.exp(t * w)) @ v.conj().T
        return OperatorMatrix(a.space, u, hermitian=t.imag == 0, unitary=t.real == 0)
    u = scipy.linalg.expm(t * a.entries)
    if not np.all(np.isfinite(u)):
        raise ValueError("matrix exponential overflowed")
    return OperatorMatrix(a.space, u)
