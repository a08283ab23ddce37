"""Check suites behind the CLI subcommands.

Each suite takes a :class:`RunConfig` and returns a list of
:class:`~coherent_constraints.report.Check`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .coherent import (
    CANONICAL, CoherentLabel, circular_path, geometric_one_form_check, unity_resolution_residual,
)
from .dynamics import (
    TrotterPlan, evolve_with_multipliers, example1_closed_form, example2_factorization,
    kernel_grid, trotter_convergence, vacuum_normalization,
)
from .fock import (
    OperatorMatrix, angular_momentum, build_space, identity, matrix_exponential, number_operator,
    quadrature_operators, spectral_norm,
)
from .projectors import (
    ConstraintSet, gaussian_weight, projector_diagnostics, projector_group_average_u1,
    projector_spectral, projector_weighted_integral, vacuum_projector,
)
from .quadrature import gauss_legendre
from .report import Check, upper_check

SUBCOMMANDS = ("projector-suite", "example1", "example2", "trotter", "gauge", "unity")

DEFAULT_NMAX = {"projector-suite": None, "example1": 40, "example2": 12,
                "trotter": 20, "gauge": 8, "unity": 12}
DEFAULT_SLICES = (10, 20, 40, 80, 160)
ROUNDOFF_FLOOR = 1e-14


@dataclass
class RunConfig:
    subcommand: str
    nmax: int | None = None
    cutoffs: tuple = (4, 8, 12)
    scheme: str = "total_quanta"
    half_width: float = 6.0
    points: int = 64
    T: float = 1.0
    slices: tuple = DEFAULT_SLICES
    grid: int = 5
    seed: int = 42
    schedules: int = 5
    gauge_slices: int = 100
    output: str | None = None
    format: str = "json"
    timings: bool = False
    checks: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["cutoffs"] = list(self.cutoffs)
        d["slices"] = list(self.slices)
        return d


def example1_labels(count: int, radius: float = 1.0) -> list[CoherentLabel]:
    """Deterministic two-mode weyl labels with ``||z|| <= radius``."""
    labels = []
    for i in range(count):
        r = radius * i / max(count - 1, 1)
        mix = 0.37 + 1.1 * i
        z = r * np.array([math.cos(mix) * np.exp(0.9j * i), math.sin(mix) * np.exp(-1.7j * i)])
        labels.append(CoherentLabel.from_z(z))
    return labels


def example2_labels(count: int, rng: np.random.Generator, spread: float = 1.5) -> list[CoherentLabel]:
    return [CoherentLabel(rng.uniform(-spread, spread, 2), rng.uniform(-spread, spread, 2), CANONICAL)
            for _ in range(count)]


def rotation_setup(nmax: int):
    space = build_space(2, total_quanta=nmax)
    l3 = angular_momentum(space)
    return space, l3, projector_group_average_u1(l3)


def run_projector_suite(cfg: RunConfig) -> list[Check]:
    rng = np.random.default_rng(cfg.seed)
    checks, idem, herm = [], 0.0, 0.0
    for n in cfg.cutoffs:
        space, l3, e_avg = rotation_setup(n)
        e_spec = projector_spectral(ConstraintSet([l3]))
        checks.append(upper_check(f"group_vs_spectral_nmax{n}",
                                  spectral_norm(e_avg.entries - e_spec.entries), 1e-12))
        expected = n // 2 + 1
        checks.append(Check(f"rank_nmax{n}", e_avg.rank, f"=={expected}",
                            e_avg.rank == expected == e_spec.rank))
        for e in (e_avg, e_spec):
            idem = max(idem, e.idempotency_residual)
            herm = max(herm, e.hermiticity_residual)
    checks.append(upper_check("idempotency_max", idem, 1e-10))
    checks.append(upper_check("hermiticity_max", herm, 1e-10))
    space, l3, e_avg = rotation_setup(max(cfg.cutoffs))
    taus = rng.uniform(-10, 10, size=10)
    report = projector_diagnostics(e_avg, ConstraintSet([l3]), taus)
    checks.append(upper_check("constraint_flow_invariance", report.invariance_residual, 1e-10))
    return checks


def run_example1(cfg: RunConfig) -> list[Check]:
    labels = example1_labels(cfg.grid)
    pairs = list(itertools.product(labels, labels))
    sweep = [n for n in (10, 20, 30, 40) if n < cfg.nmax] + [cfg.nmax]
    errors, last = [], None
    for n in sweep:
        _, _, e = rotation_setup(n)
        last = kernel_grid(e, pairs, closed_form=example1_closed_form)
        errors.append(last.max_abs_error)
    checks = [upper_check("bessel_kernel_max_error", errors[-1], 1e-8)]
    rise = max((b - a for a, b in zip(errors, errors[1:])), default=0.0)
    checks.append(upper_check("cutoff_error_increase", max(rise, 0.0), ROUNDOFF_FLOOR))
    values = last.matrix_values.reshape(len(labels), len(labels))
    asym = float(np.max(np.abs(values - values.conj().T)))
    checks.append(upper_check("kernel_hermitian_symmetry", asym, 1e-12))
    return checks


def run_example2(cfg: RunConfig) -> list[Check]:
    rng = np.random.default_rng(cfg.seed)
    single = build_space(1, n_max=cfg.nmax)
    q, p = quadrature_operators(single, 0)
    e_quad = projector_weighted_integral([p, q], gaussian_weight(), gauss_legendre(64, -10, 10, 2),
                                         displacement_mode=0)
    closed = vacuum_projector(single, 0)
    checks = [upper_check("gaussian_projector_error", spectral_norm(e_quad.entries - closed.entries), 1e-6),
              upper_check("gaussian_projector_trace_error", abs(e_quad.trace - 1.0), 1e-6)]

    space = build_space(2, n_max=cfg.nmax)
    q1, p1 = quadrature_operators(space, 0)
    r, s = quadrature_operators(space, 1)[::-1]
    eye = identity(space)
    osc = 0.5 * (p1 @ p1 + q1 @ q1)
    h = OperatorMatrix(space, osc.entries @ (eye + r + s).entries)
    grid = example2_labels(3, rng)
    rep = example2_factorization(h, example2_labels(10, rng), list(itertools.product(grid, grid)), cfg.T)
    checks.append(upper_check("projected_symbol_residual", rep.symbol_residual, 1e-10))
    checks.append(upper_check("propagator_factorization_residual", rep.factorization_residual, 1e-8))
    checks.append(upper_check("vacuum_overlap_normalization", abs(vacuum_normalization() - 1.0), 1e-6))

    e = vacuum_projector(space, 1)
    checks.append(upper_check("one_form_free_mode_path",
                              geometric_one_form_check(circular_path([0, 0], [0, 0], 1.0, 0), e), 1e-6))
    checks.append(upper_check("one_form_pinned_mode_path",
                              geometric_one_form_check(circular_path([0.4, 0.3], [0.1, -0.2], 0.8, 1), e),
                              1e-6))
    return checks


def run_trotter(cfg: RunConfig) -> list[Check]:
    space, _, e = rotation_setup(cfg.nmax)
    q1, _ = quadrature_operators(space, 0)
    study = trotter_convergence(q1, e, cfg.T, cfg.slices)
    checks = []
    prev = None
    for n, err in zip(study.slices, study.errors):
        tol = "-" if prev is None else 1.05 * prev
        checks.append(Check(f"trotter_error_N{n}", err, tol, prev is None or err <= tol))
        prev = err
    checks.append(Check("trotter_loglog_slope", study.slope, "[0.9, 1.3]", 0.9 <= study.slope <= 1.3))
    checks.append(Check("trotter_error_reduction", study.reduction, ">=8", study.reduction >= 8))
    return checks


def run_gauge(cfg: RunConfig) -> list[Check]:
    rng = np.random.default_rng(cfg.seed)
    space, l3, e = rotation_setup(cfg.nmax)
    h = number_operator(space)
    cs = ConstraintSet([l3])
    results = [evolve_with_multipliers(h, cs, TrotterPlan.random(cfg.T, cfg.gauge_slices, 1, rng), e).entries
               for _ in range(cfg.schedules)]
    reference = matrix_exponential(h, -1j * cfg.T).entries @ e.entries
    pairwise = max((spectral_norm(a - b) for a, b in itertools.combinations(results, 2)), default=0.0)
    to_ref = max(spectral_norm(r - reference) for r in results)
    return [upper_check("gauge_pairwise_difference", pairwise, 1e-12),
            upper_check("gauge_vs_unconstrained_projected", to_ref, 1e-12)]


def run_unity(cfg: RunConfig) -> list[Check]:
    space = build_space(1, n_max=cfg.nmax)
    return [upper_check("unity_resolution_residual",
                        unity_resolution_residual(space, cfg.half_width, cfg.points), 1e-3)]


PLANNED = {
    "projector-suite": lambda c: [f"group_vs_spectral_nmax{n}" for n in c.cutoffs]
    + [f"rank_nmax{n}" for n in c.cutoffs]
    + ["idempotency_max", "hermiticity_max", "constraint_flow_invariance"],
    "example1": lambda c: ["bessel_kernel_max_error", "cutoff_error_increase", "kernel_hermitian_symmetry"],
    "example2": lambda c: ["gaussian_projector_error", "gaussian_projector_trace_error",
                           "projected_symbol_residual", "propagator_factorization_residual",
                           "vacuum_overlap_normalization", "one_form_free_mode_path",
                           "one_form_pinned_mode_path"],
    "trotter": lambda c: [f"trotter_error_N{n}" for n in c.slices]
    + ["trotter_loglog_slope", "trotter_error_reduction"],
    "gauge": lambda c: ["gauge_pairwise_difference", "gauge_vs_unconstrained_projected"],
    "unity": lambda c: ["unity_resolution_residual"],
}

SUITES = {
    "projector-suite": run_projector_suite,
    "example1": run_example1,
    "example2": run_example2,
    "trotter": run_trotter,
    "gauge": run_gauge,
    "unity": run_unity,
}
