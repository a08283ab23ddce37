"""Tensor-product quadrature rules on boxes."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes of shape ``(n, dim)`` with matching weights.

    ``kind`` and ``params`` record how the rule was built so that
    :meth:`refined` can rebuild it with twice the points per axis. Custom
    rules have ``kind == "custom"`` and cannot be refined.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        if nodes.shape[0] == 1 and np.ndim(self.nodes) == 1:
            nodes = nodes.T
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if nodes.shape[0] != weights.shape[0]:
            raise ValueError("one weight per node required")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return self.weights.shape[0]

    def refined(self) -> "QuadratureRule | None":
        builder = _BUILDERS.get(self.kind)
        if builder is None:
            return None
        params = dict(self.params)
        params["points"] = 2 * params["points"]
        return builder(**params)


def _tensor(axis_nodes, axis_weights, dim):
    nodes = np.array(list(itertools.product(axis_nodes, repeat=dim)))
    weights = np.prod(np.array(list(itertools.product(axis_weights, repeat=dim))), axis=1)
    return nodes.reshape(-1, dim), weights


def gauss_legendre(points: int, low: float, high: float, dim: int = 1) -> QuadratureRule:
    """Tensor Gauss–Legendre rule with ``points`` nodes per axis on ``[low, high]^dim``."""
    if points < 1:
        raise ValueError("need at least one node per axis")
    x, w = np.polynomial.legendre.leggauss(points)
    half = 0.5 * (high - low)
    nodes, weights = _tensor(low + half * (x + 1.0), half * w, dim)
    return QuadratureRule(nodes, weights, "gauss_legendre",
                          dict(points=points, low=low, high=high, dim=dim))


def trapezoid(points: int, low: float, high: float, dim: int = 1) -> QuadratureRule:
    """Tensor trapezoid rule on a uniform grid including both endpoints."""
    if points < 2:
        raise ValueError("trapezoid rule needs at least two points per axis")
    x = np.linspace(low, high, points)
    w = np.full(points, (high - low) / (points - 1))
    w[[0, -1]] *= 0.5
    nodes, weights = _tensor(x, w, dim)
    return QuadratureRule(nodes, weights, "trapezoid",
                          dict(points=points, low=low, high=high, dim=dim))


def periodic(points: int, period: float = 2 * np.pi) -> QuadratureRule:
    """Equal-weight rule on ``[0, period)``; exact for trigonometric polynomials
    of degree below ``points``."""
    if points < 1:
        raise ValueError("need at least one node")
    x = period * np.arange(points) / points
    return QuadratureRule(x[:, None], np.full(points, period / points), "periodic",
                          dict(points=points, period=period))


_BUILDERS = {"gauss_legendre": gauss_legendre, "trapezoid": trapezoid, "periodic": periodic}
