"""The composed kernel ``K(x, x') = 1 / (1 - nu <x, x'>)`` and helpers.

Points live in the closed unit ball of R^n.  Besides the kernel itself this
module provides the degree-``d`` truncation of its geometric series and the
explicit monomial feature map whose inner products reproduce that truncation
(only meaningful at ``nu = 1/2``); both are used as test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, InvalidArgumentError, ResourceError

#: Points with norm up to ``1 + BALL_TOL`` are rescaled onto the sphere.
BALL_TOL = 1e-9
FEATURE_MAP_CAP = 10**7


def _linear_dot(A, B):
    return A @ B.T


BASE_KERNELS = {"linear": _linear_dot}


@dataclass(frozen=True)
class KernelSpec:
    nu: float = 0.5
    base: str = "linear"

    def __post_init__(self):
        if not (0.0 < self.nu < 1.0):
            raise InvalidArgumentError(f"nu must lie in (0, 1), got {self.nu}")
        if self.base not in BASE_KERNELS:
            raise InvalidArgumentError(f"unknown base kernel {self.base!r}")

    def base_products(self, A, B):
        # ball points have |<x, x'>| <= 1; clamp the rounding overshoot
        return np.clip(BASE_KERNELS[self.base](A, B), -1.0, 1.0)


def as_points(X) -> np.ndarray:
    """Validate an ``(m, n)`` array of points against the unit ball.

    Rows with norm in ``(1, 1 + BALL_TOL]`` are renormalized; anything further
    out raises :class:`DomainError`.  A 1-D input is treated as one point.
    """
    P = np.array(X, dtype=float, ndmin=2, copy=True)
    if P.ndim != 2:
        raise InvalidArgumentError("points must be a 2-D array")
    if not np.all(np.isfinite(P)):
        raise DomainError("points must have finite coordinates")
    norms = np.linalg.norm(P, axis=1)
    if np.any(norms > 1.0 + BALL_TOL):
        worst = float(norms.max())
        raise DomainError(f"point outside the unit ball (norm {worst!r})")
    over = norms > 1.0
    if np.any(over):
        P[over] /= norms[over, None]
    return P


def _as_point(x):
    return as_points(x)[0]


def composed_kernel(x, x2, spec: KernelSpec = KernelSpec()) -> float:
    p, q = _as_point(x), _as_point(x2)
    if p.shape != q.shape:
        raise InvalidArgumentError("points have different dimensions")
    t = float(spec.base_products(p[None, :], q[None, :])[0, 0])
    return 1.0 / (1.0 - spec.nu * t)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    spec: KernelSpec
    points: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])


def cross_kernel(A, B, spec: KernelSpec = KernelSpec()) -> np.ndarray:
    """Kernel values between every row of ``A`` and every row of ``B``."""
    P, Q = as_points(A), as_points(B)
    if P.shape[1] != Q.shape[1]:
        raise InvalidArgumentError(
            f"dimension mismatch: {P.shape[1]} vs {Q.shape[1]}"
        )
    return 1.0 / (1.0 - spec.nu * spec.base_products(P, Q))


def gram(points, spec: KernelSpec = KernelSpec()) -> GramMatrix:
    P = as_points(points) if np.size(points) else None
    if P is None or P.shape[0] == 0:
        raise InvalidArgumentError("gram needs at least one point")
    K = cross_kernel(P, P, spec)
    # BLAS may round the two triangles differently
    K = np.triu(K) + np.triu(K, 1).T
    K.setflags(write=False)
    P.setflags(write=False)
    return GramMatrix(K, spec, P)


def truncated_kernel(x, x2, degree: int) -> float:
    """Partial sum ``sum_{j<=d} 2^-j <x, x2>^j`` of the nu=1/2 kernel series."""
    if degree < 0:
        raise InvalidArgumentError("degree must be non-negative")
    p, q = _as_point(x), _as_point(x2)
    t = float(p @ q)
    return math.fsum((t / 2.0) ** j for j in range(degree + 1))


def feature_map_size(dim: int, degree: int) -> int:
    return sum(dim**j for j in range(degree + 1))


def explicit_feature_map(x, degree: int, cap: int = FEATURE_MAP_CAP) -> np.ndarray:
    """Truncated feature vector: ``2^{-j/2} x_{k1} ... x_{kj}`` for all tuples.

    Tuples are laid out by degree and, within a degree, lexicographically
    (the order ``itertools.product`` would produce).
    """
    if degree < 0:
        raise InvalidArgumentError("degree must be non-negative")
    p = _as_point(x)
    size = feature_map_size(p.size, degree)
    if size > cap:
        raise ResourceError(f"feature map would have {size} entries (cap {cap})")
    blocks = [np.ones(1)]
    scale = 1.0 / math.sqrt(2.0)
    for _ in range(degree):
        blocks.append(np.kron(blocks[-1], p) * scale)
    return np.concatenate(blocks)
