"""Polynomials with bounded weighted coefficient norm.

A polynomial ``p(a) = sum_j beta_j a^j`` is measured by
``sum_j beta_j**2 * 2**j``.  If that quantity is at most ``B`` then
``x -> p(<w, x>)`` is a linear predictor of squared norm at most ``B`` in the
space induced by the composed kernel, so any good low-norm polynomial
approximation of a transfer function carries over to that space.

The sigmoid is approximated constructively by truncated Chebyshev series;
the erf transfer is expanded in its Maclaurin series.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as cheb

from ._exact import D, context
from .errors import ApproximationError, InvalidArgumentError
from .transfer import TransferKind, Variant, eval_transfer

DEFAULT_GRID_SIZE = 10001
DEFAULT_MAX_DEGREE = 60
# Chebyshev coefficients are computed from this many nodes, well past the cap
_QUADRATURE_NODES = 512


def pb_norm(beta) -> float:
    """Return ``sum_j beta_j**2 * 2**j`` (compensated summation)."""
    return math.fsum(float(b) * float(b) * 2.0**j for j, b in enumerate(beta))


def horner(beta, a):
    """Evaluate the monomial-basis polynomial ``beta`` at ``a``."""
    a = np.asarray(a, dtype=float)
    out = np.zeros_like(a)
    for b in reversed(list(beta)):
        out = out * a + b
    return out


@dataclass(frozen=True)
class LogBudget:
    """Natural log of a norm budget ``B``, for values far beyond float range."""

    log_b: float
    below_regime: bool = False

    def __post_init__(self):
        if not math.isfinite(self.log_b):
            raise InvalidArgumentError("log budget must be finite")

    @property
    def value(self) -> float:
        """``exp(log_b)``, or ``inf`` when that overflows."""
        try:
            return math.exp(self.log_b)
        except OverflowError:
            return math.inf

    def admits(self, norm: float) -> bool:
        return norm <= 0 or math.log(norm) <= self.log_b


@dataclass(frozen=True)
class PolynomialApprox:
    beta: tuple
    target: TransferKind
    sup_error: float
    pb_norm: float = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if self.pb_norm is None:
            object.__setattr__(self, "pb_norm", pb_norm(self.beta))

    @property
    def degree(self) -> int:
        return len(self.beta) - 1

    @property
    def log_pb_norm(self) -> float:
        return math.log(self.pb_norm) if self.pb_norm > 0 else -math.inf

    def __call__(self, a):
        return horner(self.beta, a)

    def to_dict(self) -> dict:
        return {
            "target": self.target.short_name,
            "L": self.target.lipschitz,
            "degree": self.degree,
            "coefficients": list(self.beta),
            "pb_norm": self.pb_norm,
            "log_pb_norm": self.log_pb_norm,
            "sup_error": self.sup_error,
        }


def b_bound_sigmoid(L: float, eps: float) -> LogBudget:
    """Log of the worst-case budget ``2 L^4 + exp(7 L log(2L/eps) + 3)``.

    Evaluated in extended precision and rounded once.  For ``L < 3`` the formula
    is still evaluated but the result is flagged and a warning is issued.
    """
    if not (L > 0 and math.isfinite(L)):
        raise InvalidArgumentError("L must be positive")
    if not (0.0 < eps < 1.0):
        raise InvalidArgumentError("eps must lie in (0, 1)")
    below = L < 3
    if below:
        warnings.warn(
            f"L={L} is below 3; the sigmoid budget is only stated for L >= 3",
            stacklevel=2,
        )
    with context():
        L_, eps_ = D(L), D(eps)
        exponent = 7 * L_ * (2 * L_ / eps_).ln() + 3
        log_b = (2 * L_**4 + exponent.exp()).ln()
    return LogBudget(float(log_b), below_regime=below)


@lru_cache(maxsize=None)
def _chebyshev_basis(n: int):
    """Integer monomial coefficients of T_0 .. T_n (exact, via recurrence)."""
    rows = [[1], [0, 1]]
    for k in range(2, n + 1):
        prev, prev2 = rows[k - 1], rows[k - 2]
        row = [0] + [2 * c for c in prev]
        for j, c in enumerate(prev2):
            row[j] -= c
        rows.append(row)
    return tuple(tuple(r) for r in rows[: n + 1])


def chebyshev_to_monomial(coeffs) -> np.ndarray:
    """Convert Chebyshev-series coefficients to the monomial basis.

    Each monomial coefficient is a correctly rounded sum (``math.fsum``) of
    float-times-exact-integer products, which keeps the conversion usable up
    to the degree cap.
    """
    c = [float(v) for v in coeffs]
    n = len(c) - 1
    basis = _chebyshev_basis(max(n, 1))
    out = []
    for j in range(n + 1):
        out.append(math.fsum(c[k] * basis[k][j] for k in range(j, n + 1)))
    return np.array(out)


def _chebyshev_coefficients(f, n_nodes: int) -> np.ndarray:
    # Gauss-Chebyshev quadrature: a DCT of samples at the first-kind nodes
    k = np.arange(n_nodes)
    theta = np.pi * (k + 0.5) / n_nodes
    samples = f(np.cos(theta))
    j = np.arange(n_nodes)[:, None]
    c = (2.0 / n_nodes) * (np.cos(j * theta[None, :]) @ samples)
    c[0] /= 2.0
    return c


def approx_sigmoid_chebyshev(
    L: float,
    eps: float,
    grid_size: int = DEFAULT_GRID_SIZE,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> PolynomialApprox:
    """Lowest-degree Chebyshev truncation of the sigmoid with sup error <= eps.

    The error is measured on a uniform grid of ``grid_size`` points over
    [-1, 1], using the monomial form (that is the representation whose norm
    matters).  Raises :class:`ApproximationError` when no degree up to
    ``max_degree`` qualifies, or when the monomial and Chebyshev forms
    disagree by more than ``eps / 10``.
    """
    if L < 0 or not math.isfinite(L):
        raise InvalidArgumentError("L must be finite and non-negative")
    if not (0.0 < eps < 1.0):
        raise InvalidArgumentError("eps must lie in (0, 1)")
    if grid_size < 1001:
        raise InvalidArgumentError("grid_size must be at least 1001")
    grid = np.linspace(-1.0, 1.0, grid_size)

    if L == 0:
        return PolynomialApprox((0.5,), _flat_sigmoid_kind(), 0.0)

    target = TransferKind(Variant.SIGMOID, L)
    exact = eval_transfer(target, grid)
    c = _chebyshev_coefficients(lambda a: eval_transfer(target, a), _QUADRATURE_NODES)
    # sigmoid - 1/2 is odd, so its even Chebyshev terms vanish identically
    c[0] = 0.5
    c[2::2] = 0.0

    best_err, best_deg = math.inf, None
    for d in range(0, max_degree + 1):
        if d >= 2 and d % 2 == 0:
            continue  # an even term adds nothing
        cd = c[: d + 1]
        beta = chebyshev_to_monomial(cd)
        mono = horner(beta, grid)
        err = float(np.max(np.abs(mono - exact)))
        if err < best_err:
            best_err, best_deg = err, d
        if err <= eps:
            drift = float(np.max(np.abs(mono - cheb.chebval(grid, cd))))
            if drift > eps / 10:
                raise ApproximationError(
                    f"monomial conversion unstable at degree {d} "
                    f"(drift {drift:.3g} > eps/10)",
                    best_error=err,
                    best_degree=d,
                )
            return PolynomialApprox(beta, target, err)
    raise ApproximationError(
        f"no degree <= {max_degree} reaches sup error {eps} "
        f"(best {best_err:.3g} at degree {best_deg})",
        best_error=best_err,
        best_degree=best_deg,
    )


def _flat_sigmoid_kind():
    # L = 0 is not a valid TransferKind; the target is the constant 1/2,
    # which any sigmoid evaluated at 0 reproduces.
    return TransferKind(Variant.SIGMOID, math.ulp(0.0))


def erf_taylor_coeffs(L: float, degree: int, grid_size: int = DEFAULT_GRID_SIZE) -> PolynomialApprox:
    """Maclaurin truncation of ``(1 + erf(sqrt(pi) L a)) / 2`` at odd ``degree``.

    ``beta_0 = 1/2`` and ``beta_{2n+1} = (-1)^n (sqrt(pi) L)^{2n+1} /
    (sqrt(pi) n! (2n+1))``; all even coefficients above 0 are zero.
    """
    if degree % 2 == 0:
        raise InvalidArgumentError("erf truncation degree must be odd")
    if not (0 < degree <= 80):
        raise InvalidArgumentError("erf truncation degree must lie in [1, 80]")
    target = TransferKind(Variant.ERF, L)
    z = math.sqrt(math.pi) * L
    beta = [0.0] * (degree + 1)
    beta[0] = 0.5
    root_pi = math.sqrt(math.pi)
    for n in range((degree - 1) // 2 + 1):
        k = 2 * n + 1
        try:
            mag = z**k / (root_pi * math.factorial(n) * k)
        except OverflowError:
            mag = math.exp(k * math.log(z) - math.log(root_pi) - math.lgamma(n + 1) - math.log(k))
        beta[k] = -mag if n % 2 else mag
    grid = np.linspace(-1.0, 1.0, grid_size)
    err = float(np.max(np.abs(horner(beta, grid) - eval_transfer(target, grid))))
    return PolynomialApprox(beta, target, err)
