"""Absolute-loss ERM over a norm ball of the composed-kernel RKHS.

By the representer theorem the predictor is ``h(x) = sum_j alpha_j K(x_j, x)``
and the problem reads::

    min_alpha  (1/m) sum_i |(K alpha)_i - y_i|   s.t.  alpha' K alpha <= B

which is convex.  It is solved by projected subgradient descent in the RKHS
geometry: a subgradient of the loss in function space is
``(1/m) sum_i s_i psi(x_i)`` (``s_i`` the residual signs), i.e. the
coefficient step ``alpha -= eta * s / m``, and the metric projection onto
the centred ball is a rescaling of ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivergenceError,
    DomainError,
    InvalidArgumentError,
    InvalidInputError,
    ResourceError,
)
from .kernel import GramMatrix, KernelSpec, as_points, cross_kernel

SCHEDULES = ("inverse-sqrt", "constant", "restart")
BATCHES = ("full", "single")
MAX_ITERS_CAP = 10**6
FEASIBILITY_SLACK = 1e-6


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for :func:`solve_erm`.

    ``step_size`` is the constant ``c`` of the schedule; ``None`` picks
    ``sqrt(B) / max_i sqrt(K_ii)``.  ``max_iters=None`` means
    ``10 * m * ceil(1 / tolerance**2)`` capped at 10**6.  ``restart_every``
    only affects the ``"restart"`` schedule.
    """

    max_iters: int | None = None
    step_schedule: str = "inverse-sqrt"
    step_size: float | None = None
    seed: int = 0
    tolerance: float = 1e-3
    batch: str = "full"
    restart_every: int = 2000
    restart_decay: float = 0.7

    def __post_init__(self):
        if self.max_iters is not None and self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be at least 1")
        if not self.tolerance > 0:
            raise InvalidArgumentError("tolerance must be positive")
        if self.step_size is not None and not self.step_size > 0:
            raise InvalidArgumentError("step size must be positive")
        if self.step_schedule not in SCHEDULES:
            raise InvalidArgumentError(f"unknown step schedule {self.step_schedule!r}")
        if self.batch not in BATCHES:
            raise InvalidArgumentError(f"unknown batch mode {self.batch!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        if self.restart_every < 1 or not 0 < self.restart_decay <= 1:
            raise InvalidArgumentError("invalid restart parameters")

    def iteration_budget(self, m: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return min(10 * m * math.ceil(1.0 / self.tolerance**2), MAX_ITERS_CAP)


@dataclass
class SolveReport:
    final_objective: float
    objective_trace: list = field(default_factory=list)
    iters_used: int = 0
    constraint_active: bool = False


@dataclass(frozen=True, eq=False)
class DualPredictor:
    """``x -> sum_j alpha_j K(anchor_j, x)`` with ``alpha' K alpha <= B``."""

    alpha: np.ndarray
    anchors: np.ndarray
    spec: KernelSpec
    b_budget: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        anchors = as_points(self.anchors)
        if alpha.ndim != 1 or alpha.size != anchors.shape[0]:
            raise InvalidInputError("alpha and anchors disagree in length")
        alpha.setflags(write=False)
        anchors.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "anchors", anchors)

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    def squared_norm(self) -> float:
        K = cross_kernel(self.anchors, self.anchors, self.spec)
        return float(self.alpha @ K @ self.alpha)

    def raw(self, X) -> np.ndarray:
        P = as_points(X)
        if P.shape[1] != self.dim:
            raise InvalidInputError(
                f"model expects {self.dim}-dimensional points, got {P.shape[1]}"
            )
        return cross_kernel(P, self.anchors, self.spec) @ self.alpha

    def prob(self, X) -> np.ndarray:
        return np.clip(self.raw(X), 0.0, 1.0)

    def label(self, X) -> np.ndarray:
        return (self.raw(X) >= 0.5).astype(int)


def _gram_entries(gram):
    if isinstance(gram, GramMatrix):
        return gram.entries, gram
    K = np.asarray(gram, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidArgumentError("Gram matrix must be square")
    return K, None


def _labels(labels, m):
    y = np.asarray(labels, dtype=float)
    if y.shape != (m,):
        raise InvalidArgumentError(f"expected {m} labels, got shape {y.shape}")
    if not np.all((y == 0) | (y == 1)):
        raise InvalidArgumentError("labels must be 0 or 1")
    return y


def objective(alpha, gram, labels) -> float:
    """Mean absolute residual ``(1/m) sum_i |(K alpha)_i - y_i|``."""
    K, _ = _gram_entries(gram)
    a = np.asarray(alpha, dtype=float)
    if a.shape != (K.shape[0],):
        raise InvalidArgumentError("alpha length does not match the Gram matrix")
    y = np.asarray(labels, dtype=float)
    if y.shape != (K.shape[0],):
        raise InvalidArgumentError("label count does not match the Gram matrix")
    return float(np.mean(np.abs(K @ a - y)))


def project_to_ball(alpha, Ka, B):
    """Rescale so that ``alpha' K alpha <= B``; returns ``(alpha, Ka, q)``."""
    q = float(alpha @ Ka)
    if q > B:
        scale = math.sqrt(B / q)
        return alpha * scale, Ka * scale, B
    return alpha, Ka, q


def _check_psd(K, gram_obj):
    m = K.shape[0]
    lam = gram_obj.min_eigenvalue if gram_obj is not None else float(np.linalg.eigvalsh(K)[0])
    if lam < -1e-6 * m:
        raise InvalidInputError(f"Gram matrix is not PSD (min eigenvalue {lam:.3g})")


def _step(schedule, c, t):
    if schedule == "constant":
        return c
    return c / math.sqrt(t)


def solve_erm(gram, labels, B: float, opts: SolverOptions = SolverOptions()):
    """Projected subgradient descent on the absolute-loss ERM over ``H_B``.

    Returns ``(DualPredictor, SolveReport)``.  The returned coefficients are
    the best iterate seen; iteration starts from ``alpha = 0``.

    ``step_schedule`` selects ``c`` (constant), ``c / sqrt(t)``, or
    ``"restart"``: blocks of ``restart_every`` iterations, each running
    ``c_k / sqrt(t)`` from the best point so far with ``c_k`` shrinking by
    ``restart_decay`` per block.
    """
    K, gram_obj = _gram_entries(gram)
    m = K.shape[0]
    y = _labels(labels, m)
    if not (B > 0 and math.isfinite(B)):
        raise InvalidArgumentError(f"B must be positive and finite, got {B}")
    _check_psd(K, gram_obj)

    diag = np.clip(np.diag(K), 0.0, None)
    grad_bound = math.sqrt(float(diag.max())) if diag.max() > 0 else 1.0
    c = opts.step_size if opts.step_size is not None else math.sqrt(B) / grad_bound
    budget = opts.iteration_budget(m)

    if opts.batch == "full":
        alpha, trace, iters = _full_batch(K, y, B, c, budget, opts)
    else:
        alpha, trace, iters = _single_sample(K, y, B, c, budget, opts, diag)

    Ka = K @ alpha
    alpha, Ka, q = project_to_ball(alpha, Ka, B)
    final = float(np.mean(np.abs(Ka - y)))
    if not math.isfinite(final):
        raise DivergenceError("objective became non-finite")
    report = SolveReport(
        final_objective=final,
        objective_trace=trace,
        iters_used=iters,
        constraint_active=q >= B * (1 - FEASIBILITY_SLACK),
    )
    anchors = gram_obj.points if gram_obj is not None and gram_obj.points is not None else None
    spec = gram_obj.spec if gram_obj is not None else KernelSpec()
    if anchors is None:
        anchors = np.zeros((m, 0))
    pred = DualPredictor(
        alpha,
        anchors,
        spec,
        float(B),
        metadata={"seed": opts.seed, "objective": final},
    )
    return pred, report


def _full_batch(K, y, B, c, budget, opts):
    m = K.shape[0]
    alpha = np.zeros(m)
    Ka = np.zeros(m)
    best = float(np.mean(np.abs(y)))
    best_alpha = alpha.copy()
    trace = [best]
    restart = opts.step_schedule == "restart"
    t_local = 0
    t = 0
    for t in range(1, budget + 1):
        if best == 0.0:
            t -= 1
            break
        t_local += 1
        if restart and t_local > opts.restart_every:
            t_local = 1
            c *= opts.restart_decay
            alpha = best_alpha.copy()
            Ka = K @ alpha
        s = np.sign(Ka - y)
        alpha = alpha - _step(opts.step_schedule, c, t_local) * s / m
        Ka = K @ alpha
        alpha, Ka, _ = project_to_ball(alpha, Ka, B)
        f = float(np.mean(np.abs(Ka - y)))
        if not math.isfinite(f):
            raise DivergenceError(f"objective became non-finite at iteration {t}")
        trace.append(f)
        if f < best:
            best, best_alpha = f, alpha.copy()
    return best_alpha, trace, t


def _single_sample(K, y, B, c, budget, opts, diag):
    # one coordinate step per sample, epochs over a seeded permutation
    m = K.shape[0]
    rng = np.random.default_rng(opts.seed)
    alpha = np.zeros(m)
    Ka = np.zeros(m)
    q = 0.0
    best = float(np.mean(np.abs(y)))
    best_alpha = alpha.copy()
    trace = [best]
    restart = opts.step_schedule == "restart"
    block = opts.restart_every * m
    t = 0
    t_local = 0
    while t < budget and best > 0.0:
        for i in rng.permutation(m):
            if t >= budget:
                break
            t += 1
            t_local += 1
            if restart and t_local > block:
                t_local = 1
                c *= opts.restart_decay
                alpha = best_alpha.copy()
                Ka = K @ alpha
                q = float(alpha @ Ka)
            s = np.sign(Ka[i] - y[i])
            if s == 0:
                continue
            eta = _step(opts.step_schedule, c, t_local) * s
            q = q - 2.0 * eta * Ka[i] + eta * eta * diag[i]
            alpha[i] -= eta
            Ka -= eta * K[:, i]
            if q > B:
                scale = math.sqrt(B / q)
                alpha *= scale
                Ka *= scale
                q = B
        # resynchronise the incremental quantities once per epoch
        Ka = K @ alpha
        alpha, Ka, q = project_to_ball(alpha, Ka, B)
        f = float(np.mean(np.abs(Ka - y)))
        if not math.isfinite(f):
            raise DivergenceError(f"objective became non-finite at iteration {t}")
        trace.append(f)
        if f < best:
            best, best_alpha = f, alpha.copy()
    return best_alpha, trace, t


def predict_raw(pred: DualPredictor, x) -> float:
    return float(pred.raw(x)[0])


def predict_prob(pred: DualPredictor, x) -> float:
    return float(pred.prob(x)[0])


def predict_label(pred: DualPredictor, x) -> int:
    return int(pred.label(x)[0])


# -- small-instance oracle ---------------------------------------------------

MAX_ORACLE_SIZE = 6
MAX_ORACLE_RESOLUTION = 41


def _whitening(K, rel_tol=1e-12):
    lam, U = np.linalg.eigh(K)
    keep = lam > rel_tol * max(float(lam[-1]), 1e-300)
    return lam[keep], U[:, keep]


def oracle_grid_slack(gram, B: float, grid_resolution: int) -> float:
    """Upper bound on how far the best grid point can be from the optimum.

    Any feasible ``z`` has a feasible grid point within ``h * sqrt(r)``
    (``h`` the spacing, ``r`` the rank), and the objective is Lipschitz in
    ``z`` with constant ``mean_i sqrt(K_ii)``.
    """
    K, _ = _gram_entries(gram)
    lam, _ = _whitening(K)
    r = lam.size
    h = 2.0 * math.sqrt(B) / (grid_resolution - 1)
    lip = float(np.mean(np.sqrt(np.clip(np.diag(K), 0, None))))
    return h * math.sqrt(r) * lip


def exhaustive_erm_small(gram, labels, B: float, grid_resolution: int = 21):
    """Brute-force ERM for ``m <= 6``: grid search, then compass refinement.

    The search runs over whitened coordinates ``z = Lambda^{1/2} U' alpha``
    in which the feasible set is the Euclidean ball of radius ``sqrt(B)``.
    Returns ``(alpha, objective)``.  Intended only as a test oracle.
    """
    K, _ = _gram_entries(gram)
    m = K.shape[0]
    if m > MAX_ORACLE_SIZE:
        raise ResourceError(f"oracle handles at most {MAX_ORACLE_SIZE} points, got {m}")
    if not 2 <= grid_resolution <= MAX_ORACLE_RESOLUTION:
        raise InvalidArgumentError(
            f"grid_resolution must lie in [2, {MAX_ORACLE_RESOLUTION}]"
        )
    y = _labels(labels, m)
    if not B > 0:
        raise InvalidArgumentError("B must be positive")
    lam, U = _whitening(K)
    r = lam.size
    Phi = U * np.sqrt(lam)  # predictions are Phi @ z
    radius = math.sqrt(B)

    def loss(Z):
        return np.mean(np.abs(Z @ Phi.T - y), axis=1)

    axis = np.linspace(-radius, radius, grid_resolution)
    best_z = np.zeros(r)
    best = float(np.mean(np.abs(y)))
    total = grid_resolution**r
    chunk = 200_000
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = np.empty((idx.size, r), dtype=np.int64)
        rem = idx
        for k in range(r):
            digits[:, k] = rem % grid_resolution
            rem = rem // grid_resolution
        Z = axis[digits]
        Z = Z[np.einsum("ij,ij->i", Z, Z) <= B]
        if Z.shape[0] == 0:
            continue
        vals = loss(Z)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, best_z = float(vals[k]), Z[k].copy()

    # compass search; moves leaving the ball are pulled back to its surface
    step = axis[1] - axis[0]
    dirs = np.vstack([np.eye(r), -np.eye(r)])
    for _ in range(100_000):
        if step <= 1e-9 * radius:
            break
        cand = best_z + step * dirs
        norms = np.linalg.norm(cand, axis=1)
        over = norms > radius
        cand[over] *= (radius / norms[over])[:, None]
        vals = loss(cand)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, best_z = float(vals[k]), cand[k]
        else:
            step /= 2.0
    alpha = U @ (best_z / np.sqrt(lam))
    return alpha, best
