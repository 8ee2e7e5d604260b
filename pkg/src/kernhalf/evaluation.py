"""Error measures, sample-size calculators, data generation, and B selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._exact import D, context
from .errors import InvalidArgumentError, InvalidInputError
from .kernel import KernelSpec, as_points, cross_kernel, gram
from .polyspace import LogBudget
from .solver import DualPredictor, SolverOptions, solve_erm
from .transfer import TransferKind, Variant, eval_transfer

INT64_MAX = 2**63 - 1
LABEL_MODES = ("probabilistic", "deterministic")
DEFAULT_B_GRID = (1.0, 10.0, 100.0, 1000.0, 10000.0)


# -- data ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        X = as_points(self.X)
        y = np.asarray(self.y)
        if y.shape != (X.shape[0],):
            raise InvalidInputError("one label per point is required")
        if not np.all((y == 0) | (y == 1)):
            raise InvalidInputError("labels must be 0 or 1")
        y = y.astype(int)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def subset(self, idx, **provenance) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], {**self.provenance, **provenance})

    def split(self, holdout_fraction: float = 0.2, seed: int = 0):
        """Shuffle with ``seed`` and return ``(train, holdout)``."""
        if not 0 < holdout_fraction < 1:
            raise InvalidArgumentError("holdout fraction must lie in (0, 1)")
        m = len(self)
        n_hold = max(1, int(round(holdout_fraction * m)))
        if n_hold >= m:
            raise InvalidArgumentError("dataset too small to split")
        perm = np.random.default_rng(seed).permutation(m)
        return (
            self.subset(np.sort(perm[n_hold:]), split="train", split_seed=seed),
            self.subset(np.sort(perm[:n_hold]), split="holdout", split_seed=seed),
        )


@dataclass(frozen=True)
class GeneratorSpec:
    """Labels drawn from ``phi(<w_star, x>)`` with ``x`` uniform on the sphere."""

    dim: int
    w_star: tuple
    transfer: TransferKind
    label_noise: str = "probabilistic"
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError("dim must be at least 1")
        w = tuple(float(v) for v in self.w_star)
        if len(w) != self.dim:
            raise InvalidArgumentError("w_star has the wrong dimension")
        if abs(math.sqrt(math.fsum(v * v for v in w)) - 1.0) > 1e-9:
            raise InvalidArgumentError("w_star must have unit norm")
        if self.label_noise not in LABEL_MODES:
            raise InvalidArgumentError(f"label_noise must be one of {LABEL_MODES}")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "w_star", w)

    @classmethod
    def with_random_direction(cls, dim, transfer, label_noise="probabilistic", seed=0):
        """Draw ``w_star`` uniformly on the sphere from a stream keyed by ``seed``."""
        if dim < 1:
            raise InvalidArgumentError("dim must be at least 1")
        rng = np.random.default_rng([seed, 1])
        w = rng.standard_normal(dim)
        w /= np.linalg.norm(w)
        return cls(dim, tuple(w), transfer, label_noise, seed)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "w_star": list(self.w_star),
            "transfer": self.transfer.short_name,
            "L": self.transfer.lipschitz,
            "label_noise": self.label_noise,
            "seed": self.seed,
        }


def _unit_sphere(rng, m, dim):
    Z = rng.standard_normal((m, dim))
    norms = np.linalg.norm(Z, axis=1)
    while np.any(norms == 0):  # measure-zero, but keep the output well-defined
        bad = norms == 0
        Z[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(Z, axis=1)
    return Z / norms[:, None]


def generate(spec: GeneratorSpec, m: int) -> Dataset:
    if m < 1:
        raise InvalidArgumentError("m must be at least 1")
    rng = np.random.default_rng(spec.seed)
    X = _unit_sphere(rng, m, spec.dim)
    p = eval_transfer(spec.transfer, X @ np.asarray(spec.w_star))
    if spec.label_noise == "probabilistic":
        y = (rng.random(m) < p).astype(int)
    else:
        y = (p >= 0.5).astype(int)
    return Dataset(X, y, {"generator": spec.to_dict(), "m": m})


def generator_competitor(spec: GeneratorSpec):
    """Label function ``x -> 1[phi(<w_star, x>) >= 1/2]`` of the generator."""
    w = np.asarray(spec.w_star)

    def label(X):
        return (eval_transfer(spec.transfer, as_points(X) @ w) >= 0.5).astype(int)

    return label


# -- error measures -------------------------------------------------------------


def _nonempty(data):
    if len(data) == 0:
        raise InvalidArgumentError("dataset is empty")


def abs_error(predict_prob, data: Dataset) -> float:
    """Mean ``|h(x) - y|`` with ``h`` clipped into [0, 1]."""
    _nonempty(data)
    h = np.clip(np.asarray(predict_prob(data.X), dtype=float), 0.0, 1.0)
    return float(np.mean(np.abs(h - data.y)))


def zero_one_error(predict_label, data: Dataset) -> float:
    _nonempty(data)
    return float(np.mean(np.asarray(predict_label(data.X)) != data.y))


def _unit(w, dim=None):
    w = np.asarray(w, dtype=float).ravel()
    if abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise InvalidArgumentError("w must have unit norm")
    if dim is not None and w.size != dim:
        raise InvalidInputError(f"w has dimension {w.size}, data has {dim}")
    return w


def margin_mistakes(w, mu: float, data: Dataset) -> np.ndarray:
    """Per-sample indicator of a mistake by ``1[<w,x> > 0]`` or ``|<w,x>| <= mu``."""
    if not mu > 0:
        raise InvalidArgumentError("mu must be positive")
    a = data.X @ _unit(w, data.dim)
    wrong = (a > 0).astype(int) != data.y
    return wrong | (np.abs(a) <= mu)


def margin_error(w, mu: float, data: Dataset) -> float:
    _nonempty(data)
    return float(np.mean(margin_mistakes(w, mu, data)))


@dataclass
class ErrorReport:
    abs_error: float
    zero_one_error: float
    margin_errors: dict = field(default_factory=dict)
    raw_abs_error: float | None = None

    def to_dict(self) -> dict:
        out = {
            "format_version": 1,
            "abs_error": self.abs_error,
            "zero_one_error": self.zero_one_error,
        }
        if self.raw_abs_error is not None:
            out["raw_abs_error"] = self.raw_abs_error
        if self.margin_errors:
            out["margin_errors"] = {repr(float(k)): v for k, v in self.margin_errors.items()}
        return out


def error_report(pred: DualPredictor, data: Dataset, mus=(), w=None) -> ErrorReport:
    """All error measures of ``pred`` on ``data``; margin errors need ``w``."""
    _nonempty(data)
    raw = pred.raw(data.X)
    report = ErrorReport(
        abs_error=float(np.mean(np.abs(np.clip(raw, 0, 1) - data.y))),
        zero_one_error=float(np.mean((raw >= 0.5).astype(int) != data.y)),
        raw_abs_error=float(np.mean(np.abs(raw - data.y))),
    )
    if len(mus):
        if w is None:
            raise InvalidArgumentError("margin errors need a reference direction w")
        report.margin_errors = {float(mu): margin_error(w, mu, data) for mu in mus}
    return report


# -- closed-form bounds ----------------------------------------------------------


class SampleSize(int):
    """An integer sample size; ``overflow`` marks a saturated value."""

    overflow: bool

    def __new__(cls, value, overflow=False):
        obj = super().__new__(cls, value)
        obj.overflow = overflow
        return obj

    def __repr__(self):
        return f"SampleSize({int(self)}{', overflow=True' if self.overflow else ''})"


def _check_eps_delta(eps, delta):
    if not 0 < eps < 1:
        raise InvalidArgumentError("eps must lie in (0, 1)")
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")


def hphi_sample_bound(L: float, eps: float, delta: float) -> float:
    """``((2L + 3 sqrt(2 ln(8/delta))) / eps)^2`` before rounding up."""
    if not (L > 0 and math.isfinite(L)):
        raise InvalidArgumentError("L must be positive")
    _check_eps_delta(eps, delta)
    return float(_hphi(L, eps, delta))


def _hphi(L, eps, delta):
    with context():
        root = (2 * (8 / D(delta)).ln()).sqrt()
        return ((2 * D(L) + 3 * root) / D(eps)) ** 2


def sample_size_hphi(L: float, eps: float, delta: float) -> int:
    """Examples sufficient for ERM over an ``L``-Lipschitz transfer class."""
    hphi_sample_bound(L, eps, delta)
    return int(_hphi(L, eps, delta).to_integral_value(rounding="ROUND_CEILING"))


_HB_FACTORS = {"erm": 2.0, "mainres": 8.0}


def _hb_factor(variant):
    try:
        return _HB_FACTORS[variant]
    except KeyError:
        raise InvalidArgumentError(f"variant must be one of {tuple(_HB_FACTORS)}") from None


def _hb(B, eps, delta):
    # the 'erm' value; 'mainres' is exactly four times it
    with context():
        return 2 * D(B) / D(eps) ** 2 * (2 + 9 * (8 / D(delta)).ln().sqrt()) ** 2


def hb_sample_bound(B: float, eps: float, delta: float, variant: str = "erm") -> float:
    """``factor * B / eps^2 * (2 + 9 sqrt(ln(8/delta)))^2`` before rounding up.

    ``factor`` is 2 for plain ERM over the ball and 8 for the end-to-end
    guarantee against the sigmoid class.
    """
    factor = _hb_factor(variant)
    _check_eps_delta(eps, delta)
    if not B >= 1:
        raise InvalidArgumentError("B must be at least 1")
    if math.isinf(B):
        return math.inf
    return float(_hb(B, eps, delta)) * (factor / 2.0)


def sample_size_hb(B, eps: float, delta: float, variant: str = "erm") -> SampleSize:
    """Examples sufficient for learning the norm ball; accepts a :class:`LogBudget`.

    Results beyond ``2**63 - 1`` saturate there with ``overflow=True``.
    """
    factor = _hb_factor(variant)
    _check_eps_delta(eps, delta)
    if isinstance(B, LogBudget):
        if B.log_b < 0:
            raise InvalidArgumentError("B must be at least 1")
        log_m = (
            math.log(factor)
            + B.log_b
            - 2.0 * math.log(eps)
            + 2.0 * math.log(2.0 + 9.0 * math.sqrt(math.log(8.0 / delta)))
        )
        if log_m >= math.log(INT64_MAX):
            return SampleSize(INT64_MAX, overflow=True)
        B = B.value
    raw = hb_sample_bound(B, eps, delta, variant)
    if not math.isfinite(raw) or raw > INT64_MAX:
        return SampleSize(INT64_MAX, overflow=True)
    with context():
        exact = _hb(B, eps, delta) * int(factor / 2)
        n = int(exact.to_integral_value(rounding="ROUND_CEILING"))
    if n > INT64_MAX:
        return SampleSize(INT64_MAX, overflow=True)
    return SampleSize(n)


def l_for_margin(transfer: str, mu: float, eps: float | None = None) -> float:
    """Lipschitz constant at which a transfer is dominated by the mu-margin error.

    ``"pw"``: ``1 / (2 mu)``; ``"sig"``: ``ln((2 - eps) / eps) / (4 mu)``.
    """
    if not mu > 0:
        raise InvalidArgumentError("mu must be positive")
    if transfer == "pw":
        return 1.0 / (2.0 * mu)
    if transfer == "sig":
        if eps is None or not 0 < eps < 1:
            raise InvalidArgumentError("eps must lie in (0, 1) for the sigmoid")
        with context():
            return float(((2 - D(eps)) / D(eps)).ln() / (4 * D(mu)))
    raise InvalidArgumentError("transfer must be 'pw' or 'sig'")


@dataclass
class MarginDominationReport:
    violations: int
    mean_loss: float
    margin_error: float
    slack: float
    lipschitz: float

    @property
    def holds(self) -> bool:
        return self.violations == 0 and self.mean_loss <= self.margin_error + self.slack + 1e-12


def margin_domination_check(w, mu: float, data: Dataset, transfer: str, eps: float | None = None,
                            atol: float = 1e-12) -> MarginDominationReport:
    """Check ``|phi(<w,x>) - y| <= 1[margin mistake] + slack`` sample by sample.

    ``phi`` uses the Lipschitz constant from :func:`l_for_margin`; the slack
    is 0 for ``"pw"`` and ``eps / 2`` for ``"sig"``.  ``atol`` absorbs
    floating-point rounding at the boundary ``|<w,x>| = mu``.
    """
    L = l_for_margin(transfer, mu, eps)
    kind = TransferKind(Variant.PIECEWISE_LINEAR if transfer == "pw" else Variant.SIGMOID, L)
    slack = 0.0 if transfer == "pw" else eps / 2.0
    w = _unit(w, data.dim)
    loss = np.abs(eval_transfer(kind, data.X @ w) - data.y)
    mistakes = margin_mistakes(w, mu, data).astype(float)
    violations = int(np.sum(loss > mistakes + slack + atol))
    return MarginDominationReport(
        violations=violations,
        mean_loss=float(np.mean(loss)),
        margin_error=float(np.mean(mistakes)),
        slack=slack,
        lipschitz=L,
    )


# -- model selection -------------------------------------------------------------


@dataclass
class CrossValidationResult:
    best_b: float
    predictor: DualPredictor
    rows: list

    def to_dict(self) -> dict:
        return {"format_version": 1, "best_B": self.best_b, "per_B": self.rows}


def cross_validate_b(train: Dataset, holdout: Dataset, b_grid, opts: SolverOptions = SolverOptions(),
                     spec: KernelSpec = KernelSpec()) -> CrossValidationResult:
    """Train one predictor per ``B`` and keep the best holdout zero-one error.

    Ties go to the smallest ``B``; duplicate grid entries are ignored.
    """
    grid = sorted({float(b) for b in b_grid})
    if not grid:
        raise InvalidArgumentError("B grid is empty")
    if grid[0] <= 0:
        raise InvalidArgumentError("B values must be positive")
    if train.dim != holdout.dim:
        raise InvalidInputError("train and holdout dimensions differ")
    G = gram(train.X, spec)
    K_hold = cross_kernel(holdout.X, train.X, spec)
    best = None
    rows = []
    for B in grid:
        pred, report = solve_erm(G, train.y, B, opts)
        raw = K_hold @ pred.alpha
        err01 = float(np.mean((raw >= 0.5).astype(int) != holdout.y))
        rows.append({
            "B": B,
            "train_objective": report.final_objective,
            "holdout_zero_one": err01,
            "holdout_abs": float(np.mean(np.abs(np.clip(raw, 0, 1) - holdout.y))),
            "constraint_active": report.constraint_active,
            "iters_used": report.iters_used,
        })
        if best is None or err01 < best[0]:
            best = (err01, B, pred)
    return CrossValidationResult(best_b=best[1], predictor=best[2], rows=rows)
