"""Transfer functions mapping a margin value ``a = <w, x>`` to a probability.

Four shapes are provided: the zero-one step and three ``L``-Lipschitz
surrogates (sigmoid, erf, piecewise linear).  All of them map into [0, 1]
and the continuous ones satisfy ``phi(a) + phi(-a) == 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import DomainError, InvalidArgumentError


class Variant(str, enum.Enum):
    ZERO_ONE = "zero_one"
    SIGMOID = "sigmoid"
    ERF = "erf"
    PIECEWISE_LINEAR = "piecewise_linear"


_ALIASES = {
    "01": Variant.ZERO_ONE,
    "zero_one": Variant.ZERO_ONE,
    "zeroone": Variant.ZERO_ONE,
    "sig": Variant.SIGMOID,
    "sigmoid": Variant.SIGMOID,
    "erf": Variant.ERF,
    "pw": Variant.PIECEWISE_LINEAR,
    "piecewise_linear": Variant.PIECEWISE_LINEAR,
}


@dataclass(frozen=True)
class TransferKind:
    """A transfer function shape together with its Lipschitz constant.

    ``lipschitz`` is ignored for the zero-one variant.
    """

    variant: Variant
    lipschitz: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant is not Variant.ZERO_ONE:
            if not (math.isfinite(self.lipschitz) and self.lipschitz > 0):
                raise InvalidArgumentError(
                    f"Lipschitz constant must be positive, got {self.lipschitz}"
                )

    @classmethod
    def parse(cls, name: str, lipschitz: float = 1.0) -> "TransferKind":
        try:
            variant = _ALIASES[name.lower()]
        except KeyError:
            raise InvalidArgumentError(f"unknown transfer function {name!r}") from None
        return cls(variant, lipschitz)

    @property
    def short_name(self) -> str:
        return {
            Variant.ZERO_ONE: "01",
            Variant.SIGMOID: "sig",
            Variant.ERF: "erf",
            Variant.PIECEWISE_LINEAR: "pw",
        }[self.variant]

    def __call__(self, a):
        return eval_transfer(self, a)


def _upper_half(variant, L, a):
    # a >= 0 here, so every value lies in [1/2, 1]
    if variant is Variant.SIGMOID:
        return 1.0 / (1.0 + np.exp(-4.0 * L * a))
    if variant is Variant.ERF:
        return 0.5 * (1.0 + erf(math.sqrt(math.pi) * L * a))
    return np.minimum(0.5 + L * a, 1.0)


def eval_transfer(kind: TransferKind, a):
    """Evaluate ``kind`` at ``a`` (scalar or array), returning values in [0, 1].

    Negative arguments are mapped through ``1 - phi(-a)``; since ``phi(-a)``
    lies in [1/2, 1] that subtraction is exact, which makes the point
    symmetry ``phi(a) + phi(-a) = 1`` hold bit-for-bit.
    """
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("transfer functions require finite arguments")
    if kind.variant is Variant.ZERO_ONE:
        out = (arr >= 0).astype(float)
    else:
        mag = _upper_half(kind.variant, kind.lipschitz, np.abs(arr))
        out = np.where(arr >= 0, mag, 1.0 - mag)
    if np.ndim(a) == 0:
        return float(out)
    return out


def lipschitz_check(kind: TransferKind, grid) -> float:
    """Largest finite-difference slope of ``kind`` over adjacent grid points."""
    pts = np.asarray(grid, dtype=float)
    if pts.ndim != 1 or pts.size < 2:
        raise InvalidArgumentError("grid needs at least two points")
    steps = np.diff(pts)
    if np.any(steps <= 0):
        raise InvalidArgumentError("grid must be strictly increasing")
    if pts[0] < -1.0 or pts[-1] > 1.0:
        raise InvalidArgumentError("grid must lie within [-1, 1]")
    vals = eval_transfer(kind, pts)
    return float(np.max(np.abs(np.diff(vals)) / steps))
