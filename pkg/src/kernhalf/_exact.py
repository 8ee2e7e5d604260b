"""Correctly rounded evaluation of the closed-form bounds.

Inputs are converted to ``Decimal`` exactly and the formula is evaluated at
60 significant digits, so the final conversion to float is the only rounding
that matters.
"""

from __future__ import annotations

import decimal
from decimal import Decimal

_CTX = decimal.Context(prec=60, Emax=10**9, Emin=-10**9)


def D(x) -> Decimal:
    return Decimal(float(x))


def context():
    return decimal.localcontext(_CTX)
