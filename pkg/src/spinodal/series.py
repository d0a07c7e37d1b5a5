"""Dense truncated power series in one variable.

A series is a coefficient array: index ``n`` holds the coefficient of
``x**n``, and everything past the truncation order is unknown (not zero).
Binary operations truncate to the smaller operand order, so retained
coefficients are exact whenever the inputs are.

This is the minimal single-variable kit the cusp normal form needs:
ring arithmetic, composition, square roots of unit series, compositional
reversion, and the even/odd split used to write Z = phi0(Q) + s*Q*phi1(Q).
Coefficients are plain doubles; there is no symbolic or lazy machinery.
"""
from __future__ import annotations

import numpy as np


class TruncatedSeries:
    """Power series truncated at a fixed order, with dense float coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs, order: int | None = None):
        c = np.array(coeffs, dtype=float).ravel()
        if c.size == 0:
            c = np.zeros(1)
        if order is not None:
            if order < 0:
                raise ValueError("order must be >= 0")
            out = np.zeros(order + 1)
            n = min(c.size, order + 1)
            out[:n] = c[:n]
            c = out
        if not np.all(np.isfinite(c)):
            raise ValueError("series coefficients must be finite")
        self.c = c

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, order: int) -> "TruncatedSeries":
        return cls(np.zeros(order + 1))

    @classmethod
    def constant(cls, value: float, order: int) -> "TruncatedSeries":
        s = cls.zero(order)
        s.c[0] = value
        return s

    @classmethod
    def identity(cls, order: int) -> "TruncatedSeries":
        """The series x."""
        if order < 1:
            raise ValueError("identity needs order >= 1")
        s = cls.zero(order)
        s.c[1] = 1.0
        return s

    # -- basics ----------------------------------------------------------

    @property
    def order(self) -> int:
        return self.c.size - 1

    def copy(self) -> "TruncatedSeries":
        return TruncatedSeries(self.c.copy())

    def __repr__(self):
        return f"TruncatedSeries({self.c.tolist()})"

    # -- ring arithmetic ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            n = min(self.order, other.order)
            return TruncatedSeries(self.c[: n + 1] + other.c[: n + 1])
        out = self.c.copy()
        out[0] += other
        return TruncatedSeries(out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TruncatedSeries) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            n = min(self.order, other.order)
            prod = np.convolve(self.c[: n + 1], other.c[: n + 1])[: n + 1]
            return TruncatedSeries(prod)
        return TruncatedSeries(self.c * float(other))

    __rmul__ = __mul__

    # -- structural operations --------------------------------------------

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """self(inner(x)), truncated; requires inner(0) = 0."""
        if inner.c[0] != 0.0:
            raise ValueError("compose requires an inner series with zero constant term")
        n = min(self.order, inner.order)
        inner_t = TruncatedSeries(inner.c[: n + 1])
        acc = TruncatedSeries.zero(n)
        for coeff in self.c[n::-1]:
            acc = acc * inner_t + coeff
        return acc

    def sqrt_unit(self) -> "TruncatedSeries":
        """Principal square root of a series with constant term exactly 1."""
        if self.c[0] != 1.0:
            raise ValueError("sqrt_unit requires constant term exactly 1")
        n = self.order
        r = np.zeros(n + 1)
        r[0] = 1.0
        for m in range(1, n + 1):
            conv = np.dot(r[1:m], r[m - 1 : 0 : -1]) if m >= 2 else 0.0
            r[m] = (self.c[m] - conv) / 2.0
        return TruncatedSeries(r)

    def revert(self) -> "TruncatedSeries":
        """Compositional inverse: r with self(r(x)) = x through the order.

        Coefficients are fixed one order at a time: with r known through
        order m-1, the order-m defect of self(r) is linear in r_m with
        slope c[1], so a single correction per order is exact.
        """
        if self.c[0] != 0.0:
            raise ValueError("revert requires zero constant term")
        if self.c[1] == 0.0:
            raise ValueError("revert requires a nonzero linear term")
        n = self.order
        r = np.zeros(n + 1)
        r[1] = 1.0 / self.c[1]
        for m in range(2, n + 1):
            defect = self.compose(TruncatedSeries(r)).c[m]
            r[m] -= defect / self.c[1]
        return TruncatedSeries(r)

    def split_even_odd(self) -> tuple["TruncatedSeries", "TruncatedSeries"]:
        """Coefficients of x^(2n) and x^(2n+1), each reindexed as a series in Q = x^2."""
        even = TruncatedSeries(self.c[0::2])
        odd = TruncatedSeries(self.c[1::2]) if self.order >= 1 else TruncatedSeries.zero(0)
        return even, odd

    # -- calculus / evaluation ----------------------------------------------

    def differentiate(self) -> "TruncatedSeries":
        if self.order == 0:
            return TruncatedSeries.zero(0)
        return TruncatedSeries(self.c[1:] * np.arange(1, self.order + 1))

    def evaluate(self, x):
        """Horner evaluation; x may be a scalar or an ndarray."""
        acc = np.zeros_like(np.asarray(x, dtype=float))
        for coeff in self.c[::-1]:
            acc = acc * x + coeff
        if np.ndim(x) == 0:
            return float(acc)
        return acc
