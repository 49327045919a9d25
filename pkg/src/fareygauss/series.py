"""Truncated formal power series in one variable."""

from __future__ import annotations

import numpy as np


class PowerSeries:
    """``c_0 + c_1 x + ... + c_L x^L + O(x^{L+1})`` with complex coefficients.

    Every operation keeps the truncation order of its operands (the smaller of
    the two for binary operations); nothing beyond order ``L`` is ever invented.
    """

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs, order: int | None = None, var: str = "x"):
        c = np.asarray(coeffs, dtype=complex).ravel()
        if order is None:
            order = len(c) - 1
        if order < 0:
            raise ValueError("order must be non-negative")
        out = np.zeros(order + 1, dtype=complex)
        n = min(len(c), order + 1)
        out[:n] = c[:n]
        self.coeffs = out
        self.var = var

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __repr__(self):
        return f"PowerSeries({self.coeffs.tolist()!r}, var={self.var!r})"

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def _coerce(self, other) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            if other.var != self.var:
                raise ValueError(f"variable mismatch: {self.var} vs {other.var}")
            return other
        return PowerSeries([other], self.order, self.var)

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.coeffs, min(order, self.order), self.var)

    def __add__(self, other):
        o = self._coerce(other)
        L = min(self.order, o.order)
        return PowerSeries(self.coeffs[: L + 1] + o.coeffs[: L + 1], L, self.var)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(-self.coeffs, self.order, self.var)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries(self.coeffs * other, self.order, self.var)
        o = self._coerce(other)
        L = min(self.order, o.order)
        return PowerSeries(np.convolve(self.coeffs[: L + 1], o.coeffs[: L + 1])[: L + 1], L, self.var)

    __rmul__ = __mul__

    def inverse(self) -> "PowerSeries":
        c = self.coeffs
        if c[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        L = self.order
        b = np.zeros(L + 1, dtype=complex)
        b[0] = 1 / c[0]
        for n in range(1, L + 1):
            b[n] = -np.dot(c[1 : n + 1], b[n - 1 :: -1][:n]) / c[0]
        return PowerSeries(b, L, self.var)

    def __truediv__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries(self.coeffs / other, self.order, self.var)
        return self * self._coerce(other).inverse()

    def derivative(self) -> "PowerSeries":
        # order drops by one: the x^L coefficient of f' is unknown
        L = self.order
        if L == 0:
            return PowerSeries([0], 0, self.var)
        return PowerSeries(self.coeffs[1:] * np.arange(1, L + 1), L - 1, self.var)

    def exp(self) -> "PowerSeries":
        """``exp(f)`` by ``n b_n = sum_{k=1}^n k a_k b_{n-k}``."""
        a = self.coeffs
        L = self.order
        b = np.zeros(L + 1, dtype=complex)
        b[0] = np.exp(a[0])
        k = np.arange(1, L + 1)
        for n in range(1, L + 1):
            b[n] = np.dot(k[:n] * a[1 : n + 1], b[n - 1 :: -1][:n]) / n
        return PowerSeries(b, L, self.var)

    def log(self) -> "PowerSeries":
        """``log(f)`` by ``n a_0 b_n = n a_n - sum_{k=1}^{n-1} k b_k a_{n-k}``."""
        a = self.coeffs
        if a[0] == 0:
            raise ValueError("log of a series with zero constant term")
        L = self.order
        b = np.zeros(L + 1, dtype=complex)
        b[0] = np.log(a[0])
        for n in range(1, L + 1):
            k = np.arange(1, n)
            s = np.dot(k * b[1:n], a[n - 1 : 0 : -1]) if n > 1 else 0.0
            b[n] = (n * a[n] - s) / (n * a[0])
        return PowerSeries(b, L, self.var)

    def __call__(self, x):
        acc = 0j
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc

    def allclose(self, other, rtol=1e-12, atol=0.0) -> bool:
        o = self._coerce(other)
        L = min(self.order, o.order)
        return bool(np.allclose(self.coeffs[: L + 1], o.coeffs[: L + 1], rtol=rtol, atol=atol))

    def to_dict(self) -> dict:
        return {
            "var": self.var,
            "order": self.order,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PowerSeries":
        return cls([complex(re, im) for re, im in d["coeffs"]], d["order"], d["var"])


def log_one_minus(order: int, var: str = "x") -> PowerSeries:
    """``log(1 - x) = -sum x^n/n``."""
    c = np.zeros(order + 1)
    n = np.arange(1, order + 1)
    c[1:] = -1.0 / n
    return PowerSeries(c, order, var)
