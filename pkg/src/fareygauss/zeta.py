"""Partition functions, traces of ``K_{z,q}^l``, Fredholm determinants and zeta functions.

Two independent routes are provided for most quantities: periodic-orbit sums
over continued-fraction words (exact words, tail bounds for truncation) and
matrix computations on the Nystroem discretization of ``K_{z,q}``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import kernels
from .cf_dynamics import _attracting_fixed_point, periodic_cf_value
from .series import PowerSeries, log_one_minus
from .specfun import QuadratureRule, build_rule
from .transfer_ops import build_Kzq, on_cut

GOLD2 = ((math.sqrt(5) - 1) / 2) ** 2  # largest orbit weight, x_1^2
DEFAULT_TOL = 1e-16
POLE_TOL = 1e-12


@dataclass
class TupleSum:
    value: complex
    tail_bound: float
    kmax: int
    n_evaluated: int = 0

    def to_dict(self):
        return {"value": [self.value.real, self.value.imag], "tail_bound": self.tail_bound,
                "kmax": self.kmax, "n_evaluated": self.n_evaluated}


def _check_z(z) -> complex:
    z = complex(z)
    if abs(z) > 1:
        raise ValueError("periodic-orbit sums converge only for |z| <= 1")
    return z


def digit_tail(z, kmax: int, power: int = 2) -> float:
    """Bound for ``sum_{k > kmax} |z|^k k^{-power}``."""
    r = abs(complex(z))
    if r == 0:
        return 0.0
    b = kmax ** (1 - power) / (power - 1)
    if r < 1:
        b = min(b, r ** (kmax + 1) / ((kmax + 1) ** power * (1 - r)))
    return b


def _tuple_tail(ell: int, z, kmax: int) -> float:
    # words with some digit > kmax: prod_j (G^j x)^2 < prod_j k_j^{-2}
    r = abs(complex(z))
    tail = digit_tail(r, kmax)
    k = np.arange(1, kmax + 1, dtype=float)
    li2 = float(np.sum(r**k / k**2)) + tail
    return ell * tail * li2 ** (ell - 1)


# ---------------------------------------------------------------------------
# Partition functions
# ---------------------------------------------------------------------------

PSI = {0: (1, 0, 1, 1), 1: (0, 1, 1, 1)}  # (a, b, c, d) of x/(1+x) and 1/(1+x)


def _farey_word_matrix(bits) -> tuple[int, int, int, int]:
    a, b, c, d = 1, 0, 0, 1
    for bit in bits:
        p, q_, r, s = PSI[bit]
        a, b, c, d = a * p + b * r, a * q_ + b * s, c * p + d * r, c * q_ + d * s
    return a, b, c, d


def _zf_brute(n: int, max_iter: int = 100_000) -> float:
    words = np.array(list(itertools.product((0, 1), repeat=n)), dtype=bool)
    neutral = ~words.any(axis=1)
    w = words[~neutral]
    x = np.full(len(w), 0.5)
    # contraction iteration of the composed branches
    for _ in range(max_iter):
        x_old = x
        for j in range(n - 1, -1, -1):
            x = np.where(w[:, j], 1 / (1 + x), x / (1 + x))
        if np.max(np.abs(x - x_old)) <= 1e-15:
            break
    else:
        raise ArithmeticError("fixed-point iteration did not converge")
    weight = np.ones(len(w))
    y = x
    for j in range(n - 1, -1, -1):
        weight /= (1 + y) ** 2
        y = np.where(w[:, j], 1 / (1 + y), y / (1 + y))
    return float(np.sum(neutral)) + float(np.sum(weight))


def _zf_symbolic(n: int) -> float:
    total = 1.0
    for bits in itertools.product((0, 1), repeat=n):
        if not any(bits):
            continue
        a, b, c, d = _farey_word_matrix(bits)
        x = _attracting_fixed_point(a, b, c, d)
        total += 1.0 / (c * x + d) ** 2
    return total


def partition_Z_F(n: int, method: str = "brute") -> float:
    """``Z_n(F)``: sum of ``1/|(F^n)'(x)|`` over the fixed points of ``F^n``.

    ``brute`` iterates each composed branch to its fixed point; ``symbolic``
    solves the fixed-point quadratic of the integer matrix of the word. The
    all-``Psi_0`` word has the neutral fixed point 0 and contributes 1.
    """
    if not 1 <= n <= 12:
        raise ValueError("n must be in [1, 12]")
    if method == "brute":
        return _zf_brute(n)
    if method == "symbolic":
        return _zf_symbolic(n)
    raise ValueError(f"unknown method {method!r}")


def partition_Z_G(n: int, kmax: int = 1000, tol: float = 0.0) -> TupleSum:
    """``Z_n(G) = sum_{k_1..k_n} prod_j (G^j x)^2`` over words with digits ``<= kmax``."""
    v, pruned, cnt = kernels.periodic_tuple_sum(n, 1.0, 0, kmax, tol, kernels.MODE_DIRECT)
    return TupleSum(complex(v), _tuple_tail(n, 1.0, kmax) + pruned, kmax, cnt)


# ---------------------------------------------------------------------------
# Traces and grand partition function
# ---------------------------------------------------------------------------


def trace_Kzq(z, q: int, kmax: int = 10_000) -> TupleSum:
    """``(-1)^q sum_k z^k x_k^{2(q+1)}/(1 + x_k^2)`` with ``x_k = (sqrt(k^2+4) - k)/2``."""
    z = _check_z(z)
    k = np.arange(1, kmax + 1, dtype=float)
    xk = 2.0 / (np.sqrt(k * k + 4) + k)
    zk = np.power(z, k) if z != 1 else np.ones_like(k)
    val = (-1) ** q * np.sum(zk * xk ** (2 * (q + 1)) / (1 + xk**2))
    tail = digit_tail(z, kmax, 2 * (q + 1))
    return TupleSum(complex(val), tail, kmax, kmax)


def trace_power(ell: int, z, q: int, kmax: int = 200, tol: float = DEFAULT_TOL) -> TupleSum:
    """``tr K_{z,q}^ell`` as the sum over ``ell``-periodic continued fractions."""
    z = _check_z(z)
    if ell < 1:
        raise ValueError("ell must be >= 1")
    v, pruned, cnt = kernels.periodic_tuple_sum(ell, z, q, kmax, tol, kernels.MODE_TRACE)
    # |summand| <= P/(1 - P) <= prod k_j^{-2} / (1 - x_1^2)
    tail = (_tuple_tail(ell, z, kmax) + pruned) / (1 - GOLD2)
    return TupleSum(complex(v), tail, kmax, cnt)


def grand_Xi(ell: int, z, kmax: int = 200, route: str = "trace", tol: float = DEFAULT_TOL) -> TupleSum:
    """``Xi_ell(z)``: ``tr K_{z,0}^ell - tr K_{z,1}^ell`` or the direct orbit sum."""
    z = _check_z(z)
    if route == "trace":
        a = trace_power(ell, z, 0, kmax, tol)
        b = trace_power(ell, z, 1, kmax, tol)
        return TupleSum(a.value - b.value, a.tail_bound + b.tail_bound, kmax,
                        a.n_evaluated + b.n_evaluated)
    if route == "direct":
        v, pruned, cnt = kernels.periodic_tuple_sum(ell, z, 0, kmax, tol, kernels.MODE_DIRECT)
        return TupleSum(complex(v), _tuple_tail(ell, z, kmax) + pruned, kmax, cnt)
    raise ValueError(f"unknown route {route!r}")


@dataclass
class TraceTable:
    z: complex
    kmax: int
    rows: list = field(default_factory=list)  # (ell, q, value, tail)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ell", "q", "z_re", "z_im", "value_re", "value_im", "tail"])
        for ell, q, v, tail in self.rows:
            w.writerow([ell, q, f"{self.z.real:.17g}", f"{self.z.imag:.17g}",
                        f"{v.real:.17g}", f"{v.imag:.17g}", f"{tail:.17g}"])
        return buf.getvalue()

    def to_dict(self):
        return {"z": [self.z.real, self.z.imag], "kmax": self.kmax,
                "rows": [{"ell": e, "q": q, "value": [v.real, v.imag], "tail": t}
                         for e, q, v, t in self.rows]}


def trace_table(z, Lmax: int, kmax: int = 200, qs=(0, 1), tol: float = DEFAULT_TOL) -> TraceTable:
    z = _check_z(z)
    tab = TraceTable(z, kmax)
    for ell in range(1, Lmax + 1):
        for q in qs:
            r = trace_power(ell, z, q, kmax, tol)
            tab.rows.append((ell, q, r.value, r.tail_bound))
    return tab


# ---------------------------------------------------------------------------
# Determinants and zeta functions
# ---------------------------------------------------------------------------


def _default_rule(rule):
    return build_rule("m", 60) if rule is None else rule


def matrix_traces(z, q: int, Lmax: int, rule: QuadratureRule | None = None) -> np.ndarray:
    """``tr A^ell`` for ``ell = 1..Lmax`` from the discretized ``K_{z,q}``."""
    A = build_Kzq(z, q, _default_rule(rule)).matrix
    out = np.empty(Lmax, dtype=complex)
    P = np.eye(len(A))
    for ell in range(Lmax):
        P = P @ A
        out[ell] = np.trace(P)
    return out


def spectral_radius(z, q: int, rule: QuadratureRule | None = None) -> float:
    A = build_Kzq(z, q, rule if rule is not None else build_rule("m", 40)).matrix
    return float(np.max(np.abs(np.linalg.eigvals(A)))) if len(A) else 0.0


def fredholm_log_series(z, q: int, Lmax: int, kmax: int = 200, tol: float = DEFAULT_TOL) -> PowerSeries:
    """``log det(1 - s K_{z,q}) = -sum_ell s^ell tr K^ell / ell`` as a series in ``s``."""
    c = np.zeros(Lmax + 1, dtype=complex)
    for ell in range(1, Lmax + 1):
        c[ell] = -trace_power(ell, z, q, kmax, tol).value / ell
    return PowerSeries(c, Lmax, "s")


SERIES_TARGET = 1e-11


def _series_plan(s_abs: float, rho: float, target: float = SERIES_TARGET, cap: int = 40):
    # smallest Lmax whose geometric remainder sum_{l>L} (|s| rho)^l / l is below target
    r = s_abs * rho
    L = 1
    while L < cap and r ** (L + 1) / ((L + 1) * (1 - r)) >= target:
        L += 1
    return L


def fredholm_det(s, z, q: int = 0, Lmax: int | None = None, kmax: int = 200, route: str = "matrix",
                 rule: QuadratureRule | None = None, tol: float | None = None) -> complex:
    """``det(1 - s K_{z,q})``.

    ``matrix``: ``det(I - sA)`` on the Nystroem matrix, valid for every ``s``.
    ``series``: ``exp(-sum_{ell<=Lmax} s^ell tr K^ell / ell)`` from periodic
    orbits; refused when ``|s|`` times the spectral radius is not below 1.
    Without ``Lmax`` the series is cut where the geometric remainder drops
    below ``SERIES_TARGET``; without ``tol`` the pruning tolerance of the
    ``ell``-th trace is relaxed by ``|s|^-ell``, since that trace enters
    the sum multiplied by ``s^ell``.
    """
    s = complex(s)
    z = complex(z)
    if on_cut(z):
        raise ValueError(f"z={z.real} lies on the cut (1, inf)")
    if s == 0:
        return 1 + 0j
    if route == "matrix":
        A = build_Kzq(z, q, _default_rule(rule)).matrix
        return complex(np.linalg.det(np.eye(len(A)) - s * A))
    if route == "series":
        rho = spectral_radius(z, q)
        if abs(s) * rho >= 1:
            raise ValueError(
                f"|s| * rho = {abs(s) * rho:.3g} >= 1: trace series diverges, use route='matrix'"
            )
        if Lmax is None:
            Lmax = _series_plan(abs(s), rho)
        acc = 0j
        for ell in range(1, Lmax + 1):
            tol_l = tol if tol is not None else min(1e-10, max(DEFAULT_TOL, 1e-14 / abs(s) ** ell))
            acc -= s**ell * trace_power(ell, z, q, kmax, tol_l).value / ell
        return complex(np.exp(acc))
    raise ValueError(f"unknown route {route!r}")


def zeta2(s, z, rule: QuadratureRule | None = None) -> complex:
    """``zeta_2(s, z) = det(1 - s K_{z,1}) / det(1 - s K_{z,0})`` by the matrix route."""
    z = complex(z)
    if z.imag == 0 and z.real >= 1 and z != 1:
        raise ValueError("z must lie off [1, inf) (z = 1 is allowed as a limit)")
    rule = _default_rule(rule)
    den = fredholm_det(s, z, 0, rule=rule)
    if abs(den) < POLE_TOL:
        raise ArithmeticError(f"s={s} is within {POLE_TOL} of a pole (det(1 - s K_(z,0)) = {den})")
    return fredholm_det(s, z, 1, rule=rule) / den


def zeta2_log_series(z, Lmax: int, kmax: int = 200, tol: float = DEFAULT_TOL) -> PowerSeries:
    """``log zeta_2(s, z) = sum_ell s^ell Xi_ell(z)/ell`` in ``s``."""
    c = np.zeros(Lmax + 1, dtype=complex)
    for ell in range(1, Lmax + 1):
        c[ell] = grand_Xi(ell, z, kmax, "trace", tol).value / ell
    return PowerSeries(c, Lmax, "s")


def zeta2_series(z, Lmax: int, kmax: int = 200, tol: float = DEFAULT_TOL) -> PowerSeries:
    return zeta2_log_series(z, Lmax, kmax, tol).exp()


def matrix_log_zeta2_coeffs(z, Lmax: int, rule: QuadratureRule | None = None) -> np.ndarray:
    """Coefficients ``(tr A_0^ell - tr A_1^ell)/ell`` of ``log zeta_2`` in ``s`` from matrices."""
    rule = _default_rule(rule)
    t0 = matrix_traces(z, 0, Lmax, rule)
    t1 = matrix_traces(z, 1, Lmax, rule)
    return (t0 - t1) / np.arange(1, Lmax + 1)


def compositions(n: int, ell: int):
    """All ``(k_1, ..., k_ell)`` with ``k_i >= 1`` and ``sum k_i = n``."""
    if ell == 1:
        if n >= 1:
            yield (n,)
        return
    for k in range(1, n - ell + 2):
        for rest in compositions(n - k, ell - 1):
            yield (k,) + rest


def xi_z_series(ell: int, order: int) -> PowerSeries:
    """``Xi_ell(z)`` as a polynomial in ``z`` through ``z^order`` (finitely many words)."""
    c = np.zeros(order + 1)
    for n in range(ell, order + 1):
        c[n] = math.fsum(periodic_cf_value(w).weight for w in compositions(n, ell))
    return PowerSeries(c, order, "z")


def zeta2_at_s1_z_series(order: int) -> PowerSeries:
    """``zeta_2(1, z) = exp(sum_ell Xi_ell(z)/ell)`` in ``z``."""
    acc = PowerSeries([0], order, "z")
    for ell in range(1, order + 1):
        acc = acc + xi_z_series(ell, order) / ell
    return acc.exp()


def zeta_F_log_series(nmax: int, method: str = "brute") -> PowerSeries:
    c = np.zeros(nmax + 1)
    for n in range(1, nmax + 1):
        c[n] = partition_Z_F(n, method) / n
    return PowerSeries(c, nmax, "z")


def zeta_F_series(nmax: int, method: str = "brute") -> PowerSeries:
    """``zeta_F(z) = exp(sum_n z^n Z_n(F)/n)`` through ``z^nmax``."""
    if not 1 <= nmax <= 12:
        raise ValueError("nmax must be in [1, 12]")
    return zeta_F_log_series(nmax, method).exp()


def one_minus_z_zeta_F(nmax: int, method: str = "brute") -> PowerSeries:
    return (zeta_F_log_series(nmax, method) + log_one_minus(nmax, "z")).exp()


def pole_locate(z, bracket, rule: QuadratureRule | None = None, xtol: float = 1e-12) -> float:
    """Real root of ``s -> det(I - s A_{z,0})`` inside ``bracket``."""
    z = complex(z)
    if z.imag != 0 or z.real > 1:
        raise ValueError("pole_locate needs real z <= 1")
    rule = _default_rule(rule)
    A = build_Kzq(z, 0, rule).matrix
    I = np.eye(len(A))

    def f(s):
        return float(np.real(np.linalg.det(I - s * A)))

    a, b = map(float, bracket)
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError(f"det(1 - s K) has no sign change on [{a}, {b}]")
    return float(optimize.brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))


__all__ = [
    "partition_Z_F", "partition_Z_G", "trace_Kzq", "trace_power", "grand_Xi",
    "trace_table", "fredholm_det", "fredholm_log_series", "zeta2", "zeta2_series",
    "zeta2_log_series", "zeta_F_series", "one_minus_z_zeta_F", "zeta2_at_s1_z_series",
    "xi_z_series", "pole_locate", "matrix_traces", "matrix_log_zeta2_coeffs",
    "TupleSum", "TraceTable", "PowerSeries",
]
