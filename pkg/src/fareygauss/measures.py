"""Invariant densities, the Kaluza sequence, Khinchin averages and Birkhoff sampling."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .cf_dynamics import PeriodicOrbit

LOG2 = math.log(2.0)


def density_e(x):
    """Infinite invariant density of the Farey map, ``1/(x log 2)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("density_e is not defined at x <= 0")
    out = 1.0 / (x * LOG2)
    return out[()] if out.ndim == 0 else out


def density_h(x):
    """Gauss density ``1/((1+x) log 2)``."""
    x = np.asarray(x)
    out = 1.0 / ((1.0 + x) * LOG2)
    return out[()] if out.ndim == 0 else out


def primitive_h(x):
    """``H(x) = log(1+x)/log 2``, the distribution function of :func:`density_h`."""
    x = np.asarray(x, dtype=float)
    out = np.log1p(x) / LOG2
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class KaluzaSequence:
    """``q_n = log(1 + 1/(n+1))/log 2`` for ``n = 0..N``; ``q_n`` is the Gauss mass of ``(0, 1/(n+1))``."""

    q: np.ndarray

    @classmethod
    def build(cls, n: int) -> "KaluzaSequence":
        if n < 0:
            raise ValueError("n must be non-negative")
        k = np.arange(n + 1, dtype=float)
        return cls(np.log1p(1.0 / (k + 1.0)) / LOG2)

    def increments(self) -> np.ndarray:
        """``q_{n-1} - q_n`` for ``n = 1..N``: the Gauss mass of the cell where ``tau = n``."""
        return self.q[:-1] - self.q[1:]

    def is_kaluza(self) -> bool:
        q = self.q
        if len(q) < 3:
            return True
        return bool(np.all(q[1:-1] ** 2 < q[:-2] * q[2:]))


def gauss_cell_mass(k):
    """``log(1 + 1/(k(k+2)))/log 2``, computed without cancellation."""
    k = np.asarray(k, dtype=float)
    return np.log1p(1.0 / (k * (k + 2.0))) / LOG2


@dataclass
class SumResult:
    value: float
    tail_bound: float
    kmax: int

    def to_dict(self):
        return asdict(self)


def _eval_on_digits(f: Callable, k: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(k), dtype=float)
        if vals.shape != k.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.fromiter((f(int(kk)) for kk in k), dtype=float, count=len(k))
    return vals


def khinchin_average(f: Callable, kmax: int, p: float = 0.25) -> SumResult:
    """``sum_{k<=kmax} f(k) * mass(k)`` with a bound on the omitted tail.

    The caller asserts ``|f(k)| <= C k^p`` for some ``p < 1`` with ``|f(k)|/k^p``
    non-increasing beyond ``kmax/2``. ``C`` is read off ``(kmax/2, kmax]`` and the
    tail is bounded by ``C kmax^{p-1}/((1-p) log 2)`` using ``log(1+u) <= u``.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    if not p < 1:
        raise ValueError("growth exponent p must be < 1")
    k = np.arange(1, kmax + 1, dtype=float)
    vals = _eval_on_digits(f, k)
    if not np.all(np.isfinite(vals)):
        raise ValueError("f returned non-finite values")
    total = float(np.sum(vals * gauss_cell_mass(k)))
    lo = kmax // 2
    c = float(np.max(np.abs(vals[lo:]) / k[lo:] ** p))
    tail = c * kmax ** (p - 1.0) / ((1.0 - p) * LOG2)
    return SumResult(total, tail, kmax)


def _pairwise_prod_excess(u: np.ndarray) -> float:
    """Return ``U`` with ``1 + U = prod (1 + u_i)``.

    Factors within a few ulps of 1 lose their information when multiplied as
    plain floats, so the excess over 1 is carried instead, pairwise.
    """
    u = np.asarray(u, dtype=float)
    while len(u) > 1:
        if len(u) % 2:
            u = np.append(u, 0.0)
        a, b = u[0::2], u[1::2]
        u = a + b + a * b
    return float(u[0]) if len(u) else 0.0


def _log_tail_estimate(n: int) -> float:
    # sum_{k>n} log k * log1p(1/(k(k+2))), Euler-Maclaurin from the expansion
    # log1p(1/(k(k+2))) = k^-2 - 2 k^-3 + 3.5 k^-4 + O(k^-5)
    L = math.log(n)
    integral = (L + 1) / n - 2 * (2 * L + 1) / (4 * n**2) + 3.5 * (3 * L + 1) / (9 * n**3)
    g_n = L * math.log1p(1.0 / (n * (n + 2.0)))
    return (integral - g_n / 2) / LOG2


@dataclass
class KhinchinResult:
    """``K = log`` of Khinchin's constant, by the weighted-sum and the product routes."""

    kmax: int
    K_sum: float
    K_product: float
    tail_estimate: float
    tail_bound: float

    @property
    def K(self) -> float:
        """Partial sum plus the asymptotic tail estimate."""
        return self.K_sum + self.tail_estimate

    @property
    def exp_K(self) -> float:
        return math.exp(self.K)

    def to_dict(self):
        d = asdict(self)
        d.update(K=self.K, exp_K=self.exp_K)
        return d


def khinchin_constant(kmax: int = 1_000_000) -> KhinchinResult:
    """Khinchin's constant from ``prod_k (1 + 1/(k(k+2)))^{log k / log 2}``.

    ``K_product`` is the log of the product formed factor by factor (pairwise
    tree on the excess over 1); ``K_sum`` is :func:`khinchin_average` with
    ``f = log``. The tail bound ``(log n + 1)/(n log 2)`` is rigorous;
    ``tail_estimate`` is the Euler-Maclaurin value of the same tail and is kept
    as a separate field.
    """
    if kmax < 10:
        raise ValueError("kmax must be >= 10")
    k = np.arange(1, kmax + 1, dtype=float)
    expo = np.log(k) / LOG2
    excess = np.expm1(expo * np.log1p(1.0 / (k * (k + 2.0))))
    K_product = math.log1p(_pairwise_prod_excess(excess))
    K_sum = khinchin_average(np.log, kmax).value
    bound = (math.log(kmax) + 1.0) / (kmax * LOG2)
    return KhinchinResult(kmax, K_sum, K_product, _log_tail_estimate(kmax), bound)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass
class StatsRecord:
    mean: float
    stderr: float
    n: int
    seed: int | None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _draw_starts(seed: int, n_orbits: int) -> tuple[list[np.random.Generator], np.ndarray]:
    # one child stream per orbit: results do not depend on how orbits are scheduled
    children = np.random.SeedSequence(seed).spawn(n_orbits)
    gens = [np.random.default_rng(c) for c in children]
    x0 = np.array([g.random() for g in gens])
    return gens, x0


def _fill_failures(gens, x0, vals, run, max_restarts=16):
    # an orbit that lands on 0 came from a rational start: resample from its own stream
    for _ in range(max_restarts):
        bad = np.flatnonzero(np.isnan(vals).reshape(len(x0), -1).any(axis=1))
        if len(bad) == 0:
            return vals
        x0[bad] = [gens[i].random() for i in bad]
        vals[bad] = run(x0[bad])
    raise RuntimeError("orbits kept hitting rationals; giving up")


def birkhoff_log_tau(seed: int, n_orbits: int = 100, orbit_len: int = 10_000) -> StatsRecord:
    """Ensemble of ``(1/n) sum_j log tau(G^j x)`` over uniform random starts.

    Float orbits of ``G`` stop tracking the true orbit after a few dozen steps;
    the averages are still typical for Lebesgue-random points, which is all the
    ergodic theorem needs.
    """
    if n_orbits < 2 or orbit_len < 1:
        raise ValueError("need n_orbits >= 2 and orbit_len >= 1")
    gens, x0 = _draw_starts(seed, n_orbits)

    def run(starts):
        return kernels.gauss_log_tau_means(starts, orbit_len)

    vals = _fill_failures(gens, x0, run(x0), run)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n_orbits))
    return StatsRecord(mean, se, n_orbits, seed, {"orbit_len": orbit_len})


def orbit_log_tau_average(x0, n: int) -> float:
    """Birkhoff average of ``log tau`` from a single start.

    A :class:`PeriodicOrbit` is followed through its exact digit cycle; a float
    start is iterated in floating point.
    """
    if isinstance(x0, PeriodicOrbit):
        d = np.resize(np.asarray(x0.word.digits, dtype=float), n)
        return float(np.mean(np.log(d)))
    return float(kernels.gauss_log_tau_means(np.array([float(x0)]), n)[0])


def geometric_checkpoints(n_passages: int, start: int = 100) -> list[int]:
    cps = []
    c = start
    while c <= n_passages:
        cps.append(c)
        c *= 10
    if not cps or cps[-1] != n_passages:
        cps.append(n_passages)
    return cps


def sn_growth(seed: int, n_orbits: int = 100, n_passages: int = 10_000) -> StatsRecord:
    """``S_n/n`` (Farey steps per Gauss step) at decade checkpoints.

    ``extra`` carries the checkpoints, the ensemble medians and whether the
    medians increase; ``mean``/``stderr`` refer to the last checkpoint.
    """
    if n_passages < 100:
        raise ValueError("n_passages must be >= 100")
    cps = geometric_checkpoints(n_passages)
    gens, x0 = _draw_starts(seed, n_orbits)

    def run(starts):
        return kernels.gauss_passage_sums(starts, cps)

    sums = _fill_failures(gens, x0, run(x0), run)
    ratios = sums / np.asarray(cps, dtype=float)
    medians = np.median(ratios, axis=0)
    last = ratios[:, -1]
    extra = {
        "checkpoints": cps,
        "medians": medians.tolist(),
        "monotone": bool(np.all(np.diff(medians) > 0)),
    }
    return StatsRecord(float(np.mean(last)), float(np.std(last, ddof=1) / math.sqrt(n_orbits)),
                       n_orbits, seed, extra)


def orbit_sn_ratio(orbit: PeriodicOrbit, n: int) -> float:
    """``S_n/n`` along a periodic orbit, from its digits."""
    d = np.resize(np.asarray(orbit.word.digits, dtype=np.int64), n)
    return float(d.sum()) / n
