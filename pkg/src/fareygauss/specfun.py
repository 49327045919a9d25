"""Bessel-quotient kernel, Lerch transcendent, quadrature rules and the order-1 Hankel transform.

Rules for the measures on the half-line reuse Gauss-Laguerre nodes and fold
the measure's density divided by ``e^{-t}`` into the weights:

=========  ===============================  ==========================
tag        density                          factor folded into weights
=========  ===============================  ==========================
m          t/(e^t - 1)                      t/(1 - e^{-t})
m_tilde    t e^{-t}                         t
m_hat      e^{-t}(1 - e^{-t})/(t log 2)     (1 - e^{-t})/(t log 2)
lebesgue   1                                e^t
=========  ===============================  ==========================

A Lebesgue rule can instead be built on a finite interval ``[0, cutoff]``:
Gauss-Legendre in ``u = sqrt(s)``. That variable straightens out the
``J_1(2 sqrt(st))`` oscillation and is the rule to use for Hankel transforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

MEASURES = ("m", "m_tilde", "m_hat", "lebesgue")
LOG2 = math.log(2.0)

LAGUERRE_MAX_ORDER = 512
LEGENDRE_MAX_ORDER = 8192
SERIES_CROSSOVER = 30.0


def density(measure: str, t):
    t = np.asarray(t, dtype=float)
    if measure == "m":
        return t / np.expm1(t)
    if measure == "m_tilde":
        return t * np.exp(-t)
    if measure == "m_hat":
        return np.exp(-t) * (-np.expm1(-t)) / (t * LOG2)
    if measure == "lebesgue":
        return np.ones_like(t)
    raise ValueError(f"unknown measure {measure!r}")


def total_mass(measure: str) -> float:
    """Closed-form masses: zeta(2) for m, 1 for m_tilde and m_hat (Frullani)."""
    return {"m": math.pi**2 / 6, "m_tilde": 1.0, "m_hat": 1.0}[measure]


def moment_m(k: int) -> float:
    """``int t^k dm = (k+1)! zeta(k+2)``."""
    return math.factorial(k + 1) * float(special.zeta(k + 2))


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    measure: str
    cutoff: float | None = None

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, f) -> complex | float:
        """``sum_j w_j f(t_j)``; ``f`` is a callable or an array of node values."""
        vals = f(self.nodes) if callable(f) else np.asarray(f)
        return self.weights @ vals

    def norm(self, values) -> float:
        """Discrete ``L_2`` norm of node values with respect to this rule's measure."""
        values = np.asarray(values)
        return float(np.sqrt(self.weights @ np.abs(values) ** 2))

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "order": self.order,
            "cutoff": self.cutoff,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "QuadratureRule":
        return cls(np.asarray(d["nodes"], float), np.asarray(d["weights"], float),
                   d["measure"], d.get("cutoff"))


def _laguerre(N: int):
    x, w = special.roots_laguerre(N)
    # weights of the top nodes underflow to 0 for large N; keep them, they contribute nothing
    with np.errstate(divide="ignore"):
        logw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), -np.inf)
    return x, w, logw


def build_rule(measure: str, N: int, cutoff: float | None = None) -> QuadratureRule:
    """Quadrature rule of order ``N`` for ``measure``.

    ``cutoff`` is only meaningful for ``"lebesgue"`` and selects the finite
    interval rule in ``sqrt(s)``.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    if cutoff is not None:
        if measure != "lebesgue":
            raise ValueError("cutoff applies to the lebesgue rule only")
        if not 4 <= N <= LEGENDRE_MAX_ORDER:
            raise ValueError(f"N={N} outside [4, {LEGENDRE_MAX_ORDER}]")
        if not cutoff > 0:
            raise ValueError("cutoff must be positive")
        x, w = special.roots_legendre(N)
        U = math.sqrt(cutoff)
        u = U * (x + 1) / 2
        return QuadratureRule(u * u, 2 * u * w * U / 2, measure, float(cutoff))

    if not 4 <= N <= LAGUERRE_MAX_ORDER:
        raise ValueError(f"N={N} outside [4, {LAGUERRE_MAX_ORDER}]")
    t, w, logw = _laguerre(N)
    if measure == "m":
        W = w * t / -np.expm1(-t)
    elif measure == "m_tilde":
        W = w * t
    elif measure == "m_hat":
        W = w * -np.expm1(-t) / (t * LOG2)
    else:
        W = np.exp(logw + t)
    return QuadratureRule(t, W, measure)


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------


def _kernel_series_coeffs(q: int, n_terms: int = 60) -> np.ndarray:
    # c_k = (-1)^k / (k! (k+2q+1)!)
    k = np.arange(n_terms)
    lg = special.gammaln(k + 1) + special.gammaln(k + 2 * q + 2)
    return np.where(k % 2 == 0, 1.0, -1.0) * np.exp(-lg)


def bessel_kernel(s, t, q: int = 0):
    """``J_{2q+1}(2 sqrt(st))/sqrt(st)``, an entire function of ``x = st``.

    Uses ``x^q sum_k (-x)^k/(k!(k+2q+1)!)`` for ``x <= 30`` and scipy's ``jv``
    above. At ``x = 0`` the value is 1 for ``q = 0`` and 0 otherwise.
    Broadcasts over ``s`` and ``t``.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    x = np.multiply(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    if np.any(x < 0):
        raise ValueError("s and t must be non-negative")
    out = np.empty_like(x)
    small = x <= SERIES_CROSSOVER
    if np.any(small):
        xs = x[small]
        acc = np.zeros_like(xs)
        for c in _kernel_series_coeffs(q)[::-1]:
            acc = acc * xs + c
        out[small] = acc * xs**q
    big = ~small
    if np.any(big):
        u = np.sqrt(x[big])
        out[big] = special.jv(2 * q + 1, 2 * u) / u
    return out[()] if out.ndim == 0 else out


def kernel_matrix(s, t, q: int = 0) -> np.ndarray:
    """``bessel_kernel(s_i, t_j, q)`` as a matrix."""
    return bessel_kernel(np.asarray(s)[:, None], np.asarray(t)[None, :], q)


def lerch_phi(z, a: float, b, n_terms: int = 2000) -> complex:
    """``Phi(z, a, b) = sum_{n>=0} z^n/(b+n)^a`` by direct summation.

    For ``|z| < 1`` the omitted tail is below ``|z|^N (b+N)^{-a}/(1-|z|)``. On
    ``|z| = 1`` the sum needs ``a > 1``; at ``z = 1`` the tail is added via
    Euler-Maclaurin, otherwise it is left out and is at most ``N^{1-a}/(a-1)``.
    """
    z = complex(z)
    r = abs(z)
    if r > 1:
        raise ValueError("Lerch series diverges for |z| > 1")
    if r == 1 and not a > 1:
        raise ValueError("on |z| = 1 the Lerch series needs a > 1")
    if np.real(b) <= 0 and np.imag(b) == 0:
        raise ValueError("b must not be a non-positive real")
    if z == 0:
        return complex(b ** (-a))
    n = np.arange(n_terms)
    terms = z**n / (b + n) ** a
    val = complex(np.sum(terms))
    if z == 1:
        B = b + n_terms
        # sum_{n>=N} f(n) = int_N^inf f + f(N)/2 - f'(N)/12 + f'''(N)/720
        val += (B ** (1 - a) / (a - 1) + B ** (-a) / 2 + a * B ** (-a - 1) / 12
                - a * (a + 1) * (a + 2) * B ** (-a - 3) / 720)
    return val


def lerch_tail_bound(z, a: float, b: float, n_terms: int = 2000) -> float:
    r = abs(complex(z))
    if r < 1:
        return r**n_terms * (b + n_terms) ** (-a) / (1 - r)
    if complex(z) == 1:
        return a * (a + 1) * (a + 2) * (a + 3) * (a + 4) * (b + n_terms) ** (-a - 5) / 30240
    return (b + n_terms - 1) ** (1 - a) / (a - 1)


# ---------------------------------------------------------------------------
# Hankel transform
# ---------------------------------------------------------------------------

DECAY_TOL = 1e-8


def _check_decay(vals: np.ndarray, nodes: np.ndarray, weights: np.ndarray):
    scale = np.max(np.abs(vals)) if len(vals) else 0.0
    if scale == 0:
        return
    live = weights > 0
    far = live & (nodes >= 0.9 * np.max(nodes[live]))
    if np.max(np.abs(vals[far])) > DECAY_TOL * scale:
        raise ValueError(
            "input does not decay inside the rule's range; the Hankel integral "
            "would only converge conditionally (regularize with exp(-eps s))"
        )


def hankel_transform(psi, rule: QuadratureRule, at=None) -> np.ndarray:
    """``(J psi)(t) = int_0^inf J_1(2 sqrt(st)) sqrt(t/s) psi(s) ds``.

    ``psi`` is a callable or its values at the rule nodes; ``at`` defaults to
    the rule nodes. The rule must be a Lebesgue rule.
    """
    if rule.measure != "lebesgue":
        raise ValueError("the Hankel transform needs a rule for plain Lebesgue measure")
    s, w = rule.nodes, rule.weights
    vals = np.asarray(psi(s) if callable(psi) else psi)
    if vals.shape != s.shape:
        raise ValueError("psi samples do not match the rule order")
    _check_decay(vals, s, w)
    t = s if at is None else np.asarray(at, dtype=float)
    # J_1(2 sqrt(st)) sqrt(t/s) = t * bessel_kernel(s, t, 0)
    K = kernel_matrix(t, s, 0) * t[:, None]
    return K @ (w * vals)
