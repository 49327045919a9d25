"""Transfer operators of the Farey and Gauss maps and their Bessel-kernel realizations.

Pointwise actions (``apply_*``) work on callables. The discretized operators
live in ``L_2(m)`` coordinates at the nodes of a quadrature rule for ``m``:

* ``K_{z,q}``: ``(-1)^q z (1 - e^{-t})/(1 - z e^{-t}) int J_{2q+1}(2 sqrt(st))/sqrt(st) phi(s) dm(s)``
* ``M``: multiplication by ``e^{-t}``
* ``T = M + (1 - M) K``: the Farey operator acting on Borel coordinates.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg, special

from .measures import LOG2
from .specfun import QuadratureRule, build_rule, hankel_transform, kernel_matrix

QZ_CHUNK = 8192
RESIDUAL_SLACK = 1e-10


# ---------------------------------------------------------------------------
# Pointwise actions
# ---------------------------------------------------------------------------


def apply_P0(f: Callable, x):
    x = np.asarray(x)
    return f(x / (1 + x)) / (1 + x) ** 2


def apply_P1(f: Callable, x):
    x = np.asarray(x)
    return f(1 / (1 + x)) / (1 + x) ** 2


def apply_P(f: Callable, x):
    """Farey transfer operator: ``(x+1)^{-2} [f(x/(x+1)) + f(1/(x+1))]``."""
    return apply_P0(f, x) + apply_P1(f, x)


def apply_S(f: Callable, x):
    return f(np.asarray(x) + 1)


def apply_Ptilde(f: Callable, x):
    return apply_S(f, x) + apply_P1(f, x)


def qz_tail_sum(z, nmax: int) -> float:
    """Upper bound for ``sum_{n > nmax} |z|^n / n^2``."""
    r = abs(complex(z))
    if r > 1:
        raise ValueError("the series for Q_z diverges for |z| > 1")
    if r == 0:
        return 0.0
    bound = 1.0 / nmax
    if r < 1:
        bound = min(bound, r ** (nmax + 1) / ((nmax + 1) ** 2 * (1 - r)))
    return bound


def _sup_near_zero(f: Callable, nmax: int, x_min: float = 0.0) -> float:
    # tail terms only see f on (0, 1/(x+nmax+1)]
    u = np.linspace(0.0, 1.0 / (x_min + nmax + 1), 201)[1:]
    return float(np.max(np.abs(f(u))))


@dataclass
class SeriesValue:
    value: np.ndarray
    tail_bound: float


def _qz_partial(f: Callable, x: np.ndarray, z: complex, nmax: int) -> np.ndarray:
    acc = np.zeros(x.shape, dtype=complex)
    for n0 in range(1, nmax + 1, QZ_CHUNK):
        n = np.arange(n0, min(n0 + QZ_CHUNK, nmax + 1), dtype=float)
        y = x[..., None] + n
        zn = np.power(z, n) if z != 1 else 1.0
        acc += np.sum(zn * f(1 / y) / y**2, axis=-1)
    return acc


def _segment_integral(f: Callable, b: np.ndarray, n_gl: int = 8) -> np.ndarray:
    # int_0^b f(u) du along the straight segment, Gauss-Legendre
    xg, wg = special.roots_legendre(n_gl)
    u = b[..., None] * (xg + 1) / 2
    return (b / 2) * np.sum(wg * f(u), axis=-1)


def apply_Qz(f: Callable, x, z, nmax: int = 10_000, *, fsup: float | None = None,
             euler_maclaurin: bool = False) -> SeriesValue:
    """``sum_{n=1}^{nmax} z^n (x+n)^{-2} f(1/(x+n))`` with a bound on the tail.

    The bound is ``sup|f| * sum_{n>nmax} |z|^n/n^2``, with ``sup|f|`` sampled on
    the interval the omitted terms see unless ``fsup`` is given. With
    ``euler_maclaurin`` (only at ``z = 1``) the tail is added as
    ``int_0^{1/(x+nmax+1/2)} f``, the midpoint form of the Euler-Maclaurin
    formula, and ``tail_bound`` becomes an estimate of its remainder.
    """
    z = complex(z)
    if abs(z) > 1:
        raise ValueError("Q_z as a power series needs |z| <= 1; use the kernel route off the disk")
    x = np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)
    if z == 0:
        return SeriesValue(np.zeros(x.shape, dtype=complex), 0.0)
    xmin = float(np.min(np.real(x))) if x.size else 0.0
    sup = _sup_near_zero(f, nmax, max(xmin, 0.0)) if fsup is None else fsup
    val = _qz_partial(f, x, z, nmax)
    if euler_maclaurin:
        if z != 1:
            raise ValueError("the Euler-Maclaurin tail is implemented for z = 1 only")
        val = val + _segment_integral(f, 1 / (x + nmax + 0.5))
        return SeriesValue(val, sup / (6.0 * nmax**3))
    return SeriesValue(val, sup * qz_tail_sum(z, nmax))


@dataclass
class ResidualReport:
    name: str
    z: complex
    nmax: int
    max_residual: float
    tail_budget: float
    n_points: int
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.max_residual <= self.tail_budget + RESIDUAL_SLACK)

    def to_dict(self):
        d = asdict(self)
        d["z"] = [self.z.real, self.z.imag]
        return d


def verify_identity_first(z, f: Callable, grid, nmax: int = 100_000) -> ResidualReport:
    """``(1 - Q_z)(1 - z P_0) f`` against ``(1 - z P) f`` on ``grid``."""
    z = complex(z)
    grid = np.asarray(grid, dtype=float)

    def g(u):
        return f(u) - z * apply_P0(f, u)

    q = apply_Qz(g, grid, z, nmax)
    lhs = g(grid) - q.value
    rhs = f(grid) - z * apply_P(f, grid)
    res = float(np.max(np.abs(lhs - rhs)))
    return ResidualReport("first", z, nmax, res, q.tail_bound, len(grid))


def verify_identity_second(z, f: Callable, grid, nmax: int = 100_000) -> ResidualReport:
    """``(1 - z S)(1 - Q_z) f`` against ``(1 - z Ptilde) f``; ``f`` must live on ``(0, 2]``."""
    z = complex(z)
    grid = np.asarray(grid, dtype=float)
    q0 = apply_Qz(f, grid, z, nmax)
    q1 = apply_Qz(f, grid + 1, z, nmax)
    lhs = (f(grid) - q0.value) - z * (f(grid + 1) - q1.value)
    rhs = f(grid) - z * apply_Ptilde(f, grid)
    res = float(np.max(np.abs(lhs - rhs)))
    budget = q0.tail_bound + abs(z) * q1.tail_bound
    return ResidualReport("second", z, nmax, res, budget, len(grid))


# ---------------------------------------------------------------------------
# Discretized operators
# ---------------------------------------------------------------------------

KINDS = ("Kzq", "M", "T", "resolvent-factor")


@dataclass
class DiscretizedOperator:
    """Matrix in quadrature coordinates.

    When the operator is similar to a real symmetric matrix through a positive
    diagonal ``frame`` (``sym = diag(frame) @ matrix @ diag(1/frame)``) the
    symmetric form is kept in ``sym`` for the eigensolver.
    """

    matrix: np.ndarray
    z: complex
    q: int
    rule: QuadratureRule
    kind: str
    sym: np.ndarray | None = None
    frame: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.matrix.shape[0]


def _check_m_rule(rule: QuadratureRule, allowed=("m",)):
    if rule.measure not in allowed:
        raise ValueError(f"operator needs a rule over {allowed}, got {rule.measure!r}")


def on_cut(z) -> bool:
    z = complex(z)
    return z.imag == 0 and z.real > 1


def kzq_factor(z, q: int, t) -> np.ndarray:
    """``(-1)^q z (1 - e^{-t})/(1 - z e^{-t})``; exactly ``(-1)^q`` at ``z = 1``."""
    z = complex(z)
    sign = -1.0 if q % 2 else 1.0
    t = np.asarray(t, dtype=float)
    if z == 1:
        return np.full(t.shape, sign, dtype=complex)
    return sign * z * -np.expm1(-t) / (1 - z * np.exp(-t))


def _kzq(z: complex, q: int, rule: QuadratureRule) -> DiscretizedOperator:
    # no cut check: the conjecture scan deliberately evaluates z on the cut
    t, W = rule.nodes, rule.weights
    F = kzq_factor(z, q, t)
    ker = kernel_matrix(t, t, q)
    A = F[:, None] * ker * W[None, :]
    sym = frame = None
    if z.imag == 0:
        Fr = F.real
        if np.all(Fr == 0):
            sym, frame = np.zeros_like(ker), np.ones_like(t)
        elif np.all(Fr > 0) or np.all(Fr < 0):
            sgn = np.sign(Fr[0])
            d = np.sqrt(np.abs(Fr) * W)
            sym = sgn * d[:, None] * ker * d[None, :]
            frame = np.sqrt(W / np.abs(Fr))
        if np.all(np.abs(A.imag) == 0):
            A = A.real
    return DiscretizedOperator(A, z, q, rule, "Kzq", sym, frame)


def build_Kzq(z, q: int, rule: QuadratureRule) -> DiscretizedOperator:
    """Nystroem matrix of ``K_{z,q}``; rejects ``z`` on the cut ``(1, inf)``."""
    z = complex(z)
    if on_cut(z):
        raise ValueError(f"z={z.real} lies on the cut (1, inf)")
    if q not in (0, 1, 2):
        raise ValueError("q must be 0, 1 or 2")
    _check_m_rule(rule)
    return _kzq(z, q, rule)


def build_M(rule: QuadratureRule) -> DiscretizedOperator:
    d = np.exp(-rule.nodes)
    A = np.diag(d)
    return DiscretizedOperator(A, 1 + 0j, 0, rule, "M", A.copy(), np.ones_like(d))


def build_T(rule: QuadratureRule) -> DiscretizedOperator:
    """``T = M + (1 - M) K`` over ``m``, or ``M + Ktilde`` over ``m_tilde``."""
    _check_m_rule(rule, ("m", "m_tilde"))
    t, W = rule.nodes, rule.weights
    ker = kernel_matrix(t, t, 0)
    em = np.exp(-t)
    if rule.measure == "m":
        c = -np.expm1(-t)
    else:
        c = np.ones_like(t)
    A = np.diag(em) + c[:, None] * ker * W[None, :]
    d = np.sqrt(c * W)
    sym = np.diag(em) + d[:, None] * ker * d[None, :]
    return DiscretizedOperator(A, 1 + 0j, 0, rule, "T", sym, np.sqrt(W / c))


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    N: int
    z: complex
    q: int
    kind: str
    residuals: np.ndarray
    eigenvectors: np.ndarray | None = None

    def to_dict(self, top: int | None = None) -> dict:
        ev = self.eigenvalues if top is None else self.eigenvalues[:top]
        res = self.residuals if top is None else self.residuals[:top]
        return {
            "kind": self.kind,
            "N": self.N,
            "z": [self.z.real, self.z.imag],
            "q": self.q,
            "eigenvalues": [[float(np.real(e)), float(np.imag(e))] for e in ev],
            "residuals": [float(r) for r in res],
        }


def _normalize(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    V = V.astype(complex if np.iscomplexobj(V) else float)
    for j in range(V.shape[1]):
        v = V[:, j]
        nrm = math.sqrt(float(W @ np.abs(v) ** 2))
        if nrm > 0:
            v = v / nrm
        big = np.flatnonzero(np.abs(v) > 1e-8 * np.max(np.abs(v)))
        if len(big):
            p = v[big[0]]
            v = v * (np.conj(p) / abs(p))
        V[:, j] = v
    return V


def spectrum(op: DiscretizedOperator, vectors: bool = True) -> SpectrumResult:
    """All eigenvalues, sorted by decreasing modulus, with ``||Av - lambda v||``.

    Eigenvectors are normalized to unit discrete ``L_2`` norm of the rule's
    measure, phase fixed so the first significant entry is positive.
    """
    A = op.matrix
    try:
        if op.sym is not None:
            lam, U = linalg.eigh(op.sym)
            V = U / op.frame[:, None]
        else:
            lam, V = linalg.eig(A)
    except linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise ArithmeticError("eigensolver returned non-finite eigenvalues")
    order = np.lexsort((-np.real(lam), -np.abs(lam)))
    lam, V = lam[order], V[:, order]
    V = _normalize(V, np.abs(op.rule.weights))
    res = np.linalg.norm(A @ V - V * lam[None, :], axis=0)
    if np.all(np.imag(lam) == 0):
        lam = np.real(lam)
    return SpectrumResult(lam, op.N, op.z, op.q, op.kind, res, V if vectors else None)


def phi_e(t):
    """``(1 - e^{-t})/t``: Laplace coordinate of ``h log 2`` and Borel coordinate of ``e log 2``."""
    t = np.asarray(t, dtype=float)
    return -np.expm1(-t) / t


def cosine_similarity(u, v, W) -> float:
    """``|<u, v>| / (|u| |v|)`` in the discrete ``L_2`` of the weights ``W``."""
    num = abs(np.sum(W * np.conj(u) * v))
    return float(num / math.sqrt(float(np.sum(W * np.abs(u) ** 2)) * float(np.sum(W * np.abs(v) ** 2))))


# ---------------------------------------------------------------------------
# Transforms and checks
# ---------------------------------------------------------------------------


def laplace_transform(phi, rule: QuadratureRule, w) -> np.ndarray:
    """``L[phi](w) = int e^{-wt} phi(t) dm(t)`` by quadrature."""
    _check_m_rule(rule)
    t, W = rule.nodes, rule.weights
    vals = phi(t) if callable(phi) else np.asarray(phi)
    w = np.asarray(w)
    return np.exp(-np.multiply.outer(w, t)) @ (W * vals)


def nystrom_K(phi, rule: QuadratureRule, q: int = 0) -> Callable:
    """``t -> (K phi)(t)`` evaluated anywhere from the values of ``phi`` at the nodes."""
    s, W = rule.nodes, rule.weights
    vals = phi(s) if callable(phi) else np.asarray(phi)
    wv = W * vals

    def K(t):
        t = np.asarray(t, dtype=float)
        return kernel_matrix(t.ravel(), s, q).dot(wv).reshape(t.shape)

    return K


def _laplace_dt(g: Callable, p, n: int = 80) -> np.ndarray:
    # int_0^inf e^{-p t} g(t) dt for Re p > 0 by Gauss-Laguerre in x = (Re p) t
    x, wl = special.roots_laguerre(n)
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    out = np.empty(p.shape, dtype=complex)
    for i, pi in enumerate(p):
        a, b = pi.real, pi.imag
        if not a > 0:
            raise ValueError("Laplace integral needs Re p > 0")
        out[i] = np.sum(wl * np.exp(-1j * b * x / a) * g(x / a)) / a
    return out


def borel_transform(phi: Callable, w, n: int = 80) -> np.ndarray:
    """``B[phi](w) = w^{-2} int e^{-t/w} e^t phi(t) dm(t)`` for ``Re(1/w) > 0``."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))

    def g(t):
        return t * phi(t) / -np.expm1(-t)

    return _laplace_dt(g, 1 / w, n) / w**2


def in_disk_D1(w) -> np.ndarray:
    """``Re(1/w) > 1/2``, i.e. ``|w - 1| < 1``."""
    w = np.asarray(w, dtype=complex)
    return np.real(1 / w) > 0.5


def check_lemma_tricomi(phi: Callable, rule: QuadratureRule, w_grid, n_outer: int = 80) -> float:
    """``max |L[phi](w) - B[(1 - M) K phi](w)|`` over ``w_grid``."""
    w = np.atleast_1d(np.asarray(w_grid, dtype=complex))
    if not np.all(in_disk_D1(w)):
        raise ValueError("w_grid must lie in the disk |w - 1| < 1")
    lhs = laplace_transform(phi, rule, w)
    K = nystrom_K(phi, rule)

    def g(t):
        # e^t (1 - e^{-t}) dm(t)/dt = t
        return t * K(t)

    rhs = _laplace_dt(g, 1 / w, n_outer) / w**2
    return float(np.max(np.abs(lhs - rhs)))


def qz_route_difference(phi: Callable, z, w_points, rule: QuadratureRule,
                        nmax: int = 10_000) -> tuple[float, float]:
    """Compare the series for ``Q_z L[phi]`` with ``L[K_z phi]`` at ``w_points``.

    Returns ``(max difference, series tail bound)``. At ``z = 1`` the series
    tail is added by Euler-Maclaurin.
    """
    z = complex(z)
    w = np.atleast_1d(np.asarray(w_points, dtype=complex))

    def f(u):
        return laplace_transform(phi, rule, u)

    series = apply_Qz(f, w, z, nmax, euler_maclaurin=(z == 1))
    A = build_Kzq(z, 0, rule).matrix
    quad = laplace_transform(A @ phi(rule.nodes), rule, w)
    return float(np.max(np.abs(series.value - quad))), series.tail_bound


def disk_points(n: int = 20, radius: float = 0.8, center: complex = 1.0) -> np.ndarray:
    """``n`` points on two circles inside ``|w - center| < 1``."""
    n_out = n // 2
    n_in = n - n_out
    a1 = 2 * np.pi * (np.arange(n_out) + 0.5) / n_out
    a2 = 2 * np.pi * np.arange(n_in) / n_in
    return np.concatenate([center + radius * np.exp(1j * a1), center + radius / 2 * np.exp(1j * a2)])


def resolvent_apply(lam, phi, rule: QuadratureRule) -> np.ndarray:
    """``(1 - K_{1/lambda})^{-1} (lambda - M)^{-1} phi`` by a dense solve."""
    lam = complex(lam)
    if lam.imag == 0 and 0 <= lam.real <= 1:
        raise ValueError("lambda lies in [0, 1], the continuous spectrum")
    _check_m_rule(rule)
    t = rule.nodes
    vals = phi(t) if callable(phi) else np.asarray(phi)
    y = vals / (lam - np.exp(-t))
    A = _kzq(1 / lam, 0, rule).matrix
    B = np.eye(len(t)) - A
    if np.linalg.cond(B) > 1e13:
        raise ArithmeticError(f"1 - K_(1/lambda) is numerically singular at lambda={lam}")
    x = np.linalg.solve(B, y)
    return x.real if lam.imag == 0 and np.isrealobj(vals) else x


def conjecture_scan(lambdas, rule: QuadratureRule) -> list[dict]:
    """For each ``lambda``: distance from 1 to the spectrum of ``K_{1/lambda}``."""
    _check_m_rule(rule)
    rows = []
    for lam in lambdas:
        lam = complex(lam)
        if lam == 0:
            raise ValueError("lambda must be non-zero")
        op = _kzq(1 / lam, 0, rule)
        ev = linalg.eigvals(op.matrix)
        d = float(np.min(np.abs(ev - 1)))
        rows.append({"lambda": lam.real if lam.imag == 0 else [lam.real, lam.imag],
                     "min_distance": d})
    return rows


def hankel_selfreciprocal_residual(psi: Callable, mhat_rule: QuadratureRule,
                                   leb_rule: QuadratureRule) -> float:
    """``||J psi - psi||`` in ``L_2(m_hat)``; ``J psi`` by quadrature on ``leb_rule``."""
    if mhat_rule.measure != "m_hat":
        raise ValueError("norm rule must be over m_hat")
    t = mhat_rule.nodes
    r = hankel_transform(psi, leb_rule, at=t) - psi(t)
    return mhat_rule.norm(r)


@dataclass
class RegularizedResult:
    eps: list
    residuals: list
    extrapolated: float

    def decreasing(self) -> bool:
        r = self.residuals
        return all(b < a for a, b in zip(r, r[1:]))

    def to_dict(self):
        return asdict(self)


def regularized_selfreciprocity(eps=(1e-1, 1e-2, 1e-3), mhat_order: int = 30,
                                leb_order: int = 4096, decay: float = 40.0) -> RegularizedResult:
    """Residual of ``psi_eps = exp(-eps s)`` against self-reciprocity, for shrinking ``eps``.

    Each transform uses a sqrt-Legendre rule on ``[0, decay/eps]``. The last two
    residuals are extrapolated linearly in ``eps`` to ``eps = 0``.
    """
    eps = sorted(eps, reverse=True)
    mh = build_rule("m_hat", mhat_order)
    res = []
    for e in eps:
        leb = build_rule("lebesgue", leb_order, cutoff=decay / e)
        res.append(hankel_selfreciprocal_residual(lambda s, e=e: np.exp(-e * s), mh, leb))
    if len(eps) >= 2:
        e1, e2 = eps[-2], eps[-1]
        r1, r2 = res[-2], res[-1]
        extrap = r2 - e2 * (r1 - r2) / (e1 - e2)
    else:
        extrap = res[-1]
    return RegularizedResult(list(eps), res, float(extrap))


def functional_equation_residual(rule: QuadratureRule, w=None, which: int = 0) -> float:
    """Relative defect of ``w f(w) = f(1/w)/w`` for an eigenfunction ``f = B[phi]`` of ``T``.

    ``phi`` is extended off the nodes with the eigen-relation
    ``phi(t) = (1 - e^{-t}) (K phi)(t) / (lambda - e^{-t})``.
    """
    if w is None:
        w = np.linspace(0.5, 2.0, 31)
    w = np.asarray(w, dtype=float)
    sp = spectrum(build_T(rule))
    lam = sp.eigenvalues[which]
    v = sp.eigenvectors[:, which]
    K = nystrom_K(v, rule)

    def phi(t):
        return -np.expm1(-t) * K(t) / (lam - np.exp(-t))

    f = lambda u: borel_transform(phi, u)  # noqa: E731
    lhs = w * f(w)
    rhs = f(1 / w) / w
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)))


def density_e_borel_check(rule: QuadratureRule, w) -> float:
    """``max |B[phi_e](w) - e(w) log 2|``; a sanity check of the Borel quadrature."""
    w = np.asarray(w, dtype=float)
    return float(np.max(np.abs(borel_transform(phi_e, w) - 1 / w)))


__all__ = [
    "apply_P", "apply_P0", "apply_P1", "apply_S", "apply_Ptilde", "apply_Qz",
    "verify_identity_first", "verify_identity_second", "build_Kzq", "build_M",
    "build_T", "spectrum", "resolvent_apply", "conjecture_scan",
    "check_lemma_tricomi", "hankel_selfreciprocal_residual",
    "regularized_selfreciprocity", "functional_equation_residual",
    "qz_route_difference", "laplace_transform", "borel_transform", "nystrom_K",
    "DiscretizedOperator", "SpectrumResult", "ResidualReport", "phi_e",
    "cosine_similarity", "disk_points",
]
