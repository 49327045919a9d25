"""Farey map, Gauss map, continued fractions and Farey fractions.

Scalar functions accept ``float`` or :class:`fractions.Fraction`. With
fractions every operation is exact, which is what the tree and preimage
constructions rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

MAX_TREE_DEPTH = 20
CF_RESIDUAL_TOL = 1e-14


def _check_unit(x, name="x"):
    if not 0 <= x <= 1:
        raise ValueError(f"{name}={x!r} outside [0, 1]")


def farey_map(x):
    """``F(x) = x/(1-x)`` on ``[0, 1/2]`` and ``(1-x)/x`` on ``(1/2, 1]``."""
    _check_unit(x)
    if 2 * x <= 1:
        return x / (1 - x)
    return (1 - x) / x


def gauss_map(x):
    """``G(x) = {1/x}`` with ``G(0) = 0``."""
    _check_unit(x)
    if x == 0:
        return x * 0
    y = 1 / x
    return y - math.floor(y)


def inverse_branch_farey(branch: int, x):
    """``Psi_0(x) = x/(1+x)``, ``Psi_1(x) = 1/(1+x)``."""
    if branch == 0:
        return x / (1 + x)
    if branch == 1:
        return 1 / (1 + x)
    raise ValueError(f"branch must be 0 or 1, got {branch!r}")


def inverse_branch_gauss(k: int, x):
    """``Phi_k(x) = 1/(x+k)``."""
    if k < 1:
        raise ValueError("Gauss branch index must be >= 1")
    return 1 / (x + k)


def psi0_iterate(n: int, x):
    """Closed form of the ``n``-fold composition of ``Psi_0``: ``x/(1+nx)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return x / (1 + n * x)


def first_passage_time(x) -> int:
    """``tau(x) = floor(1/x)``: ``n`` on the cell ``(1/(n+1), 1/n]``."""
    if not 0 < x <= 1:
        raise ValueError(f"first passage time undefined at x={x!r}")
    return math.floor(1 / x)


# ---------------------------------------------------------------------------
# Continued fractions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CFWord:
    """Partial quotients ``k_1, ..., k_l``; ``periodic`` marks ``[k_1..k_l]`` repeated."""

    digits: tuple[int, ...]
    periodic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(k) for k in self.digits))
        if any(k < 1 for k in self.digits):
            raise ValueError("continued-fraction digits must be >= 1")
        if self.periodic and not self.digits:
            raise ValueError("a periodic word needs at least one digit")

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def shift(self, j: int = 1) -> "CFWord":
        """Cyclic shift for periodic words; drops leading digits otherwise."""
        if self.periodic:
            j %= len(self.digits)
            return CFWord(self.digits[j:] + self.digits[:j], True)
        return CFWord(self.digits[j:], False)


def cf_expand(x, max_terms: int = 64) -> CFWord:
    """Digits ``k_j = floor(1/G^{j-1}(x))`` until the remainder vanishes.

    For a ``Fraction`` the expansion is exact and complete. For floats the
    iteration stops once the fractional remainder is below ``1e-14`` (the
    number is then treated as rational); a remainder within ``1e-14`` of 1
    bumps the last digit instead.
    """
    _check_unit(x)
    exact = isinstance(x, Fraction)
    digits: list[int] = []
    if x == 0:
        return CFWord(())
    while len(digits) < max_terms:
        y = 1 / x
        k = math.floor(y)
        r = y - k
        if not exact and 1 - r < CF_RESIDUAL_TOL:
            digits.append(k + 1)
            break
        digits.append(k)
        if r == 0 or (not exact and r < CF_RESIDUAL_TOL):
            break
        x = r
    return CFWord(tuple(digits))


def cf_value(word: CFWord | Sequence[int], exact: bool = False):
    """Evaluate ``[k_1, ..., k_l]`` by backward recurrence."""
    digits = word.digits if isinstance(word, CFWord) else tuple(word)
    if not digits:
        raise ValueError("empty continued-fraction word")
    acc = Fraction(0) if exact else 0.0
    for k in reversed(digits):
        if k < 1:
            raise ValueError("continued-fraction digits must be >= 1")
        acc = 1 / (k + acc)
    return acc


def word_matrix(digits: Iterable[int]) -> tuple[int, int, int, int]:
    """Integer matrix ``[[a, b], [c, d]]`` of ``Phi_{k_1} o ... o Phi_{k_l}``."""
    a, b, c, d = 1, 0, 0, 1
    for k in digits:
        a, b, c, d = b, a + k * b, d, c + k * d
    return a, b, c, d


def _attracting_fixed_point(a: int, b: int, c: int, d: int) -> float:
    # positive root of c x^2 + (d - a) x - b = 0, picked to avoid cancellation
    dm = d - a
    disc = dm * dm + 4 * b * c
    try:
        root = math.sqrt(disc)
        if dm >= 0:
            x = 2 * b / (dm + root)
        else:
            x = (root - dm) / (2 * c)
    except OverflowError as exc:
        raise ArithmeticError(
            "periodic word too long for double precision: discriminant overflows"
        ) from exc
    if not 0.0 < x < 1.0 or not math.isfinite(x):
        raise ArithmeticError(f"fixed point {x!r} fell outside (0, 1)")
    return x


@dataclass(frozen=True)
class PeriodicOrbit:
    """Quadratic irrational with purely periodic expansion and its orbit data."""

    word: CFWord
    value: float
    weight: float
    farey_period: int

    @property
    def gauss_period(self) -> int:
        return len(self.word)

    def orbit(self) -> list[float]:
        """``x, G(x), ..., G^{l-1}(x)`` from the cyclic shifts (no float iteration)."""
        return [
            _attracting_fixed_point(*word_matrix(self.word.shift(j).digits))
            for j in range(len(self.word))
        ]

    def to_dict(self) -> dict:
        return {
            "word": list(self.word.digits),
            "value": self.value,
            "weight": self.weight,
            "farey_period": self.farey_period,
            "gauss_period": self.gauss_period,
        }


def periodic_cf_value(word: CFWord | Sequence[int]) -> PeriodicOrbit:
    """Solve the fixed-point quadratic of the word's Moebius map.

    The weight ``prod_j (G^j x)^2`` is the product over the cyclic shifts, each
    obtained from its own quadratic.
    """
    if not isinstance(word, CFWord):
        word = CFWord(tuple(word), periodic=True)
    if not word.digits:
        raise ValueError("empty periodic word")
    if not word.periodic:
        word = CFWord(word.digits, True)
    x = _attracting_fixed_point(*word_matrix(word.digits))
    weight = 1.0
    for j in range(len(word)):
        xs = x if j == 0 else _attracting_fixed_point(*word_matrix(word.shift(j).digits))
        weight *= xs * xs
    return PeriodicOrbit(word=word, value=x, weight=weight, farey_period=sum(word.digits))


# ---------------------------------------------------------------------------
# Farey fractions
# ---------------------------------------------------------------------------


def farey_level(n: int) -> list[Fraction]:
    """``F_n``: start from ``(0/1, 1/1)`` and insert mediants ``n`` times."""
    if n < 0:
        raise ValueError("level must be non-negative")
    if n > MAX_TREE_DEPTH:
        raise ValueError(f"level {n} exceeds the size guard {MAX_TREE_DEPTH}")
    # track numerators/denominators directly: mediants of reduced neighbours stay reduced
    seq = [(0, 1), (1, 1)]
    for _ in range(n):
        nxt = [seq[0]]
        for (a, b), (c, d) in zip(seq, seq[1:]):
            nxt.append((a + c, b + d))
            nxt.append((c, d))
        seq = nxt
    return [Fraction(a, b) for a, b in seq]


def preimages_of_zero(depth: int) -> set[Fraction]:
    """``union_{j<=depth} F^{-j}{0}``, pulled back exactly through both branches."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth > MAX_TREE_DEPTH + 1:
        raise ValueError(f"depth {depth} exceeds the size guard {MAX_TREE_DEPTH + 1}")
    seen = {Fraction(0)}
    frontier = {Fraction(0)}
    for _ in range(depth):
        frontier = {inverse_branch_farey(b, y) for y in frontier for b in (0, 1)} - seen
        seen |= frontier
    return seen


def format_fractions(fracs: Iterable[Fraction]) -> str:
    return ",".join(f"{f.numerator}/{f.denominator}" for f in fracs)
