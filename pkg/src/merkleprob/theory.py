"""Closed-form root-collision and birthday probabilities.

``p = 2**-m`` throughout. The root-collision probability for a path of
``k`` siblings is

    P(m, k) = p + (1 - p) * (1 - (1 - p)**k)

Float evaluation goes through ``log1p``/``expm1`` so it stays accurate when
``p`` is far below machine epsilon (every m > 53).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError

MAX_K = 2**256
ORACLE_MAX_M = 24
ORACLE_MAX_K = 4096

# Above this many factors the no-collision product is taken in log space.
_DIRECT_PRODUCT_LIMIT = 100_000


class Mode(str, enum.Enum):
    STANDARD = "standard"
    BIRTHDAY = "birthday"


class BirthdayForm(str, enum.Enum):
    S_SQUARED = "s2"
    S_TIMES_S_MINUS_1 = "s(s-1)"


@dataclass(frozen=True)
class CollisionQuery:
    m: int
    k: int
    mode: Mode = Mode.STANDARD

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        _check_mk(self.m, self.k)
        if self.mode is Mode.BIRTHDAY and self.m % 2:
            raise DomainError(f"birthday mode needs even m, got {self.m}")


@dataclass(frozen=True)
class CollisionEstimate:
    query: CollisionQuery
    exact: float
    approx: float


@dataclass(frozen=True)
class BirthdayQuery:
    s: int
    domain_size: int

    @classmethod
    def from_bits(cls, s: int, m: int) -> BirthdayQuery:
        return cls(s, 2**m)


def _is_int(x: object) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _check_m(m: int) -> None:
    if not _is_int(m) or not 1 <= m <= 256:
        raise DomainError(f"m must be an integer in [1, 256], got {m!r}")


def _check_mk(m: int, k: int) -> None:
    _check_m(m)
    if not _is_int(k) or not 0 <= k <= MAX_K:
        raise DomainError(f"k must be an integer in [0, 2**256], got {k!r}")


def collision_prob_exact(m: int, k: int) -> float:
    """Root-collision probability for hash length ``m`` and path length ``k``."""
    _check_mk(m, k)
    p = math.ldexp(1.0, -m)
    return p + (1.0 - p) * -math.expm1(k * math.log1p(-p))


def collision_prob_exact_rational(m: int, k: int) -> Fraction:
    """Exact rational value of the root-collision formula (test oracle).

    Follows the printed three-term form term by term, independently of the
    float path.
    """
    _check_mk(m, k)
    if m > ORACLE_MAX_M or k > ORACLE_MAX_K:
        raise DomainError(f"oracle limited to m <= {ORACLE_MAX_M}, k <= {ORACLE_MAX_K}")
    p = Fraction(1, 2**m)
    return p + (1 - p) * (1 - (1 - p) ** k)


def collision_prob_approx(m: int, k: int) -> float:
    """Exponential approximation ``p + e**-p - e**-((k+1)p)``."""
    _check_mk(m, k)
    p = math.ldexp(1.0, -m)
    # e^-p - e^-(k+1)p == e^-p * (1 - e^-kp)
    return p + math.exp(-p) * -math.expm1(-k * p)


def collision_prob_birthday_mode(m: int, k: int, approx: bool = False) -> float:
    """Collision probability when the attacker also picks the root (``m`` halved)."""
    _check_mk(m, k)
    if m % 2:
        raise DomainError(f"birthday mode needs even m, got {m}")
    if approx:
        return collision_prob_approx(m // 2, k)
    return collision_prob_exact(m // 2, k)


def estimate(query: CollisionQuery) -> CollisionEstimate:
    m = query.m // 2 if query.mode is Mode.BIRTHDAY else query.m
    return CollisionEstimate(query, collision_prob_exact(m, query.k), collision_prob_approx(m, query.k))


def birthday_no_collision(s: int, domain_size: int) -> float:
    """Probability that ``s`` uniform draws from ``domain_size`` values are all distinct."""
    if not _is_int(s) or s < 0:
        raise DomainError(f"s must be a non-negative integer, got {s!r}")
    if not _is_int(domain_size) or domain_size < 1:
        raise DomainError(f"domain_size must be a positive integer, got {domain_size!r}")
    if s > domain_size:
        return 0.0
    if s <= 1:
        return 1.0
    if s <= _DIRECT_PRODUCT_LIMIT:
        return math.prod((domain_size - i) / domain_size for i in range(1, s))
    # log(D! / ((D-s)! D^s)); lgamma of huge arguments needs extra digits.
    digits = len(str(domain_size)) + 30
    with mpmath.workdps(digits):
        log_p = (
            mpmath.loggamma(domain_size + 1)
            - mpmath.loggamma(domain_size - s + 1)
            - s * mpmath.log(domain_size)
        )
        return float(mpmath.exp(log_p))


def birthday_collision(s: int, domain_size: int) -> float:
    """Complement of :func:`birthday_no_collision`."""
    return 1.0 - birthday_no_collision(s, domain_size)


def birthday_collision_approx(s: int, m: int, form: BirthdayForm = BirthdayForm.S_SQUARED) -> float:
    if not _is_int(s) or s < 0:
        raise DomainError(f"s must be a non-negative integer, got {s!r}")
    _check_m(m)
    form = BirthdayForm(form)
    pairs = s * s if form is BirthdayForm.S_SQUARED else s * (s - 1)
    return -math.expm1(-pairs / (2.0 * 2.0**m))


def birthday_bound(p: float, m: int) -> float:
    """Sample count at which a collision has probability ``p`` (real, unrounded)."""
    _check_m(m)
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie strictly between 0 and 1, got {p!r}")
    return math.sqrt(-2.0 * 2.0**m * math.log1p(-p))
