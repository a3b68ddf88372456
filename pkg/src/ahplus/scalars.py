"""Exact scalars in the real radical tower over Q(sqrt 17).

Every value is a finite sum ``sum c * sqrt(q) * sqrt(sqrt(Q))`` where ``c`` lies in
Q(sqrt17) and ``q``, ``Q`` are stored representatives of square classes of
positive elements of Q(sqrt17).  Square roots of representatives of distinct
classes are linearly independent (Kummer theory), and so are the fourth roots
one level up, so two scalars are equal exactly when their term maps agree.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .qsqrt17 import D, ONE, ZERO, QSqrt17

__all__ = [
    "Scalar",
    "SquareClass",
    "ScalarError",
    "NegativeRadicand",
    "REGISTRY",
    "reduce_square_class",
    "certified_sign",
    "set_precision",
    "beta",
    "sqrt",
    "NEGATIVE",
    "POSITIVE",
]

NEGATIVE, POSITIVE = -1, 1

DEFAULT_DIGITS = 64


class ScalarError(ArithmeticError):
    pass


class NegativeRadicand(ScalarError):
    pass


@dataclass(frozen=True)
class SquareClass:
    """A stored representative of a class in Q(sqrt17)^+ / squares."""

    index: int
    radicand: QSqrt17
    canonical: bool = True


_SMALL_PRIMES = []


def _primes(limit: int = 2000) -> list[int]:
    if not _SMALL_PRIMES:
        sieve = bytearray([1]) * (limit + 1)
        for p in range(2, limit + 1):
            if sieve[p]:
                _SMALL_PRIMES.append(p)
                sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return _SMALL_PRIMES


def _square_part(n: int) -> tuple[int, int]:
    """Split ``n > 0`` as ``s*s*t``; ``t`` is squarefree up to the trial bound."""
    s = 1
    for p in _primes():
        pp = p * p
        if pp > n:
            break
        while n % pp == 0:
            n //= pp
            s *= p
    r = isqrt(n)
    if r * r == n:
        return s * r, 1
    return s, n


class SquareClassRegistry:
    """Session registry of square-class representatives.

    The first reduced radicand seen in a class becomes its representative.
    Insertion is guarded, so concurrent reductions of one radicand agree.
    """

    def __init__(self, seed=()):
        self._lock = threading.RLock()
        self.classes: list[SquareClass] = [SquareClass(0, ONE)]
        self._cache: dict[QSqrt17, tuple[int, QSqrt17]] = {ONE: (0, ONE)}
        self._product: dict[tuple[int, int], tuple[int, QSqrt17]] = {}
        for q in seed:
            self.reduce(q)

    def __len__(self) -> int:
        return len(self.classes)

    def __getitem__(self, index: int) -> SquareClass:
        return self.classes[index]

    def reduce(self, q: QSqrt17) -> tuple[int, QSqrt17]:
        """Return ``(index, m)`` with ``q == m**2 * radicand`` and ``m > 0``."""
        hit = self._cache.get(q)
        if hit is not None:
            return hit
        if q.sign() <= 0:
            raise NegativeRadicand(f"radicand {q.serialize()} is not positive")
        with self._lock:
            hit = self._cache.get(q)
            if hit is not None:
                return hit
            content, p, r = q.primitive()
            # q = content * (p + r sqrt17); pull the rational square out of content
            num_s, num_t = _square_part(content.numerator * content.denominator)
            mult = QSqrt17(Fraction(num_s, content.denominator))
            y = QSqrt17(num_t * p, num_t * r)
            root = y.sqrt()
            if root is not None:
                result = (0, mult * root)
            else:
                result = None
                for cls in self.classes[1:]:
                    rep = cls.radicand
                    ratio = y * rep.conj() / rep.norm()
                    root = ratio.sqrt()
                    if root is not None:
                        result = (cls.index, mult * root)
                        break
                if result is None:
                    cls = SquareClass(len(self.classes), y)
                    self.classes.append(cls)
                    self._cache[y] = (cls.index, ONE)
                    result = (cls.index, mult)
            self._cache[q] = result
            return result

    def product(self, i: int, j: int) -> tuple[int, QSqrt17]:
        """Reduce the product of two representatives: ``(k, m)`` with r_i r_j = m^2 r_k."""
        if i == 0:
            return j, ONE
        if j == 0:
            return i, ONE
        key = (i, j) if i <= j else (j, i)
        hit = self._product.get(key)
        if hit is None:
            hit = self.reduce(self.classes[i].radicand * self.classes[j].radicand)
            self._product[key] = hit
        return hit


def _seed_radicands():
    yield QSqrt17(2)
    for n in range(-1, 6):
        yield D - n


REGISTRY = SquareClassRegistry(_seed_radicands())


def reduce_square_class(q) -> tuple[SquareClass, QSqrt17]:
    """Canonical square class of a positive element of Q(sqrt17) and its multiplier."""
    idx, m = REGISTRY.reduce(QSqrt17.coerce(q))
    return REGISTRY[idx], m


# ---------------------------------------------------------------------------
# term-key algebra.  A key (q, Q) stands for sqrt(r_q) * sqrt(sqrt(r_Q)).

_KEY_MUL: dict[tuple, tuple] = {}


def _key_mul(k1: tuple[int, int], k2: tuple[int, int]) -> tuple[tuple[int, int], QSqrt17]:
    hit = _KEY_MUL.get((k1, k2))
    if hit is not None:
        return hit
    reg = REGISTRY
    q1, Q1 = k1
    q2, Q2 = k2
    # fourth-root part: 4rt(r_Q1 r_Q2) = sqrt(m) 4rt(r_Q3)
    Q3, m = reg.product(Q1, Q2)
    # square-root part sqrt(r_q1 r_q2 m)
    q12, m12 = reg.product(q1, q2)
    if m == ONE:
        q3, mult = q12, m12
    else:
        q3, m3 = reg.reduce(reg[q12].radicand * m)
        mult = m12 * m3
    hit = ((q3, Q3), mult)
    _KEY_MUL[(k1, k2)] = hit
    return hit


_UNIT = (0, 0)


class Scalar:
    """An exact element of the radical tower in canonical form (immutable)."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, int], QSqrt17] = terms if terms is not None else {}
        self._hash = None

    # -- construction -----------------------------------------------------
    @classmethod
    def coerce(cls, x) -> Scalar:
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls({_UNIT: QSqrt17(x)} if x else {})
        if isinstance(x, QSqrt17):
            return cls({_UNIT: x} if x else {})
        if isinstance(x, str):
            from .expr import parse_scalar

            return parse_scalar(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")

    @classmethod
    def sqrt_of(cls, q) -> Scalar:
        """Square root of a nonnegative element of Q(sqrt17)."""
        q = QSqrt17.coerce(q)
        if not q:
            return ZERO_S
        if q.sign() < 0:
            raise NegativeRadicand(f"sqrt of negative number {q.serialize()}")
        idx, m = REGISTRY.reduce(q)
        return cls({(idx, 0): m})

    # -- basic protocol ---------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Scalar({self.serialize()!r})"

    def __str__(self) -> str:
        return self.serialize()

    def is_zero(self) -> bool:
        return not self.terms

    def in_base_field(self) -> bool:
        return all(k == _UNIT for k in self.terms)

    def base_value(self) -> QSqrt17:
        if not self.in_base_field():
            raise ValueError(f"{self.serialize()} is not in Q(sqrt17)")
        return self.terms.get(_UNIT, ZERO)

    def is_rational(self) -> bool:
        return self.in_base_field() and self.base_value().is_rational()

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other) -> Scalar:
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        terms = dict(self.terms)
        for k, c in other.terms.items():
            v = terms.get(k)
            if v is None:
                terms[k] = c
            else:
                v = v + c
                if v:
                    terms[k] = v
                else:
                    del terms[k]
        return Scalar(terms)

    __radd__ = __add__

    def __neg__(self) -> Scalar:
        return Scalar({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> Scalar:
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Scalar:
        return Scalar.coerce(other) - self

    def __mul__(self, other) -> Scalar:
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction, QSqrt17)):
                if not other:
                    return ZERO_S
                return Scalar({k: c * other for k, c in self.terms.items()})
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        if not self.terms or not other.terms:
            return ZERO_S
        terms: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                if k1 == _UNIT:
                    k, c = k2, c1 * c2
                elif k2 == _UNIT:
                    k, c = k1, c1 * c2
                else:
                    k, m = _key_mul(k1, k2)
                    c = c1 * c2 * m
                v = terms.get(k)
                terms[k] = c if v is None else v + c
        return Scalar({k: c for k, c in terms.items() if c})

    __rmul__ = __mul__

    def inverse(self) -> Scalar:
        """Exact inverse by sign-flip conjugation of the radical generators."""
        if not self.terms:
            raise ZeroDivisionError("division by zero scalar")
        if len(self.terms) == 1:
            ((k, c),) = self.terms.items()
            return _monomial_inverse(k, c)
        acc = ONE_S
        z = self
        # eliminate fourth-root generators, then square-root generators
        for level in (1, 0):
            masks = _generator_masks({k[level] for k in z.terms})
            bits = max(masks.values(), default=0).bit_length()
            for bit in range(bits):
                flag = 1 << bit
                conj = Scalar(
                    {k: (-c if masks[k[level]] & flag else c) for k, c in z.terms.items()}
                )
                acc = acc * conj
                z = z * conj
                masks = _extend_masks(masks, {k[level] for k in z.terms})
        if not z.in_base_field():  # pragma: no cover - guarded by Kummer theory
            raise ScalarError("conjugation failed to reach the base field")
        return acc * z.base_value().inverse()

    def __truediv__(self, other) -> Scalar:
        if isinstance(other, (int, Fraction, QSqrt17)):
            if not other:
                raise ZeroDivisionError("division by zero")
            inv = Fraction(1, 1) / other if not isinstance(other, QSqrt17) else other.inverse()
            return self * inv
        other = Scalar.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other) -> Scalar:
        return Scalar.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> Scalar:
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE_S, self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def sqrt(self) -> Scalar:
        """Square root of a base-field element or of a single ``c*sqrt(q)`` term."""
        if not self.terms:
            return ZERO_S
        if self.in_base_field():
            return Scalar.sqrt_of(self.base_value())
        if len(self.terms) == 1:
            ((k, c),) = self.terms.items()
            q, Q = k
            if Q == 0:
                if c.sign() < 0:
                    raise NegativeRadicand(f"sqrt of negative number {self.serialize()}")
                idx, m = REGISTRY.reduce(c)
                key, mult = _key_mul((idx, 0), (0, q))
                return Scalar({key: m * mult})
        if self.sign() < 0:
            raise NegativeRadicand(f"sqrt of negative number {self.serialize()}")
        raise ScalarError(f"square root of {self.serialize()} lies outside the supported tower")

    # -- ordering ----------------------------------------------------------
    def sign(self, digits: int | None = None) -> int:
        return certified_sign(self, digits)

    def __lt__(self, other) -> bool:
        return (self - Scalar.coerce(other)).sign() < 0

    def __gt__(self, other) -> bool:
        return (self - Scalar.coerce(other)).sign() > 0

    def __le__(self, other) -> bool:
        return (self - Scalar.coerce(other)).sign() <= 0

    def __ge__(self, other) -> bool:
        return (self - Scalar.coerce(other)).sign() >= 0

    def __abs__(self) -> Scalar:
        return -self if self.sign() < 0 else self

    def __float__(self) -> float:
        lo, hi = _interval(self, 80)
        return float(Fraction(lo + hi, 2 << 80))

    # -- rendering -----------------------------------------------------------
    def serialize(self) -> str:
        """Render in the scalar expression grammar; ``parse_scalar`` inverts it."""
        if not self.terms:
            return "0"
        parts = sorted(_term_str(k, c) for k, c in self.terms.items())
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def decimal(self, digits: int = 50) -> str:
        """Decimal rendering correct to about ``digits`` significant places."""
        bits = int(digits * 3.33) + 40
        lo, hi = _interval(self, bits)
        mid = Fraction(lo + hi, 2 << bits)
        from decimal import Decimal, localcontext

        with localcontext() as ctx:
            ctx.prec = digits
            return str(Decimal(mid.numerator) / Decimal(mid.denominator))


def _bare(q: QSqrt17) -> str:
    s = q.serialize()
    return s[1:-1] if s.startswith("(") else s


def _term_str(k: tuple[int, int], c: QSqrt17) -> str:
    q, Q = k
    rad = []
    if q:
        rad.append(f"sqrt({_bare(REGISTRY[q].radicand)})")
    if Q:
        rad.append(f"sqrt(sqrt({_bare(REGISTRY[Q].radicand)}))")
    if not rad:
        return c.serialize()
    body = "*".join(rad)
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    return f"{c.serialize()}*{body}"


def _monomial_inverse(k: tuple[int, int], c: QSqrt17) -> Scalar:
    q, Q = k
    # 1/(c sqrt(r) 4rt(R)) = sqrt(r) sqrt(R) 4rt(R) / (c r R)
    out = Scalar({_UNIT: (c * REGISTRY[q].radicand * REGISTRY[Q].radicand).inverse()})
    if q:
        out = out * Scalar({(q, 0): ONE})
    if Q:
        out = out * Scalar({(Q, 0): ONE}) * Scalar({(0, Q): ONE})
    return out


def _generator_masks(classes) -> dict[int, int]:
    return _extend_masks({0: 0}, classes)


def _extend_masks(masks: dict[int, int], classes) -> dict[int, int]:
    """Close ``masks`` (class -> F2 exponent vector) under the classes given."""
    masks = dict(masks)
    nbits = max(masks.values(), default=0).bit_length()
    for c in sorted(classes):
        if c in masks:
            continue
        flag = 1 << nbits
        nbits += 1
        for s, m in list(masks.items()):
            t, _ = REGISTRY.product(s, c)
            masks[t] = m | flag
    return masks


# ---------------------------------------------------------------------------
# certified interval evaluation with scaled integers


def _iv_frac(x: Fraction, bits: int) -> tuple[int, int]:
    n = x.numerator << bits
    d = x.denominator
    return n // d, -((-n) // d)


def _iv_mul(x, y, bits):
    p = (x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1])
    return min(p) >> bits, -((-max(p)) >> bits)


def _iv_sqrt(x, bits):
    lo = max(x[0], 0)
    return isqrt(lo << bits), isqrt(x[1] << bits) + 1


_RAD_IV: dict[tuple[int, int, int], tuple[int, int]] = {}


def _iv_q(q: QSqrt17, bits: int):
    s = isqrt(17 << (2 * bits))
    a = _iv_frac(q.a, bits)
    if not q.b:
        return a
    b = _iv_frac(q.b, bits)
    bs = _iv_mul(b, (s, s + 1), bits)
    return a[0] + bs[0], a[1] + bs[1]


def _iv_class(idx: int, fourth: bool, bits: int):
    key = (idx, fourth, bits)
    hit = _RAD_IV.get(key)
    if hit is None:
        r = _iv_sqrt(_iv_q(REGISTRY[idx].radicand, bits), bits)
        if fourth:
            r = _iv_sqrt(r, bits)
        hit = r
        _RAD_IV[key] = hit
    return hit


def _interval(x: Scalar, bits: int) -> tuple[int, int]:
    lo = hi = 0
    for (q, Q), c in x.terms.items():
        t = _iv_q(c, bits)
        if q:
            t = _iv_mul(t, _iv_class(q, False, bits), bits)
        if Q:
            t = _iv_mul(t, _iv_class(Q, True, bits), bits)
        lo += t[0]
        hi += t[1]
    return lo, hi


def set_precision(digits: int) -> None:
    """Starting precision (decimal digits) of the sign intervals."""
    global DEFAULT_DIGITS
    if digits < 1:
        raise ValueError("precision must be positive")
    DEFAULT_DIGITS = digits


def certified_sign(x, digits: int | None = None) -> int:
    """Sign of ``x``: zero structurally, otherwise by refining an enclosing interval."""
    digits = DEFAULT_DIGITS if digits is None else digits
    x = Scalar.coerce(x)
    if not x.terms:
        return 0
    if x.in_base_field():
        return x.base_value().sign()
    bits = int(digits * 3.33) + 8
    while True:
        lo, hi = _interval(x, bits)
        if lo > 0:
            return POSITIVE
        if hi < 0:
            return NEGATIVE
        bits *= 2


ZERO_S = Scalar({})
ONE_S = Scalar({_UNIT: ONE})


def beta(n: int = 0) -> Scalar:
    """beta_n = sqrt(d - n) with d = (7 + sqrt 17)/2; defined whenever d - n > 0."""
    q = D - n
    if q.sign() <= 0:
        raise NegativeRadicand(f"beta_{n} needs d - {n} > 0")
    return Scalar.sqrt_of(q)


def sqrt(x) -> Scalar:
    return Scalar.coerce(x).sqrt()
