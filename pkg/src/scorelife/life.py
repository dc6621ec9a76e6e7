"""Exact encoding of action sequences as base-M digit strings in [0, 1).

A life value is a finite digit string ``d_0 d_1 ...`` in a base M that is a
power of two; its real projection is ``sum_i d_i * M**(-i-1)``.  Digit
strings are kept exact so that shift/compose round trips and prefix algebra
hold with no floating-point loss; the float projection is computed on
demand.
"""

from __future__ import annotations

import warnings
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .errors import BaseMismatchError, DigitPaddingWarning, EncodingError

DEFAULT_DEPTH = 64


class ActionCode(NamedTuple):
    """An action's integer code together with the action-set cardinality."""

    index: int
    base: int


def _check_base(base: int) -> int:
    if base < 2 or base & (base - 1):
        raise EncodingError(f"action-set cardinality must be a power of 2, got {base}")
    return base


def _norm_codes(codes: Iterable[int | ActionCode], base: int) -> tuple[int, ...]:
    out = []
    for c in codes:
        if isinstance(c, ActionCode):
            if c.base != base:
                raise BaseMismatchError(f"action code has base {c.base}, expected {base}")
            c = c.index
        c = int(c)
        if not 0 <= c < base:
            raise EncodingError(f"action code {c} outside 0..{base - 1}")
        out.append(c)
    return tuple(out)


class LifeValue:
    """Finite base-M digit string, most significant digit first."""

    __slots__ = ("digits", "base")

    def __init__(self, digits: Sequence[int], base: int = 2):
        _check_base(base)
        self.digits = _norm_codes(digits, base)
        self.base = base

    @classmethod
    def zero(cls, base: int = 2) -> "LifeValue":
        return cls((), base)

    @classmethod
    def all_max(cls, base: int = 2, depth: int = DEFAULT_DEPTH) -> "LifeValue":
        """The depth-limited stand-in for the supremum sequence (M-1, M-1, ...)."""
        return cls((base - 1,) * depth, base)

    @classmethod
    def from_float(cls, x: float, base: int = 2, depth: int = DEFAULT_DEPTH) -> "LifeValue":
        """Leading ``depth`` base-M digits of a real in [0, 1).

        Exact for every float (floats are dyadic); digits beyond the float's
        precision come out zero.
        """
        if not 0.0 <= x < 1.0:
            raise EncodingError(f"life value {x} outside [0, 1)")
        digits = []
        for _ in range(depth):
            x *= base
            d = int(x)
            digits.append(d)
            x -= d
        return cls(digits, base)

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def value(self) -> float:
        """Real projection sum d_i * M**(-i-1), evaluated by Horner."""
        v = 0.0
        for d in reversed(self.digits):
            v = (v + d) / self.base
        return v

    def as_fraction(self) -> Fraction:
        """Exact dyadic-rational projection."""
        num = 0
        for d in self.digits:
            num = num * self.base + d
        return Fraction(num, self.base ** len(self.digits)) if self.digits else Fraction(0)

    def pad(self, depth: int) -> "LifeValue":
        """Extend with trailing zeros to at least ``depth`` digits."""
        if len(self.digits) >= depth:
            return self
        return LifeValue(self.digits + (0,) * (depth - len(self.digits)), self.base)

    # Value semantics: trailing zeros do not change the encoded real.
    def _key(self):
        d = self.digits
        n = len(d)
        while n and d[n - 1] == 0:
            n -= 1
        return (self.base, d[:n])

    def __eq__(self, other) -> bool:
        return isinstance(other, LifeValue) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"LifeValue({list(self.digits)}, base={self.base})"

    def to_digit_str(self) -> str:
        """CSV form, e.g. ``0.101`` (base-M digits after the point)."""
        return "0." + "".join(str(d) for d in self.digits)

    @classmethod
    def from_digit_str(cls, s: str, base: int = 2) -> "LifeValue":
        body = s.strip()
        if body.startswith("0."):
            body = body[2:]
        elif body.startswith("."):
            body = body[1:]
        return cls(tuple(int(ch) for ch in body), base)

    def to_json_obj(self) -> dict:
        return {"M": self.base, "digits": list(self.digits)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LifeValue":
        return cls(obj["digits"], obj["M"])


def encode(codes: Sequence[int | ActionCode], base: int = 2) -> LifeValue:
    """Map an action-code sequence to its life value (digit i = code of u_i)."""
    return LifeValue(_norm_codes(codes, _check_base(base)), base)


def prefix_phase(codes: Sequence[int | ActionCode], base: int = 2) -> LifeValue:
    """Life value of a finite prefix; the phase term of the two-state transform."""
    return encode(codes, base)


def decode_prefix(l: LifeValue, n: int, pad: int | None = 0) -> list[int]:
    """First ``n`` digits of ``l`` as action codes.

    Missing digits are filled with ``pad`` (default 0, with a warning); pass
    ``pad=None`` to make over-reading an error instead.
    """
    if n < 0:
        raise ValueError("prefix length must be >= 0")
    if n <= l.depth:
        return list(l.digits[:n])
    if pad is None:
        raise EncodingError(f"requested {n} digits but only {l.depth} stored")
    warnings.warn(
        f"padding {n - l.depth} missing digits with {pad}", DigitPaddingWarning, stacklevel=2
    )
    return list(l.digits) + [pad] * (n - l.depth)


def shift(l: LifeValue) -> tuple[int, LifeValue]:
    """Drop the leading digit: returns (head, tail) with value(tail) = frac(M*l)."""
    if not l.digits:
        return 0, l
    return l.digits[0], LifeValue(l.digits[1:], l.base)


def compose(head: int | ActionCode, tail: LifeValue) -> LifeValue:
    """Prepend a digit; exact inverse of :func:`shift`."""
    (h,) = _norm_codes([head], tail.base)
    return LifeValue((h,) + tail.digits, tail.base)


def concat(a: LifeValue, b: LifeValue) -> LifeValue:
    """Digit concatenation: value = value(a) + M**(-depth(a)) * value(b)."""
    if a.base != b.base:
        raise BaseMismatchError(f"bases differ: {a.base} vs {b.base}")
    return LifeValue(a.digits + b.digits, a.base)


def float_shift(x: float, base: int) -> tuple[int, float]:
    """Shift on a bare float: (floor(M*x), frac(M*x)). Exact for dyadic floats."""
    y = x * base
    d = int(y)
    return d, y - d
