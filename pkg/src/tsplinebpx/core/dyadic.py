"""Exact dyadic rationals for index-domain geometry.

Every coordinate of a bisection T-mesh is of the form ``k / 2**e``. Keeping the
pair ``(num, exp)`` in canonical form makes equality and hashing structural, so
mesh predicates never see floating-point ties.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, SupportsIndex

from ..exceptions import DyadicOverflowError

MAX_EXPONENT = 62


def _canonical(num: int, exp: int) -> tuple[int, int]:
    if exp < 0:
        return num << -exp, 0
    if num == 0:
        return 0, 0
    shift = min((num & -num).bit_length() - 1, exp)
    num >>= shift
    exp -= shift
    if exp > MAX_EXPONENT:
        raise DyadicOverflowError(f"dyadic exponent {exp} exceeds the cap {MAX_EXPONENT}")
    return num, exp


class DyadicIndex:
    """The value ``num / 2**exp`` with ``num`` odd or ``exp == 0``."""

    __slots__ = ("exp", "num")

    num: int
    exp: int

    def __init__(self, num: SupportsIndex, exp: SupportsIndex = 0) -> None:
        self.num, self.exp = _canonical(int(num), int(exp))

    @classmethod
    def of(cls, value: DyadicIndex | int | float | Fraction) -> DyadicIndex:
        """Convert ``value`` exactly; non-dyadic input raises ``ValueError``."""
        if isinstance(value, DyadicIndex):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        frac = Fraction(value)
        den = frac.denominator
        if den & (den - 1):
            raise ValueError(f"{value!r} is not a dyadic rational")
        return cls(frac.numerator, den.bit_length() - 1)

    # -- conversions -------------------------------------------------------

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self) -> float:
        return self.num / (1 << self.exp)

    def floor(self) -> int:
        return self.num >> self.exp

    def ceil(self) -> int:
        return -((-self.num) >> self.exp)

    def to_pair(self) -> list[int]:
        return [self.num, self.exp]

    # -- arithmetic --------------------------------------------------------

    def _aligned(self, other: DyadicIndex) -> tuple[int, int, int]:
        exp = max(self.exp, other.exp)
        return self.num << (exp - self.exp), other.num << (exp - other.exp), exp

    def __add__(self, other: object) -> DyadicIndex:
        if isinstance(other, int):
            other = DyadicIndex(other)
        if not isinstance(other, DyadicIndex):
            return NotImplemented
        a, b, exp = self._aligned(other)
        return DyadicIndex(a + b, exp)

    __radd__ = __add__

    def __sub__(self, other: object) -> DyadicIndex:
        if isinstance(other, int):
            other = DyadicIndex(other)
        if not isinstance(other, DyadicIndex):
            return NotImplemented
        a, b, exp = self._aligned(other)
        return DyadicIndex(a - b, exp)

    def __rsub__(self, other: object) -> DyadicIndex:
        if not isinstance(other, int):
            return NotImplemented
        return DyadicIndex(other) - self

    def __mul__(self, other: object) -> DyadicIndex:
        if isinstance(other, int):
            return DyadicIndex(self.num * other, self.exp)
        if not isinstance(other, DyadicIndex):
            return NotImplemented
        return DyadicIndex(self.num * other.num, self.exp + other.exp)

    __rmul__ = __mul__

    def __neg__(self) -> DyadicIndex:
        return DyadicIndex(-self.num, self.exp)

    def __abs__(self) -> DyadicIndex:
        return self if self.num >= 0 else -self

    def scaled(self, power: int) -> DyadicIndex:
        """Return ``self * 2**power``."""
        return DyadicIndex(self.num, self.exp - power)

    def half(self) -> DyadicIndex:
        return DyadicIndex(self.num, self.exp + 1)

    # -- comparison --------------------------------------------------------

    def _cmp(self, other: object) -> int | None:
        if isinstance(other, int):
            other = DyadicIndex(other)
        if not isinstance(other, DyadicIndex):
            return None
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DyadicIndex):
            return self.num == other.num and self.exp == other.exp
        if isinstance(other, int):
            return self.exp == 0 and self.num == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.num) if self.exp == 0 else hash((self.num, self.exp))

    def __lt__(self, other: object) -> bool:
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other: object) -> bool:
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other: object) -> bool:
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other: object) -> bool:
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __repr__(self) -> str:
        return f"DyadicIndex({self})"

    def __str__(self) -> str:
        return str(self.num) if self.exp == 0 else f"{self.num}/{1 << self.exp}"


Number = DyadicIndex | int


def dy(value: DyadicIndex | int | float | Fraction) -> DyadicIndex:
    """Shorthand for :meth:`DyadicIndex.of`."""
    return DyadicIndex.of(value)


class IndexVec2(NamedTuple):
    """A point of the index domain."""

    x: DyadicIndex
    y: DyadicIndex

    @classmethod
    def of(cls, x: DyadicIndex | int | float | Fraction, y: DyadicIndex | int | float | Fraction):
        return cls(dy(x), dy(y))


class IndexRect(NamedTuple):
    """Closed index-domain rectangle ``[lo.x, hi.x] x [lo.y, hi.y]``.

    Tuple ordering is lexicographic on ``(lo.x, lo.y, ...)``, which is the
    deterministic order used throughout the mesh code.
    """

    lo: IndexVec2
    hi: IndexVec2

    @classmethod
    def of(cls, x0: Number, y0: Number, x1: Number, y1: Number) -> IndexRect:
        rect = cls(IndexVec2(dy(x0), dy(y0)), IndexVec2(dy(x1), dy(y1)))
        if not (rect.lo.x < rect.hi.x and rect.lo.y < rect.hi.y):
            raise ValueError(f"degenerate index rectangle {rect}")
        return rect

    @property
    def width(self) -> DyadicIndex:
        return self.hi.x - self.lo.x

    @property
    def height(self) -> DyadicIndex:
        return self.hi.y - self.lo.y

    @property
    def midpoint(self) -> IndexVec2:
        return IndexVec2(midpoint(self.lo.x, self.hi.x), midpoint(self.lo.y, self.hi.y))

    def contains(self, other: IndexRect) -> bool:
        return (
            self.lo.x <= other.lo.x
            and other.hi.x <= self.hi.x
            and self.lo.y <= other.lo.y
            and other.hi.y <= self.hi.y
        )

    def overlaps(self, other: IndexRect) -> bool:
        """Open interiors intersect."""
        return (
            self.lo.x < other.hi.x
            and other.lo.x < self.hi.x
            and self.lo.y < other.hi.y
            and other.lo.y < self.hi.y
        )

    def touches(self, other: IndexRect) -> bool:
        """Closed rectangles intersect."""
        return (
            self.lo.x <= other.hi.x
            and other.lo.x <= self.hi.x
            and self.lo.y <= other.hi.y
            and other.lo.y <= self.hi.y
        )

    def area(self) -> DyadicIndex:
        return self.width * self.height

    def as_floats(self) -> tuple[float, float, float, float]:
        return float(self.lo.x), float(self.lo.y), float(self.hi.x), float(self.hi.y)

    def __str__(self) -> str:
        return f"[{self.lo.x}, {self.hi.x}]x[{self.lo.y}, {self.hi.y}]"


def midpoint(a: Number, b: Number) -> DyadicIndex:
    """Exact mean ``(a + b) / 2`` in canonical form."""
    return (dy(a) + dy(b)).half()


def componentwise_dist(x: IndexVec2, y: IndexVec2) -> tuple[DyadicIndex, DyadicIndex]:
    return abs(x.x - y.x), abs(x.y - y.y)


def translate_point(x: IndexVec2, p: tuple[int, int], n: tuple[int, int]) -> IndexVec2:
    """Clamp each coordinate of ``x`` into ``[p_d, n_d]``."""
    coords = []
    for value, lo, hi in zip(x, p, n, strict=True):
        if value < lo:
            coords.append(DyadicIndex(lo))
        elif value > hi:
            coords.append(DyadicIndex(hi))
        else:
            coords.append(value)
    return IndexVec2(*coords)


def dyadic_grid(lo: Number, hi: Number, level: int) -> list[DyadicIndex]:
    """All points of ``I^level`` in ``[lo, hi]``."""
    step = DyadicIndex(1, level)
    start = (dy(lo) * (1 << level)).ceil()
    stop = (dy(hi) * (1 << level)).floor()
    return [step * k for k in range(start, stop + 1)]
