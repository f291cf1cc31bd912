"""Outward-rounded interval arithmetic.

The scalar `Interval` type steps every computed bound to the adjacent
representable float, so the containment contract holds without touching
hardware rounding modes.  Vectorized helpers (used by the validation
bounds) realize the same contract through a-priori floating-point error
bounds on whole reductions, which is at least as conservative as per-op
stepping and keeps large matrix enclosures at BLAS speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Interval", "interval_arith", "IntervalVector"]

_INF = math.inf
_U = 2.0**-53  # double-precision unit roundoff
_TINY = 1e-300  # absorbs underflow in error terms


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


@dataclass(frozen=True)
class Interval:
    """Closed real interval [lo, hi] with finite IEEE-double endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(float(x), float(x))

    @classmethod
    def hull(cls, *values) -> "Interval":
        los, his = [], []
        for v in values:
            if isinstance(v, Interval):
                los.append(v.lo)
                his.append(v.hi)
            else:
                los.append(float(v))
                his.append(float(v))
        return cls(min(los), max(his))

    @staticmethod
    def _coerce(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval.point(x)

    # -- elementary operations, each bound stepped outward after computing --

    def __add__(self, other):
        o = self._coerce(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._coerce(other)
        return Interval(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(_down(min(products)), _up(max(products)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError("division by interval containing zero")
        quotients = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval(_down(min(quotients)), _up(max(quotients)))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def power(self, n: int) -> "Interval":
        if n < 0:
            raise ValueError("power expects a nonnegative integer exponent")
        if n == 0:
            return Interval(1.0, 1.0)
        result = self
        for _ in range(n - 1):
            result = result * self
        if n % 2 == 0 and self.lo < 0.0 < self.hi:
            result = Interval(0.0, result.hi)
        return result

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise ValueError("sqrt of interval with negative lower bound")
        return Interval(max(0.0, _down(math.sqrt(self.lo))), _up(math.sqrt(self.hi)))

    def mag(self) -> float:
        """Upper bound on |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        """Lower bound on |x| over the interval (0 if it contains 0)."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def mid(self) -> float:
        return self.lo + 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


def interval_arith(op: str, *args) -> Interval:
    """Dispatch elementary operations by name: add, sub, mul, div, abs-bound, power."""
    a = Interval._coerce(args[0])
    if op == "add":
        return a + args[1]
    if op == "sub":
        return a - args[1]
    if op == "mul":
        return a * args[1]
    if op == "div":
        return a / args[1]
    if op == "abs-bound":
        return Interval(a.mig(), a.mag())
    if op == "power":
        return a.power(int(args[1]))
    raise ValueError(f"unknown interval operation {op!r}")


# ---------------------------------------------------------------------------
# Vectorized rectangular intervals (lo/hi arrays).
# ---------------------------------------------------------------------------


class IntervalVector:
    """Arrays of real intervals with vectorized outward-rounded operations."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=float)
        hi = lo.copy() if hi is None else np.asarray(hi, dtype=float)
        if lo.shape != hi.shape:
            raise ValueError("lo/hi shape mismatch")
        if np.any(lo > hi) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("invalid interval bounds")
        self.lo = lo
        self.hi = hi

    @classmethod
    def zeros(cls, shape) -> "IntervalVector":
        z = np.zeros(shape)
        return cls(z, z.copy())

    @property
    def shape(self):
        return self.lo.shape

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx) -> "Interval | IntervalVector":
        lo, hi = self.lo[idx], self.hi[idx]
        if np.ndim(lo) == 0:
            return Interval(float(lo), float(hi))
        return IntervalVector(lo.copy(), hi.copy())

    def __add__(self, other):
        o = _as_ivec(other, self.shape)
        return IntervalVector(_vdown(self.lo + o.lo), _vup(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return IntervalVector(-self.hi.copy(), -self.lo.copy())

    def __sub__(self, other):
        o = _as_ivec(other, self.shape)
        return IntervalVector(_vdown(self.lo - o.hi), _vup(self.hi - o.lo))

    def __rsub__(self, other):
        return _as_ivec(other, self.shape) - self

    def __mul__(self, other):
        o = _as_ivec(other, np.broadcast_shapes(self.shape, np.shape(other)) if not isinstance(other, IntervalVector) else other.shape)
        p1 = self.lo * o.lo
        p2 = self.lo * o.hi
        p3 = self.hi * o.lo
        p4 = self.hi * o.hi
        lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
        hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        return IntervalVector(_vdown(lo), _vup(hi))

    __rmul__ = __mul__

    def scale(self, s: float) -> "IntervalVector":
        a, b = self.lo * s, self.hi * s
        return IntervalVector(_vdown(np.minimum(a, b)), _vup(np.maximum(a, b)))

    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def hull_with(self, other: "IntervalVector") -> "IntervalVector":
        return IntervalVector(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def sum(self) -> Interval:
        return Interval(float(_sum_down(self.lo)), float(_sum_up(self.hi)))

    @property
    def mid(self) -> np.ndarray:
        return self.lo + 0.5 * (self.hi - self.lo)

    @property
    def rad_upper(self) -> np.ndarray:
        """Upper bound on the distance from mid to either endpoint."""
        m = self.mid
        return _vup(np.maximum(self.hi - m, m - self.lo))


def _as_ivec(x, shape) -> IntervalVector:
    if isinstance(x, IntervalVector):
        return x
    if isinstance(x, Interval):
        lo = np.broadcast_to(x.lo, shape).astype(float)
        hi = np.broadcast_to(x.hi, shape).astype(float)
        return IntervalVector(lo.copy(), hi.copy())
    arr = np.broadcast_to(np.asarray(x, dtype=float), shape)
    return IntervalVector(arr.copy(), arr.copy())


def _vdown(x: np.ndarray) -> np.ndarray:
    return np.nextafter(x, -_INF)


def _vup(x: np.ndarray) -> np.ndarray:
    return np.nextafter(x, _INF)


def _sum_down(v: np.ndarray) -> float:
    """Lower bound on the exact sum of v (classical summation error bound)."""
    s = float(np.sum(v))
    bound = 2.0 * v.size * _U * float(np.sum(np.abs(v))) + _TINY
    return _down(s - bound)


def _sum_up(v: np.ndarray) -> float:
    s = float(np.sum(v))
    bound = 2.0 * v.size * _U * float(np.sum(np.abs(v))) + _TINY
    return _up(s + bound)


def iv_dot(a: IntervalVector, b: IntervalVector) -> Interval:
    """Rigorous interval dot product of two interval vectors."""
    prod = a * b
    return prod.sum()


def iv_weighted_abs_sum(v: IntervalVector, weights: np.ndarray) -> Interval:
    """Upper-bounding sum_i |v_i| w_i with nonnegative point weights."""
    mags = v.mag() * weights
    return Interval(0.0, _sum_up(mags))


# ---------------------------------------------------------------------------
# Complex rectangular interval vectors and midpoint-radius matrix enclosures.
# ---------------------------------------------------------------------------


class ComplexIntervalVector:
    """Rectangular complex intervals: independent real/imag interval parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: IntervalVector, im: IntervalVector):
        if re.shape != im.shape:
            raise ValueError("re/im shape mismatch")
        self.re = re
        self.im = im

    @classmethod
    def from_point(cls, z: np.ndarray) -> "ComplexIntervalVector":
        z = np.asarray(z, dtype=complex)
        return cls(IntervalVector(z.real.copy()), IntervalVector(z.imag.copy()))

    @classmethod
    def zeros(cls, shape) -> "ComplexIntervalVector":
        return cls(IntervalVector.zeros(shape), IntervalVector.zeros(shape))

    @property
    def shape(self):
        return self.re.shape

    def __add__(self, other: "ComplexIntervalVector"):
        return ComplexIntervalVector(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexIntervalVector"):
        return ComplexIntervalVector(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return ComplexIntervalVector(-self.re, -self.im)

    def __mul__(self, other: "ComplexIntervalVector"):
        re = self.re * other.re - self.im * other.im
        im = self.re * other.im + self.im * other.re
        return ComplexIntervalVector(re, im)

    def scale_complex(self, z: complex) -> "ComplexIntervalVector":
        re = self.re.scale(z.real) - self.im.scale(z.imag)
        im = self.re.scale(z.imag) + self.im.scale(z.real)
        return ComplexIntervalVector(re, im)

    def scale_interval(self, s: Interval) -> "ComplexIntervalVector":
        sv_lo = np.full(self.shape, s.lo)
        sv = IntervalVector(sv_lo, np.full(self.shape, s.hi))
        return ComplexIntervalVector(self.re * sv, self.im * sv)

    def hull_with(self, other: "ComplexIntervalVector") -> "ComplexIntervalVector":
        return ComplexIntervalVector(self.re.hull_with(other.re), self.im.hull_with(other.im))

    def mag_upper(self) -> np.ndarray:
        """Elementwise upper bound on |z| over the rectangle."""
        r = self.re.mag()
        i = self.im.mag()
        out = np.hypot(r, i)
        return _vup(out * (1.0 + 4.0 * _U) + _TINY)

    def __getitem__(self, idx):
        return ComplexIntervalVector(
            _ensure_ivec(self.re[idx]), _ensure_ivec(self.im[idx])
        )

    @property
    def mid(self) -> np.ndarray:
        return self.re.mid + 1j * self.im.mid

    def rad_upper(self) -> np.ndarray:
        """Disc radius around mid covering the rectangle."""
        rr = self.re.rad_upper
        ri = self.im.rad_upper
        return _vup(np.hypot(rr, ri) * (1.0 + 4.0 * _U) + _TINY)


def _ensure_ivec(x) -> IntervalVector:
    if isinstance(x, IntervalVector):
        return x
    return IntervalVector(np.atleast_1d(x.lo), np.atleast_1d(x.hi))


def complex_conv(a: ComplexIntervalVector, b: ComplexIntervalVector) -> ComplexIntervalVector:
    """Interval enclosure of the discrete convolution of complex sequences."""
    rr = _real_conv(a.re, b.re)
    ii = _real_conv(a.im, b.im)
    ri = _real_conv(a.re, b.im)
    ir = _real_conv(a.im, b.re)
    return ComplexIntervalVector(rr - ii, ri + ir)


def _real_conv(a: IntervalVector, b: IntervalVector) -> IntervalVector:
    na, nb = len(a), len(b)
    n_out = na + nb - 1
    lo = np.empty(n_out)
    hi = np.empty(n_out)
    b_lo_rev = b.lo[::-1]
    b_hi_rev = b.hi[::-1]
    for n in range(n_out):
        i0 = max(0, n - nb + 1)
        i1 = min(na - 1, n)
        sl_a = slice(i0, i1 + 1)
        sl_b = slice(nb - 1 - (n - i0), nb - (n - i1))
        al, ah = a.lo[sl_a], a.hi[sl_a]
        bl, bh = b_lo_rev[sl_b], b_hi_rev[sl_b]
        p1 = al * bl
        p2 = al * bh
        p3 = ah * bl
        p4 = ah * bh
        plo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
        phi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        lo[n] = _sum_down(_vdown(plo))
        hi[n] = _sum_up(_vup(phi))
    return IntervalVector(lo, hi)


# -- midpoint-radius (disc) complex matrices for fast rigorous products ------


class MidRadMatrix:
    """Complex matrix enclosure: entries within |z - mid| <= rad."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid: np.ndarray, rad: np.ndarray):
        mid = np.asarray(mid, dtype=complex)
        rad = np.asarray(rad, dtype=float)
        if mid.shape != rad.shape or np.any(rad < 0):
            raise ValueError("invalid mid/rad enclosure")
        self.mid = mid
        self.rad = rad

    @classmethod
    def from_point(cls, m: np.ndarray) -> "MidRadMatrix":
        m = np.asarray(m, dtype=complex)
        return cls(m, np.zeros(m.shape))

    @classmethod
    def from_rect(cls, rect: ComplexIntervalVector) -> "MidRadMatrix":
        return cls(rect.mid, rect.rad_upper())

    @property
    def shape(self):
        return self.mid.shape

    def mag_upper(self) -> np.ndarray:
        m = np.abs(self.mid) * (1.0 + 4.0 * _U)
        return _vup(m + self.rad + _TINY)

    def matmul(self, other: "MidRadMatrix") -> "MidRadMatrix":
        """Enclosure of the product using BLAS with a classical error bound."""
        n = self.mid.shape[-1]
        gamma = 16.0 * (n + 4) * _U
        mid = self.mid @ other.mid
        abs_a = np.abs(self.mid) * (1.0 + 4.0 * _U)
        abs_b = np.abs(other.mid) * (1.0 + 4.0 * _U)
        rad = (
            abs_a @ other.rad
            + self.rad @ abs_b
            + self.rad @ other.rad
            + gamma * (abs_a @ abs_b)
        )
        rad = _vup(rad * (1.0 + 16.0 * _U) + _TINY)
        return MidRadMatrix(mid, rad)

    def __sub__(self, other: "MidRadMatrix") -> "MidRadMatrix":
        mid = self.mid - other.mid
        rad = _vup(
            (self.rad + other.rad)
            + 2.0 * _U * (np.abs(self.mid) + np.abs(other.mid))
            + _TINY
        )
        return MidRadMatrix(mid, rad)

    def __add__(self, other: "MidRadMatrix") -> "MidRadMatrix":
        mid = self.mid + other.mid
        rad = _vup(
            (self.rad + other.rad)
            + 2.0 * _U * (np.abs(self.mid) + np.abs(other.mid))
            + _TINY
        )
        return MidRadMatrix(mid, rad)
