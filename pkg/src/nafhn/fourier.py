"""Algebra of truncated two-sided Fourier coefficient sequences.

A sequence holds complex coefficients c_k for k = -K..K of a real
trigonometric polynomial phi(t) = sum_k c_k exp(i k omega t).  Conjugate
symmetry c_{-k} = conj(c_k) is imposed once at construction; every
operation afterwards may assume it.  Norms are taken in the geometrically
weighted l1 space, which is a Banach algebra under discrete convolution.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_NU",
    "NormWeight",
    "FourierCoefficients",
    "ell1_norm",
    "convolve",
    "evaluate",
    "inner_product",
    "project",
    "derivative_modes",
    "unit_sequence",
    "zero_sequence",
    "write_sequence_csv",
    "read_sequence_csv",
]

DEFAULT_NU = 1.05

EVAL_IMAG_TOL = 1e-10


@dataclass(frozen=True)
class NormWeight:
    """Geometric decay weight nu > 1 of the weighted-l1 norm."""

    nu: float = DEFAULT_NU

    def __post_init__(self):
        if not math.isfinite(self.nu) or not self.nu > 1.0:
            raise ValueError(f"norm weight requires nu > 1, got {self.nu}")


class FourierCoefficients:
    """Dense array of coefficients over k = -K..K with conjugate symmetry.

    Construction symmetrizes the input (the only repair step); the stored
    array is immutable afterwards.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = np.asarray(entries, dtype=complex)
        if arr.ndim != 1 or arr.size % 2 != 1:
            raise ValueError("entries must be one-dimensional with odd length 2K+1")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise ValueError("coefficient entries must be finite")
        arr = 0.5 * (arr + np.conj(arr[::-1]))
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FourierCoefficients is immutable")

    @property
    def order(self) -> int:
        return self.entries.size // 2

    @property
    def k_values(self) -> np.ndarray:
        K = self.order
        return np.arange(-K, K + 1)

    def coefficient(self, k: int) -> complex:
        K = self.order
        if abs(k) > K:
            return 0.0 + 0.0j
        return complex(self.entries[k + K])

    def symmetry_defect(self) -> float:
        """Max |c_{-k} - conj(c_k)|; zero up to rounding by construction."""
        return float(np.max(np.abs(self.entries - np.conj(self.entries[::-1]))))

    def to_pairs(self) -> list[list[float]]:
        """JSON-embeddable [re, im] pairs ordered k = -K..K."""
        return [[float(z.real), float(z.imag)] for z in self.entries]

    @classmethod
    def from_pairs(cls, pairs) -> "FourierCoefficients":
        return cls(np.array([complex(re, im) for re, im in pairs]))

    def __repr__(self):
        return f"FourierCoefficients(order={self.order})"

    def __eq__(self, other):
        if not isinstance(other, FourierCoefficients):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.entries.size, self.entries.tobytes()))


def zero_sequence(order: int = 0) -> FourierCoefficients:
    return FourierCoefficients(np.zeros(2 * order + 1, dtype=complex))


def unit_sequence(order: int = 0) -> FourierCoefficients:
    """The convolution identity: 1 at mode k = 0."""
    entries = np.zeros(2 * order + 1, dtype=complex)
    entries[order] = 1.0
    return FourierCoefficients(entries)


def _as_nu(w) -> float:
    nu = w.nu if isinstance(w, NormWeight) else float(w)
    if not math.isfinite(nu) or not nu > 1.0:
        raise ValueError(f"norm weight requires nu > 1, got {nu}")
    return nu


def ell1_norm(c: FourierCoefficients, w) -> float:
    """sum_k |c_k| nu^|k|; zero iff the sequence vanishes."""
    nu = _as_nu(w)
    weights = nu ** np.abs(c.k_values).astype(float)
    return float(np.sum(np.abs(c.entries) * weights))


def convolve(c: FourierCoefficients, d: FourierCoefficients) -> FourierCoefficients:
    """Exact discrete convolution; output order is order(c) + order(d)."""
    return FourierCoefficients(np.convolve(c.entries, d.entries))


def evaluate(c: FourierCoefficients, omega: float, t):
    """Evaluate sum_k c_k e^{i k omega t}; the imaginary residue must vanish.

    Accepts scalar or array t and returns a matching real result.
    """
    if not omega > 0:
        raise ValueError(f"evaluate requires omega > 0, got {omega}")
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(1j * omega * np.multiply.outer(t_arr, c.k_values.astype(float)))
    values = phases @ c.entries
    scale = max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
    imag_residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if imag_residue > EVAL_IMAG_TOL * scale:
        raise ValueError(
            f"imaginary residue {imag_residue:.3e} exceeds tolerance; "
            "conjugate symmetry violated"
        )
    real = values.real
    return float(real) if np.isscalar(t) or t_arr.ndim == 0 else real


def inner_product(c: FourierCoefficients, d: FourierCoefficients) -> complex:
    """Bilinear sum_k c_k d_k (no conjugation); shorter sequence zero-padded."""
    Kc, Kd = c.order, d.order
    K = min(Kc, Kd)
    a = c.entries[Kc - K : Kc + K + 1]
    b = d.entries[Kd - K : Kd + K + 1]
    return complex(np.sum(a * b))


def project(c: FourierCoefficients, order: int) -> FourierCoefficients:
    """Truncate (the only lossy step) or zero-pad to the given order."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    K = c.order
    if order <= K:
        return FourierCoefficients(c.entries[K - order : K + order + 1])
    padded = np.zeros(2 * order + 1, dtype=complex)
    padded[order - K : order + K + 1] = c.entries
    return FourierCoefficients(padded)


def derivative_modes(c: FourierCoefficients, omega: float) -> FourierCoefficients:
    """Coefficients i k omega c_k of the time derivative."""
    return FourierCoefficients(1j * omega * c.k_values * c.entries)


def write_sequence_csv(path, c: FourierCoefficients) -> None:
    """Rows `k, re, im` ordered k = -K..K."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "re", "im"])
        for k, z in zip(c.k_values, c.entries):
            writer.writerow([int(k), repr(float(z.real)), repr(float(z.imag))])


def read_sequence_csv(path) -> FourierCoefficients:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = {}
    for row in rows[1:]:
        if not row:
            continue
        data[int(row[0])] = complex(float(row[1]), float(row[2]))
    K = max(abs(k) for k in data)
    entries = np.zeros(2 * K + 1, dtype=complex)
    for k, z in data.items():
        entries[k + K] = z
    return FourierCoefficients(entries)
