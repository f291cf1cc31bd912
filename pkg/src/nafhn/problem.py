"""Vector fields, Fourier-space residual map, Jacobian, and gauges.

The planar system interpolates the autonomous FitzHugh-Nagumo coupling and
an external drive through delta; the coupled four-dimensional variant feeds
the recovery variable of a twin oscillator into the driven pair.  Periodic
orbits of the coupled system are zeros of a residual map acting on four
coefficient blocks together with the frequency and delta.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .fourier import (
    FourierCoefficients,
    convolve,
    derivative_modes,
    evaluate,
    inner_product,
    project,
    zero_sequence,
)

__all__ = [
    "SystemParams",
    "ForcingSignal",
    "BranchPoint",
    "StateVector",
    "GaugeData",
    "VARIANTS",
    "vector_field",
    "variational_matrix",
    "F_map",
    "jacobian_F",
    "gauge_conditions",
    "make_gauge",
    "singular_orbit_seed",
    "SingularOrbitSeed",
    "ConditionError",
    "collocation_defect",
    "real_dimension",
    "column_map",
    "pack_real",
    "unpack_real",
    "blocks_to_real",
    "real_to_blocks",
    "realify_rows",
    "realify_system",
    "realify_residual",
]

VARIANTS = (
    "planar-nonautonomous",
    "autonomous-fhn",
    "skewed",
    "coupled-4d",
    "scalar-layered",
)

_VARIANT_DIM = {
    "planar-nonautonomous": 2,
    "autonomous-fhn": 2,
    "skewed": 2,
    "coupled-4d": 4,
    "scalar-layered": 1,
}


@dataclass(frozen=True)
class SystemParams:
    """Model constants: forcing level a, recovery damping b, time-scale eps,
    interpolation delta."""

    a: float = 0.0
    b: float = 0.5
    eps: float = 0.1
    delta: float = 0.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if self.b < 0:
            raise ValueError(f"b must be nonnegative, got {self.b}")

    def replace(self, **kw) -> "SystemParams":
        data = {"a": self.a, "b": self.b, "eps": self.eps, "delta": self.delta}
        data.update(kw)
        return SystemParams(**data)


FORCING_KINDS = ("periodic-cosine", "quasi-periodic-two-tone", "twin-fhn-orbit", "constant")


@dataclass(frozen=True)
class ForcingSignal:
    """External drive v(t).

    periodic-cosine:          amplitude * cos(2 pi t / period)
    quasi-periodic-two-tone:  amplitude * cos(2 pi t / period)
                              + amplitude2 * sin(2 pi t / period2)
    twin-fhn-orbit:           trigonometric polynomial from (coeffs, omega)
    constant:                 amplitude
    """

    kind: str = "constant"
    amplitude: float = 0.0
    period: float = 1.0
    amplitude2: float = 0.0
    period2: float = 1.0
    coeffs: FourierCoefficients | None = None
    omega: float | None = None

    def __post_init__(self):
        if self.kind not in FORCING_KINDS:
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind in ("periodic-cosine", "quasi-periodic-two-tone") and not self.period > 0:
            raise ValueError("forcing period must be positive")
        if self.kind == "quasi-periodic-two-tone" and not self.period2 > 0:
            raise ValueError("forcing period2 must be positive")
        if self.kind == "twin-fhn-orbit":
            if self.coeffs is None or self.omega is None or not self.omega > 0:
                raise ValueError("twin-fhn-orbit forcing needs coeffs and omega > 0")

    def __call__(self, t):
        if self.kind == "constant":
            return self.amplitude * np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else self.amplitude
        if self.kind == "periodic-cosine":
            return self.amplitude * np.cos(2.0 * np.pi * np.asarray(t, dtype=float) / self.period)
        if self.kind == "quasi-periodic-two-tone":
            t_arr = np.asarray(t, dtype=float)
            return self.amplitude * np.cos(2.0 * np.pi * t_arr / self.period) + self.amplitude2 * np.sin(
                2.0 * np.pi * t_arr / self.period2
            )
        return evaluate(self.coeffs, self.omega, t)

    def bound(self) -> float:
        """Upper bound on sup |v|."""
        if self.kind == "constant":
            return abs(self.amplitude)
        if self.kind == "periodic-cosine":
            return abs(self.amplitude)
        if self.kind == "quasi-periodic-two-tone":
            return abs(self.amplitude) + abs(self.amplitude2)
        return float(np.sum(np.abs(self.coeffs.entries)))


PERIODIC_30 = ForcingSignal(kind="periodic-cosine", amplitude=1.0, period=30.0)
QUASI_30 = ForcingSignal(
    kind="quasi-periodic-two-tone",
    amplitude=1.0,
    period=30.0,
    amplitude2=1.0,
    period2=30.0 * math.sqrt(5.0),
)


def _cubic(x):
    return x - x**3 / 3.0


def vector_field(state, t, params: SystemParams, forcing: ForcingSignal | None, variant: str, *, layer_y: float | None = None) -> np.ndarray:
    """Right-hand side of the selected flow variant.

    State dimensions: 2 for the planar variants, 4 for coupled-4d (ordered
    u, v, x, y), 1 for scalar-layered with the frozen slow value layer_y.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    state = np.asarray(state, dtype=float)
    if state.shape != (_VARIANT_DIM[variant],):
        raise ValueError(
            f"variant {variant!r} expects state of dimension {_VARIANT_DIM[variant]}, got shape {state.shape}"
        )
    a, b, eps, delta = params.a, params.b, params.eps, params.delta
    if variant == "autonomous-fhn":
        x, y = state
        return np.array([y + _cubic(x), eps * (a - x - b * y)])
    if variant == "planar-nonautonomous":
        x, y = state
        v = float(forcing(t))
        return np.array([(1.0 - delta) * y + delta * v + _cubic(x), eps * (a - x - b * y)])
    if variant == "skewed":
        x, y = state
        v = float(forcing(t))
        return np.array([v + _cubic(x), eps * (a - x - b * y)])
    if variant == "coupled-4d":
        u, v, x, y = state
        return np.array(
            [
                v + _cubic(u),
                eps * (a - u - b * v),
                (1.0 - delta) * y + delta * v + _cubic(x),
                eps * (a - x - b * y),
            ]
        )
    # scalar-layered
    if layer_y is None:
        raise ValueError("scalar-layered variant requires layer_y")
    x = state[0]
    v = float(forcing(t))
    return np.array([(1.0 - delta) * layer_y + delta * v + _cubic(x)])


def variational_matrix(state, t, params: SystemParams, forcing: ForcingSignal | None, variant: str) -> np.ndarray:
    """Jacobian of the vector field with respect to the state."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    state = np.asarray(state, dtype=float)
    b, eps, delta = params.b, params.eps, params.delta
    if variant == "autonomous-fhn":
        x = state[0]
        return np.array([[1.0 - x * x, 1.0], [-eps, -eps * b]])
    if variant == "planar-nonautonomous":
        x = state[0]
        return np.array([[1.0 - x * x, 1.0 - delta], [-eps, -eps * b]])
    if variant == "skewed":
        x = state[0]
        return np.array([[1.0 - x * x, 0.0], [-eps, -eps * b]])
    if variant == "coupled-4d":
        u, _, x, _ = state
        return np.array(
            [
                [1.0 - u * u, 1.0, 0.0, 0.0],
                [-eps, -eps * b, 0.0, 0.0],
                [0.0, delta, 1.0 - x * x, 1.0 - delta],
                [0.0, 0.0, -eps, -eps * b],
            ]
        )
    x = state[0]
    return np.array([[1.0 - x * x]])


# ---------------------------------------------------------------------------
# Unknown-space containers
# ---------------------------------------------------------------------------


def _check_blocks(coeffs) -> tuple[FourierCoefficients, ...]:
    blocks = tuple(coeffs)
    if len(blocks) != 4:
        raise ValueError("expected four coefficient blocks")
    orders = {c.order for c in blocks}
    if len(orders) != 1:
        raise ValueError("all four blocks must share one truncation order")
    return blocks


@dataclass(frozen=True)
class BranchPoint:
    """Point on the periodic-orbit branch: frequency, delta, and the four
    coefficient blocks (u, v, x, y)."""

    omega: float
    delta: float
    coeffs: tuple[FourierCoefficients, ...]

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        object.__setattr__(self, "coeffs", _check_blocks(self.coeffs))

    @property
    def order(self) -> int:
        return self.coeffs[0].order

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def states(self, t) -> np.ndarray:
        """Time-domain samples (n, 4) of (u, v, x, y)."""
        cols = [np.atleast_1d(evaluate(c, self.omega, t)) for c in self.coeffs]
        return np.stack(cols, axis=-1)

    def to_json_dict(self) -> dict:
        return {
            "omega": self.omega,
            "delta": self.delta,
            "K": self.order,
            "c1": self.coeffs[0].to_pairs(),
            "c2": self.coeffs[1].to_pairs(),
            "c3": self.coeffs[2].to_pairs(),
            "c4": self.coeffs[3].to_pairs(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BranchPoint":
        coeffs = tuple(FourierCoefficients.from_pairs(data[f"c{i}"]) for i in (1, 2, 3, 4))
        return cls(float(data["omega"]), float(data["delta"]), coeffs)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path) -> "BranchPoint":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class StateVector:
    """Direction or displacement in the unknown space (omega, delta, blocks);
    unlike BranchPoint it carries no positivity constraint."""

    omega: float
    delta: float
    coeffs: tuple[FourierCoefficients, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _check_blocks(self.coeffs))

    @property
    def order(self) -> int:
        return self.coeffs[0].order


@dataclass(frozen=True)
class GaugeData:
    """Phase and arclength gauge anchors.

    reference_derivative holds the kernel direction of the reference orbit
    (its time-derivative modes); beta makes the phase gauge vanish at the
    reference.  tangent and anchor define the arclength constraint.
    """

    reference: BranchPoint
    reference_derivative: tuple[FourierCoefficients, ...]
    beta: float
    tangent: StateVector
    anchor: BranchPoint

    def __post_init__(self):
        object.__setattr__(
            self, "reference_derivative", _check_blocks(self.reference_derivative)
        )


def _blocks_inner(blocks_a, blocks_b) -> float:
    total = 0.0 + 0.0j
    for ca, cb in zip(blocks_a, blocks_b):
        total += inner_product(ca, cb)
    return float(total.real)


def make_gauge(reference: BranchPoint, tangent: StateVector | None = None, anchor: BranchPoint | None = None) -> GaugeData:
    """Build gauge data at a reference orbit; beta annihilates the phase
    condition there."""
    deriv = tuple(derivative_modes(c, reference.omega) for c in reference.coeffs)
    beta = -_blocks_inner(reference.coeffs, deriv)
    if tangent is None:
        zeros = tuple(zero_sequence(reference.order) for _ in range(4))
        tangent = StateVector(1.0, 0.0, zeros)
    if anchor is None:
        anchor = reference
    return GaugeData(reference, deriv, beta, tangent, anchor)


def gauge_conditions(x: BranchPoint, gauge: GaugeData) -> tuple[float, float]:
    """Phase gauge g and arclength gauge h at the point x."""
    g = _blocks_inner(x.coeffs, gauge.reference_derivative) + gauge.beta
    v = gauge.tangent
    h = (
        v.omega * (x.omega - gauge.anchor.omega)
        + v.delta * (x.delta - gauge.anchor.delta)
        + sum(
            float(inner_product(v.coeffs[i], x.coeffs[i]).real - inner_product(v.coeffs[i], gauge.anchor.coeffs[i]).real)
            for i in range(4)
        )
    )
    return g, h


# ---------------------------------------------------------------------------
# Fourier residual map and Jacobian
# ---------------------------------------------------------------------------


def _mode_derivative(c: FourierCoefficients, omega: float) -> np.ndarray:
    return -1j * omega * c.k_values * c.entries


def _pad(entries: np.ndarray, order_in: int, order_out: int) -> np.ndarray:
    out = np.zeros(2 * order_out + 1, dtype=complex)
    out[order_out - order_in : order_out + order_in + 1] = entries
    return out


def F_map(x: BranchPoint, params: SystemParams) -> tuple[FourierCoefficients, ...]:
    """Residual blocks of the periodic-orbit equations in coefficient space.

    The delta stored on x overrides params.delta.  Cubic terms expand the
    support, so the output order is 3K.
    """
    K = x.order
    a, b, eps = params.a, params.b, params.eps
    delta = x.delta
    omega = x.omega
    c1, c2, c3, c4 = (c.entries for c in x.coeffs)
    out_order = 3 * K

    cube1 = np.convolve(np.convolve(c1, c1), c1)
    cube3 = np.convolve(np.convolve(c3, c3), c3)
    a_mode = np.zeros(2 * out_order + 1, dtype=complex)
    a_mode[out_order] = a

    r1 = _pad(_mode_derivative(x.coeffs[0], omega) + c2 + c1, K, out_order) - cube1 / 3.0
    r2 = _pad(_mode_derivative(x.coeffs[1], omega) + eps * (-c1 - b * c2), K, out_order) + eps * a_mode
    r3 = (
        _pad(
            _mode_derivative(x.coeffs[2], omega) + (1.0 - delta) * c4 + delta * c2 + c3,
            K,
            out_order,
        )
        - cube3 / 3.0
    )
    r4 = _pad(_mode_derivative(x.coeffs[3], omega) + eps * (-c3 - b * c4), K, out_order) + eps * a_mode
    return tuple(FourierCoefficients(r) for r in (r1, r2, r3, r4))


def _toeplitz_conv_matrix(q: np.ndarray, K: int) -> np.ndarray:
    """Matrix of u -> q * u restricted to modes |k| <= K; q has order 2K."""
    kr = np.arange(-K, K + 1)
    idx = np.subtract.outer(kr, kr) + 2 * K
    return q[idx]


def jacobian_F(x: BranchPoint, params: SystemParams) -> tuple[np.ndarray, dict]:
    """Derivative of the residual map with respect to (omega, delta, blocks),
    restricted to modes |k| <= K.

    Returns the complex matrix of shape (4*(2K+1), 2 + 4*(2K+1)) and a
    structure descriptor with the index layout.
    """
    K = x.order
    M = 2 * K + 1
    b, eps = params.b, params.eps
    delta = x.delta
    omega = x.omega
    kr = np.arange(-K, K + 1)
    eye = np.eye(M, dtype=complex)
    d_omega_op = np.diag(-1j * omega * kr).astype(complex)

    q1 = np.convolve(x.coeffs[0].entries, x.coeffs[0].entries)
    q3 = np.convolve(x.coeffs[2].entries, x.coeffs[2].entries)
    conv1 = _toeplitz_conv_matrix(q1, K)
    conv3 = _toeplitz_conv_matrix(q3, K)

    jac = np.zeros((4 * M, 2 + 4 * M), dtype=complex)

    def block(i):
        return slice(i * M, (i + 1) * M)

    def col(i):
        return slice(2 + i * M, 2 + (i + 1) * M)

    # cubic linearization: d/dc (-c*c*c/3) = -(c*c)*
    jac[block(0), col(0)] = d_omega_op + eye - conv1
    jac[block(0), col(1)] = eye
    jac[block(1), col(0)] = -eps * eye
    jac[block(1), col(1)] = d_omega_op - eps * b * eye
    jac[block(2), col(2)] = d_omega_op + eye - conv3
    jac[block(2), col(3)] = (1.0 - delta) * eye
    jac[block(2), col(1)] = delta * eye
    jac[block(3), col(2)] = -eps * eye
    jac[block(3), col(3)] = d_omega_op - eps * b * eye

    # d/d omega column: -i k c_i stacked
    for i in range(4):
        jac[block(i), 0] = -1j * kr * x.coeffs[i].entries
    # d/d delta column: only the driven block sees c2 - c4
    jac[block(2), 1] = x.coeffs[1].entries - x.coeffs[3].entries

    structure = {
        "K": K,
        "modes_per_block": M,
        "columns": ["omega", "delta", "c1", "c2", "c3", "c4"],
        "block_row_offset": {i: i * M for i in range(4)},
    }
    return jac, structure


def collocation_defect(x: BranchPoint, params: SystemParams, n_samples: int = 512) -> float:
    """Sup over one period of the time-domain residual of the 4D equations."""
    residual = F_map(x, params)
    ts = np.linspace(0.0, x.period, n_samples, endpoint=False)
    worst = 0.0
    for block in residual:
        vals = evaluate(block, x.omega, ts)
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


# ---------------------------------------------------------------------------
# Realification of the conjugate-symmetric unknowns
# ---------------------------------------------------------------------------


def real_dimension(K: int, n_scalars: int = 2, n_blocks: int = 4) -> int:
    return n_scalars + n_blocks * (2 * K + 1)


@lru_cache(maxsize=16)
def _block_column_map(K: int) -> np.ndarray:
    """Complex (2K+1) x (2K+1) matrix whose columns are the conjugate-symmetric
    basis directions [c0, Re c1, Im c1, ..., Re cK, Im cK]."""
    M = 2 * K + 1
    C = np.zeros((M, M), dtype=complex)
    C[K, 0] = 1.0
    for m in range(1, K + 1):
        C[K + m, 2 * m - 1] = 1.0
        C[K - m, 2 * m - 1] = 1.0
        C[K + m, 2 * m] = 1j
        C[K - m, 2 * m] = -1j
    return C


@lru_cache(maxsize=32)
def column_map(K: int, n_scalars: int = 2, n_blocks: int = 4) -> np.ndarray:
    """Columns of the conjugate-symmetric real basis for a layout of
    n_scalars real unknowns followed by n_blocks coefficient blocks."""
    M = 2 * K + 1
    N = n_scalars + n_blocks * M
    C = np.zeros((N, N), dtype=complex)
    for s in range(n_scalars):
        C[s, s] = 1.0
    Cb = _block_column_map(K)
    for i in range(n_blocks):
        sl = slice(n_scalars + i * M, n_scalars + (i + 1) * M)
        C[sl, sl] = Cb
    return C


def pack_real(scalars, blocks) -> np.ndarray:
    """Pack real scalars plus symmetric blocks into real coordinates."""
    K = blocks[0].order
    M = 2 * K + 1
    n_s = len(scalars)
    out = np.empty(n_s + len(blocks) * M)
    out[:n_s] = scalars
    for i, c in enumerate(blocks):
        base = n_s + i * M
        e = c.entries
        out[base] = e[K].real
        out[base + 1 : base + 2 * K : 2] = e[K + 1 :].real
        out[base + 2 : base + 2 * K + 1 : 2] = e[K + 1 :].imag
    return out


def unpack_real(vec: np.ndarray, K: int, n_scalars: int = 2, n_blocks: int = 4):
    M = 2 * K + 1
    scalars = tuple(float(v) for v in vec[:n_scalars])
    blocks = []
    for i in range(n_blocks):
        base = n_scalars + i * M
        entries = np.zeros(M, dtype=complex)
        entries[K] = vec[base]
        upper = vec[base + 1 : base + 2 * K : 2] + 1j * vec[base + 2 : base + 2 * K + 1 : 2]
        entries[K + 1 :] = upper
        entries[:K] = np.conj(upper[::-1])
        blocks.append(FourierCoefficients(entries))
    return scalars, tuple(blocks)


def blocks_to_real(omega: float, delta: float, blocks) -> np.ndarray:
    return pack_real((omega, delta), blocks)


def real_to_blocks(vec: np.ndarray, K: int):
    (omega, delta), blocks = unpack_real(vec, K, 2, 4)
    return omega, delta, blocks


def _real_rows_from_block(rows: np.ndarray, K: int) -> np.ndarray:
    """Realify the equation rows of one block: k=0 row real part, then
    (Re, Im) pairs of the rows k = 1..K."""
    M = 2 * K + 1
    out = np.empty((M,) + rows.shape[1:])
    out[0] = rows[K].real
    out[1 : 2 * K : 2] = rows[K + 1 :].real
    out[2 : 2 * K + 1 : 2] = rows[K + 1 :].imag
    return out


def realify_rows(scalar_rows: np.ndarray, block_rows: np.ndarray, K: int) -> np.ndarray:
    """Stack realified scalar rows and block equation rows (matrix or vector)."""
    M = 2 * K + 1
    n_blocks = block_rows.shape[0] // M
    parts = [np.atleast_2d(scalar_rows).real] if scalar_rows is not None and len(scalar_rows) else []
    for i in range(n_blocks):
        parts.append(np.atleast_2d(_real_rows_from_block(block_rows[i * M : (i + 1) * M], K)))
    if parts and parts[0].shape[0] == 0:
        parts = parts[1:]
    stacked = np.vstack(parts)
    return stacked


def realify_system(jac_complex: np.ndarray, scalar_rows: np.ndarray, K: int, n_scalars: int = 2, n_blocks: int = 4) -> np.ndarray:
    """Real system matrix from complex block rows plus real-valued scalar
    gauge rows, in the conjugate-symmetric coordinates."""
    C = column_map(K, n_scalars, n_blocks)
    blocks_real_cols = jac_complex @ C
    if scalar_rows is not None and len(scalar_rows):
        scalars_real_cols = np.atleast_2d(scalar_rows) @ C
    else:
        scalars_real_cols = np.zeros((0, C.shape[1]), dtype=complex)
    return realify_rows(scalars_real_cols, blocks_real_cols, K)


def realify_residual(block_residuals, scalars, K: int) -> np.ndarray:
    """Real residual vector matching realify_system's row layout."""
    entries = []
    for res in block_residuals:
        seq = project(res, K) if res.order != K else res
        entries.append(seq.entries)
    block_vec = np.concatenate(entries)[:, None]
    scal = np.asarray(scalars, dtype=float)[:, None] if len(scalars) else None
    return realify_rows(scal, block_vec, K)[:, 0]


# ---------------------------------------------------------------------------
# Singular (slow-fast) seeding of the uncoupled oscillator
# ---------------------------------------------------------------------------


class ConditionError(ValueError):
    """A genericity or slow-flow sign condition failed."""


@dataclass
class SingularOrbitSeed:
    """Concatenated slow arcs and fast jumps of the relaxation skeleton."""

    arcs: list[np.ndarray]
    jumps: list[tuple[np.ndarray, np.ndarray]]
    fold_points: tuple[tuple[float, float], tuple[float, float]]
    slow_period: float
    period_estimate: float
    omega_estimate: float
    conditions: dict = field(default_factory=dict)


def _slow_numerator(x, a, b):
    return a - x - b * (x**3 / 3.0 - x)


def singular_orbit_seed(params: SystemParams, n_arc: int = 200) -> SingularOrbitSeed:
    """Relaxation-orbit skeleton on the cubic nullcline with fold jumps.

    Verifies the genericity conditions and the slow-flow sign condition on
    sampled grids, then integrates the slow transit time along both
    attracting arcs to estimate the period (and frequency) of the orbit.
    """
    a, b, eps = params.a, params.b, params.eps
    g_minus = a - 1.0 + 2.0 * b / 3.0
    g_plus = a + 1.0 - 2.0 * b / 3.0
    conditions = {
        "genericity_minus": g_minus,
        "genericity_plus": g_plus,
        "amplitude_margin": (1.0 - 2.0 * b / 3.0) - abs(a),
    }
    if g_minus == 0.0 or g_plus == 0.0:
        raise ConditionError("genericity condition failed: a = +-(1 - 2b/3)")
    if not abs(a) < 1.0 - 2.0 * b / 3.0:
        raise ConditionError("fold-crossing condition failed: |a| >= 1 - 2b/3")

    xs_left = np.linspace(-2.0, -1.0, n_arc)
    xs_right = np.linspace(1.0, 2.0, n_arc)
    num_left = _slow_numerator(xs_left[:-1], a, b)
    num_right = _slow_numerator(xs_right[1:], a, b)
    if not np.all(num_left > 0):
        raise ConditionError("slow-flow sign condition failed on the left branch (x < -1)")
    if not np.all(num_right < 0):
        raise ConditionError("slow-flow sign condition failed on the right branch (x > 1)")

    nullcline = lambda x: x**3 / 3.0 - x
    arc_left = np.column_stack([xs_left, nullcline(xs_left)])
    arc_right = np.column_stack([xs_right[::-1], nullcline(xs_right[::-1])])
    fold_minus = (-1.0, 2.0 / 3.0)
    fold_plus = (1.0, -2.0 / 3.0)
    jumps = [
        (np.array([fold_minus[0], fold_minus[1]]), np.array([2.0, 2.0 / 3.0])),
        (np.array([fold_plus[0], fold_plus[1]]), np.array([-2.0, -2.0 / 3.0])),
    ]

    # slow transit time: dx/dtau = numerator / (x^2 - 1); integrand vanishes
    # at the folds thanks to the genericity conditions
    integrand = lambda x: (x * x - 1.0) / _slow_numerator(x, a, b)
    tau_left, _ = quad(integrand, -2.0, -1.0)
    tau_right, _ = quad(lambda x: -integrand(x), 1.0, 2.0)
    slow_period = tau_left + tau_right
    period = slow_period / eps
    return SingularOrbitSeed(
        arcs=[arc_left, arc_right],
        jumps=jumps,
        fold_points=(fold_plus, fold_minus),
        slow_period=slow_period,
        period_estimate=period,
        omega_estimate=2.0 * math.pi / period,
        conditions=conditions,
    )
