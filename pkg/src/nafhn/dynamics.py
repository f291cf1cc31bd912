"""Time-domain integration and the nonautonomous constructions.

Pullback ensembles approximate attracting invariant sets by launching
solutions at increasingly early times; backward integration from nearby
future states recovers the repelling solution where it exists.  The
uncoupled (delta = 1) problem admits an explicit attracting solution via a
variation-of-constants integral, and the slow variable of the stiff planar
system is reproduced by an averaged scalar flow.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .problem import ForcingSignal, SystemParams, vector_field

__all__ = [
    "ESCAPE_RADIUS",
    "Trajectory",
    "EnsembleResult",
    "RepellingOutcome",
    "SkewedSolution",
    "IntegrationError",
    "HorizonError",
    "NonUniqueAttractorError",
    "integrate",
    "pullback_ensemble",
    "repelling_solution",
    "skewed_hyperbolic_solution",
    "trapping_radius",
    "averaged_slow_flow",
    "write_trajectory_csv",
    "read_trajectory_csv",
]

ESCAPE_RADIUS = 1.0e3


class IntegrationError(RuntimeError):
    """Step-size underflow without blow-up (stiffness failure)."""


class HorizonError(RuntimeError):
    """Pullback horizon too short: doubling it still moves the output."""


class NonUniqueAttractorError(RuntimeError):
    """Two pullback runs of a layered equation disagree."""


@dataclass
class Trajectory:
    """Time-stamped state samples with a blow-up flag."""

    times: np.ndarray
    states: np.ndarray
    blew_up: bool = False
    blowup_time: float | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.states.shape[0] != self.times.size:
            raise ValueError("times/states length mismatch")
        if self.times.size > 1:
            diffs = np.diff(self.times)
            if not (np.all(diffs > 0) or np.all(diffs < 0)):
                raise ValueError("sample times must be strictly monotone")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class EnsembleResult:
    trajectories: list[Trajectory]
    transient_cutoff: float
    sample_times: np.ndarray | None = None


@dataclass
class RepellingOutcome:
    """Result of the backward search for the repelling solution."""

    status: str  # "found" | "absent" | "inconclusive"
    trajectory: Trajectory | None
    n_bounded: int
    n_blown: int
    max_pairwise: float | None = None


def _rhs(variant, params, forcing, layer_y=None):
    def f(t, y):
        return vector_field(y, t, params, forcing, variant, layer_y=layer_y)

    return f


def _blowup_event(escape_radius):
    def event(t, y):
        return float(np.linalg.norm(y)) - escape_radius

    event.terminal = True
    return event


def integrate(
    variant: str,
    params: SystemParams,
    forcing: ForcingSignal | None,
    initial,
    t0: float,
    t1: float,
    tol: float,
    *,
    layer_y: float | None = None,
    t_eval=None,
    dt_sample: float = 0.05,
    escape_radius: float = ESCAPE_RADIUS,
    method: str = "RK45",
    max_step: float = np.inf,
) -> Trajectory:
    """Adaptive explicit integration with dense sampling and blow-up detection.

    Supports t1 < t0 (backward time).  Blow-up is declared when the state
    norm crosses escape_radius; the crossing time is recorded and sampling
    stops there.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    initial = np.atleast_1d(np.asarray(initial, dtype=float))
    if t1 == t0:
        return Trajectory(np.array([t0]), initial[None, :])
    if t_eval is None:
        n = max(2, int(abs(t1 - t0) / dt_sample) + 1)
        t_eval = np.linspace(t0, t1, n)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve_ivp(
            _rhs(variant, params, forcing, layer_y),
            (t0, t1),
            initial,
            method=method,
            rtol=tol,
            atol=tol * 1e-2,
            t_eval=t_eval,
            events=[_blowup_event(escape_radius)],
            dense_output=False,
            max_step=max_step,
        )
    if sol.status == 1:  # blow-up event fired
        t_hit = float(sol.t_events[0][0])
        times = sol.t
        states = sol.y.T
        if times.size == 0:
            times = np.array([t0])
            states = initial[None, :]
        return Trajectory(times, states, blew_up=True, blowup_time=t_hit)
    if sol.status != 0:
        last = sol.y[:, -1] if sol.y.size else initial
        norm = float(np.linalg.norm(last[np.isfinite(last)])) if np.any(np.isfinite(last)) else np.inf
        if not np.all(np.isfinite(last)) or norm > 0.5 * escape_radius:
            # solver died inside a genuine blow-up before the event fired
            times = sol.t
            states = sol.y.T
            keep = np.all(np.isfinite(states), axis=1) if states.size else np.array([], dtype=bool)
            if times.size == 0 or not np.any(keep):
                times = np.array([t0])
                states = initial[None, :]
            else:
                times, states = times[keep], states[keep]
            return Trajectory(times, states, blew_up=True, blowup_time=float(times[-1]))
        raise IntegrationError(f"integrator failed without blow-up: {sol.message}")
    return Trajectory(sol.t, sol.y.T)


def pullback_ensemble(
    variant: str,
    params: SystemParams,
    forcing: ForcingSignal | None,
    start_window: tuple[float, float],
    n: int,
    init_box,
    transient: float,
    t_end: float,
    *,
    tol: float = 1e-9,
    seed: int = 0,
    dt_sample: float = 0.1,
) -> EnsembleResult:
    """Launch n solutions from initial times uniformly spaced in start_window,
    integrate to the common final time, and keep samples with t >= transient.

    Initial states are drawn uniformly from init_box (sequence of (lo, hi)
    per coordinate) with the given seed.  Integrator failures are recorded
    per trajectory without aborting the ensemble.
    """
    t_a, t_b = start_window
    if not t_a < t_b and n > 1:
        raise ValueError("start window must satisfy t_a < t_b")
    if n < 1:
        raise ValueError("ensemble size must be >= 1")
    rng = np.random.default_rng(seed)
    box = np.asarray(init_box, dtype=float)
    starts = np.linspace(t_a, t_b, n) if n > 1 else np.array([t_a])
    shared = np.arange(transient, t_end + 1e-12, dt_sample)
    members: list[Trajectory] = []
    for i in range(n):
        x0 = box[:, 0] + rng.random(box.shape[0]) * (box[:, 1] - box[:, 0])
        t_start = float(starts[i])
        grid = shared[shared >= t_start]
        if grid.size == 0 or grid[0] > t_start:
            grid = np.concatenate([[t_start], grid])
        try:
            traj = integrate(
                variant, params, forcing, x0, t_start, t_end, tol, t_eval=grid, dt_sample=dt_sample
            )
        except IntegrationError:
            members.append(Trajectory(np.array([t_start]), x0[None, :], blew_up=True, blowup_time=t_start))
            continue
        keep = traj.times >= transient
        if np.any(keep):
            traj = Trajectory(traj.times[keep], traj.states[keep], traj.blew_up, traj.blowup_time)
        members.append(traj)
    return EnsembleResult(members, transient_cutoff=transient, sample_times=shared)


def repelling_solution(
    variant: str,
    params: SystemParams,
    forcing: ForcingSignal | None,
    t_future: float,
    n: int,
    *,
    horizon: float = 300.0,
    radius: float = 0.3,
    center=(0.0, 0.0),
    tol: float = 1e-10,
    conv_tol: float = 1e-6,
    window_frac: float = 0.25,
    dt_sample: float = 0.1,
) -> RepellingOutcome:
    """Backward integration of n nearby states from t_future.

    If every surviving trajectory agrees pairwise below conv_tol over the
    earliest window, their mean is returned as the repelling-solution
    approximation; if all blow up the outcome is `absent`; anything else is
    `inconclusive`.
    """
    if n < 2:
        raise ValueError("need at least two initial conditions")
    center = np.asarray(center, dtype=float)
    angles = 2.0 * np.pi * np.arange(n) / n
    t_stop = t_future - horizon
    grid = np.arange(t_future, t_stop - 1e-12, -dt_sample)
    survivors = []
    n_blown = 0
    for ang in angles:
        x0 = center + radius * np.array([np.cos(ang), np.sin(ang)])
        traj = integrate(variant, params, forcing, x0, t_future, t_stop, tol, t_eval=grid)
        if traj.blew_up:
            n_blown += 1
        else:
            survivors.append(traj)
    if not survivors:
        return RepellingOutcome("absent", None, 0, n_blown)
    if len(survivors) == 1:
        return RepellingOutcome("inconclusive", None, 1, n_blown)
    n_window = max(2, int(window_frac * grid.size))
    tail = [s.states[-n_window:] for s in survivors]
    max_pair = 0.0
    for i in range(len(tail)):
        for j in range(i + 1, len(tail)):
            max_pair = max(max_pair, float(np.max(np.abs(tail[i] - tail[j]))))
    if max_pair < conv_tol:
        mean_states = np.mean([s.states for s in survivors], axis=0)
        common = Trajectory(survivors[0].times, mean_states)
        return RepellingOutcome("found", common, len(survivors), n_blown, max_pair)
    return RepellingOutcome("inconclusive", None, len(survivors), n_blown, max_pair)


# ---------------------------------------------------------------------------
# Uncoupled problem: explicit attracting solution and its decay data
# ---------------------------------------------------------------------------


@dataclass
class SkewedSolution:
    """Pullback-limit solution of the uncoupled problem plus decay data."""

    trajectory: Trajectory  # columns (phi1, phi2) on [report_start, t_end]
    alpha: float  # fitted decay rate of the scalar variational factor
    horizon: float
    dt: float
    log_psi: np.ndarray = field(repr=False, default=None)  # cumulative integral of 1 - phi1^2

    @property
    def times(self) -> np.ndarray:
        return self.trajectory.times

    @property
    def phi1(self) -> np.ndarray:
        return self.trajectory.states[:, 0]

    @property
    def phi2(self) -> np.ndarray:
        return self.trajectory.states[:, 1]


def _phi1_samples(params, forcing, t_start, grid, tol):
    f = lambda t, y: np.array([forcing(t) + y[0] - y[0] ** 3 / 3.0])
    sol = solve_ivp(
        f,
        (t_start, grid[-1]),
        [2.0],
        method="DOP853",
        rtol=tol,
        atol=tol,
        t_eval=grid,
        dense_output=False,
    )
    if sol.status != 0:
        raise IntegrationError(f"scalar cubic integration failed: {sol.message}")
    return sol.y[0]


def _exp_kernel_integral(phi: np.ndarray, dt: float, rate: float) -> np.ndarray:
    """I_n = int_{t_0}^{t_n} e^{-rate (t_n - s)} phi(s) ds via product
    integration of the piecewise-linear interpolant (exact kernel)."""
    r = rate * dt
    decay = math.exp(-r)
    if r > 1e-6:
        w_prev = (1.0 - decay * (1.0 + r)) / (rate * r)
        w_curr = (r - 1.0 + decay) / (rate * r)
    else:  # series for small exponent
        w_prev = dt * (0.5 - r / 3.0)
        w_curr = dt * (0.5 - r / 6.0)
    out = np.empty_like(phi)
    out[0] = 0.0
    acc = 0.0
    chunk = 2048
    n = phi.size
    i = 1
    while i < n:
        j = min(n, i + chunk)
        m = j - i
        # within a chunk: I_k = decay^k * acc + sum_{l<=k} decay^{k-l} (w_prev phi_{l-1} + w_curr phi_l)
        contrib = w_prev * phi[i - 1 : j - 1] + w_curr * phi[i:j]
        powers = decay ** np.arange(1, m + 1)
        scaled = contrib / powers
        cums = np.cumsum(scaled)
        out[i:j] = powers * (acc + cums)
        acc = out[j - 1]
        i = j
    return out


def skewed_hyperbolic_solution(
    params: SystemParams,
    forcing: ForcingSignal,
    horizon: float,
    *,
    t_end: float | None = None,
    dt: float | None = None,
    tol: float = 1e-12,
    insensitivity_tol: float = 1e-8,
    check_horizon: bool = True,
) -> SkewedSolution:
    """Pullback approximation of the attracting solution of the uncoupled
    problem: the scalar cubic component by forward integration from
    -horizon, the linear component by quadrature of the
    variation-of-constants integral truncated there.

    Fails when doubling the horizon still changes the reported window by
    more than insensitivity_tol.
    """
    if params.b <= 0:
        raise ValueError("the linear component needs b > 0")
    if t_end is None:
        t_end = 2.0 * forcing.period if forcing.kind != "constant" else 10.0
    if dt is None:
        # commensurate grid: quadrature error cancels in periodic-shift tests
        dt = forcing.period / 4096.0 if forcing.kind != "constant" else 1e-2

    def build(h):
        # grid anchored at t = 0 so samples align across horizons and shifts
        n_back = int(math.ceil(h / dt))
        n_fwd = int(math.ceil(t_end / dt))
        grid = dt * np.arange(-n_back, n_fwd + 1)
        t_start = grid[0]
        phi1 = _phi1_samples(params, forcing, t_start, grid, tol)
        rate = params.b * params.eps
        integ = _exp_kernel_integral(phi1, dt, rate)
        phi2 = params.a / params.b - params.eps * integ
        return grid, phi1, phi2

    grid, phi1, phi2 = build(horizon)
    if check_horizon:
        grid2, phi1_2, phi2_2 = build(2.0 * horizon)
        keep = grid >= 0.0
        keep2 = grid2 >= 0.0
        n_keep = int(np.sum(keep))
        d1 = np.max(np.abs(phi1[keep] - phi1_2[keep2][:n_keep]))
        d2 = np.max(np.abs(phi2[keep] - phi2_2[keep2][:n_keep]))
        if max(d1, d2) > insensitivity_tol:
            raise HorizonError(
                f"pullback horizon {horizon} too short: doubling moved the output by {max(d1, d2):.3e}"
            )

    # decay of the scalar variational factor: cumulative integral of 1 - phi1^2
    integrand = 1.0 - phi1**2
    log_psi = np.concatenate([[0.0], np.cumsum(0.5 * dt * (integrand[1:] + integrand[:-1]))])
    burn = grid >= (grid[0] + 0.25 * horizon)
    lam = log_psi[burn]
    ts = grid[burn]
    alpha = -(lam[-1] - lam[0]) / (ts[-1] - ts[0])

    keep = grid >= 0.0
    traj = Trajectory(grid[keep], np.column_stack([phi1[keep], phi2[keep]]))
    return SkewedSolution(traj, float(alpha), horizon, dt, log_psi=log_psi[keep] - log_psi[keep][0])


# ---------------------------------------------------------------------------
# Dissipativity radius
# ---------------------------------------------------------------------------


def trapping_radius(params: SystemParams, forcing_bound: float, *, safety: float = 1.05) -> float:
    """Radius beyond which the radial derivative is negative for every angle,
    every delta in [0, 1], and every |v| <= forcing_bound.

    The bracketed radial expression is bounded on an angular grid refined
    until its Lipschitz modulus certifies negativity between nodes; the
    radius is then bisected down to near-minimal size.
    """
    if forcing_bound < 0:
        raise ValueError("forcing bound must be nonnegative")
    a, eps = params.a, params.eps
    cross = max(1.0 - eps, eps, 1.0)  # bound on |1 - delta - eps| over delta in [0, 1]
    v_top = forcing_bound + abs(a) * eps

    def certified_negative(r: float) -> bool:
        # g(theta) = -cos^4/3 - eps sin^2 + (cos^2 + cross |sin cos|)/r^2 + v_top/r^3
        lips = 4.0 / 3.0 + eps + (2.0 + cross) / r**2
        n_grid = 4096
        theta = np.linspace(0.0, 2.0 * np.pi, n_grid, endpoint=False)
        h = 2.0 * np.pi / n_grid
        c, s = np.cos(theta), np.sin(theta)
        g = -(c**4) / 3.0 - eps * s**2 + (c**2 + cross * np.abs(s * c)) / r**2 + v_top / r**3
        return bool(np.max(g) + 0.5 * lips * h < 0.0)

    r = 1.0
    while not certified_negative(r):
        r *= 2.0
        if r > 1e9:
            raise RuntimeError("failed to certify a trapping radius")
    lo, hi = r / 2.0, r
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if certified_negative(mid):
            hi = mid
        else:
            lo = mid
    return hi * safety


# ---------------------------------------------------------------------------
# Averaged slow flow
# ---------------------------------------------------------------------------


def _layer_attractor_average(
    params, forcing, y, *, periods, burn, tol, uniq_tol, dt_sample
):
    """Birkhoff average of the layered-equation attractor at frozen y,
    checked for uniqueness by two pullback runs."""
    if forcing.kind in ("periodic-cosine",):
        window = periods * forcing.period
    else:
        window = 1500.0
    t0 = -burn
    grid = np.arange(0.0, window + 1e-9, dt_sample)
    runs = []
    for x0 in (2.0, -2.0):
        f = lambda t, y_: np.array(
            [(1.0 - params.delta) * y + params.delta * forcing(t) + y_[0] - y_[0] ** 3 / 3.0]
        )
        sol = solve_ivp(f, (t0, window), [x0], method="DOP853", rtol=tol, atol=tol, t_eval=grid)
        if sol.status != 0:
            raise IntegrationError(f"layered integration failed at y={y}: {sol.message}")
        runs.append(sol.y[0])
    gap = float(np.max(np.abs(runs[0] - runs[1])))
    if gap > uniq_tol:
        raise NonUniqueAttractorError(
            f"layered equation at y={y:.6g} has non-unique attractor (pullback gap {gap:.3e})"
        )
    x_samples = 0.5 * (runs[0] + runs[1])
    return float(np.trapz(x_samples, grid) / (grid[-1] - grid[0]))


def averaged_slow_flow(
    params: SystemParams,
    forcing: ForcingSignal,
    y_range: tuple[float, float],
    y0: float,
    tau_end: float,
    *,
    n_grid: int = 121,
    periods: int = 50,
    burn: float = 120.0,
    tol: float = 1e-10,
    uniq_tol: float = 1e-6,
    dt_sample: float = 0.05,
    n_out: int = 400,
) -> tuple[Trajectory, CubicSpline]:
    """Integrate the averaged slow equation dy/dtau = a - b y - m(y), where
    m(y) is the time average of the layered-equation attractor at frozen y.

    Returns the slow trajectory (in slow time) and the interpolant of m.
    """
    y_lo, y_hi = y_range
    grid = np.linspace(y_lo, y_hi, n_grid)
    m_vals = np.array(
        [
            _layer_attractor_average(
                params, forcing, y, periods=periods, burn=burn, tol=tol, uniq_tol=uniq_tol, dt_sample=dt_sample
            )
            for y in grid
        ]
    )
    m_interp = CubicSpline(grid, m_vals)
    rhs = lambda tau, y: np.array([params.a - params.b * y[0] - float(m_interp(np.clip(y[0], y_lo, y_hi)))])
    taus = np.linspace(0.0, tau_end, n_out)
    sol = solve_ivp(rhs, (0.0, tau_end), [y0], method="RK45", rtol=1e-10, atol=1e-12, t_eval=taus)
    if sol.status != 0:
        raise IntegrationError(f"averaged flow integration failed: {sol.message}")
    return Trajectory(sol.t, sol.y.T), m_interp


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Rows `t, x1, ..., xn, blew_up`."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x{i+1}" for i in range(traj.dim)] + ["blew_up"])
        flag = int(traj.blew_up)
        for t, row in zip(traj.times, traj.states):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row] + [flag])


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    body = [r for r in rows[1:] if r]
    times = np.array([float(r[0]) for r in body])
    states = np.array([[float(v) for v in r[1:-1]] for r in body])
    blew = bool(int(body[0][-1])) if body else False
    return Trajectory(times, states, blew_up=blew, blowup_time=float(times[-1]) if blew else None)


def write_ensemble(dirpath, result: EnsembleResult) -> None:
    import os

    os.makedirs(dirpath, exist_ok=True)
    manifest = {"transient_cutoff": result.transient_cutoff, "members": []}
    for i, traj in enumerate(result.trajectories):
        name = f"member_{i:04d}.csv"
        write_trajectory_csv(os.path.join(dirpath, name), traj)
        manifest["members"].append({"file": name, "blew_up": traj.blew_up, "blowup_time": traj.blowup_time})
    with open(os.path.join(dirpath, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
