"""Newton refinement, tangents, and pseudo-arclength branch continuation.

The unknowns (omega, delta, four coefficient blocks) are handled in real
coordinates adapted to the conjugate symmetry, so one Newton step is a
single dense real solve.  Steps are measured in the sup-type norm
max(|omega|, |delta|, max_i ||c_i||_{l1,nu}).
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .fourier import FourierCoefficients, NormWeight, ell1_norm, project
from .problem import (
    BranchPoint,
    ForcingSignal,
    GaugeData,
    StateVector,
    SystemParams,
    F_map,
    collocation_defect,
    column_map,
    gauge_conditions,
    jacobian_F,
    make_gauge,
    pack_real,
    realify_residual,
    realify_rows,
    realify_system,
    unpack_real,
)

__all__ = [
    "NewtonError",
    "NewtonSingularError",
    "NewtonDivergenceError",
    "NewtonMaxIterError",
    "FoldSuspectedError",
    "Branch",
    "newton_refine",
    "tangent_vector",
    "continue_branch",
    "sup_norm",
    "seed_twin_orbit",
    "seed_branch_point",
    "detect_period",
    "fourier_project_samples",
    "save_branch",
    "load_branch",
]

RESIDUAL_TOL = 1e-10
STEP_FLOOR = 1e-6
DELTA_STEP_CAP = 0.05
STEP_GROWTH = 1.3
RANK_TOL = 1e-8


class NewtonError(RuntimeError):
    pass


class NewtonSingularError(NewtonError):
    pass


class NewtonDivergenceError(NewtonError):
    pass


class NewtonMaxIterError(NewtonError):
    pass


class FoldSuspectedError(RuntimeError):
    """The derivative of (F, g) has a kernel of dimension != 1."""


def sup_norm(vec: StateVector | BranchPoint, w: NormWeight) -> float:
    """max(|omega|, |delta|, max_i ||c_i||_{l1,nu})."""
    return max(
        abs(vec.omega),
        abs(vec.delta),
        max(ell1_norm(c, w) for c in vec.coeffs),
    )


def _gauge_rows(x: BranchPoint, gauge: GaugeData, mode: str) -> np.ndarray:
    """Complex scalar rows [dg/d(unknowns); dh/d(unknowns)]."""
    K = x.order
    M = 2 * K + 1
    N = 2 + 4 * M
    rows = np.zeros((2, N), dtype=complex)
    for i in range(4):
        rows[0, 2 + i * M : 2 + (i + 1) * M] = gauge.reference_derivative[i].entries
    if mode == "fixed-delta":
        rows[1, 1] = 1.0
    else:
        v = gauge.tangent
        rows[1, 0] = v.omega
        rows[1, 1] = v.delta
        for i in range(4):
            rows[1, 2 + i * M : 2 + (i + 1) * M] = v.coeffs[i].entries
    return rows


def _system_residual(x: BranchPoint, gauge: GaugeData, params: SystemParams, mode: str, delta_target: float):
    blocks = tuple(project(r, x.order) for r in F_map(x, params))
    g, h = gauge_conditions(x, gauge)
    if mode == "fixed-delta":
        h = x.delta - delta_target
    res_norm = max(abs(g), abs(h), max(float(np.max(np.abs(r.entries))) for r in blocks))
    return blocks, (g, h), res_norm


def newton_refine(
    x0: BranchPoint,
    gauge: GaugeData,
    params: SystemParams,
    mode: str = "arclength",
    *,
    residual_tol: float = RESIDUAL_TOL,
    max_iter: int = 30,
    return_info: bool = False,
):
    """Refine a branch point so the active system (F, g, h) vanishes below
    residual_tol in sup norm; in fixed-delta mode the arclength row is
    replaced by the constraint delta = delta(x0)."""
    if mode not in ("fixed-delta", "arclength"):
        raise ValueError(f"unknown Newton mode {mode!r}")
    K = x0.order
    delta_target = x0.delta
    x = x0
    history = []
    growth_streak = 0
    for iteration in range(max_iter + 1):
        blocks, scalars, res_norm = _system_residual(x, gauge, params, mode, delta_target)
        history.append(res_norm)
        if res_norm < residual_tol:
            if return_info:
                return x, {"iterations": iteration, "residuals": history}
            return x
        if len(history) >= 2 and history[-1] > history[-2]:
            growth_streak += 1
            if growth_streak >= 3:
                raise NewtonDivergenceError(
                    f"residual grew across {growth_streak} consecutive iterations"
                )
        else:
            growth_streak = 0
        if iteration == max_iter:
            raise NewtonMaxIterError(f"no convergence in {max_iter} iterations (residual {res_norm:.3e})")
        jac_c, _ = jacobian_F(x, params)
        rows = _gauge_rows(x, gauge, mode)
        jac_real = realify_system(jac_c, rows, K)
        res_real = realify_residual(blocks, scalars, K)
        try:
            step = np.linalg.solve(jac_real, -res_real)
        except np.linalg.LinAlgError as exc:
            raise NewtonSingularError(str(exc)) from exc
        if not np.all(np.isfinite(step)):
            raise NewtonSingularError("non-finite Newton step")
        vec = pack_real((x.omega, x.delta), x.coeffs) + step
        (omega, delta), coeffs = unpack_real(vec, K)
        if not omega > 0:
            raise NewtonDivergenceError(f"Newton left the omega > 0 region (omega={omega:.3e})")
        x = BranchPoint(omega, delta, coeffs)
    raise NewtonMaxIterError("unreachable")


def tangent_vector(
    x: BranchPoint,
    gauge: GaugeData,
    params: SystemParams,
    previous: StateVector | None = None,
    *,
    w: NormWeight = NormWeight(),
    rank_tol: float = RANK_TOL,
) -> StateVector:
    """Unit sup-norm kernel direction of the derivative of (F, g) at x,
    oriented to keep a positive inner product with `previous`."""
    K = x.order
    jac_c, _ = jacobian_F(x, params)
    rows = _gauge_rows(x, gauge, "arclength")[:1]  # g row only
    mat = realify_system(jac_c, rows, K)  # (1 + 4M) x (2 + 4M), kernel dim >= 1
    _, svals, vt = np.linalg.svd(mat, full_matrices=True)
    scale = svals[0] if svals[0] > 0 else 1.0
    if svals[-1] / scale <= rank_tol:
        raise FoldSuspectedError(
            f"kernel dimension exceeds one within rank tolerance "
            f"(second singular value ratio {svals[-1]/scale:.3e})"
        )
    kernel = vt[-1]
    (omega_c, delta_c), coeffs = unpack_real(kernel, K)
    vec = StateVector(omega_c, delta_c, coeffs)
    norm = sup_norm(vec, w)
    if norm == 0.0:
        raise FoldSuspectedError("zero kernel vector")
    sign = 1.0
    if previous is not None:
        dot = _state_dot(previous, vec)
        if dot < 0:
            sign = -1.0
        elif dot == 0.0:
            raise FoldSuspectedError("tangent orthogonal to previous direction")
    scale = sign / norm
    return _scale_state(vec, scale)


def _scale_state(v: StateVector, s: float) -> StateVector:
    return StateVector(
        v.omega * s,
        v.delta * s,
        tuple(FourierCoefficients(c.entries * s) for c in v.coeffs),
    )


def _state_dot(a: StateVector, b: StateVector) -> float:
    total = a.omega * b.omega + a.delta * b.delta
    for ca, cb in zip(a.coeffs, b.coeffs):
        total += float(np.sum(ca.entries * cb.entries).real)
    return total


def _shift_point(x: BranchPoint, v: StateVector, step: float) -> BranchPoint:
    coeffs = tuple(
        FourierCoefficients(c.entries + step * d.entries) for c, d in zip(x.coeffs, v.coeffs)
    )
    return BranchPoint(x.omega + step * v.omega, x.delta + step * v.delta, coeffs)


@dataclass
class Branch:
    """Ordered continuation result with tangents and step bookkeeping."""

    points: list[BranchPoint]
    tangents: list[StateVector]
    step_history: list[float]
    termination: str
    residuals: list[float] = field(default_factory=list)
    defects: list[float] = field(default_factory=list)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([p.delta for p in self.points])


def continue_branch(
    start: BranchPoint,
    params: SystemParams,
    direction: int,
    delta_bounds: tuple[float, float],
    step: float,
    *,
    w: NormWeight = NormWeight(),
    residual_tol: float = RESIDUAL_TOL,
    step_floor: float = STEP_FLOOR,
    delta_cap: float = DELTA_STEP_CAP,
    growth: float = STEP_GROWTH,
    sup_cap: float = 0.2,
    max_points: int = 2000,
    max_iter: int = 30,
) -> Branch:
    """Predictor-corrector continuation of the branch through delta.

    Corrector failures halve the step (floor step_floor); quick successes
    (<= 3 iterations) grow it by `growth` subject to the cap on the
    delta-projected length.  Terminates at the delta bounds, on step
    underflow, on persistent corrector failure, or when the tangent's
    delta component reverses against the requested direction (a fold).
    """
    lo, hi = delta_bounds
    if not lo <= start.delta <= hi:
        raise ValueError("start lies outside delta bounds")
    gauge0 = make_gauge(start)
    try:
        point = newton_refine(start, gauge0, params, "fixed-delta", residual_tol=residual_tol, max_iter=max_iter)
    except NewtonError as exc:
        raise NewtonError(f"start point does not refine: {exc}") from exc

    if lo == hi:
        return Branch([point], [], [], "reached-bound", [0.0], [collocation_defect(point, params)])

    tangent = tangent_vector(point, make_gauge(point), params, w=w)
    if tangent.delta * direction < 0:
        tangent = _scale_state(tangent, -1.0)
    points = [point]
    tangents = [tangent]
    steps: list[float] = []
    residuals = [0.0]
    defects = [collocation_defect(point, params)]
    termination = "newton-failure"

    while len(points) < max_points:
        if (point.delta >= hi - 1e-12 and tangent.delta > 0) or (
            point.delta <= lo + 1e-12 and tangent.delta < 0
        ):
            termination = "reached-bound"
            break
        predictor = _shift_point(point, tangent, step)
        gauge = make_gauge(point, tangent=tangent, anchor=predictor)
        try:
            new_point, info = newton_refine(
                predictor, gauge, params, "arclength",
                residual_tol=residual_tol, max_iter=max_iter, return_info=True,
            )
        except NewtonError:
            step *= 0.5
            if step < step_floor:
                termination = "step-underflow"
                break
            continue
        if not (lo <= new_point.delta <= hi):
            clamped = min(max(new_point.delta, lo), hi)
            pinned = BranchPoint(new_point.omega, clamped, new_point.coeffs)
            try:
                new_point = newton_refine(
                    pinned, make_gauge(point), params, "fixed-delta",
                    residual_tol=residual_tol, max_iter=max_iter,
                )
            except NewtonError:
                termination = "newton-failure"
                break
            points.append(new_point)
            tangents.append(tangent)
            steps.append(step)
            residuals.append(residual_tol)
            defects.append(collocation_defect(new_point, params))
            termination = "reached-bound"
            break
        try:
            new_tangent = tangent_vector(new_point, make_gauge(new_point), params, previous=tangent, w=w)
        except FoldSuspectedError:
            termination = "newton-failure"
            break
        points.append(new_point)
        tangents.append(new_tangent)
        steps.append(step)
        residuals.append(info["residuals"][-1])
        defects.append(collocation_defect(new_point, params))
        point, tangent = new_point, new_tangent
        if new_tangent.delta * direction < 0:
            # branch curled past a fold in delta: no branch switching
            termination = "fold"
            break
        if info["iterations"] <= 3:
            step = step * growth
        step = min(step, _step_cap(tangent, delta_cap), sup_cap)
    return Branch(points, tangents, steps, termination, residuals, defects)


def _step_cap(tangent: StateVector, delta_cap: float) -> float:
    t_delta = abs(tangent.delta)
    if t_delta < 1e-14:
        return delta_cap * 100.0
    return delta_cap / t_delta


# ---------------------------------------------------------------------------
# Simulation-based seeding
# ---------------------------------------------------------------------------


def detect_period(
    params: SystemParams,
    *,
    initial=(2.0, 0.0),
    transient: float = 400.0,
    tol: float = 1e-12,
    n_events: int = 10,
) -> tuple[float, np.ndarray]:
    """Period of the attracting orbit of the uncoupled oscillator via upward
    zero crossings of x; returns (period, anchor state on the section)."""
    from scipy.integrate import solve_ivp

    rhs = lambda t, y: np.array([y[1] + y[0] - y[0] ** 3 / 3.0, params.eps * (params.a - y[0] - params.b * y[1])])

    burn = solve_ivp(rhs, (0.0, transient), np.asarray(initial, float), method="DOP853", rtol=tol, atol=tol)
    y0 = burn.y[:, -1]

    def section(t, y):
        return y[0]

    section.direction = 1.0
    sol = solve_ivp(
        rhs, (0.0, transient), y0, method="DOP853", rtol=tol, atol=tol, events=[section], dense_output=True
    )
    hits = sol.t_events[0]
    if hits.size < n_events:
        raise RuntimeError("period detection found too few section crossings")
    gaps = np.diff(hits[-n_events:])
    period = float(np.mean(gaps))
    if np.max(np.abs(gaps - period)) > 1e-8 * period:
        raise RuntimeError("period estimates did not settle")
    anchor = sol.sol(hits[-1])
    return period, anchor


def fourier_project_samples(samples: np.ndarray, K: int) -> FourierCoefficients:
    """Coefficients of one uniformly sampled period (trapezoid quadrature,
    which is the rectangle rule on a periodic grid)."""
    M = samples.size
    spec = np.fft.fft(samples) / M
    entries = np.zeros(2 * K + 1, dtype=complex)
    entries[K] = spec[0]
    entries[K + 1 :] = spec[1 : K + 1]
    entries[:K] = np.conj(spec[1 : K + 1][::-1])
    return FourierCoefficients(entries)


def _polish_twin(omega: float, c1: FourierCoefficients, c2: FourierCoefficients, params: SystemParams, *, residual_tol=RESIDUAL_TOL, max_iter=20):
    """Newton on the uncoupled oscillator alone: unknowns (omega, c1, c2)."""
    K = c1.order
    M = 2 * K + 1
    kr = np.arange(-K, K + 1)
    eye = np.eye(M, dtype=complex)
    Cmap = column_map(K, 1, 2)

    def residual(om, b1, b2):
        e1, e2 = b1.entries, b2.entries
        cube = np.convolve(np.convolve(e1, e1), e1)
        r1 = -1j * om * kr * e1 + e2 + e1 - (cube[2 * K : 4 * K + 1]) / 3.0
        tail = np.concatenate([cube[: 2 * K], cube[4 * K + 1 :]])
        a_vec = np.zeros(M, dtype=complex)
        a_vec[K] = params.a
        r2 = -1j * om * kr * e2 + params.eps * (a_vec - e1 - params.b * e2)
        full_r1_norm = max(np.max(np.abs(r1)), np.max(np.abs(tail)) / 3.0)
        return r1, r2, full_r1_norm

    ref1, ref2 = c1, c2
    dref1 = 1j * omega * kr * ref1.entries
    dref2 = 1j * omega * kr * ref2.entries
    beta = -float((np.sum(ref1.entries * dref1) + np.sum(ref2.entries * dref2)).real)

    om, b1, b2 = omega, c1, c2
    for _ in range(max_iter):
        r1, r2, _ = residual(om, b1, b2)
        g = float((np.sum(b1.entries * dref1) + np.sum(b2.entries * dref2)).real) + beta
        res_norm = max(abs(g), float(np.max(np.abs(r1))), float(np.max(np.abs(r2))))
        if res_norm < residual_tol:
            return om, b1, b2
        q1 = np.convolve(b1.entries, b1.entries)
        conv1 = q1[np.subtract.outer(kr, kr) + 2 * K]
        d_om = np.diag(-1j * om * kr).astype(complex)
        jac = np.zeros((2 * M, 1 + 2 * M), dtype=complex)
        jac[:M, 0] = -1j * kr * b1.entries
        jac[M:, 0] = -1j * kr * b2.entries
        jac[:M, 1 : 1 + M] = d_om + eye - conv1
        jac[:M, 1 + M :] = eye
        jac[M:, 1 : 1 + M] = -params.eps * eye
        jac[M:, 1 + M :] = d_om - params.eps * params.b * eye
        g_row = np.zeros((1, 1 + 2 * M), dtype=complex)
        g_row[0, 1 : 1 + M] = dref1
        g_row[0, 1 + M :] = dref2
        jac_real = realify_rows(g_row @ Cmap, jac @ Cmap, K)
        res_real = realify_rows(np.array([[g]], dtype=complex), np.concatenate([r1, r2])[:, None], K)[:, 0]
        upd = np.linalg.solve(jac_real, -res_real)
        (om,), (b1, b2) = unpack_real(pack_real((om,), (b1, b2)) + upd, K, 1, 2)
    raise NewtonMaxIterError("twin polish did not converge")


def seed_twin_orbit(params: SystemParams, K: int, *, n_samples: int = 4096, residual_tol=RESIDUAL_TOL):
    """Fourier representation (omega, c1, c2) of the attracting orbit of the
    uncoupled oscillator: simulate, project, Newton-polish."""
    period, anchor = detect_period(params)
    omega = 2.0 * math.pi / period
    ts = period * np.arange(n_samples) / n_samples
    from scipy.integrate import solve_ivp

    rhs = lambda t, y: np.array([y[1] + y[0] - y[0] ** 3 / 3.0, params.eps * (params.a - y[0] - params.b * y[1])])
    sol = solve_ivp(rhs, (0.0, period), anchor, method="DOP853", rtol=1e-12, atol=1e-12, t_eval=ts)
    c1 = fourier_project_samples(sol.y[0], K)
    c2 = fourier_project_samples(sol.y[1], K)
    return _polish_twin(omega, c1, c2, params, residual_tol=residual_tol)


def seed_branch_point(
    params: SystemParams,
    delta: float,
    K: int,
    stable: bool,
    *,
    n_samples: int = 4096,
    burn_periods: int = 40,
    residual_tol=RESIDUAL_TOL,
) -> BranchPoint:
    """Branch point at the given delta: the driven pair is simulated forward
    (attracting orbit) or backward (repelling orbit) against the twin drive,
    projected onto K modes, and Newton-refined at fixed delta."""
    from scipy.integrate import solve_ivp

    omega, c1, c2 = seed_twin_orbit(params, K, n_samples=n_samples, residual_tol=residual_tol)
    period = 2.0 * math.pi / omega
    drive = ForcingSignal(kind="twin-fhn-orbit", coeffs=c2, omega=omega)
    rhs = lambda t, y: np.array(
        [
            (1.0 - delta) * y[1] + delta * drive(t) + y[0] - y[0] ** 3 / 3.0,
            params.eps * (params.a - y[0] - params.b * y[1]),
        ]
    )
    # sampling window starts at an integer multiple of the period so the
    # projected phases line up with the twin's
    ts_rel = period * np.arange(n_samples) / n_samples
    if stable:
        t_end = (burn_periods + 1) * period
        sample_ts = burn_periods * period + ts_rel
        t_eval = sample_ts
        span = (0.0, t_end)
    else:
        t_end = -(burn_periods + 1) * period
        sample_ts = t_end + ts_rel
        t_eval = sample_ts[::-1]
        span = (0.0, t_end)
    sol = solve_ivp(rhs, span, np.zeros(2), method="DOP853", rtol=1e-12, atol=1e-12, t_eval=t_eval)
    if sol.status != 0:
        raise RuntimeError(f"seeding simulation failed: {sol.message}")
    samples = sol.y if stable else sol.y[:, ::-1]
    c3 = fourier_project_samples(samples[0], K)
    c4 = fourier_project_samples(samples[1], K)
    guess = BranchPoint(omega, delta, (c1, c2, c3, c4))
    return newton_refine(guess, make_gauge(guess), params.replace(delta=delta), "fixed-delta", residual_tol=residual_tol)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_branch(branch: Branch, dirpath, meta: dict | None = None) -> None:
    """branch.json + points.csv + per-point coefficient JSON files."""
    os.makedirs(dirpath, exist_ok=True)
    info = {
        "n_points": len(branch.points),
        "termination": branch.termination,
        "step_history": branch.step_history,
    }
    if meta:
        info.update(meta)
    with open(os.path.join(dirpath, "branch.json"), "w") as fh:
        json.dump(info, fh, indent=2)
    with open(os.path.join(dirpath, "points.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "omega", "delta", "residual", "step"])
        for i, p in enumerate(branch.points):
            res = branch.residuals[i] if i < len(branch.residuals) else ""
            stp = branch.step_history[i - 1] if 0 < i <= len(branch.step_history) else ""
            writer.writerow([i, repr(p.omega), repr(p.delta), res, stp])
    for i, p in enumerate(branch.points):
        p.save(os.path.join(dirpath, f"point_{i:04d}.json"))


def load_branch(dirpath) -> Branch:
    with open(os.path.join(dirpath, "branch.json")) as fh:
        info = json.load(fh)
    points = []
    for i in range(info["n_points"]):
        points.append(BranchPoint.load(os.path.join(dirpath, f"point_{i:04d}.json")))
    return Branch(points, [], info.get("step_history", []), info.get("termination", "unknown"))
