"""Pseudo-spectral solver for the full transport equation on the periodic box.

The right-hand side is -g (R_a rho) . grad(rho): velocity and gradient are
spectral multipliers applied to the 2/3-truncated spectrum, the dot product
is formed in real space, and the result is re-truncated, which makes the
quadratic term alias-free.  Time stepping is classical RK4 with an advective
CFL time step.  There is no dissipation: runs toward gradient blow-up are
stopped once the gradient has grown past a set factor, after which the grid
no longer resolves the solution.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.fft as sfft

from .blowup import BlowupConfig, DiagnosticsSeries, blowup_functional
from .fields import Grid, Params, ScalarField, max_gradient, sobolev_norm
from .transform import _unit_direction_symbols

__all__ = [
    "NdStop",
    "NdState",
    "NdRunResult",
    "rhs",
    "step_rk4",
    "adaptive_dt",
    "run_nd",
    "bkm_partial_integral",
]

DT_MIN = 1e-8
RESOLVED_TAIL = 1e-10


class NdStop(Enum):
    TIME_LIMIT = "time_limit"
    GRADIENT_THRESHOLD = "gradient_threshold"
    DT_UNDERFLOW = "dt_underflow"
    NONFINITE = "nonfinite"


@dataclass
class NdState:
    time: float
    rho: ScalarField
    params: Params


class _Workspace:
    """Per-run cached multiplier arrays (no sharing across concurrent runs)."""

    def __init__(self, grid: Grid, params: Params):
        self.grid = grid
        self.g = params.g
        kk = grid.wavenumber_magnitude
        screen = -np.expm1(-params.a * kk)
        dirs = _unit_direction_symbols(grid)
        self.vel_mult = [-1j * s * screen for s in dirs]
        nyq = grid.nyquist_mask
        self.grad_mult = [np.where(nyq, 0.0, 1j * k) for k in grid.wavenumbers]
        self.mask = grid.dealias_mask

    def advection(self, values: np.ndarray):
        """Returns (-g * dealiased advection, max velocity magnitude)."""
        sp = sfft.fftn(values) * self.mask
        umax2 = None
        adv = np.zeros_like(values)
        u2 = np.zeros_like(values)
        for vm, gm in zip(self.vel_mult, self.grad_mult):
            u = sfft.ifftn(vm * sp).real
            adv += u * sfft.ifftn(gm * sp).real
            u2 += u * u
        out = -self.g * sfft.ifftn(sfft.fftn(adv) * self.mask).real
        return out, float(np.sqrt(u2.max()))


def rhs(state: NdState, workspace: _Workspace | None = None) -> ScalarField:
    """-g (R_a rho) . grad(rho), dealiased by the 2/3 rule on both factors
    and re-truncated."""
    ws = workspace or _Workspace(state.rho.grid, state.params)
    out, _ = ws.advection(state.rho.values)
    return ScalarField(state.rho.grid, out)


def step_rk4(state: NdState, dt: float, workspace: _Workspace | None = None):
    """Classical RK4 advance; returns (new_state, None) or
    (state, NdStop.NONFINITE) when the step produces nonfinite values."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    ws = workspace or _Workspace(state.rho.grid, state.params)
    v = state.rho.values
    k1, _ = ws.advection(v)
    k2, _ = ws.advection(v + 0.5 * dt * k1)
    k3, _ = ws.advection(v + 0.5 * dt * k2)
    k4, _ = ws.advection(v + dt * k3)
    new = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.isfinite(new).all():
        return state, NdStop.NONFINITE
    return replace(state, time=state.time + dt, rho=ScalarField(state.rho.grid, new)), None


def adaptive_dt(state: NdState, cfl: float, dt_max: float = 0.05,
                workspace: _Workspace | None = None) -> float:
    """dt = cfl * spacing / (g * max |R_a rho| + eps), clamped to
    [DT_MIN, dt_max].  The advection speed carries the factor g."""
    if not 0.0 < cfl < 1.0:
        raise ValueError("cfl must lie in (0, 1)")
    ws = workspace or _Workspace(state.rho.grid, state.params)
    _, umax = ws.advection(state.rho.values)
    dt = cfl * state.rho.grid.spacing / (state.params.g * umax + 1e-300)
    return float(np.clip(dt, DT_MIN, dt_max))


@dataclass
class NdRunResult:
    series: DiagnosticsSeries
    snapshots: list               # (time, ScalarField)
    stop_reason: NdStop
    initial: ScalarField
    threshold_time: float | None  # first time sup_grad exceeded the stop factor
    grid: Grid
    params: Params
    config: dict


def run_nd(rho0: ScalarField, params: Params, *,
           t_max: float = 30.0,
           gradient_factor: float = 50.0,
           cfl: float = 0.4,
           dt_max: float = 0.05,
           dt_min: float = DT_MIN,
           delta: float = 0.25,
           support_radius: float | None = None,
           sobolev_orders=(3.0,),
           output_interval: float | None = None,
           snapshot_interval: float | None = None,
           snapshot_times=None) -> NdRunResult:
    """Integrate until t_max, gradient growth past `gradient_factor`, a dt
    underflow, or a nonfinite state.

    Records max gradient, L2, Sobolev norms, the blow-up functional, the
    running gradient time integral, the origin value, and the mass fraction
    outside the support ball at every output time; snapshots the full field
    at `snapshot_interval` (or the explicit `snapshot_times`).
    """
    grid = rho0.grid
    if params.n != grid.n:
        raise ValueError("params dimension does not match the grid")
    tail = rho0.spectral_tail()
    if tail > RESOLVED_TAIL:
        warnings.warn(f"initial data spectral tail {tail:.2e} above {RESOLVED_TAIL:.0e}; "
                      "the grid resolves the data only marginally", stacklevel=2)
    if support_radius is None:
        nz = np.abs(rho0.values) > 1e-13 * (np.abs(rho0.values).max() + 1e-300)
        support_radius = float(grid.radius[nz].max()) if nz.any() else grid.half_width / 4.0
    cfg = BlowupConfig(delta=delta, support_radius=support_radius, params=params)
    ws = _Workspace(grid, params)
    if output_interval is None:
        output_interval = t_max / 400.0
    snapshot_times = sorted(snapshot_times or [])
    state = NdState(0.0, rho0, params)
    sg0 = max_gradient(rho0)
    out_mask = grid.radius >= support_radius
    origin = grid.origin_index

    cols = ["dt", "sup_grad", "l2"] + [f"hs_{s:g}" for s in sobolev_orders] + \
           ["i_delta", "bkm_partial", "origin_value", "support_mass_out"]
    series = DiagnosticsSeries(cols)
    bkm = 0.0
    last = {"t": 0.0, "sg": sg0}

    def record(st, dt_now):
        nonlocal bkm
        sg = max_gradient(st.rho)
        bkm += 0.5 * (sg + last["sg"]) * (st.time - last["t"])
        last["t"], last["sg"] = st.time, sg
        vals = st.rho.values
        row = {
            "dt": dt_now,
            "sup_grad": sg,
            "l2": st.rho.l2_norm(),
            "i_delta": blowup_functional(st.rho, cfg),
            "bkm_partial": bkm,
            "origin_value": float(vals[origin]),
            "support_mass_out": float(np.abs(vals[out_mask]).sum()
                                      / max(np.abs(vals).sum(), 1e-300)),
        }
        for s in sobolev_orders:
            row[f"hs_{s:g}"] = sobolev_norm(st.rho, s)
        series.append(st.time if st.time > 0 else 0.0, **row)
        return sg

    record(state, 0.0)
    snapshots = [(0.0, rho0)]
    stop = NdStop.TIME_LIMIT
    threshold_time = None
    next_record = output_interval
    next_snap = snapshot_interval if snapshot_interval else None
    si = 0
    while state.time < t_max:
        _, umax = ws.advection(state.rho.values)
        dt = float(np.clip(cfl * grid.spacing / (params.g * umax + 1e-300), dt_min, dt_max))
        if dt <= dt_min * (1.0 + 1e-12):
            stop = NdStop.DT_UNDERFLOW
            break
        target = None
        if si < len(snapshot_times) and state.time + dt >= snapshot_times[si]:
            target = snapshot_times[si]
            dt = max(target - state.time, 1e-13)
        elif state.time + dt > t_max:
            dt = t_max - state.time + 1e-13
        state2, fail = step_rk4(state, dt, ws)
        if fail is not None:
            stop = fail
            break
        state = state2
        if target is not None:
            snapshots.append((target, state.rho))
            si += 1
        elif next_snap is not None and state.time >= next_snap:
            snapshots.append((state.time, state.rho))
            next_snap = state.time + snapshot_interval
        if state.time >= next_record:
            sg = record(state, dt)
            next_record = state.time + output_interval
            if sg0 > 0.0 and sg >= gradient_factor * sg0:
                threshold_time = state.time
                stop = NdStop.GRADIENT_THRESHOLD
                break
    if series.times[-1] < state.time:
        record(state, float(series.column("dt")[-1]) if len(series) else 0.0)
    if snapshots[-1][0] < state.time:
        snapshots.append((state.time, state.rho))
    return NdRunResult(series, snapshots, stop, rho0, threshold_time, grid, params,
                       {"t_max": t_max, "gradient_factor": gradient_factor, "cfl": cfl,
                        "dt_max": dt_max, "delta": delta, "support_radius": support_radius})


def bkm_partial_integral(series: DiagnosticsSeries, column: str = "sup_grad",
                         up_to: float | None = None) -> float:
    """Trapezoidal accumulation of the recorded max gradient over time, the
    continuation monitor: bounded iff the solution continues."""
    if len(series) == 0:
        raise ValueError("series is empty")
    t = series.t
    v = series.column(column)
    if up_to is not None:
        keep = t <= up_to
        t, v = t[keep], v[keep]
    if len(t) < 2:
        return 0.0
    return float(np.trapezoid(v, t))
