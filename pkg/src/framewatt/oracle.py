"""Independent event-driven cross-check for the analytic timeline builders.

This module re-derives window state sequences from the config with a
different implementation strategy: a per-window event loop over the
producer/consumer buffer machine, float-second arithmetic, merged state
periods, and tick-capped numerical energy integration.  It shares no code
with :mod:`framewatt.timeline`; agreement between the two (state residencies
within a tenth of a percentage point, energy within a tenth of a percent) is
what the equivalence test suite asserts.

Semantics mirrored here (and nowhere loosened): the first two chunk fills of
a phase land back-to-back, later fills wait for the chunk two places ahead
to finish draining, producer-bound transfers run in lockstep with no drain
tail, and every window is cut off clean at its end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import (
    Scheme,
    SimConfig,
    WorkloadKind,
    encoded_frame_bytes,
    frame_bytes,
)
from .cstates import CalibrationSet, PackageCState, transition_cost
from .timeline import selective_update_bytes


@dataclass(frozen=True)
class OraclePeriod:
    window: int
    state: PackageCState
    start_s: float
    end_s: float
    drfb: bool = False
    gpu: bool = False
    fbc: bool = False

    @property
    def span_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class OracleResult:
    n_windows: int
    window_s: float
    periods: tuple[OraclePeriod, ...]
    dram_read_bytes: int
    dram_write_bytes: int
    edp_bytes: int

    @property
    def total_s(self) -> float:
        return self.n_windows * self.window_s

    def state_time_s(self) -> dict[PackageCState, float]:
        out = {s: 0.0 for s in PackageCState}
        for p in self.periods:
            out[p.state] += p.span_s
        return out

    def residency(self) -> dict[PackageCState, float]:
        times = self.state_time_s()
        total = self.total_s
        return {s: t / total for s, t in times.items()}

    def energy_uj(
        self,
        cfg: SimConfig,
        calibration: CalibrationSet,
        tick_s: float = 1e-6,
    ) -> float:
        """Numerically integrate the energy bill over the period list.

        Integration advances in steps of at most ``tick_s`` inside each
        period; halving the tick must not change the result beyond float
        noise, which the test suite checks.
        """
        profile = calibration.profile_for(cfg.workload.scheme)
        total_uj = 0.0
        prev_state: PackageCState | None = None
        for p in self.periods:
            power_mw = profile.state_power_mw[p.state]
            if p.drfb:
                power_mw += calibration.drfb_power_mw
            if p.gpu:
                power_mw += cfg.system.gpu_active_mw
            if p.fbc:
                power_mw += cfg.system.fbc_compute_mw
            remaining = p.span_s
            while remaining > 0:
                dt = tick_s if remaining > tick_s else remaining
                total_uj += power_mw * dt * 1e3  # mW * s -> uJ
                remaining -= dt
            if prev_state is not None and prev_state is not p.state:
                total_uj += transition_cost(profile, prev_state, p.state).energy_uj
            prev_state = p.state
        total_uj += self.dram_read_bytes * cfg.system.dram_coeff_read * 1e6
        total_uj += self.dram_write_bytes * cfg.system.dram_coeff_write * 1e6
        return total_uj


# -- the event machine ---------------------------------------------------------


class _WindowSim:
    """Accumulates (state, flags) spans for one window and merges runs."""

    def __init__(self, window: int, start_s: float, end_s: float):
        self.window = window
        self.start = start_s
        self.end = end_s
        self.t = start_s
        self.spans: list[list] = []  # [state, start, end, drfb, gpu, fbc]

    def emit(self, state: PackageCState, until: float, *, drfb: bool = False,
             gpu: bool = False, fbc: bool = False) -> None:
        until = min(until, self.end)
        if until <= self.t:
            return
        last = self.spans[-1] if self.spans else None
        if (
            last is not None
            and last[0] is state
            and last[3] == drfb
            and last[4] == gpu
            and last[5] == fbc
        ):
            last[2] = until
        else:
            self.spans.append([state, self.t, until, drfb, gpu, fbc])
        self.t = until

    def finish(self, tail_state: PackageCState, *, drfb: bool = False) -> None:
        if self.t < self.end:
            self.emit(tail_state, self.end, drfb=drfb)
        # Snap the final edge so float drift never leaks across windows.
        if self.spans:
            self.spans[-1][2] = self.end
        self.t = self.end

    def periods(self) -> list[OraclePeriod]:
        return [
            OraclePeriod(self.window, s, a, b, drfb=d, gpu=g, fbc=f)
            for s, a, b, d, g, f in self.spans
            if b > a
        ]


def _chunks(payload: int, chunk: int) -> list[int]:
    n = -(-payload // chunk)
    return [chunk] * (n - 1) + [payload - (n - 1) * chunk] if n else []


def _run_phase(
    sim: _WindowSim,
    payload: int,
    chunk: int,
    fill_rate: float,
    drain_rate: float | None,
    fill_state: PackageCState,
    drain_state: PackageCState,
    *,
    gpu_fill: bool = False,
) -> float:
    """Drive the buffer machine; returns the phase end time.

    ``drain_rate`` None means span pacing across the rest of the window.
    """
    if payload <= 0 or sim.t >= sim.end:
        return sim.t
    start = sim.t
    span_mode = drain_rate is None
    d = payload / (sim.end - start) if span_mode else float(drain_rate)
    sizes = _chunks(payload, chunk)

    if fill_rate <= d:
        # Lockstep: consumer is never the constraint; chunks go out as they
        # are produced and the phase ends with the last fill.
        for c in sizes:
            sim.emit(fill_state, sim.t + c / fill_rate, gpu=gpu_fill)
        phase_end = sim.t
        if span_mode and sim.t < sim.end:
            sim.emit(drain_state, sim.end)
            phase_end = sim.end
        return phase_end

    first_fill_end = start + sizes[0] / fill_rate
    drained_after = 0
    drain_done: list[float] = []
    for c in sizes:
        drained_after += c
        drain_done.append(first_fill_end + drained_after / d)

    fill_end_prev = start
    for i, c in enumerate(sizes):
        if i == 0:
            fill_start = start
        elif i == 1:
            fill_start = fill_end_prev
        else:
            fill_start = max(fill_end_prev, drain_done[i - 2])
        if fill_start > sim.t:
            sim.emit(drain_state, fill_start)
        sim.emit(fill_state, fill_start + c / fill_rate, gpu=gpu_fill)
        fill_end_prev = fill_start + c / fill_rate
        if sim.t >= sim.end:
            return sim.end
    if drain_done[-1] > sim.t:
        sim.emit(drain_state, drain_done[-1])
    return min(drain_done[-1], sim.end)


@dataclass
class _P:
    """Per-run scalar parameters, all plain floats/ints."""

    W: float
    F: int
    E: int
    chunk: int
    o: float
    o_b: float
    f: float
    b: float
    p: float
    e_B: float
    gpu: float
    group: int
    disp: int
    fbc_on: bool


def oracle_simulate(
    cfg: SimConfig,
    n_windows: int | None = None,
    *,
    fbc_ratio: float = 1.0,
    batch_every: int = 1,
    cached_traffic_fraction: float = 0.34,
    dirty_trace: Sequence[float] | None = None,
) -> OracleResult:
    """Simulate the run with the event machine and return merged periods."""
    disp_cfg, sys_cfg, wl = cfg.display, cfg.system, cfg.workload
    F = frame_bytes(disp_cfg.resolution, disp_cfg.bits_per_pixel)
    W = 1.0 / disp_cfg.refresh_hz
    cut = (1.0 - cached_traffic_fraction) if batch_every > 1 else 1.0
    par = _P(
        W=W,
        F=F,
        E=encoded_frame_bytes(disp_cfg.resolution, sys_cfg.encoded_bits_per_pixel),
        chunk=sys_cfg.dc_buffer_bytes,
        o=sys_cfg.orchestration_time,
        o_b=(
            sys_cfg.burst_orchestration_time
            if sys_cfg.burst_orchestration_time is not None
            else 0.02 * W
        ),
        f=sys_cfg.decode_rate,
        b=sys_cfg.dram_fetch_rate,
        p=sys_cfg.vd_paced_rate if sys_cfg.vd_paced_rate else sys_cfg.decode_rate,
        e_B=disp_cfg.edp_max_bits_per_s / 8,
        gpu=sys_cfg.gpu_pt_rate,
        group=max(disp_cfg.refresh_hz // wl.video_fps, 1),
        disp=round(F * fbc_ratio * cut),
        fbc_on=fbc_ratio != 1.0,
    )

    if wl.kind is WorkloadKind.SINGLE_PLANE:
        if not dirty_trace:
            raise ValueError("single-plane workloads need a dirty_trace")
        n = len(dirty_trace)
    else:
        n = n_windows if n_windows is not None else par.group

    periods: list[OraclePeriod] = []
    reads = writes = link = 0
    for w in range(n):
        sim = _WindowSim(w, w * W, (w + 1) * W)
        if wl.kind is WorkloadKind.SINGLE_PLANE:
            r, wr, lk = _sim_plane(sim, par, wl.scheme, float(dirty_trace[w]))  # type: ignore[index]
        else:
            is_transfer = w % par.group == 0
            vr = wl.kind is WorkloadKind.VR360
            if wl.scheme is Scheme.BASELINE:
                decodes = 0
                if is_transfer:
                    frame_idx = w // par.group
                    decodes = batch_every if frame_idx % batch_every == 0 else 0
                r, wr, lk = _sim_baseline(
                    sim, par, is_transfer, decodes, vr, wl.psr_alternate_windows
                )
            elif wl.scheme is Scheme.BYPASS_ONLY:
                r, wr, lk = _sim_bypass(sim, par, is_transfer)
            elif wl.scheme is Scheme.BURSTING_ONLY:
                r, wr, lk = _sim_bursting(sim, par, is_transfer)
            else:
                r, wr, lk = _sim_burstlink(sim, par, is_transfer, vr)
        reads += r
        writes += wr
        link += lk
        periods.extend(sim.periods())

    return OracleResult(
        n_windows=n,
        window_s=W,
        periods=tuple(periods),
        dram_read_bytes=reads,
        dram_write_bytes=writes,
        edp_bytes=link,
    )


def _sim_baseline(
    sim: _WindowSim, par: _P, is_transfer: bool, decodes: int, vr: bool, psr_alt: bool
) -> tuple[int, int, int]:
    if not is_transfer and psr_alt:
        sim.finish(PackageCState.C9, drfb=True)
        return 0, 0, 0
    reads = writes = 0
    if is_transfer and decodes > 0:
        sim.emit(PackageCState.C0, sim.t + par.o + decodes * par.F / par.f,
                 fbc=par.fbc_on and not vr)
        reads += decodes * par.E
        writes += decodes * (par.F if vr else par.disp)
        if vr:
            sim.emit(PackageCState.C0, sim.t + decodes * par.F / par.gpu,
                     gpu=True, fbc=par.fbc_on)
            reads += decodes * par.F
            writes += decodes * par.disp
    else:
        sim.emit(PackageCState.C0, sim.t + par.o)
    _run_phase(sim, par.disp, par.chunk, par.b, None,
               PackageCState.C2, PackageCState.C8)
    sim.finish(PackageCState.C8)
    reads += par.disp
    return reads, writes, par.F


def _sim_bypass(sim: _WindowSim, par: _P, is_transfer: bool) -> tuple[int, int, int]:
    if not is_transfer:
        sim.emit(PackageCState.C0, sim.t + par.o_b)
        sim.finish(PackageCState.C9, drfb=True)
        return 0, 0, 0
    sim.emit(PackageCState.C0, sim.t + par.o)
    _run_phase(sim, par.F, par.chunk, par.p, None,
               PackageCState.C7, PackageCState.C7P)
    sim.finish(PackageCState.C7P)
    return par.E, 0, par.F


def _sim_bursting(sim: _WindowSim, par: _P, is_transfer: bool) -> tuple[int, int, int]:
    if not is_transfer:
        sim.emit(PackageCState.C0, sim.t + par.o_b)
        sim.finish(PackageCState.C9, drfb=True)
        return 0, 0, 0
    sim.emit(PackageCState.C0, sim.t + par.o_b + par.F / par.f, fbc=par.fbc_on)
    d_units = par.e_B * par.disp / par.F if par.disp != par.F else par.e_B
    _run_phase(sim, par.disp, par.chunk, par.b, d_units,
               PackageCState.C2, PackageCState.C8)
    sim.finish(PackageCState.C9, drfb=True)
    return par.E + par.disp, par.disp, par.F


def _sim_burstlink(
    sim: _WindowSim, par: _P, is_transfer: bool, vr: bool
) -> tuple[int, int, int]:
    if not is_transfer:
        sim.emit(PackageCState.C0, sim.t + par.o_b)
        sim.finish(PackageCState.C9, drfb=True)
        return 0, 0, 0
    if vr:
        sim.emit(PackageCState.C0, sim.t + par.o_b + par.F / par.f)
        _run_phase(sim, par.F, par.chunk, par.gpu, par.e_B,
                   PackageCState.C7, PackageCState.C7P, gpu_fill=True)
        sim.finish(PackageCState.C9, drfb=True)
        return par.E + par.F, par.F, par.F
    sim.emit(PackageCState.C0, sim.t + par.o_b)
    _run_phase(sim, par.F, par.chunk, par.p, par.e_B,
               PackageCState.C7, PackageCState.C7P)
    sim.finish(PackageCState.C9, drfb=True)
    return par.E, 0, par.F


def _sim_plane(
    sim: _WindowSim, par: _P, scheme: Scheme, dirty: float
) -> tuple[int, int, int]:
    if scheme is Scheme.BASELINE:
        sim.emit(PackageCState.C0, sim.t + par.o)
        _run_phase(sim, par.F, par.chunk, par.b, None,
                   PackageCState.C2, PackageCState.C8)
        sim.finish(PackageCState.C8)
        return par.F, 0, par.F
    update = selective_update_bytes(par.F, dirty)
    sim.emit(PackageCState.C0, sim.t + par.o_b)
    if update > 0:
        _run_phase(sim, update, par.chunk, par.b, par.e_B,
                   PackageCState.C2, PackageCState.C8)
    sim.finish(PackageCState.C9, drfb=True)
    return update, 0, update


__all__ = ["OraclePeriod", "OracleResult", "oracle_simulate"]
