"""Energy accounting on top of interval timelines.

Two deliberately different power views exist side by side:

* :func:`average_power` is the closed-form figure: per-state powers weighted
  by residency, plus transition entry/exit energy spread over the run.  It
  is what a residency table alone can tell you.
* :class:`EnergyReport` (via :func:`streaming_report`) is the full bill: it
  integrates state powers over exact interval spans and adds DRAM traffic
  energy (coefficients times bytes moved), transition costs, and the
  conditional adders (panel-side frame buffer, GPU projection, compression
  engine).  Its ``average_power_mw`` is total energy over total time.

DRAM background power is part of each state's package power, so the DRAM
breakdown reports it as an attribution (carved out of the state totals using
the per-state splits), never as an extra charge; only the per-byte operating
energy is additive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .core import Scheme, SimConfig, SystemConfig, Violation, validate_config
from .cstates import (
    STATE_DRAM_MODE,
    CalibrationSet,
    PackageCState,
    PowerProfile,
    check_dram_split_consistency,
    load_calibration,
    transition_cost,
)
from .timeline import WindowTimeline, build_timeline, state_spans_ns


class ConfigurationError(ValueError):
    """Raised when a config fails cross-field validation."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class TrafficSummary:
    """Byte totals and state occupancy extracted from a timeline."""

    dram_read_bytes: int
    dram_write_bytes: int
    edp_bytes: int
    state_spans_ns: Mapping[PackageCState, int]
    total_ns: int
    n_windows: int


#: States in which each traffic type may legitimately appear.  DRAM reads on
#: C7 cover the direct-feed paths (encoded-stream and projection-source reads
#: folded into the decoder-active state).
_READ_STATES = {PackageCState.C0, PackageCState.C2, PackageCState.C7}
_WRITE_STATES = {PackageCState.C0, PackageCState.C2}
_LINK_SILENT_STATES = {PackageCState.C9, PackageCState.C10}


def summarize_traffic(timeline: WindowTimeline) -> TrafficSummary:
    return TrafficSummary(
        dram_read_bytes=sum(iv.dram_read_bytes for iv in timeline.intervals),
        dram_write_bytes=sum(iv.dram_write_bytes for iv in timeline.intervals),
        edp_bytes=sum(iv.edp_bytes for iv in timeline.intervals),
        state_spans_ns=state_spans_ns(timeline),
        total_ns=timeline.total_ns,
        n_windows=timeline.n_windows,
    )


def check_traffic_placement(timeline: WindowTimeline) -> list[str]:
    """Traffic may only ride on states that can move it; returns violations."""
    problems: list[str] = []
    for iv in timeline.intervals:
        if iv.dram_read_bytes and iv.state not in _READ_STATES:
            problems.append(
                f"window {iv.window}: DRAM read bytes on {iv.state} at {iv.start_ns} ns"
            )
        if iv.dram_write_bytes and iv.state not in _WRITE_STATES:
            problems.append(
                f"window {iv.window}: DRAM write bytes on {iv.state} at {iv.start_ns} ns"
            )
        if iv.edp_bytes and iv.state in _LINK_SILENT_STATES:
            problems.append(
                f"window {iv.window}: link bytes on {iv.state} at {iv.start_ns} ns"
            )
    return problems


# -- closed-form average ------------------------------------------------------


def average_power(
    profile: PowerProfile,
    residency: Mapping[PackageCState, float],
    transition_counts: Mapping[tuple[PackageCState, PackageCState], int] | None = None,
    total_time_s: float = 1.0,
) -> float:
    """Residency-weighted average package power in mW.

    Sum of state power times residency, plus every transition's entry/exit
    energy amortized over the run duration.  With zero-latency transitions
    the second term vanishes and the residencies alone decide the figure.
    """
    total_r = sum(residency.values())
    if not 0.999 <= total_r <= 1.001:
        raise ValueError(f"residencies must sum to 1 (got {total_r:.6f})")
    avg = sum(profile.state_power_mw[s] * r for s, r in residency.items())
    if transition_counts:
        if total_time_s <= 0:
            raise ValueError("total_time_s must be positive")
        energy_uj = 0.0
        for (frm, to), count in transition_counts.items():
            energy_uj += count * transition_cost(profile, frm, to).energy_uj
        avg += energy_uj / (total_time_s * 1e3)  # uJ per ms is mW
    return avg


def transition_counts(
    timeline: WindowTimeline,
) -> dict[tuple[PackageCState, PackageCState], int]:
    counts: dict[tuple[PackageCState, PackageCState], int] = {}
    for prev, cur in zip(timeline.intervals, timeline.intervals[1:]):
        if prev.state is not cur.state:
            key = (prev.state, cur.state)
            counts[key] = counts.get(key, 0) + 1
    return counts


# -- DRAM energy ---------------------------------------------------------------


@dataclass(frozen=True)
class DramEnergy:
    """DRAM energy view: additive operating energy, attributed background.

    ``operating_*_uj`` charge the per-byte coefficients (these add to the
    total bill); ``background_uj`` re-states the share of the state powers
    that the background map assigns to DRAM (already inside the state
    energies, never added again).
    """

    operating_read_uj: float
    operating_write_uj: float
    background_uj: float
    background_by_mode_ns: Mapping[str, int]

    @property
    def operating_uj(self) -> float:
        return self.operating_read_uj + self.operating_write_uj


def dram_energy(timeline: WindowTimeline, system: SystemConfig) -> DramEnergy:
    reads = sum(iv.dram_read_bytes for iv in timeline.intervals)
    writes = sum(iv.dram_write_bytes for iv in timeline.intervals)
    by_mode: dict[str, int] = {m: 0 for m in system.dram_background_mw}
    for iv in timeline.intervals:
        by_mode[STATE_DRAM_MODE[iv.state]] += iv.span_ns
    background_uj = sum(
        system.dram_background_mw[m] * ns * 1e-6 for m, ns in by_mode.items()
    )
    return DramEnergy(
        operating_read_uj=reads * system.dram_coeff_read * 1e6,
        operating_write_uj=writes * system.dram_coeff_write * 1e6,
        background_uj=background_uj,
        background_by_mode_ns=by_mode,
    )


# -- full report ----------------------------------------------------------------


@dataclass(frozen=True)
class WindowEnergy:
    """Energy bill of a single refresh window.

    ``dram_uj``/``display_uj``/``others_uj`` is the component view (background
    attribution plus operating traffic; display slice plus the panel-buffer
    adder; everything else) and always sums to ``total_uj``.
    """

    window: int
    kind: str
    state_uj: Mapping[PackageCState, float]
    transition_uj: float
    dram_operating_uj: float
    adders_uj: float
    dram_uj: float
    display_uj: float
    others_uj: float
    total_uj: float


@dataclass(frozen=True)
class EnergyReport:
    """Complete energy accounting for one simulated run."""

    scheme: Scheme
    calibration_name: str
    profile_name: str
    n_windows: int
    total_ns: int
    residency: Mapping[PackageCState, float]
    state_spans_ns: Mapping[PackageCState, int]
    state_energy_uj: Mapping[PackageCState, float]
    transition_counts: Mapping[tuple[PackageCState, PackageCState], int]
    transition_energy_uj: float
    dram: DramEnergy
    drfb_energy_uj: float
    gpu_energy_uj: float
    fbc_energy_uj: float
    dram_read_bytes: int
    dram_write_bytes: int
    edp_bytes: int
    component_energy_uj: Mapping[str, float]
    total_energy_uj: float
    average_power_mw: float
    analytic_average_power_mw: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "scheme": self.scheme.value,
            "calibration": self.calibration_name,
            "profile": self.profile_name,
            "n_windows": self.n_windows,
            "total_ns": self.total_ns,
            "residency": {s.value: r for s, r in self.residency.items()},
            "state_spans_ns": {s.value: v for s, v in self.state_spans_ns.items()},
            "state_energy_uj": {s.value: e for s, e in self.state_energy_uj.items()},
            "transition_counts": {
                f"{a.value}->{b.value}": c for (a, b), c in self.transition_counts.items()
            },
            "transition_energy_uj": self.transition_energy_uj,
            "dram": {
                "operating_read_uj": self.dram.operating_read_uj,
                "operating_write_uj": self.dram.operating_write_uj,
                "background_uj": self.dram.background_uj,
                "background_by_mode_ns": dict(self.dram.background_by_mode_ns),
            },
            "drfb_energy_uj": self.drfb_energy_uj,
            "gpu_energy_uj": self.gpu_energy_uj,
            "fbc_energy_uj": self.fbc_energy_uj,
            "dram_read_bytes": self.dram_read_bytes,
            "dram_write_bytes": self.dram_write_bytes,
            "edp_bytes": self.edp_bytes,
            "component_energy_uj": dict(self.component_energy_uj),
            "total_energy_uj": self.total_energy_uj,
            "average_power_mw": self.average_power_mw,
            "analytic_average_power_mw": self.analytic_average_power_mw,
        }


def report_from_timeline(
    timeline: WindowTimeline,
    cfg: SimConfig,
    calibration: CalibrationSet,
) -> EnergyReport:
    """Price a timeline under a calibration."""
    profile = calibration.profile_for(timeline.scheme)
    check_dram_split_consistency(profile, cfg.system.dram_background_mw)

    spans = state_spans_ns(timeline)
    total_ns = timeline.total_ns
    residency = {s: spans[s] / total_ns for s in PackageCState}
    state_uj = {s: profile.state_power_mw[s] * spans[s] * 1e-6 for s in PackageCState}

    counts = transition_counts(timeline)
    trans_uj = sum(
        c * transition_cost(profile, frm, to).energy_uj
        for (frm, to), c in counts.items()
    )

    dram = dram_energy(timeline, cfg.system)

    drfb_ns = sum(iv.span_ns for iv in timeline.intervals if iv.drfb_active)
    gpu_ns = sum(iv.span_ns for iv in timeline.intervals if iv.gpu_active)
    fbc_ns = sum(iv.span_ns for iv in timeline.intervals if iv.fbc_active)
    drfb_uj = calibration.drfb_power_mw * drfb_ns * 1e-6
    gpu_uj = cfg.system.gpu_active_mw * gpu_ns * 1e-6
    fbc_uj = cfg.system.fbc_compute_mw * fbc_ns * 1e-6

    total_uj = (
        sum(state_uj.values()) + trans_uj + dram.operating_uj + drfb_uj + gpu_uj + fbc_uj
    )
    total_ms = total_ns * 1e-6

    # Three-way component view: the DRAM background and display slices are
    # carved out of the state powers (split already validated above), the
    # panel-side buffer adder is display-side, and everything else -- compute
    # rest, transitions, GPU and compression adders -- lands in "others".
    display_uj = (
        sum(profile.display_power_mw.get(s, 0.0) * spans[s] * 1e-6 for s in PackageCState)
        + drfb_uj
    )
    dram_component_uj = dram.background_uj + dram.operating_uj
    others_uj = total_uj - display_uj - dram_component_uj
    if others_uj < -0.5 * total_ms:  # 0.5 mW of slack over the whole run
        raise ValueError(
            f"calibration '{calibration.name}': component splits exceed state "
            f"totals (others = {others_uj:.3f} uJ)"
        )
    component_uj = {
        "dram": dram_component_uj,
        "display": display_uj,
        "others": others_uj,
    }
    traffic = summarize_traffic(timeline)

    return EnergyReport(
        scheme=timeline.scheme,
        calibration_name=calibration.name,
        profile_name=profile.name,
        n_windows=timeline.n_windows,
        total_ns=total_ns,
        residency=residency,
        state_spans_ns=spans,
        state_energy_uj=state_uj,
        transition_counts=counts,
        transition_energy_uj=trans_uj,
        dram=dram,
        drfb_energy_uj=drfb_uj,
        gpu_energy_uj=gpu_uj,
        fbc_energy_uj=fbc_uj,
        dram_read_bytes=traffic.dram_read_bytes,
        dram_write_bytes=traffic.dram_write_bytes,
        edp_bytes=traffic.edp_bytes,
        component_energy_uj=component_uj,
        total_energy_uj=total_uj,
        average_power_mw=total_uj / total_ms,
        analytic_average_power_mw=average_power(
            profile, residency, counts, total_ns * 1e-9
        ),
    )


def window_energy_breakdown(
    timeline: WindowTimeline,
    cfg: SimConfig,
    calibration: CalibrationSet,
) -> tuple[WindowEnergy, ...]:
    """Per-window bill; boundary transitions are charged to the later window."""
    profile = calibration.profile_for(timeline.scheme)
    out: list[WindowEnergy] = []
    prev_state: PackageCState | None = None
    for w in range(timeline.n_windows):
        ivs = timeline.window_intervals(w)
        state_uj: dict[PackageCState, float] = {}
        trans_uj = 0.0
        dram_op_uj = 0.0
        dram_bg_uj = 0.0
        display_uj = 0.0
        adders_uj = 0.0
        for iv in ivs:
            ms = iv.span_ns * 1e-6
            state_uj[iv.state] = (
                state_uj.get(iv.state, 0.0) + profile.state_power_mw[iv.state] * ms
            )
            if prev_state is not None and prev_state is not iv.state:
                trans_uj += transition_cost(profile, prev_state, iv.state).energy_uj
            prev_state = iv.state
            dram_op_uj += (
                iv.dram_read_bytes * cfg.system.dram_coeff_read
                + iv.dram_write_bytes * cfg.system.dram_coeff_write
            ) * 1e6
            dram_bg_uj += cfg.system.dram_background_mw[STATE_DRAM_MODE[iv.state]] * ms
            display_uj += profile.display_power_mw.get(iv.state, 0.0) * ms
            if iv.drfb_active:
                drfb = calibration.drfb_power_mw * ms
                adders_uj += drfb
                display_uj += drfb
            if iv.gpu_active:
                adders_uj += cfg.system.gpu_active_mw * ms
            if iv.fbc_active:
                adders_uj += cfg.system.fbc_compute_mw * ms
        total = sum(state_uj.values()) + trans_uj + dram_op_uj + adders_uj
        dram_uj = dram_bg_uj + dram_op_uj
        out.append(
            WindowEnergy(
                window=w,
                kind=ivs[0].kind if ivs else "",
                state_uj=state_uj,
                transition_uj=trans_uj,
                dram_operating_uj=dram_op_uj,
                adders_uj=adders_uj,
                dram_uj=dram_uj,
                display_uj=display_uj,
                others_uj=total - dram_uj - display_uj,
                total_uj=total,
            )
        )
    return tuple(out)


def streaming_report(
    cfg: SimConfig,
    calibration: CalibrationSet | str = "default",
    n_windows: int | None = None,
    *,
    fbc_ratio: float = 1.0,
    batch_every: int = 1,
    cached_traffic_fraction: float = 0.34,
    dirty_trace: Sequence[float] | None = None,
    check: bool = True,
) -> EnergyReport:
    """Build the timeline for a config and price it in one step."""
    if isinstance(calibration, str):
        calibration = load_calibration(calibration)
    if check:
        violations = validate_config(cfg)
        if violations:
            raise ConfigurationError(violations)
    timeline = build_timeline(
        cfg,
        n_windows,
        fbc_ratio=fbc_ratio,
        batch_every=batch_every,
        cached_traffic_fraction=cached_traffic_fraction,
        dirty_trace=dirty_trace,
    )
    return report_from_timeline(timeline, cfg, calibration)


__all__ = [
    "ConfigurationError",
    "DramEnergy",
    "EnergyReport",
    "TrafficSummary",
    "WindowEnergy",
    "average_power",
    "check_traffic_placement",
    "dram_energy",
    "report_from_timeline",
    "streaming_report",
    "summarize_traffic",
    "transition_counts",
    "window_energy_breakdown",
]
