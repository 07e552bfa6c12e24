"""What-if studies layered on the base schemes.

Each study rebuilds the timeline with one knob turned and prices both the
plain and the modified run, so results always come as a pair.  The knobs are
independent of each other (compression scales buffer traffic, batching
changes the decode cadence) and applying them in either order yields the
same configuration, which the property suite verifies.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import (
    Scheme,
    SimConfig,
    WorkloadKind,
    frame_bytes,
    frame_window,
    replace,
)
from .cstates import CalibrationSet, load_calibration
from .power import EnergyReport, streaming_report


def energy_reduction(base: EnergyReport, improved: EnergyReport) -> float:
    """Energy saving of ``improved`` over ``base`` in percent (per unit time).

    Runs of different lengths compare fairly because both bills are first
    normalized to energy per unit time.
    """
    base_rate = base.total_energy_uj / base.total_ns
    imp_rate = improved.total_energy_uj / improved.total_ns
    return 100.0 * (1.0 - imp_rate / base_rate)


@dataclass(frozen=True)
class ScenarioResult:
    """A plain run and its modified counterpart."""

    name: str
    base: EnergyReport
    modified: EnergyReport

    @property
    def reduction(self) -> float:
        return energy_reduction(self.base, self.modified)


def _resolve(calibration: CalibrationSet | str) -> CalibrationSet:
    return load_calibration(calibration) if isinstance(calibration, str) else calibration


def apply_fbc(
    cfg: SimConfig,
    ratio: float,
    calibration: CalibrationSet | str = "default",
    n_windows: int | None = None,
) -> ScenarioResult:
    """Frame-buffer compression: the display-bound buffer shrinks to ``ratio``.

    Writes of the composed frame, DC fetches, and the fetch bursts all scale
    with the ratio; the compression engine draws extra power while the frame
    is produced.  Schemes that never put the frame in DRAM have nothing to
    compress: the knob is ignored with a warning and the result shows no
    change.
    """
    cal = _resolve(calibration)
    if cfg.workload.scheme.uses_bypass and ratio != 1.0:
        warnings.warn(
            f"scheme '{cfg.workload.scheme.value}' keeps no DRAM frame buffer; "
            "compression ratio ignored",
            stacklevel=2,
        )
        ratio = 1.0
    base = streaming_report(cfg, cal, n_windows)
    modified = streaming_report(cfg, cal, n_windows, fbc_ratio=ratio)
    return ScenarioResult(name=f"fbc[{ratio}]", base=base, modified=modified)


def apply_batching(
    cfg: SimConfig,
    batch_every: int,
    calibration: CalibrationSet | str = "default",
    cached_traffic_fraction: float = 0.34,
    n_windows: int | None = None,
) -> ScenarioResult:
    """Decode batching: one window decodes ``batch_every`` frames ahead.

    The other windows of the batch skip the decoder wake-up entirely, and the
    frames parked in DRAM are kept in a cache-friendly layout that cuts their
    write/fetch traffic by ``cached_traffic_fraction``.  Only meaningful for
    plain video playback on the conventional scheme.
    """
    if batch_every < 1:
        raise ValueError(f"batch_every must be >= 1, got {batch_every}")
    if cfg.workload.kind is not WorkloadKind.VIDEO:
        raise ValueError("BATCH_KIND: decode batching applies to video playback only")
    if cfg.workload.scheme is not Scheme.BASELINE:
        raise ValueError(
            "BATCH_SCHEME: decode batching requires the conventional scheme "
            f"(got '{cfg.workload.scheme.value}')"
        )
    fbytes = frame_bytes(cfg.display.resolution, cfg.display.bits_per_pixel)
    if batch_every * fbytes > cfg.system.dram_capacity_bytes:
        raise ValueError(
            f"BATCH_EXCEEDS_DRAM: {batch_every} frames of {fbytes} bytes exceed "
            f"dram_capacity_bytes={cfg.system.dram_capacity_bytes}"
        )
    window_s = float(frame_window(cfg.display.refresh_hz))
    busy = cfg.system.orchestration_time + batch_every * fbytes / cfg.system.decode_rate
    if busy >= window_s:
        raise ValueError(
            f"BATCH_WINDOW_OVERRUN: decoding {batch_every} frames takes "
            f"{busy * 1e3:.3f} ms, beyond the {window_s * 1e3:.3f} ms window"
        )
    cal = _resolve(calibration)
    group = max(cfg.display.refresh_hz // cfg.workload.video_fps, 1)
    # Cover whole batch cycles so the cadence is represented faithfully.
    n = n_windows if n_windows is not None else batch_every * group
    base = streaming_report(cfg, cal, n)
    modified = streaming_report(
        cfg, cal, n, batch_every=batch_every,
        cached_traffic_fraction=cached_traffic_fraction,
    )
    return ScenarioResult(name=f"batching[{batch_every}]", base=base, modified=modified)


@dataclass(frozen=True)
class PlaneFlags:
    """Per-window plane/display conditions that gate the fast schemes."""

    video_plane_only: bool = True
    single_video: bool = True
    graphics_interrupt: bool = False
    user_input_interrupt: bool = False
    multiple_displays: bool = False


def select_scheme(flags: PlaneFlags, requested: Scheme, drfb_present: bool) -> Scheme:
    """Effective scheme for one window: the requested one only when safe.

    A fast scheme runs only while a single video plane is alone on a single
    display, nothing graphical or input-driven interrupts, and the panel has
    the double-buffered remote frame buffer.  Any disturbance falls back to
    conventional streaming for that window.  Pure decision function: same
    inputs, same answer.
    """
    if requested is Scheme.BASELINE:
        return Scheme.BASELINE
    safe = (
        flags.video_plane_only
        and flags.single_video
        and not flags.graphics_interrupt
        and not flags.user_input_interrupt
        and not flags.multiple_displays
        and drfb_present
    )
    return requested if safe else Scheme.BASELINE


@dataclass(frozen=True)
class PlaneComparison:
    """Selective-update bursting versus conventional full streaming."""

    burst: EnergyReport
    stream: EnergyReport

    @property
    def reduction(self) -> float:
        return energy_reduction(self.stream, self.burst)


def single_plane_burst(
    cfg: SimConfig,
    dirty_trace: Sequence[float],
    calibration: CalibrationSet | str = "default",
) -> PlaneComparison:
    """Drive a dirty-rectangle trace through both single-plane pipelines.

    The burst pipeline sends only each window's dirty bytes (plus a rectangle
    header) and parks in deep idle -- a static trace is therefore almost all
    C9.  The comparison pipeline streams the full frame every refresh no
    matter how little changed.
    """
    if not dirty_trace:
        raise ValueError("dirty_trace must not be empty")
    for i, d in enumerate(dirty_trace):
        if not 0.0 <= float(d) <= 1.0:
            raise ValueError(f"dirty_trace[{i}] = {d} outside [0, 1]")
    cal = _resolve(calibration)
    base_wl = replace(cfg.workload, kind=WorkloadKind.SINGLE_PLANE)
    burst_cfg = replace(cfg, workload=replace(base_wl, scheme=Scheme.BURSTING_ONLY))
    stream_cfg = replace(cfg, workload=replace(base_wl, scheme=Scheme.BASELINE))
    return PlaneComparison(
        burst=streaming_report(burst_cfg, cal, dirty_trace=list(dirty_trace)),
        stream=streaming_report(stream_cfg, cal, dirty_trace=list(dirty_trace)),
    )


def compare_schemes(
    cfg: SimConfig,
    calibration: CalibrationSet | str = "default",
    schemes: Iterable[Scheme] | None = None,
    n_windows: int | None = None,
) -> dict[Scheme, EnergyReport]:
    """Price the same playback under several schemes."""
    cal = _resolve(calibration)
    chosen = list(schemes) if schemes is not None else list(Scheme)
    out: dict[Scheme, EnergyReport] = {}
    for scheme in chosen:
        scheme_cfg = replace(cfg, workload=replace(cfg.workload, scheme=scheme))
        out[scheme] = streaming_report(scheme_cfg, cal, n_windows)
    return out


# -- dirty-fraction trace files -------------------------------------------------


def read_dirty_trace(path: str | Path) -> list[float]:
    """Load a per-window dirty-fraction trace CSV (columns: window, dirty_fraction)."""
    rows: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty trace file")
        if [c.strip() for c in header] != ["window", "dirty_fraction"]:
            raise ValueError(
                f"{path}: expected header 'window,dirty_fraction', got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                idx, dirty = int(row[0]), float(row[1])
            except (IndexError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad trace row {row}") from exc
            if idx != len(rows):
                raise ValueError(f"{path}:{lineno}: window indices must be 0,1,2,...")
            if not 0.0 <= dirty <= 1.0:
                raise ValueError(f"{path}:{lineno}: dirty fraction {dirty} outside [0, 1]")
            rows.append(dirty)
    if not rows:
        raise ValueError(f"{path}: trace has no rows")
    return rows


def write_dirty_trace(path: str | Path, trace: Sequence[float]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "dirty_fraction"])
        for i, d in enumerate(trace):
            writer.writerow([i, f"{float(d):.6f}"])


__all__ = [
    "PlaneComparison",
    "PlaneFlags",
    "ScenarioResult",
    "apply_batching",
    "apply_fbc",
    "compare_schemes",
    "energy_reduction",
    "read_dirty_trace",
    "select_scheme",
    "single_plane_burst",
    "write_dirty_trace",
]
