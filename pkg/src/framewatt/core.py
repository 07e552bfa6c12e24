"""Core configuration types and frame arithmetic.

Everything downstream (timeline builders, the event oracle, the power model)
consumes the three config dataclasses defined here.  Geometry and timing
helpers are exact: frame sizes are integers, window durations are integer
nanoseconds, and the window period is also exposed as a `Fraction` so callers
can do rate algebra without float drift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

NS_PER_S = 1_000_000_000

#: Display-controller on-chip buffer size (bytes).  The DC fetches the frame
#: from DRAM in chunks of this size; each chunk fetch is a short DRAM-active
#: burst in the timeline.
DEFAULT_DC_BUFFER_BYTES = 512 * 1024

#: Display-link maximum payload rate, bits per second (four-lane HBR3-class
#: link).  Used for burst transfers; conventional streaming runs at the
#: panel's native rate, which must fit under this ceiling.
DEFAULT_EDP_MAX_BITS_PER_S = 25.92e9


class Scheme(str, Enum):
    """Display pipeline scheme.

    BASELINE       decode -> DRAM -> DC streams to panel all window long
    BYPASS_ONLY    decoder feeds the DC buffer directly (no decoded frame
                   in DRAM); panel is still driven at its native rate
    BURSTING_ONLY  decode -> DRAM -> DC bursts at link max -> deep idle,
                   panel refreshes from its own frame buffer
    BURSTLINK      bypass + bursting combined
    """

    BASELINE = "baseline"
    BYPASS_ONLY = "bypass_only"
    BURSTING_ONLY = "bursting_only"
    BURSTLINK = "burstlink"

    @property
    def uses_bypass(self) -> bool:
        return self in (Scheme.BYPASS_ONLY, Scheme.BURSTLINK)

    @property
    def uses_bursting(self) -> bool:
        return self in (Scheme.BURSTING_ONLY, Scheme.BURSTLINK)


class WorkloadKind(str, Enum):
    """What the machine is rendering."""

    VIDEO = "video"          # straight video playback
    VR360 = "vr360"          # 360-degree video: GPU projection step per frame
    SINGLE_PLANE = "single_plane"  # interactive UI driven by a dirty-rect trace


@dataclass(frozen=True)
class Resolution:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"resolution must be positive, got {self.width}x{self.height}")

    @property
    def pixels(self) -> int:
        return self.width * self.height

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"


#: Named panel geometries accepted anywhere a resolution is parsed.
RESOLUTIONS: dict[str, Resolution] = {
    "fhd": Resolution(1920, 1080),
    "qhd": Resolution(2560, 1440),
    "4k": Resolution(3840, 2160),
    "5k": Resolution(5120, 2880),
}


def parse_resolution(value: str | Resolution) -> Resolution:
    """Accept a preset name ('fhd', '4k', ...) or 'WxH' string."""
    if isinstance(value, Resolution):
        return value
    key = value.strip().lower()
    if key in RESOLUTIONS:
        return RESOLUTIONS[key]
    if "x" in key:
        w, _, h = key.partition("x")
        try:
            return Resolution(int(w), int(h))
        except ValueError:
            pass
    raise ValueError(
        f"unknown resolution {value!r}; use one of {sorted(RESOLUTIONS)} or 'WIDTHxHEIGHT'"
    )


@dataclass(frozen=True)
class DisplayConfig:
    """Panel geometry, refresh timing, and link/panel capabilities."""

    resolution: Resolution = RESOLUTIONS["fhd"]
    refresh_hz: int = 60
    bits_per_pixel: int = 24
    edp_max_bits_per_s: float = DEFAULT_EDP_MAX_BITS_PER_S
    panel_psr_capable: bool = True
    panel_has_drfb: bool = True  # remote frame buffer wide enough for full frames

    def __post_init__(self) -> None:
        if self.refresh_hz <= 0:
            raise ValueError(f"refresh_hz must be positive, got {self.refresh_hz}")
        if self.bits_per_pixel not in (16, 24, 30, 32):
            raise ValueError(f"bits_per_pixel must be one of 16/24/30/32, got {self.bits_per_pixel}")
        if self.edp_max_bits_per_s <= 0:
            raise ValueError("edp_max_bits_per_s must be positive")


@dataclass(frozen=True)
class SystemConfig:
    """SoC-side rates, buffer sizes, and DRAM energy coefficients.

    Rates are bytes per second unless the name says otherwise.  Times are
    seconds.  DRAM traffic coefficients are joules per byte; background powers
    are milliwatts keyed by DRAM mode.
    """

    dc_buffer_bytes: int = DEFAULT_DC_BUFFER_BYTES
    dram_fetch_rate: float = 31.104e9       # DC chunk fetch from DRAM
    decode_rate: float = 22.5e9             # decoder output (decoded bytes/s)
    vd_paced_rate: float | None = None      # decoder pacing when feeding DC directly;
                                            # None = decoder runs at decode_rate
    gpu_pt_rate: float = 20e9               # GPU projection throughput (vr360)
    orchestration_time: float = 1.9e-3      # software wake-up per active window
    burst_orchestration_time: float | None = None  # hardware-assisted wake-up;
                                            # None = 2% of the refresh window
    encoded_bits_per_pixel: float = 0.5     # compressed stream density
    dram_coeff_read: float = 43e-12         # J per byte read
    dram_coeff_write: float = 43e-12        # J per byte written
    dram_background_mw: Mapping[str, float] = field(
        default_factory=lambda: {
            "active": 450.0,
            "fast_powerdown": 150.0,
            "self_refresh": 25.0,
            "off": 0.0,
        }
    )
    dram_capacity_bytes: int = 4 * 1024**3  # working-set ceiling for batching
    fbc_compute_mw: float = 50.0            # extra decode power while compressing
    gpu_active_mw: float = 1500.0           # GPU adder on projection intervals

    def __post_init__(self) -> None:
        if self.dc_buffer_bytes <= 0:
            raise ValueError("dc_buffer_bytes must be positive")
        for name in ("dram_fetch_rate", "decode_rate", "gpu_pt_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.vd_paced_rate is not None and self.vd_paced_rate <= 0:
            raise ValueError("vd_paced_rate must be positive when given")
        if self.orchestration_time < 0:
            raise ValueError("orchestration_time must be >= 0")
        if self.burst_orchestration_time is not None and self.burst_orchestration_time < 0:
            raise ValueError("burst_orchestration_time must be >= 0")
        if not 0 < self.encoded_bits_per_pixel:
            raise ValueError("encoded_bits_per_pixel must be positive")
        if self.dram_coeff_read < 0 or self.dram_coeff_write < 0:
            raise ValueError("DRAM traffic coefficients must be >= 0")
        missing = {"active", "fast_powerdown", "self_refresh", "off"} - set(self.dram_background_mw)
        if missing:
            raise ValueError(f"dram_background_mw missing modes: {sorted(missing)}")


@dataclass(frozen=True)
class WorkloadSpec:
    """What is being played and how the pipeline is configured to show it."""

    kind: WorkloadKind = WorkloadKind.VIDEO
    scheme: Scheme = Scheme.BASELINE
    video_fps: int = 30
    psr_alternate_windows: bool = False  # under baseline, repeat windows become
                                         # panel-self-refresh instead of re-transfers

    def __post_init__(self) -> None:
        if self.video_fps <= 0:
            raise ValueError(f"video_fps must be positive, got {self.video_fps}")


@dataclass(frozen=True)
class SimConfig:
    """Bundle handed to the simulator: panel + SoC + workload."""

    display: DisplayConfig = field(default_factory=DisplayConfig)
    system: SystemConfig = field(default_factory=SystemConfig)
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)

    # -- serialization ----------------------------------------------------

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "SimConfig":
        unknown = set(data) - {"display", "system", "workload"}
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        return SimConfig(
            display=_display_from_dict(data.get("display", {})),
            system=_system_from_dict(data.get("system", {})),
            workload=_workload_from_dict(data.get("workload", {})),
        )

    @staticmethod
    def from_json(path: str | Path) -> "SimConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return SimConfig.from_dict(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        return {
            "display": {
                "resolution": str(self.display.resolution),
                "refresh_hz": self.display.refresh_hz,
                "bits_per_pixel": self.display.bits_per_pixel,
                "edp_max_bits_per_s": self.display.edp_max_bits_per_s,
                "panel_psr_capable": self.display.panel_psr_capable,
                "panel_has_drfb": self.display.panel_has_drfb,
            },
            "system": {
                "dc_buffer_bytes": self.system.dc_buffer_bytes,
                "dram_fetch_rate": self.system.dram_fetch_rate,
                "decode_rate": self.system.decode_rate,
                "vd_paced_rate": self.system.vd_paced_rate,
                "gpu_pt_rate": self.system.gpu_pt_rate,
                "orchestration_time": self.system.orchestration_time,
                "burst_orchestration_time": self.system.burst_orchestration_time,
                "encoded_bits_per_pixel": self.system.encoded_bits_per_pixel,
                "dram_coeff_read": self.system.dram_coeff_read,
                "dram_coeff_write": self.system.dram_coeff_write,
                "dram_background_mw": dict(self.system.dram_background_mw),
                "dram_capacity_bytes": self.system.dram_capacity_bytes,
                "fbc_compute_mw": self.system.fbc_compute_mw,
                "gpu_active_mw": self.system.gpu_active_mw,
            },
            "workload": {
                "kind": self.workload.kind.value,
                "scheme": self.workload.scheme.value,
                "video_fps": self.workload.video_fps,
                "psr_alternate_windows": self.workload.psr_alternate_windows,
            },
        }


def _check_unknown(section: str, data: Mapping[str, Any], allowed: set[str]) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown keys in '{section}' config: {sorted(unknown)}")


def _display_from_dict(data: Mapping[str, Any]) -> DisplayConfig:
    allowed = {f.name for f in fields(DisplayConfig)}
    _check_unknown("display", data, allowed)
    kwargs = dict(data)
    if "resolution" in kwargs:
        kwargs["resolution"] = parse_resolution(kwargs["resolution"])
    return DisplayConfig(**kwargs)


def _system_from_dict(data: Mapping[str, Any]) -> SystemConfig:
    allowed = {f.name for f in fields(SystemConfig)}
    _check_unknown("system", data, allowed)
    return SystemConfig(**data)


def _workload_from_dict(data: Mapping[str, Any]) -> WorkloadSpec:
    allowed = {f.name for f in fields(WorkloadSpec)}
    _check_unknown("workload", data, allowed)
    kwargs = dict(data)
    if "kind" in kwargs:
        kwargs["kind"] = WorkloadKind(kwargs["kind"])
    if "scheme" in kwargs:
        kwargs["scheme"] = Scheme(kwargs["scheme"])
    return WorkloadSpec(**kwargs)


# -- frame arithmetic ------------------------------------------------------


def frame_bytes(resolution: Resolution, bits_per_pixel: int = 24) -> int:
    """Uncompressed frame size in bytes (exact integer)."""
    bits = resolution.pixels * bits_per_pixel
    if bits % 8:
        raise ValueError(f"{resolution} at {bits_per_pixel} bpp is not byte-aligned")
    return bits // 8


def encoded_frame_bytes(resolution: Resolution, encoded_bits_per_pixel: float) -> int:
    """Compressed-bitstream bytes per frame, rounded up to whole bytes."""
    bits = resolution.pixels * encoded_bits_per_pixel
    return int(-(-bits // 8))  # ceil without importing math


def frame_window(refresh_hz: int) -> Fraction:
    """Refresh window period in seconds, exact."""
    return Fraction(1, refresh_hz)


def frame_window_ns(refresh_hz: int) -> int:
    """Refresh window period in integer nanoseconds (rounded)."""
    return round(NS_PER_S / Fraction(refresh_hz))


def panel_stream_rate(
    resolution: Resolution, refresh_hz: int, bits_per_pixel: int = 24
) -> int:
    """Link payload rate (bits/s) needed to stream every refresh conventionally."""
    return frame_bytes(resolution, bits_per_pixel) * 8 * refresh_hz


def burst_transfer_time(n_bytes: int, edp_max_bits_per_s: float) -> float:
    """Seconds to push ``n_bytes`` over the link at its maximum rate."""
    if n_bytes < 0:
        raise ValueError("n_bytes must be >= 0")
    return n_bytes * 8 / edp_max_bits_per_s


def dc_fetch_count(n_bytes: int, dc_buffer_bytes: int) -> int:
    """Number of DC buffer fills needed to move a frame out of DRAM."""
    return -(-n_bytes // dc_buffer_bytes)  # ceil


# -- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """One machine-readable config problem.

    ``code`` is stable (screaming-snake identifier), ``field`` names the
    offending knob, ``message`` is for humans.
    """

    code: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} [{self.field}]: {self.message}"


def validate_config(cfg: SimConfig) -> list[Violation]:
    """Cross-field checks.  Returns an empty list when the config is runnable.

    Per-field range checks already live in the dataclass constructors; this
    catches combinations that are individually fine but jointly impossible.
    """
    out: list[Violation] = []
    disp, sys_, wl = cfg.display, cfg.system, cfg.workload

    native = panel_stream_rate(disp.resolution, disp.refresh_hz, disp.bits_per_pixel)
    if native > disp.edp_max_bits_per_s:
        out.append(
            Violation(
                "LINK_TOO_SLOW",
                "display.edp_max_bits_per_s",
                f"panel needs {native/1e9:.3f} Gb/s to stream "
                f"{disp.resolution}@{disp.refresh_hz} but the link caps at "
                f"{disp.edp_max_bits_per_s/1e9:.3f} Gb/s",
            )
        )

    if wl.video_fps > disp.refresh_hz:
        out.append(
            Violation(
                "FPS_ABOVE_REFRESH",
                "workload.video_fps",
                f"video at {wl.video_fps} fps cannot be shown on a "
                f"{disp.refresh_hz} Hz panel",
            )
        )
    elif disp.refresh_hz % wl.video_fps != 0:
        out.append(
            Violation(
                "FPS_NOT_DIVISOR",
                "workload.video_fps",
                f"refresh {disp.refresh_hz} Hz must be an integer multiple of "
                f"video fps {wl.video_fps} (repeat-window cadence would drift)",
            )
        )

    if wl.scheme.uses_bursting and not disp.panel_has_drfb:
        out.append(
            Violation(
                "BURST_NEEDS_DRFB",
                "display.panel_has_drfb",
                f"scheme '{wl.scheme.value}' parks the panel on its remote "
                "frame buffer; this panel has none",
            )
        )
    if wl.scheme.uses_bursting and not disp.panel_psr_capable:
        out.append(
            Violation(
                "BURST_NEEDS_PSR",
                "display.panel_psr_capable",
                f"scheme '{wl.scheme.value}' requires a self-refresh-capable panel",
            )
        )
    if disp.panel_has_drfb and not disp.panel_psr_capable:
        out.append(
            Violation(
                "DRFB_NEEDS_PSR",
                "display.panel_has_drfb",
                "a remote frame buffer is only usable on a self-refresh-capable panel",
            )
        )
    if wl.psr_alternate_windows and not disp.panel_psr_capable:
        out.append(
            Violation(
                "PSR_NOT_CAPABLE",
                "workload.psr_alternate_windows",
                "repeat windows cannot self-refresh on a panel without PSR",
            )
        )

    fbytes = frame_bytes(disp.resolution, disp.bits_per_pixel)
    window_s = float(frame_window(disp.refresh_hz))

    # A burst must fit inside one refresh window with room for orchestration.
    if wl.scheme.uses_bursting:
        t_burst = burst_transfer_time(fbytes, disp.edp_max_bits_per_s)
        if t_burst >= window_s:
            out.append(
                Violation(
                    "BURST_EXCEEDS_WINDOW",
                    "display.edp_max_bits_per_s",
                    f"bursting one frame takes {t_burst*1e3:.3f} ms, longer than "
                    f"the {window_s*1e3:.3f} ms refresh window",
                )
            )

    # Decode plus wake-up must leave streaming time in the window for the
    # conventional schemes (they drain the frame in what is left of it).
    if not wl.scheme.uses_bypass:
        t_dec = fbytes / sys_.decode_rate
        t_orch = (
            _burst_orchestration_s(sys_, disp.refresh_hz)
            if wl.scheme.uses_bursting
            else sys_.orchestration_time
        )
        busy = t_dec + t_orch
        if wl.scheme.uses_bursting:
            busy += burst_transfer_time(fbytes, disp.edp_max_bits_per_s)
        if busy >= window_s:
            out.append(
                Violation(
                    "WINDOW_OVERRUN",
                    "system.decode_rate",
                    f"wake-up + decode{' + burst' if wl.scheme.uses_bursting else ''} "
                    f"takes {busy*1e3:.3f} ms, leaving no room in the "
                    f"{window_s*1e3:.3f} ms window",
                )
            )
    else:
        # Bypass schemes decode straight into the DC buffer; the decoder
        # (possibly pacing itself below its peak rate) must still deliver a
        # whole frame before the window closes.
        pace = sys_.vd_paced_rate or sys_.decode_rate
        if wl.scheme is Scheme.BURSTLINK:
            t_orch = _burst_orchestration_s(sys_, disp.refresh_hz)
            t_xfer = fbytes / min(pace, disp.edp_max_bits_per_s / 8)
        else:
            t_orch = sys_.orchestration_time
            t_xfer = fbytes / pace
        if t_orch + t_xfer >= window_s:
            out.append(
                Violation(
                    "WINDOW_OVERRUN",
                    "system.vd_paced_rate" if sys_.vd_paced_rate else "system.decode_rate",
                    f"wake-up + direct-feed transfer takes {(t_orch + t_xfer)*1e3:.3f} ms, "
                    f"leaving no room in the {window_s*1e3:.3f} ms window",
                )
            )

    if wl.kind is WorkloadKind.VR360 and wl.scheme in (
        Scheme.BYPASS_ONLY,
        Scheme.BURSTING_ONLY,
    ):
        out.append(
            Violation(
                "VR_SCHEME_UNSUPPORTED",
                "workload.scheme",
                "360-degree playback is modeled for 'baseline' and 'burstlink' only",
            )
        )

    return out


def _burst_orchestration_s(system: SystemConfig, refresh_hz: int) -> float:
    """Burst-scheme wake-up time; defaults to 2% of the refresh window."""
    if system.burst_orchestration_time is not None:
        return system.burst_orchestration_time
    return float(frame_window(refresh_hz)) * 0.02


__all__ = [
    "DEFAULT_DC_BUFFER_BYTES",
    "DEFAULT_EDP_MAX_BITS_PER_S",
    "NS_PER_S",
    "DisplayConfig",
    "RESOLUTIONS",
    "Resolution",
    "Scheme",
    "SimConfig",
    "SystemConfig",
    "Violation",
    "WorkloadKind",
    "WorkloadSpec",
    "burst_transfer_time",
    "dc_fetch_count",
    "encoded_frame_bytes",
    "frame_bytes",
    "frame_window",
    "frame_window_ns",
    "panel_stream_rate",
    "parse_resolution",
    "validate_config",
    "replace",
]
