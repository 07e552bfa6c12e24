"""Package power-state lattice, activity resolution, and power calibrations.

The package state at any instant is a pure function of which blocks are
active: CPU cores, GPU, video decoder (VD), display controller (DC), the
display link source/sink, DRAM mode, and the panel mode.  ``deepest_state``
encodes that resolution; profiles attach a power figure (and optional
transition latencies) to every state.

Two calibrations ship with the package:

* ``default``         -- hand-seeded table used for all scenario studies.
* ``reference-fhd30`` -- reproduces a measured full-HD 30 fps playback table
                         (row powers and residencies) when paired with the
                         matching presets.
* ``latency-demo``    -- the default table plus non-zero entry/exit latencies
                         on the deep states, for exercising transition costs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Literal, Mapping

from .core import Scheme


class PackageCState(Enum):
    """Package idle states, shallow to deep.

    ``C7P`` is the C7 variant with the video decoder clock-gated while the
    display controller keeps draining; it sits between C7 and C8.  C3, C6,
    and C10 complete the lattice (core-sleep intermediates and full-off) but
    the shipped schemes never rest in them.
    """

    C0 = "C0"
    C2 = "C2"
    C3 = "C3"
    C6 = "C6"
    C7 = "C7"
    C7P = "C7P"
    C8 = "C8"
    C9 = "C9"
    C10 = "C10"

    @property
    def depth(self) -> int:
        return _DEPTH[self]

    def __str__(self) -> str:
        return self.value


_DEPTH: dict[PackageCState, int] = {
    s: i
    for i, s in enumerate(
        (
            PackageCState.C0,
            PackageCState.C2,
            PackageCState.C3,
            PackageCState.C6,
            PackageCState.C7,
            PackageCState.C7P,
            PackageCState.C8,
            PackageCState.C9,
            PackageCState.C10,
        )
    )
}

STATES_BY_DEPTH: tuple[PackageCState, ...] = tuple(
    sorted(PackageCState, key=lambda s: s.depth)
)

#: DRAM mode implied by each package state (background-power attribution).
STATE_DRAM_MODE: dict[PackageCState, str] = {
    PackageCState.C0: "active",
    PackageCState.C2: "active",
    PackageCState.C3: "self_refresh",
    PackageCState.C6: "self_refresh",
    PackageCState.C7: "self_refresh",
    PackageCState.C7P: "self_refresh",
    PackageCState.C8: "self_refresh",
    PackageCState.C9: "self_refresh",
    PackageCState.C10: "off",
}

VdMode = Literal["on", "gated", "off"]
DramMode = Literal["active", "fast_powerdown", "self_refresh", "off"]
PanelMode = Literal["streaming", "psr", "off"]


class ActivityError(ValueError):
    """The activity vector describes a physically impossible combination."""


@dataclass(frozen=True)
class Activity:
    """Instantaneous on/off picture of every power-relevant block."""

    cores: bool = False
    gpu: bool = False
    vd: VdMode = "off"
    dc: bool = False
    edp_source: bool = False
    edp_sink: bool = False
    dram: DramMode = "self_refresh"
    panel: PanelMode = "psr"


def _check_activity(a: Activity) -> None:
    if a.panel == "streaming" and not (a.edp_source and a.edp_sink):
        raise ActivityError("panel cannot stream without both link ends up")
    if a.edp_sink and not a.edp_source:
        raise ActivityError("link sink is up with no source driving it")
    if a.edp_source and not a.dc:
        raise ActivityError("link source is up with no display controller feeding it")
    if a.vd == "gated" and not a.dc:
        raise ActivityError("decoder is clock-gated awaiting a drain, but the DC is off")
    if a.dc and a.dram == "off" and a.vd == "off":
        raise ActivityError("DC is on but has no data source (DRAM off, decoder off)")
    if (a.cores or a.gpu or a.vd != "off") and a.dram == "off":
        raise ActivityError("compute blocks cannot run with DRAM fully off")


def deepest_state(activity: Activity) -> PackageCState:
    """Deepest package state permitted by the given activity vector.

    The rules fire shallow-first; the first block that pins the package
    decides.  Contradictory vectors raise :class:`ActivityError` instead of
    resolving to a state.
    """
    a = activity
    _check_activity(a)
    if a.cores or a.gpu:
        return PackageCState.C0
    if a.dram == "active":
        return PackageCState.C2
    if a.vd == "on":
        return PackageCState.C7
    if a.vd == "gated":
        return PackageCState.C7P
    if a.dc or a.edp_source:
        return PackageCState.C8
    if a.panel != "off":
        return PackageCState.C9
    return PackageCState.C10


# -- power profiles ---------------------------------------------------------


@dataclass(frozen=True)
class PowerProfile:
    """Per-state package power plus transition latencies for one pipeline mode.

    ``state_power_mw`` is the whole-package draw while resting in a state;
    ``display_power_mw`` is the portion of that attributable to the panel and
    link, and the DRAM background portion follows from the state's DRAM mode
    -- together they give the per-state split used in energy attributions.
    Latencies/powers describe entering a state from above and exiting it
    toward a shallower one; both default to zero (instant transitions).
    """

    name: str
    state_power_mw: Mapping[PackageCState, float]
    display_power_mw: Mapping[PackageCState, float]
    entry_latency_ns: Mapping[PackageCState, int] = field(default_factory=dict)
    exit_latency_ns: Mapping[PackageCState, int] = field(default_factory=dict)
    entry_power_mw: Mapping[PackageCState, float] = field(default_factory=dict)
    exit_power_mw: Mapping[PackageCState, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        missing = set(PackageCState) - set(self.state_power_mw)
        if missing:
            raise ValueError(
                f"profile '{self.name}' lacks powers for {sorted(s.value for s in missing)}"
            )
        for s, p in self.state_power_mw.items():
            if p < 0:
                raise ValueError(f"profile '{self.name}': negative power for {s}")
        # Deeper must never draw more than shallower.
        for prev, cur in zip(STATES_BY_DEPTH, STATES_BY_DEPTH[1:]):
            if self.state_power_mw[cur] > self.state_power_mw[prev] + 1e-9:
                raise ValueError(
                    f"profile '{self.name}': {cur} draws more than shallower {prev}"
                )
        for s in PackageCState:
            disp = self.display_power_mw.get(s, 0.0)
            if disp < 0 or disp > self.state_power_mw[s]:
                raise ValueError(
                    f"profile '{self.name}': display split for {s} outside [0, total]"
                )

    def power_mw(self, state: PackageCState) -> float:
        return self.state_power_mw[state]

    def split(
        self, state: PackageCState, dram_background_mw: Mapping[str, float]
    ) -> tuple[float, float, float]:
        """(dram_background, display, rest) decomposition of a state's power."""
        total = self.state_power_mw[state]
        bg = float(dram_background_mw[STATE_DRAM_MODE[state]])
        disp = float(self.display_power_mw.get(state, 0.0))
        rest = total - bg - disp
        if rest < -0.5:
            raise ValueError(
                f"profile '{self.name}': split components exceed total for {state} "
                f"({bg} + {disp} > {total})"
            )
        return bg, disp, max(rest, 0.0)


@dataclass(frozen=True)
class TransitionCost:
    latency_ns: int
    energy_uj: float


def transition_cost(
    profile: PowerProfile, frm: PackageCState, to: PackageCState
) -> TransitionCost:
    """Latency and energy of moving between two states.

    Going deeper pays the target's entry cost; coming up pays the source's
    exit cost; staying put is free.  Energy is power x latency.
    """
    if frm is to:
        return TransitionCost(0, 0.0)
    if to.depth > frm.depth:
        lat = int(profile.entry_latency_ns.get(to, 0))
        p = float(profile.entry_power_mw.get(to, 0.0))
    else:
        lat = int(profile.exit_latency_ns.get(frm, 0))
        p = float(profile.exit_power_mw.get(frm, 0.0))
    return TransitionCost(lat, p * lat * 1e-6)  # mW * ns -> uJ


@dataclass(frozen=True)
class CalibrationSet:
    """Named pair of power profiles plus pipeline-wide adders.

    ``conventional`` covers schemes that drive the panel every window
    (baseline, bypass_only) and the burst-to-idle scheme that still uses the
    stock orchestration rows; ``burst`` covers the combined scheme whose
    active states carry the panel-side frame-buffer machinery.
    ``drfb_power_mw`` is added on intervals where the panel-side frame buffer
    is active; ``vd_gate_delta_mw`` pins C7P exactly that far below C7.
    """

    name: str
    description: str
    conventional: PowerProfile
    burst: PowerProfile
    vd_gate_delta_mw: float = 95.0
    drfb_power_mw: float = 58.0

    def __post_init__(self) -> None:
        if self.vd_gate_delta_mw < 0 or self.drfb_power_mw < 0:
            raise ValueError("calibration adders must be >= 0")
        for prof in (self.conventional, self.burst):
            c7 = prof.state_power_mw[PackageCState.C7]
            c7p = prof.state_power_mw[PackageCState.C7P]
            want = c7 - self.vd_gate_delta_mw
            if abs(c7p - want) > 1e-6:
                raise ValueError(
                    f"profile '{prof.name}': C7P must equal C7 - "
                    f"{self.vd_gate_delta_mw} mW (expected {want}, got {c7p})"
                )

    def profile_for(self, scheme: Scheme) -> PowerProfile:
        return self.burst if scheme is Scheme.BURSTLINK else self.conventional


# -- calibration file loading ------------------------------------------------

_BUILTIN_FILES = {
    "default": "default_calibration.json",
    "reference-fhd30": "reference_fhd30.json",
    "latency-demo": "latency_demo.json",
}

_PROFILE_KEYS = {
    "state_power_mw",
    "display_power_mw",
    "entry_latency_us",
    "exit_latency_us",
    "entry_power_mw",
    "exit_power_mw",
}

_TOP_KEYS = {"name", "description", "vd_gate_delta_mw", "drfb_power_mw", "profiles"}


def _parse_state_map(
    raw: Mapping[str, Any], where: str, scale: float = 1.0, as_int: bool = False
) -> dict[PackageCState, Any]:
    out: dict[PackageCState, Any] = {}
    for key, val in raw.items():
        try:
            state = PackageCState(key)
        except ValueError:
            raise ValueError(f"unknown state '{key}' in {where}") from None
        out[state] = int(round(val * scale)) if as_int else float(val)
    return out


def _profile_from_dict(name: str, raw: Mapping[str, Any]) -> PowerProfile:
    unknown = set(raw) - _PROFILE_KEYS
    if unknown:
        raise ValueError(f"unknown keys in profile '{name}': {sorted(unknown)}")
    if "state_power_mw" not in raw:
        raise ValueError(f"profile '{name}' missing state_power_mw")
    return PowerProfile(
        name=name,
        state_power_mw=_parse_state_map(raw["state_power_mw"], f"{name}.state_power_mw"),
        display_power_mw=_parse_state_map(
            raw.get("display_power_mw", {}), f"{name}.display_power_mw"
        ),
        entry_latency_ns=_parse_state_map(
            raw.get("entry_latency_us", {}), f"{name}.entry_latency_us", 1_000, True
        ),
        exit_latency_ns=_parse_state_map(
            raw.get("exit_latency_us", {}), f"{name}.exit_latency_us", 1_000, True
        ),
        entry_power_mw=_parse_state_map(
            raw.get("entry_power_mw", {}), f"{name}.entry_power_mw"
        ),
        exit_power_mw=_parse_state_map(
            raw.get("exit_power_mw", {}), f"{name}.exit_power_mw"
        ),
    )


def calibration_from_dict(data: Mapping[str, Any]) -> CalibrationSet:
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown keys in calibration: {sorted(unknown)}")
    profiles = data.get("profiles", {})
    unknown_p = set(profiles) - {"conventional", "burst"}
    if unknown_p:
        raise ValueError(f"unknown profiles in calibration: {sorted(unknown_p)}")
    missing = {"conventional", "burst"} - set(profiles)
    if missing:
        raise ValueError(f"calibration missing profiles: {sorted(missing)}")
    return CalibrationSet(
        name=str(data.get("name", "unnamed")),
        description=str(data.get("description", "")),
        conventional=_profile_from_dict("conventional", profiles["conventional"]),
        burst=_profile_from_dict("burst", profiles["burst"]),
        vd_gate_delta_mw=float(data.get("vd_gate_delta_mw", 95.0)),
        drfb_power_mw=float(data.get("drfb_power_mw", 58.0)),
    )


def load_calibration(name_or_path: str | Path = "default") -> CalibrationSet:
    """Load a built-in calibration by name, or any calibration JSON by path."""
    key = str(name_or_path)
    if key in _BUILTIN_FILES:
        ref = resources.files("framewatt").joinpath("data", _BUILTIN_FILES[key])
        data = json.loads(ref.read_text(encoding="utf-8"))
        return calibration_from_dict(data)
    path = Path(name_or_path)
    if path.exists():
        with open(path, "r", encoding="utf-8") as fh:
            return calibration_from_dict(json.load(fh))
    raise ValueError(
        f"unknown calibration {name_or_path!r}; built-ins are "
        f"{sorted(_BUILTIN_FILES)} or pass a JSON file path"
    )


def check_dram_split_consistency(
    profile: PowerProfile, dram_background_mw: Mapping[str, float], tol_mw: float = 0.5
) -> None:
    """Ensure per-state splits are computable against a DRAM background map.

    Every state's implied background must fit under the state total together
    with the display split (within ``tol_mw`` of slack); raises otherwise.
    """
    for state in PackageCState:
        bg = float(dram_background_mw[STATE_DRAM_MODE[state]])
        disp = float(profile.display_power_mw.get(state, 0.0))
        total = profile.state_power_mw[state]
        if bg + disp > total + tol_mw:
            raise ValueError(
                f"profile '{profile.name}': DRAM background {bg} mW + display "
                f"{disp} mW exceeds {state} total {total} mW"
            )


__all__ = [
    "Activity",
    "ActivityError",
    "CalibrationSet",
    "DramMode",
    "PackageCState",
    "PanelMode",
    "PowerProfile",
    "STATES_BY_DEPTH",
    "STATE_DRAM_MODE",
    "TransitionCost",
    "VdMode",
    "calibration_from_dict",
    "check_dram_split_consistency",
    "deepest_state",
    "load_calibration",
    "transition_cost",
]
