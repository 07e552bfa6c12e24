"""Fit per-state package powers from measured playback runs.

Each measured run contributes one linear equation: the residency-weighted
state powers must reproduce the measured average.  With enough structurally
different runs the system pins every state that actually occurs; the fit
reports its rank so callers can tell a pinned-down table from a guessed one.
Powers are physical quantities, so the solver is non-negative least squares.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.linalg import qr
from scipy.optimize import nnls

from .cstates import PackageCState


class UnderDeterminedError(ValueError):
    """The measured runs cannot pin down every requested state power."""

    def __init__(self, states: Sequence[PackageCState], rank: int, needed: int):
        self.states = tuple(states)
        names = ", ".join(s.value for s in self.states) or "unknown"
        super().__init__(
            f"residency matrix has rank {rank} but {needed} states are being "
            f"fitted; not uniquely identifiable: {names}"
        )


@dataclass(frozen=True)
class MeasuredRun:
    """One power measurement: residencies plus the average the meter saw."""

    residency: Mapping[PackageCState, float]
    average_power_mw: float
    label: str = ""

    def __post_init__(self) -> None:
        total = sum(self.residency.values())
        if not 0.99 <= total <= 1.01:
            raise ValueError(
                f"run '{self.label}': residencies sum to {total:.4f}, expected 1"
            )
        if self.average_power_mw < 0:
            raise ValueError(f"run '{self.label}': negative measured power")


@dataclass(frozen=True)
class FitResult:
    state_power_mw: Mapping[PackageCState, float]
    states: tuple[PackageCState, ...]
    residual_rms_mw: float
    rank: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "state_power_mw": {s.value: p for s, p in self.state_power_mw.items()},
            "states": [s.value for s in self.states],
            "residual_rms_mw": self.residual_rms_mw,
            "rank": self.rank,
        }


def fit_state_powers(
    runs: Sequence[MeasuredRun],
    states: Sequence[PackageCState] | None = None,
) -> FitResult:
    """Non-negative least-squares fit of state powers to measured averages.

    ``states`` defaults to every state with non-zero residency in some run.
    When the residency matrix has lower rank than the number of states being
    solved for, the powers are not unique and the fit refuses with
    :class:`UnderDeterminedError` naming the states it cannot separate.
    """
    if not runs:
        raise ValueError("need at least one measured run")
    if states is None:
        seen = {s for run in runs for s, r in run.residency.items() if r > 0}
        states = tuple(sorted(seen, key=lambda s: s.depth))
    else:
        states = tuple(states)
    if not states:
        raise ValueError("no states to fit")

    a = np.array([[run.residency.get(s, 0.0) for s in states] for run in runs])
    b = np.array([run.average_power_mw for run in runs])
    rank = int(np.linalg.matrix_rank(a))
    if rank < len(states):
        # Column-pivoted QR: the columns pivoted past the numerical rank are
        # the ones that add no new information -- name those states.
        _, _, pivots = qr(a, mode="economic", pivoting=True)
        culprits = sorted((states[i] for i in pivots[rank:]), key=lambda s: s.depth)
        raise UnderDeterminedError(culprits, rank, len(states))
    solution, residual = nnls(a, b)
    rms = float(residual / np.sqrt(len(runs)))
    return FitResult(
        state_power_mw={s: float(p) for s, p in zip(states, solution)},
        states=states,
        residual_rms_mw=rms,
        rank=rank,
    )


@dataclass(frozen=True)
class AccuracyReport:
    predicted_mw: tuple[float, ...]
    measured_mw: tuple[float, ...]
    abs_error_mw: tuple[float, ...]
    mape_pct: float
    max_abs_error_mw: float
    #: Accuracy per dominant state, over runs spending >50% of time in it.
    per_state_accuracy_pct: Mapping[PackageCState, float]

    @property
    def accuracy_pct(self) -> float:
        """100 minus the mean absolute percentage error."""
        return 100.0 - self.mape_pct

    def to_dict(self) -> dict[str, Any]:
        return {
            "predicted_mw": list(self.predicted_mw),
            "measured_mw": list(self.measured_mw),
            "abs_error_mw": list(self.abs_error_mw),
            "mape_pct": self.mape_pct,
            "max_abs_error_mw": self.max_abs_error_mw,
            "accuracy_pct": self.accuracy_pct,
            "per_state_accuracy_pct": {
                s.value: a for s, a in self.per_state_accuracy_pct.items()
            },
        }


def model_accuracy(
    state_power_mw: Mapping[PackageCState, float],
    runs: Sequence[MeasuredRun],
) -> AccuracyReport:
    """How well a power table predicts a set of measured runs.

    Besides the overall figure, runs that spend more than half their time in
    one state grade that state individually.
    """
    if not runs:
        raise ValueError("need at least one measured run")
    predicted = []
    measured = []
    by_state: dict[PackageCState, list[float]] = {}
    for run in runs:
        p = sum(state_power_mw.get(s, 0.0) * r for s, r in run.residency.items())
        predicted.append(p)
        measured.append(run.average_power_mw)
        if run.average_power_mw > 0:
            acc = 100.0 * (1.0 - abs(p - run.average_power_mw) / run.average_power_mw)
            for s, r in run.residency.items():
                if r > 0.5:
                    by_state.setdefault(s, []).append(acc)
    errors = [abs(p - m) for p, m in zip(predicted, measured)]
    pct = [e / m * 100.0 for e, m in zip(errors, measured) if m > 0]
    return AccuracyReport(
        predicted_mw=tuple(predicted),
        measured_mw=tuple(measured),
        abs_error_mw=tuple(errors),
        mape_pct=float(np.mean(pct)) if pct else 0.0,
        max_abs_error_mw=max(errors),
        per_state_accuracy_pct={
            s: float(np.mean(v))
            for s, v in sorted(by_state.items(), key=lambda kv: kv[0].depth)
        },
    )


def runs_from_csv(path: str | Path) -> list[MeasuredRun]:
    """Load measured runs from CSV: label, one residency column per state,
    power_mw, and an optional dram_bandwidth column (ignored by the fit)."""
    out: list[MeasuredRun] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty runs file")
        state_names = {s.value for s in PackageCState}
        known = state_names | {"label", "power_mw", "dram_bandwidth"}
        unknown = set(reader.fieldnames) - known
        if unknown:
            raise ValueError(f"{path}: unknown columns {sorted(unknown)}")
        if "power_mw" not in reader.fieldnames:
            raise ValueError(f"{path}: missing power_mw column")
        for lineno, row in enumerate(reader, start=2):
            try:
                residency = {
                    PackageCState(c): float(row[c])
                    for c in reader.fieldnames
                    if c in state_names and row[c] not in (None, "")
                }
                out.append(
                    MeasuredRun(
                        residency=residency,
                        average_power_mw=float(row["power_mw"]),
                        label=row.get("label") or f"run{lineno - 2}",
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad run row: {exc}") from None
    if not out:
        raise ValueError(f"{path}: runs file has no rows")
    return out


def load_runs(path: str | Path) -> list[MeasuredRun]:
    """Load measured runs from a ``.csv`` or ``.json`` file by extension."""
    p = Path(path)
    if p.suffix.lower() == ".json":
        return runs_from_json(p)
    return runs_from_csv(p)


def runs_from_json(path: str | Path) -> list[MeasuredRun]:
    """Load measured runs from ``{"runs": [{label, residency, average_power_mw}]}``."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    unknown = set(data) - {"runs"}
    if unknown:
        raise ValueError(f"unknown keys in measured-runs file: {sorted(unknown)}")
    raw_runs = data.get("runs")
    if not raw_runs:
        raise ValueError("measured-runs file has no runs")
    out: list[MeasuredRun] = []
    for i, raw in enumerate(raw_runs):
        unknown = set(raw) - {"label", "residency", "average_power_mw"}
        if unknown:
            raise ValueError(f"run {i}: unknown keys {sorted(unknown)}")
        try:
            residency = {
                PackageCState(k): float(v) for k, v in raw["residency"].items()
            }
            out.append(
                MeasuredRun(
                    residency=residency,
                    average_power_mw=float(raw["average_power_mw"]),
                    label=str(raw.get("label", f"run{i}")),
                )
            )
        except KeyError as exc:
            raise ValueError(f"run {i}: missing field {exc}") from None
    return out


__all__ = [
    "AccuracyReport",
    "FitResult",
    "MeasuredRun",
    "UnderDeterminedError",
    "fit_state_powers",
    "load_runs",
    "model_accuracy",
    "runs_from_csv",
    "runs_from_json",
]
