"""Command-line front end.

Subcommands
-----------
``simulate``
    Build the interval timeline for one configuration, price it, and write
    ``report.json`` / ``report.csv`` / ``timeline.csv`` / ``timeline.svg``.
``compare``
    Price two configurations (side A vs side B) and report side-by-side
    residencies, powers, component breakdowns, and percentage deltas.
``sweep``
    Grid of resolution x frame-rate x scheme x overlay axes into one
    ``sweep.csv`` / ``sweep.json``; every row carries its energy reduction
    against the plain scheme at the same panel and frame rate.
``calibrate``
    Fit per-state package powers from measured residency/power runs; emits a
    loadable calibration file plus per-run residuals.
``validate``
    Check a configuration, then cross-check the analytic timeline against the
    event-driven reference executor (``--grid`` covers the 50-point grid).
``presets``
    List the built-in named configurations.

Exit codes: 0 on success, 1 on runtime errors (unreadable files, cross-check
deviation), 2 on usage or configuration problems (bad flags, failed
validation, under-determined fits).  All file output is deterministic:
reports embed a run manifest with the resolved inputs and the tool version,
never timestamps, so identical invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .calibrate import (
    UnderDeterminedError,
    fit_state_powers,
    load_runs,
    model_accuracy,
)
from .core import (
    Scheme,
    SimConfig,
    SystemConfig,
    Violation,
    WorkloadKind,
    WorkloadSpec,
    DisplayConfig,
    parse_resolution,
    replace,
    validate_config,
)
from .cstates import PackageCState, calibration_from_dict, load_calibration
from .oracle import oracle_simulate
from .power import ConfigurationError, report_from_timeline, window_energy_breakdown
from .presets import PRESETS, get_preset, validation_grid
from .scenarios import energy_reduction, read_dirty_trace
from .timeline import build_timeline, timeline_to_csv, timeline_to_svg

_SCHEME_NAMES = [s.value for s in Scheme]
_KIND_NAMES = [k.value for k in WorkloadKind]

#: Cross-check tolerance: analytic vs event-driven executor.
_ENERGY_TOL_PCT = 0.1
_RESIDENCY_TOL_PP = 0.1


# -- argument plumbing -----------------------------------------------------------


def _add_source_args(p: argparse.ArgumentParser, *, overrides: bool = True) -> None:
    src = p.add_argument_group("configuration source")
    src.add_argument("--config", metavar="PATH", help="configuration JSON file")
    src.add_argument(
        "--preset",
        metavar="NAME",
        choices=sorted(PRESETS),
        help="built-in configuration (see the 'presets' subcommand)",
    )
    src.add_argument(
        "--calibration",
        metavar="NAME_OR_PATH",
        help="power calibration: built-in name or JSON path "
        "(default: the preset's, else 'default')",
    )
    if overrides:
        ov = p.add_argument_group("workload overrides")
        ov.add_argument("--scheme", choices=_SCHEME_NAMES)
        ov.add_argument("--kind", choices=_KIND_NAMES)
        ov.add_argument("--fps", type=int, metavar="N", help="video frame rate")
        ov.add_argument(
            "--psr-alternate",
            action="store_true",
            help="let the plain scheme self-refresh on repeated windows",
        )


def _add_run_args(p: argparse.ArgumentParser) -> None:
    run = p.add_argument_group("run shape")
    run.add_argument("--windows", type=int, metavar="N",
                     help="refresh windows to simulate (default: one frame "
                          "group, or one full batch cycle when batching)")
    run.add_argument("--seed", type=int, metavar="N",
                     help="recorded in the manifest for downstream tooling")
    run.add_argument(
        "--fbc-ratio", type=float, default=1.0, metavar="R",
        help="frame-buffer compression ratio in (0,1]; 1 disables (default)",
    )
    run.add_argument(
        "--batch-every", type=int, default=1, metavar="B",
        help="decode B frames ahead in one window; 1 disables (default)",
    )
    run.add_argument(
        "--cached-fraction", type=float, default=0.34, metavar="F",
        help="buffer-traffic fraction saved by batching (default 0.34)",
    )
    run.add_argument("--trace", metavar="PATH",
                     help="dirty-fraction CSV driving single-plane workloads")


def _add_out_args(p: argparse.ArgumentParser) -> None:
    out = p.add_argument_group("output")
    out.add_argument("--out", metavar="DIR", help="directory for result files")
    out.add_argument(
        "--format",
        choices=["json", "csv", "both"],
        default="both",
        help="which result files to write under --out (default: both)",
    )


def _resolve_config(args: argparse.Namespace) -> tuple[SimConfig, str]:
    """Turn --preset/--config plus overrides into a config and calibration."""
    if args.config and args.preset:
        raise ValueError("--config and --preset are mutually exclusive")
    if args.config:
        cfg = SimConfig.from_json(args.config)
        calibration = "default"
    elif args.preset:
        preset = get_preset(args.preset)
        cfg = preset.config
        calibration = preset.calibration
    else:
        raise ValueError("one of --config or --preset is required")
    if args.calibration:
        calibration = args.calibration

    cfg = _apply_workload_overrides(
        cfg,
        scheme=getattr(args, "scheme", None),
        kind=getattr(args, "kind", None),
        fps=getattr(args, "fps", None),
        psr_alternate=getattr(args, "psr_alternate", False),
    )
    return cfg, calibration


def _apply_workload_overrides(
    cfg: SimConfig,
    *,
    scheme: str | None,
    kind: str | None,
    fps: int | None,
    psr_alternate: bool,
) -> SimConfig:
    wl = cfg.workload
    if scheme:
        wl = replace(wl, scheme=Scheme(scheme))
    if kind:
        wl = replace(wl, kind=WorkloadKind(kind))
    if fps:
        wl = replace(wl, video_fps=fps)
    if psr_alternate:
        wl = replace(wl, psr_alternate_windows=True)
    if wl is not cfg.workload:
        cfg = replace(cfg, workload=wl)
    return cfg


def _auto_windows(cfg: SimConfig, windows: int | None, batch_every: int) -> int | None:
    """Default the window count to one full batch cycle when batching."""
    if windows is not None or batch_every <= 1:
        return windows
    wl = cfg.workload
    if wl.kind is WorkloadKind.SINGLE_PLANE:
        return windows
    group = max(1, cfg.display.refresh_hz // wl.video_fps)
    return batch_every * group


def _manifest(command: str, args: argparse.Namespace, calibration: str,
              windows: int | None, **extra: Any) -> dict[str, Any]:
    overrides = {
        k: v
        for k, v in (
            ("scheme", getattr(args, "scheme", None)),
            ("kind", getattr(args, "kind", None)),
            ("fps", getattr(args, "fps", None)),
            ("psr_alternate", getattr(args, "psr_alternate", None) or None),
            ("fbc_ratio", getattr(args, "fbc_ratio", 1.0) != 1.0 or None),
            ("batch_every", getattr(args, "batch_every", 1) != 1 or None),
        )
        if v
    }
    if "fbc_ratio" in overrides:
        overrides["fbc_ratio"] = args.fbc_ratio
    if "batch_every" in overrides:
        overrides["batch_every"] = args.batch_every
    doc = {
        "tool": "framewatt",
        "version": __version__,
        "command": command,
        "preset": getattr(args, "preset", None),
        "config_paths": [args.config] if getattr(args, "config", None) else [],
        "calibration": calibration,
        "out": getattr(args, "out", None),
        "windows": windows,
        "seed": getattr(args, "seed", None),
        "overrides": overrides,
    }
    doc.update(extra)
    return doc


def _dump_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def _print_violations(violations: Sequence[Violation]) -> None:
    for v in violations:
        print(f"violation\t{v.code}\t{v.field}\t{v.message}", file=sys.stderr)


def _pct_delta(a: float, b: float) -> float | None:
    """Percentage change from a to b; None when a is zero."""
    if a == 0:
        return None
    return 100.0 * (b - a) / a


def _fmt_delta(delta: float | None, unit: str = "%") -> str:
    return "n/a" if delta is None else f"{delta:+.2f}{unit}"


# -- simulate --------------------------------------------------------------------


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg, calibration_id = _resolve_config(args)
    calibration = load_calibration(calibration_id)
    trace = read_dirty_trace(args.trace) if args.trace else None
    windows = _auto_windows(cfg, args.windows, args.batch_every)

    violations = validate_config(cfg)
    if violations:
        raise ConfigurationError(violations)
    timeline = build_timeline(
        cfg,
        windows,
        fbc_ratio=args.fbc_ratio,
        batch_every=args.batch_every,
        cached_traffic_fraction=args.cached_fraction,
        dirty_trace=trace,
    )
    report = report_from_timeline(timeline, cfg, calibration)

    total_s = report.total_ns * 1e-9
    print(f"scheme           {report.scheme.value}")
    print(f"calibration      {report.calibration_name} ({report.profile_name} profile)")
    print(f"windows          {report.n_windows} ({total_s * 1e3:.3f} ms)")
    print(f"average power    {report.average_power_mw:.2f} mW")
    print(f"analytic power   {report.analytic_average_power_mw:.2f} mW")
    print(f"total energy     {report.total_energy_uj:.1f} uJ")
    comp = report.component_energy_uj
    print(
        "components       "
        f"dram={comp['dram']:.1f} uJ, display={comp['display']:.1f} uJ, "
        f"others={comp['others']:.1f} uJ"
    )
    residency = ", ".join(
        f"{s.value}={r * 100:.2f}%" for s, r in sorted(
            report.residency.items(), key=lambda kv: kv[0].depth
        ) if r > 0
    )
    print(f"residency        {residency}")
    print(
        "traffic          "
        f"reads={report.dram_read_bytes} B, writes={report.dram_write_bytes} B, "
        f"link={report.edp_bytes} B"
    )

    if not args.out:
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest("simulate", args, calibration.name, report.n_windows)
    if args.format in ("json", "both"):
        doc = {"manifest": manifest, "config": cfg.to_dict(), "report": report.to_dict()}
        _write(out / "report.json", _dump_json(doc))
    if args.format in ("csv", "both"):
        _write(out / "timeline.csv", timeline_to_csv(timeline))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["window", "kind", "total_uj", "dram_uj", "display_uj",
                    "others_uj", "transition_uj", "dram_operating_uj", "adders_uj"])
        for we in window_energy_breakdown(timeline, cfg, calibration):
            w.writerow([we.window, we.kind, f"{we.total_uj:.6f}",
                        f"{we.dram_uj:.6f}", f"{we.display_uj:.6f}",
                        f"{we.others_uj:.6f}", f"{we.transition_uj:.6f}",
                        f"{we.dram_operating_uj:.6f}", f"{we.adders_uj:.6f}"])
        _write(out / "report.csv", buf.getvalue())
    _write(out / "timeline.svg", timeline_to_svg(timeline))
    return 0


# -- compare ---------------------------------------------------------------------


def _add_side_b_args(p: argparse.ArgumentParser) -> None:
    b = p.add_argument_group(
        "side B (defaults: side A's configuration and overlays; flags below "
        "override per side)"
    )
    b.add_argument("--config-b", metavar="PATH", help="side B configuration JSON")
    b.add_argument("--preset-b", metavar="NAME", choices=sorted(PRESETS),
                   help="side B built-in configuration")
    b.add_argument("--calibration-b", metavar="NAME_OR_PATH")
    b.add_argument("--scheme-b", choices=_SCHEME_NAMES)
    b.add_argument("--kind-b", choices=_KIND_NAMES)
    b.add_argument("--fps-b", type=int, metavar="N")
    b.add_argument("--psr-alternate-b", action="store_true")
    b.add_argument("--fbc-ratio-b", type=float, metavar="R")
    b.add_argument("--batch-every-b", type=int, metavar="B")
    b.add_argument("--cached-fraction-b", type=float, metavar="F")
    b.add_argument("--trace-b", metavar="PATH")


def _resolve_side_b(
    args: argparse.Namespace, cfg_a: SimConfig, calibration_a: str
) -> tuple[SimConfig, str, dict[str, Any]]:
    """Side B = its own source (if given, pristine) else side A's result."""
    if args.config_b and args.preset_b:
        raise ValueError("--config-b and --preset-b are mutually exclusive")
    has_source = bool(args.config_b or args.preset_b)
    if args.config_b:
        cfg = SimConfig.from_json(args.config_b)
        calibration = "default"
    elif args.preset_b:
        preset = get_preset(args.preset_b)
        cfg = preset.config
        calibration = preset.calibration
    else:
        cfg = cfg_a
        calibration = calibration_a
    if args.calibration_b:
        calibration = args.calibration_b

    cfg = _apply_workload_overrides(
        cfg,
        scheme=args.scheme_b,
        kind=args.kind_b,
        fps=args.fps_b,
        psr_alternate=args.psr_alternate_b,
    )

    def inherit(b_val: Any, a_val: Any, default: Any) -> Any:
        if b_val is not None:
            return b_val
        return default if has_source else a_val

    overlays = {
        "fbc_ratio": inherit(args.fbc_ratio_b, args.fbc_ratio, 1.0),
        "batch_every": inherit(args.batch_every_b, args.batch_every, 1),
        "cached_fraction": inherit(args.cached_fraction_b, args.cached_fraction, 0.34),
        "trace": inherit(args.trace_b, args.trace, None),
    }
    return cfg, calibration, overlays


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg_a, calibration_id_a = _resolve_config(args)
    cfg_b, calibration_id_b, overlays_b = _resolve_side_b(args, cfg_a, calibration_id_a)
    cal_a = load_calibration(calibration_id_a)
    cal_b = load_calibration(calibration_id_b)

    mismatch = cfg_a.display != cfg_b.display
    if mismatch:
        print(
            "warning: the two sides drive different display configurations "
            f"({cfg_a.display.resolution}@{cfg_a.display.refresh_hz}Hz vs "
            f"{cfg_b.display.resolution}@{cfg_b.display.refresh_hz}Hz); "
            "deltas compare unlike panels",
            file=sys.stderr,
        )

    def run(cfg: SimConfig, cal: Any, fbc: float, batch: int, cached: float,
            trace_path: str | None) -> Any:
        violations = validate_config(cfg)
        if violations:
            raise ConfigurationError(violations)
        trace = read_dirty_trace(trace_path) if trace_path else None
        timeline = build_timeline(
            cfg,
            _auto_windows(cfg, args.windows, batch),
            fbc_ratio=fbc,
            batch_every=batch,
            cached_traffic_fraction=cached,
            dirty_trace=trace,
        )
        return report_from_timeline(timeline, cfg, cal)

    rep_a = run(cfg_a, cal_a, args.fbc_ratio, args.batch_every,
                args.cached_fraction, args.trace)
    rep_b = run(cfg_b, cal_b, overlays_b["fbc_ratio"], overlays_b["batch_every"],
                overlays_b["cached_fraction"], overlays_b["trace"])

    epw_a = rep_a.total_energy_uj / rep_a.n_windows
    epw_b = rep_b.total_energy_uj / rep_b.n_windows
    delta_power = _pct_delta(rep_a.average_power_mw, rep_b.average_power_mw)
    delta_epw = _pct_delta(epw_a, epw_b)
    residency_pp = {
        s: (rep_b.residency.get(s, 0.0) - rep_a.residency.get(s, 0.0)) * 100
        for s in PackageCState
        if rep_a.residency.get(s, 0.0) > 0 or rep_b.residency.get(s, 0.0) > 0
    }
    component_pct = {
        key: _pct_delta(rep_a.component_energy_uj[key] / rep_a.n_windows,
                        rep_b.component_energy_uj[key] / rep_b.n_windows)
        for key in ("dram", "display", "others")
    }
    traffic_pct = {
        "dram_read_bytes": _pct_delta(rep_a.dram_read_bytes / rep_a.n_windows,
                                      rep_b.dram_read_bytes / rep_b.n_windows),
        "dram_write_bytes": _pct_delta(rep_a.dram_write_bytes / rep_a.n_windows,
                                       rep_b.dram_write_bytes / rep_b.n_windows),
        "edp_bytes": _pct_delta(rep_a.edp_bytes / rep_a.n_windows,
                                rep_b.edp_bytes / rep_b.n_windows),
    }

    rows: list[tuple[str, str, str, str]] = [
        ("scheme", rep_a.scheme.value, rep_b.scheme.value, ""),
        ("calibration", rep_a.calibration_name, rep_b.calibration_name, ""),
        ("windows", str(rep_a.n_windows), str(rep_b.n_windows), ""),
        ("average_power_mw", f"{rep_a.average_power_mw:.2f}",
         f"{rep_b.average_power_mw:.2f}", _fmt_delta(delta_power)),
        ("energy_per_window_uj", f"{epw_a:.2f}", f"{epw_b:.2f}",
         _fmt_delta(delta_epw)),
    ]
    for s in sorted(residency_pp, key=lambda st: st.depth):
        rows.append((
            f"residency_{s.value}_pct",
            f"{rep_a.residency.get(s, 0.0) * 100:.2f}",
            f"{rep_b.residency.get(s, 0.0) * 100:.2f}",
            _fmt_delta(residency_pp[s], "pp"),
        ))
    for key in ("dram", "display", "others"):
        rows.append((
            f"component_{key}_uj_per_window",
            f"{rep_a.component_energy_uj[key] / rep_a.n_windows:.2f}",
            f"{rep_b.component_energy_uj[key] / rep_b.n_windows:.2f}",
            _fmt_delta(component_pct[key]),
        ))
    for key, label in (("dram_read_bytes", "dram_reads_per_window_B"),
                       ("dram_write_bytes", "dram_writes_per_window_B"),
                       ("edp_bytes", "link_bytes_per_window_B")):
        rows.append((
            label,
            f"{getattr(rep_a, key) / rep_a.n_windows:.0f}",
            f"{getattr(rep_b, key) / rep_b.n_windows:.0f}",
            _fmt_delta(traffic_pct[key]),
        ))

    print(f"{'metric':<32} {'A':>16} {'B':>16} {'delta':>10}")
    for name, a, b, d in rows:
        print(f"{name:<32} {a:>16} {b:>16} {d:>10}")
    if mismatch:
        print("note: display configurations differ between the sides")

    if not args.out:
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest(
        "compare", args, cal_a.name, args.windows,
        side_b={
            "preset": args.preset_b,
            "config_paths": [args.config_b] if args.config_b else [],
            "calibration": cal_b.name,
            "overrides": {
                k: v
                for k, v in (
                    ("scheme", args.scheme_b),
                    ("kind", args.kind_b),
                    ("fps", args.fps_b),
                    ("psr_alternate", args.psr_alternate_b or None),
                    ("fbc_ratio", args.fbc_ratio_b),
                    ("batch_every", args.batch_every_b),
                )
                if v is not None
            },
        },
    )
    if args.format in ("json", "both"):
        doc = {
            "manifest": manifest,
            "display_mismatch": mismatch,
            "a": {"config": cfg_a.to_dict(), "report": rep_a.to_dict()},
            "b": {"config": cfg_b.to_dict(), "report": rep_b.to_dict()},
            "delta": {
                "average_power_pct": delta_power,
                "energy_per_window_pct": delta_epw,
                "residency_pp": {s.value: d for s, d in sorted(
                    residency_pp.items(), key=lambda kv: kv[0].depth)},
                "component_pct": component_pct,
                "traffic_pct": traffic_pct,
            },
        }
        _write(out / "compare.json", _dump_json(doc))
    if args.format in ("csv", "both"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "a", "b", "delta"])
        w.writerows(rows)
        _write(out / "compare.csv", buf.getvalue())
    return 0


# -- sweep -----------------------------------------------------------------------


def _axis(raw: str | None, default: str, label: str) -> list[str]:
    items = [s.strip() for s in (raw if raw is not None else default).split(",")
             if s.strip()]
    if not items:
        raise ValueError(f"empty sweep grid: no values for {label}")
    return items


_SWEEP_COLUMNS = [
    "resolution", "refresh_hz", "fps", "kind", "scheme", "fbc_ratio",
    "batch_every", "calibration", "status", "violations", "n_windows",
    "average_power_mw", "energy_per_window_uj", "reduction_vs_baseline_pct",
]


def _sweep_point(
    res: str, refresh: int, fps: int, kind: WorkloadKind, scheme: Scheme,
    fbc: float, batch: int, calibration: Any, windows: int | None,
) -> tuple[dict[str, Any], Any]:
    """Evaluate one grid point; returns (row, report-or-None)."""
    row: dict[str, Any] = {
        "resolution": str(parse_resolution(res)),
        "refresh_hz": refresh,
        "fps": fps,
        "kind": kind.value,
        "scheme": scheme.value,
        "fbc_ratio": fbc,
        "batch_every": batch,
        "calibration": calibration.name,
        "status": "ok",
        "violations": "",
        "n_windows": None,
        "average_power_mw": None,
        "energy_per_window_uj": None,
        "reduction_vs_baseline_pct": None,
    }
    cfg = SimConfig(
        display=DisplayConfig(resolution=parse_resolution(res), refresh_hz=refresh),
        system=SystemConfig(),
        workload=WorkloadSpec(kind=kind, scheme=scheme, video_fps=fps),
    )
    violations = validate_config(cfg)
    if violations:
        row["status"] = "skipped"
        row["violations"] = ";".join(v.code for v in violations)
        return row, None
    try:
        timeline = build_timeline(
            cfg, _auto_windows(cfg, windows, batch), fbc_ratio=fbc, batch_every=batch
        )
    except ValueError as exc:
        row["status"] = "skipped"
        row["violations"] = str(exc)
        return row, None
    report = report_from_timeline(timeline, cfg, calibration)
    row["n_windows"] = report.n_windows
    row["average_power_mw"] = round(report.average_power_mw, 4)
    row["energy_per_window_uj"] = round(report.total_energy_uj / report.n_windows, 4)
    return row, report


def _cmd_sweep(args: argparse.Namespace) -> int:
    resolutions = _axis(args.resolutions, "fhd,qhd,4k,5k", "--resolutions")
    fps_axis = [int(v) for v in _axis(args.fps, "30,60", "--fps")]
    schemes = [Scheme(v) for v in _axis(args.schemes, ",".join(_SCHEME_NAMES),
                                        "--schemes")]
    fbc_axis = [float(v) for v in _axis(args.fbc_ratios, "1.0", "--fbc-ratios")]
    batch_axis = [int(v) for v in _axis(args.batch_sizes, "1", "--batch-sizes")]
    kind = WorkloadKind(args.kind or WorkloadKind.VIDEO.value)
    calibration = load_calibration(args.calibration or "default")

    points = [
        (res, args.refresh, fps, kind, scheme, fbc, batch)
        for res in resolutions
        for fps in fps_axis
        for scheme in schemes
        for fbc in fbc_axis
        for batch in batch_axis
    ]
    # Each baseline reference is a no-overlay plain-scheme run at the same
    # panel and frame rate; points are independent, so evaluate in parallel
    # and assemble rows in grid order.
    ref_keys = sorted({(res, refresh, fps) for res, refresh, fps, *_ in points})
    workers = min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        ref_jobs = {
            key: pool.submit(
                _sweep_point, key[0], key[1], key[2], kind, Scheme.BASELINE,
                1.0, 1, calibration, args.windows,
            )
            for key in ref_keys
        }
        point_jobs = [
            pool.submit(_sweep_point, res, refresh, fps, knd, scheme, fbc, batch,
                        calibration, args.windows)
            for res, refresh, fps, knd, scheme, fbc, batch in points
        ]
        refs = {key: job.result()[1] for key, job in ref_jobs.items()}
        rows = []
        for (res, refresh, fps, knd, scheme, fbc, batch), job in zip(points,
                                                                     point_jobs):
            row, report = job.result()
            if report is not None:
                base = refs.get((res, refresh, fps))
                if scheme is Scheme.BASELINE and fbc == 1.0 and batch == 1:
                    row["reduction_vs_baseline_pct"] = 0.0
                elif base is not None:
                    row["reduction_vs_baseline_pct"] = round(
                        energy_reduction(base, report), 4)
            rows.append(row)

    print(" ".join(f"{h:>{max(len(h), 10)}}" for h in _SWEEP_COLUMNS))
    for r in rows:
        cells = ["" if r[h] is None else str(r[h]) for h in _SWEEP_COLUMNS]
        print(" ".join(f"{c:>{max(len(h), 10)}}" for c, h in zip(cells,
                                                                 _SWEEP_COLUMNS)))

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.format in ("csv", "both"):
            buf = io.StringIO()
            w = csv.DictWriter(buf, fieldnames=_SWEEP_COLUMNS, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({h: ("" if r[h] is None else r[h])
                            for h in _SWEEP_COLUMNS})
            _write(out / "sweep.csv", buf.getvalue())
        if args.format in ("json", "both"):
            doc = {
                "manifest": _manifest("sweep", args, calibration.name, args.windows),
                "rows": rows,
            }
            _write(out / "sweep.json", _dump_json(doc))
    return 0


# -- calibrate -------------------------------------------------------------------


def _fitted_calibration_doc(
    fit: Any, base: Any, name: str
) -> dict[str, Any]:
    """Loadable calibration document built around the fitted state powers.

    Both profiles carry the fitted powers (unfitted states inherit the base
    profile's row); the decoder gating delta is re-derived so the document
    stays self-consistent.
    """
    powers = dict(base.conventional.state_power_mw)
    powers.update(fit.state_power_mw)
    delta = powers[PackageCState.C7] - powers[PackageCState.C7P]
    profile = {
        "state_power_mw": {s.value: round(powers[s], 6) for s in PackageCState},
        "display_power_mw": {
            s.value: p for s, p in base.conventional.display_power_mw.items()
        },
    }
    return {
        "name": name,
        "description": "fitted from measured residency/power runs",
        "vd_gate_delta_mw": round(delta, 6),
        "drfb_power_mw": base.drfb_power_mw,
        "profiles": {"conventional": profile, "burst": dict(profile)},
    }


def _cmd_calibrate(args: argparse.Namespace) -> int:
    runs = load_runs(args.runs)
    states = None
    if args.states:
        states = [PackageCState(s) for s in args.states.split(",")]
    try:
        fit = fit_state_powers(runs, states)
    except UnderDeterminedError as exc:
        print(f"under-determined: {exc}", file=sys.stderr)
        return 2
    accuracy = model_accuracy(fit.state_power_mw, runs)

    print(f"runs             {len(runs)}")
    print(f"states fitted    {', '.join(s.value for s in fit.states)} "
          f"(rank {fit.rank})")
    for s in fit.states:
        print(f"  {s.value:<5} {fit.state_power_mw[s]:>10.2f} mW")
    print(f"residual rms     {fit.residual_rms_mw:.3f} mW")
    print(f"model accuracy   {accuracy.accuracy_pct:.2f}% "
          f"(max abs error {accuracy.max_abs_error_mw:.2f} mW)")
    for s, acc in accuracy.per_state_accuracy_pct.items():
        print(f"  {s.value:<5} {acc:>9.2f}% (runs dominated by this state)")

    if not args.out:
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = load_calibration(args.base)
    residuals = [
        {"label": run.label, "measured_mw": m, "predicted_mw": round(p, 6),
         "error_mw": round(p - m, 6)}
        for run, p, m in zip(runs, accuracy.predicted_mw, accuracy.measured_mw)
    ]
    doc = {
        "manifest": _manifest("calibrate", args, base.name, None,
                              runs_path=str(args.runs)),
        "fit": fit.to_dict(),
        "accuracy": accuracy.to_dict(),
        "residuals": residuals,
    }
    _write(out / "calibration_fit.json", _dump_json(doc))
    fitted = _fitted_calibration_doc(fit, base, args.name)
    try:
        calibration_from_dict(fitted)
    except ValueError as exc:
        print(f"warning: fitted powers do not form a loadable calibration "
              f"({exc}); skipping calibration file", file=sys.stderr)
    else:
        _write(out / "calibration_fitted.json", _dump_json(fitted))
    return 0


# -- validate --------------------------------------------------------------------


def _cross_check(
    cfg: SimConfig, calibration: Any, windows: int | None,
    fbc: float, batch: int, cached: float, trace: Sequence[float] | None,
) -> tuple[float, float]:
    """(energy deviation %, worst residency deviation pp) analytic vs oracle."""
    timeline = build_timeline(
        cfg, windows, fbc_ratio=fbc, batch_every=batch,
        cached_traffic_fraction=cached, dirty_trace=trace,
    )
    report = report_from_timeline(timeline, cfg, calibration)
    oracle = oracle_simulate(
        cfg, windows, fbc_ratio=fbc, batch_every=batch,
        cached_traffic_fraction=cached, dirty_trace=trace,
    )
    energy_dev = abs(oracle.energy_uj(cfg, calibration) - report.total_energy_uj)
    energy_dev_pct = 100.0 * energy_dev / report.total_energy_uj
    o_res = oracle.residency()
    res_dev_pp = max(
        abs(o_res.get(s, 0.0) - report.residency.get(s, 0.0)) * 100
        for s in PackageCState
    )
    return energy_dev_pct, res_dev_pp


def _cmd_validate(args: argparse.Namespace) -> int:
    points: list[tuple[str, SimConfig, Any, dict[str, Any]]] = []
    if args.grid:
        for label, cfg, calibration_id in validation_grid():
            points.append((label, cfg, load_calibration(calibration_id),
                           {"windows": None, "fbc": 1.0, "batch": 1,
                            "cached": 0.34, "trace": None}))
    else:
        cfg, calibration_id = _resolve_config(args)
        violations = validate_config(cfg)
        if violations:
            _print_violations(violations)
            return 2
        print("configuration OK")
        trace = read_dirty_trace(args.trace) if args.trace else None
        points.append((
            "config", cfg, load_calibration(calibration_id),
            {"windows": _auto_windows(cfg, args.windows, args.batch_every),
             "fbc": args.fbc_ratio, "batch": args.batch_every,
             "cached": args.cached_fraction, "trace": trace},
        ))

    results = []
    for label, cfg, calibration, opts in points:
        violations = validate_config(cfg)
        if violations:
            _print_violations(violations)
            return 2
        energy_dev, res_dev = _cross_check(
            cfg, calibration, opts["windows"], opts["fbc"], opts["batch"],
            opts["cached"], opts["trace"],
        )
        results.append({"label": label, "energy_deviation_pct": energy_dev,
                        "residency_deviation_pp": res_dev})
        print(f"{label:<28} energy {energy_dev:9.6f}%   "
              f"residency {res_dev:9.6f}pp")

    max_energy = max(r["energy_deviation_pct"] for r in results)
    max_res = max(r["residency_deviation_pp"] for r in results)
    ok = max_energy < _ENERGY_TOL_PCT and max_res < _RESIDENCY_TOL_PP
    print(f"max deviation over {len(results)} point(s): "
          f"energy {max_energy:.6f}% (tol {_ENERGY_TOL_PCT}%), "
          f"residency {max_res:.6f}pp (tol {_RESIDENCY_TOL_PP}pp): "
          f"{'OK' if ok else 'DEVIATION'}")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        doc = {
            "manifest": _manifest("validate", args, "per-point", None,
                                  grid=bool(args.grid)),
            "points": results,
            "max_energy_deviation_pct": max_energy,
            "max_residency_deviation_pp": max_res,
            "energy_tolerance_pct": _ENERGY_TOL_PCT,
            "residency_tolerance_pp": _RESIDENCY_TOL_PP,
            "ok": ok,
        }
        _write(out / "validate.json", _dump_json(doc))
    return 0 if ok else 1


def _cmd_presets(args: argparse.Namespace) -> int:
    for name in sorted(PRESETS):
        preset = PRESETS[name]
        print(f"{name:<22} calibration={preset.calibration:<17} {preset.note}")
    return 0


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framewatt",
        description="Deterministic package-power simulator for display pipelines.",
    )
    parser.add_argument("--version", action="version",
                        version=f"framewatt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configuration and price it")
    _add_source_args(p)
    _add_run_args(p)
    _add_out_args(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="price two configurations side by side")
    _add_source_args(p)
    _add_run_args(p)
    _add_side_b_args(p)
    _add_out_args(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser(
        "sweep", help="grid of resolution x fps x scheme x overlay axes"
    )
    ax = p.add_argument_group("grid axes (comma-separated)")
    ax.add_argument("--resolutions", metavar="A,B,...",
                    help="named sizes or WxH (default: fhd,qhd,4k,5k)")
    ax.add_argument("--fps", metavar="A,B,...", help="frame rates (default: 30,60)")
    ax.add_argument("--schemes", metavar="A,B,...",
                    help=f"subset of {','.join(_SCHEME_NAMES)} (default: all)")
    ax.add_argument("--fbc-ratios", metavar="A,B,...",
                    help="frame-buffer compression ratios (default: 1.0)")
    ax.add_argument("--batch-sizes", metavar="A,B,...",
                    help="decode-batch sizes (default: 1)")
    ax.add_argument("--refresh", type=int, default=60, metavar="HZ",
                    help="panel refresh rate (default: 60)")
    ax.add_argument("--kind", choices=["video", "vr360"], default="video")
    p.add_argument("--calibration", metavar="NAME_OR_PATH",
                   help="power calibration for every point (default: default)")
    p.add_argument("--windows", type=int, metavar="N")
    p.add_argument("--seed", type=int, metavar="N")
    _add_out_args(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("calibrate", help="fit per-state powers from measured runs")
    p.add_argument("--runs", required=True, metavar="PATH",
                   help="measured runs: CSV (state columns + power_mw) or JSON "
                        '{"runs": [{label, residency, average_power_mw}]}')
    p.add_argument("--states", metavar="A,B,...",
                   help="restrict the fit to these states")
    p.add_argument("--base", default="default", metavar="NAME_OR_PATH",
                   help="calibration supplying structure for the emitted file")
    p.add_argument("--name", default="fitted", metavar="NAME",
                   help="name embedded in the emitted calibration file")
    p.add_argument("--seed", type=int, metavar="N")
    _add_out_args(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser(
        "validate",
        help="check a configuration and cross-check analytic vs event timelines",
    )
    _add_source_args(p)
    _add_run_args(p)
    p.add_argument("--grid", action="store_true",
                   help="cross-check the whole 50-point validation grid")
    p.add_argument("--out", metavar="DIR", help="directory for validate.json")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("presets", help="list built-in configurations")
    p.set_defaults(func=_cmd_presets)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        _print_violations(exc.violations)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
