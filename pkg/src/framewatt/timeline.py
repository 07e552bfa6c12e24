"""Analytic per-window package-state timelines for every display scheme.

A timeline is an exact tiling of refresh windows with intervals, each pinned
to one package state and carrying its share of DRAM and display-link traffic.
All interval boundaries are computed as exact rationals and rounded to
integer nanoseconds once, with the final interval of each window absorbing
the rounding so coverage is exact by construction.

The data movement inside a window follows a double-buffered producer/consumer
machine: a producer (DRAM fetch engine, video decoder, or GPU) fills fixed
size chunks of the display controller's buffer while a consumer (panel link)
drains them.  When the producer outpaces the consumer the window shows
fill/drain cycles (fetch bursts between quiet drain stretches); when the
consumer outpaces the producer the chunks stream back-to-back at the
producer's pace.  Two pacing modes exist:

* span-paced  -- the drain rate is whatever spreads the payload across the
                 remainder of the window (conventional streaming);
* rate-paced  -- the drain runs at the link's maximum rate and the window
                 ends in deep idle (burst transfers).

Drain tails that would spill past a boundary are absorbed into the final
interval: the model keeps every window fully drained, trading sub-chunk
phasing fidelity for exact per-state totals.
"""

from __future__ import annotations

import html
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .core import (
    NS_PER_S,
    Scheme,
    SimConfig,
    WorkloadKind,
    dc_fetch_count,
    encoded_frame_bytes,
    frame_bytes,
    frame_window,
    frame_window_ns,
)
from .cstates import PackageCState


@dataclass(frozen=True)
class Interval:
    """One contiguous stretch of a single package state.

    ``window`` indexes the refresh window the interval belongs to and
    ``kind`` echoes that window's role (transfer/repeat/update/idle).  Byte
    counters attribute traffic to the interval; the three flags mark when a
    power adder applies (panel-side frame buffer refresh, GPU projection,
    frame-buffer compression).
    """

    window: int
    kind: str
    state: PackageCState
    start_ns: int
    end_ns: int
    label: str = ""
    dram_read_bytes: int = 0
    dram_write_bytes: int = 0
    edp_bytes: int = 0
    drfb_active: bool = False
    gpu_active: bool = False
    fbc_active: bool = False

    @property
    def span_ns(self) -> int:
        return self.end_ns - self.start_ns


@dataclass(frozen=True)
class WindowTimeline:
    """Interval tiling of ``n_windows`` refresh windows for one scheme."""

    scheme: Scheme
    window_ns: int
    n_windows: int
    intervals: tuple[Interval, ...]

    @property
    def total_ns(self) -> int:
        return self.window_ns * self.n_windows

    def window_intervals(self, window: int) -> tuple[Interval, ...]:
        return tuple(iv for iv in self.intervals if iv.window == window)

    def check_coverage(self) -> None:
        """Intervals must tile [0, total] exactly: no gaps, no overlaps."""
        cursor = 0
        for iv in self.intervals:
            if iv.start_ns != cursor:
                raise AssertionError(
                    f"coverage gap at {cursor} ns (next interval starts {iv.start_ns})"
                )
            if iv.end_ns <= iv.start_ns:
                raise AssertionError(f"empty or reversed interval at {iv.start_ns} ns")
            cursor = iv.end_ns
        if cursor != self.total_ns:
            raise AssertionError(f"coverage ends at {cursor}, expected {self.total_ns}")


def residencies(timeline: WindowTimeline) -> dict[PackageCState, float]:
    """Fraction of total time spent in each state (sums to 1.0)."""
    spans: dict[PackageCState, int] = {s: 0 for s in PackageCState}
    for iv in timeline.intervals:
        spans[iv.state] += iv.span_ns
    total = timeline.total_ns
    return {s: spans[s] / total for s in PackageCState}


def state_spans_ns(timeline: WindowTimeline) -> dict[PackageCState, int]:
    spans: dict[PackageCState, int] = {s: 0 for s in PackageCState}
    for iv in timeline.intervals:
        spans[iv.state] += iv.span_ns
    return spans


# -- exact byte distribution -------------------------------------------------


def distribute_bytes(total: int, weights: Sequence[int]) -> list[int]:
    """Split ``total`` proportionally to ``weights`` with an exact sum.

    Uses cumulative flooring: allocation k is floor(total * cumw_k / W) minus
    what was already handed out, so the parts always sum to ``total`` and no
    part is negative.
    """
    if total < 0:
        raise ValueError("total must be >= 0")
    wsum = sum(weights)
    if wsum <= 0:
        return [0] * len(weights)
    out: list[int] = []
    cum_w = 0
    handed = 0
    for w in weights:
        if w < 0:
            raise ValueError("weights must be >= 0")
        cum_w += w
        target = total * cum_w // wsum
        out.append(target - handed)
        handed = target
    return out


# -- window construction ------------------------------------------------------

# Mutable record used while assembling a window; times are Fraction seconds
# relative to the window start.
@dataclass
class _Rec:
    state: PackageCState
    start: Fraction
    end: Fraction
    label: str
    read: int = 0
    write: int = 0
    gpu: bool = False
    fbc: bool = False
    drfb: bool = False
    streams: bool = False  # eligible to carry link traffic


def _chunk_sizes(payload: int, chunk: int) -> list[int]:
    n = dc_fetch_count(payload, chunk)
    if n == 0:
        return []
    rem = payload - (n - 1) * chunk
    return [chunk] * (n - 1) + [rem]


def _duplex_phase(
    start: Fraction,
    hard_end: Fraction,
    payload: int,
    chunk: int,
    fill_rate: Fraction,
    drain_rate: Fraction | None,
    fill_state: PackageCState,
    drain_state: PackageCState,
    fill_label: str,
    drain_label: str,
    fill_read_total: int = 0,
    gpu_fill: bool = False,
) -> tuple[list[_Rec], Fraction]:
    """Emit the fill/drain cycle records of one transfer phase.

    ``drain_rate`` of None selects span pacing (payload spread over
    [start, hard_end]); otherwise the drain runs at that byte rate and the
    phase ends when the last chunk is handed over.  Returns the records plus
    the phase end time (== hard_end in span mode).  Records are clipped to
    ``hard_end``; whatever the clip cuts off is considered drained (the
    window never carries debt into the next one).
    """
    if payload <= 0 or start >= hard_end:
        return [], start
    chunks = _chunk_sizes(payload, chunk)
    reads = distribute_bytes(fill_read_total, chunks)

    span_mode = drain_rate is None
    d: Fraction = (
        Fraction(payload) / (hard_end - start) if span_mode else drain_rate  # type: ignore[assignment]
    )
    fill_durs = [Fraction(c) / fill_rate for c in chunks]
    recs: list[_Rec] = []

    def _fill_rec(i: int, t: Fraction) -> _Rec:
        return _Rec(
            state=fill_state,
            start=t,
            end=t + fill_durs[i],
            label=fill_label,
            read=reads[i],
            gpu=gpu_fill,
            streams=True,
        )

    if fill_rate <= d:
        # Producer-bound: chunks stream back-to-back at the producer's pace;
        # the consumer keeps up in lockstep, so there are no drain-only gaps.
        t = start
        for i in range(len(chunks)):
            recs.append(_fill_rec(i, t))
            t = recs[-1].end
        phase_end = t
        if span_mode and phase_end < hard_end:
            # Producer could not fill the window (underrun; flagged by
            # validation).  Pad with the drain state so coverage holds.
            recs.append(
                _Rec(drain_state, phase_end, hard_end, drain_label, streams=True)
            )
            phase_end = hard_end
    else:
        # Consumer-bound: the first two fills land back-to-back (the drain
        # cannot start before the first chunk exists), then each later fill
        # waits for a buffer slot, i.e. for the chunk two places ahead of it
        # to finish draining.
        drain_done: list[Fraction] = []
        acc = start + fill_durs[0]
        for c in chunks:
            acc += Fraction(c) / d
            drain_done.append(acc)
        fill_starts: list[Fraction] = []
        for i in range(len(chunks)):
            if i == 0:
                fill_starts.append(start)
            elif i == 1:
                fill_starts.append(start + fill_durs[0])
            else:
                fill_starts.append(drain_done[i - 2])
        t = start
        for i in range(len(chunks)):
            if fill_starts[i] > t:
                recs.append(_Rec(drain_state, t, fill_starts[i], drain_label, streams=True))
            recs.append(_fill_rec(i, fill_starts[i]))
            t = recs[-1].end
        if drain_done[-1] > t:
            recs.append(_Rec(drain_state, t, drain_done[-1], drain_label, streams=True))
        phase_end = drain_done[-1]

    # Clip to the hard end; fold clipped-off bytes into the last survivor so
    # traffic is conserved.
    clipped: list[_Rec] = []
    lost_read = 0
    for r in recs:
        if r.start >= hard_end:
            lost_read += r.read
            continue
        if r.end > hard_end:
            r.end = hard_end
        clipped.append(r)
    if lost_read and clipped:
        clipped[-1].read += lost_read
    phase_end = min(phase_end, hard_end)
    return clipped, phase_end


@dataclass(frozen=True)
class _Knobs:
    """Resolved per-build quantities shared by all windows."""

    W: Fraction  # window period, seconds
    F: int  # frame bytes
    E: int  # encoded-stream bytes per frame
    chunk: int
    o: Fraction  # conventional wake-up, seconds
    o_b: Fraction  # short (hardware-assisted) wake-up, seconds
    f: Fraction  # decode rate, B/s
    b: Fraction  # DRAM fetch rate, B/s
    p: Fraction  # decoder direct-feed pacing, B/s
    e_B: Fraction  # link max rate, B/s
    gpu: Fraction  # GPU projection rate, B/s
    group: int  # windows per video frame
    disp: int  # display-buffer bytes per window (after fbc/batching cuts)
    fbc_on: bool


def _knobs(cfg: SimConfig, fbc_ratio: float, traffic_cut: float) -> _Knobs:
    disp_cfg, sys_cfg, wl = cfg.display, cfg.system, cfg.workload
    F = frame_bytes(disp_cfg.resolution, disp_cfg.bits_per_pixel)
    W = frame_window(disp_cfg.refresh_hz)
    o_b = (
        Fraction(sys_cfg.burst_orchestration_time)
        if sys_cfg.burst_orchestration_time is not None
        else W * Fraction(1, 50)
    )
    group = max(disp_cfg.refresh_hz // wl.video_fps, 1)
    return _Knobs(
        W=W,
        F=F,
        E=encoded_frame_bytes(disp_cfg.resolution, sys_cfg.encoded_bits_per_pixel),
        chunk=sys_cfg.dc_buffer_bytes,
        o=Fraction(sys_cfg.orchestration_time),
        o_b=o_b,
        f=Fraction(sys_cfg.decode_rate),
        b=Fraction(sys_cfg.dram_fetch_rate),
        p=Fraction(sys_cfg.vd_paced_rate if sys_cfg.vd_paced_rate else sys_cfg.decode_rate),
        e_B=Fraction(disp_cfg.edp_max_bits_per_s) / 8,
        gpu=Fraction(sys_cfg.gpu_pt_rate),
        group=group,
        disp=round(F * fbc_ratio * traffic_cut),
        fbc_on=fbc_ratio != 1.0,
    )


def _c0(
    start: Fraction, end: Fraction, label: str, *, read: int = 0, write: int = 0,
    gpu: bool = False, fbc: bool = False, streams: bool = False,
) -> _Rec:
    return _Rec(PackageCState.C0, start, end, label, read, write, gpu, fbc, False, streams)


def _idle_tail(start: Fraction, end: Fraction, label: str = "idle") -> _Rec:
    r = _Rec(PackageCState.C9, start, end, label)
    r.drfb = True
    return r


def _clip_c0(recs: list[_Rec], W: Fraction) -> list[_Rec]:
    out = []
    for r in recs:
        if r.start >= W:
            continue
        if r.end > W:
            r.end = W
        out.append(r)
    return out


def _pad_to_window_end(recs: list[_Rec], W: Fraction, state: PackageCState,
                       label: str, streams: bool) -> list[_Rec]:
    """Fill any remaining window time (degenerate payloads) with one record."""
    t = recs[-1].end if recs else Fraction(0)
    if t < W:
        recs.append(_Rec(state, t, W, label, streams=streams))
    return recs


# Per-scheme window recipes.  Each returns the records of one window (times
# relative to the window start) with link bytes not yet assigned.


def _win_baseline(k: _Knobs, kind: str, n_decode: int, vr: bool, psr_alt: bool) -> list[_Rec]:
    if kind == "repeat" and psr_alt:
        rec = _Rec(PackageCState.C9, Fraction(0), k.W, "psr")
        rec.drfb = True
        return [rec]
    recs: list[_Rec] = []
    t = Fraction(0)
    if kind == "transfer" and n_decode > 0:
        t_dec = Fraction(n_decode * k.F) / k.f
        decode_write = n_decode * (k.F if vr else k.disp)
        recs.append(
            _c0(t, t + k.o + t_dec, "wake+decode", read=n_decode * k.E,
                write=decode_write, fbc=k.fbc_on and not vr, streams=True)
        )
        t = t + k.o + t_dec
        if vr:
            t_pt = Fraction(n_decode * k.F) / k.gpu
            recs.append(
                _c0(t, t + t_pt, "project", read=n_decode * k.F,
                    write=n_decode * k.disp, gpu=True, fbc=k.fbc_on, streams=True)
            )
            t = t + t_pt
    else:
        recs.append(_c0(t, t + k.o, "wake", streams=True))
        t = t + k.o
    recs = _clip_c0(recs, k.W)
    t = min(t, k.W)
    phase, _ = _duplex_phase(
        t, k.W, k.disp, k.chunk, k.b, None,
        PackageCState.C2, PackageCState.C8, "fetch", "stream",
        fill_read_total=k.disp,
    )
    return _pad_to_window_end(recs + phase, k.W, PackageCState.C8, "stream", True)


def _win_bypass(k: _Knobs, kind: str) -> list[_Rec]:
    if kind == "repeat":
        recs = [_c0(Fraction(0), min(k.o_b, k.W), "wake")]
        if k.o_b < k.W:
            recs.append(_idle_tail(k.o_b, k.W))
        return recs
    recs = [_c0(Fraction(0), min(k.o, k.W), "wake", streams=True)]
    t = min(k.o, k.W)
    phase, _ = _duplex_phase(
        t, k.W, k.F, k.chunk, k.p, None,
        PackageCState.C7, PackageCState.C7P, "decode-feed", "stream",
        fill_read_total=k.E,
    )
    return _pad_to_window_end(recs + phase, k.W, PackageCState.C7P, "stream", True)


def _win_bursting(k: _Knobs, kind: str) -> list[_Rec]:
    if kind == "repeat":
        recs = [_c0(Fraction(0), min(k.o_b, k.W), "wake")]
        if k.o_b < k.W:
            recs.append(_idle_tail(k.o_b, k.W))
        return recs
    t_dec = Fraction(k.F) / k.f
    recs = [
        _c0(Fraction(0), min(k.o_b + t_dec, k.W), "wake+decode",
            read=k.E, write=k.disp, fbc=k.fbc_on)
    ]
    t = min(k.o_b + t_dec, k.W)
    # Fetched (possibly compressed) bytes leave the link as a full frame, so
    # the drain rate in fetched-byte units scales with the compression ratio.
    d_units = k.e_B * Fraction(k.disp, k.F) if k.disp != k.F else k.e_B
    phase, t_end = _duplex_phase(
        t, k.W, k.disp, k.chunk, k.b, d_units,
        PackageCState.C2, PackageCState.C8, "fetch", "burst",
        fill_read_total=k.disp,
    )
    recs += phase
    if t_end < k.W:
        recs.append(_idle_tail(t_end, k.W))
    return recs


def _win_burstlink(k: _Knobs, kind: str, vr: bool) -> list[_Rec]:
    if kind == "repeat":
        recs = [_c0(Fraction(0), min(k.o_b, k.W), "wake")]
        if k.o_b < k.W:
            recs.append(_idle_tail(k.o_b, k.W))
        return recs
    recs: list[_Rec] = []
    if vr:
        # Decode lands in DRAM; the GPU re-projects it straight into the DC
        # buffer while the link bursts the projected frame out.
        t_dec = Fraction(k.F) / k.f
        recs.append(
            _c0(Fraction(0), min(k.o_b + t_dec, k.W), "wake+decode", read=k.E, write=k.F)
        )
        t = min(k.o_b + t_dec, k.W)
        phase, t_end = _duplex_phase(
            t, k.W, k.F, k.chunk, k.gpu, k.e_B,
            PackageCState.C7, PackageCState.C7P, "project-feed", "burst",
            fill_read_total=k.F, gpu_fill=True,
        )
    else:
        recs.append(_c0(Fraction(0), min(k.o_b, k.W), "wake"))
        t = min(k.o_b, k.W)
        phase, t_end = _duplex_phase(
            t, k.W, k.F, k.chunk, k.p, k.e_B,
            PackageCState.C7, PackageCState.C7P, "decode-feed", "burst",
            fill_read_total=k.E,
        )
    recs += phase
    if t_end < k.W:
        recs.append(_idle_tail(t_end, k.W))
    return recs


def _win_plane_stream(k: _Knobs) -> list[_Rec]:
    """Single-plane window under conventional full-frame streaming."""
    recs = [_c0(Fraction(0), min(k.o, k.W), "wake", streams=True)]
    t = min(k.o, k.W)
    phase, _ = _duplex_phase(
        t, k.W, k.F, k.chunk, k.b, None,
        PackageCState.C2, PackageCState.C8, "fetch", "stream",
        fill_read_total=k.F,
    )
    return _pad_to_window_end(recs + phase, k.W, PackageCState.C8, "stream", True)


def _win_plane_burst(k: _Knobs, update_bytes: int) -> list[_Rec]:
    """Single-plane window bursting only the dirty region (or idling)."""
    recs = [_c0(Fraction(0), min(k.o_b, k.W), "wake")]
    t = min(k.o_b, k.W)
    if update_bytes > 0:
        phase, t_end = _duplex_phase(
            t, k.W, update_bytes, k.chunk, k.b, k.e_B,
            PackageCState.C2, PackageCState.C8, "fetch", "burst",
            fill_read_total=update_bytes,
        )
        recs += phase
        t = t_end
    if t < k.W:
        recs.append(_idle_tail(t, k.W))
    return recs


def selective_update_bytes(full_frame_bytes: int, dirty_fraction: float,
                           header_bytes: int = 128) -> int:
    """Link payload for a partial update: dirty pixels plus a rectangle header.

    The header is charged even when nothing changed (the panel still receives
    an update descriptor), while a fully dirty frame is sent whole with no
    header, so a 1.0 fraction is byte-identical to a plain full-frame
    transfer.
    """
    if not 0.0 <= dirty_fraction <= 1.0:
        raise ValueError(f"dirty_fraction must be in [0, 1], got {dirty_fraction}")
    if dirty_fraction == 1.0:
        return full_frame_bytes
    return min(round(full_frame_bytes * dirty_fraction) + header_bytes, full_frame_bytes)


def build_timeline(
    cfg: SimConfig,
    n_windows: int | None = None,
    *,
    fbc_ratio: float = 1.0,
    batch_every: int = 1,
    cached_traffic_fraction: float = 0.34,
    dirty_trace: Sequence[float] | None = None,
) -> WindowTimeline:
    """Construct the exact interval timeline for ``n_windows`` refresh windows.

    ``fbc_ratio`` scales the display-bound frame buffer (compressed writes and
    fetches); ``batch_every`` decodes that many frames ahead in one window and
    cuts the cached buffer traffic by ``cached_traffic_fraction``;
    ``dirty_trace`` drives single-plane workloads (one dirty fraction per
    window).  Defaults leave the plain scheme untouched.
    """
    if not 0.0 < fbc_ratio <= 1.0:
        raise ValueError(f"fbc_ratio must be in (0, 1], got {fbc_ratio}")
    if batch_every < 1:
        raise ValueError(f"batch_every must be >= 1, got {batch_every}")
    wl = cfg.workload
    scheme = wl.scheme
    if batch_every > 1 and (
        wl.kind is not WorkloadKind.VIDEO or scheme is not Scheme.BASELINE
    ):
        raise ValueError(
            "frame batching applies only to video playback under the plain scheme"
        )
    cut = (1.0 - cached_traffic_fraction) if batch_every > 1 else 1.0
    k = _knobs(cfg, fbc_ratio, cut)

    if wl.kind is WorkloadKind.SINGLE_PLANE:
        if dirty_trace is None:
            raise ValueError("single-plane workloads need a dirty_trace")
        n = len(dirty_trace)
        if n == 0:
            raise ValueError("dirty_trace must not be empty")
    else:
        n = n_windows if n_windows is not None else k.group
        if n < 1:
            raise ValueError("n_windows must be >= 1")
        if dirty_trace is not None:
            raise ValueError("dirty_trace only applies to single-plane workloads")

    vr = wl.kind is WorkloadKind.VR360
    W_ns = frame_window_ns(cfg.display.refresh_hz)
    intervals: list[Interval] = []

    for w in range(n):
        if wl.kind is WorkloadKind.SINGLE_PLANE:
            dirty = float(dirty_trace[w])  # type: ignore[index]
            update = selective_update_bytes(k.F, dirty)
            if scheme is Scheme.BASELINE:
                kind = "update"
                recs = _win_plane_stream(k)
                link_bytes = k.F
            else:
                kind = "update" if update > 0 else "idle"
                recs = _win_plane_burst(k, update)
                link_bytes = update
        else:
            is_transfer = w % k.group == 0
            kind = "transfer" if is_transfer else "repeat"
            if scheme is Scheme.BASELINE:
                if is_transfer:
                    frame_idx = w // k.group
                    decodes = batch_every if frame_idx % batch_every == 0 else 0
                    recs = _win_baseline(k, "transfer", decodes, vr, wl.psr_alternate_windows)
                else:
                    recs = _win_baseline(k, "repeat", 0, vr, wl.psr_alternate_windows)
                link_bytes = 0 if (not is_transfer and wl.psr_alternate_windows) else k.F
            elif scheme is Scheme.BYPASS_ONLY:
                recs = _win_bypass(k, kind)
                link_bytes = k.F if is_transfer else 0
            elif scheme is Scheme.BURSTING_ONLY:
                recs = _win_bursting(k, kind)
                link_bytes = k.F if is_transfer else 0
            else:
                recs = _win_burstlink(k, kind, vr)
                link_bytes = k.F if is_transfer else 0

        intervals.extend(_round_window(recs, w, kind, W_ns, link_bytes))

    tl = WindowTimeline(scheme=scheme, window_ns=W_ns, n_windows=n,
                        intervals=tuple(intervals))
    tl.check_coverage()
    return tl


def _round_window(
    recs: list[_Rec], window: int, kind: str, W_ns: int, link_bytes: int
) -> list[Interval]:
    """Round one window's records to integer ns and assign link traffic."""
    base = window * W_ns
    # Records must already abut exactly (Fraction arithmetic): rounding only
    # quantizes shared boundaries, it never papers over gaps.
    cursor = Fraction(0)
    for r in recs:
        assert r.start == cursor, f"window recipe left a gap at {float(cursor)} s"
        cursor = r.end
    bounds: list[int] = [0]
    for i, r in enumerate(recs):
        start_ns = bounds[-1]
        end_ns = W_ns if i == len(recs) - 1 else round(r.end * NS_PER_S)
        end_ns = max(end_ns, start_ns)  # rounding must not reverse an edge
        bounds.append(end_ns)

    # Drop zero-span records, folding their traffic into the next survivor.
    kept: list[tuple[_Rec, int, int]] = []
    carry_read = carry_write = 0
    for r, s, e in zip(recs, bounds[:-1], bounds[1:]):
        if e - s == 0:
            carry_read += r.read
            carry_write += r.write
            continue
        r.read += carry_read
        r.write += carry_write
        carry_read = carry_write = 0
        kept.append((r, s, e))
    if (carry_read or carry_write) and kept:
        kept[-1][0].read += carry_read
        kept[-1][0].write += carry_write

    spans = [e - s if r.streams else 0 for r, s, e in kept]
    shares = distribute_bytes(link_bytes, spans)
    out: list[Interval] = []
    for (r, s, e), edp in zip(kept, shares):
        out.append(
            Interval(
                window=window,
                kind=kind,
                state=r.state,
                start_ns=base + s,
                end_ns=base + e,
                label=r.label,
                dram_read_bytes=r.read,
                dram_write_bytes=r.write,
                edp_bytes=edp,
                drfb_active=r.drfb,
                gpu_active=r.gpu,
                fbc_active=r.fbc,
            )
        )
    return out


# -- exports -----------------------------------------------------------------

CSV_HEADER = (
    "window,kind,state,start_ns,end_ns,label,dram_read_bytes,"
    "dram_write_bytes,edp_bytes,drfb_active,gpu_active,fbc_active"
)


def timeline_to_csv(timeline: WindowTimeline) -> str:
    lines = [CSV_HEADER]
    for iv in timeline.intervals:
        lines.append(
            f"{iv.window},{iv.kind},{iv.state},{iv.start_ns},{iv.end_ns},"
            f"{iv.label},{iv.dram_read_bytes},{iv.dram_write_bytes},"
            f"{iv.edp_bytes},{int(iv.drfb_active)},{int(iv.gpu_active)},"
            f"{int(iv.fbc_active)}"
        )
    return "\n".join(lines) + "\n"


_STATE_COLORS = {
    PackageCState.C0: "#d94141",
    PackageCState.C2: "#e8893c",
    PackageCState.C3: "#d4b42e",
    PackageCState.C6: "#b8c42e",
    PackageCState.C7: "#56a845",
    PackageCState.C7P: "#3f9c7a",
    PackageCState.C8: "#3d7fc4",
    PackageCState.C9: "#5950b8",
    PackageCState.C10: "#444455",
}


def timeline_to_svg(timeline: WindowTimeline, width: int = 1000) -> str:
    """Render the timeline as a self-contained Gantt-style SVG string.

    One row per refresh window, blocks colored by package state, with a
    legend; pure text output with no plotting dependencies.
    """
    row_h, gap, left, top = 26, 6, 70, 30
    legend_h = 40
    n = timeline.n_windows
    height = top + n * (row_h + gap) + legend_h
    sx = (width - left - 10) / timeline.window_ns

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="monospace" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="16">package-state timeline: '
        f"{html.escape(timeline.scheme.value)}, {n} windows of "
        f"{timeline.window_ns / 1e6:.3f} ms</text>",
    ]
    for iv in timeline.intervals:
        y = top + iv.window * (row_h + gap)
        x = left + (iv.start_ns - iv.window * timeline.window_ns) * sx
        w = max(iv.span_ns * sx, 0.5)
        color = _STATE_COLORS[iv.state]
        parts.append(
            f'<rect x="{x:.2f}" y="{y}" width="{w:.2f}" height="{row_h}" '
            f'fill="{color}"><title>{html.escape(iv.label)} {iv.state} '
            f"[{iv.start_ns}-{iv.end_ns}] ns</title></rect>"
        )
    for w in range(n):
        y = top + w * (row_h + gap) + row_h - 8
        kind = next((iv.kind for iv in timeline.intervals if iv.window == w), "")
        parts.append(f'<text x="4" y="{y}">w{w} {html.escape(kind[:4])}</text>')
    lx = left
    ly = top + n * (row_h + gap) + 16
    for state, color in _STATE_COLORS.items():
        parts.append(f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" fill="{color}"/>')
        parts.append(f'<text x="{lx + 16}" y="{ly}">{state}</text>')
        lx += 64
    parts.append("</svg>")
    return "\n".join(parts)


def write_timeline_csv(timeline: WindowTimeline, path: str | Path) -> None:
    Path(path).write_text(timeline_to_csv(timeline), encoding="utf-8")


def write_timeline_svg(timeline: WindowTimeline, path: str | Path) -> None:
    Path(path).write_text(timeline_to_svg(timeline), encoding="utf-8")


__all__ = [
    "CSV_HEADER",
    "Interval",
    "WindowTimeline",
    "build_timeline",
    "distribute_bytes",
    "residencies",
    "selective_update_bytes",
    "state_spans_ns",
    "timeline_to_csv",
    "timeline_to_svg",
    "write_timeline_csv",
    "write_timeline_svg",
]
