"""Spatio-temporal selection: composability filter and request chunking."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .mobility import connected_segments, derive_provision
from .model import EnergyRequest, EnergyService, ProvisionSeries


@dataclass(frozen=True)
class Chunk:
    start_tick: int
    end_tick: int
    candidates: tuple[str, ...]

    @property
    def length(self) -> int:
        return self.end_tick - self.start_tick


def _series(svc, req, series):
    if series is not None and svc.eid in series:
        return series[svc.eid]
    return derive_provision(svc, req)


def filter_composable(
    services: Sequence[EnergyService],
    req: EnergyRequest,
    series: Optional[Mapping[str, ProvisionSeries]] = None,
) -> list[EnergyService]:
    """Services overlapping the request window and in range at some tick."""
    out = []
    for svc in services:
        if min(svc.end_tick, req.end_tick) - max(svc.start_tick, req.t) < 1:
            continue
        if any(_series(svc, req, series).pr):
            out.append(svc)
    return out


def chunk_timeline(
    services: Sequence[EnergyService],
    req: EnergyRequest,
    boundaries: str = "advertised",
    series: Optional[Mapping[str, ProvisionSeries]] = None,
) -> list[Chunk]:
    """Split the request window at every point where the candidate set can change.

    ``advertised`` cuts at clipped service start/end ticks; a service is a
    candidate wherever its advertisement covers the chunk. ``fine`` also cuts
    at every connected-segment edge, so it refines the advertised chunks, and
    only lists services connected over the whole chunk.
    """
    if boundaries not in ("advertised", "fine"):
        raise ValueError(f"unknown boundary mode {boundaries!r}")
    lo, hi = req.t, req.end_tick
    advertised = [(svc.eid, max(svc.start_tick, lo), min(svc.end_tick, hi)) for svc in services]
    if boundaries == "advertised":
        spans = advertised
    else:
        spans = []
        for svc in services:
            for a, b in connected_segments(_series(svc, req, series)):
                spans.append((svc.eid, max(a, lo), min(b, hi)))
    spans = [s for s in spans if s[1] < s[2]]

    cuts = {lo, hi}
    for _, a, b in spans + [s for s in advertised if s[1] < s[2]]:
        cuts.add(a)
        cuts.add(b)
    cuts = sorted(cuts)
    chunks = []
    for a, b in zip(cuts, cuts[1:]):
        cands = []
        for eid, s, e in spans:
            if s <= a and b <= e and eid not in cands:
                cands.append(eid)
        chunks.append(Chunk(a, b, tuple(cands)))
    return chunks


def partition_violations(chunks: Sequence[Chunk], req: EnergyRequest) -> list[str]:
    """Check that chunks tile the request window with no gap or overlap."""
    out = []
    if not chunks:
        return ["no chunks"]
    if chunks[0].start_tick != req.t:
        out.append(f"first chunk starts at {chunks[0].start_tick}, request at {req.t}")
    if chunks[-1].end_tick != req.end_tick:
        out.append(f"last chunk ends at {chunks[-1].end_tick}, request at {req.end_tick}")
    for c in chunks:
        if c.start_tick >= c.end_tick:
            out.append(f"empty chunk [{c.start_tick},{c.end_tick})")
    for a, b in zip(chunks, chunks[1:]):
        if a.end_tick != b.start_tick:
            out.append(f"chunks [{a.start_tick},{a.end_tick}) and [{b.start_tick},{b.end_tick}) do not abut")
    return out
