"""Dummy-track obfuscation.

Each secret window (a run of consecutive pair slots on one row) is replaced by
the full enumeration of its alphabet at that width, shuffled, so the multiset
of tracks is the same for every computation.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .compiler import CompiledCircuit, brick_tops
from .gates import Alphabet, Segment


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one purpose; ``key`` names the substream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


# substream identifiers
MASK_STREAM, TRACK_STREAM, MEASURE_STREAM = 0, 1, 2


@dataclass(frozen=True)
class Window:
    window_id: int
    kind: Alphabet
    row: int
    start_round: int
    width: int

    @property
    def rounds(self) -> range:
        return range(self.start_round, self.start_round + self.width)


@dataclass(frozen=True)
class TrackSet:
    tracks: tuple[Segment, ...]
    real_index: int

    @property
    def real(self) -> Segment:
        return self.tracks[self.real_index]


@dataclass(frozen=True)
class CZEvent:
    after_round: int
    column: int
    rows: tuple[int, int]


@dataclass(frozen=True)
class Timeline:
    windows: tuple[tuple[Window, Segment], ...]
    cz_events: tuple[CZEvent, ...]
    rounds: int


def split_windows(cc: CompiledCircuit) -> Timeline:
    """Cut every secret segment into consecutive windows in schedule order.

    Windows carry their real sub-segment in written order; the first window of
    a segment is the first to execute.  CZ events always fall between windows.
    """
    layout, cfg = cc.layout, cc.config
    n, W = layout.n, cfg.W
    if layout.v_width % W:
        raise ValueError(f"V width {layout.v_width} is not a multiple of W={W}")
    windows: list[tuple[Window, Segment]] = []
    cz: list[CZEvent] = []
    t = 0

    def add(kind, row, start, seg):
        windows.append((Window(len(windows), kind, row, start, len(seg)), seg))

    for j in range(layout.p + 1):
        for k in range(layout.v_width // W):
            for r in range(n):
                pairs = layout.v_segments[j][r].pairs
                hi = len(pairs) - k * W
                add(Alphabet.V, r, t + k * W, Segment(pairs[hi - W:hi], Alphabet.V))
        t += layout.v_width
        if j == layout.p:
            break
        tops = list(brick_tops(j, n))
        for stage in (0, 1):
            for top in tops:
                units = layout.bricks[(j, top)].row_units()
                for r in (top, top + 1):
                    add(Alphabet.U, r, t, units[r][stage])
            t += 2
            cz += [CZEvent(t - 1, j, (top, top + 1)) for top in tops]
    for k in range(cfg.N):
        for r, mrow in enumerate(cc.masks):
            add(Alphabet.MASK, r, t, mrow.block_segments()[k])
        t += 2
    windows.sort(key=lambda ws: (ws[0].start_round, ws[0].row, ws[0].window_id))
    renumbered = tuple(
        (Window(i, w.kind, w.row, w.start_round, w.width), s) for i, (w, s) in enumerate(windows))
    return Timeline(renumbered, tuple(cz), t)


@lru_cache(maxsize=None)
def enumerate_tracks(alphabet: Alphabet, width: int) -> tuple[Segment, ...]:
    """All ``|alphabet|**width`` segments, in canonical (lexicographic) order."""
    return tuple(Segment(p, alphabet) for p in itertools.product(alphabet.pairs, repeat=width))


def make_tracks(w: Window, real: Segment, rng: np.random.Generator) -> TrackSet:
    if real.alphabet != w.kind or len(real) != w.width:
        raise ValueError(f"real segment does not fit window {w.window_id}")
    canon = enumerate_tracks(w.kind, w.width)
    if real not in canon:
        raise ValueError("real segment is not over the window alphabet")
    # the permutation depends only on rng, never on the real segment
    tracks = tuple(canon[i] for i in rng.permutation(len(canon)))
    return TrackSet(tracks, tracks.index(real))


@dataclass(frozen=True)
class ObfuscatedProgram:
    compiled: CompiledCircuit
    windows: tuple[tuple[Window, TrackSet], ...]
    cz_events: tuple[CZEvent, ...]
    rounds: int
    seed: int

    @property
    def config(self):
        return self.compiled.config

    @property
    def public_shape(self) -> dict:
        return self.compiled.public_shape

    def secret(self) -> dict:
        cc = self.compiled
        return {
            "circuit": cc.circuit.to_dict(),
            "mask_bits": list(cc.mask_bits),
            "mask_blocks": [[int(x) for x in m.blocks] for m in cc.masks],
            "real_index": [ts.real_index for _, ts in self.windows],
            "bricks": sorted(
                [b.layer, b.top, b.kind, b.control] for b in cc.layout.bricks.values()),
            "seed": self.seed,
        }


def obfuscate(cc: CompiledCircuit, seed: int | None = None) -> ObfuscatedProgram:
    cfg = cc.config
    seed = cfg.seed if seed is None else seed
    tl = split_windows(cc)
    # one stream consumed in window-id order; the draws never depend on the circuit
    rng = rng_stream(seed, TRACK_STREAM)
    out = []
    for w, real in tl.windows:
        if w.kind is Alphabet.MASK and not cfg.mask_tracks:
            out.append((w, TrackSet((real,), 0)))
        else:
            out.append((w, make_tracks(w, real, rng)))
    return ObfuscatedProgram(cc, tuple(out), tl.cz_events, tl.rounds, seed)


@dataclass(frozen=True)
class PublicProgram:
    """Everything a server may see before execution."""

    data: dict

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    @property
    def shape(self) -> dict:
        return self.data["shape"]

    @property
    def rounds(self) -> int:
        return self.data["rounds"]


def strip_secrets(p: ObfuscatedProgram | PublicProgram) -> PublicProgram:
    if isinstance(p, PublicProgram):
        return p
    cfg = p.config
    data = {
        "shape": p.public_shape,
        "mask_tracks": cfg.mask_tracks,
        "rounds": p.rounds,
        "windows": [
            {"id": w.window_id, "kind": w.kind.value, "row": w.row, "start": w.start_round,
             "width": w.width, "tracks": [list(t.codes) for t in ts.tracks]}
            for w, ts in p.windows
        ],
        "cz": [{"after_round": e.after_round, "column": e.column, "rows": list(e.rows)}
               for e in p.cz_events],
    }
    return PublicProgram(data)
