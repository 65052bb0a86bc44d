"""Brickwork compilation: logical circuit -> fixed-shape layout plus output masks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import CNOT, CZ, LogicalCircuit, Single
from .config import ProtocolConfig
from .gates import (HI, HT, HT2, HTdg2, Alphabet, Gate, PairSlot, Segment,
                    physical_count, segment_unitary)
from .statevector import CZOp, SingleOp


class CompileError(ValueError):
    pass


class SegmentOverflow(CompileError):
    pass


class ColumnOverflow(CompileError):
    pass


class NonAdjacentTwoQubitOp(CompileError):
    pass


class UnsupportedGate(CompileError):
    pass


class MaskError(ValueError):
    pass


def _v(*codes) -> Segment:
    return Segment.from_codes(codes, Alphabet.V)


# Shortest V-alphabet words (written order) found by breadth-first search;
# see tests/oracles.py for the search that produced them.
SHORTEST_WORDS = {
    Gate.I: _v("HI", "HI"),
    Gate.H: _v("HI"),
    Gate.T: _v("HI", "HT"),
    Gate.Tdg: _v("HI", "Hd"),
    Gate.S: _v("HI", "HT", "HI", "HT"),
    Gate.Sdg: _v("HI", "Hd", "HI", "Hd"),
    Gate.Z: _v("HI", "HT", "HI", "HT", "HI", "HT", "HI", "HT"),
    Gate.X: _v("HT", "HI", "HT", "HI", "HT", "HI", "HT", "HI"),
}

TABLE_WIDTH = 8

# Every entry is exactly TABLE_WIDTH pairs.  Even-length words are padded on
# the left with HI·HI (= I); H has no even word shorter than 8 pairs, so it
# gets its own width-8 search result.
DECOMPOSITION_TABLE = {
    g: Segment((HI,) * (TABLE_WIDTH - len(w)) + w.pairs, Alphabet.V)
    for g, w in SHORTEST_WORDS.items() if g is not Gate.H
}
DECOMPOSITION_TABLE[Gate.H] = _v("HT", "HT", "HI", "HT", "HT", "HI", "HT", "HT")


def decompose_single(g: Gate | str) -> Segment:
    try:
        return DECOMPOSITION_TABLE[Gate(g)]
    except (KeyError, ValueError):
        raise UnsupportedGate(f"no decomposition for {g!r}") from None


_IDENTITY_UNIT = Segment((HI, HI), Alphabet.U)


def brick_units(kind: str) -> tuple[Segment, Segment, Segment, Segment]:
    """Corner units (U1, U2, U3, U4) for an ``"identity"`` or ``"cnot"`` brick.

    U1/U2 sit before the first CZ on the control/target rows, U3/U4 between
    the two CZs.
    """
    if kind == "identity":
        return (_IDENTITY_UNIT,) * 4
    if kind == "cnot":
        return (
            Segment((HI, HT2), Alphabet.U),    # Rz(pi/2) up to phase
            Segment((HT2, HI), Alphabet.U),    # Rx(pi/2)
            _IDENTITY_UNIT,
            Segment((HTdg2, HI), Alphabet.U),  # Rx(-pi/2)
        )
    raise ValueError(f"unknown brick type {kind!r}")


@dataclass(frozen=True)
class Brick:
    layer: int
    top: int
    kind: str = "identity"
    control: str | None = None  # "top" or "bottom" for cnot bricks

    def row_units(self) -> dict[int, tuple[Segment, Segment]]:
        """(pre-CZ unit, between-CZ unit) for each of the two rows."""
        u1, u2, u3, u4 = brick_units(self.kind)
        ctrl, tgt = (self.top, self.top + 1) if self.control != "bottom" else (self.top + 1, self.top)
        return {ctrl: (u1, u3), tgt: (u2, u4)}


def brick_tops(layer: int, n: int) -> range:
    """Upper rows of the bricks in a layer; odd layers leave the first and last rows idle."""
    return range(layer % 2, n - 1, 2)


@dataclass(frozen=True)
class BrickworkLayout:
    q: int
    n: int
    p: int
    v_width: int
    v_segments: tuple[tuple[Segment, ...], ...]  # [layer][row], p + 1 layers
    bricks: dict = field(hash=False)              # (layer, top) -> Brick

    def ops(self, masks=None) -> list:
        """Simulator stream realising the layout (optionally followed by masks)."""
        stream = []
        for j in range(self.p + 1):
            for r in range(self.n):
                stream.append(SingleOp(r, segment_unitary(self.v_segments[j][r])))
            if j == self.p:
                break
            layer_bricks = [self.bricks[(j, t)] for t in brick_tops(j, self.n)]
            for stage in (0, 1):
                for b in layer_bricks:
                    for r, units in b.row_units().items():
                        stream.append(SingleOp(r, segment_unitary(units[stage])))
                for b in layer_bricks:
                    stream.append(CZOp(b.top, b.top + 1))
        if masks is not None:
            for r, mrow in enumerate(masks):
                stream.append(SingleOp(r, segment_unitary(mrow.segment())))
        return stream

    def real_pairs(self) -> dict[str, int]:
        v = sum(len(s) for layer in self.v_segments for s in layer)
        u = 4 * 2 * len(self.bricks)
        return {"V": v, "U": u}


@dataclass(frozen=True)
class MaskRow:
    blocks: tuple[bool, ...]  # True = rotation block HT·HI, False = HI·HI
    b: int

    @property
    def c(self) -> int:
        return sum(self.blocks)

    def block_segments(self) -> list[Segment]:
        return [Segment((HT, HI) if rot else (HI, HI), Alphabet.MASK) for rot in self.blocks]

    def segment(self) -> Segment:
        # blocks are X-axis rotations and commute, so written order is immaterial
        return Segment(tuple(p for s in self.block_segments() for p in s.pairs), Alphabet.MASK)


def make_masks(rows: int, N: int, rng: np.random.Generator) -> tuple[MaskRow, ...]:
    """Per row: b uniform, c uniform over {c : c = 4b mod 8, 0 <= c <= N}, c rotation blocks at random positions."""
    if N < 4:
        raise MaskError("N must be at least 4 to realise an X flip")
    out = []
    for _ in range(rows):
        b = int(rng.integers(2))
        choices = [c for c in range(N + 1) if c % 8 == 4 * b]
        c = int(choices[rng.integers(len(choices))])
        pos = set(rng.permutation(N)[:c].tolist())
        out.append(MaskRow(tuple(k in pos for k in range(N)), b))
    return tuple(out)


def _lower(ops):
    for op in ops:
        if isinstance(op, CZ):
            # CZ = (I x H) CNOT (I x H)
            yield Single(op.b, Gate.H)
            yield CNOT(op.a, op.b)
            yield Single(op.b, Gate.H)
        else:
            yield op


def build_layout(c: LogicalCircuit, cfg: ProtocolConfig) -> BrickworkLayout:
    n = c.q + c.q % 2
    p, width = cfg.p, cfg.v_width
    ptr = [0] * n
    fill = [[0] * n for _ in range(p + 1)]
    words: list[list[list[Segment]]] = [[[] for _ in range(n)] for _ in range(p + 1)]
    bricks = {}
    for op in _lower(c.ops):
        if isinstance(op, Single):
            w = decompose_single(op.gate)
            if len(w) > width:
                raise SegmentOverflow(
                    f"{op.gate.value} needs {len(w)} pairs but V segments hold {width}; enlarge m")
            r = op.row
            while fill[ptr[r]][r] + len(w) > width:
                ptr[r] += 1
                if ptr[r] > p:
                    raise ColumnOverflow(f"row {r} ran out of V segments; enlarge p")
            fill[ptr[r]][r] += len(w)
            words[ptr[r]][r].append(w)
        else:
            if abs(op.control - op.target) != 1:
                raise NonAdjacentTwoQubitOp(
                    f"cnot({op.control},{op.target}) joins non-adjacent rows; lower it to adjacent CNOTs")
            top = min(op.control, op.target)
            j = max(ptr[top], ptr[top + 1])
            j += (j - top) % 2
            if j >= p:
                raise ColumnOverflow(f"no free brick for rows ({top},{top + 1}); enlarge p")
            bricks[(j, top)] = Brick(j, top, "cnot", "top" if op.control == top else "bottom")
            ptr[top] = ptr[top + 1] = j + 1
    for j in range(p):
        for t in brick_tops(j, n):
            bricks.setdefault((j, t), Brick(j, t))
    v_segments = []
    for j in range(p + 1):
        layer = []
        for r in range(n):
            pairs: tuple[PairSlot, ...] = ()
            for w in words[j][r]:
                pairs = w.pairs + pairs  # later gates sit further left
            layer.append(Segment((HI,) * (width - len(pairs)) + pairs, Alphabet.V))
        v_segments.append(tuple(layer))
    return BrickworkLayout(c.q, n, p, width, tuple(v_segments), bricks)


@dataclass(frozen=True)
class CompiledCircuit:
    circuit: LogicalCircuit
    config: ProtocolConfig
    layout: BrickworkLayout
    masks: tuple[MaskRow, ...]

    @property
    def public_shape(self) -> dict:
        cfg = self.config
        return {"n": self.layout.n, "p": cfg.p, "m": cfg.m, "v_width": cfg.v_width,
                "W": cfg.W, "N": cfg.N, "K": cfg.K}

    @property
    def mask_bits(self) -> tuple[int, ...]:
        return tuple(m.b for m in self.masks)

    def ops(self, masked: bool = True) -> list:
        return self.layout.ops(self.masks if masked else None)


def compile_circuit(c: LogicalCircuit, cfg: ProtocolConfig, rng: np.random.Generator) -> CompiledCircuit:
    layout = build_layout(c, cfg)
    return CompiledCircuit(c, cfg, layout, make_masks(layout.n, cfg.N, rng))


def gate_counts(cc) -> dict:
    """Slot and physical gate accounting for a compiled or obfuscated circuit.

    Accepts a :class:`CompiledCircuit` (nothing added by dummies) or an
    obfuscated program exposing ``windows``.
    """
    windows = getattr(cc, "windows", None)
    compiled = cc.compiled if windows is not None else cc
    layout, cfg = compiled.layout, compiled.config
    real = layout.real_pairs()
    real["mask"] = 2 * cfg.N * layout.n
    real_phys = {
        "V": sum(physical_count(s.pairs) for layer in layout.v_segments for s in layer),
        "U": sum(physical_count(u.pairs) for b in layout.bricks.values()
                 for units in b.row_units().values() for u in units),
        "mask": sum(physical_count(m.segment().pairs) for m in compiled.masks),
    }
    total = dict(real)
    total_phys = dict(real_phys)
    tracks = {"V": 1, "U": 1, "mask": 1}
    if windows is not None:
        total = {"V": 0, "U": 0, "mask": 0}
        total_phys = {"V": 0, "U": 0, "mask": 0}
        for w, ts in windows:
            key = w.kind.value
            tracks[key] = len(ts.tracks)
            for t in ts.tracks:
                total[key] += len(t)
                total_phys[key] += physical_count(t.pairs)
    added = {k: total[k] - real[k] for k in total}
    n_in = layout.n
    return {
        "slots": {"real": real, "total": total},
        "physical_gates": {"real": real_phys, "total": total_phys},
        "tracks_per_window": tracks,
        "added_by_dummies": added["V"] + added["U"],
        "added_by_dummies_by_type": {"V": added["V"], "U": added["U"]},
        "added_by_masks": total["mask"],
        "added_by_masks_physical": total_phys["mask"],
        "bounds": {
            "dummy_factor": 3 ** cfg.W,
            "mask_physical_bound": 4 * cfg.N * 3 ** cfg.W * n_in,
        },
    }
