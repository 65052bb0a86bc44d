"""Simulated delegation across 2N honest-but-curious servers.

Side A servers execute pair slots round-robin (round ``r`` goes to
``A_{(r mod N)+1}``) and hand the state to ``B_{(r mod N)+1}``, which passes
it on to the next A server.  Transcripts record what each server is told;
track-to-register routing never appears in them.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import VERSION, ConfigError, ProtocolConfig
from .gates import PairSlot, pair_unitary
from .obfuscator import (MEASURE_STREAM, ObfuscatedProgram, PublicProgram, rng_stream,
                         strip_secrets)
from .statevector import VECTOR_CAP, apply_cz, apply_single, measure_all, new_state


@dataclass(frozen=True, order=True)
class ServerId:
    side: str
    index: int

    def __post_init__(self):
        if self.side not in ("A", "B") or self.index < 1:
            raise ValueError(f"bad server id {self.side}{self.index}")

    def __str__(self) -> str:
        return f"{self.side}{self.index}"

    @classmethod
    def parse(cls, s: "str | ServerId") -> "ServerId":
        if isinstance(s, ServerId):
            return s
        m = re.fullmatch(r"\s*([ABab])(\d+)\s*", s)
        if not m:
            raise ValueError(f"cannot parse server id {s!r}")
        return cls(m.group(1).upper(), int(m.group(2)))


def all_servers(N: int) -> list[ServerId]:
    return [ServerId(s, i) for s in "AB" for i in range(1, N + 1)]


class Entry(NamedTuple):
    round: int
    kind: str  # "execute" | "cz" | "forward" | "measure"
    window_id: int | None = None
    track_id: int | None = None
    pair: str | None = None
    rows: tuple[int, int] | None = None
    to: str | None = None

    def to_dict(self, server) -> dict:
        d = {"round": self.round, "server": str(server), "kind": self.kind}
        if self.kind == "execute":
            d.update(window_id=self.window_id, track_id=self.track_id, pair=self.pair)
        elif self.kind == "cz":
            d["rows"] = list(self.rows)
        elif self.kind == "forward":
            d["to"] = self.to
        return d


def two_server_trace(public: PublicProgram, keep_round=None) -> dict[str, list[Entry]]:
    """Message streams of the unsplit servers A and B, in round order.

    ``keep_round`` (round -> bool) skips pair executions of other rounds.
    """
    data = public.data
    rounds = data["rounds"]
    per_round: list[list[Entry]] = [[] for _ in range(rounds)]
    for w in data["windows"]:
        for pos in range(w["width"]):
            r = w["start"] + pos
            if keep_round is not None and not keep_round(r):
                continue
            for tid, codes in enumerate(w["tracks"]):
                # tracks are written in product order; execution runs right to left
                per_round[r].append(Entry(r, "execute", w["id"], tid, codes[len(codes) - 1 - pos]))
    cz_after: dict[int, list[Entry]] = {}
    for e in data["cz"]:
        cz_after.setdefault(e["after_round"], []).append(
            Entry(e["after_round"], "cz", rows=tuple(e["rows"])))
    side_a: list[Entry] = []
    side_b: list[Entry] = []
    for r in range(rounds):
        side_a += per_round[r]
        side_a += cz_after.get(r, [])
        side_a.append(Entry(r, "forward", to="B"))
        side_b.append(Entry(r, "forward", to="A"))
    side_a.append(Entry(rounds - 1, "measure"))
    return {"A": side_a, "B": side_b}


def split_roles(trace: dict[str, list[Entry]], N: int, measurer: ServerId | None = None,
                servers=None) -> dict[ServerId, list[Entry]]:
    """Partition each side's stream over N servers by round: round r -> index (r mod N) + 1.

    ``servers`` limits the output to those transcripts.
    """
    keep = set(all_servers(N)) if servers is None else set(servers)
    out: dict[ServerId, list[Entry]] = {sid: [] for sid in sorted(keep)}
    for side, entries in trace.items():
        for e in entries:
            idx = e.round % N + 1
            if e.kind == "measure" and measurer is not None:
                if measurer in keep:
                    out[measurer].append(e)
                continue
            sid = ServerId(side, idx)
            if sid not in keep:
                continue
            if e.kind == "forward":
                nxt = idx if side == "A" else idx % N + 1
                e = e._replace(to=f"{'B' if side == 'A' else 'A'}{nxt}")
            out[sid].append(e)
    return out


def schedule(public: PublicProgram, N: int, measurer: str | ServerId | None = None,
             servers=None) -> dict[ServerId, list[Entry]]:
    m = ServerId.parse(measurer) if measurer is not None else None
    if servers is None:
        return split_roles(two_server_trace(public), N, m)
    servers = {ServerId.parse(s) for s in servers}
    executing = {s.index for s in servers if s.side == "A"}
    trace = two_server_trace(public, lambda r: r % N + 1 in executing)
    return split_roles(trace, N, m, servers)


def measuring_server(rounds: int, N: int, measurer: str | None = None) -> ServerId:
    if measurer is not None:
        return ServerId.parse(measurer)
    return ServerId("A", (rounds - 1) % N + 1)


@dataclass
class RunResult:
    raw_output: str
    decoded_output: str
    transcripts: dict[ServerId, list[Entry]]
    reported_bits: dict[ServerId, str]
    measurer: ServerId
    seed: int
    config: ProtocolConfig
    public: PublicProgram | None = None

    def to_dict(self) -> dict:
        return {"version": VERSION, "raw": self.raw_output, "decoded": self.decoded_output,
                "seed": self.seed, "config": self.config.to_dict(),
                "measurer": str(self.measurer)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def transcript_lines(self) -> list[str]:
        lines = []
        for sid in sorted(self.transcripts):
            for e in self.transcripts[sid]:
                lines.append(json.dumps(e.to_dict(sid), sort_keys=True))
        lines.sort(key=lambda s: (json.loads(s)["round"], s))
        return lines


def decode_output(raw: str, mask_bits, q: int | None = None) -> str:
    """XOR each measured row with its mask bit; optionally keep the first ``q`` rows."""
    if len(raw) != len(mask_bits):
        raise ValueError(f"length mismatch: {len(raw)} bits vs {len(mask_bits)} mask bits")
    out = "".join(str(int(c) ^ int(b)) for c, b in zip(raw, mask_bits))
    return out if q is None else out[:q]


def _check(program: ObfuscatedProgram, cfg: ProtocolConfig):
    if program.compiled.layout.n > VECTOR_CAP:
        raise ConfigError(f"{program.compiled.layout.n} rows exceed the simulator cap {VECTOR_CAP}")
    if cfg.N != program.config.N:
        raise ConfigError("program was compiled for a different N")


def _evolve_real_rows(program: ObfuscatedProgram):
    """Joint state of the real rows after every round, masks included."""
    n = program.compiled.layout.n
    state = new_state(n)
    by_round: list[list[tuple[int, PairSlot]]] = [[] for _ in range(program.rounds)]
    for w, ts in program.windows:
        for pos, pair in enumerate(ts.real.execution_order()):
            by_round[w.start_round + pos].append((w.row, pair))
    cz_after: dict[int, list[tuple[int, int]]] = {}
    for e in program.cz_events:
        cz_after.setdefault(e.after_round, []).append(e.rows)
    for r in range(program.rounds):
        for row, pair in by_round[r]:
            apply_single(state, row, pair_unitary(pair))
        for a, b in cz_after.get(r, ()):
            apply_cz(state, a, b)
    return state


def _evolve_dummies(program: ObfuscatedProgram) -> None:
    # dummy tracks never meet a CZ, so each is an isolated qubit starting in |0>
    for w, ts in program.windows:
        for tid, t in enumerate(ts.tracks):
            if tid == ts.real_index:
                continue
            v = np.array([1.0, 0.0], dtype=complex)
            for pair in t.execution_order():
                v = pair_unitary(pair) @ v
            if abs(np.linalg.norm(v) - 1) > 1e-10:
                raise AssertionError("dummy track lost normalisation")


def run(program: ObfuscatedProgram, cfg: ProtocolConfig | None = None, seed: int | None = None,
        simulate_dummies: bool = True, servers=None) -> RunResult:
    """Execute the program; measurement randomness comes from ``seed``'s measurement substream.

    ``servers`` restricts which transcripts are kept (all by default).
    """
    cfg = program.config if cfg is None else cfg
    _check(program, cfg)
    seed = program.seed if seed is None else seed
    public = strip_secrets(program)
    meas = measuring_server(public.rounds, cfg.N, cfg.measurer)
    transcripts = schedule(public, cfg.N, meas, servers)
    state = _evolve_real_rows(program)
    if simulate_dummies:
        _evolve_dummies(program)
    raw = measure_all(state, rng_stream(seed, MEASURE_STREAM))
    decoded = decode_output(raw, program.compiled.mask_bits, program.compiled.circuit.q)
    return RunResult(raw, decoded, transcripts, {meas: raw}, meas, seed, cfg, public)


def raw_distribution(program: ObfuscatedProgram) -> dict[str, float]:
    """Exact distribution of the masked measurement over all rows."""
    return _evolve_real_rows(program).distribution()


def output_distribution(program: ObfuscatedProgram) -> dict[str, float]:
    """Exact distribution of the decoded output over the logical rows."""
    bits = program.compiled.mask_bits
    q = program.compiled.circuit.q
    out: dict[str, float] = {}
    for raw, pr in raw_distribution(program).items():
        key = decode_output(raw, bits, q)
        out[key] = out.get(key, 0.0) + pr
    return out


def estimate_leak_time(K: int, t: float) -> float:
    """Expected time until colluders accumulate the user's information: (K+1)t."""
    if K < 0:
        raise ValueError("K must be non-negative")
    if t <= 0:
        raise ValueError("t must be positive")
    return (K + 1) * t

