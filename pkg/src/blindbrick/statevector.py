"""Exact statevector simulation for small circuits.

Bit order: row 0 is the most significant bit of a basis-state index, so the
bitstring ``"10"`` on two rows is index 2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .gates import Gate, gate_unitary

VECTOR_CAP = 14
MATRIX_CAP = 6
NORM_TOL = 1e-10


class SimulatorCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SingleOp:
    row: int
    u: np.ndarray

    def __init__(self, row: int, u):
        object.__setattr__(self, "row", int(row))
        if isinstance(u, (Gate, str)):
            u = gate_unitary(u)
        object.__setattr__(self, "u", np.asarray(u, dtype=complex))


@dataclass(frozen=True)
class CZOp:
    a: int
    b: int


class Statevector:
    """Amplitude vector over ``q`` rows; mutated in place by the ``apply_*`` functions."""

    def __init__(self, amplitudes, q: int):
        self.amplitudes = np.asarray(amplitudes, dtype=complex)
        self.q = q
        if self.amplitudes.shape != (2**q,):
            raise ValueError("amplitude vector length must be 2**q")

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.q)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def distribution(self, rows: int | None = None) -> dict[str, float]:
        """Outcome distribution over the first ``rows`` rows (all by default)."""
        rows = self.q if rows is None else rows
        probs = self.probabilities().reshape(2**rows, -1).sum(axis=1)
        return {format(i, f"0{rows}b"): float(p) for i, p in enumerate(probs) if p > 0}

    def __repr__(self) -> str:
        return f"Statevector(q={self.q})"


def new_state(q: int, cap: int = VECTOR_CAP) -> Statevector:
    if not 1 <= q <= cap:
        raise SimulatorCapExceeded(f"qubit count {q} outside 1..{cap}")
    amps = np.zeros(2**q, dtype=complex)
    amps[0] = 1.0
    return Statevector(amps, q)


def _check_row(state: Statevector, row: int):
    if not 0 <= row < state.q:
        raise IndexError(f"row {row} out of range for {state.q} rows")


def apply_single(state: Statevector, row: int, u) -> Statevector:
    _check_row(state, row)
    u = gate_unitary(u) if isinstance(u, (Gate, str)) else np.asarray(u, dtype=complex)
    psi = state.amplitudes.reshape(2**row, 2, -1)
    state.amplitudes = np.einsum("ij,ajb->aib", u, psi).reshape(-1)
    return state


def apply_cz(state: Statevector, row_a: int, row_b: int) -> Statevector:
    _check_row(state, row_a)
    _check_row(state, row_b)
    if row_a == row_b:
        raise ValueError("CZ needs two distinct rows")
    psi = state.amplitudes.reshape([2] * state.q)
    idx = [slice(None)] * state.q
    idx[row_a] = 1
    idx[row_b] = 1
    psi[tuple(idx)] *= -1
    return state


def apply_ops(state: Statevector, ops: Iterable[SingleOp | CZOp]) -> Statevector:
    for op in ops:
        if isinstance(op, CZOp):
            apply_cz(state, op.a, op.b)
        else:
            apply_single(state, op.row, op.u)
    return state


def circuit_unitary(ops: Iterable[SingleOp | CZOp], q: int) -> np.ndarray:
    """Full ``2^q x 2^q`` matrix of an instruction stream (first op acts first)."""
    if not 1 <= q <= MATRIX_CAP:
        raise SimulatorCapExceeded(f"matrix mode supports at most {MATRIX_CAP} qubits, got {q}")
    ops = list(ops)
    dim = 2**q
    cols = []
    for k in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[k] = 1.0
        cols.append(apply_ops(Statevector(amps, q), ops).amplitudes)
    return np.stack(cols, axis=1)


def measure_all(state: Statevector, rng: np.random.Generator) -> str:
    """Sample a full bitstring; consumes exactly one uniform draw from ``rng``."""
    probs = state.probabilities()
    cdf = np.cumsum(probs)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    k = min(k, len(probs) - 1)
    return format(k, f"0{state.q}b")


def total_variation(p: Mapping[str, float], r: Mapping[str, float]) -> float:
    keys = set(p) | set(r)
    return 0.5 * sum(abs(p.get(k, 0.0) - r.get(k, 0.0)) for k in keys)
