"""Logical circuits: the user's computation before brickwork compilation."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .gates import Gate


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Single:
    row: int
    gate: Gate

    def __post_init__(self):
        try:
            object.__setattr__(self, "gate", Gate(self.gate))
        except ValueError:
            raise CircuitError(f"unsupported gate {self.gate!r}") from None

    def to_dict(self):
        return {"gate": self.gate.value, "row": self.row}


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def to_dict(self):
        return {"cnot": [self.control, self.target]}


@dataclass(frozen=True)
class CZ:
    a: int
    b: int

    def to_dict(self):
        return {"cz": [self.a, self.b]}


Op = Union[Single, CNOT, CZ]


@dataclass(frozen=True)
class LogicalCircuit:
    q: int
    ops: tuple[Op, ...]

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if not isinstance(self.q, int) or self.q < 1:
            raise CircuitError(f"qubit count must be a positive integer, got {self.q!r}")
        if not self.ops:
            raise CircuitError("circuit has no operations")
        for op in self.ops:
            rows = (op.row,) if isinstance(op, Single) else (
                (op.control, op.target) if isinstance(op, CNOT) else (op.a, op.b))
            for r in rows:
                if not isinstance(r, int) or not 0 <= r < self.q:
                    raise CircuitError(f"row {r!r} out of range in {op}")
            if len(rows) == 2 and rows[0] == rows[1]:
                raise CircuitError(f"two-qubit op on a single row: {op}")

    @classmethod
    def from_dict(cls, d: dict) -> "LogicalCircuit":
        if not isinstance(d, dict) or "q" not in d or "ops" not in d:
            raise CircuitError('circuit document needs "q" and "ops"')
        ops: list[Op] = []
        for item in d["ops"]:
            if "cnot" in item:
                c, t = item["cnot"]
                ops.append(CNOT(c, t))
            elif "cz" in item:
                a, b = item["cz"]
                ops.append(CZ(a, b))
            elif "gate" in item:
                ops.append(Single(item["row"], item["gate"]))
            else:
                raise CircuitError(f"unrecognised op {item!r}")
        return cls(d["q"], tuple(ops))

    def to_dict(self) -> dict:
        return {"q": self.q, "ops": [op.to_dict() for op in self.ops]}

    @classmethod
    def from_json(cls, text: str) -> "LogicalCircuit":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def load(cls, path) -> "LogicalCircuit":
        return cls.from_json(Path(path).read_text())

    def direct_ops(self):
        """Simulator stream for the circuit as written, no compilation."""
        from .statevector import CZOp, SingleOp

        stream = []
        for op in self.ops:
            if isinstance(op, Single):
                stream.append(SingleOp(op.row, op.gate))
            elif isinstance(op, CZ):
                stream.append(CZOp(op.a, op.b))
            else:
                stream += [SingleOp(op.target, Gate.H), CZOp(op.control, op.target),
                           SingleOp(op.target, Gate.H)]
        return stream

    def output_distribution(self) -> dict[str, float]:
        from .statevector import apply_ops, new_state

        return apply_ops(new_state(self.q), self.direct_ops()).distribution()
