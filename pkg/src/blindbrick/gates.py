"""Gate alphabet, pair-slot encoding and exact single-qubit semantics.

Every instruction a server executes is a *pair slot*: an ``H`` followed by
one of ``I, T, T^dagger, T^2, T^dagger^2``.  Segments are ordered lists of
pair slots written in product notation, i.e. the rightmost gate in the
written product acts on the state first.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce

import numpy as np

_SQRT2_INV = 1 / np.sqrt(2)
_OMEGA = np.exp(1j * np.pi / 4)


class Gate(str, enum.Enum):
    I = "I"
    H = "H"
    T = "T"
    Tdg = "Tdg"
    S = "S"
    Sdg = "Sdg"
    X = "X"
    Z = "Z"


_GATE_MATRICES = {
    Gate.I: np.eye(2, dtype=complex),
    Gate.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    Gate.T: np.diag([1, _OMEGA]).astype(complex),
    Gate.Tdg: np.diag([1, np.conj(_OMEGA)]).astype(complex),
    Gate.S: np.diag([1, 1j]).astype(complex),
    Gate.Sdg: np.diag([1, -1j]).astype(complex),
    Gate.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Gate.Z: np.diag([1, -1]).astype(complex),
}
for _m in _GATE_MATRICES.values():
    _m.setflags(write=False)


def gate_unitary(g: Gate | str) -> np.ndarray:
    """Exact 2x2 matrix of a single-qubit gate (read-only array)."""
    return _GATE_MATRICES[Gate(g)]


class Second(str, enum.Enum):
    """What follows the H inside a pair slot."""

    I = "I"
    T = "T"
    Tdg = "Tdg"
    T2 = "T2"
    Tdg2 = "Tdg2"


_SECOND_GATES = {
    Second.I: (Gate.I,),
    Second.T: (Gate.T,),
    Second.Tdg: (Gate.Tdg,),
    Second.T2: (Gate.T, Gate.T),
    Second.Tdg2: (Gate.Tdg, Gate.Tdg),
}

# two-letter wire codes used by the canonical public serialization
_CODES = {
    Second.I: "HI",
    Second.T: "HT",
    Second.Tdg: "Hd",
    Second.T2: "H2",
    Second.Tdg2: "HD",
}
_FROM_CODE = {v: k for k, v in _CODES.items()}


@dataclass(frozen=True, order=True)
class PairSlot:
    second: Second

    def __post_init__(self):
        object.__setattr__(self, "second", Second(self.second))

    @property
    def code(self) -> str:
        return _CODES[self.second]

    @classmethod
    def from_code(cls, code: str) -> "PairSlot":
        try:
            return cls(_FROM_CODE[code])
        except KeyError:
            raise ValueError(f"unknown pair code {code!r}") from None

    def __repr__(self) -> str:
        return self.code


HI = PairSlot(Second.I)
HT = PairSlot(Second.T)
HTdg = PairSlot(Second.Tdg)
HT2 = PairSlot(Second.T2)
HTdg2 = PairSlot(Second.Tdg2)


def expand_pair(p: PairSlot) -> list[Gate]:
    """Physical gates of a pair slot in written order; always starts with H."""
    return [Gate.H, *_SECOND_GATES[p.second]]


def _product(mats) -> np.ndarray:
    return reduce(np.matmul, mats, np.eye(2, dtype=complex))


_PAIR_MATRICES = {
    s: _product(gate_unitary(g) for g in expand_pair(PairSlot(s))) for s in Second
}


def pair_unitary(p: PairSlot) -> np.ndarray:
    return _PAIR_MATRICES[p.second]


class Alphabet(str, enum.Enum):
    V = "V"
    U = "U"
    MASK = "mask"

    @property
    def pairs(self) -> tuple[PairSlot, ...]:
        return _ALPHABETS[self]


_ALPHABETS = {
    Alphabet.V: (HI, HT, HTdg),
    Alphabet.U: (HI, HT2, HTdg2),
    Alphabet.MASK: (HI, HT),
}


@dataclass(frozen=True)
class Segment:
    """Pair slots in written (product) order, tagged with their alphabet."""

    pairs: tuple[PairSlot, ...]
    alphabet: Alphabet = Alphabet.V

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "alphabet", Alphabet(self.alphabet))
        allowed = self.alphabet.pairs
        for p in self.pairs:
            if p not in allowed:
                raise ValueError(f"{p!r} is not in the {self.alphabet.value}-alphabet")

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(p.code for p in self.pairs)

    @classmethod
    def from_codes(cls, codes, alphabet: Alphabet = Alphabet.V) -> "Segment":
        return cls(tuple(PairSlot.from_code(c) for c in codes), alphabet)

    def execution_order(self) -> tuple[PairSlot, ...]:
        """Pairs in the order they touch the qubit (reverse of written order)."""
        return self.pairs[::-1]

    def physical_gates(self) -> list[Gate]:
        return [g for p in self.pairs for g in expand_pair(p)]

    def __add__(self, other: "Segment") -> "Segment":
        if other.alphabet != self.alphabet:
            raise ValueError("cannot concatenate segments over different alphabets")
        return Segment(self.pairs + other.pairs, self.alphabet)


def physical_count(pairs) -> int:
    return sum(len(expand_pair(p)) for p in pairs)


def segment_unitary(s: Segment | tuple[PairSlot, ...]) -> np.ndarray:
    pairs = s.pairs if isinstance(s, Segment) else s
    return _product(pair_unitary(p) for p in pairs)


def equal_up_to_global_phase(u, v, tol: float = 1e-12) -> bool:
    """True iff ``u = e^{i phi} v`` entrywise within ``tol`` for some phase.

    The phase is read off the largest-magnitude entry of ``v``.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    k = np.argmax(np.abs(v))
    ref = v.flat[k]
    if abs(ref) == 0:
        return bool(np.max(np.abs(u), initial=0.0) <= tol)
    phase = u.flat[k] / ref
    if abs(phase) == 0:
        return False
    phase /= abs(phase)
    return bool(np.max(np.abs(u - phase * v)) <= tol)


def is_unitary(u, tol: float = 1e-12) -> bool:
    u = np.asarray(u, dtype=complex)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])
