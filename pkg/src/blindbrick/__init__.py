"""Multi-server blind delegation laboratory: brickwork compilation, dummy tracks, collusion analysis."""
from .circuit import CNOT, CZ, LogicalCircuit, Single
from .compiler import build_layout, compile_circuit, decompose_single, gate_counts
from .config import ProtocolConfig
from .estimator import BlindDelegation
from .gates import Gate, PairSlot, Segment, equal_up_to_global_phase, segment_unitary
from .obfuscator import obfuscate, strip_secrets
from .protocol import ServerId, decode_output, estimate_leak_time, run

__all__ = [
    "CNOT", "CZ", "LogicalCircuit", "Single", "build_layout", "compile_circuit",
    "decompose_single", "gate_counts", "ProtocolConfig", "BlindDelegation", "Gate",
    "PairSlot", "Segment", "equal_up_to_global_phase", "segment_unitary", "obfuscate",
    "strip_secrets", "ServerId", "decode_output", "estimate_leak_time", "run",
]
