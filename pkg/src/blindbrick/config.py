from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

VERSION = "0.1.0"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    """Public protocol parameters.

    ``N`` servers per side (2N total), ``K`` colluder budget, ``m`` gates per
    V segment, ``p`` brick columns, ``W`` V-window width in pairs (defaults to
    ``max(1, K // 2)``).  ``mask_tracks`` wraps the output-mask blocks in dummy
    tracks; with it off, colluders see the real mask blocks they execute.
    """

    N: int = 4
    K: int = 2
    m: int = 16
    p: int = 4
    W: int | None = None
    seed: int = 0
    mask_tracks: bool = True
    measurer: str | None = None

    def __post_init__(self):
        for name in ("N", "K", "m", "p"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if self.W is None:
            object.__setattr__(self, "W", max(1, self.K // 2))
        if self.K < 0:
            raise ConfigError("K must be non-negative")
        if self.N < 4:
            raise ConfigError("N must be at least 4 so an X mask (4 rotation blocks) fits")
        if self.N <= self.K // 2:
            raise ConfigError(f"need N > floor(K/2); got N={self.N}, K={self.K}")
        if self.W < 1:
            raise ConfigError("window width W must be positive")
        if self.m < 2 or self.m % 2:
            raise ConfigError("m must be a positive even number of gates")
        if self.p < 2 or self.p % 2:
            raise ConfigError("p must be a positive even number of columns")
        if self.measurer is not None:
            from .protocol import ServerId

            sid = ServerId.parse(self.measurer)
            if sid.index > self.N:
                raise ConfigError(f"measurer {self.measurer} outside 1..{self.N}")

    @property
    def v_width(self) -> int:
        """V segment width in pairs: m/2 rounded up so windows and identity padding tile it."""
        unit = math.lcm(2, self.W)
        return -(-(self.m // 2) // unit) * unit

    def with_(self, **changes) -> "ProtocolConfig":
        # a derived W follows K unless it was set explicitly
        if "K" in changes and "W" not in changes and self.W == max(1, self.K // 2):
            changes["W"] = None
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ProtocolConfig":
        known = {k: d[k] for k in ("N", "K", "m", "p", "W", "seed", "mask_tracks", "measurer") if k in d}
        return cls(**known)
