"""scikit-learn style front-end.

``fit`` learns the public shape class (the smallest brick column count that
fits every training circuit), ``transform`` produces public programs,
``predict``/``predict_proba`` delegate the circuits and decode the results.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_circuits
from .adversary import ShapeMismatch, derive_seed
from .compiler import ColumnOverflow, build_layout, compile_circuit
from .config import ProtocolConfig
from .obfuscator import MASK_STREAM, ObfuscatedProgram, obfuscate, rng_stream, strip_secrets
from .protocol import output_distribution, run

_DELEGATION_STREAM = 20


class BlindDelegation(TransformerMixin, BaseEstimator):
    """Compile, obfuscate and delegate circuits under one public shape.

    Parameters
    ----------
    n_servers : int
        Servers per side (N); 2N servers in total.
    colluders : int
        Colluder budget K.
    m : int
        Gates per V segment.
    p : int or None
        Brick columns; chosen by ``fit`` when None.
    window : int or None
        V-window width in pairs; defaults to ``max(1, colluders // 2)``.
    mask_tracks : bool
        Wrap output-mask blocks in dummy tracks.
    max_columns : int
        Upper limit for the column search in ``fit``.
    random_state : int
        Master seed; circuit ``i`` of a call uses a seed derived from it.
    """

    def __init__(self, n_servers=4, colluders=2, m=16, p=None, window=None,
                 mask_tracks=True, max_columns=64, random_state=0):
        self.n_servers = n_servers
        self.colluders = colluders
        self.m = m
        self.p = p
        self.window = window
        self.mask_tracks = mask_tracks
        self.max_columns = max_columns
        self.random_state = random_state

    def _config(self, p: int) -> ProtocolConfig:
        return ProtocolConfig(N=self.n_servers, K=self.colluders, m=self.m, p=p, W=self.window,
                              seed=self.random_state, mask_tracks=self.mask_tracks)

    def fit(self, X, y=None):
        circuits = check_circuits(X)
        rows = {c.q + c.q % 2 for c in circuits}
        if len(rows) > 1:
            raise ShapeMismatch(f"training circuits span several row counts: {sorted(rows)}")
        candidates = [self.p] if self.p is not None else range(2, self.max_columns + 1, 2)
        for p in candidates:
            cfg = self._config(p)
            try:
                for c in circuits:
                    build_layout(c, cfg)
            except ColumnOverflow:
                continue
            break
        else:
            raise ColumnOverflow(f"no column count up to {self.max_columns} fits the circuits")
        self.config_ = cfg
        self.n_rows_ = rows.pop()
        self.public_shape_ = compile_circuit(circuits[0], cfg, np.random.default_rng(0)).public_shape
        return self

    def compile(self, X) -> list[ObfuscatedProgram]:
        """Obfuscated programs, secrets included."""
        check_is_fitted(self, "config_")
        out = []
        for i, c in enumerate(check_circuits(X)):
            if c.q + c.q % 2 != self.n_rows_:
                raise ShapeMismatch(f"circuit has {c.q} rows; fitted shape has {self.n_rows_}")
            seed = derive_seed(self.random_state, _DELEGATION_STREAM, i)
            cc = compile_circuit(c, self.config_, rng_stream(seed, MASK_STREAM))
            out.append(obfuscate(cc, seed))
        return out

    def transform(self, X):
        return [strip_secrets(p) for p in self.compile(X)]

    def predict(self, X):
        return np.array([run(p).decoded_output for p in self.compile(X)])

    def predict_proba(self, X):
        return [output_distribution(p) for p in self.compile(X)]
