"""Collusion views, distinguishing games and exact view-distribution analysis."""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .circuit import LogicalCircuit
from .compiler import CompiledCircuit, build_layout, make_masks
from .config import ProtocolConfig
from .gates import Alphabet
from .obfuscator import MASK_STREAM, make_tracks, obfuscate, rng_stream, split_windows
from .protocol import Entry, RunResult, ServerId, all_servers, measuring_server, run
from .statevector import apply_ops, new_state, total_variation

GAME_STREAM, REHEARSAL_STREAM, TEMPLATE_STREAM = 10, 11, 12


class BudgetExceeded(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class StateSpaceTooLarge(ValueError):
    pass


def derive_seed(master: int, purpose: int, index: int) -> int:
    """Per-trial seed: first word of SeedSequence(master, spawn_key=(purpose, index))."""
    return int(np.random.SeedSequence(master, spawn_key=(purpose, index)).generate_state(1)[0])


@dataclass(frozen=True)
class CollusionView:
    colluders: frozenset
    entries: tuple[tuple[ServerId, Entry], ...]
    reported_bits: tuple[tuple[str, str], ...]
    window_kinds: dict = field(hash=False, compare=False)
    mask_tracks: bool = True
    public_shape: dict = field(default_factory=dict, hash=False, compare=False)


def collude(result: RunResult, ids, budget: int | None = -1) -> CollusionView:
    """Pool the transcripts of ``ids`` in round order.

    ``budget`` defaults to the run's K; pass ``None`` to allow any coalition
    (e.g. all 2N servers, which the protocol does not claim to withstand).
    """
    ids = frozenset(ServerId.parse(i) for i in ids)
    budget = result.config.K if budget == -1 else budget
    if budget is not None and len(ids) > budget:
        raise BudgetExceeded(f"{len(ids)} colluders exceed budget K={budget}")
    pooled = [(sid, e) for sid in sorted(ids) for e in result.transcripts.get(sid, ())]
    pooled.sort(key=lambda se: (se[1].round, str(se[0])))
    bits = tuple(sorted((str(s), b) for s, b in result.reported_bits.items() if s in ids))
    kinds, shape = {}, {}
    if result.public is not None:
        kinds = {w["id"]: w["kind"] for w in result.public.data["windows"]}
        shape = result.public.shape
    return CollusionView(ids, tuple(pooled), bits, kinds, result.config.mask_tracks, shape)


def view_features(view: CollusionView) -> dict:
    """Split a view into the components the exact analysis treats as independent.

    Each dummy-tracked window is its own component.  Reported bits form the
    ``"out"`` component, joined by the mask windows when those are untracked.
    """
    groups: dict = defaultdict(list)
    other = []
    for sid, e in view.entries:
        if e.kind == "execute":
            groups[e.window_id].append((e.round, e.track_id, e.pair))
        else:
            other.append((str(sid),) + tuple(e))
    feats: dict = {"struct": tuple(other)}
    out_masks = []
    for wid, items in groups.items():
        items = tuple(sorted(items))
        if not view.mask_tracks and view.window_kinds.get(wid) == Alphabet.MASK.value:
            out_masks.append((wid, items))
        else:
            feats[("w", wid)] = items
    feats["out"] = (tuple(sorted(out_masks)), view.reported_bits)
    return feats


class EmpiricalMLAdversary(ClassifierMixin, BaseEstimator):
    """Maximum likelihood over view components, with likelihoods learned from rehearsal views.

    Components are scored independently (add-``alpha`` smoothing); ties are
    broken with a seeded coin.
    """

    def __init__(self, alpha: float = 1.0, random_state: int = 0):
        self.alpha = alpha
        self.random_state = random_state

    def fit(self, X, y):
        y = np.asarray(y, dtype=int)
        self.classes_ = np.array([0, 1])
        self.counts_ = {0: defaultdict(Counter), 1: defaultdict(Counter)}
        self.n_ = {0: int(np.sum(y == 0)), 1: int(np.sum(y == 1))}
        for view, label in zip(X, y):
            for key, val in view_features(view).items():
                self.counts_[int(label)][key][val] += 1
        self.support_ = {k: len(set(self.counts_[0][k]) | set(self.counts_[1][k]))
                         for k in set(self.counts_[0]) | set(self.counts_[1])}
        self._coin = np.random.default_rng(self.random_state)
        return self

    def log_likelihood_ratio(self, view) -> float:
        llr = 0.0
        a = self.alpha
        for key, val in view_features(view).items():
            v = self.support_.get(key, 0) + 1
            c1 = self.counts_[1][key][val] if key in self.counts_[1] else 0
            c0 = self.counts_[0][key][val] if key in self.counts_[0] else 0
            llr += math.log((c1 + a) / (self.n_[1] + a * v)) - math.log((c0 + a) / (self.n_[0] + a * v))
        return llr

    def predict(self, X):
        out = []
        for view in X:
            llr = self.log_likelihood_ratio(view)
            if abs(llr) < 1e-12:
                out.append(int(self._coin.integers(2)))
            else:
                out.append(int(llr > 0))
        return np.array(out)


@dataclass(frozen=True)
class GameResult:
    trials: int
    successes: int

    @property
    def advantage(self) -> float:
        return self.successes / self.trials - 0.5

    @property
    def ci(self) -> float:
        """Three binomial standard deviations of the success rate under a fair coin."""
        return 3 * 0.5 / math.sqrt(self.trials)

    def to_dict(self) -> dict:
        return {"trials": self.trials, "successes": self.successes,
                "advantage": self.advantage, "ci": self.ci}


class ViewSampler:
    """Runs the full user + server pipeline for one circuit and returns colluder views."""

    def __init__(self, circuit: LogicalCircuit, cfg: ProtocolConfig, ids, budget=-1):
        self.circuit = circuit
        self.cfg = cfg
        self.ids = ids
        self.budget = budget
        self.layout = build_layout(circuit, cfg)

    def compiled(self, seed: int) -> CompiledCircuit:
        masks = make_masks(self.layout.n, self.cfg.N, rng_stream(seed, MASK_STREAM))
        return CompiledCircuit(self.circuit, self.cfg, self.layout, masks)

    def run(self, seed: int) -> RunResult:
        return run(obfuscate(self.compiled(seed), seed), self.cfg, seed, simulate_dummies=False,
                   servers=self.ids)

    def view(self, seed: int) -> CollusionView:
        return collude(self.run(seed), self.ids, self.budget)


def check_same_shape(c0: LogicalCircuit, c1: LogicalCircuit, cfg: ProtocolConfig):
    s0 = build_layout(c0, cfg)
    s1 = build_layout(c1, cfg)
    if (s0.n, s0.p, s0.v_width) != (s1.n, s1.p, s1.v_width):
        raise ShapeMismatch(f"public shapes differ: n={s0.n} vs n={s1.n}")


def run_distinguishing_game(c0: LogicalCircuit, c1: LogicalCircuit, ids, trials: int = 10_000,
                            seed: int = 0, cfg: ProtocolConfig | None = None,
                            rehearsals: int = 2000, adversary=None, budget=-1) -> GameResult:
    """Challenger flips a bit, runs the chosen circuit, hands the colluders' view to the adversary."""
    cfg = cfg or ProtocolConfig()
    check_same_shape(c0, c1, cfg)
    samplers = (ViewSampler(c0, cfg, ids, budget), ViewSampler(c1, cfg, ids, budget))
    adversary = adversary if adversary is not None else EmpiricalMLAdversary(random_state=seed)
    X, y = [], []
    for i in range(rehearsals):
        for label in (0, 1):
            X.append(samplers[label].view(derive_seed(seed, REHEARSAL_STREAM, 2 * i + label)))
            y.append(label)
    adversary.fit(X, y)
    bits = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(GAME_STREAM,))).integers(2, size=trials)
    views = [samplers[b].view(derive_seed(seed, GAME_STREAM, i)) for i, b in enumerate(bits)]
    guesses = adversary.predict(views)
    return GameResult(trials, int(np.sum(guesses == bits)))


# ---------------------------------------------------------------- exact analysis

def _visible_positions(start: int, width: int, N: int, ids) -> tuple[int, ...]:
    return tuple(pos for pos in range(width) if ServerId("A", (start + pos) % N + 1) in ids)


def _track_multiset(tracks, visible) -> tuple:
    proj = [tuple(t.execution_order()[p].code for p in visible) for t in tracks]
    return tuple(sorted(proj))


def _ordering_distribution(multiset: tuple, cap: float) -> dict:
    n = len(multiset)
    counts = Counter(multiset)
    n_orders = math.factorial(n) // math.prod(math.factorial(c) for c in counts.values())
    if n_orders > cap:
        raise StateSpaceTooLarge(f"{n_orders} track orderings exceed the cap {cap:g}")
    p = 1.0 / n_orders
    return {perm: p for perm in set(itertools.permutations(multiset))}


def _mask_row_distribution(N: int, block_start: int, visible_fn) -> dict:
    """(b, visible block contents) for one row under residue-class sampling."""
    from .compiler import MaskRow

    dist: dict = defaultdict(float)
    for b in (0, 1):
        cls = [c for c in range(N + 1) if c % 8 == 4 * b]
        for c in cls:
            subsets = list(itertools.combinations(range(N), c))
            w = 0.5 / len(cls) / len(subsets)
            for sub in subsets:
                row = MaskRow(tuple(k in sub for k in range(N)), b)
                vis = []
                for k, seg in enumerate(row.block_segments()):
                    codes = seg.execution_order()
                    vis.append(tuple(codes[pos].code for pos in visible_fn(block_start + 2 * k, 2)))
                dist[(b, tuple(vis))] += w
    return dict(dist)


def _product_tv(pairs, cap: float) -> float:
    if not pairs:
        return 0.0
    if len(pairs) == 1:
        return total_variation(*pairs[0])
    size = math.prod(len(set(d0) | set(d1)) for d0, d1 in pairs)
    if size > cap:
        raise StateSpaceTooLarge(f"joint view support {size} exceeds the cap {cap:g}")
    keys = [sorted(set(d0) | set(d1), key=repr) for d0, d1 in pairs]
    tv = 0.0
    for combo in itertools.product(*keys):
        p0 = math.prod(d0.get(k, 0.0) for (d0, _), k in zip(pairs, combo))
        p1 = math.prod(d1.get(k, 0.0) for (_, d1), k in zip(pairs, combo))
        tv += abs(p0 - p1)
    return 0.5 * tv


def _pre_mask_distribution(layout) -> dict:
    return apply_ops(new_state(layout.n), layout.ops()).distribution()


def exact_view_tv(c0: LogicalCircuit, c1: LogicalCircuit, ids, cfg: ProtocolConfig | None = None,
                  restrict: str | None = None, max_states: float = 1e7) -> float:
    """Total variation between the two exact colluder-view distributions.

    All user randomness (track shuffles, mask bits, rotation counts and block
    positions) and the measurement outcome are enumerated.  Components that
    are independent and identically distributed under both circuits are
    factored out, which leaves TV unchanged.  ``restrict="gates"`` keeps only
    V and U windows.  The best possible game advantage is half the result.
    """
    cfg = cfg or ProtocolConfig()
    check_same_shape(c0, c1, cfg)
    ids = frozenset(ServerId.parse(i) for i in ids)
    N = cfg.N
    layouts = [build_layout(c, cfg) for c in (c0, c1)]
    dummy_masks = make_masks(layouts[0].n, N, np.random.default_rng(0))
    timelines = [split_windows(CompiledCircuit(c, cfg, lay, dummy_masks))
                 for c, lay in zip((c0, c1), layouts)]
    coin = np.random.default_rng(0)
    differing = []
    for (w0, s0), (w1, s1) in zip(timelines[0].windows, timelines[1].windows):
        is_mask = w0.kind is Alphabet.MASK
        if restrict == "gates" and is_mask:
            continue
        if is_mask and not cfg.mask_tracks:
            continue  # handled with the output component
        vis = _visible_positions(w0.start_round, w0.width, N, ids)
        if not vis:
            continue
        m0 = _track_multiset(make_tracks(w0, s0, coin).tracks, vis)
        m1 = _track_multiset(make_tracks(w1, s1, coin).tracks, vis)
        if m0 != m1:
            differing.append((_ordering_distribution(m0, max_states),
                              _ordering_distribution(m1, max_states)))
    if restrict != "gates":
        out = [_output_component(lay, cfg, ids, timelines[0].rounds, max_states) for lay in layouts]
        if out[0] != out[1]:
            differing.append(tuple(out))
    return _product_tv(differing, max_states)


def _output_component(layout, cfg: ProtocolConfig, ids, rounds: int, cap: float) -> dict:
    N, n = cfg.N, layout.n
    mask_start = rounds - 2 * N
    if cfg.mask_tracks:
        def visible(start, width):
            return ()
    else:
        def visible(start, width):
            return _visible_positions(start, width, N, ids)
    row_dist = _mask_row_distribution(N, mask_start, visible)
    sees_bits = measuring_server(rounds, N, cfg.measurer) in ids
    outcomes = _pre_mask_distribution(layout)
    size = len(row_dist) ** n * len(outcomes)
    if size > cap:
        raise StateSpaceTooLarge(f"output component support {size} exceeds the cap {cap:g}")
    dist: dict = defaultdict(float)
    for combo in itertools.product(row_dist.items(), repeat=n):
        pb = math.prod(p for _, p in combo)
        bvec = [b for (b, _), _ in combo]
        vis = tuple(v for (_, v), _ in combo)
        for out, po in outcomes.items():
            rep = "".join(str(int(o) ^ b) for o, b in zip(out, bvec)) if sees_bits else None
            dist[(vis, rep)] += pb * po
    return {k: v for k, v in dist.items() if v > 1e-15}


# ---------------------------------------------------------------- audit

def colluder_templates(N: int, K: int, seed: int = 0) -> dict[str, list[ServerId]]:
    k = min(K, 2 * N)
    a = [ServerId("A", i) for i in range(1, N + 1)]
    b = [ServerId("B", i) for i in range(1, N + 1)]
    mixed = [s for pair in zip(a, b) for s in pair][:k]
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(TEMPLATE_STREAM,)))
    pool = all_servers(N)
    rand = [pool[i] for i in sorted(rng.choice(len(pool), size=k, replace=False))]
    return {"consecutive-A": a[:min(k, N)], "consecutive-B": b[:min(k, N)],
            "mixed": mixed, "random": rand}


def audit_collusion(cfg: ProtocolConfig, corpus, trials: int = 2000, rehearsals: int = 500,
                    seed: int = 0) -> dict:
    """Game plus exact TV for every colluder template and circuit pair.

    A result is flagged when the measured advantage exceeds half the exact TV
    by more than three standard deviations; without an exact TV (state space
    over the cap) no verdict is given.
    """
    results = []
    for name, (c0, c1) in corpus:
        for tname, ids in colluder_templates(cfg.N, cfg.K, seed).items():
            game = run_distinguishing_game(c0, c1, ids, trials, seed, cfg, rehearsals)
            try:
                tv = exact_view_tv(c0, c1, ids, cfg)
            except StateSpaceTooLarge:
                tv = None
            if tv is None:
                verdict = "tv-unavailable"
            elif game.advantage > tv / 2 + game.ci:
                verdict = "flag"
            else:
                verdict = "leaks-within-bound" if tv else "blind"
            results.append({
                "pair": name, "template": tname, "colluders": [str(s) for s in ids],
                **game.to_dict(), "exact_tv": tv, "verdict": verdict,
            })
    return {"config": cfg.to_dict(), "seed": seed, "results": results,
            "flags": sum(r["verdict"] == "flag" for r in results)}
