import pytest
from sklearn.base import clone

import oracles
from blindbrick import LogicalCircuit, ProtocolConfig
from blindbrick.adversary import (BudgetExceeded, EmpiricalMLAdversary, GameResult, ShapeMismatch,
                                  StateSpaceTooLarge, ViewSampler, audit_collusion, collude,
                                  colluder_templates, derive_seed, exact_view_tv,
                                  run_distinguishing_game, view_features)
from blindbrick.protocol import ServerId, measuring_server

# frozen regression value of exact_view_tv(I, X, {A8, A1, A2, A3}) with exposed masks, N=8, K=4
EXPOSED_N8_K4_TV = 0.9714285714285635


def _rounds(cfg):
    return (cfg.p + 1) * cfg.v_width + 4 * cfg.p + 2 * cfg.N


def test_derive_seed_stable():
    assert derive_seed(0, 10, 3) == derive_seed(0, 10, 3)
    assert derive_seed(0, 10, 3) != derive_seed(0, 10, 4)
    assert derive_seed(0, 10, 3) != derive_seed(1, 10, 3)


def test_collude_budget(bell):
    cfg = ProtocolConfig(N=4, K=2, p=2)
    res = ViewSampler(bell, cfg, ["A1"]).run(0)
    with pytest.raises(BudgetExceeded):
        collude(res, ["A1", "A2", "B1"])
    v = collude(res, ["A1", "A2", "B1"], budget=None)
    assert len(v.colluders) == 3


def test_view_contains_only_colluder_entries(bell):
    cfg = ProtocolConfig(N=4, K=2, p=2)
    v = ViewSampler(bell, cfg, ["A1", "B3"]).view(0)
    assert {str(s) for s, _ in v.entries} == {"A1", "B3"}
    rounds = [e.round for _, e in v.entries]
    assert rounds == sorted(rounds)


def test_features_split_windows(identity_1q):
    cfg = ProtocolConfig(N=4, K=2, p=2)
    feats = view_features(ViewSampler(identity_1q, cfg, ["A1"]).view(0))
    assert "struct" in feats and "out" in feats
    assert any(isinstance(k, tuple) and k[0] == "w" for k in feats)


def test_shape_mismatch(identity_1q):
    c3 = LogicalCircuit.from_dict({"q": 3, "ops": [{"gate": "I", "row": 0}]})
    with pytest.raises(ShapeMismatch):
        exact_view_tv(identity_1q, c3, ["A1"], ProtocolConfig(p=2))


def test_identical_circuits_have_zero_tv(bell):
    cfg = ProtocolConfig(N=4, K=2, p=2, mask_tracks=False)
    assert exact_view_tv(bell, bell, ["A4", "A1"], cfg) == 0.0


@pytest.mark.parametrize("N,K", [(4, 2), (5, 2), (8, 4), (6, 6)])
def test_hidden_masks_give_zero_tv(identity_1q, x_1q, N, K):
    cfg = ProtocolConfig(N=N, K=K, p=2)
    ids = [str(s) for s in colluder_templates(N, K)["consecutive-A"]]
    assert exact_view_tv(identity_1q, x_1q, ids, cfg) <= 1e-15


def test_hidden_masks_zero_even_under_full_collusion(identity_1q, x_1q):
    cfg = ProtocolConfig(N=4, K=2, p=2)
    ids = ["A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"]
    assert exact_view_tv(identity_1q, x_1q, ids, cfg) <= 1e-15


@pytest.mark.parametrize("N", [4, 5, 6, 7, 8, 10, 12])
def test_measurer_only_matches_hand_oracle(identity_1q, x_1q, N):
    cfg = ProtocolConfig(N=N, K=2, p=2, mask_tracks=False)
    rounds = _rounds(cfg)
    meas = measuring_server(rounds, N)
    blocks = oracles.informative_blocks(N, rounds - 2 * N, meas.index)
    expected = float(oracles.mask_leak_tv(N, blocks, 0, 1))
    assert exact_view_tv(identity_1q, x_1q, [str(meas)], cfg) == pytest.approx(expected, abs=1e-12)


def test_n8_measurer_is_four_sevenths(identity_1q, x_1q):
    cfg = ProtocolConfig(N=8, K=4, p=2, mask_tracks=False)
    assert exact_view_tv(identity_1q, x_1q, ["A8"], cfg) == pytest.approx(4 / 7, abs=1e-12)


def test_n4_exposed_masks_leak_fully(identity_1q, x_1q):
    cfg = ProtocolConfig(N=4, K=2, p=2, mask_tracks=False)
    assert exact_view_tv(identity_1q, x_1q, ["A4", "A1"], cfg) == pytest.approx(1.0, abs=1e-12)


def test_frozen_n8_value(identity_1q, x_1q):
    cfg = ProtocolConfig(N=8, K=4, p=2, mask_tracks=False)
    tv = exact_view_tv(identity_1q, x_1q, ["A8", "A1", "A2", "A3"], cfg)
    assert tv == pytest.approx(EXPOSED_N8_K4_TV, abs=1e-12)


def test_tv_monotone_in_coalition(identity_1q, x_1q):
    cfg = ProtocolConfig(N=8, K=4, p=2, mask_tracks=False)
    chain = [["A8"], ["A8", "A1"], ["A8", "A1", "A2"], ["A8", "A1", "A2", "A3"]]
    tvs = [exact_view_tv(identity_1q, x_1q, ids, cfg) for ids in chain]
    assert all(a <= b + 1e-12 for a, b in zip(tvs, tvs[1:]))


def test_gate_windows_alone_never_leak(bell):
    other = LogicalCircuit.from_dict({"q": 2, "ops": [{"gate": "T", "row": 1}, {"cnot": [1, 0]}]})
    cfg = ProtocolConfig(N=4, K=4, p=2)
    for ids in (["A1", "A2"], ["A1", "A2", "A3", "A4"], ["A2", "B2", "B3"]):
        assert exact_view_tv(bell, other, ids, cfg, restrict="gates") == 0.0


def test_state_space_cap(identity_1q, x_1q):
    cfg = ProtocolConfig(N=8, K=4, p=2, mask_tracks=False)
    with pytest.raises(StateSpaceTooLarge):
        exact_view_tv(identity_1q, x_1q, ["A8"], cfg, max_states=2)


def test_game_result():
    g = GameResult(100, 75)
    assert g.advantage == 0.25
    assert g.ci == pytest.approx(0.15)


def test_adversary_is_sklearn_estimator():
    adv = EmpiricalMLAdversary(alpha=0.5, random_state=3)
    assert adv.get_params() == {"alpha": 0.5, "random_state": 3}
    assert clone(adv).get_params() == adv.get_params()


def test_game_same_circuit_is_fair(identity_1q):
    cfg = ProtocolConfig(N=4, K=2, p=2, mask_tracks=False)
    g = run_distinguishing_game(identity_1q, identity_1q, ["A4", "A1"], 800, 1, cfg, 200)
    assert abs(g.advantage) <= g.ci


def test_game_exposed_n4_wins(identity_1q, x_1q):
    cfg = ProtocolConfig(N=4, K=2, p=2, mask_tracks=False)
    g = run_distinguishing_game(identity_1q, x_1q, ["A4", "A1"], 400, 2, cfg, 200)
    assert g.advantage > 0.45


def test_game_deterministic(identity_1q, x_1q):
    cfg = ProtocolConfig(N=8, K=4, p=2, mask_tracks=False)
    a = run_distinguishing_game(identity_1q, x_1q, ["A8"], 200, 5, cfg, 100)
    b = run_distinguishing_game(identity_1q, x_1q, ["A8"], 200, 5, cfg, 100)
    assert a == b


def test_templates():
    t = colluder_templates(6, 4, seed=1)
    assert set(t) == {"consecutive-A", "consecutive-B", "mixed", "random"}
    assert all(len(v) == 4 for v in t.values())
    assert t["mixed"] == [ServerId("A", 1), ServerId("B", 1), ServerId("A", 2), ServerId("B", 2)]
    assert t == colluder_templates(6, 4, seed=1)


def test_audit_small(identity_1q, x_1q):
    cfg = ProtocolConfig(N=4, K=2, p=2)
    rep = audit_collusion(cfg, [("i-vs-x", (identity_1q, x_1q))], trials=200, rehearsals=50)
    assert rep["flags"] == 0
    assert len(rep["results"]) == 4
    assert all(r["verdict"] == "blind" for r in rep["results"])


def test_audit_without_exact_tv(identity_1q, x_1q, monkeypatch):
    import blindbrick.adversary as adv

    def too_large(*args, **kwargs):
        raise StateSpaceTooLarge("cap")
    monkeypatch.setattr(adv, "exact_view_tv", too_large)
    rep = audit_collusion(ProtocolConfig(N=4, K=2, p=2, mask_tracks=False),
                          [("i-vs-x", (identity_1q, x_1q))], trials=100, rehearsals=20)
    assert rep["flags"] == 0
    assert {r["verdict"] for r in rep["results"]} == {"tv-unavailable"}
