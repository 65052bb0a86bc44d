import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from blindbrick.gates import (HI, HT, HT2, HTdg, HTdg2, Alphabet, Gate, PairSlot, Segment,
                              equal_up_to_global_phase, expand_pair, gate_unitary, is_unitary,
                              pair_unitary, physical_count, rx, rz, segment_unitary)

ALL_PAIRS = [HI, HT, HTdg, HT2, HTdg2]


def seg(*codes, alphabet=Alphabet.V):
    return Segment.from_codes(codes, alphabet)


@pytest.mark.parametrize("g", list(Gate))
def test_gate_matrices_match_oracle(g):
    assert np.allclose(gate_unitary(g), oracles.TARGETS[g.value], atol=1e-15)


def test_t_squared_is_s():
    t = gate_unitary(Gate.T)
    assert np.allclose(t @ t, np.diag([1, 1j]), atol=1e-15)


@pytest.mark.parametrize("p", ALL_PAIRS)
def test_pair_starts_with_h(p):
    assert expand_pair(p)[0] is Gate.H


@pytest.mark.parametrize("p", ALL_PAIRS)
def test_code_roundtrip(p):
    assert PairSlot.from_code(p.code) == p


def test_alphabets():
    assert {p.code for p in Alphabet.V.pairs} == {"HI", "HT", "Hd"}
    assert {p.code for p in Alphabet.U.pairs} == {"HI", "H2", "HD"}
    assert {p.code for p in Alphabet.MASK.pairs} == {"HI", "HT"}


def test_segment_rejects_foreign_pair():
    with pytest.raises(ValueError):
        Segment((HT2,), Alphabet.V)


def test_hi_hi_is_exact_identity():
    assert np.array_equal(np.round(segment_unitary(seg("HI", "HI")), 15), np.eye(2))
    assert np.max(np.abs(segment_unitary(seg("HI", "HI")) - np.eye(2))) <= 1e-15


@pytest.mark.parametrize("k", range(0, 9, 2))
def test_even_powers_of_hi_collapse(k):
    assert np.max(np.abs(segment_unitary(Segment((HI,) * k, Alphabet.V)) - np.eye(2))) <= 1e-15


def test_product_order_is_written_order():
    # written H*I*H*T2: the T2 slot acts first
    u = segment_unitary(seg("HI", "H2", alphabet=Alphabet.U))
    h, s = oracles.H, oracles.S
    assert np.allclose(u, h @ h @ s, atol=1e-15)
    assert not np.allclose(u, h @ s @ h, atol=1e-6)


def test_rz_half_pi_unit():
    u = segment_unitary(seg("HI", "H2", alphabet=Alphabet.U))
    assert np.allclose(u, np.exp(1j * np.pi / 4) * oracles.rz(np.pi / 2), atol=1e-12)


def test_rx_quarter_pi_block():
    u = segment_unitary(seg("HT", "HI"))
    assert np.allclose(u, np.exp(1j * np.pi / 8) * oracles.rx(np.pi / 4), atol=1e-12)


def test_rx_block_to_fourth_power_is_exact_x():
    u = np.linalg.matrix_power(segment_unitary(seg("HT", "HI")), 4)
    assert np.max(np.abs(u - oracles.X)) <= 1e-12
    assert equal_up_to_global_phase(u, oracles.X)


@pytest.mark.parametrize("codes,target", [
    (("HI", "HI"), oracles.I2),
    (("HI", "H2"), oracles.rz(np.pi / 2)),
    (("H2", "HI"), oracles.rx(np.pi / 2)),
    (("HD", "HI"), oracles.rx(-np.pi / 2)),
])
def test_corner_units(codes, target):
    assert equal_up_to_global_phase(segment_unitary(seg(*codes, alphabet=Alphabet.U)), target)


def test_equal_up_to_global_phase_examples():
    assert equal_up_to_global_phase(oracles.X, -1j * oracles.X)
    assert not equal_up_to_global_phase(oracles.X, oracles.Z)
    with pytest.raises(ValueError):
        equal_up_to_global_phase(np.eye(2), np.eye(4))


def test_rotation_helpers_match_oracle():
    for th in (0.3, -1.1, np.pi):
        assert np.allclose(rx(th), oracles.rx(th))
        assert np.allclose(rz(th), oracles.rz(th))


def test_physical_count():
    assert physical_count([HI, HT, HT2]) == 2 + 2 + 3


@given(st.lists(st.sampled_from(ALL_PAIRS), max_size=30))
def test_any_segment_is_unitary(pairs):
    u = segment_unitary(tuple(pairs))
    assert is_unitary(u)


@given(st.lists(st.sampled_from(ALL_PAIRS), max_size=12))
def test_segment_unitary_is_product_of_pairs(pairs):
    expected = np.eye(2, dtype=complex)
    for p in pairs:
        expected = expected @ pair_unitary(p)
    assert np.allclose(segment_unitary(tuple(pairs)), expected, atol=1e-12)


@given(st.floats(0, 2 * np.pi), st.sampled_from(list(Gate)))
def test_global_phase_is_ignored(phi, g):
    u = gate_unitary(g)
    assert equal_up_to_global_phase(np.exp(1j * phi) * u, u)
