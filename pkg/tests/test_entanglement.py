"""Entropy and tripartite mutual information against the dense oracle."""

import itertools

import numpy as np
import pytest

from conftest import random_state
from oracle import DenseState
from signcolor._bits import gf2_rank, gf2_rank_dense
from signcolor.entanglement import Region, entropy, half_chain_entropy, tripartite_mi
from signcolor.tableau import new_initial_state


def dense_of(t, family, logical, gates):
    d = DenseState.from_family(t.n, family, logical)
    for a, b in gates:
        d.apply_xxzz(a, b)
    return d


def test_product_state_has_zero_entropy_everywhere():
    t = new_initial_state(6, "product", 1)
    for r in range(7):
        assert entropy(t, Region.contiguous(0, r, 6)) == 0


def test_bell_pair_single_site():
    t = new_initial_state(2, "bell", 0)
    assert entropy(t, Region.contiguous(0, 1, 2)) == 1


def test_cat_tmi_is_one_bit():
    t = new_initial_state(8, "cat", 0)
    dense = DenseState.from_family(8, "cat", 0)
    quarters = [range(0, 2), range(2, 4), range(4, 6)]
    a, b, c = quarters
    i3_dense = (dense.entropy_bits(a) + dense.entropy_bits(b) + dense.entropy_bits(c)
                - dense.entropy_bits(list(a) + list(b))
                - dense.entropy_bits(list(a) + list(c))
                - dense.entropy_bits(list(b) + list(c))
                + dense.entropy_bits(list(a) + list(b) + list(c)))
    assert abs(i3_dense - 1.0) < 1e-9
    assert tripartite_mi(t) == 1


def test_all_regions_match_dense_oracle():
    from signcolor.circuits import sample_1d, DepthRule, run
    from signcolor.seeding import substream
    for seed in range(4):
        L = 6
        gen = np.random.default_rng(seed)
        t = new_initial_state(L, "product", 0)
        dense = DenseState.from_family(L, "product", 0)
        for _ in range(14):
            a, b = (int(v) for v in gen.choice(L, size=2, replace=False))
            from signcolor.tableau import xxzz_gate
            t.apply_gate(xxzz_gate(a, b))
            dense.apply_xxzz(a, b)
        for bits in range(2 ** L):
            sites = [s for s in range(L) if (bits >> s) & 1]
            got = entropy(t, Region.from_sites(sites, L))
            want = dense.entropy_bits(sites)
            assert abs(got - want) < 1e-6


def test_half_chain_matches_dense():
    t = new_initial_state(6, "cat", 1)
    d = DenseState.from_family(6, "cat", 1)
    assert half_chain_entropy(t) == pytest.approx(d.entropy_bits(range(3)), abs=1e-9)


def test_entropy_bounds_and_purity_symmetry():
    for seed in range(20):
        L = 8
        t = random_state(L, depth=10, seed=seed)
        for start, length in [(0, 2), (1, 3), (2, 4), (0, 5)]:
            r = Region.contiguous(start, length, L)
            comp = Region.from_sites(set(range(L)) - set(r.sites), L)
            s = entropy(t, r)
            assert 0 <= s <= min(len(r), L - len(r))
            assert s == entropy(t, comp)


def test_subadditivity_on_random_states():
    for seed in range(60):
        L = 10
        t = random_state(L, depth=8, seed=seed + 500)
        a = Region.contiguous(0, 3, L)
        b = Region.contiguous(3, 4, L)
        ab = Region.contiguous(0, 7, L)
        assert entropy(t, ab) <= entropy(t, a) + entropy(t, b)


def test_packed_rank_agrees_with_naive_oracle():
    gen = np.random.default_rng(0)
    for _ in range(120):
        rows = int(gen.integers(1, 12))
        cols = int(gen.integers(1, 12))
        dense = gen.integers(0, 2, size=(rows, cols))
        ints = [int("".join(str(b) for b in row[::-1]), 2) for row in dense]
        assert gf2_rank(ints) == gf2_rank_dense(dense.tolist())


def test_shape_errors():
    t = new_initial_state(6, "product", 0)
    with pytest.raises(ValueError):
        tripartite_mi(t)
    t2 = new_initial_state(4, "product", 0)
    assert tripartite_mi(t2) == 0
    with pytest.raises(ValueError):
        Region.from_sites([0, 0, 1], 4)
    with pytest.raises(ValueError):
        Region.from_sites([9], 4)
