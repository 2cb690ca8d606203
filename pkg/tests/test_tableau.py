"""Tableau and conjugation behavior against the dense oracle."""

import numpy as np
import pytest

from oracle import DenseState, conjugate_xxzz_dense, pauli_matrix, XXZZ_UNITARY
from signcolor.tableau import (ColoredTableau, PauliOperator, conjugate_pauli,
                               new_initial_state, xxzz_gate)
from signcolor.colors import RANDOMIZED


def two_site_paulis():
    for key in range(16):
        yield PauliOperator(2, x=(key >> 3 & 1) | ((key >> 1 & 1) << 1),
                            z=(key >> 2 & 1) | ((key & 1) << 1))


class TestConjugation:
    def test_x_on_first_site(self):
        p = PauliOperator.from_string("+XI")
        got = conjugate_pauli(xxzz_gate(0, 1), p)
        assert str(got) == "+YZ"
        assert got == conjugate_xxzz_dense(p)

    def test_zz_invariant(self):
        p = PauliOperator.from_string("+ZZ")
        got = conjugate_pauli(xxzz_gate(0, 1), p)
        assert str(got) == "+ZZ"
        assert got == conjugate_xxzz_dense(p)

    def test_identity_fixed(self):
        p = PauliOperator.identity(2)
        assert conjugate_pauli(xxzz_gate(0, 1), p) == p

    def test_all_sixteen_match_dense_oracle(self):
        for p in two_site_paulis():
            assert conjugate_pauli(xxzz_gate(0, 1), p) == conjugate_xxzz_dense(p)

    def test_preserves_commutation_relations(self):
        g = xxzz_gate(0, 1)
        ps = list(two_site_paulis())
        for p in ps:
            for q in ps:
                before = p.commutes_with(q)
                after = conjugate_pauli(g, p).commutes_with(conjugate_pauli(g, q))
                assert before == after

    def test_double_application_matches_squared_oracle(self):
        u2 = XXZZ_UNITARY @ XXZZ_UNITARY
        for p in two_site_paulis():
            twice = conjugate_pauli(xxzz_gate(0, 1), conjugate_pauli(xxzz_gate(0, 1), p))
            m = u2 @ pauli_matrix(p) @ u2.conj().T
            assert np.allclose(pauli_matrix(twice), m)

    def test_off_site_action_is_identity(self):
        p = PauliOperator.from_string("+XZYI")
        got = conjugate_pauli(xxzz_gate(1, 3), p)
        # site 0 and 2 untouched
        assert (got.x & 0b0101) == (p.x & 0b0101)
        assert (got.z & 0b0101) == (p.z & 0b0101)


class TestPauliOperator:
    def test_product_phase_rule(self):
        x = PauliOperator.from_string("+X")
        z = PauliOperator.from_string("+Z")
        assert str(x * z) == "-iY"
        assert str(z * x) == "+iY"

    def test_string_roundtrip(self):
        for s in ["+XIZY", "-YZXX", "+IIII"]:
            assert str(PauliOperator.from_string(s)) == s

    def test_sign_of_hermitian(self):
        assert PauliOperator.from_string("-YZ").sign == -1
        assert PauliOperator.from_string("+XX").sign == 1


class TestApplyGate:
    def test_all_plus_two_sites(self):
        t = new_initial_state(2, "product", 0)
        colors_before = t.colors.copy()
        t.apply_gate(xxzz_gate(0, 1))
        got = sorted(str(t.stabilizer(i)) for i in range(2))
        assert got == ["+YZ", "+ZY"]
        assert np.array_equal(t.colors, colors_before)
        t.check_invariants()

    def test_rows_follow_conjugate_pauli(self):
        t = new_initial_state(4, "cat", 1)
        expected = [conjugate_pauli(xxzz_gate(1, 2), t.stabilizer(i)) for i in range(4)]
        t.apply_gate(xxzz_gate(1, 2))
        for i in range(4):
            assert t.stabilizer(i) == expected[i]

    def test_disjoint_gate_leaves_other_rows_alone(self):
        t = new_initial_state(6, "product", 0)
        before = [str(t.stabilizer(i)) for i in range(6)]
        t.apply_gate(xxzz_gate(2, 3))
        for i in (0, 1, 4, 5):
            assert str(t.stabilizer(i)) == before[i]


def single_site(stab: str, color: int = 1) -> ColoredTableau:
    destab = {"X": "+Z", "-X": "+Z", "+X": "+Z", "Z": "+X", "+Z": "+X"}[stab]
    return ColoredTableau.from_rows([PauliOperator.from_string(destab)],
                                    [PauliOperator.from_string(stab if stab[0] in "+-" else "+" + stab)],
                                    colors=[color])


class TestMeasure:
    def test_plus_state_deterministic(self, rng):
        t = single_site("+X")
        before = str(t.stabilizer(0))
        assert t.measure(0, rng) == 1
        assert str(t.stabilizer(0)) == before

    def test_zero_state_unbiased(self):
        rng = np.random.default_rng(7)
        shots = 10_000
        hits = 0
        for _ in range(shots):
            t = single_site("+Z", color=0)
            hits += t.measure(0, rng) == 1
        # 3 sigma binomial around 1/2
        assert abs(hits / shots - 0.5) < 3 * 0.5 / np.sqrt(shots)

    def test_bell_pair_collapse(self, rng):
        t = ColoredTableau.from_rows(
            [PauliOperator.from_string("+XI"), PauliOperator.from_string("+IZ")],
            [PauliOperator.from_string("+ZZ"), PauliOperator.from_string("+XX")],
        )
        out = t.measure(0, rng)
        t.check_invariants()
        assert t.expectation(PauliOperator.from_string("+XX")) == 1
        assert t.expectation(PauliOperator.x_at(2, 0, out)) == 1

    def test_repeat_measurement_is_deterministic(self, rng):
        t = new_initial_state(6, "product", 0)
        rec_rng = np.random.default_rng(3)
        for _ in range(40):
            a, b = rec_rng.choice(6, size=2, replace=False)
            t.apply_gate(xxzz_gate(int(a), int(b)))
            site = int(rec_rng.integers(6))
            first = t.measure(site, rng)
            again = t.measure(site, rng)
            assert first == again

    def test_pivot_row_tagged_randomized(self, rng):
        t = new_initial_state(2, "product", 0)
        t.apply_gate(xxzz_gate(0, 1))
        t.measure(0, rng)
        assert RANDOMIZED in set(int(c) for c in t.colors)


class TestExpectation:
    def test_plus_plus(self):
        t = new_initial_state(2, "product", 0)
        assert t.expectation(PauliOperator.from_string("+XI")) == 1
        assert t.expectation(PauliOperator.from_string("+ZI")) == 0
        assert t.expectation(PauliOperator.from_string("-XI")) == -1

    def test_random_state_against_dense(self, rng):
        from conftest import random_state
        L = 5
        # odd L is fine here: build by gates/measurements on any distinct pair
        t = new_initial_state(6, "product", 0)
        dense = DenseState.from_family(6, "product", 0)
        gen = np.random.default_rng(11)
        for _ in range(18):
            a, b = (int(v) for v in gen.choice(6, size=2, replace=False))
            t.apply_gate(xxzz_gate(a, b))
            dense.apply_xxzz(a, b)
        for _ in range(50):
            key = int(gen.integers(1, 4 ** 6))
            p = PauliOperator(6, x=key % 64, z=(key // 64) % 64)
            p.phase = (p.phase + 2 * int(gen.integers(2))) % 4
            if not p.is_hermitian:
                p.phase = (p.phase + 1) % 4
            got = t.expectation(p)
            want = dense.expectation(p)
            assert abs(got - want) < 1e-9


def lockstep_circuit(L: int, depth: int, seed: int, gates_per_step: int = 2,
                     meas_per_step: int = 2):
    """Drive the tableau and the dense oracle through one random circuit.

    Checks, at every measurement: deterministic/random branch agreement,
    outcome probabilities, and that every stabilizer row stabilizes the dense
    state afterwards. Returns the number of measurements compared.
    """
    gen = np.random.default_rng(seed)
    out_rng = np.random.default_rng(seed + 1)
    family = ("product", "cat", "bell")[seed % 3]
    logical = seed % 2
    t = new_initial_state(L, family, logical)
    dense = DenseState.from_family(L, family, logical)
    checked = 0
    for _ in range(depth):
        for _ in range(gates_per_step):
            a, b = (int(v) for v in gen.choice(L, size=2, replace=False))
            t.apply_gate(xxzz_gate(a, b))
            dense.apply_xxzz(a, b)
        for _ in range(meas_per_step):
            site = int(gen.integers(L))
            p_plus = dense.prob_x_plus(site)
            deterministic = all(
                t.stabilizer(i).commutes_with(PauliOperator.x_at(L, site))
                for i in range(L)
            )
            out = t.measure(site, out_rng)
            if deterministic:
                assert abs(p_plus - (1.0 if out == 1 else 0.0)) < 1e-9
            else:
                assert abs(p_plus - 0.5) < 1e-9
            dense.project_x(site, out)
            for i in range(L):
                assert dense.stabilized_by(t.stabilizer(i))
            checked += 1
    t.check_invariants()
    return checked


def test_lockstep_small_sample():
    total = 0
    for seed in range(12):
        L = 4 + 2 * (seed % 2)
        total += lockstep_circuit(L, depth=6, seed=seed)
    assert total > 100


def test_invariants_hold_after_long_random_evolution(rng):
    from signcolor.circuits import CircuitRecord, DepthRule, run
    rec = CircuitRecord.sample("chain", 8, DepthRule.constant(30), 0.8, 0.3, 99)
    t = new_initial_state(8, "product", 1)
    out = run(rec, t, rng, mode="plain")
    out.final.check_invariants()
