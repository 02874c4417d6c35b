"""Qubit pairs: effects, joint POVMs, the witness family, degrees, CHSH."""

import math
import random

import numpy as np
import pytest

from polybox.bell import bell_value, chsh_witness
from polybox.qubit import (QUBIT_MAX_ID, QubitEffect, born_box, holder_check,
                           joint_povm_feasible, max_entangled_state, mub_pair,
                           qubit_bound_report, qubit_id, random_effect,
                           trace_pairing_qubit, tsirelson_box, witness_q)


def psd(m, tol=1e-8):
    return float(np.linalg.eigvalsh(m).min()) >= -tol


class TestQubitEffect:
    def test_norm_guard(self):
        with pytest.raises(ValueError):
            QubitEffect(0.5, (0.6, 0.0, 0.0))
        with pytest.raises(ValueError):
            QubitEffect(0.9, (0.0, 0.2, 0.0))
        with pytest.raises(ValueError):
            QubitEffect(0.5, (0.1, 0.1))

    def test_sharp_is_projector(self):
        e = QubitEffect.sharp((3.0, 0.0, 4.0))
        m = e.matrix()
        assert np.allclose(m @ m, m)
        assert abs(np.trace(m) - 1.0) < 1e-12

    def test_complement(self):
        e = QubitEffect(0.3, (0.1, 0.1, 0.2))
        assert np.allclose(e.matrix() + e.complement().matrix(), np.eye(2))

    def test_smear(self):
        e = QubitEffect.sharp((0, 0, 1))
        lam, c = 0.25, 0.5
        want = (1 - lam) * e.matrix() + lam * c * np.eye(2)
        assert np.allclose(e.smear(lam, c).matrix(), want)


class TestFeasibility:
    def test_mub_infeasible(self):
        a, b = mub_pair()
        ok, g = joint_povm_feasible(a, b)
        assert not ok and g is None

    def test_commuting_feasible(self):
        a = QubitEffect.sharp((0, 0, 1))
        b = QubitEffect(0.5, (0.0, 0.0, 0.25))
        ok, g = joint_povm_feasible(a, b)
        assert ok
        assert psd(g)
        assert psd(a.matrix() - g)
        assert psd(b.matrix() - g)
        assert psd(g - (a.matrix() + b.matrix() - np.eye(2)))

    def test_smearing_crosses_threshold(self):
        a, b = mub_pair()
        lam_over = QUBIT_MAX_ID + 0.02
        lam_under = QUBIT_MAX_ID - 0.02
        ok, _ = joint_povm_feasible(a.smear(lam_over, 0.5), b.smear(lam_over, 0.5))
        assert ok
        ok, _ = joint_povm_feasible(a.smear(lam_under, 0.5), b.smear(lam_under, 0.5))
        assert not ok


class TestWitness:
    def test_mub_optimum(self):
        a, b = mub_pair()
        rep = witness_q(a, b)
        assert abs(rep.q_hat - (1.0 - math.sqrt(2.0))) <= 1e-6
        assert abs(rep.id_lower_bound - QUBIT_MAX_ID) <= 1e-6
        assert rep.params.check()
        got = trace_pairing_qubit(a, b, rep.params)
        assert abs(got - rep.q_hat) <= 1e-9
        c, d = holder_check(a, b, rep.params)
        assert abs(c * c + d * d - 1.0) <= 1e-9

    def test_trivial_pair_not_detected(self):
        e = QubitEffect(0.5, (0.0, 0.0, 0.0))
        rep = witness_q(e, e)
        assert rep.q_hat >= -1e-9
        assert rep.id_lower_bound == 0.0

    def test_interior_s_required(self):
        a, b = mub_pair()
        with pytest.raises(ValueError):
            witness_q(a, b, s=(1.0, 0.5))


class TestIdDegree:
    def test_mub_degree(self):
        a, b = mub_pair()
        rep = qubit_id(a, b)
        assert abs(rep.value - QUBIT_MAX_ID) <= 1e-6
        assert abs(rep.dual_bound - QUBIT_MAX_ID) <= 1e-6
        assert rep.dual_bound <= rep.value + 1e-6

    def test_compatible_pair(self):
        e = QubitEffect(0.5, (0.0, 0.0, 0.2))
        rep = qubit_id(e, e)
        assert rep.value == 0.0
        assert rep.iterations == 0

    def test_random_pairs_below_maximum(self):
        rng = random.Random(19)
        for t in range(6):
            a = random_effect(rng, sharp=t % 2 == 0)
            b = random_effect(rng, sharp=t % 2 == 0)
            rep = qubit_id(a, b)
            assert rep.value <= QUBIT_MAX_ID + 1e-6
            assert rep.dual_bound <= rep.value + 1e-6

    def test_interior_s_required(self):
        a, b = mub_pair()
        with pytest.raises(ValueError):
            qubit_id(a, b, s=(0.5, 0.0))


class TestQubitBell:
    def test_tsirelson_value(self):
        box = tsirelson_box()
        assert abs(bell_value(box) - 2.0 * math.sqrt(2.0)) <= 1e-9

    def test_max_entangled_state(self):
        rho = max_entangled_state()
        assert abs(np.trace(rho) - 1.0) <= 1e-12
        assert psd(rho)

    def test_born_box_validates(self):
        a = (QubitEffect.sharp((0, 0, 1)), QubitEffect.sharp((1, 0, 0)))
        rho = np.kron(np.diag([0.5, 0.5]), np.diag([1.0, 0.0]))
        box = born_box(a, a, rho.astype(complex))
        assert box.mode == "float"
        assert bell_value(box) <= 2.0 + 1e-9

    def test_bound_report(self):
        rep = qubit_bound_report()
        assert rep.holds
        assert abs(rep.lhs - 0.5 * (1.0 - math.sqrt(2.0))) <= 1e-9
        assert rep.equality_gap <= 1e-6
        mu = chsh_witness(0, 1, 0)
        assert abs(mu.value(tsirelson_box()) - rep.lhs) <= 1e-12
