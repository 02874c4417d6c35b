"""Witness maps: validation, trace pairing, duality, special criteria."""

import random

import pytest

from polybox import linalg as la
from polybox.exact import R0, R1, rat
from polybox.measurements import coin_toss, identity_collection, random_collection
from polybox.polysimplex import PolySimplex, polysimplex_space, square_space
from polybox.spaces import simplex_space
from polybox.witnesses import (WitnessValidationError, is_etb, is_witness,
                               make_witness_map, map_trace_pairing,
                               maximal_incompatibility_certificate, q_value,
                               random_witness_map, retraction_check,
                               square_extremality, trace_pairing,
                               trace_pairing_rebased,
                               two_outcome_witness_criterion)

SQ = PolySimplex((1, 1))
SPACES = [simplex_space(2), square_space(), polysimplex_space((2, 1))]


def constant_map(shape, space, v):
    return {n: tuple(v) for n in shape.outcomes()}


def square_witness():
    """The q-minimizer for the identity on the square: a genuine witness."""
    F = identity_collection(SQ)
    q, W, lam = q_value(F, SQ.barycenter())
    assert q < 0
    return W


class TestConstruction:
    def test_missing_outcome(self):
        sp = square_space()
        images = constant_map(SQ, sp, sp.interior_point())
        del images[(1, 1)]
        with pytest.raises(ValueError):
            make_witness_map(SQ, sp, images)

    def test_exchange_violation(self):
        sp = square_space()
        images = constant_map(SQ, sp, la.zeros(sp.dim))
        images[(1, 1)] = sp.vertices[0]
        with pytest.raises(WitnessValidationError) as err:
            make_witness_map(SQ, sp, images)
        assert err.value.code == "CONSISTENCY_VIOLATION"

    def test_cone_violation(self):
        sp = square_space()
        bad = la.vec_scale(rat(-1), sp.interior_point())
        with pytest.raises(WitnessValidationError) as err:
            make_witness_map(SQ, sp, constant_map(SQ, sp, bad))
        assert err.value.code == "NOT_POSITIVE"

    def test_apply_matches_images(self):
        rng = random.Random(2)
        for sp in SPACES:
            W = random_witness_map(SQ, sp, rng)
            for n in SQ.outcomes():
                assert W.apply(SQ.vertex(n)) == W.image(n)

    def test_scale_and_translate(self):
        rng = random.Random(4)
        sp = square_space()
        W = random_witness_map(SQ, sp, rng)
        doubled = W.scale(2)
        shifted = W.translate(sp.interior_point())
        for n in SQ.outcomes():
            assert doubled.image(n) == tuple(la.vec_scale(2, W.image(n)))
            assert shifted.image(n) == tuple(
                la.vec_add(W.image(n), sp.interior_point()))


class TestTracePairing:
    def test_shape_mismatch(self):
        F = identity_collection(PolySimplex((2,)))
        W = square_witness()
        with pytest.raises(ValueError):
            trace_pairing(F, W)

    def test_base_independence(self):
        rng = random.Random(9)
        for sp in SPACES:
            F = random_collection(sp, (1, 1), rng)
            W = random_witness_map(SQ, sp, rng)
            ref = trace_pairing(F, W)
            for base in SQ.outcomes():
                assert trace_pairing_rebased(F, W, base) == ref
            assert map_trace_pairing(F, W) == ref

    def test_linearity_in_the_witness(self):
        rng = random.Random(13)
        sp = polysimplex_space((2, 1))
        F = random_collection(sp, (1, 1), rng)
        W = random_witness_map(SQ, sp, rng)
        assert trace_pairing(F, W.scale(3)) == 3 * trace_pairing(F, W)

    def test_translation_shifts_by_unit_value(self):
        # Tr F(W + L_v) = Tr FW + <1_K, v>
        rng = random.Random(17)
        sp = square_space()
        F = random_collection(sp, (1, 1), rng)
        W = random_witness_map(SQ, sp, rng)
        v = sp.interior_point()
        got = trace_pairing(F, W.translate(v))
        assert got == trace_pairing(F, W) + la.dot(sp.unit, v)


class TestQValue:
    def test_identity_square(self):
        F = identity_collection(SQ)
        q, W, lam = q_value(F, SQ.barycenter())
        assert q == rat(-1)
        assert lam == rat(1, 2)
        assert trace_pairing(F, W) == q

    def test_uniform_coin_toss(self):
        F = coin_toss(SQ, SQ.barycenter())
        q, _W, lam = q_value(F, SQ.barycenter())
        assert q == R1
        assert lam == R0

    def test_boundary_rejected(self):
        F = identity_collection(SQ)
        with pytest.raises(ValueError):
            q_value(F, SQ.vertex((0, 0)))


class TestWitnessDuality:
    def test_known_witness(self):
        W = square_witness()
        dec = is_witness(W)
        assert dec.is_witness
        assert dec.min_value < 0
        assert dec.translation is None and dec.translated_etb is None
        assert trace_pairing(dec.minimizer, W) == dec.min_value
        ok, _ = is_etb(W)
        assert not ok

    def test_explicit_etb_map(self):
        sp = square_space()
        psi = {(0, 0): la.vec_scale(rat(1, 2), sp.vertices[0]),
               (0, 1): la.vec_scale(rat(1, 2), sp.vertices[1]),
               (1, 0): la.vec_scale(rat(1, 2), sp.vertices[2]),
               (1, 1): la.vec_scale(rat(1, 2), sp.vertices[3])}
        images = {n: tuple(la.vec_add(psi[(0, n[0])], psi[(1, n[1])]))
                  for n in SQ.outcomes()}
        W = make_witness_map(SQ, sp, images)
        ok, dec = is_etb(W)
        assert ok
        assert dec.check(W)
        decision = is_witness(W)
        assert not decision.is_witness
        assert decision.translation is not None
        shifted = W.translate(decision.translation)
        assert decision.translated_etb.check(shifted)

    def test_random_draw_consistency(self):
        rng = random.Random(23)
        for sp in SPACES:
            for _ in range(5):
                W = random_witness_map(SQ, sp, rng)
                dec = is_witness(W)
                assert dec.is_witness == (dec.min_value < 0)
                assert dec.is_witness == (dec.translation is None)
                assert trace_pairing(dec.minimizer, W) == dec.min_value
                if dec.translation is not None:
                    assert la.dot(sp.unit, dec.translation) == R0
                    dec.translated_etb.check(W.translate(dec.translation))

    def test_scaling_preserves_witnesses(self):
        W = square_witness()
        dec = is_witness(W.scale(rat(5, 2)))
        assert dec.is_witness
        assert dec.min_value == rat(5, 2) * is_witness(W).min_value

    def test_translation_shifts_min_value(self):
        W = square_witness()
        base = is_witness(W).min_value
        c = rat(1, 8)
        shifted = W.translate(la.vec_scale(c, W.space.interior_point()))
        assert is_witness(shifted).min_value == base + c


class TestTwoOutcomeCriterion:
    def test_non_hypercube_rejected(self):
        rng = random.Random(1)
        sh = PolySimplex((2, 1))
        W = random_witness_map(sh, square_space(), rng)
        with pytest.raises(ValueError):
            two_outcome_witness_criterion(W)

    def test_matches_witness_test(self):
        rng = random.Random(31)
        hits = 0
        for sp in SPACES:
            for _ in range(5):
                W = random_witness_map(SQ, sp, rng)
                dec = is_witness(W)
                hits += dec.is_witness
                assert two_outcome_witness_criterion(W) == dec.is_witness
        W = square_witness()
        assert two_outcome_witness_criterion(W)


class TestMaximal:
    def test_identity_square_is_maximal(self):
        rep = maximal_incompatibility_certificate(identity_collection(SQ))
        assert rep.maximal
        assert rep.value == rat(-1)
        assert rep.orthogonal
        assert is_witness(rep.witness).is_witness

    def test_identity_cube_is_maximal(self):
        cube = PolySimplex((1, 1, 1))
        rep = maximal_incompatibility_certificate(identity_collection(cube))
        assert rep.maximal
        assert rep.value == rat(-2)
        assert rep.orthogonal

    def test_coin_toss_is_not(self):
        rep = maximal_incompatibility_certificate(coin_toss(SQ, SQ.barycenter()))
        assert not rep.maximal
        assert rep.value == R1
        assert rep.witness is None


class TestRetraction:
    def test_identity_retracts(self):
        F = identity_collection(SQ)
        rep = retraction_check(F)
        assert rep.is_retraction
        for n in SQ.outcomes():
            assert F.apply(rep.section_images[n]) == SQ.vertex(n)
        # S'∘F is idempotent on the span of K
        p = rep.projection
        for v in F.space.vertices:
            assert la.mat_vec(p, la.mat_vec(p, v)) == la.mat_vec(p, v)

    def test_coin_toss_does_not(self):
        rep = retraction_check(coin_toss(SQ, SQ.barycenter()))
        assert not rep.is_retraction
        assert rep.section_images is None

    def test_non_hypercube_rejected(self):
        with pytest.raises(ValueError):
            retraction_check(identity_collection(PolySimplex((2, 1))))


class TestSquareExtremality:
    def test_maximal_witness_is_extremal(self):
        rep = maximal_incompatibility_certificate(identity_collection(SQ))
        assert square_extremality(rep.witness)

    def test_interior_constant_map_is_not(self):
        sp = square_space()
        W = make_witness_map(SQ, sp, constant_map(SQ, sp, sp.interior_point()))
        assert not square_extremality(W)

    def test_non_square_rejected(self):
        rng = random.Random(6)
        sh = PolySimplex((1, 1, 1))
        W = random_witness_map(sh, square_space(), rng)
        with pytest.raises(ValueError):
            square_extremality(W)
