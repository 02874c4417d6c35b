"""Measurement collections, the joint LP, and incompatibility degrees."""

import random

import pytest

from polybox import linalg as la
from polybox.exact import R0, R1, rat
from polybox.measurements import (IdSearchReport, coin_toss, coin_toss_on,
                                  from_functionals, id_degree, id_degree_at,
                                  identity_collection, is_compatible,
                                  make_collection, random_collection)
from polybox.polysimplex import PolySimplex, polysimplex_space, square_space
from polybox.spaces import simplex_space

SQ = PolySimplex((1, 1))


def square_values(f):
    """Values of an ambient square functional on the four vertices."""
    sp = square_space()
    return tuple(la.dot(f, v) for v in sp.vertices)


class TestValidation:
    def test_missing_effect(self):
        sp = square_space()
        eff = {(0, 0): square_values(SQ.m(0, 0)),
               (0, 1): square_values(SQ.m(0, 1))}
        with pytest.raises(ValueError):
            make_collection(sp, (1, 1), eff)

    def test_negative_effect(self):
        sp = square_space()
        eff = {(0, 0): (rat(-1, 4), R0, R0, R0),
               (0, 1): (rat(5, 4), R1, R1, R1),
               (1, 0): square_values(SQ.m(1, 0)),
               (1, 1): square_values(SQ.m(1, 1))}
        with pytest.raises(ValueError):
            make_collection(sp, (1, 1), eff)

    def test_not_normalized(self):
        sp = square_space()
        eff = {(0, 0): square_values(SQ.m(0, 0)),
               (0, 1): square_values(SQ.m(0, 0)),
               (1, 0): square_values(SQ.m(1, 0)),
               (1, 1): square_values(SQ.m(1, 1))}
        with pytest.raises(ValueError):
            make_collection(sp, (1, 1), eff)

    def test_affinely_inconsistent(self):
        # square vertices obey v00 + v11 = v01 + v10; these values do not
        sp = square_space()
        eff = {(0, 0): (R1, R0, R0, R0),
               (0, 1): (R0, R1, R1, R1),
               (1, 0): square_values(SQ.m(1, 0)),
               (1, 1): square_values(SQ.m(1, 1))}
        with pytest.raises(ValueError):
            make_collection(sp, (1, 1), eff)

    def test_mix_shape_mismatch(self):
        a = identity_collection(SQ)
        b = coin_toss(PolySimplex((2,)), PolySimplex((2,)).barycenter())
        with pytest.raises(ValueError):
            a.mix(b, rat(1, 2))


class TestBasics:
    def test_identity_applies_to_itself(self):
        F = identity_collection(SQ)
        for v in F.space.vertices:
            assert F.apply(v) == v

    def test_coin_toss_is_constant(self):
        s = SQ.barycenter()
        F = coin_toss(SQ, s)
        for v in F.space.vertices:
            assert F.apply(v) == s
        with pytest.raises(ValueError):
            coin_toss(SQ, la.vec_scale(2, s))

    def test_effect_value_extends_linearly(self):
        F = identity_collection(SQ)
        sp = F.space
        mid = la.vec_scale(rat(1, 2), la.vec_add(sp.vertices[0], sp.vertices[3]))
        for (i, j), vals in F.effects.items():
            want = (vals[0] + vals[3]) / 2
            assert F.effect_value(i, j, mid) == want

    def test_map_matrix_matches_apply(self):
        rng = random.Random(7)
        F = random_collection(square_space(), (1, 1), rng)
        m = F.as_map_matrix()
        for v in F.space.vertices:
            assert tuple(la.mat_vec(m, v)) == F.apply(v)

    def test_mix_interpolates(self):
        F = identity_collection(SQ)
        G = coin_toss(SQ, SQ.barycenter())
        H = F.mix(G, rat(1, 4))
        for k, vals in H.effects.items():
            want = tuple(rat(3, 4) * a + rat(1, 4) * b
                         for a, b in zip(F.effects[k], G.effects[k]))
            assert vals == want


class TestCompatibility:
    def test_identity_on_square_incompatible(self):
        ok, joint = is_compatible(identity_collection(SQ))
        assert not ok and joint is None

    def test_coin_toss_compatible(self):
        ok, joint = is_compatible(coin_toss(SQ, SQ.barycenter()))
        assert ok
        assert joint.check(coin_toss(SQ, SQ.barycenter()))

    def test_product_collection_compatible(self):
        # one sharp input plus one trivial input always has a joint
        sp = square_space()
        half = la.vec_scale(rat(1, 2), sp.unit)
        F = from_functionals(sp, (1, 1), {(0, 0): SQ.m(0, 0),
                                          (0, 1): SQ.m(0, 1),
                                          (1, 0): half, (1, 1): half})
        ok, joint = is_compatible(F)
        assert ok
        assert joint.check(F)

    def test_simplex_domain_always_compatible(self):
        # classical systems admit no incompatibility
        rng = random.Random(3)
        sp = simplex_space(3)
        for _ in range(10):
            F = random_collection(sp, (1, 1), rng)
            ok, _ = is_compatible(F, want_joint=False)
            assert ok

    def test_joint_check_rejects_doctored_table(self):
        F = coin_toss(SQ, SQ.barycenter())
        ok, joint = is_compatible(F)
        assert ok
        key = next(iter(joint.table))
        joint.table[key] = tuple(v + rat(1, 7) for v in joint.table[key])
        with pytest.raises(AssertionError):
            joint.check(F)


class TestDegrees:
    def test_identity_square_degree(self):
        F = identity_collection(SQ)
        s = SQ.barycenter()
        assert id_degree_at(F, s, cross_check=True) == rat(1, 2)

    def test_boundary_point_rejected(self):
        F = identity_collection(SQ)
        with pytest.raises(ValueError):
            id_degree_at(F, F.space.vertices[0])

    def test_degree_zero_for_compatible(self):
        F = coin_toss(SQ, SQ.barycenter())
        assert id_degree_at(F, SQ.barycenter()) == R0
        rep = id_degree(F)
        assert isinstance(rep, IdSearchReport)
        assert rep.value == R0 and not rep.upper_bound_only

    def test_search_on_identity(self):
        rep = id_degree(identity_collection(SQ))
        assert rep.value == rat(1, 2)
        assert SQ.interior(rep.s)

    def test_barycenter_bound(self):
        # k+1 inputs force ID at the barycenter to at most k/(k+1)
        rng = random.Random(11)
        s = SQ.barycenter()
        for t in range(8):
            F = random_collection(square_space(), (1, 1), rng,
                                  bias=rat(3, 4) if t % 2 else None)
            assert id_degree_at(F, s, cross_check=True) <= rat(1, 2)

    def test_mixing_to_degree_restores_compatibility(self):
        F = identity_collection(SQ)
        s = SQ.barycenter()
        lam = id_degree_at(F, s)
        mixed = F.mix(coin_toss_on(F.space, SQ, s), lam)
        ok, joint = is_compatible(mixed)
        assert ok
        assert joint.check(mixed)
        # any smaller mixing weight leaves it incompatible
        under = F.mix(coin_toss_on(F.space, SQ, s), lam - rat(1, 100))
        ok, _ = is_compatible(under, want_joint=False)
        assert not ok

    def test_random_collection_valid_on_foreign_space(self):
        rng = random.Random(5)
        sp = polysimplex_space((2, 1))
        F = random_collection(sp, (1, 1, 1), rng, bias=rat(1, 2))
        assert F.apply(sp.vertices[0])
        tgt = PolySimplex((1, 1, 1)).as_state_space()
        for v in sp.vertices:
            assert tgt.is_state(F.apply(v))
