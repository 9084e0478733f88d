from fractions import Fraction

import pytest

from kurihara.errors import (
    BadPrime,
    DenominatorDivisibleByP,
    NotAUnit,
    NotSquarefree,
    Supersingular,
)
from kurihara.exactmath import (
    GroupRingElement,
    ResidueRing,
    projection_map,
    unit_group,
    unit_reduction,
)
from kurihara.mazurtate import (
    euler_factor,
    frobenius_factor,
    stabilization_scalar,
    theta,
    unit_root,
    vartheta,
    xi_tilde,
)


class TestUnitRoot:
    def test_37a1_p5(self, e37):
        # x^2 + 2x + 5 = x(x + 2) mod 5: unit root -2 = 3
        assert unit_root(e37, 5, 1).alpha == 3

    def test_vieta(self, e11):
        root = unit_root(e11, 7, 2)
        a_p = -2
        beta = (a_p - root.alpha) % 49
        assert root.alpha * beta % 49 == 7 % 49
        assert (root.alpha + beta) % 49 == a_p % 49

    def test_hensel_m3(self, e37):
        root = unit_root(e37, 5, 3)
        assert (root.alpha**2 - (-2) * root.alpha + 5) % 125 == 0
        assert root.alpha % 5 == 3

    def test_supersingular(self, e37):
        with pytest.raises(Supersingular):
            unit_root(e37, 19, 1)  # a_19 = 0


class TestTheta:
    def test_augmentation_case(self, sym11):
        t = theta(sym11, 1, 0)
        assert t.element.coeffs == {(): Fraction(1, 5)}

    def test_conjugation_symmetry(self, sym11):
        t = theta(sym11, 13, 0)
        G = t.element.group
        for a in G.units():
            assert t.element.coefficient(G.sigma(a)) == t.element.coefficient(
                G.sigma(13 - a)
            )

    def test_level_validation(self, sym11):
        with pytest.raises(NotSquarefree):
            theta(sym11, 9, 0)
        with pytest.raises(BadPrime):
            theta(sym11, 11, 0)
        with pytest.raises(BadPrime):
            theta(sym11, 7, 1, 7)  # gcd(d, p) != 1

    def test_p_integral_reduction(self, sym11):
        t = theta(sym11, 3, 1, 7)
        reduced = t.reduce_mod(7, 2)
        assert reduced.ring == ResidueRing(7, 2)

    def test_non_integral_denominator_is_hard_error(self, sym11):
        t = theta(sym11, 1, 0)  # value 1/5
        with pytest.raises(DenominatorDivisibleByP, match="level 1"):
            t.reduce_mod(5, 1)


class TestVartheta:
    def test_projective_system(self, sym11):
        p, m = 7, 2
        v2 = vartheta(sym11, 1, 2, p, m)
        v1 = vartheta(sym11, 1, 1, p, m)
        v0 = vartheta(sym11, 1, 0, p, m)
        assert projection_map(v2, unit_reduction(v2.group, v1.group)) == v1
        assert projection_map(v1, unit_reduction(v1.group, v0.group)) == v0

    def test_euler_relation(self, sym11, e11):
        p, m = 7, 2
        for (d, ell, n) in [(1, 3, 1), (2, 3, 0), (3, 2, 1)]:
            vd = vartheta(sym11, d, n, p, m)
            vdl = vartheta(sym11, d * ell, n, p, m)
            hom = unit_reduction(vdl.group, vd.group)
            assert projection_map(vdl, hom) == euler_factor(
                e11, ell, vd.group, ResidueRing(p, m)
            ) * vd

    def test_stabilization_shape_at_bottom(self, sym11, e11):
        # projection of vartheta from level dp to level d equals the scalar
        # (1 - a^{-1}s_p)(1 - a^{-1}s_p^{-1}) applied to theta_d
        p, m, d = 7, 2, 5
        v1 = vartheta(sym11, d, 1, p, m)
        th = theta(sym11, d, 0, p).reduce_mod(p, m)
        root = unit_root(e11, p, m)
        hom = unit_reduction(v1.group, th.group)
        assert projection_map(v1, hom) == stabilization_scalar(th.group, root) * th


class TestXiTilde:
    def test_degenerate_divisor_lattice(self, sym11):
        assert xi_tilde(sym11, 1, 1, 7, 2) == vartheta(sym11, 1, 1, 7, 2)

    def test_norm_relation(self, sym11, e11):
        p, m = 7, 2
        for (d, ell, n) in [(1, 2, 1), (2, 3, 1), (6, 5, 0)]:
            xd = xi_tilde(sym11, d, n, p, m)
            xdl = xi_tilde(sym11, d * ell, n, p, m)
            hom = unit_reduction(xdl.group, xd.group)
            assert projection_map(xdl, hom) == frobenius_factor(
                e11, ell, xd.group, ResidueRing(p, m)
            ) * xd

    def test_divisor_term_count(self, sym11, monkeypatch):
        # xi is assembled from exactly 2^nu(d) norm-lifted terms
        import kurihara.mazurtate as mt

        calls = []
        original = mt.vartheta

        def counting(*args, **kw):
            calls.append(args[1])
            return original(*args, **kw)

        monkeypatch.setattr(mt, "vartheta", counting)
        mt.xi_tilde(sym11, 6, 0, 7, 1)
        assert sorted(calls) == [1, 2, 3, 6]


class TestStabilizerScalarUnitness:
    def test_unit_in_p_part_ring(self, sym11, e11):
        # the stabilizing scalar is a unit where the derivative machinery
        # lives: Z/p^m over the p-part of the Galois group
        p, m = 7, 2
        root = unit_root(e11, p, m)
        for d in (1, 2, 29, 43):
            G = unit_group(d)
            quotient, qhom = G.p_part_quotient(p)
            ring = root.ring
            ainv = ring.inv(root.alpha)
            sp = qhom(G.sigma(p % d)) if d > 1 else quotient.identity
            one = GroupRingElement.one(quotient, ring)
            scal = (one - GroupRingElement.monomial(quotient, ring, sp, ainv)) * (
                one - GroupRingElement.monomial(quotient, ring, quotient.inv(sp), ainv)
            )
            inv = scal.invert()
            assert scal * inv == one

    def test_full_ring_counterexample(self, e37):
        # In the full group ring Z/p[(Z/d)^*] the scalar need not be a unit:
        # for 37a1, p = 5, alpha = 3 is a fourth root of unity mod 5 and
        # sigma_5 has order 4 mod 13, so a character kills a factor.
        root = unit_root(e37, 5, 1)
        G = unit_group(13)
        scal = stabilization_scalar(G, root)
        with pytest.raises(NotAUnit):
            scal.invert()
