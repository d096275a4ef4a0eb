import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_unitary
from spdcavity.bogoliubov import (
    INPUT_BASIS,
    BasisMismatchError,
    BogoliubovMap,
    ModeBasis,
    OperatorExpansion,
    apply_map,
    commutator,
    compose,
    dagger,
    vacuum_cross_moment,
    vacuum_photon_number,
)
from spdcavity.elements import crystal_relations, rotator_relations

a_in = INPUT_BASIS.mode("a_in")
b_in = INPUT_BASIS.mode("b_in")


def expansion(u, v):
    return OperatorExpansion(INPUT_BASIS, u, v)


def e(k, n=4):
    x = np.zeros(n, complex)
    x[k] = 1
    return x


def random_canonical(seed, ports=2, max_squeeze=2.0):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0, max_squeeze, ports)
    squeeze = BogoliubovMap(np.diag(np.cosh(r)), np.diag(np.sinh(r)))
    W = BogoliubovMap.passive(random_unitary(rng, ports))
    X = BogoliubovMap.passive(random_unitary(rng, ports))
    return compose(W, compose(squeeze, X))


def random_expansion(rng):
    return expansion(
        rng.normal(size=4) + 1j * rng.normal(size=4), rng.normal(size=4) + 1j * rng.normal(size=4)
    )


class TestModeBasis:
    def test_labels_unique(self):
        with pytest.raises(ValueError):
            ModeBasis(("a", "a"))

    def test_non_empty(self):
        with pytest.raises(ValueError):
            ModeBasis(())

    def test_input_basis(self):
        assert INPUT_BASIS.labels == ("a_in", "b_in", "f_L_in", "f_R_in")
        assert len(INPUT_BASIS) == 4


class TestExpansion:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            expansion([np.nan, 0, 0, 0], np.zeros(4))

    def test_rejects_wrong_length(self):
        with pytest.raises(BasisMismatchError):
            expansion(np.zeros(3), np.zeros(4))

    def test_immutable(self):
        with pytest.raises(ValueError):
            a_in.u[0] = 2.0

    def test_dagger_involution_exact(self):
        o = random_expansion(np.random.default_rng(0))
        oo = dagger(dagger(o))
        assert np.array_equal(oo.u, o.u) and np.array_equal(oo.v, o.v)


class TestCommutator:
    def test_canonical(self):
        assert commutator(a_in, a_in) == 1

    def test_independent_modes(self):
        assert commutator(a_in, b_in) == 0

    def test_creation_sign(self):
        o = expansion(np.zeros(4), e(0))
        assert commutator(o, o) == -1

    def test_basis_mismatch(self):
        other = ModeBasis(("x", "y", "z", "w")).mode("x")
        with pytest.raises(BasisMismatchError):
            commutator(a_in, other)


class TestVacuumMoments:
    def test_annihilator(self):
        assert vacuum_photon_number(a_in) == 0

    def test_sum_of_squares(self):
        assert vacuum_photon_number(expansion(np.zeros(4), [1, 1j, 0, 0])) == pytest.approx(2.0)

    def test_cross_moment_orthogonal(self):
        assert vacuum_cross_moment(expansion(np.zeros(4), e(0)), expansion(np.zeros(4), e(1))) == 0

    def test_cross_moment_inner_product(self):
        o1 = expansion(np.zeros(4), [1, 0, 0, 0])
        o2 = expansion(np.zeros(4), [1j, 0, 0, 0])
        assert vacuum_cross_moment(o1, o2) == 1j

    @given(st.integers(0, 2**32 - 1))
    def test_diagonal_cross_moment(self, seed):
        o = random_expansion(np.random.default_rng(seed))
        m = vacuum_cross_moment(o, o)
        assert m.imag == 0
        assert m.real == pytest.approx(vacuum_photon_number(o), rel=1e-15)
        assert vacuum_photon_number(o) >= 0


class TestApplyMap:
    def test_identity(self):
        ops = [a_in, b_in]
        out = apply_map(BogoliubovMap.identity(2), ops)
        assert all(x.allclose(y) for x, y in zip(out, ops))

    def test_crystal(self):
        G = 1.3
        out = apply_map(crystal_relations(G), [a_in, b_in])
        assert np.allclose(out[0].u, [G, 0, 0, 0], atol=1e-15)
        assert np.allclose(out[0].v, [0, np.sqrt(G * G - 1), 0, 0], atol=1e-15)

    def test_port_mismatch(self):
        with pytest.raises(BasisMismatchError):
            apply_map(BogoliubovMap.identity(2), [a_in])

    @pytest.mark.parametrize("seed", range(5))
    def test_inverse_matches_linear_solve(self, seed):
        m = random_canonical(seed)
        # oracle: invert the doubled linear relation directly
        D = np.linalg.solve(m.doubled(), np.eye(4))
        oracle = BogoliubovMap(D[:2, :2], D[:2, 2:])
        assert m.inverse().allclose(oracle, atol=1e-12)
        ops = [a_in, b_in]
        back = apply_map(m.inverse(), apply_map(m, ops))
        assert all(x.allclose(y, atol=1e-12) for x, y in zip(back, ops))

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_preserves_commutators(self, seed):
        rng = np.random.default_rng(seed)
        m = random_canonical(seed, ports=4)
        ops = [INPUT_BASIS.mode(label) for label in INPUT_BASIS.labels]
        ops = apply_map(BogoliubovMap.passive(random_unitary(rng, 4)), ops)
        out = apply_map(m, ops)
        for i in range(4):
            for j in range(4):
                assert abs(commutator(out[i], out[j]) - (i == j)) < 1e-12
                assert abs(commutator(out[i], out[j].dagger())) < 1e-12


class TestCompose:
    def test_identity_left(self):
        m = random_canonical(1)
        assert compose(BogoliubovMap.identity(2), m).allclose(m)

    def test_rotation_group(self):
        m = compose(rotator_relations(0.4), rotator_relations(0.7))
        assert m.allclose(rotator_relations(1.1))

    def test_crystal_gains_add_rapidities(self):
        G1, G2 = 1.2, 1.05
        m = compose(crystal_relations(G2), crystal_relations(G1))
        G = np.cosh(np.arccosh(G1) + np.arccosh(G2))
        assert m.allclose(crystal_relations(G), atol=1e-12)

    def test_apply_consistency(self):
        m1, m2 = random_canonical(2), random_canonical(3)
        ops = [a_in + 0.3 * b_in.dagger(), b_in]
        seq = apply_map(m2, apply_map(m1, ops))
        once = apply_map(compose(m2, m1), ops)
        assert all(x.allclose(y, atol=1e-12) for x, y in zip(seq, once))

    def test_dimension_mismatch(self):
        with pytest.raises(BasisMismatchError):
            compose(BogoliubovMap.identity(2), BogoliubovMap.identity(3))

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_associative(self, seed):
        m1, m2, m3 = (random_canonical(seed + k) for k in range(3))
        for m in (m1, m2, m3):
            assert m.is_canonical()
            assert np.max(np.abs(m.U)) <= 10 and np.max(np.abs(m.V)) <= 10
        lhs = compose(m3, compose(m2, m1))
        rhs = compose(compose(m3, m2), m1)
        assert lhs.allclose(rhs, atol=1e-12)
