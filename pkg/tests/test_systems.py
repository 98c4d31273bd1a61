import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import automorphism_system, cyclic_system, rotation_system
from ergolab.fixedpoint import FixedReal
from ergolab.systems import (
    AutomorphismAction,
    Character,
    CommutingSystem,
    CyclicFactor,
    Observable,
    RotationAction,
    Sampler,
    ShiftAction,
    StatePoint,
    TorusFactor,
    Transformation,
    char_pullback,
    enumerate_points,
    ergodic_projection,
    integrate,
    observable_product_integral,
    permutation_order,
    permutation_power,
    power_apply,
    transformation_permutation,
    weak_mixing_defect,
)


class TestGroupLaws:
    @given(st.integers(-200, 200), st.integers(-200, 200), st.data())
    def test_power_apply_additivity(self, a, b, data):
        sys_ = cyclic_system(12)
        T = sys_.transformations[0]
        x = StatePoint((data.draw(st.integers(0, 11)),))
        via_sum = power_apply(T, a + b, x)
        via_steps = power_apply(T, b, power_apply(T, a, x))
        assert via_sum == via_steps

    @given(st.integers(-64, 64))
    def test_automorphism_inverse(self, m):
        A = AutomorphismAction(matrix=((2, 1), (1, 1)))
        T = Transformation((A,))
        x = StatePoint(((12345678901234567890, 9876543210987654321),))
        assert power_apply(T, -m, power_apply(T, m, x)) == x

    def test_automorphism_power_matches_repeated_application(self):
        A = AutomorphismAction(matrix=((2, 1), (1, 1)))
        T = Transformation((A,))
        x = StatePoint(((1 << 40, 3 << 20),))
        y = x
        for n in range(1, 30):
            y = power_apply(T, 1, y)
            assert power_apply(T, n, x) == y

    def test_commutation_verified_on_construction(self):
        with pytest.raises(ValueError):
            automorphism_system([((2, 1), (1, 1)), ((1, 1), (1, 2))])

    def test_rotation_commutes_with_itself_squared(self):
        s2 = FixedReal.from_decimal("sqrt2")
        sys_ = CommutingSystem(
            space=(TorusFactor(1),),
            transformations=(
                Transformation((RotationAction((s2,)),)),
                Transformation((RotationAction((s2 + s2,)),)),
            ),
            sampler=Sampler(seed=5, count=64),
        )
        assert len(sys_.transformations) == 2


class TestPermutations:
    def test_shift_permutation_order(self, z12):
        perm = transformation_permutation(z12, z12.transformations[0])
        assert permutation_order(perm) == 12

    @given(st.integers(-100, 100), st.integers(-100, 100))
    def test_permutation_power_additivity(self, a, b):
        sys_ = cyclic_system(8, 3)
        perm = transformation_permutation(sys_, sys_.transformations[0])
        lhs = permutation_power(perm, a + b)
        rhs = permutation_power(perm, a)[permutation_power(perm, b)]
        assert np.array_equal(lhs, rhs)


class TestCharactersAndIntegration:
    def test_pullback_oracle_on_points(self, z12):
        T = z12.transformations[0]
        chi = Character((5,))
        for m in (-7, -1, 0, 1, 3, 11):
            chi2, phase = char_pullback(z12.space, T, m, chi)
            for p in enumerate_points(z12.space):
                moved = power_apply(T, m, p)
                assert abs(
                    chi.eval_point(z12.space, moved)
                    - phase * chi2.eval_point(z12.space, p)
                ) < 1e-12

    def test_automorphism_pullback_transposes_frequency(self):
        sys_ = automorphism_system([((2, 1), (1, 1))])
        T = sys_.transformations[0]
        chi = Character(((1, 0),))
        chi2, phase = char_pullback(sys_.space, T, 1, chi)
        assert phase == 1
        assert chi2.freqs == ((2, 1),)

    def test_nontrivial_character_integrates_to_zero(self, z12):
        f = Observable.character((5,))
        assert integrate(f, z12, method="analytic") == 0
        assert abs(integrate(f, z12, method="exact")) < 1e-12

    def test_trivial_character_integrates_to_coefficient(self, z12):
        f = Observable.character((12,), coeff=0.5)
        assert integrate(f, z12, method="analytic") == 0.5

    def test_product_integral_oracle(self, z12):
        T = z12.transformations[0]
        f = Observable.character((1,))
        g = Observable.character((-1,))
        for n in range(0, 12):
            got = observable_product_integral(z12, [(f, T, 0), (g, T, n)])
            pts = enumerate_points(z12.space)
            direct = sum(
                f.eval_point(z12.space, p)
                * g.eval_point(z12.space, power_apply(T, n, p))
                for p in pts
            ) / len(pts)
            assert abs(got - direct) < 1e-12

    def test_sampled_integral_close_to_haar(self):
        sys_ = rotation_system("sqrt2", seed=2, count=200_000)
        # |e(x)|^2-type real observable: 0.5 + 0.5 cos known mean 0.5
        f = Observable(
            (
                (0.5, Character(((0,),))),
                (0.25, Character(((1,),))),
                (0.25, Character(((-1,),))),
            )
        )
        val = integrate(f, sys_, method="sampled")
        assert abs(val - 0.5) < 5e-3


class TestErgodicStructure:
    def test_projection_is_invariant_mean_on_cyclic(self, z12, chi1_z12):
        proj = ergodic_projection(chi1_z12, z12, z12.transformations[0], 12)
        assert float(np.max(np.abs(proj.values))) < 1e-12

    def test_projection_of_constant_is_constant(self, z12):
        f = Observable.constant(0.25, z12.space)
        proj = ergodic_projection(f, z12, z12.transformations[0], 12)
        assert np.allclose(proj.values, 0.25, atol=1e-14)

    def test_rotation_is_not_weak_mixing(self, z12):
        f = Observable.character((1,))
        g = Observable.character((-1,))
        defect = weak_mixing_defect(z12, z12.transformations[0], f, g, 24)
        assert defect > 0.9

    def test_automorphism_is_weak_mixing_along_characters(self):
        sys_ = automorphism_system([((2, 1), (1, 1))])
        T = sys_.transformations[0]
        f = Observable.character(((1, 0),))
        g = Observable.character(((1, 0),))
        defect = weak_mixing_defect(sys_, T, f, g, 32)
        assert defect < 1e-12
