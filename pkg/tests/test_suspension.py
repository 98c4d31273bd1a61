from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cyclic_system, poly
from ergolab.correlate import CorrelationSpec
from ergolab.fixedpoint import FixedReal, ZERO
from ergolab.suspension import (
    SuspensionFlow,
    SuspensionPoint,
    floor_scaling_check,
    flow_apply,
    flow_power_identity_check,
    scaling_constant,
    seminorm_transfer_check,
    suspension_permutation,
    transfer_constants,
    weak_anti_uniform_bound,
)
from ergolab.systems import Observable, StatePoint

heights = st.fractions(min_value=0, max_value=Fraction(255, 256), max_denominator=256)
times = st.fractions(min_value=-4, max_value=4, max_denominator=64)


def _flow_and_point(q=12, height=ZERO, base=0):
    sys_ = cyclic_system(q)
    flow = SuspensionFlow(sys_, m=1)
    pt = SuspensionPoint(StatePoint((base,)), ((FixedReal.coerce(height),),))
    return flow, pt


class TestFlowLaws:
    @given(times, times, heights, st.integers(0, 11))
    @settings(max_examples=150)
    def test_flow_additivity(self, s, t, b, base):
        # T_{s+t} == T_s after T_t, exactly.
        flow, pt = _flow_and_point(height=Fraction(b), base=base)
        grid_s = ((FixedReal.coerce(s),),)
        grid_t = ((FixedReal.coerce(t),),)
        grid_st = ((FixedReal.coerce(s) + FixedReal.coerce(t),),)
        assert flow_apply(flow, grid_st, pt) == flow_apply(
            flow, grid_s, flow_apply(flow, grid_t, pt)
        )

    def test_power_closed_form_long_run(self):
        flow, pt = _flow_and_point(height=Fraction(3, 8))
        rep = flow_power_identity_check(
            flow, FixedReal.from_decimal("sqrt2") - 1, pt, 2000
        )
        assert rep.all_exact

    def test_power_closed_form_with_observable(self):
        flow, pt = _flow_and_point()
        f = Observable.character((1,))
        rep = flow_power_identity_check(
            flow, FixedReal.coerce(Fraction(2, 3)), pt, 500, f=f
        )
        assert rep.all_exact


class TestFloorScaling:
    def test_constant_array_hits_the_constant(self):
        a = np.ones(64)
        rep = floor_scaling_check(a, Fraction(1, 1), k=1)
        assert rep.margin >= -1e-12
        assert rep.constant == 2.0  # s=1: s(floor(1/s)+1) = 2

    def test_scaling_constant_values(self):
        assert scaling_constant(1, FixedReal.coerce(Fraction(1, 2))) == 1.5
        assert scaling_constant(2, FixedReal.coerce(Fraction(1, 2))) == 2.25
        assert scaling_constant(1, FixedReal.coerce(1)) == 2.0

    def test_random_nonnegative_arrays_one_dim(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            a = rng.random(96)
            s = Fraction(int(rng.integers(1, 4)), 4)
            rep = floor_scaling_check(a, s, k=1)
            assert rep.margin >= -1e-9

    def test_two_dimensional(self):
        rng = np.random.default_rng(22)
        a = rng.random((48, 48))
        rep = floor_scaling_check(a, Fraction(1, 2), k=2)
        assert rep.margin >= -1e-9


class TestSeminormTransfer:
    def test_constants(self):
        assert transfer_constants(1, 1) == (4, 8.0)
        assert transfer_constants(2, 1) == (81, 324.0)
        assert transfer_constants(1, Fraction(1, 2)) == (4, 6.0)

    def test_rational_time_permutation_is_a_permutation(self, z12):
        T = z12.transformations[0]
        perm, Q = suspension_permutation(z12, T, Fraction(1, 2))
        assert Q == 12
        assert sorted(perm.tolist()) == list(range(24))

    def test_rejects_nondyadic_time(self, z12):
        f = Observable.character((1,))
        with pytest.raises(ValueError):
            seminorm_transfer_check(
                f, z12, z12.transformations[0], Fraction(1, 3), 1
            )

    @pytest.mark.parametrize("s", [Fraction(1), Fraction(1, 2), Fraction(1, 4)])
    @pytest.mark.parametrize("k", [1, 2])
    def test_transfer_bound_on_character(self, z12, s, k):
        f = Observable.character((1,))
        rep = seminorm_transfer_check(f, z12, z12.transformations[0], s, k)
        assert rep.margin >= -1e-6


class TestWeakAntiUniform:
    def _spec(self):
        sys_ = cyclic_system(12)
        return CorrelationSpec(
            system=sys_,
            iterates=((poly(0, "sqrt2"),),),
            observables=(
                Observable.character((1,)),
                Observable.character((-1,)),
            ),
        )

    def test_bound_holds_for_bounded_weights(self):
        spec = self._spec()
        rng = np.random.default_rng(31)
        b = np.exp(2j * np.pi * rng.random(128))
        for delta in (Fraction(1, 5), Fraction(1, 10)):
            rep = weak_anti_uniform_bound(spec, b, delta, (1, 129))
            assert rep.margin >= -1e-9
            assert rep.C_delta == float(1 / Fraction(delta)) ** 1

    def test_c_delta_strictly_decreasing_in_delta(self):
        spec = self._spec()
        b = np.ones(256, dtype=complex)
        cs = []
        for delta in (Fraction(1, 5), Fraction(1, 10), Fraction(1, 20)):
            rep = weak_anti_uniform_bound(spec, b, delta, (1, 257))
            cs.append(rep.c_delta)
        assert cs[0] > cs[1] > cs[2]
