import cmath

import numpy as np
import pytest

from conftest import cyclic_system, poly, rotation_system
from ergolab.correlate import (
    CorrelationSpec,
    SequenceSample,
    WindowFamily,
    cauchy_report,
    corr_seq,
    corr_seq_bruteforce,
    multi_average,
    uniform_seminorm,
)
from ergolab.fixedpoint import FixedReal
from ergolab.poly import eval_floor
from ergolab.systems import Observable


def z12_spec(iterates, freqs):
    sys_ = cyclic_system(12)
    obs = tuple(Observable.character((k,)) for k in freqs)
    return CorrelationSpec(system=sys_, iterates=iterates, observables=obs)


class TestWindowFamily:
    def test_doubling_lengths(self):
        fam = WindowFamily.doubling(16, 4)
        assert fam.lengths() == [16, 32, 64, 128]

    def test_rejects_too_few_windows(self):
        with pytest.raises(ValueError):
            WindowFamily(((0, 4), (0, 8)))

    def test_rejects_nonincreasing_lengths(self):
        with pytest.raises(ValueError):
            WindowFamily(((0, 8), (0, 8), (0, 16)))


class TestCorrSeq:
    def test_single_character_closed_form(self):
        # a(n) = avg_x e((x + [sqrt2 n])/12) * e(-x/12) = e([sqrt2 n]/12)...
        # with f0 = chi_1 and f1 = chi_{-1}: a(n) = e(-[sqrt2 n]/12).
        p = poly(0, "sqrt2")
        spec = z12_spec(((p,),), (1, -1))
        sample = corr_seq(spec, (1, 101))
        for i, n in enumerate(range(1, 101)):
            e = eval_floor(p, n)
            expect = cmath.exp(-2j * cmath.pi * e / 12)
            assert abs(sample.values[i] - expect) < 1e-12

    def test_matches_bruteforce_oracle(self):
        spec = z12_spec(
            ((poly(0, "sqrt2"), poly(0, 0, FixedReal.from_decimal("1/2"))),),
            (1, 1, -2),
        )
        fast = corr_seq(spec, (1, 41))
        slow = corr_seq_bruteforce(spec, (1, 41))
        assert float(np.max(np.abs(fast.values - slow.values))) < 1e-12

    def test_rotation_closed_form(self):
        # On the sqrt3-rotation, f0 = e(x), f1 = e(-x):
        # a(n) = e(-[sqrt2 n] sqrt3) exactly, for every sample grid.
        sys_ = rotation_system("sqrt3", seed=9, count=256)
        p = poly(0, "sqrt2")
        s3 = FixedReal.from_decimal("sqrt3")
        spec = CorrelationSpec(
            system=sys_,
            iterates=((p,),),
            observables=(
                Observable.character(((1,),)),
                Observable.character(((-1,),)),
            ),
        )
        sample = corr_seq(spec, (1, 101))
        mask = (1 << 64) - 1
        for i, n in enumerate(range(1, 101)):
            e = eval_floor(p, n)
            phase = (e * (s3.raw64 & mask)) & mask
            expect = cmath.exp(-2j * cmath.pi * phase / (1 << 64))
            assert abs(sample.values[i] - expect) < 1e-10

    def test_shifted_spec_shifts_the_sequence(self):
        p = poly(0, "sqrt2")
        spec = z12_spec(((p,),), (1, -1))
        plain = corr_seq(spec, (4, 24))
        shifted = corr_seq(spec.shifted(3), (1, 21))
        assert np.allclose(plain.values, shifted.values, atol=1e-14)

    def test_needs_f0(self):
        sys_ = cyclic_system(12)
        spec = CorrelationSpec(
            system=sys_,
            iterates=((poly(0, 1),),),
            observables=(None, Observable.character((1,))),
        )
        with pytest.raises(ValueError):
            corr_seq(spec, (1, 5))


class TestAverages:
    def test_constant_family_average_is_product(self, z12):
        # With p = 0 the average is just f1 itself.
        f1 = Observable.character((1,))
        spec = CorrelationSpec(
            system=z12, iterates=((poly(0),),), observables=(None, f1)
        )
        fn, l2 = multi_average(spec, (1, 33))
        assert abs(l2 - 1.0) < 1e-12

    def test_full_period_average_kills_character(self, z12):
        f1 = Observable.character((1,))
        spec = CorrelationSpec(
            system=z12, iterates=((poly(0, 1),),), observables=(None, f1)
        )
        fn, l2 = multi_average(spec, (0, 12))
        assert l2 < 1e-14

    def test_cauchy_differences_vanish_on_full_periods(self, z12):
        f1 = Observable.character((1,))
        spec = CorrelationSpec(
            system=z12, iterates=((poly(0, 1),),), observables=(None, f1)
        )
        fam = WindowFamily.doubling(24, 4)
        rep = cauchy_report(spec, fam)
        assert max(rep.differences) < 1e-14
        assert rep.tail_difference() < 1e-14

    def test_cauchy_needs_four_windows(self, z12):
        f1 = Observable.character((1,))
        spec = CorrelationSpec(
            system=z12, iterates=((poly(0, 1),),), observables=(None, f1)
        )
        with pytest.raises(ValueError):
            cauchy_report(spec, WindowFamily.doubling(24, 3))


class TestUniformSeminorm:
    def test_constant_sequence(self):
        sample = SequenceSample(
            window=(0, 256), values=np.full(256, 0.5 + 0j)
        )
        val = uniform_seminorm(sample, [64, 128])
        assert abs(val - 0.5) < 1e-12

    def test_homogeneity(self):
        rng = np.random.default_rng(4)
        vals = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        vals /= np.max(np.abs(vals))
        s1 = uniform_seminorm(SequenceSample((0, 256), vals), [64, 128])
        s2 = uniform_seminorm(SequenceSample((0, 256), 0.5 * vals), [64, 128])
        assert abs(s2 - 0.5 * s1) < 1e-12

    def test_shift_max_dominates_plain_window(self):
        rng = np.random.default_rng(5)
        vals = np.concatenate(
            [np.zeros(128), np.exp(2j * np.pi * rng.random(128))]
        )
        sample = SequenceSample((0, 256), vals)
        plain = uniform_seminorm(sample, [128], shift_fractions=(0.0,))
        with_shifts = uniform_seminorm(
            sample, [128], shift_fractions=(0.0, 0.5, 1.0)
        )
        assert with_shifts >= plain
        assert abs(with_shifts - 1.0) < 1e-12
