import numpy as np
import pytest

from bipem.errors import (
    AmplitudeTooLarge,
    ExponentOutOfRange,
    IncompatibleExponents,
)
from bipem.inequalities import (
    FieldEnsemble,
    check_besov_embedding,
    check_commutator,
    check_composition,
    check_gagliardo_nirenberg,
    check_interpolation,
    check_riesz_embedding,
)
from bipem.model import ModelParams
from bipem.spectral import ScalarField, SpectralLayout


@pytest.fixture(scope="module")
def lay():
    return SpectralLayout(16, 2.0 * np.pi)


def single_mode(lay, m=(2, 1, 1)):
    fhat = np.zeros(lay.rshape, complex)
    fhat[m] = 1.0
    return ScalarField.from_spectral(lay, fhat)


def random_field(lay, seed=0, slope=1.0):
    return next(iter(FieldEnsemble(lay, seed=seed, count=1, slope=slope).fields()))


class TestEnsemble:
    def test_reproducible(self, lay):
        a = [f.data for f in FieldEnsemble(lay, seed=4, count=3).fields()]
        b = [f.data for f in FieldEnsemble(lay, seed=4, count=3).fields()]
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_band_limited_zero_mean_unit_norm(self, lay):
        for f in FieldEnsemble(lay, seed=1, count=2, slope=2.0).fields():
            outside = ~np.broadcast_to(lay.dealias_mask, lay.rshape)
            assert np.abs(f.hat[outside]).max() < 1e-16
            assert abs(f.hat[0, 0, 0]) < 1e-16
            assert abs(f.data.mean()) < 1e-14
            from bipem.norms import lp_norm
            assert lp_norm(f, 2) == pytest.approx(1.0, rel=1e-12)


class TestGagliardoNirenberg:
    def test_single_mode_equality(self, lay):
        # p=2, alpha=1, m=0, ell=2 gives theta=1/2 and exact equality
        f = single_mode(lay)
        assert check_gagliardo_nirenberg(f, 2, 1.0, 0.0, 2.0) == pytest.approx(
            1.0, abs=1e-12)

    def test_incompatible_raises(self, lay):
        f = single_mode(lay)
        with pytest.raises(IncompatibleExponents):
            check_gagliardo_nirenberg(f, 2, 3.0, 0.0, 1.0)

    def test_endpoint_excluded_for_sup_norm(self, lay):
        # p = inf forces theta strictly interior; this combination puts
        # theta on the boundary
        f = single_mode(lay)
        with pytest.raises(IncompatibleExponents):
            check_gagliardo_nirenberg(f, np.inf, 0.0, 1.5, 3.0)

    def test_ratio_bounded_on_ensemble(self, lay):
        vals = [check_gagliardo_nirenberg(f, 6, 0.0, 0.0, 1.0)
                for f in FieldEnsemble(lay, seed=2, count=8).fields()]
        assert max(vals) < 2.0

    def test_scale_invariance(self, lay):
        f = random_field(lay, seed=3)
        a = check_gagliardo_nirenberg(f, 6, 0.0, 0.0, 1.0)
        b = check_gagliardo_nirenberg(f.with_data(17.0 * f.data), 6, 0.0, 0.0, 1.0)
        assert a == pytest.approx(b, rel=1e-12)


class TestComposition:
    def test_zero_field_convention(self, lay):
        z = ScalarField.zeros(lay)
        assert check_composition(z, 0, ModelParams(gamma=3.0)) == (0.0, 0.0)

    def test_amplitude_guard(self, lay):
        big = ScalarField(lay, np.full(lay.shape, 0.5))
        with pytest.raises(AmplitudeTooLarge):
            check_composition(big, 0, ModelParams(gamma=3.0))

    def test_l2_ratio_near_one_for_small_fields(self, lay):
        # f(n) = n + O(n^2) so the order-0 L2 ratio is 1 + O(amplitude)
        from bipem.harness import _h3_scalar
        f = random_field(lay, seed=5)
        n = f.with_data(1e-3 / _h3_scalar(f) * f.data)
        _, ratio_l2 = check_composition(n, 0, ModelParams(gamma=2.0))
        assert ratio_l2 == pytest.approx(1.0, abs=0.05)

    def test_first_order_dominance_window(self, lay):
        # within the small-amplitude window the composition is within
        # 20 percent of the identity in L2
        from bipem.harness import _h3_scalar
        f = random_field(lay, seed=6)
        n = f.with_data(0.08 / _h3_scalar(f) * f.data)
        _, ratio_l2 = check_composition(n, 0, ModelParams(gamma=3.0))
        assert 0.8 <= ratio_l2 <= 1.2


class TestCommutator:
    def test_constant_g_commutes(self, lay):
        g = ScalarField(lay, np.full(lay.shape, 3.0))
        h = random_field(lay, seed=7)
        assert check_commutator(g, h, 2) == 0.0

    def test_requires_k_at_least_one(self, lay):
        f = random_field(lay, seed=7)
        with pytest.raises(ValueError):
            check_commutator(f, f, 0)

    def test_ratio_bounded(self, lay):
        g = random_field(lay, seed=8)
        h = random_field(lay, seed=9)
        for k in (1, 2, 3):
            assert 0.0 < check_commutator(g, h, k) < 5.0

    def test_scale_invariance(self, lay):
        g, h = random_field(lay, seed=8), random_field(lay, seed=9)
        a = check_commutator(g, h, 2)
        b = check_commutator(g.with_data(5 * g.data), h.with_data(0.1 * h.data), 2)
        assert a == pytest.approx(b, rel=1e-12)


class TestEmbeddings:
    def test_riesz_p2_is_identity(self, lay):
        f = random_field(lay, seed=10)
        assert check_riesz_embedding(f, 2.0) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.5])
    def test_riesz_range(self, lay, p):
        with pytest.raises(ExponentOutOfRange):
            check_riesz_embedding(random_field(lay, seed=1), p)

    @pytest.mark.parametrize("p", [0.9, 2.0, 3.0])
    def test_besov_range(self, lay, p):
        with pytest.raises(ExponentOutOfRange):
            check_besov_embedding(random_field(lay, seed=1), p)

    def test_besov_endpoint_finite(self, lay):
        # p = 1 (order 3/2) is admissible for the Besov variant only
        f = random_field(lay, seed=11)
        assert np.isfinite(check_besov_embedding(f, 1.0))

    def test_single_mode_closed_form(self, lay):
        # |f| = |cos| pattern: both sides computable by hand at p = 3/2
        f = single_mode(lay)
        s = 3.0 * (1.0 / 1.5 - 0.5)
        from bipem.norms import homogeneous_sobolev_norm, lp_norm
        want = homogeneous_sobolev_norm(f, -s) / lp_norm(f, 1.5)
        assert check_riesz_embedding(f, 1.5) == pytest.approx(want, rel=1e-12)


class TestInterpolation:
    def test_single_mode_equality_both_variants(self, lay):
        f = single_mode(lay)
        assert check_interpolation(f, 2, 1.5, "sobolev") == pytest.approx(
            1.0, abs=1e-12)
        assert check_interpolation(f, 2, 1.5, "besov") == pytest.approx(
            1.0, abs=0.5)  # besov constant differs from 1 but stays O(1)

    def test_sobolev_exact_constant(self, lay):
        worst = 0.0
        for slope in (0.0, 1.0, 2.0):
            for f in FieldEnsemble(lay, seed=12, count=12, slope=slope).fields():
                for ell, s in ((0, 1.5), (1, 1.5), (2, 0.5)):
                    worst = max(worst, check_interpolation(f, ell, s, "sobolev"))
        assert worst <= 1.0 + 1e-10

    def test_besov_bounded(self, lay):
        vals = [check_interpolation(f, 1, 1.5, "besov")
                for f in FieldEnsemble(lay, seed=13, count=8).fields()]
        assert max(vals) < 3.0

    def test_input_validation(self, lay):
        f = single_mode(lay)
        with pytest.raises(ValueError):
            check_interpolation(f, 1, 1.5, "banach")
        with pytest.raises(ValueError):
            check_interpolation(f, 1, 0.0, "besov")
        with pytest.raises(ValueError):
            check_interpolation(f, 1, -1.0, "sobolev")

    def test_scale_invariance(self, lay):
        f = random_field(lay, seed=14)
        a = check_interpolation(f, 1, 1.5, "sobolev")
        b = check_interpolation(f.with_data(1e3 * f.data), 1, 1.5, "sobolev")
        assert a == pytest.approx(b, rel=1e-12)
