import numpy as np
import pytest

from bipem.errors import NonZeroMean
from bipem.spectral import (
    ScalarField,
    SpectralLayout,
    VectorField,
    curl,
    dealias,
    derivative,
    divergence,
    fractional_laplacian,
    gauss_electric_field,
    gradient,
    solenoidal_project,
)


@pytest.fixture(scope="module")
def lay():
    return SpectralLayout(16, 2.0 * np.pi)


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(42)


def random_scalar(lay, rng, zero_mean=False):
    fhat = lay.fft(rng.standard_normal(lay.shape)) * lay.dealias_mask
    if zero_mean:
        fhat[0, 0, 0] = 0.0
    return ScalarField.from_spectral(lay, fhat)


def random_vector(lay, rng):
    return VectorField(lay, np.stack([random_scalar(lay, rng).data
                                      for _ in range(3)]))


class TestLayout:
    def test_rejects_odd_resolution(self):
        with pytest.raises(ValueError):
            SpectralLayout(15, 1.0)

    def test_rejects_small_resolution(self):
        with pytest.raises(ValueError):
            SpectralLayout(4, 1.0)

    def test_rejects_bad_box(self):
        with pytest.raises(ValueError):
            SpectralLayout(16, 0.0)

    def test_geometry(self, lay):
        assert lay.shape == (16, 16, 16)
        assert lay.rshape == (16, 16, 9)
        assert lay.volume == pytest.approx((2 * np.pi) ** 3)
        assert lay.spacing == pytest.approx(2 * np.pi / 16)
        assert lay.k_min == pytest.approx(1.0)

    def test_equality(self, lay):
        assert lay == SpectralLayout(16, 2.0 * np.pi)
        assert lay != SpectralLayout(32, 2.0 * np.pi)

    def test_zero_coefficient_is_mean(self, lay, rng):
        a = rng.standard_normal(lay.shape)
        assert lay.fft(a)[0, 0, 0] == pytest.approx(a.mean())

    def test_transform_roundtrip(self, lay, rng):
        a = rng.standard_normal(lay.shape)
        assert np.allclose(lay.ifft(lay.fft(a)), a, atol=1e-13)

    def test_parseval(self, lay, rng):
        a = rng.standard_normal(lay.shape)
        grid = np.sqrt((a ** 2).sum() * lay.cell_volume)
        assert lay.spectral_l2(lay.fft(a)) == pytest.approx(grid, rel=1e-13)

    def test_parseval_vector(self, lay, rng):
        v = rng.standard_normal((3,) + lay.shape)
        grid = np.sqrt((v ** 2).sum() * lay.cell_volume)
        assert lay.spectral_l2(lay.fft_vec(v)) == pytest.approx(grid, rel=1e-13)

    def test_dealias_mask_two_thirds(self, lay):
        # n=16: keep |m| <= 5, drop |m| >= 6
        assert lay.dealias_mask[5, 0, 0]
        assert not lay.dealias_mask[6, 0, 0]
        assert not lay.dealias_mask[0, 0, 6]


class TestFields:
    def test_data_read_only(self, lay):
        f = ScalarField.zeros(lay)
        with pytest.raises(ValueError):
            f.data[0, 0, 0] = 1.0

    def test_bad_shape(self, lay):
        with pytest.raises(ValueError):
            ScalarField(lay, np.zeros((8, 8, 8)))
        with pytest.raises(ValueError):
            VectorField(lay, np.zeros(lay.shape))

    def test_arithmetic(self, lay, rng):
        f = random_scalar(lay, rng)
        g = random_scalar(lay, rng)
        assert np.allclose((f + g).data, f.data + g.data)
        assert np.allclose((f - g).data, f.data - g.data)
        assert np.allclose((2.5 * f).data, 2.5 * f.data)

    def test_hat_cached_from_spectral(self, lay, rng):
        fhat = lay.fft(rng.standard_normal(lay.shape)) * lay.dealias_mask
        f = ScalarField.from_spectral(lay, fhat)
        assert np.allclose(f.hat, lay.fft(f.data), atol=1e-15)

    def test_vector_component(self, lay, rng):
        v = random_vector(lay, rng)
        assert np.allclose(v.component(1).data, v.data[1])


class TestOperators:
    def test_derivative_of_sine(self, lay):
        x = np.arange(16) * lay.spacing
        f = ScalarField(lay, np.sin(2 * x)[:, None, None] * np.ones(lay.shape))
        d = derivative(f, 0)
        want = 2 * np.cos(2 * x)[:, None, None] * np.ones(lay.shape)
        assert np.abs(d.data - want).max() < 1e-12

    def test_curl_of_gradient_vanishes(self, lay, rng):
        f = random_scalar(lay, rng)
        assert np.abs(curl(gradient(f)).data).max() < 1e-11

    def test_divergence_of_curl_vanishes(self, lay, rng):
        v = random_vector(lay, rng)
        assert np.abs(divergence(curl(v)).data).max() < 1e-10

    def test_fractional_laplacian_single_mode(self, lay):
        fhat = np.zeros(lay.rshape, complex)
        fhat[2, 3, 1] = 1.0
        f = ScalarField.from_spectral(lay, fhat)
        g = fractional_laplacian(f, 1.5)
        assert np.allclose(g.data, np.sqrt(14.0) ** 1.5 * f.data, rtol=1e-12)

    def test_fractional_laplacian_rejects_mean(self, lay):
        f = ScalarField(lay, np.ones(lay.shape))
        with pytest.raises(NonZeroMean):
            fractional_laplacian(f, -1.0)

    def test_negative_order_inverts_positive(self, lay, rng):
        f = random_scalar(lay, rng, zero_mean=True)
        g = fractional_laplacian(fractional_laplacian(f, 1.5), -1.5)
        assert np.abs(g.data - f.data).max() < 1e-10

    def test_solenoidal_projection(self, lay, rng):
        v = VectorField(lay, rng.standard_normal((3,) + lay.shape))
        w = solenoidal_project(v)
        assert np.abs(divergence(w).data).max() < 1e-11
        # idempotent
        w2 = solenoidal_project(w)
        assert np.abs(w2.data - w.data).max() < 1e-12
        # curl is untouched
        assert np.abs(curl(w).data - curl(v).data).max() < 1e-10

    def test_gauss_electric_field(self, lay, rng):
        rho = random_scalar(lay, rng, zero_mean=True)
        E = gauss_electric_field(rho)
        assert np.abs(divergence(E).data - rho.data).max() < 1e-11
        assert np.abs(curl(E).data).max() < 1e-11

    def test_gauss_rejects_mean(self, lay):
        rho = ScalarField(lay, np.ones(lay.shape))
        with pytest.raises(NonZeroMean):
            gauss_electric_field(rho)

    def test_dealias_idempotent_and_cuts(self, lay, rng):
        f = ScalarField(lay, rng.standard_normal(lay.shape))
        g = dealias(f)
        assert np.abs(g.hat[~np.broadcast_to(lay.dealias_mask, lay.rshape)]).max() == 0.0
        assert np.abs(dealias(g).data - g.data).max() < 1e-14
