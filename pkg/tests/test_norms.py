import numpy as np
import pytest

from bipem.errors import NonZeroMean
from bipem.model import ModelParams
from bipem.norms import (
    CHANNELS,
    LittlewoodPaleyFamily,
    channel_norm,
    cross_functionals,
    default_registry,
    dissipation_DN,
    dissipation_Dk_k2,
    energy_EN,
    energy_Ek_k2,
    homogeneous_sobolev_norm,
    lp_norm,
    velocity_square,
    weighted_energy,
)
from bipem.spectral import ScalarField, SpectralLayout, VectorField

from test_model import compatible_state


@pytest.fixture(scope="module")
def lay():
    return SpectralLayout(16, 2.0 * np.pi)


def single_mode(lay, m=(2, 1, 1), amp=1.0):
    fhat = np.zeros(lay.rshape, complex)
    fhat[m] = amp
    n = lay.resolution
    if m[2] in (0, n // 2) and any(m[:2]):
        # conjugate partner lives in the stored half-spectrum
        fhat[(-m[0]) % n, (-m[1]) % n, m[2]] = np.conj(amp)
    return ScalarField.from_spectral(lay, fhat)


class TestLpNorms:
    def test_constant_field(self, lay):
        f = ScalarField(lay, np.full(lay.shape, 2.0))
        V = lay.volume
        assert lp_norm(f, 2) == pytest.approx(2.0 * V ** 0.5)
        assert lp_norm(f, 1) == pytest.approx(2.0 * V)
        assert lp_norm(f, np.inf) == pytest.approx(2.0)

    def test_vector_magnitude(self, lay):
        v = VectorField(lay, np.ones((3,) + lay.shape))
        assert lp_norm(v, np.inf) == pytest.approx(np.sqrt(3.0))

    def test_l2_matches_spectral(self, lay):
        rng = np.random.default_rng(0)
        f = ScalarField(lay, rng.standard_normal(lay.shape))
        assert lp_norm(f, 2) == pytest.approx(lay.spectral_l2(f.hat), rel=1e-12)

    def test_rejects_bad_p(self, lay):
        with pytest.raises(ValueError):
            lp_norm(ScalarField.zeros(lay), -1)


class TestSobolevNorm:
    def test_single_mode_closed_form(self, lay):
        f = single_mode(lay, (2, 1, 1))
        k2 = 4.0 + 1.0 + 1.0
        want = k2 ** 0.75 * lp_norm(f, 2)
        assert homogeneous_sobolev_norm(f, 1.5) == pytest.approx(want, rel=1e-12)

    def test_negative_order_rejects_mean(self, lay):
        f = ScalarField(lay, np.ones(lay.shape))
        with pytest.raises(NonZeroMean):
            homogeneous_sobolev_norm(f, -1.5)

    def test_order_zero_is_fluctuation_l2(self, lay):
        rng = np.random.default_rng(1)
        f = ScalarField(lay, 1.0 + rng.standard_normal(lay.shape))
        fluct = ScalarField(lay, f.data - f.data.mean())
        assert homogeneous_sobolev_norm(f, 0.0) == pytest.approx(
            lp_norm(fluct, 2), rel=1e-10)


class TestLittlewoodPaley:
    def test_bump_plateau_and_support(self):
        lp = LittlewoodPaleyFamily
        assert lp.bump(np.array([0.5, 1.0]))[0] == 1.0
        assert lp.bump(np.array([1.0]))[0] == 1.0
        assert lp.bump(np.array([2.0, 3.0]))[0] == 0.0
        mid = lp.bump(np.array([1.5]))[0]
        assert 0.0 < mid < 1.0

    def test_partition_of_unity(self, lay):
        fam = LittlewoodPaleyFamily(lay)
        assert fam.partition_defect() < 1e-12

    def test_blocks_reassemble_field(self, lay):
        rng = np.random.default_rng(2)
        fhat = lay.fft(rng.standard_normal(lay.shape))
        fhat[0, 0, 0] = 0.0
        f = ScalarField.from_spectral(lay, fhat)
        fam = LittlewoodPaleyFamily(lay)
        total = sum(fam.block(f, j).data for j in fam.blocks)
        assert np.abs(total - f.data).max() < 1e-12

    def test_besov_single_mode(self, lay):
        # one mode lies in at most two blocks; the sup picks the largest
        f = single_mode(lay, (0, 0, 2))
        fam = LittlewoodPaleyFamily(lay)
        got = fam.besov_norm(f, 1.5)
        l2 = lp_norm(f, 2)
        best = max(2.0 ** (-1.5 * j) * fam.symbol(j)[0, 0, 2] * l2
                   for j in fam.blocks)
        assert got == pytest.approx(best, rel=1e-12)

    def test_besov_rejects_mean(self, lay):
        fam = LittlewoodPaleyFamily(lay)
        with pytest.raises(NonZeroMean):
            fam.besov_norm(ScalarField(lay, np.ones(lay.shape)), 1.5)


class TestEnergyFunctionals:
    def test_single_mode_energy(self, lay):
        from bipem.model import State
        f = single_mode(lay, (2, 1, 1))
        U = State(f, ScalarField.zeros(lay), VectorField.zeros(lay),
                  VectorField.zeros(lay), VectorField.zeros(lay),
                  VectorField.zeros(lay))
        l2sq = lp_norm(f, 2) ** 2
        k2 = 6.0
        want = l2sq * (1 + k2 + k2 ** 2 + k2 ** 3)
        assert energy_EN(U, 3) == pytest.approx(want, rel=1e-12)
        # n1 is degenerate: D_3 misses its l=0 term
        assert dissipation_DN(U, 3) == pytest.approx(
            l2sq * (k2 + k2 ** 2 + k2 ** 3), rel=1e-12)

    def test_window_energy_single_mode(self, lay):
        from bipem.model import State
        f = single_mode(lay, (2, 1, 1))
        U = State(ScalarField.zeros(lay), f, VectorField.zeros(lay),
                  VectorField.zeros(lay), VectorField.zeros(lay),
                  VectorField.zeros(lay))
        l2sq = lp_norm(f, 2) ** 2
        k2 = 6.0
        assert energy_Ek_k2(U, 1) == pytest.approx(
            l2sq * (k2 + k2 ** 2 + k2 ** 3), rel=1e-12)
        # n2 is fully dissipated in the windowed functional
        assert dissipation_Dk_k2(U, 1) == pytest.approx(
            l2sq * (k2 + k2 ** 2 + k2 ** 3), rel=1e-12)

    def test_em_degeneracy_in_windows(self, lay):
        from bipem.model import State
        f = single_mode(lay, (2, 1, 1))
        B = VectorField(lay, np.stack([f.data, np.zeros(lay.shape),
                                       np.zeros(lay.shape)]))
        U = State(ScalarField.zeros(lay), ScalarField.zeros(lay),
                  VectorField.zeros(lay), VectorField.zeros(lay),
                  VectorField.zeros(lay), B)
        l2sq = lp_norm(f, 2) ** 2
        k2 = 6.0
        # B contributes only at l = k+1
        assert dissipation_Dk_k2(U, 0) == pytest.approx(l2sq * k2, rel=1e-12)

    def test_requires_n_at_least_3(self, lay):
        from bipem.model import State
        U = State.zeros(lay)
        with pytest.raises(ValueError):
            energy_EN(U, 2)
        with pytest.raises(ValueError):
            dissipation_DN(U, 2)

    def test_weighted_energy_weights(self, lay):
        from bipem.model import State
        f = single_mode(lay, (1, 0, 0))
        E = VectorField(lay, np.stack([f.data, np.zeros(lay.shape),
                                       np.zeros(lay.shape)]))
        l2sq = lp_norm(f, 2) ** 2
        U1 = State(f, ScalarField.zeros(lay), VectorField.zeros(lay),
                   VectorField.zeros(lay), VectorField.zeros(lay),
                   VectorField.zeros(lay))
        U2 = State(ScalarField.zeros(lay), ScalarField.zeros(lay),
                   VectorField.zeros(lay), VectorField.zeros(lay), E,
                   VectorField.zeros(lay))
        assert weighted_energy(U1) == pytest.approx(0.5 * l2sq, rel=1e-12)
        assert weighted_energy(U2) == pytest.approx(l2sq, rel=1e-12)

    def test_velocity_square(self, lay):
        U = compatible_state(lay, seed=8)
        want = lp_norm(U.u1, 2) ** 2 + lp_norm(U.u2, 2) ** 2
        assert velocity_square(U) == pytest.approx(want, rel=1e-12)


class TestCrossFunctionals:
    def test_values_finite_and_signs(self, lay):
        U = compatible_state(lay, seed=9)
        out = cross_functionals(U, 0)
        assert np.isfinite(out["interactive"])
        assert out["Fk"] >= 0.0
        assert out["Gk"] >= 0.0

    def test_fk_closed_form(self, lay):
        U = compatible_state(lay, seed=9)
        out = cross_functionals(U, 0)
        want = (lp_norm(U.u1, 2) ** 2 + lp_norm(U.u2, 2) ** 2
                + lp_norm(U.E, 2) ** 2)
        assert out["Fk"] == pytest.approx(want, rel=1e-12)

    def test_rejects_bad_eta(self, lay):
        U = compatible_state(lay, seed=9)
        with pytest.raises(ValueError):
            cross_functionals(U, 0, eta=0.0)


class TestChannelsAndRegistry:
    def test_channel_map_complete(self):
        assert set(CHANNELS) == {"U", "n1", "n2", "u", "u1", "u2", "E", "B"}

    def test_channel_norm_quadrature(self, lay):
        U = compatible_state(lay, seed=10)
        want = np.sqrt(lp_norm(U.u1, 2) ** 2 + lp_norm(U.u2, 2) ** 2)
        assert channel_norm(U, "u", 0) == pytest.approx(want, rel=1e-10)

    def test_registry_samples_everything(self, lay):
        p = ModelParams(gamma=3.0)
        reg = default_registry(p, lay)
        U = compatible_state(lay, seed=10, params=p)
        sample = reg.sample(0.0, U)
        assert set(sample.values) == set(reg.names())
        for name, v in sample.values.items():
            assert np.isfinite(v), name
            if not reg.is_signed(name):
                assert v >= 0.0, name

    def test_registry_descriptions_nonempty(self, lay):
        reg = default_registry(ModelParams(), lay)
        for name in reg.names():
            assert reg.describe(name)
