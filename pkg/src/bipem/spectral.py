"""Periodic-box spectral fields and the Fourier-multiplier toolbox.

Everything lives on a uniform [0, L)^3 grid with an even number of points
per axis.  Real fields are transformed with rfftn; the forward transform
carries a 1/resolution^3 normalization so that the zero coefficient is the
field mean and Parseval reads  mean(f^2) = sum of weighted |fhat|^2.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as _fft

from .errors import NonZeroMean

__all__ = [
    "SpectralLayout",
    "ScalarField",
    "VectorField",
    "derivative",
    "gradient",
    "divergence",
    "curl",
    "fractional_laplacian",
    "solenoidal_project",
    "gauss_electric_field",
    "dealias",
]

#: relative mean tolerance used by negative-order multipliers and the
#: torus Poisson solve
MEAN_TOL = 1e-10


class SpectralLayout:
    """Grid geometry, discrete wavevectors and transform plans for one box.

    Parameters
    ----------
    resolution : int
        Points per axis; must be even and >= 8.
    box_length : float
        Side length L of the periodic box (same for all axes).
    """

    def __init__(self, resolution: int, box_length: float):
        if resolution < 8 or resolution % 2 != 0:
            raise ValueError("resolution must be an even integer >= 8")
        if box_length <= 0:
            raise ValueError("box_length must be positive")
        n = int(resolution)
        self.resolution = n
        self.box_length = float(box_length)
        self.shape = (n, n, n)
        self.rshape = (n, n, n // 2 + 1)
        self.npoints = n ** 3
        self.volume = self.box_length ** 3
        self.cell_volume = self.volume / self.npoints
        self.spacing = self.box_length / n

        # integer mode indices, broadcastable along each axis
        m_full = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        m_half = np.arange(n // 2 + 1, dtype=np.int64)
        self.modes = (
            m_full.reshape(n, 1, 1),
            m_full.reshape(1, n, 1),
            m_half.reshape(1, 1, n // 2 + 1),
        )

        k0 = 2.0 * np.pi / self.box_length
        k_true = tuple(k0 * m.astype(np.float64) for m in self.modes)
        self.k_squared = k_true[0] ** 2 + k_true[1] ** 2 + k_true[2] ** 2
        self.k_abs = np.sqrt(self.k_squared)
        # derivative wavevectors: the Nyquist mode is zeroed so that odd
        # multipliers keep Hermitian symmetry of real-field coefficients
        # (band-limited fields never carry Nyquist content anyway)
        self.k = tuple(np.where(np.abs(m) == n // 2, 0.0, kt)
                       for m, kt in zip(self.modes, k_true))
        # squared magnitude consistent with the derivative wavevectors; used
        # by projections and Poisson solves so they commute exactly with the
        # derivative operators
        self.k2_deriv = self.k[0] ** 2 + self.k[1] ** 2 + self.k[2] ** 2
        self.k_min = k0
        self.k_max = k0 * np.sqrt(3.0) * (n / 2.0)

        # two-thirds rule: drop every mode with any |m_i| > n/3
        cut = n / 3.0
        self.dealias_mask = (
            (np.abs(self.modes[0]) <= cut)
            & (np.abs(self.modes[1]) <= cut)
            & (np.abs(self.modes[2]) <= cut)
        )

        # Parseval weight of each stored rfft coefficient: 2 for modes whose
        # conjugate partner is not stored, 1 for the m3=0 and m3=n/2 planes
        w = np.full(n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self.mode_weight = w.reshape(1, 1, n // 2 + 1)

    # -- transforms --------------------------------------------------------

    def fft(self, a: np.ndarray) -> np.ndarray:
        """Forward real transform, normalized by 1/resolution^3."""
        return _fft.rfftn(a) * (1.0 / self.npoints)

    def ifft(self, fhat: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`fft`; returns a real array."""
        return _fft.irfftn(fhat, s=self.shape) * self.npoints

    def fft_vec(self, a: np.ndarray) -> np.ndarray:
        return np.stack([self.fft(a[i]) for i in range(3)])

    def ifft_vec(self, fhat: np.ndarray) -> np.ndarray:
        return np.stack([self.ifft(fhat[i]) for i in range(3)])

    # -- norms on coefficients ---------------------------------------------

    def spectral_l2(self, fhat: np.ndarray) -> float:
        """Grid L2 norm evaluated from spectral coefficients.

        Accepts a scalar coefficient array or a stacked (c, ...) array; the
        components of a stacked array contribute in quadrature.
        """
        p = self.mode_weight * (fhat.real ** 2 + fhat.imag ** 2)
        return float(np.sqrt(self.volume * p.sum()))

    def mean_is_negligible(self, fhat: np.ndarray) -> bool:
        mean = abs(fhat[(0,) * fhat.ndim]) if fhat.ndim == 3 else None
        if mean is None:
            raise ValueError("expected a scalar coefficient array")
        return mean <= MEAN_TOL * max(self.spectral_l2(fhat), 1e-300)

    def __eq__(self, other):
        return (
            isinstance(other, SpectralLayout)
            and other.resolution == self.resolution
            and other.box_length == self.box_length
        )

    def __repr__(self):
        return f"SpectralLayout({self.resolution}, L={self.box_length:g})"


class _Field:
    """Shared plumbing for scalar and vector fields.

    Physical samples are kept read-only so the cached coefficients can never
    silently go stale; replace them with :meth:`with_data`.
    """

    __slots__ = ("layout", "data", "_hat")

    def __init__(self, layout: SpectralLayout, data: np.ndarray, hat=None):
        data = np.asarray(data, dtype=np.float64)
        if data.shape != self._expected_shape(layout):
            raise ValueError(f"bad field shape {data.shape}")
        data = data.view()
        data.flags.writeable = False
        self.layout = layout
        self.data = data
        self._hat = hat

    def with_data(self, data: np.ndarray):
        return type(self)(self.layout, data)

    def __add__(self, other):
        return type(self)(self.layout, self.data + other.data)

    def __sub__(self, other):
        return type(self)(self.layout, self.data - other.data)

    def __mul__(self, c: float):
        return type(self)(self.layout, self.data * c)

    __rmul__ = __mul__


class ScalarField(_Field):
    @staticmethod
    def _expected_shape(layout):
        return layout.shape

    @classmethod
    def zeros(cls, layout):
        return cls(layout, np.zeros(layout.shape))

    @classmethod
    def from_spectral(cls, layout, fhat):
        # keep the coefficients: they are exact for any multiplier output
        return cls(layout, layout.ifft(fhat), hat=fhat)

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = self.layout.fft(self.data)
        return self._hat


class VectorField(_Field):
    @staticmethod
    def _expected_shape(layout):
        return (3,) + layout.shape

    @classmethod
    def zeros(cls, layout):
        return cls(layout, np.zeros((3,) + layout.shape))

    @classmethod
    def from_spectral(cls, layout, fhat):
        return cls(layout, layout.ifft_vec(fhat), hat=fhat)

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = self.layout.fft_vec(self.data)
        return self._hat

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.layout, self.data[i])


# -- multiplier actions on raw coefficient arrays ---------------------------

def _grad_hat(lay: SpectralLayout, fhat: np.ndarray) -> np.ndarray:
    return np.stack([1j * lay.k[a] * fhat for a in range(3)])

def _div_hat(lay: SpectralLayout, vhat: np.ndarray) -> np.ndarray:
    return 1j * (lay.k[0] * vhat[0] + lay.k[1] * vhat[1] + lay.k[2] * vhat[2])

def _curl_hat(lay: SpectralLayout, vhat: np.ndarray) -> np.ndarray:
    kx, ky, kz = lay.k
    return 1j * np.stack([
        ky * vhat[2] - kz * vhat[1],
        kz * vhat[0] - kx * vhat[2],
        kx * vhat[1] - ky * vhat[0],
    ])

def lam_multiplier(lay: SpectralLayout, s: float) -> np.ndarray:
    """|xi|^s with the zero mode mapped to zero."""
    if s == 0:
        mult = np.ones(lay.rshape)
    else:
        with np.errstate(divide="ignore"):
            mult = np.where(lay.k_abs > 0.0, lay.k_abs, 1.0) ** s
    mult = np.array(mult)
    mult[0, 0, 0] = 0.0
    return mult


# -- field-level operations --------------------------------------------------

def derivative(f: ScalarField, axis: int) -> ScalarField:
    """Spectral partial derivative along one axis."""
    lay = f.layout
    return ScalarField.from_spectral(lay, 1j * lay.k[axis] * f.hat)


def gradient(f: ScalarField) -> VectorField:
    return VectorField.from_spectral(f.layout, _grad_hat(f.layout, f.hat))


def divergence(v: VectorField) -> ScalarField:
    return ScalarField.from_spectral(v.layout, _div_hat(v.layout, v.hat))


def curl(v: VectorField) -> VectorField:
    return VectorField.from_spectral(v.layout, _curl_hat(v.layout, v.hat))


def fractional_laplacian(f: ScalarField, s: float) -> ScalarField:
    """Apply |xi|^s as a Fourier multiplier; the zero mode is dropped.

    For s < 0 the input must have negligible mean, otherwise the operator
    has no consistent meaning on the torus.
    """
    lay = f.layout
    fhat = f.hat
    if s < 0 and not lay.mean_is_negligible(fhat):
        raise NonZeroMean(f"fractional_laplacian(s={s}) needs a zero-mean field")
    return ScalarField.from_spectral(lay, lam_multiplier(lay, s) * fhat)


def solenoidal_project(v: VectorField) -> VectorField:
    """Remove the curl-free (gradient) part; divergence of the result is zero."""
    lay = v.layout
    vhat = v.hat.copy()
    kdotv = lay.k[0] * vhat[0] + lay.k[1] * vhat[1] + lay.k[2] * vhat[2]
    with np.errstate(invalid="ignore", divide="ignore"):
        kdotv = kdotv / np.where(lay.k2_deriv > 0, lay.k2_deriv, 1.0)
    kdotv[0, 0, 0] = 0.0
    for a in range(3):
        vhat[a] -= lay.k[a] * kdotv
    return VectorField.from_spectral(lay, vhat)


def gauss_electric_field(rho: ScalarField) -> VectorField:
    """Curl-free field E with div E = rho, solved spectrally on the torus."""
    lay = rho.layout
    rhat = rho.hat
    if not lay.mean_is_negligible(rhat):
        raise NonZeroMean("gauss_electric_field needs a zero-mean source")
    with np.errstate(invalid="ignore", divide="ignore"):
        phi = rhat / np.where(lay.k2_deriv > 0, lay.k2_deriv, 1.0)
    phi[0, 0, 0] = 0.0
    ehat = np.stack([-1j * lay.k[a] * phi for a in range(3)])
    return VectorField.from_spectral(lay, ehat)


def dealias(f):
    """Zero every coefficient outside the two-thirds mask; idempotent."""
    lay = f.layout
    if isinstance(f, VectorField):
        return VectorField.from_spectral(lay, f.hat * lay.dealias_mask)
    return ScalarField.from_spectral(lay, f.hat * lay.dealias_mask)
