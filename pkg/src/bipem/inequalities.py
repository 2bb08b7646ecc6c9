"""Numerical property checks for the harmonic-analysis inequalities.

Each checker returns the empirical ratio of the inequality's left side to
its right side for one field (or field pair).  Checkers never pass or fail
by themselves: the unquantified constants of the underlying estimates mean
only boundedness and refinement stability are assertable, and those
thresholds live in the sweep driver.

All ratios are scale invariant (both sides are homogeneous of the same
degree) and a vanishing right side with vanishing left side is reported as
ratio zero by convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmplitudeTooLarge, ExponentOutOfRange, IncompatibleExponents
from .model import ModelParams, f_of_n
from .norms import LittlewoodPaleyFamily, homogeneous_sobolev_norm, lp_norm
from .spectral import ScalarField, SpectralLayout, fractional_laplacian, gradient

__all__ = [
    "FieldEnsemble",
    "check_gagliardo_nirenberg",
    "check_composition",
    "check_commutator",
    "check_riesz_embedding",
    "check_besov_embedding",
    "check_interpolation",
]


@dataclass(frozen=True)
class FieldEnsemble:
    """Reproducible band-limited random scalar fields.

    Coefficients are complex Gaussian with envelope |xi|^{-slope}, restricted
    to the dealias band; slope 0 is rough (flat spectrum), slope 2 is smooth.
    Fields are normalized to unit L2.
    """

    layout: SpectralLayout
    seed: int = 0
    count: int = 32
    slope: float = 1.0
    zero_mean: bool = True

    def fields(self):
        rng = np.random.default_rng(self.seed)
        lay = self.layout
        with np.errstate(divide="ignore"):
            env = np.where(lay.k_abs > 0.0, lay.k_abs, 1.0) ** (-self.slope)
        env = env * lay.dealias_mask
        for _ in range(self.count):
            noise = rng.standard_normal(lay.shape)
            fhat = lay.fft(noise) * env
            if self.zero_mean:
                fhat[0, 0, 0] = 0.0
            f = ScalarField.from_spectral(lay, fhat)
            norm = lp_norm(f, 2)
            yield f.with_data(f.data / norm) if norm > 0 else f


def _lam(f: ScalarField, order: float) -> ScalarField:
    return f if order == 0 else fractional_laplacian(f, order)


def check_gagliardo_nirenberg(f: ScalarField, p, alpha: float, m: float,
                              ell: float) -> float:
    """||grad^a f||_Lp against the L2 derivative-norm product.

    The exponents must balance: alpha + 3(1/2 - 1/p) = m (1-theta) + ell theta
    for some theta in [0, 1] (strictly interior when p is infinite).
    """
    inv_p = 0.0 if p in (np.inf, "inf") else 1.0 / float(p)
    target = alpha + 3.0 * (0.5 - inv_p)
    if ell == m:
        if not np.isclose(target, m):
            raise IncompatibleExponents(f"no theta: orders {m} = {ell}")
        theta = 0.0
    else:
        theta = (target - m) / (ell - m)
    interior = inv_p == 0.0
    lo, hi = (0.0, 1.0)
    if theta < lo - 1e-12 or theta > hi + 1e-12 or (
            interior and not (lo + 1e-12 < theta < hi - 1e-12)):
        raise IncompatibleExponents(
            f"theta = {theta:.4g} outside [0, 1] for (p={p}, alpha={alpha}, "
            f"m={m}, ell={ell})")
    lhs = lp_norm(_lam(f, alpha), p)
    rhs = lp_norm(_lam(f, m), 2) ** (1.0 - theta) * lp_norm(_lam(f, ell), 2) ** theta
    return lhs / rhs if rhs > 0 else 0.0


def check_composition(n: ScalarField, k: int, params: ModelParams):
    """Bounds for the composed density nonlinearity at small amplitude.

    Returns (ratio_inf, ratio_l2):
    ratio_inf = ||grad^k f(n)||_Loo / (||grad^{k+1} n|| ||grad^{k+2} n||)^{1/2}
    ratio_l2  = ||grad^k f(n)||_L2 / ||grad^k n||_L2.
    """
    h3 = np.sqrt(sum(lp_norm(_lam(n, l), 2) ** 2 for l in range(4)))
    if h3 > 0.1:
        raise AmplitudeTooLarge(f"H3 norm {h3:.3g} > 0.1")
    fn = f_of_n(n, params)
    fk = _lam(fn, k)
    lhs_inf = lp_norm(fk, np.inf)
    lhs_l2 = lp_norm(fk, 2)
    rhs_inf = np.sqrt(lp_norm(_lam(n, k + 1), 2) * lp_norm(_lam(n, k + 2), 2))
    rhs_l2 = lp_norm(_lam(n, k), 2)
    ratio_inf = lhs_inf / rhs_inf if rhs_inf > 0 else 0.0
    ratio_l2 = lhs_l2 / rhs_l2 if rhs_l2 > 0 else 0.0
    return ratio_inf, ratio_l2


def check_commutator(g: ScalarField, h: ScalarField, k: int) -> float:
    """Commutator estimate ||grad^k(g h) - g grad^k h|| against the product bound."""
    if k < 1:
        raise ValueError("k must be >= 1")
    lay = g.layout
    gh = ScalarField(lay, g.data * h.data)
    comm_data = _lam(gh, k).data - g.data * _lam(h, k).data
    lhs = lp_norm(ScalarField(lay, comm_data), 2)
    grad_g_inf = lp_norm(gradient(g), np.inf)
    rhs = (grad_g_inf * lp_norm(_lam(h, k - 1), 2)
           + lp_norm(_lam(g, k), 2) * lp_norm(h, np.inf))
    return lhs / rhs if rhs > 0 else 0.0


def check_riesz_embedding(f: ScalarField, p: float) -> float:
    """Negative Sobolev norm against the Lp norm, s = 3(1/p - 1/2), 1 < p <= 2."""
    if not 1.0 < p <= 2.0:
        raise ExponentOutOfRange(f"p = {p} outside (1, 2]")
    s = 3.0 * (1.0 / p - 0.5)
    lhs = homogeneous_sobolev_norm(f, -s)
    rhs = lp_norm(f, p)
    return lhs / rhs if rhs > 0 else 0.0


def check_besov_embedding(f: ScalarField, p: float,
                          family: LittlewoodPaleyFamily | None = None) -> float:
    """Negative Besov norm against Lp, s = 3(1/p - 1/2), 1 <= p < 2.

    Unlike the Sobolev variant this admits the endpoint p = 1 (s = 3/2).
    """
    if not 1.0 <= p < 2.0:
        raise ExponentOutOfRange(f"p = {p} outside [1, 2)")
    s = 3.0 * (1.0 / p - 0.5)
    if family is None or family.layout != f.layout:
        family = LittlewoodPaleyFamily(f.layout)
    lhs = family.besov_norm(f, s)
    rhs = lp_norm(f, p)
    return lhs / rhs if rhs > 0 else 0.0


def check_interpolation(f: ScalarField, ell: int, s: float,
                        space: str = "sobolev",
                        family: LittlewoodPaleyFamily | None = None) -> float:
    """Derivative interpolation against a negative-order norm.

    theta = 1/(ell + 1 + s) and the checked ratio is
    ||grad^ell f|| / (||grad^{ell+1} f||^{1-theta} ||f||_{neg}^{theta})
    where the negative norm is homogeneous Sobolev or Besov of order -s.
    The Sobolev variant has exact constant one (Hoelder on the Fourier side).
    """
    if space not in ("sobolev", "besov"):
        raise ValueError("space must be sobolev or besov")
    if space == "besov" and s <= 0:
        raise ValueError("besov variant needs s > 0")
    if s < 0:
        raise ValueError("s must be >= 0")
    theta = 1.0 / (ell + 1.0 + s)
    lhs = homogeneous_sobolev_norm(f, float(ell))
    high = homogeneous_sobolev_norm(f, ell + 1.0)
    if space == "sobolev":
        neg = homogeneous_sobolev_norm(f, -s)
    else:
        if family is None or family.layout != f.layout:
            family = LittlewoodPaleyFamily(f.layout)
        neg = family.besov_norm(f, s)
    rhs = high ** (1.0 - theta) * neg ** theta
    return lhs / rhs if rhs > 0 else 0.0
