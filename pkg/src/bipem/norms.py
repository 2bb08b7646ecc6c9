"""Norms and energy functionals used by the diagnostics.

Derivative norms of integer order l are realized as ||Lambda^l f||_L2 with
Lambda the square root of the (negative) Laplacian; on the torus this is
equivalent to summing all order-l derivatives up to fixed combinatorial
weights, and it is declared the normative realization for every reported
number.  Negative-order norms are fluctuation norms: the zero mode is
excluded by definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonZeroMean
from .model import ModelParams, State
from .spectral import ScalarField, SpectralLayout, VectorField, _curl_hat, _div_hat

__all__ = [
    "lp_norm",
    "homogeneous_sobolev_norm",
    "LittlewoodPaleyFamily",
    "energy_EN",
    "dissipation_DN",
    "energy_Ek_k2",
    "dissipation_Dk_k2",
    "cross_functionals",
    "weighted_energy",
    "velocity_square",
    "channel_norm",
    "CHANNELS",
    "FunctionalSample",
    "FunctionalRegistry",
    "default_registry",
]


def _field_power(f) -> np.ndarray:
    """Parseval-weighted power |fhat|^2 per stored mode, components summed."""
    lay = f.layout
    h = f.hat
    p = h.real ** 2 + h.imag ** 2
    if p.ndim == 4:
        p = p.sum(axis=0)
    return lay.mode_weight * p


def lp_norm(f, p) -> float:
    """Grid L^p norm; vector fields use the pointwise Euclidean magnitude."""
    data = f.data
    mag2 = (data ** 2).sum(axis=0) if data.ndim == 4 else data ** 2
    if p == np.inf or p == "inf":
        return float(np.sqrt(mag2.max()))
    p = float(p)
    if p <= 0:
        raise ValueError("p must be positive")
    dv = f.layout.cell_volume
    return float((np.sum(mag2 ** (p / 2.0)) * dv) ** (1.0 / p))


def homogeneous_sobolev_norm(f, s: float) -> float:
    """Fluctuation norm (sum over nonzero modes of |xi|^{2s} |fhat|^2)^{1/2}."""
    lay = f.layout
    if s < 0:
        fhat = f.hat
        scal = fhat if fhat.ndim == 3 else None
        mean = abs(fhat[0, 0, 0]) if scal is not None else float(
            np.abs(fhat[:, 0, 0, 0]).max())
        if mean > 1e-10 * max(lay.spectral_l2(fhat), 1e-300):
            raise NonZeroMean(f"Sobolev norm of order {s} needs zero mean")
    power = _field_power(f)
    with np.errstate(divide="ignore"):
        mult = np.where(lay.k_squared > 0.0, lay.k_squared, 1.0) ** s
    mult[0, 0, 0] = 0.0
    return float(np.sqrt(lay.volume * (mult * power).sum()))


class LittlewoodPaleyFamily:
    """Dyadic frequency blocks built from a smooth radial bump.

    The bump is phi(xi) = psi(|xi|) with psi(r) = h(2-r)/(h(2-r)+h(r-1)),
    h(x) = exp(-1/x) for x > 0, so phi = 1 on |xi| <= 1 and 0 on |xi| >= 2.
    Block j keeps the annulus 2^{j-1} <= |xi| <= 2^{j+1} and the blocks sum
    to one on every nonzero grid wavevector.
    """

    def __init__(self, layout: SpectralLayout):
        self.layout = layout
        L, n = layout.box_length, layout.resolution
        self.j_min = math.floor(math.log2(2.0 * math.pi / L)) - 1
        self.j_max = math.ceil(math.log2(math.pi * n / L)) + 1
        self._symbols: dict[int, np.ndarray] = {}

    @staticmethod
    def _h(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(-1.0 / x[pos])
        return out

    @classmethod
    def bump(cls, r: np.ndarray) -> np.ndarray:
        """psi(r): 1 for r <= 1, 0 for r >= 2, smooth in between."""
        r = np.asarray(r, dtype=float)
        num = cls._h(2.0 - r)
        return num / (num + cls._h(r - 1.0))

    def symbol(self, j: int) -> np.ndarray:
        if j not in self._symbols:
            r = self.layout.k_abs
            self._symbols[j] = self.bump(r * 2.0 ** (-j)) - self.bump(r * 2.0 ** (-j + 1))
        return self._symbols[j]

    @property
    def blocks(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def partition_defect(self) -> float:
        """max over nonzero grid modes of |sum_j phi_j - 1|."""
        total = sum(self.symbol(j) for j in self.blocks)
        total[0, 0, 0] = 1.0
        return float(np.abs(total - 1.0).max())

    def block(self, f: ScalarField, j: int) -> ScalarField:
        return ScalarField.from_spectral(self.layout, self.symbol(j) * f.hat)

    def block_l2(self, f, j: int) -> float:
        return self.layout.spectral_l2(self.symbol(j) * f.hat)

    def besov_norm(self, f, s: float, check_mean: bool = True) -> float:
        """Negative Besov norm sup_j 2^{-s j} ||block_j f||_L2 (s > 0)."""
        lay = self.layout
        if check_mean:
            fhat = f.hat
            mean = (abs(fhat[0, 0, 0]) if fhat.ndim == 3
                    else float(np.abs(fhat[:, 0, 0, 0]).max()))
            if mean > 1e-10 * max(lay.spectral_l2(fhat), 1e-300):
                raise NonZeroMean("negative Besov norm needs zero mean")
        return max(2.0 ** (-s * j) * self.block_l2(f, j) for j in self.blocks)


# -- energy functionals -------------------------------------------------------

_FLUID = ("n1", "n2", "u1", "u2")
_EM = ("E", "B")


def _group_power(U: State, names) -> np.ndarray:
    p = None
    for name in names:
        q = _field_power(getattr(U, name))
        p = q if p is None else p + q
    return p


def _deriv_sum(lay: SpectralLayout, power: np.ndarray, l_lo: int, l_hi: int) -> float:
    """V * sum_xi sum_{l=l_lo..l_hi} |xi|^{2l} power(xi).

    The zero mode contributes only at l = 0 (with multiplier one).
    """
    if l_hi < l_lo:
        return 0.0
    kk = lay.k_squared
    mult = np.zeros_like(kk)
    term = np.ones_like(kk)
    for l in range(l_hi + 1):
        if l > 0:
            term = term * kk
        if l >= l_lo:
            mult += term
    if l_lo > 0:
        mult[0, 0, 0] = 0.0
    return float(lay.volume * (mult * power).sum())


def energy_EN(U: State, N: int) -> float:
    """sum_{l=0..N} of the squared order-l derivative norm of the full state."""
    if N < 3:
        raise ValueError("N must be >= 3")
    p = _group_power(U, _FLUID + _EM)
    return _deriv_sum(U.layout, p, 0, N)


def dissipation_DN(U: State, N: int) -> float:
    """Dissipation companion of :func:`energy_EN`: n1 misses l=0, E misses
    l=N, B misses both l=0 and l=N."""
    if N < 3:
        raise ValueError("N must be >= 3")
    lay = U.layout
    return (
        _deriv_sum(lay, _group_power(U, ("n1",)), 1, N)
        + _deriv_sum(lay, _group_power(U, ("n2", "u1", "u2")), 0, N)
        + _deriv_sum(lay, _group_power(U, ("E",)), 0, N - 1)
        + _deriv_sum(lay, _group_power(U, ("B",)), 1, N - 1)
    )


def energy_Ek_k2(U: State, k: int) -> float:
    """Three-level energy sum_{l=k..k+2} ||grad^l U||^2 (minimum derivative count)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    p = _group_power(U, _FLUID + _EM)
    return _deriv_sum(U.layout, p, k, k + 2)


def dissipation_Dk_k2(U: State, k: int) -> float:
    """Three-level dissipation: n1 over l=k+1..k+2, (n2,u1,u2) over k..k+2,
    E over k..k+1, B at l=k+1 only."""
    if k < 0:
        raise ValueError("k must be >= 0")
    lay = U.layout
    return (
        _deriv_sum(lay, _group_power(U, ("n1",)), k + 1, k + 2)
        + _deriv_sum(lay, _group_power(U, ("n2", "u1", "u2")), k, k + 2)
        + _deriv_sum(lay, _group_power(U, ("E",)), k, k + 1)
        + _deriv_sum(lay, _group_power(U, ("B",)), k + 1, k + 1)
    )


def _pairing(lay: SpectralLayout, ahat, bhat, mult) -> float:
    """Real L2 pairing <a, b> with a spectral multiplier weight."""
    prod = (ahat.conj() * bhat).real
    if prod.ndim == 4:
        prod = prod.sum(axis=0)
    return float(lay.volume * (lay.mode_weight * mult * prod).sum())


def cross_functionals(U: State, k: int, eta: float = 0.1) -> dict:
    """Interactive functional and the damped-channel proxies at level k.

    Returns the signed interactive functional

        sum_{l=k..k+1} <grad^l u1, grad grad^l n1> + <grad^l u2, grad grad^l n2>
        - sum_{l=k..k+1} <grad^l u2, grad^l E>  -  eta <grad^k E, grad^k curl B>

    together with Fk = ||grad^k (u1,u2,E)||^2 and
    Gk = ||grad^k n2||^2 + ||grad^k div u2||^2.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    lay = U.layout
    kk = lay.k_squared
    n1h, n2h = U.n1.hat, U.n2.hat
    u1h, u2h, Eh, Bh = U.u1.hat, U.u2.hat, U.E.hat, U.B.hat

    interactive = 0.0
    for l in (k, k + 1):
        mult = kk ** l
        grad_n1 = np.stack([1j * lay.k[a] * n1h for a in range(3)])
        grad_n2 = np.stack([1j * lay.k[a] * n2h for a in range(3)])
        interactive += _pairing(lay, u1h, grad_n1, mult)
        interactive += _pairing(lay, u2h, grad_n2, mult)
        interactive -= _pairing(lay, u2h, Eh, mult)
    interactive -= eta * _pairing(lay, Eh, _curl_hat(lay, Bh), kk ** k)

    mult_k = kk ** k
    if k > 0:
        mult_k = np.array(mult_k)
        mult_k[0, 0, 0] = 0.0
    f_power = _group_power(U, ("u1", "u2", "E"))
    fk = float(lay.volume * (mult_k * f_power).sum())

    div_u2 = _div_hat(lay, u2h)
    g_power = lay.mode_weight * (
        n2h.real ** 2 + n2h.imag ** 2 + div_u2.real ** 2 + div_u2.imag ** 2
    )
    gk = float(lay.volume * (mult_k * g_power).sum())
    return {"interactive": interactive, "Fk": fk, "Gk": gk}


def weighted_energy(U: State) -> float:
    """The exact L2 Lyapunov functional 1/2 ||fluid||^2 + ||EM||^2.

    Its time derivative along the linearized flow is exactly
    -nu ||(u1, u2)||^2.
    """
    lay = U.layout
    fluid = _group_power(U, _FLUID)
    em = _group_power(U, _EM)
    return float(lay.volume * (0.5 * fluid + em).sum())


def velocity_square(U: State) -> float:
    """||u1||^2 + ||u2||^2 in L2."""
    lay = U.layout
    return float(lay.volume * _group_power(U, ("u1", "u2")).sum())


# -- decay-fit channels -------------------------------------------------------

CHANNELS = {
    "U": ("n1", "n2", "u1", "u2", "E", "B"),
    "n1": ("n1",),
    "n2": ("n2",),
    "u": ("u1", "u2"),
    "u1": ("u1",),
    "u2": ("u2",),
    "E": ("E",),
    "B": ("B",),
}


def channel_norm(U: State, channel: str, k: int = 0) -> float:
    """Fluctuation norm ||grad^k channel||_L2 (zero mode excluded)."""
    lay = U.layout
    p = _group_power(U, CHANNELS[channel])
    mult = lay.k_squared ** k if k > 0 else np.ones(lay.rshape)
    mult = np.array(mult)
    mult[0, 0, 0] = 0.0
    return float(np.sqrt(lay.volume * (mult * p).sum()))


# -- registry -----------------------------------------------------------------

@dataclass
class FunctionalSample:
    """All registered functional values at one sample time."""
    t: float
    values: dict = field(default_factory=dict)


@dataclass(frozen=True)
class _Entry:
    func: object
    description: str
    signed: bool = False


class FunctionalRegistry:
    """Named diagnostics; names double as stable CSV column identifiers."""

    def __init__(self):
        self._entries: dict[str, _Entry] = {}

    def register(self, name: str, func, description: str, signed: bool = False):
        self._entries[name] = _Entry(func, description, signed)

    def names(self):
        return list(self._entries)

    def describe(self, name: str) -> str:
        return self._entries[name].description

    def is_signed(self, name: str) -> bool:
        return self._entries[name].signed

    def sample(self, t: float, U: State) -> FunctionalSample:
        values = {name: entry.func(U) for name, entry in self._entries.items()}
        for name, v in values.items():
            if not np.isfinite(v):
                raise FloatingPointError(f"functional {name} is not finite")
            if v < 0 and not self._entries[name].signed:
                raise FloatingPointError(f"functional {name} went negative")
        return FunctionalSample(t, values)


def default_registry(params: ModelParams, layout: SpectralLayout) -> FunctionalRegistry:
    """Standard diagnostics set sampled along every trajectory."""
    from .model import div_b_residual, gauss_constraint_parts, gauss_residual

    lp = LittlewoodPaleyFamily(layout)
    reg = FunctionalRegistry()
    reg.register("E3", lambda U: energy_EN(U, 3),
                 "energy: squared derivative norms of U, orders 0..3")
    reg.register("D3", lambda U: dissipation_DN(U, 3),
                 "dissipation companion of E3 (degenerate channels excluded)")
    reg.register("Ewt", weighted_energy,
                 "L2 Lyapunov functional: half fluid + full electromagnetic energy")
    reg.register("u_sq", velocity_square, "squared L2 norm of (u1, u2)")
    for ch in ("U", "n1", "n2", "u", "E", "B"):
        reg.register(f"L2_{ch}", lambda U, c=ch: channel_norm(U, c, 0),
                     f"fluctuation L2 norm of channel {ch}")
        reg.register(f"H1_{ch}", lambda U, c=ch: channel_norm(U, c, 1),
                     f"first-derivative fluctuation norm of channel {ch}")

    def _stack_besov(U):
        # sup over blocks of the all-component block norm
        best = 0.0
        for j in lp.blocks:
            sym = lp.symbol(j)
            total = 0.0
            for name in _FLUID + _EM:
                h = getattr(U, name).hat
                p = h.real ** 2 + h.imag ** 2
                if p.ndim == 4:
                    p = p.sum(axis=0)
                total += float((layout.mode_weight * sym ** 2 * p).sum())
            best = max(best, 2.0 ** (-1.5 * j) * np.sqrt(layout.volume * total))
        return best

    def _stack_hneg(U):
        with np.errstate(divide="ignore"):
            mult = np.where(layout.k_squared > 0, layout.k_squared, 1.0) ** -1.5
        mult[0, 0, 0] = 0.0
        total = sum(float((mult * _field_power(getattr(U, nm))).sum())
                    for nm in _FLUID + _EM)
        return float(np.sqrt(layout.volume * total))

    reg.register("Hneg_s1.5_U", _stack_hneg,
                 "negative-order Sobolev fluctuation norm of U at order -3/2")
    reg.register("Besov_s1.5_U", _stack_besov,
                 "negative Besov (2, inf) norm of U at order -3/2")
    cf = lambda U: cross_functionals(U, 0)
    reg.register("cross0", lambda U: cf(U)["interactive"],
                 "interactive cross functional at level 0", signed=True)
    reg.register("F0", lambda U: cf(U)["Fk"],
                 "squared L2 norm of the damped channels (u1, u2, E)")
    reg.register("G0", lambda U: cf(U)["Gk"],
                 "squared L2 norm of (n2, div u2)")
    reg.register("gauss_res", lambda U: gauss_residual(U, params),
                 "relative residual of the electric divergence constraint")
    reg.register("gauss_abs", lambda U: gauss_constraint_parts(U, params)[0],
                 "absolute L2 residual of the electric divergence constraint")
    reg.register("gauss_scale", lambda U: gauss_constraint_parts(U, params)[1],
                 "L2 magnitude of the electric constraint terms")
    reg.register("divB_res", div_b_residual,
                 "relative residual of the magnetic divergence constraint")
    return reg
