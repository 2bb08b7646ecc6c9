"""State, parameters and right-hand side of the reformulated two-fluid system.

The state U = (n1, n2, u1, u2, E, B) collects sum/difference entropic
densities and velocities of the two species together with the
electromagnetic perturbation.  The evolution is

    dt n1 = -div u1 + g1
    dt u1 = -nu u1 + u2 x B_inf - grad n1 + g2 + u2 x B
    dt n2 = -div u2 + g3
    dt u2 = -nu u2 + u1 x B_inf - grad n2 + 2 nu E + g4 + u1 x B
    dt E  =  nu curl B - nu u2 + g5
    dt B  = -nu curl E

with the constraints div B = 0 and div E = nu (f(n_+) - f(n_-)),
n_pm = (n1 +- n2)/2.  The B tendency is evaluated in spectral space so the
solenoidal constraint is preserved to roundoff by any explicit integrator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DensityUnderflow
from .spectral import (
    ScalarField,
    SpectralLayout,
    VectorField,
    _curl_hat,
    _div_hat,
    _grad_hat,
)

__all__ = [
    "ModelParams",
    "State",
    "f_of_n",
    "f_inverse",
    "g_function",
    "nonlinear_terms",
    "rhs",
    "gauss_residual",
    "div_b_residual",
    "to_sum_difference",
    "from_sum_difference",
    "scale_physical_to_reformulated",
    "scale_reformulated_to_physical",
]

#: pointwise positivity floor for 1 + mu*n; below this we raise instead of
#: clamping so blow-up is detected, not masked
DENSITY_FLOOR = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Adiabatic exponent and derived coefficients.

    The relaxation times, Debye length, light-speed factor and background
    densities are all fixed at one; only gamma and the constant background
    magnetic field remain free.  mu and nu are always derived from gamma.
    """

    gamma: float = 3.0
    b_infinity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    nonlinear_enabled: bool = True

    def __post_init__(self):
        if self.gamma < 1.0:
            raise ValueError("gamma must be >= 1")
        object.__setattr__(self, "b_infinity", np.asarray(self.b_infinity, dtype=float))
        if self.b_infinity.shape != (3,):
            raise ValueError("b_infinity must be a 3-vector")

    @property
    def mu(self) -> float:
        return (self.gamma - 1.0) / 2.0

    @property
    def nu(self) -> float:
        return 1.0 / np.sqrt(self.gamma)

    @property
    def time_dilation(self) -> float:
        """Factor sqrt(gamma) between physical and rescaled time axes."""
        return float(np.sqrt(self.gamma))

    def linearized(self) -> "ModelParams":
        return ModelParams(self.gamma, self.b_infinity, nonlinear_enabled=False)


@dataclass
class State:
    """One snapshot of the six reformulated fields on a common layout."""

    n1: ScalarField
    n2: ScalarField
    u1: VectorField
    u2: VectorField
    E: VectorField
    B: VectorField

    def __post_init__(self):
        lay = self.n1.layout
        for f in (self.n2, self.u1, self.u2, self.E, self.B):
            if f.layout != lay:
                raise ValueError("all state fields must share one layout")

    @property
    def layout(self) -> SpectralLayout:
        return self.n1.layout

    @classmethod
    def zeros(cls, layout: SpectralLayout) -> "State":
        return cls(
            ScalarField.zeros(layout),
            ScalarField.zeros(layout),
            VectorField.zeros(layout),
            VectorField.zeros(layout),
            VectorField.zeros(layout),
            VectorField.zeros(layout),
        )

    def lincomb(self, terms) -> "State":
        """self + sum of coeff * tendency over (coeff, State) pairs.

        When every participating field carries cached coefficients, the
        combination is formed in spectral space too, so downstream
        multiplier work needs no forward transforms.
        """
        def comb(name, cls):
            fields = [getattr(self, name)] + [getattr(st, name) for _, st in terms]
            data = fields[0].data.copy()
            for (c, _), f in zip(terms, fields[1:]):
                data += c * f.data
            hat = None
            if all(f._hat is not None for f in fields):
                hat = fields[0]._hat.copy()
                for (c, _), f in zip(terms, fields[1:]):
                    hat += c * f._hat
            return cls(self.layout, data, hat=hat)

        return State(
            comb("n1", ScalarField), comb("n2", ScalarField),
            comb("u1", VectorField), comb("u2", VectorField),
            comb("E", VectorField), comb("B", VectorField),
        )

    def scaled(self, c: float) -> "State":
        return State(
            self.n1 * c, self.n2 * c,
            self.u1 * c, self.u2 * c, self.E * c, self.B * c,
        )


def _check_positivity(values: np.ndarray, mu: float, what: str):
    if mu == 0.0:
        return
    if (1.0 + mu * values).min() <= DENSITY_FLOOR:
        raise DensityUnderflow(f"1 + mu*{what} fell below {DENSITY_FLOOR}")


def _f_pointwise(values: np.ndarray, params: ModelParams) -> np.ndarray:
    if params.gamma == 1.0:
        return np.expm1(values)
    _check_positivity(values, params.mu, "n")
    return (1.0 + params.mu * values) ** (2.0 / (params.gamma - 1.0)) - 1.0


def f_of_n(n: ScalarField, params: ModelParams) -> ScalarField:
    """Pointwise pressure nonlinearity f(n) = (1 + mu n)^(2/(gamma-1)) - 1.

    The gamma = 1 branch is exp(n) - 1, the inverse of the logarithmic
    density change of variables.  f(0) = 0 and f'(0) = 1 for every gamma.
    """
    return ScalarField(n.layout, _f_pointwise(n.data, params))


def f_inverse(f: ScalarField, params: ModelParams) -> ScalarField:
    """Pointwise inverse of :func:`f_of_n` (requires f > -1)."""
    vals = np.asarray(f.data)
    if vals.min() <= -1.0:
        raise DensityUnderflow("f values must stay above -1")
    if params.gamma == 1.0:
        return ScalarField(f.layout, np.log1p(vals))
    n = ((1.0 + vals) ** ((params.gamma - 1.0) / 2.0) - 1.0) / params.mu
    return ScalarField(f.layout, n)


def g_function(n1: ScalarField, n2: ScalarField, params: ModelParams) -> ScalarField:
    """g = f((n1-n2)/2) - f((n1+n2)/2), dealiased.

    Satisfies div E = -nu * g on the constraint manifold and g = -n2 + O(n^2)
    for small fields.
    """
    lay = n1.layout
    n_plus = 0.5 * (n1.data + n2.data)
    n_minus = 0.5 * (n1.data - n2.data)
    raw = _f_pointwise(n_minus, params) - _f_pointwise(n_plus, params)
    return ScalarField.from_spectral(lay, lay.fft(raw) * lay.dealias_mask)


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def _cross_const(a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """a x c for a field a and constant 3-vector c."""
    return np.stack([
        a[1] * c[2] - a[2] * c[1],
        a[2] * c[0] - a[0] * c[2],
        a[0] * c[1] - a[1] * c[0],
    ])


def _dealias_scalar(lay: SpectralLayout, a: np.ndarray) -> np.ndarray:
    return lay.ifft(lay.fft(a) * lay.dealias_mask)


def _dealias_vector(lay: SpectralLayout, a: np.ndarray) -> np.ndarray:
    return np.stack([_dealias_scalar(lay, a[i]) for i in range(3)])


def nonlinear_terms(U: State, params: ModelParams, _derivs=None):
    """The five quadratic/composition source terms, each dealiased.

    Returns (g1, g3) scalar and (g2, g4, g5) vector fields:

        g1 = -1/2 (u1.grad n1 + u2.grad n2) - mu/2 (n1 div u1 + n2 div u2)
        g2 = -1/2 (u1.grad u1 + u2.grad u2) - mu/2 (n1 grad n1 + n2 grad n2)
        g3 = -1/2 (u1.grad n2 + u2.grad n1) - mu/2 (n1 div u2 + n2 div u1)
        g4 = -1/2 (u1.grad u2 + u2.grad u1) - mu/2 (n1 grad n2 + n2 grad n1)
        g5 = nu (f(n_-) u_- - f(n_+) u_+)
    """
    lay = U.layout
    mu, nu = params.mu, params.nu
    if _derivs is None:
        grad_n1 = lay.ifft_vec(_grad_hat(lay, U.n1.hat))
        grad_n2 = lay.ifft_vec(_grad_hat(lay, U.n2.hat))
        div_u1 = lay.ifft(_div_hat(lay, U.u1.hat))
        div_u2 = lay.ifft(_div_hat(lay, U.u2.hat))
    else:
        grad_n1, grad_n2, div_u1, div_u2 = _derivs

    n1, n2 = U.n1.data, U.n2.data
    u1, u2 = U.u1.data, U.u2.data

    # grad tensors: grad_u[i][j] = d u_i / d x_j
    u1h, u2h = U.u1.hat, U.u2.hat
    grad_u1 = [lay.ifft_vec(_grad_hat(lay, u1h[i])) for i in range(3)]
    grad_u2 = [lay.ifft_vec(_grad_hat(lay, u2h[i])) for i in range(3)]

    def advect(u, grad_v):
        # (u . grad) v, one component per entry of grad_v
        return np.stack([
            u[0] * grad_v[i][0] + u[1] * grad_v[i][1] + u[2] * grad_v[i][2]
            for i in range(3)
        ])

    def dot_grad(u, grad_n):
        return u[0] * grad_n[0] + u[1] * grad_n[1] + u[2] * grad_n[2]

    g1 = -0.5 * (dot_grad(u1, grad_n1) + dot_grad(u2, grad_n2)) \
         - 0.5 * mu * (n1 * div_u1 + n2 * div_u2)
    g3 = -0.5 * (dot_grad(u1, grad_n2) + dot_grad(u2, grad_n1)) \
         - 0.5 * mu * (n1 * div_u2 + n2 * div_u1)
    g2 = -0.5 * (advect(u1, grad_u1) + advect(u2, grad_u2)) \
         - 0.5 * mu * (n1 * grad_n1 + n2 * grad_n2)
    g4 = -0.5 * (advect(u1, grad_u2) + advect(u2, grad_u1)) \
         - 0.5 * mu * (n1 * grad_n2 + n2 * grad_n1)

    f_plus = _f_pointwise(0.5 * (n1 + n2), params)
    f_minus = _f_pointwise(0.5 * (n1 - n2), params)
    u_plus = 0.5 * (u1 + u2)
    u_minus = 0.5 * (u1 - u2)
    g5 = nu * (f_minus * u_minus - f_plus * u_plus)

    return (
        ScalarField(lay, _dealias_scalar(lay, g1)),
        VectorField(lay, _dealias_vector(lay, g2)),
        ScalarField(lay, _dealias_scalar(lay, g3)),
        VectorField(lay, _dealias_vector(lay, g4)),
        VectorField(lay, _dealias_vector(lay, g5)),
    )


def rhs(U: State, params: ModelParams) -> State:
    """Evaluate the full tendency of the system at a state."""
    lay = U.layout
    nu = params.nu
    binf = params.b_infinity

    if not params.nonlinear_enabled:
        # fully spectral path: every term is a multiplier or a constant
        # cross product, so tendencies keep exact cached coefficients
        u1h, u2h, eh, bh = U.u1.hat, U.u2.hat, U.E.hat, U.B.hat
        dn1_h = -_div_hat(lay, u1h)
        dn2_h = -_div_hat(lay, u2h)
        du1_h = -nu * u1h - _grad_hat(lay, U.n1.hat)
        du2_h = -nu * u2h - _grad_hat(lay, U.n2.hat) + 2.0 * nu * eh
        dE_h = nu * _curl_hat(lay, bh) - nu * u2h
        dB_h = -nu * _curl_hat(lay, eh)
        if binf.any():
            du1_h = du1_h + _cross_const(u2h, binf)
            du2_h = du2_h + _cross_const(u1h, binf)
        return State(
            ScalarField.from_spectral(lay, dn1_h),
            ScalarField.from_spectral(lay, dn2_h),
            VectorField.from_spectral(lay, du1_h),
            VectorField.from_spectral(lay, du2_h),
            VectorField.from_spectral(lay, dE_h),
            VectorField.from_spectral(lay, dB_h),
        )

    div_u1 = lay.ifft(_div_hat(lay, U.u1.hat))
    div_u2 = lay.ifft(_div_hat(lay, U.u2.hat))
    grad_n1 = lay.ifft_vec(_grad_hat(lay, U.n1.hat))
    grad_n2 = lay.ifft_vec(_grad_hat(lay, U.n2.hat))
    curl_B = lay.ifft_vec(_curl_hat(lay, U.B.hat))
    dB_hat = -nu * _curl_hat(lay, U.E.hat)

    dn1 = -div_u1
    dn2 = -div_u2
    du1 = -nu * U.u1.data - grad_n1
    du2 = -nu * U.u2.data - grad_n2 + 2.0 * nu * U.E.data
    dE = nu * curl_B - nu * U.u2.data
    dB = lay.ifft_vec(dB_hat)
    if binf.any():
        du1 = du1 + _cross_const(U.u2.data, binf)
        du2 = du2 + _cross_const(U.u1.data, binf)

    if params.nonlinear_enabled:
        g1, g2, g3, g4, g5 = nonlinear_terms(
            U, params, _derivs=(grad_n1, grad_n2, div_u1, div_u2)
        )
        dn1 = dn1 + g1.data
        dn2 = dn2 + g3.data
        du1 = du1 + g2.data + _dealias_vector(lay, _cross(U.u2.data, U.B.data))
        du2 = du2 + g4.data + _dealias_vector(lay, _cross(U.u1.data, U.B.data))
        dE = dE + g5.data

    return State(
        ScalarField(lay, dn1), ScalarField(lay, dn2),
        VectorField(lay, du1), VectorField(lay, du2),
        VectorField(lay, dE), VectorField(lay, dB),
    )


def gauss_constraint_parts(U: State, params: ModelParams) -> tuple:
    """(absolute L2 residual, L2 scale) of the constraint div E = -nu*g.

    The nonlinear source uses the dealiased g so the residual measures the
    constraint actually propagated by the discrete dynamics.  The scale is
    the magnitude of the constraint terms themselves; it decays with the
    solution, so drift over a long run should be normalised against the
    scale at an early reference time, not the pointwise one.
    """
    lay = U.layout
    div_e_hat = _div_hat(lay, U.E.hat)
    if params.nonlinear_enabled:
        g = g_function(U.n1, U.n2, params)
        res_hat = div_e_hat + params.nu * g.hat
    else:
        res_hat = div_e_hat - params.nu * U.n2.hat * lay.dealias_mask
    num = lay.spectral_l2(res_hat)
    den = max(lay.spectral_l2(div_e_hat), lay.spectral_l2(U.n2.hat))
    return num, den


def gauss_residual(U: State, params: ModelParams, floor: float = 1e-14) -> float:
    """Relative L2 residual of the electric constraint div E = -nu*g."""
    num, den = gauss_constraint_parts(U, params)
    return num / max(den, floor)


def div_b_residual(U: State, floor: float = 1e-14) -> float:
    """L2 norm of div B relative to the gradient magnitude of B."""
    lay = U.layout
    bhat = U.B.hat
    num = lay.spectral_l2(_div_hat(lay, bhat))
    grad_mag = np.sqrt(lay.k_squared) * bhat
    den = max(lay.spectral_l2(grad_mag), floor)
    return num / den


# -- variable changes ---------------------------------------------------------

def to_sum_difference(n_plus, n_minus, u_plus, u_minus):
    """Per-species fields -> (n1, n2, u1, u2) sums and differences."""
    return (n_plus + n_minus, n_plus - n_minus,
            u_plus + u_minus, u_plus - u_minus)


def from_sum_difference(n1, n2, u1, u2):
    """Inverse of :func:`to_sum_difference`."""
    return (0.5 * (n1 + n2), 0.5 * (n1 - n2),
            0.5 * (u1 + u2), 0.5 * (u1 - u2))


def scale_physical_to_reformulated(n_tilde, u_tilde, e_tilde, b_tilde, params):
    """Map physical per-species variables to the entropic/scaled ones.

    Density uses the power-law transform (logarithm for gamma = 1); u and E
    pick up a 1/sqrt(gamma) factor; B additionally drops the constant
    background.  The accompanying time rescaling t -> t/sqrt(gamma) is
    exposed as ``params.time_dilation`` and recorded on trajectories by the
    harness.
    """
    lay = n_tilde.layout
    vals = n_tilde.data
    if vals.min() <= 0.0:
        raise DensityUnderflow("physical density must be positive")
    if params.gamma == 1.0:
        n = np.log(vals)
    else:
        n = (2.0 / (params.gamma - 1.0)) * (vals ** params.mu - 1.0)
    root = 1.0 / np.sqrt(params.gamma)
    b = root * b_tilde.data - params.b_infinity.reshape(3, 1, 1, 1)
    return (
        ScalarField(lay, n),
        VectorField(lay, root * u_tilde.data),
        VectorField(lay, root * e_tilde.data),
        VectorField(lay, b),
    )


def scale_reformulated_to_physical(n, u, e, b, params):
    """Inverse of :func:`scale_physical_to_reformulated`."""
    lay = n.layout
    if params.gamma == 1.0:
        n_tilde = np.exp(n.data)
    else:
        base = 1.0 + params.mu * n.data
        if base.min() <= 0.0:
            raise DensityUnderflow("reformulated density out of range")
        n_tilde = base ** (1.0 / params.mu)
    root = np.sqrt(params.gamma)
    b_tilde = root * (b.data + params.b_infinity.reshape(3, 1, 1, 1))
    return (
        ScalarField(lay, n_tilde),
        VectorField(lay, root * u.data),
        VectorField(lay, root * e.data),
        VectorField(lay, b_tilde),
    )
