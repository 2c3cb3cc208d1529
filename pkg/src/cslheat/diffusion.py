"""Steady temperature profiles under uniform heating with conductivity k = k0 T.

For a body with ``n`` symmetric dimensions (slab 1, cylinder 2, sphere 3),
characteristic length ``R`` and scaled coordinate ``s = r / R``::

    (1/s^(n-1)) d/ds (s^(n-1) T dT/ds) + q_dot ell^2 / k0 = 0,   T'(0) = 0,  T(1) = T_s

    T(s)   = T_s sqrt(1 + beta (1 - s^2)),     beta = q_dot ell^2 / (n k0 T_s^2)
    T_lin  = T_s + (beta T_s / 2) (1 - s^2)

Two length conventions are offered.  ``"physical"`` uses ``ell = R``.
``"unit-length"`` (the default) fixes ``ell = 1 m`` whatever the radius,
which is how the published Cu and TeO2 core temperatures are obtained; the
radius then only labels the sample coordinates.  The shape factors 1/2, 1/4, 1/6 on
``q_dot ell^2 / (k0 T_s)`` for slab, cylinder and sphere make the slab core
rise exactly three times the sphere's.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError, DomainError

_DIMENSION = {"slab": 1, "cylinder": 2, "sphere": 3}
UNIT_LENGTH, PHYSICAL = "unit-length", "physical"


@dataclass(frozen=True)
class Geometry:
    kind: str
    length: float  # radius, or half-width for a slab

    def __post_init__(self):
        if self.kind not in _DIMENSION:
            raise DomainError(f"unknown geometry {self.kind!r}")
        if not self.length > 0:
            raise DomainError("characteristic length must be > 0")

    @classmethod
    def sphere(cls, r0):
        return cls("sphere", r0)

    @classmethod
    def cylinder(cls, r0):
        return cls("cylinder", r0)

    @classmethod
    def slab(cls, half_width):
        return cls("slab", half_width)

    @property
    def dimension(self):
        return _DIMENSION[self.kind]


@dataclass(frozen=True)
class TemperatureProfile:
    geometry: Geometry
    T_s: float
    q_dot: float
    k0: float
    r: np.ndarray = field(repr=False)
    T_exact: np.ndarray = field(repr=False)
    T_linearized: np.ndarray = field(repr=False)
    core_delta_exact: float
    core_delta_linearized: float
    convention: str = UNIT_LENGTH

    @property
    def samples(self):
        return list(zip(self.r.tolist(), self.T_exact.tolist(), self.T_linearized.tolist()))


@dataclass(frozen=True)
class CoreTemperature:
    exact: float
    linearized: float
    T_s: float
    delta_exact: float
    delta_linearized: float


def _check(T_s, q_dot, k0, convention):
    if not T_s > 0:
        raise DomainError("T_s must be > 0")
    if not q_dot >= 0:
        raise DomainError("q_dot must be >= 0")
    if not k0 > 0:
        raise DomainError("k0 must be > 0")
    if convention not in (UNIT_LENGTH, PHYSICAL):
        raise DomainError(f"unknown convention {convention!r}")


def length_scale(geometry, convention):
    return 1.0 if convention == UNIT_LENGTH else geometry.length


def load_parameter(T_s, q_dot, k0, geometry, convention=UNIT_LENGTH):
    """Dimensionless heat load ``beta``."""
    ell = length_scale(geometry, convention)
    return q_dot * ell**2 / (geometry.dimension * k0 * T_s**2)


def _excess(T_s, beta, s):
    # sqrt(1+u) - 1 = u / (sqrt(1+u) + 1), stable for tiny loads
    u = beta * (1.0 - s**2)
    return T_s * u / (np.sqrt(1.0 + u) + 1.0)


def _exact(T_s, beta, s):
    return T_s + _excess(T_s, beta, s)


def profile(T_s, q_dot, k0, geometry, n_samples=101, convention=UNIT_LENGTH):
    _check(T_s, q_dot, k0, convention)
    if n_samples < 2:
        raise DomainError("n_samples must be >= 2")
    beta = load_parameter(T_s, q_dot, k0, geometry, convention)
    s = np.linspace(0.0, 1.0, n_samples)
    T_ex = _exact(T_s, beta, s)
    T_ex[-1] = T_s
    T_lin = T_s + 0.5 * beta * T_s * (1.0 - s**2)
    return TemperatureProfile(
        geometry=geometry, T_s=T_s, q_dot=q_dot, k0=k0, r=s * geometry.length,
        T_exact=T_ex, T_linearized=T_lin,
        core_delta_exact=float(_excess(T_s, beta, 0.0)),
        core_delta_linearized=0.5 * beta * T_s, convention=convention,
    )


def profile_sphere(T_s, q_dot, k0, r0, n_samples=101, convention=UNIT_LENGTH):
    return profile(T_s, q_dot, k0, Geometry.sphere(r0), n_samples, convention)


def core_temperature(T_s, q_dot, k0, geometry, convention=UNIT_LENGTH):
    _check(T_s, q_dot, k0, convention)
    beta = load_parameter(T_s, q_dot, k0, geometry, convention)
    d_ex, d_lin = float(_excess(T_s, beta, 0.0)), 0.5 * beta * T_s
    return CoreTemperature(exact=T_s + d_ex, linearized=T_s + d_lin, T_s=T_s, delta_exact=d_ex,
                           delta_linearized=d_lin)


def sphere_residual(T_s, q_dot, k0, r0, r, convention=UNIT_LENGTH):
    """Scaled residual of the closed form substituted into the radial operator.

    Derivatives are analytic (not differenced); the result is divided by the
    source term so it is dimensionless.
    """
    ell = length_scale(Geometry.sphere(r0), convention)
    c = q_dot * ell**2 / (3.0 * k0 * T_s**2)
    s = np.asarray(r, dtype=float) / r0
    # T^2 = T_s^2 (1 + c (1 - s^2));  T T' = (T^2)'/2 = -c T_s^2 s
    dflux = -3.0 * c * T_s**2 * s**2
    source = q_dot * ell**2 / k0
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = np.where(s > 0, dflux / s**2, -3.0 * c * T_s**2)
    return (lhs + source) / source if source else lhs


def solve_bvp_oracle(T_s, q_dot, k0, geometry, mesh=1024, convention=UNIT_LENGTH, tol=1e-12, max_iter=50):
    """Finite-difference solution of the nonlinear radial BVP by damped Newton.

    The operator is expanded as ``T T'' + T'^2 + ((n-1)/s) T T'`` on a uniform
    mesh of ``mesh`` intervals in ``s = r/R`` with central differences, so the
    scheme is second-order accurate in ``h``.  At ``s = 0`` the symmetry limit
    ``n T T''`` with the mirror node ``T_{-1} = T_1`` replaces the singular
    term.  The residual of the ``h^2``-scaled equations for ``theta = T/T_s``
    must fall below ``tol``.
    """
    _check(T_s, q_dot, k0, convention)
    if mesh < 64:
        raise DomainError("mesh must be >= 64")
    n = geometry.dimension
    h = 1.0 / mesh
    s = np.linspace(0.0, 1.0, mesh + 1)
    src = q_dot * length_scale(geometry, convention) ** 2 / k0 / T_s**2
    m = mesh  # unknowns theta_0 .. theta_{mesh-1}; theta_mesh = 1
    i = np.arange(1, m)
    c = (n - 1) / s[i]

    def residual(th):
        res = np.empty(m)
        res[0] = 2.0 * n * th[0] * (th[1] - th[0]) + src * h**2
        d = (th[i + 1] - th[i - 1]) / 2.0
        res[1:] = (th[i] * (th[i + 1] - 2.0 * th[i] + th[i - 1]) + d**2
                   + c * h * th[i] * d + src * h**2)
        return res

    def jacobian(th):
        ab = np.zeros((3, m))  # banded: upper, diagonal, lower
        ab[1, 0] = 2.0 * n * (th[1] - 2.0 * th[0])
        ab[0, 1] = 2.0 * n * th[0]
        d = (th[i + 1] - th[i - 1]) / 2.0
        ab[1, i] = th[i + 1] - 4.0 * th[i] + th[i - 1] + c * h * d
        ab[2, i - 1] = th[i] - d - 0.5 * c * h * th[i]
        upper = th[i] + d + 0.5 * c * h * th[i]
        ab[0, i[:-1] + 1] = upper[:-1]  # the last row couples to the fixed boundary node
        return ab

    theta = np.ones(mesh + 1)
    res = residual(theta)
    norm = np.max(np.abs(res))
    history = [norm]
    last_step = np.inf
    for _ in range(max_iter):
        if norm < tol and last_step < 1e-13:
            break
        step = solve_banded((1, 1), jacobian(theta), -res)
        damping = 1.0
        while True:
            trial = theta.copy()
            trial[:m] += damping * step
            if np.all(trial > 0):
                trial_res = residual(trial)
                trial_norm = np.max(np.abs(trial_res))
                if trial_norm < norm or (norm < tol and damping < 1e-3):
                    break
            damping *= 0.5
            if damping < 1e-8:
                raise ConvergenceError("Newton line search stalled", {"residuals": history})
        if trial_norm >= norm:
            # already at the rounding floor
            last_step = 0.0
            continue
        theta, res, norm = trial, trial_res, trial_norm
        last_step = damping * np.max(np.abs(step))
        history.append(norm)
    if norm >= tol:
        raise ConvergenceError(f"Newton did not converge in {max_iter} iterations",
                               {"residuals": history})

    T = T_s * theta
    T_lin = T_s + 0.5 * load_parameter(T_s, q_dot, k0, geometry, convention) * T_s * (1.0 - s**2)
    return TemperatureProfile(
        geometry=geometry, T_s=T_s, q_dot=q_dot, k0=k0, r=s * geometry.length,
        T_exact=T, T_linearized=T_lin, core_delta_exact=float(T[0] - T_s),
        core_delta_linearized=float(T_lin[0] - T_s), convention=convention,
    )


SCHEME_ORDER = 2


def convergence_order(T_s, q_dot, k0, geometry, meshes=(256, 512, 1024), convention=UNIT_LENGTH):
    """Observed order from max errors against the closed form on successive meshes."""
    errors = []
    for mesh in meshes:
        num = solve_bvp_oracle(T_s, q_dot, k0, geometry, mesh, convention)
        ref = profile(T_s, q_dot, k0, geometry, mesh + 1, convention)
        errors.append(np.max(np.abs(num.T_exact - ref.T_exact) / ref.T_exact))
    orders = [math.log(errors[i] / errors[i + 1]) / math.log(meshes[i + 1] / meshes[i])
              for i in range(len(meshes) - 1)]
    return errors, orders
