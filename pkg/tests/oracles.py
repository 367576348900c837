"""Reference computations that share no code with the package."""

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq


def bubble_density(r, lam, h=1.0):
    """``h e^v`` of the radial Liouville profile."""
    return 8.0 * lam**2 / (1.0 + (lam * r) ** 2) ** 2


def radial_mass(lam, r, h=1.0):
    """``(1/2pi) int_{B_r} h e^v`` by adaptive 1-D quadrature."""
    val, _ = quad(lambda s: bubble_density(s, lam, h) * s, 0.0, r, epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def _shoot(k, r0=1e-7):
    """Integrate ``w'' + w'/r + k e^w = 0``, ``w(0) = 0``; return ``(w(1), w'(1))``."""
    def rhs(r, y):
        return [y[1], -y[1] / r - k * np.exp(y[0])]

    # series start avoids the 1/r singularity
    y0 = [-k * r0**2 / 4, -k * r0 / 2]
    sol = solve_ivp(rhs, (r0, 1.0), y0, method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[0, -1], sol.y[1, -1]


def radial_meanfield(rho):
    """``(u(0), sup|u|)`` for the radial solution of
    ``u'' + u'/r + rho e^u / int_B e^u = 0`` with ``u(1) = 0``.

    Write ``u = u(0) + w``.  Then ``w`` solves the same ODE with constant
    ``k = mu e^{u(0)}`` and the flux identity ``2 pi w'(1) = -rho`` fixes
    ``k``; finally ``u(0) = -w(1)``.  One scalar root find.
    """
    if rho == 0:
        return 0.0, 0.0
    k = brentq(lambda k: 2 * np.pi * _shoot(k)[1] + rho, 1e-12, 1e4, xtol=1e-15, rtol=1e-14)
    a = -float(_shoot(k)[0])
    return a, abs(a)


def dense_circle_oscillation(f, center, r, n=4096):
    t = 2 * np.pi * np.arange(n) / n
    v = f(center[0] + r * np.cos(t), center[1] + r * np.sin(t))
    return float(v.max() - v.min())
