"""Independent numerical oracles used by several test modules."""

from __future__ import annotations

import numpy as np
from scipy import integrate

from quasifree.central import fiber_amplitude, split_center


def central_density(var: float):
    """Density of the 1-d measure with characteristic function ``exp(-var c^2 / 2)``,
    obtained by oscillatory Fourier inversion."""

    def p(w: float) -> float:
        val, _ = integrate.quad(lambda c: np.exp(-0.5 * var * c * c), 0, np.inf, weight="cos", wvar=abs(w))
        return max(val / np.pi, 0.0)

    return p


def fiber_integral(s, t) -> float:
    """``int sqrt(p_S0(w) p_T0(w)) fiber_amplitude(s, t, w) dw`` for a one-dimensional center."""
    ss, st = split_center(s), split_center(t)
    assert ss.center_dim == 1
    ps, pt = central_density(float(ss.s0[0, 0])), central_density(float(st.s0[0, 0]))
    width = 12 * np.sqrt(max(ss.s0[0, 0], st.s0[0, 0]))

    def f(w):
        dens = np.sqrt(ps(w) * pt(w))
        if dens == 0.0:
            return 0.0
        return dens * fiber_amplitude(s, t, [w]).value

    val, _ = integrate.quad(f, -width, width, epsabs=1e-11, epsrel=1e-10, limit=200)
    return float(val)


def boundary_closed_form(p1, p2) -> float:
    """Amplitude of two 2x2 hyperboloid points ``(x, y, z)``."""
    x, y, z = p1
    u, v, w = p2
    num = 2 * (z * z - x * x - y * y) ** 0.25 * (w * w - u * u - v * v) ** 0.25
    return float(num / np.sqrt((z + w) ** 2 - (x + u) ** 2 - (y + v) ** 2))


def fourier_shift_factor(m: np.ndarray, d: np.ndarray) -> float:
    """``int exp(-x.m.x/2) cos(d.x) dx / int exp(-x.m.x/2) dx`` by quadrature (dimension <= 2)."""
    r = m.shape[0]
    lim = 10 / np.sqrt(np.linalg.eigvalsh(m)[0])

    def num(*x):
        x = np.asarray(x)
        return np.exp(-0.5 * x @ m @ x) * np.cos(d @ x)

    def den(*x):
        x = np.asarray(x)
        return np.exp(-0.5 * x @ m @ x)

    opts = {"epsabs": 1e-12, "epsrel": 1e-11, "limit": 200}
    ranges = [(-lim, lim)] * r
    return integrate.nquad(num, ranges, opts=[opts] * r)[0] / integrate.nquad(den, ranges, opts=[opts] * r)[0]
