"""Central decomposition over ``V0 = ker sigma``.

Quotient objects on ``V / V0`` are written in a chart ``W``: a Euclidean
orthonormal basis of the complement of ``V0``.  The chart depends only on
``sigma``, so the dotted forms of two polarizations share coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import forms
from .amplitude import AmplitudeResult, exponent_form, transition_amplitude
from .ccr import (
    CheckReport,
    Polarization,
    PresymplecticSpace,
    polarization_from_matrix,
    quadrature,
    rotation_pi4,
)
from .errors import DegenerateCenter, FormMismatch, InvalidParameter
from .policy import get_policy


@dataclass(frozen=True, eq=False)
class CenterSplit:
    """Splitting of a polarization along ``V0 = ker sigma``.

    Attributes
    ----------
    v0_basis : ndarray, shape (n, k)
        Orthonormal basis of ``ker sigma``.
    chart : ndarray, shape (n, n - k)
        Orthonormal basis of the Euclidean complement of ``V0``.
    v1_basis_s : ndarray, shape (n, n - k)
        ``(1 - E0) chart``, spanning the ``(S + conj S)``-orthogonal
        complement of ``V0``.
    projection : ndarray, shape (n, n)
        ``E0``, the ``(S + conj S)``-orthogonal projection onto ``V0``.
    s_dot : Polarization
        Quotient polarization in chart coordinates.
    s0 : ndarray, shape (k, k)
        Restriction of ``S`` to ``V0`` (real).
    """

    v0_basis: np.ndarray
    chart: np.ndarray
    v1_basis_s: np.ndarray
    projection: np.ndarray
    s_dot: Polarization
    s0: np.ndarray

    @property
    def center_dim(self) -> int:
        return self.v0_basis.shape[1]


def center_basis(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of ``ker sigma`` and of its orthogonal complement."""
    n = sigma.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    u, s, _ = np.linalg.svd(sigma)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > get_policy().center_rel * top)) if top > 0 else 0
    return u[:, rank:], u[:, :rank]


def _center_projection(m: np.ndarray, v0: np.ndarray) -> np.ndarray:
    """``m``-orthogonal projection onto span(v0); pseudo-inverse on null directions."""
    if v0.shape[1] == 0:
        return np.zeros_like(m)
    g = v0.T @ m @ v0
    return v0 @ np.linalg.pinv((g + g.T) / 2, rcond=1e-12, hermitian=True) @ v0.T @ m


def split_center(pol: Polarization) -> CenterSplit:
    sigma = pol.space.sigma
    v0, w = center_basis(sigma)
    m = pol.inner
    e0 = _center_projection(m, v0)
    v1 = (np.eye(pol.dim) - e0) @ w
    space = PresymplecticSpace(w.T @ sigma @ w)
    s_dot = polarization_from_matrix(space, v1.T @ pol.s @ v1)
    s0 = v0.T @ pol.s.real @ v0
    return CenterSplit(v0, w, v1, e0, s_dot, (s0 + s0.T) / 2)


def _check_pair(s: Polarization, t: Polarization) -> None:
    if not s.space.same_as(t.space):
        raise FormMismatch("polarizations live on different presymplectic spaces")


def _omega(omega, k: int) -> np.ndarray:
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if w.shape != (k,):
        raise InvalidParameter(f"omega must have {k} entries, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidParameter("omega has non-finite entries")
    return w


def delta_map(s: Polarization, t: Polarization) -> np.ndarray:
    """Matrix ``L`` with ``delta_omega(s, t, omega) = L @ omega``."""
    _check_pair(s, t)
    ss, st = split_center(s), split_center(t)
    return ss.chart.T @ (ss.projection - st.projection).T @ ss.v0_basis


def delta_omega(s: Polarization, t: Polarization, omega) -> np.ndarray:
    """Chart coordinates of ``x -> omega((E0 - F0) x)`` on ``V / V0``."""
    lmap = delta_map(s, t)
    return lmap @ _omega(omega, lmap.shape[1])


def _inverse_form(m: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """``m^{-1}(v) = v . alpha`` with ``m alpha = v``; returns value and range residual."""
    if v.size == 0:
        return 0.0, 0.0
    alpha, *_ = np.linalg.lstsq(m, v, rcond=None)
    resid = float(np.linalg.norm(m @ alpha - v)) / max(float(np.linalg.norm(v)), 1e-300)
    return float(v @ alpha), resid


def fiber_amplitude(s: Polarization, t: Polarization, omega) -> AmplitudeResult:
    """Amplitude between the fiber states over the central character ``omega``."""
    _check_pair(s, t)
    ss, st = split_center(s), split_center(t)
    d = delta_omega(s, t, omega)
    base = transition_amplitude(ss.s_dot, st.s_dot)
    diag = dict(base.diagnostics)
    diag["delta_omega"] = d.tolist()
    if not base.kernel_match:
        return AmplitudeResult(0.0, False, 0, "fiber", diag)
    m = exponent_form(ss.s_dot).a + exponent_form(st.s_dot).a
    q, resid = _inverse_form(m, d)
    diag["range_residual"] = resid
    if resid > 1e-8:
        diag["unbounded_shift"] = True
        return AmplitudeResult(0.0, True, base.quotient_dim, "fiber", diag)
    diag["shift_exponent"] = q / 2
    return AmplitudeResult(base.value * float(np.exp(-q / 2)), True, base.quotient_dim, "fiber", diag)


def integrated_amplitude(s: Polarization, t: Polarization) -> AmplitudeResult:
    """Integrate fiber amplitudes against ``sqrt(nu_S0 nu_T0)`` in closed form.

    ``nu_S0`` is the centred gaussian on ``R^k`` with covariance ``S0``.  The
    integrand is gaussian in ``omega``, so the integral is a determinant.
    """
    _check_pair(s, t)
    ss, st = split_center(s), split_center(t)
    k = ss.center_dim
    s0, t0 = ss.s0, st.s0
    for name, m in (("S0", s0), ("T0", t0)):
        if k and np.linalg.eigvalsh(m)[0] <= forms.kernel_threshold(np.linalg.eigvalsh(m)):
            raise DegenerateCenter(f"{name} is degenerate on ker sigma")
    base = transition_amplitude(ss.s_dot, st.s_dot)
    if not base.kernel_match:
        return AmplitudeResult(0.0, False, 0, "integral", dict(base.diagnostics))
    if k == 0:
        return AmplitudeResult(base.value, True, base.quotient_dim, "integral", dict(base.diagnostics))
    lmap = delta_map(s, t)
    m = exponent_form(ss.s_dot).a + exponent_form(st.s_dot).a
    quad = lmap.T @ np.linalg.lstsq(m, lmap, rcond=None)[0] if m.size else np.zeros((k, k))
    quad = (quad + quad.T) / 2
    kmat = (np.linalg.inv(s0) + np.linalg.inv(t0)) / 4 + quad / 2
    _, ld_k = np.linalg.slogdet(kmat)
    _, ld_s = np.linalg.slogdet(s0)
    _, ld_t = np.linalg.slogdet(t0)
    log_mass = -0.5 * k * np.log(2) - 0.25 * (ld_s + ld_t) - 0.5 * ld_k
    value = base.value * float(np.exp(log_mass))
    diag = dict(base.diagnostics)
    diag["center_dim"] = k
    return AmplitudeResult(min(value, 1.0), True, base.quotient_dim, "integral", diag)


def integrated_amplitude_mc(s: Polarization, t: Polarization, seed: int, samples: int = 100_000) -> AmplitudeResult:
    """Monte Carlo version of :func:`integrated_amplitude`.

    Samples ``omega`` from the normalized ``sqrt(nu_S0 nu_T0)`` and averages
    the fiber exponential; the total mass is the gaussian Hellinger affinity.
    """
    _check_pair(s, t)
    ss, st = split_center(s), split_center(t)
    k = ss.center_dim
    base = transition_amplitude(ss.s_dot, st.s_dot)
    if k == 0 or not base.kernel_match:
        return integrated_amplitude(s, t)
    s0i, t0i = np.linalg.inv(ss.s0), np.linalg.inv(st.s0)
    prec = (s0i + t0i) / 2
    cov = np.linalg.inv(prec)
    mass = np.linalg.det(ss.s0) ** -0.25 * np.linalg.det(st.s0) ** -0.25 * np.linalg.det(cov) ** 0.5
    rng = np.random.default_rng(seed)
    om = rng.multivariate_normal(np.zeros(k), cov, size=samples)
    lmap = delta_map(s, t)
    m = exponent_form(ss.s_dot).a + exponent_form(st.s_dot).a
    d = om @ lmap.T
    q = np.einsum("ij,ij->i", d, np.linalg.lstsq(m, d.T, rcond=None)[0].T)
    vals = np.exp(-q / 2)
    value = base.value * mass * vals.mean()
    se = base.value * mass * vals.std(ddof=1) / np.sqrt(samples)
    diag = {"standard_error": float(se), "samples": samples}
    return AmplitudeResult(float(value), True, base.quotient_dim, "integral_mc", diag)


def central_characteristic(pol: Polarization, x, seed: int | None = None, samples: int = 0) -> dict:
    """``phi_S(e^{ix}) = exp(-S(x, x) / 2)`` against the average of fiber values.

    The fiber state over ``omega`` takes ``exp(i omega(E0 x)) exp(-S((1 - E0) x) / 2)``
    on ``e^{ix}``; averaging over ``nu_S0`` gives the left-hand side.  The average
    is computed in closed form and, when ``samples > 0``, by Monte Carlo.
    """
    x = np.asarray(x, dtype=float)
    sp = split_center(pol)
    lhs = float(np.exp(-0.5 * np.real(x @ pol.s @ x)))
    y = sp.projection @ x
    c = sp.v0_basis.T @ y
    r = x - y
    fiber = float(np.exp(-0.5 * np.real(r @ pol.s @ r)))
    closed = fiber * float(np.exp(-0.5 * c @ sp.s0 @ c))
    out = {"direct": lhs, "fiber_average": closed, "residual": abs(lhs - closed)}
    if samples > 0:
        rng = np.random.default_rng(seed)
        om = rng.multivariate_normal(np.zeros(sp.center_dim), sp.s0, size=samples)
        vals = np.cos(om @ c) * fiber
        out["monte_carlo"] = float(vals.mean())
        out["standard_error"] = float(vals.std(ddof=1) / np.sqrt(samples))
    return out


def _quotient_inner(m: np.ndarray, center: np.ndarray, chart: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    e0 = _center_projection(m, center)
    comp = np.eye(m.shape[0]) - e0
    q = chart.T @ comp.T @ m @ comp @ chart
    return (q + q.T) / 2, e0


def doubled_correction_check(s: Polarization, t: Polarization, omega, tol: float = 1e-7) -> CheckReport:
    """Compare ``G^{-1}(D omega)`` on the doubled space with ``(A' + B')^{-1}(delta omega)``.

    The quadratures are rotated by ``pi/4``; the doubled center is
    ``V0 (+) V0`` and the character acts as ``sqrt(2) omega`` on the first
    slot.  ``G`` is the sum of the quotient inner products of both
    quadratures.
    """
    _check_pair(s, t)
    n = s.dim
    v0, w = center_basis(s.space.sigma)
    k = v0.shape[1]
    om = _omega(omega, k)
    rot = rotation_pi4(n)
    zero_v, zero_w = np.zeros_like(v0), np.zeros_like(w)
    center2 = np.block([[v0, zero_v], [zero_v, v0]])
    chart2 = np.block([[w, zero_w], [zero_w, w]])
    omega2 = np.concatenate([np.sqrt(2) * om, np.zeros(k)])
    g = np.zeros((chart2.shape[1],) * 2)
    projections = []
    for pol in (s, t):
        p_rot = rot.T @ quadrature(pol).p.s @ rot
        q, e0 = _quotient_inner(2 * p_rot.real, center2, chart2)
        g += q
        projections.append(e0)
    d_omega = chart2.T @ (projections[0] - projections[1]).T @ center2 @ omega2
    lhs, resid_l = _inverse_form(g, d_omega)
    d = delta_omega(s, t, om)
    ss, st = split_center(s), split_center(t)
    m = exponent_form(ss.s_dot).a + exponent_form(st.s_dot).a
    rhs, resid_r = _inverse_form(m, d)
    residual = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs), 1.0)
    return CheckReport(
        "doubled_correction",
        {"correction": residual, "range_lhs": resid_l, "range_rhs": resid_r},
        residual <= tol * scale,
        {"lhs": lhs, "rhs": rhs},
    )
