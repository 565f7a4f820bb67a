"""Transition amplitudes between quasifree states.

The square-root density of the state of a polarization ``S`` is the gaussian
``N_S^{-1/2} exp(-A(x, x) / 2)`` with exponent form ``A = Re S + S # conj(S)``.
Amplitudes are overlaps of these gaussians, computed on the quotient by the
common kernel of ``S + conj S`` and ``T + conj T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import forms
from .ccr import (
    CheckReport,
    Polarization,
    PresymplecticSpace,
    make_polarization,
    quadrature,
)
from .errors import (
    DegenerateForm,
    FormMismatch,
    InsufficientSamples,
    InvalidBasis,
    InvalidParameter,
    NotPositive,
    UnsupportedDegenerate,
    UnsupportedDimension,
)
from .forms import max_norm

METHODS = ("theorem", "gaussian", "closed_form", "quadrature", "monte_carlo")


@dataclass(frozen=True, eq=False)
class ExponentForm:
    """Exponent ``A`` (real symmetric) and normalization ``N = int exp(-A)``."""

    a: np.ndarray
    normalization: float
    rank: int


@dataclass(frozen=True)
class AmplitudeResult:
    value: float
    kernel_match: bool
    quotient_dim: int
    method: str
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "kernel_match": self.kernel_match,
            "quotient_dim": self.quotient_dim,
            "method": self.method,
            "residuals": self.diagnostics,
        }


def _real_symmetric(m: np.ndarray, what: str, rtol: float = 1e-10) -> np.ndarray:
    m = np.asarray(m)
    if np.iscomplexobj(m):
        if max_norm(m.imag) > rtol * max(max_norm(m), 1.0):
            raise FormMismatch(f"{what} is not real")
        m = m.real
    return (m + m.T) / 2


def _normalization(a: np.ndarray) -> tuple[float, int]:
    w = np.linalg.eigvalsh(a) if a.size else np.zeros(0)
    keep = w > forms.kernel_threshold(w)
    r = int(keep.sum())
    return float(np.pi ** (r / 2) / np.sqrt(np.prod(w[keep]))), r


def exponent_form(pol: Polarization) -> ExponentForm:
    """``A = (S + conj S) / 2 + S # conj(S)``, so that ``2A = (sqrt S + sqrt conj S)^2``."""
    # S # conj(S) is exactly real; its imaginary part is rounding that grows
    # with the conditioning of S, so only gross violations are rejected.
    g = forms.pw_geometric_mean(pol.s, pol.conj)
    a = _real_symmetric(pol.s.real + g, "exponent form", rtol=1e-6)
    norm, r = _normalization(a)
    return ExponentForm(a, norm, r)


def sqrt_density(pol: Polarization) -> ExponentForm:
    """Exponent form of a polarization whose exponent is nondegenerate."""
    ef = exponent_form(pol)
    if ef.rank < pol.dim:
        raise DegenerateForm("exponent form is degenerate; the density lives on a quotient")
    return ef


def _check_pair(s: Polarization, t: Polarization) -> None:
    if not s.space.same_as(t.space):
        raise FormMismatch("polarizations live on different presymplectic spaces")


def _common_quotient(m_s: np.ndarray, m_t: np.ndarray) -> tuple[bool, np.ndarray, float]:
    """Kernel comparison of two positive forms and a Euclidean orthonormal
    basis of the common range."""
    ks = forms.kernel_basis(m_s)
    kt = forms.kernel_basis(m_t)
    gap = forms.subspace_gap(ks, kt)
    match = gap <= forms.get_policy().kernel_angle
    return match, forms.range_basis(m_s), gap


def _logdet_pd(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    sign, ld = np.linalg.slogdet(m)
    if sign <= 0:
        return -np.inf
    return float(ld)


def _cond(m: np.ndarray) -> float:
    if m.size == 0:
        return 1.0
    w = np.linalg.eigvalsh(m)
    return float(w[-1] / w[0]) if w[0] > 0 else float("inf")


def _equal_forms(a: np.ndarray, b: np.ndarray) -> bool:
    return max_norm(a - b) <= 1e-12 * max(max_norm(a), max_norm(b), 1e-300)


def _overlap_from_exponents(a: np.ndarray, b: np.ndarray, method: str, match: bool, gap: float) -> AmplitudeResult:
    """``sqrt(det(2 a # b) / det(a + b))`` for positive definite ``a``, ``b``."""
    r = a.shape[0]
    diag = {"kernel_gap": gap, "cond_a": _cond(a), "cond_b": _cond(b)}
    if _equal_forms(a, b):
        return AmplitudeResult(1.0, match, r, method, diag)
    g = forms.pw_geometric_mean(a, b)
    g = _real_symmetric(g, "geometric mean")
    s = a + b
    diag["mean_domination"] = float(np.linalg.eigvalsh(s - 2 * g)[0]) if r else 0.0
    value = float(np.exp(0.5 * (_logdet_pd(2 * g) - _logdet_pd(s))))
    return AmplitudeResult(float(min(max(value, 0.0), 1.0)), match, r, method, diag)


def transition_amplitude(s: Polarization, t: Polarization) -> AmplitudeResult:
    """Overlap of the square-root densities of two quasifree states.

    Returns ``sqrt(det(2 A # B / (A + B)))`` on the quotient by the common
    kernel of ``S + conj S`` and ``T + conj T``; zero when those kernels
    differ.
    """
    _check_pair(s, t)
    match, u, gap = _common_quotient(s.inner, t.inner)
    if not match:
        return AmplitudeResult(0.0, False, 0, "theorem", {"kernel_gap": gap})
    a = u.T @ exponent_form(s).a @ u
    b = u.T @ exponent_form(t).a @ u
    return _overlap_from_exponents(a, b, "theorem", True, gap)


def gaussian_amplitude(a, b) -> AmplitudeResult:
    """Hellinger affinity of centred gaussians with precision forms ``a``, ``b``.

    Equals ``det(a)^{1/4} det(b)^{1/4} / det((a + b) / 2)^{1/2}`` on the
    common range, computed through relative determinants.
    """
    a = _real_symmetric(forms.as_form(a), "a")
    b = _real_symmetric(forms.as_form(b), "b")
    if a.shape != b.shape:
        raise FormMismatch(f"shapes {a.shape} and {b.shape} differ")
    for m, name in ((a, "a"), (b, "b")):
        if not forms.validate_psd(m).is_psd:
            raise NotPositive(f"{name} is not positive semidefinite")
    match, u, gap = _common_quotient(a, b)
    if not match:
        return AmplitudeResult(0.0, False, 0, "gaussian", {"kernel_gap": gap})
    m = (a + b) / 2
    r = u.shape[1]
    if _equal_forms(a, b):
        return AmplitudeResult(1.0, True, r, "gaussian", {"kernel_gap": gap})
    value = (forms.relative_determinant(a, m) * forms.relative_determinant(b, m)) ** 0.25
    return AmplitudeResult(float(min(value, 1.0)), True, r, "gaussian", {"kernel_gap": gap})


def _quotient_exponents(s: Polarization, t: Polarization):
    _check_pair(s, t)
    match, u, gap = _common_quotient(s.inner, t.inner)
    if not match:
        return None, None, gap
    return u.T @ exponent_form(s).a @ u, u.T @ exponent_form(t).a @ u, gap


def amplitude_oracle(
    s: Polarization,
    t: Polarization,
    method: str = "closed_form",
    seed: int | None = None,
    samples: int = 100_000,
) -> AmplitudeResult:
    """Amplitude as a ratio of gaussian integrals.

    ``closed_form`` evaluates ``int exp(-(A+B)/2) / sqrt(int exp(-A) int exp(-B))``
    with determinants, ``quadrature`` integrates numerically (quotient
    dimension at most 3), and ``monte_carlo`` importance-samples from
    ``N(0, ((A + B) / 2)^{-1})`` and reports a standard error.
    """
    if method not in ("closed_form", "quadrature", "monte_carlo"):
        raise InvalidParameter(f"unknown oracle method {method!r}")
    if method == "monte_carlo":
        if samples < 1000:
            raise InsufficientSamples(f"monte carlo needs at least 1000 samples, got {samples}")
        if seed is None:
            raise InvalidParameter("monte carlo requires an explicit seed")
    a, b, gap = _quotient_exponents(s, t)
    if a is None:
        return AmplitudeResult(0.0, False, 0, method, {"kernel_gap": gap})
    r = a.shape[0]
    if method == "quadrature" and r > 3:
        raise UnsupportedDimension(f"quadrature oracle supports dimension <= 3, got {r}")
    diag = {"kernel_gap": gap}
    if method == "closed_form":
        log_num = 0.5 * r * np.log(np.pi) - 0.5 * _logdet_pd((a + b) / 2)
        log_den = 0.5 * r * np.log(np.pi) - 0.25 * (_logdet_pd(a) + _logdet_pd(b))
        value = float(np.exp(log_num - log_den))
    elif method == "quadrature":
        value, err = _quadrature_overlap(a, b)
        diag["quadrature_error"] = err
    else:
        value, se = _monte_carlo_overlap(a, b, seed, samples)
        diag["standard_error"] = se
        diag["samples"] = samples
    return AmplitudeResult(value, True, r, method, diag)


def _gauss_integral(q: np.ndarray) -> tuple[float, float]:
    """``int_{R^r} exp(-y^T q y) dy`` by adaptive quadrature."""
    r = q.shape[0]

    def f(*y):
        v = np.asarray(y)
        return np.exp(-v @ q @ v)

    val, err = integrate.nquad(f, [(-np.inf, np.inf)] * r, opts={"epsabs": 1e-13, "epsrel": 1e-11})
    return val, err


def _quadrature_overlap(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    r = a.shape[0]
    if r == 0:
        return 1.0, 0.0
    # whiten by (a + b) / 2; the Jacobians cancel in the ratio
    w, u = np.linalg.eigh((a + b) / 2)
    l = u / np.sqrt(w)
    at, bt = l.T @ a @ l, l.T @ b @ l
    num, e0 = _gauss_integral(np.eye(r))
    ia, e1 = _gauss_integral(at)
    ib, e2 = _gauss_integral(bt)
    value = num / np.sqrt(ia * ib)
    rel = e0 / num + 0.5 * (e1 / ia + e2 / ib)
    return float(value), float(value * rel)


def _monte_carlo_overlap(a: np.ndarray, b: np.ndarray, seed: int, samples: int) -> tuple[float, float]:
    r = a.shape[0]
    if r == 0:
        return 1.0, 0.0
    rng = np.random.default_rng(seed)
    c = a + b
    w, u = np.linalg.eigh(c / 2)
    x = rng.standard_normal((samples, r)) / np.sqrt(w) @ u.T
    # integrand / proposal density = const * exp(-(A + B)(x, x) / 4)
    weights = np.exp(-0.25 * np.einsum("ij,jk,ik->i", x, c, x))
    log_const = (
        0.5 * r * np.log(np.pi)
        - 0.5 * _logdet_pd(c / 4)
        + 0.25 * (_logdet_pd(a) + _logdet_pd(b))
        - 0.5 * r * np.log(np.pi)
    )
    const = np.exp(log_const)
    value = const * weights.mean()
    se = const * weights.std(ddof=1) / np.sqrt(samples)
    return float(value), float(se)


def twisted_convolution_gaussians(
    a: float, b: float, mu: float, amp_a: float = 1.0, amp_b: float = 1.0, m: float = 1.0
) -> tuple[float, float]:
    """Width and prefactor of the twisted convolution of two gaussians.

    For ``f = mu amp_a / (2 pi a) exp(-mu (s^2 + t^2) / 2a)`` and ``g`` likewise
    with ``b``, ``f * g = prefactor * exp(-mu (s^2 + t^2) / 2c)``.

    Returns
    -------
    c : float
        ``(a + b) / (ab + 1)``.
    prefactor : float
        ``amp_a amp_b m mu / (pi (a + b))``.
    """
    for name, v in (("a", a), ("b", b), ("mu", mu), ("amp_a", amp_a), ("amp_b", amp_b), ("m", m)):
        if not np.isfinite(v) or v <= 0:
            raise InvalidParameter(f"{name} must be positive, got {v}")
    return (a + b) / (a * b + 1), amp_a * amp_b * m * mu / (np.pi * (a + b))


def gaussian_profile(width: float, mu: float, amp: float = 1.0):
    """The function ``mu amp / (2 pi width) exp(-mu (s^2 + t^2) / (2 width))`` as
    a pair of 1-d factors ``(h_s, h_t)`` with ``f(s, t) = h_s(s) h_t(t)``."""
    k = mu / (2 * width)
    pre = mu * amp / (2 * np.pi * width)

    def hs(s):
        return pre * np.exp(-k * np.square(s))

    def ht(t):
        return np.exp(-k * np.square(t))

    return hs, ht


def twisted_convolution_numeric(f, g, s: float, t: float, mu: float, m: float = 1.0) -> complex:
    """``2m int f(s', t') g(s - s', t - t') exp(i mu (s t' - s' t)) ds' dt'``.

    ``f`` and ``g`` are separable, given as pairs of 1-d factors, so the plane
    integral is a product of two oscillatory line integrals.
    """
    fs, ft = f
    gs, gt = g

    def line(h1, h2, x, phase):
        re = integrate.quad(lambda u: h1(u) * h2(x - u) * np.cos(phase * u), -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12)[0]
        im = integrate.quad(lambda u: h1(u) * h2(x - u) * np.sin(phase * u), -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12)[0]
        return re + 1j * im

    # phase mu (s t' - s' t) splits into exp(-i mu t s') exp(i mu s t')
    return 2 * m * line(fs, gs, s, -mu * t) * line(ft, gt, t, mu * s)


def sqrt_width(mu: float) -> float:
    """Width ``c`` with ``c * c = 2 mu``: ``2 mu / (1 + sqrt(1 - 4 mu^2))``."""
    if not 0 < mu <= 0.5:
        raise InvalidParameter(f"mu must lie in (0, 1/2], got {mu}")
    return 2 * mu / (1 + np.sqrt(1 - 4 * mu * mu))


def quadrature_squaring_check(s: Polarization, t: Polarization, tol: float = 1e-7) -> CheckReport:
    """Compare the amplitude of the quadratures with the squared amplitude."""
    _check_pair(s, t)
    if s.dim and np.linalg.matrix_rank(s.space.sigma, tol=1e-9 * max(max_norm(s.space.sigma), 1e-300)) < s.dim:
        raise UnsupportedDegenerate("squaring identity is checked for nondegenerate sigma only")
    base = transition_amplitude(s, t)
    doubled = transition_amplitude(quadrature(s).p, quadrature(t).p)
    resid = abs(doubled.value - base.value ** 2)
    return CheckReport(
        "quadrature_squaring",
        {"squaring": resid},
        resid <= tol,
        {"amplitude": base.value, "doubled_amplitude": doubled.value},
    )


def restrict_polarization(pol: Polarization, basis) -> Polarization:
    """Pull back ``sigma`` and ``S`` along the columns of ``basis``."""
    b = np.asarray(basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != pol.dim:
        raise InvalidBasis(f"basis must have {pol.dim} rows, got shape {b.shape}")
    if b.shape[1] == 0 or np.linalg.matrix_rank(b) < b.shape[1]:
        raise InvalidBasis("basis columns are linearly dependent")
    space = PresymplecticSpace(b.T @ pol.space.sigma @ b)
    return make_polarization(space, b.T @ pol.s.real @ b)
