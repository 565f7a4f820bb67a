"""Presymplectic spaces, polarizations and the quadrature construction.

Coordinates: ``V = R^n`` with ``sigma(x, y) = x^T sigma y`` and complexification
``C^n`` with entrywise conjugation as real structure.  A polarization is a
hermitian positive matrix ``S`` with ``Im S = sigma / 2``; its conjugate form
is ``S.conj()`` and the induced inner product ``(x, y)_S`` has Gram matrix
``S + S.conj() = 2 Re S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forms
from .errors import (
    BoundaryPolarization,
    FormMismatch,
    InvalidMatrix,
    NotAPolarization,
    NotPresymplectic,
)
from .forms import RatioOperator, hermitian_part, max_norm
from .policy import get_policy


@dataclass(frozen=True, eq=False)
class PresymplecticSpace:
    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise InvalidMatrix(f"sigma must be square, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise InvalidMatrix("sigma has non-finite entries")
        object.__setattr__(self, "sigma", (s - s.T) / 2)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    @classmethod
    def trivial(cls, n: int) -> "PresymplecticSpace":
        return cls(np.zeros((n, n)))

    @classmethod
    def standard(cls, mu: float, modes: int = 1) -> "PresymplecticSpace":
        """Direct sum of ``modes`` planes with ``sigma = [[0, 2mu], [-2mu, 0]]``."""
        block = np.array([[0.0, 2 * mu], [-2 * mu, 0.0]])
        return cls(np.kron(np.eye(modes), block))

    def same_as(self, other: "PresymplecticSpace") -> bool:
        return self.dim == other.dim and np.allclose(self.sigma, other.sigma, rtol=0, atol=1e-12)

    def direct_sum(self, other: "PresymplecticSpace") -> "PresymplecticSpace":
        return PresymplecticSpace(_block_diag(self.sigma, other.sigma))

    def doubled(self) -> "PresymplecticSpace":
        """``(V + V, sigma (+) -sigma)``."""
        return PresymplecticSpace(_block_diag(self.sigma, -self.sigma))


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0],) * 2, dtype=np.result_type(a, b))
    out[: a.shape[0], : a.shape[0]] = a
    out[a.shape[0]:, a.shape[0]:] = b
    return out


@dataclass(frozen=True, eq=False)
class Polarization:
    space: PresymplecticSpace
    s: np.ndarray
    validation: forms.ValidationReport | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def conj(self) -> np.ndarray:
        return self.s.conj()

    @property
    def inner(self) -> np.ndarray:
        """Gram matrix of ``(x, y)_S = S + conj(S)`` (real symmetric)."""
        return 2 * self.s.real

    @property
    def real_part(self) -> np.ndarray:
        return self.s.real.copy()


def _check_polarization(space: PresymplecticSpace, s: np.ndarray) -> Polarization:
    pol = get_policy()
    s = forms.as_form(s).astype(complex)
    if s.shape != (space.dim, space.dim):
        raise FormMismatch(f"form has shape {s.shape}, space has dimension {space.dim}")
    scale = max(max_norm(s), 1.0)
    if max_norm(s - s.conj().T) > pol.sym_rel * scale * 10:
        raise NotAPolarization("form is not hermitian")
    s = hermitian_part(s)
    defect = max_norm(s.imag - space.sigma / 2)
    if defect > pol.compat_tol * scale:
        raise NotAPolarization(f"Im S differs from sigma/2 by {defect:.3e}")
    s = s.real + 0.5j * space.sigma
    report = forms.validate_psd(s)
    if not report.is_psd:
        raise NotAPolarization(
            f"S is not positive (min eigenvalue {report.min_eigenvalue:.3e})",
            min_eigenvalue=report.min_eigenvalue,
        )
    return Polarization(space, s, report)


def make_polarization(space: PresymplecticSpace, re_part) -> Polarization:
    """Polarization ``S = re_part + i sigma / 2``; raises NotAPolarization."""
    re = np.asarray(re_part, dtype=float)
    if re.shape != (space.dim, space.dim):
        raise FormMismatch(f"real part has shape {re.shape}, space has dimension {space.dim}")
    if not np.all(np.isfinite(re)):
        raise InvalidMatrix("real part has non-finite entries")
    re = (re + re.T) / 2
    return _check_polarization(space, re + 0.5j * space.sigma)


def polarization_from_matrix(space: PresymplecticSpace, s) -> Polarization:
    """Validate a full complex matrix as a polarization of ``space``."""
    return _check_polarization(space, np.asarray(s))


def hyperboloid_polarization(mu: float, x: float, y: float, z: float) -> Polarization:
    """The 2x2 polarization ``[[z + x, y + i mu], [y - i mu, z - x]]``."""
    space = PresymplecticSpace.standard(mu)
    return make_polarization(space, [[z + x, y], [y, z - x]])


def boundary_polarization(mu: float, x: float, y: float) -> Polarization:
    """Boundary point of the hyperboloid family: ``z^2 = x^2 + y^2 + mu^2``."""
    return hyperboloid_polarization(mu, x, y, float(np.sqrt(x * x + y * y + mu * mu)))


def direct_sum(p: Polarization, q: Polarization) -> Polarization:
    return Polarization(p.space.direct_sum(q.space), _block_diag(p.s, q.s))


def covariance_operator(pol: Polarization) -> RatioOperator:
    """``(S + conj S) \\ S``; spectrum in [0, 1]."""
    return forms.ratio_operator(pol.inner, pol.s)


@dataclass(frozen=True)
class PolarizationClass:
    fock_dim: int
    central_dim: int
    generic_dim: int
    in_boundary: bool
    eigenvalues: np.ndarray

    def as_dict(self) -> dict:
        return {
            "fock_dim": self.fock_dim,
            "central_dim": self.central_dim,
            "generic_dim": self.generic_dim,
            "in_boundary": self.in_boundary,
            "eigenvalues": self.eigenvalues.tolist(),
        }


def classify(pol: Polarization) -> PolarizationClass:
    w = covariance_operator(pol).eigenvalues().real
    win = get_policy().spectral_window
    fock = (np.abs(w) <= win) | (np.abs(w - 1) <= win)
    central = np.abs(w - 0.5) <= win
    return PolarizationClass(
        fock_dim=int(fock.sum()),
        central_dim=int(central.sum()),
        generic_dim=int((~fock & ~central).sum()),
        in_boundary=bool(fock.any()),
        eigenvalues=w,
    )


def modular_flow(pol: Polarization, t: float) -> np.ndarray:
    """``exp(itH) = SS^{-it} (1 - SS)^{it}`` as an n x n matrix on V.

    The result is real and preserves both ``S`` and ``sigma``.
    """
    cov = covariance_operator(pol)
    if cov.rank < pol.dim:
        raise BoundaryPolarization("S + conj(S) is degenerate; the flow lives on a quotient")
    w = cov.eigenvalues().real
    win = get_policy().spectral_window
    if np.any(w <= win) or np.any(w >= 1 - win):
        raise BoundaryPolarization("polarization is in the boundary")
    flow = cov.apply(lambda lam: np.exp(1j * t * np.log((1 - lam) / lam)))
    return forms.realify(flow.operator, tol=1e-9)


def is_presymplectic(space: PresymplecticSpace, phi: np.ndarray) -> bool:
    tol = get_policy().presymplectic_tol
    defect = max_norm(phi.T @ space.sigma @ phi - space.sigma)
    return defect <= tol * max(max_norm(space.sigma), 1.0)


def apply_automorphism(pol: Polarization, phi) -> Polarization:
    """Pull back ``S`` along a presymplectic automorphism: ``phi^T S phi``."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (pol.dim, pol.dim):
        raise FormMismatch(f"phi has shape {phi.shape}")
    if not is_presymplectic(pol.space, phi):
        raise NotPresymplectic("phi does not preserve sigma")
    if np.linalg.matrix_rank(phi) < pol.dim:
        raise NotPresymplectic("phi is not invertible")
    return _check_polarization(pol.space, phi.T @ pol.s @ phi)


def rotation_pi4(n: int) -> np.ndarray:
    """``R(x (+) y) = (x - y)/sqrt2 (+) (x + y)/sqrt2`` on ``R^n (+) R^n``."""
    eye = np.eye(n)
    return np.block([[eye, -eye], [eye, eye]]) / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class Quadrature:
    base: Polarization
    mean: np.ndarray
    p: Polarization
    rotated_p: np.ndarray

    @property
    def doubled_space(self) -> PresymplecticSpace:
        return self.p.space


def quadrature(pol: Polarization) -> Quadrature:
    """Purification ``P = [[S, G], [G, conj S]]`` on ``(V+V, sigma (+) -sigma)``
    with ``G = S # conj(S)``."""
    s, sb = pol.s, pol.conj
    # S # conj(S) is invariant under conjugation, hence real
    g = forms.pw_geometric_mean(s, sb).real
    p = np.block([[s, g], [g, sb]])
    rotated = 0.5 * np.block([[s + sb + 2 * g, sb - s], [sb - s, s + sb - 2 * g]])
    return Quadrature(pol, g, _check_polarization(pol.space.doubled(), p), rotated)


def quadrature_spectrum(q: Quadrature) -> np.ndarray:
    return covariance_operator(q.p).eigenvalues().real


def spectral_projections(q: Quadrature) -> dict:
    """Spectral projections of ``(P + conj P) \\ P`` for eigenvalues 0, 1/2, 1,
    as matrices in the orthonormal basis of ``P + conj P``."""
    cov = covariance_operator(q.p)
    h = hermitian_part(cov.matrix)
    w, u = np.linalg.eigh(h)
    out = {}
    for label, target in (("0", 0.0), ("half", 0.5), ("1", 1.0)):
        sel = np.abs(w - target) <= 0.25
        out[label] = u[:, sel] @ u[:, sel].conj().T
    return out


@dataclass(frozen=True)
class CheckReport:
    name: str
    residuals: dict
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "residuals": self.residuals, **self.detail}


def ef_block_checks(p: Quadrature, q: Quadrature, tol: float = 1e-8) -> CheckReport:
    """Properties of ``(E - F)^2`` for two quadratures of the same space.

    ``E`` is the eigenvalue-1 spectral projection of ``P``; ``F`` is the
    compression of that of ``Q`` to the complement of the central subspace,
    both written in the ``(P + conj P)``-orthonormal basis.
    """
    if not p.doubled_space.same_as(q.doubled_space):
        raise FormMismatch("quadratures live on different spaces")
    cov_p = covariance_operator(p.p)
    cov_q = covariance_operator(q.p)
    if cov_p.rank != cov_q.rank or not forms.same_kernel(p.p.inner, q.p.inner):
        raise FormMismatch("P + conj P and Q + conj Q have different kernels")
    # (P + conj P)-orthonormal coordinates are real, so conjugation is entrywise
    pm = hermitian_part(cov_p.matrix)
    qm = cov_q.in_basis_of(cov_p)
    w, u = np.linalg.eigh(pm)
    half = np.abs(w - 0.5) <= 0.25
    one = w > 0.75
    e0 = u[:, half] @ u[:, half].conj().T
    e = u[:, one] @ u[:, one].conj().T
    # spectrum of qm is {0, 1/2, 1}: the eigenvalue-1 projection is qm (2 qm - 1)
    f1 = qm @ (2 * qm - np.eye(qm.shape[0]))
    comp = np.eye(qm.shape[0]) - e0
    f = comp @ f1 @ comp
    d = e - f
    d2 = d @ d
    neg = float(np.linalg.eigvalsh(hermitian_part(d2))[-1]) if d2.size else 0.0
    conj_res = max_norm(d.conj() + d)
    comm = max(max_norm(e @ d2 - d2 @ e), max_norm(f @ d2 - d2 @ f))
    residuals = {"negativity": neg, "conjugation": conj_res, "commutators": comm}
    passed = neg <= tol and conj_res <= tol and comm <= tol
    return CheckReport("ef_blocks", residuals, passed, {"ef_sq_norm": max_norm(d2)})
