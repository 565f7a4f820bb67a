"""Calculus of positive sesquilinear forms on C^n.

A form is stored as its Gram matrix ``F`` so that ``F(x, y) = x^H F y``.  The
ratio operator ``B \\ A`` of a form ``A`` dominated by a positive form ``B`` is
the operator on the Hilbert space of ``B`` (C^n modulo ker B) representing
``A``; it is stored as a matrix in a ``B``-orthonormal basis of the range of
``B``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ConvergenceFailure,
    FormMismatch,
    InvalidMatrix,
    InvalidParameter,
    NotDominated,
    NotEquivalent,
    NotPositive,
)
from .policy import get_policy


def as_form(m) -> np.ndarray:
    """Return ``m`` as a square, finite float or complex array."""
    a = np.asarray(m)
    if a.dtype.kind not in "fciub":
        raise InvalidMatrix(f"unsupported dtype {a.dtype}")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix has non-finite entries")
    if a.dtype.kind in "iub":
        a = a.astype(float)
    return a


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def realify(m: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Drop an imaginary part that is at most ``tol`` relative to ``m``."""
    if np.iscomplexobj(m):
        scale = max(np.max(np.abs(m), initial=0.0), 1.0)
        if np.max(np.abs(m.imag), initial=0.0) <= tol * scale:
            return np.ascontiguousarray(m.real)
    return m


def max_norm(m: np.ndarray) -> float:
    return float(np.max(np.abs(m), initial=0.0))


@dataclass(frozen=True)
class SpectralDecomp:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    kernel_rank: int

    @property
    def threshold(self) -> float:
        return kernel_threshold(self.eigenvalues)

    @property
    def range_mask(self) -> np.ndarray:
        return self.eigenvalues > self.threshold

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def kernel_threshold(eigenvalues: np.ndarray) -> float:
    pol = get_policy()
    top = float(np.max(eigenvalues, initial=0.0))
    return max(pol.ker_rel * top, pol.ker_floor)


def spectral(m) -> SpectralDecomp:
    """Eigendecomposition of the hermitian part of ``m`` (ascending)."""
    h = hermitian_part(as_form(m))
    w, u = np.linalg.eigh(h)
    kernel_rank = int(np.sum(w <= kernel_threshold(w)))
    return SpectralDecomp(w, u, kernel_rank)


@dataclass(frozen=True)
class ValidationReport:
    hermitian_defect: float
    min_eigenvalue: float
    max_eigenvalue: float
    kernel_rank: int
    is_hermitian: bool
    is_psd: bool

    @property
    def passed(self) -> bool:
        return self.is_hermitian and self.is_psd

    def as_dict(self) -> dict:
        return {
            "hermitian_defect": self.hermitian_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
            "kernel_rank": self.kernel_rank,
            "is_hermitian": self.is_hermitian,
            "is_psd": self.is_psd,
            "passed": self.passed,
        }


def psd_tolerance(eigenvalues: np.ndarray) -> float:
    return get_policy().psd_rel * max(float(np.max(eigenvalues, initial=0.0)), 1.0)


def validate_psd(form, tol: float | None = None) -> ValidationReport:
    """Check hermiticity and positivity of ``form``.

    ``tol`` overrides the relative positivity tolerance of the active policy.
    """
    m = as_form(form)
    pol = get_policy()
    scale = max_norm(m)
    defect = max_norm(m - m.conj().T)
    is_herm = defect <= pol.sym_rel * max(scale, np.finfo(float).tiny)
    w = np.linalg.eigvalsh(hermitian_part(m)) if m.size else np.zeros(0)
    rel = pol.psd_rel if tol is None else tol
    lo = float(w[0]) if w.size else 0.0
    hi = float(w[-1]) if w.size else 0.0
    is_psd = lo >= -rel * max(hi, 1.0)
    kernel_rank = int(np.sum(w <= kernel_threshold(w)))
    return ValidationReport(defect, lo, hi, kernel_rank, bool(is_herm), bool(is_psd))


def _require_psd(m: np.ndarray, name: str = "form") -> SpectralDecomp:
    sd = spectral(m)
    if sd.eigenvalues.size and sd.eigenvalues[0] < -psd_tolerance(sd.eigenvalues):
        raise NotPositive(f"{name} has eigenvalue {sd.eigenvalues[0]:.3e} < 0")
    return sd


def _clamped(sd: SpectralDecomp) -> np.ndarray:
    return np.where(sd.eigenvalues > 0, sd.eigenvalues, 0.0)


def psd_function(m, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply ``func`` to the (clamped) spectrum of a positive form."""
    m = as_form(m)
    sd = _require_psd(m)
    u = sd.eigenvectors
    out = (u * func(_clamped(sd))) @ u.conj().T
    return hermitian_part(realify(out) if np.isrealobj(m) else out)


def sqrt_form(a) -> np.ndarray:
    """Principal positive square root of a positive form."""
    return psd_function(a, np.sqrt)


def kernel_basis(m) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of a positive form."""
    sd = spectral(m)
    return sd.eigenvectors[:, ~sd.range_mask]


def range_basis(m) -> np.ndarray:
    sd = spectral(m)
    return sd.eigenvectors[:, sd.range_mask]


def subspace_gap(u: np.ndarray, v: np.ndarray) -> float:
    """Sine of the largest principal angle between two column spaces.

    Both inputs must have orthonormal columns.  Subspaces of different
    dimension are at gap 1.
    """
    if u.shape[1] != v.shape[1]:
        return 1.0
    if u.shape[1] == 0:
        return 0.0
    resid = v - u @ (u.conj().T @ v)
    return float(min(np.linalg.norm(resid, 2), 1.0))


def same_kernel(a, b) -> bool:
    return subspace_gap(kernel_basis(a), kernel_basis(b)) <= get_policy().kernel_angle


@dataclass(frozen=True)
class RatioOperator:
    """The operator ``denominator \\ numerator`` on the Hilbert space of the
    denominator.

    ``basis`` holds a denominator-orthonormal basis of its range (as columns in
    the original coordinates) and ``matrix`` the operator in that basis, so
    ``numerator(x, y) = (x | matrix y)`` in basis coordinates.
    """

    denominator: np.ndarray
    numerator: np.ndarray
    matrix: np.ndarray
    basis: np.ndarray

    @property
    def rank(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.denominator.shape[0]

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        """Coordinates of (the class of) ``x`` in the orthonormal basis."""
        return self.basis.conj().T @ (self.denominator @ x)

    @property
    def operator(self) -> np.ndarray:
        """The operator in original coordinates; it annihilates the kernel."""
        return self.basis @ self.matrix @ self.basis.conj().T @ self.denominator

    def eigenvalues(self) -> np.ndarray:
        if np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=1e-12 * max(max_norm(self.matrix), 1.0)):
            return np.linalg.eigvalsh(hermitian_part(self.matrix))
        return np.sort_complex(np.linalg.eigvals(self.matrix))

    def apply(self, func: Callable[[np.ndarray], np.ndarray]) -> "RatioOperator":
        """Functional calculus for a self-adjoint ratio operator."""
        h = hermitian_part(self.matrix)
        w, u = np.linalg.eigh(h)
        return from_matrix(self.denominator, (u * func(w)) @ u.conj().T, self.basis)

    def in_basis_of(self, other: "RatioOperator") -> np.ndarray:
        """Matrix of this operator in ``other``'s orthonormal basis.

        Both operators must live on the same quotient space (equal kernels).
        """
        return other.basis.conj().T @ other.denominator @ self.operator @ other.basis


def from_matrix(denominator: np.ndarray, matrix: np.ndarray, basis: np.ndarray) -> RatioOperator:
    d = denominator
    numerator = d @ basis @ matrix @ basis.conj().T @ d
    return RatioOperator(d, numerator, matrix, basis)


def _orthonormal_range(d: np.ndarray, name: str) -> tuple[np.ndarray, np.ndarray]:
    sd = _require_psd(d, name)
    mask = sd.range_mask
    u = sd.eigenvectors[:, mask]
    basis = u / np.sqrt(sd.eigenvalues[mask])
    return basis, sd.eigenvectors[:, ~mask]


def ratio_operator(denominator, numerator) -> RatioOperator:
    """Ratio operator ``denominator \\ numerator``.

    Raises :class:`NotDominated` when the numerator does not vanish on the
    kernel of the denominator or the ratio is numerically unbounded.
    """
    d = as_form(denominator)
    a = as_form(numerator)
    if a.shape != d.shape:
        raise FormMismatch(f"shapes {d.shape} and {a.shape} differ")
    pol = get_policy()
    basis, kernel = _orthonormal_range(d, "denominator")
    scale_a = float(np.linalg.norm(a, 2)) if a.size else 0.0
    if kernel.shape[1] and scale_a > 0:
        leak = max(np.linalg.norm(a @ kernel, 2), np.linalg.norm(kernel.conj().T @ a, 2))
        if leak > pol.kernel_angle * scale_a:
            raise NotDominated(f"numerator is nonzero on the denominator kernel (leak {leak:.3e})")
    matrix = basis.conj().T @ a @ basis
    if np.isrealobj(d) and np.isrealobj(a):
        matrix = np.real(matrix)
    if matrix.size:
        scale_d = float(np.linalg.norm(d, 2))
        bound = pol.ratio_bound * max(1.0, scale_a / scale_d)
        if np.linalg.norm(matrix, 2) > bound:
            raise NotDominated("ratio operator is numerically unbounded")
    return RatioOperator(d, a, matrix, basis)


def compose_ratios(ab: RatioOperator, bc: RatioOperator) -> RatioOperator:
    """``(A \\ B)(B \\ C) = A \\ C`` for equivalent ``A``, ``B``."""
    b1, b2 = ab.numerator, bc.denominator
    if b1.shape != b2.shape or max_norm(b1 - b2) > 1e-9 * max(max_norm(b1), 1e-300):
        raise FormMismatch("middle forms of the two ratios differ")
    if ab.rank != bc.rank:
        raise NotEquivalent("outer forms are not equivalent (ranks differ)")
    s = np.linalg.svd(ab.matrix, compute_uv=False)
    if s.size and s[-1] <= get_policy().ker_rel * s[0]:
        raise NotEquivalent("first ratio is not invertible")
    product = ab.operator @ bc.operator
    matrix = ab.basis.conj().T @ ab.denominator @ product @ ab.basis
    return RatioOperator(ab.denominator, bc.numerator, matrix, ab.basis)


def relative_determinant(q_prime, q) -> float:
    """``det(q_prime / q)`` over the range of ``q``; basis independent."""
    m = ratio_operator(q, q_prime).matrix
    if m.size == 0:
        return 1.0
    det = np.linalg.det(m)
    return float(max(np.real(det), 0.0))


def relative_logdet(q_prime, q) -> float:
    """``log det(q_prime / q)``; ``-inf`` for a singular ratio."""
    m = ratio_operator(q, q_prime).matrix
    if m.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(hermitian_part(m))
    if w[0] <= 0:
        return -np.inf
    return float(np.sum(np.log(w)))


def projective_distance(a, b) -> float:
    """Hilbert projective distance ``log(lambda * mu)`` of equivalent forms,
    with ``a <= lambda b`` and ``b <= mu a`` optimal."""
    try:
        b_a = ratio_operator(b, a)
        a_b = ratio_operator(a, b)
    except NotDominated as exc:
        raise NotEquivalent(str(exc)) from exc
    if b_a.rank != a_b.rank:
        raise NotEquivalent("forms have different kernels")
    if b_a.rank == 0:
        return 0.0
    lam = np.linalg.eigvalsh(hermitian_part(b_a.matrix))[-1]
    mu = np.linalg.eigvalsh(hermitian_part(a_b.matrix))[-1]
    return float(max(np.log(lam * mu), 0.0))


def _mean_invertible(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a # b`` for positive definite ``a`` (``b`` merely positive)."""
    w, u = np.linalg.eigh(hermitian_part(a))
    w = np.where(w > 0, w, 0.0)
    ah = (u * np.sqrt(w)) @ u.conj().T
    aih = (u / np.sqrt(w)) @ u.conj().T
    inner = hermitian_part(aih @ b @ aih)
    v, q = np.linalg.eigh(inner)
    mid = (q * np.sqrt(np.where(v > 0, v, 0.0))) @ q.conj().T
    return hermitian_part(ah @ mid @ ah)


def _shorted(m: np.ndarray, q: np.ndarray, qp: np.ndarray) -> np.ndarray:
    """Anderson's shorted operator of ``m`` onto span(q), in q-coordinates."""
    m11 = q.conj().T @ m @ q
    if qp.shape[1] == 0:
        return hermitian_part(m11)
    m12 = q.conj().T @ m @ qp
    m22 = hermitian_part(qp.conj().T @ m @ qp)
    w, u = np.linalg.eigh(m22)
    keep = w > kernel_threshold(w)
    inv = (u[:, keep] / w[keep]) @ u[:, keep].conj().T
    return hermitian_part(m11 - m12 @ inv @ m12.conj().T)


def _complement(cols: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of span(cols) and of its orthogonal complement."""
    if cols.shape[1] == 0:
        return np.zeros((n, 0)), np.eye(n)
    u, s, _ = np.linalg.svd(cols, full_matrices=True)
    r = int(np.sum(s > get_policy().kernel_angle * max(s[0], 1.0)))
    return u[:, :r], u[:, r:]


def _mean_exact(a: np.ndarray, b: np.ndarray, sa: SpectralDecomp, sb: SpectralDecomp) -> np.ndarray:
    n = a.shape[0]
    ka = sa.eigenvectors[:, ~sa.range_mask]
    kb = sb.eigenvectors[:, ~sb.range_mask]
    if ka.shape[1] == 0 and kb.shape[1] == 0:
        # use the better conditioned argument as the anchor
        ca = sa.eigenvalues[-1] / sa.eigenvalues[0]
        cb = sb.eigenvalues[-1] / sb.eigenvalues[0]
        return _mean_invertible(a, b) if ca <= cb else _mean_invertible(b, a)
    # a # b lives on ran a ∩ ran b = (ker a + ker b)^perp and equals the
    # mean of the shorted operators there.
    dtype = np.result_type(a, b)
    qp, q = _complement(np.hstack([ka, kb]), n)
    if q.shape[1] == 0:
        return np.zeros((n, n), dtype=dtype)
    a_l = _shorted(a, q, qp)
    b_l = _shorted(b, q, qp)
    g_l = _mean_invertible(a_l, b_l)
    return hermitian_part(q @ g_l @ q.conj().T)


def _mean_regularized(a: np.ndarray, b: np.ndarray, scale: float) -> np.ndarray:
    pol = get_policy()
    eye = np.eye(a.shape[0])
    prev = None
    spread = np.inf
    for k in range(pol.pw_steps + 1):
        eps = pol.pw_eps0 * pol.pw_eps_factor ** (-k) * scale
        cur = _mean_invertible(a + eps * eye, b + eps * eye)
        if prev is not None:
            spread = max_norm(cur - prev)
            if spread < pol.pw_accept * scale:
                return cur
        prev = cur
    if spread > pol.pw_fail * scale:
        raise ConvergenceFailure(f"regularized geometric mean did not settle (spread {spread:.3e})")
    return prev


def pw_geometric_mean(a, b, method: str = "exact") -> np.ndarray:
    """Geometric mean ``a # b`` of two positive forms.

    ``method="exact"`` handles degenerate forms by restricting to
    ``ran a ∩ ran b`` with shorted operators, which is where the maximal
    solution of ``[[a, X], [X, b]] >= 0`` lives.  ``method="regularized"``
    takes the decreasing limit of ``(a + eps) # (b + eps)`` instead.
    """
    a = as_form(a)
    b = as_form(b)
    if a.shape != b.shape:
        raise FormMismatch(f"shapes {a.shape} and {b.shape} differ")
    sa = _require_psd(a, "first argument")
    sb = _require_psd(b, "second argument")
    a, b = hermitian_part(a), hermitian_part(b)
    if a.size == 0:
        return np.zeros_like(a)
    scale = max(sa.eigenvalues[-1], sb.eigenvalues[-1], 0.0)
    if scale == 0.0:
        return np.zeros_like(a, dtype=np.result_type(a, b))
    if method == "exact":
        return _mean_exact(a, b, sa, sb)
    if method == "regularized":
        if sa.kernel_rank == 0 and sb.kernel_rank == 0:
            return _mean_invertible(a, b)
        return _mean_regularized(a, b, scale)
    raise InvalidParameter(f"unknown method {method!r}")
