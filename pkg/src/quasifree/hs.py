"""Hilbert-Schmidt diagnostics and truncation families.

All operators are written in a ``(S + conj S)``-orthonormal basis, where the
Hilbert-Schmidt norm is the Frobenius norm and the operator norm is the
spectral norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import forms
from .amplitude import exponent_form, transition_amplitude
from .ccr import (
    CheckReport,
    Polarization,
    PresymplecticSpace,
    covariance_operator,
    make_polarization,
    polarization_from_matrix,
)
from .errors import (
    FormMismatch,
    IncompatibleSubspace,
    InvalidBasis,
    InvalidDirection,
    InvalidFamily,
    NotDominated,
    NotEquivalent,
    QuasifreeError,
)
from .forms import RatioOperator, hermitian_part, max_norm
from .gaussian import SequenceRule


def _check_equivalent(s: Polarization, t: Polarization) -> None:
    if not s.space.same_as(t.space):
        raise FormMismatch("polarizations live on different presymplectic spaces")
    if not forms.same_kernel(s.inner, t.inner):
        raise NotEquivalent("(,)_S and (,)_T have different kernels")


def r_operator(s: Polarization, t: Polarization) -> RatioOperator:
    """``R = ((T + conj T) / (S + conj S))^{1/2}``, so ``(Rx, Ry)_S = (x, y)_T``."""
    _check_equivalent(s, t)
    try:
        ratio = forms.ratio_operator(s.inner, t.inner)
    except NotDominated as exc:
        raise NotEquivalent(str(exc)) from exc
    return ratio.apply(lambda w: np.sqrt(np.clip(w, 0.0, None)))


@dataclass(frozen=True)
class HsReport:
    hs_sqrt_diff: float
    hs_r_minus_one: float
    hs_ab_diff: float
    delta: float
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "hs_sqrt_diff": self.hs_sqrt_diff,
            "hs_r_minus_one": self.hs_r_minus_one,
            "hs_ab_diff": self.hs_ab_diff,
            "delta": self.delta,
            **self.extras,
        }


@dataclass(frozen=True, eq=False)
class _HsOperators:
    sqrt_s: np.ndarray
    sqrt_t: np.ndarray
    r: np.ndarray
    a_s: np.ndarray
    b_s: np.ndarray
    b_t: np.ndarray
    delta: float


def _operators(s: Polarization, t: Polarization) -> _HsOperators:
    _check_equivalent(s, t)
    cov_s = covariance_operator(s)
    cov_t = covariance_operator(t)
    clip = lambda w: np.sqrt(np.clip(w, 0.0, None))  # noqa: E731
    sqrt_s = hermitian_part(cov_s.apply(clip).matrix)
    sqrt_t = cov_t.apply(clip).in_basis_of(cov_s)
    r2 = hermitian_part(forms.ratio_operator(s.inner, t.inner).matrix)
    w, u = np.linalg.eigh(r2)
    if w.size and w[0] <= 0:
        raise NotEquivalent("(,)_T vanishes on part of the range of (,)_S")
    r = (u * np.sqrt(w)) @ u.conj().T
    a = exponent_form(s).a
    b = exponent_form(t).a
    a_s = hermitian_part(forms.ratio_operator(s.inner, a).matrix)
    b_s = hermitian_part(forms.ratio_operator(s.inner, b).matrix)
    b_t = forms.ratio_operator(t.inner, b).in_basis_of(cov_s)
    delta = float(2 * np.log(np.sqrt(w[-1]) / np.sqrt(w[0]))) if w.size else 0.0
    return _HsOperators(sqrt_s, sqrt_t, r, a_s, b_s, b_t, max(delta, 0.0))


def _hs(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, "fro")) if m.size else 0.0


def _op(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


def hs_norms(s: Polarization, t: Polarization) -> HsReport:
    """Hilbert-Schmidt distances between ``s`` and ``t`` relative to ``(,)_S``."""
    ops = _operators(s, t)
    eye = np.eye(ops.r.shape[0])
    return HsReport(
        hs_sqrt_diff=_hs(ops.sqrt_s - ops.sqrt_t),
        hs_r_minus_one=_hs(ops.r - eye),
        hs_ab_diff=_hs(ops.a_s - ops.b_s),
        delta=ops.delta,
    )


def verify_ay_bounds(s: Polarization, t: Polarization, slack: float = 1e-9) -> CheckReport:
    """Evaluate the four Hilbert-Schmidt estimates relating ``sqrt S - sqrt T``,
    ``1 - R^2`` and ``A_S - B_S``.

    Each entry of ``detail["bounds"]`` holds ``lhs``, ``rhs`` and
    ``margin = rhs - lhs``; the check passes when every margin is at least
    ``-slack`` (scaled by ``max(1, rhs)``).
    """
    ops = _operators(s, t)
    eye = np.eye(ops.r.shape[0])
    d = ops.delta
    sq = _hs(ops.sqrt_s - ops.sqrt_t)
    r2 = ops.r @ ops.r
    one_r2 = _hs(eye - r2)
    ab = _hs(ops.a_s - ops.b_s)
    r2_norm = _op(r2)
    r2_inv_norm = _op(np.linalg.inv(r2)) if r2.size else 0.0
    k = 2 * np.sqrt(2) * (1 + np.exp(d / 2))
    bounds = {
        "ab_t": (_hs(ops.a_s - ops.b_t), k * sq),
        "ab_s": (ab, 2 * one_r2 + k * r2_norm * sq),
        "sqrt_diff": (sq, np.exp(np.pi / 4) / np.sqrt(2) * np.exp(d) * (1 + np.exp(d / 2)) * r2_inv_norm * ab),
        "one_minus_r2": (one_r2, np.exp(d / 2) * ab + 2 * np.sqrt(2) * (np.exp(d) + np.exp(d / 2)) * sq),
    }
    rows = {}
    passed = True
    worst = np.inf
    for name, (lhs, rhs) in bounds.items():
        margin = float(rhs - lhs)
        ok = margin >= -slack * max(1.0, abs(rhs))
        passed &= ok
        worst = min(worst, margin)
        rows[name] = {"lhs": float(lhs), "rhs": float(rhs), "margin": margin, "holds": bool(ok)}
    return CheckReport("ay_bounds", {"min_margin": float(worst)}, bool(passed), {"bounds": rows, "delta": d})


def small_overlap_bound(s: Polarization, t: Polarization, x) -> CheckReport:
    """Check ``amplitude(s, t) <= 2 eps^{1/4}`` with ``eps = (x, x)_S / (x, x)_T``."""
    if not s.space.same_as(t.space):
        raise FormMismatch("polarizations live on different presymplectic spaces")
    x = np.asarray(x)
    if x.shape != (s.dim,):
        raise InvalidDirection(f"direction must have {s.dim} entries")
    nt = float(np.real(x.conj() @ t.inner @ x))
    if nt <= 1e-300:
        raise InvalidDirection("(x, x)_T vanishes")
    ns = float(np.real(x.conj() @ s.inner @ x))
    eps = max(ns, 0.0) / nt
    amp = transition_amplitude(s, t).value
    bound = 2 * eps ** 0.25
    return CheckReport(
        "small_overlap",
        {"margin": bound - amp},
        amp <= bound + 1e-9,
        {"epsilon": eps, "amplitude": amp, "bound": bound},
    )


def _projection(m: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.zeros_like(m)
    g = basis.T @ m @ basis
    return basis @ np.linalg.solve((g + g.T) / 2, basis.T @ m)


def build_truncated_polarization(p: Polarization, q: Polarization, subspace) -> Polarization:
    """``Q`` on ``span(subspace)``, ``P`` on its ``(P + conj P)``-orthogonal
    complement, with vanishing cross terms.

    ``sigma`` must not couple the subspace with its complement.
    """
    if not p.space.same_as(q.space):
        raise FormMismatch("polarizations live on different presymplectic spaces")
    n = p.dim
    b = np.asarray(subspace, dtype=float).reshape(n, -1)
    if b.shape[1] and np.linalg.matrix_rank(b) < b.shape[1]:
        raise InvalidBasis("subspace basis columns are linearly dependent")
    m = p.inner
    if b.shape[1] and np.linalg.matrix_rank(b.T @ m @ b) < b.shape[1]:
        raise IncompatibleSubspace("(P + conj P) is degenerate on the subspace")
    e = _projection(m, b)
    comp = np.eye(n) - e
    sigma = p.space.sigma
    cross = max_norm(e.T @ sigma @ comp)
    if cross > 1e-9 * max(max_norm(sigma), 1.0):
        raise IncompatibleSubspace(f"sigma couples the subspace to its complement ({cross:.3e})")
    qn = e.T @ q.s @ e + comp.T @ p.s @ comp
    return polarization_from_matrix(p.space, qn)


def hs_form_distance(ref: Polarization, a: Polarization, b: Polarization) -> float:
    """Hilbert-Schmidt norm of ``(Ref + conj Ref) \\ (A - B)``."""
    d = a.s - b.s
    basis, _ = forms._orthonormal_range(ref.inner, "reference")
    return _hs(basis.conj().T @ d @ basis)


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class Block:
    sigma: np.ndarray
    s_re: np.ndarray
    t_re: np.ndarray


@dataclass(frozen=True, eq=False)
class TruncationFamily:
    """Nested pairs ``(S_n, T_n)`` built from orthogonal blocks.

    The n-th pair is the direct sum of the first ``n`` blocks, so restricting
    ``S_n`` to the first ``n - 1`` blocks gives ``S_{n-1}``.
    """

    kind: str
    block: Callable[[int], Block]
    max_blocks: int | None = None
    description: dict = field(default_factory=dict)

    def block_polarizations(self, j: int) -> tuple[Polarization, Polarization]:
        if self.max_blocks is not None and j > self.max_blocks:
            raise InvalidFamily(f"family has only {self.max_blocks} blocks")
        blk = self.block(j)
        try:
            space = PresymplecticSpace(blk.sigma)
            return make_polarization(space, blk.s_re), make_polarization(space, blk.t_re)
        except QuasifreeError as exc:
            raise InvalidFamily(f"block {j}: {exc}") from exc

    def pair(self, n: int) -> tuple[Polarization, Polarization]:
        """Assembled ``(S_n, T_n)`` on the direct sum of the first ``n`` blocks."""
        blocks = [self.block(j) for j in range(1, n + 1)]
        sigma = _block_diag([b.sigma for b in blocks])
        space = PresymplecticSpace(sigma)
        try:
            return (
                make_polarization(space, _block_diag([b.s_re for b in blocks])),
                make_polarization(space, _block_diag([b.t_re for b in blocks])),
            )
        except QuasifreeError as exc:
            raise InvalidFamily(str(exc)) from exc


def _block_diag(mats: list[np.ndarray]) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def diagonal_modes(s_rule, t_rule, sigma_mode: float = 0.0) -> TruncationFamily:
    """Family of independent modes.

    With ``sigma_mode == 0`` each mode is one-dimensional with ``Re S = s_j``;
    otherwise it is a plane with ``sigma = [[0, sigma_mode], [-sigma_mode, 0]]``
    and ``Re S = s_j I``.
    """
    s_rule = SequenceRule.parse(s_rule)
    t_rule = SequenceRule.parse(t_rule)
    sm = float(sigma_mode)
    lengths = [r.length for r in (s_rule, t_rule) if r.length is not None]

    def block(j: int) -> Block:
        s_j = float(s_rule.terms(j)[-1])
        t_j = float(t_rule.terms(j)[-1])
        if sm == 0.0:
            return Block(np.zeros((1, 1)), np.array([[s_j]]), np.array([[t_j]]))
        sig = np.array([[0.0, sm], [-sm, 0.0]])
        return Block(sig, s_j * np.eye(2), t_j * np.eye(2))

    desc = {"kind": "diagonal_modes", "sigma_mode": sm, "s_rule": s_rule.describe(), "t_rule": t_rule.describe()}
    return TruncationFamily("diagonal_modes", block, min(lengths) if lengths else None, desc)


def user_blocks(blocks: list[dict]) -> TruncationFamily:
    """Family from explicit blocks ``{"sigma", "s", "t"}`` (real parts)."""
    parsed = []
    for i, b in enumerate(blocks):
        try:
            s_re = np.atleast_2d(np.asarray(b["s"], dtype=float))
            t_re = np.atleast_2d(np.asarray(b["t"], dtype=float))
            sig = np.atleast_2d(np.asarray(b.get("sigma", np.zeros_like(s_re)), dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidFamily(f"block {i + 1} is malformed: {exc}") from exc
        if not (s_re.shape == t_re.shape == sig.shape and s_re.shape[0] == s_re.shape[1]):
            raise InvalidFamily(f"block {i + 1} has inconsistent shapes")
        parsed.append(Block(sig, s_re, t_re))
    if not parsed:
        raise InvalidFamily("no blocks given")

    def block(j: int) -> Block:
        if j > len(parsed):
            raise InvalidFamily(f"family has only {len(parsed)} blocks")
        return parsed[j - 1]

    return TruncationFamily("user_blocks", block, len(parsed), {"kind": "user_blocks", "blocks": len(parsed)})


def family_from_json(obj: dict) -> TruncationFamily:
    if not isinstance(obj, dict):
        raise InvalidFamily("family must be a JSON object")
    kind = obj.get("kind")
    try:
        if kind == "diagonal_modes":
            return diagonal_modes(obj["s_rule"], obj["t_rule"], obj.get("sigma_mode", 0.0))
        if kind == "user_blocks":
            return user_blocks(obj["blocks"])
    except KeyError as exc:
        raise InvalidFamily(f"missing field {exc}") from exc
    except QuasifreeError as exc:
        if isinstance(exc, InvalidFamily):
            raise
        raise InvalidFamily(str(exc)) from exc
    raise InvalidFamily(f"unknown family kind {kind!r}")


@dataclass(frozen=True)
class TruncationResult:
    amplitudes: np.ndarray
    hs_sequences: list
    trace_c2: np.ndarray
    verdict: str
    reason: str

    def as_dict(self, include_sequences: bool = True) -> dict:
        out = {
            "verdict": self.verdict,
            "reason": self.reason,
            "n_max": int(self.amplitudes.size),
            "final_amplitude": float(self.amplitudes[-1]) if self.amplitudes.size else 1.0,
            "final_trace_c2": float(self.trace_c2[-1]) if self.trace_c2.size else 0.0,
        }
        if include_sequences:
            out["amplitudes"] = self.amplitudes.tolist()
            out["trace_c2"] = self.trace_c2.tolist()
            out["hs"] = [h.as_dict() for h in self.hs_sequences]
        return out


def _block_trace_c2(s: Polarization, t: Polarization) -> float:
    """``tr C^2`` with ``C = (A + B) \\ (A - B)``."""
    a = exponent_form(s).a
    b = exponent_form(t).a
    c = forms.ratio_operator(a + b, a - b).matrix
    return float(np.real(np.trace(c @ c)))


def truncation_verdict(family: TruncationFamily, n_max: int) -> TruncationResult:
    """Amplitudes and Hilbert-Schmidt data of ``(S_n, T_n)`` for ``n = 1..n_max``.

    Blocks are orthogonal for both forms, so amplitudes multiply and squared
    Hilbert-Schmidt norms add across blocks.
    """
    if n_max < 1:
        raise InvalidFamily("n_max must be positive")
    if family.max_blocks is not None and n_max > family.max_blocks:
        raise InvalidFamily(f"family has only {family.max_blocks} blocks")
    log_amp = 0.0
    amps = np.empty(n_max)
    tr = np.empty(n_max)
    sq = [0.0, 0.0, 0.0]
    r_hi, r_lo = 1.0, 1.0
    hs_seq = []
    acc_tr = 0.0
    for j in range(1, n_max + 1):
        s, t = family.block_polarizations(j)
        amp = transition_amplitude(s, t)
        log_amp += np.log(amp.value) if amp.value > 0 else -np.inf
        amps[j - 1] = np.exp(log_amp)
        try:
            ops = _operators(s, t)
        except NotEquivalent:
            hs_seq.append(HsReport(np.inf, np.inf, np.inf, np.inf))
            tr[j - 1] = np.inf
            acc_tr = np.inf
            continue
        eye = np.eye(ops.r.shape[0])
        sq[0] += _hs(ops.sqrt_s - ops.sqrt_t) ** 2
        sq[1] += _hs(ops.r - eye) ** 2
        sq[2] += _hs(ops.a_s - ops.b_s) ** 2
        w = np.linalg.eigvalsh(ops.r)
        r_hi, r_lo = max(r_hi, w[-1]), min(r_lo, w[0])
        hs_seq.append(HsReport(np.sqrt(sq[0]), np.sqrt(sq[1]), np.sqrt(sq[2]), float(2 * np.log(r_hi / r_lo))))
        acc_tr += _block_trace_c2(s, t)
        tr[j - 1] = acc_tr
    verdict, reason = _verdict(amps, tr)
    return TruncationResult(amps, hs_seq, tr, verdict, reason)


def _verdict(amps: np.ndarray, tr: np.ndarray) -> tuple[str, str]:
    n = amps.size
    if amps[-1] < 1e-10:
        return "orthogonal", "amplitude below 1e-10"
    k = max(n // 10, 1)
    window = amps[n - k - 1:] if n > k else amps
    if n >= 10 and float(np.max(window) - np.min(window)) <= 1e-8:
        return "converges_positive", "amplitudes Cauchy within 1e-8 over the last decade"
    if n >= 100 and np.all(np.isfinite(tr)):
        last = tr[-1] - tr[n // 10 - 1]
        prev = tr[n // 10 - 1] - tr[n // 100 - 1] if n // 100 >= 1 else tr[n // 10 - 1]
        if last > 0 and prev > 0 and last / prev >= 2.0:
            return "orthogonal", "tr C_n^2 grows faster than logarithmically"
    if not np.all(np.isfinite(tr)):
        return "orthogonal", "inequivalent inner products on some block"
    return "undecided", "no criterion met"
