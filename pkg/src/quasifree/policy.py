"""Numerical tolerances.

Every threshold used for kernel detection, positivity and classification lives
in :class:`NumericPolicy`.  The active policy is held in a context variable so
it can be overridden locally (and per thread) without threading an argument
through every call::

    with numeric_policy(ker_rel=1e-8):
        amp = transition_amplitude(s, t)
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses


@dataclasses.dataclass(frozen=True)
class NumericPolicy:
    # hermiticity defect allowed, relative to max |entry|
    sym_rel: float = 1e-12
    # negative eigenvalues down to -psd_rel * max(lambda_max, 1) count as zero
    psd_rel: float = 1e-10
    # eigenvalues below ker_rel * lambda_max (floor ker_floor) span the kernel
    ker_rel: float = 1e-9
    ker_floor: float = 1e-14
    # kernel inclusion / comparison (sine of the largest principal angle)
    kernel_angle: float = 1e-7
    # ratio operators with norm beyond this are treated as unbounded
    ratio_bound: float = 1e12
    # epsilon ladder for the regularized geometric mean
    pw_eps0: float = 1e-4
    pw_eps_factor: float = 4.0
    pw_steps: int = 10
    pw_accept: float = 1e-8
    pw_fail: float = 1e-6
    # window around {0, 1/2, 1} for spectral classification
    spectral_window: float = 1e-7
    # |Im S - sigma/2| allowed for a polarization
    compat_tol: float = 1e-10
    # |phi^T sigma phi - sigma| allowed for an automorphism
    presymplectic_tol: float = 1e-9
    # singular values of sigma below center_rel * ||sigma|| span ker sigma
    center_rel: float = 1e-9

    def replace(self, **changes) -> "NumericPolicy":
        return dataclasses.replace(self, **changes)


_POLICY: contextvars.ContextVar[NumericPolicy] = contextvars.ContextVar(
    "quasifree_policy", default=NumericPolicy()
)


def get_policy() -> NumericPolicy:
    return _POLICY.get()


@contextlib.contextmanager
def numeric_policy(policy: NumericPolicy | None = None, **overrides):
    """Temporarily install ``policy`` (or the current one with ``overrides``)."""
    base = policy if policy is not None else get_policy()
    token = _POLICY.set(base.replace(**overrides) if overrides else base)
    try:
        yield _POLICY.get()
    finally:
        _POLICY.reset(token)
