"""Centred gaussian measures, Hellinger affinities and product measures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forms
from .amplitude import gaussian_amplitude
from .ccr import CheckReport
from .errors import FormMismatch, InsufficientSamples, InvalidParameter, NotPositive

LOG_SINGULAR = float(np.log(1e-12))


@dataclass(frozen=True, eq=False)
class GaussianMeasure:
    covariance: np.ndarray

    def __post_init__(self):
        c = np.asarray(forms.as_form(np.atleast_2d(self.covariance)), dtype=float)
        c = (c + c.T) / 2
        if not forms.validate_psd(c).is_psd:
            raise NotPositive("covariance is not positive semidefinite")
        object.__setattr__(self, "covariance", c)

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        w, u = np.linalg.eigh(self.covariance)
        root = u * np.sqrt(np.clip(w, 0.0, None))
        return rng.standard_normal((size, self.dim)) @ root.T


def hellinger_affinity(m1: GaussianMeasure, m2: GaussianMeasure) -> float:
    """``int sqrt(dm1 dm2)`` for centred gaussians; zero if the supports differ.

    The determinant expression is symmetric under exchanging covariance and
    precision forms, so it is evaluated on the covariances directly.
    """
    if m1.dim != m2.dim:
        raise FormMismatch(f"dimensions {m1.dim} and {m2.dim} differ")
    return gaussian_amplitude(m1.covariance, m2.covariance).value


def characteristic_check(m: GaussianMeasure, xs, samples: int = 10_000, seed: int = 0) -> CheckReport:
    """Monte Carlo ``E exp(i <x, w>)`` against ``exp(-C(x, x) / 2)``."""
    rng = np.random.default_rng(seed)
    draws = m.sample(rng, samples)
    tol = 4 / np.sqrt(samples)
    rows = []
    worst = 0.0
    for x in xs:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        est = np.exp(1j * draws @ x).mean()
        exact = float(np.exp(-0.5 * x @ m.covariance @ x))
        err = float(abs(est - exact))
        worst = max(worst, err)
        rows.append({"x": x.tolist(), "estimate": float(est.real), "exact": exact, "error": err})
    return CheckReport("characteristic", {"max_error": worst}, worst <= tol, {"tolerance": tol, "points": rows})


@dataclass(frozen=True)
class SequenceRule:
    """Positive sequence ``j -> value`` for ``j = 1, 2, ...``.

    Kinds: ``constant`` (c), ``geometric`` (r^j), ``pseries`` (j^-p),
    ``shifted_pseries`` (1 + j^-p) and ``array`` (explicit values).
    """

    kind: str
    param: float = 1.0
    values: tuple = field(default=())

    KINDS = ("constant", "geometric", "pseries", "shifted_pseries", "array")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidParameter(f"unknown rule kind {self.kind!r}")
        if self.kind == "array":
            v = np.asarray(self.values, dtype=float)
            if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)) or np.any(v <= 0):
                raise InvalidParameter("array rule needs a nonempty list of positive values")
            object.__setattr__(self, "values", tuple(v.tolist()))
        elif not np.isfinite(self.param):
            raise InvalidParameter("rule parameter must be finite")
        elif self.kind in ("constant", "geometric") and self.param <= 0:
            raise InvalidParameter(f"{self.kind} rule needs a positive parameter")

    @classmethod
    def parse(cls, text) -> "SequenceRule":
        """Parse ``"kind:param"``, a list of values, or a ``{"kind", "param"}`` mapping."""
        if isinstance(text, SequenceRule):
            return text
        if isinstance(text, dict):
            if text.get("kind") == "array":
                return cls("array", values=tuple(text.get("values", ())))
            return cls(str(text.get("kind")), float(text.get("param", text.get("value", 1.0))))
        if isinstance(text, (list, tuple, np.ndarray)):
            return cls("array", values=tuple(text))
        kind, _, param = str(text).partition(":")
        kind = kind.strip()
        if kind == "array":
            return cls("array", values=tuple(float(v) for v in param.split(",") if v.strip()))
        try:
            value = float(param) if param else 1.0
        except ValueError as exc:
            raise InvalidParameter(f"bad rule parameter in {text!r}") from exc
        return cls(kind, value)

    @property
    def length(self) -> int | None:
        return len(self.values) if self.kind == "array" else None

    def terms(self, n: int) -> np.ndarray:
        if n < 0:
            raise InvalidParameter("number of terms must be nonnegative")
        j = np.arange(1, n + 1, dtype=float)
        if self.kind == "constant":
            return np.full(n, self.param)
        if self.kind == "geometric":
            return self.param ** j
        if self.kind == "pseries":
            return j ** (-self.param)
        if self.kind == "shifted_pseries":
            return 1 + j ** (-self.param)
        if n > len(self.values):
            raise InvalidParameter(f"array rule has {len(self.values)} terms, {n} requested")
        return np.asarray(self.values[:n])

    def log_terms(self, n: int) -> np.ndarray:
        """``log`` of :meth:`terms`, exact for parametric rules that underflow."""
        j = np.arange(1, n + 1, dtype=float)
        if self.kind == "geometric":
            return j * np.log(self.param)
        if self.kind == "pseries":
            return -self.param * np.log(j) if n else np.zeros(0)
        return np.log(self.terms(n))

    def describe(self) -> str:
        if self.kind == "array":
            return f"array[{len(self.values)}]"
        return f"{self.kind}:{self.param:g}"


@dataclass(frozen=True)
class ProductGaussianSpec:
    """Pair of product measures with per-coordinate variances ``alpha``, ``beta``."""

    alpha: SequenceRule
    beta: SequenceRule

    def sequences(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.alpha.terms(n), self.beta.terms(n)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidParameter("sequences must be finite")
        return a, b

    def log_sequences(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        la, lb = self.alpha.log_terms(n), self.beta.log_terms(n)
        if not (np.all(np.isfinite(la)) and np.all(np.isfinite(lb))):
            raise InvalidParameter("sequences must be positive and finite")
        return la, lb


def log_affinity_terms(log_alpha: np.ndarray, log_beta: np.ndarray) -> np.ndarray:
    """Log Hellinger affinity of ``N(0, alpha_j)`` and ``N(0, beta_j)`` from log variances."""
    return 0.5 * (np.log(2.0) + 0.5 * (log_alpha + log_beta) - np.logaddexp(log_alpha, log_beta))


def _decade(n: int) -> int:
    return n // 10


def _tail_exponent(terms: np.ndarray) -> float:
    """Decay exponent ``q`` of ``|t_j| ~ j^-q`` fitted on the last decade."""
    n = terms.size
    k = max(_decade(n), 2)
    j = np.arange(n - k + 1, n + 1, dtype=float)
    t = np.abs(terms[-k:])
    if np.all(t == 0):
        return np.inf
    if np.any(t == 0):
        return float("nan")
    slope = np.polyfit(np.log(j), np.log(t), 1)[0]
    return float(-slope)


def _canonical(rule: SequenceRule) -> tuple[str, float] | None:
    """``(kind, param)`` with rules that are constant sequences folded into ``constant``."""
    if rule.kind == "array":
        return None
    if rule.kind == "geometric" and rule.param == 1.0:
        return "constant", 1.0
    if rule.kind == "pseries" and rule.param == 0.0:
        return "constant", 1.0
    if rule.kind == "shifted_pseries":
        if rule.param == 0.0:
            return "constant", 2.0
        if rule.param < 0:
            return None
    return rule.kind, rule.param


def analytic_tail_exponent(alpha: SequenceRule, beta: SequenceRule) -> float | None:
    """Decay exponent ``q`` of the log-affinity terms, ``|t_j| ~ j^-q``, for
    parametric rules.

    The terms behave like ``-(log alpha_j - log beta_j)^2 / 8`` once the ratio
    tends to 1, so ``q = 2e`` when the log ratio decays like ``j^-e``.  Returns
    ``inf`` for identical sequences, ``0`` when the ratio does not tend to 1
    and ``None`` when a rule is not parametric.
    """
    a, b = _canonical(alpha), _canonical(beta)
    if a is None or b is None:
        return None
    if a == b:
        return np.inf
    kinds = {a[0], b[0]}
    if kinds == {"shifted_pseries"}:
        return 2 * min(a[1], b[1])
    if kinds == {"shifted_pseries", "constant"}:
        const = a if a[0] == "constant" else b
        shifted = b if const is a else a
        return 2 * shifted[1] if const[1] == 1.0 else 0.0
    return 0.0


@dataclass(frozen=True)
class KakutaniResult:
    verdict: str
    log_affinity_partial: np.ndarray
    alpha_beta_partial: np.ndarray
    tail_exponent: float
    tail_source: str = "fit"

    @property
    def affinity(self) -> float:
        return float(np.exp(self.log_affinity_partial[-1])) if self.log_affinity_partial.size else 1.0

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "affinity": self.affinity,
            "log_affinity": float(self.log_affinity_partial[-1]) if self.log_affinity_partial.size else 0.0,
            "alpha_beta_sum": float(self.alpha_beta_partial[-1]) if self.alpha_beta_partial.size else 0.0,
            "tail_exponent": self.tail_exponent,
            "tail_source": self.tail_source,
        }


def kakutani_classify(spec: ProductGaussianSpec, terms: int) -> KakutaniResult:
    """Equivalence or singularity of two product gaussian measures.

    ``singular`` when the truncated affinity drops below ``1e-12``;
    ``equivalent`` when the log-affinity terms decay faster than ``j^-1``;
    ``undecided`` otherwise.  The decay exponent is exact for parametric rules
    and fitted over the last decade for explicit arrays.
    """
    if terms < 1:
        raise InvalidParameter("terms must be positive")
    la, lb = spec.log_sequences(terms)
    logs = log_affinity_terms(la, lb)
    partial = np.cumsum(logs)
    ab = np.cumsum(np.exp(la + lb))
    q = analytic_tail_exponent(spec.alpha, spec.beta)
    source = "analytic"
    if q is None:
        q = _tail_exponent(logs) if terms >= 20 else float("nan")
        source = "fit"
    if partial[-1] < LOG_SINGULAR:
        verdict = "singular"
    # fitted exponents carry a margin against slowly varying factors
    elif np.all(logs == 0) or q > (1.0 if source == "analytic" else 1.05):
        verdict = "equivalent"
    else:
        verdict = "undecided"
    return KakutaniResult(verdict, partial, ab, q, source)


def support_law_sampler(spec: ProductGaussianSpec, terms: int, trials: int = 500, seed: int = 0) -> dict:
    """Fraction of samples ``x ~ nu_alpha`` whose sums ``sum beta_j x_j^2``
    have stabilized: the last decade of terms adds less than 1% of the total."""
    if trials < 100:
        raise InsufficientSamples(f"need at least 100 trials, got {trials}")
    if terms < 1:
        raise InvalidParameter("terms must be positive")
    a, b = spec.sequences(terms)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((trials, terms)) * np.sqrt(a)
    contrib = b * x * x
    total = contrib.sum(axis=1)
    k = _decade(terms)
    tail = contrib[:, terms - k:].sum(axis=1) if k else np.zeros(trials)
    stable = tail < 0.01 * total
    return {
        "fraction_in": float(stable.mean()),
        "alpha_beta_sum": float(np.sum(a * b)),
        "terms": terms,
        "trials": trials,
        "seed": seed,
    }
