"""Truncated affinities and support-law fractions for product gaussian measures.

For each pair of variance rules prints the truncated Hellinger affinity at a
few truncation depths, the Kakutani verdict and the sampler fraction.

    python scripts/kakutani_study.py --terms 2000 --trials 500
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass, field

import numpy as np

from quasifree import ProductGaussianSpec, SequenceRule, kakutani_classify, support_law_sampler

DEFAULT_PAIRS = [
    ("geometric:0.5", "constant:1"),
    ("pseries:2", "constant:1"),
    ("shifted_pseries:1", "constant:1"),
    ("shifted_pseries:0.5", "constant:1"),
    ("pseries:1", "constant:1"),
    ("constant:1", "constant:1"),
    ("constant:1", "constant:2"),
]


@dataclass
class KakutaniConfig:
    terms: int = 2000
    trials: int = 500
    seed: int = 0
    pairs: list = field(default_factory=lambda: list(DEFAULT_PAIRS))


def run(cfg: KakutaniConfig) -> list[dict]:
    rows = []
    depths = sorted({d for d in (10, 100, 1000, cfg.terms) if d <= cfg.terms})
    for ar, br in cfg.pairs:
        spec = ProductGaussianSpec(SequenceRule.parse(ar), SequenceRule.parse(br))
        res = kakutani_classify(spec, cfg.terms)
        law = support_law_sampler(spec, cfg.terms, cfg.trials, cfg.seed)
        rows.append(
            {
                "alpha": ar,
                "beta": br,
                "affinity": {d: float(np.exp(res.log_affinity_partial[d - 1])) for d in depths},
                "verdict": res.verdict,
                "alpha_beta_sum": law["alpha_beta_sum"],
                "fraction_in": law["fraction_in"],
            }
        )
    return rows


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=KakutaniConfig.terms)
    ap.add_argument("--trials", type=int, default=KakutaniConfig.trials)
    ap.add_argument("--seed", type=int, default=KakutaniConfig.seed)
    ap.add_argument("--out", help="write the rows as JSON")
    args = ap.parse_args(argv)
    rows = run(KakutaniConfig(args.terms, args.trials, args.seed))
    for r in rows:
        aff = "  ".join(f"n={d}: {v:.3e}" for d, v in r["affinity"].items())
        print(f"{r['alpha']:>20} vs {r['beta']:<12} {r['verdict']:>11}  sum ab={r['alpha_beta_sum']:.3g}  in={r['fraction_in']:.3f}  {aff}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
