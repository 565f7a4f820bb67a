"""Amplitude and Hilbert-Schmidt sequences along truncations of mode families.

Each family pairs ``Re S = s_j`` with ``Re T = t_j`` mode by mode.  The study
prints the amplitude of the n-th truncation, the accumulated ``tr C^2`` and
the verdict; families whose ``s_j / t_j - 1`` is square summable keep a
positive limit, the others decay to zero.

    python scripts/truncation_study.py --n-max 400 --sigma-mode 0.25
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, field

from quasifree import diagonal_modes, truncation_verdict

DEFAULT_FAMILIES = [
    ("constant:1", "shifted_pseries:1"),
    ("constant:1", "shifted_pseries:0.75"),
    ("constant:1", "shifted_pseries:0.5"),
    ("constant:1", "shifted_pseries:0.25"),
    ("constant:1", "constant:1.5"),
]


@dataclass
class TruncationConfig:
    n_max: int = 400
    sigma_mode: float = 0.0
    families: list = field(default_factory=lambda: list(DEFAULT_FAMILIES))


def run(cfg: TruncationConfig) -> list[dict]:
    rows = []
    checkpoints = sorted({n for n in (1, 10, 100, cfg.n_max) if n <= cfg.n_max})
    for s_rule, t_rule in cfg.families:
        # the pure-state region needs s_j >= |sigma_mode| / 2; keep rules above it
        res = truncation_verdict(diagonal_modes(s_rule, t_rule, cfg.sigma_mode), cfg.n_max)
        rows.append(
            {
                "s_rule": s_rule,
                "t_rule": t_rule,
                "amplitude": {n: float(res.amplitudes[n - 1]) for n in checkpoints},
                "trace_c2": {n: float(res.trace_c2[n - 1]) for n in checkpoints},
                "hs_sqrt_diff": float(res.hs_sequences[-1].hs_sqrt_diff),
                "verdict": res.verdict,
                "reason": res.reason,
            }
        )
    return rows


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=TruncationConfig.n_max)
    ap.add_argument("--sigma-mode", type=float, default=TruncationConfig.sigma_mode)
    ap.add_argument("--out", help="write the rows as JSON")
    args = ap.parse_args(argv)
    cfg = TruncationConfig(args.n_max, args.sigma_mode)
    rows = run(cfg)
    print(f"config: {asdict(cfg)['n_max']} modes, sigma_mode={cfg.sigma_mode}")
    for r in rows:
        amps = "  ".join(f"n={n}: {v:.4f}" for n, v in r["amplitude"].items())
        print(f"{r['s_rule']:>12} vs {r['t_rule']:<22} {r['verdict']:>18}  {amps}  trC2={r['trace_c2'][cfg.n_max]:.3g}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
