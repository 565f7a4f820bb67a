"""Amplitudes between polarizations on the mu-hyperboloid against the closed form.

Walks a path of boundary points away from ``(0, 0, mu)`` and prints the
computed amplitude next to the hyperboloid closed form, then checks random
boundary pairs and the pair ``(0, 0, 1/2)``, ``(0.3, 0, sqrt(0.34))``.
The closed form holds on the boundary only, where the exponent form is
``Re S`` itself.

    python scripts/boundary_example.py --mu 0.5 --steps 8 --out boundary.json
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from quasifree import hyperboloid_polarization, transition_amplitude


@dataclass
class BoundaryConfig:
    mu: float = 0.5
    x_max: float = 1.0
    steps: int = 8
    random_pairs: int = 50
    seed: int = 0


def closed_form(p1, p2) -> float:
    x, y, z = p1
    u, v, w = p2
    num = 2 * (z * z - x * x - y * y) ** 0.25 * (w * w - u * u - v * v) ** 0.25
    return float(num / np.sqrt((z + w) ** 2 - (x + u) ** 2 - (y + v) ** 2))


def on_boundary(mu: float, x: float, y: float) -> tuple[float, float, float]:
    return x, y, float(np.sqrt(x * x + y * y + mu * mu))


def amplitude(mu: float, p1, p2) -> float:
    return transition_amplitude(hyperboloid_polarization(mu, *p1), hyperboloid_polarization(mu, *p2)).value


def run(cfg: BoundaryConfig) -> dict:
    base = on_boundary(cfg.mu, 0.0, 0.0)
    path = []
    for x in np.linspace(0.0, cfg.x_max, cfg.steps):
        p = on_boundary(cfg.mu, float(x), 0.0)
        path.append({"point": p, "amplitude": amplitude(cfg.mu, base, p), "closed_form": closed_form(base, p)})
    rng = np.random.default_rng(cfg.seed)
    pairs = []
    for _ in range(cfg.random_pairs):
        pts = [on_boundary(cfg.mu, *map(float, rng.uniform(-1.5, 1.5, 2))) for _ in range(2)]
        pairs.append({"points": pts, "amplitude": amplitude(cfg.mu, *pts), "closed_form": closed_form(*pts)})
    worst = max(abs(r["amplitude"] - r["closed_form"]) for r in path + pairs)
    p1, p2 = (0.0, 0.0, 0.5), (0.3, 0.0, float(np.sqrt(0.34)))
    instance = {"points": [p1, p2], "amplitude": amplitude(0.5, p1, p2), "closed_form": closed_form(p1, p2)}
    return {"config": asdict(cfg), "path": path, "random_pairs": pairs, "max_error": worst, "instance": instance}


def main(argv=None) -> None:
    cfg = BoundaryConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(cfg).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    ap.add_argument("--out", help="write the full result as JSON")
    args = vars(ap.parse_args(argv))
    out = args.pop("out")
    res = run(BoundaryConfig(**args))
    print(f"{'x':>8} {'amplitude':>20} {'closed form':>20}")
    for r in res["path"]:
        print(f"{r['point'][0]:8.4f} {r['amplitude']:20.15f} {r['closed_form']:20.15f}")
    print(f"max |amplitude - closed form| over path and {len(res['random_pairs'])} random pairs: {res['max_error']:.2e}")
    inst = res["instance"]
    print(f"(0, 0, 0.5) vs (0.3, 0, sqrt(0.34)) at mu=1/2: {inst['amplitude']:.15f} (closed form {inst['closed_form']:.15f})")
    if out:
        with open(out, "w") as fh:
            json.dump(res, fh, indent=2)


if __name__ == "__main__":
    main()
