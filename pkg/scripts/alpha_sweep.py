"""alpha(rho) for every model over powers of two, the empirical witness for
the variance-bound constant.

    python3 scripts/alpha_sweep.py --max-power 12
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from invdpp.cli import SUMMARY_COLUMNS, write_csv
from invdpp.kernels import KernelSpec
from invdpp.statistics import alpha


@dataclass(frozen=True)
class AlphaConfig:
    models: tuple[str, ...] = ("plane", "sphere", "hyperbolic")
    min_power: int = 1
    max_power: int = 9
    out: str = "out/alpha_sweep.csv"


def run(cfg: AlphaConfig) -> list[dict]:
    rows = []
    for model in cfg.models:
        for k in range(cfg.min_power, cfg.max_power + 1):
            a = alpha(KernelSpec(model, 2**k))
            rows.append(dict(model=model, rho=2**k, quantity="alpha", estimate=a, prediction=1 / (2 * np.pi)))
            print(f"{model:10s} rho={2**k:<6d} alpha={a:.10f}")
    Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(Path(cfg.out), SUMMARY_COLUMNS, rows)
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--min-power", type=int, default=1)
    p.add_argument("--max-power", type=int, default=9)
    p.add_argument("--out", default=AlphaConfig.out)
    a = p.parse_args()
    run(AlphaConfig(min_power=a.min_power, max_power=a.max_power, out=a.out))


if __name__ == "__main__":
    main()
