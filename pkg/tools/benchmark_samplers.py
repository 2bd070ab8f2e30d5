#!/usr/bin/env python3
"""
Times the Cholesky and eigendecomposition samplers on restricted and GHM
covariance estimates from simulated data.

Usage: python benchmark_samplers.py [--n 500] [--h 20] [--draws 100000] [--repeat 5]
"""

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

# Repository root on the path so the package imports without installing
sys.path.insert(0, str(Path(__file__).parent.parent))

from parsimax.core import SamplerPolicy, estimate_v_ghm, estimate_v_restricted, sample_max_sq
from parsimax.harness import DgpConfig, ErrorKind, ErrorModel, generate


class SamplerBenchmark:
    """Median wall time of sample_max_sq per (estimate, sampler) pair"""

    def __init__(self, n: int, p: int, h: int, draws: int, repeat: int, seed: int = 0):
        self.cfg = DgpConfig(n=n, p=p, h=h, seed=seed,
                             error_model=ErrorModel(ErrorKind.HETEROSCEDASTIC_SCALE))
        self.draws = draws
        self.repeat = repeat
        self.seed = seed

    def estimates(self):
        d = generate(self.cfg)
        return {
            'restricted_closed_form': estimate_v_restricted(d),
            'ghm_blockwise': estimate_v_ghm(d),
        }

    def time_one(self, v, policy: SamplerPolicy) -> float:
        samples = []
        for _ in range(self.repeat):
            started = time.perf_counter()
            sample_max_sq(v, self.draws, self.seed, policy)
            samples.append(time.perf_counter() - started)
        return statistics.median(samples)

    def run(self) -> dict:
        results = {}
        for name, estimate in self.estimates().items():
            results[name] = {
                'pd_status': estimate.certificate.status.value,
                'seconds': {policy.value: self.time_one(estimate, policy) for policy in SamplerPolicy},
            }
        return results


def main():
    parser = argparse.ArgumentParser(description='Benchmark the max-test samplers')
    parser.add_argument('--n', type=int, default=500)
    parser.add_argument('--p', type=int, default=2)
    parser.add_argument('--h', type=int, default=20)
    parser.add_argument('--draws', type=int, default=100000)
    parser.add_argument('--repeat', type=int, default=5)
    parser.add_argument('--seed', type=int, default=0)
    args = parser.parse_args()

    bench = SamplerBenchmark(args.n, args.p, args.h, args.draws, args.repeat, args.seed)
    print(json.dumps(bench.run(), indent=2))


if __name__ == "__main__":
    main()
