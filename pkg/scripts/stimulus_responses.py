"""Run the detector over every default stimulus and save one trace per kind.

Usage: python scripts/stimulus_responses.py [--out results/stimuli]
"""

import argparse
from pathlib import Path

from lgmd import io
from lgmd.core import Params
from lgmd.pipeline import run_sequence
from lgmd.stimulus import Kind, default_spec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/stimuli")
    ap.add_argument("--norm-mode", choices=("reconstructed", "literal"), default="reconstructed")
    args = ap.parse_args()

    params = Params(norm_mode=args.norm_mode)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'kind':<10} {'max kappa':>10} {'spikes':>7} {'first c_lgmd':>13} {'F>=T_FFI':>9}")
    for kind in Kind:
        spec = default_spec(kind)
        results = run_sequence(generate(spec), params)
        io.write_trace(io.rows_from_results(results), out / f"{kind.value}.csv")
        first = next((i for i, r in enumerate(results) if r.c_lgmd), None)
        moving = results[spec.onset + 1:]
        share = sum(r.ffi >= params.T_FFI for r in moving) / max(1, len(moving))
        print(f"{kind.value:<10} {max(r.kappa for r in results):>10.2f} {sum(r.spike for r in results):>7} "
              f"{'-' if first is None else first:>13} {share:>9.0%}")


if __name__ == "__main__":
    main()
