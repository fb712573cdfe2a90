"""Identification accuracy as voltage/current magnitude noise grows.

    python3 scripts/noise_sweep.py [--duration 0.5] [--seed 0]
"""

import argparse

import numpy as np

from substation_sci.cases import TEST_CASES
from substation_sci.ldm import ldm_identify
from substation_sci.stream import NoiseModel, enumerate_scenarios, synthesize
from substation_sci.topology import observable

SIGMAS = (0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2)


def accuracy(spec, noise, duration, seed):
    ok = total = 0
    for i, sc in enumerate(enumerate_scenarios(spec, noise=noise, duration=duration)):
        for lf in synthesize(spec, sc, seed + i):
            total += 1
            ok += ldm_identify(spec, lf.frame) == observable(spec, lf.truth)
    return ok / total


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--duration", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    angle = NoiseModel().angle_sigma
    print("sigma     " + " ".join(f"{k.value:>7}" for k in TEST_CASES))
    for s in SIGMAS:
        accs = [accuracy(make(), NoiseModel(s, s, angle if s else 0.0), args.duration, args.seed)
                for make in TEST_CASES.values()]
        print(f"{s:<9.0e} " + " ".join(f"{a:>7.2%}" for a in accs))
    print(f"(angle sigma {np.degrees(angle):.3f} deg whenever magnitude noise is on)")


if __name__ == "__main__":
    main()
