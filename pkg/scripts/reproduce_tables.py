"""Print CA/FA counts, identification accuracy and latency for the three test substations.

    python3 scripts/reproduce_tables.py [--seed 42] [--timed 10000] [--csv out.csv]
"""

import argparse
import csv

from substation_sci.bench import exhaustive_records, run_identification, verify
from substation_sci.cases import REFERENCE_LATENCY_US, REFERENCE_TIME_RATIO, TEST_CASES
from substation_sci.nn import train_for
from substation_sci.stream import NoiseModel


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--timed", type=int, default=10000)
    p.add_argument("--noise", action="store_true", help="use the default noise model instead of clean frames")
    p.add_argument("--csv")
    args = p.parse_args()

    print(f"{'kind':5} {'CAs':>4} {'FAs':>4} {'LDM acc':>8} {'NN acc':>8} {'LDM us':>8} {'NN us':>8} "
          f"{'TRI':>5} {'ref TRI':>7}")
    rows = []
    notes = []
    for kind, make in TEST_CASES.items():
        spec = make()
        v = verify(spec)
        model, _ = train_for(kind, seed=args.seed)
        noise = NoiseModel() if args.noise else NoiseModel.none()
        report = run_identification(spec, exhaustive_records(spec, noise, seed=args.seed), ("ldm", "nn"), model,
                                    timed=args.timed)
        ldm, nn = report.results
        tri = report.time_ratio_index[kind]
        print(f"{kind.value:5} {v.cas:>4} {v.fas:>4} {ldm.accuracy:>8.2%} {nn.accuracy:>8.2%} "
              f"{ldm.mean_us:>8.1f} {nn.mean_us:>8.1f} {tri:>5.2f} {REFERENCE_TIME_RATIO[kind]:>7.2f}")
        notes += v.notes
        rows += report.rows()
    print("\nreference latencies (us):", {k.value: v for k, v in REFERENCE_LATENCY_US.items()})
    for n in notes:
        print("note:", n)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
