"""Command line: train, verify, synth, run.

Exit codes: 0 success, 1 validation error, 2 accuracy below 100% on an
exhaustive noise-free run (or any LDM/NN disagreement on one).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from .bench import ChannelMismatchError, check_channels, exhaustive_records, run_identification, verify
from .files import FileFormatError, load_scenario, load_spec
from .ldm import IdentificationError
from .nn import (MODEL_ROLES, RBA_PAIR_ROWS, SBA_BRANCH_ROWS, TrainingError, UntrainedModelError, extrapolation_mismatches, infer,
                 load_model, save_model, train_for)
from .stream import (NoiseModel, StreamError, enumerate_scenarios, read_stream, synthesize, to_record,
                     write_stream)
from .topology import ArrangementKind, SpecError

log = logging.getLogger("substation_sci")

EXIT_OK, EXIT_INVALID, EXIT_ACCURACY = 0, 1, 2


def _noise(args, default: NoiseModel) -> NoiseModel:
    if args.noise_v is None and args.noise_i is None and args.noise_angle_deg is None:
        return default
    return NoiseModel(
        args.noise_v if args.noise_v is not None else default.v_sigma,
        args.noise_i if args.noise_i is not None else default.i_sigma,
        math.radians(args.noise_angle_deg) if args.noise_angle_deg is not None else default.angle_sigma,
    )


def _scenario_overrides(args, sc):
    changes = {"noise": _noise(args, sc.noise)}
    if args.rate is not None:
        changes["rate"] = args.rate
    if args.duration is not None:
        changes["duration"] = args.duration
    return replace(sc, **changes)


def cmd_train(args) -> int:
    spec = load_spec(args.spec)
    model, report = train_for(spec.kind, seed=args.seed, completed=args.completed_table)
    wrong = extrapolation_mismatches(model)
    if wrong:
        print(f"warning: model disagrees with the AND rule on inputs {wrong}; try another --seed or "
              "--completed-table", file=sys.stderr)
    log.info("trained %s model: epochs=%d final_loss=%.6g", MODEL_ROLES[spec.kind], report.epochs, report.final_loss)
    table = {ArrangementKind.RBA: RBA_PAIR_ROWS, ArrangementKind.SBA: SBA_BRANCH_ROWS}.get(spec.kind)
    if table is not None:
        for x, y in table.rows:
            log.info("  %s -> %d (target %d)", x, infer(model, x), y)
    save_model(model, args.out, role=MODEL_ROLES[spec.kind])
    print(f"wrote {args.out} ({MODEL_ROLES[spec.kind]}, {report.epochs} epochs, loss {report.final_loss:.4g})")
    return EXIT_OK


def cmd_verify(args) -> int:
    print(verify(load_spec(args.spec)).format())
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = load_spec(args.spec)
    out = Path(args.out)
    if args.scenario:
        sc = _scenario_overrides(args, load_scenario(args.scenario, spec))
        write_stream((to_record(spec, lf) for lf in synthesize(spec, sc, args.seed)), out)
        print(f"wrote {out} ({sc.frame_count} frames)")
        return EXIT_OK
    out.mkdir(parents=True, exist_ok=True)
    scenarios = enumerate_scenarios(spec, noise=_noise(args, NoiseModel.none()),
                                    duration=args.duration or 1.0, rate=args.rate or 30.0)
    for i, sc in enumerate(scenarios):
        path = out / f"{spec.substation_id}_{sc.initial_ca}.csv"
        write_stream((to_record(spec, lf) for lf in synthesize(spec, sc, args.seed + i)), path)
    print(f"wrote {len(scenarios)} stream files to {out}")
    return EXIT_OK


def _load_model_for(spec, path):
    if not path:
        raise UntrainedModelError("backend nn/both needs --model (run `train` first)")
    role = json.loads(Path(path).read_text()).get("role")
    if role and role != MODEL_ROLES[spec.kind]:
        raise UntrainedModelError(f"model {path} is a {role} model, substation needs {MODEL_ROLES[spec.kind]}")
    return load_model(path)


def cmd_run(args) -> int:
    spec = load_spec(args.spec)
    backends = ("ldm", "nn") if args.backend == "both" else (args.backend,)
    model = _load_model_for(spec, args.model) if "nn" in backends else None
    exhaustive = noise_free = False
    if args.stream:
        records = read_stream(args.stream)
    elif args.scenario:
        sc = _scenario_overrides(args, load_scenario(args.scenario, spec))
        records = [to_record(spec, lf) for lf in synthesize(spec, sc, args.seed)]
    else:
        noise = _noise(args, NoiseModel.none())
        exhaustive, noise_free = True, noise.is_zero
        records = exhaustive_records(spec, noise, args.duration or 1.0, args.rate or 30.0, args.seed)
    check_channels(spec, records)
    report = run_identification(spec, records, backends, model, warmup=args.warmup, timed=args.timed_frames)
    print(report.format_table())
    if args.out:
        report.write_csv(args.out)
        print(f"wrote {args.out}")
    if exhaustive and noise_free and not report.all_correct:
        return EXIT_ACCURACY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="substation-sci", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=False):
        sp.add_argument("--spec", required=True, help="substation spec (YAML)")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--out", required=out_required)

    def stream_opts(sp):
        sp.add_argument("--scenario", help="scenario file (YAML); omit to enumerate every CA")
        sp.add_argument("--rate", type=float, help="frames per second (default 30)")
        sp.add_argument("--duration", type=float, help="seconds per scenario (default 1)")
        sp.add_argument("--noise-v", type=float, help="voltage magnitude noise sigma (pu)")
        sp.add_argument("--noise-i", type=float, help="current magnitude noise sigma (pu)")
        sp.add_argument("--noise-angle-deg", type=float, help="angle noise sigma (degrees)")

    sp = sub.add_parser("train", help="train the neural identifier for a substation kind")
    common(sp, out_required=True)
    sp.add_argument("--completed-table", action="store_true",
                    help="also train on the unlisted inputs (target 0)")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("verify", help="enumerate CAs and FAs")
    sp.add_argument("--spec", required=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("synth", help="synthesize labelled PMU streams")
    common(sp, out_required=True)
    stream_opts(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("run", help="identify a stream and report accuracy and latency")
    common(sp)
    stream_opts(sp)
    sp.add_argument("--stream", help="stream file to identify")
    sp.add_argument("--backend", choices=("ldm", "nn", "both"), default="both")
    sp.add_argument("--model", help="trained model file (needed for nn/both)")
    sp.add_argument("--warmup", type=int, default=1000, help="untimed calls before timing")
    sp.add_argument("--timed-frames", type=int, default=10000, help="timed calls per backend")
    sp.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SpecError, FileFormatError, StreamError, ChannelMismatchError, IdentificationError,
            UntrainedModelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
