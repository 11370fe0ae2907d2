"""Command-line entry point: ``cyclic-puf <command> [options]``.

Data goes to standard output or files; progress and diagnostics go to
standard error. Exit codes: 0 ok, 2 usage, 3 configuration, 4 I/O.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter

import numpy as np

from . import attack, dataset, io
from .bits import random_challenges, rows_to_str, to_bits, to_str
from .config import SCHEMAS, resolve
from .core import NOMINAL, EnvCondition, PufCategory, PufInstance, VariationModel, default_env_sweep, sample_instance
from .cyclic import DEFAULT_CYCLES, EMPTY_FEEDBACK, FeedbackConfig, classify_mode, collect_crm, simulate_trajectory
from .errors import ConfigError, UsageError
from .experiments import format_table1, format_table2, run_table1_experiment, run_table2_experiment
from .faults import FaultSpec, faulty_instance, sample_fault_spec
from .features import FeatureMap
from .metrics import cyclic_metric_suite, format_table, metric_challenges
from .rtlgen import RtlConfig, emit_testbench, emit_verilog

log = logging.getLogger("cyclic_puf")

EXIT_USAGE, EXIT_CONFIG, EXIT_IO = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[usage]: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _emit(text: str, path=None):
    if path:
        io.write_text(path, text)
    else:
        sys.stdout.write(text)


def _instance_args(p):
    g = p.add_argument_group("instance")
    g.add_argument("--instance", help="instance JSON written by `gen`; overrides the sampling flags")
    g.add_argument("--category", default="apuf", choices=[c.value for c in PufCategory])
    g.add_argument("--nc", type=int, help="challenge width")
    g.add_argument("--n", type=int, default=1, help="response width")
    g.add_argument("--lot-seed", type=int, default=0)
    g.add_argument("--instance-seed", type=int, default=0)
    g.add_argument("--mu", type=float, default=1.0)
    g.add_argument("--sigma-random", type=float, default=0.05)
    g.add_argument("--sigma-systematic", type=float, default=0.0)
    g.add_argument("--jitter-sigma", type=float, default=0.005)


def _feedback_args(p):
    g = p.add_argument_group("feedback")
    g.add_argument("--taps", default=None, help="explicit taps 'resp:ch:pos,...'")
    g.add_argument("--num-taps", type=int, default=0, help="sample this many random taps instead")
    g.add_argument("--tap-seed", type=int, default=0)
    g.add_argument("--faults", help="fault spec JSON written by `inject`")


def _variation(args) -> VariationModel:
    return VariationModel(args.mu, args.sigma_random, args.sigma_systematic, args.jitter_sigma)


def _load_instance(args, default_nc=None) -> PufInstance:
    if args.instance:
        return PufInstance.from_dict(io.read_json(args.instance))
    nc = args.nc if args.nc is not None else default_nc
    if nc is None:
        raise UsageError("--nc is required when no --instance is given")
    return sample_instance(args.category, nc, args.n, _variation(args), args.lot_seed, args.instance_seed)


def _load_feedback(args, inst: PufInstance) -> FeedbackConfig:
    if args.taps is not None:
        fb = FeedbackConfig.parse(args.taps)
    elif args.num_taps:
        fb = FeedbackConfig.sample(inst.challenge_width, inst.response_width, args.num_taps, args.tap_seed)
    else:
        fb = EMPTY_FEEDBACK
    return fb.validate(inst.challenge_width, inst.response_width)


def _load_faults(args, inst, fb):
    if not getattr(args, "faults", None):
        return None
    return FaultSpec.from_list(io.read_json(args.faults)["faults"]).validate(
        inst.challenge_width, inst.response_width, len(fb))


def cmd_gen(args):
    inst = _load_instance(args)
    _emit(io.dumps(inst.to_dict()), args.output)
    log.info("sampled %s (%d-bit challenge, %d-bit response)", inst.instance_id, inst.challenge_width,
             inst.response_width)


def cmd_simulate(args):
    ch = to_bits(args.challenge)
    inst = _load_instance(args, default_nc=ch.size)
    fb = _load_feedback(args, inst)
    env = EnvCondition(args.env_scale, "nominal" if args.env_scale == 1.0 else f"scale-{args.env_scale}")
    traj = simulate_trajectory(inst, fb, ch, args.cycles, env, args.noise_seed, _load_faults(args, inst, fb))
    if args.json:
        mode = classify_mode(traj) if args.noise_seed is None else None
        rec = {"challenge": to_str(traj.challenge), "cycles": traj.cycles,
               "responses": rows_to_str(traj.responses)}
        if mode is not None:
            rec["mode"] = mode.to_dict()
        _emit(json.dumps(rec) + "\n", args.output)
    else:
        _emit("".join(r + "\n" for r in rows_to_str(traj.responses)), args.output)


def _challenge_set(args, inst):
    if args.challenge:
        return np.stack([to_bits(c, inst.challenge_width) for c in args.challenge])
    return random_challenges(args.num_challenges, inst.challenge_width, np.random.default_rng(args.challenge_seed))


def cmd_collect(args):
    inst = _load_instance(args, default_nc=len(args.challenge[0]) if args.challenge else None)
    fb = _load_feedback(args, inst)
    faults = _load_faults(args, inst, fb)
    if args.dataset:
        ds = dataset.generate_cyclic(inst, fb, args.num_challenges, args.cycles, args.challenge_seed, faults=faults)
        if args.split_seed is not None:
            ds = dataset.split_80_20(ds, args.split_seed)
        dataset.save(ds, args.dataset)
        log.info("wrote %d rows to %s", len(ds), args.dataset)
    chs = _challenge_set(args, inst)
    lines = []
    hist = Counter()
    for ch in chs:
        crm = collect_crm(inst, fb, ch, args.cycles, faults=faults)
        hist[crm.mode.kind.value] += 1
        lines.append(json.dumps(crm.to_dict()) + "\n")
    _emit("".join(lines), args.output)
    for kind, count in sorted(hist.items()):
        print(f"{kind:<14} {count}", file=sys.stderr)


def cmd_metrics(args):
    vm = _variation(args)
    nc = args.nc or 4
    insts = [sample_instance(args.category, nc, args.n, vm, args.lot_seed, args.instance_seed + i)
             for i in range(args.k)]
    fb = _load_feedback(args, insts[0])
    challenges = metric_challenges(nc, args.m, args.challenge_seed)
    envs = default_env_sweep(args.s)
    name = PufCategory(args.category).short_name
    report = cyclic_metric_suite(insts, fb, challenges, args.cycles if len(fb) else 1, envs, args.noise_seed,
                                 _load_faults(args, insts[0], fb), label=("Cyc" if len(fb) else "") + name)
    if args.json:
        _emit(io.dumps({"args": _args_dict(args), "report": report.to_dict()}), args.output)
    else:
        _emit(format_table([report]), args.output)


def cmd_attack(args):
    ds = dataset.load(args.dataset)
    if not ds.is_split:
        ds = dataset.split_80_20(ds, args.split_seed)
    cfg = attack.TrainConfig(args.learning_rate, args.epochs, args.batch_size, args.hidden)
    model = attack.train(ds, FeatureMap(args.map), args.model, cfg, args.seed)
    rep = attack.evaluate(model, ds)
    if args.model_out:
        io.write_json(args.model_out, model.to_dict())
    result = {"args": _args_dict(args), "report": rep.to_dict()}
    if args.json:
        _emit(io.dumps(result), args.output)
    else:
        _emit(f"train rows   {rep.train_rows}\ntest rows    {rep.test_rows}\n"
              f"accuracy     {rep.test_accuracy_pct:.2f}%\n", args.output)


def cmd_inject(args):
    inst = _load_instance(args)
    fb = _load_feedback(args, inst)
    spec = sample_fault_spec(inst, fb, args.count, args.fault_seed)
    faulty_instance(inst, fb, spec)
    doc = {"instance_id": inst.instance_id, "feedback": fb.to_list(), "fault_seed": args.fault_seed,
           "faults": spec.to_list()}
    _emit(io.dumps(doc), args.output)
    if args.dataset:
        ds = dataset.generate_cyclic(inst, fb, args.num_challenges, args.cycles, args.challenge_seed, faults=spec)
        ds = dataset.split_80_20(ds, args.split_seed)
        dataset.save(ds, args.dataset)
        log.info("wrote %d faulty rows to %s", len(ds), args.dataset)


def cmd_emit_verilog(args):
    fb = FeedbackConfig.parse(args.taps) if args.taps else None
    if fb is None and args.num_taps:
        fb = FeedbackConfig.sample(args.nc, args.n, args.num_taps, args.tap_seed)
    cfg = RtlConfig(args.category, args.nc, args.n, fb, args.module or "", not args.no_keep)
    _emit(emit_verilog(cfg), args.output)
    if args.testbench:
        io.write_text(args.testbench, emit_testbench(cfg, args.tb_challenge or [], args.tb_cycles))


def _read_config(path):
    return io.read_json(path) if path else {}


def _write_result(result, out_dir, stem, table):
    payload = {k: v for k, v in result.items() if not k.startswith("_")}
    if out_dir:
        io.write_json(f"{out_dir}/{stem}.json", payload)
        io.write_text(f"{out_dir}/{stem}.txt", table)
    sys.stdout.write(table)


def cmd_table1(args):
    result = run_table1_experiment(_read_config(args.config), jobs=args.jobs)
    _write_result(result, args.out_dir, "table1", format_table1(result))


def cmd_table2(args):
    result = run_table2_experiment(_read_config(args.config))
    _write_result(result, args.out_dir, "table2", format_table2(result))


def cmd_schema(args):
    _emit(io.dumps(SCHEMAS[args.kind]), args.output)


def _args_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cyclic-puf", description="Cyclic PUF simulation, metrics and modeling-attack toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen", help="sample a PUF instance and write it as JSON")
    _instance_args(s)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("simulate", help="print the response trajectory under one held challenge")
    _instance_args(s)
    _feedback_args(s)
    s.add_argument("--challenge", required=True, help="bit string, leftmost bit is index 0")
    s.add_argument("--cycles", type=int, default=DEFAULT_CYCLES)
    s.add_argument("--noise-seed", type=int, default=None)
    s.add_argument("--env-scale", type=float, default=1.0)
    s.add_argument("--json", action="store_true")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("collect", help="classify response modes; optionally write a CRP dataset")
    _instance_args(s)
    _feedback_args(s)
    s.add_argument("--challenge", action="append", help="explicit challenge (repeatable)")
    s.add_argument("--num-challenges", type=int, default=100)
    s.add_argument("--challenge-seed", type=int, default=0)
    s.add_argument("--cycles", type=int, default=DEFAULT_CYCLES)
    s.add_argument("--dataset", help="write rows here (.csv/.jsonl, optionally .gz)")
    s.add_argument("--split-seed", type=int, default=None)
    s.add_argument("-o", "--output", help="CRM JSON lines (default stdout)")
    s.set_defaults(func=cmd_collect)

    s = sub.add_parser("metrics", help="uniqueness/uniformity/reliability of a sampled population")
    _instance_args(s)
    _feedback_args(s)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--m", type=int, default=256)
    s.add_argument("--s", type=int, default=8)
    s.add_argument("--cycles", type=int, default=DEFAULT_CYCLES)
    s.add_argument("--challenge-seed", type=int, default=0)
    s.add_argument("--noise-seed", type=int, default=0)
    s.add_argument("--json", action="store_true")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("attack", help="train a modeling attack on a dataset file")
    s.add_argument("--dataset", required=True)
    s.add_argument("--map", default="parity", choices=[m.value for m in FeatureMap])
    s.add_argument("--model", default="lr", choices=[k.value for k in attack.ModelKind])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--split-seed", type=int, default=0, help="used when the dataset carries no split")
    s.add_argument("--learning-rate", type=float, default=0.05)
    s.add_argument("--epochs", type=int, default=50)
    s.add_argument("--batch-size", type=int, default=256)
    s.add_argument("--hidden", type=int, default=64)
    s.add_argument("--model-out")
    s.add_argument("--json", action="store_true")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("inject", help="sample a fault spec; optionally write a faulty dataset")
    _instance_args(s)
    _feedback_args(s)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--fault-seed", type=int, default=0)
    s.add_argument("--dataset")
    s.add_argument("--num-challenges", type=int, default=1000)
    s.add_argument("--challenge-seed", type=int, default=0)
    s.add_argument("--split-seed", type=int, default=0)
    s.add_argument("--cycles", type=int, default=4)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_inject)

    s = sub.add_parser("emit-verilog", help="write structural Verilog for a PUF design")
    s.add_argument("--category", default="apuf", choices=[c.value for c in PufCategory])
    s.add_argument("--nc", type=int, required=True)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--taps", help="'resp:ch:pos,...'")
    s.add_argument("--num-taps", type=int, default=0)
    s.add_argument("--tap-seed", type=int, default=0)
    s.add_argument("--module")
    s.add_argument("--no-keep", action="store_true", help="omit dont_touch attributes")
    s.add_argument("--testbench", help="also write a testbench here")
    s.add_argument("--tb-challenge", action="append")
    s.add_argument("--tb-cycles", type=int, default=8)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_emit_verilog)

    for name, func, helptext in (("table1", cmd_table1, "modeling-attack table"),
                                 ("table2", cmd_table2, "functional-metrics table")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", help="experiment config JSON (see `schema`)")
        s.add_argument("--out-dir", help="write <name>.json and <name>.txt here")
        if name == "table1":
            s.add_argument("--jobs", type=int, default=1)
        s.set_defaults(func=func)

    s = sub.add_parser("schema", help="print an experiment config JSON schema")
    s.add_argument("kind", choices=sorted(SCHEMAS))
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_schema)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
