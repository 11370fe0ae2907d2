"""Table-shaped experiments: modeling attacks on acyclic, cyclic and faulty
cyclic PUFs, and functional metrics of acyclic vs cyclic populations."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import attack, config
from .core import PufCategory, VariationModel, default_env_sweep, sample_instance
from .cyclic import EMPTY_FEEDBACK, FeedbackConfig
from .dataset import generate_cyclic, split_80_20
from .faults import sample_fault_spec
from .metrics import MetricReport, cyclic_metric_suite, format_table, metric_challenges

log = logging.getLogger(__name__)


@dataclass
class AttackRow:
    design: str
    challenge_size: int
    training_crps: int
    accuracy_pct: float
    detail: dict

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "challenge_size": self.challenge_size,
            "training_crps": self.training_crps,
            "model_accuracy_pct": round(self.accuracy_pct, 4),
            **self.detail,
        }


FORMS = ("acyclic", "cyclic", "faulty-cyclic")


def run_design(cfg: dict, design: dict, forms=FORMS) -> list:
    """Attack rows for one PUF category: acyclic, cyclic and faulty cyclic."""
    cat = PufCategory(design["category"])
    seed = cfg["seed"]
    n_c = cfg["challenge_width"]
    s = lambda label: config.derive_seed(seed, cat.value, label)
    vm = VariationModel.from_dict(cfg["variation"])
    inst = sample_instance(cat, n_c, 1, vm, s("lot"), s("instance"))
    fb = FeedbackConfig.sample(n_c, 1, design["taps"], s("taps"))
    spec = sample_fault_spec(inst, fb, design["faults"], s("faults"))
    hyper = attack.TrainConfig(**cfg["train"])
    fmap = design["feature_map"]
    name = cat.short_name

    def dataset(feedback, cycles, faults):
        ds = generate_cyclic(inst, feedback, cfg["num_challenges"], cycles, s("challenges"), faults=faults)
        return split_80_20(ds, s("split"))

    def cell(label, ds):
        model = attack.train(ds, fmap, cfg["model"], hyper, s("train"))
        rep = attack.evaluate(model, ds)
        log.info("%s: %.2f%% on %d test rows", label, rep.test_accuracy_pct, rep.test_rows)
        return model, rep

    rows = []
    common = {"feature_map": fmap}
    if "acyclic" in forms:
        _, rep = cell(name, dataset(EMPTY_FEEDBACK, 1, None))
        rows.append(AttackRow(name, n_c, rep.train_rows, rep.test_accuracy_pct,
                              {"form": "acyclic", "taps": 0, "faults": 0, **common, "report": rep.to_dict()}))
    wiring = {"taps": len(fb), "feature_map": fmap, "feedback": fb.to_list()}
    if "cyclic" in forms:
        _, rep = cell(f"Cyc{name}", dataset(fb, cfg["cycles"], None))
        rows.append(AttackRow(f"Cyc{name}", n_c, rep.train_rows, rep.test_accuracy_pct,
                              {"form": "cyclic", "faults": 0, **wiring, "report": rep.to_dict()}))
    if "faulty-cyclic" in forms:
        model, rep = cell(f"Faulty Cyc{name}", dataset(fb, cfg["cycles"], spec))
        # same challenges and split seed, so the clean test rows line up with the faulty ones
        vs_clean = attack.score(model, dataset(fb, cfg["cycles"], None).test(), rep.train_rows)
        rows.append(AttackRow(f"Faulty Cyc{name}", n_c, rep.train_rows, rep.test_accuracy_pct,
                              {"form": "faulty-cyclic", "faults": len(spec), **wiring, "fault_spec": spec.to_list(),
                               "report": rep.to_dict(),
                               "accuracy_vs_clean_pct": round(vs_clean.test_accuracy_pct, 4)}))
    return rows


def _run_design_args(args):
    return run_design(*args)


def run_table1_experiment(doc: dict = None, jobs: int = 1) -> dict:
    cfg = config.resolve(doc, "table1")
    tasks = [(cfg, d) for d in cfg["designs"]]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_design_args, tasks))
    else:
        results = [run_design(*t) for t in tasks]
    rows = [r.to_dict() for group in results for r in group]
    return {"config": cfg, "rows": rows}


def format_table1(result: dict) -> str:
    head = ("PUF Design", "Challenge Size", "# of Training CRPs", "Model Accuracy")
    body = [(r["design"], str(r["challenge_size"]), f"{r['training_crps']:,}", f"{r['model_accuracy_pct']:.2f}%")
            for r in result["rows"]]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    fmt = lambda cells: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))
    out = [fmt(head), "-" * len(fmt(head))]
    for i, row in enumerate(body):
        if i and i % 3 == 0:
            out.append("-" * len(fmt(head)))
        out.append(fmt(row))
    return "\n".join(out) + "\n"


def run_table2_design(cfg: dict, design: dict) -> list:
    cat = PufCategory(design["category"])
    s = lambda *label: config.derive_seed(cfg["seed"], cat.value, *label)
    vm = VariationModel.from_dict(design["variation"])
    n_c, n = cfg["challenge_width"], cfg["response_width"]
    insts = [sample_instance(cat, n_c, n, vm, s("lot"), s("instance", i)) for i in range(cfg["k"])]
    fb = FeedbackConfig.sample(n_c, n, design["taps"], s("taps"))
    challenges = metric_challenges(n_c, cfg["m"], s("challenges"))
    envs = default_env_sweep(cfg["s"])
    acyclic = cyclic_metric_suite(insts, EMPTY_FEEDBACK, challenges, 1, envs, s("noise"), label=cat.short_name)
    cyclic = cyclic_metric_suite(insts, fb, challenges, cfg["cycles"], envs, s("noise"), label=f"Cyc{cat.short_name}")
    return [acyclic, cyclic]


def run_table2_experiment(doc: dict = None) -> dict:
    cfg = config.resolve(doc, "table2")
    reports = [r for d in cfg["designs"] for r in run_table2_design(cfg, d)]
    return {"config": cfg, "rows": [r.to_dict() for r in reports], "_reports": reports}


def format_table2(result: dict) -> str:
    reports = result.get("_reports") or [
        MetricReport(r["uniqueness_pct"], r["uniformity_pct"], r["reliability_pct"], label=r["label"])
        for r in result["rows"]]
    return format_table(reports)
