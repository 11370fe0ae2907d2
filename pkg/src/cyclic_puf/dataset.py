"""CRP and CRP-equivalent datasets.

A cyclic PUF held at one external challenge emits a response per cycle; each
of those rows pairs the same challenge with one observed response. Rows are
kept even when duplicated, since their multiplicity carries the mode
statistics. The train/test split groups rows by challenge so that no held
challenge leaks across the split.
"""
from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .bits import random_challenges, rows_from_str, rows_to_str
from .core import NOMINAL, EnvCondition, PufInstance, VariationModel, sample_instance
from .cyclic import EMPTY_FEEDBACK, FeedbackConfig, simulate_batch
from .errors import ConfigError, UsageError
from .faults import FaultSpec

CSV_COLUMNS = ("instance_id", "challenge", "response", "cycle_index", "faulty")
TRAIN_FRACTION = 0.8


@dataclass(eq=False)
class CrpDataset:
    challenges: np.ndarray  # (rows, n_c) uint8
    responses: np.ndarray  # (rows, n) uint8
    cycle_index: np.ndarray  # (rows,) int, 1-based
    instance_id: np.ndarray  # (rows,) str
    faulty: np.ndarray  # (rows,) bool
    meta: dict = field(default_factory=dict)
    train_idx: Optional[np.ndarray] = None
    test_idx: Optional[np.ndarray] = None

    def __len__(self):
        return self.challenges.shape[0]

    @property
    def challenge_width(self) -> int:
        return self.challenges.shape[1]

    @property
    def response_width(self) -> int:
        return self.responses.shape[1]

    @property
    def is_split(self) -> bool:
        return self.train_idx is not None

    def subset(self, idx: np.ndarray) -> "CrpDataset":
        return CrpDataset(self.challenges[idx], self.responses[idx], self.cycle_index[idx],
                          self.instance_id[idx], self.faulty[idx], dict(self.meta))

    def train(self) -> "CrpDataset":
        self._require_split()
        return self.subset(self.train_idx)

    def test(self) -> "CrpDataset":
        self._require_split()
        return self.subset(self.test_idx)

    def _require_split(self):
        if not self.is_split:
            raise UsageError("dataset has not been split; call split_80_20 first")


def _instance_ref(inst: PufInstance) -> dict:
    d = inst.to_dict()
    del d["params"]
    return d


def _build(inst: PufInstance, ext: np.ndarray, responses: np.ndarray, faulty: bool, meta: dict) -> CrpDataset:
    n_ch, c = responses.shape[0], responses.shape[1]
    rows = n_ch * c
    return CrpDataset(
        challenges=np.repeat(ext, c, axis=0),
        responses=responses.reshape(rows, inst.response_width),
        cycle_index=np.tile(np.arange(1, c + 1), n_ch),
        instance_id=np.full(rows, inst.instance_id),
        faulty=np.full(rows, faulty),
        meta=meta,
    )


def generate_acyclic(inst: PufInstance, num_challenges: int, challenge_seed: int = 0,
                     env: EnvCondition = NOMINAL) -> CrpDataset:
    """One noiseless row per distinct uniformly drawn challenge."""
    return generate_cyclic(inst, EMPTY_FEEDBACK, num_challenges, 1, challenge_seed, env)


def generate_cyclic(inst: PufInstance, fb: FeedbackConfig, num_challenges: int, c: int,
                    challenge_seed: int = 0, env: EnvCondition = NOMINAL,
                    faults: Optional[FaultSpec] = None) -> CrpDataset:
    """``c`` rows per distinct challenge, one per cycle of its noiseless trajectory."""
    if num_challenges < 1:
        raise ConfigError("need at least one challenge")
    if c < 1:
        raise ConfigError("need at least one cycle per challenge")
    try:
        ext = random_challenges(num_challenges, inst.challenge_width, np.random.default_rng(challenge_seed))
    except UsageError as exc:
        raise ConfigError(str(exc)) from exc
    responses = simulate_batch(inst, fb, ext, c, env, None, faults)
    meta = {
        "instance": _instance_ref(inst),
        "feedback": fb.to_list(),
        "faults": faults.to_list() if faults is not None else [],
        "num_challenges": num_challenges,
        "cycles": c,
        "challenge_seed": challenge_seed,
        "env": {"delay_scale": env.delay_scale, "label": env.label},
        "form": "acyclic" if not len(fb) else "cyclic",
    }
    return _build(inst, ext, responses, bool(faults), meta)


def regenerate(meta: dict) -> CrpDataset:
    """Replay the experiment recorded in a dataset's metadata."""
    ref = meta["instance"]
    inst = sample_instance(ref["category"], ref["challenge_width"], ref["response_width"],
                           VariationModel.from_dict(ref["variation"]), ref["lot_seed"], ref["instance_seed"],
                           ref.get("instance_id", ""))
    faults = FaultSpec.from_list(meta.get("faults", [])) if meta.get("faults") else None
    ds = generate_cyclic(inst, FeedbackConfig.from_list(meta["feedback"]), meta["num_challenges"], meta["cycles"],
                         meta["challenge_seed"], EnvCondition(**meta["env"]), faults)
    if "split_seed" in meta:
        ds = split_80_20(ds, meta["split_seed"])
    return ds


def challenge_groups(challenges: np.ndarray) -> np.ndarray:
    """Group id per row; rows sharing a challenge share an id (first-seen order)."""
    _, first, inverse = np.unique(challenges, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(np.argsort(first))
    return order[inverse]


def split_80_20(ds: CrpDataset, seed: int = 0) -> CrpDataset:
    """Seeded challenge-grouped 80/20 split.

    Distinct challenges are shuffled and 80 % of them (rounded, at least one
    on each side) go to training together with all their rows.
    """
    if len(ds) < 5:
        raise UsageError("need at least 5 rows to split")
    groups = challenge_groups(ds.challenges)
    n_groups = int(groups.max()) + 1
    if n_groups < 2:
        raise UsageError("need at least two distinct challenges to split")
    n_train = min(max(int(round(TRAIN_FRACTION * n_groups)), 1), n_groups - 1)
    perm = np.random.default_rng(seed).permutation(n_groups)
    in_train = np.zeros(n_groups, dtype=bool)
    in_train[perm[:n_train]] = True
    mask = in_train[groups]
    meta = dict(ds.meta, split_seed=seed)
    return replace(ds, meta=meta, train_idx=np.flatnonzero(mask), test_idx=np.flatnonzero(~mask))


def _fmt(path) -> str:
    name = str(path)
    if name.endswith(".gz"):
        name = name[:-3]
    if name.endswith(".csv"):
        return "csv"
    if name.endswith(".jsonl"):
        return "jsonl"
    raise UsageError(f"unknown dataset format for {path!r}; use .csv, .jsonl (optionally .gz)")


def meta_path(path) -> Path:
    return Path(f"{path}.meta.json")


def to_text(ds: CrpDataset, fmt: str = "csv") -> str:
    ch = rows_to_str(ds.challenges)
    rs = rows_to_str(ds.responses)
    cyc = ds.cycle_index.tolist()
    ids = ds.instance_id.tolist()
    flt = ds.faulty.tolist()
    if fmt == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(zip(ids, ch, rs, cyc, (int(f) for f in flt)))
        return buf.getvalue()
    lines = [json.dumps({"instance_id": i, "challenge": c, "response": r, "cycle_index": k, "faulty": bool(f)})
             for i, c, r, k, f in zip(ids, ch, rs, cyc, flt)]
    return "".join(line + "\n" for line in lines)


def from_text(text: str, fmt: str = "csv", meta: Optional[dict] = None) -> CrpDataset:
    if fmt == "csv":
        reader = csv.reader(_io.StringIO(text))
        header = next(reader, None)
        if tuple(header or ()) != CSV_COLUMNS:
            raise UsageError(f"CSV header must be {','.join(CSV_COLUMNS)}")
        rows = [r for r in reader if r]
        ids, ch, rs, cyc, flt = zip(*rows) if rows else ((), (), (), (), ())
        flt = [f in ("1", "true", "True") for f in flt]
    else:
        recs = [json.loads(line) for line in text.splitlines() if line.strip()]
        ids = [r["instance_id"] for r in recs]
        ch = [r["challenge"] for r in recs]
        rs = [r["response"] for r in recs]
        cyc = [r["cycle_index"] for r in recs]
        flt = [bool(r["faulty"]) for r in recs]
    if not ch:
        raise UsageError("dataset file has no rows")
    ds = CrpDataset(
        challenges=rows_from_str(list(ch)),
        responses=rows_from_str(list(rs)),
        cycle_index=np.array([int(k) for k in cyc], dtype=np.int64),
        instance_id=np.array(list(ids)),
        faulty=np.array(flt, dtype=bool),
        meta=dict(meta or {}),
    )
    if "split_seed" in ds.meta:
        ds = split_80_20(ds, ds.meta["split_seed"])
    return ds


def save(ds: CrpDataset, path) -> None:
    """Write rows (CSV or JSON lines, gzip if the name ends in .gz) plus a meta sidecar."""
    io.write_text(path, to_text(ds, _fmt(path)))
    io.write_json(meta_path(path), ds.meta)


def load(path) -> CrpDataset:
    mp = meta_path(path)
    meta = io.read_json(mp) if mp.exists() else {}
    return from_text(io.read_text(path), _fmt(path), meta)
