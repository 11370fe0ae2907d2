"""Functional metrics: Hamming distance and weight, uniqueness, reliability,
uniformity, and their average-bit-value (ABV) variants for cyclic PUFs.

Percentages are returned as floats in [0, 100]. Sums of Hamming distances are
accumulated as integers and divided once at the end, so results do not depend
on the order instances or responses are given in.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .bits import all_challenges, random_challenges
from .core import NOMINAL, EnvCondition, PufInstance, default_env_sweep
from .cyclic import EMPTY_FEEDBACK, FeedbackConfig, Trajectory, simulate_batch
from .errors import UsageError


def _bits(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint8)


def hamming_distance(r1, r2) -> int:
    a, b = _bits(r1), _bits(r2)
    if a.shape != b.shape:
        raise UsageError(f"width mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a ^ b))


def hamming_weight(r) -> int:
    return int(np.count_nonzero(_bits(r)))


def uniqueness(responses) -> float:
    """Mean normalized inter-chip Hamming distance.

    :param responses: ``(k, n)`` for one challenge, or ``(k, m, n)`` for ``m``
        challenges; the per-challenge value is averaged over challenges.
    """
    r = _bits(responses)
    if r.ndim == 2:
        r = r[:, None, :]
    if r.ndim != 3:
        raise UsageError("responses must be (k, n) or (k, m, n)")
    k, m, n = r.shape
    if k < 2:
        raise UsageError("uniqueness needs at least two instances")
    total = sum(int(np.count_nonzero(r[i] ^ r[j])) for i, j in combinations(range(k), 2))
    pairs = k * (k - 1) // 2
    return 100.0 * total / (pairs * m * n)


def pairwise_distances(responses) -> dict:
    """Normalized Hamming distance per instance pair, averaged over challenges."""
    r = _bits(responses)
    if r.ndim == 2:
        r = r[:, None, :]
    k, m, n = r.shape
    return {(i, j): np.count_nonzero(r[i] ^ r[j]) / (m * n) for i, j in combinations(range(k), 2)}


def reliability(reference, samples) -> float:
    """100 minus the mean normalized intra-chip distance to ``reference``.

    :param reference: ``(n,)`` or ``(m, n)`` response(s) at standard conditions
    :param samples: ``(s, n)`` or ``(s, m, n)`` responses under varied conditions
    """
    ref = _bits(reference)
    smp = _bits(samples)
    if smp.shape[1:] != ref.shape:
        raise UsageError(f"sample shape {smp.shape} does not match reference {ref.shape}")
    s = smp.shape[0]
    if s < 1:
        raise UsageError("need at least one sample")
    total = int(np.count_nonzero(smp ^ ref[None]))
    bits = s * ref.size
    value = 100.0 * (bits - total) / bits
    assert 0.0 <= value <= 100.0
    return value


def uniformity(responses) -> float:
    """Mean normalized Hamming weight of ``(m, n)`` responses (or a single vector)."""
    r = _bits(responses)
    if r.ndim == 1:
        r = r[None, :]
    if r.shape[0] < 1:
        raise UsageError("need at least one response")
    return 100.0 * np.count_nonzero(r) / r.size


def abv(traj) -> np.ndarray:
    """Average value of each response bit over the cycles a challenge is held."""
    responses = traj.responses if isinstance(traj, Trajectory) else _bits(traj)
    if responses.shape[0] < 1:
        raise UsageError("trajectory has no cycles")
    return responses.mean(axis=-2)


def abv_response(traj) -> np.ndarray:
    """Threshold the ABV: a bit reads as 1 when it was high at least half the time."""
    responses = traj.responses if isinstance(traj, Trajectory) else _bits(traj)
    c = responses.shape[-2]
    # integer form of mean >= 0.5
    return (2 * responses.sum(axis=-2, dtype=np.int64) >= c).astype(np.uint8)


@dataclass
class MetricReport:
    uniqueness_pct: float
    uniformity_pct: float
    reliability_pct: float
    per_pair_uniqueness: dict = field(default_factory=dict)
    per_instance_uniformity: list = field(default_factory=list)
    per_instance_reliability: list = field(default_factory=list)
    per_sample_reliability: dict = field(default_factory=dict)
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "uniqueness_pct": round(self.uniqueness_pct, 6),
            "uniformity_pct": round(self.uniformity_pct, 6),
            "reliability_pct": round(self.reliability_pct, 6),
            "per_pair_uniqueness": {f"{i}-{j}": round(100 * v, 6) for (i, j), v in self.per_pair_uniqueness.items()},
            "per_instance_uniformity": [round(v, 6) for v in self.per_instance_uniformity],
            "per_instance_reliability": [round(v, 6) for v in self.per_instance_reliability],
            "per_sample_reliability": {k: round(v, 6) for k, v in self.per_sample_reliability.items()},
        }


def format_table(reports: Sequence[MetricReport]) -> str:
    """Aligned text table with the columns PUF Design, Uniqueness, Uniformity, Reliability."""
    head = ("PUF Design", "Uniqueness", "Uniformity", "Reliability")
    rows = [(r.label, f"{r.uniqueness_pct:.2f}%", f"{r.uniformity_pct:.2f}%", f"{r.reliability_pct:.2f}%")
            for r in reports]
    widths = [max(len(x) for x in col) for col in zip(head, *rows)]
    line = lambda cells: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))
    rule = "-" * len(line(head))
    return "\n".join([line(head), rule, *[line(r) for r in rows]]) + "\n"


def cyclic_metric_suite(instances: Sequence[PufInstance], fb: FeedbackConfig, challenges: np.ndarray,
                        c: int = 64, envs: Optional[Sequence[EnvCondition]] = None, noise_seed: int = 0,
                        faults=None, label: str = "") -> MetricReport:
    """Uniqueness, uniformity and reliability on ABV-collapsed responses.

    Each (instance, challenge) trajectory of ``c`` cycles is reduced to one
    vector with :func:`abv_response`. Uniqueness and uniformity use the
    noiseless nominal vectors. Reliability compares the nominal noiseless
    vector against noisy runs under every condition in ``envs``.
    """
    if len(instances) < 2:
        raise UsageError("the metric suite needs at least two instances")
    challenges = np.asarray(challenges, dtype=np.uint8)
    envs = list(envs) if envs is not None else default_env_sweep()
    nominal = np.stack([abv_response(simulate_batch(inst, fb, challenges, c, NOMINAL, None, faults))
                        for inst in instances])  # (k, m, n)
    per_sample = {}
    per_inst_rel = []
    for i, inst in enumerate(instances):
        samples = []
        for e, env in enumerate(envs):
            traj = simulate_batch(inst, fb, challenges, c, env, [int(noise_seed), i, e], faults)
            samples.append(abv_response(traj))
            per_sample[f"{i}:{env.label}"] = reliability(nominal[i], samples[-1][None])
        per_inst_rel.append(reliability(nominal[i], np.stack(samples)))
    per_inst_uni = [uniformity(nominal[i]) for i in range(len(instances))]
    return MetricReport(
        uniqueness_pct=uniqueness(nominal),
        uniformity_pct=100.0 * np.count_nonzero(nominal) / nominal.size,
        reliability_pct=float(np.mean(per_inst_rel)),
        per_pair_uniqueness=pairwise_distances(nominal),
        per_instance_uniformity=per_inst_uni,
        per_instance_reliability=per_inst_rel,
        per_sample_reliability=per_sample,
        label=label,
    )


def acyclic_metric_suite(instances: Sequence[PufInstance], challenges: np.ndarray,
                         envs: Optional[Sequence[EnvCondition]] = None, noise_seed: int = 0,
                         label: str = "") -> MetricReport:
    """Plain metrics: one evaluation per (instance, challenge, condition)."""
    return cyclic_metric_suite(instances, EMPTY_FEEDBACK, challenges, 1, envs, noise_seed, None, label)


def metric_challenges(n_c: int, m: int, seed: int = 0) -> np.ndarray:
    """Challenge set for the metric suite.

    When ``m`` is a multiple of ``2**n_c`` the full challenge space is tiled so
    every challenge carries equal weight; otherwise ``m`` challenges are drawn
    uniformly (distinct when the space allows it).
    """
    if n_c <= 20 and m % (2 ** n_c) == 0:
        return np.tile(all_challenges(n_c), (m // 2 ** n_c, 1))
    rng = np.random.default_rng(seed)
    return random_challenges(m, n_c, rng, distinct=(n_c > 20 or m <= 2 ** n_c))
