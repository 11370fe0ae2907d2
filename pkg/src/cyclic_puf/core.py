"""Behavioral delay models of acyclic arbiter, ring-oscillator and butterfly PUFs.

Delays are expressed in units of the nominal stage delay ``mu``. Every
instance is fully determined by its dimensions, its :class:`VariationModel`
and the two seeds it was sampled from.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bits import to_bits
from .errors import ConfigError, UsageError
from .features import parity_features

DELAY_FLOOR = 0.01


class PufCategory(str, enum.Enum):
    ARBITER = "apuf"
    RING_OSCILLATOR = "ropuf"
    BUTTERFLY = "bpuf"

    @property
    def short_name(self) -> str:
        return {"apuf": "APUF", "ropuf": "ROPUF", "bpuf": "BPUF"}[self.value]


_CATEGORY_CODE = {PufCategory.ARBITER: 1, PufCategory.RING_OSCILLATOR: 2, PufCategory.BUTTERFLY: 3}


@dataclass(frozen=True)
class VariationModel:
    """Process-variation and noise parameters.

    ``sigma_systematic`` is drawn once per lot and shared by every instance
    sampled with the same ``lot_seed``; ``sigma_random`` is drawn per
    instance; ``jitter_sigma`` (relative to ``mu``) per evaluation.
    """

    mu: float = 1.0
    sigma_random: float = 0.05
    sigma_systematic: float = 0.0
    jitter_sigma: float = 0.005

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError(f"mu must be positive, got {self.mu}")
        for name in ("sigma_random", "sigma_systematic", "jitter_sigma"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be non-negative")

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "sigma_random": self.sigma_random,
            "sigma_systematic": self.sigma_systematic,
            "jitter_sigma": self.jitter_sigma,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VariationModel":
        return cls(**{k: float(d[k]) for k in ("mu", "sigma_random", "sigma_systematic", "jitter_sigma") if k in d})


@dataclass(frozen=True)
class EnvCondition:
    delay_scale: float = 1.0
    label: str = "nominal"

    def __post_init__(self):
        if not self.delay_scale > 0:
            raise ConfigError(f"delay_scale must be positive, got {self.delay_scale}")
        if self.label == "nominal" and self.delay_scale != 1.0:
            raise ConfigError("the nominal condition must have delay_scale 1.0")


NOMINAL = EnvCondition()


def default_env_sweep(s: int = 8) -> list:
    """``s`` off-nominal conditions spread evenly over a +/-10 % delay range."""
    if s < 1:
        raise ConfigError("env sweep needs at least one condition")
    scales = np.linspace(0.9, 1.1, s) if s > 1 else np.array([1.1])
    return [EnvCondition(float(round(x, 6)), f"scale-{x:.3f}") for x in scales]


@dataclass(frozen=True, eq=False)
class PufInstance:
    """One simulated chip.

    ``params`` layout per category:

    * arbiter: ``delays[n, n_c, 4]`` with stage delays ordered
      (top-straight, top-cross, bottom-straight, bottom-cross)
    * ring oscillator: ``delays[n, 2, n_c, 2]`` indexed
      (response bit, ring A/B, stage, selecting challenge bit)
    * butterfly: ``mismatch[n, n_c + 1]`` and ``noise_sigma[n]``
    """

    category: PufCategory
    challenge_width: int
    response_width: int
    params: dict
    variation: VariationModel
    lot_seed: int
    instance_seed: int
    instance_id: str = ""

    def __post_init__(self):
        if not self.instance_id:
            object.__setattr__(self, "instance_id", f"{self.category.value}-{self.lot_seed}-{self.instance_seed}")
        for arr in self.params.values():
            arr.setflags(write=False)

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "challenge_width": self.challenge_width,
            "response_width": self.response_width,
            "instance_id": self.instance_id,
            "lot_seed": self.lot_seed,
            "instance_seed": self.instance_seed,
            "variation": self.variation.to_dict(),
            "params": {k: v.tolist() for k, v in sorted(self.params.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PufInstance":
        try:
            inst = cls(
                category=PufCategory(d["category"]),
                challenge_width=int(d["challenge_width"]),
                response_width=int(d["response_width"]),
                params={k: np.array(v, dtype=np.float64) for k, v in d["params"].items()},
                variation=VariationModel.from_dict(d["variation"]),
                lot_seed=int(d["lot_seed"]),
                instance_seed=int(d["instance_seed"]),
                instance_id=d.get("instance_id", ""),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed instance document: {exc}") from exc
        expected = _param_shapes(inst.category, inst.challenge_width, inst.response_width)
        for key, shape in expected.items():
            if key not in inst.params or inst.params[key].shape != shape:
                raise ConfigError(f"instance parameter {key!r} must have shape {shape}")
        return inst


def _param_shapes(category: PufCategory, n_c: int, n: int) -> dict:
    if category is PufCategory.ARBITER:
        return {"delays": (n, n_c, 4)}
    if category is PufCategory.RING_OSCILLATOR:
        return {"delays": (n, 2, n_c, 2)}
    return {"mismatch": (n, n_c + 1), "noise_sigma": (n,)}


def sample_instance(category, n_c: int, n: int, vm: VariationModel = VariationModel(),
                    lot_seed: int = 0, instance_seed: int = 0, instance_id: str = "") -> PufInstance:
    """Sample one instance; identical arguments give bit-identical parameters."""
    category = PufCategory(category)
    if n_c < 1 or n < 1:
        raise ConfigError(f"challenge and response widths must be >= 1, got {n_c}, {n}")
    code = _CATEGORY_CODE[category]
    # butterfly mismatch is the difference of two sampled latch-half delays
    shape = (n, n_c + 1, 2) if category is PufCategory.BUTTERFLY else _param_shapes(category, n_c, n)["delays"]
    lot_rng = np.random.default_rng([int(lot_seed), code, n_c, n])
    inst_rng = np.random.default_rng([int(lot_seed), int(instance_seed), code, n_c, n, 1])
    systematic = lot_rng.normal(0.0, vm.sigma_systematic, size=shape) if vm.sigma_systematic else np.zeros(shape)
    random_part = inst_rng.normal(0.0, vm.sigma_random, size=shape) if vm.sigma_random else np.zeros(shape)
    delays = np.maximum(vm.mu + systematic + random_part, DELAY_FLOOR * vm.mu)
    if category is PufCategory.BUTTERFLY:
        params = {
            "mismatch": delays[..., 0] - delays[..., 1],
            "noise_sigma": np.full(n, math.sqrt(2.0) * vm.jitter_sigma * vm.mu),
        }
    else:
        params = {"delays": delays}
    return PufInstance(category, n_c, n, params, vm, int(lot_seed), int(instance_seed), instance_id)


def eval_batch(inst: PufInstance, challenges: np.ndarray, env: EnvCondition = NOMINAL,
               rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Evaluate a batch of challenges, shape ``(N, n_c)`` -> responses ``(N, n)``.

    With ``rng=None`` the evaluation is noiseless. Otherwise Gaussian jitter
    is drawn from ``rng`` for every path (or ring) total, so the noise stream
    depends on the batch layout.
    """
    ch = np.asarray(challenges)
    if ch.ndim != 2 or ch.shape[1] != inst.challenge_width:
        raise UsageError(f"challenges must have shape (N, {inst.challenge_width}), got {ch.shape}")
    ch = ch.astype(bool)
    scale = env.delay_scale
    jitter = inst.variation.jitter_sigma * inst.variation.mu
    n_rows, n = ch.shape[0], inst.response_width

    if inst.category is PufCategory.ARBITER:
        d = inst.params["delays"] * scale
        top = np.zeros((n_rows, n))
        bottom = np.zeros((n_rows, n))
        for k in range(inst.challenge_width):
            cross = ch[:, k:k + 1]
            new_top = np.where(cross, bottom + d[:, k, 1], top + d[:, k, 0])
            bottom = np.where(cross, top + d[:, k, 3], bottom + d[:, k, 2])
            top = new_top
        if rng is not None and jitter > 0:
            noise = rng.normal(0.0, jitter, size=(n_rows, n, 2))
            top = top + noise[..., 0]
            bottom = bottom + noise[..., 1]
        return (top < bottom).astype(np.uint8)

    if inst.category is PufCategory.RING_OSCILLATOR:
        d = inst.params["delays"] * scale
        chf = ch.astype(np.float64)
        base = d[..., 0].sum(axis=2)  # (n, 2)
        diff = d[..., 1] - d[..., 0]  # (n, 2, n_c)
        ring_a = base[:, 0] + chf @ diff[:, 0, :].T
        ring_b = base[:, 1] + chf @ diff[:, 1, :].T
        if rng is not None and jitter > 0:
            noise = rng.normal(0.0, jitter, size=(n_rows, n, 2))
            ring_a = ring_a + noise[..., 0]
            ring_b = ring_b + noise[..., 1]
        # frequency A > frequency B  <=>  period A < period B
        return (2.0 * ring_a < 2.0 * ring_b).astype(np.uint8)

    phi = parity_features(ch.astype(np.uint8))
    settle = scale * (phi @ inst.params["mismatch"].T)
    if rng is not None:
        settle = settle + rng.normal(0.0, 1.0, size=(n_rows, n)) * inst.params["noise_sigma"]
    return (settle > 0).astype(np.uint8)


def eval_acyclic(inst: PufInstance, ch, env: EnvCondition = NOMINAL, noise_seed: Optional[int] = None) -> np.ndarray:
    """Evaluate a single challenge; ``noise_seed=None`` is deterministic and noiseless."""
    bits = to_bits(ch)
    if bits.size != inst.challenge_width:
        raise UsageError(f"challenge has {bits.size} bits, instance expects {inst.challenge_width}")
    rng = None if noise_seed is None else np.random.default_rng(noise_seed)
    return eval_batch(inst, bits[None, :], env, rng)[0]
