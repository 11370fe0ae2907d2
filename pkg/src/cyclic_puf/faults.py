"""Signal-level fault injection: stuck-at-0, stuck-at-1 and persistent bit flips.

Faults sit at three behavioral sites: response bits, feedback XOR outputs and
effective-challenge inputs. Each is applied every cycle, after the clean value
is computed and before it propagates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import NOMINAL, EnvCondition, PufInstance
from .cyclic import FeedbackConfig, simulate_batch, simulate_trajectory
from .errors import ConfigError


class FaultKind(str, enum.Enum):
    STUCK_AT_0 = "sa0"
    STUCK_AT_1 = "sa1"
    BIT_FLIP = "flip"


class SiteKind(str, enum.Enum):
    RESPONSE_BIT = "response"
    FEEDBACK_XOR = "xor"
    CHALLENGE_BIT = "challenge"


class FaultSite(NamedTuple):
    kind: SiteKind
    index: int


def apply_fault(value, kind: FaultKind):
    """Fault one bit (or an array of bits)."""
    kind = FaultKind(kind)
    if kind is FaultKind.STUCK_AT_0:
        return np.zeros_like(value) if isinstance(value, np.ndarray) else 0
    if kind is FaultKind.STUCK_AT_1:
        return np.ones_like(value) if isinstance(value, np.ndarray) else 1
    return value ^ 1


@dataclass(frozen=True)
class FaultSpec:
    faults: tuple = ()

    def __post_init__(self):
        norm = tuple((FaultSite(SiteKind(s[0]), int(s[1])), FaultKind(k)) for s, k in self.faults)
        sites = [s for s, _ in norm]
        if len(set(sites)) != len(sites):
            raise ConfigError("at most one fault per site")
        object.__setattr__(self, "faults", norm)

    def __len__(self):
        return len(self.faults)

    def validate(self, n_c: int, n: int, n_taps: int) -> "FaultSpec":
        limits = {SiteKind.RESPONSE_BIT: n, SiteKind.FEEDBACK_XOR: n_taps, SiteKind.CHALLENGE_BIT: n_c}
        for site, _ in self.faults:
            if not 0 <= site.index < limits[site.kind]:
                raise ConfigError(f"fault site {site.kind.value}[{site.index}] out of range")
        return self

    def apply(self, group: str, values: np.ndarray) -> np.ndarray:
        """Apply every fault of one site group to a ``(N, width)`` bit array."""
        group = SiteKind(group)
        hits = [(s.index, k) for s, k in self.faults if s.kind is group]
        if not hits:
            return values
        out = values.copy()
        for idx, kind in hits:
            out[:, idx] = apply_fault(out[:, idx], kind)
        return out

    def to_list(self) -> list:
        return [{"site": s.kind.value, "index": s.index, "kind": k.value} for s, k in self.faults]

    @classmethod
    def from_list(cls, items) -> "FaultSpec":
        return cls(tuple(((d["site"], d["index"]), d["kind"]) for d in items))


def all_sites(n_c: int, n: int, n_taps: int) -> list:
    return ([FaultSite(SiteKind.RESPONSE_BIT, i) for i in range(n)]
            + [FaultSite(SiteKind.FEEDBACK_XOR, i) for i in range(n_taps)]
            + [FaultSite(SiteKind.CHALLENGE_BIT, i) for i in range(n_c)])


def sample_fault_spec(inst: PufInstance, fb: FeedbackConfig, count: int, seed: int) -> FaultSpec:
    """Pick ``count`` distinct sites uniformly, each with a uniform fault kind."""
    sites = all_sites(inst.challenge_width, inst.response_width, len(fb))
    if not 0 <= count <= len(sites):
        raise ConfigError(f"cannot place {count} faults on {len(sites)} sites")
    rng = np.random.default_rng([int(seed), count, len(sites)])
    picked = sorted(rng.choice(len(sites), size=count, replace=False).tolist())
    kinds = rng.integers(0, 3, size=count)
    order = list(FaultKind)
    return FaultSpec(tuple((sites[p], order[k]) for p, k in zip(picked, kinds)))


@dataclass(frozen=True)
class FaultyPuf:
    """An instance plus feedback wiring with a fault spec baked in."""

    inst: PufInstance
    fb: FeedbackConfig
    spec: FaultSpec

    def simulate(self, ext, c: int, env: EnvCondition = NOMINAL, noise_seed: Optional[int] = None):
        return simulate_trajectory(self.inst, self.fb, ext, c, env, noise_seed, self.spec)

    def simulate_batch(self, ext: np.ndarray, c: int, env: EnvCondition = NOMINAL, noise_seed: Optional[int] = None):
        return simulate_batch(self.inst, self.fb, ext, c, env, noise_seed, self.spec)


def faulty_instance(inst: PufInstance, fb: FeedbackConfig, spec: FaultSpec) -> FaultyPuf:
    spec.validate(inst.challenge_width, inst.response_width, len(fb))
    return FaultyPuf(inst, fb, spec)
