"""Feedback wiring around an acyclic PUF core and fixed-challenge trajectories.

The loop is simulated synchronously: once per clock cycle the response is
registered and fed back through the tap XORs into the challenge inputs.
The feedback register powers on at all zeros.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .bits import rows_to_str, to_bits, to_str
from .core import NOMINAL, EnvCondition, PufInstance, eval_batch
from .errors import ConfigError, UsageError

DEFAULT_CYCLES = 64


class Tap(NamedTuple):
    resp_idx: int
    ch_idx: int
    target_pos: int


@dataclass(frozen=True)
class FeedbackConfig:
    """Feedback taps: response bit ``resp_idx`` XOR external challenge bit
    ``ch_idx`` drives challenge input ``target_pos``."""

    taps: tuple = ()

    def __post_init__(self):
        taps = tuple(Tap(*map(int, t)) for t in self.taps)
        object.__setattr__(self, "taps", taps)
        targets = [t.target_pos for t in taps]
        if len(set(targets)) != len(targets):
            raise ConfigError("feedback target positions must be distinct")

    def __len__(self):
        return len(self.taps)

    def validate(self, n_c: int, n: int) -> "FeedbackConfig":
        for t in self.taps:
            if not 0 <= t.resp_idx < n:
                raise ConfigError(f"tap {t}: response index out of range for width {n}")
            if not (0 <= t.ch_idx < n_c and 0 <= t.target_pos < n_c):
                raise ConfigError(f"tap {t}: challenge index out of range for width {n_c}")
        return self

    @classmethod
    def sample(cls, n_c: int, n: int, count: int, seed: int) -> "FeedbackConfig":
        """Uniformly random taps with distinct target positions."""
        if count > n_c:
            raise ConfigError(f"cannot drive {count} distinct positions of a {n_c}-bit challenge")
        rng = np.random.default_rng([int(seed), n_c, n, count])
        targets = rng.choice(n_c, size=count, replace=False)
        resp = rng.integers(0, n, size=count)
        src = rng.integers(0, n_c, size=count)
        return cls(tuple(Tap(int(r), int(s), int(t)) for r, s, t in zip(resp, src, targets)))

    def to_list(self) -> list:
        return [list(t) for t in self.taps]

    @classmethod
    def from_list(cls, taps) -> "FeedbackConfig":
        return cls(tuple(tuple(t) for t in taps))

    @classmethod
    def parse(cls, text: str) -> "FeedbackConfig":
        """Parse ``"r:c:p,r:c:p"``; an empty string means no feedback."""
        text = text.strip()
        if not text:
            return cls()
        try:
            return cls(tuple(tuple(int(x) for x in part.split(":")) for part in text.split(",")))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad tap spec {text!r}; expected resp:ch:pos[,resp:ch:pos...]") from exc


EMPTY_FEEDBACK = FeedbackConfig()


def effective_challenges(ext: np.ndarray, prev: np.ndarray, fb: FeedbackConfig, faults=None) -> np.ndarray:
    """Batch form of :func:`effective_challenge`; ``ext`` is (N, n_c), ``prev`` (N, n)."""
    eff = np.array(ext, dtype=np.uint8, copy=True)
    if fb.taps:
        taps = np.array(fb.taps, dtype=np.int64)
        xor_out = ext[:, taps[:, 1]] ^ prev[:, taps[:, 0]]
        if faults is not None:
            xor_out = faults.apply("xor", xor_out)
        eff[:, taps[:, 2]] = xor_out
    if faults is not None:
        eff = faults.apply("challenge", eff)
    return eff


def effective_challenge(ext, prev_resp, fb: FeedbackConfig) -> np.ndarray:
    ext = to_bits(ext)
    prev = to_bits(prev_resp)
    fb.validate(ext.size, prev.size)
    return effective_challenges(ext[None, :], prev[None, :], fb)[0]


def simulate_batch(inst: PufInstance, fb: FeedbackConfig, ext: np.ndarray, c: int,
                   env: EnvCondition = NOMINAL, noise_seed: Optional[int] = None, faults=None) -> np.ndarray:
    """Trajectories for many held challenges at once.

    :param ext: external challenges, shape ``(N, n_c)``
    :param c: number of clock cycles each challenge is held
    :param faults: optional :class:`~cyclic_puf.faults.FaultSpec` applied every cycle
    :return: responses of shape ``(N, c, n)``
    """
    if c < 1:
        raise UsageError("a trajectory needs at least one cycle")
    ext = np.asarray(ext, dtype=np.uint8)
    if ext.ndim != 2 or ext.shape[1] != inst.challenge_width:
        raise UsageError(f"external challenges must have shape (N, {inst.challenge_width})")
    fb.validate(inst.challenge_width, inst.response_width)
    if faults is not None:
        faults.validate(inst.challenge_width, inst.response_width, len(fb))
    rng = None if noise_seed is None else np.random.default_rng(noise_seed)
    out = np.zeros((ext.shape[0], c, inst.response_width), dtype=np.uint8)
    prev = np.zeros((ext.shape[0], inst.response_width), dtype=np.uint8)
    for i in range(c):
        resp = eval_batch(inst, effective_challenges(ext, prev, fb, faults), env, rng)
        if faults is not None:
            resp = faults.apply("response", resp)
        out[:, i] = resp
        prev = resp
    return out


class ModeKind(str, enum.Enum):
    BINARY = "binary"
    STEADY_STATE = "steady-state"
    OSCILLATING = "oscillating"
    PSEUDO_RANDOM = "pseudo-random"


@dataclass(frozen=True)
class ResponseMode:
    kind: ModeKind
    transient_len: Optional[int] = None
    period: Optional[int] = None

    def __post_init__(self):
        if self.kind is ModeKind.STEADY_STATE and not (self.transient_len or 0) >= 1:
            raise ValueError("steady-state mode needs transient_len >= 1")
        if self.kind is ModeKind.OSCILLATING and not (self.period or 0) >= 2:
            raise ValueError("oscillating mode needs period >= 2")

    def to_dict(self) -> dict:
        d = {"tag": self.kind.value}
        if self.transient_len is not None:
            d["transient_len"] = self.transient_len
        if self.period is not None:
            d["period"] = self.period
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResponseMode":
        return cls(ModeKind(d["tag"]), d.get("transient_len"), d.get("period"))

    def __str__(self):
        if self.kind is ModeKind.STEADY_STATE:
            return f"steady-state(transient={self.transient_len})"
        if self.kind is ModeKind.OSCILLATING:
            return f"oscillating(transient={self.transient_len}, period={self.period})"
        return self.kind.value


@dataclass(frozen=True, eq=False)
class Trajectory:
    challenge: np.ndarray
    responses: np.ndarray  # (c, n)

    @property
    def cycles(self) -> int:
        return self.responses.shape[0]

    def to_dict(self, mode: Optional[ResponseMode] = None) -> dict:
        return {
            "challenge": to_str(self.challenge),
            "cycles": self.cycles,
            "mode": (mode or classify_mode(self)).to_dict(),
            "responses": rows_to_str(self.responses),
        }


def simulate_trajectory(inst: PufInstance, fb: FeedbackConfig, ext, c: int = DEFAULT_CYCLES,
                        env: EnvCondition = NOMINAL, noise_seed: Optional[int] = None, faults=None) -> Trajectory:
    ext = to_bits(ext, inst.challenge_width) if isinstance(ext, str) else to_bits(ext)
    if ext.size != inst.challenge_width:
        raise UsageError(f"challenge has {ext.size} bits, instance expects {inst.challenge_width}")
    responses = simulate_batch(inst, fb, ext[None, :], c, env, noise_seed, faults)[0]
    return Trajectory(ext, responses)


def first_recurrence(responses: np.ndarray) -> Optional[tuple]:
    """Return 0-based ``(i, j)`` for the first ``j`` whose vector already
    appeared at ``i < j``, or ``None`` if every vector is distinct."""
    seen = {}
    for j, row in enumerate(np.asarray(responses, dtype=np.uint8)):
        key = row.tobytes()
        if key in seen:
            return seen[key], j
        seen[key] = j
    return None


def classify_mode(traj) -> ResponseMode:
    """Label a noiseless trajectory by its first state recurrence."""
    responses = traj.responses if isinstance(traj, Trajectory) else np.asarray(traj)
    hit = first_recurrence(responses)
    if hit is None:
        return ResponseMode(ModeKind.PSEUDO_RANDOM)
    i, j = hit
    period = j - i
    # distinct states precede the first repeat, so this cannot exceed 2**n
    assert j <= 2 ** responses.shape[1]
    if period == 1:
        if i == 0:
            return ResponseMode(ModeKind.BINARY)
        return ResponseMode(ModeKind.STEADY_STATE, transient_len=i)
    return ResponseMode(ModeKind.OSCILLATING, transient_len=i, period=period)


def replay(responses: np.ndarray, mode: ResponseMode) -> np.ndarray:
    """Re-expand a trajectory from its transient and one period.

    Used to check that a classification reproduces the observed sequence.
    """
    responses = np.asarray(responses)
    c = responses.shape[0]
    if mode.kind is ModeKind.PSEUDO_RANDOM:
        return responses.copy()
    transient = mode.transient_len or 0
    period = mode.period or 1
    idx = np.arange(c)
    idx = np.where(idx < transient, idx, transient + (idx - transient) % period)
    return responses[idx]


@dataclass(frozen=True, eq=False)
class Crm:
    """A held challenge, its response mode and the distinct responses seen."""

    challenge: np.ndarray
    mode: ResponseMode
    response_set: tuple

    def to_dict(self) -> dict:
        return {
            "challenge": to_str(self.challenge),
            "mode": self.mode.to_dict(),
            "response_set": [to_str(r) for r in self.response_set],
        }


def distinct_in_order(responses: np.ndarray) -> tuple:
    seen = set()
    out = []
    for row in np.asarray(responses, dtype=np.uint8):
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(row.copy())
    return tuple(out)


def collect_crm(inst: PufInstance, fb: FeedbackConfig, ext, c: int = DEFAULT_CYCLES,
                env: EnvCondition = NOMINAL, faults=None) -> Crm:
    traj = simulate_trajectory(inst, fb, ext, c, env, None, faults)
    return Crm(traj.challenge, classify_mode(traj), distinct_in_order(traj.responses))


def mode_histogram(inst: PufInstance, fb: FeedbackConfig, challenges: np.ndarray, c: int = DEFAULT_CYCLES,
                   env: EnvCondition = NOMINAL, faults=None) -> Counter:
    """Count response-mode kinds over a set of held challenges."""
    trajs = simulate_batch(inst, fb, challenges, c, env, None, faults)
    return Counter(classify_mode(t).kind.value for t in trajs)
