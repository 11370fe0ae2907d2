import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from cyclic_puf import config
from cyclic_puf.bits import all_challenges, random_challenges
from cyclic_puf.core import (NOMINAL, EnvCondition, PufCategory, PufInstance, VariationModel, default_env_sweep,
                             eval_acyclic, eval_batch, sample_instance)
from cyclic_puf.errors import ConfigError, UsageError


def arbiter(delays):
    delays = np.asarray(delays, dtype=float)
    return PufInstance(PufCategory.ARBITER, delays.shape[1], delays.shape[0], {"delays": delays},
                       VariationModel(), 0, 0)


def ropuf(delays):
    delays = np.asarray(delays, dtype=float)
    return PufInstance(PufCategory.RING_OSCILLATOR, delays.shape[2], delays.shape[0], {"delays": delays},
                       VariationModel(), 0, 0)


@pytest.mark.parametrize("cat", list(PufCategory))
def test_sampling_is_deterministic(cat):
    a = sample_instance(cat, 4, 4, VariationModel(), 11, 22)
    b = sample_instance(cat, 4, 4, VariationModel(), 11, 22)
    for key in a.params:
        assert np.array_equal(a.params[key], b.params[key])


def test_zero_variance_instances_coincide():
    vm = VariationModel(sigma_random=0.0, sigma_systematic=0.0)
    a = sample_instance("apuf", 4, 4, vm, 3, 1)
    b = sample_instance("apuf", 4, 4, vm, 3, 2)
    assert np.array_equal(a.params["delays"], b.params["delays"])


def test_systematic_bias_makes_instances_agree():
    vm = VariationModel(**config.BIASED_VARIATION)
    ch = random_challenges(1000, 64, np.random.default_rng(0))
    resp = np.stack([eval_batch(sample_instance("apuf", 64, 1, vm, 0, i), ch)[:, 0] for i in range(10)])
    agree = [np.mean(resp[i] == resp[j]) for i in range(10) for j in range(i + 1, 10)]
    assert np.mean(agree) > 0.80


def test_params_are_read_only():
    inst = sample_instance("apuf", 4, 1)
    with pytest.raises(ValueError):
        inst.params["delays"][0, 0, 0] = 5.0


@pytest.mark.parametrize("ch", ["0", "1"])
def test_faster_top_wins(ch):
    inst = arbiter([[[1.0, 1.0, 2.0, 2.0]]])
    assert eval_acyclic(inst, ch).tolist() == [1]


def test_tie_reads_zero():
    inst = arbiter(np.ones((1, 4, 4)))
    for ch in all_challenges(4):
        assert eval_acyclic(inst, ch).tolist() == [0]


def test_ropuf_faster_ring_a_reads_one():
    # ring A selects {1.0, 1.0}, ring B selects {1.0, 1.1} for challenge 00
    d = np.ones((1, 2, 2, 2))
    d[0, 1, 1, 0] = 1.1
    assert eval_acyclic(ropuf(d), "00").tolist() == [1]


@pytest.mark.parametrize("seed", range(5))
def test_arbiter_matches_linear_model_4bit(seed):
    inst = sample_instance("apuf", 4, 1, VariationModel(), 5, seed)
    delays = inst.params["delays"][0]
    for ch in all_challenges(4):
        assert eval_acyclic(inst, ch)[0] == oracles.apuf_linear_response(delays.tolist(), ch.tolist())


def test_ropuf_is_linear_in_raw_bits():
    inst = sample_instance("ropuf", 6, 2, VariationModel(), 1, 1)
    d = inst.params["delays"]
    for ch in all_challenges(6):
        for j in range(2):
            ring = [sum(d[j, r, k, ch[k]] for k in range(6)) for r in range(2)]
            assert eval_acyclic(inst, ch)[j] == int(ring[0] < ring[1])


def test_env_scale_does_not_change_noiseless_response():
    inst = sample_instance("apuf", 16, 2, VariationModel(), 0, 0)
    ch = random_challenges(200, 16, np.random.default_rng(3))
    assert np.array_equal(eval_batch(inst, ch), eval_batch(inst, ch, EnvCondition(1.07, "hot")))


def test_noise_is_seeded():
    inst = sample_instance("bpuf", 16, 4, VariationModel(jitter_sigma=0.05), 0, 0)
    ch = random_challenges(300, 16, np.random.default_rng(0))
    a = eval_batch(inst, ch, rng=np.random.default_rng(9))
    b = eval_batch(inst, ch, rng=np.random.default_rng(9))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, eval_batch(inst, ch))


@pytest.mark.parametrize("cat", list(PufCategory))
def test_instance_round_trip(cat):
    inst = sample_instance(cat, 5, 3, VariationModel(), 2, 7)
    back = PufInstance.from_dict(inst.to_dict())
    ch = all_challenges(5)
    assert np.array_equal(eval_batch(inst, ch), eval_batch(back, ch))
    assert back.instance_id == inst.instance_id


def test_instance_shape_is_checked():
    d = sample_instance("apuf", 4, 1).to_dict()
    d["params"]["delays"][0] = d["params"]["delays"][0][:2]
    with pytest.raises(ConfigError):
        PufInstance.from_dict(d)


@pytest.mark.parametrize("kwargs", [{"mu": 0.0}, {"sigma_random": -1.0}, {"jitter_sigma": -0.1}])
def test_variation_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        VariationModel(**kwargs)


def test_challenge_width_checked():
    with pytest.raises(UsageError):
        eval_acyclic(sample_instance("apuf", 4, 1), "101")


def test_default_sweep_spans_ten_percent():
    envs = default_env_sweep(8)
    assert len(envs) == 8
    assert envs[0].delay_scale == pytest.approx(0.9) and envs[-1].delay_scale == pytest.approx(1.1)
    assert NOMINAL.delay_scale == 1.0


@given(st.integers(1, 12), st.integers(1, 4), st.integers(0, 1000))
def test_responses_are_bits(n_c, n, seed):
    for cat in PufCategory:
        inst = sample_instance(cat, n_c, n, VariationModel(), seed, seed + 1)
        out = eval_batch(inst, random_challenges(min(8, 2**n_c), n_c, np.random.default_rng(seed)))
        assert out.dtype == np.uint8 and set(np.unique(out)) <= {0, 1}
