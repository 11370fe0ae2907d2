import numpy as np
import pytest

from cyclic_puf import attack
from cyclic_puf.attack import AttackModel, ModelKind, TrainConfig, evaluate, loss_and_grad, score, train
from cyclic_puf.bits import random_challenges
from cyclic_puf.core import VariationModel, sample_instance
from cyclic_puf.cyclic import EMPTY_FEEDBACK
from cyclic_puf.dataset import CrpDataset, generate_acyclic, generate_cyclic, split_80_20
from cyclic_puf.errors import UsageError
from cyclic_puf.features import FeatureMap, featurize


def labelled(ch, y):
    n = len(ch)
    return CrpDataset(ch, y.reshape(n, 1).astype(np.uint8), np.ones(n, np.int64), np.full(n, "toy"),
                      np.zeros(n, bool), {})


def separable_toy():
    ch = random_challenges(1000, 8, np.random.default_rng(0), distinct=False)
    w = np.random.default_rng(1).normal(size=9)
    return split_80_20(labelled(ch, featurize(ch, FeatureMap.PARITY) @ w > 0), 0)


def test_separable_toy_set_is_fitted():
    ds = separable_toy()
    # 1,000 rows are only four batches per epoch, so train to convergence
    model = train(ds, "parity", "lr", TrainConfig(epochs=500), seed=0)
    assert score(model, ds.train()).test_accuracy_pct >= 99.0


@pytest.mark.xfail(strict=True, reason="an 8-bit space leaves ~51 held-out challenges the model never saw; "
                                       "one near-boundary challenge costs about two points")
def test_separable_toy_set_held_out():
    ds = separable_toy()
    assert evaluate(train(ds, "parity", "lr", TrainConfig(), 0), ds).test_accuracy_pct >= 99.0


def test_coin_flip_labels_are_unlearnable():
    ch = random_challenges(20_000, 32, np.random.default_rng(0))
    y = np.random.default_rng(7).integers(0, 2, size=20_000)
    ds = split_80_20(labelled(ch, y), 0)
    acc = evaluate(train(ds, "parity", "lr", TrainConfig(epochs=5), 0), ds).test_accuracy_pct
    assert 45.0 <= acc <= 55.0


def test_repeated_rows_match_acyclic_accuracy():
    inst = sample_instance("apuf", 32, 1, VariationModel(), 0, 0)
    cfg = TrainConfig(epochs=10)
    plain = split_80_20(generate_acyclic(inst, 5000, 1), 2)
    repeated = split_80_20(generate_cyclic(inst, EMPTY_FEEDBACK, 5000, 4, 1), 2)
    a = evaluate(train(plain, "parity", "lr", cfg, 0), plain).test_accuracy_pct
    b = evaluate(train(repeated, "parity", "lr", cfg, 0), repeated).test_accuracy_pct
    assert abs(a - b) <= 2.0


def test_perfect_model_scores_100():
    inst = sample_instance("apuf", 12, 1, VariationModel(), 0, 3)
    ds = split_80_20(generate_acyclic(inst, 1000), 0)
    delays = inst.params["delays"][0]
    straight, cross = delays[:, 0] - delays[:, 2], delays[:, 1] - delays[:, 3]
    # linear weights of the delay difference; a negative difference reads 1
    w = np.zeros(13)
    w[:12] += (straight - cross) / 2
    w[1:] += (straight + cross) / 2
    model = AttackModel(FeatureMap.PARITY, ModelKind.LOGISTIC, {"w": -w, "b": np.zeros(1)})
    assert evaluate(model, ds).test_accuracy_pct == 100.0


def test_constant_predictor_on_balanced_labels():
    ch = random_challenges(2000, 16, np.random.default_rng(0))
    y = np.arange(2000) % 2
    model = AttackModel(FeatureMap.RAW_BITS, ModelKind.LOGISTIC, {"w": np.zeros(16), "b": np.array([-1.0])})
    rep = score(model, labelled(ch, y))
    assert rep.test_accuracy_pct == 50.0
    assert rep.confusion == {"tp": 0, "tn": 1000, "fp": 0, "fn": 1000}


def numeric_grad(kind, params, X, y, eps=1e-6):
    out = {}
    for key, val in params.items():
        g = np.zeros_like(val)
        for idx in np.ndindex(val.shape):
            old = val[idx]
            val[idx] = old + eps
            up, _ = loss_and_grad(kind, params, X, y)
            val[idx] = old - eps
            down, _ = loss_and_grad(kind, params, X, y)
            val[idx] = old
            g[idx] = (up - down) / (2 * eps)
        out[key] = g
    return out


@pytest.mark.parametrize("kind", list(ModelKind))
def test_gradients_match_finite_differences(kind):
    rng = np.random.default_rng(0)
    X = rng.choice([-1.0, 1.0], size=(16, 6))
    y = rng.integers(0, 2, size=16).astype(float)
    params = attack.init_params(kind, 6, TrainConfig(hidden=5, init_scale=0.5), rng)
    for v in params.values():
        v += rng.normal(0, 0.3, size=v.shape)
    _, g = loss_and_grad(kind, params, X, y)
    num = numeric_grad(kind, params, X, y)
    for key in params:
        assert np.allclose(g[key], num[key], rtol=1e-5, atol=1e-8), key


def test_training_is_seeded():
    inst = sample_instance("apuf", 16, 1, VariationModel(), 0, 0)
    ds = split_80_20(generate_acyclic(inst, 800), 0)
    cfg = TrainConfig(epochs=3, hidden=8)
    a = train(ds, "parity", "mlp", cfg, 5)
    b = train(ds, "parity", "mlp", cfg, 5)
    for key in a.params:
        assert np.array_equal(a.params[key], b.params[key])


def test_model_round_trip():
    inst = sample_instance("apuf", 16, 1, VariationModel(), 0, 0)
    ds = split_80_20(generate_acyclic(inst, 800), 0)
    m = train(ds, "raw+parity", "mlp", TrainConfig(epochs=2, hidden=4), 1)
    back = AttackModel.from_dict(m.to_dict())
    assert np.array_equal(back.predict(ds.challenges), m.predict(ds.challenges))


def test_stuck_at_one_labels_give_majority_rate():
    ch = random_challenges(1000, 16, np.random.default_rng(0))
    ds = split_80_20(labelled(ch, np.ones(1000)), 0)
    assert evaluate(train(ds, "parity", "lr", TrainConfig(epochs=3), 0), ds).test_accuracy_pct == 100.0


def test_requires_split_and_single_bit():
    inst = sample_instance("apuf", 8, 2, VariationModel(), 0, 0)
    ds = generate_acyclic(inst, 100)
    with pytest.raises(UsageError):
        train(ds)
    with pytest.raises(UsageError):
        train(split_80_20(ds, 0))
