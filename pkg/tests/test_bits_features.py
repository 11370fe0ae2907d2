import numpy as np
import pytest
from hypothesis import given, strategies as st

from cyclic_puf.bits import all_challenges, random_challenges, rows_from_str, rows_to_str, to_bits, to_str
from cyclic_puf.errors import UsageError
from cyclic_puf.features import FeatureMap, featurize, parity_features

bitstrings = st.text(alphabet="01", min_size=1, max_size=40)


@given(bitstrings)
def test_string_round_trip(s):
    assert to_str(to_bits(s)) == s


def test_leftmost_character_is_index_zero():
    assert to_bits("1000").tolist() == [1, 0, 0, 0]


@pytest.mark.parametrize("bad", ["10a1", "", "1 0"])
def test_rejects_non_bit_strings(bad):
    with pytest.raises(UsageError):
        to_bits(bad)


def test_width_mismatch():
    with pytest.raises(UsageError):
        to_bits("101", width=4)


def test_rows_round_trip():
    rows = ["0101", "1111", "0000"]
    assert rows_to_str(rows_from_str(rows)) == rows


def test_all_challenges_counts_up():
    assert rows_to_str(all_challenges(2)) == ["00", "01", "10", "11"]


def test_random_challenges_exhaustive_when_n_equals_space():
    got = random_challenges(4, 2, np.random.default_rng(0))
    assert sorted(rows_to_str(got)) == ["00", "01", "10", "11"]


@given(st.integers(1, 200), st.integers(0, 2**31))
def test_random_challenges_distinct_wide(n, seed):
    got = random_challenges(n, 40, np.random.default_rng(seed))
    assert len(set(rows_to_str(got))) == n


def test_random_challenges_too_many():
    with pytest.raises(UsageError):
        random_challenges(5, 2, np.random.default_rng(0))


def test_parity_of_zero_challenge():
    assert parity_features(to_bits("0000")).tolist() == [1, 1, 1, 1, 1]


def test_parity_suffix_products():
    # only the last stage is crossed, so every suffix product is -1
    assert parity_features(to_bits("0001")).tolist() == [-1, -1, -1, -1, 1]


@given(st.text(alphabet="01", min_size=1, max_size=16))
def test_parity_matches_definition(s):
    c = [int(ch) for ch in s]
    want = [int(np.prod([1 - 2 * b for b in c[i:]])) for i in range(len(c))] + [1]
    assert parity_features(to_bits(s)).tolist() == want


def test_raw_bits_map_to_signs():
    x = featurize(np.array([[0, 1, 1, 0]], dtype=np.uint8), FeatureMap.RAW_BITS)
    assert x.tolist() == [[-1, 1, 1, -1]]


@pytest.mark.parametrize("fmap,width", [("parity", 9), ("raw", 8), ("raw+parity", 17)])
def test_feature_widths(fmap, width):
    ch = random_challenges(3, 8, np.random.default_rng(1))
    assert featurize(ch, FeatureMap(fmap)).shape == (3, width) == (3, FeatureMap(fmap).width(8))
