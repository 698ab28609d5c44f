from __future__ import annotations

import json

import numpy as np
import pytest

from mintime.core.errors import ConfigError, InputError, MintimeError, ThresholdFailure
from mintime.core.formatting import fmt, read_csv, to_jsonable, write_csv, write_json
from mintime.core.rng import SplitMix64
from mintime.core.types import as_vector, unit


def test_splitmix64_reference_vectors_for_seed_zero():
    rng = SplitMix64(0)

    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4


def test_splitmix64_same_seed_same_stream():
    a = SplitMix64(42)
    b = SplitMix64(42)

    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]
    assert SplitMix64(1).next_u64() != SplitMix64(2).next_u64()


def test_uniform_draws_stay_in_range():
    rng = SplitMix64(7)
    draws = [rng.uniform(-2.0, 3.0) for _ in range(1000)]

    assert min(draws) >= -2.0
    assert max(draws) < 3.0


def test_in_ball_is_strictly_inside():
    rng = SplitMix64(3)
    for _ in range(200):
        assert np.linalg.norm(rng.in_ball(2)) < 1.0


def test_sample_indices_are_distinct_and_nested():
    short = SplitMix64(5).sample_indices(100, 10)
    long = SplitMix64(5).sample_indices(100, 20)

    assert len(set(long)) == 20
    assert long[:10] == short
    assert sorted(SplitMix64(5).sample_indices(4, 10)) == [0, 1, 2, 3]


def test_fmt_uses_twelve_significant_digits():
    assert fmt(1.0 / 3.0) == "0.333333333333"
    assert fmt(2.0) == "2"
    assert fmt(1e-20) == "1e-20"


def test_to_jsonable_rounds_floats_and_drops_non_finite():
    payload = {"a": np.array([1.0 / 3.0, 2.0]), "b": float("inf"), "c": np.bool_(True)}

    assert to_jsonable(payload) == {"a": [0.333333333333, 2.0], "b": None, "c": True}


def test_csv_and_json_writers_use_lf_and_header(tmp_path):
    path = write_csv(tmp_path / "nested" / "t.csv", ["x1", "T"], [[0.5, 1.0 / 7.0]])
    raw = path.read_bytes()

    assert raw == b"x1,T\n0.5,0.142857142857\n"
    header, data = read_csv(path)
    assert header == ["x1", "T"]
    assert data.shape == (1, 2)

    json_path = write_json(tmp_path / "m.json", {"v": 0.1 + 0.2})
    assert b"\r" not in json_path.read_bytes()
    assert json.loads(json_path.read_text()) == {"v": 0.3}


def test_as_vector_rejects_non_finite_and_wrong_dimension():
    with pytest.raises(InputError) as exc_info:
        as_vector([1.0, float("nan")])
    assert exc_info.value.exit_code == 2

    with pytest.raises(InputError):
        as_vector([1.0, 2.0], dim=3)

    np.testing.assert_array_equal(as_vector((1, 2)), np.array([1.0, 2.0]))


def test_unit_leaves_zero_vector_alone():
    np.testing.assert_allclose(unit(np.array([3.0, 4.0])), [0.6, 0.8])
    np.testing.assert_array_equal(unit(np.zeros(2)), np.zeros(2))


def test_error_records_carry_code_and_exit_code():
    error = ConfigError("missing key: grid.h", param="grid.h")

    assert isinstance(error, MintimeError)
    assert str(error) == "missing key: grid.h"
    assert error.exit_code == 2
    assert error.to_record() == {
        "code": "config_error",
        "message": "missing key: grid.h",
        "param": "grid.h",
    }
    assert ThresholdFailure("below").exit_code == 5
