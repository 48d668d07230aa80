import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmsets import Dataset, FunctionSample, ahr_sample, greedy_ahr, sample_linear_utilities
from rmsets.evaluation import InvalidFunctionError

from . import oracles
from .conftest import A, B, C


def test_sampling():
    one = sample_linear_utilities(1, 1, 3)
    assert one.weights.tolist() == [[1.0]]
    s = sample_linear_utilities(10_000, 3, 0)
    assert np.allclose(s.weights.sum(axis=1), 1.0, atol=1e-12) and s.weights.min() >= 0
    assert np.allclose(s.weights.mean(axis=0), 1 / 3, atol=0.02)
    assert np.array_equal(s.weights, sample_linear_utilities(10_000, 3, 0).weights)


def test_hotels_trace(hotels, hotel_utilities):
    sel = greedy_ahr(hotels, 2, hotel_utilities)
    assert sel.indices == (C, A)
    tr = sel.metrics["trace"]
    assert tr[0]["gain"] == pytest.approx(0.6 + 0.2 * 0.35 / 0.8 + 0.2 * 0.575 / 0.6)
    assert sel.metrics["arr"] == pytest.approx(0.0083, abs=1e-4)
    st0 = sel.metrics["state"]
    # first-round gains of A and B
    funcs = [lambda p, w=w: float(np.dot(p, w)) for w in hotel_utilities.weights]
    assert oracles.sample_ahr(hotels.points, [A], funcs, hotel_utilities.probs) == pytest.approx(0.654, abs=1e-3)
    assert oracles.sample_ahr(hotels.points, [B], funcs, hotel_utilities.probs) == pytest.approx(0.800, abs=1e-3)
    assert tr[1]["gain"] == pytest.approx(0.1125)
    assert st0.gain[C] == 0.0 and st0.gain[A] == 0.0


def test_full_selection(hotels, hotel_utilities):
    sel = greedy_ahr(hotels, 4, hotel_utilities)
    assert sorted(sel.indices) == [0, 1, 2, 3]
    assert sel.metrics["ahr"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        greedy_ahr(hotels, 5, hotel_utilities)


def test_zero_function_rejected():
    d = Dataset([[0.0, 0.3], [0.0, 0.7]])
    with pytest.raises(InvalidFunctionError):
        greedy_ahr(d, 1, FunctionSample.linear([[1.0, 0.0], [0.5, 0.5]]))


def test_tie_goes_to_lower_row():
    d = Dataset([[0.5, 0.5], [0.5, 0.5], [0.2, 0.2]])
    assert greedy_ahr(d, 1, FunctionSample.linear([[0.5, 0.5]])).indices == (0,)


def test_chunking_is_invisible():
    rng = np.random.default_rng(2)
    d = Dataset(rng.random((300, 4)))
    s = sample_linear_utilities(30, 4, 1)
    assert greedy_ahr(d, 5, s).indices == greedy_ahr(d, 5, s, chunk=7).indices


@given(st.integers(0, 100_000))
@settings(max_examples=30)
def test_against_naive_greedy_and_bookkeeping(seed):
    rng = np.random.default_rng(seed)
    n, d, r, N = int(rng.integers(3, 13)), int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(1, 21))
    r = min(r, n)
    data = Dataset(rng.random((n, d)) * 0.99 + 0.01)
    sample = sample_linear_utilities(N, d, seed)
    sel = greedy_ahr(data, r, sample)
    funcs = [lambda p, w=w: float(np.dot(p, w)) for w in sample.weights]
    probs = list(sample.probs)
    # every pick has maximal true marginal gain
    chosen = []
    for x in sel.indices:
        base = oracles.sample_ahr(data.points, chosen, funcs, probs) if chosen else 0.0
        gains = [oracles.sample_ahr(data.points, chosen + [j], funcs, probs) - base
                 for j in range(n) if j not in chosen]
        assert oracles.sample_ahr(data.points, chosen + [x], funcs, probs) - base >= max(gains) - 1e-12
        chosen.append(x)
    # running ahr grows by exactly the selected gain
    prev = 0.0
    for s, step in enumerate(sel.metrics["trace"]):
        now = ahr_sample(data, sel.indices[: s + 1], sample)
        assert now - prev == pytest.approx(step["gain"], abs=1e-12)
        assert now >= prev - 1e-15
        prev = now
    state = sel.metrics["state"]
    assert np.all((state.best_happiness >= 0) & (state.best_happiness <= 1))
    assert np.all(state.gain >= 0)
    opt = oracles.exhaustive_ahr(data.points, r, funcs, probs)
    assert sel.metrics["ahr"] >= (1 - 1 / math.e) * opt - 1e-12
