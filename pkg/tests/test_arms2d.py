import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmsets import (
    Dataset, approx_2d_arms, average_happiness_2d, build_envelope, check_inverse_monge, compute_H,
    convex_hull_2d, dual_intersection_x, exact_2d_arms, happiness_integral_F,
)
from rmsets.arms2d import DegenerateDualError, density_integral, dp_tables, envelope_of
from rmsets.datagen import GenSpec, generate

from . import oracles
from .conftest import A, B, C


def random_instance(seed, n=12):
    rng = np.random.default_rng(seed)
    kind = seed % 3
    if kind == 0:
        t = rng.uniform(0, math.pi / 2, n)
        P = np.column_stack([np.cos(t), np.sin(t)]) * rng.uniform(0.8, 1.0, (n, 1))
    elif kind == 1:
        P = rng.random((n, 2))
    else:
        P = np.clip(rng.normal(0.5, 0.2, (n, 2)), 0.01, 1)
    return Dataset(np.clip(P, 0.01, 1.0))


def test_intersections():
    assert dual_intersection_x([0.35, 0.8], [0.6, 0.6]) == pytest.approx(0.2 / 0.45)
    assert dual_intersection_x([0.6, 0.6], [0.8, 0.35]) == pytest.approx(0.25 / 0.45)
    assert dual_intersection_x([0.2, 0.5], [0.7, 0.5]) == 0.0
    with pytest.raises(DegenerateDualError):
        dual_intersection_x([0.2, 0.3], [0.5, 0.6])


def test_envelope_hotels(hotels):
    env = build_envelope(convex_hull_2d(hotels))
    assert env.breakpoints.tolist() == pytest.approx([0, 4 / 9, 5 / 9, 1])
    assert env.ids.tolist() == [C, B, A]
    assert build_envelope([hotels[B]]).breakpoints.tolist() == [0, 1]
    with pytest.raises(ValueError):
        build_envelope(np.array([[0.8, 0.35], [0.6, 0.6]]))
    # B sits far below the chord from C to A: not an upper hull
    with pytest.raises(ValueError):
        build_envelope(np.array([[0.35, 0.8], [0.5, 0.5], [0.8, 0.35]]))


@given(st.integers(0, 10_000))
@settings(max_examples=30)
def test_envelope_midpoints(seed):
    d = random_instance(seed, n=40)
    env = envelope_of(d)
    lo, hi = env.breakpoints[:-1], env.breakpoints[1:]
    mid = 0.5 * (lo + hi)
    heights = np.outer(mid, d.points[:, 0]) + np.outer(1 - mid, d.points[:, 1])
    assert np.allclose(heights.max(axis=1), env.height(mid), atol=1e-12)
    # ordering of dual crossings for i < j < k
    P = env.points
    for i, j, k in itertools.combinations(range(env.c), 3):
        assert dual_intersection_x(P[i], P[k]) <= dual_intersection_x(P[j], P[k]) + 1e-12


def test_F_examples():
    assert happiness_integral_F([0.3, 0.4], [0.3, 0.4], 0.1, 0.7) == pytest.approx(0.6)
    assert happiness_integral_F([0.6, 0.6], [0.35, 0.8], 0, 4 / 9) == pytest.approx(0.6 / 0.45 * math.log(0.8 / 0.6), abs=1e-14)
    assert happiness_integral_F([0.6, 0.6], [0.35, 0.8], 0, 4 / 9) == pytest.approx(0.38357, abs=1e-5)
    # constant denominator (p_x == p_y)
    assert happiness_integral_F([0.2, 0.8], [0.5, 0.5], 0.0, 1.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        happiness_integral_F([0.2, 0.8], [0.0, 0.5], 0.5, 1.0)


@given(st.floats(0.01, 1), st.floats(0.01, 1), st.floats(0.01, 1), st.floats(0.01, 1),
       st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=300)
def test_F_matches_quadrature(qx, qy, px, py, a, b):
    a, b = min(a, b), max(a, b)
    want = oracles.quad_F((qx, qy), (px, py), a, b)
    assert happiness_integral_F((qx, qy), (px, py), a, b) == pytest.approx(want, abs=1e-9, rel=1e-9)
    arr = happiness_integral_F(np.array([[qx, qy]]), np.array([[px, py]]), np.array([a]), np.array([b]))
    assert arr[0] == pytest.approx(want, abs=1e-9, rel=1e-9)


def test_H_hotels(hotels):
    G = compute_H(envelope_of(hotels))
    assert G.entry(0, 2) == pytest.approx(0.38357 + 1 / 9 + 0.38357, abs=1e-4)
    assert G.entry(0, 2) == pytest.approx(oracles.quad_ahr_2d(hotels.points, [B]), abs=1e-12)
    assert compute_H(envelope_of(Dataset([[0.4, 0.7]]))).entry(0, 1) == pytest.approx(1.0)


def _quad_gain(P, env_pts, i, j):
    """ahr({p_i, p_j}) - ahr({p_i}) by quadrature, with i = 0 meaning the empty set."""
    if i == 0:
        return oracles.quad_ahr_2d(P, [j - 1])
    return oracles.quad_ahr_2d(P, [i - 1, j - 1]) - oracles.quad_ahr_2d(P, [i - 1])


@given(st.integers(0, 10_000))
@settings(max_examples=15)
def test_H_against_quadrature(seed):
    d = random_instance(seed, n=10)
    env = envelope_of(d)
    G = compute_H(env)
    P = env.points
    for i in range(G.size):
        for j in range(i + 1, G.size + 1):
            # only the last of consecutive picks matters: the gain of j over i alone
            assert G.entry(i, j) == pytest.approx(_quad_gain(P, P, i, j), abs=1e-10)
    assert np.all(np.triu(G.H, 1) >= -1e-12)
    assert check_inverse_monge(G.completed())


def test_every_F_call_verified_by_quadrature():
    d = random_instance(4, n=12)
    calls = []

    def checked(q, p, a, b):
        out = happiness_integral_F(q, p, a, b)
        Q, Pp, aa, bb = np.broadcast_arrays(np.asarray(q, float), np.asarray(p, float),
                                             np.asarray(a, float)[..., None], np.asarray(b, float)[..., None])
        for qq, pp, lo, hi, v in zip(Q.reshape(-1, 2), Pp.reshape(-1, 2), aa.reshape(-1, 2)[:, 0],
                                     bb.reshape(-1, 2)[:, 0], np.atleast_1d(out).ravel()):
            assert v == pytest.approx(oracles.quad_F(qq, pp, lo, hi), abs=1e-10)
            calls.append(1)
        return out

    G = compute_H(envelope_of(d), integral=checked)
    G.H
    assert len(calls) > 0


def test_exact_hotels(hotels):
    one = exact_2d_arms(hotels, 1)
    assert one.indices == (B,)
    assert one.metrics["ahr"] == pytest.approx(0.8783, abs=1e-4)
    assert oracles.quad_ahr_2d(hotels.points, [A]) == pytest.approx(0.8417, abs=1e-4)
    three = exact_2d_arms(hotels, 3)
    assert three.indices == (C, B, A) and three.metrics["ahr"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        exact_2d_arms(Dataset([[0.1, 0.2, 0.3]]), 1)


@given(st.integers(0, 10_000))
@settings(max_examples=20)
def test_exact_matches_exhaustive(seed):
    d = random_instance(seed)
    hull = list(envelope_of(d).ids)
    for r in (2, 3):
        got = exact_2d_arms(d, r)
        assert got.metrics["ahr"] == pytest.approx(oracles.exhaustive_ahr_2d(d.points, hull, r), abs=1e-9)
        assert average_happiness_2d(d, got) == pytest.approx(got.metrics["ahr"], abs=1e-12)


@given(st.integers(0, 10_000))
@settings(max_examples=20)
def test_dp_smawk_equals_naive_and_monotone_in_r(seed):
    d = random_instance(seed, n=30)
    G = compute_H(envelope_of(d))
    D1, P1 = dp_tables(G, 5, use_smawk=True)
    D2, P2 = dp_tables(G, 5, use_smawk=False)
    for k in range(1, 6):
        assert np.allclose(D1[k], D2[k], atol=1e-12)
    prev = 0.0
    for r in range(1, G.size + 1):
        v = exact_2d_arms(d, r).metrics["ahr"]
        assert v >= prev - 1e-12
        prev = v
    assert prev == pytest.approx(1.0, abs=1e-12)


def test_lazy_and_dense_agree():
    d = random_instance(7, n=60)
    a = exact_2d_arms(d, 4, dense=True)
    b = exact_2d_arms(d, 4, dense=False)
    assert a.indices == b.indices and a.metrics["ahr"] == pytest.approx(b.metrics["ahr"], abs=1e-12)


def test_approx_hotels(hotels):
    sel = approx_2d_arms(hotels, 1, 0.3)
    assert sel.metrics["ahr"] >= 0.8783 - 0.3


def test_approx_tiny_epsilon_is_exact():
    d = random_instance(3, n=30)
    assert approx_2d_arms(d, 3, 1e-6).indices == exact_2d_arms(d, 3).indices


@pytest.mark.parametrize("eps", [0.01, 0.1])
def test_approx_circle(eps):
    d = generate(GenSpec("circle2d", 10_000, 2, 5))
    ex = exact_2d_arms(d, 5)
    ap = approx_2d_arms(d, 5, eps)
    assert ex.metrics["ahr"] - ap.metrics["ahr"] <= eps
    assert ap.metrics["candidates"] <= 4 / eps + 2


def test_density_hook(hotels):
    uniform = exact_2d_arms(hotels, 2, integral=density_integral(lambda a: 1.0))
    assert uniform.metrics["ahr"] == pytest.approx(exact_2d_arms(hotels, 2).metrics["ahr"], abs=1e-10)
    assert uniform.metrics["exact"] is False
    assert exact_2d_arms(hotels, 1, integral=density_integral(lambda a: 2 * a)).indices == (A,)
