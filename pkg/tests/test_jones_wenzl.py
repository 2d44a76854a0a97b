import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tlgram import fiber_oracle as fo
from tlgram.jones_wenzl import (
    JWCache,
    apply_jw_left,
    apply_jw_right,
    jw,
    jw_annihilation_check,
    jw_bilateral_residual,
    jw_idempotence_residual,
    jw_markov_residual,
    jw_partial_trace_check,
    jw_selfadjoint_residual,
)
from tlgram.qnumerics import ScalarContext, q_from_N
from tlgram.tl_core import TLDiagram, compose, identity, tensor

CTX3 = ScalarContext.from_N(3)


def test_p2_is_identity_minus_scaled_cup_cap():
    for ctx in (CTX3, ScalarContext.from_q(0.2)):
        P = jw(2, ctx)
        assert P.coefficient(TLDiagram(2, 2, ((0, 2), (1, 3)))) == 1.0
        assert P.coefficient(TLDiagram(2, 2, ((0, 1), (2, 3)))) == pytest.approx(-1 / ctx.delta)


def test_p3_exact_coefficients_at_N3():
    # d_0, d_1, d_2 = 1, 3, 8
    P = jw(3, CTX3)
    expected = {
        "[(0,3),(1,4),(2,5)]": 1.0,
        "[(0,3),(1,2),(4,5)]": -3 / 8,
        "[(0,1),(2,5),(3,4)]": -3 / 8,
        "[(0,1),(2,3),(4,5)]": 1 / 8,
        "[(0,5),(1,2),(3,4)]": 1 / 8,
    }
    got = {str(d): c.real for d, c in P.terms.items()}
    assert got.keys() == expected.keys()
    for key, val in expected.items():
        assert got[key] == pytest.approx(val, abs=1e-15)


@pytest.mark.parametrize("n", range(1, 8))
def test_support_is_full_catalan(n):
    assert len(jw(n, CTX3)) == math.comb(2 * n, n) // (n + 1)


@pytest.mark.parametrize("N,n", [(3, 3), (3, 5), (4, 4), (5, 3), (3, 7)])
def test_realization_matches_kernel_projector(N, n):
    P = fo.realize(jw(n, ScalarContext.from_N(N)), N).entries
    assert np.abs(P - fo.projector(n, N)).max() < 1e-10


@pytest.mark.parametrize("n", range(2, 6))
def test_idempotent_by_plain_composition(n):
    P = jw(n, CTX3)
    assert (compose(P, P, CTX3) - P).max_abs() < 1e-12


@given(st.floats(0.02, 0.4), st.integers(2, 7))
def test_battery_residuals_generic_q(q, n):
    ctx = ScalarContext.from_q(q)
    assert jw_idempotence_residual(n, ctx) < 1e-10
    assert jw_selfadjoint_residual(n, ctx) < 1e-10
    assert jw_annihilation_check(n, ctx) < 1e-10
    assert jw_markov_residual(n, ctx) < 1e-10
    if n >= 3:
        assert jw_bilateral_residual(n, ctx) < 1e-10


@pytest.mark.parametrize("side", ["left", "right"])
def test_partial_traces(side):
    ctx = ScalarContext.from_N(5)
    for n in range(2, 8):
        assert jw_partial_trace_check(n, ctx, 1, side) < 1e-10
        for b in range(2, n):
            assert jw_partial_trace_check(n, ctx, b, side, normalized=True) < 1e-10
    with pytest.raises(ValueError):
        jw_partial_trace_check(3, ctx, 3)


def test_factorised_application_matches_composition():
    ctx = ScalarContext.from_N(4)
    X = tensor(jw(2, ctx), identity(3))
    direct = compose(tensor(identity(1), tensor(jw(3, ctx), identity(1))), X, ctx)
    assert (apply_jw_left(3, X, ctx, offset=1) - direct).max_abs() < 1e-12
    direct_r = compose(X, tensor(jw(4, ctx), identity(1)), ctx)
    assert (apply_jw_right(X, 4, ctx) - direct_r).max_abs() < 1e-12
    with pytest.raises(ValueError):
        apply_jw_left(6, X, ctx)


def test_cache_is_thread_safe_and_keyed_by_q():
    cache = JWCache()
    calls = []

    def build():
        calls.append(1)
        return identity(2)

    ctx = ScalarContext.from_q(q_from_N(3))
    with ThreadPoolExecutor(8) as pool:
        list(pool.map(lambda _: cache.get(2, ctx, build), range(32)))
    assert len(calls) == 1 and len(cache) == 1
    cache.get(2, ScalarContext.from_q(0.1), build)
    assert len(cache) == 2


def test_invalid_n():
    with pytest.raises(ValueError):
        jw(0, CTX3)
