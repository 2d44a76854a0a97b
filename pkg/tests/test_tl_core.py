import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tlgram import fiber_oracle as fo
from tlgram.qnumerics import ScalarContext
from tlgram.tl_core import (
    MAX_STRANDS,
    TLDiagram,
    TLElement,
    adjoint,
    cap,
    compose,
    cup,
    enumerate_nc2,
    identity,
    markov_trace,
    nested_cap,
    nested_cup,
    partial_trace_left,
    partial_trace_right,
    tensor,
)


def e(i, n):
    """Generator e_i on n strands (cap-cup at positions i, i+1)."""
    return tensor(tensor(identity(i), compose(cup(), cap(), 1.0)), identity(n - i - 2))


def close(a, b, tol=1e-12):
    return (a - b).max_abs() <= tol


def random_element(seed, top, bot, terms=3):
    rng = np.random.default_rng(seed)
    ds = enumerate_nc2(top, bot)
    idx = rng.choice(len(ds), size=min(terms, len(ds)), replace=False)
    return TLElement.from_terms(top, bot, {ds[i]: complex(*rng.standard_normal(2)) for i in idx})


@pytest.mark.parametrize("k,l", [(0, 0), (1, 1), (2, 0), (3, 3), (4, 6), (5, 7), (8, 8)])
def test_enumeration_counts_are_catalan(k, l):
    m = (k + l) // 2
    assert len(enumerate_nc2(k, l)) == math.comb(2 * m, m) // (m + 1)


def test_odd_boundary_is_empty_and_strand_cap():
    assert enumerate_nc2(2, 1) == []
    with pytest.raises(ValueError):
        enumerate_nc2(MAX_STRANDS + 1, 1)


def test_diagram_validation():
    with pytest.raises(ValueError):
        TLDiagram(2, 2, ((0, 3), (1, 2)))  # crossing
    with pytest.raises(ValueError):
        TLDiagram(2, 0, ((0, 0),))
    d = TLDiagram(2, 2, ((1, 0), (3, 2)))
    assert str(d) == "[(0,1),(2,3)]"
    assert close(TLDiagram(2, 2, ((0, 2), (1, 3))).to_element(), identity(2))
    assert TLDiagram.from_matching(2, 2, d.matching) == d


@pytest.mark.parametrize("delta", [3.0, 5.2])
def test_temperley_lieb_relations(delta):
    n = 4
    e1, e2, e3 = e(0, n), e(1, n), e(2, n)
    assert close(compose(e1, e1, delta), e1 * delta)
    assert close(compose(e1, compose(e2, e1, delta), delta), e1)
    assert close(compose(e2, compose(e1, e2, delta), delta), e2)
    assert close(compose(e1, e3, delta), compose(e3, e1, delta))


def test_loop_and_snake():
    assert compose(cap(), cup(), 7.0).coefficient(TLDiagram(0, 0, ())) == 7.0
    snake = compose(tensor(identity(1), cap()), tensor(cup(), identity(1)), 3.0)
    assert close(snake, identity(1))
    assert compose(nested_cap(3), nested_cup(3), 2.0).coefficient(TLDiagram(0, 0, ())) == 8.0


@given(st.integers(0, 10_000), st.sampled_from([(2, 2, 2), (3, 1, 3), (4, 2, 4), (2, 4, 0)]))
def test_composition_associative(seed, kl):
    k, l, m = kl
    f = random_element(seed, l, m)
    g = random_element(seed + 1, k, l)
    h = random_element(seed + 2, k, k)
    assert close(compose(compose(f, g, 3.0), h, 3.0), compose(f, compose(g, h, 3.0), 3.0))


@given(st.integers(0, 10_000))
def test_adjoint_reverses_composition(seed):
    f = random_element(seed, 2, 4)
    g = random_element(seed + 1, 4, 2)
    lhs = adjoint(compose(f, g, 4.0))
    assert close(lhs, compose(adjoint(g), adjoint(f), 4.0))
    assert close(adjoint(adjoint(f)), f)


@given(st.integers(0, 10_000))
def test_interchange_law(seed):
    f1, g1 = random_element(seed, 2, 2), random_element(seed + 1, 2, 2)
    f2, g2 = random_element(seed + 2, 1, 3), random_element(seed + 3, 3, 1)
    lhs = compose(tensor(f1, f2), tensor(g1, g2), 3.0)
    rhs = tensor(compose(f1, g1, 3.0), compose(f2, g2, 3.0))
    assert close(lhs, rhs)


@given(st.integers(0, 10_000), st.sampled_from([3, 4]))
def test_realization_is_a_functor(seed, N):
    f, g = random_element(seed, 3, 1), random_element(seed + 1, 1, 3)
    fg = fo.realize(compose(f, g, float(N)), N).entries
    assert np.abs(fg - fo.realize(f, N).entries @ fo.realize(g, N).entries).max() < 1e-12
    t = fo.realize(tensor(f, g), N).entries
    assert np.abs(t - np.kron(fo.realize(f, N).entries, fo.realize(g, N).entries)).max() < 1e-12


@given(st.integers(0, 10_000))
def test_partial_traces_match_dense(seed):
    N = 3
    f = random_element(seed, 4, 4, terms=5)
    M = fo.realize(f, N).entries
    R = fo.realize(partial_trace_right(f, 1, float(N)), N).entries
    L = fo.realize(partial_trace_left(f, 2, float(N)), N).entries
    assert np.abs(R - fo.ptrace_right(M, N, 1)).max() < 1e-12
    assert np.abs(L - fo.ptrace_left(M, N, 2)).max() < 1e-12
    assert abs(markov_trace(f, float(N)) - np.trace(M)) < 1e-11


def test_markov_trace_of_identity():
    ctx = ScalarContext.from_q(0.3)
    assert markov_trace(identity(5), ctx) == pytest.approx(ctx.delta ** 5)


def test_arithmetic_and_pruning():
    d = enumerate_nc2(2, 2)
    a = TLElement.from_terms(2, 2, {d[0]: 1.0, d[1]: 1e-16})
    assert len(a.pruned(1e-14)) == 1
    assert (a - a).max_abs() == 0.0
    assert (-a * 2).coefficient(d[0]) == -2.0
    with pytest.raises(ValueError):
        a + identity(3)
