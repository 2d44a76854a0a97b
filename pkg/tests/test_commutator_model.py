import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tlgram.commutator_model import (
    CoeffGrid,
    admissible_R,
    commutator,
    default_R,
    fg_tables,
    left_mult_chi,
    phi_bound_check,
    phi_table,
    phi_table_direct,
    project_Em,
    project_Qm,
    proof_K,
    random_grid,
    right_mult_chi,
    S_constant,
    support_localization_check,
    verify_iterated_move,
)
from tlgram.qnumerics import RecCoeffParams, q_from_N

Q7 = q_from_N(7)
ONE = RecCoeffParams(1, 1.0)


def grid(seed, k=1, s=0, N=7, size=8):
    return random_grid(np.random.default_rng(seed), RecCoeffParams.from_root(k, s), q_from_N(N), size)


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(0, 7), st.sampled_from([3, 5, 7]))
def test_commutator_equals_left_minus_right(seed, k, s, N):
    z = grid(seed, k, s % (2 * k), N)
    assert (commutator(z) - (left_mult_chi(z) - right_mult_chi(z))).max_abs() < 1e-12


def test_chi_action_on_lowest_vector():
    z = CoeffGrid({(0, 0): 1.0}, ONE, Q7)
    out = left_mult_chi(z)
    assert out.support == {(1, 0): 1.0}
    assert right_mult_chi(z).support == {(0, 1): 1.0}


def test_grid_arithmetic_and_projections():
    z = CoeffGrid({(0, 0): 1.0, (2, 3): 2.0, (2, 1): -1.0}, ONE, Q7)
    assert z.norm2() == pytest.approx(6.0)
    assert z[(5, 5)] == 0
    assert project_Em(z, 2).support == {(2, 3): 2.0}
    assert project_Qm(z, 2).support == {(2, 3): 2.0}
    assert (z - z).max_abs() == 0
    with pytest.raises(ValueError):
        CoeffGrid({(-1, 0): 1.0}, ONE, Q7)


@given(st.integers(0, 2), st.integers(0, 3), st.floats(-1, 1), st.sampled_from([3, 7]), st.integers(1, 3))
def test_direct_phi_recursion_matches_induction(m, dl, mu, N, k):
    params = RecCoeffParams(k, mu)
    a = phi_table(m, m + dl, 10, params, q_from_N(N))
    b = phi_table_direct(m, m + dl, 10, params, q_from_N(N))
    for ra, rb in zip(a.rows, b.rows):
        assert np.abs(ra - rb).max() < 1e-10 * max(1.0, np.abs(ra).max())


def test_phi_zeroth_row_and_shape():
    t = phi_table_direct(2, 3, 4, ONE, Q7)
    assert t.rows[0].tolist() == [-1.0, -1.0, -1.0]
    assert [len(r) for r in t.rows] == [3 + 2 * p for p in range(5)]
    assert t.value(0, 1) == -1.0 and t.value(4, 100) == 0.0


def test_fg_base_case():
    tabs = fg_tables(1, 2, 2, ONE, Q7)
    assert tabs.f[0] == {(1, 2): 1.0} and tabs.g[0] == {}


@given(st.integers(0, 10_000), st.integers(0, 3), st.integers(0, 3), st.integers(0, 8), st.sampled_from([3, 7]))
def test_iterated_move_identity(seed, m, dl, p, N):
    z = grid(seed, 2, 1, N, 12)
    assert verify_iterated_move(z, m, m + dl, p) <= 1e-9 * z.norm()


def test_phi_bound_stable_and_frozen():
    # K_empirical obtained by exhaustive search over l in [m, m + 120], p <= 60
    frozen = {0: 1.0, 1: 5.872339220468474, 2: 34.48436792025228}
    for m in range(3):
        b = phi_bound_check(m, ONE, Q7, 60, 4.0)
        assert b.stable and math.isfinite(b.K_empirical)
        assert b.K_empirical == pytest.approx(frozen[m], rel=1e-9)
        assert b.K_empirical <= proof_K(m, Q7)
        assert list(b.running_max) == sorted(b.running_max)


def test_proof_constant_and_series():
    assert proof_K(0, Q7) == pytest.approx(math.prod(1 + Q7 ** (2 * t) for t in range(1, 200)))
    assert proof_K(1, Q7) == pytest.approx(8.000154355221015, rel=1e-12)
    direct = sum(Q7 ** (2 * abs(i)) * 8.0**i for i in range(-200, 200))
    assert S_constant(Q7, 4.0) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        S_constant(0.4, 4.0)


def test_R_selection():
    lo, hi = admissible_R(Q7)
    assert default_R(Q7) == 4.0
    q3 = q_from_N(3)
    assert admissible_R(q3)[0] < default_R(q3) < admissible_R(q3)[1]
    with pytest.raises(ValueError):
        phi_bound_check(0, ONE, Q7, 10, R=hi + 1)


@given(st.integers(0, 10_000), st.integers(0, 2), st.integers(1, 20))
def test_support_localization(seed, m, p):
    z = grid(seed, 1, 0, 7, 10)
    res = support_localization_check(z, m, p, R=4.0)
    assert res.ok and res.lhs <= res.rhs


def test_localization_rejects_bad_p():
    with pytest.raises(ValueError):
        support_localization_check(grid(0), 1, 0)
