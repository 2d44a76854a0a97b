"""Acceptance battery shared by the ``verify`` subcommand and the test suite.

Each check returns a list of :class:`Case` records. A case passes when its
residual is at most its tolerance; qualitative checks encode their verdict as
a residual of 0 (holds) or 1 (violated) with tolerance 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import fiber_oracle as fo
from .commutator_model import (
    CoeffGrid,
    commutator,
    left_mult_chi,
    phi_bound_check,
    random_grid,
    right_mult_chi,
    support_localization_check,
    verify_iterated_move,
)
from .gram_recursion import decay_profile, gram_recursive, norms, riesz_margin, root_mu_values
from .jones_wenzl import (
    jw,
    jw_annihilation_check,
    jw_bilateral_residual,
    jw_idempotence_residual,
    jw_markov_residual,
    jw_partial_trace_check,
    jw_selfadjoint_residual,
)
from .qnumerics import RecCoeffParams, ScalarContext, alpha_of_q, q_from_N, qdim
from .tl_core import TLElement, compose, enumerate_nc2, markov_trace, tensor

__all__ = ["Case", "SUITES", "CRITERIA", "run_suite", "report"]


@dataclass
class Case:
    name: str
    params: dict
    residual: float
    tol: float
    passed: bool

    def as_json(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _case(name: str, params: dict, residual: float, tol: float) -> Case:
    residual = float(residual)
    return Case(name, params, residual, tol, bool(math.isfinite(residual) and residual <= tol))


def _flag(name: str, params: dict, ok: bool) -> Case:
    return Case(name, params, 0.0 if ok else 1.0, 0.0, bool(ok))


def jw_battery(rng: np.random.Generator, Ns=(3, 5, 7), n_max: int = 10) -> list[Case]:
    checks = {
        "idempotence": jw_idempotence_residual,
        "self_adjoint": jw_selfadjoint_residual,
        "cap_annihilation": jw_annihilation_check,
        "markov_trace_rel": jw_markov_residual,
        "bilateral": jw_bilateral_residual,
    }
    cases = []
    for N in Ns:
        ctx = ScalarContext.from_N(N)
        for name, fn in checks.items():
            lo = 3 if name == "bilateral" else 2
            res = max(fn(n, ctx) for n in range(lo, n_max + 1))
            cases.append(_case(f"jw_{name}", {"N": N, "n_max": n_max}, res, 1e-10))
    return cases


def partial_trace_battery(rng: np.random.Generator, Ns=(3, 5, 7), n_max: int = 10) -> list[Case]:
    cases = []
    for N in Ns:
        ctx = ScalarContext.from_N(N)
        one = max(jw_partial_trace_check(n, ctx, 1, side) for n in range(2, n_max + 1) for side in ("right", "left"))
        multi = max(
            jw_partial_trace_check(n, ctx, b, side, normalized=True)
            for n in range(3, n_max + 1)
            for b in range(2, n)
            for side in ("right", "left")
        )
        cases.append(_case("partial_trace_one_strand", {"N": N, "n_max": n_max}, one, 1e-10))
        cases.append(_case("partial_trace_b_strands_normalized", {"N": N, "n_max": n_max}, multi, 1e-10))
    return cases


def _random_element(rng: np.random.Generator, top: int, bot: int, terms: int = 3) -> TLElement:
    diagrams = enumerate_nc2(top, bot)
    pick = rng.choice(len(diagrams), size=min(terms, len(diagrams)), replace=False)
    coeffs = rng.standard_normal(len(pick)) + 1j * rng.standard_normal(len(pick))
    return TLElement(top, bot, np.array([diagrams[i].matching for i in pick]), coeffs)


def _random_arities(rng: np.random.Generator, cap: int) -> tuple[int, int, int]:
    while True:
        k, l, m = (int(x) for x in rng.integers(0, cap + 1, size=3))
        if (k + l) % 2 == 0 and (l + m) % 2 == 0 and max(k, l, m) > 0:
            return k, l, m


def functor_battery(rng: np.random.Generator, N: int = 3, pairs: int = 200, n_cap: int = 6) -> list[Case]:
    comp = tens = trace = 0.0
    for _ in range(pairs):
        k, l, m = _random_arities(rng, n_cap)
        g, f = _random_element(rng, k, l), _random_element(rng, l, m)
        lhs = fo.realize(compose(f, g, N), N).entries
        comp = max(comp, np.abs(lhs - fo.realize(f, N).entries @ fo.realize(g, N).entries).max())
        a, b = _random_arities(rng, n_cap // 2)[:2]
        c, d = _random_arities(rng, n_cap // 2)[:2]
        x, y = _random_element(rng, a, b), _random_element(rng, c, d)
        kron = np.kron(fo.realize(x, N).entries, fo.realize(y, N).entries)
        tens = max(tens, np.abs(fo.realize(tensor(x, y), N).entries - kron).max())
        s = int(rng.integers(1, n_cap + 1))
        e = _random_element(rng, s, s)
        trace = max(trace, abs(markov_trace(e, N) - np.trace(fo.realize(e, N).entries)))
    cases = [
        _case("functor_compose", {"N": N, "pairs": pairs}, comp, 1e-12),
        _case("functor_tensor", {"N": N, "pairs": pairs}, tens, 1e-12),
        _case("functor_trace", {"N": N, "pairs": pairs}, trace, 1e-12),
    ]
    for NN in (3, 4, 5, 7):
        n = 1
        while NN**n <= fo.BUDGET:
            chk = fo.projection_rank_check(n, NN, seed=int(rng.integers(1 << 31)))
            res = max(
                abs(chk["trace"] - round(chk["d_n"])),
                abs(chk["oracle_rank"] - round(chk["d_n"])),
                chk["idempotence"],
                chk["hermiticity"],
                chk["fixes_oracle_range"],
            )
            cases.append(_case("projection_rank", {"N": NN, "n": n, "d_n": round(chk["d_n"])}, res, 1e-8))
            n += 1
    return cases


def ccirc_battery(rng: np.random.Generator) -> list[Case]:
    cases = []
    for n, N in ((1, 3), (2, 3), (2, 4), (3, 3)):
        b = fo.ccirc_basis(n, N)
        cases.append(_case("ccirc_dimension", {"n": n, "N": N, "expected": fo.ccirc_dimension(n, N)},
                           abs(len(b) - fo.ccirc_dimension(n, N)), 0))
    return cases


def rotation_battery(rng: np.random.Generator) -> list[Case]:
    cases = []
    for n, N in ((1, 3), (2, 3), (3, 3)):
        b = fo.ccirc_basis(n, N)
        R = b.rotation_matrix
        eye = np.eye(len(R))
        unit = np.abs(R.conj().T @ R - eye).max()
        order = np.abs(np.linalg.matrix_power(R, 2 * n) - eye).max()
        raw = np.linalg.eigvals(R)
        snapped = np.exp(1j * math.pi * np.round(np.angle(raw) * n / math.pi) / n)
        cases.append(_case("rho_unitary", {"n": n, "N": N}, unit, 1e-8))
        cases.append(_case("rho_order", {"n": n, "N": N}, order, 1e-8))
        cases.append(_case("rho_eigen_roots", {"n": n, "N": N}, np.abs(raw - snapped).max(), 1e-6))
    return cases


def _branches(k: int, N: int):
    b = fo.ccirc_basis(k, N)
    for s in sorted(set(b.mu_indices)):
        yield s, b.branch(s)[0]


def gram_battery(rng: np.random.Generator, N: int = 3, n_max: int = 6) -> list[Case]:
    cases = []
    q = q_from_N(N)
    for k in (1, 2):
        for s, X in _branches(k, N):
            rec = gram_recursive(k, math.cos(math.pi * s / k), q, n_max)
            dev = max(np.abs(fo.gram_direct(k, s, n, N, X=X).entries - rec[n - k].entries).max()
                      for n in range(k, n_max + 1))
            cases.append(_case("gram_vs_oracle", {"N": N, "k": k, "mu_index": s, "n_max": n_max}, dev, 1e-8))
    return cases


def rec_battery(rng: np.random.Generator, N: int = 3, n_max: int = 6) -> list[Case]:
    cases = []
    for k in (1, 2):
        for s, X in _branches(k, N):
            res = max(fo.check_general_rec(X, p, qq, N)
                      for p in range(n_max - k + 1) for qq in range(n_max - k - p + 1))
            cases.append(_case("one_step_trace", {"N": N, "k": k, "mu_index": s, "n_max": n_max}, res, 1e-9))
    return cases


def riesz_battery(rng: np.random.Generator, N: int = 7, k_max: int = 4, n_max: int = 40) -> list[Case]:
    cases = []
    q = q_from_N(N)
    for k in range(1, k_max + 1):
        for mu in root_mu_values(k):
            r = riesz_margin(k, mu, q, n_max)
            params = {"N": N, "k": k, "mu_re": round(mu, 12), "n_max": n_max}
            cases.append(Case("riesz_margin", params, r.margin, 1.0, bool(r.margin < 1.0 and math.isfinite(r.sup_cond))))
    return cases


def move_battery(rng: np.random.Generator, instances: int = 500) -> list[Case]:
    worst = 0.0
    for _ in range(instances):
        k = int(rng.integers(1, 4))
        params = RecCoeffParams.from_root(k, int(rng.integers(0, 2 * k)))
        z = random_grid(rng, params, q_from_N(int(rng.choice([3, 7]))), 12)
        m = int(rng.integers(0, 4))
        l = int(rng.integers(m, 7))
        p = int(rng.integers(0, 9))
        worst = max(worst, verify_iterated_move(z, m, l, p) / z.norm())
    return [_case("iterated_move", {"instances": instances}, worst, 1e-9)]


def commutator_identity_battery(rng: np.random.Generator, instances: int = 100) -> list[Case]:
    worst = 0.0
    for _ in range(instances):
        k = int(rng.integers(1, 5))
        params = RecCoeffParams.from_root(k, int(rng.integers(0, 2 * k)))
        z = random_grid(rng, params, q_from_N(int(rng.choice([3, 5, 7]))), 8)
        worst = max(worst, (commutator(z) - (left_mult_chi(z) - right_mult_chi(z))).max_abs())
    return [_case("commutator_left_minus_right", {"instances": instances}, worst, 1e-12)]


def phi_battery(rng: np.random.Generator, N: int = 7, R: float = 4.0, p_max: int = 60) -> list[Case]:
    cases = []
    q = q_from_N(N)
    for m in range(3):
        b = phi_bound_check(m, RecCoeffParams(1, 1.0), q, p_max, R)
        params = {"N": N, "k": 1, "mu_re": 1.0, "m": m, "R": R, "p_max": p_max, "K": b.K_empirical}
        cases.append(_flag("phi_bound_stable", params, b.stable and math.isfinite(b.K_empirical)))
    return cases


def localization_battery(rng: np.random.Generator, N: int = 7, instances: int = 200) -> list[Case]:
    q = q_from_N(N)
    params = RecCoeffParams(1, 1.0)
    fails, tight = 0, math.inf
    for _ in range(instances):
        z = random_grid(rng, params, q, 10)
        m = int(rng.integers(0, 3))
        p = int(rng.integers(1, 21))
        r = support_localization_check(z, m, p, R=4.0)
        fails += not r.ok
        if r.lhs > 0:
            tight = min(tight, r.rhs / r.lhs)
    return [_case("support_localization", {"N": N, "instances": instances, "min_rhs_over_lhs": tight}, fails, 0)]


def decay_battery(rng: np.random.Generator) -> list[Case]:
    cases = []
    devs = [fo.pi_abc(1, b, 1, 3).deviation for b in range(1, 5)]
    ratios = [b / a for a, b in zip(devs, devs[1:])]
    cases.append(_flag("pi_deviation_decreasing", {"N": 3, "a": 1, "c": 1, "b_max": 4,
                                                   "max_ratio": max(ratios)}, max(ratios) < 1))
    q5 = q_from_N(5)
    for k in (1, 2, 3):
        for mu in root_mu_values(k):
            prof = decay_profile(gram_recursive(k, mu, q5, 30)[-1])
            cases.append(_flag("gram_band_slope_negative", {"N": 5, "k": k, "mu_re": round(mu, 12), "n": 30,
                                                            "slope": prof.slope}, prof.slope < 0))
    grid = [(i, j) for i in range(4) for j in range(4)]
    rows = fo.orthogonality_probe(1, 1, grid, 3, seed=int(rng.integers(1 << 31)))
    best: dict[int, float] = {}
    for r in rows:
        t = min(r["i"], r["j"], r["ip"], r["jp"])
        best[t] = max(best.get(t, 0.0), r["abs_inner"])
    seq = [best[t] for t in sorted(best)]
    ok = all(b <= a for a, b in zip(seq, seq[1:]))
    cases.append(_flag("probe_non_increasing", {"N": 3, "k": 1, "n": 1, "maxima": seq}, ok))
    return cases


def alpha_battery(rng: np.random.Generator) -> list[Case]:
    q = 1e-6
    ratio = q ** alpha_of_q(q) / q ** (1 / 3)
    return [
        _case("alpha_at_0.15", {"q": 0.15}, abs(alpha_of_q(0.15) - 0.25), 0.02),
        _case("alpha_asymptotic", {"q": q}, abs(ratio / math.exp(2 * math.log(2) / 9) - 1), 0.01),
    ]


CRITERIA: dict[int, tuple[str, Callable[[np.random.Generator], list[Case]]]] = {
    1: ("jw", jw_battery),
    2: ("partial_traces", partial_trace_battery),
    3: ("functor", functor_battery),
    4: ("ccirc", ccirc_battery),
    5: ("rotation", rotation_battery),
    6: ("gram", gram_battery),
    7: ("rec", rec_battery),
    8: ("riesz", riesz_battery),
    9: ("move", move_battery),
    10: ("phi", phi_battery),
    11: ("localization", localization_battery),
    12: ("decay", decay_battery),
    13: ("alpha", alpha_battery),
}

SUITES: dict[str, tuple[int, ...]] = {name: (num,) for num, (name, _) in CRITERIA.items()}
SUITES["all"] = tuple(CRITERIA)
SUITES["commutator"] = (9, 10, 11)
SUITES["oracle"] = (3, 4, 5, 6, 7)


def run_suite(suite: str, seed: int = 0) -> list[Case]:
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}")
    cases: list[Case] = []
    for num in SUITES[suite]:
        # an independent stream per criterion keeps results stable when suites are combined
        rng = np.random.default_rng([seed, num])
        cases.extend(CRITERIA[num][1](rng))
        if num == 9:
            cases.extend(commutator_identity_battery(np.random.default_rng([seed, num, 1])))
    return cases


def report(suite: str, cases: list[Case], config: Optional[dict] = None) -> dict:
    out = {"suite": suite, "cases": [c.as_json() for c in cases]}
    if config:
        out["config"] = config
    return out
