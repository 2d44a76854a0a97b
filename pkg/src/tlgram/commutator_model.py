"""Coefficient model of one cyclic bimodule: vectors ``z = sum z_{i,j} w_{i,j}``.

Left and right multiplication by the generator ``chi_1`` act on the grid
through the structure constants ``A``, ``B``, ``C``. The families ``f``, ``g`` and
``phi`` express a single coefficient ``z_{m,l}`` through far-away coefficients
and the commutator ``[chi_1, z]``; their growth controls how much of an
almost-commuting vector can live near the axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional

import numpy as np

from .qnumerics import RecCoeffParams, coeff_ABCD, coeff_D

__all__ = [
    "CoeffGrid",
    "PhiTable",
    "FGTables",
    "left_mult_chi",
    "right_mult_chi",
    "commutator",
    "fg_tables",
    "phi_table",
    "phi_table_direct",
    "verify_iterated_move",
    "default_R",
    "admissible_R",
    "PhiBound",
    "phi_bound_check",
    "proof_K",
    "project_Em",
    "project_Qm",
    "S_constant",
    "LocalizationResult",
    "support_localization_check",
    "random_grid",
]

Index = tuple[int, int]


@dataclass(frozen=True)
class CoeffGrid:
    """Finitely supported coefficients; negative indices read as zero."""

    support: Mapping[Index, complex]
    params: RecCoeffParams
    q: float

    def __post_init__(self) -> None:
        clean = {}
        for (i, j), v in self.support.items():
            if i < 0 or j < 0:
                raise ValueError("grid indices must be non-negative")
            if v != 0:
                clean[(int(i), int(j))] = complex(v)
        object.__setattr__(self, "support", clean)

    def __getitem__(self, ij: Index) -> complex:
        return self.support.get(ij, 0j)

    def with_support(self, support: Mapping[Index, complex]) -> "CoeffGrid":
        return CoeffGrid(support, self.params, self.q)

    def norm2(self) -> float:
        """Squared coefficient l2 norm."""
        return float(sum(abs(v) ** 2 for v in self.support.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def __sub__(self, other: "CoeffGrid") -> "CoeffGrid":
        out = dict(self.support)
        for ij, v in other.support.items():
            out[ij] = out.get(ij, 0j) - v
        return self.with_support(out)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.support.values()), default=0.0)


@lru_cache(maxsize=200_000)
def _abc(n: int, p: int, k: int, mu_re: float, q: float) -> tuple[float, float, float]:
    if n < 1:
        return 0.0, 0.0, 0.0
    return coeff_ABCD(n, p, RecCoeffParams(k, mu_re), q)


@lru_cache(maxsize=200_000)
def _d(n: int, j: int, k: int, mu_re: float, q: float) -> float:
    return coeff_D(n, j, RecCoeffParams(k, mu_re), q)


def _add(out: dict, ij: Index, v: complex) -> None:
    if ij[0] >= 0 and ij[1] >= 0 and v != 0:
        out[ij] = out.get(ij, 0j) + v


def left_mult_chi(z: CoeffGrid) -> CoeffGrid:
    """``chi_1 z``, scattering each ``w_{i,j}`` by the structure constants."""
    k, mu, q = z.params.k, z.params.mu_re, z.q
    out: dict = {}
    for (i, j), v in z.support.items():
        A, B, C = _abc(i + k + j, j, k, mu, q)
        _add(out, (i + 1, j), v)
        _add(out, (i - 1, j), (1 - A) * v)
        _add(out, (i, j - 1), B * v)
        _add(out, (i + 1, j - 2), C * v)
    return z.with_support(out)


def right_mult_chi(z: CoeffGrid) -> CoeffGrid:
    """``z chi_1``: the mirror of the left action."""
    k, mu, q = z.params.k, z.params.mu_re, z.q
    out: dict = {}
    for (i, j), v in z.support.items():
        A, B, C = _abc(i + k + j, i, k, mu, q)
        _add(out, (i, j + 1), v)
        _add(out, (i, j - 1), (1 - A) * v)
        _add(out, (i - 1, j), B * v)
        _add(out, (i - 2, j + 1), C * v)
    return z.with_support(out)


def commutator(z: CoeffGrid) -> CoeffGrid:
    """``[chi_1, z]`` from the closed gather formula, using ``D``."""
    k, mu, q = z.params.k, z.params.mu_re, z.q
    targets = set()
    for i, j in z.support:
        for di, dj in ((1, 0), (0, 1), (-1, 0), (0, -1), (1, -2), (-2, 1)):
            if i + di >= 0 and j + dj >= 0:
                targets.add((i + di, j + dj))
    out = {}
    for i, j in sorted(targets):
        n1 = i + k + j + 1
        val = (
            z[(i - 1, j)]
            - z[(i, j - 1)]
            + _d(n1, j, k, mu, q) * z[(i + 1, j)]
            - _d(n1, i, k, mu, q) * z[(i, j + 1)]
            + _abc(n1, j + 2, k, mu, q)[2] * z[(i - 1, j + 2)]
            - _abc(n1, i + 2, k, mu, q)[2] * z[(i + 2, j - 1)]
        )
        if val != 0:
            out[(i, j)] = val
    return z.with_support(out)


@dataclass(frozen=True)
class PhiTable:
    """Rows ``phi^{l,p}_i`` for ``0 <= p <= p_max``, stored as arrays indexed by ``i + p``."""

    m: int
    l: int
    params: RecCoeffParams
    q: float
    rows: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def p_max(self) -> int:
        return len(self.rows) - 1

    def value(self, p: int, i: int) -> float:
        if not -p <= i <= self.m + p:
            return 0.0
        return float(self.rows[p][i + p])

    @property
    def values(self) -> dict[tuple[int, int], float]:
        return {(p, i - p): float(v) for p, row in enumerate(self.rows) for i, v in enumerate(row)}


@dataclass(frozen=True)
class FGTables:
    """``f^{l,p}`` and ``g^{l,p}`` for ``0 <= p <= p_max`` as sparse maps, with the ``phi`` rows."""

    m: int
    l: int
    f: tuple[dict, ...] = field(repr=False)
    g: tuple[dict, ...] = field(repr=False)
    phi: PhiTable = field(repr=False)


def _check_ml(m: int, l: int) -> None:
    if m < 0 or l < m:
        raise ValueError("need 0 <= m <= l")


def fg_tables(m: int, l: int, p_max: int, params: RecCoeffParams, q: float) -> FGTables:
    """Build ``f``, ``g`` and ``phi`` by the defining induction on ``p``."""
    _check_ml(m, l)
    k, mu = params.k, params.mu_re
    f = [{(m, l): 1.0}]
    g: list[dict] = [{}]
    phis: list[np.ndarray] = []
    for p in range(p_max + 1):
        fp = f[p]
        # phi_i = -sum_{s=-p}^{i} f_{m+p-s, l+p+s}
        terms = np.array([fp.get((m + p - s, l + p + s), 0.0) for s in range(-p, m + p + 1)])
        phi = -np.cumsum(terms)
        phis.append(phi)
        if p == p_max:
            break
        ph = lambda i: phi[i + p] if -p <= i <= m + p else 0.0  # noqa: E731
        total = m + l + 2 * p
        g_next = {ij: v for ij, v in g[p].items() if ij[0] + ij[1] <= total - 1}
        for i in range(total + 2):
            v = ph(m + p - i)
            if v != 0:
                g_next[(i, total + 1 - i)] = v
        f_next = {}
        for i in range(total + 3):
            j = total + 2 - i
            n = i + k + j
            v = (
                _d(n, i, k, mu, q) * ph(m + p - i)
                - _d(n, j, k, mu, q) * ph(m + p - i + 1)
                + _abc(n, i, k, mu, q)[2] * ph(m + p - i + 2)
                - _abc(n, j, k, mu, q)[2] * ph(m + p - i - 1)
            )
            if v != 0:
                f_next[(i, j)] = v
        f.append(f_next)
        g.append(g_next)
    table = PhiTable(m, l, params, q, tuple(phis))
    return FGTables(m, l, tuple(f), tuple(g), table)


def phi_table(m: int, l: int, p_max: int, params: RecCoeffParams, q: float) -> PhiTable:
    return fg_tables(m, l, p_max, params, q).phi


def phi_table_direct(m: int, l: int, p_max: int, params: RecCoeffParams, q: float) -> PhiTable:
    """``phi`` rows from the closed one-step recursion, without passing through ``f``."""
    _check_ml(m, l)
    k, mu = params.k, params.mu_re
    rows = [-np.ones(m + 1)]
    for p in range(p_max):
        prev = rows[-1]
        ph = lambda i: prev[i + p] if -p <= i <= m + p else 0.0  # noqa: E731
        n = m + l + 2 * p + k + 2
        D = lambda j: _d(n, j, k, mu, q)  # noqa: E731
        C = lambda j: _abc(n, j, k, mu, q)[2]  # noqa: E731
        new = np.zeros(m + 2 * p + 3)
        acc = 0.0
        for i in range(-p - 1, m + p + 2):
            # acc holds the tail sum over s <= i-2 of the i-independent part
            new[i + p + 1] = (
                ph(i) * (D(l + p + 1 + i) - C(m + p - i + 2))
                - ph(i + 1) * C(m + p - i + 1)
                + acc
                + ph(i - 1) * (D(l + p + i) - D(m + p - i + 1) - C(m + p - i + 3))
            )
            acc += ph(i - 1) * (D(l + p + i) - D(m + p - i + 1) + C(l + p + i + 2) - C(m + p - i + 3))
        rows.append(new)
    return PhiTable(m, l, params, q, tuple(rows))


def verify_iterated_move(z: CoeffGrid, m: int, l: int, p: int) -> float:
    """``|z_{m,l} - sum f z - sum g [chi_1, z]|``."""
    tabs = fg_tables(m, l, p, z.params, z.q)
    comm = commutator(z)
    total = z[(m, l)]
    total -= sum(v * z[ij] for ij, v in tabs.f[p].items())
    total -= sum(v * comm[ij] for ij, v in tabs.g[p].items())
    return float(abs(total))


def admissible_R(q: float) -> tuple[float, float]:
    return 3.4, 0.995 / (2 * q * q)


def default_R(q: float) -> float:
    lo, hi = admissible_R(q)
    R = min(4.0, 0.9 * hi)
    return R if R > lo else (lo + hi) / 2


def S_constant(q: float, R: float) -> float:
    """``sum_{i in Z} q^{2|i|} (2R)^i``."""
    r_pos, r_neg = 2 * R * q * q, q * q / (2 * R)
    if r_pos >= 1:
        raise ValueError("series diverges for this R")
    return 1.0 / (1.0 - r_pos) + r_neg / (1.0 - r_neg)


def proof_K(m: int, q: float, terms: int = 200) -> float:
    """Closed-form bound ``(6q^2)^{-m} prod_t (1 + q^{2t})``, recorded for comparison only."""
    return (6 * q * q) ** (-m) * math.prod(1 + q ** (2 * t) for t in range(1, terms))


@dataclass(frozen=True)
class PhiBound:
    K_empirical: float
    stable: bool
    running_max: tuple[float, ...] = field(repr=False)
    R: float = 4.0


def phi_bound_check(
    m: int,
    params: RecCoeffParams,
    q: float,
    p_max: int,
    R: Optional[float] = None,
    l_values: Optional[Iterable[int]] = None,
) -> PhiBound:
    """Empirical ``K = max |phi^{l,p}_i| q^{-2|i|} (2R)^{-i}`` and whether it has settled.

    The running maximum over ``p`` must be constant over the last ``p_max // 2`` levels.
    """
    R = default_R(q) if R is None else R
    lo, hi = admissible_R(q)
    if not lo < R < hi:
        raise ValueError(f"R={R} outside the admissible interval ({lo}, {hi:.4g})")
    ls = list(range(m, m + 2 * p_max + 1)) if l_values is None else list(l_values)
    per_p = np.zeros(p_max + 1)
    for l in ls:
        tab = phi_table_direct(m, l, p_max, params, q)
        for p, row in enumerate(tab.rows):
            i = np.arange(-p, m + p + 1)
            weight = q ** (-2.0 * np.abs(i)) * (2 * R) ** (-i.astype(float))
            per_p[p] = max(per_p[p], float(np.max(np.abs(row) * weight)))
    running = np.maximum.accumulate(per_p)
    window = running[p_max - p_max // 2 :]
    stable = bool(np.isfinite(running[-1]) and np.all(window == running[-1]))
    return PhiBound(float(running[-1]), stable, tuple(running), R)


def project_Em(z: CoeffGrid, m: int) -> CoeffGrid:
    """Keep coefficients with ``i >= m`` and ``j >= m``."""
    return z.with_support({ij: v for ij, v in z.support.items() if ij[0] >= m and ij[1] >= m})


def project_Qm(z: CoeffGrid, m: int) -> CoeffGrid:
    """Keep coefficients with ``j >= i = m``."""
    return z.with_support({ij: v for ij, v in z.support.items() if ij[0] == m and ij[1] >= m})


@dataclass(frozen=True)
class LocalizationResult:
    lhs: float
    rhs: float
    ok: bool
    L: float


_L_cache: dict = {}


def _L_constant(m: int, params: RecCoeffParams, q: float, R: float, p_max: int) -> float:
    key = (m, params, q, R, p_max)
    if key not in _L_cache:
        Ks = [phi_bound_check(mp, params, q, p_max, R).K_empirical for mp in range(m)]
        _L_cache[key] = 16 * S_constant(q, R) ** 2 * sum(K * K for K in Ks)
    return _L_cache[key]


def support_localization_check(
    z: CoeffGrid, m: int, p: int, R: Optional[float] = None, p_max: int = 60
) -> LocalizationResult:
    """Compare ``||(1-E_m) z||^2`` with ``L_m/p ||z||^2 + L_m p ||[chi_1, z]||^2``."""
    if p < 1:
        raise ValueError("p must be positive")
    R = default_R(z.q) if R is None else R
    L = _L_constant(m, z.params, z.q, R, p_max)
    lhs = (z - project_Em(z, m)).norm2()
    rhs = L / p * z.norm2() + L * p * commutator(z).norm2()
    return LocalizationResult(lhs, rhs, lhs <= rhs, L)


def random_grid(
    rng: np.random.Generator, params: RecCoeffParams, q: float, size: int, complex_values: bool = True
) -> CoeffGrid:
    """Dense random coefficients on ``[0, size]^2``."""
    shape = (size + 1, size + 1)
    vals = rng.standard_normal(shape) + (1j * rng.standard_normal(shape) if complex_values else 0)
    return CoeffGrid({(i, j): vals[i, j] for i in range(size + 1) for j in range(size + 1)}, params, q)
