"""Gram blocks of the shifted vectors and the Riesz-basis certificate.

For a generating vector of weight ``k`` with rotation eigenvalue ``mu``, the
block ``G_n`` has side ``n-k+1`` and is produced from ``G_{n-1}`` by a
three-term recursion whose coefficients only see ``Re(mu)``. The last row is
filled by symmetry and the corner by a product of ``1 - A`` factors.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .qnumerics import RecCoeffParams, coeff_ABCD, q_from_N

__all__ = [
    "GramBlock",
    "RieszReport",
    "DecayProfile",
    "N0Report",
    "gram_recursive",
    "norms",
    "persymmetry_residual",
    "riesz_margin",
    "decay_profile",
    "root_mu_values",
    "estimate_N0",
]


@dataclass(frozen=True)
class GramBlock:
    k: int
    mu_re: float
    q: float
    n: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        side = self.n - self.k + 1
        if side < 1 or self.entries.shape != (side, side):
            raise ValueError(f"block for n={self.n}, k={self.k} must be {side}x{side}")

    @property
    def side(self) -> int:
        return self.n - self.k + 1


def _check_domain(k: int, mu_re: float, q: float, n_max: int) -> RecCoeffParams:
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if n_max < k:
        raise ValueError("n_max must be at least k")
    return RecCoeffParams(k, mu_re)


def gram_recursive(k: int, mu_re: float, q: float, n_max: int) -> list[GramBlock]:
    """Blocks ``G_k, ..., G_{n_max}`` from the three-term recursion."""
    params = _check_domain(k, mu_re, q, n_max)
    G = np.ones((1, 1))
    blocks = [GramBlock(k, mu_re, q, k, G)]
    corner = 1.0
    for n in range(k + 1, n_max + 1):
        s = n - k
        abc = np.array([coeff_ABCD(n, p, params, q) for p in range(s + 1)])
        A, B, C = abc[:, 0], abc[:, 1], abc[:, 2]
        new = np.zeros((s + 1, s + 1))
        new[:s, :s] += (1.0 - A[:s]) * G
        new[:s, 1:] += B[1:] * G
        if s >= 2:
            new[:s, 2:] += C[2:] * G[:, : s - 1]
        new[s, :s] = new[:s, s]
        corner *= 1.0 - A[0]
        new[s, s] = corner
        G = new
        blocks.append(GramBlock(k, mu_re, q, n, G))
    return blocks


def norms(g: GramBlock) -> tuple[float, float, float]:
    """Operator norm, inverse norm and condition number; inverse norm is inf if not positive definite."""
    ev = np.linalg.eigvalsh(g.entries)
    norm = float(np.abs(ev).max())
    if ev.min() <= 0:
        return norm, math.inf, math.inf
    inv = float(1.0 / ev.min())
    return norm, inv, norm * inv


def persymmetry_residual(g: GramBlock) -> float:
    """Deviation from ``G_{i,p} = G_{s-i,s-p}``."""
    return float(np.abs(g.entries - g.entries[::-1, ::-1]).max())


@dataclass(frozen=True)
class RieszReport:
    margin: float
    sup_norm: float
    sup_inv_norm: float
    sup_cond: float
    min_diag: float
    margins: tuple[float, ...] = field(repr=False)


def _block_margin(g: GramBlock) -> float:
    diag = np.diag(g.entries)
    bad = np.nonzero(diag <= 0)[0]
    if len(bad):
        raise ValueError(f"non-positive diagonal entry at n={g.n}, p={int(bad[0])}")
    off = g.entries - np.diag(diag)
    if g.side == 1:
        return 0.0
    return float(np.linalg.norm(off / diag[None, :], 2))


def riesz_margin(k: int, mu_re: float, q: float, n_max: int) -> RieszReport:
    """Largest ``||Gcheck Ghat^{-1}||`` over ``n <= n_max``; below 1 certifies uniform invertibility."""
    blocks = gram_recursive(k, mu_re, q, n_max)
    margins = tuple(_block_margin(g) for g in blocks)
    stats = np.array([norms(g) for g in blocks])
    return RieszReport(
        margin=max(margins),
        sup_norm=float(stats[:, 0].max()),
        sup_inv_norm=float(stats[:, 1].max()),
        sup_cond=float(stats[:, 2].max()),
        min_diag=float(min(np.diag(g.entries).min() for g in blocks)),
        margins=margins,
    )


@dataclass(frozen=True)
class DecayProfile:
    bands: tuple[tuple[int, float], ...]
    slope: float


def decay_profile(g: GramBlock) -> DecayProfile:
    """Per-band maxima ``max_{|i-p|=b} |G_{i,p}|`` and the least-squares slope of their logarithm."""
    E = np.abs(g.entries)
    bands = tuple((b, float(np.diagonal(E, b).max())) for b in range(g.side))
    pts = [(b, math.log(v)) for b, v in bands if v > 0]
    slope = float(np.polyfit(*zip(*pts), 1)[0]) if len(pts) >= 2 else math.nan
    return DecayProfile(bands, slope)


def root_mu_values(k: int) -> list[float]:
    """Distinct real parts of the ``2k``-th roots of unity."""
    vals: list[float] = []
    for s in range(k + 1):
        v = math.cos(math.pi * s / k)
        if all(abs(v - w) > 1e-12 for w in vals):
            vals.append(v)
    return vals


@dataclass(frozen=True)
class N0Report:
    rows: tuple[dict, ...]
    smallest_N: Optional[int]
    monotone: bool


def _sweep_one(args: tuple[int, int, int]) -> dict:
    N, k_max, n_max = args
    q = q_from_N(N)
    reports = [riesz_margin(k, mu, q, n_max) for k in range(1, k_max + 1) for mu in root_mu_values(k)]
    margins = [r.margin for r in reports]
    return {
        "N": N,
        "q": q,
        "margin": max(margins),
        "sup_norm": max(r.sup_norm for r in reports),
        "sup_inv_norm": max(r.sup_inv_norm for r in reports),
        "sup_cond": max(r.sup_cond for r in reports),
        "pass": max(margins) < 1.0,
        "_margins": margins,
    }


def estimate_N0(k_max: int, n_max: int, N_range: Iterable[int], jobs: int = 1) -> N0Report:
    """Sweep ``N`` and report the smallest value whose margin is below 1 for every ``k`` and root."""
    Ns: Sequence[int] = sorted(set(N_range))
    tasks = [(N, k_max, n_max) for N in Ns]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_sweep_one, tasks))
    else:
        raw = [_sweep_one(t) for t in tasks]
    monotone = all(
        b <= a + 1e-15 for prev, cur in zip(raw, raw[1:]) for a, b in zip(prev["_margins"], cur["_margins"])
    )
    rows = tuple({key: v for key, v in r.items() if not key.startswith("_")} for r in raw)
    smallest = next((r["N"] for r in rows if r["pass"]), None)
    return N0Report(rows, smallest, monotone)
