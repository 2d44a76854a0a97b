"""Scalar layer: the deformation parameter, q-dimensions and recursion coefficients.

Every quantity downstream is expressed through ``qdim`` and the coefficients
``A``, ``B``, ``C``, ``D`` defined here. Negative-index dimensions vanish, so the
coefficient formulas can be written without case distinctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

__all__ = [
    "ScalarContext",
    "RecCoeffParams",
    "q_from_N",
    "qdim",
    "coeff_ABCD",
    "coeff_D",
    "alpha_of_q",
    "check_dim_inequality",
]


def q_from_N(N: int) -> float:
    """Return the root ``q`` in (0, 1) of ``q + 1/q = N``."""
    if N <= 2:
        raise ValueError(f"N must be at least 3, got {N}")
    return 2.0 / (N + math.sqrt(N * N - 4.0))


@dataclass(frozen=True)
class ScalarContext:
    """Deformation parameter together with the working tolerances."""

    q: float
    N_opt: Optional[int] = None
    tol_identity: float = 1e-10
    tol_oracle: float = 1e-8

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.N_opt is not None and abs(self.q + 1.0 / self.q - self.N_opt) > 1e-14 * self.N_opt:
            raise ValueError("q is inconsistent with N")
        if self.tol_identity <= 0 or self.tol_oracle <= 0:
            raise ValueError("tolerances must be positive")

    @classmethod
    def from_N(cls, N: int, **tols: float) -> "ScalarContext":
        return cls(q=q_from_N(N), N_opt=int(N), **tols)

    @classmethod
    def from_q(cls, q: float, **tols: float) -> "ScalarContext":
        return cls(q=float(q), **tols)

    @property
    def delta(self) -> float:
        """Loop value ``q + 1/q``; exactly ``N`` in N-mode."""
        if self.N_opt is not None:
            return float(self.N_opt)
        return self.q + 1.0 / self.q


QLike = Union[float, ScalarContext]


def _q(ctx: QLike) -> float:
    return ctx.q if isinstance(ctx, ScalarContext) else float(ctx)


@dataclass(frozen=True)
class RecCoeffParams:
    """Weight ``k`` of the generating vector and the real part of its rotation eigenvalue."""

    k: int
    mu_re: float

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if not -1.0 - 1e-15 <= self.mu_re <= 1.0 + 1e-15:
            raise ValueError(f"mu_re must lie in [-1, 1], got {self.mu_re}")

    @classmethod
    def from_root(cls, k: int, s: int) -> "RecCoeffParams":
        """Parameters for the eigenvalue ``exp(i*pi*s/k)``."""
        return cls(k=k, mu_re=math.cos(math.pi * s / k))


def qdim(k: int, ctx: QLike) -> float:
    """Quantum dimension ``d_k = [k+1]_q``; zero for negative ``k``."""
    if k < 0:
        return 0.0
    q = _q(ctx)
    try:
        lead = q ** (-k)
    except OverflowError as exc:
        raise OverflowError(f"d_{k} overflows at q={q}") from exc
    val = lead * (1.0 - q ** (2 * k + 2)) / (1.0 - q * q)
    if math.isinf(val):
        raise OverflowError(f"d_{k} overflows at q={q}")
    return val


def coeff_ABCD(n: int, p: int, params: RecCoeffParams, ctx: QLike) -> tuple[float, float, float]:
    """Coefficients ``(A^n_p, B^n_p, C^n_p)`` of the Gram recursion."""
    k = params.k
    den = qdim(n, ctx) * qdim(n - 1, ctx)
    a = qdim(p + k, ctx) * qdim(p + k - 1, ctx) / den
    b = 2.0 * (-1) ** k * params.mu_re * qdim(p + k - 1, ctx) * qdim(p - 1, ctx) / den
    c = -qdim(p - 1, ctx) * qdim(p - 2, ctx) / den
    return a, b, c


def coeff_D(n: int, j: int, params: RecCoeffParams, ctx: QLike) -> float:
    """``D^n_j = 1 - A^n_j - B^n_{n-k-j}``."""
    a = coeff_ABCD(n, j, params, ctx)[0]
    b = coeff_ABCD(n, n - params.k - j, params, ctx)[1]
    return 1.0 - a - b


def alpha_of_q(q: float) -> float:
    """Exponent controlling the near-scalarity of middle partial traces."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    lq = math.log(q)
    bracket = 1.0 - 2.0 * math.log(2.0) / (3.0 * lq) - 2.0 / (3.0 * lq) * math.log((1.0 + q * q) / (1.0 - q))
    return 1.0 / (3.0 * bracket)


def check_dim_inequality(n: int, ctx: QLike) -> bool:
    if n < 3:
        raise ValueError("the inequality is stated for n >= 3")
    d = lambda i: qdim(i, ctx)  # noqa: E731
    lhs = d(1) - 2.0 * d(n - 2) / d(n - 1)
    rhs = 2.0 / d(n - 1) + d(1) * (d(1) + d(n - 3) * d(n - 2)) / (d(n - 1) * d(n - 2))
    return lhs > rhs
