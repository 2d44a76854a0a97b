"""Jones-Wenzl projections built from the one-sided and the bilateral Wenzl recursions."""

from __future__ import annotations

import threading
from typing import Callable

import numpy as np

from .qnumerics import ScalarContext, qdim
from .tl_core import (
    MAX_STRANDS,
    TLElement,
    adjoint,
    cap,
    compose,
    cup,
    identity,
    markov_trace,
    partial_trace_left,
    partial_trace_right,
    tensor,
)

__all__ = [
    "JWCache",
    "jw",
    "jw_bilateral",
    "wenzl_factor",
    "apply_jw_left",
    "apply_jw_right",
    "jw_partial_trace_check",
    "jw_annihilation_check",
    "jw_idempotence_residual",
    "jw_selfadjoint_residual",
    "jw_markov_residual",
    "jw_bilateral_residual",
]


def _tensor_all(*parts: TLElement) -> TLElement:
    out = parts[0]
    for p in parts[1:]:
        out = tensor(out, p)
    return out


def wenzl_factor(n: int, l: int) -> TLElement:
    """``id^(l-1) (x) t (x) id^(n-l-1) (x) t*`` as a diagram ``n -> n``."""
    return _tensor_all(identity(l - 1), cup(), identity(n - l - 1), cap())


def _wenzl_terms(n: int, ctx: ScalarContext) -> list[tuple[float, TLElement]]:
    dn1 = qdim(n - 1, ctx)
    return [((-1) ** (n - l) * qdim(l - 1, ctx) / dn1, wenzl_factor(n, l)) for l in range(1, n)]


def _pad(e: TLElement, left: int, right: int) -> TLElement:
    return _tensor_all(identity(left), e, identity(right))


def _sum(parts: list[TLElement]) -> TLElement:
    top, bot = parts[0].top, parts[0].bot
    return TLElement(top, bot, np.vstack([p.mats for p in parts]), np.concatenate([p.coeffs for p in parts]))


class JWCache:
    """Append-only store of projections keyed by ``(n, q)``."""

    def __init__(self) -> None:
        self._store: dict[tuple[int, float], TLElement] = {}
        self._lock = threading.Lock()

    def get(self, n: int, ctx: ScalarContext, build: Callable[[], TLElement]) -> TLElement:
        key = (n, ctx.q)
        hit = self._store.get(key)
        if hit is not None:
            return hit
        value = build()
        with self._lock:
            return self._store.setdefault(key, value)

    def clear(self) -> None:
        with self._lock:
            self._store.clear()

    def __len__(self) -> int:
        return len(self._store)


_CACHE = JWCache()


def _check_n(n: int, lo: int = 1) -> None:
    if not lo <= n <= MAX_STRANDS:
        raise ValueError(f"n must lie in [{lo}, {MAX_STRANDS}], got {n}")


def jw(n: int, ctx: ScalarContext) -> TLElement:
    """The projection ``P_n`` from the one-sided Wenzl recursion, evaluated as written."""
    _check_n(n)
    if n == 1:
        return _CACHE.get(1, ctx, lambda: identity(1))

    def build() -> TLElement:
        base = tensor(jw(n - 1, ctx), identity(1))
        parts = [base] + [c * compose(e, base, ctx) for c, e in _wenzl_terms(n, ctx)]
        return _sum(parts)

    return _CACHE.get(n, ctx, build)


def apply_jw_left(m: int, X: TLElement, ctx: ScalarContext, offset: int = 0) -> TLElement:
    """``(id_offset (x) P_m (x) id) o X`` using the factorised form of the recursion."""
    rest = X.bot - offset - m
    if rest < 0 or offset < 0:
        raise ValueError("the projection does not fit on the codomain of X")
    if m <= 1:
        return X
    Y = apply_jw_left(m - 1, X, ctx, offset)
    parts = [Y] + [c * compose(_pad(e, offset, rest), Y, ctx) for c, e in _wenzl_terms(m, ctx)]
    return _sum(parts)


def apply_jw_right(X: TLElement, m: int, ctx: ScalarContext, offset: int = 0) -> TLElement:
    """``X o (id_offset (x) P_m (x) id)`` using the adjoint of the recursion."""
    rest = X.top - offset - m
    if rest < 0 or offset < 0:
        raise ValueError("the projection does not fit on the domain of X")
    if m <= 1:
        return X
    Y = apply_jw_right(X, m - 1, ctx, offset)
    parts = [Y] + [c * compose(Y, _pad(adjoint(e), offset, rest), ctx) for c, e in _wenzl_terms(m, ctx)]
    return _sum(parts)


def jw_bilateral(n: int, ctx: ScalarContext) -> TLElement:
    """``P_n`` assembled around ``id (x) P_{n-2} (x) id`` from the bilateral recursion."""
    _check_n(n, 3)
    d = lambda i: qdim(i, ctx)  # noqa: E731
    Q = _tensor_all(identity(1), jw(n - 2, ctx), identity(1))
    e = compose(cup(), cap(), ctx)
    sign = (-1) ** (n - 1)
    terms = [
        (-d(n - 2) / d(n - 1), tensor(e, identity(n - 2))),
        (-d(n - 2) / d(n - 1), tensor(identity(n - 2), e)),
        (sign / d(n - 1), _tensor_all(cup(), identity(n - 2), cap())),
        (sign / d(n - 1), _tensor_all(cap(), identity(n - 2), cup())),
    ]
    if n >= 4:
        coef = (d(1) + d(n - 3) * d(n - 2)) / (d(n - 1) * d(n - 2))
        terms.append((coef, _tensor_all(e, identity(n - 4), e)))
    parts = [Q]
    for c, D in terms:
        parts.append(c * apply_jw_left(n - 2, compose(D, Q, ctx), ctx, offset=1))
    return _sum(parts)


def jw_partial_trace_check(
    n: int, ctx: ScalarContext, b: int = 1, side: str = "right", normalized: bool = False
) -> float:
    """Max coefficient of ``Tr_b(P_n) - (d_n/d_{n-b}) P_{n-b}`` on the given side.

    With ``normalized`` the difference is divided by ``d_n/d_{n-b}``, which removes
    the ``N**b`` growth of the coefficients being compared.
    """
    if not 1 <= b <= n - 1:
        raise ValueError("need 1 <= b <= n-1")
    trace = partial_trace_right if side == "right" else partial_trace_left
    ratio = qdim(n, ctx) / qdim(n - b, ctx)
    lhs = trace(jw(n, ctx), b, ctx)
    diff = (lhs - ratio * jw(n - b, ctx)).max_abs()
    return diff / ratio if normalized else diff


def jw_annihilation_check(n: int, ctx: ScalarContext) -> float:
    """Largest coefficient of any adjacent cap applied to ``P_n`` from either side."""
    if n < 2:
        raise ValueError("need n >= 2")
    P = jw(n, ctx)
    worst = 0.0
    for i in range(n - 1):
        capi = _pad(cap(), i, n - i - 2)
        worst = max(worst, compose(capi, P, ctx).max_abs(), compose(P, adjoint(capi), ctx).max_abs())
    return worst


def jw_idempotence_residual(n: int, ctx: ScalarContext) -> float:
    P = jw(n, ctx)
    return (apply_jw_left(n, P, ctx) - P).max_abs()


def jw_selfadjoint_residual(n: int, ctx: ScalarContext) -> float:
    P = jw(n, ctx)
    return (adjoint(P) - P).max_abs()


def jw_markov_residual(n: int, ctx: ScalarContext) -> float:
    """Relative deviation of the Markov trace of ``P_n`` from ``d_n``."""
    dn = qdim(n, ctx)
    return abs(markov_trace(jw(n, ctx), ctx) - dn) / dn


def jw_bilateral_residual(n: int, ctx: ScalarContext) -> float:
    return (jw_bilateral(n, ctx) - jw(n, ctx)).max_abs()
