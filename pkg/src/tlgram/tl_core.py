"""Temperley-Lieb diagram calculus.

A diagram ``k -> l`` has ``k`` top points indexed ``0..k-1`` and ``l`` bottom
points indexed ``k..k+l-1``, both left to right. The top row is the domain.
Composition ``compose(f, g)`` stacks ``g`` above ``f`` (``g`` acts first).

Elements store their diagrams as rows of an integer array holding the partner
of every boundary point, so that composition, tensoring and traces run over
all terms at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .qnumerics import ScalarContext

__all__ = [
    "MAX_STRANDS",
    "TLDiagram",
    "TLElement",
    "enumerate_nc2",
    "compose",
    "tensor",
    "adjoint",
    "partial_trace_right",
    "partial_trace_left",
    "markov_trace",
    "identity",
    "cup",
    "cap",
    "nested_cup",
    "nested_cap",
    "compose_batch",
]

MAX_STRANDS = 16

Scalar = Union[complex, float, int]
DeltaLike = Union[float, ScalarContext]


def _delta(ctx: DeltaLike) -> float:
    return ctx.delta if isinstance(ctx, ScalarContext) else float(ctx)


def _check_arity(*ks: int) -> None:
    for k in ks:
        if k < 0:
            raise ValueError("arities must be non-negative")
        if k > MAX_STRANDS:
            raise ValueError(f"arity {k} exceeds the supported maximum of {MAX_STRANDS}")


def _circ(top: int, bot: int) -> np.ndarray:
    """Position of each boundary point in the circular order (top left to right, bottom right to left)."""
    idx = np.arange(top + bot)
    return np.where(idx < top, idx, 2 * top + bot - 1 - idx)


def _rows(mats, width: int) -> np.ndarray:
    mats = np.asarray(mats, dtype=np.int64)
    return mats if mats.ndim == 2 else mats.reshape(1 if width == 0 else -1, width)


def _keys(top: int, bot: int, mats: np.ndarray) -> np.ndarray:
    circ = _circ(top, bot)
    opener = circ[mats] > circ[None, :]
    return (opener.astype(np.int64) << circ.astype(np.int64)[None, :]).sum(axis=1)


@dataclass(frozen=True)
class TLDiagram:
    """A non-crossing perfect matching of ``top + bot`` boundary points."""

    top: int
    bot: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        _check_arity(self.top, self.bot)
        npts = self.top + self.bot
        pairs = tuple(sorted((min(a, b), max(a, b)) for a, b in self.pairs))
        seen = [p for pair in pairs for p in pair]
        if sorted(seen) != list(range(npts)):
            raise ValueError("pairs must form a perfect matching of the boundary points")
        circ = _circ(self.top, self.bot)
        arcs = [tuple(sorted((int(circ[a]), int(circ[b])))) for a, b in pairs]
        for a, b in arcs:
            for c, d in arcs:
                if a < c < b < d:
                    raise ValueError("matching has a crossing")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_matching(cls, top: int, bot: int, matching: Iterable[int]) -> "TLDiagram":
        m = list(matching)
        return cls(top, bot, tuple((i, int(j)) for i, j in enumerate(m) if i < j))

    @property
    def matching(self) -> np.ndarray:
        m = np.empty(self.top + self.bot, dtype=np.int64)
        for a, b in self.pairs:
            m[a], m[b] = b, a
        return m

    def to_element(self, coeff: Scalar = 1.0) -> "TLElement":
        return TLElement(self.top, self.bot, self.matching[None, :], np.array([coeff], dtype=complex))

    def __str__(self) -> str:
        return "[" + ",".join(f"({a},{b})" for a, b in self.pairs) + "]"


class TLElement:
    """Finite linear combination of diagrams sharing the arity ``top -> bot``."""

    __slots__ = ("top", "bot", "mats", "coeffs")

    def __init__(self, top: int, bot: int, mats: np.ndarray, coeffs: np.ndarray, *, prune: float = 0.0):
        _check_arity(top, bot)
        mats = _rows(mats, top + bot)
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        if len(mats) != len(coeffs):
            raise ValueError("one coefficient per diagram is required")
        if len(mats):
            keys = _keys(top, bot, mats)
            uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
            summed = np.zeros(len(uniq), dtype=complex)
            np.add.at(summed, inv.reshape(-1), coeffs)
            keep = np.abs(summed) > prune
            mats, coeffs = mats[first][keep], summed[keep]
        self.top, self.bot = top, bot
        self.mats, self.coeffs = mats, coeffs
        self.mats.setflags(write=False)
        self.coeffs.setflags(write=False)

    @classmethod
    def zero(cls, top: int, bot: int) -> "TLElement":
        return cls(top, bot, np.zeros((0, top + bot), dtype=np.int64), np.zeros(0))

    @classmethod
    def from_terms(cls, top: int, bot: int, terms: Mapping[TLDiagram, Scalar]) -> "TLElement":
        if not terms:
            return cls.zero(top, bot)
        for d in terms:
            if (d.top, d.bot) != (top, bot):
                raise ValueError("diagram arity does not match the element")
        mats = np.array([d.matching for d in terms])
        return cls(top, bot, mats, np.array(list(terms.values()), dtype=complex))

    @property
    def terms(self) -> dict[TLDiagram, complex]:
        return {
            TLDiagram.from_matching(self.top, self.bot, row): complex(c)
            for row, c in zip(self.mats, self.coeffs)
        }

    def __len__(self) -> int:
        return len(self.coeffs)

    def _check_same(self, other: "TLElement") -> None:
        if (self.top, self.bot) != (other.top, other.bot):
            raise ValueError("arity mismatch")

    def __add__(self, other: "TLElement") -> "TLElement":
        self._check_same(other)
        return TLElement(
            self.top, self.bot, np.vstack([self.mats, other.mats]), np.concatenate([self.coeffs, other.coeffs])
        )

    def __sub__(self, other: "TLElement") -> "TLElement":
        return self + (-1.0) * other

    def __mul__(self, c: Scalar) -> "TLElement":
        return TLElement(self.top, self.bot, self.mats, self.coeffs * c)

    __rmul__ = __mul__

    def __neg__(self) -> "TLElement":
        return (-1.0) * self

    def max_abs(self) -> float:
        """Largest coefficient modulus; the coefficient norm used for identity residuals."""
        return float(np.abs(self.coeffs).max()) if len(self) else 0.0

    def pruned(self, threshold: float = 1e-14) -> "TLElement":
        return TLElement(self.top, self.bot, self.mats, self.coeffs, prune=threshold)

    def coefficient(self, diagram: TLDiagram) -> complex:
        key = _keys(self.top, self.bot, diagram.matching[None, :])[0]
        hit = np.nonzero(_keys(self.top, self.bot, self.mats) == key)[0] if len(self) else []
        return complex(self.coeffs[hit[0]]) if len(hit) else 0j

    def __repr__(self) -> str:
        return f"TLElement({self.top}->{self.bot}, {len(self)} terms)"


def enumerate_nc2(k: int, l: int) -> list[TLDiagram]:
    """All non-crossing pair partitions of ``k`` top and ``l`` bottom points."""
    _check_arity(k, l)
    npts = k + l
    if npts % 2:
        return []
    circ = _circ(k, l)
    point_at = np.argsort(circ)
    out: list[TLDiagram] = []

    def rec(pos: int, stack: list[int], pairs: list[tuple[int, int]]) -> None:
        if pos == npts:
            out.append(TLDiagram(k, l, tuple((int(point_at[a]), int(point_at[b])) for a, b in pairs)))
            return
        if len(stack) < npts - pos:
            rec(pos + 1, stack + [pos], pairs)
        if stack:
            rec(pos + 1, stack[:-1], pairs + [(stack[-1], pos)])

    rec(0, [], [])
    return out


def compose_batch(F: np.ndarray, G: np.ndarray, k: int, l: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Compose rows of ``F`` (``l -> m``) with rows of ``G`` (``k -> l``), broadcasting single rows.

    Returns the matchings of the composites (``k -> m``) and the number of closed loops.
    """
    F = _rows(F, l + m)
    G = _rows(G, k + l)
    B = max(len(F), len(G))
    if B and min(len(F), len(G)) == 1:
        F = np.broadcast_to(F, (B, l + m))
        G = np.broadcast_to(G, (B, k + l))
    elif len(F) != len(G):
        raise ValueError("batch sizes must agree or one of them must be 1")
    # nodes: g points 0..k+l-1, then f points offset by k+l
    W = k + 2 * l + m
    partner = np.empty((B, W), dtype=np.int64)
    partner[:, : k + l] = G
    partner[:, k + l :] = F + (k + l)
    # crossing the glued row: g bottom point k+x <-> f top point k+l+x
    cross = np.arange(W)
    cross[k : k + l] = np.arange(k + l, k + 2 * l)
    cross[k + l : k + 2 * l] = np.arange(k, k + l)
    is_ext = np.ones(W, dtype=bool)
    is_ext[k : k + 2 * l] = False
    ext_label = np.full(W, -1, dtype=np.int64)
    ext_label[:k] = np.arange(k)
    ext_label[k + 2 * l :] = np.arange(k, k + m)
    flat = partner.ravel()
    base = (np.arange(B) * W)[:, None]
    cur = np.concatenate([np.arange(k), np.arange(k + 2 * l, W)])[None, :].repeat(B, axis=0)
    result = np.empty((B, k + m), dtype=np.int64)
    seen = np.zeros(B * W, dtype=bool)
    active = np.ones((B, k + m), dtype=bool)
    for _ in range(l + 1):
        nxt = flat[base + cur]
        done = active & is_ext[nxt]
        result[done] = ext_label[nxt[done]]
        active &= ~done
        if not active.any():
            break
        cur = np.where(active, cross[nxt], cur)
        seen[(base + nxt)[active]] = True
    if active.any():
        raise RuntimeError("path following did not terminate")
    loops = np.zeros(B, dtype=np.int64)
    if l:
        visited = seen.reshape(B, W)[:, k : k + l]
        todo = np.nonzero(~visited.all(axis=1))[0]
        if len(todo):
            x = np.arange(l)[None, :]
            vis = visited[todo]
            g_nb = np.where(vis, x, G[todo, k:] - k)
            f_nb = np.where(vis, x, F[todo, :l])
            sub = np.arange(len(todo))[:, None]
            label = np.broadcast_to(x, vis.shape).copy()
            for _ in range(l):
                new = np.minimum(label, np.minimum(label[sub, g_nb], label[sub, f_nb]))
                if np.array_equal(new, label):
                    break
                label = new
            loops[todo] = ((label == x) & ~vis).sum(axis=1)
    return result, loops


def _as_element(x: Union[TLElement, TLDiagram]) -> TLElement:
    return x.to_element() if isinstance(x, TLDiagram) else x


def compose(f: Union[TLElement, TLDiagram], g: Union[TLElement, TLDiagram], ctx: DeltaLike) -> TLElement:
    """``f o g``: stack ``g`` (``k -> l``) above ``f`` (``l -> m``); each loop contributes ``delta``."""
    f, g = _as_element(f), _as_element(g)
    if f.top != g.bot:
        raise ValueError(f"cannot compose {f.top}->{f.bot} after {g.top}->{g.bot}")
    k, l, m = g.top, g.bot, f.bot
    delta = _delta(ctx)
    if not len(f) or not len(g):
        return TLElement.zero(k, m)
    mats, coeffs = [], []
    # one batched call per term of the shorter factor
    if len(f) <= len(g):
        for row, c in zip(f.mats, f.coeffs):
            res, loops = compose_batch(row, g.mats, k, l, m)
            mats.append(res)
            coeffs.append(c * g.coeffs * delta**loops)
    else:
        for row, c in zip(g.mats, g.coeffs):
            res, loops = compose_batch(f.mats, row, k, l, m)
            mats.append(res)
            coeffs.append(c * f.coeffs * delta**loops)
    return TLElement(k, m, np.vstack(mats), np.concatenate(coeffs))


def _tensor_mats(A: np.ndarray, ka: int, la: int, Bm: np.ndarray, kb: int, lb: int) -> np.ndarray:
    top = ka + kb
    ia = np.arange(ka + la)
    map_a = np.where(ia < ka, ia, top + ia - ka)
    ib = np.arange(kb + lb)
    map_b = np.where(ib < kb, ka + ib, top + la + ib - kb)
    out = np.empty((A.shape[0], top + la + lb), dtype=np.int64)
    out[:, map_a] = map_a[A]
    out[:, map_b] = map_b[Bm]
    return out


def tensor(f: Union[TLElement, TLDiagram], g: Union[TLElement, TLDiagram]) -> TLElement:
    """Horizontal juxtaposition ``f (x) g`` with ``f`` on the left."""
    f, g = _as_element(f), _as_element(g)
    nf, ng = len(f), len(g)
    A = np.repeat(f.mats, ng, axis=0)
    Bm = np.tile(g.mats, (nf, 1))
    mats = _tensor_mats(A, f.top, f.bot, Bm, g.top, g.bot)
    coeffs = np.repeat(f.coeffs, ng) * np.tile(g.coeffs, nf)
    return TLElement(f.top + g.top, f.bot + g.bot, mats, coeffs)


def adjoint(f: Union[TLElement, TLDiagram]) -> TLElement:
    """Vertical flip with complex-conjugated coefficients."""
    f = _as_element(f)
    k, l = f.top, f.bot
    idx = np.arange(k + l)
    perm = np.where(idx < k, l + idx, idx - k)
    mats = np.empty_like(f.mats)
    mats[:, perm] = perm[f.mats]
    return TLElement(l, k, mats, np.conj(f.coeffs))


def identity(n: int) -> TLElement:
    return TLDiagram(n, n, tuple((i, n + i) for i in range(n))).to_element()


def cup() -> TLElement:
    """The duality morphism ``t: 0 -> 2``."""
    return TLDiagram(0, 2, ((0, 1),)).to_element()


def cap() -> TLElement:
    """``t*: 2 -> 0``."""
    return TLDiagram(2, 0, ((0, 1),)).to_element()


def nested_cup(r: int) -> TLElement:
    """``r`` nested cups ``0 -> 2r`` joining bottom points ``r-1-s`` and ``r+s``."""
    return TLDiagram(0, 2 * r, tuple((r - 1 - s, r + s) for s in range(r))).to_element()


def nested_cap(r: int) -> TLElement:
    return TLDiagram(2 * r, 0, tuple((r - 1 - s, r + s) for s in range(r))).to_element()


def _square(f: TLElement) -> int:
    if f.top != f.bot:
        raise ValueError("a square element is required")
    return f.top


def _close(f: TLElement, pairs: np.ndarray, keep: np.ndarray, top: int, bot: int, ctx: DeltaLike) -> TLElement:
    """Join boundary points of ``f`` along ``pairs``; the points in ``keep`` become the new boundary."""
    B, P = f.mats.shape
    joint = np.arange(P)
    joint[pairs[:, 0]], joint[pairs[:, 1]] = pairs[:, 1], pairs[:, 0]
    new_index = np.full(P, -1, dtype=np.int64)
    new_index[keep] = np.arange(len(keep))
    flat = f.mats.ravel()
    base = (np.arange(B) * P)[:, None]
    cur = np.broadcast_to(keep, (B, len(keep))).copy()
    result = np.empty((B, len(keep)), dtype=np.int64)
    seen = np.zeros(B * P, dtype=bool)
    active = np.ones((B, len(keep)), dtype=bool)
    for _ in range(len(pairs) + 1):
        if not len(keep):
            break
        nxt = flat[base + cur]
        done = active & (new_index[nxt] >= 0)
        result[done] = new_index[nxt[done]]
        active &= ~done
        if not active.any():
            break
        seen[(base + nxt)[active]] = True
        cur = np.where(active, joint[nxt], cur)
    closed = np.zeros(P, dtype=bool)
    closed[pairs.ravel()] = True
    free = seen.reshape(B, P) | ~closed[None, :]
    x = np.arange(P)[None, :]
    rows = np.arange(B)[:, None]
    label = np.broadcast_to(x, (B, P)).copy()
    for _ in range(P):
        new = np.minimum(label, np.minimum(label[rows, f.mats], label[:, joint]))
        if np.array_equal(new, label):
            break
        label = new
    loops = ((label == x) & ~free).sum(axis=1)
    return TLElement(top, bot, result, f.coeffs * _delta(ctx) ** loops)


def partial_trace_right(f: Union[TLElement, TLDiagram], r: int, ctx: DeltaLike) -> TLElement:
    """Close the rightmost ``r`` strands."""
    f = _as_element(f)
    n = _square(f)
    if not 0 <= r <= n:
        raise ValueError(f"r must lie in [0, {n}]")
    if r == 0:
        return f
    closed = np.arange(n - r, n)
    pairs = np.stack([closed, closed + n], axis=1)
    keep = np.concatenate([np.arange(n - r), n + np.arange(n - r)])
    return _close(f, pairs, keep, n - r, n - r, ctx)


def partial_trace_left(f: Union[TLElement, TLDiagram], r: int, ctx: DeltaLike) -> TLElement:
    """Close the leftmost ``r`` strands."""
    f = _as_element(f)
    n = _square(f)
    if not 0 <= r <= n:
        raise ValueError(f"r must lie in [0, {n}]")
    if r == 0:
        return f
    closed = np.arange(r)
    pairs = np.stack([closed, closed + n], axis=1)
    keep = np.concatenate([np.arange(r, n), n + np.arange(r, n)])
    return _close(f, pairs, keep, n - r, n - r, ctx)


def markov_trace(f: Union[TLElement, TLDiagram], ctx: DeltaLike) -> complex:
    """Closure of all strands: ``sum coeff * delta**loops``."""
    f = _as_element(f)
    n = _square(f)
    if not len(f):
        return 0j
    closed = partial_trace_right(f, n, ctx)
    return complex(closed.coeffs.sum()) if len(closed) else 0j
