"""Dense-matrix ground truth on tensor powers of C^N.

Projections onto the irreducible ``H_n`` are obtained here by linear algebra
alone (iterated kernels of the rightmost cap), not from the diagram
recursions, so agreement with ``realize(jw(n))`` is a genuine cross-check.
Strand ``0`` is the most significant tensor factor, matching ``np.kron``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import BudgetExceededError, RankAmbiguityError
from .gram_recursion import GramBlock
from .qnumerics import RecCoeffParams, ScalarContext, coeff_ABCD, q_from_N, qdim
from .tl_core import TLElement, nested_cup

__all__ = [
    "BUDGET",
    "KERNEL_TOL",
    "GAP_TOL",
    "DenseOperator",
    "CcircBasis",
    "realize",
    "realize_sparse",
    "projector",
    "isometry",
    "ptrace_left",
    "ptrace_right",
    "rotation",
    "ccirc_basis",
    "ccirc_dimension",
    "embed_x",
    "gram_direct",
    "rho_exponent_probe",
    "check_general_rec",
    "check_general_rec_left",
    "chi_expansion",
    "PiResult",
    "pi_abc",
    "kappa",
    "convolve",
    "orthogonality_probe",
    "projection_rank_check",
]

BUDGET = 6561
KERNEL_TOL = 1e-8
GAP_TOL = 1e-6


def _budget(N: int, strands: int) -> None:
    if N < 2:
        raise ValueError("N must be at least 2")
    if N**strands > BUDGET:
        raise BudgetExceededError(f"N^n = {N}^{strands} exceeds the dense budget of {BUDGET}")


@dataclass(frozen=True)
class DenseOperator:
    """Matrix of side ``N^bot x N^top`` realizing a morphism ``top -> bot``."""

    top: int
    bot: int
    N: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        if self.entries.shape != (self.N**self.bot, self.N**self.top):
            raise ValueError("matrix side must equal N^strands")

    @property
    def n_strands(self) -> int:
        if self.top != self.bot:
            raise ValueError("not a square operator")
        return self.top


def _index_arrays(mats: np.ndarray, top: int, bot: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the nonzero entries of every diagram in ``mats``."""
    npts = top + bot
    npairs = npts // 2
    values = np.indices((N,) * npairs).reshape(npairs, -1).T if npairs else np.zeros((1, 0), dtype=int)
    rows_all, cols_all = [], []
    w_bot = N ** np.arange(bot - 1, -1, -1)
    w_top = N ** np.arange(top - 1, -1, -1)
    for match in mats:
        pair_id = np.empty(npts, dtype=np.int64)
        lo = np.minimum(np.arange(npts), match)
        _, pair_id[:] = np.unique(lo, return_inverse=True)
        pv = values[:, pair_id]
        rows_all.append(pv[:, top:] @ w_bot if bot else np.zeros(len(pv), dtype=np.int64))
        cols_all.append(pv[:, :top] @ w_top if top else np.zeros(len(pv), dtype=np.int64))
    return np.array(rows_all), np.array(cols_all)


def realize_sparse(e: TLElement, N: int) -> sp.csr_matrix:
    """Sparse realization used where only matrix-vector products are needed."""
    if N < 2:
        raise ValueError("N must be at least 2")
    rows, cols = _index_arrays(e.mats, e.top, e.bot, N)
    data = np.repeat(e.coeffs, rows.shape[1] if rows.size else 0)
    shape = (N**e.bot, N**e.top)
    return sp.csr_matrix((data, (rows.ravel(), cols.ravel())), shape=shape)


def realize(e: TLElement, N: int) -> DenseOperator:
    """``sum coeff * T_pi`` with ``T_pi`` the 0/1 matrix whose indices agree along every pair."""
    _budget(N, max(e.top, e.bot))
    return DenseOperator(e.top, e.bot, N, realize_sparse(e, N).toarray())


def _kernel(M: np.ndarray, expected: Optional[int] = None) -> np.ndarray:
    """Orthonormal kernel basis (columns) with a spectral gap guard."""
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    sv = np.zeros(vh.shape[0])
    sv[: len(s)] = s
    ambiguous = (sv >= KERNEL_TOL) & (sv < GAP_TOL)
    if ambiguous.any():
        raise RankAmbiguityError(f"singular value {sv[ambiguous].min():.3e} lies inside the gap window")
    ker = vh[sv < KERNEL_TOL].conj().T
    if expected is not None and ker.shape[1] != expected:
        raise RankAmbiguityError(f"kernel dimension {ker.shape[1]} differs from the expected {expected}")
    return ker


def _t_vec(N: int) -> np.ndarray:
    return np.eye(N).reshape(N * N)


_iso_lock = threading.Lock()


@lru_cache(maxsize=None)
def _isometry_cached(n: int, N: int) -> np.ndarray:
    if n == 0:
        return np.ones((1, 1))
    if n == 1:
        return np.eye(N)
    prev = _isometry_cached(n - 1, N)
    lifted = np.kron(prev, np.eye(N))
    last_cap = np.kron(np.eye(N ** (n - 2)), _t_vec(N)[None, :])
    w = _kernel(last_cap @ lifted, expected=round(qdim(n, q_from_N(N))))
    return lifted @ w


def isometry(n: int, N: int) -> np.ndarray:
    """Columns form an orthonormal basis of ``H_n`` inside ``(C^N)^{(x)n}``."""
    _budget(N, n)
    with _iso_lock:
        out = _isometry_cached(n, N)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _projector_cached(n: int, N: int) -> np.ndarray:
    U = isometry(n, N)
    P = U @ U.T
    P.setflags(write=False)
    return P


def projector(n: int, N: int) -> np.ndarray:
    """Orthogonal projection ``P_n`` as a dense real matrix."""
    _budget(N, n)
    return _projector_cached(n, N)


def ptrace_right(X: np.ndarray, N: int, r: int = 1) -> np.ndarray:
    """``(id (x) Tr_r)(X)`` for a square matrix on ``N^n``."""
    n = round(math.log(X.shape[0], N))
    a, b = N ** (n - r), N**r
    return np.einsum("aibi->ab", X.reshape(a, b, a, b))


def ptrace_left(X: np.ndarray, N: int, r: int = 1) -> np.ndarray:
    """``(Tr_r (x) id)(X)``."""
    n = round(math.log(X.shape[0], N))
    a, b = N**r, N ** (n - r)
    return np.einsum("iaib->ab", X.reshape(a, b, a, b))


def _strands(X: np.ndarray, N: int) -> int:
    n = round(math.log(X.shape[0], N))
    if N**n != X.shape[0] or X.shape[0] != X.shape[1]:
        raise ValueError("expected a square matrix of side N^n")
    return n


def rotation(X: np.ndarray, N: int, tol: float = 1e-8) -> np.ndarray:
    """One-strand rotation ``(P_k (x) t*)(id (x) X (x) id)(t (x) P_k)``."""
    k = _strands(X, N)
    _budget(N, k + 2)
    P = projector(k, N)
    if np.abs(P @ X @ P - X).max() > tol:
        raise ValueError("X is not supported in B(H_k)")
    t = _t_vec(N)[:, None]
    down = np.kron(t, P)
    up = np.kron(P, t.T)
    middle = np.kron(np.kron(np.eye(N), X), np.eye(N))
    return up @ middle @ down


def ccirc_dimension(n: int, N: int) -> int:
    q = q_from_N(N)
    if n == 1:
        return round(qdim(2, q))
    return round(qdim(2 * n, q) - qdim(2 * n - 2, q))


@dataclass(frozen=True)
class CcircBasis:
    """Rotation eigenbasis of ``B(H_n)^oo``, each vector normalized to ``||X||_2^2 = d_n``."""

    n: int
    N: int
    vectors: tuple[np.ndarray, ...]
    rho_eigenvalues: tuple[complex, ...]
    mu_indices: tuple[int, ...]
    rotation_matrix: np.ndarray
    orthonormal: np.ndarray

    def __len__(self) -> int:
        return len(self.vectors)

    def branch(self, s: int) -> list[np.ndarray]:
        """Eigenvectors with eigenvalue ``exp(i pi s / n)``."""
        s %= 2 * self.n
        return [v for v, m in zip(self.vectors, self.mu_indices) if m == s]


_ccirc_cache: dict[tuple[int, int], CcircBasis] = {}
_ccirc_lock = threading.Lock()


def ccirc_basis(n: int, N: int, ctx: Optional[ScalarContext] = None) -> CcircBasis:
    """Kernel of the constraint map, refined into rotation eigenvectors."""
    key = (n, N)
    with _ccirc_lock:
        if key in _ccirc_cache:
            return _ccirc_cache[key]
    _budget(N, n + 2)
    tol = ctx.tol_oracle if ctx else 1e-8
    U = isometry(n, N)
    d = U.shape[1]
    Ul = U.reshape(N, N ** (n - 1), d)
    Ur = U.reshape(N ** (n - 1), N, d)
    left = np.einsum("ira,isb->abrs", Ul, Ul).reshape(d * d, -1)
    right = np.einsum("ria,sib->abrs", Ur, Ur).reshape(d * d, -1)
    M = np.hstack([left, right]).T
    ker = _kernel(M, expected=ccirc_dimension(n, N))
    basis = [U @ ker[:, c].reshape(d, d) @ U.T for c in range(ker.shape[1])]
    dim = len(basis)
    flat = np.array([b.ravel() for b in basis])
    R = np.array([flat.conj() @ rotation(b, N).ravel() for b in basis]).T
    order = 2 * n
    if np.abs(np.linalg.matrix_power(R, order) - np.eye(dim)).max() > tol:
        raise ArithmeticError("rotation does not have the expected finite order")
    if np.abs(R.conj().T @ R - np.eye(dim)).max() > tol:
        raise ArithmeticError("rotation is not unitary on the kernel")
    vectors, eigs, idxs, cols = [], [], [], []
    for s in range(order):
        w = np.exp(1j * math.pi * s / n)
        proj = sum(w ** (-r) * np.linalg.matrix_power(R, r) for r in range(order)) / order
        ev, vecs = np.linalg.eigh((proj + proj.conj().T) / 2)
        sel = vecs[:, ev > 0.5]
        for c in range(sel.shape[1]):
            X = np.tensordot(sel[:, c], np.array(basis), axes=1)
            cols.append(sel[:, c])
            vectors.append(X * math.sqrt(qdim(n, q_from_N(N))))
            eigs.append(complex(w))
            idxs.append(s)
    if len(vectors) != dim:
        raise RankAmbiguityError("rotation eigenspaces do not span the kernel")
    raw = np.linalg.eigvals(R)
    snapped = np.exp(1j * math.pi * np.round(np.angle(raw) * n / math.pi) / n)
    if np.abs(raw - snapped).max() > 1e-6:
        raise ArithmeticError("rotation eigenvalue is not a root of unity")
    out = CcircBasis(n, N, tuple(vectors), tuple(eigs), tuple(idxs), R, flat)
    with _ccirc_lock:
        _ccirc_cache[key] = out
    return out


def embed_x(X: np.ndarray, i: int, j: int, N: int) -> np.ndarray:
    """``X_{i,j} = P_{i+k+j} (id_i (x) X (x) id_j) P_{i+k+j}``."""
    k = _strands(X, N)
    n = i + k + j
    _budget(N, n)
    P = projector(n, N)
    mid = np.kron(np.kron(np.eye(N**i), X), np.eye(N**j))
    return P @ mid @ P


def _rho_eigenvalue(X: np.ndarray, N: int) -> complex:
    return complex(np.vdot(X, rotation(X, N)) / np.vdot(X, X))


def gram_direct(
    k: int,
    mu_index: int,
    n: int,
    N: int,
    ctx: Optional[ScalarContext] = None,
    X: Optional[np.ndarray] = None,
) -> GramBlock:
    """Gram block ``Tr(X_{i,j}^* X_{p,q}) / d_n`` from dense sandwiches."""
    tol = ctx.tol_oracle if ctx else 1e-8
    q = q_from_N(N)
    if X is None:
        branch = ccirc_basis(k, N, ctx).branch(mu_index)
        if not branch:
            raise ValueError(f"no rotation eigenvector with index {mu_index} for k={k}, N={N}")
        X = branch[0]
    side = n - k + 1
    if side < 1:
        raise ValueError("n must be at least k")
    _budget(N, n)
    emb = [embed_x(X, i, n - k - i, N) for i in range(side)]
    G = np.array([[np.vdot(a, b) for b in emb] for a in emb]) / qdim(n, q)
    if np.abs(G.imag).max() > tol:
        raise ArithmeticError("Gram block has a non-negligible imaginary part")
    mu = _rho_eigenvalue(X, N)
    return GramBlock(k, float(mu.real), q, n, G.real.copy())


def rho_exponent_probe(X: np.ndarray, N: int, r_max: Optional[int] = None) -> dict:
    """Compare ``Tr(rho^r(X)^* rho^s(X)) / ||X||^2`` with ``mu^(s-r)`` and ``mu^(s-k)``."""
    k = _strands(X, N)
    r_max = 2 * k if r_max is None else r_max
    mu = _rho_eigenvalue(X, N)
    powers = [X]
    for _ in range(r_max):
        powers.append(rotation(powers[-1], N))
    nx = np.vdot(X, X)
    dev_sr, dev_sk = 0.0, 0.0
    for r in range(r_max + 1):
        for s in range(r_max + 1):
            val = np.vdot(powers[r], powers[s]) / nx
            dev_sr = max(dev_sr, abs(val - mu ** (s - r)))
            dev_sk = max(dev_sk, abs(val - mu ** (s - k)))
    return {"mu": mu, "dev_s_minus_r": float(dev_sr), "dev_s_minus_k": float(dev_sk)}


def _params_for(X: np.ndarray, N: int, params: Optional[RecCoeffParams]) -> RecCoeffParams:
    if params is not None:
        return params
    mu = _rho_eigenvalue(X, N)
    return RecCoeffParams(_strands(X, N), max(-1.0, min(1.0, mu.real)))


def check_general_rec(
    X: np.ndarray, p: int, q_idx: int, N: int, params: Optional[RecCoeffParams] = None
) -> float:
    """Frobenius residual of the one-step right trace identity for ``X_{p,q}``."""
    params = _params_for(X, N, params)
    k = params.k
    n = p + k + q_idx
    qv = q_from_N(N)
    A, B, C = coeff_ABCD(n, p, params, qv)
    lhs = qdim(n - 1, qv) / qdim(n, qv) * ptrace_right(embed_x(X, p, q_idx, N), N)
    rhs = np.zeros_like(lhs)
    if q_idx > 0:
        rhs = rhs + (1 - A) * embed_x(X, p, q_idx - 1, N)
    if p > 0:
        rhs = rhs + B * embed_x(X, p - 1, q_idx, N)
    if p > 1:
        rhs = rhs + C * embed_x(X, p - 2, q_idx + 1, N)
    return float(np.linalg.norm(lhs - rhs))


def check_general_rec_left(
    X: np.ndarray, i: int, j: int, N: int, params: Optional[RecCoeffParams] = None
) -> float:
    """Mirror identity: left trace of ``X_{i,j}`` against ``X_{i-1,j}``, ``X_{i,j-1}``, ``X_{i+1,j-2}``."""
    params = _params_for(X, N, params)
    k = params.k
    n = i + k + j
    qv = q_from_N(N)
    A, B, C = coeff_ABCD(n, j, params, qv)
    lhs = qdim(n - 1, qv) / qdim(n, qv) * ptrace_left(embed_x(X, i, j, N), N)
    rhs = np.zeros_like(lhs)
    if i > 0:
        rhs = rhs + (1 - A) * embed_x(X, i - 1, j, N)
    if j > 0:
        rhs = rhs + B * embed_x(X, i, j - 1, N)
    if j > 1:
        rhs = rhs + C * embed_x(X, i + 1, j - 2, N)
    return float(np.linalg.norm(lhs - rhs))


def chi_expansion(X: np.ndarray, i: int, j: int, N: int) -> dict[tuple[int, int], complex]:
    """Coefficients of ``chi_1 x_{i,j}`` on the shifted vectors, by least squares against Gram matrices.

    The top component is ``P_{n+1}(id_1 (x) X_{i,j})P_{n+1}`` and the bottom one
    ``(d_{n-1}/d_n)(Tr_1 (x) id)(X_{i,j})``.
    """
    k = _strands(X, N)
    n = i + k + j
    qv = q_from_N(N)
    Xij = embed_x(X, i, j, N)
    comps = {n + 1: projector(n + 1, N) @ np.kron(np.eye(N), Xij) @ projector(n + 1, N)}
    if n - 1 >= k:
        comps[n - 1] = qdim(n - 1, qv) / qdim(n, qv) * ptrace_left(Xij, N)
    out: dict[tuple[int, int], complex] = {}
    for m, M in comps.items():
        idx = [(a, m - k - a) for a in range(m - k + 1)]
        emb = [embed_x(X, a, b, N) for a, b in idx]
        G = np.array([[np.vdot(u, v) for v in emb] for u in emb])
        rhs = np.array([np.vdot(u, M) for u in emb])
        coef = np.linalg.lstsq(G, rhs, rcond=None)[0]
        out.update({ij: complex(c) for ij, c in zip(idx, coef)})
    return out


@dataclass(frozen=True)
class PiResult:
    operator: np.ndarray
    best_lambda: float
    deviation: float
    reference_lambda: float


def pi_abc(a: int, b: int, c: int, N: int, ctx: Optional[ScalarContext] = None) -> PiResult:
    """Normalized middle partial trace of ``P_{a+b+c}`` restricted to ``H_a (x) H_c``."""
    _budget(N, a + b + c)
    q = q_from_N(N)
    P = projector(a + b + c, N)
    A, Bd, Cd = N**a, N**b, N**c
    Pi = np.einsum("ixkjxl->ikjl", P.reshape(A, Bd, Cd, A, Bd, Cd)).reshape(A * Cd, A * Cd) / qdim(b, q)
    W = np.kron(isometry(a, N), isometry(c, N))
    R = W.T @ Pi @ W
    ev = np.linalg.eigvalsh((R + R.T) / 2)
    lam = float((ev.max() + ev.min()) / 2)
    dev = float((ev.max() - ev.min()) / 2)
    ref = q ** (-a - c) / (qdim(a, q) * qdim(c, q))
    return PiResult(R, lam, dev, ref)


def _t_a(a: int, N: int) -> np.ndarray:
    """``t_a = (P_a (x) P_a) t_1^a`` as a column of length ``N^{2a}``."""
    if a == 0:
        return np.ones((1, 1))
    t1 = realize(nested_cup(a), N).entries
    Pa = projector(a, N)
    return np.kron(Pa, Pa) @ t1


def _basic_intertwiner(k: int, l: int, a: int, N: int) -> np.ndarray:
    if not 0 <= a <= min(k, l):
        raise ValueError("need 0 <= a <= min(k, l)")
    _budget(N, k + l)
    return _basic_intertwiner_cached(k, l, a, N)


@lru_cache(maxsize=16)
def _basic_intertwiner_cached(k: int, l: int, a: int, N: int) -> np.ndarray:
    m = k + l - 2 * a
    middle = np.kron(np.kron(np.eye(N ** (k - a)), _t_a(a, N)), np.eye(N ** (l - a)))
    return np.kron(projector(k, N), projector(l, N)) @ middle @ projector(m, N)


def kappa(k: int, l: int, a: int, N: int, ctx: Optional[ScalarContext] = None) -> float:
    """``1 / ||V_m^{k,l}||`` with ``m = k + l - 2a``."""
    if not 0 <= a <= min(k, l):
        raise ValueError("need 0 <= a <= min(k, l)")
    _budget(N, k + l)
    return _kappa_cached(k, l, a, N)


@lru_cache(maxsize=None)
def _kappa_cached(k: int, l: int, a: int, N: int) -> float:
    V = _reduced_intertwiner(k, l, a, N)
    # ||V||^2 is the top eigenvalue of the small Gram matrix V^* V
    return float(1.0 / math.sqrt(np.linalg.eigvalsh(V.T @ V).max()))


@lru_cache(maxsize=16)
def _reduced_intertwiner(k: int, l: int, a: int, N: int) -> np.ndarray:
    """``V U_m``: the intertwiner read in orthonormal coordinates of ``H_m``."""
    return _basic_intertwiner(k, l, a, N) @ isometry(k + l - 2 * a, N)


def _convolve_reduced(X: np.ndarray, Y: np.ndarray, a: int, N: int) -> np.ndarray:
    k, l = _strands(X, N), _strands(Y, N)
    V = _reduced_intertwiner(k, l, a, N)
    # apply X (x) Y factorwise instead of forming the Kronecker product
    T = V.reshape(N**k, N**l, -1)
    T = np.tensordot(X, T, axes=(1, 0))
    T = np.tensordot(Y, T, axes=(1, 1)).transpose(1, 0, 2)
    return V.T @ T.reshape(V.shape[0], -1)


def convolve(X: np.ndarray, Y: np.ndarray, a: int, N: int) -> np.ndarray:
    """``X *_m Y = V^* (X (x) Y) V``."""
    k, l = _strands(X, N), _strands(Y, N)
    if not 0 <= a <= min(k, l):
        raise ValueError("need 0 <= a <= min(k, l)")
    _budget(N, k + l)
    U = isometry(k + l - 2 * a, N)
    return U @ _convolve_reduced(X, Y, a, N) @ U.T


def orthogonality_probe(
    k: int,
    n: int,
    ranges: Sequence[tuple[int, int]],
    N: int,
    kp: Optional[int] = None,
    seed: int = 0,
    max_strands: int = 7,
) -> list[dict]:
    """``|(x_{i,j} y | y x'_{i',j'})|`` via the product formula and Peter-Weyl.

    ``ranges`` lists the ``(i, j)`` shifts used for both ``x`` and ``x'``; pairs whose
    products exceed ``max_strands`` are skipped. ``y`` is a seeded random
    self-adjoint element of ``B(H_n)`` with ``||y||_2 = 1``.
    """
    kp = k if kp is None else kp
    qv = q_from_N(N)
    X = ccirc_basis(k, N).vectors[0] / math.sqrt(qdim(k, qv))
    Xp = ccirc_basis(kp, N).vectors[0] / math.sqrt(qdim(kp, qv))
    rng = np.random.default_rng(seed)
    U = isometry(n, N)
    Z = rng.standard_normal((U.shape[1],) * 2)
    Y = U @ (Z + Z.T) @ U.T
    Y *= math.sqrt(qdim(n, qv)) / np.linalg.norm(Y)
    # scale so that x = u_k(X) etc. have unit norm
    X *= math.sqrt(qdim(k, qv)) / np.linalg.norm(X)
    Xp *= math.sqrt(qdim(kp, qv)) / np.linalg.norm(Xp)

    def products(Z0: np.ndarray, left: bool) -> dict[int, np.ndarray]:
        K = _strands(Z0, N)
        out = {}
        for a in range(min(K, n) + 1):
            m = K + n - 2 * a
            if left:
                kap = kappa(K, n, a, N)
                out[m] = kap**2 * _convolve_reduced(Z0, Y, a, N)
            else:
                kap = kappa(n, K, a, N)
                out[m] = kap**2 * _convolve_reduced(Y, Z0, a, N)
        return out

    cache_l: dict[tuple[int, int], dict[int, np.ndarray]] = {}
    cache_r: dict[tuple[int, int], dict[int, np.ndarray]] = {}
    rows = []
    for i, j in ranges:
        if i + k + j + n > max_strands:
            continue
        if (i, j) not in cache_l:
            cache_l[(i, j)] = products(embed_x(X, i, j, N), True)
        for ip, jp in ranges:
            if ip + kp + jp + n > max_strands:
                continue
            if (ip, jp) not in cache_r:
                cache_r[(ip, jp)] = products(embed_x(Xp, ip, jp, N), False)
            L, R = cache_l[(i, j)], cache_r[(ip, jp)]
            val = sum(np.vdot(L[m], R[m]) / qdim(m, qv) for m in L.keys() & R.keys())
            rows.append({"k": k, "kp": kp, "n": n, "i": i, "j": j, "ip": ip, "jp": jp, "abs_inner": float(abs(val))})
    return rows


def projection_rank_check(n: int, N: int, probes: int = 4, seed: int = 0) -> dict:
    """Rank of ``realize(jw(n))`` via trace, randomized idempotence and agreement with the oracle range.

    For an idempotent the rank equals the trace, which keeps the check linear in
    the matrix size even at the edge of the budget.
    """
    from .jones_wenzl import jw

    _budget(N, n)
    R = realize_sparse(jw(n, ScalarContext.from_N(N)), N).real
    U = isometry(n, N)
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((N**n, probes))
    RV = R @ V
    idem = float(np.abs(R @ RV - RV).max())
    herm = float(abs(R - R.T).max()) if R.nnz else 0.0
    fixes_range = float(np.abs(R @ U - U).max())
    return {
        "trace": float(R.diagonal().sum()),
        "d_n": qdim(n, q_from_N(N)),
        "idempotence": idem,
        "hermiticity": herm,
        "fixes_oracle_range": fixes_range,
        "oracle_rank": U.shape[1],
    }
