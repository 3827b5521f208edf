"""Finite-dimensional tail analysis of vector families.

Inner products are linear in the first argument, <u, v> = sum u_i conj(v_i),
matching the reproducing-kernel convention <k_lambda, k_mu> = k_lambda(mu); a
coordinate family is a matrix whose columns are the vectors, with Gram
G[n, p] = <x_n, x_p>.  All "tail" statements are finite truncations: c_N, C_N
are the extremal Rayleigh quotients of the trailing principal submatrix and
every report carries the truncation size, so verdicts are trend diagnostics.
Indices N are 1-based to match the tail notation (N = 1 means the whole family).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateHead,
    DimensionMismatch,
    NotHermitian,
    NotPSD,
    SingularGram,
)

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
RANK_TOL = 1e-10
MAX_TRUNCATION = 512


def _as_gram(G) -> np.ndarray:
    from .kernels import gram_entries
    G = gram_entries(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("Gram matrix must be square")
    if G.shape[0] > MAX_TRUNCATION:
        raise ValueError(f"truncations above {MAX_TRUNCATION} are not supported")
    return G


def _check_hermitian_psd(G: np.ndarray, require_psd: bool = True) -> np.ndarray:
    scale = max(1.0, float(np.abs(G).max()))
    dev = float(np.abs(G - G.conj().T).max())
    if dev > HERMITIAN_TOL * scale:
        raise NotHermitian(f"max |G - G*| = {dev:.3e}")
    G = 0.5 * (G + G.conj().T)
    if require_psd:
        lo = float(np.linalg.eigvalsh(G)[0])
        if lo < -PSD_TOL * scale:
            raise NotPSD(f"min eigenvalue {lo:.3e}")
    return G


@dataclass(frozen=True)
class VectorFamily:
    """n vectors as columns of an m x n coordinate matrix."""

    coordinates: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coordinates, dtype=complex)
        if coords.ndim != 2:
            raise ValueError("coordinates must be a 2-d array (columns = vectors)")
        object.__setattr__(self, "coordinates", coords)

    @property
    def size(self):
        return self.coordinates.shape[1]

    def gram(self) -> np.ndarray:
        X = self.coordinates
        return (X.conj().T @ X).T


def family_from_gram(G) -> VectorFamily:
    """Recover coordinates via the PSD square root (deterministic, rank-revealing)."""
    G = _check_hermitian_psd(_as_gram(G))
    w, Q = np.linalg.eigh(G)
    w = np.clip(w, 0.0, None)
    X = np.sqrt(w)[:, None] * Q.T
    return VectorFamily(X)


def as_family(obj) -> VectorFamily:
    """VectorFamily passes through; a GramMatrix is factored; arrays are coordinates."""
    if isinstance(obj, VectorFamily):
        return obj
    if hasattr(obj, "entries"):
        return family_from_gram(obj)
    return VectorFamily(np.asarray(obj, dtype=complex))


def tail_bounds(G, N: int):
    """(c_N, C_N): extremal eigenvalues of the trailing submatrix G[N.., N..]."""
    G = _check_hermitian_psd(_as_gram(G))
    n = G.shape[0]
    if not 1 <= N <= n:
        raise ValueError(f"N must lie in 1..{n}")
    w = np.linalg.eigvalsh(G[N - 1:, N - 1:])
    return float(w[0]), float(w[-1])


def row_defects(G, N: int):
    """(eps_N^row, rowL2): sup-of-row-sums over the tail and full-row l2 defects.

    eps_N^row = sup_{n >= N} sum_{p >= N, p != n} |G[n, p]|; rowL2[n] is
    sum_{p != n} |G[n, p]|^2 over the whole truncation, for every n.
    """
    G = _as_gram(G)
    n = G.shape[0]
    if not 1 <= N <= n:
        raise ValueError(f"N must lie in 1..{n}")
    A = np.abs(G)
    tail = A[N - 1:, N - 1:].copy()
    np.fill_diagonal(tail, 0.0)
    eps_row = float(tail.sum(axis=1).max()) if tail.size else 0.0
    B = A ** 2
    np.fill_diagonal(B, 0.0)
    row_l2 = B.sum(axis=1)
    return eps_row, [float(v) for v in row_l2]


def _span_basis(X: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of X."""
    if X.size == 0:
        return np.zeros((X.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > tol * (s[0] if s.size else 1.0)))
    return U[:, :rank]


def frame_constants(family, N: int):
    """Extremal values of sum_{n >= N} |<f, x_n>|^2 over unit f orthogonal to
    the first N-1 vectors, inside the span of the family."""
    fam = as_family(family)
    X = fam.coordinates
    n = fam.size
    if not 1 <= N <= n:
        raise ValueError(f"N must lie in 1..{n}")
    head = X[:, :N - 1]
    if N > 1:
        s = np.linalg.svd(head, compute_uv=False)
        if s.size < N - 1 or s[-1] <= RANK_TOL * s[0]:
            raise DegenerateHead("head vectors are numerically dependent")
    V = _span_basis(X)
    if N > 1:
        W = _span_basis(head)
        comp = V - W @ (W.conj().T @ V)
        C = _span_basis(comp)
    else:
        C = V
    if C.shape[1] == 0:
        return 0.0, 0.0
    # <f, x_n> = x_n^H f for f = C c; stack rows x_n^H C over the tail
    A = X[:, N - 1:].conj().T @ C
    s = np.linalg.svd(A, compute_uv=False)
    smin = float(s[-1]) if A.shape[0] >= C.shape[1] else 0.0
    return smin ** 2, float(s[0]) ** 2


@dataclass(frozen=True)
class BiorthogonalSystem:
    """x_n^* = sum_l coefficients[l, n] x_l with <x_l, x_n^*> = delta."""

    coefficients: np.ndarray


def biorthogonal(family) -> BiorthogonalSystem:
    fam = as_family(family)
    G = fam.gram()
    w = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    if w[0] <= PSD_TOL:
        raise SingularGram(f"min Gram eigenvalue {w[0]:.3e}")
    # <x_l, sum_k M[k,n] x_k> = (G conj(M))[l,n] = delta requires M = conj(G^-1)
    M = np.conj(np.linalg.inv(G))
    return BiorthogonalSystem(M)


def dual_vectors(family) -> np.ndarray:
    fam = as_family(family)
    return fam.coordinates @ biorthogonal(fam).coefficients


def perturbation_defect(X, Xp, N: int = 1) -> float:
    """Smallest eps with sum_{n>=N} |<x, x_n - x'_n>|^2 <= eps ||x||^2:
    the top eigenvalue of the difference frame operator."""
    fam = as_family(X)
    famp = as_family(Xp)
    if fam.coordinates.shape != famp.coordinates.shape:
        raise DimensionMismatch("families must share shape and ambient space")
    n = fam.size
    if not 1 <= N <= n:
        raise ValueError(f"N must lie in 1..{n}")
    D = fam.coordinates[:, N - 1:] - famp.coordinates[:, N - 1:]
    if D.size == 0:
        return 0.0
    s = np.linalg.svd(D, compute_uv=False)
    return float(s[0]) ** 2


@dataclass(frozen=True)
class NormBudgetVerdict:
    drift_sum: float
    threshold: float
    within_budget: bool


def norm_budget_check(X, Xp) -> NormBudgetVerdict:
    """sum ||x_n - x'_n||^2 against ||U_X||^{-1} = sqrt(c_1) = lambda_min(G)^{1/2}."""
    fam = as_family(X)
    famp = as_family(Xp)
    if fam.coordinates.shape != famp.coordinates.shape:
        raise DimensionMismatch("families must share shape and ambient space")
    w = np.linalg.eigvalsh(fam.gram())
    if w[0] <= PSD_TOL:
        raise SingularGram(f"min Gram eigenvalue {w[0]:.3e}")
    drift = float(np.sum(np.abs(fam.coordinates - famp.coordinates) ** 2))
    threshold = float(np.sqrt(w[0]))
    return NormBudgetVerdict(drift, threshold, drift < threshold)


@dataclass(frozen=True)
class TailBoundsReport:
    """Rows (N, c_N, C_N, eps_row, max_rowL2) over a range of truncation points."""

    truncation: int
    rows: tuple


def tail_report(G, n_range=None) -> TailBoundsReport:
    G = _as_gram(G)
    n = G.shape[0]
    rows = []
    for N in (n_range or range(1, n + 1)):
        c_n, c_up = tail_bounds(G, N)
        eps_row, row_l2 = row_defects(G, N)
        rows.append((int(N), c_n, c_up, eps_row, max(row_l2[N - 1:], default=0.0)))
    return TailBoundsReport(n, tuple(rows))
