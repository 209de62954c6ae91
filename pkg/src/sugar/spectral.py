"""Dense symmetric eigensolvers and graph-connectivity analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import KernelMatrix, degrees

# Cyclic Jacobi is the reference solver; above this size the LAPACK
# path (numpy.linalg.eigh) takes over, since pure-Python sweeps scale
# as n^3 with a large constant.
JACOBI_MAX_AUTO = 128
_JACOBI_SWEEPS = 64


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order with orthonormal column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=float)
        if np.any(np.diff(vals) > 1e-12 * max(1.0, np.abs(vals).max(initial=0.0))):
            raise ValueError("eigenvalues must be in descending order")
        for arr, name in ((vals, "eigenvalues"), (vecs, "eigenvectors")):
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)


@dataclass(frozen=True)
class Embedding:
    """Diffusion-map coordinates and the retained eigenvalues."""

    coords: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise ValueError("embedding needs at least one coordinate")
        if not np.isfinite(coords).all():
            raise ValueError("embedding coordinates must be finite")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)


def _jacobi(a: np.ndarray):
    """Cyclic Jacobi rotations until the off-diagonal mass vanishes."""
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, np.abs(a).max())
    for _ in range(_JACOBI_SWEEPS):
        upper = np.triu(a, 1)
        off = np.sqrt(2.0 * np.sum(upper * upper))
        if off <= 1e-14 * scale * n:
            break
        skip = 1e-18 * scale
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        raise RuntimeError("Jacobi sweeps did not converge")
    return np.diag(a).copy(), v


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # Make the largest-magnitude entry of each column positive, so the
    # decomposition is deterministic up to degenerate subspaces.
    anchor = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[anchor, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def sym_eigendecomp(s, method: str = "auto") -> EigenDecomposition:
    """Full spectrum of a symmetric matrix, eigenvalues descending.

    method: "jacobi" (reference implementation), "lapack"
    (numpy.linalg.eigh), or "auto" (jacobi up to small sizes).
    """
    arr = np.asarray(s, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("eigendecomposition needs a square matrix")
    if not np.isfinite(arr).all():
        raise ValueError("matrix must be finite")
    asym = np.abs(arr - arr.T).max() if arr.size else 0.0
    if asym > 1e-10 * max(1.0, np.abs(arr).max()):
        raise ValueError(f"matrix asymmetric by {asym:.3e}")
    arr = 0.5 * (arr + arr.T)
    if method == "auto":
        method = "jacobi" if arr.shape[0] <= JACOBI_MAX_AUTO else "lapack"
    if method == "jacobi":
        vals, vecs = _jacobi(arr)
    elif method == "lapack":
        vals, vecs = np.linalg.eigh(arr)
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")
    order = np.argsort(vals, kind="stable")[::-1]
    return EigenDecomposition(vals[order], _fix_signs(vecs[:, order]))


def diffusion_map(k: KernelMatrix, m: int, t: int = 0, method: str = "auto") -> Embedding:
    """Embed a square kernel via the spectrum of its diffusion operator.

    Decomposes the symmetric conjugate D^{-1/2} K D^{-1/2}, converts to
    right eigenvectors of D^{-1} K, drops the constant eigenvector, and
    returns the next m coordinates scaled by eigenvalue^t.
    """
    if not k.square:
        raise ValueError("diffusion map requires a square kernel")
    n = k.n
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < N, got m={m}, N={n}")
    if t < 0:
        raise ValueError("diffusion time must be >= 0")
    d = degrees(k).degrees
    inv_root = 1.0 / np.sqrt(d)
    sym = k.values * np.outer(inv_root, inv_root)
    eig = sym_eigendecomp(sym, method=method)
    phi = eig.eigenvectors * inv_root[:, None]
    lam = eig.eigenvalues[1 : m + 1]
    coords = phi[:, 1 : m + 1] * lam ** int(t)
    return Embedding(coords, lam)


def connected_components(k: KernelMatrix, threshold: float):
    """Component count and labels of the graph with edges of affinity >= threshold.

    The count equals the zero-eigenvalue multiplicity of the thresholded
    graph Laplacian, but is computed exactly by union-find.
    """
    if not k.square:
        raise ValueError("connected components require a square kernel")
    n = k.n
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    rows, cols = np.nonzero(k.values >= threshold)
    for i, j in zip(rows, cols):
        if i < j:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    labels = np.empty(n, dtype=np.int64)
    seen: dict[int, int] = {}
    for i in range(n):
        root = find(i)
        if root not in seen:
            seen[root] = len(seen)
        labels[i] = seen[root]
    return len(seen), labels


def laplacian_spectrum(k: KernelMatrix, m: int, method: str = "auto") -> np.ndarray:
    """The m smallest eigenvalues of the unnormalized Laplacian, ascending."""
    if not k.square:
        raise ValueError("Laplacian spectrum requires a square kernel")
    if not 1 <= m <= k.n:
        raise ValueError(f"need 1 <= m <= N, got m={m}, N={k.n}")
    lap = np.diag(k.values.sum(axis=1)) - k.values
    eig = sym_eigendecomp(lap, method=method)
    return eig.eigenvalues[::-1][:m].copy()
