"""Eigenpairs of the discrete Laplacian.

``solve_window`` computes the eigenpairs nearest a target shift with ARPACK's
shift-invert Lanczos (deterministic start vector, retry on singular shifts).
``dense_oracle`` is the independent verification route: a full dense symmetric
eigendecomposition implemented here from scratch -- Householder
tridiagonalization, implicit-shift QL with rotation accumulation, and
Householder back-transformation -- with no library eigensolver in the path.

All returned eigenvectors are normalized in the grid-weighted norm
h*||.||_2 (which approximates the L2(domain) norm) and sorted ascending by
eigenvalue.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

__all__ = [
    "EigenPair",
    "SolverError",
    "solve_window",
    "dense_oracle",
    "residual",
    "orthonormality_defect",
    "write_cache",
    "read_cache",
    "CACHE_MAGIC",
]

CACHE_MAGIC = b"BSLEIG01"


class SolverError(RuntimeError):
    pass


@dataclass
class EigenPair:
    lam: float
    vec: np.ndarray
    residual: float


def residual(op, pair):
    """||A u - lam u||_2 / ||u||_2 (norm-weight independent)."""
    u = np.asarray(pair.vec, dtype=float)
    nu = np.linalg.norm(u)
    if nu == 0:
        raise SolverError("zero eigenvector")
    return float(np.linalg.norm(op.matvec(u) - pair.lam * u) / nu)


def orthonormality_defect(pairs, h):
    """Max deviation of the grid-weighted Gram matrix from the identity."""
    if not pairs:
        return 0.0
    V = np.column_stack([p.vec for p in pairs])
    G = (h * h) * (V.T @ V)
    return float(np.abs(G - np.eye(len(pairs))).max())


def subspace_angle(Va, Vb):
    """Largest principal angle (sine) between the column spans of Va and Vb.

    Computed through the projection residual, which stays accurate for tiny
    angles where the cosine formula loses digits.
    """
    Qa, _ = np.linalg.qr(np.asarray(Va, dtype=float))
    Qb, _ = np.linalg.qr(np.asarray(Vb, dtype=float))
    R = Qb - Qa @ (Qa.T @ Qb)
    return float(np.linalg.svd(R, compute_uv=False)[0])


def cluster_subspace_defect(pairs_a, pairs_b, scale, cluster_tol=1e-8):
    """Worst principal-angle sine between matched eigenvalue clusters.

    Clusters are built from the eigenvalues of ``pairs_a`` with a relative
    gap threshold; both lists must be sorted ascending and aligned.
    """
    lam = np.array([p.lam for p in pairs_a])
    worst = 0.0
    i = 0
    while i < len(pairs_a):
        j = i + 1
        while j < len(pairs_a) and lam[j] - lam[j - 1] <= cluster_tol * scale:
            j += 1
        Va = np.column_stack([p.vec for p in pairs_a[i:j]])
        Vb = np.column_stack([p.vec for p in pairs_b[i:j]])
        worst = max(worst, subspace_angle(Va, Vb))
        i = j
    return worst


def _finalize(op, lams, vecs, count, target):
    order = np.argsort(np.abs(lams - target), kind="stable")[:count]
    lams = lams[order]
    vecs = vecs[:, order]
    asc = np.argsort(lams, kind="stable")
    lams = lams[asc]
    vecs = vecs[:, asc]
    pairs = []
    for j in range(len(lams)):
        u = vecs[:, j] / (op.h * np.linalg.norm(vecs[:, j]))
        r = float(np.linalg.norm(op.matvec(u) - lams[j] * u) / np.linalg.norm(u))
        pairs.append(EigenPair(float(lams[j]), u, r))
    return pairs


def solve_window(op, target, count, tol=1e-9, seed=0):
    """The ``count`` eigenpairs of ``op`` nearest ``target``.

    Shift-invert Lanczos (ARPACK) with a fixed-seed start vector.  A singular
    factorization at the shift is retried with perturbed shifts up to 3 times.
    Raises SolverError on non-convergence or when residuals exceed ``tol``.
    """
    if count < 1:
        raise SolverError("count must be >= 1")
    if tol <= 0:
        raise SolverError("tol must be positive")
    n = op.n
    if count > n:
        raise SolverError(f"requested {count} pairs from an operator of dimension {n}")
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)

    # small problems: ARPACK needs k < n and enough Krylov room; fall back to
    # the dense route (the oracle is exact and cheap at this scale).
    k_req = min(count + 8, n - 1)
    if n <= 400 or k_req < count or count > n - 2:
        pairs = dense_oracle(op)
        lams = np.array([p.lam for p in pairs])
        vecs = np.column_stack([p.vec for p in pairs])
        return _finalize(op, lams, vecs, count, target)

    scale = max(abs(target), 4.0 * math.pi**2)
    shifts = [target] + [target - f * scale for f in (3e-4, 3e-3, 3e-2)]
    last_err = None
    for sigma in shifts:
        try:
            lams, vecs = spla.eigsh(op.csr, k=k_req, sigma=sigma, which="LM", v0=v0, tol=0)
        except spla.ArpackNoConvergence as exc:
            attained = None
            if exc.eigenvalues is not None and len(exc.eigenvalues):
                attained = float(np.max(np.abs(exc.eigenvalues)))
            raise SolverError(f"eigensolver did not converge (attained window {attained})") from exc
        except RuntimeError as exc:
            last_err = exc  # singular factorization at this shift
            continue
        pairs = _finalize(op, lams, vecs, count, target)
        bad = [p.residual for p in pairs if p.residual > tol]
        if bad:
            raise SolverError(f"residuals exceed tol: max {max(bad):.3e} > {tol:.3e}")
        return pairs
    raise SolverError(f"factorization failed at all shifts near {target}: {last_err}")


# ---------------------------------------------------------------------------
# dense oracle: Householder tridiagonalization + implicit-shift QL
# ---------------------------------------------------------------------------


def _householder_tridiag(A):
    """Reduce symmetric A to tridiagonal (d, e); returns reflectors as rows."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.zeros((max(n - 2, 0), n))
    for k in range(n - 2):
        x = A[k + 1 :, k]
        nx = math.sqrt(float(x @ x))
        if nx == 0.0:
            continue
        alpha = -nx if x[0] >= 0 else nx
        v = x.copy()
        v[0] -= alpha
        nv = math.sqrt(float(v @ v))
        if nv < 1e-300:
            continue
        v /= nv
        V[k, k + 1 :] = v
        S = A[k + 1 :, k + 1 :]
        w = S @ v
        w -= float(v @ w) * v
        S -= 2.0 * np.outer(v, w)
        S -= 2.0 * np.outer(w, v)
        A[k + 1, k] = alpha
        A[k, k + 1] = alpha
    return np.diag(A).copy(), np.diag(A, 1).copy(), V


def _tql2(d, e, Z=None):
    """Implicit-shift QL on a tridiagonal; rotations accumulate into rows of Z.

    On return d holds the eigenvalues (unsorted); when Z is given, row i of Z
    is the eigenvector for d[i].
    """
    d = np.asarray(d, dtype=float).copy()
    e = np.append(np.asarray(e, dtype=float), 0.0)
    n = len(d)
    eps = np.finfo(float).eps
    hypot = math.hypot
    if Z is not None:
        rot = np.empty((2, 2))
        tmp = np.empty((2, Z.shape[1]))
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 50:
                raise SolverError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if Z is not None:
                    rot[0, 0] = c
                    rot[0, 1] = -s
                    rot[1, 0] = s
                    rot[1, 1] = c
                    blk = Z[i : i + 2]
                    np.matmul(rot, blk, out=tmp)
                    blk[:] = tmp
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return d


def dense_oracle(op, compute_vectors=True):
    """Full spectrum by an in-repo dense symmetric eigendecomposition.

    N is capped at 3000 (dense O(N^3) work).  With ``compute_vectors=False``
    only eigenvalues are computed (pairs carry empty vectors); this is the
    fast path for closed-form spectrum checks.
    """
    n = op.n
    if n > 3000:
        raise SolverError(f"dense oracle limited to N <= 3000 (got {n})")
    A = op.to_dense()
    d, e, V = _householder_tridiag(A)
    if compute_vectors:
        Z = np.eye(n)
        vals = _tql2(d, e, Z)
        W = np.ascontiguousarray(Z.T)
        for k in range(V.shape[0] - 1, -1, -1):
            v = V[k]
            t = v @ W
            W -= 2.0 * np.outer(v, t)
        order = np.argsort(vals, kind="stable")
        vals = vals[order]
        W = W[:, order]
        pairs = []
        for j in range(n):
            u = W[:, j] / (op.h * np.linalg.norm(W[:, j]))
            r = float(np.linalg.norm(op.matvec(u) - vals[j] * u) / np.linalg.norm(u))
            pairs.append(EigenPair(float(vals[j]), u, r))
        return pairs
    vals = np.sort(_tql2(d, e))
    return [EigenPair(float(v), np.empty(0), math.nan) for v in vals]


# ---------------------------------------------------------------------------
# eigenpair cache (magic "BSLEIG01"; little-endian u64 N, u64 count, then per
# pair: f64 lam, f64 residual, N x f64 vector)
# ---------------------------------------------------------------------------


def write_cache(path, pairs):
    n = len(pairs[0].vec) if pairs else 0
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<QQ", n, len(pairs)))
        for p in pairs:
            fh.write(struct.pack("<dd", p.lam, p.residual))
            fh.write(np.asarray(p.vec, dtype="<f8").tobytes())


def read_cache(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CACHE_MAGIC:
            raise SolverError(f"bad cache magic {magic!r}")
        n, count = struct.unpack("<QQ", fh.read(16))
        pairs = []
        for _ in range(count):
            lam, res = struct.unpack("<dd", fh.read(16))
            vec = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
            pairs.append(EigenPair(lam, vec, res))
    return pairs
