"""Masked uniform grids and the 5-point discrete Laplacian.

Sign convention: the assembled operator approximates -Laplace, so it is
symmetric positive semidefinite and the eigenvalue problem reads A u = lam u
with lam >= 0.

Node conventions per boundary condition (unit interval):

* Dirichlet -- vertex-centered, h = 1/(n+1), nodes at i*h, i = 1..n; exterior
  neighbors are dropped (value 0).
* Neumann   -- cell-centered, h = 1/n, nodes at (i-1/2)*h; a missing neighbor
  is a mirror ghost (same value), i.e. the diagonal loses 1/h^2 per missing
  link.  Cell-centering makes the mirror convention the exact even reflection,
  so Neumann problems embed exactly into doubled periodic problems.
* periodic  -- vertex-centered, h = 1/n, nodes at i*h, i = 0..n-1, wrapped
  indices.

Curved boundaries (obstacles, stadium wings) are rendered by staircase
exclusion of nodes, which is first-order accurate; mass-ratio diagnostics are
insensitive to the O(h) eigenvalue error this introduces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .geometry import (
    Barrier,
    Rectangle,
    SquareMinusObstacle,
    Stadium,
    TorusMinusObstacle,
)

__all__ = ["Grid", "SparseOperator", "build_grid", "assemble_laplacian", "apply", "DiscretizationError"]


class DiscretizationError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform grid over a domain's bounding box with an interior mask.

    Fields are stored as (nx, ny) arrays indexed [ix, iy]; interior nodes are
    enumerated row-major through ``index`` (a bijection onto 0..n-1, with -1
    marking exterior nodes).
    """

    xs: np.ndarray
    ys: np.ndarray
    h: float
    interior: np.ndarray
    periodic_x: bool = False
    periodic_y: bool = False
    index: np.ndarray = field(init=False, repr=False)
    n: int = field(init=False)

    def __post_init__(self):
        idx = -np.ones(self.interior.shape, dtype=np.int64)
        count = int(self.interior.sum())
        idx[self.interior] = np.arange(count)
        object.__setattr__(self, "index", idx)
        object.__setattr__(self, "n", count)

    @property
    def nx(self):
        return len(self.xs)

    @property
    def ny(self):
        return len(self.ys)

    def node_mesh(self):
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def vector_from_field(self, f):
        return np.asarray(f)[self.interior]

    def field_from_vector(self, v, fill=0.0):
        out = np.full(self.interior.shape, fill, dtype=np.asarray(v).dtype)
        out[self.interior] = v
        return out

    def weighted_norm(self, v):
        """Grid-weighted L2 norm, h*||v||_2, approximating the L2(domain) norm."""
        return self.h * float(np.linalg.norm(v))


def _axis_nodes(bc, h, length):
    """Node coordinates along one axis of extent ``length`` at spacing ``h``."""
    m = int(round(length / h))
    if abs(length - m * h) > 1e-9:
        raise DiscretizationError("axis length is not a grid multiple of h")
    if bc == "dirichlet":
        return np.arange(1, m) * h
    if bc == "neumann":
        return (np.arange(1, m + 1) - 0.5) * h
    if bc == "periodic":
        return np.arange(m) * h
    raise DiscretizationError(f"unknown bc {bc!r}")


def build_grid(domain, resolution):
    """Uniform grid for the domain; interior mask sampled from contains()."""
    if resolution < 8 and not isinstance(domain, Rectangle):
        raise DiscretizationError("resolution must be at least 8")
    if isinstance(domain, Rectangle):
        h = 1.0 / (resolution + 1) if domain.bc_x == "dirichlet" else 1.0 / resolution
        xs = _axis_nodes(domain.bc_x, h, 1.0)
        ys = _axis_nodes(domain.bc_y, h, domain.a)
        interior = np.ones((len(xs), len(ys)), dtype=bool)
        grid = Grid(xs, ys, h, interior, domain.bc_x == "periodic", domain.bc_y == "periodic")
    elif isinstance(domain, TorusMinusObstacle):
        h = 1.0 / resolution
        xs = np.arange(resolution) * h
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        interior = np.asarray(domain.contains(X, Y))
        grid = Grid(xs, xs, h, interior, True, True)
    elif isinstance(domain, SquareMinusObstacle):
        bc = domain.outer_bc
        h = 1.0 / (resolution + 1) if bc == "dirichlet" else 1.0 / resolution
        xs = _axis_nodes(bc, h, 1.0)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        interior = np.asarray(domain.contains(X, Y))
        grid = Grid(xs, xs, h, interior)
    elif isinstance(domain, Stadium):
        h = 1.0 / (resolution + 1)
        x0, x1, y0, y1 = domain.bounding_box()
        i0 = int(np.floor(x0 / h)) + 1
        i1 = int(np.ceil(x1 / h)) - 1
        xs = np.arange(i0, i1 + 1) * h
        ys = np.arange(1, int(round(domain.a / h))) * h
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        interior = np.asarray(domain.contains(X, Y))
        grid = Grid(xs, ys, h, interior)
    elif isinstance(domain, Barrier):
        h = 1.0 / (resolution + 1)
        xs = np.arange(1, resolution + 1) * h
        ys = np.arange(1, int(round(domain.a / h))) * h
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        interior = np.asarray(domain.contains(X, Y))
        grid = Grid(xs, ys, h, interior)
    else:
        raise DiscretizationError(f"unsupported domain {type(domain)!r}")
    if grid.n < 4:
        raise DiscretizationError("grid has fewer than 4 interior nodes")
    return grid


@dataclass(frozen=True)
class SparseOperator:
    """Symmetric operator in CSR layout (approximates -Laplace, PSD)."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    h: float
    symmetric: bool = True

    @property
    def csr(self):
        m = getattr(self, "_csr_cache", None)
        if m is None:
            m = sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))
            object.__setattr__(self, "_csr_cache", m)
        return m

    def matvec(self, v):
        return self.csr @ v

    def to_dense(self):
        return self.csr.toarray()

    def shifted(self, c):
        """A + c*I as a new operator (same sparsity treatment)."""
        m = (self.csr + c * sp.identity(self.n, format="csr")).sorted_indices()
        return SparseOperator(self.n, m.indptr, m.indices, m.data, self.h, self.symmetric)

    def export_triplets(self, path):
        """Plain-text (row, col, value) triplet dump, 17 significant digits."""
        m = self.csr.tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(m.row, m.col, m.data):
                fh.write(f"{r} {c} {v:.17g}\n")


def _outer_bc(domain):
    if isinstance(domain, Rectangle):
        return None  # per-axis, handled separately
    if isinstance(domain, Stadium):
        return domain.bc
    if isinstance(domain, TorusMinusObstacle):
        return "periodic"
    if isinstance(domain, SquareMinusObstacle):
        return domain.outer_bc
    if isinstance(domain, Barrier):
        return domain.bc
    raise DiscretizationError(f"unsupported domain {type(domain)!r}")


def _masked_bc(domain):
    """bc applied at links into masked (excluded) lattice nodes."""
    if isinstance(domain, (TorusMinusObstacle, SquareMinusObstacle)):
        return domain.obstacle_bc
    if isinstance(domain, Barrier):
        return "dirichlet"  # slit
    return _outer_bc(domain)  # stadium wings boundary etc.


def assemble_laplacian(domain, grid):
    """Assemble the 5-point -Laplace operator with the domain's bc handling."""
    interior = grid.interior
    idx = grid.index
    h2 = grid.h * grid.h
    rows, cols = [], []
    neumann_missing = np.zeros(grid.n, dtype=np.int64)
    shifts = [(0, 1), (0, -1), (1, 1), (1, -1)]
    for axis, step in shifts:
        periodic = grid.periodic_x if axis == 0 else grid.periodic_y
        if periodic:
            nb_idx = np.roll(idx, -step, axis=axis)
            nb_in = np.roll(interior, -step, axis=axis)
            off_lattice = np.zeros_like(interior)
        else:
            nb_idx = -np.ones_like(idx)
            nb_in = np.zeros_like(interior)
            off_lattice = np.zeros_like(interior)
            src = [slice(None)] * 2
            dst = [slice(None)] * 2
            if step == 1:
                dst[axis] = slice(None, -1)
                src[axis] = slice(1, None)
                edge = [slice(None)] * 2
                edge[axis] = slice(-1, None)
            else:
                dst[axis] = slice(1, None)
                src[axis] = slice(None, -1)
                edge = [slice(None)] * 2
                edge[axis] = slice(None, 1)
            nb_idx[tuple(dst)] = idx[tuple(src)]
            nb_in[tuple(dst)] = interior[tuple(src)]
            off_lattice[tuple(edge)] = True
        link = interior & nb_in
        rows.append(idx[link])
        cols.append(nb_idx[link])
        # classify missing neighbors
        missing = interior & ~nb_in
        if not missing.any():
            continue
        if isinstance(domain, Rectangle):
            bc = domain.bc_x if axis == 0 else domain.bc_y
            if bc == "neumann":
                np.add.at(neumann_missing, idx[missing], 1)
        else:
            off = missing & off_lattice
            masked = missing & ~off_lattice
            if off.any() and _outer_bc(domain) == "neumann":
                np.add.at(neumann_missing, idx[off], 1)
            if masked.any() and _masked_bc(domain) == "neumann":
                np.add.at(neumann_missing, idx[masked], 1)

    n = grid.n
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals = [np.full(r.shape, -1.0 / h2) for r in rows[:-1]]
    vals.append((4.0 - neumann_missing) / h2)
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return SparseOperator(n, A.indptr, A.indices, A.data, grid.h)


def assemble_from_mask(mask, h, periodic=(False, False), neumann_outer=False, neumann_masked=False):
    """Laplacian straight from a mask (no domain), for synthetic test grids."""
    grid = Grid(np.arange(mask.shape[0]) * h, np.arange(mask.shape[1]) * h, h, mask, *periodic)
    interior = grid.interior
    idx = grid.index
    h2 = h * h
    rows, cols = [], []
    neumann_count = np.zeros(grid.n, dtype=np.int64)
    for axis, step in [(0, 1), (0, -1), (1, 1), (1, -1)]:
        is_per = periodic[axis]
        if is_per:
            nb_idx = np.roll(idx, -step, axis=axis)
            nb_in = np.roll(interior, -step, axis=axis)
            off_lattice = np.zeros_like(interior)
        else:
            nb_idx = -np.ones_like(idx)
            nb_in = np.zeros_like(interior)
            off_lattice = np.zeros_like(interior)
            src = [slice(None)] * 2
            dst = [slice(None)] * 2
            edge = [slice(None)] * 2
            if step == 1:
                dst[axis], src[axis], edge[axis] = slice(None, -1), slice(1, None), slice(-1, None)
            else:
                dst[axis], src[axis], edge[axis] = slice(1, None), slice(None, -1), slice(None, 1)
            nb_idx[tuple(dst)] = idx[tuple(src)]
            nb_in[tuple(dst)] = interior[tuple(src)]
            off_lattice[tuple(edge)] = True
        link = interior & nb_in
        rows.append(idx[link])
        cols.append(nb_idx[link])
        missing = interior & ~nb_in
        if missing.any():
            off = missing & off_lattice
            masked = missing & ~off_lattice
            if neumann_outer and off.any():
                np.add.at(neumann_count, idx[off], 1)
            if neumann_masked and masked.any():
                np.add.at(neumann_count, idx[masked], 1)
    n = grid.n
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals = [np.full(r.shape, -1.0 / h2) for r in rows[:-1]]
    vals.append((4.0 - neumann_count) / h2)
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return grid, SparseOperator(n, A.indptr, A.indices, A.data, h)


def apply(op, v):
    """Matrix-vector product A v."""
    v = np.asarray(v)
    if v.shape[-1] != op.n:
        raise DiscretizationError(f"dimension mismatch: operator {op.n}, vector {v.shape[-1]}")
    return op.matvec(v)
