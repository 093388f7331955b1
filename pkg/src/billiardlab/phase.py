"""Semiclassical phase-space toolkit on periodic grids.

Quantization, coherent-state (Husimi) densities, and microlocal projectors for
fields on periodic rectangular boxes; Dirichlet fields enter through the odd
or zero extension helpers.  The semiclassical parameter is h = 1/sqrt(lam),
and frequencies are scaled so the characteristic shell |xi| = 1 sits at the
grid wavenumbers with h*|k| = 1.

Symbols are sums of separable terms f(x) g(xi) built from periodized
Gaussians and smooth compactly supported bumps.  Each term is quantized
symmetrically, Op(f g) = (M_f G + G M_f)/2 with G the Fourier multiplier of
g: this keeps pairings of real symbols real to round-off while agreeing with
the one-sided quantization to O(h).  Terms depending on x or xi alone reduce
to exact multiplication operators.

The Husimi density samples |<u, g_{x0,xi0}>|^2 with L2-normalized periodized
Gaussian coherent states of width sqrt(h); xi0 runs over the scaled DFT
lattice (where the windowed transform evaluates the overlap exactly) and x0
over a decimated subgrid (so windows are exact array rolls).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhaseError",
    "GaussX",
    "PlateauX",
    "GaussXi",
    "ShellXi",
    "BallXi",
    "SymbolTerm",
    "Symbol",
    "quantize_apply",
    "semiclassical_pairing",
    "HusimiField",
    "husimi",
    "shell_mass",
    "direction_marginal",
    "peak_bins",
    "flow_invariance_defect",
    "microlocal_project",
    "projector_multiplier",
    "laplacian_multiplier",
    "multiplier_commutator_defect",
    "odd_extend",
    "zero_embed",
    "weighted_norm",
    "normalize_field",
]


class PhaseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# smooth bump machinery
# ---------------------------------------------------------------------------


def _bump(s):
    """C-infinity bump: exp(1 - 1/(1-s^2)) on |s|<1, zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


def _smoothstep(t):
    """C-infinity transition: 0 for t<=0, 1 for t>=1."""
    t = np.asarray(t, dtype=float)
    f = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    g = np.where(1 - t > 0, np.exp(-1.0 / np.maximum(1 - t, 1e-300)), 0.0)
    return f / (f + g)


# ---------------------------------------------------------------------------
# symbol factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussX:
    """Periodized Gaussian in position, sum of exp(-|x-c-m|^2 / (2 sigma^2))
    over lattice images (smooth on the torus; separable per axis)."""

    center: tuple[float, float]
    sigma: float

    def _axis(self, t, c, L):
        images = int(math.ceil(6.0 * self.sigma / L)) + 1
        out = np.zeros_like(np.asarray(t, dtype=float))
        for m in range(-images, images + 1):
            out = out + np.exp(-((t - c - m * L) ** 2) / (2.0 * self.sigma**2))
        return out

    def eval(self, X, Y, box):
        return self._axis(X, self.center[0], box[0]) * self._axis(Y, self.center[1], box[1])

    def support(self, box):
        c, s = self.center, 6.0 * self.sigma
        return (c[0] - s, c[0] + s, c[1] - s, c[1] + s)


@dataclass(frozen=True)
class PlateauX:
    """Smooth plateau in one coordinate: 0 outside [e0,e3], 1 on [e1,e2]."""

    edges: tuple[float, float, float, float]
    axis: int = 0

    def __post_init__(self):
        e = self.edges
        if not (e[0] < e[1] <= e[2] < e[3]):
            raise PhaseError("plateau edges must satisfy e0 < e1 <= e2 < e3")

    def eval(self, X, Y, box):
        t = X if self.axis == 0 else Y
        e0, e1, e2, e3 = self.edges
        up = _smoothstep((t - e0) / (e1 - e0))
        down = _smoothstep((e3 - t) / (e3 - e2))
        return up * down

    def support(self, box):
        e = self.edges
        if self.axis == 0:
            return (e[0], e[3], -math.inf, math.inf)
        return (-math.inf, math.inf, e[0], e[3])


@dataclass(frozen=True)
class GaussXi:
    center: tuple[float, float]
    sigma: float

    def eval(self, KX, KY):
        return np.exp(-((KX - self.center[0]) ** 2 + (KY - self.center[1]) ** 2) / (2.0 * self.sigma**2))


@dataclass(frozen=True)
class ShellXi:
    """Compact smooth bump of |xi| around ``radius``, support width ``width``."""

    radius: float
    width: float

    def eval(self, KX, KY):
        return _bump((np.hypot(KX, KY) - self.radius) / self.width)


@dataclass(frozen=True)
class BallXi:
    """Compact smooth bump around xi0 with support radius ``width``."""

    center: tuple[float, float]
    width: float

    def eval(self, KX, KY):
        return _bump(np.hypot(KX - self.center[0], KY - self.center[1]) / self.width)


@dataclass(frozen=True)
class SymbolTerm:
    coeff: float = 1.0
    x_factor: object = None
    xi_factor: object = None


@dataclass(frozen=True)
class Symbol:
    """Sum of separable terms; a(x, xi) = sum coeff * f(x) * g(xi)."""

    terms: tuple

    @staticmethod
    def one():
        return Symbol((SymbolTerm(1.0, None, None),))

    @staticmethod
    def x_only(factor, coeff=1.0):
        return Symbol((SymbolTerm(coeff, factor, None),))

    @staticmethod
    def xi_only(factor, coeff=1.0):
        return Symbol((SymbolTerm(coeff, None, factor),))

    @staticmethod
    def product(x_factor, xi_factor, coeff=1.0):
        return Symbol((SymbolTerm(coeff, x_factor, xi_factor),))

    def __add__(self, other):
        return Symbol(self.terms + other.terms)

    def eval(self, x, y, kx, ky, box):
        """Pointwise symbol values (oracle use)."""
        total = 0.0
        for t in self.terms:
            v = t.coeff
            if t.x_factor is not None:
                v = v * t.x_factor.eval(np.asarray(x, float), np.asarray(y, float), box)
            if t.xi_factor is not None:
                v = v * t.xi_factor.eval(np.asarray(kx, float), np.asarray(ky, float))
            total = total + v
        return total


# ---------------------------------------------------------------------------
# grids, norms
# ---------------------------------------------------------------------------


def _space_grids(shape, box):
    nx, ny = shape
    lx, ly = box
    xs = np.arange(nx) * (lx / nx)
    ys = np.arange(ny) * (ly / ny)
    return np.meshgrid(xs, ys, indexing="ij")


def _freq_grids(shape, box, h):
    nx, ny = shape
    lx, ly = box
    kx = 2 * math.pi * np.fft.fftfreq(nx, d=lx / nx)
    ky = 2 * math.pi * np.fft.fftfreq(ny, d=ly / ny)
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    return h * KX, h * KY


def weighted_norm(u, box):
    u = np.asarray(u)
    dA = (box[0] / u.shape[0]) * (box[1] / u.shape[1])
    return math.sqrt(dA * float(np.sum(np.abs(u) ** 2)))


def normalize_field(u, box):
    n = weighted_norm(u, box)
    if n == 0:
        raise PhaseError("cannot normalize the zero field")
    return np.asarray(u) / n


# ---------------------------------------------------------------------------
# quantization
# ---------------------------------------------------------------------------


def quantize_apply(symbol, h, u, box):
    """Apply Op(a) at parameter h to a field on a periodic box.

    Pure x-terms multiply pointwise and pure xi-terms act as exact Fourier
    multipliers; mixed separable terms use the symmetric realization.
    """
    if h <= 0:
        raise PhaseError("h must be positive")
    u = np.asarray(u)
    shape = u.shape
    X = Y = U = None
    out = np.zeros(shape, dtype=complex)
    for term in symbol.terms:
        f = None
        if term.x_factor is not None:
            if X is None:
                X, Y = _space_grids(shape, box)
            f = term.x_factor.eval(X, Y, box)
        if term.xi_factor is None:
            out += term.coeff * (f * u if f is not None else u)
            continue
        KX, KY = _freq_grids(shape, box, h)
        g = term.xi_factor.eval(KX, KY)
        if U is None:
            U = np.fft.fft2(u)
        Gu = np.fft.ifft2(g * U)
        if f is None:
            out += term.coeff * Gu
        else:
            out += term.coeff * 0.5 * (f * Gu + np.fft.ifft2(g * np.fft.fft2(f * u)))
    return out


def semiclassical_pairing(symbol, h, u, box):
    """<Op(a) u, u> in the grid-weighted inner product (complex; the imaginary
    part is a sanity diagnostic and vanishes to round-off for the symmetric
    realizations used here)."""
    v = quantize_apply(symbol, h, u, box)
    dA = (box[0] / np.asarray(u).shape[0]) * (box[1] / np.asarray(u).shape[1])
    return complex(dA * np.sum(v * np.conj(u)))


# ---------------------------------------------------------------------------
# Husimi transform
# ---------------------------------------------------------------------------


@dataclass
class HusimiField:
    """Sampled coherent-state density H(x0, xi0) >= 0.

    values has shape (nx0, ny0, mx, my); xi grids are the h-scaled DFT
    wavenumbers retained up to |xi| <= xi_max (fftshift-sorted).
    """

    h: float
    x0x: np.ndarray
    x0y: np.ndarray
    xi_x: np.ndarray
    xi_y: np.ndarray
    values: np.ndarray
    box: tuple

    @property
    def measure_element(self):
        dx0 = (self.box[0] / len(self.x0x)) * (self.box[1] / len(self.x0y))
        dxi = (self.h * 2 * math.pi / self.box[0]) * (self.h * 2 * math.pi / self.box[1])
        return dx0 * dxi / (2 * math.pi * self.h) ** 2

    def total_mass(self):
        return float(self.values.sum() * self.measure_element)

    def xi_radius(self):
        XX, YY = np.meshgrid(self.xi_x, self.xi_y, indexing="ij")
        return np.hypot(XX, YY)


def _periodized_gaussian_1d(coords, L, sigma):
    images = int(math.ceil(8.0 * sigma / L)) + 1
    out = np.zeros_like(coords)
    for m in range(-images, images + 1):
        out += np.exp(-((coords - m * L) ** 2) / (2.0 * sigma**2))
    return out


def husimi(u, lam, box, n_x0=(16, 16), xi_max=2.0):
    """Husimi density of u at h = 1/sqrt(lam) on a decimated phase-space grid."""
    if lam <= 0:
        raise PhaseError("lam must be positive")
    u = np.asarray(u)
    nx, ny = u.shape
    nx0, ny0 = n_x0
    if nx0 < 8 or ny0 < 8:
        raise PhaseError("slice needs at least 8 sample points per axis")
    if nx % nx0 or ny % ny0:
        raise PhaseError("x0 counts must divide the grid shape")
    h = 1.0 / math.sqrt(lam)
    sigma = math.sqrt(h)
    lx, ly = box
    dA = (lx / nx) * (ly / ny)
    wx = _periodized_gaussian_1d(np.arange(nx) * (lx / nx), lx, sigma)
    wy = _periodized_gaussian_1d(np.arange(ny) * (ly / ny), ly, sigma)
    W = np.outer(wx, wy)
    norm_w2 = dA * float(np.sum(W * W))

    kx = h * 2 * math.pi * np.fft.fftfreq(nx, d=lx / nx)
    ky = h * 2 * math.pi * np.fft.fftfreq(ny, d=ly / ny)
    selx = np.where(np.abs(kx) <= xi_max)[0]
    sely = np.where(np.abs(ky) <= xi_max)[0]
    ordx = selx[np.argsort(kx[selx], kind="stable")]
    ordy = sely[np.argsort(ky[sely], kind="stable")]

    sx, sy = nx // nx0, ny // ny0
    vals = np.empty((nx0, ny0, len(ordx), len(ordy)))
    for i in range(nx0):
        for j in range(ny0):
            w = u * np.roll(W, (i * sx, j * sy), axis=(0, 1))
            F = np.fft.fft2(w)
            block = F[np.ix_(ordx, ordy)]
            vals[i, j] = (dA * dA / norm_w2) * np.abs(block) ** 2
    return HusimiField(
        h=h,
        x0x=np.arange(nx0) * (lx / nx0),
        x0y=np.arange(ny0) * (ly / ny0),
        xi_x=kx[ordx],
        xi_y=ky[ordy],
        values=vals,
        box=box,
    )


def shell_mass(H, band=(0.8, 1.2)):
    """Fraction of Husimi mass with |xi0| inside the band."""
    total = float(H.values.sum())
    if total == 0:
        raise PhaseError("zero-mass Husimi field")
    r = H.xi_radius()
    ring = (r >= band[0]) & (r <= band[1])
    return float(H.values[..., ring].sum()) / total


def direction_marginal(H, nbins=36, band=None):
    """Mass fraction per direction bin of xi0 (the zero mode is excluded).

    ``band`` optionally restricts to a |xi0| shell, which sharpens the
    rational-direction peaks of corridor modes.
    """
    total = float(H.values.sum())
    if total == 0:
        raise PhaseError("zero-mass Husimi field")
    XX, YY = np.meshgrid(H.xi_x, H.xi_y, indexing="ij")
    r = np.hypot(XX, YY)
    theta = np.arctan2(YY, XX) % (2 * math.pi)
    mass = H.values.sum(axis=(0, 1))
    mass = np.where(r > 1e-12, mass, 0.0)
    if band is not None:
        mass = np.where((r >= band[0]) & (r <= band[1]), mass, 0.0)
    edges = np.linspace(0.0, 2 * math.pi, nbins + 1)
    idx = np.clip(np.digitize(theta.ravel(), edges) - 1, 0, nbins - 1)
    hist = np.bincount(idx, weights=mass.ravel(), minlength=nbins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, hist / total


def peak_bins(masses, factor=3.0):
    """Threshold-over-median rule: bins carrying factor x the median mass
    (and at least the mean, so tail bins of sparse marginals never count)."""
    masses = np.asarray(masses, dtype=float)
    med = float(np.median(masses))
    mean = float(masses.mean())
    return np.where((masses > factor * med) & (masses > mean))[0]


# ---------------------------------------------------------------------------
# flow transport
# ---------------------------------------------------------------------------


def _mode_pairing(symbol, h, u, box, t):
    """<Op(a o Phi_t) u, u> evaluated mode by mode (exact on u's active modes).

    Phi_t is the unit-speed free flow (x, xi) -> (x + t xi/|xi|, xi).  Only
    Fourier modes present in u contribute to the pairing, so the sum is
    restricted to those; each term is the symmetric realization.
    """
    u = np.asarray(u)
    nx, ny = u.shape
    lx, ly = box
    dA = (lx / nx) * (ly / ny)
    ntot = nx * ny
    U = np.fft.fft2(u) / ntot  # coefficients of e_n
    X, Y = _space_grids(u.shape, box)
    KX, KY = _freq_grids(u.shape, box, h)
    active_u = np.abs(U) > 1e-13 * np.abs(U).max()
    total = 0.0 + 0.0j
    jx = np.arange(nx)
    jy = np.arange(ny)
    for term in symbol.terms:
        g = None
        if term.xi_factor is not None:
            g = term.xi_factor.eval(KX, KY)
            active = active_u & (np.abs(g) > 1e-14 * (np.abs(g).max() or 1.0))
        else:
            active = active_u
        for ix, iy in zip(*np.nonzero(active)):
            gval = 1.0 if g is None else float(g[ix, iy])
            kxv, kyv = KX[ix, iy], KY[ix, iy]
            norm = math.hypot(kxv, kyv)
            if term.x_factor is not None:
                if norm < 1e-14:
                    fx = term.x_factor.eval(X, Y, box)  # zero mode does not move
                else:
                    fx = term.x_factor.eval(X + t * kxv / norm, Y + t * kyv / norm, box)
            else:
                fx = None
            e_n = np.exp(2j * math.pi * ix * jx / nx)[:, None] * np.exp(2j * math.pi * iy * jy / ny)[None, :]
            un = U[ix, iy]
            if fx is None:
                total += term.coeff * gval * un * dA * np.sum(e_n * np.conj(u))
                continue
            fwd = un * dA * np.sum(fx * e_n * np.conj(u))
            cn = np.sum(fx * u * np.conj(e_n)) / ntot
            adj = cn * dA * ntot * np.conj(U[ix, iy])
            total += term.coeff * gval * 0.5 * (fwd + adj)
    return complex(total)


def flow_invariance_defect(u, lam, symbol, t, box, domain=None, rays_check=True):
    """| <Op(a o Phi_t) u, u> - <Op(a) u, u> | for the free unit-speed flow.

    When ``domain`` carries an obstacle the transported support is required to
    avoid it (interior propagation only); violations raise PhaseError.
    """
    h = 1.0 / math.sqrt(lam)
    if domain is not None and rays_check and getattr(domain, "obstacle", None) is not None:
        _check_interior_propagation(symbol, u, h, box, t, domain)
    p0 = _mode_pairing(symbol, h, u, box, 0.0)
    pt = _mode_pairing(symbol, h, u, box, t)
    return abs(pt - p0)


def _check_interior_propagation(symbol, u, h, box, t, domain):
    from .rays import segment_hits_obstacle

    U = np.fft.fft2(np.asarray(u))
    KX, KY = _freq_grids(np.asarray(u).shape, box, h)
    for term in symbol.terms:
        if term.x_factor is None:
            continue
        x0, x1, y0, y1 = term.x_factor.support(box)
        x0, x1 = max(x0, 0.0), min(x1, box[0])
        y0, y1 = max(y0, 0.0), min(y1, box[1])
        xs = np.linspace(x0, x1, 7)
        ys = np.linspace(y0, y1, 7)
        if term.xi_factor is not None:
            g = term.xi_factor.eval(KX, KY)
            act = np.abs(g) > 1e-12 * (np.abs(g).max() or 1.0)
        else:
            act = np.abs(U) > 1e-13 * np.abs(U).max()
        kxs = KX[act]
        kys = KY[act]
        norms = np.hypot(kxs, kys)
        keep = norms > 1e-14
        dirs = {( round(float(a / n), 6), round(float(b / n), 6)) for a, b, n in zip(kxs[keep], kys[keep], norms[keep])}
        dirs = list(dirs)[:64]
        for d in dirs:
            for xv in xs:
                for yv in ys:
                    if segment_hits_obstacle(domain, (xv, yv), d, abs(t)):
                        raise PhaseError("interior propagation only: transported support meets the obstacle")


# ---------------------------------------------------------------------------
# microlocal projector
# ---------------------------------------------------------------------------


def projector_multiplier(shape, box, h, xi0, width, profile="smooth"):
    KX, KY = _freq_grids(shape, box, h)
    dist = np.hypot(KX - xi0[0], KY - xi0[1])
    if profile == "smooth":
        m = _bump(dist / width)
    elif profile == "sharp":
        m = (dist < width).astype(float)
    else:
        raise PhaseError(f"unknown projector profile {profile!r}")
    if not (m > 0).any():
        raise PhaseError("empty projector: width is below the Fourier bin spacing at this h")
    return m


def microlocal_project(u, h, xi0, width, box, profile="smooth"):
    """Fourier-multiplier projector onto a width-neighborhood of xi0.

    Exactly commutes with the periodic Laplacian (both are DFT-diagonal).
    """
    u = np.asarray(u)
    m = projector_multiplier(u.shape, box, h, xi0, width, profile)
    return np.fft.ifft2(m * np.fft.fft2(u))


def laplacian_multiplier(shape, box, grid_h):
    """Exact DFT multiplier of the 5-point periodic -Laplace stencil."""
    nx, ny = shape
    if abs(box[0] / nx - grid_h) > 1e-12 or abs(box[1] / ny - grid_h) > 1e-12:
        raise PhaseError("grid spacing inconsistent with box/shape")
    n_x = np.arange(nx)
    n_y = np.arange(ny)
    sx = np.sin(math.pi * n_x / nx) ** 2
    sy = np.sin(math.pi * n_y / ny) ** 2
    return (4.0 / grid_h**2) * (sx[:, None] + sy[None, :])


def multiplier_commutator_defect(m_a, m_e, v):
    """||ifft((m_a m_e - m_e m_a) fft v)|| / ||v|| -- identically zero since
    IEEE multiplication commutes; kept as the operational form of the check."""
    v = np.asarray(v)
    V = np.fft.fft2(v)
    w1 = np.fft.ifft2((m_a * m_e) * V)
    w2 = np.fft.ifft2((m_e * m_a) * V)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise PhaseError("zero test vector")
    return float(np.linalg.norm(w1 - w2) / nv)


# ---------------------------------------------------------------------------
# extensions of Dirichlet fields to periodic boxes
# ---------------------------------------------------------------------------


def odd_extend(field, h):
    """Odd-extend a Dirichlet tensor-grid field to a periodic double cover.

    ``field`` has shape (nx, ny) on interior nodes of [0, (nx+1)h] x
    [0, (ny+1)h]; the result is a ((2nx+2), (2ny+2)) periodic field on the
    doubled box, with the boundary rows/columns exactly zero.
    """
    f = np.asarray(field, dtype=float)
    nx, ny = f.shape

    def ext1(g, axis):
        n = g.shape[axis]
        zeros_shape = list(g.shape)
        zeros_shape[axis] = 1
        z = np.zeros(zeros_shape)
        rev = np.flip(g, axis=axis)
        return np.concatenate([z, g, z, -rev], axis=axis)

    ext = ext1(ext1(f, 0), 1)
    box = ((2 * (nx + 1)) * h, (2 * (ny + 1)) * h)
    return ext, box


def zero_embed(grid, vec, shape, offset=(0, 0)):
    """Zero-extend an interior vector into a larger periodic array."""
    out = np.zeros(shape)
    f = grid.field_from_vector(np.asarray(vec))
    ix, iy = offset
    out[ix : ix + f.shape[0], iy : iy + f.shape[1]] = f
    return out
