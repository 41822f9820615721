"""Helmholtz forward model on the box grid.

The volume potential applied to a density f is

    (V_k f)(x) = k^2 * integral over the box of Phi(x, y) f(y) dy,

discretized by midpoint quadrature over cell centers with an analytic
correction for the singular self cell.  The scattered field of a source
mu in a medium with contrast q solves (I - V_k q) u = V_k mu / k^2, and
boundary data are the field values at the receivers.  A dense quadrature
path serves as the oracle for the FFT-accelerated path, which evaluates
the identical discrete kernel by circular convolution on a doubled cell.
"""

import hashlib
import struct
from functools import lru_cache

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .bessel import hankel1_0, hankel1_1
from .realfield import derealify, realify, realify_matrix

_CACHE_MAGIC = b"VBOP"
_CACHE_VERSION = 1
_CHUNK = 512


class LsSolveError(RuntimeError):
    """Krylov iteration failed to reach the requested residual."""

    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(f"scattering solve stalled at relative residual {residual:.3e} (tol {tol:.3e})")


def fundamental_solution(k, r, dim):
    """Free-space outgoing fundamental solution Phi at distance r.

    2D: (i/4) H0^(1)(k r); 3D: exp(i k r) / (4 pi r).  Requires r > 0;
    the singular self cell is handled by callers via the analytic cell
    integral.
    """
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("fundamental solution is singular at r <= 0")
    if dim == 2:
        return 0.25j * hankel1_0(k * r)
    if dim == 3:
        return np.exp(1j * k * r) / (4.0 * np.pi * r)
    raise ValueError("dim must be 2 or 3")


def self_cell_integral(k, spacing, dim):
    """Analytic integral of Phi over the disk/ball with the cell's area/volume.

    2D (disk radius a, pi a^2 = h^2): i pi a / (2k) * H1^(1)(k a) - 1/k^2.
    3D (ball radius a, 4/3 pi a^3 = h^3): exp(i k a) (1/k^2 - i a / k) - 1/k^2.
    """
    if dim == 2:
        a = spacing / np.sqrt(np.pi)
        return 1j * np.pi * a / (2.0 * k) * hankel1_1(k * a) - 1.0 / k**2
    if dim == 3:
        a = (3.0 / (4.0 * np.pi)) ** (1.0 / 3.0) * spacing
        return np.exp(1j * k * a) * (1.0 / k**2 - 1j * a / k) - 1.0 / k**2
    raise ValueError("dim must be 2 or 3")


def _kernel_chunk(k, dim, targets, sources, weight):
    """Quadrature kernel block k^2 * Phi(x_t, y_s) * weight; no coincident points allowed."""
    diff = targets[:, None, :] - sources[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    return k**2 * weight * fundamental_solution(k, r, dim)


def volume_potential_dense(grid, medium, density):
    """Midpoint-quadrature volume potential V_k at the grid nodes (dense oracle path).

    The self cell uses the analytic disk/ball integral in place of the
    singular midpoint value.
    """
    k = medium.wavenumber
    density = np.asarray(density)
    nodes = grid.nodes()
    n = nodes.shape[0]
    weight = grid.cell_volume()
    diag = k**2 * self_cell_integral(k, grid.spacing, grid.dim)
    out = np.empty(n, dtype=complex)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        diff = nodes[start:stop, None, :] - nodes[None, :, :]
        r = np.sqrt(np.sum(diff * diff, axis=-1))
        idx = np.arange(start, stop)
        r[idx - start, idx] = 1.0  # placeholder; overwritten below
        block = k**2 * weight * fundamental_solution(k, r, grid.dim)
        block[idx - start, idx] = diag
        out[start:stop] = block @ density
    return out


@lru_cache(maxsize=8)
def _fft_kernel(dim, n, spacing, k):
    """FFT of the discrete kernel embedded on the doubled periodic cell.

    Entry at integer offset d (per axis in [-n, n-1], wrapped) is the same
    quadrature weight the dense path uses at distance spacing*|d|; the
    doubling makes the circular convolution exact for supports in the box.
    """
    m = 2 * n
    offsets = np.where(np.arange(m) < n, np.arange(m), np.arange(m) - m).astype(float)
    mesh = np.meshgrid(*([offsets] * dim), indexing="ij")
    r = spacing * np.sqrt(sum(o * o for o in mesh))
    kernel = np.empty(r.shape, dtype=complex)
    mask = r > 0
    kernel[mask] = k**2 * spacing**dim * fundamental_solution(k, r[mask], dim)
    kernel[~mask] = k**2 * self_cell_integral(k, spacing, dim)
    return np.fft.fftn(kernel)


def volume_potential_fft(grid, medium, density):
    """FFT evaluation of the same discrete volume potential as the dense path."""
    k = medium.wavenumber
    n = grid.n_per_axis
    khat = _fft_kernel(grid.dim, n, grid.spacing, k)
    pad = np.zeros((2 * n,) * grid.dim, dtype=complex)
    block = tuple(slice(0, n) for _ in range(grid.dim))
    pad[block] = np.asarray(density).reshape(grid.shape)
    out = np.fft.ifftn(khat * np.fft.fftn(pad))[block]
    return out.ravel()


def _gmres_solve(matvec, rhs, tol, restart=50, maxiter=500):
    """Restarted GMRES with an explicit residual postcondition check."""
    n = rhs.shape[0]
    op = LinearOperator((n, n), matvec=matvec, dtype=complex)
    sol, _ = gmres(op, rhs, rtol=tol, atol=0.0, restart=restart, maxiter=max(1, maxiter // restart))
    res = np.linalg.norm(matvec(sol) - rhs)
    scale = np.linalg.norm(rhs)
    if scale > 0 and res > tol * scale:
        raise LsSolveError(res / scale, tol)
    return sol


def ls_solve(grid, medium, rhs, tol=1e-10):
    """Solve the scattering system (I - V_k q) w = rhs on the grid nodes.

    Uses the FFT potential inside a restarted GMRES iteration and verifies
    the residual postcondition on every solve.  For a homogeneous medium
    the system is the identity.
    """
    rhs = np.asarray(rhs, dtype=complex)
    if medium.is_homogeneous:
        return rhs.copy()
    q = medium.contrast

    def matvec(w):
        return w - volume_potential_fft(grid, medium, q * w)

    return _gmres_solve(matvec, rhs, tol)


def evaluate_potential_at(grid, k, points, density):
    """Quadrature evaluation of V_k density at off-grid points (e.g. receivers)."""
    nodes = grid.nodes()
    density = np.asarray(density)
    weight = grid.cell_volume()
    points = np.asarray(points, dtype=float)
    out = np.empty(points.shape[0], dtype=complex)
    for start in range(0, points.shape[0], _CHUNK):
        stop = min(start + _CHUNK, points.shape[0])
        block = _kernel_chunk(k, grid.dim, points[start:stop], nodes, weight)
        out[start:stop] = block @ density
    return out


def source_to_measurement(grid, medium, receivers, mu, tol=1e-10):
    """Boundary data of the scattered field radiated by the realified source mu.

    Computes u = (I - V_k q)^{-1} V_k mu / k^2 on the grid, then evaluates
    the potential of mu/k^2 + q*u at the receiver points.
    """
    k = medium.wavenumber
    mu_c = derealify(mu)
    density = mu_c / k**2
    if not medium.is_homogeneous:
        interior = ls_solve(grid, medium, volume_potential_fft(grid, medium, density), tol=tol)
        density = density + medium.contrast * interior
    return realify(evaluate_potential_at(grid, k, receivers.points, density))


def assemble_vb(grid, medium, receivers, tol=1e-8):
    """Assemble the realified measurement operator (2M x 2N).

    Row i is the map mu -> scattered boundary data at receiver i.  By
    reciprocity of the Green's function for real contrast, each row is
    obtained from a single solve with a point excitation at the receiver,
    so the cost is M solves rather than N.
    """
    k = medium.wavenumber
    nodes = grid.nodes()
    weight = grid.cell_volume()
    m = receivers.count
    t = np.empty((m, nodes.shape[0]), dtype=complex)
    q = medium.contrast

    def matvec(w):
        return w - q * volume_potential_fft(grid, medium, w)

    for i in range(m):
        phi = _kernel_chunk(k, grid.dim, receivers.points[i : i + 1], nodes, weight)[0]
        if medium.is_homogeneous:
            t[i] = phi / k**2
        else:
            psi = _gmres_solve(matvec, q * phi, tol)
            t[i] = (phi + volume_potential_fft(grid, medium, psi)) / k**2
    return realify_matrix(t)


def _config_hash(grid, medium, receivers):
    h = hashlib.sha256()
    h.update(medium.contrast.tobytes())
    h.update(struct.pack("<d", grid.half_width))
    h.update(receivers.points.tobytes())
    return struct.unpack("<Q", h.digest()[:8])[0]


def save_vb_cache(path, vb, grid, medium, receivers):
    """Persist an assembled operator: magic, version, dims, k, contrast hash, f64 payload."""
    vb = np.ascontiguousarray(vb, dtype="<f8")
    header = struct.pack(
        "<4sIIIIdQ",
        _CACHE_MAGIC,
        _CACHE_VERSION,
        grid.dim,
        grid.n_per_axis,
        receivers.count,
        medium.wavenumber,
        _config_hash(grid, medium, receivers),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(vb.tobytes())


def load_vb_cache(path, grid, medium, receivers):
    """Load a cached operator; returns None when missing or stale."""
    header_size = struct.calcsize("<4sIIIIdQ")
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except FileNotFoundError:
        return None
    if len(raw) < header_size:
        return None
    magic, version, dim, n, m, k, qhash = struct.unpack("<4sIIIIdQ", raw[:header_size])
    if (
        magic != _CACHE_MAGIC
        or version != _CACHE_VERSION
        or dim != grid.dim
        or n != grid.n_per_axis
        or m != receivers.count
        or k != medium.wavenumber
        or qhash != _config_hash(grid, medium, receivers)
    ):
        return None
    rows, cols = 2 * m, 2 * grid.num_nodes
    payload = np.frombuffer(raw[header_size:], dtype="<f8")
    if payload.size != rows * cols:
        return None
    return payload.reshape(rows, cols).copy()
