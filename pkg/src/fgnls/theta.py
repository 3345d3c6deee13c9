"""Riemann theta function by truncated lattice sums.

Arguments are first reduced so that ``Y^-1 Im z`` lies in ``[-1/2, 1/2]^g`` and
``Re z`` in ``[-1/2, 1/2]^g``; the quasi-periodicity factor is carried in log form.
The lattice point set is fixed per context: every ``n`` with
``|T (n + c)| <= R`` for some shift ``c`` in the reduced cell, where ``Y = T^T T``.
Each batch then sums only over the balls around its actual shifts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, gammaincc

from .errors import TruncationOverflow

DEFAULT_EPS = 1e-12
POINT_CAP = 10_000_000
_CHUNK = 2048


def tail_bound(radius: float, g: int, r: float) -> float:
    """Bound on the omitted part of the normalized Gaussian lattice sum.

    ``radius`` and ``r`` (shortest lattice vector) are measured in the lattice
    ``sqrt(pi) T Z^g``.
    """
    if radius <= r / 2:
        return np.inf
    x = (radius - r / 2) ** 2
    return 0.5 * g * (2.0 / r) ** g * gammaincc(0.5 * g, x) * gamma(0.5 * g)


def truncation_radius(Y: np.ndarray, eps: float) -> float:
    """Smallest radius (in the ``sqrt(pi) T Z^g`` lattice) with tail bound below eps."""
    g = Y.shape[0]
    r = np.sqrt(np.pi * np.linalg.eigvalsh(Y)[0])
    # the bound is monotone in the radius; bracket then bisect
    lo = r / 2
    hi = max(r, 1.0)
    while tail_bound(hi, g, r) > eps:
        hi *= 2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail_bound(mid, g, r) > eps:
            lo = mid
        else:
            hi = mid
    return max(hi, np.sqrt(-np.log(eps)) + 1.0)


def _lattice_points(Y: np.ndarray, rho: float, cap: int) -> np.ndarray:
    """Integer vectors with ``n^T Y n <= rho^2``, enumerated over the bounding box."""
    g = Y.shape[0]
    half = np.floor(rho * np.sqrt(np.diag(np.linalg.inv(Y)))).astype(int)
    box = int(np.prod(2 * half + 1, dtype=float))
    vol = np.pi ** (g / 2) / gamma(g / 2 + 1) * rho ** g / np.sqrt(np.linalg.det(Y))
    if vol > cap or box > 50 * cap:
        raise TruncationOverflow(f"theta sum needs about {vol:.3g} lattice points (cap {cap})")
    axes = [np.arange(-h, h + 1) for h in half]
    pts = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, g)
    keep = np.einsum("ni,ij,nj->n", pts, Y, pts) <= rho ** 2
    return pts[keep]


@dataclass(frozen=True, eq=False)
class ThetaContext:
    """Immutable data needed to evaluate Theta(z; tau)."""

    tau: np.ndarray
    eps: float = DEFAULT_EPS
    cap: int = POINT_CAP
    chol: np.ndarray = field(init=False, repr=False)
    radius: float = field(init=False)
    points: np.ndarray = field(init=False, repr=False)
    _Yinv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tau = np.array(self.tau, dtype=complex)
        Y = tau.imag
        if not np.allclose(tau, tau.T, atol=1e-8 * max(1.0, np.abs(tau).max())):
            raise ValueError("tau must be symmetric")
        ev = np.linalg.eigvalsh(Y)
        if ev[0] <= 0:
            raise ValueError("Im tau must be positive definite")
        R = truncation_radius(Y, self.eps)
        rho = R / np.sqrt(np.pi) + 0.5 * np.sqrt(Y.shape[0] * ev[-1])
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "chol", np.linalg.cholesky(Y).T)
        object.__setattr__(self, "radius", float(R))
        object.__setattr__(self, "points", _lattice_points(Y, rho, self.cap))
        object.__setattr__(self, "_Yinv", np.linalg.inv(Y))

    @property
    def genus(self) -> int:
        return self.tau.shape[0]

    def doubled(self) -> "ThetaContext":
        """Context whose tail bound is squared (roughly doubles the radius)."""
        return ThetaContext(self.tau, self.eps ** 2 if self.eps ** 2 > 0 else 1e-300, self.cap)


def theta_reduce(ctx: ThetaContext, z) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(z_red, log_prefactor)`` with ``Theta(z) = exp(log_prefactor) Theta(z_red)``."""
    z = np.asarray(z, dtype=complex)
    m = np.round(z.imag @ ctx._Yinv.T)
    zr = z - m @ ctx.tau.T
    zr = zr - np.round(zr.real)
    mt = np.einsum("...i,ij,...j->...", m, ctx.tau, m)
    logp = -2j * np.pi * np.einsum("...i,...i->...", m, zr) - 1j * np.pi * mt
    return zr, logp


def _active_points(ctx: ThetaContext, zr: np.ndarray) -> np.ndarray:
    """Lattice points that matter for a batch of reduced arguments.

    Grids over the real torus share a handful of imaginary parts, so the
    union of the per-shift balls is much smaller than the full point set.
    """
    shifts = np.unique(np.round(zr.imag @ ctx._Yinv.T, 9), axis=0)
    if len(shifts) > 32:
        return ctx.points
    rad = ctx.radius / np.sqrt(np.pi) + 1e-6
    keep = np.zeros(len(ctx.points), dtype=bool)
    for c in shifts:
        v = (ctx.points + c) @ ctx.chol.T
        keep |= np.einsum("ni,ni->n", v, v) <= rad ** 2
    return ctx.points[keep]


def _raw_sum(ctx: ThetaContext, z: np.ndarray, grad: bool = False, masked: bool = True):
    """Lattice sum at already reduced arguments; z has shape (B, g)."""
    out = np.empty(z.shape[0], dtype=complex)
    gout = np.empty(z.shape, dtype=complex) if grad else None
    for s in range(0, z.shape[0], _CHUNK):
        zz = z[s:s + _CHUNK]
        pts = _active_points(ctx, zz) if masked else ctx.points
        quad = np.einsum("ni,ij,nj->n", pts, ctx.tau, pts)
        e = np.exp(1j * np.pi * quad[None, :] + 2j * np.pi * (zz @ pts.T))
        out[s:s + _CHUNK] = e.sum(axis=1)
        if grad:
            gout[s:s + _CHUNK] = 2j * np.pi * (e @ pts)
    return (out, gout) if grad else out


def log_theta(ctx: ThetaContext, z) -> np.ndarray:
    """log Theta(z) (principal log of the reduced sum plus the exact prefactor)."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape[:-1]
    zr, logp = theta_reduce(ctx, z.reshape(-1, ctx.genus))
    return (logp + np.log(_raw_sum(ctx, zr))).reshape(shape)


def theta(ctx: ThetaContext, z) -> np.ndarray | complex:
    """Theta(z; tau); z has shape (g,) or (..., g)."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape[:-1]
    zr, logp = theta_reduce(ctx, z.reshape(-1, ctx.genus))
    val = (np.exp(logp) * _raw_sum(ctx, zr)).reshape(shape)
    return val[()] if val.ndim == 0 else val


def theta_grad(ctx: ThetaContext, z) -> np.ndarray:
    """Gradient of Theta with respect to z, by termwise differentiation."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    flat = z.reshape(-1, ctx.genus)
    m = np.round(flat.imag @ ctx._Yinv.T)
    zr, logp = theta_reduce(ctx, flat)
    val, grad = _raw_sum(ctx, zr, grad=True)
    out = np.exp(logp)[:, None] * (grad - 2j * np.pi * m * val[:, None])
    return out.reshape(shape)


def theta_unreduced(ctx: ThetaContext, z) -> complex:
    """Direct lattice sum without argument reduction (moderate z only)."""
    z = np.asarray(z, dtype=complex).reshape(1, -1)
    return complex(_raw_sum(ctx, z, masked=False)[0])


@dataclass(frozen=True)
class ThetaCertificate:
    value: complex
    refined: complex
    radius: float
    n_points: int

    @property
    def change(self) -> float:
        return abs(self.refined - self.value)


def certificate(ctx: ThetaContext, z) -> ThetaCertificate:
    """Evaluate with the context radius and a tighter one; report both."""
    fine = ctx.doubled()
    return ThetaCertificate(complex(theta(ctx, z)), complex(theta(fine, z)), ctx.radius, len(ctx.points))
