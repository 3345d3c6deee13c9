"""Integrals of ``h(z) dz / R(z)`` around cuts and along straight paths.

Loop integrals collapse onto the cut, where the weight ``1/sqrt(1 - t^2)`` is
absorbed exactly by Gauss-Chebyshev nodes.  Path integrals use the substitution
``z = e + d s^2`` at branch-point endpoints followed by adaptive
Gauss-Legendre on the smooth integrand.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import PathCrossesCut, QuadratureNonConvergence
from .surface import Surface, on_cut_mask, r_factors

DEFAULT_TOL = 1e-10
START_NODES = 64
MAX_NODES = 4096


@dataclass(frozen=True)
class CutLoop:
    j: int
    orientation: str = "negative"

    def __post_init__(self):
        if self.orientation not in ("positive", "negative"):
            raise ValueError("orientation must be 'positive' or 'negative'")

    def reversed(self) -> "CutLoop":
        return CutLoop(self.j, "positive" if self.orientation == "negative" else "negative")


@dataclass(frozen=True)
class SheetPath:
    """Polyline through ``vertices``; ``sheets[k]`` is +1 (main) or -1 per segment."""

    vertices: tuple
    sheets: tuple = field(default=())

    def __post_init__(self):
        if not self.sheets:
            object.__setattr__(self, "sheets", (1,) * max(len(self.vertices) - 1, 0))
        if len(self.sheets) != max(len(self.vertices) - 1, 0):
            raise ValueError("one sheet sign per segment is required")

    def reversed(self) -> "SheetPath":
        return SheetPath(tuple(self.vertices[::-1]), tuple(self.sheets[::-1]))


def _as_numerators(numerator) -> tuple[np.ndarray, bool]:
    arr = np.atleast_1d(np.asarray(numerator, dtype=complex))
    single = arr.ndim == 1
    return (arr[None, :] if single else arr), single


def _polyvals(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.zeros((coeffs.shape[0],) + z.shape, dtype=complex)
    for k in range(coeffs.shape[1]):
        out = out * z + coeffs[:, k].reshape((-1,) + (1,) * z.ndim)
    return out


@lru_cache(maxsize=None)
def chebyshev_nodes(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    return np.cos((2 * k - 1) * np.pi / (2 * n))


@lru_cache(maxsize=None)
def legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _cut_rule(surface: Surface, j: int, coeffs: np.ndarray, n: int) -> np.ndarray:
    """``2 * integral over cut j of h / R_+ dz`` with n Chebyshev nodes."""
    t = chebyshev_nodes(n)
    z = surface.mids[j] + surface.halves[j] * t
    others = np.prod(np.delete(r_factors(surface, z), j, axis=0), axis=0)
    vals = _polyvals(coeffs, z) / others
    # R_+ = i c sqrt(1-t^2) * others, dz = c dt
    return -2j * (np.pi / n) * vals.sum(axis=-1)


def loop_integral(surface: Surface, loop: CutLoop, numerator, *, tol: float = DEFAULT_TOL,
                  n_start: int = START_NODES, n_max: int = MAX_NODES, return_nodes: bool = False):
    """Contour integral of ``numerator(z) / R(z)`` once around cut ``loop.j``.

    ``numerator`` holds polynomial coefficients (highest power first); a 2-D
    array integrates several numerators at once.  The negative (clockwise)
    orientation traverses the ``+`` side along the cut orientation.
    """
    coeffs, single = _as_numerators(numerator)
    n = n_start
    prev = _cut_rule(surface, loop.j, coeffs, n)
    while True:
        n *= 2
        if n > n_max:
            raise QuadratureNonConvergence(f"loop integral around cut {loop.j} did not converge")
        cur = _cut_rule(surface, loop.j, coeffs, n)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, np.max(np.abs(cur))):
            break
        prev = cur
    if loop.orientation == "positive":
        cur = -cur
    res = cur[0] if single else cur
    return (res, n) if return_nodes else res


# --- straight-path integrals --------------------------------------------------------


def _branch_index(surface: Surface, z: complex) -> tuple[int, int] | None:
    """Return (cut, +1 for end / -1 for start) if z is a branch point."""
    tol = 1e-14 * surface.scale
    for j in range(surface.genus + 1):
        if abs(z - surface.ends[j]) <= tol:
            return j, 1
        if abs(z - surface.starts[j]) <= tol:
            return j, -1
    return None


def _segment_crosses_cut(surface: Surface, p: complex, q: complex) -> bool:
    s = np.linspace(0.0, 1.0, 9)[1:-1]
    if np.any(on_cut_mask(surface, p + (q - p) * s, tol=1e-14)):
        return True
    # exact segment/segment test against every cut
    for j in range(surface.genus + 1):
        a, b = surface.starts[j], surface.ends[j]
        d1, d2 = q - p, b - a
        den = (d1.conjugate() * d2).imag
        if abs(den) < 1e-300:
            continue
        w = a - p
        u = (w.conjugate() * d2).imag / den
        v = (w.conjugate() * d1).imag / den
        eps = 1e-13
        if eps < u < 1 - eps and eps < v < 1 - eps:
            return True
    return False


class _Segment:
    """Smooth parametrisation of ``integral_p^q h / R dz`` over ``s in [0, S]``.

    If ``p`` is a branch point, ``z = p + d s^2`` with ``d = (q - p) / S^2`` and the
    vanishing factor of R is split off analytically.
    """

    def __init__(self, surface: Surface, p: complex, q: complex, coeffs: np.ndarray):
        self.surface = surface
        self.p, self.q = p, q
        self.coeffs = coeffs
        self.branch = _branch_index(surface, p)
        self.sigma = None

    def __call__(self, s: np.ndarray) -> np.ndarray:
        surf, p, q = self.surface, self.p, self.q
        d = q - p
        if self.branch is None:
            z = p + d * s
            R = np.prod(r_factors(surf, z), axis=0)
            return _polyvals(self.coeffs, z) * d / R
        j, which = self.branch
        other = surf.starts[j] if which == 1 else surf.ends[j]
        z = p + d * s * s
        rest = np.prod(np.delete(r_factors(surf, z), j, axis=0), axis=0)
        # r_j = sigma * sqrt(d) * s * core(s), with core continuous along the segment
        # and the constant sign sigma read off the generic product at s = 0.7.
        lead = np.sqrt(d) * np.sqrt(p - other)
        core = lead * np.sqrt(1 + d * s * s / (p - other))
        if self.sigma is None:
            s0 = 0.7
            z0 = p + d * s0 * s0
            ref = r_factors(surf, np.array([z0]))[j, 0]
            self.sigma = 1.0 if (ref / (lead * s0 * np.sqrt(1 + d * s0 * s0 / (p - other)))).real > 0 else -1.0
        # h / R dz = h / (sigma s core rest) * 2 d s ds
        return _polyvals(self.coeffs, z) * 2 * d / (self.sigma * core * rest)


def _gl(fun, a: float, b: float, n: int) -> np.ndarray:
    x, w = legendre_rule(n)
    s = 0.5 * (a + b) + 0.5 * (b - a) * x
    return 0.5 * (b - a) * (fun(s) * w).sum(axis=-1)


def _adaptive(fun, a: float, b: float, tol: float, depth: int = 0, n: int = 24, scale: float = 0.0) -> np.ndarray:
    """Bisect until the n and 2n point rules agree; the budget is shared by length."""
    whole = _gl(fun, a, b, n)
    finer = _gl(fun, a, b, 2 * n)
    if depth == 0:
        scale = max(1.0, float(np.max(np.abs(finer))))
    err = np.max(np.abs(finer - whole))
    if err <= tol * scale * (b - a) or err <= 1e-15 * max(float(np.max(np.abs(finer))), 1e-300):
        return finer
    if depth > 60:
        raise QuadratureNonConvergence("adaptive Gauss-Legendre exceeded the subdivision depth")
    m = 0.5 * (a + b)
    return (_adaptive(fun, a, m, tol, depth + 1, n, scale)
            + _adaptive(fun, m, b, tol, depth + 1, n, scale))


def segment_integral(surface: Surface, p: complex, q: complex, numerator, *, tol: float = 1e-13):
    """``integral_p^q numerator(z) dz / R(z)`` on the main sheet along a straight segment."""
    coeffs, single = _as_numerators(numerator)
    p, q = complex(p), complex(q)
    if p == q:
        out = np.zeros(coeffs.shape[0], dtype=complex)
        return out[0] if single else out
    if _segment_crosses_cut(surface, p, q):
        raise PathCrossesCut(f"segment {p} -> {q} crosses a branch cut")
    bp, bq = _branch_index(surface, p), _branch_index(surface, q)
    if bp is not None and bq is not None:
        m = 0.5 * (p + q)
        out = _adaptive(_Segment(surface, p, m, coeffs), 0.0, 1.0, tol) - _adaptive(
            _Segment(surface, q, m, coeffs), 0.0, 1.0, tol)
    elif bq is not None:
        out = -_adaptive(_Segment(surface, q, p, coeffs), 0.0, 1.0, tol)
    else:
        out = _adaptive(_Segment(surface, p, q, coeffs), 0.0, 1.0, tol)
    return out[0] if single else out


def path_integral(surface: Surface, path: SheetPath, numerator, *, tol: float = 1e-13):
    """Integral of ``numerator / R`` along a polyline with a sheet sign per segment."""
    coeffs, single = _as_numerators(numerator)
    total = np.zeros(coeffs.shape[0], dtype=complex)
    verts = [complex(v) for v in path.vertices]
    for k in range(len(verts) - 1):
        total = total + path.sheets[k] * segment_integral(surface, verts[k], verts[k + 1], coeffs, tol=tol)
    return total[0] if single else total


def monomials(degree: int) -> np.ndarray:
    """Rows are the coefficient vectors of z^(degree-1), ..., z^0 (padded to ``degree``)."""
    return np.eye(degree, dtype=complex)
