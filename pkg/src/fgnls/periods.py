"""Normalized differentials, period matrix, Abel map and second-kind B-periods.

Cycle conventions.  ``A_j`` is the clockwise loop around cut ``j`` on the main
sheet.  ``B_j`` runs from cut ``j`` to cut ``0`` on the main sheet and back on the
second sheet, then once around ``A_j``.  With every main-sheet path drawn
through the ring described in :func:`route` this gives
``tau[:, j] = -2 u(s_j)`` modulo integers, where ``s_j`` is the start of cut
``j`` and ``u`` is the Abel map based at ``s_0``.  The resulting ``tau`` is
symmetric with positive definite imaginary part; the jump residual of the
Riemann-Hilbert solution (see :mod:`fgnls.amplitude`) pins the orientation.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularAMatrix, SingularNormalizationSystem, TailNotConverged
from .quadrature import CutLoop, loop_integral, segment_integral
from .surface import SheetedPoint, Surface, on_cut_mask, r_factors

RAY_HEIGHT = 1e4
COND_WARN = 1e10


# --- geometry of integration paths ------------------------------------------------


@dataclass(frozen=True)
class Ring:
    """Axis-aligned rectangle strictly enclosing every cut."""

    xl: float
    xr: float
    yb: float
    yt: float

    @classmethod
    def around(cls, surface: Surface) -> "Ring":
        bp = surface.branch_points
        span = max(np.ptp(bp.real), np.ptp(bp.imag), 1.0)
        m = 0.5 * span
        return cls(bp.real.min() - m, bp.real.max() + m, bp.imag.min() - m, bp.imag.max() + m)

    def contains(self, z: complex) -> bool:
        return self.xl < z.real < self.xr and self.yb < z.imag < self.yt

    def corners(self) -> list[complex]:
        # counter-clockwise from bottom-left
        return [complex(self.xl, self.yb), complex(self.xr, self.yb),
                complex(self.xr, self.yt), complex(self.xl, self.yt)]

    def perimeter_param(self, z: complex) -> float:
        w, h = self.xr - self.xl, self.yt - self.yb
        x, y = z.real, z.imag
        if abs(y - self.yb) < 1e-12 * max(1, abs(y)):
            return x - self.xl
        if abs(x - self.xr) < 1e-12 * max(1, abs(x)):
            return w + (y - self.yb)
        if abs(y - self.yt) < 1e-12 * max(1, abs(y)):
            return w + h + (self.xr - x)
        return 2 * w + h + (self.yt - y)

    def walk(self, p: complex, q: complex) -> list[complex]:
        """Counter-clockwise vertices from ring point p to ring point q (exclusive of p)."""
        total = 2 * (self.xr - self.xl + self.yt - self.yb)
        sp, sq = self.perimeter_param(p), self.perimeter_param(q)
        if sq < sp:
            sq += total
        cs = self.corners()
        params = [0.0, self.xr - self.xl, self.xr - self.xl + self.yt - self.yb,
                  2 * (self.xr - self.xl) + self.yt - self.yb]
        out = []
        for lap in (0.0, total):
            for c, s in zip(cs, params):
                if sp < s + lap < sq:
                    out.append(c)
        out.append(q)
        return out

    def project(self, z: complex) -> complex:
        return complex(min(max(z.real, self.xl), self.xr), min(max(z.imag, self.yb), self.yt))


def _vertical_clear(surface: Surface, z: complex, y_end: float) -> bool:
    from .quadrature import _segment_crosses_cut

    return not _segment_crosses_cut(surface, z, complex(z.real, y_end))


def route(surface: Surface, z: complex, ring: Ring | None = None) -> list[complex]:
    """Vertices of the canonical main-sheet path from the base point to ``z``.

    The path drops vertically from the base point to the ring, walks the ring
    counter-clockwise and leaves it towards ``z``: vertically if ``z`` is inside
    the ring, along the shortest segment otherwise.
    """
    ring = ring or Ring.around(surface)
    z = complex(z)
    base = surface.base_point
    start = complex(base.real, ring.yb)
    verts = [base, start]
    if ring.contains(z):
        if _vertical_clear(surface, z, ring.yb):
            entry = complex(z.real, ring.yb)
        elif _vertical_clear(surface, z, ring.yt):
            entry = complex(z.real, ring.yt)
        else:
            raise ValueError(f"no vertical exit from {z}; is it on a cut?")
    else:
        entry = ring.project(z)
    verts += ring.walk(start, entry)
    if entry != z:
        verts.append(z)
    return verts


def path_monomial_integrals(surface: Surface, z: complex, degree: int, ring: Ring | None = None) -> np.ndarray:
    """``integral from base to z of z^k / R dz`` for k = degree-1 .. 0 along :func:`route`."""
    verts = route(surface, z, ring)
    coeffs = np.eye(degree, dtype=complex)
    total = np.zeros(degree, dtype=complex)
    for a, b in zip(verts[:-1], verts[1:]):
        total += segment_integral(surface, a, b, coeffs)
    return total


def boundary_monomial_integrals(surface: Surface, j: int, t: float, side: str, degree: int,
                                n: int = 64) -> np.ndarray:
    """Monomial integrals from the start of cut ``j`` to ``mid + half*t`` along one side.

    With ``t = cos(theta)`` the Chebyshev weight becomes ``d theta`` and the
    integrand is smooth, so plain Gauss-Legendre in theta converges quickly.
    """
    theta_t = np.arccos(np.clip(t, -1.0, 1.0))
    x, w = np.polynomial.legendre.leggauss(n)
    # integrate theta from pi (t=-1, the cut start) down to theta_t
    th = 0.5 * (np.pi + theta_t) + 0.5 * (theta_t - np.pi) * x
    wt = 0.5 * (np.pi - theta_t) * w
    tt = np.cos(th)
    c = surface.halves[j]
    zz = surface.mids[j] + c * tt
    others = np.prod(np.delete(r_factors(surface, zz), j, axis=0), axis=0)
    powers = zz[None, :] ** np.arange(degree - 1, -1, -1)[:, None]
    # dz / R_+ = c dt / (i c sqrt(1-t^2) others) = -i dt / (sqrt(1-t^2) others); dt = -sin dth
    vals = (powers / others) * (-1j)
    res = (vals * wt).sum(axis=-1)
    return res if side == "+" else -res


# --- Laurent data at infinity -----------------------------------------------------


def inverse_R_series(surface: Surface, nterms: int) -> np.ndarray:
    """Coefficients sigma_n with ``1/R = z^-(g+1) * sum sigma_n z^-n`` on the main sheet."""
    bp = surface.branch_points
    P = np.array([np.sum(bp ** m) for m in range(1, nterms)], dtype=complex)
    sig = np.zeros(nterms, dtype=complex)
    sig[0] = 1.0
    for n in range(1, nterms):
        sig[n] = 0.5 * np.dot(P[:n], sig[n - 1::-1][:n]) / n
    return sig


def _series_terms(surface: Surface, z: complex) -> int:
    rho = np.abs(surface.branch_points).max() / abs(z)
    if rho >= 0.9:
        raise TailNotConverged(f"|z| = {abs(z)} is too close to the branch points for the tail series")
    return int(np.ceil(np.log(1e-18) / np.log(max(rho, 1e-300)))) + 4 if rho > 0 else 4


def tail_monomial_integrals(surface: Surface, z: complex, degree: int) -> np.ndarray:
    """``integral from z to infinity of z^k / R`` for k = degree-1..0 (requires k <= g-1)."""
    g = surface.genus
    n = min(_series_terms(surface, z), 400)
    sig = inverse_R_series(surface, n)
    out = np.zeros(degree, dtype=complex)
    for i, k in enumerate(range(degree - 1, -1, -1)):
        p = g + 1 + np.arange(n) - k
        terms = sig * z ** (1.0 - p) / (p - 1)
        if abs(terms[-1]) > 1e-15 * max(1.0, abs(terms.sum())):
            raise TailNotConverged("tail series did not converge")
        out[i] = terms.sum()
    return out


# --- period data -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PeriodData:
    """Everything the amplitude formulas need from the surface."""

    surface: Surface
    A_matrix: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    u_inf: np.ndarray
    riemann_K: np.ndarray
    V: np.ndarray
    W: np.ndarray
    base_point: complex
    h1: np.ndarray
    dp_coeffs: np.ndarray
    dq_coeffs: np.ndarray
    p_inf: complex
    q_inf: complex
    a_cond: float
    ring: Ring = field(repr=False)
    u_starts: np.ndarray = field(repr=False, default=None)

    @property
    def genus(self) -> int:
        return self.surface.genus

    def abel(self, p: SheetedPoint | complex) -> np.ndarray:
        return abel_map(self.surface, self.kappa, p, ring=self.ring)

    def abel_boundary(self, j: int, t: float, side: str) -> np.ndarray:
        return abel_map_boundary(self, j, t, side)

    def reduce(self, v) -> np.ndarray:
        return reduce_mod_lattice(v, self.tau)


def _require_genus(surface: Surface) -> None:
    if surface.genus < 1:
        raise ValueError("period computations need genus >= 1 (a single cut is a plane wave)")


def a_matrix(surface: Surface, tol: float = 1e-10) -> np.ndarray:
    """``A[j-1, k-1] = loop integral over A_j of z^(g-k) / R``, j, k = 1..g."""
    _require_genus(surface)
    g = surface.genus
    coeffs = np.eye(g, dtype=complex)
    return np.array([loop_integral(surface, CutLoop(j), coeffs, tol=tol) for j in range(1, g + 1)])


def normalized_differentials(surface: Surface, A: np.ndarray) -> np.ndarray:
    """kappa = A^-1; column k holds the coefficients of p_k (highest power first)."""
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularAMatrix(f"A-period matrix is singular (cond = {cond:.3g})")
    if cond > COND_WARN:
        warnings.warn(f"A-period matrix is ill conditioned (cond = {cond:.3g})", RuntimeWarning)
    return np.linalg.solve(A, np.eye(A.shape[0]))


def omega(surface: Surface, kappa: np.ndarray, z) -> np.ndarray:
    """Normalized holomorphic differentials omega_k(z)/dz on the main sheet, shape (g, ...)."""
    from .surface import eval_R

    z = np.asarray(z, dtype=complex)
    g = surface.genus
    powers = np.stack([z ** (g - m) for m in range(1, g + 1)])
    return np.tensordot(kappa.T, powers, axes=1) / eval_R(surface, z)


def abel_map(surface: Surface, kappa: np.ndarray, p: SheetedPoint | complex, ring: Ring | None = None) -> np.ndarray:
    """u(p) = integral of omega from the base point along :func:`route`."""
    if not isinstance(p, SheetedPoint):
        p = SheetedPoint(complex(p))
    if np.any(on_cut_mask(surface, np.asarray(p.z))):
        raise ValueError("point on a cut: use abel_map_boundary")
    I = path_monomial_integrals(surface, complex(p.z), surface.genus, ring)
    return p.sign * (kappa.T @ I)


def abel_map_boundary(pd: PeriodData, j: int, t: float, side: str) -> np.ndarray:
    """One-sided Abel map at ``mid_j + half_j t`` on the main sheet."""
    s = pd.surface
    return pd.u_starts[j] + pd.kappa.T @ boundary_monomial_integrals(s, j, t, side, s.genus)


def abel_map_far(pd: PeriodData, z: complex) -> np.ndarray:
    """u(z) for |z| beyond the branch points, via u_inf minus the Laurent tail."""
    return pd.u_inf - pd.kappa.T @ tail_monomial_integrals(pd.surface, complex(z), pd.genus)


def start_abel_values(surface: Surface, kappa: np.ndarray, ring: Ring | None = None) -> np.ndarray:
    """u(s_j) for j = 0..g (row j); row 0 is zero since s_0 is the base point."""
    g = surface.genus
    rows = [np.zeros(g, dtype=complex)]
    rows += [abel_map(surface, kappa, complex(surface.starts[j]), ring) for j in range(1, g + 1)]
    return np.array(rows)


def period_matrix(surface: Surface, kappa: np.ndarray, ring: Ring | None = None,
                  u_starts: np.ndarray | None = None) -> np.ndarray:
    """tau[:, j-1] = B_j-periods of omega = -2 u(s_j) up to the integer corrections below."""
    g = surface.genus
    if u_starts is None:
        u_starts = start_abel_values(surface, kappa, ring)
    tau = -2 * u_starts[1:].T
    # The cycles drawn through the ring may intersect each other; adding integer
    # multiples of A-cycles to the B-cycles restores a canonical basis.
    skew = tau.T - tau
    shift = np.round(skew.real)
    if np.max(np.abs(skew - shift)) > 1e-6 * max(1.0, np.abs(tau).max()):
        raise ValueError("period matrix is not symmetric modulo integers")
    # Adding A_j to every B_j (tau -> tau + I) moves the theta characteristic by
    # (1/2, ..., 1/2); this is the choice for which the zeros of
    # Theta(u(z) + u_inf) sit at the divisor of lambda^2 - 1.
    return tau + np.tril(shift, -1) + np.eye(g)


def u_infinity(surface: Surface, kappa: np.ndarray, ring: Ring | None = None,
               height: float = RAY_HEIGHT) -> np.ndarray:
    """Abel map of infinity on the main sheet: vertical ray above the cuts plus series tail."""
    ring = ring or Ring.around(surface)
    g = surface.genus
    x = 0.5 * (ring.xl + ring.xr)
    top = complex(x, max(height, 2 * ring.yt))
    head = path_monomial_integrals(surface, top, g, ring)
    tail = tail_monomial_integrals(surface, top, g)
    return kappa.T @ (head + tail)


def riemann_constants(surface: Surface, kappa: np.ndarray, ring: Ring | None = None) -> np.ndarray:
    """K = sum of u(s_j) over j = 1..g."""
    g = surface.genus
    return sum(abel_map(surface, kappa, complex(surface.starts[j]), ring) for j in range(1, g + 1))


def second_kind_numerators(surface: Surface, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Numerators of dp (degree g+1) and dq (degree g+2) with zero A-periods.

    Near infinity on the main sheet ``dp = (1 + O(z^-2)) dz`` and
    ``dq = (2z + O(z^-2)) dz``.
    """
    g = surface.genus
    s = inverse_R_series(surface, 3)
    p_head = np.array([1.0, -s[1]], dtype=complex)
    d1 = -2 * s[1]
    d2 = 2 * s[1] ** 2 - 2 * s[2]
    q_head = np.array([2.0, d1, d2], dtype=complex)
    coeffs = []
    for head in (p_head, q_head):
        full = np.concatenate([head, np.zeros(g, dtype=complex)])
        rhs = np.array([loop_integral(surface, CutLoop(j), full) for j in range(1, g + 1)])
        try:
            x = np.linalg.solve(A, -rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularNormalizationSystem(str(exc)) from exc
        if not np.all(np.isfinite(x)):
            raise SingularNormalizationSystem("non-finite normalization coefficients")
        coeffs.append(np.concatenate([head, x]))
    return coeffs[0], coeffs[1]


def _path_integral_poly(surface: Surface, coeffs: np.ndarray, z: complex, ring: Ring) -> complex:
    verts = route(surface, z, ring)
    return sum(segment_integral(surface, a, b, coeffs) for a, b in zip(verts[:-1], verts[1:]))


def second_kind_periods(surface: Surface, A: np.ndarray, ring: Ring | None = None):
    """Return (V, W, dp_coeffs, dq_coeffs): B-periods of the normalized dp and dq."""
    ring = ring or Ring.around(surface)
    P, Q = second_kind_numerators(surface, A)
    g = surface.genus
    V = np.array([-2 * _path_integral_poly(surface, P, complex(surface.starts[j]), ring) for j in range(1, g + 1)])
    W = np.array([-2 * _path_integral_poly(surface, Q, complex(surface.starts[j]), ring) for j in range(1, g + 1)])
    return V, W, P, Q


def abelian_constants(surface: Surface, P: np.ndarray, Q: np.ndarray, ring: Ring) -> tuple[complex, complex]:
    """Constant terms at infinity: p(z) = z + p_inf + O(1/z), q(z) = z^2 + q_inf + O(1/z).

    p and q are the Abelian integrals of dp, dq from the base point.
    """
    zr = complex(0.0, 3.0 * np.abs(surface.branch_points).max() + ring.yt)
    n = _series_terms(surface, zr)
    g = surface.genus
    sig = inverse_R_series(surface, n + 4)

    def tail_const(coeffs: np.ndarray, lead_power: int) -> complex:
        # coeffs / R = sum_k e_k z^(lead_power - k); integrate the z^-2 and lower part to infinity
        deg = len(coeffs) - 1
        e = np.convolve(coeffs, sig)[: n + 4]  # power of term k: deg - (g+1) - k
        powers = deg - (g + 1) - np.arange(len(e))
        mask = powers <= -2
        return np.sum(e[mask] * zr ** (powers[mask] + 1) / (powers[mask] + 1))

    p_val = _path_integral_poly(surface, P, zr, ring)
    q_val = _path_integral_poly(surface, Q, zr, ring)
    # p(zr) = zr + p_inf + integral_inf^zr (O(z^-2)) = zr + p_inf + tail_const
    p_inf = p_val - zr - tail_const(P, 0)
    q_inf = q_val - zr ** 2 - tail_const(Q, 1)
    return p_inf, q_inf


def half_period_vector(v: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Round ``2 Re v mod 1`` to {0, 1/2}; raise if it is not a half-period."""
    x = np.mod(2 * v.real, 1.0)
    x = np.where(x > 1 - tol, x - 1, x)
    h = np.round(2 * x) / 2
    if np.max(np.abs(h - x)) > tol:
        raise ValueError(f"2 Re u_inf = {2 * v.real} is not a half-period mod 1")
    return np.mod(h, 1.0)


def reduce_mod_lattice(v, tau: np.ndarray) -> np.ndarray:
    """Representative of v mod Z^g + tau Z^g with Im coordinates in [-1/2, 1/2) and Re in [-1/2, 1/2)."""
    v = np.asarray(v, dtype=complex)
    m = np.round(np.linalg.solve(tau.imag, v.imag))
    w = v - tau @ m
    return w - np.round(w.real)


def lattice_distance(a, b, tau: np.ndarray) -> float:
    d = reduce_mod_lattice(np.asarray(a) - np.asarray(b), tau)
    return float(np.max(np.abs(d)))


def compute_periods(surface: Surface, tol: float = 1e-10, ray_height: float = RAY_HEIGHT) -> PeriodData:
    """Run the full period pipeline for a surface of genus >= 1."""
    _require_genus(surface)
    ring = Ring.around(surface)
    A = a_matrix(surface, tol)
    kappa = normalized_differentials(surface, A)
    u_starts = start_abel_values(surface, kappa, ring)
    tau = period_matrix(surface, kappa, ring, u_starts)
    u_inf = u_infinity(surface, kappa, ring, ray_height)
    K = u_starts[1:].sum(axis=0)
    V, W, P, Q = second_kind_periods(surface, A, ring)
    p_inf, q_inf = abelian_constants(surface, P, Q, ring)
    try:
        h1 = half_period_vector(u_inf)
    except ValueError:
        h1 = np.full(surface.genus, np.nan)
    return PeriodData(surface=surface, A_matrix=A, kappa=kappa, tau=tau, u_inf=u_inf, riemann_K=K,
                      V=V, W=W, base_point=surface.base_point, h1=h1, dp_coeffs=P, dq_coeffs=Q,
                      p_inf=complex(p_inf), q_inf=complex(q_inf), a_cond=float(np.linalg.cond(A)), ring=ring,
                      u_starts=u_starts)
