"""The amplitude ratio f, the finite-gap field psi and the explicit RHP solution Y.

The (x, t) flow on the torus and the carrier phase come from dressing the
model problem by ``exp(-i(x p(z) + 2 t q(z)) sigma_3)`` with the Abelian
integrals p, q of the normalized second-kind differentials:

    Omega(x, t) = Omega0 + (V x + 2 W t) / (2 pi)
    psi(x, t)   = c * (Y_1)_12(Omega(x, t)) * exp(2i (p_inf x + 2 q_inf t))

with c = -2 (focusing) or c = 2i (defocusing).  |psi| = |f| * sum(b) regardless
of the phase conventions.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import FitNonConvergence, SingularLInfinity, ThetaZeroDenominator
from .periods import PeriodData, abel_map_far, compute_periods
from .surface import Mode, SheetedPoint, Surface, eval_lambda, eval_lambda_boundary
from .theta import ThetaContext, log_theta

SIGMA2_I = np.array([[0, 1], [-1, 0]], dtype=complex)  # i * sigma_2


@dataclass(frozen=True, eq=False)
class AmplitudeContext:
    """Surface, periods and theta data bundled for amplitude evaluations."""

    surface: Surface
    periods: PeriodData
    theta_ctx: ThetaContext
    d: np.ndarray = field(init=False)
    band_sum: float = field(init=False)
    _log_consts: tuple = field(init=False, repr=False)

    def __post_init__(self):
        u = self.periods.u_inf
        g = self.surface.genus
        object.__setattr__(self, "d", -u)
        object.__setattr__(self, "band_sum", self.surface.band_sum)
        l2u = log_theta(self.theta_ctx, 2 * u)
        l0 = log_theta(self.theta_ctx, np.zeros(g))
        if np.exp(l2u.real - l0.real) < 1e-10:
            raise ThetaZeroDenominator("Theta(2 u_inf) vanishes")
        object.__setattr__(self, "_log_consts", (complex(l0), complex(l2u)))

    @property
    def genus(self) -> int:
        return self.surface.genus

    @property
    def mode(self) -> Mode:
        return self.surface.mode


def build_context(surface: Surface, *, tol: float = 1e-10, eps: float = 1e-12) -> AmplitudeContext:
    pd = compute_periods(surface, tol=tol)
    return AmplitudeContext(surface, pd, ThetaContext(pd.tau, eps))


@dataclass(frozen=True)
class PhasePoint:
    """A point of the real torus, stored in [0, 1)^g."""

    omega: tuple

    def __post_init__(self):
        w = np.mod(np.asarray(self.omega, dtype=float), 1.0)
        w[w >= 1.0] = 0.0
        object.__setattr__(self, "omega", tuple(float(x) for x in w))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.omega, dtype=dtype)


def _omega_array(ctx: AmplitudeContext, omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if w.shape[-1:] != (ctx.genus,):
        raise ValueError(f"Omega must have trailing dimension {ctx.genus}")
    return w


def log_f(ctx: AmplitudeContext, omega) -> np.ndarray:
    """log f(Omega) for real Omega of shape (..., g)."""
    w = _omega_array(ctx, omega)
    l0, l2u = ctx._log_consts
    u = ctx.periods.u_inf
    num = log_theta(ctx.theta_ctx, 2 * u + w)
    den = log_theta(ctx.theta_ctx, w.astype(complex))
    if np.any(np.exp(den.real - l0.real) < 1e-10):
        raise ThetaZeroDenominator("Theta(Omega) vanished on the real torus")
    return num + l0 - l2u - den


def f_value(ctx: AmplitudeContext, omega, threads: int = 1):
    """f(Omega) = Theta(2u_inf + Omega) Theta(0) / (Theta(2u_inf) Theta(Omega))."""
    w = _omega_array(ctx, omega)
    if threads > 1 and w.ndim > 1 and w.size // ctx.genus > 4096:
        flat = w.reshape(-1, ctx.genus)
        parts = np.array_split(flat, threads)
        with ThreadPoolExecutor(threads) as ex:
            vals = np.concatenate(list(ex.map(lambda p: np.exp(log_f(ctx, p)), parts)))
        return vals.reshape(w.shape[:-1])
    val = np.exp(log_f(ctx, w))
    return val[()] if np.ndim(val) == 0 else val


def flow(ctx: AmplitudeContext, x, t, omega0) -> np.ndarray:
    """Omega(x, t) = Omega0 + (V x + 2 W t) / (2 pi), broadcast over x and t."""
    x = np.asarray(x, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    pd = ctx.periods
    return np.asarray(omega0, dtype=float) + (pd.V.real * x + 2 * pd.W.real * t) / (2 * np.pi)


def carrier(ctx: AmplitudeContext, x, t) -> np.ndarray:
    pd = ctx.periods
    return np.exp(2j * (pd.p_inf.real * np.asarray(x) + 2 * pd.q_inf.real * np.asarray(t)))


def y1_formula(ctx: AmplitudeContext, fval) -> np.ndarray:
    """(Y_1)_12 from f: (i/4) f sum(e_j - s_j)."""
    s = ctx.surface
    return 0.25j * np.asarray(fval) * np.sum(s.ends - s.starts)


def psi_prefactor(mode: Mode) -> complex:
    return -2.0 if mode is Mode.FOCUSING else 2.0j


def psi_value(ctx: AmplitudeContext, x, t, omega0=None, threads: int = 1):
    """The finite-gap solution psi(x, t) for phase offset omega0 (default 0)."""
    if omega0 is None:
        omega0 = np.zeros(ctx.genus)
    w = flow(ctx, x, t, omega0)
    fv = f_value(ctx, w, threads=threads)
    val = psi_prefactor(ctx.mode) * y1_formula(ctx, fv) * carrier(ctx, x, t)
    return val[()] if np.ndim(val) == 0 else val


# --- the RHP solution -----------------------------------------------------------


def _L_matrix(ctx: AmplitudeContext, lam, u, omega) -> np.ndarray:
    """L(z) from lambda(z) and u(z) on the main sheet."""
    tc, d = ctx.theta_ctx, ctx.d
    w = np.asarray(omega, dtype=float)

    def ratio(a, b):
        return np.exp(log_theta(tc, a) - log_theta(tc, b))

    m1p = ratio(u - w + d, u + d)
    m2p = ratio(-u - w + d, -u + d)
    m1m = ratio(u - w - d, u - d)
    m2m = ratio(-u - w - d, -u - d)
    lp, lm = lam + 1 / lam, lam - 1 / lam
    return 0.5 * np.array([[lp * m1p, -1j * lm * m2p], [1j * lm * m1m, lp * m2m]])


def L_infinity(ctx: AmplitudeContext, omega) -> np.ndarray:
    r = np.exp(log_theta(ctx.theta_ctx, -np.asarray(omega, dtype=complex)) - ctx._log_consts[0])
    if abs(r) < 1e-10:
        raise SingularLInfinity("Theta(Omega) = 0 makes L(inf) singular")
    return r * np.eye(2, dtype=complex)


def _abel_main(ctx: AmplitudeContext, z: complex) -> np.ndarray:
    bp = np.abs(ctx.surface.branch_points).max()
    if abs(z) > 4 * bp + 4 * max(abs(ctx.periods.ring.yt), 1.0):
        return abel_map_far(ctx.periods, z)
    return ctx.periods.abel(SheetedPoint(z))


def Y_matrix(ctx: AmplitudeContext, z: complex, omega) -> np.ndarray:
    """Y(z; Omega) = L(inf)^-1 L(z) for z off the cuts."""
    z = complex(z)
    lam = complex(eval_lambda(ctx.surface, z))
    u = _abel_main(ctx, z)
    return np.linalg.solve(L_infinity(ctx, omega), _L_matrix(ctx, lam, u, omega))


def Y_boundary(ctx: AmplitudeContext, j: int, t: float, side: str, omega) -> np.ndarray:
    lam = complex(eval_lambda_boundary(ctx.surface, j, t, side))
    u = ctx.periods.abel_boundary(j, t, side)
    return np.linalg.solve(L_infinity(ctx, omega), _L_matrix(ctx, lam, u, omega))


def jump_matrix(omega_j: float) -> np.ndarray:
    e = np.exp(-2j * np.pi * omega_j)
    return SIGMA2_I @ np.diag([e, 1 / e])


def jump_residual(ctx: AmplitudeContext, omega, samples_per_cut: int = 32) -> float:
    """max over sampled cut points of |Y_+ - Y_- J_j| (entrywise max)."""
    w = np.asarray(omega, dtype=float)
    full = np.concatenate([[0.0], w])
    k = np.arange(1, samples_per_cut + 1)
    ts = np.cos((2 * k - 1) * np.pi / (2 * samples_per_cut))
    worst = 0.0
    for j in range(ctx.genus + 1):
        J = jump_matrix(full[j])
        for t in ts:
            yp = Y_boundary(ctx, j, t, "+", w)
            ym = Y_boundary(ctx, j, t, "-", w)
            worst = max(worst, float(np.max(np.abs(yp - ym @ J))))
    return worst


def Y1_coefficient(ctx: AmplitudeContext, omega, radius: float = 1e3, n: int = 16) -> np.ndarray:
    """Y_1 as the 1/z coefficient of Y, from the mean of z (Y - I) over a circle.

    The circle mean removes every other Laurent term up to order n, so a second
    radius serves as the convergence check.
    """

    def fit(r):
        zs = r * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
        return sum(z * (Y_matrix(ctx, z, omega) - np.eye(2)) for z in zs) / n

    a, b = fit(radius), fit(2 * radius)
    if np.max(np.abs(a - b)) > 1e-6 * max(1.0, np.abs(a).max()):
        raise FitNonConvergence("Y_1 estimates at two radii disagree")
    return b


# --- grids ----------------------------------------------------------------------


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)

    def describe(self) -> str:
        return f"{self.name}={_fmt(self.start)}:{_fmt(self.stop)}:{self.count}"


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class FieldGrid:
    """Samples on a tensor grid; ``values.shape`` equals the axis counts."""

    axes: list
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = tuple(a.count for a in self.axes)
        if self.values.shape != counts:
            raise ValueError(f"sample shape {self.values.shape} does not match axes {counts}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# axes: " + ",".join(a.describe() for a in self.axes) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{k + 1}" for k in range(len(self.axes))] + ["re", "im", "abs"])
        grids = np.meshgrid(*[a.values() for a in self.axes], indexing="ij")
        vals = np.asarray(self.values, dtype=complex)
        for idx in np.ndindex(*vals.shape):
            v = vals[idx]
            w.writerow([_fmt(gr[idx]) for gr in grids] + [_fmt(v.real), _fmt(v.imag), _fmt(abs(v))])
        return buf.getvalue()

    def to_json(self) -> str:
        vals = np.asarray(self.values, dtype=complex)
        return json.dumps({
            "axes": [{"name": a.name, "start": a.start, "stop": a.stop, "count": a.count} for a in self.axes],
            "re": vals.real.tolist(),
            "im": vals.imag.tolist(),
            "abs": np.abs(vals).tolist(),
            "metadata": self.metadata,
        }, sort_keys=True)

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)


def f_grid(ctx: AmplitudeContext, n: int, plane: tuple = (0, 1), base=None, threads: int = 1) -> FieldGrid:
    """f on an n x n grid of a coordinate plane of the torus (the whole torus for g = 2)."""
    g = ctx.genus
    base = np.zeros(g) if base is None else np.asarray(base, dtype=float)
    step = 1.0 / n
    if g == 1:
        ax = [Axis("Omega1", 0.0, 1 - step, n)]
        pts = ax[0].values()[:, None] + 0 * base
    else:
        i, k = plane
        ax = [Axis(f"Omega{i + 1}", 0.0, 1 - step, n), Axis(f"Omega{k + 1}", 0.0, 1 - step, n)]
        a, b = np.meshgrid(ax[0].values(), ax[1].values(), indexing="ij")
        pts = np.broadcast_to(base, a.shape + (g,)).copy()
        pts[..., i] = a
        pts[..., k] = b
    vals = f_value(ctx, pts, threads=threads)
    meta = {"surface": ctx.surface.fingerprint(), "base": base.tolist()}
    return FieldGrid(ax, np.asarray(vals), meta)


def psi_grid(ctx: AmplitudeContext, x_axis: Axis, t_axis: Axis, omega0=None, threads: int = 1) -> FieldGrid:
    omega0 = np.zeros(ctx.genus) if omega0 is None else np.asarray(omega0, dtype=float)
    X, T = np.meshgrid(x_axis.values(), t_axis.values(), indexing="ij")
    vals = psi_value(ctx, X, T, omega0, threads=threads)
    meta = {"surface": ctx.surface.fingerprint(), "omega0": omega0.tolist()}
    return FieldGrid([x_axis, t_axis], np.asarray(vals), meta)
