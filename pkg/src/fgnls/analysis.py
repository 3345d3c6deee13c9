"""Numerical certification of the amplitude bound and its companion statements."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .amplitude import AmplitudeContext, Y1_coefficient, build_context, f_value, jump_residual, psi_value, y1_formula
from .errors import OrderingViolation
from .surface import Mode, Surface, divisor_D0, focusing_surface
from .theta import theta

GOLDEN = (math.sqrt(5) - 1) / 2


def predicted_half_period_value(b: np.ndarray, h) -> float:
    """(b_0 + sum (-1)^(2 h_j) b_j) / sum b."""
    b = np.asarray(b, dtype=float)
    signs = (-1.0) ** np.round(2 * np.asarray(h, dtype=float))
    return float((b[0] + np.dot(signs, b[1:])) / b.sum())


def predicted_minimum(b: np.ndarray) -> float | None:
    """(b_m - sum_{k != m} b_k) / sum b if one band dominates, else None."""
    b = np.asarray(b, dtype=float)
    m = int(np.argmax(b))
    rest = b.sum() - b[m]
    if b[m] < rest:
        return None
    return float((b[m] - rest) / b.sum())


def half_periods(g: int):
    for h in itertools.product((0.0, 0.5), repeat=g):
        yield np.array(h)


@dataclass
class HalfPeriodRow:
    h: tuple
    measured: complex
    predicted: float
    grad_norm: float | None

    @property
    def discrepancy(self) -> float:
        return abs(self.measured - self.predicted)


@dataclass
class ExtremaReport:
    max_value: float
    argmax: np.ndarray
    min_value: float
    argmin: np.ndarray
    grid_per_dim: int
    refine_steps: int
    half_periods: list = field(default_factory=list)
    predicted_min: float | None = None


def abs_f(ctx: AmplitudeContext, omega) -> np.ndarray:
    return np.abs(f_value(ctx, omega))


def _grad_abs_f(ctx: AmplitudeContext, omega, step: float = 1e-5) -> np.ndarray:
    """Central differences of |f| with one Richardson step."""
    omega = np.asarray(omega, dtype=float)
    g = len(omega)
    E = np.eye(g)

    def central(hh):
        pts = np.concatenate([omega + hh * E, omega - hh * E])
        v = abs_f(ctx, pts)
        return (v[:g] - v[g:]) / (2 * hh)

    return (4 * central(step / 2) - central(step)) / 3


def criticality_check(ctx: AmplitudeContext, h, step: float = 1e-5) -> float | None:
    """Norm of the gradient of |f| at h; None if f(h) = 0 (gradient undefined)."""
    if abs_f(ctx, np.asarray(h, dtype=float)) < 1e-8:
        return None
    return float(np.linalg.norm(_grad_abs_f(ctx, h, step)))


def half_period_table(ctx: AmplitudeContext, with_gradient: bool = True) -> list:
    g = ctx.genus
    if g > 12:
        raise ValueError("half-period table is limited to g <= 12")
    hs = list(half_periods(g))
    vals = f_value(ctx, np.array(hs))
    rows = []
    for h, v in zip(hs, np.atleast_1d(vals)):
        grad = criticality_check(ctx, h) if with_gradient else None
        rows.append(HalfPeriodRow(tuple(h), complex(v), predicted_half_period_value(ctx.surface.b, h), grad))
    return rows


def _golden_1d(fun, a: float, b: float, iters: int) -> tuple[float, float]:
    """Minimize fun on [a, b] by golden-section search."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def _polish(fun, x0: np.ndarray, width: float, iters: int, sweeps: int = 4) -> tuple[np.ndarray, float]:
    x = x0.copy()
    best = fun(x)
    for _ in range(sweeps):
        for i in range(len(x)):
            def line(s, i=i):
                y = x.copy()
                y[i] = s
                return fun(y)
            s, val = _golden_1d(line, x[i] - width, x[i] + width, iters)
            if val <= best:
                x[i], best = s, val
        width /= 2
    return np.mod(x, 1.0), best


def _grid(g: int, n: int) -> np.ndarray:
    axes = [np.arange(n) / n] * g
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def torus_extrema(ctx: AmplitudeContext, grid_per_dim: int = 64, refine_steps: int = 60,
                  n_starts: int = 5, threads: int = 1) -> ExtremaReport:
    """Grid scan of |f| over the torus and golden-section polish of the best cells."""
    if grid_per_dim < 8:
        raise ValueError("grid_per_dim must be at least 8")
    g = ctx.genus
    pts = _grid(g, grid_per_dim).reshape(-1, g)
    vals = np.abs(f_value(ctx, pts, threads=threads))
    width = 1.0 / grid_per_dim

    def single(x):
        return float(abs_f(ctx, x))

    order = np.argsort(vals)
    best_min = (vals[order[0]], pts[order[0]])
    for k in order[:n_starts]:
        x, v = _polish(single, pts[k], width, refine_steps)
        if v < best_min[0]:
            best_min = (v, x)
    best_max = (vals[order[-1]], pts[order[-1]])
    for k in order[::-1][:n_starts]:
        x, v = _polish(lambda y: -single(y), pts[k], width, refine_steps)
        if -v > best_max[0]:
            best_max = (-v, x)
    return ExtremaReport(float(best_max[0]), np.mod(best_max[1], 1.0), float(best_min[0]),
                         np.mod(best_min[1], 1.0), grid_per_dim, refine_steps,
                         half_period_table(ctx, with_gradient=False), predicted_minimum(ctx.surface.b))


def torus_distance(a, b) -> float:
    d = np.mod(np.asarray(a) - np.asarray(b) + 0.5, 1.0) - 0.5
    return float(np.max(np.abs(d)))


def divisor_check(ctx: AmplitudeContext) -> tuple[float, float]:
    """Max |Theta(u(z_j) + u_inf)| over D0 and max |Theta(u(hat z_j) - u_inf)| over its involution."""
    pd, tc = ctx.periods, ctx.theta_ctx
    main = invol = 0.0
    for p in divisor_D0(ctx.surface):
        u = pd.abel(p)
        uh = pd.abel(p.involution())
        main = max(main, abs(theta(tc, u + pd.u_inf)))
        invol = max(invol, abs(theta(tc, uh - pd.u_inf)))
    return main, invol


def theta_positivity(ctx: AmplitudeContext, n: int = 10_000, seed: int = 0) -> tuple[float, float]:
    """Return (min Re Theta(Omega) / Theta(0), max |Im Theta| / |Theta|) over random real Omega."""
    rng = np.random.default_rng(seed)
    w = rng.random((n, ctx.genus))
    vals = theta(ctx.theta_ctx, w.astype(complex))
    t0 = theta(ctx.theta_ctx, np.zeros(ctx.genus)).real
    return float(vals.real.min() / t0), float(np.max(np.abs(vals.imag) / np.abs(vals)))


# --- degeneration -----------------------------------------------------------------


@dataclass
class DegenerationCurve:
    xi: list
    sup_dev: list
    lambda_min: list
    diag_im: list
    predicted_slope: float = 1 / math.pi

    def slope(self) -> float:
        """Least-squares slope of lambda_min against |ln xi| over xi < 1."""
        x = np.abs(np.log(np.asarray(self.xi)))
        y = np.asarray(self.lambda_min)
        keep = x > 0
        if keep.sum() < 2:
            raise ValueError("need at least two xi values below 1")
        return float(np.polyfit(x[keep], y[keep], 1)[0])

    def strictly_decreasing(self) -> bool:
        s = np.asarray(self.sup_dev)
        return bool(np.all(np.diff(s) < 0))


def scaled_surface(surface: Surface, xi: float) -> Surface:
    if surface.mode is not Mode.FOCUSING:
        raise ValueError("degeneration sweep is defined for focusing surfaces")
    if not 0 < xi <= 1:
        raise ValueError("xi must lie in (0, 1]")
    alphas = surface.ends.copy()
    alphas[1:] = alphas[1:].real + 1j * xi * alphas[1:].imag
    return focusing_surface(alphas)


def degeneration_sweep(surface: Surface, xi_list, n_samples: int = 256, seed: int = 0) -> DegenerationCurve:
    xi_list = [float(x) for x in xi_list]
    if np.any(np.diff(xi_list) >= 0):
        raise ValueError("xi values must be strictly decreasing")
    rng = np.random.default_rng(seed)
    sample = rng.random((n_samples, surface.genus))
    curve = DegenerationCurve([], [], [], [])
    for xi in xi_list:
        ctx = build_context(scaled_surface(surface, xi))
        dev = np.abs(f_value(ctx, sample) - 1).max()
        Y = ctx.periods.tau.imag
        curve.xi.append(xi)
        curve.sup_dev.append(float(dev))
        curve.lambda_min.append(float(np.linalg.eigvalsh(Y)[0]))
        curve.diag_im.append(np.diag(Y).tolist())
    return curve


# --- bounds and identities --------------------------------------------------------


@dataclass
class BoundReport:
    upper: float
    lower: float | None
    observed_max: float
    observed_min: float
    at_origin: float

    def ok(self, tol: float = 1e-6) -> bool:
        good = self.observed_max <= self.upper + tol
        if self.lower is not None:
            good = good and self.observed_min >= self.lower - tol
        return bool(good)


def amplitude_bound_check(ctx: AmplitudeContext, x, t, omega0_samples) -> BoundReport:
    """Sample |psi| on the (x, t) grid for each Omega0 and compare with the bounds."""
    X, T = np.meshgrid(np.asarray(x, dtype=float), np.asarray(t, dtype=float), indexing="ij")
    hi, lo = -np.inf, np.inf
    for w0 in omega0_samples:
        a = np.abs(psi_value(ctx, X, T, w0))
        hi, lo = max(hi, a.max()), min(lo, a.min())
    pm = predicted_minimum(ctx.surface.b)
    origin = float(abs(psi_value(ctx, 0.0, 0.0, np.zeros(ctx.genus))))
    return BoundReport(ctx.band_sum, None if pm is None else pm * ctx.band_sum, float(hi), float(lo), origin)


def dnls_bound_check(ctx: AmplitudeContext, x, t, omega0_samples) -> BoundReport:
    if ctx.mode is not Mode.DEFOCUSING:
        raise ValueError("dnls_bound_check needs a defocusing surface")
    return amplitude_bound_check(ctx, x, t, omega0_samples)


def kdv_bound_identity(bands) -> tuple[float, list]:
    """Both sides of (beta_g - beta_0) - sum(alpha_j - beta_j) = sum(beta_{j+1} - alpha_j).

    The last band may be unbounded (alpha_g = inf); it takes no part in the sums.
    """
    pairs = [(float(b), float(a)) for b, a in bands]
    flat = [v for p in pairs for v in p]
    if any(np.isinf(v) for v in flat[:-1]):
        raise OrderingViolation("only the last band may be unbounded")
    # bands are nondegenerate; neighbouring bands may touch (a gap of length zero)
    if any(not a > b for b, a in pairs) or any(pairs[j + 1][0] < pairs[j][1] for j in range(len(pairs) - 1)):
        raise OrderingViolation("bands must satisfy beta_0 < alpha_0 <= beta_1 < ...")
    beta = [p[0] for p in pairs]
    alpha = [p[1] for p in pairs]
    g = len(pairs) - 1
    left = (beta[g] - beta[0]) - sum(alpha[j] - beta[j] for j in range(g))
    gaps = [beta[j + 1] - alpha[j] for j in range(g)]
    if not math.isclose(left, sum(gaps), rel_tol=1e-12, abs_tol=1e-12):
        raise AssertionError("KdV bound identity failed")
    return left, gaps


def nls_residual(ctx: AmplitudeContext, x_range, t_range, n: int, omega0=None, nonlinearity: int | None = None) -> float:
    """Max interior centered-difference residual of i psi_t + psi_xx +- 2|psi|^2 psi."""
    if n < 32:
        raise ValueError("n must be at least 32")
    if nonlinearity is None:
        nonlinearity = 1 if ctx.mode is Mode.FOCUSING else -1
    x = np.linspace(*x_range, n)
    t = np.linspace(*t_range, n)
    hx, ht = x[1] - x[0], t[1] - t[0]
    X, T = np.meshgrid(x, t, indexing="ij")
    p = psi_value(ctx, X, T, omega0)
    c = p[1:-1, 1:-1]
    pt = (p[1:-1, 2:] - p[1:-1, :-2]) / (2 * ht)
    pxx = (p[2:, 1:-1] - 2 * c + p[:-2, 1:-1]) / hx ** 2
    return float(np.abs(1j * pt + pxx + nonlinearity * 2 * np.abs(c) ** 2 * c).max())


def relabel(surface: Surface, perm) -> Surface:
    """Surface with its cuts renumbered by ``perm``."""
    if surface.mode is Mode.FOCUSING:
        return focusing_surface(surface.ends[list(perm)])
    raise ValueError("defocusing bands are ordered; relabeling is not defined")


def relabel_invariance(surface: Surface, perm, grid_per_dim: int = 48) -> tuple[tuple, tuple]:
    """(max, min) of |f| before and after relabeling the cuts."""
    a = torus_extrema(build_context(surface), grid_per_dim)
    b = torus_extrema(build_context(relabel(surface, perm)), grid_per_dim)
    return (a.max_value, a.min_value), (b.max_value, b.min_value)


# --- certification suite ----------------------------------------------------------


def period_invariants(pd, tol_sym: float = 1e-8, tol_re: float = 1e-7) -> dict:
    """Flags for the structural properties of the period data."""
    tau = pd.tau
    g = tau.shape[0]
    focusing = pd.surface.mode is Mode.FOCUSING
    target = 0.5 * (np.eye(g) + np.ones((g, g))) if focusing else np.zeros((g, g))
    dev = np.mod(tau.real - target + 0.5, 1.0) - 0.5
    two_re = np.mod(2 * pd.u_inf.real + 0.5, 1.0) - 0.5
    half_dev = np.abs(np.mod(2 * two_re + 0.5, 1.0) - 0.5) / 2
    flags = {
        "tau_symmetric": bool(np.abs(tau - tau.T).max() < tol_sym),
        "im_tau_positive_definite": bool(np.linalg.eigvalsh(0.5 * (tau.imag + tau.imag.T))[0] > 0),
        "re_tau_pattern": bool(np.abs(dev).max() < tol_re),
        "re_u_inf_half_period": bool(half_dev.max() < tol_re),
        "flow_vectors_real": bool(max(np.abs(pd.V.imag).max(), np.abs(pd.W.imag).max()) < tol_re),
    }
    if focusing:
        flags["a_matrix_imaginary"] = bool(np.abs(pd.A_matrix.real).max() < 1e-9)
    return flags


def _grid_size(g: int) -> int | None:
    return {1: 256, 2: 64, 3: 16, 4: 8}.get(g)


def certify(ctx: AmplitudeContext, seed: int = 0, samples: int = 1000, threads: int = 1) -> dict:
    """Run every check on one surface; returns {name: {"pass": bool, ...}}."""
    out: dict = {}
    g = ctx.genus
    b = ctx.surface.b

    def record(name, ok, **info):
        out[name] = {"pass": bool(ok), **info}

    for k, v in period_invariants(ctx.periods).items():
        record(k, v)

    rows = half_period_table(ctx, with_gradient=True) if g <= 8 else []
    if rows:
        worst = max(r.discrepancy for r in rows)
        record("half_period_identity", worst < 1e-7, max_discrepancy=worst)
        grads = [r.grad_norm for r in rows if r.grad_norm is not None]
        record("half_periods_critical", max(grads) < 1e-5, max_gradient=max(grads))

    pos, imag = theta_positivity(ctx, samples, seed)
    record("theta_positive", pos > 0 and imag < 1e-9, min_ratio=pos, max_imag_ratio=imag)

    main, invol = divisor_check(ctx)
    record("divisor_residual", max(main, invol) < 1e-5, main=main, involuted=invol)

    rng = np.random.default_rng(seed)
    w = rng.random(g)
    jr = jump_residual(ctx, w, 8)
    record("jump_residual", jr < 1e-6, residual=jr)

    y1 = Y1_coefficient(ctx, w)[0, 1]
    direct = complex(y1_formula(ctx, f_value(ctx, w)))
    record("y1_matches_formula", abs(y1 - direct) < 1e-5, fit=[y1.real, y1.imag], formula=[direct.real, direct.imag])

    origin = float(abs(psi_value(ctx, 0.0, 0.0, np.zeros(g))))
    record("psi_origin_equals_band_sum", abs(origin - ctx.band_sum) < 1e-5, value=origin, band_sum=ctx.band_sum)

    n = _grid_size(g)
    if n is not None:
        rep = torus_extrema(ctx, n, threads=threads)
        info = {"max": rep.max_value, "argmax": rep.argmax.tolist(), "min": rep.min_value, "argmin": rep.argmin.tolist()}
        record("max_abs_f_is_one_at_origin", abs(rep.max_value - 1) < 1e-6 and torus_distance(rep.argmax, 0) < 1e-3, **info)
        pm = predicted_minimum(b)
        if pm is not None:
            record("min_abs_f_matches_prediction", abs(rep.min_value - pm) < 1e-5, predicted=pm, measured=rep.min_value)

    r1 = nls_residual(ctx, (0.0, 0.5), (0.0, 0.5), 32, w)
    r2 = nls_residual(ctx, (0.0, 0.5), (0.0, 0.5), 64, w)
    record("nls_residual_second_order", 3.5 <= r1 / r2 <= 4.5, coarse=r1, fine=r2, ratio=r1 / r2)

    xs = np.linspace(-2.0, 2.0, 32)
    rep = amplitude_bound_check(ctx, xs, xs, [np.zeros(g), rng.random(g)])
    name = "dnls_bounds" if ctx.mode is Mode.DEFOCUSING else "amplitude_bound"
    record(name, rep.ok(), upper=rep.upper, lower=rep.lower, observed_max=rep.observed_max,
           observed_min=rep.observed_min)
    return out

