"""Hyperelliptic surface data: branch cuts, R(z), lambda(z) and the divisor D0.

Every cut is a straight segment from a start point ``s_j`` to an end point
``e_j``.  In focusing mode ``s_j = conj(alpha_j)`` and ``e_j = alpha_j``
(vertical, oriented upward); in defocusing mode ``s_j = beta_j`` and
``e_j = alpha_j`` on the real line (oriented left to right).  The ``+`` side
of a cut is the side on its left.

R(z) is evaluated as a product of per-cut factors ``sqrt((z - s_j)(z - e_j))``
whose principal-branch form has its discontinuity exactly on the segment, so
no path tracking is needed.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    DuplicateBranchPoint,
    NonPositiveBandHeight,
    OnBranchCut,
    OrderingViolation,
    OverlappingCuts,
    RootFindingFailure,
    SurfaceError,
)

CUT_TOL = 1e-12


class Mode(str, Enum):
    FOCUSING = "focusing"
    DEFOCUSING = "defocusing"


@dataclass(frozen=True)
class SurfaceSpec:
    """Raw branch-point data as supplied by a user.

    ``endpoints`` holds the upper branch points ``alpha_j`` in focusing mode and
    ``(beta_j, alpha_j)`` pairs in defocusing mode.
    """

    mode: Mode
    endpoints: tuple

    @classmethod
    def focusing(cls, alphas: Sequence[complex]) -> "SurfaceSpec":
        return cls(Mode.FOCUSING, tuple(complex(a) for a in alphas))

    @classmethod
    def defocusing(cls, bands: Sequence[Sequence[float]]) -> "SurfaceSpec":
        return cls(Mode.DEFOCUSING, tuple((float(b), float(a)) for b, a in bands))

    @classmethod
    def from_dict(cls, data: dict) -> "SurfaceSpec":
        mode = data.get("mode", "focusing")
        if mode == "focusing":
            if "alphas" not in data:
                raise SurfaceError("focusing surface needs an 'alphas' list")
            return cls.focusing([complex(re, im) for re, im in data["alphas"]])
        if mode == "defocusing":
            if "bands" not in data:
                raise SurfaceError("defocusing surface needs a 'bands' list")
            return cls.defocusing(data["bands"])
        raise SurfaceError(f"unknown mode {mode!r}")

    @classmethod
    def from_json(cls, text: str) -> "SurfaceSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        if self.mode is Mode.FOCUSING:
            return {"mode": "focusing", "alphas": [[a.real, a.imag] for a in self.endpoints]}
        return {"mode": "defocusing", "bands": [list(p) for p in self.endpoints]}


@dataclass(frozen=True)
class SheetedPoint:
    z: complex
    sheet: str = "main"

    def __post_init__(self):
        if self.sheet not in ("main", "second"):
            raise ValueError(f"sheet must be 'main' or 'second', got {self.sheet!r}")

    @property
    def sign(self) -> int:
        return 1 if self.sheet == "main" else -1

    def involution(self) -> "SheetedPoint":
        return SheetedPoint(self.z, "second" if self.sheet == "main" else "main")


@dataclass(frozen=True)
class Divisor:
    points: tuple

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def involution(self) -> "Divisor":
        return Divisor(tuple(p.involution() for p in self.points))


@dataclass(frozen=True, eq=False)
class Surface:
    """A validated surface; arrays are read-only."""

    mode: Mode
    starts: np.ndarray
    ends: np.ndarray
    b: np.ndarray

    @property
    def genus(self) -> int:
        return len(self.starts) - 1

    @property
    def mids(self) -> np.ndarray:
        return 0.5 * (self.starts + self.ends)

    @property
    def halves(self) -> np.ndarray:
        return 0.5 * (self.ends - self.starts)

    @property
    def branch_points(self) -> np.ndarray:
        return np.concatenate([self.starts, self.ends])

    @property
    def band_sum(self) -> float:
        return float(self.b.sum())

    @property
    def scale(self) -> float:
        return float(max(1.0, np.abs(self.branch_points).max()))

    @property
    def base_point(self) -> complex:
        return complex(self.starts[0])

    def spec(self) -> SurfaceSpec:
        if self.mode is Mode.FOCUSING:
            return SurfaceSpec.focusing(self.ends)
        return SurfaceSpec.defocusing(list(zip(self.starts.real, self.ends.real)))

    def fingerprint(self) -> str:
        blob = json.dumps(self.spec().to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


def validate(spec: SurfaceSpec) -> Surface:
    """Check branch-point data and build a :class:`Surface`."""
    if spec.mode is Mode.FOCUSING:
        alphas = np.array(spec.endpoints, dtype=complex)
        if alphas.size == 0:
            raise SurfaceError("at least one cut is required")
        for i in range(len(alphas)):
            for j in range(i):
                if alphas[i] == alphas[j]:
                    raise DuplicateBranchPoint(f"alpha_{j} and alpha_{i} coincide ({alphas[i]})")
        if np.any(alphas.imag <= 0):
            raise NonPositiveBandHeight("all alpha_j must lie in the upper half plane")
        for i in range(len(alphas)):
            for j in range(i):
                # vertical Schwarz-symmetric cuts at the same abscissa always meet on the real axis
                if abs(alphas[i].real - alphas[j].real) <= CUT_TOL:
                    raise OverlappingCuts(f"cuts {j} and {i} share the abscissa {alphas[i].real}")
        return Surface(Mode.FOCUSING, _freeze(alphas.conj()), _freeze(alphas), _freeze(alphas.imag.copy()))

    pairs = np.array(spec.endpoints, dtype=float).reshape(-1, 2)
    if pairs.size == 0:
        raise SurfaceError("at least one band is required")
    flat = pairs.reshape(-1)
    if len(np.unique(flat)) != len(flat):
        raise DuplicateBranchPoint("repeated band endpoint")
    if np.any(np.diff(flat) <= 0):
        raise OrderingViolation("defocusing endpoints must satisfy beta_0 < alpha_0 < beta_1 < ... < alpha_g")
    starts = pairs[:, 0].astype(complex)
    ends = pairs[:, 1].astype(complex)
    return Surface(Mode.DEFOCUSING, _freeze(starts), _freeze(ends), _freeze(0.5 * (pairs[:, 1] - pairs[:, 0])))


def focusing_surface(alphas: Sequence[complex]) -> Surface:
    return validate(SurfaceSpec.focusing(alphas))


def defocusing_surface(bands: Sequence[Sequence[float]]) -> Surface:
    return validate(SurfaceSpec.defocusing(bands))


# --- cut geometry -----------------------------------------------------------------


def cut_coordinates(surface: Surface, z) -> np.ndarray:
    """Return ``t_j = (z - mid_j) / half_j`` for every cut (leading axis)."""
    z = np.asarray(z, dtype=complex)
    shape = (-1,) + (1,) * z.ndim
    return (z[None] - surface.mids.reshape(shape)) / surface.halves.reshape(shape)


def on_cut_mask(surface: Surface, z, tol: float = CUT_TOL) -> np.ndarray:
    """Per-cut boolean mask of points within ``tol`` of a cut interior.

    Branch points themselves are not flagged.
    """
    z = np.asarray(z, dtype=complex)
    t = cut_coordinates(surface, z)
    habs = np.abs(surface.halves).reshape((-1,) + (1,) * z.ndim)
    # branch points (|t| = 1 up to rounding) are excluded
    return (np.abs(t.real) * habs < habs - tol) & (np.abs(t.imag) * habs <= tol)


def locate_on_cut(surface: Surface, z: complex, tol: float = CUT_TOL) -> tuple[int, float]:
    """Return ``(j, t)`` with ``z = mid_j + half_j * t`` for a point on cut ``j``."""
    t = cut_coordinates(surface, complex(z))
    habs = np.abs(surface.halves)
    for j in range(len(t)):
        if abs(t[j].real) <= 1 + tol / habs[j] and abs(t[j].imag) * habs[j] <= tol:
            return j, float(np.clip(t[j].real, -1.0, 1.0))
    raise ValueError(f"{z} is not on any cut")


def _check_off_cuts(surface: Surface, z: np.ndarray) -> None:
    mask = on_cut_mask(surface, z)
    if mask.any():
        bad = z[np.any(mask, axis=0)] if z.ndim else z
        raise OnBranchCut(f"point(s) on a branch cut: {np.ravel(bad)[:3]}; use the boundary evaluators")


def r_factors(surface: Surface, z) -> np.ndarray:
    """Per-cut factors ``r_j(z) = sqrt((z - s_j)(z - e_j))``, ``r_j ~ z`` at infinity.

    Each factor is discontinuous only across its own segment.
    """
    z = np.asarray(z, dtype=complex)
    shape = (-1,) + (1,) * z.ndim
    c = surface.halves.reshape(shape)
    unit = c / np.abs(c)
    w = (z[None] - surface.mids.reshape(shape)) / unit
    # normalise -0j to +0j so both roots pick the same side on the line through the cut
    w = w.real + 1j * (w.imag + 0.0)
    ca = np.abs(c)
    return unit * np.sqrt(w - ca) * np.sqrt(w + ca)


def eval_R(surface: Surface, z, sheet: str = "main", *, check: bool = True):
    """R(z) on the requested sheet; ``R(z) / z**(g+1) -> 1`` on the main sheet."""
    z = np.asarray(z, dtype=complex)
    if check:
        _check_off_cuts(surface, z)
    val = np.prod(r_factors(surface, z), axis=0)
    if sheet == "second":
        val = -val
    return val[()] if val.ndim == 0 else val


def eval_R_boundary(surface: Surface, j: int, t, side: str = "+", sheet: str = "main"):
    """One-sided value of R at ``z = mid_j + half_j * t`` on cut ``j``.

    ``side='+'`` is the left side of the oriented cut.
    """
    t = np.asarray(t, dtype=float)
    c = surface.halves[j]
    z = surface.mids[j] + c * t
    f = r_factors(surface, z)
    own = 1j * c * np.sqrt(np.clip(1 - t * t, 0.0, None))
    if side == "-":
        own = -own
    others = np.prod(np.delete(f, j, axis=0), axis=0)
    val = own * others
    if sheet == "second":
        val = -val
    return val[()] if val.ndim == 0 else val


def lambda_factors(surface: Surface, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    shape = (-1,) + (1,) * z.ndim
    ratio = (z[None] - surface.ends.reshape(shape)) / (z[None] - surface.starts.reshape(shape))
    return np.exp(0.25 * np.log(ratio))


def eval_lambda(surface: Surface, z, *, check: bool = True):
    """lambda(z) = (prod (z - e_j) / (z - s_j))**(1/4) with lambda(inf) = 1."""
    z = np.asarray(z, dtype=complex)
    if check:
        _check_off_cuts(surface, z)
    val = np.prod(lambda_factors(surface, z), axis=0)
    return val[()] if val.ndim == 0 else val


def eval_lambda_boundary(surface: Surface, j: int, t, side: str = "+"):
    """One-sided lambda on cut ``j``; ``lambda_+ = i lambda_-`` on every cut."""
    t = np.asarray(t, dtype=float)
    z = surface.mids[j] + surface.halves[j] * t
    f = lambda_factors(surface, z)
    mag = (np.clip(1 - t, 0.0, None) / (1 + t)) ** 0.25
    own = mag * np.exp(0.25j * np.pi * (1 if side == "+" else -1))
    val = own * np.prod(np.delete(f, j, axis=0), axis=0)
    return val[()] if val.ndim == 0 else val


def lambda_squared(surface: Surface, p: SheetedPoint) -> complex:
    """lambda^2 as a meromorphic function on the surface: ``prod(z - e_j) / R(p)``."""
    z = complex(p.z)
    return complex(np.prod(z - surface.ends) / eval_R(surface, z, p.sheet))


# --- divisor D0 --------------------------------------------------------------------


def d0_polynomial(surface: Surface) -> np.ndarray:
    """Numerator of lambda^4 - 1, degree g (highest power first)."""
    num = np.poly(surface.ends) - np.poly(surface.starts)
    return num[1:]


def divisor_D0(surface: Surface) -> Divisor:
    """The g finite zeros of lambda^2 - 1, sorted decreasingly, with their sheets."""
    g = surface.genus
    if g == 0:
        return Divisor(())
    coeffs = d0_polynomial(surface)
    roots = np.roots(coeffs)
    if len(roots) != g:
        raise RootFindingFailure(f"expected {g} roots, got {len(roots)}")
    deriv = np.polyder(coeffs)
    dv = np.polyval(deriv, roots)
    roots = roots - np.where(dv != 0, np.polyval(coeffs, roots) / np.where(dv != 0, dv, 1), 0)
    if np.any(np.abs(roots.imag) > 1e-7 * surface.scale):
        raise RootFindingFailure(f"non-real roots {roots}")
    zs = np.sort(roots.real)[::-1]
    if np.any(np.diff(zs) >= 0):
        raise RootFindingFailure("repeated root of the D0 polynomial")
    points = []
    for z in zs:
        l2 = lambda_squared(surface, SheetedPoint(complex(z), "main"))
        points.append(SheetedPoint(complex(z), "main" if l2.real > 0 else "second"))
    return Divisor(tuple(points))
