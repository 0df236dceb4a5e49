"""Scatterer geometry, measurement directions and Born far-field synthesis."""

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InvalidArgument
from .special import bessel_eval

SHAPES_2D = ("disk", "pear", "star", "peanut2d")
SHAPES_3D = ("ball",)

DEFAULT_QUAD_LEVEL = 48


@dataclass(frozen=True)
class WaveContext:
    dimension: int
    k: float

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise InvalidArgument(f"dimension must be 2 or 3, got {self.dimension}")
        if not self.k > 0:
            raise InvalidArgument(f"wavenumber must be positive, got {self.k}")

    @property
    def gamma_sq(self):
        """|gamma|^2 of the far-field expansion constant."""
        if self.dimension == 2:
            return 1.0 / (8.0 * math.pi * self.k)
        return 1.0 / (16.0 * math.pi ** 2)


@dataclass(frozen=True, eq=False)
class DirectionSet:
    dimension: int
    directions: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=np.float64)
        if d.ndim != 2 or d.shape[1] != self.dimension:
            raise InvalidArgument(f"directions must have shape (M, {self.dimension})")
        if d.shape[0] < 2:
            raise InvalidArgument("need at least two directions")
        if np.max(np.abs(np.linalg.norm(d, axis=1) - 1.0)) > 1e-12:
            raise InvalidArgument("directions must be unit vectors")
        d.setflags(write=False)
        object.__setattr__(self, "directions", d)

    @property
    def M(self):
        return self.directions.shape[0]


def make_directions(dimension, M):
    """Uniform angles on the circle, or a Fibonacci lattice on the sphere."""
    if M < 2:
        raise InvalidArgument(f"M must be at least 2, got {M}")
    if dimension == 2:
        theta = 2.0 * np.pi * np.arange(M) / M
        return DirectionSet(2, np.column_stack([np.cos(theta), np.sin(theta)]))
    if dimension == 3:
        i = np.arange(M) + 0.5
        cos_polar = 1.0 - 2.0 * i / M
        sin_polar = np.sqrt(1.0 - cos_polar ** 2)
        azimuth = np.pi * (1.0 + math.sqrt(5.0)) * i
        pts = np.column_stack([sin_polar * np.cos(azimuth), sin_polar * np.sin(azimuth), cos_polar])
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        return DirectionSet(3, pts)
    raise InvalidArgument(f"dimension must be 2 or 3, got {dimension}")


def boundary_radius(shape, theta, R=None):
    """Polar radius r(theta) of a star-shaped 2D boundary."""
    theta = np.asarray(theta, dtype=np.float64)
    if shape == "pear":
        r = 0.2 * (2.0 + 0.3 * np.cos(3.0 * theta))
    elif shape == "star":
        r = 0.2 * (2.0 + 0.3 * np.cos(5.0 * theta))
    elif shape == "peanut2d":
        r = 0.4 * np.sqrt(0.5 * np.sin(theta) ** 2 + 0.1 * np.cos(theta) ** 2)
    elif shape == "disk":
        if R is None or R <= 0:
            raise InvalidArgument("disk needs a positive radius R")
        r = np.full_like(theta, float(R))
    else:
        raise InvalidArgument(f"{shape!r} is not a 2D radial shape")
    return float(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class Scatterer:
    shape: str
    n: float
    R: float | None = None
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.shape not in SHAPES_2D + SHAPES_3D:
            raise InvalidArgument(f"unknown shape {self.shape!r}")
        if self.shape in ("disk", "ball") and (self.R is None or self.R <= 0):
            raise InvalidArgument(f"{self.shape} needs a positive radius R")
        if isinstance(self.n, complex) or not np.isreal(self.n):
            raise InvalidArgument("refractive index must be real")
        center = tuple(float(c) for c in self.center)
        if self.shape == "ball" and len(center) == 2:
            center = center + (0.0,)
        if len(center) != self.dimension:
            raise InvalidArgument(f"center must have {self.dimension} coordinates")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "n", float(self.n))

    @property
    def dimension(self):
        return 3 if self.shape in SHAPES_3D else 2

    def radius(self, theta):
        return boundary_radius(self.shape, theta, self.R)

    def boundary_points(self, n_samples=720):
        if self.dimension != 2:
            raise InvalidArgument("boundary sampling is only defined for 2D shapes")
        theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
        r = self.radius(theta)
        return np.column_stack([r * np.cos(theta), r * np.sin(theta)]) + np.asarray(self.center)

    def contains(self, points):
        """Boolean mask: strictly inside the scatterer. 3D points test the ball."""
        p = np.atleast_2d(np.asarray(points, dtype=np.float64)) - np.asarray(self.center)
        dist = np.linalg.norm(p, axis=1)
        if self.shape == "ball":
            return dist < self.R
        return dist < self.radius(np.arctan2(p[:, 1], p[:, 0]))


@dataclass(frozen=True, eq=False)
class FarFieldMatrix:
    context: WaveContext
    dirs: DirectionSet
    entries: np.ndarray
    provenance: dict = field(default_factory=lambda: {"kind": "clean", "delta": 0.0, "seed": None})

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.complex128)
        if e.shape != (self.dirs.M, self.dirs.M):
            raise InvalidArgument(f"entries shape {e.shape} does not match M={self.dirs.M}")
        if self.dirs.dimension != self.context.dimension:
            raise InvalidArgument("direction set and wave context disagree on dimension")
        object.__setattr__(self, "entries", e)

    @property
    def M(self):
        return self.dirs.M

    @property
    def is_noisy(self):
        return self.provenance.get("kind") == "noisy"

    def with_entries(self, entries, provenance):
        return replace(self, entries=entries, provenance=provenance)

    def to_dict(self):
        prov = dict(self.provenance)
        return {
            "dimension": self.context.dimension,
            "k": self.context.k,
            "M": self.M,
            "directions": self.dirs.directions.tolist(),
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
            "provenance": {"kind": prov.get("kind", "clean"), "delta": prov.get("delta", 0.0),
                           "seed": prov.get("seed")},
        }

    @classmethod
    def from_dict(cls, data):
        ctx = WaveContext(int(data["dimension"]), float(data["k"]))
        dirs = DirectionSet(ctx.dimension, np.asarray(data["directions"], dtype=np.float64))
        entries = np.asarray(data["re"], dtype=np.float64) + 1j * np.asarray(data["im"], dtype=np.float64)
        if int(data["M"]) != dirs.M:
            raise InvalidArgument(f"M={data['M']} but {dirs.M} directions given")
        return cls(ctx, dirs, entries, dict(data.get("provenance", {"kind": "clean"})))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _polar_nodes(scatterer, quad_level):
    """Gauss-Legendre nodes/weights in (r, theta) over a 2D radial domain."""
    xr, wr = np.polynomial.legendre.leggauss(quad_level)
    xt, wt = np.polynomial.legendre.leggauss(2 * quad_level)
    theta = np.pi * (xt + 1.0)
    wt = np.pi * wt
    rmax = scatterer.radius(theta)
    rho = 0.5 * (xr[:, None] + 1.0) * rmax[None, :]
    # radial map Jacobian rmax/2, polar Jacobian rho
    w = 0.5 * wr[:, None] * rmax[None, :] * wt[None, :] * rho
    pts = np.column_stack([(rho * np.cos(theta)).ravel(), (rho * np.sin(theta)).ravel()])
    return pts, w.ravel()


def _ball_nodes(R, quad_level):
    xr, wr = np.polynomial.legendre.leggauss(quad_level)
    xc, wc = np.polynomial.legendre.leggauss(quad_level)
    n_az = 2 * quad_level
    az = 2.0 * np.pi * np.arange(n_az) / n_az
    rho = 0.5 * R * (xr + 1.0)
    wrho = 0.5 * R * wr * rho ** 2
    sin_p = np.sqrt(1.0 - xc ** 2)
    r_, c_, a_ = np.meshgrid(rho, np.arange(quad_level), az, indexing="ij")
    pts = np.column_stack([
        (r_ * sin_p[c_] * np.cos(a_)).ravel(),
        (r_ * sin_p[c_] * np.sin(a_)).ravel(),
        (r_ * xc[c_]).ravel(),
    ])
    w = (wrho[:, None, None] * wc[None, :, None] * np.full(n_az, 2.0 * np.pi / n_az)[None, None, :]).ravel()
    return pts, w


def quadrature_nodes(scatterer, quad_level=DEFAULT_QUAD_LEVEL):
    if quad_level < 2:
        raise InvalidArgument("quad_level must be at least 2")
    if scatterer.dimension == 2:
        pts, w = _polar_nodes(scatterer, quad_level)
    else:
        pts, w = _ball_nodes(scatterer.R, quad_level)
    return pts + np.asarray(scatterer.center), w


def born_farfield(scatterer, ctx, dirs, quad_level=DEFAULT_QUAD_LEVEL, workers=None):
    """Born far-field matrix k^2 (n-1) int_D exp(i k w.(y - x)) dw by polar Gauss-Legendre."""
    if scatterer.dimension != ctx.dimension or dirs.dimension != ctx.dimension:
        raise InvalidArgument(
            f"{scatterer.shape} is {scatterer.dimension}D but context is {ctx.dimension}D")
    contrast = scatterer.n - 1.0
    if contrast == 0.0:
        return FarFieldMatrix(ctx, dirs, np.zeros((dirs.M, dirs.M), dtype=np.complex128))
    pts, w = quadrature_nodes(scatterer, quad_level)
    d = dirs.directions
    entries = ctx.k ** 2 * contrast * kernels.born_sum(d, d, pts, w, ctx.k, workers=workers)
    return FarFieldMatrix(ctx, dirs, entries)


def analytic_farfield(R, n, ctx, dirs):
    """Closed-form Born far field of a centered disk (2D) or ball (3D)."""
    if R <= 0:
        raise InvalidArgument(f"radius must be positive, got {R}")
    d = dirs.directions
    q = np.linalg.norm(d[None, :, :] - d[:, None, :], axis=2)  # q[i, j] = |y_j - x_i|
    k = ctx.k
    scale = k ** 2 * (n - 1.0)
    out = np.empty_like(q)
    small = q < 1e-14
    qs = q[~small]
    if ctx.dimension == 2:
        out[small] = math.pi * R ** 2
        out[~small] = 2.0 * math.pi * R / (k * qs) * bessel_eval("J1", k * qs * R)
    else:
        rho = k * qs * R
        out[small] = 4.0 / 3.0 * math.pi * R ** 3
        out[~small] = 4.0 * math.pi * (np.sin(rho) - rho * np.cos(rho)) / (k * qs) ** 3
    return FarFieldMatrix(ctx, dirs, (scale * out).astype(np.complex128))


def herglotz_phi(z, x, ctx, M_quad=256):
    """Numerical Herglotz integral of phi_z over the unit circle or sphere, evaluated at x.

    2D uses the periodic trapezoid rule; 3D uses Gauss-Legendre in the polar
    cosine times trapezoid in azimuth (M_quad/2 by M_quad nodes).
    """
    if M_quad < 8:
        raise InvalidArgument("M_quad must be at least 8")
    diff = np.asarray(z, dtype=np.float64) - np.asarray(x, dtype=np.float64)
    k = ctx.k
    if ctx.dimension == 2:
        theta = 2.0 * np.pi * np.arange(M_quad) / M_quad
        y = np.column_stack([np.cos(theta), np.sin(theta)])
        return complex(np.exp(-1j * k * (y @ diff)).sum() * (2.0 * np.pi / M_quad))
    nc = max(M_quad // 2, 4)
    xc, wc = np.polynomial.legendre.leggauss(nc)
    az = 2.0 * np.pi * np.arange(M_quad) / M_quad
    sin_p = np.sqrt(1.0 - xc ** 2)
    y = np.stack([
        sin_p[:, None] * np.cos(az)[None, :],
        sin_p[:, None] * np.sin(az)[None, :],
        np.broadcast_to(xc[:, None], (nc, M_quad)),
    ], axis=-1)
    vals = np.exp(-1j * k * (y @ diff))
    return complex((wc[:, None] * vals).sum() * (2.0 * np.pi / M_quad))
