"""Sampling indicators, grid evaluation, normalization and level sets."""

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ConfigurationError, DegenerateInput, InvalidArgument
from .filter import eval_polynomial

KINDS = ("dsm", "fdsm", "tdsm", "fm")
DEFAULT_FM_CUTOFF = 1e-8


@dataclass(frozen=True, eq=False)
class PhiVector:
    z: np.ndarray
    values: np.ndarray


def phi_vector(z, ctx, dirs):
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (ctx.dimension,):
        raise InvalidArgument(f"sampling point must have {ctx.dimension} coordinates")
    return PhiVector(z, np.exp(-1j * ctx.k * (dirs.directions @ z)))


def _vec(phi):
    return phi.values if isinstance(phi, PhiVector) else np.asarray(phi, dtype=np.complex128)


def _check_dims(M, phi):
    if phi.shape != (M,):
        raise InvalidArgument(f"test vector has length {phi.shape[0]}, operator has size {M}")


def w_dsm(F, phi):
    """|phi^* F phi|."""
    a = np.asarray(getattr(F, "entries", F))
    v = _vec(phi)
    _check_dims(a.shape[0], v)
    return float(abs(np.vdot(v, a @ v)))


def _projections(decomp, phi):
    v = _vec(phi)
    _check_dims(decomp.M, v)
    p = decomp.V.conj().T @ v
    return p.real ** 2 + p.imag ** 2


def w_fdsm(decomp, phi):
    """sum_j sqrt(s_j) |phi^* v_j|^2."""
    return float(np.sqrt(decomp.s) @ _projections(decomp, phi))


def tdsm_weights(decomp, poly):
    if abs(poly.norm_f - decomp.norm) > 0.1 * max(decomp.norm, poly.norm_f):
        raise ConfigurationError(
            f"filter polynomial fitted on [0, {poly.norm_f:g}] but the operator norm is {decomp.norm:g}")
    return eval_polynomial(poly, decomp.s) ** 2


def w_tdsm(decomp, poly, phi):
    """sum_j P(s_j)^2 |phi^* v_j|^2."""
    return float(tdsm_weights(decomp, poly) @ _projections(decomp, phi))


def fm_weights(decomp, cutoff=DEFAULT_FM_CUTOFF):
    if cutoff < 0:
        raise InvalidArgument("cutoff must be nonnegative")
    keep = (decomp.s > cutoff * decomp.norm) & (decomp.s > 0)
    if not keep.any():
        raise DegenerateInput("no singular value above the cutoff")
    w = np.zeros_like(decomp.s)
    w[keep] = 1.0 / decomp.s[keep]
    return w


def fm_picard(decomp, phi, cutoff=DEFAULT_FM_CUTOFF):
    """Factorization-method series sum 1/s_j |phi^* v_j|^2 over s_j > cutoff * s_1."""
    return float(fm_weights(decomp, cutoff) @ _projections(decomp, phi))


@dataclass(frozen=True)
class SamplingGrid:
    """Rectangle of sampling points; in 3D, a plane slice through ``axes``."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    nx: int
    ny: int
    axes: tuple = (0, 1)
    offset: float = 0.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise InvalidArgument("grid needs at least 2 points per axis")
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise InvalidArgument("grid bounds are degenerate")

    @classmethod
    def parse(cls, text, **kw):
        """From ``"x_lo,x_hi,y_lo,y_hi,nx,ny"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 6:
            raise InvalidArgument(f"grid spec needs 6 comma-separated values, got {text!r}")
        lo_hi = [float(p) for p in parts[:4]]
        return cls(*lo_hi, int(parts[4]), int(parts[5]), **kw)

    @property
    def xs(self):
        return np.linspace(self.x_lo, self.x_hi, self.nx)

    @property
    def ys(self):
        return np.linspace(self.y_lo, self.y_hi, self.ny)

    @property
    def spacing(self):
        return (self.x_hi - self.x_lo) / (self.nx - 1), (self.y_hi - self.y_lo) / (self.ny - 1)

    def plane_points(self):
        """(ny * nx, 2) plane coordinates, row-major with x varying fastest."""
        gx, gy = np.meshgrid(self.xs, self.ys)
        return np.column_stack([gx.ravel(), gy.ravel()])

    def points(self, dimension):
        plane = self.plane_points()
        if dimension == 2 and tuple(self.axes) == (0, 1):
            return plane
        out = np.full((plane.shape[0], dimension), float(self.offset))
        out[:, self.axes[0]] = plane[:, 0]
        out[:, self.axes[1]] = plane[:, 1]
        return out

    def bounds_str(self):
        return f"{self.x_lo:g},{self.x_hi:g},{self.y_lo:g},{self.y_hi:g}"


@dataclass(frozen=True, eq=False)
class IndicatorGrid:
    """Indicator values on a grid, shape (ny, nx)."""

    grid: SamplingGrid
    values: np.ndarray
    kind: str = ""
    state: str = "raw"
    p: float = 1.0

    def argmax_point(self):
        """Plane coordinates of the maximum (first occurrence in row-major order)."""
        b, a = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return np.array([self.grid.xs[a], self.grid.ys[b]])


@dataclass
class IndicatorData:
    """Whatever the requested indicators need; decomp and poly are shared across kinds."""

    ctx: object
    dirs: object
    matrix: np.ndarray | None = None
    decomp: object = None
    poly: object = None
    fm_cutoff: float = DEFAULT_FM_CUTOFF
    extras: dict = field(default_factory=dict)


def evaluate_points(kind, data, z, workers=None):
    """Raw indicator values at an (N, d) array of sampling points."""
    d = data.dirs.directions
    k = data.ctx.k
    if kind == "dsm":
        if data.matrix is None:
            raise ConfigurationError("dsm needs the far-field matrix")
        return kernels.quadform_abs(z, d, k, np.asarray(getattr(data.matrix, "entries", data.matrix)),
                                    workers=workers)
    if data.decomp is None:
        raise ConfigurationError(f"{kind} needs a spectral decomposition")
    if kind == "fdsm":
        weights = np.sqrt(data.decomp.s)
    elif kind == "tdsm":
        if data.poly is None:
            raise ConfigurationError("tdsm needs a fitted filter polynomial")
        weights = tdsm_weights(data.decomp, data.poly)
    elif kind == "fm":
        weights = fm_weights(data.decomp, data.fm_cutoff)
    else:
        raise InvalidArgument(f"unknown indicator {kind!r}; expected one of {', '.join(KINDS)}")
    return kernels.spectral_weighted(z, d, k, data.decomp.V, weights, workers=workers)


def evaluate_grid(kind, data, grid, workers=None):
    z = grid.points(data.ctx.dimension)
    values = evaluate_points(kind, data, z, workers=workers)
    return IndicatorGrid(grid, values.reshape(grid.ny, grid.nx), kind, "raw")


def normalize(ig):
    vmax = float(np.max(ig.values))
    if not vmax > 0:
        raise DegenerateInput("indicator grid is identically zero; cannot normalize")
    return replace(ig, values=ig.values / vmax, state="normalized", p=1.0)


def sharpen(ig, p):
    if p < 1:
        raise InvalidArgument(f"sharpening power must be >= 1, got {p}")
    if not ig.state.startswith("normalized"):
        raise InvalidArgument("sharpen applies to normalized grids")
    if p == 1:
        return ig
    p_total = ig.p * p
    return replace(ig, values=ig.values ** p, state=f"normalized-sharpened({p_total:g})", p=p_total)


@dataclass(frozen=True, eq=False)
class LevelSet:
    mask: np.ndarray
    contour: np.ndarray  # (K, 2) cell centers


def level_set(ig, tau):
    if not 0 < tau < 1:
        raise InvalidArgument(f"level must be in (0, 1), got {tau}")
    mask = ig.values >= tau
    corners = np.stack([mask[:-1, :-1], mask[:-1, 1:], mask[1:, :-1], mask[1:, 1:]])
    mixed = corners.any(axis=0) & ~corners.all(axis=0)
    b, a = np.nonzero(mixed)
    xs, ys = ig.grid.xs, ig.grid.ys
    contour = np.column_stack([0.5 * (xs[a] + xs[a + 1]), 0.5 * (ys[b] + ys[b + 1])])
    return LevelSet(mask, contour)


def hausdorff(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(max(d2.min(axis=1).max(), d2.min(axis=0).max())))


def hausdorff_to_truth(contour_points, scatterer, n_samples=720):
    pts = np.asarray(contour_points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise DegenerateInput("empty contour")
    return hausdorff(pts, scatterer.boundary_points(n_samples))


# -- file formats -------------------------------------------------------------


def write_csv(ig, path):
    g = ig.grid
    lines = [
        f"# kind={ig.kind}",
        f"# bounds={g.bounds_str()}",
        f"# nx={g.nx} ny={g.ny}",
        f"# state={ig.state}",
    ]
    lines += [",".join(repr(float(v)) for v in row) for row in ig.values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path):
    header = {}
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, val = item.partition("=")
                header[key] = val
        elif line.strip():
            rows.append([float(v) for v in line.split(",")])
    x_lo, x_hi, y_lo, y_hi = (float(v) for v in header["bounds"].split(","))
    grid = SamplingGrid(x_lo, x_hi, y_lo, y_hi, int(header["nx"]), int(header["ny"]))
    values = np.asarray(rows, dtype=np.float64)
    if values.shape != (grid.ny, grid.nx):
        raise InvalidArgument(f"{path}: expected {grid.ny}x{grid.nx} values, got {values.shape}")
    state = header.get("state", "raw")
    p = 1.0
    if state.startswith("normalized-sharpened("):
        p = float(state[len("normalized-sharpened("):-1])
    return IndicatorGrid(grid, values, header.get("kind", ""), state, p)


def write_pgm(ig, path):
    """Plain (P2) greymap, 255 at the grid maximum, top row = largest y."""
    vmax = float(np.max(ig.values))
    scaled = np.zeros_like(ig.values) if vmax <= 0 else ig.values / vmax
    pix = np.clip(np.rint(255 * scaled), 0, 255).astype(int)[::-1]
    lines = ["P2", f"{ig.grid.nx} {ig.grid.ny}", "255"]
    lines += [" ".join(str(v) for v in row) for row in pix]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
