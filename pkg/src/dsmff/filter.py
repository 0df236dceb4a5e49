"""Tikhonov filter sqrt(t)/(alpha + t) and its zero-rooted polynomial fit."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateInput, InvalidArgument

DEFAULT_ALPHA = 1e-2
DEFAULT_NODES = 10
DEFAULT_CUTOFF = 1e-8
EPS_SAMPLES = 10_000


def gamma_alpha(t, alpha):
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0):
        raise InvalidArgument("filter argument must be nonnegative")
    out = np.sqrt(arr) / (alpha + arr)
    return float(out) if out.ndim == 0 else out


def c_alpha(alpha, norm_f):
    """max{1/(2 sqrt(alpha)), sqrt(|F|)/(alpha + |F|)}."""
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    if norm_f < 0:
        raise InvalidArgument("norm_f must be nonnegative")
    return max(0.5 / np.sqrt(alpha), np.sqrt(norm_f) / (alpha + norm_f))


@dataclass(frozen=True)
class FilterPolynomial:
    """P(t) = sum_k c_k t^k for k = 1..degree; no constant term."""

    alpha: float
    norm_f: float
    c: tuple
    eps: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        if not self.alpha > 0:
            raise InvalidArgument("alpha must be positive")
        if self.eps < 0:
            raise InvalidArgument("eps must be nonnegative")

    @property
    def degree(self):
        return len(self.c)

    def __call__(self, t):
        return eval_polynomial(self, t)

    def to_dict(self):
        return {"alpha": self.alpha, "norm_f": self.norm_f, "c": list(self.c), "eps": self.eps}


def eval_polynomial(poly, t):
    t = np.asarray(t, dtype=np.float64)
    acc = np.zeros_like(t)
    for coef in reversed(poly.c):
        acc = (acc + coef) * t
    return float(acc) if acc.ndim == 0 else acc


def fit_nodes(norm_f, n_nodes=DEFAULT_NODES, convention="interior"):
    """Equispaced fit nodes on [0, norm_f].

    ``interior`` drops t = 0 (the zero root makes that equation trivial) and
    uses t_l = l * norm_f / n; ``linspace`` includes both endpoints.
    """
    if convention == "interior":
        return norm_f * np.arange(1, n_nodes + 1) / n_nodes
    if convention == "linspace":
        return np.linspace(0.0, norm_f, n_nodes)
    raise InvalidArgument(f"unknown node convention {convention!r}")


def truncated_lstsq(A, b, cutoff):
    """Least squares through the SVD, dropping singular values below cutoff * s_max."""
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > cutoff * s[0]
    return Vh[keep].T @ ((U[:, keep].T @ b) / s[keep])


def sup_error(poly, target, norm_f, samples=EPS_SAMPLES):
    """Max |P - target| on an equispaced scan, polished between the neighbours of the best sample."""
    t = np.linspace(0.0, norm_f, samples)
    err = np.abs(eval_polynomial(poly, t) - target(t))
    i = int(np.argmax(err))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, samples - 1)]

    def neg(x):
        return -abs(eval_polynomial(poly, x) - float(target(np.float64(x))))

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14 * max(norm_f, 1.0)})
    return float(max(err[i], -res.fun))


def fit_filter_polynomial(alpha, norm_f, degree=3, n_nodes=DEFAULT_NODES, cutoff=DEFAULT_CUTOFF,
                          nodes="interior", target=None):
    """Fit P to the Tikhonov filter at equispaced nodes of [0, norm_f].

    ``target`` replaces the filter (any callable of t) for testing; the
    reported ``eps`` is always measured against whatever was fitted.
    """
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    if not norm_f > 0:
        raise DegenerateInput("norm_f is zero: empty spectrum, every indicator would vanish")
    if target is None:
        def target(t):
            return gamma_alpha(t, alpha)
    t = fit_nodes(norm_f, n_nodes, nodes)
    A = np.column_stack([t ** p for p in range(1, degree + 1)])
    coef = truncated_lstsq(A, np.asarray(target(t), dtype=np.float64), cutoff)
    poly = FilterPolynomial(alpha, float(norm_f), tuple(coef))
    return FilterPolynomial(alpha, float(norm_f), poly.c, sup_error(poly, target, norm_f))
