"""Synthetic normal far-field operators and quantitative checks of the indicator bounds.

A normal far-field operator whose scattering operator S = I + 2ik|gamma|^2 F
is unitary has eigenvalues on the circle

    lambda = (exp(i t) - 1) / (2ik|gamma|^2),   t in (0, 2 pi),

and the unitary middle factor Q = Psi diag(lambda/|lambda|) Psi^* of
F = |F|^{1/2} Q |F|^{1/2} has numerical range equal to the convex hull of the
points exp(i t/2). If those points span an arc of opening w < pi, that hull
stays at distance cos(w/2) from the origin, which gives a constructed
coercivity constant mu.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateInput, InvalidArgument
from .filter import c_alpha, fit_filter_polynomial
from .geometry import WaveContext, make_directions
from .indicators import IndicatorData, evaluate_points
from .spectral import svd

SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class SyntheticNormalOperator:
    ctx: WaveContext
    phases: np.ndarray
    eigenvectors: np.ndarray
    lam: np.ndarray
    mu: float | None
    matrix: np.ndarray
    seed: int

    @property
    def M(self):
        return self.lam.size

    def q_matrix(self):
        unit = self.lam / np.abs(self.lam)
        return (self.eigenvectors * unit) @ self.eigenvectors.conj().T


@dataclass
class CheckReport:
    name: str
    trials: int
    violations: int
    worst_margin: float
    seeds: list
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        return asdict(self)


def random_unitary(M, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def circle_eigenvalues(ctx, phases):
    phases = np.asarray(phases, dtype=np.float64)
    return (np.exp(1j * phases) - 1.0) / (2j * ctx.k * ctx.gamma_sq)


def arc_opening(angles):
    """Opening of the smallest arc of the unit circle holding all the angles."""
    a = np.sort(np.mod(np.asarray(angles, dtype=np.float64), 2 * np.pi))
    if a.size < 2:
        return 0.0
    gaps = np.diff(np.concatenate([a, a[:1] + 2 * np.pi]))
    return float(2 * np.pi - gaps.max())


def coercivity_from_phases(phases):
    """cos(w/2) for the arc of the points exp(i t/2); None when the arc reaches pi."""
    omega = arc_opening(np.asarray(phases) / 2.0)
    if omega >= np.pi:
        return None
    return math.cos(omega / 2.0)


def synth_normal_farfield(ctx, phases, unitary_seed=0):
    phases = np.asarray(phases, dtype=np.float64)
    if phases.ndim != 1 or phases.size == 0:
        raise InvalidArgument("phases must be a nonempty 1-d sequence")
    if np.any(phases <= 0) or np.any(phases >= 2 * np.pi):
        raise InvalidArgument("phases must lie in (0, 2 pi)")
    lam = circle_eigenvalues(ctx, phases)
    psi = random_unitary(phases.size, unitary_seed)
    F = (psi * lam) @ psi.conj().T
    return SyntheticNormalOperator(ctx, phases, psi, lam, coercivity_from_phases(phases), F, unitary_seed)


def arc_phases(M, lo, hi, seed):
    """M phases in [lo, hi] with both endpoints present, so the arc is exactly hi - lo."""
    rng = np.random.default_rng(seed)
    ph = rng.uniform(lo, hi, size=M)
    ph[0], ph[-1] = lo, hi
    return ph


def _require_mu(synth, mu):
    mu = synth.mu if mu is None else mu
    if mu is None:
        raise DegenerateInput("coercivity constant undefined: eigenvalue phase arc reaches pi")
    return mu


def _random_points(dimension, num, seed, box):
    return np.random.default_rng(seed).uniform(-box, box, size=(num, dimension))


def check_q_coercivity(synth, trials=10_000, seed=0, mu=None):
    mu = _require_mu(synth, mu)
    Q = synth.q_matrix()
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((synth.M, trials)) + 1j * rng.standard_normal((synth.M, trials))
    g /= np.linalg.norm(g, axis=0)
    Qg = Q @ g
    form = np.abs(np.einsum("mn,mn->n", g.conj(), Qg))
    norms = np.linalg.norm(Qg, axis=0)
    low = form < mu - SLACK
    high = norms > 1.0 + 1e-12
    return CheckReport(
        "q_coercivity", trials, int(low.sum() + high.sum()),
        float(min((form - mu + SLACK).min(), (1.0 + 1e-12 - norms).min())), [synth.seed, seed],
        {"mu": mu, "min_form": float(form.min()), "max_norm": float(norms.max())},
    )


def _margins(lhs, rhs):
    scale = np.maximum(np.abs(rhs), 1.0)
    return (rhs - lhs) / scale


def _violation_list(side, z, margins, limit=5):
    bad = np.flatnonzero(margins < -SLACK)[:limit]
    return [{"side": side, "z": z[i].tolist(), "margin": float(margins[i])} for i in bad]


def check_equivalence(synth, dirs, num_z=1000, seed=0, box=2.0, mu=None):
    """(mu/M) W_FDSM^2 <= W_DSM <= sqrt(s_1) W_FDSM at random sampling points."""
    mu = _require_mu(synth, mu)
    if dirs.M != synth.M:
        raise InvalidArgument("direction count does not match the operator size")
    decomp = svd(synth.matrix)
    data = IndicatorData(synth.ctx, dirs, matrix=synth.matrix, decomp=decomp)
    z = _random_points(synth.ctx.dimension, num_z, seed, box)
    dsm = evaluate_points("dsm", data, z)
    fdsm = evaluate_points("fdsm", data, z)
    lower = _margins(mu / dirs.M * fdsm ** 2, dsm)
    upper = _margins(dsm, math.sqrt(decomp.norm) * fdsm)
    violations = int((lower < -SLACK).sum() + (upper < -SLACK).sum())
    ratio_up = dsm / (math.sqrt(decomp.norm) * fdsm)
    ratio_low = (mu / dirs.M * fdsm ** 2) / dsm
    return CheckReport(
        "equivalence", num_z, violations, float(min(lower.min(), upper.min())), [synth.seed, seed],
        {"mu": mu, "max_upper_ratio": float(ratio_up.max()), "max_lower_ratio": float(ratio_low.max()),
         "violating": _violation_list("lower", z, lower) + _violation_list("upper", z, upper)},
    )


def check_tdsm_bound(synth, poly, dirs, num_z=1000, seed=0, box=2.0, mu=None):
    """W_TDSM <= W_DSM / (mu alpha^2) + M (2 eps C_alpha + eps^2)."""
    mu = _require_mu(synth, mu)
    decomp = svd(synth.matrix)
    data = IndicatorData(synth.ctx, dirs, matrix=synth.matrix, decomp=decomp, poly=poly)
    z = _random_points(synth.ctx.dimension, num_z, seed, box)
    dsm = evaluate_points("dsm", data, z)
    tdsm = evaluate_points("tdsm", data, z)
    ca = c_alpha(poly.alpha, poly.norm_f)
    tail = dirs.M * (2 * poly.eps * ca + poly.eps ** 2)
    rhs = dsm / (mu * poly.alpha ** 2) + tail
    margins = _margins(tdsm, rhs)
    return CheckReport(
        "tdsm_bound", num_z, int((margins < -SLACK).sum()), float(margins.min()), [synth.seed, seed],
        {"mu": mu, "alpha": poly.alpha, "eps": poly.eps, "c_alpha": ca, "tail": tail,
         "max_ratio": float((tdsm / rhs).max()), "violating": _violation_list("tdsm", z, margins)},
    )


def check_operator(synth):
    """Circle residency, normality and |lambda| = singular values."""
    ctx = synth.ctx
    circle = np.abs(np.abs(1 + 2j * ctx.k * ctx.gamma_sq * synth.lam) - 1.0)
    F = synth.matrix
    normal = np.abs(F @ F.conj().T - F.conj().T @ F).max()
    s = svd(F).s
    sv = np.abs(np.sort(np.abs(synth.lam))[::-1] - s).max()
    bad = int(circle.max() >= 1e-12) + int(normal >= 1e-10) + int(sv >= 1e-9)
    return CheckReport(
        "operator_structure", synth.M, bad, float(-max(circle.max(), normal, sv)), [synth.seed],
        {"circle_residual": float(circle.max()), "normality_residual": float(normal),
         "singular_value_residual": float(sv)},
    )


def estimate_decay_rate(radii, means):
    """Least-squares slope of log(mean) against log(radius)."""
    radii = np.asarray(radii, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if radii.size < 3:
        raise InvalidArgument("need at least three radii")
    if np.any(means <= 0) or np.any(radii <= 0):
        raise DegenerateInput("radii and mean values must be positive")
    return float(np.polyfit(np.log(radii), np.log(means), 1)[0])


def annulus_means(kind, data, radii, n_angles=256, power=1.0, center=(0.0, 0.0)):
    """Mean of indicator**power over circles |z - center| = R in the plane."""
    if n_angles < 64:
        raise InvalidArgument("need at least 64 angular samples per circle")
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    out = []
    for R in radii:
        z = np.column_stack([R * np.cos(theta), R * np.sin(theta)]) + np.asarray(center)
        out.append(float(np.mean(evaluate_points(kind, data, z) ** power)))
    return out


def run_suite(seed=0, M=64, k=10.0, num_z=1000, trials=10_000, alpha=1e-2, mu_scale=1.0):
    """Every synthetic-operator check for one seed. ``mu_scale`` > 1 is a negative control."""
    ctx = WaveContext(2, k)
    dirs = make_directions(2, M)
    synth = synth_normal_farfield(ctx, arc_phases(M, np.pi / 2, 3 * np.pi / 2, seed), unitary_seed=seed)
    mu = synth.mu * mu_scale
    s1 = svd(synth.matrix).norm
    reports = [
        check_operator(synth),
        check_q_coercivity(synth, trials, seed=seed + 1, mu=mu),
        check_equivalence(synth, dirs, num_z, seed=seed + 2, mu=mu),
    ]
    for a in (alpha, 10.0):
        rep = check_tdsm_bound(synth, fit_filter_polynomial(a, s1), dirs, num_z, seed=seed + 3, mu=mu)
        rep.name = f"tdsm_bound(alpha={a:g})"
        reports.append(rep)
    return reports


def write_report(reports, path, **meta):
    payload = {**meta, "passed": all(r.passed for r in reports), "checks": [r.to_dict() for r in reports]}
    Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return payload
