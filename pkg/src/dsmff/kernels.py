"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import from the ``DSMFF_BACKEND`` environment
variable (``numba`` or ``numpy``). If unset, numba is used when it imports.
``use_backend`` switches temporarily, which the benchmark and the
cross-backend tests rely on.

Kernels:

* ``born_sum``: M x M matrix  sum_p w_p exp(i k p.(inc_j - obs_i))
* ``quadform_abs``: |phi_z^* A phi_z| at many sampling points
* ``spectral_weighted``: sum_j c_j |phi_z^* v_j|^2 at many sampling points

with phi_z = exp(-i k dirs . z).
"""

import contextlib
import os
import warnings

import numpy as np

try:
    import numba
    from numba import njit, prange

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the system TBB is often too old for numba and only produces a warning
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

_CHUNK = 2048


def _initial_backend():
    requested = os.environ.get("DSMFF_BACKEND", "").strip().lower()
    if requested in ("", "auto"):
        return "numba" if NUMBA_AVAILABLE else "numpy"
    if requested not in ("numba", "numpy"):
        raise ValueError(f"DSMFF_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not NUMBA_AVAILABLE:
        warnings.warn("DSMFF_BACKEND=numba but numba is not importable; using numpy")
        return "numpy"
    return requested


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not installed")
    _backend = name


@contextlib.contextmanager
def use_backend(name):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


@contextlib.contextmanager
def _threads(workers):
    if workers is None or _backend != "numba":
        yield
        return
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


# -- numpy implementations ---------------------------------------------------


def _born_sum_numpy(obs, inc, pts, wts, k):
    e_obs = np.exp(-1j * k * (obs @ pts.T))
    e_inc = np.exp(1j * k * (inc @ pts.T))
    return (e_obs * wts) @ e_inc.T


def _phi_block(dirs, k, z_block):
    return np.exp(-1j * k * (dirs @ z_block.T))


def _quadform_abs_numpy(z, dirs, k, mat):
    out = np.empty(z.shape[0])
    for start in range(0, z.shape[0], _CHUNK):
        phi = _phi_block(dirs, k, z[start:start + _CHUNK])
        out[start:start + _CHUNK] = np.abs(np.einsum("mn,mn->n", phi.conj(), mat @ phi))
    return out


def _spectral_weighted_numpy(z, dirs, k, vecs, weights):
    out = np.empty(z.shape[0])
    vh = vecs.conj().T
    for start in range(0, z.shape[0], _CHUNK):
        phi = _phi_block(dirs, k, z[start:start + _CHUNK])
        proj = vh @ phi
        out[start:start + _CHUNK] = weights @ (proj.real ** 2 + proj.imag ** 2)
    return out


# -- numba implementations ---------------------------------------------------

if NUMBA_AVAILABLE:
    # Complex arithmetic is split into real/imaginary arrays and the inner
    # reductions are marked fastmath so LLVM can vectorize them.

    @njit(cache=True, fastmath=True)
    def _phases(dirs, pts, k, sign, cr, ci):
        # c[j, p] = exp(sign * i k dirs_j . pts_p)
        m, dim = dirs.shape
        for j in range(m):
            for p in range(pts.shape[0]):
                arg = 0.0
                for d in range(dim):
                    arg += dirs[j, d] * pts[p, d]
                arg *= sign * k
                cr[j, p] = np.cos(arg)
                ci[j, p] = np.sin(arg)

    @njit(parallel=True, cache=True, fastmath=True)
    def _born_sum_numba(obs, inc, pts, wts, k):
        m_obs = obs.shape[0]
        m_inc = inc.shape[0]
        npts = pts.shape[0]
        ar = np.empty((m_obs, npts))
        ai = np.empty((m_obs, npts))
        br = np.empty((m_inc, npts))
        bi = np.empty((m_inc, npts))
        _phases(obs, pts, k, -1.0, ar, ai)
        _phases(inc, pts, k, 1.0, br, bi)
        out = np.empty((m_obs, m_inc), dtype=np.complex128)
        for i in prange(m_obs):
            wr = ar[i] * wts
            wi = ai[i] * wts
            for j in range(m_inc):
                re = 0.0
                im = 0.0
                for p in range(npts):
                    re += wr[p] * br[j, p] - wi[p] * bi[j, p]
                    im += wr[p] * bi[j, p] + wi[p] * br[j, p]
                out[i, j] = re + 1j * im
        return out

    @njit(cache=True, fastmath=True)
    def _phi_point(z, n, dirs, k, pr, pi):
        for j in range(dirs.shape[0]):
            arg = 0.0
            for d in range(dirs.shape[1]):
                arg += dirs[j, d] * z[n, d]
            arg *= -k
            pr[j] = np.cos(arg)
            pi[j] = np.sin(arg)

    @njit(parallel=True, cache=True, fastmath=True)
    def _quadform_abs_numba(z, dirs, k, mat):
        npts = z.shape[0]
        m = dirs.shape[0]
        mr = np.ascontiguousarray(mat.real)
        mi = np.ascontiguousarray(mat.imag)
        out = np.empty(npts)
        for n in prange(npts):
            pr = np.empty(m)
            pi = np.empty(m)
            _phi_point(z, n, dirs, k, pr, pi)
            acc_r = 0.0
            acc_i = 0.0
            for i in range(m):
                row_r = 0.0
                row_i = 0.0
                for j in range(m):
                    row_r += mr[i, j] * pr[j] - mi[i, j] * pi[j]
                    row_i += mr[i, j] * pi[j] + mi[i, j] * pr[j]
                # conj(phi_i) * row
                acc_r += pr[i] * row_r + pi[i] * row_i
                acc_i += pr[i] * row_i - pi[i] * row_r
            out[n] = np.hypot(acc_r, acc_i)
        return out

    @njit(parallel=True, cache=True, fastmath=True)
    def _spectral_weighted_numba(z, dirs, k, vecs, weights):
        npts = z.shape[0]
        m = dirs.shape[0]
        keep = np.flatnonzero(weights != 0.0)
        # rows of V^T restricted to the nonzero weights, so the inner loop is contiguous
        vr = np.ascontiguousarray(vecs.real.T[keep])
        vi = np.ascontiguousarray(vecs.imag.T[keep])
        w = weights[keep]
        out = np.empty(npts)
        for n in prange(npts):
            pr = np.empty(m)
            pi = np.empty(m)
            _phi_point(z, n, dirs, k, pr, pi)
            acc = 0.0
            for q in range(keep.size):
                # conj(phi) . v_q
                re = 0.0
                im = 0.0
                for j in range(m):
                    re += pr[j] * vr[q, j] + pi[j] * vi[q, j]
                    im += pr[j] * vi[q, j] - pi[j] * vr[q, j]
                acc += w[q] * (re * re + im * im)
            out[n] = acc
        return out


# -- dispatch ----------------------------------------------------------------


def born_sum(obs, inc, pts, wts, k, workers=None):
    obs = np.ascontiguousarray(obs, dtype=np.float64)
    inc = np.ascontiguousarray(inc, dtype=np.float64)
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    wts = np.ascontiguousarray(wts, dtype=np.float64)
    if _backend == "numba":
        with _threads(workers):
            return _born_sum_numba(obs, inc, pts, wts, float(k))
    return _born_sum_numpy(obs, inc, pts, wts, float(k))


def quadform_abs(z, dirs, k, mat, workers=None):
    z = np.ascontiguousarray(z, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    if _backend == "numba":
        with _threads(workers):
            return _quadform_abs_numba(z, dirs, float(k), mat)
    return _quadform_abs_numpy(z, dirs, float(k), mat)


def spectral_weighted(z, dirs, k, vecs, weights, workers=None):
    z = np.ascontiguousarray(z, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    vecs = np.ascontiguousarray(vecs, dtype=np.complex128)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if _backend == "numba":
        with _threads(workers):
            return _spectral_weighted_numba(z, dirs, float(k), vecs, weights)
    return _spectral_weighted_numpy(z, dirs, float(k), vecs, weights)
