"""Bessel functions needed by the forward model and the Herglotz identity."""

import numpy as np
from scipy import special

from .errors import InvalidArgument

_KINDS = {
    "J0": special.j0,
    "J1": special.j1,
    "j0": lambda t: special.spherical_jn(0, t),
}


def bessel_eval(kind, t):
    """Evaluate ``J0``, ``J1`` (cylindrical) or ``j0`` (spherical) at ``t >= 0``.

    Scalars in give a float back; arrays give an array of the same shape.
    """
    try:
        fn = _KINDS[kind]
    except KeyError:
        raise InvalidArgument(f"unknown Bessel kind {kind!r}; expected one of {sorted(_KINDS)}") from None
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise InvalidArgument("Bessel argument must be a nonnegative radius")
    out = fn(arr)
    return float(out) if out.ndim == 0 else out
