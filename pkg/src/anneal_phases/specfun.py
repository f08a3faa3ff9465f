"""Special functions and quadrature used by the closed-form results.

Only what the excess-work formulas need: the ``k = -1`` branch of the
Lambert W function for complex arguments, the complex Gamma function
(Lanczos) together with its logarithm, and a thin adaptive-quadrature
wrapper.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy import integrate as _sp_integrate

from .errors import LambertConvergenceError, QuadratureError

_INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


# --------------------------------------------------------------------------
# Lambert W, branch -1
# --------------------------------------------------------------------------

def _halley(w, z, max_iter, tol):
    for _ in range(max_iter):
        ew = cmath.exp(w) if isinstance(w, complex) else math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0:
            return w, True
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w = w - dw
        if abs(dw) <= tol * (1.0 + abs(w)):
            return w, True
    return w, False


def _branch_point_series(p):
    # W = -1 + p - p^2/3 + 11/72 p^3 - 43/540 p^4, with p = -sqrt(2(ez+1)) on k = -1
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3 - 43.0 / 540.0 * p**4


def lambert_w_minus1(z, max_iter: int = 100, tol: float = 1e-15):
    """Lambert W on the ``k = -1`` branch.

    Real ``z`` in ``[-1/e, 0)`` returns a real value ``<= -1``. Other
    arguments return a complex value on the branch continuously connected to
    that real segment; in particular for real ``z < -1/e`` the result has a
    negative imaginary part.

    Raises
    ------
    ValueError
        For ``z == 0``, where the branch diverges.
    LambertConvergenceError
        If Halley iteration does not converge.
    """
    z = complex(z)
    if z == 0:
        raise ValueError("W_{-1} is singular at z = 0")

    if z.imag == 0.0 and -_INV_E <= z.real < 0.0:
        x = z.real
        if abs(x + _INV_E) < 1e-300:
            return -1.0
        d = 2.0 * (math.e * x + 1.0)
        if d < 0.5:
            w = _branch_point_series(-math.sqrt(max(d, 0.0)))
        else:
            l1 = math.log(-x)
            l2 = math.log(-l1)
            w = l1 - l2 + l2 / l1
        w, ok = _halley(w, x, max_iter, tol)
        if not ok:
            raise LambertConvergenceError(f"W_-1({x}) did not converge", w)
        return min(w, -1.0)

    d = 2.0 * (math.e * z + 1.0)
    if abs(d) < 0.6 and z.imag >= 0.0:
        # the branch point -1/e is reachable on this sheet only from Im z >= 0
        w = _branch_point_series(-cmath.sqrt(d))
    else:
        l1 = cmath.log(z) - 2j * math.pi
        w = l1 - cmath.log(l1)
    w, ok = _halley(w, z, max_iter, tol)
    if not ok:
        raise LambertConvergenceError(f"W_-1({z}) did not converge", w)
    return w


# --------------------------------------------------------------------------
# Gamma function (Lanczos, g = 7, 9 coefficients)
# --------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def loggamma_complex(z) -> complex:
    """Logarithm of the Gamma function.

    The imaginary part is not reduced to a principal branch; only
    ``exp(loggamma_complex(z))`` and the real part are meaningful.
    """
    z = complex(z)
    if _is_pole(z):
        raise ValueError(f"Gamma has a pole at z = {z.real:g}")
    if z.real < 0.5:
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return math.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - loggamma_complex(1.0 - z)
    z = z - 1.0
    x = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        x += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def gamma_complex(z) -> complex:
    """Gamma function for complex argument (relative accuracy ~1e-14)."""
    z = complex(z)
    if _is_pole(z):
        raise ValueError(f"Gamma has a pole at z = {z.real:g}")
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma_complex(1.0 - z))
    return cmath.exp(loggamma_complex(z))


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------

def integrate(f, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_QUADRATURE,
              full_output: bool = False, points=None):
    """Adaptive Gauss-Kronrod quadrature of a real function.

    ``hi`` may be ``inf``; QUADPACK then maps the half line onto (0, 1].
    With ``full_output`` the pair ``(value, error_bound)`` is returned.

    Raises
    ------
    QuadratureError
        When the requested ``max(rel_tol*|I|, abs_tol)`` is not reached
        within ``spec.max_subdivisions`` subintervals.
    """
    kwargs = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions,
                  full_output=1)
    if points is not None and math.isfinite(hi):
        kwargs["points"] = points
    value, bound, info, *rest = _sp_integrate.quad(f, lo, hi, **kwargs)
    ier = rest[0] if rest and isinstance(rest[0], str) else 0
    ok = not rest and bound <= max(spec.rel_tol * abs(value), spec.abs_tol) * (1 + 1e-12)
    if not ok:
        msg = ier if isinstance(ier, str) else "tolerance not reached"
        raise QuadratureError(
            f"quadrature on [{lo}, {hi}] failed: {msg.strip().splitlines()[0] if msg else ''} "
            f"(estimate {value!r}, bound {bound!r})", estimate=value, bound=bound)
    if full_output:
        return value, bound
    return value
