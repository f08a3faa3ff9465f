"""Closed-form approximations to the excitation probability and excess work.

Conventions
-----------
All functions take raw durations ``tau`` (arrays are accepted where noted)
and the same :class:`~anneal_phases.models.ModelParams` /
:class:`~anneal_phases.models.Protocol` objects as the exact integrator.
For linear ramps the drive rate is ``Delta * (lambda_f - lambda_i) / tau``;
the reference ramps have ``lambda_f - lambda_i = 1`` and every formula
below reduces to its textbook form there. Where a formula depends on the
sweep span ``dlam`` it is stated explicitly.

Phase handling follows one rule. The first-order adiabatic amplitude is a
difference ``A_f - A_i exp(2i phi)`` of boundary terms; ``phase_mode="full"``
keeps the interference term, ``phase_mode="averaged"`` replaces the squared
modulus by ``A_f^2 + A_i^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import models
from .models import ModelParams, Protocol
from .specfun import DEFAULT_QUADRATURE, QuadratureSpec, integrate, loggamma_complex

FULL = "full"
AVERAGED = "averaged"
PHASE_MODES = (FULL, AVERAGED)

DISCRETE = "discrete"
CONTINUOUS = "continuous"

LRT_PRINTED = "printed"
LRT_RELAXATION = "relaxation"

LABELS = ("LZF", "APT", "KZM", "LZF-lowest-mode", "HLZ", "KZM-half", "APT-half", "LRT",
          "exact-integral")


def _check_tau(tau):
    t = np.asarray(tau, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t <= 0):
        raise ValueError("tau must be positive and finite")
    return t


def _check_phase_mode(phase_mode):
    if phase_mode not in PHASE_MODES:
        raise ValueError(f"phase_mode must be one of {PHASE_MODES}, got {phase_mode!r}")


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class ApproxCurve:
    """Values of one approximation on a grid of durations."""

    label: str
    taus: tuple
    values: tuple

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown curve label {self.label!r}")
        if len(self.taus) != len(self.values):
            raise ValueError("taus and values must have equal length")
        v = np.asarray(self.values, dtype=float)
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ValueError(f"{self.label} curve has negative or non-finite values")

    @classmethod
    def evaluate(cls, label, func, taus):
        taus = tuple(float(t) for t in np.atleast_1d(taus))
        return cls(label, taus, tuple(float(func(t)) for t in taus))

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.taus, self.values])


# --------------------------------------------------------------------------
# LZ model
# --------------------------------------------------------------------------

def lzf_probability(params: ModelParams, tau, delta_lambda: float = 1.0):
    """Landau-Zener formula ``exp(-pi J^2 tau / (Delta dlam))``."""
    t = _check_tau(tau)
    return _scalar(np.exp(-math.pi * params.J**2 * t / (params.Delta * abs(delta_lambda))))


def _lz_phase_rate(params: ModelParams, protocol: Protocol):
    """``int_0^1 E(s) ds`` for the linear LZ ramp."""
    lam = np.array([[protocol.lambda_i, protocol.lambda_f]])
    return float(models.energy_integral([0.0, 1.0], params.Delta * lam, [[params.J, params.J]])[0])


def _apt_combine(a_f, a_i, phase, phase_mode):
    if phase_mode == AVERAGED:
        return a_f**2 + a_i**2
    return a_f**2 + a_i**2 - 2.0 * a_f * a_i * np.cos(2.0 * phase)


def apt_lz_probability(params: ModelParams, protocol: Protocol, tau=None,
                       phase_mode: str = AVERAGED):
    """First-order adiabatic perturbation theory for the LZ model.

    ``p = (1/16) (Delta dlam / (J^2 tau))^2 |J^3/E_f^3 - J^3 exp(2i phi)/E_i^3|^2``
    with the dynamic phase ``phi = tau int_0^1 E(s) ds``.

    Parameters
    ----------
    tau : float or array, optional
        Durations; defaults to ``protocol.tau``.
    phase_mode : {"averaged", "full"}
    """
    _check_phase_mode(phase_mode)
    t = _check_tau(protocol.tau if tau is None else tau)
    J = params.J
    e_i = float(models.lz_energy(params, protocol.lambda_i))
    e_f = float(models.lz_energy(params, protocol.lambda_f))
    pref = (params.Delta * abs(protocol.delta_lambda) / (4.0 * t)) ** 2 * J**2
    phase = t * _lz_phase_rate(params, protocol)
    return _scalar(pref * _apt_combine(e_f**-3, e_i**-3, phase, phase_mode))


# --------------------------------------------------------------------------
# TI chain: mode-resolved formulas
# --------------------------------------------------------------------------

def apt_ti_probability(params: ModelParams, protocol: Protocol, k, tau=None,
                       phase_mode: str = AVERAGED):
    """Adiabatic perturbation theory for TI mode(s) ``k``.

    The LZ result under ``J -> J sin k`` and the shifted control parameter;
    the phase uses the mode dispersion, ``phi_k = tau int_0^1 eps_k ds``.
    Tabulated schedules are handled by :func:`apt_schedule_probability`.
    """
    if not protocol.is_linear:
        return apt_schedule_probability(params, protocol, k, tau, phase_mode)
    _check_phase_mode(phase_mode)
    t = _check_tau(protocol.tau if tau is None else tau)
    k = np.asarray(k, dtype=float)
    jk = np.asarray(models.lz_mapping(params, k)[0])
    e_i = models.ti_dispersion(params, protocol.lambda_i, k)
    e_f = models.ti_dispersion(params, protocol.lambda_f, k)
    s_knots, a, b = models.mode_coefficients(params, protocol, np.atleast_1d(k))
    rate = models.energy_integral(s_knots, a, b).reshape(k.shape)
    pref = (params.Delta * abs(protocol.delta_lambda) / (4.0 * t)) ** 2 * jk**2
    with np.errstate(divide="ignore", invalid="ignore"):
        p = pref * _apt_combine(e_f**-3.0, e_i**-3.0, t * rate, phase_mode)
    return _scalar(np.where(jk > 0, p, 0.0))


def _schedule_mode_data(params, protocol, k):
    s, a, b = models.mode_coefficients(params, protocol, k)
    da0 = (a[:, 1] - a[:, 0]) / (s[1] - s[0])
    db0 = (b[:, 1] - b[:, 0]) / (s[1] - s[0])
    da1 = (a[:, -1] - a[:, -2]) / (s[-1] - s[-2])
    db1 = (b[:, -1] - b[:, -2]) / (s[-1] - s[-2])
    e_i = np.hypot(a[:, 0], b[:, 0])
    e_f = np.hypot(a[:, -1], b[:, -1])
    # d theta / ds = (a b' - b a') / (2 eps^2); amplitude (d theta/dt) / (2 eps)
    amp_i = np.abs(a[:, 0] * db0 - b[:, 0] * da0) / (4.0 * e_i**3)
    amp_f = np.abs(a[:, -1] * db1 - b[:, -1] * da1) / (4.0 * e_f**3)
    rate = models.energy_integral(s, a, b)
    return amp_i, amp_f, rate, e_f


def apt_schedule_probability(params: ModelParams, protocol: Protocol, k, tau=None,
                             phase_mode: str = AVERAGED):
    """Adiabatic perturbation theory for a general piecewise-linear schedule.

    Uses the boundary form ``p = |thdot_f/(2 eps_f) - thdot_i/(2 eps_i) e^{2i phi}|^2``
    with one-sided schedule slopes at the endpoints. On a linear ramp it
    coincides with :func:`apt_ti_probability`.
    """
    _check_phase_mode(phase_mode)
    t = _check_tau(protocol.tau if tau is None else tau)
    k = np.asarray(k, dtype=float)
    amp_i, amp_f, rate, _ = _schedule_mode_data(params, protocol, np.atleast_1d(k))
    t_ = t[..., None] if t.ndim else t
    p = _apt_combine(amp_f / t_, amp_i / t_, t_ * rate, phase_mode)
    if k.ndim == 0:
        p = p[..., 0]
    return _scalar(p)


# --------------------------------------------------------------------------
# TI chain: crossing protocols
# --------------------------------------------------------------------------

def _span(protocol: Protocol) -> float:
    return abs(protocol.delta_lambda)


def kzm_work(params: ModelParams, protocol: Protocol, tau, N: int):
    """Kibble-Zurek excess work ``(N Delta |lam_f| / 2 pi) sqrt(Delta dlam / (J^2 tau))``."""
    t = _check_tau(tau)
    return _scalar(N * params.Delta * abs(protocol.lambda_f) / (2.0 * math.pi)
                   * np.sqrt(params.Delta * _span(protocol) / (params.J**2 * t)))


def kzm_excitations(params: ModelParams, protocol: Protocol, tau, N: int):
    """Mean number of excitations ``n_ex`` implied by :func:`kzm_work`."""
    return kzm_work(params, protocol, tau, N) / (2.0 * params.Delta * abs(protocol.lambda_f))


def exact_integral_work(params: ModelParams, protocol: Protocol, tau, N: int,
                        spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Continuum small-momentum work with Landau-Zener mode probabilities.

    ``(N/pi) int_0^inf sqrt((G_f - J)^2 + J G_f x^2) exp(-pi J^2 x^2 tau / (Delta dlam)) dx``
    evaluated by adaptive quadrature.
    """
    t = float(_check_tau(tau))
    J = params.J
    g_f = float(models.transverse_field(params, protocol.lambda_f))
    c = math.pi * J**2 * t / (params.Delta * _span(protocol))
    # substitute x = y / sqrt(c) so the Gaussian has unit width
    r = 1.0 / math.sqrt(c)

    def f(y):
        x = y * r
        return math.sqrt((g_f - J) ** 2 + J * g_f * x * x) * math.exp(-y * y)

    return N / math.pi * r * integrate(f, 0.0, math.inf, spec)


def lzf_lowest_mode_work(params: ModelParams, protocol: Protocol, tau, N: int):
    """Lowest-mode Landau-Zener work ``2 Delta |lam_f| exp(-pi (pi/N)^2 J^2 tau / (Delta dlam))``."""
    t = _check_tau(tau)
    rate = math.pi * (math.pi / N) ** 2 * params.J**2 / (params.Delta * _span(protocol))
    return _scalar(2.0 * params.Delta * abs(protocol.lambda_f) * np.exp(-rate * t))


@lru_cache(maxsize=256)
def apt_shape_function(delta_over_j: float, lambda_i: float = -0.5, lambda_f: float = 0.5,
                       rel_tol: float = 1e-10) -> float:
    """Dimensionless APT amplitude ``f(Delta/J)`` of the continuum TI work.

    ``f = int_0^pi sin^2 k (1/eps_f^5 + eps_f/eps_i^6) dk`` with energies in
    units of ``J``. Memoized per argument set.
    """
    d = float(delta_over_j)
    if not d > 0:
        raise ValueError("delta_over_j must be positive")

    def eps(lam, k):
        return math.hypot(1.0 + d * lam - math.cos(k), math.sin(k))

    def f(k):
        ef = eps(lambda_f, k)
        ei = eps(lambda_i, k)
        return math.sin(k) ** 2 * (ef**-5 + ef / ei**6)

    # integrable kinks where the field passes through cos k
    pts = [math.acos(c) for c in (1.0 + d * lambda_i, 1.0 + d * lambda_f) if -1.0 < c < 1.0]
    return integrate(f, 0.0, math.pi, QuadratureSpec(rel_tol=rel_tol), points=pts or None)


def apt_ti_work(params: ModelParams, protocol: Protocol, tau, N: int,
                mode: str = CONTINUOUS, phase_mode: str = AVERAGED):
    """APT excess work of the TI chain.

    ``mode="continuous"`` is ``(N J / 16 pi) (Delta dlam / (J^2 tau))^2 f(Delta/J)``;
    ``mode="discrete"`` sums ``2 eps_k(lam_f) p_k`` over the positive momenta
    with the chosen ``phase_mode``.
    """
    t = _check_tau(tau)
    if mode == CONTINUOUS:
        f = apt_shape_function(params.delta_over_j, protocol.lambda_i, protocol.lambda_f)
        x = params.Delta * _span(protocol) / (params.J**2 * t)
        return _scalar(N * params.J / (16.0 * math.pi) * x**2 * f)
    if mode != DISCRETE:
        raise ValueError(f"mode must be 'continuous' or 'discrete', got {mode!r}")
    k = models.momenta(N)
    e_f = models.ti_dispersion(params, protocol.lambda_f, k)
    out = []
    for tt in np.atleast_1d(t):
        p = apt_ti_probability(params, protocol, k, tt, phase_mode)
        out.append(math.fsum((2.0 * e_f * p).tolist()))
    return _scalar(np.array(out).reshape(t.shape))


# --------------------------------------------------------------------------
# Half crossing: sweep that stops at the gap minimum
# --------------------------------------------------------------------------

_E_IPI4 = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))


def _hlz_x(x: float) -> float:
    """HLZ probability as a function of ``x = J^2 tau / (Delta dlam)``.

    Uses ``|Gamma(1/2 + iy)|^2 = pi / cosh(pi y)`` to fold the exponentially
    large and small factors together, which leaves
    ``1 - (1 - exp(-pi x/2)) / x * |R + e^{i pi/4} sqrt(x)/2|^2`` with
    ``R = Gamma(1 + iy) / Gamma(1/2 + iy)`` and ``y = x/4``.
    """
    y = 0.25 * x
    r = np.exp(loggamma_complex(complex(1.0, y)) - loggamma_complex(complex(0.5, y)))
    bracket = abs(r + _E_IPI4 * 0.5 * math.sqrt(x)) ** 2
    p = 1.0 + (math.expm1(-0.5 * math.pi * x) / x) * bracket
    return min(max(p, 0.0), 1.0)


def hlz_probability(params: ModelParams, tau, lambda_i: float = -1.0):
    """Half Landau-Zener formula for a ramp that ends at ``lam = 0``."""
    t = _check_tau(tau)
    x = params.J**2 * t / (params.Delta * abs(lambda_i))
    return _scalar(np.vectorize(_hlz_x, otypes=[float])(x))


_K_CUTOFF = 40.0


@lru_cache(maxsize=4)
def half_kzm_constant(rel_tol: float = 1e-10) -> float:
    """``K = int_0^inf x p_HLZ(x^2) dx``.

    Integrated to ``x = 40`` by quadrature; beyond that the integrand
    follows its ``1/(16 x^3)`` tail, whose contribution ``1/(32 X^2)`` is
    added analytically.
    """
    spec = QuadratureSpec(rel_tol=rel_tol, abs_tol=1e-14, max_subdivisions=500)
    body = integrate(lambda x: x * _hlz_x(x * x) if x > 0 else 0.0, 0.0, _K_CUTOFF, spec)
    return body + 1.0 / (32.0 * _K_CUTOFF**2)


def kzm_half_work(params: ModelParams, tau, N: int):
    """Kibble-Zurek work when stopping at the critical point, ``(K N J / pi) Delta/(J^2 tau)``."""
    t = _check_tau(tau)
    return _scalar(half_kzm_constant() * N * params.J / math.pi * params.Delta / (params.J**2 * t))


def apt_half_work(params: ModelParams, tau, N: int):
    """Lowest-mode APT work when stopping at the critical point.

    ``(N J / 8 pi) (N/pi)^2 (Delta / (J^2 tau))^2``.
    """
    t = _check_tau(tau)
    x = params.Delta / (params.J**2 * t)
    return _scalar(N * params.J / (8.0 * math.pi) * (N / math.pi) ** 2 * x**2)


# --------------------------------------------------------------------------
# Linear response
# --------------------------------------------------------------------------

def relaxation_function(params: ModelParams, protocol: Protocol, t, N: int):
    """Ground-state relaxation function ``Psi_0(t) = sum_k J^2 sin^2 k cos(2 eps_k t) / eps_k^3``.

    Energies are taken at the initial control value.
    """
    k = models.momenta(N)
    e = models.ti_dispersion(params, protocol.lambda_i, k)
    w = params.J**2 * np.sin(k) ** 2 / e**3
    t = np.asarray(t, dtype=float)
    vals = [math.fsum((w * np.cos(2.0 * e * tt)).tolist()) for tt in np.atleast_1d(t)]
    return _scalar(np.array(vals).reshape(t.shape))


def lrt_work(params: ModelParams, protocol: Protocol, tau, N: int,
             variant: str = LRT_PRINTED, phase_mode: str = AVERAGED):
    """Linear-response excess work of a linear ramp.

    ``(J^2/tau^2) (Delta dlam / 2)^2 sum_k w_k (1 - cos(2 eps_k tau)) / eps_k^5``
    with ``eps_k`` at the initial control value. ``variant="printed"`` uses the
    weight ``w_k = sin k``; ``variant="relaxation"`` uses ``sin^2 k``, which is
    what the double time integral of :func:`relaxation_function` produces.
    ``phase_mode="averaged"`` drops the cosine.
    """
    _check_phase_mode(phase_mode)
    if variant == LRT_PRINTED:
        power = 1
    elif variant == LRT_RELAXATION:
        power = 2
    else:
        raise ValueError(f"variant must be {LRT_PRINTED!r} or {LRT_RELAXATION!r}")
    t = _check_tau(tau)
    k = models.momenta(N)
    e = models.ti_dispersion(params, protocol.lambda_i, k)
    w = np.sin(k) ** power / e**5
    pref = (params.Delta * abs(protocol.delta_lambda) / 2.0) ** 2 * params.J**2
    out = []
    for tt in np.atleast_1d(t):
        osc = 1.0 if phase_mode == AVERAGED else 1.0 - np.cos(2.0 * e * tt)
        out.append(pref / tt**2 * math.fsum((w * osc).tolist()))
    return _scalar(np.array(out).reshape(t.shape))
