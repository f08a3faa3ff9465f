"""Crossover durations between approximation regimes and the (N, tau) regime map.

Three crossovers are computed for a chain swept through its critical point:

* ``tau1``, where Kibble-Zurek power-law decay gives way to the lowest-mode
  Landau-Zener exponential. The two curves never intersect on the real
  axis; the crossover is the real part of their complex intersection.
* ``tau2``, where the exponential gives way to the ``tau^-2`` tail of
  adiabatic perturbation theory.
* the half-crossing ``tau_c`` between the ``tau^-1`` and ``tau^-2`` laws for a
  sweep that stops at the critical point.

For the LZ model there is a single LZF to APT crossover. Times are reported
both raw and in scaled units, ``J^2 tau / Delta`` for the LZ model and
``(pi/N)^2 J^2 tau / Delta`` for the chain.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from . import approx
from .errors import NumericError, RootNotFoundError
from .models import ModelParams, Protocol
from .specfun import lambert_w_minus1

ASYMPTOTIC = "asymptotic"
NUMERIC_ROOT = "numeric-root"
METHODS = (ASYMPTOTIC, NUMERIC_ROOT)

CROSSING = "crossing"
HALF = "half"

# log-space bisection stops when the bracket is this narrow (relative)
_XTOL = 1e-14


class RegimeLabel(str, enum.Enum):
    KZM = "KZM"
    LZF = "LZF"
    APT = "APT"
    KZM_HALF = "KZM-half"
    APT_HALF = "APT-half"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CrossoverReport:
    """Crossover durations of a chain of ``N`` spins.

    ``tau1``/``tau2`` are raw durations, the ``*_scaled`` fields are in units of
    ``(N/pi)^2 Delta / J^2``. For the half-crossing protocol only ``tau2``
    (holding ``tau_c``) is populated and ``tau1`` is ``None``.
    """

    N: int
    delta_over_j: float
    method: str
    tau1_scaled: Optional[float]
    tau2_scaled: float
    tau1: Optional[float]
    tau2: float
    protocol: str = CROSSING

    def as_dict(self) -> dict:
        return {
            "N": self.N, "delta_over_j": self.delta_over_j, "method": self.method,
            "protocol": self.protocol, "tau1_scaled": self.tau1_scaled,
            "tau2_scaled": self.tau2_scaled, "tau1": self.tau1, "tau2": self.tau2,
        }


@dataclass(frozen=True)
class LZCrossover:
    """LZF to APT crossover of the LZ model, in units of ``Delta / J^2``."""

    numeric_scaled: float
    asymptotic_scaled: float
    numeric_tau: float
    asymptotic_tau: float


def _ti_scale(params: ModelParams, N: float) -> float:
    """Raw duration per unit of scaled chain time."""
    return (N / math.pi) ** 2 * params.Delta / params.J**2


def _bisect_log(g, lo: float, hi: float, what: str, grow: float = 2.0, max_grow: int = 200):
    """Root of ``g`` on ``[lo, inf)`` by expanding ``hi`` until the sign changes.

    ``g(lo)`` must be positive. The search runs on ``log tau`` with Brent's
    method.
    """
    g_lo = g(lo)
    if not g_lo > 0:
        raise RootNotFoundError(f"{what}: no sign change, g({lo:.6g}) = {g_lo:.6g} <= 0",
                                bracket=(lo, hi), values=(g_lo, None))
    g_hi = g(hi)
    tries = 0
    while g_hi > 0:
        hi *= grow
        g_hi = g(hi)
        tries += 1
        if tries > max_grow or not math.isfinite(g_hi):
            raise RootNotFoundError(f"{what}: no sign change on [{lo:.6g}, {hi:.6g}]",
                                    bracket=(lo, hi), values=(g_lo, g_hi))
    x = optimize.brentq(lambda u: g(math.exp(u)), math.log(lo), math.log(hi),
                        xtol=_XTOL, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(x)


# --------------------------------------------------------------------------
# LZ model
# --------------------------------------------------------------------------

def lz_crossover_asymptotic(delta_over_j: float) -> float:
    """Large ``Delta/J`` estimate of the scaled LZF to APT crossover.

    ``(2/pi) (L + log L)`` with ``L = log((4/pi) (Delta/2J)^3)``.
    """
    L = math.log(4.0 / math.pi * (0.5 * delta_over_j) ** 3)
    if L <= 1.0:
        raise ValueError(f"asymptotic crossover needs a larger Delta/J (got {delta_over_j})")
    return 2.0 / math.pi * (L + math.log(L))


def lz_crossover_time(params: ModelParams, protocol: Optional[Protocol] = None) -> LZCrossover:
    """LZF to APT crossover of the LZ model.

    The numeric value solves ``p_LZF = p_APT`` with the phase-averaged APT
    probability, bracketing from ``J^2 tau/Delta = 2/pi`` where the ratio
    ``p_LZF / p_APT`` is largest.

    Raises
    ------
    RootNotFoundError
        If the LZF curve never rises above the APT curve.
    """
    if params.delta_over_j <= 1.0:
        raise ValueError("the LZ crossover is defined for Delta/J > 1")
    protocol = protocol or Protocol.symmetric(1.0)
    span = abs(protocol.delta_lambda)

    def g(tau):
        log_lzf = -math.pi * params.J**2 * tau / (params.Delta * span)
        return log_lzf - math.log(approx.apt_lz_probability(params, protocol, tau))

    tau_lo = 2.0 / math.pi * params.Delta * span / params.J**2
    tau = _bisect_log(g, tau_lo, 4.0 * tau_lo, "LZ crossover")
    asym = lz_crossover_asymptotic(params.delta_over_j)
    return LZCrossover(float(params.lz_scaled_time(tau)), asym, tau,
                       float(params.tau_from_lz_scaled(asym)))


# --------------------------------------------------------------------------
# TI chain, crossing the critical point
# --------------------------------------------------------------------------

TAU1_LAMBERT_ARGUMENT = -math.pi / 8.0


def tau1_scaled_lambert() -> float:
    """``-Re W_{-1}(-pi/8) / (2 pi)``."""
    return -lambert_w_minus1(TAU1_LAMBERT_ARGUMENT).real / (2.0 * math.pi)


def _complex_intersection(c_kzm: float, c_lzf: float, rate: float,
                          tol: float = 1e-14, max_iter: int = 100) -> complex:
    """Complex root of ``c_kzm - log(tau)/2 = c_lzf - rate*tau``.

    Newton iteration on ``u = rate*tau``, where the equation reads
    ``u - log(u)/2 + c = 0``. The seed ``1/2 + i/2`` sits at the closest
    approach of the two real curves, shifted into the upper half plane.
    """
    c = c_kzm - c_lzf + 0.5 * math.log(rate)
    u = complex(0.5, 0.5)
    for _ in range(max_iter):
        step = (u - 0.5 * cmath.log(u) + c) / (1.0 - 0.5 / u)
        u -= step
        if abs(step) <= tol * abs(u):
            return u / rate
    raise NumericError(f"complex crossover iteration did not converge (last {u / rate})")


def _kzm_lzf_coefficients(N, amp_f, delta_eff, j_eff):
    """Log-linear forms of the KZM and lowest-mode LZF work curves.

    ``log W_KZM = c_kzm - log(tau)/2`` and ``log W_LZF = c_lzf - rate*tau``.
    """
    c_kzm = math.log(N * amp_f / (2.0 * math.pi) * math.sqrt(delta_eff) / j_eff)
    c_lzf = math.log(2.0 * amp_f)
    rate = math.pi * (math.pi / N) ** 2 * j_eff**2 / delta_eff
    return c_kzm, c_lzf, rate


def _tau1_numeric(N, amp_f, delta_eff, j_eff) -> float:
    c_kzm, c_lzf, rate = _kzm_lzf_coefficients(N, amp_f, delta_eff, j_eff)
    return _complex_intersection(c_kzm, c_lzf, rate).real


def ti_tau1(params: ModelParams, N: Optional[int] = None, method: str = ASYMPTOTIC,
            protocol: Optional[Protocol] = None) -> tuple:
    """KZM to LZF crossover of the chain.

    Returns ``(tau1_scaled, tau1)``. ``method="asymptotic"`` evaluates the
    Lambert closed form; ``method="numeric-root"`` takes the real part of the
    complex intersection of the two work curves, found by Newton iteration.
    Both give the same N-independent scaled value.
    """
    N = N if N is not None else params.require_chain()
    protocol = protocol or Protocol.symmetric(1.0)
    if method == ASYMPTOTIC:
        scaled = tau1_scaled_lambert()
        return scaled, scaled * _ti_scale(params, N)
    if method != NUMERIC_ROOT:
        raise ValueError(f"method must be one of {METHODS}")
    span = abs(protocol.delta_lambda)
    tau = _tau1_numeric(N, params.Delta * abs(protocol.lambda_f), params.Delta * span, params.J)
    return tau / _ti_scale(params, N), tau


def ti_tau2_asymptotic_scaled(delta_over_j: float, N: float, lambda_i: float = -0.5,
                              lambda_f: float = 0.5) -> float:
    """Large-N estimate of the scaled LZF to APT crossover.

    ``(2/pi) (L + log L)`` with
    ``L = log((4/pi) (f(Delta/J)/(4 Delta/J))^(-1/2) (N/pi)^(3/2))``.
    """
    f = approx.apt_shape_function(delta_over_j, lambda_i, lambda_f)
    L = math.log(4.0 / math.pi * (f / (4.0 * delta_over_j)) ** -0.5 * (N / math.pi) ** 1.5)
    if L <= 1.0:
        raise ValueError(f"asymptotic tau2 needs a larger chain (got N={N})")
    return 2.0 / math.pi * (L + math.log(L))


def _tau2_numeric(c_lzf: float, rate: float, c_apt: float) -> float:
    """Root of ``c_lzf - rate*tau = c_apt - 2 log(tau)`` above the ratio maximum."""
    def g(tau):
        return c_lzf - rate * tau - c_apt + 2.0 * math.log(tau)

    lo = 2.0 / rate
    return _bisect_log(g, lo, 2.0 * lo, "LZF-APT crossover")


def ti_tau2(params: ModelParams, N: Optional[int] = None, method: str = NUMERIC_ROOT,
            protocol: Optional[Protocol] = None) -> tuple:
    """LZF to APT crossover of the chain, ``(tau2_scaled, tau2)``.

    ``method="numeric-root"`` equates the lowest-mode LZF work with the
    continuum APT work; ``method="asymptotic"`` uses the large-N log plus
    log-log expansion of the same equation.
    """
    N = N if N is not None else params.require_chain()
    protocol = protocol or Protocol.symmetric(1.0)
    scale = _ti_scale(params, N)
    if method == ASYMPTOTIC:
        scaled = ti_tau2_asymptotic_scaled(params.delta_over_j, N, protocol.lambda_i,
                                           protocol.lambda_f)
        return scaled, scaled * scale
    if method != NUMERIC_ROOT:
        raise ValueError(f"method must be one of {METHODS}")
    span = abs(protocol.delta_lambda)
    c_lzf = math.log(2.0 * params.Delta * abs(protocol.lambda_f))
    rate = math.pi * (math.pi / N) ** 2 * params.J**2 / (params.Delta * span)
    # continuum APT work is C / tau^2
    c_apt = math.log(float(approx.apt_ti_work(params, protocol, 1.0, N)))
    tau = _tau2_numeric(c_lzf, rate, c_apt)
    return tau / scale, tau


def crossover_report(params: ModelParams, N: Optional[int] = None,
                     method: str = NUMERIC_ROOT, protocol: Optional[Protocol] = None
                     ) -> CrossoverReport:
    """Both crossovers of a chain swept through the critical point."""
    N = N if N is not None else params.require_chain()
    t1s, t1 = ti_tau1(params, N, method, protocol)
    t2s, t2 = ti_tau2(params, N, method, protocol)
    return CrossoverReport(int(N), params.delta_over_j, method, t1s, t2s, t1, t2)


# --------------------------------------------------------------------------
# Half crossing
# --------------------------------------------------------------------------

def half_crossover_time(params: ModelParams, N: Optional[int] = None) -> tuple:
    """KZM to APT crossover when stopping at the critical point, ``(scaled, tau)``.

    The scaled value ``1/(8K)`` does not depend on ``N``.
    """
    N = N if N is not None else params.require_chain()
    scaled = 1.0 / (8.0 * approx.half_kzm_constant())
    return scaled, scaled * _ti_scale(params, N)


def half_report(params: ModelParams, N: Optional[int] = None) -> CrossoverReport:
    N = N if N is not None else params.require_chain()
    scaled, tau = half_crossover_time(params, N)
    return CrossoverReport(int(N), params.delta_over_j, ASYMPTOTIC, None, scaled, None, tau,
                           protocol=HALF)


# --------------------------------------------------------------------------
# Tabulated two-parameter schedules
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleCrossing:
    """Linearization of a two-parameter schedule at its critical crossing.

    ``s_c`` is the normalized time where field and coupling are equal,
    ``delta_eff`` the slope of ``field - coupling`` there (per unit ``s``),
    ``j_eff`` the coupling there and ``gap_f`` the final ``|field - coupling|``.
    """

    s_c: float
    delta_eff: float
    j_eff: float
    gap_f: float


def schedule_crossing(protocol: Protocol) -> ScheduleCrossing:
    """Locate where ``field(s) = coupling(s)`` on a tabulated schedule."""
    s = np.asarray(protocol.s_knots)
    d = np.asarray(protocol.field_knots) - np.asarray(protocol.coupling_knots)
    idx = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)[0]
    idx = [i for i in idx if d[i] != d[i + 1]]
    if not idx:
        raise ValueError("schedule never crosses field = coupling")
    i = idx[0]
    w = d[i] / (d[i] - d[i + 1])
    s_c = s[i] + w * (s[i + 1] - s[i])
    slope = abs((d[i + 1] - d[i]) / (s[i + 1] - s[i]))
    j_c = float(np.interp(s_c, s, protocol.coupling_knots))
    if not j_c > 0:
        raise ValueError("coupling must be positive at the crossing")
    return ScheduleCrossing(float(s_c), float(slope), j_c, float(abs(d[-1])))


def schedule_work_curves(params: ModelParams, protocol: Protocol, N: int):
    """Effective KZM, lowest-mode LZF and APT work for a tabulated schedule.

    Returns three callables of ``tau``. The first two linearize the schedule
    at its critical crossing; the APT curve integrates the boundary formula
    over the momentum continuum.
    """
    sc = schedule_crossing(protocol)
    c_kzm, c_lzf, rate = _kzm_lzf_coefficients(N, sc.gap_f, sc.delta_eff, sc.j_eff)
    c_apt = math.log(_schedule_apt_coefficient(params, protocol, N))
    return (lambda t: np.exp(c_kzm - 0.5 * np.log(t)),
            lambda t: np.exp(c_lzf - rate * np.asarray(t)),
            lambda t: np.exp(c_apt - 2.0 * np.log(t)))


def _schedule_apt_coefficient(params, protocol, N, n_nodes: int = 4096) -> float:
    """``C`` in the continuum schedule APT work ``C / tau^2``.

    ``(N/pi) int_0^pi eps_f (a_f^2 + a_i^2) dk`` on a midpoint rule; the
    integrand continues to a smooth even periodic function, so the rule
    converges geometrically.
    """
    k = (np.arange(n_nodes) + 0.5) * math.pi / n_nodes
    amp_i, amp_f, _, e_f = approx._schedule_mode_data(params, protocol, k)
    vals = e_f * (amp_f**2 + amp_i**2)
    return N / math.pi * math.pi / n_nodes * math.fsum(vals.tolist())


def schedule_crossovers(params: ModelParams, protocol: Protocol, N: int) -> CrossoverReport:
    """Numeric-root crossovers for a tabulated schedule.

    The schedule's own time axis replaces ``Delta/J^2``: the scaled fields
    of the report are in units of ``(N/pi)^2 delta_eff / j_eff^2``.
    """
    sc = schedule_crossing(protocol)
    c_kzm, c_lzf, rate = _kzm_lzf_coefficients(N, sc.gap_f, sc.delta_eff, sc.j_eff)
    t1 = _tau1_numeric(N, sc.gap_f, sc.delta_eff, sc.j_eff)
    c_apt = math.log(_schedule_apt_coefficient(params, protocol, N))
    t2 = _tau2_numeric(c_lzf, rate, c_apt)
    scale = (N / math.pi) ** 2 * sc.delta_eff / sc.j_eff**2
    return CrossoverReport(int(N), sc.delta_eff / sc.j_eff, NUMERIC_ROOT, t1 / scale,
                           t2 / scale, t1, t2)


# --------------------------------------------------------------------------
# Classification and phase diagram
# --------------------------------------------------------------------------

def _thresholds(params, N, protocol_kind, method, protocol):
    if protocol_kind == HALF:
        return None, half_crossover_time(params, N)[1]
    if protocol is not None and not protocol.is_linear:
        rep = schedule_crossovers(params, protocol, N)
        return rep.tau1, rep.tau2
    return ti_tau1(params, N, method, protocol)[1], ti_tau2(params, N, method, protocol)[1]


def classify_regime(params: ModelParams, N: int, tau: float, protocol_kind: str = CROSSING,
                    method: str = NUMERIC_ROOT, protocol: Optional[Protocol] = None
                    ) -> RegimeLabel:
    """Regime of the excess work at duration ``tau``.

    Boundaries are crossovers, not validity guarantees: the KZM law also
    needs ``J^2 tau / Delta >> 1`` (see :func:`is_reliable`).
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    t1, t2 = _thresholds(params, N, protocol_kind, method, protocol)
    return _label(tau, t1, t2, protocol_kind)


def _label(tau, t1, t2, protocol_kind):
    if protocol_kind == HALF:
        return RegimeLabel.KZM_HALF if tau < t2 else RegimeLabel.APT_HALF
    if protocol_kind != CROSSING:
        raise ValueError(f"protocol_kind must be {CROSSING!r} or {HALF!r}")
    if tau < t1:
        return RegimeLabel.KZM
    if tau < t2:
        return RegimeLabel.LZF
    return RegimeLabel.APT


def is_reliable(params: ModelParams, tau) -> np.ndarray:
    """False where ``J^2 tau / Delta < 1``, below which the KZM law breaks down."""
    return np.asarray(params.lz_scaled_time(tau)) >= 1.0


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced ``(N, tau)`` grid. ``N`` values are rounded to even integers."""

    n_min: int = 10
    n_max: int = 1000
    n_count: int = 12
    tau_min: float = 1.0
    tau_max: float = 1e6
    tau_count: int = 40
    boundary_points: int = 200

    def __post_init__(self):
        if self.n_count < 2 or self.tau_count < 2:
            raise ValueError("phase diagram grid must be at least 2 x 2")
        if not (2 <= self.n_min <= self.n_max):
            raise ValueError("need 2 <= n_min <= n_max")
        if not (0 < self.tau_min < self.tau_max):
            raise ValueError("need 0 < tau_min < tau_max")

    def n_values(self) -> np.ndarray:
        raw = np.geomspace(self.n_min, self.n_max, self.n_count)
        return np.maximum(2, 2 * np.round(raw / 2)).astype(int)

    def tau_values(self) -> np.ndarray:
        return np.geomspace(self.tau_min, self.tau_max, self.tau_count)


@dataclass
class PhaseDiagram:
    """Regime labels on a grid plus dense boundary curves.

    ``cells`` rows are ``(N, tau, scaled_tau, label, is_boundary1,
    is_boundary2, reliable)`` in row-major order (N outer, tau inner). A
    boundary flag marks the cell whose interval ``[tau_j, tau_{j+1})``
    contains the crossover.
    """

    protocol_kind: str
    cells: list = field(default_factory=list)
    boundary1: np.ndarray = None
    boundary2: np.ndarray = None


def phase_diagram(params: ModelParams, grid: GridSpec = GridSpec(),
                  protocol_kind: str = CROSSING, method: str = NUMERIC_ROOT,
                  protocol: Optional[Protocol] = None) -> PhaseDiagram:
    """Regime map over chain size and duration.

    ``boundary1`` and ``boundary2`` are ``(n, 2)`` arrays of ``(N, tau)``
    sampled on a dense log grid of real ``N``; ``boundary1`` is empty for the
    half-crossing protocol.
    """
    taus = grid.tau_values()
    out = PhaseDiagram(protocol_kind)
    for N in grid.n_values():
        t1, t2 = _thresholds(params, int(N), protocol_kind, method, protocol)
        scaled = taus / _ti_scale(params, N)
        rel = is_reliable(params, taus)
        for j, tau in enumerate(taus):
            nxt = taus[j + 1] if j + 1 < taus.size else math.inf
            b1 = t1 is not None and tau <= t1 < nxt
            b2 = tau <= t2 < nxt
            out.cells.append((int(N), float(tau), float(scaled[j]),
                              _label(tau, t1, t2, protocol_kind), bool(b1), bool(b2),
                              bool(rel[j])))
    dense = np.geomspace(grid.n_min, grid.n_max, grid.boundary_points)
    b1, b2 = [], []
    for N in dense:
        t1, t2 = _thresholds(params, float(N), protocol_kind, method, protocol)
        if t1 is not None:
            b1.append((N, t1))
        b2.append((N, t2))
    out.boundary1 = np.array(b1).reshape(-1, 2)
    out.boundary2 = np.array(b2).reshape(-1, 2)
    return out

