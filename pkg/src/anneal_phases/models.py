"""Model parameters, protocols and instantaneous spectra.

Units: hbar = 1 and lattice spacing a = 1. Two systems share the same
two-level structure:

* the generalized Landau-Zener (LZ) model ``H = Delta*lam*sz + J*sx``;
* the transverse-field Ising (TI) chain, whose momentum modes are LZ-like
  two-level systems with ``J -> J sin(k)`` and a shifted control parameter.

Protocols are expressed on a normalized time ``s = (t - t_i)/tau`` in [0, 1],
so that the endpoints are fixed regardless of the duration ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

LINEAR_SYMMETRIC = "linear-symmetric"
LINEAR_HALF = "linear-half"
TABULATED = "tabulated"
SHAPES = (LINEAR_SYMMETRIC, LINEAR_HALF, TABULATED)

_DEFAULT_ENDPOINTS = {
    LINEAR_SYMMETRIC: (-0.5, 0.5),
    LINEAR_HALF: (-1.0, 0.0),
}


@dataclass(frozen=True)
class ModelParams:
    """Couplings and chain size.

    Parameters
    ----------
    J : float
        Coupling energy (LZ off-diagonal element, TI spin-spin coupling).
    Delta : float
        Drive strength multiplying the control parameter.
    N : int, optional
        Number of spins of the TI chain. Must be even; ignored by the LZ model.
    a : float
        Lattice spacing, fixed to 1.
    """

    J: float = 1.0
    Delta: float = 1.0
    N: Optional[int] = None
    a: float = 1.0

    def __post_init__(self):
        if not (self.J > 0 and math.isfinite(self.J)):
            raise ValueError(f"J must be positive and finite, got {self.J!r}")
        if not (self.Delta > 0 and math.isfinite(self.Delta)):
            raise ValueError(f"Delta must be positive and finite, got {self.Delta!r}")
        if self.N is not None:
            if int(self.N) != self.N or self.N < 2 or self.N % 2:
                raise ValueError(f"N must be an even integer >= 2, got {self.N!r}")
            object.__setattr__(self, "N", int(self.N))
        if self.a != 1.0:
            raise ValueError("lattice spacing is fixed to a = 1")

    @property
    def delta_over_j(self) -> float:
        return self.Delta / self.J

    def require_chain(self) -> int:
        if self.N is None:
            raise ValueError("this operation needs a chain size N")
        return self.N

    def lz_scaled_time(self, tau):
        """``J^2 tau / Delta``."""
        return self.J**2 * np.asarray(tau, dtype=float) / self.Delta

    def ti_scaled_time(self, tau):
        """``(pi/N)^2 J^2 tau / Delta``."""
        n = self.require_chain()
        return (math.pi / n) ** 2 * self.J**2 * np.asarray(tau, dtype=float) / self.Delta

    def tau_from_lz_scaled(self, scaled):
        return np.asarray(scaled, dtype=float) * self.Delta / self.J**2

    def tau_from_ti_scaled(self, scaled):
        n = self.require_chain()
        return np.asarray(scaled, dtype=float) * (n / math.pi) ** 2 * self.Delta / self.J**2


@dataclass(frozen=True)
class Protocol:
    """Control schedule of duration ``tau``.

    Linear shapes ramp ``lam`` from ``lambda_i`` to ``lambda_f`` at constant
    rate. The tabulated shape carries samples of the transverse field
    ``field(s)`` and of the coupling ``coupling(s)`` on a monotone grid of
    normalized times and is interpolated piecewise linearly.
    """

    tau: float
    shape: str = LINEAR_SYMMETRIC
    lambda_i: Optional[float] = None
    lambda_f: Optional[float] = None
    s_knots: Optional[tuple] = None
    field_knots: Optional[tuple] = None
    coupling_knots: Optional[tuple] = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown protocol shape {self.shape!r}; expected one of {SHAPES}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive and finite, got {self.tau!r}")
        if self.shape == TABULATED:
            self._check_table()
            return
        li, lf = _DEFAULT_ENDPOINTS[self.shape]
        if self.lambda_i is None:
            object.__setattr__(self, "lambda_i", li)
        if self.lambda_f is None:
            object.__setattr__(self, "lambda_f", lf)
        if self.lambda_i == self.lambda_f:
            raise ValueError("lambda_i and lambda_f must differ")

    def _check_table(self):
        if self.s_knots is None or self.field_knots is None or self.coupling_knots is None:
            raise ValueError("tabulated protocols need s_knots, field_knots and coupling_knots")
        s = np.asarray(self.s_knots, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("need at least two schedule samples")
        if len(self.field_knots) != s.size or len(self.coupling_knots) != s.size:
            raise ValueError("schedule columns must have equal length")
        if np.any(np.diff(s) <= 0):
            raise ValueError("schedule time grid must be strictly increasing")
        if not (np.all(np.isfinite(self.field_knots)) and np.all(np.isfinite(self.coupling_knots))):
            raise ValueError("schedule values must be finite")
        # store on the unit interval
        s = (s - s[0]) / (s[-1] - s[0])
        object.__setattr__(self, "s_knots", tuple(float(x) for x in s))
        object.__setattr__(self, "field_knots", tuple(float(x) for x in self.field_knots))
        object.__setattr__(self, "coupling_knots", tuple(float(x) for x in self.coupling_knots))

    @classmethod
    def symmetric(cls, tau: float, lambda_f: float = 0.5) -> "Protocol":
        return cls(tau=tau, shape=LINEAR_SYMMETRIC, lambda_i=-lambda_f, lambda_f=lambda_f)

    @classmethod
    def half(cls, tau: float, lambda_i: float = -1.0) -> "Protocol":
        return cls(tau=tau, shape=LINEAR_HALF, lambda_i=lambda_i, lambda_f=0.0)

    @classmethod
    def tabulated(cls, tau: float, s: Sequence[float], field: Sequence[float],
                  coupling: Sequence[float]) -> "Protocol":
        return cls(tau=tau, shape=TABULATED, s_knots=tuple(s), field_knots=tuple(field),
                   coupling_knots=tuple(coupling))

    @property
    def is_linear(self) -> bool:
        return self.shape != TABULATED

    @property
    def delta_lambda(self) -> float:
        self._need_linear()
        return self.lambda_f - self.lambda_i

    def with_tau(self, tau: float) -> "Protocol":
        return replace(self, tau=tau)

    def shifted(self, shift: float) -> "Protocol":
        """Same linear ramp with both endpoints moved by ``shift``."""
        self._need_linear()
        return replace(self, lambda_i=self.lambda_i + shift, lambda_f=self.lambda_f + shift)

    def lam(self, s):
        """Control parameter at normalized time ``s``."""
        self._need_linear()
        return self.lambda_i + (self.lambda_f - self.lambda_i) * np.asarray(s, dtype=float)

    def _need_linear(self):
        if not self.is_linear:
            raise ValueError("operation defined only for linear protocols")


def lz_theta(params: ModelParams, lam):
    """Mixing angle of the LZ eigenstates, in (0, pi/2)."""
    return 0.5 * np.arctan2(params.J, params.Delta * np.asarray(lam, dtype=float))


def lz_energy(params: ModelParams, lam):
    """Positive eigenenergy ``sqrt(Delta^2 lam^2 + J^2)``; the gap is twice this."""
    return np.hypot(params.Delta * np.asarray(lam, dtype=float), params.J)


def transverse_field(params: ModelParams, lam):
    return params.J + params.Delta * np.asarray(lam, dtype=float)


def ti_dispersion(params: ModelParams, lam, k):
    """Quasiparticle energy of momentum ``k`` at control value ``lam``."""
    k = np.asarray(k, dtype=float)
    gam = transverse_field(params, lam)
    return np.hypot(gam - params.J * np.cos(k), params.J * np.sin(k))


def ti_theta_k(params: ModelParams, lam, k):
    """Bogoliubov angle of mode ``k``; continuous in lam, range [0, pi/2]."""
    k = np.asarray(k, dtype=float)
    gam = transverse_field(params, lam)
    return 0.5 * np.arctan2(params.J * np.sin(k), gam - params.J * np.cos(k))


def lz_mapping(params: ModelParams, k):
    """Return ``(J_k, lambda_shift)`` mapping mode ``k`` onto an LZ problem."""
    k = np.asarray(k, dtype=float)
    jk = params.J * np.sin(k)
    shift = params.J / params.Delta * (1.0 - np.cos(k))
    if jk.ndim == 0:
        return float(jk), float(shift)
    return jk, shift


def momenta(N: int) -> np.ndarray:
    """Positive momenta ``(2n+1) pi / N``, n = 0 .. N/2-1, ascending."""
    if N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N!r}")
    return (2 * np.arange(N // 2) + 1) * math.pi / N


def chain_schedule(params: ModelParams, protocol: Protocol):
    """Knots ``(s, field, coupling)`` of the TI drive on normalized time.

    A linear ramp is exactly represented by its two endpoints.
    """
    if protocol.is_linear:
        s = np.array([0.0, 1.0])
        gam = transverse_field(params, np.array([protocol.lambda_i, protocol.lambda_f]))
        return s, gam, np.full(2, params.J)
    return (np.asarray(protocol.s_knots), np.asarray(protocol.field_knots),
            np.asarray(protocol.coupling_knots))


def mode_coefficients(params: ModelParams, protocol: Protocol, k):
    """Knot values of the TI mode Hamiltonian ``-(alpha sz + beta sx)``.

    Returns ``(s, alpha, beta)`` with ``alpha = field - coupling*cos k`` and
    ``beta = coupling*sin k``; arrays have shape ``(len(k), len(s))``.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    s, gam, cpl = chain_schedule(params, protocol)
    alpha = gam[None, :] - cpl[None, :] * np.cos(k)[:, None]
    beta = cpl[None, :] * np.sin(k)[:, None]
    return s, alpha, beta


def mode_energy(params: ModelParams, protocol: Protocol, k, s):
    """Instantaneous mode energy at normalized time(s) ``s`` (any protocol)."""
    knots, alpha, beta = mode_coefficients(params, protocol, k)
    s = np.asarray(s, dtype=float)
    a = np.array([np.interp(s, knots, row) for row in alpha])
    b = np.array([np.interp(s, knots, row) for row in beta])
    out = np.hypot(a, b)
    return out[0] if np.ndim(k) == 0 else out


@dataclass
class Spectrum:
    """Instantaneous spectral data of a model along a linear protocol."""

    params: ModelParams
    lam: np.ndarray
    theta: np.ndarray = field(init=False)
    energy: np.ndarray = field(init=False)
    k: Optional[np.ndarray] = field(init=False, default=None)
    eps_k: Optional[np.ndarray] = field(init=False, default=None)

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.theta = lz_theta(self.params, self.lam)
        self.energy = lz_energy(self.params, self.lam)
        if self.params.N is not None:
            self.k = momenta(self.params.N)
            self.eps_k = ti_dispersion(self.params, self.lam[None, :], self.k[:, None])


def energy_integral(s_knots, alpha, beta) -> np.ndarray:
    """Exact ``int_0^1 hypot(alpha(s), beta(s)) ds`` for piecewise-linear coefficients.

    ``alpha`` and ``beta`` hold knot values with shape ``(m, K)``; the result
    has shape ``(m,)``. On each piece ``alpha^2 + beta^2`` is a quadratic in
    ``s`` and its square root has a closed-form antiderivative. This stays
    accurate when a mode gap nearly closes inside a piece, where fixed-order
    Gauss rules lose digits.
    """
    s = np.asarray(s_knots, dtype=float)
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    total = np.zeros(alpha.shape[0])
    for q in range(s.size - 1):
        h = s[q + 1] - s[q]
        a0, b0 = alpha[:, q], beta[:, q]
        da = (alpha[:, q + 1] - a0) / h
        db = (beta[:, q + 1] - b0) / h
        p = da * da + db * db
        m = a0 * da + b0 * db
        d = np.abs(a0 * db - b0 * da)  # p*(alpha^2 + beta^2) = (p s + m)^2 + d^2
        e0 = np.hypot(a0, b0)
        e1 = np.hypot(alpha[:, q + 1], beta[:, q + 1])
        flat = p == 0.0
        ps = np.where(flat, 1.0, p)
        rp = np.sqrt(ps)
        x0, x1 = m, ps * h + m
        piece = (x1 * e1 - x0 * e0) / (2.0 * ps)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = d * d / (2.0 * ps * rp) * (np.arcsinh(x1 / d) - np.arcsinh(x0 / d))
        piece = piece + np.where(d > 0, tail, 0.0)
        total += np.where(flat, e0 * h, piece)
    return total
