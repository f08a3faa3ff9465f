"""Exact finite-time evolution of LZ and TI-mode two-level systems.

Every system here is a 2x2 problem ``i dy/dt = H(t) y`` with
``H = alpha(s) sz + beta(s) sx`` and coefficients that are piecewise linear
in the normalized time ``s``. The LZ model has ``alpha = Delta*lam``,
``beta = J``; a TI mode carries an overall minus sign,
``alpha = -(Gamma - J cos k)``, ``beta = -J sin k``.

All integrations use fixed-step classical RK4 in real arithmetic. Runs that
share a step count are advanced together in one compiled loop; each run's
arithmetic is independent of the others, so results do not depend on how
runs are batched or distributed across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numba
import numpy as np

from . import models
from .errors import IntegratorError
from .models import ModelParams, Protocol


@dataclass(frozen=True)
class ModeState:
    u: complex
    v: complex

    @property
    def norm(self) -> float:
        return abs(self.u) ** 2 + abs(self.v) ** 2


@dataclass(frozen=True)
class IntegratorSpec:
    """Step-size control for the fixed-step RK4 integrator.

    The step count is the largest of

    * ``min_steps``;
    * ``tau * max|E| / max_phase_step`` (phase advance per step);
    * the count that keeps the RK4 norm loss, ``sum (E dt)^6 / 72``,
      below ``drift_budget``.

    ``n_steps`` overrides the rule entirely.
    """

    method: str = "rk4"
    max_phase_step: float = 0.02
    drift_budget: float = 2e-11
    min_steps: int = 100
    norm_drift_tol: float = 1e-10
    n_steps: Optional[int] = None

    def __post_init__(self):
        if self.method != "rk4":
            raise ValueError("only classical RK4 is available")
        if self.max_phase_step <= 0 or self.drift_budget <= 0 or self.norm_drift_tol <= 0:
            raise ValueError("integrator tolerances must be positive")
        if self.min_steps < 100:
            raise ValueError("min_steps must be at least 100")
        if self.n_steps is not None and self.n_steps < 1:
            raise ValueError("n_steps must be positive")


DEFAULT_INTEGRATOR = IntegratorSpec()


@dataclass(frozen=True)
class EvolutionResult:
    """Outcome of one evolution.

    With phase averaging ``p_samples`` holds the probabilities at ``tau`` and
    at the shifted duration; ``p_excite`` is their mean.
    """

    final_state: ModeState
    p_excite: float
    norm_drift: float
    steps: int
    p_samples: tuple = ()


class ModeWork(NamedTuple):
    k: float
    p: float
    eps_f: float
    norm_drift: float


# --------------------------------------------------------------------------
# compiled kernel
# --------------------------------------------------------------------------

@numba.njit(nogil=True, cache=True)
def _rk4_batch(s_knots, alpha, dalpha, beta, dbeta, dts, n, ur, ui, vr, vi):  # pragma: no cover
    # alpha, beta: (K, m) knot values; dalpha, dbeta: (K-1, m) interval increments
    m = dts.size
    nk = s_knots.size
    q0 = 0
    for j in range(n):
        s_lo = j / n
        s_mid = (j + 0.5) / n
        s_hi = (j + 1) / n
        while q0 < nk - 2 and s_knots[q0 + 1] <= s_lo:
            q0 += 1
        qm = q0
        while qm < nk - 2 and s_knots[qm + 1] <= s_mid:
            qm += 1
        q1 = qm
        while q1 < nk - 2 and s_knots[q1 + 1] < s_hi:
            q1 += 1
        w0 = (s_lo - s_knots[q0]) / (s_knots[q0 + 1] - s_knots[q0])
        wm = (s_mid - s_knots[qm]) / (s_knots[qm + 1] - s_knots[qm])
        w1 = (s_hi - s_knots[q1]) / (s_knots[q1 + 1] - s_knots[q1])
        al0 = alpha[q0]
        alm = alpha[qm]
        al1 = alpha[q1]
        da0 = dalpha[q0]
        dam = dalpha[qm]
        da1 = dalpha[q1]
        bl0 = beta[q0]
        blm = beta[qm]
        bl1 = beta[q1]
        db0 = dbeta[q0]
        dbm = dbeta[qm]
        db1 = dbeta[q1]
        for i in range(m):
            dt = dts[i]
            h2 = 0.5 * dt
            c6 = dt / 6.0
            a0 = al0[i] + w0 * da0[i]
            am = alm[i] + wm * dam[i]
            a1 = al1[i] + w1 * da1[i]
            b0 = bl0[i] + w0 * db0[i]
            bm = blm[i] + wm * dbm[i]
            b1 = bl1[i] + w1 * db1[i]
            xur = ur[i]
            xui = ui[i]
            xvr = vr[i]
            xvi = vi[i]
            # dy/dt = -i H y,  H = [[a, b], [b, -a]]
            k1ur = a0 * xui + b0 * xvi
            k1ui = -(a0 * xur + b0 * xvr)
            k1vr = b0 * xui - a0 * xvi
            k1vi = -(b0 * xur - a0 * xvr)
            yur = xur + h2 * k1ur
            yui = xui + h2 * k1ui
            yvr = xvr + h2 * k1vr
            yvi = xvi + h2 * k1vi
            k2ur = am * yui + bm * yvi
            k2ui = -(am * yur + bm * yvr)
            k2vr = bm * yui - am * yvi
            k2vi = -(bm * yur - am * yvr)
            yur = xur + h2 * k2ur
            yui = xui + h2 * k2ui
            yvr = xvr + h2 * k2vr
            yvi = xvi + h2 * k2vi
            k3ur = am * yui + bm * yvi
            k3ui = -(am * yur + bm * yvr)
            k3vr = bm * yui - am * yvi
            k3vi = -(bm * yur - am * yvr)
            yur = xur + dt * k3ur
            yui = xui + dt * k3ui
            yvr = xvr + dt * k3vr
            yvi = xvi + dt * k3vi
            k4ur = a1 * yui + b1 * yvi
            k4ui = -(a1 * yur + b1 * yvr)
            k4vr = b1 * yui - a1 * yvi
            k4vi = -(b1 * yur - a1 * yvr)
            ur[i] = xur + c6 * (k1ur + 2.0 * k2ur + 2.0 * k3ur + k4ur)
            ui[i] = xui + c6 * (k1ui + 2.0 * k2ui + 2.0 * k3ui + k4ui)
            vr[i] = xvr + c6 * (k1vr + 2.0 * k2vr + 2.0 * k3vr + k4vr)
            vi[i] = xvi + c6 * (k1vi + 2.0 * k2vi + 2.0 * k3vi + k4vi)


def _run_kernel(s_knots, alpha, beta, dts, n, ur, ui, vr, vi):
    at = np.ascontiguousarray(alpha.T)
    bt = np.ascontiguousarray(beta.T)
    _rk4_batch(s_knots, at, np.ascontiguousarray(np.diff(at, axis=0)), bt,
               np.ascontiguousarray(np.diff(bt, axis=0)), dts, n, ur, ui, vr, vi)


def _energy_moments(s_knots, alpha, beta):
    """Per-run ``max E`` and ``int_0^1 E(s)^6 ds`` for piecewise-linear coefficients."""
    e2 = alpha**2 + beta**2
    emax = np.sqrt(e2.max(axis=1))
    m6 = np.zeros(alpha.shape[0])
    for q in range(s_knots.size - 1):
        lo, hi = s_knots[q], s_knots[q + 1]
        da = alpha[:, q + 1] - alpha[:, q]
        db = beta[:, q + 1] - beta[:, q]

        def e6(s, q=q, da=da, db=db, lo=lo, hi=hi):
            w = ((s - lo) / (hi - lo))[None, :]
            a = alpha[:, q, None] + w * da[:, None]
            b = beta[:, q, None] + w * db[:, None]
            return (a**2 + b**2) ** 3

        x, wts = np.polynomial.legendre.leggauss(4)  # exact: degree-6 polynomial
        half = 0.5 * (hi - lo)
        m6 += half * (e6(0.5 * (hi + lo) + half * x) @ wts)
    return emax, m6


def step_counts(s_knots, alpha, beta, taus, spec: IntegratorSpec = DEFAULT_INTEGRATOR):
    """RK4 step count of each run in a batch.

    Counts are rounded up to a geometric ladder (four rungs per octave) so
    that runs of similar stiffness can share one compiled loop.
    """
    taus = np.abs(np.atleast_1d(np.asarray(taus, dtype=float)))
    if spec.n_steps is not None:
        return np.full(taus.size, int(spec.n_steps), dtype=np.int64)
    emax, m6 = _energy_moments(np.asarray(s_knots, float), np.atleast_2d(alpha),
                               np.atleast_2d(beta))
    n_phase = taus * emax / spec.max_phase_step
    # norm loss per step (E dt)^6/72  =>  total ~ dt^5 tau m6 / 72
    work6 = taus * m6
    with np.errstate(divide="ignore"):
        dt = np.where(work6 > 0, (72.0 * spec.drift_budget / np.maximum(work6, 1e-300)) ** 0.2,
                      np.inf)
    n_drift = taus / dt
    raw = np.maximum(np.maximum(n_phase, n_drift), spec.min_steps)
    rung = np.ceil(4.0 * np.log2(raw)) / 4.0
    return np.ceil(np.exp2(rung)).astype(np.int64)


def _advance(s_knots, alpha, beta, dts, n, state, n_jobs):
    ur, ui, vr, vi = state
    m = dts.size
    n_jobs = max(1, min(int(n_jobs), m))
    if n_jobs == 1:
        _run_kernel(s_knots, alpha, beta, dts, n, ur, ui, vr, vi)
        return
    bounds = np.linspace(0, m, n_jobs + 1).astype(int)
    chunks = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    outs = {}

    def work(sl):
        st = [np.ascontiguousarray(x[sl]) for x in state]
        _run_kernel(s_knots, alpha[sl], beta[sl], np.ascontiguousarray(dts[sl]), n, *st)
        outs[sl.start] = st

    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        list(pool.map(work, chunks))
    for sl in chunks:
        for dst, src in zip(state, outs[sl.start]):
            dst[sl] = src


def propagate(s_knots, alpha, beta, taus, y0, spec: IntegratorSpec = DEFAULT_INTEGRATOR,
              n_jobs: int = 1, n=None):
    """Integrate a batch of two-level runs over ``s`` in [0, 1].

    Parameters
    ----------
    s_knots : (K,) array
        Normalized knot times, ``s_knots[0] == 0`` and ``s_knots[-1] == 1``.
    alpha, beta : (m, K) arrays
        Knot values of the ``sz`` and ``sx`` coefficients for each run.
    taus : (m,) array
        Duration of each run. A negative duration integrates backwards.
    y0 : (m, 2) complex array
        Initial ``(u, v)`` amplitudes.
    n : int or array of int, optional
        Step counts; by default from :func:`step_counts`.

    Returns
    -------
    y : (m, 2) complex array
    n : (m,) int array
        RK4 steps taken by each run.
    """
    s_knots = np.ascontiguousarray(s_knots, dtype=float)
    alpha = np.ascontiguousarray(np.atleast_2d(alpha), dtype=float)
    beta = np.ascontiguousarray(np.atleast_2d(beta), dtype=float)
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    y0 = np.atleast_2d(np.asarray(y0, dtype=complex))
    m = taus.size
    if n is None:
        n = step_counts(s_knots, alpha, beta, taus, spec)
    n = np.broadcast_to(np.asarray(n, dtype=np.int64), (m,))
    y = np.empty((m, 2), dtype=complex)
    for steps in np.unique(n):
        idx = np.nonzero(n == steps)[0]
        state = [np.ascontiguousarray(x) for x in
                 (y0[idx, 0].real, y0[idx, 0].imag, y0[idx, 1].real, y0[idx, 1].imag)]
        _advance(s_knots, alpha[idx], beta[idx], taus[idx] / steps, int(steps), state, n_jobs)
        y[idx, 0] = state[0] + 1j * state[1]
        y[idx, 1] = state[2] + 1j * state[3]
    return y, np.array(n)


# --------------------------------------------------------------------------
# LZ model
# --------------------------------------------------------------------------

def _lz_coefficients(params: ModelParams, protocol: Protocol):
    if not protocol.is_linear:
        raise ValueError("the LZ model is driven by linear protocols only")
    s = np.array([0.0, 1.0])
    alpha = params.Delta * np.array([[protocol.lambda_i, protocol.lambda_f]])
    beta = np.full((1, 2), params.J)
    return s, alpha, beta


def phase_shift(s_knots, alpha, beta) -> np.ndarray:
    """Duration increment that advances the interference phase by pi.

    The first-order adiabatic amplitude carries ``exp(2i tau int E ds)``;
    averaging ``p(tau)`` and ``p(tau + shift)`` cancels that cross term.
    """
    return math.pi / (2.0 * models.energy_integral(s_knots, alpha, beta))


def _check_drift(drift, n, spec, what):
    worst = float(np.max(drift))
    if not worst <= spec.norm_drift_tol:  # also catches NaN from an unstable step
        steps = int(np.max(n))
        raise IntegratorError(
            f"{what}: norm drift {worst:.3e} exceeds tolerance {spec.norm_drift_tol:.1e} "
            f"after {steps} RK4 steps", drift=worst, steps=steps)
    return worst


def evolve_lz(params: ModelParams, protocol: Protocol, spec: IntegratorSpec = DEFAULT_INTEGRATOR,
              phase_average: bool = False) -> EvolutionResult:
    """Evolve the LZ model from its instantaneous ground state.

    ``p_excite`` is the overlap probability with the upper eigenstate at the
    final control value. With ``phase_average`` it is the mean of the runs
    at ``tau`` and ``tau`` plus half an interference period.
    """
    s, alpha, beta = _lz_coefficients(params, protocol)
    th_i = float(models.lz_theta(params, protocol.lambda_i))
    th_f = float(models.lz_theta(params, protocol.lambda_f))
    y0 = np.array([[-math.sin(th_i), math.cos(th_i)]], dtype=complex)
    taus = [protocol.tau]
    if phase_average:
        taus.append(protocol.tau + float(phase_shift(s, alpha, beta)[0]))
        alpha = np.repeat(alpha, 2, axis=0)
        beta = np.repeat(beta, 2, axis=0)
        y0 = np.repeat(y0, 2, axis=0)
    y, n = propagate(s, alpha, beta, taus, y0, spec)
    # <+(lam_f)| = cos(theta) <up| + sin(theta) <down|
    amp = math.cos(th_f) * y[:, 0] + math.sin(th_f) * y[:, 1]
    with np.errstate(over="ignore", invalid="ignore"):
        p = np.abs(amp) ** 2
        drift = np.abs(np.sum(np.abs(y) ** 2, axis=1) - 1.0)
    worst = _check_drift(drift, n, spec, "LZ evolution")
    return EvolutionResult(ModeState(complex(y[0, 0]), complex(y[0, 1])), float(np.mean(p)),
                           worst, int(n[0]), tuple(float(x) for x in p))


def excess_work_lz(params: ModelParams, protocol: Protocol,
                   spec: IntegratorSpec = DEFAULT_INTEGRATOR, phase_average: bool = False) -> float:
    res = evolve_lz(params, protocol, spec, phase_average)
    return 2.0 * float(models.lz_energy(params, protocol.lambda_f)) * res.p_excite


# --------------------------------------------------------------------------
# TI chain
# --------------------------------------------------------------------------

def _ti_batch(params, protocol, k, phase_average):
    k = np.atleast_1d(np.asarray(k, dtype=float))
    s, a, b = models.mode_coefficients(params, protocol, k)
    # initial ground state (cos th_k, sin th_k), final excited state (sin th_k, -cos th_k)
    th_i = 0.5 * np.arctan2(b[:, 0], a[:, 0])
    th_f = 0.5 * np.arctan2(b[:, -1], a[:, -1])
    eps_f = np.hypot(a[:, -1], b[:, -1])
    alpha, beta = -a, -b
    y0 = np.stack([np.cos(th_i), np.sin(th_i)], axis=1).astype(complex)
    taus = np.full(k.size, protocol.tau)
    if phase_average:
        taus = np.concatenate([taus, protocol.tau + phase_shift(s, alpha, beta)])
        alpha = np.concatenate([alpha, alpha])
        beta = np.concatenate([beta, beta])
        y0 = np.concatenate([y0, y0])
    return k, s, alpha, beta, taus, y0, th_f, eps_f


def _ti_probabilities(y, th_f, m):
    """Pair-creation probabilities and norm drift, shaped ``(runs, m)``."""
    th = np.tile(th_f, y.shape[0] // m)
    amp = np.sin(th) * y[:, 0] - np.cos(th) * y[:, 1]
    with np.errstate(over="ignore", invalid="ignore"):
        p = (np.abs(amp) ** 2).reshape(-1, m)
        drift = np.abs(np.sum(np.abs(y) ** 2, axis=1) - 1.0).reshape(-1, m)
    return p, drift


def evolve_ti_mode(params: ModelParams, protocol: Protocol, k: float,
                   spec: IntegratorSpec = DEFAULT_INTEGRATOR,
                   phase_average: bool = False) -> EvolutionResult:
    """Evolve one momentum mode of the TI chain from its ground state.

    ``p_excite`` is the probability of creating the ``(k, -k)`` fermion pair.
    """
    kk, s, alpha, beta, taus, y0, th_f, _ = _ti_batch(params, protocol, [k], phase_average)
    y, n = propagate(s, alpha, beta, taus, y0, spec)
    p, drift = _ti_probabilities(y, th_f, 1)
    worst = _check_drift(drift, n, spec, f"TI mode k={k!r}")
    return EvolutionResult(ModeState(complex(y[0, 0]), complex(y[0, 1])), float(p.mean()),
                           worst, int(n[0]), tuple(float(x) for x in p[:, 0]))


@dataclass(frozen=True)
class ChainProbabilities:
    """Mode-resolved outcome of one chain evolution.

    ``p`` holds the probabilities at ``tau``; with phase averaging
    ``p_shifted`` holds those at each mode's shifted duration.
    """

    k: np.ndarray
    eps_f: np.ndarray
    p: np.ndarray
    p_shifted: Optional[np.ndarray]
    norm_drift: np.ndarray
    steps: np.ndarray

    def mode_probabilities(self, phase_average: bool = False) -> np.ndarray:
        if phase_average:
            if self.p_shifted is None:
                raise ValueError("evolution was run without phase averaging")
            return 0.5 * (self.p + self.p_shifted)
        return self.p

    def work(self, phase_average: bool = False) -> float:
        """``sum_k 2 eps_k(lam_f) p_k`` in ascending k with compensated summation."""
        contrib = 2.0 * self.eps_f * self.mode_probabilities(phase_average)
        return math.fsum(contrib.tolist())


def chain_probabilities(params: ModelParams, protocol: Protocol,
                        spec: IntegratorSpec = DEFAULT_INTEGRATOR, n_jobs: int = 1,
                        phase_average: bool = False) -> ChainProbabilities:
    """Evolve every positive-momentum mode of the chain.

    Raises
    ------
    IntegratorError
        Naming the first (lowest) momentum whose norm drift exceeds the
        tolerance.
    """
    N = params.require_chain()
    k = models.momenta(N)
    k, s, alpha, beta, taus, y0, th_f, eps_f = _ti_batch(params, protocol, k, phase_average)
    y, n = propagate(s, alpha, beta, taus, y0, spec, n_jobs=n_jobs)
    p, drift = _ti_probabilities(y, th_f, k.size)
    drift = drift.max(axis=0)
    steps = n.reshape(-1, k.size).max(axis=0)
    bad = np.nonzero(~(drift <= spec.norm_drift_tol))[0]
    if bad.size:
        i = bad[0]
        raise IntegratorError(
            f"TI mode k={k[i]!r}: norm drift {drift[i]:.3e} exceeds tolerance "
            f"{spec.norm_drift_tol:.1e} after {int(steps[i])} RK4 steps",
            drift=float(drift[i]), steps=int(steps[i]))
    return ChainProbabilities(k, eps_f, p[0], p[1] if phase_average else None, drift, steps)


def excess_work_ti(params: ModelParams, protocol: Protocol,
                   spec: IntegratorSpec = DEFAULT_INTEGRATOR, n_jobs: int = 1,
                   phase_average: bool = False):
    """Exact excess work of the TI chain, summed over positive momenta.

    Returns
    -------
    total : float
        ``sum_k 2 eps_k(lam_f) p_k``, accumulated in ascending k with
        compensated summation.
    per_mode : list of ModeWork
    """
    res = chain_probabilities(params, protocol, spec, n_jobs, phase_average)
    p = res.mode_probabilities(phase_average)
    modes = [ModeWork(float(res.k[i]), float(p[i]), float(res.eps_f[i]),
                      float(res.norm_drift[i])) for i in range(res.k.size)]
    return res.work(phase_average), modes
