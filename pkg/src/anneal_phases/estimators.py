"""scikit-learn style wrappers around the functional API.

Nothing is learned from data: ``fit`` validates hyper-parameters and the
input shape, and builds the model objects that ``predict`` evaluates. The
wrappers exist so work curves and regime maps plug into tooling built on
``get_params``/``set_params`` (grid sweeps, cloning, pipelines).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import approx, crossover, dynamics
from .models import LINEAR_HALF, LINEAR_SYMMETRIC, ModelParams, Protocol

_LZ_METHODS = ("exact", "lzf", "apt", "hlz")
_TI_METHODS = ("exact", "kzm", "lzf-lowest-mode", "apt", "apt-discrete", "lrt", "kzm-half",
               "apt-half", "exact-integral")


class ExcessWorkCurve(RegressorMixin, BaseEstimator):
    """Excess work as a function of duration.

    Parameters
    ----------
    model : {"lz", "ti"}
    method : str
        ``"exact"`` for the RK4 integrator or the name of an approximation.
    J, delta_over_j : float
    n_spins : int
        Chain length (TI only).
    protocol : {"linear-symmetric", "linear-half"}
    phase_mode : {"averaged", "full"}
    n_jobs : int
        Threads used by the exact TI integrator.

    Examples
    --------
    >>> curve = ExcessWorkCurve(model="ti", method="kzm", n_spins=100).fit([[1e3]])
    >>> curve.predict([[1e3], [4e3]]).round(4)
    array([0.2516, 0.1258])
    """

    def __init__(self, model="ti", method="exact", J=1.0, delta_over_j=1.0, n_spins=100,
                 protocol=LINEAR_SYMMETRIC, phase_mode=approx.AVERAGED, n_jobs=1):
        self.model = model
        self.method = method
        self.J = J
        self.delta_over_j = delta_over_j
        self.n_spins = n_spins
        self.protocol = protocol
        self.phase_mode = phase_mode
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError(f"X must have a single column of durations, got {X.shape[1]}")
        methods = _LZ_METHODS if self.model == "lz" else _TI_METHODS
        if self.model not in ("lz", "ti"):
            raise ValueError(f"model must be 'lz' or 'ti', got {self.model!r}")
        if self.method not in methods:
            raise ValueError(f"method {self.method!r} not available for model {self.model!r}")
        if self.protocol not in (LINEAR_SYMMETRIC, LINEAR_HALF):
            raise ValueError(f"unsupported protocol {self.protocol!r}")
        if self.phase_mode not in approx.PHASE_MODES:
            raise ValueError(f"phase_mode must be one of {approx.PHASE_MODES}")
        N = int(self.n_spins) if self.model == "ti" else None
        self.params_ = ModelParams(J=self.J, Delta=self.delta_over_j * self.J, N=N)
        self.protocol_ = Protocol(tau=1.0, shape=self.protocol)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("X must have a single column of durations")
        return np.array([self._one(float(t)) for t in X[:, 0]])

    def _one(self, tau):
        p, proto = self.params_, self.protocol_.with_tau(tau)
        avg = self.phase_mode == approx.AVERAGED
        if self.model == "lz":
            e_f = 2.0 * float(np.hypot(p.Delta * proto.lambda_f, p.J))
            if self.method == "exact":
                return dynamics.excess_work_lz(p, proto, phase_average=avg)
            if self.method == "lzf":
                return e_f * approx.lzf_probability(p, tau, proto.delta_lambda)
            if self.method == "apt":
                return e_f * approx.apt_lz_probability(p, proto, tau, self.phase_mode)
            return e_f * approx.hlz_probability(p, tau, proto.lambda_i)
        N = p.N
        if self.method == "exact":
            return dynamics.excess_work_ti(p, proto, n_jobs=self.n_jobs, phase_average=avg)[0]
        table = {
            "kzm": lambda: approx.kzm_work(p, proto, tau, N),
            "lzf-lowest-mode": lambda: approx.lzf_lowest_mode_work(p, proto, tau, N),
            "apt": lambda: approx.apt_ti_work(p, proto, tau, N),
            "apt-discrete": lambda: approx.apt_ti_work(p, proto, tau, N, approx.DISCRETE,
                                                       self.phase_mode),
            "lrt": lambda: approx.lrt_work(p, proto, tau, N, phase_mode=self.phase_mode),
            "kzm-half": lambda: approx.kzm_half_work(p, tau, N),
            "apt-half": lambda: approx.apt_half_work(p, tau, N),
            "exact-integral": lambda: approx.exact_integral_work(p, proto, tau, N),
        }
        return float(table[self.method]())


class RegimeClassifier(ClassifierMixin, BaseEstimator):
    """Regime label for rows ``[N, tau]``.

    Parameters
    ----------
    J, delta_over_j : float
    protocol_kind : {"crossing", "half"}
    method : {"numeric-root", "asymptotic"}
    """

    def __init__(self, J=1.0, delta_over_j=1.0, protocol_kind=crossover.CROSSING,
                 method=crossover.NUMERIC_ROOT):
        self.J = J
        self.delta_over_j = delta_over_j
        self.protocol_kind = protocol_kind
        self.method = method

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 2:
            raise ValueError("X must have two columns: N and tau")
        if self.protocol_kind == crossover.CROSSING:
            labels = (crossover.RegimeLabel.KZM, crossover.RegimeLabel.LZF,
                      crossover.RegimeLabel.APT)
        elif self.protocol_kind == crossover.HALF:
            labels = (crossover.RegimeLabel.KZM_HALF, crossover.RegimeLabel.APT_HALF)
        else:
            raise ValueError(f"unknown protocol_kind {self.protocol_kind!r}")
        if self.method not in crossover.METHODS:
            raise ValueError(f"method must be one of {crossover.METHODS}")
        self.params_ = ModelParams(J=self.J, Delta=self.delta_over_j * self.J)
        self.classes_ = np.array([lab.value for lab in labels])
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 2:
            raise ValueError("X must have two columns: N and tau")
        out = []
        for n, tau in X:
            if n < 2 or n != int(n) or int(n) % 2:
                raise ValueError(f"N must be an even integer >= 2, got {n!r}")
            out.append(crossover.classify_regime(self.params_, int(n), float(tau),
                                                 self.protocol_kind, self.method).value)
        return np.array(out)
