import math

import numpy as np
import pytest

from anneal_phases import models
from anneal_phases.models import ModelParams, Protocol


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(J=0.0)
    with pytest.raises(ValueError):
        ModelParams(Delta=-1.0)
    with pytest.raises(ValueError):
        ModelParams(N=7)
    with pytest.raises(ValueError):
        ModelParams(N=0)
    with pytest.raises(ValueError):
        ModelParams(a=2.0)
    assert ModelParams(N=4.0).N == 4


def test_scaled_time_round_trip():
    p = ModelParams(J=2.0, Delta=3.0, N=50)
    tau = np.array([1.0, 10.0, 123.4])
    np.testing.assert_allclose(p.tau_from_lz_scaled(p.lz_scaled_time(tau)), tau, rtol=1e-15)
    np.testing.assert_allclose(p.tau_from_ti_scaled(p.ti_scaled_time(tau)), tau, rtol=1e-15)


def test_lz_theta_examples():
    assert models.lz_theta(ModelParams(1, 1), 0.0) == pytest.approx(math.pi / 4)
    assert models.lz_theta(ModelParams(1, 10), 1e12) == pytest.approx(0.0, abs=1e-12)
    assert models.lz_theta(ModelParams(1, 10), 0.5) == pytest.approx(0.5 * math.atan2(1, 5),
                                                                      rel=1e-15)
    assert models.lz_theta(ModelParams(1, 10), 0.5) == pytest.approx(0.098698, abs=1e-6)


def test_lz_energy_examples():
    assert models.lz_energy(ModelParams(1, 10), 0.0) == 1.0
    assert models.lz_energy(ModelParams(1, 10), 0.5) == pytest.approx(math.sqrt(26))
    assert models.lz_energy(ModelParams(2, 1), 0.0) == 2.0


def test_lz_energy_identity():
    p = ModelParams(1.3, 4.2)
    lam = np.linspace(-3, 3, 101)
    e = models.lz_energy(p, lam)
    np.testing.assert_allclose(e**2 - (p.Delta * lam) ** 2, p.J**2, rtol=1e-12)
    assert np.all(e >= p.J)


def test_ti_dispersion_examples():
    p = ModelParams(1, 1)
    assert models.ti_dispersion(p, 0.0, math.pi / 2) == pytest.approx(math.sqrt(2))
    assert models.ti_dispersion(p, 0.0, 1e-9) == pytest.approx(0.0, abs=1e-8)
    assert models.ti_dispersion(p, -1.0, math.pi) == pytest.approx(1.0)


def test_ti_theta_examples():
    p = ModelParams(1, 1)
    assert models.ti_theta_k(p, 1e9, 1.0) == pytest.approx(0.0, abs=1e-8)
    assert models.ti_theta_k(p, 0.0, math.pi / 2) == pytest.approx(math.pi / 8)
    assert models.ti_theta_k(p, 0.3, 1e-12) == pytest.approx(0.0, abs=1e-11)


def test_lz_mapping_examples():
    p = ModelParams(1.0, 2.0)
    jk, shift = models.lz_mapping(p, math.pi / 2)
    assert jk == pytest.approx(1.0) and shift == pytest.approx(0.5)
    jk, shift = models.lz_mapping(p, 1e-6)
    assert jk == pytest.approx(1e-6) and shift == pytest.approx(0.0, abs=1e-12)
    jk, shift = models.lz_mapping(p, math.pi)
    assert jk == pytest.approx(0.0, abs=1e-15) and shift == pytest.approx(1.0)


def test_mapping_reproduces_dispersion():
    p = ModelParams(0.7, 1.9)
    lam = np.linspace(-2, 2, 41)[:, None]
    k = np.linspace(0, math.pi, 37)[None, :]
    jk, shift = models.lz_mapping(p, k)
    mapped = np.hypot(p.Delta * (lam + shift), jk)
    np.testing.assert_allclose(models.ti_dispersion(p, lam, k), mapped, rtol=1e-12, atol=1e-15)


def test_momentum_grid():
    k = models.momenta(16)
    assert k.size == 8
    assert k[0] == pytest.approx(math.pi / 16)
    assert np.all(np.diff(k) > 0) and k[-1] < math.pi
    with pytest.raises(ValueError):
        models.momenta(5)


def test_theta_monotone_in_lambda():
    p = ModelParams(1, 1)
    lam = np.linspace(-5, 5, 400)
    for k in (0.1, 1.0, 2.5):
        assert np.all(np.diff(models.ti_theta_k(p, lam, k)) <= 0)
    assert np.all(np.diff(models.lz_theta(p, lam)) < 0)


def test_protocol_defaults_and_validation():
    sym = Protocol.symmetric(10.0)
    assert (sym.lambda_i, sym.lambda_f) == (-0.5, 0.5)
    half = Protocol(tau=1.0, shape=models.LINEAR_HALF)
    assert (half.lambda_i, half.lambda_f) == (-1.0, 0.0)
    with pytest.raises(ValueError):
        Protocol(tau=0.0)
    with pytest.raises(ValueError):
        Protocol(tau=1.0, shape="cubic")
    with pytest.raises(ValueError):
        Protocol.tabulated(1.0, [0, 0.5, 0.4], [1, 1, 1], [1, 1, 1])
    with pytest.raises(ValueError):
        Protocol.tabulated(1.0, [0, 1], [1, 1, 1], [1, 1])


def test_tabulated_normalized_grid():
    pr = Protocol.tabulated(5.0, [2.0, 3.0, 6.0], [3, 1, 0], [0, 1, 2])
    assert pr.s_knots == (0.0, 0.25, 1.0)
    with pytest.raises(ValueError):
        pr.delta_lambda


def test_mode_coefficients_linear():
    p = ModelParams(1.0, 2.0, N=8)
    pr = Protocol.symmetric(1.0)
    k = models.momenta(8)
    s, a, b = models.mode_coefficients(p, pr, k)
    np.testing.assert_allclose(np.hypot(a[:, -1], b[:, -1]), models.ti_dispersion(p, 0.5, k))
    np.testing.assert_allclose(models.mode_energy(p, pr, k, 0.5)[:, ...],
                               models.ti_dispersion(p, 0.0, k)[:, None].ravel())


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_energy_integral_matches_quadrature():
    from scipy.integrate import quad

    rng = np.random.default_rng(3)
    for _ in range(20):
        s = np.sort(np.r_[0.0, rng.random(3), 1.0])
        a = rng.normal(size=(1, 5))
        b = rng.normal(size=(1, 5)) * 10 ** rng.uniform(-4, 0)
        exact = models.energy_integral(s, a, b)[0]
        ref = 0.0
        for q in range(4):
            pts = None
            if a[0, q] * a[0, q + 1] < 0:
                pts = [s[q] - a[0, q] * (s[q + 1] - s[q]) / (a[0, q + 1] - a[0, q])]
            ref += quad(lambda x: np.hypot(np.interp(x, s, a[0]), np.interp(x, s, b[0])),
                        s[q], s[q + 1], points=pts, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        assert exact == pytest.approx(ref, rel=1e-10)


def test_energy_integral_degenerate_pieces():
    # constant piece, and a piece where both coefficients vanish at one point
    assert models.energy_integral([0, 1], [[2, 2]], [[1, 1]])[0] == pytest.approx(math.sqrt(5))
    assert models.energy_integral([0, 1], [[-0.5, 0.5]], [[0, 0]])[0] == pytest.approx(0.25)
    assert models.energy_integral([0, 1], [[-1, 1]], [[-1, 1]])[0] == pytest.approx(
        math.sqrt(2) / 2)


def test_spectrum():
    sp = models.Spectrum(ModelParams(1, 1, N=4), np.array([-0.5, 0.0, 0.5]))
    assert sp.eps_k.shape == (2, 3)
    assert sp.energy[1] == 1.0
