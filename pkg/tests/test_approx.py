import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anneal_phases import approx, dynamics, models
from anneal_phases.models import ModelParams, Protocol

LZ10 = ModelParams(J=1.0, Delta=10.0)
CHAIN = ModelParams(J=1.0, Delta=1.0, N=100)


def test_lzf_values():
    assert approx.lzf_probability(LZ10, 10.0) == pytest.approx(math.exp(-math.pi))
    np.testing.assert_allclose(approx.lzf_probability(LZ10, [1e-9, 1e9]), [1.0, 0.0], atol=1e-8)
    with pytest.raises(ValueError):
        approx.lzf_probability(LZ10, 0.0)


def test_lzf_matches_exact_in_fast_window():
    for scaled in (0.1, 0.3, 1.0):
        tau = LZ10.tau_from_lz_scaled(scaled)
        exact = dynamics.evolve_lz(LZ10, Protocol.symmetric(tau)).p_excite
        assert approx.lzf_probability(LZ10, tau) == pytest.approx(exact, rel=0.1)


def test_apt_lz_matches_averaged_exact_in_slow_window():
    for scaled in (10.0, 20.0, 50.0):
        tau = LZ10.tau_from_lz_scaled(scaled)
        proto = Protocol.symmetric(tau)
        exact = dynamics.evolve_lz(LZ10, proto, phase_average=True).p_excite
        assert approx.apt_lz_probability(LZ10, proto) == pytest.approx(exact, rel=0.05)


def test_apt_full_brackets_average():
    proto = Protocol.symmetric(200.0)
    taus = np.linspace(200.0, 210.0, 400)
    full = approx.apt_lz_probability(LZ10, proto, taus, approx.FULL)
    avg = approx.apt_lz_probability(LZ10, proto, taus, approx.AVERAGED)
    assert np.all(full <= 2 * avg + 1e-18) and np.all(full >= 0)
    assert np.mean(full / avg) == pytest.approx(1.0, abs=0.05)
    with pytest.raises(ValueError):
        approx.apt_lz_probability(LZ10, proto, phase_mode="mean")


def test_apt_ti_is_lz_under_mapping():
    proto = Protocol.symmetric(300.0)
    for k in models.momenta(12):
        jk, shift = models.lz_mapping(CHAIN, k)
        lz_proto = Protocol(tau=300.0, lambda_i=-0.5 + shift, lambda_f=0.5 + shift)
        for mode in approx.PHASE_MODES:
            a = approx.apt_ti_probability(CHAIN, proto, k, phase_mode=mode)
            b = approx.apt_lz_probability(ModelParams(J=jk, Delta=1.0), lz_proto, phase_mode=mode)
            assert a == pytest.approx(b, rel=1e-10)
    assert approx.apt_ti_probability(CHAIN, proto, math.pi) < 1e-30


def test_schedule_apt_reduces_to_linear():
    proto = Protocol.symmetric(150.0)
    s = np.linspace(0.0, 1.0, 5)
    field = CHAIN.Delta * (-0.5 + s) + CHAIN.J
    table = Protocol.tabulated(150.0, s, field, np.full_like(s, CHAIN.J))
    k = models.momenta(20)
    for mode in approx.PHASE_MODES:
        a = approx.apt_ti_probability(CHAIN, proto, k, phase_mode=mode)
        b = approx.apt_ti_probability(CHAIN, table, k, phase_mode=mode)
        np.testing.assert_allclose(b, a, rtol=1e-9)


def test_kzm_scaling_and_excitations():
    proto = Protocol.symmetric(1.0)
    w1, w4 = approx.kzm_work(CHAIN, proto, [100.0, 400.0], 100)
    assert w1 / w4 == pytest.approx(2.0)
    n = approx.kzm_excitations(CHAIN, proto, 100.0, 100)
    assert n * 2 * CHAIN.Delta * 0.5 == pytest.approx(w1, rel=1e-15)
    assert n == pytest.approx(100 / (4 * math.pi) * 0.1)


def test_exact_integral_approaches_kzm():
    proto = Protocol.symmetric(1.0)
    ratios = [approx.exact_integral_work(CHAIN, proto, tau, 100)
              / approx.kzm_work(CHAIN, proto, tau, 100) for tau in (30.0, 300.0, 3e3)]
    assert all(r >= 1.0 for r in ratios)
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[2] == pytest.approx(1.0, abs=0.02)


def test_lowest_mode_rate():
    proto = Protocol.symmetric(1.0)
    w = approx.lzf_lowest_mode_work(CHAIN, proto, np.array([100.0, 200.0]), 100)
    slope = math.log(w[1] / w[0]) / 100.0
    assert slope == pytest.approx(-math.pi * (math.pi / 100) ** 2, rel=1e-12)


def test_shape_function_value():
    assert approx.apt_shape_function(1.0) == pytest.approx(4.422607, rel=1e-6)
    with pytest.raises(ValueError):
        approx.apt_shape_function(0.0)


def test_apt_discrete_matches_continuous():
    proto = Protocol.symmetric(1.0)
    cont = approx.apt_ti_work(CHAIN, proto, 2e4, 1000)
    disc = approx.apt_ti_work(CHAIN, proto, 2e4, 1000, approx.DISCRETE)
    assert disc == pytest.approx(cont, rel=1e-9)
    with pytest.raises(ValueError):
        approx.apt_ti_work(CHAIN, proto, 1.0, 10, mode="riemann")


def test_hlz_limits():
    assert approx.hlz_probability(LZ10, 1e-5) == pytest.approx(0.5, abs=1e-3)
    x = 400.0
    assert approx.hlz_probability(LZ10, 10 * x) == pytest.approx(1 / (16 * x * x), rel=0.01)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e4))
def test_hlz_is_a_probability(x):
    p = approx._hlz_x(x)
    assert 0.0 <= p <= 0.5 + 1e-12


def test_hlz_matches_half_sweep_integration():
    for scaled in (0.5, 5.0, 50.0):
        tau = scaled * LZ10.Delta / LZ10.J**2
        exact = dynamics.evolve_lz(LZ10, Protocol.half(tau), phase_average=True).p_excite
        assert approx.hlz_probability(LZ10, tau) == pytest.approx(exact, rel=0.05)


def test_half_constant():
    k = approx.half_kzm_constant()
    assert 1.0 / (8.0 * k) == pytest.approx(1.049, abs=0.005)


def test_half_work_scalings():
    w = approx.kzm_half_work(CHAIN, np.array([10.0, 20.0]), 100)
    assert w[0] / w[1] == pytest.approx(2.0)
    a = approx.apt_half_work(CHAIN, np.array([10.0, 20.0]), 100)
    assert a[0] / a[1] == pytest.approx(4.0)


def test_lrt_variants_and_averaging():
    proto = Protocol.symmetric(1.0)
    taus = np.array([1e3, 2e3])
    for variant in (approx.LRT_PRINTED, approx.LRT_RELAXATION):
        w = approx.lrt_work(CHAIN, proto, taus, 100, variant=variant)
        assert w[0] / w[1] == pytest.approx(4.0)
    full = approx.lrt_work(CHAIN, proto, taus, 100, phase_mode=approx.FULL)
    assert np.all(full <= 2 * approx.lrt_work(CHAIN, proto, taus, 100) + 1e-15)
    with pytest.raises(ValueError):
        approx.lrt_work(CHAIN, proto, 1.0, 100, variant="other")


def test_relaxation_function_at_zero():
    proto = Protocol.symmetric(1.0)
    k = models.momenta(100)
    e = models.ti_dispersion(CHAIN, -0.5, k)
    ref = np.sum(np.sin(k) ** 2 / e**3)
    assert approx.relaxation_function(CHAIN, proto, 0.0, 100) == pytest.approx(ref, rel=1e-12)


def test_approx_curve_container():
    curve = approx.ApproxCurve.evaluate("LZF", lambda t: approx.lzf_probability(LZ10, t),
                                        [1.0, 2.0])
    assert curve.as_array().shape == (2, 2)
    with pytest.raises(ValueError):
        approx.ApproxCurve("nope", (1.0,), (1.0,))
    with pytest.raises(ValueError):
        approx.ApproxCurve("LZF", (1.0,), (-1.0,))
