import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plasmonqed.core import (
    PulseShape,
    TimeSeries,
    gaussian_spectrum,
    make_params,
    params_from_purcell,
)
from plasmonqed.scatter import (
    pulse_averaged_rt,
    reflection_coefficient,
    scatter_point,
    scatter_spectrum,
)

P20 = params_from_purcell(20.0)


def test_resonant_reflection_p20():
    """On resonance r = -P/(1+P); for P=20 that is R = (20/21)^2."""
    pt = scatter_point(P20, 0.0)
    assert pt.r == pytest.approx(-20.0 / 21.0, abs=1e-15)
    assert pt.reflectance == pytest.approx(400.0 / 441.0, abs=1e-15)
    assert pt.transmittance == pytest.approx(1.0 / 441.0, abs=1e-15)
    assert pt.loss == pytest.approx(40.0 / 441.0, abs=1e-12)


def test_transmission_is_one_plus_r():
    for delta in (-3.0, -0.2, 0.0, 0.7, 5.0):
        pt = scatter_point(P20, delta)
        assert pt.t == pytest.approx(1.0 + pt.r, abs=1e-15)


def test_lorentzian_half_width():
    r0 = scatter_point(P20, 0.0).reflectance
    for sign in (-1.0, 1.0):
        half = scatter_point(P20, sign * 0.5).reflectance
        assert half == pytest.approx(r0 / 2.0, rel=1e-12)


def test_perfect_mirror_limit():
    p = make_params(1.0, 0.0, infinite_p=True)
    pt = scatter_point(p, 0.0)
    assert pt.reflectance == pytest.approx(1.0, abs=1e-15)
    assert abs(pt.t) < 1e-15
    assert pt.loss == pytest.approx(0.0, abs=1e-15)


def test_decoupled_emitter_never_reflects():
    p = make_params(0.0, 1.0)
    for delta in (0.0, 1.0, -4.0):
        pt = scatter_point(p, delta)
        assert pt.reflectance == 0.0
        assert pt.transmittance == pytest.approx(1.0)


@given(st.floats(0.01, 1e3), st.floats(-20.0, 20.0))
def test_loss_identity(purcell, delta):
    """1 - R - T = 2R/P at every detuning and Purcell factor."""
    pt = scatter_point(params_from_purcell(purcell), delta)
    kappa = 1.0 - pt.reflectance - pt.transmittance
    assert kappa == pytest.approx(2.0 * pt.reflectance / purcell, abs=1e-12)


@given(st.floats(0.01, 1e3))
def test_resonant_reflectance_closed_form(purcell):
    pt = scatter_point(params_from_purcell(purcell), 0.0)
    assert pt.reflectance == pytest.approx((1.0 + 1.0 / purcell) ** -2,
                                           rel=1e-12)


def test_reflection_coefficient_uses_params_delta():
    p = params_from_purcell(20.0, delta=0.5)
    assert reflection_coefficient(p) == reflection_coefficient(p, 0.5)


def test_scatter_spectrum_orders_points():
    deltas = np.linspace(-2.0, 2.0, 41)
    points = scatter_spectrum(P20, deltas)
    assert [pt.delta for pt in points] == pytest.approx(list(deltas))


def test_scatter_spectrum_rejects_empty():
    with pytest.raises(ValueError):
        scatter_spectrum(P20, [])


class TestPulseAverage:
    def test_gaussian_average_frozen_values(self):
        """Quadrature reference for the wavepacket simulations.

        Values pinned from adaptive quadrature at abs tol 1e-8; they obey
        T = 1 - (1 + 2/P) R exactly because the per-point identities survive
        the averaging.
        """
        r_bar, t_bar, k_bar = pulse_averaged_rt(P20, gaussian_spectrum(0.1))
        assert r_bar == pytest.approx(0.8744131733195056, abs=1e-8)
        assert t_bar == pytest.approx(0.03814550935672937, abs=1e-8)
        assert k_bar == pytest.approx(0.08744131733195068, abs=1e-8)
        assert k_bar == pytest.approx(2.0 * r_bar / 20.0, abs=1e-9)
        assert r_bar + t_bar + k_bar == pytest.approx(1.0, abs=1e-9)

    def test_narrowband_limit_matches_point(self):
        r_bar, t_bar, _ = pulse_averaged_rt(P20, gaussian_spectrum(0.001))
        pt = scatter_point(P20, 0.0)
        assert r_bar == pytest.approx(pt.reflectance, abs=1e-5)
        assert t_bar == pytest.approx(pt.transmittance, abs=1e-5)

    def test_single_sample_is_monochromatic(self):
        mono = PulseShape(TimeSeries(0.3, 1.0, np.ones(1, dtype=complex)))
        r_bar, t_bar, k_bar = pulse_averaged_rt(P20, mono)
        pt = scatter_point(P20, 0.3)
        assert (r_bar, t_bar, k_bar) == pytest.approx(
            (pt.reflectance, pt.transmittance, pt.loss))

    def test_detuned_spectrum(self):
        r_bar, _, _ = pulse_averaged_rt(P20, gaussian_spectrum(0.05, center=2.0))
        # reflectance near the point value at delta = 2
        assert r_bar == pytest.approx(scatter_point(P20, 2.0).reflectance,
                                      rel=2e-2)

    def test_requires_unit_norm(self):
        sp = gaussian_spectrum(0.1)
        flux = PulseShape(sp.samples, "flux")
        with pytest.raises(ValueError, match="unit"):
            pulse_averaged_rt(P20, flux)
