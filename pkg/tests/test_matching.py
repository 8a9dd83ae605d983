import math

import numpy as np
import pytest

from app.errors import FrequencyMismatch, InputError, InvalidOrder
from app.matching import (
    PrototypeSpec,
    TransformerDesign,
    chebyshev_g_values,
    search_prototype,
    section_impedances,
    slope_parameters,
    synthesize,
)
from app.resonator import characteristic_impedance, flux_for_frequency
from app.snail import FluxBias

from .conftest import OPERATING_FREQUENCY

# (ripple_db, w) pair whose synthesis lands near the fabricated 87/59 ohm sections
FIXTURE_RIPPLE_DB = 0.5
FIXTURE_BANDWIDTH = 0.17


@pytest.fixture
def operating_flux(reference_array):
    return FluxBias(flux_for_frequency(reference_array, OPERATING_FREQUENCY))


def prototype(ripple_db=FIXTURE_RIPPLE_DB, w=FIXTURE_BANDWIDTH, **kwargs):
    return PrototypeSpec(
        order=2,
        ripple_db=ripple_db,
        fractional_bandwidth=w,
        center_frequency=OPERATING_FREQUENCY,
        **kwargs,
    )


class TestChebyshev:
    def test_second_order_table(self):
        g = chebyshev_g_values(2, 0.5)
        assert len(g) == 4
        assert g[0] == 1.0
        assert g[1] == pytest.approx(1.4029, abs=1e-4)
        assert g[2] == pytest.approx(0.7071, abs=1e-4)
        assert g[3] == pytest.approx(1.9841, abs=1e-4)

    @pytest.mark.parametrize("ripple_db", [0.01, 0.5, 3.0])
    def test_first_order_closed_form(self, ripple_db):
        beta = math.log(1 / math.tanh(ripple_db * math.log(10) / 40))
        gamma = math.sinh(beta / 2)
        g = chebyshev_g_values(1, ripple_db)
        assert g[1] == pytest.approx(2 / gamma, rel=1e-12)
        assert g[0] == g[2] == 1.0

    @pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
    def test_all_positive(self, order):
        assert all(g > 0 for g in chebyshev_g_values(order, 0.5))

    def test_deterministic(self):
        assert chebyshev_g_values(3, 1.0) == chebyshev_g_values(3, 1.0)

    @pytest.mark.parametrize("order", [0, -1, 1.5])
    def test_invalid_order(self, order):
        with pytest.raises(InvalidOrder):
            chebyshev_g_values(order, 0.5)

    def test_invalid_ripple(self):
        with pytest.raises(InputError):
            chebyshev_g_values(2, 0.0)


class TestPrototypeSpec:
    def test_fills_g_values(self):
        assert prototype().g_values == chebyshev_g_values(2, FIXTURE_RIPPLE_DB)

    @pytest.mark.parametrize("w", [0.0, 1.0, 1.5])
    def test_bandwidth_range(self, w):
        with pytest.raises(InputError):
            prototype(w=w)

    def test_explicit_g_values_length(self):
        with pytest.raises(InputError):
            prototype(g_values=(1.0, 1.0, 1.0))


class TestSlopeParameters:
    def test_unit_coefficients(self):
        proto = prototype(w=0.5, g_values=(1.0, 1.0, 1.0, 1.0))
        x, b = slope_parameters(proto, 50.0)
        assert x == pytest.approx(100.0)
        assert b == pytest.approx(0.04)

    def test_doubling_bandwidth_halves_both(self):
        x1, b1 = slope_parameters(prototype(w=0.1), 150.0)
        x2, b2 = slope_parameters(prototype(w=0.2), 150.0)
        assert x1 / x2 == pytest.approx(2.0, rel=1e-15)
        assert b1 / b2 == pytest.approx(2.0, rel=1e-15)

    def test_rejects_non_positive_load(self):
        with pytest.raises(InputError):
            slope_parameters(prototype(), 0.0)


class TestSectionImpedances:
    def test_quarter_wave_from_fabricated_device(self):
        design = section_impedances(x=926.8, b=0.026624, z0=50.0, r0_load=151.38)
        assert design.z_quarter == pytest.approx(87.0, abs=0.1)

    def test_half_wave_from_slope(self):
        b = math.pi / (2 * 59)
        assert b == pytest.approx(0.026624, abs=1e-6)
        design = section_impedances(x=926.8, b=0.026624, z0=50.0, r0_load=151.38)
        assert design.z_half == pytest.approx(59.0, abs=0.1)

    def test_jpa_round_trip(self):
        x = math.pi * 590 / 2
        design = section_impedances(x=x, b=0.02, z0=50.0, r0_load=150.0)
        assert design.z_jpa_target == pytest.approx(590.0, rel=1e-15)

    def test_exact_relations(self):
        rng = np.random.default_rng(3)
        for x, b, z0, r0 in rng.uniform(0.01, 1000, size=(20, 4)):
            design = section_impedances(x, b, z0, r0)
            assert design.z_quarter**2 == pytest.approx(z0 * r0, rel=1e-9)
            assert design.z_half * b == pytest.approx(math.pi / 2, rel=1e-12)
            assert design.z_jpa_target * math.pi == pytest.approx(2 * x, rel=1e-12)

    def test_scaling(self):
        base = section_impedances(900.0, 0.03, 50.0, 150.0)
        scaled = section_impedances(900.0, 0.03, 4 * 50.0, 4 * 150.0)
        assert scaled.z_quarter == pytest.approx(2 * base.z_quarter, rel=1e-15)

    def test_rejects_non_positive(self):
        with pytest.raises(InputError):
            section_impedances(900.0, -0.03, 50.0, 150.0)

    def test_from_sections(self):
        design = TransformerDesign.from_sections(87.0, 59.0, 828.9, OPERATING_FREQUENCY)
        assert design.r0_load == pytest.approx(87.0**2 / 50.0)
        assert design.z_half * design.b_slope == pytest.approx(math.pi / 2)


class TestSynthesize:
    def test_jpa_impedance_is_consistent(self, reference_array, operating_flux):
        design = synthesize(prototype(), reference_array, operating_flux)
        z_jpa = characteristic_impedance(reference_array, operating_flux)
        assert design.z_jpa_target == pytest.approx(z_jpa, rel=1e-9)
        assert design.center_frequency == OPERATING_FREQUENCY

    def test_detuned_resonator(self, reference_array):
        detuned = FluxBias(flux_for_frequency(reference_array, 6.0e9))
        with pytest.raises(FrequencyMismatch):
            synthesize(prototype(), reference_array, detuned)

    def test_fixture_pair_near_fabricated_sections(self, reference_array, operating_flux):
        design = synthesize(prototype(), reference_array, operating_flux)
        assert design.z_quarter == pytest.approx(87.0, rel=0.15)
        assert design.z_half == pytest.approx(59.0, rel=0.15)
        assert design.z_quarter == pytest.approx(88.82, abs=0.05)
        assert design.z_half == pytest.approx(59.59, abs=0.05)

    def test_deterministic(self, reference_array, operating_flux):
        first = synthesize(prototype(), reference_array, operating_flux)
        second = synthesize(prototype(), reference_array, operating_flux)
        assert first == second

    def test_negative_resistance_ratio_scales_quarter_wave(self, reference_array, operating_flux):
        base = synthesize(prototype(), reference_array, operating_flux)
        scaled = synthesize(
            prototype(negative_resistance_ratio=4.0), reference_array, operating_flux
        )
        assert scaled.z_quarter == pytest.approx(base.z_quarter / 2, rel=1e-12)
        assert scaled.z_half == base.z_half


class TestPrototypeSearch:
    def test_grid_search(self, reference_array, operating_flux):
        ripples = sorted(set(np.round(np.linspace(0.1, 3.0, 30), 3)) | {FIXTURE_RIPPLE_DB})
        bandwidths = sorted(set(np.round(np.linspace(0.05, 0.4, 36), 3)) | {FIXTURE_BANDWIDTH})
        ripple, w, error = search_prototype(
            reference_array,
            operating_flux,
            OPERATING_FREQUENCY,
            target_quarter=87.0,
            target_half=59.0,
            ripples=ripples,
            bandwidths=bandwidths,
        )
        assert error <= 0.15
        assert ripple in ripples and w in bandwidths

        fixture = synthesize(prototype(), reference_array, operating_flux)
        fixture_error = max(abs(fixture.z_quarter - 87) / 87, abs(fixture.z_half - 59) / 59)
        assert error <= fixture_error

    def test_empty_grid(self, reference_array, operating_flux):
        with pytest.raises(InputError):
            search_prototype(
                reference_array, operating_flux, OPERATING_FREQUENCY, 87.0, 59.0, [], [0.1]
            )
