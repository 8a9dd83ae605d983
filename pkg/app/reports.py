import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from app.errors import NumericalError, OutputWriteError  # noqa: E402
from app.matching import TransformerDesign  # noqa: E402
from app.network import GainProfile, bandwidth, profile_peaks  # noqa: E402
from app.resonator import (  # noqa: E402
    array_inductance,
    characteristic_impedance,
    coil_current_for_flux,
    external_quality_factor,
    resonance_frequency,
    tunability_curve,
)
from app.snail import FluxBias, SnailParams, g_coefficients, taylor_coefficients  # noqa: E402
from app.storage import DeviceSpecFile  # noqa: E402

logger = logging.getLogger(__name__)

# Stable element ids in SVG output
matplotlib.rcParams["svg.hashsalt"] = "snail-impa"

Rows = List[Tuple[float, ...]]

CHARACTERIZE_HEADER = (
    "flux_fraction",
    "phi_min_rad",
    "c2",
    "c3",
    "c4",
    "g3_Hz",
    "g4_Hz",
    "L_s_pH",
    "f0_GHz",
)
GAIN_HEADER = ("frequency_GHz", "gain_dB", "re_gamma", "im_gamma")


class ReportGenerator:
    """Builds CSV rows, JSON summaries and plots for one device spec"""

    def __init__(self, spec: DeviceSpecFile):
        self.spec = spec

    def characterization(
        self, fractions: Sequence[float], alpha: Optional[float] = None
    ) -> Tuple[Tuple[str, ...], Rows]:
        """Nonlinear coefficients and resonance across a flux grid"""
        array = self.spec.array
        cell = array.cell
        if alpha is not None:
            cell = SnailParams(alpha=alpha, n_large=cell.n_large, l_josephson=cell.l_josephson)
            array = type(array)(
                cell=cell,
                m_snails=array.m_snails,
                capacitance=array.capacitance,
                l_stray=array.l_stray,
            )

        rows = []
        for frac in fractions:
            flux = FluxBias(frac)
            try:
                coeffs = taylor_coefficients(flux, cell)
                g3, g4 = g_coefficients(flux, cell, array.m_snails, array.capacitance)
                l_s = cell.l_josephson / coeffs.c2
                f0 = resonance_frequency(array, flux)
            except NumericalError as e:
                raise NumericalError(f"flux fraction {frac}: {e}") from e
            rows.append(
                (frac, coeffs.phi_min, coeffs.c2, coeffs.c3, coeffs.c4, g3, g4, l_s * 1e12, f0 / 1e9)
            )
        return CHARACTERIZE_HEADER, rows

    def tuning(
        self, fractions: Sequence[float], include_coil: bool = True
    ) -> Tuple[Tuple[str, ...], Rows]:
        """Resonance frequency (and coil current) across a flux grid"""
        calibration = self.spec.coil_calibration if include_coil else None
        header = ("flux_fraction", "f0_GHz")
        if calibration:
            header = ("flux_fraction", "coil_current_mA", "f0_GHz")

        curve = tunability_curve(self.spec.array, fractions)
        rows = []
        for frac, f0 in curve.samples:
            if calibration:
                current = coil_current_for_flux(calibration, frac)
                rows.append((frac, current * 1e3, f0 / 1e9))
            else:
                rows.append((frac, f0 / 1e9))
        return header, rows

    @staticmethod
    def gain_rows(profile: GainProfile) -> Tuple[Tuple[str, ...], Rows]:
        rows = [
            (f / 1e9, g, gamma.real, gamma.imag)
            for f, g, gamma in zip(profile.frequencies, profile.gain_db, profile.reflection)
        ]
        return GAIN_HEADER, rows

    @staticmethod
    def gain_summary(
        profile: GainProfile, threshold_db: float, pump_strength: float, operating_flux: float
    ) -> Dict[str, float]:
        peak_frequency, peak_gain = profile.peak()
        return {
            "bandwidth_MHz": bandwidth(profile, threshold_db) / 1e6,
            "operating_flux": operating_flux,
            "peak_count": len(profile_peaks(profile, threshold_db)),
            "peak_frequency_GHz": peak_frequency / 1e9,
            "peak_gain_dB": peak_gain,
            "r_p_ohm": pump_strength,
            "threshold_dB": threshold_db,
        }

    def design_summary(
        self, design: TransformerDesign, flux: FluxBias
    ) -> Dict[str, float]:
        """Operating point and section values, in laboratory and SI units"""
        array = self.spec.array
        l_array = array_inductance(array, flux)
        z_jpa = characteristic_impedance(array, flux)
        summary = {
            "operating_flux": flux.frac,
            "center_frequency_GHz": design.center_frequency / 1e9,
            "center_frequency_Hz": design.center_frequency,
            "l_array_nH": l_array * 1e9,
            "l_array_H": l_array,
            "z_jpa_ohm": z_jpa,
            "x_ohm": design.x_slope,
            "b_S": design.b_slope,
            "b_mS": design.b_slope * 1e3,
            "z_quarter_ohm": design.z_quarter,
            "z_half_ohm": design.z_half,
            "q_ext_bare": external_quality_factor(array, flux, self.spec.source_impedance),
        }
        if design.r0_load:
            summary["r0_ohm"] = design.r0_load
            summary["q_ext_matched"] = external_quality_factor(array, flux, design.r0_load)
        return summary

    @staticmethod
    def plot_svg(
        filename,
        x: Sequence[float],
        series: Dict[str, Sequence[float]],
        xlabel: str,
        ylabel: str,
        title: str = "",
        hline: Optional[float] = None,
    ):
        """Line plot of the same data as the CSV, saved as SVG"""
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for label, values in series.items():
            ax.plot(x, values, label=label)
        if hline is not None and math.isfinite(hline):
            ax.axhline(hline, color="grey", linestyle="--", linewidth=0.8)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        try:
            fig.savefig(filename, format="svg", metadata={"Date": None})
        except OSError as e:
            raise OutputWriteError(filename, e) from e
        finally:
            plt.close(fig)
        logger.info("Saved plot %s", filename)
