import logging
import math
from typing import List, Optional

import numpy as np

from app import config
from app.errors import EmptyGrid, InputError
from app.matching import PrototypeSpec, TransformerDesign, synthesize
from app.network import (
    DeviceDesign,
    calibrate_pump,
    gain_profile,
    saturation_scaling,
)
from app.reports import ReportGenerator
from app.resonator import characteristic_impedance, flux_for_frequency
from app.snail import FluxBias, SnailParams, kerr_free_flux
from app.storage import DeviceSpecFile, Storage

logger = logging.getLogger(__name__)


def flux_grid(points: int, flux_min: float, flux_max: float) -> List[float]:
    if points < 1:
        raise EmptyGrid("empty grid")
    if points > 1 and not flux_min < flux_max:
        raise InputError(f"--flux-min must be below --flux-max, got {flux_min}, {flux_max}")
    return [float(frac) for frac in np.linspace(flux_min, flux_max, points)]


class CommandHandlers:
    """Bodies of the CLI commands; each returns nothing and writes its outputs"""

    def __init__(self, storage: Optional[Storage] = None):
        self.storage = storage or Storage()

    def load(self, spec_path) -> DeviceSpecFile:
        return self.storage.load_device_spec(spec_path)

    def emit_summary(self, summary: dict, summary_out=None, out=None):
        """JSON summary to ``summary_out``, else next to the CSV without sharing its stream"""
        if summary_out is not None:
            self.storage.write_text(self.storage.render_json(summary), summary_out)
        elif self.storage.is_file_target(out):
            self.storage.write_text(self.storage.render_json(summary))
        else:
            self.storage.write_stderr(self.storage.render_json(summary, compact=True))

    def handle_characterize(
        self,
        spec_path,
        points: int,
        flux_min: float,
        flux_max: float,
        out=None,
        svg=None,
        alpha: Optional[float] = None,
        kerr_free: bool = False,
    ):
        """Handle characterize command"""
        spec = self.load(spec_path)
        fractions = flux_grid(points, flux_min, flux_max)
        reports = ReportGenerator(spec)
        header, rows = reports.characterization(fractions, alpha)
        self.storage.write_text(self.storage.render_csv(header, rows), out)

        if kerr_free:
            cell = spec.cell if alpha is None else SnailParams(
                alpha=alpha, n_large=spec.cell.n_large, l_josephson=spec.cell.l_josephson
            )
            summary = {
                "alpha": cell.alpha,
                "n_large": cell.n_large,
                "kerr_free_flux": kerr_free_flux(cell),
            }
            self.emit_summary(summary, out=out)

        if svg:
            x = [row[0] for row in rows]
            reports.plot_svg(
                svg,
                x,
                {"g3 (MHz)": [row[5] / 1e6 for row in rows], "g4 (MHz)": [row[6] / 1e6 for row in rows]},
                xlabel="flux fraction",
                ylabel="nonlinearity (MHz)",
                title="SNAIL nonlinearity",
            )

    def handle_design(
        self,
        spec_path,
        order: int,
        ripple_db: float,
        fractional_bandwidth: float,
        target_ghz: Optional[float] = None,
        out=None,
    ):
        """Handle design command"""
        spec = self.load(spec_path)
        target = target_ghz * 1e9 if target_ghz is not None else spec.center_frequency
        frac = flux_for_frequency(spec.array, target)
        flux = FluxBias(frac)
        proto = PrototypeSpec(
            order=order,
            ripple_db=ripple_db,
            fractional_bandwidth=fractional_bandwidth,
            center_frequency=target,
            source_impedance=spec.source_impedance,
        )
        design = synthesize(proto, spec.array, flux)
        summary = ReportGenerator(spec).design_summary(design, flux)
        self.storage.write_text(self.storage.render_json(summary), out)

    def build_device(self, spec: DeviceSpecFile) -> DeviceDesign:
        """Device from the spec file's own section values, tuned to their center"""
        frac = flux_for_frequency(spec.array, spec.center_frequency)
        flux = FluxBias(frac)
        transformer = TransformerDesign.from_sections(
            z_quarter=spec.z_quarter,
            z_half=spec.z_half,
            z_jpa=characteristic_impedance(spec.array, flux),
            center_frequency=spec.center_frequency,
            source_impedance=spec.source_impedance,
        )
        return DeviceDesign(
            transformer=transformer,
            array=spec.array,
            operating_flux=flux,
            source_impedance=spec.source_impedance,
            line_loss_db=spec.line_loss_db,
        )

    def handle_gain(
        self,
        spec_path,
        points: Optional[int] = None,
        span_ghz: Optional[float] = None,
        gain_db: Optional[float] = None,
        r_p: Optional[float] = None,
        threshold_db: Optional[float] = None,
        out=None,
        summary_out=None,
        svg=None,
    ):
        """Handle gain command"""
        if gain_db is not None and r_p is not None:
            raise InputError("give either --gain-db or --r-p, not both")
        points = config.GRID_POINTS if points is None else points
        if points < 2:
            raise EmptyGrid("empty grid: a gain sweep needs at least 2 points")
        span = config.SPAN_HZ if span_ghz is None else span_ghz * 1e9
        if not span > 0:
            raise InputError(f"--span-ghz must be positive, got {span_ghz}")
        threshold = config.DEFAULT_THRESHOLD_DB if threshold_db is None else threshold_db

        spec = self.load(spec_path)
        device = self.build_device(spec)
        band = (device.center_frequency - span, device.center_frequency + span)

        if r_p is None:
            target = config.DEFAULT_TARGET_GAIN_DB if gain_db is None else gain_db
            r_p = 0.0 if target == 0 else calibrate_pump(device, target, band, points)
        elif r_p < 0:
            raise InputError(f"--r-p must be non-negative, got {r_p}")

        profile = gain_profile(device.with_pump(r_p), band[0], band[1], points)
        reports = ReportGenerator(spec)
        header, rows = reports.gain_rows(profile)
        self.storage.write_text(self.storage.render_csv(header, rows), out)

        summary = reports.gain_summary(profile, threshold, r_p, device.operating_flux.frac)
        self.emit_summary(summary, summary_out, out)
        logger.info(
            "Peak %.3f dB at %.6f GHz, bandwidth %.1f MHz above %.1f dB",
            summary["peak_gain_dB"],
            summary["peak_frequency_GHz"],
            summary["bandwidth_MHz"],
            threshold,
        )

        if svg:
            reports.plot_svg(
                svg,
                profile.frequencies / 1e9,
                {"gain": profile.gain_db},
                xlabel="frequency (GHz)",
                ylabel="gain (dB)",
                title="Reflection gain",
                hline=threshold,
            )

    def handle_tune(
        self,
        spec_path,
        points: int,
        flux_min: float,
        flux_max: float,
        coil: bool = True,
        out=None,
        svg=None,
    ):
        """Handle tune command"""
        spec = self.load(spec_path)
        fractions = flux_grid(points, flux_min, flux_max)
        reports = ReportGenerator(spec)
        header, rows = reports.tuning(fractions, include_coil=coil)
        self.storage.write_text(self.storage.render_csv(header, rows), out)

        if svg:
            reports.plot_svg(
                svg,
                [row[0] for row in rows],
                {"f0": [row[-1] for row in rows]},
                xlabel="flux fraction",
                ylabel="resonance frequency (GHz)",
                title="Flux tuning",
            )

    def handle_saturation(self, ic_ratio: float, q_ratio: float, out=None):
        """Handle saturation command"""
        ratio = saturation_scaling(ic_ratio, q_ratio)
        summary = {"power_ratio": ratio, "power_ratio_db": 10 * math.log10(ratio)}
        self.storage.write_text(self.storage.render_json(summary), out)
