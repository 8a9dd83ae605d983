"""Series SNAIL array closed by a capacitor: flux-tunable lumped resonator."""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from app.errors import (
    ConvergenceFailure,
    DegenerateCalibration,
    EmptyGrid,
    InputError,
    OutOfTunableRange,
)
from app.snail import FluxBias, SnailParams, cell_inductance

logger = logging.getLogger(__name__)

FREQUENCY_TOLERANCE_HZ = 1e3
FLUX_TOLERANCE = 1e-10
UPPER_FLUX = 0.5


@dataclass(frozen=True)
class ArraySpec:
    cell: SnailParams
    m_snails: int
    capacitance: float
    l_stray: float = 0.0

    def __post_init__(self):
        if isinstance(self.m_snails, bool) or int(self.m_snails) != self.m_snails:
            raise InputError(f"m_snails must be an integer, got {self.m_snails!r}")
        if self.m_snails < 1:
            raise InputError(f"m_snails must be at least 1, got {self.m_snails}")
        if not self.capacitance > 0:
            raise InputError(f"capacitance must be positive, got {self.capacitance}")
        if not self.l_stray >= 0:
            raise InputError(f"l_stray must be non-negative, got {self.l_stray}")


@dataclass(frozen=True)
class TunabilityCurve:
    samples: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        fractions = [frac for frac, _ in self.samples]
        if any(b <= a for a, b in zip(fractions, fractions[1:])):
            raise InputError("tunability curve flux fractions must strictly increase")
        if any(freq <= 0 for _, freq in self.samples):
            raise InputError("tunability curve frequencies must be positive")

    @property
    def fractions(self) -> np.ndarray:
        return np.array([frac for frac, _ in self.samples])

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([freq for _, freq in self.samples])

    def __len__(self):
        return len(self.samples)


def array_inductance(spec: ArraySpec, flux: FluxBias) -> float:
    return spec.m_snails * cell_inductance(flux, spec.cell) + spec.l_stray


def resonance_frequency(spec: ArraySpec, flux: FluxBias) -> float:
    l_array = array_inductance(spec, flux)
    return 1 / (2 * math.pi * math.sqrt(l_array * spec.capacitance))


def characteristic_impedance(spec: ArraySpec, flux: FluxBias) -> float:
    return math.sqrt(array_inductance(spec, flux) / spec.capacitance)


def external_quality_factor(
    spec: ArraySpec, flux: FluxBias, load_resistance: float
) -> float:
    """Q of the series L-C branch loaded by ``load_resistance``."""
    if not load_resistance > 0:
        raise InputError(f"load resistance must be positive, got {load_resistance}")
    return characteristic_impedance(spec, flux) / load_resistance


def tunability_curve(spec: ArraySpec, flux_grid: Iterable[float]) -> TunabilityCurve:
    fractions = [float(frac) for frac in flux_grid]
    if not fractions:
        raise EmptyGrid("empty grid")
    outside = [frac for frac in fractions if not -0.5 < frac <= 0.5]
    if outside:
        raise InputError(f"flux fractions outside (-0.5, 0.5]: {outside[:3]}")

    samples = tuple(
        (frac, resonance_frequency(spec, FluxBias(frac))) for frac in fractions
    )
    return TunabilityCurve(samples)


def flux_for_frequency(spec: ArraySpec, target: float) -> float:
    """Flux fraction on the [0, 0.5] branch that tunes the resonator to ``target``."""
    f_top = resonance_frequency(spec, FluxBias(0.0))
    f_bottom = resonance_frequency(spec, FluxBias(UPPER_FLUX))
    if not f_bottom <= target <= f_top:
        raise OutOfTunableRange(
            f"target {target / 1e9:.6g} GHz outside tunable range "
            f"[{f_bottom / 1e9:.6g}, {f_top / 1e9:.6g}] GHz"
        )

    def detuning(frac):
        return resonance_frequency(spec, FluxBias(frac)) - target

    try:
        frac = float(bisect(detuning, 0.0, UPPER_FLUX, xtol=FLUX_TOLERANCE, maxiter=200))
    except RuntimeError as e:
        raise ConvergenceFailure(f"flux inversion failed: {e}") from e

    residual = detuning(frac)
    if abs(residual) > FREQUENCY_TOLERANCE_HZ:
        raise ConvergenceFailure(
            f"flux inversion residual {residual:.3g} Hz exceeds "
            f"{FREQUENCY_TOLERANCE_HZ:g} Hz"
        )

    logger.info("Operating flux for %.6g GHz: %.10f", target / 1e9, frac)
    return frac


def fit_stray_inductance(spec: ArraySpec, target_max_frequency: float) -> float:
    """Series stray inductance that moves the zero-flux resonance to the target."""
    if not target_max_frequency > 0:
        raise InputError("target frequency must be positive")
    l_total = 1 / ((2 * math.pi * target_max_frequency) ** 2 * spec.capacitance)
    l_stray = l_total - spec.m_snails * cell_inductance(FluxBias(0.0), spec.cell)
    if l_stray < 0:
        raise OutOfTunableRange(
            f"{target_max_frequency / 1e9:.6g} GHz lies above the stray-free maximum"
        )
    return l_stray


def coil_current_map(
    calibration: Sequence[Tuple[float, float]], current: float
) -> float:
    """Affine current-to-flux map through two (current, flux fraction) pairs."""
    (i1, f1), (i2, f2) = calibration
    if i1 == i2:
        raise DegenerateCalibration(
            f"calibration currents coincide ({i1} A); coil map is undefined"
        )
    t = (current - i1) / (i2 - i1)
    return f1 * (1 - t) + f2 * t


def coil_current_for_flux(
    calibration: Sequence[Tuple[float, float]], frac: float
) -> float:
    """Inverse of :func:`coil_current_map`: coil current giving ``frac``."""
    (i1, f1), (i2, f2) = calibration
    if i1 == i2:
        raise DegenerateCalibration(
            f"calibration currents coincide ({i1} A); coil map is undefined"
        )
    if f1 == f2:
        raise DegenerateCalibration(
            f"calibration fluxes coincide ({f1}); coil map cannot be inverted"
        )
    return coil_current_map(((f1, i1), (f2, i2)), frac)
