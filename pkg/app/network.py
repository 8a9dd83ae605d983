"""Chain-matrix model of the matched amplifier and its reflection gain.

Cascade, source side first: lambda/4 line, lambda/2 line, then the pumped
array terminating the network as a series branch
``-r_p + j*w*L_array + 1/(j*w*C)``. All evaluations accept scalar frequencies
or numpy arrays.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import reduce
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from app import config
from app.errors import (
    EmptyCascade,
    FrequencyMismatch,
    InputError,
    NoConvergence,
    SingularNetwork,
    Unstable,
)
from app.matching import FREQUENCY_MATCH_TOLERANCE, TransformerDesign
from app.resonator import ArraySpec, array_inductance, resonance_frequency
from app.snail import FluxBias

logger = logging.getLogger(__name__)

Complex = Union[complex, np.ndarray]

SINGULAR_TOLERANCE = 1e-15
GAIN_TOLERANCE_DB = 0.01
MAX_CALIBRATION_ITERATIONS = 200
# Relative to the upper end of the pump bracket
PUMP_TOLERANCE = 1e-12
# Calibration stays this far (relative) below the first oscillation threshold
INSTABILITY_MARGIN = 1e-6
NEPERS_PER_DB = math.log(10) / 20


@dataclass(frozen=True)
class TwoPortMatrix:
    a: Complex
    b: Complex
    c: Complex
    d: Complex

    @classmethod
    def identity(cls) -> "TwoPortMatrix":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    def __matmul__(self, other: "TwoPortMatrix") -> "TwoPortMatrix":
        return TwoPortMatrix(
            a=self.a * other.a + self.b * other.c,
            b=self.a * other.b + self.b * other.d,
            c=self.c * other.a + self.d * other.c,
            d=self.c * other.b + self.d * other.d,
        )

    def determinant(self) -> Complex:
        return self.a * self.d - self.b * self.c

    def input_impedance(self, z_load: Complex) -> Complex:
        return (self.a * z_load + self.b) / (self.c * z_load + self.d)


@dataclass(frozen=True)
class DeviceDesign:
    transformer: TransformerDesign
    array: ArraySpec
    operating_flux: FluxBias
    source_impedance: float = 50.0
    pump_strength: float = 0.0
    line_loss_db: float = 0.0

    def __post_init__(self):
        if self.transformer.center_frequency is None:
            raise InputError("transformer design needs a center frequency")
        if not self.source_impedance > 0:
            raise InputError("source impedance must be positive")
        if not self.pump_strength >= 0:
            raise InputError(f"pump strength must be >= 0, got {self.pump_strength}")
        if not self.line_loss_db >= 0:
            raise InputError(f"line loss must be >= 0, got {self.line_loss_db}")

        f_jpa = resonance_frequency(self.array, self.operating_flux)
        f0 = self.transformer.center_frequency
        if abs(f_jpa - f0) / f0 > FREQUENCY_MATCH_TOLERANCE:
            raise FrequencyMismatch(
                f"array resonance {f_jpa / 1e9:.6g} GHz differs from section "
                f"center {f0 / 1e9:.6g} GHz"
            )

    @property
    def center_frequency(self) -> float:
        return self.transformer.center_frequency

    def with_pump(self, pump_strength: float) -> "DeviceDesign":
        return replace(self, pump_strength=pump_strength)


@dataclass(frozen=True)
class GainProfile:
    frequencies: np.ndarray
    reflection: np.ndarray
    gain_db: np.ndarray

    def __post_init__(self):
        if len(self.frequencies) and np.any(np.diff(self.frequencies) <= 0):
            raise InputError("gain profile frequencies must strictly increase")

    def __len__(self):
        return len(self.frequencies)

    def peak(self) -> Tuple[float, float]:
        """(frequency, gain_db) of the highest sample."""
        k = int(np.argmax(self.gain_db))
        return float(self.frequencies[k]), float(self.gain_db[k])


def line_matrix(
    z_char: float, electrical_length: Complex, attenuation: float = 0.0
) -> TwoPortMatrix:
    """Transmission-line section; ``attenuation`` is the total loss in nepers."""
    if not z_char > 0:
        raise InputError(f"characteristic impedance must be positive, got {z_char}")
    theta = np.asarray(electrical_length, dtype=float)
    if attenuation:
        gl = attenuation + 1j * theta
        cosh, sinh = np.cosh(gl), np.sinh(gl)
    else:
        cosh, sinh = np.cos(theta) + 0j, 1j * np.sin(theta)
    return TwoPortMatrix(a=cosh, b=z_char * sinh, c=sinh / z_char, d=cosh)


def series_element_matrix(impedance: Complex) -> TwoPortMatrix:
    z = np.asarray(impedance, dtype=complex)
    one = np.ones_like(z)
    return TwoPortMatrix(a=one, b=z, c=np.zeros_like(z), d=one)


def cascade(matrices: Sequence[TwoPortMatrix]) -> TwoPortMatrix:
    """Chain product, source side first."""
    if not matrices:
        raise EmptyCascade("cannot cascade an empty list of two-ports")
    return reduce(lambda left, right: left @ right, matrices)


def quarter_wave_length(frequency: Complex, center_frequency: float) -> Complex:
    return 0.5 * np.pi * np.asarray(frequency, dtype=float) / center_frequency


def half_wave_length(frequency: Complex, center_frequency: float) -> Complex:
    return np.pi * np.asarray(frequency, dtype=float) / center_frequency


def transformer_network(design: DeviceDesign, frequency: Complex) -> TwoPortMatrix:
    attenuation = design.line_loss_db * NEPERS_PER_DB
    f0 = design.center_frequency
    return cascade(
        [
            line_matrix(
                design.transformer.z_quarter,
                quarter_wave_length(frequency, f0),
                attenuation,
            ),
            line_matrix(
                design.transformer.z_half,
                half_wave_length(frequency, f0),
                attenuation,
            ),
        ]
    )


def branch_reactance(design: DeviceDesign, frequency: Complex) -> Complex:
    omega = 2 * np.pi * np.asarray(frequency, dtype=float)
    inductance = array_inductance(design.array, design.operating_flux)
    return omega * inductance - 1 / (omega * design.array.capacitance)


def jpa_termination(design: DeviceDesign, frequency: Complex) -> Complex:
    """Pumped array as a series branch with negative resistance -r_p."""
    omega = 2 * np.pi * np.asarray(frequency, dtype=float)
    inductance = array_inductance(design.array, design.operating_flux)
    return (
        -design.pump_strength
        + 1j * omega * inductance
        + 1 / (1j * omega * design.array.capacitance)
    )


def reflection_coefficient(
    network: TwoPortMatrix,
    z_load: Complex,
    z0: float,
    frequency: Optional[Complex] = None,
) -> Complex:
    denominator = network.c * z_load + network.d
    singular = np.abs(denominator) < SINGULAR_TOLERANCE
    if np.any(singular):
        where = None
        if frequency is not None:
            where = float(np.broadcast_to(frequency, singular.shape)[singular][0])
        raise SingularNetwork("parasitic pole in the input impedance", where)

    with np.errstate(divide="ignore", invalid="ignore"):
        z_in = (network.a * z_load + network.b) / denominator
        return (z_in - z0) / (z_in + z0)


def input_reflection(design: DeviceDesign, frequency: Complex) -> Complex:
    network = transformer_network(design, frequency)
    z_t = jpa_termination(design, frequency)
    return reflection_coefficient(network, z_t, design.source_impedance, frequency)


def gain_profile(
    design: DeviceDesign, f_start: float, f_stop: float, points: int
) -> GainProfile:
    if not f_start < f_stop:
        raise InputError(f"f_start must be below f_stop, got {f_start}, {f_stop}")
    if points < 2:
        raise InputError(f"a sweep needs at least 2 points, got {points}")

    frequencies = np.linspace(f_start, f_stop, int(points))
    reflection = np.asarray(input_reflection(design, frequencies))
    with np.errstate(divide="ignore"):
        gain_db = 20 * np.log10(np.abs(reflection))
    return GainProfile(frequencies, reflection, gain_db)


def default_band(design: DeviceDesign) -> Tuple[float, float]:
    f0 = design.center_frequency
    return f0 - config.SPAN_HZ, f0 + config.SPAN_HZ


def peak_gain(
    design: DeviceDesign, band: Tuple[float, float], points: int
) -> float:
    return gain_profile(design, band[0], band[1], points).peak()[1]


def instability_threshold(
    design: DeviceDesign,
    band: Optional[Tuple[float, float]] = None,
    points: Optional[int] = None,
) -> float:
    """Smallest r_p that puts a pole of the reflection on the real frequency axis.

    At such a point Z_in = -Z0, i.e. the termination equals
    Z_t* = -(b + Z0 d) / (a + Z0 c) with Im Z_t* equal to the branch
    reactance. Returns ``math.inf`` when no crossing lies in the band.
    """
    f_start, f_stop = band or default_band(design)
    frequencies = np.linspace(f_start, f_stop, int(points or config.GRID_POINTS))
    network = transformer_network(design, frequencies)
    z0 = design.source_impedance

    with np.errstate(divide="ignore", invalid="ignore"):
        z_star = -(network.b + z0 * network.d) / (network.a + z0 * network.c)
    mismatch = z_star.imag - branch_reactance(design, frequencies)
    resistance = -z_star.real

    thresholds = []
    for k in range(len(frequencies) - 1):
        m1, m2 = mismatch[k], mismatch[k + 1]
        if not (np.isfinite(m1) and np.isfinite(m2)) or m1 * m2 > 0:
            continue
        t = 0.0 if m1 == m2 else m1 / (m1 - m2)
        r = resistance[k] + t * (resistance[k + 1] - resistance[k])
        if r > 0:
            thresholds.append(r)

    if not thresholds:
        return math.inf
    return float(min(thresholds))


def calibrate_pump(
    design: DeviceDesign,
    target_peak_gain: float,
    band: Optional[Tuple[float, float]] = None,
    points: Optional[int] = None,
) -> float:
    """Pump strength r_p whose peak gain over the band equals the target."""
    if not target_peak_gain > 0:
        raise InputError(f"target gain must be positive, got {target_peak_gain} dB")
    band = band or default_band(design)
    points = int(points or config.GRID_POINTS)

    def peak(r_p):
        return peak_gain(design.with_pump(r_p), band, points)

    critical = instability_threshold(design, band, points)
    if math.isfinite(critical):
        hi = critical * (1 - INSTABILITY_MARGIN)
        if peak(hi) < target_peak_gain:
            raise Unstable(
                f"{target_peak_gain:g} dB needs a pump at or beyond oscillation",
                critical,
            )
    else:
        hi = design.transformer.r0_load or design.source_impedance
        for _ in range(64):
            if peak(hi) >= target_peak_gain:
                break
            hi *= 2
        else:
            raise Unstable(f"{target_peak_gain:g} dB not reachable", critical)

    try:
        r_p, result = brentq(
            lambda r: peak(r) - target_peak_gain,
            0.0,
            hi,
            xtol=PUMP_TOLERANCE * hi,
            maxiter=MAX_CALIBRATION_ITERATIONS,
            full_output=True,
        )
    except RuntimeError as e:
        raise NoConvergence(f"pump calibration for {target_peak_gain:g} dB failed: {e}") from e

    gain = peak(r_p)
    if abs(gain - target_peak_gain) > GAIN_TOLERANCE_DB:
        raise NoConvergence(
            f"pump calibration stopped at {gain:.4g} dB, target {target_peak_gain:g} dB"
        )
    logger.info(
        "Pump calibrated: r_p=%.6g ohm for %.4g dB after %d iterations",
        r_p,
        gain,
        result.iterations,
    )
    return float(r_p)


def bandwidth(profile: GainProfile, threshold: float) -> float:
    """Widest contiguous interval with gain >= threshold, edges interpolated."""
    f = np.asarray(profile.frequencies, dtype=float)
    g = np.asarray(profile.gain_db, dtype=float)
    if len(f) == 0:
        raise InputError("empty gain profile")

    above = g >= threshold
    best = 0.0
    k = 0
    while k < len(f):
        if not above[k]:
            k += 1
            continue
        start = k
        while k + 1 < len(f) and above[k + 1]:
            k += 1
        stop = k

        lower = f[start]
        if start > 0:
            lower = _crossing(f[start - 1], f[start], g[start - 1], g[start], threshold)
        upper = f[stop]
        if stop < len(f) - 1:
            upper = _crossing(f[stop], f[stop + 1], g[stop], g[stop + 1], threshold)
        best = max(best, upper - lower)
        k += 1
    return float(best)


def _crossing(f1, f2, g1, g2, level):
    if not (np.isfinite(g1) and np.isfinite(g2)) or g1 == g2:
        return f1 if g1 >= level else f2
    return f1 + (level - g1) * (f2 - f1) / (g2 - g1)


def profile_peaks(profile: GainProfile, floor_db: float) -> List[Tuple[float, float]]:
    """Local maxima above ``floor_db`` as (frequency, gain_db) pairs."""
    g = profile.gain_db
    peaks = []
    for k in range(1, len(g) - 1):
        if g[k] > g[k - 1] and g[k] >= g[k + 1] and g[k] >= floor_db:
            peaks.append((float(profile.frequencies[k]), float(g[k])))
    return peaks


def saturation_scaling(ic_ratio: float, q_ratio: float) -> float:
    """Saturation power ratio for scaled critical current and coupled Q: Ic^2 / Q^3."""
    if not ic_ratio > 0 or not q_ratio > 0:
        raise InputError(
            f"ratios must be positive, got ic_ratio={ic_ratio}, q_ratio={q_ratio}"
        )
    return ic_ratio**2 / q_ratio**3
