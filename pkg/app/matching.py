"""Two-section (lambda/4 + lambda/2) transformer from a negative-resistance prototype.

Section impedances follow the prototype mapping:

    Z_quarter^2 = Z0 * R0             (R0 = R / r0)
    Z_half      = pi / (2 * b)        (b = g2 / (w * R))
    Z_jpa       = 2 * x / pi          (x = g1 * R / w)
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from app.errors import FrequencyMismatch, InputError, InvalidOrder
from app.resonator import ArraySpec, characteristic_impedance, resonance_frequency
from app.snail import FluxBias

logger = logging.getLogger(__name__)

FREQUENCY_MATCH_TOLERANCE = 0.01


def chebyshev_g_values(order: int, ripple_db: float) -> Tuple[float, ...]:
    """Chebyshev low-pass prototype coefficients g0 .. g(n+1)."""
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise InvalidOrder(f"prototype order must be an integer >= 1, got {order!r}")
    if not ripple_db > 0:
        raise InputError(f"ripple must be positive, got {ripple_db} dB")
    order = int(order)

    beta = math.log(1 / math.tanh(ripple_db * math.log(10) / 40))
    gamma = math.sinh(beta / (2 * order))
    a = [math.sin((2 * k - 1) * math.pi / (2 * order)) for k in range(1, order + 1)]
    b = [gamma**2 + math.sin(k * math.pi / order) ** 2 for k in range(1, order + 1)]

    g = [1.0, 2 * a[0] / gamma]
    for k in range(2, order + 1):
        g.append(4 * a[k - 2] * a[k - 1] / (b[k - 2] * g[k - 1]))

    if order % 2:
        g.append(1.0)
    else:
        g.append(1 / math.tanh(beta / 4) ** 2)
    return tuple(g)


@dataclass(frozen=True)
class PrototypeSpec:
    order: int
    ripple_db: float
    fractional_bandwidth: float
    center_frequency: float
    source_impedance: float = 50.0
    negative_resistance_ratio: float = 1.0
    g_values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if isinstance(self.order, bool) or int(self.order) != self.order or self.order < 1:
            raise InvalidOrder(f"prototype order must be an integer >= 1, got {self.order!r}")
        if not self.ripple_db > 0:
            raise InputError(f"ripple must be positive, got {self.ripple_db} dB")
        if not 0 < self.fractional_bandwidth < 1:
            raise InputError(
                f"fractional bandwidth must lie in (0, 1), got {self.fractional_bandwidth}"
            )
        if not self.center_frequency > 0:
            raise InputError("center frequency must be positive")
        if not self.source_impedance > 0:
            raise InputError("source impedance must be positive")
        if not self.negative_resistance_ratio > 0:
            raise InputError("negative resistance ratio must be positive")

        if self.g_values is None:
            object.__setattr__(
                self, "g_values", chebyshev_g_values(self.order, self.ripple_db)
            )
        else:
            object.__setattr__(self, "g_values", tuple(float(g) for g in self.g_values))
            if len(self.g_values) != self.order + 2:
                raise InputError(
                    f"expected {self.order + 2} g-values for order {self.order}, "
                    f"got {len(self.g_values)}"
                )
            if any(g <= 0 for g in self.g_values):
                raise InputError("g-values must all be positive")


@dataclass(frozen=True)
class TransformerDesign:
    z_quarter: float
    z_half: float
    z_jpa_target: float
    x_slope: float
    b_slope: float
    center_frequency: Optional[float] = None
    r0_load: Optional[float] = None

    def __post_init__(self):
        for name in ("z_quarter", "z_half", "z_jpa_target", "x_slope", "b_slope"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_sections(
        cls,
        z_quarter: float,
        z_half: float,
        z_jpa: float,
        center_frequency: float,
        source_impedance: float = 50.0,
    ) -> "TransformerDesign":
        """Design given directly by section impedances (e.g. a fabricated device)."""
        return cls(
            z_quarter=z_quarter,
            z_half=z_half,
            z_jpa_target=z_jpa,
            x_slope=math.pi * z_jpa / 2,
            b_slope=math.pi / (2 * z_half),
            center_frequency=center_frequency,
            r0_load=z_quarter**2 / source_impedance,
        )


def slope_parameters(proto: PrototypeSpec, r_load: float) -> Tuple[float, float]:
    """Impedance slope x (ohm) and admittance slope b (S)."""
    if not r_load > 0:
        raise InputError(f"load resistance must be positive, got {r_load}")
    g1, g2 = proto.g_values[1], proto.g_values[2]
    w = proto.fractional_bandwidth
    return g1 * r_load / w, g2 / (w * r_load)


def section_impedances(
    x: float,
    b: float,
    z0: float,
    r0_load: float,
    center_frequency: Optional[float] = None,
) -> TransformerDesign:
    for name, value in (("x", x), ("b", b), ("z0", z0), ("r0_load", r0_load)):
        if not value > 0:
            raise InputError(f"{name} must be positive, got {value}")
    return TransformerDesign(
        z_quarter=math.sqrt(z0 * r0_load),
        z_half=math.pi / (2 * b),
        z_jpa_target=2 * x / math.pi,
        x_slope=x,
        b_slope=b,
        center_frequency=center_frequency,
        r0_load=r0_load,
    )


def synthesize(
    proto: PrototypeSpec, spec: ArraySpec, operating_flux: FluxBias
) -> TransformerDesign:
    """Section impedances matched to the resonator at its operating flux."""
    f_res = resonance_frequency(spec, operating_flux)
    detuning = abs(f_res - proto.center_frequency) / proto.center_frequency
    if detuning > FREQUENCY_MATCH_TOLERANCE:
        raise FrequencyMismatch(
            f"resonator at {f_res / 1e9:.6g} GHz is {detuning:.2%} away from the "
            f"prototype center {proto.center_frequency / 1e9:.6g} GHz"
        )

    z_jpa = characteristic_impedance(spec, operating_flux)
    # x = g1 * R / w must reproduce Z_jpa = 2x / pi
    r_load = (math.pi * z_jpa / 2) * proto.fractional_bandwidth / proto.g_values[1]
    x, b = slope_parameters(proto, r_load)
    design = section_impedances(
        x,
        b,
        proto.source_impedance,
        r_load / proto.negative_resistance_ratio,
        center_frequency=proto.center_frequency,
    )
    logger.info(
        "Synthesized transformer: Z_quarter=%.4g ohm, Z_half=%.4g ohm, Z_jpa=%.4g ohm",
        design.z_quarter,
        design.z_half,
        design.z_jpa_target,
    )
    return design


def search_prototype(
    spec: ArraySpec,
    operating_flux: FluxBias,
    center_frequency: float,
    target_quarter: float,
    target_half: float,
    ripples: Iterable[float],
    bandwidths: Iterable[float],
    order: int = 2,
    source_impedance: float = 50.0,
) -> Tuple[float, float, float]:
    """(ripple_db, w, error) minimizing the worst relative section error."""
    best = None
    for ripple, w in itertools.product(list(ripples), list(bandwidths)):
        proto = PrototypeSpec(
            order=order,
            ripple_db=ripple,
            fractional_bandwidth=w,
            center_frequency=center_frequency,
            source_impedance=source_impedance,
        )
        design = synthesize(proto, spec, operating_flux)
        error = max(
            abs(design.z_quarter - target_quarter) / target_quarter,
            abs(design.z_half - target_half) / target_half,
        )
        if best is None or error < best[2]:
            best = (ripple, w, error)

    if best is None:
        raise InputError("empty prototype search grid")
    return best
