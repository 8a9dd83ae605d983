"""Single SNAIL loop: potential, equilibrium phase and Taylor coefficients.

The loop holds ``n_large`` large junctions in series, shunted by one small
junction whose critical current is ``alpha`` times smaller. Energies are in
units of the large-junction Josephson energy and the external flux is carried
by the large-junction branch:

    u(phi) = -alpha * cos(phi) - n * cos((phi - phi_ext) / n)
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np
from scipy import constants
from scipy.optimize import bisect

from app.errors import (
    ConvergenceFailure,
    InputError,
    NonPositiveStiffness,
    NoSignChange,
)

logger = logging.getLogger(__name__)

FLUX_QUANTUM = constants.h / (2 * constants.e)
RESISTANCE_QUANTUM = constants.h / (2 * constants.e) ** 2

GRID_POINTS = 1024
NEWTON_TOLERANCE = 1e-12
MAX_ITERATIONS = 100
STIFFNESS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SnailParams:
    alpha: float
    n_large: int
    l_josephson: float

    def __post_init__(self):
        if isinstance(self.n_large, bool) or int(self.n_large) != self.n_large:
            raise InputError(f"n_large must be an integer, got {self.n_large!r}")
        if self.n_large < 1:
            raise InputError(f"n_large must be at least 1, got {self.n_large}")
        if not 0 < self.alpha < 1 / self.n_large:
            raise InputError(
                f"alpha must lie in (0, 1/n_large) = (0, {1 / self.n_large:.6g}), "
                f"got {self.alpha}"
            )
        if not self.l_josephson > 0:
            raise InputError(f"l_josephson must be positive, got {self.l_josephson}")

    @property
    def josephson_energy(self) -> float:
        """Large-junction Josephson energy in joules."""
        return (FLUX_QUANTUM / (2 * math.pi)) ** 2 / self.l_josephson


@dataclass(frozen=True)
class FluxBias:
    """External flux as a fraction of the flux quantum."""

    frac: float

    @property
    def phase(self) -> float:
        return 2 * math.pi * self.frac


@dataclass(frozen=True)
class TaylorCoefficients:
    phi_min: float
    c2: float
    c3: float
    c4: float


def reduced_potential(phi, flux: FluxBias, params: SnailParams):
    """Potential in units of E_J; accepts scalars or numpy arrays for ``phi``."""
    n = params.n_large
    return -params.alpha * np.cos(phi) - n * np.cos((phi - flux.phase) / n)


def potential_derivative(phi, flux: FluxBias, params: SnailParams, order: int):
    """Analytic derivative of :func:`reduced_potential` of the given order (0..4)."""
    n = params.n_large
    alpha = params.alpha
    psi = (phi - flux.phase) / n

    if order == 0:
        return reduced_potential(phi, flux, params)
    if order == 1:
        return alpha * np.sin(phi) + np.sin(psi)
    if order == 2:
        return alpha * np.cos(phi) + np.cos(psi) / n
    if order == 3:
        return -alpha * np.sin(phi) - np.sin(psi) / n**2
    if order == 4:
        return -alpha * np.cos(phi) - np.cos(psi) / n**3
    raise InputError(f"derivative order must be 0..4, got {order}")


def find_phi_min(flux: FluxBias, params: SnailParams) -> float:
    """Global minimizer of the potential over one 2*pi*n period.

    A coarse grid centred on phi_ext brackets the minimum, then a Newton
    iteration on u' refines it. Steps that leave the bracket fall back to
    bisection.
    """
    n = params.n_large
    offsets = np.linspace(-math.pi * n, math.pi * n, GRID_POINTS, endpoint=False)
    grid = flux.phase + offsets
    k = int(np.argmin(reduced_potential(grid, flux, params)))
    spacing = offsets[1] - offsets[0]

    phi = float(grid[k])
    lo, hi = phi - spacing, phi + spacing

    for iteration in range(MAX_ITERATIONS):
        slope = float(potential_derivative(phi, flux, params, 1))
        curvature = float(potential_derivative(phi, flux, params, 2))

        if abs(slope) <= NEWTON_TOLERANCE and curvature > 0:
            # Quadratic convergence: one more step lands on machine precision
            polished = phi - slope / curvature
            if lo <= polished <= hi:
                phi = polished
            logger.debug(
                "phi_min(frac=%.6g) = %.15g after %d iterations",
                flux.frac,
                phi,
                iteration + 1,
            )
            return phi

        if slope > 0:
            hi = phi
        else:
            lo = phi

        candidate = phi - slope / curvature if curvature > 0 else math.nan
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        phi = candidate

    raise ConvergenceFailure(
        f"phi_min did not converge within {MAX_ITERATIONS} iterations "
        f"at flux fraction {flux.frac}"
    )


def taylor_coefficients(flux: FluxBias, params: SnailParams) -> TaylorCoefficients:
    phi_min = find_phi_min(flux, params)
    return TaylorCoefficients(
        phi_min=phi_min,
        c2=float(potential_derivative(phi_min, flux, params, 2)),
        c3=float(potential_derivative(phi_min, flux, params, 3)),
        c4=float(potential_derivative(phi_min, flux, params, 4)),
    )


def coefficient_sweep(
    params: SnailParams, fractions: Iterable[float]
) -> List[TaylorCoefficients]:
    return [taylor_coefficients(FluxBias(frac), params) for frac in fractions]


def cell_inductance(flux: FluxBias, params: SnailParams) -> float:
    """Linear inductance of one cell, L_J / c2, in henries."""
    c2 = taylor_coefficients(flux, params).c2
    if c2 <= STIFFNESS_TOLERANCE:
        raise NonPositiveStiffness(
            f"c2 = {c2:.3e} at flux fraction {flux.frac}; inductance diverges"
        )
    return params.l_josephson / c2


def g_coefficients(
    flux: FluxBias,
    params: SnailParams,
    m_snails: int,
    total_capacitance: float,
) -> Tuple[float, float]:
    """Third- and fourth-order nonlinearities of the array mode, in Hz.

    The zero-point phase of the mode, phi_zpf^2 = 2*pi*Z/R_Q, is split evenly
    across the ``m_snails`` series cells.
    """
    if m_snails < 1:
        raise InputError(f"m_snails must be at least 1, got {m_snails}")
    if not total_capacitance > 0:
        raise InputError(f"capacitance must be positive, got {total_capacitance}")

    coeffs = taylor_coefficients(flux, params)
    if coeffs.c2 <= STIFFNESS_TOLERANCE:
        raise NonPositiveStiffness(
            f"c2 = {coeffs.c2:.3e} at flux fraction {flux.frac}"
        )
    l_array = m_snails * params.l_josephson / coeffs.c2
    impedance = math.sqrt(l_array / total_capacitance)
    phi_zpf = math.sqrt(2 * math.pi * impedance / RESISTANCE_QUANTUM)
    cell_phase = phi_zpf / m_snails

    e_j = params.josephson_energy
    g3 = e_j * coeffs.c3 * cell_phase**3 * m_snails / (6 * constants.h)
    g4 = e_j * coeffs.c4 * cell_phase**4 * m_snails / (24 * constants.h)
    return g3, g4


def kerr_coefficient(
    flux: FluxBias, params: SnailParams, hybridized: bool = False
) -> float:
    """Bare c4, or c4 - 5*c3^2/(3*c2) when ``hybridized`` is set."""
    coeffs = taylor_coefficients(flux, params)
    if not hybridized:
        return coeffs.c4
    return coeffs.c4 - 5 * coeffs.c3**2 / (3 * coeffs.c2)


def kerr_free_flux(
    params: SnailParams,
    search_interval: Tuple[float, float] = (0.01, 0.49),
    hybridized: bool = False,
    xtol: float = 1e-8,
) -> float:
    """Flux fraction where the Kerr coefficient changes sign."""
    lo, hi = search_interval
    if not 0 < lo < hi < 0.5:
        raise InputError(
            f"search interval must satisfy 0 < lo < hi < 0.5, got {search_interval}"
        )

    def kerr(frac):
        return kerr_coefficient(FluxBias(frac), params, hybridized)

    k_lo, k_hi = kerr(lo), kerr(hi)
    if k_lo * k_hi > 0:
        raise NoSignChange(
            f"Kerr coefficient keeps sign on {search_interval} "
            f"for alpha={params.alpha}, n={params.n_large}"
        )

    try:
        root = bisect(kerr, lo, hi, xtol=xtol, maxiter=200)
    except RuntimeError as e:
        raise ConvergenceFailure(f"Kerr-free bisection failed: {e}") from e

    logger.info("Kerr-free flux for alpha=%g: %.10f", params.alpha, root)
    return float(root)
