"""
SNAIL IMPA toolkit - design and simulation of impedance-matched SNAIL parametric amplifiers.

This package contains:
- snail.py: SNAIL potential, equilibrium phase, Taylor coefficients, nonlinearities
- resonator.py: SNAIL array resonator, flux tuning and coil map
- matching.py: Chebyshev prototype and two-section transformer synthesis
- network.py: Chain-matrix network, reflection gain, pump calibration
- handlers.py: Command bodies
- cli.py: Command-line interface
- reports.py: CSV rows, JSON summaries and SVG plots
- storage.py: Device spec files and output writers
- errors.py: Exceptions
- config.py: Configuration
- logger.py: Logging setup
"""

__version__ = "0.1.0"
