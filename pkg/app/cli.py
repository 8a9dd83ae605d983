from pathlib import Path
from typing import Optional

import typer

from app import config
from app.errors import InputError, NumericalError
from app.handlers import CommandHandlers
from app.logger import setup_logging

EXIT_NUMERICAL = 1
EXIT_INPUT = 2

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Design and simulation of impedance-matched SNAIL parametric amplifiers.",
)
handlers = CommandHandlers()

SPEC_OPTION = typer.Option(..., "--spec", help="Device spec file (YAML).")
OUT_OPTION = typer.Option(None, "--out", help="Output file; standard output if omitted.")
SVG_OPTION = typer.Option(None, "--svg", help="Also save an SVG plot of the data.")


def _fail(code: int, error: Exception):
    message = " ".join(str(error).split())
    typer.echo(f"error: {type(error).__name__}: {message}", err=True)
    raise typer.Exit(code)


def _run(action, *args, **kwargs):
    """Run a command body, mapping toolkit errors to exit codes"""
    try:
        action(*args, **kwargs)
    except InputError as e:
        _fail(EXIT_INPUT, e)
    except NumericalError as e:
        _fail(EXIT_NUMERICAL, e)


@app.callback()
def setup(
    log_level: Optional[str] = typer.Option(
        None, "--log-level", help="DEBUG, INFO, WARNING or ERROR (logs go to stderr)."
    ),
    log_file: Optional[Path] = typer.Option(None, "--log-file", help="Rotating log file."),
):
    setup_logging(log_level, str(log_file) if log_file else None)


@app.command()
def characterize(
    spec: Path = SPEC_OPTION,
    grid: int = typer.Option(config.FLUX_GRID_POINTS, "--grid", help="Number of flux points."),
    flux_min: float = typer.Option(0.0, "--flux-min"),
    flux_max: float = typer.Option(0.5, "--flux-max"),
    alpha: Optional[float] = typer.Option(None, "--alpha", help="Override cell asymmetry."),
    kerr_free: bool = typer.Option(False, "--kerr-free", help="Also report the Kerr-free flux as JSON."),
    out: Optional[Path] = OUT_OPTION,
    svg: Optional[Path] = SVG_OPTION,
):
    """SNAIL coefficients, nonlinearities and resonance over a flux grid (CSV)."""
    _run(handlers.handle_characterize, spec, grid, flux_min, flux_max, out, svg, alpha, kerr_free)


@app.command()
def design(
    spec: Path = SPEC_OPTION,
    order: int = typer.Option(2, "--order", help="Prototype order."),
    ripple_db: float = typer.Option(0.5, "--ripple-db", help="Prototype passband ripple."),
    fbw: float = typer.Option(0.17, "--fbw", help="Fractional bandwidth w."),
    target_ghz: Optional[float] = typer.Option(
        None, "--target-ghz", help="Operating frequency; spec center frequency if omitted."
    ),
    out: Optional[Path] = OUT_OPTION,
):
    """Operating flux and transformer section impedances (JSON)."""
    _run(handlers.handle_design, spec, order, ripple_db, fbw, target_ghz, out)


@app.command()
def gain(
    spec: Path = SPEC_OPTION,
    grid: Optional[int] = typer.Option(None, "--grid", help="Number of frequency points."),
    span_ghz: Optional[float] = typer.Option(None, "--span-ghz", help="Half-span around f0."),
    gain_db: Optional[float] = typer.Option(None, "--gain-db", help="Target peak gain."),
    r_p: Optional[float] = typer.Option(None, "--r-p", help="Pump strength in ohms."),
    threshold_db: Optional[float] = typer.Option(
        None, "--threshold-db", help="Gain level for the bandwidth."
    ),
    out: Optional[Path] = OUT_OPTION,
    summary: Optional[Path] = typer.Option(
        None, "--summary", help="JSON summary file; stdout when --out is a file, else stderr."
    ),
    svg: Optional[Path] = SVG_OPTION,
):
    """Reflection gain profile of the pumped device (CSV + JSON summary)."""
    _run(
        handlers.handle_gain,
        spec,
        points=grid,
        span_ghz=span_ghz,
        gain_db=gain_db,
        r_p=r_p,
        threshold_db=threshold_db,
        out=out,
        summary_out=summary,
        svg=svg,
    )


@app.command()
def tune(
    spec: Path = SPEC_OPTION,
    grid: int = typer.Option(config.FLUX_GRID_POINTS, "--grid", help="Number of flux points."),
    flux_min: float = typer.Option(0.0, "--flux-min"),
    flux_max: float = typer.Option(0.5, "--flux-max"),
    coil: bool = typer.Option(True, "--coil/--no-coil", help="Coil current column."),
    out: Optional[Path] = OUT_OPTION,
    svg: Optional[Path] = SVG_OPTION,
):
    """Resonance frequency versus flux, with coil current when calibrated (CSV)."""
    _run(handlers.handle_tune, spec, grid, flux_min, flux_max, coil, out, svg)


@app.command()
def saturation(
    ic_ratio: float = typer.Option(..., "--ic-ratio", help="Critical current ratio."),
    q_ratio: float = typer.Option(..., "--q-ratio", help="Coupled Q ratio."),
    out: Optional[Path] = OUT_OPTION,
):
    """Saturation power ratio Ic^2 / Q^3 (JSON)."""
    _run(handlers.handle_saturation, ic_ratio, q_ratio, out)


def main():
    app()
