import json
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import yaml

from app import config
from app.errors import InputError, OutputWriteError, SpecValidationError
from app.resonator import ArraySpec
from app.snail import SnailParams

logger = logging.getLogger(__name__)

PICO = 1e-12
FEMTO = 1e-15
GIGA = 1e9
MILLI = 1e-3

# key -> required; nested dicts describe sections
SPEC_SCHEMA = {
    "snail": {"alpha": True, "n_large": True, "l_josephson_pH": True},
    "array": {"m_snails": True, "capacitance_fF": True, "l_stray_pH": False},
    "transformer": {
        "z_quarter_ohm": True,
        "z_half_ohm": True,
        "center_frequency_GHz": True,
        "line_loss_db": False,
    },
    "source_impedance_ohm": False,
    "coil_calibration": False,
}
COIL_POINT_KEYS = ("current_mA", "flux")
NUMBER_PATTERN = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)[eE][-+]?\d+")


@dataclass(frozen=True)
class DeviceSpecFile:
    """Validated device description, in SI units."""

    array: ArraySpec
    z_quarter: float
    z_half: float
    center_frequency: float
    source_impedance: float = 50.0
    line_loss_db: float = 0.0
    coil_calibration: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None

    @property
    def cell(self) -> SnailParams:
        return self.array.cell


class Storage:
    """Reading device spec files and writing CSV/JSON results"""

    @staticmethod
    def load_device_spec(filename) -> DeviceSpecFile:
        """Load and validate a YAML device spec file"""
        path = Path(filename)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise SpecValidationError("<file>", f"cannot read {path}: {e}") from e
        spec = parse_device_spec(text)
        logger.info("Loaded device spec %s", path)
        return spec

    @staticmethod
    def format_number(value: float, digits: Optional[int] = None) -> str:
        """Positional notation, at most ``digits`` significant digits"""
        digits = digits or config.CSV_DIGITS
        # + 0.0 folds negative zero
        return np.format_float_positional(
            float(value) + 0.0, precision=digits, unique=False, fractional=False, trim="-"
        )

    @classmethod
    def render_csv(
        cls, header: Sequence[str], rows: Iterable[Sequence[float]]
    ) -> str:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(cls.format_number(value) for value in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def render_json(cls, data: Dict[str, Any], compact: bool = False) -> str:
        flat = {}
        for key, value in data.items():
            if isinstance(value, float):
                value = float(cls.format_number(value)) if math.isfinite(value) else None
            flat[key] = value
        if compact:
            return json.dumps(flat, sort_keys=True, separators=(",", ":")) + "\n"
        return json.dumps(flat, sort_keys=True, indent=2) + "\n"

    @staticmethod
    def write_text(text: str, filename=None):
        """Write to a file, or to standard output when no file is given"""
        if filename is None or str(filename) == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        path = Path(filename)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except OSError as e:
            raise OutputWriteError(path, e) from e
        logger.info("Wrote %s", path)

    @staticmethod
    def write_stderr(text: str):
        sys.stderr.write(text)
        sys.stderr.flush()

    @staticmethod
    def is_file_target(filename) -> bool:
        return filename is not None and str(filename) != "-"


def parse_device_spec(text: str) -> DeviceSpecFile:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        message = " ".join(str(getattr(e, "problem", None) or e).split())
        raise SpecValidationError("<document>", message, line) from e

    lines = _key_lines(root) if root is not None else {}
    if not isinstance(data, dict):
        raise SpecValidationError("<document>", "expected a mapping at top level", 1)

    reader = _FieldReader(data, lines)
    reader.check_keys("", data, SPEC_SCHEMA)

    try:
        cell = SnailParams(
            alpha=reader.number("snail.alpha"),
            n_large=reader.integer("snail.n_large"),
            l_josephson=reader.number("snail.l_josephson_pH", positive=True) * PICO,
        )
    except SpecValidationError:
        raise
    except InputError as e:
        raise reader.error("snail", str(e)) from e

    try:
        array = ArraySpec(
            cell=cell,
            m_snails=reader.integer("array.m_snails"),
            capacitance=reader.number("array.capacitance_fF", positive=True) * FEMTO,
            l_stray=reader.number("array.l_stray_pH", default=0.0) * PICO,
        )
    except SpecValidationError:
        raise
    except InputError as e:
        raise reader.error("array", str(e)) from e

    line_loss = reader.number("transformer.line_loss_db", default=0.0)
    if line_loss < 0:
        raise reader.error("transformer.line_loss_db", "must be non-negative")

    return DeviceSpecFile(
        array=array,
        z_quarter=reader.number("transformer.z_quarter_ohm", positive=True),
        z_half=reader.number("transformer.z_half_ohm", positive=True),
        center_frequency=reader.number("transformer.center_frequency_GHz", positive=True)
        * GIGA,
        source_impedance=reader.number("source_impedance_ohm", default=50.0, positive=True),
        line_loss_db=line_loss,
        coil_calibration=reader.coil_calibration("coil_calibration"),
    )


def _key_lines(node, prefix="") -> Dict[str, int]:
    """Dotted key path -> 1-based line number, from a composed YAML node tree."""
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}{key_node.value}"
            lines[path] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, path + "."))
    elif isinstance(node, yaml.SequenceNode):
        for index, item in enumerate(node.value):
            path = f"{prefix}{index}"
            lines[path] = item.start_mark.line + 1
            lines.update(_key_lines(item, path + "."))
    return lines


class _FieldReader:
    def __init__(self, data: dict, lines: Dict[str, int]):
        self.data = data
        self.lines = lines

    def error(self, field: str, message: str) -> SpecValidationError:
        return SpecValidationError(field, message, self.lines.get(field))

    def check_keys(self, prefix: str, data: dict, schema: dict):
        for key in data:
            path = f"{prefix}{key}"
            if key not in schema:
                raise self.error(path, "unknown field")
            if isinstance(schema[key], dict):
                if not isinstance(data[key], dict):
                    raise self.error(path, "expected a mapping")
                self.check_keys(path + ".", data[key], schema[key])
        for key, required in schema.items():
            path = f"{prefix}{key}"
            if isinstance(required, dict):
                if key not in data:
                    raise self.error(path, "missing section")
            elif required and key not in data:
                parent = prefix.rstrip(".") or "<document>"
                raise SpecValidationError(path, "missing field", self.lines.get(parent))

    def raw(self, field: str):
        node = self.data
        for part in field.split("."):
            if not isinstance(node, dict) or part not in node:
                return None
            node = node[part]
        return node

    def number(self, field: str, default=None, positive=False) -> float:
        value = self.raw(field)
        if value is None:
            if default is None:
                raise self.error(field, "missing value")
            return float(default)
        value = self._to_number(field, value)
        if positive and not value > 0:
            raise self.error(field, f"must be positive, got {value}")
        return value

    def integer(self, field: str) -> int:
        value = self.number(field)
        if value != int(value):
            raise self.error(field, f"must be an integer, got {value}")
        return int(value)

    def coil_calibration(self, field: str):
        value = self.raw(field)
        if value is None:
            return None
        if not isinstance(value, list) or len(value) != 2:
            raise self.error(field, "expected a list of two {current_mA, flux} points")
        pairs = []
        for index, point in enumerate(value):
            path = f"{field}.{index}"
            if not isinstance(point, dict):
                raise self.error(path, "expected a mapping with current_mA and flux")
            for key in point:
                if key not in COIL_POINT_KEYS:
                    raise self.error(f"{path}.{key}", "unknown field")
            for key in COIL_POINT_KEYS:
                if key not in point:
                    raise self.error(path, f"missing field '{key}'")
            current = self._to_number(f"{path}.current_mA", point["current_mA"])
            flux = self._to_number(f"{path}.flux", point["flux"])
            pairs.append((current * MILLI, flux))
        return tuple(pairs)

    def _to_number(self, field: str, value) -> float:
        if isinstance(value, bool):
            raise self.error(field, f"expected a number, got {value!r}")
        if isinstance(value, str):
            if "," in value and any(ch.isdigit() for ch in value):
                raise self.error(field, f"decimal comma is not accepted: {value!r}")
            # YAML 1.1 reads exponent-only floats such as 1e-3 as strings
            if not NUMBER_PATTERN.fullmatch(value.strip()):
                raise self.error(field, f"expected a number, got {value!r}")
            value = float(value)
        if not isinstance(value, (int, float)):
            raise self.error(field, f"expected a number, got {type(value).__name__}")
        value = float(value)
        if not math.isfinite(value):
            raise self.error(field, f"must be finite, got {value}")
        return value
