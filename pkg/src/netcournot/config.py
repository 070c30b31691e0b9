"""Run configuration: defaults, flat key=value config files, flag overrides.

Precedence is flags > file > defaults.  The defaults reproduce the baseline
numerical parameterisation exactly: a = 1, c = 0.7, phi = theta = 2.5,
m in {0.05, 0.25}, b swept over [0, 0.6] in steps of 0.01.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .exceptions import ParseError, ValidationError
from .model import ModelParams, RDMode


@dataclass
class RunConfig:
    mode: RDMode = RDMode.PROCESS_ONLY
    m_values: tuple[float, ...] = (0.05, 0.25)
    b_min: float = 0.0
    b_max: float = 0.6
    b_step: float = 0.01
    a: float = 1.0
    c1: float = 0.7
    c2: float = 0.7
    phi: float = 2.5
    theta: float = 2.5
    out_dir: Path = Path(".")
    emit_plots: bool = False
    seed: int = 42
    # Solver tolerances; the defaults match the solver modules.
    nash_tol: float = 1e-8
    fp_tol: float = 1e-12
    epsilon_tol: float = 1e-5
    fd_step: float = 1e-6
    check_samples: int = 60

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for m in self.m_values:
            if not -1.0 <= m <= 1.0:
                raise ValidationError(f"m must lie in [-1, 1], got {m}")
        if not self.b_min >= 0.0:
            raise ValidationError(f"b_min must be >= 0, got {self.b_min}")
        if not self.b_max < 1.0:
            raise ValidationError(f"b_max must be < 1, got {self.b_max}")
        if self.b_max < self.b_min:
            raise ValidationError("b_max must not be below b_min")
        if not self.b_step > 0:
            raise ValidationError(f"b_step must be positive, got {self.b_step}")
        if not self.a > 0:
            raise ValidationError(f"a must be positive, got {self.a}")
        for name in ("c1", "c2"):
            c = getattr(self, name)
            if c < 0 or c >= self.a:
                raise ValidationError(f"{name} must satisfy 0 <= {name} < a, got {c}")
        for name in ("phi", "theta"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("nash_tol", "fp_tol", "epsilon_tol", "fd_step"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.check_samples < 1:
            raise ValidationError("check_samples must be at least 1")

    def params(self, b: float = 0.0, m: float | None = None) -> ModelParams:
        """Model parameters at one grid point (symmetric phi/theta overrides)."""
        return ModelParams(
            a=self.a,
            c1=self.c1,
            c2=self.c2,
            b1=b,
            b2=b,
            m=self.m_values[0] if m is None else m,
            phi1=self.phi,
            phi2=self.phi,
            theta1=self.theta,
            theta2=self.theta,
        )

    def b_grid(self) -> list[float]:
        grid = []
        i = 0
        while True:
            b = round(self.b_min + i * self.b_step, 10)
            if b > self.b_max + 1e-12:
                break
            grid.append(b)
            i += 1
        return grid


_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _parse_value(key: str, text: str, line_no: int | None = None):
    where = f" (line {line_no})" if line_no is not None else ""
    try:
        if key == "mode":
            return RDMode(text.strip().lower())
        if key == "m_values":
            return tuple(float(part) for part in text.replace(",", " ").split())
        if key == "out_dir":
            return Path(text.strip())
        if key == "emit_plots":
            word = text.strip().lower()
            if word not in _BOOL_WORDS:
                raise ValueError(f"not a boolean: {text!r}")
            return _BOOL_WORDS[word]
        if key in ("seed", "check_samples"):
            return int(text)
        return float(text)
    except ValueError as exc:
        raise ParseError(f"bad value for {key!r}{where}: {exc}") from exc


def parse_config_file(path: str | Path) -> dict:
    """Read a flat key=value file; '#' starts a comment; unknown keys rejected."""
    known = {f.name for f in fields(RunConfig)}
    values: dict = {}
    text = Path(path).read_text()
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value (line {line_no}): {raw_line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ParseError(f"unknown key {key!r} (line {line_no})")
        values[key] = _parse_value(key, value, line_no)
    return values


def parse_config(
    file: str | Path | None = None, flags: dict | None = None
) -> RunConfig:
    """Build a RunConfig with precedence flags > file > defaults."""
    values: dict = {}
    if file is not None:
        values.update(parse_config_file(file))
    if flags:
        known = {f.name for f in fields(RunConfig)}
        for key, value in flags.items():
            if value is None:
                continue
            if key not in known:
                raise ParseError(f"unknown config key {key!r}")
            values[key] = value
    return RunConfig(**values)
