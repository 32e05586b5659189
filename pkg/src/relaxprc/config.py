"""Run configuration: an INI-style ``[section]`` / ``key = value`` file.

Example::

    [model]
    family = fhn          # or: polynomial
    a = 0.7
    b = 0.8
    I = 1.0
    epsilon = 0.01
    epsilons = 0.1, 0.05, 0.02, 0.01

    [input]
    kind = impulse        # or: pulse
    alpha = 1.5
    # u_bar = 0.25
    # duration = 0.1 period      (or "1.8 slow" for slow-time units)

    [numerics]
    samples = 128

    [output]
    prefix = fhn

A ``polynomial`` model takes ``f = c0, c1, ...`` (ascending coefficients of
``f``, at most degree 5), ``g = g0, gx, gz`` (``g = g0 + gx x + gz z``) and
``I``. Unknown sections or keys are rejected.
"""

from __future__ import annotations

import ast
import configparser
import math
import re
from dataclasses import dataclass, field, fields

from .errors import ParseError, ValidationError
from .model import FastSlowSystem, fitzhugh_nagumo
from .singular import Impulse, InputSignal, SquarePulse

__all__ = ["ModelConfig", "InputConfig", "NumericsConfig", "OutputConfig", "RunConfig",
           "parse_config", "load_config"]


@dataclass
class ModelConfig:
    family: str = "fhn"
    a: float = 0.7
    b: float = 0.8
    I: float = 1.0
    f: tuple[float, ...] = ()
    g: tuple[float, ...] = ()
    epsilon: float | None = None
    epsilons: tuple[float, ...] = ()

    def system(self, epsilon: float | None = None) -> FastSlowSystem:
        eps = self.epsilon if epsilon is None else epsilon
        eps = 0.0 if eps is None else eps
        if self.family == "fhn":
            return fitzhugh_nagumo(self.a, self.b, self.I, eps)
        return FastSlowSystem(self.f, self.g, self.I, eps)


@dataclass
class InputConfig:
    kind: str = "impulse"
    alpha: float | None = None
    u_bar: float | None = None
    duration: float | None = None
    duration_unit: str = "period"

    def signal(self) -> InputSignal:
        if self.kind == "impulse":
            return Impulse(self.alpha)
        if self.duration_unit == "slow":
            return SquarePulse(self.u_bar, duration_slow=self.duration)
        return SquarePulse(self.u_bar, period_fraction=self.duration)


@dataclass
class NumericsConfig:
    rtol: float = 1e-9
    atol: float = 1e-11
    samples: int = 128
    singular_samples: int = 512
    iprc_samples: int = 512
    horizon: int = 12
    band: float = 0.05
    grid: int = 40


@dataclass
class OutputConfig:
    prefix: str = ""
    dir: str = "out"


@dataclass
class RunConfig:
    model: ModelConfig
    input: InputConfig | None = None
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_text(self) -> str:
        """Serialize back to the config grammar (parses to an equal RunConfig)."""
        out = []
        for name in ("model", "input", "numerics", "output"):
            sec = getattr(self, name)
            if sec is None:
                continue
            out.append(f"[{name}]")
            for f in fields(sec):
                v = getattr(sec, f.name)
                if name == "input" and f.name == "duration_unit":
                    continue
                if name == "model" and f.name in ("a", "b") and sec.family != "fhn":
                    continue
                if name == "input" and f.name == "duration" and v is not None:
                    out.append(f"duration = {v!r} {sec.duration_unit}")
                    continue
                if v is None or v == ():
                    continue
                if isinstance(v, tuple):
                    v = ", ".join(repr(x) for x in v)
                elif isinstance(v, float):
                    v = repr(v)
                out.append(f"{f.name} = {v}")
            out.append("")
        return "\n".join(out)


_SECTIONS = {
    "model": ModelConfig,
    "input": InputConfig,
    "numerics": NumericsConfig,
    "output": OutputConfig,
}
_ALLOWED_KEYS = {
    "model": {"family", "a", "b", "I", "f", "g", "epsilon", "epsilons"},
    "input": {"kind", "alpha", "u_bar", "duration"},
    "numerics": {f.name for f in fields(NumericsConfig)},
    "output": {"prefix", "dir"},
}


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    cur = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        m = re.fullmatch(r"\[\s*([^\]]+?)\s*\]", line)
        if m:
            cur = m.group(1)
            if key is None and cur == section:
                return i
            continue
        if cur == section and key is not None and "=" in line:
            if line.split("=", 1)[0].strip() == key:
                return i
    return None


def _number(text, section, key, raw, kind=float):
    try:
        v = kind(raw)
    except ValueError:
        raise ValidationError(f"{section}.{key}", f"not a valid {kind.__name__}: {raw!r}") from None
    if kind is float and not math.isfinite(v):
        raise ValidationError(f"{section}.{key}", "must be finite")
    return v


def _numbers(text, section, key, raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ValidationError(f"{section}.{key}", "empty list")
    return tuple(_number(text, section, key, p) for p in parts)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration.

    Raises
    ------
    ParseError
        On malformed lines, with the offending line number.
    ValidationError
        On missing sections, unknown keys or bad values; ``field`` names the
        offending ``section`` or ``section.key``.
    """
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), comment_prefixes=("#",),
        strict=True, empty_lines_in_values=False, default_section="\0defaults",
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key/value line before any [section] header", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        try:
            line = ast.literal_eval(line)  # configparser stores repr(line)
        except (ValueError, SyntaxError):
            pass
        raise ParseError(f"expected 'key = value', got {line.strip()!r}", lineno) from None

    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ValidationError(sec, f"unknown section (line {_line_of(text, sec)})")
        for key in cp[sec]:
            if key not in _ALLOWED_KEYS[sec]:
                raise ValidationError(f"{sec}.{key}",
                                      f"unknown key (line {_line_of(text, sec, key)})")
    if "model" not in cp:
        raise ValidationError("model", "section is required")

    m = cp["model"]
    model = ModelConfig()
    model.family = m.get("family", "fhn").strip()
    if model.family not in ("fhn", "polynomial"):
        raise ValidationError("model.family", "must be 'fhn' or 'polynomial'")
    for key in ("a", "b", "I"):
        if key in m:
            setattr(model, key, _number(text, "model", key, m[key]))
    if model.family == "polynomial":
        for key in ("f", "g"):
            if key not in m:
                raise ValidationError(f"model.{key}", "required for the polynomial family")
            setattr(model, key, _numbers(text, "model", key, m[key]))
        if len(model.f) > 6:
            raise ValidationError("model.f", "degree at most 5")
        if len(model.g) != 3:
            raise ValidationError("model.g", "expected g0, gx, gz")
        if "a" in m or "b" in m:
            raise ValidationError("model.a", "a and b only apply to the fhn family")
    elif "f" in m or "g" in m:
        raise ValidationError("model.f", "coefficients only apply to the polynomial family")
    if "epsilon" in m:
        model.epsilon = _number(text, "model", "epsilon", m["epsilon"])
        if not model.epsilon > 0:
            raise ValidationError("model.epsilon", "must be > 0")
    if "epsilons" in m:
        model.epsilons = _numbers(text, "model", "epsilons", m["epsilons"])
        if any(e <= 0 for e in model.epsilons):
            raise ValidationError("model.epsilons", "all values must be > 0")

    inp = None
    if "input" in cp:
        s = cp["input"]
        inp = InputConfig(kind=s.get("kind", "").strip())
        if inp.kind == "impulse":
            if "alpha" not in s:
                raise ValidationError("input.alpha", "required for an impulse")
            if "u_bar" in s or "duration" in s:
                raise ValidationError("input", "exactly one input kind: impulse takes only alpha")
            inp.alpha = _number(text, "input", "alpha", s["alpha"])
        elif inp.kind == "pulse":
            for key in ("u_bar", "duration"):
                if key not in s:
                    raise ValidationError(f"input.{key}", "required for a pulse")
            if "alpha" in s:
                raise ValidationError("input", "exactly one input kind: pulse takes u_bar and "
                                               "duration")
            inp.u_bar = _number(text, "input", "u_bar", s["u_bar"])
            parts = s["duration"].split()
            if len(parts) not in (1, 2) or (len(parts) == 2 and parts[1] not in ("period", "slow")):
                raise ValidationError("input.duration",
                                      "expected '<number> period' or '<number> slow'")
            inp.duration = _number(text, "input", "duration", parts[0])
            inp.duration_unit = parts[1] if len(parts) == 2 else "period"
            if inp.duration < 0:
                raise ValidationError("input.duration", "must be >= 0")
        else:
            raise ValidationError("input.kind", "must be 'impulse' or 'pulse'")

    num = NumericsConfig()
    if "numerics" in cp:
        for f in fields(NumericsConfig):
            if f.name in cp["numerics"]:
                kind = int if isinstance(getattr(num, f.name), int) else float
                v = _number(text, "numerics", f.name, cp["numerics"][f.name], kind)
                if v < 0 or (kind is float and v == 0 and f.name != "band"):
                    raise ValidationError(f"numerics.{f.name}", "must be positive")
                setattr(num, f.name, v)

    out = OutputConfig()
    if "output" in cp:
        for key in ("prefix", "dir"):
            if key in cp["output"]:
                setattr(out, key, cp["output"][key].strip())
    return RunConfig(model, inp, num, out)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
