"""Run configuration: a flat `key = value` text file plus command-line overrides."""

from dataclasses import asdict, dataclass, field, fields
import math

from .errors import ConfigError

MC_COMMANDS = ("measure", "pack", "distortion")
FORMATS = ("csv", "json")


@dataclass
class RunConfig:
    """Every knob a command may read; defaults are echoed into each output."""

    command: str = ""
    preset: str = "koch"
    twist: float = 0.15
    generation: int = 6
    atlas: str = ""
    atlas_alpha: float = 1.0
    atlas_beta: float = 0.0
    scales: tuple = ()
    alpha: float = 1.26
    gamma: float = 0.0
    a: float = 0.0
    b: float = 0.0
    eta: float = 0.3
    signs: str = "bb"
    weights: str = "surrogate"
    region: str = "boundary"
    walks: int = 100_000
    seed: int = None
    threads: int = 1
    output: str = "-"
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def validate(self, mc=None):
        if self.format not in FORMATS:
            raise ConfigError(f"field 'format': expected one of {FORMATS}, got {self.format!r}")
        if self.walks <= 0:
            raise ConfigError("field 'walks': must be positive")
        if self.threads <= 0:
            raise ConfigError("field 'threads': must be positive")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ConfigError("field 'eta': must be positive")
        needs_seed = (self.command in MC_COMMANDS or self.weights == "mc") if mc is None else mc
        if needs_seed and self.seed is None:
            raise ConfigError(f"field 'seed': required for the Monte Carlo command {self.command!r}")
        return self

    def as_dict(self):
        d = asdict(self)
        d["scales"] = list(self.scales)
        return d


_TYPES = {f.name: f.type for f in fields(RunConfig) if f.name != "extra"}


def _coerce(name, raw, lineno=None):
    where = f"line {lineno}, " if lineno is not None else ""
    kind = _TYPES[name]
    try:
        if name == "seed":
            return int(raw)
        if kind in (int, "int"):
            return int(raw.replace("_", ""))
        if kind in (float, "float"):
            return float(raw)
        if kind in (tuple, "tuple"):
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return raw
    except ValueError:
        raise ConfigError(f"{where}field '{name}': cannot parse {raw!r}") from None


def parse_config_text(text):
    """Parse `key = value` lines; '#' starts a comment.  Unknown keys and repeats are errors."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}, field '{key}': unknown key")
        if key in out:
            raise ConfigError(f"line {lineno}, field '{key}': given twice")
        out[key] = _coerce(key, raw, lineno)
    return out


def load_config(path=None, **overrides):
    """Config file values, then non-None overrides, on top of the defaults."""
    values = {}
    if path:
        with open(path) as fh:
            values.update(parse_config_text(fh.read()))
    for k, v in overrides.items():
        if v is None:
            continue
        if k not in _TYPES:
            raise ConfigError(f"field '{k}': unknown key")
        values[k] = v
    return RunConfig(**values)
