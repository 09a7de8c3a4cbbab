"""Run configuration: flat ``section.key = value`` text files.

Blank lines and ``#`` comments are ignored.  Every key must appear in
:data:`SCHEMA`; unknown keys and unparsable values raise
:class:`ConfigurationError` naming the key.  Omitted keys take their defaults.
"""
import hashlib
from importlib import resources
from pathlib import Path

from .exceptions import ConfigurationError


def _opt(parse):
    def inner(text):
        return None if text.lower() in ("", "none", "auto") else parse(text)
    inner.__name__ = f"optional {parse.__name__}"
    return inner


def _bool(text):
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise ValueError("must be an unsigned 64-bit integer")
    return v


def _choice(*options):
    def inner(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    inner.__name__ = "choice"
    return inner


# key -> (parser, default, checker or None)
SCHEMA = {
    "scenario.name": (_choice("tumor", "sludge", "none"), "tumor", None),
    "scenario.n": (int, 64, lambda v: v >= 2),
    "scenario.clutter_level": (float, 0.3, lambda v: v >= 0),
    "scenario.signature_amplitude": (float, 1.0, lambda v: v > 0),
    "scenario.pulse_width": (int, 8, lambda v: v >= 1),
    "scenario.target_lo": (_opt(int), None, None),
    "scenario.target_hi": (_opt(int), None, None),
    "scenario.profile_count": (int, 4, lambda v: v >= 1),
    "scenario.noise_free": (_bool, False, None),
    "scenario.volume_max": (float, 50.0, lambda v: v > 0),
    "scenario.volume_steps": (int, 25, lambda v: v >= 1),
    "run.n_train": (int, 200, lambda v: v >= 1),
    "run.n_test": (int, 500, lambda v: v >= 1),
    "run.master_seed": (_u64, 0, None),
    "sensor.kind": (_choice("identity", "crude"), "crude", None),
    "sensor.m": (int, 32, lambda v: v >= 1),
    "sensor.width": (float, 1.0, lambda v: v > 0),
    "sensor.noise_std": (float, 0.05, lambda v: v >= 0),
    "asin.method": (_choice("identity", "random_projection", "fisher_discriminant",
                            "energy_bands"), "fisher_discriminant", None),
    "asin.k": (int, 4, lambda v: v >= 1),
    "asin.seed": (_opt(_u64), None, None),
    "train.epochs": (int, 500, lambda v: v >= 1),
    "train.learning_rate": (float, 0.5, lambda v: 0 < v <= 10),
    "train.l2": (float, 0.0, lambda v: v >= 0),
    "train.seed": (_opt(_u64), None, None),
    "interpret.target_pfp": (float, 0.05, lambda v: 0 < v < 1),
    "interpret.calibration_fraction": (float, 0.0, lambda v: 0 <= v < 1),
    "resolution.enabled": (_bool, False, None),
    "resolution.kind": (_choice("np", "cr", "both"), "both", None),
    "resolution.channel": (_choice("pipeline", "location", "linear", "quadratic", "constant"),
                           "pipeline", None),
    "resolution.epsilon": (float, 0.05, lambda v: v >= 0),
    "resolution.theta0": (float, 0.0, None),
    "resolution.delta_max": (float, 1.0, lambda v: v > 0),
    "resolution.n_grid": (int, 21, lambda v: v >= 2),
    "resolution.n_mc": (int, 2000, lambda v: v >= 100),
    "resolution.n_samples": (int, 2000, lambda v: v >= 100),
    "resolution.h": (_opt(float), None, lambda v: v is None or v > 0),
    "resolution.sigma": (_opt(float), None, lambda v: v is None or v > 0),
    "resolution.gain": (float, 2.0, None),
    "resolution.n_inner": (int, 256, lambda v: v >= 1),
    "check.min_accuracy": (float, 0.95, lambda v: 0 <= v <= 1),
    "check.min_pearson": (float, 0.90, lambda v: -1 <= v <= 1),
    "output.dir": (_opt(str), None, None),
}


class RunConfig(dict):
    """Parsed configuration, keyed by full ``section.key`` names."""

    def section(self, name):
        prefix = name + "."
        return {k[len(prefix):]: v for k, v in self.items() if k.startswith(prefix)}

    def canonical(self):
        return "".join(f"{k} = {self[k]}\n" for k in sorted(self))

    def digest(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def set(self, key, value):
        _check(key, value)
        self[key] = value


def _check(key, value):
    if key not in SCHEMA:
        raise ConfigurationError(f"unknown config key '{key}'", key=key)
    checker = SCHEMA[key][2]
    if checker is not None and value is not None and not checker(value):
        raise ConfigurationError(f"invalid value for '{key}': {value!r}", key=key)


def parse_config(text, source="<string>"):
    cfg = RunConfig({k: entry[1] for k, entry in SCHEMA.items()})
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigurationError(f"{source}:{lineno}: unknown config key '{key}'", key=key)
        try:
            parsed = SCHEMA[key][0](value)
        except ValueError as exc:
            raise ConfigurationError(
                f"{source}:{lineno}: cannot parse '{key}' = {value!r}: {exc}", key=key) from exc
        try:
            _check(key, parsed)
        except ConfigurationError as exc:
            raise ConfigurationError(f"{source}:{lineno}: {exc}", key=key) from exc
        cfg[key] = parsed
    return cfg


def preset_names():
    return sorted(p.name[:-4] for p in resources.files("asinlab.presets").iterdir()
                  if p.name.endswith(".cfg"))


def load_config(path_or_preset):
    """Read a config file, or a bundled preset by name (``tumor``, ``sludge``, ...)."""
    path = Path(path_or_preset)
    if path.is_file():
        return parse_config(path.read_text(), str(path))
    name = str(path_or_preset)
    if name in preset_names():
        text = resources.files("asinlab.presets").joinpath(name + ".cfg").read_text()
        return parse_config(text, f"preset:{name}")
    raise ConfigurationError(f"no config file or preset named '{path_or_preset}'")
