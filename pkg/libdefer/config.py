'''
Run configuration shared by the command line tools.  A config file holds
flat `key = value` lines with `#` comments; command line flags override
its values and the merged result is validated against CONFIG_SCHEMA.
'''

import os

import jsonschema

from lace import logging
from lace.logging import trace

from libdefer.criteria import CriteriaConfig
from libdefer.density import TargetSpec, makeDensity
from libdefer.density.factory import TARGET_MAP
from libdefer.engine import EngineConfig
from libdefer.exceptions import ConfigurationError
from libdefer.partition import DomainSpec
from libdefer.settings import ALPHA, BETA, DEFER_ROOT, LINEAR_POINTS, PHI
from libdefer.util.util import human2count

_NUMBERS = {"type": "array", "items": {"type": "number"}, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["target", "budget"],
    "properties": {
        "target": {"enum": sorted(TARGET_MAP)},
        "dims": {"type": "integer", "minimum": 1},
        "budget": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "out": {"type": "string"},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "phi": {"type": "number", "exclusiveMinimum": 1},
        "big_m": {"type": "integer", "minimum": 2},
        "l": {"type": "integer", "minimum": 0},
        "b": {"type": "integer", "minimum": 0},
        "cr2": {"type": "boolean"},
        "cr3": {"type": "boolean"},
        "timing": {"type": "boolean"},
        "external_cmd": {"type": "string"},
        "workers": {"type": "integer", "minimum": 1},
        "lower": _NUMBERS,
        "upper": _NUMBERS,
        "checkpoint_every": {"type": "integer", "minimum": 1},
        "checkpoints": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "scale": {"type": "number", "exclusiveMinimum": 0},
    },
}

def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean: {!r}".format(text))

def _numbers(text):
    return [float(x) for x in text.replace(",", " ").split()]

def _counts(text):
    return [human2count(x) for x in text.replace(",", " ").split()]

COERCE = {
    "dims": int, "budget": human2count, "seed": int, "beta": float, "alpha": float, "phi": float,
    "big_m": int, "l": int, "b": int, "cr2": _bool, "cr3": _bool, "timing": _bool, "workers": int,
    "lower": _numbers, "upper": _numbers, "checkpoint_every": human2count, "checkpoints": _counts,
    "scale": float,
}

@trace.info("config")
def parse_config(text, source="<config>"):
    ''' Typed dictionary from flat `key = value` text '''
    result = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError("{}:{}: expected 'key = value' - got {!r}".format(source, lineno, raw))
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_SCHEMA["properties"]:
            raise ConfigurationError("{}:{}: unknown key '{}'".format(source, lineno, key))
        try:
            result[key] = COERCE.get(key, str)(value)
        except ValueError as exp:
            raise ConfigurationError("{}:{}: bad value for '{}' - {}".format(source, lineno, key, exp))
    return result

def read_config(path):
    try:
        with open(path) as f:
            return parse_config(f.read(), path)
    except OSError as exp:
        raise ConfigurationError("unable to read config {} - {}".format(path, exp))

def merge(file_values, flag_values):
    ''' Flags that were given override file values '''
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return merged


class RunConfig(object):
    '''
    Validated run settings: the target, its domain and the engine and
    criteria parameters.
    '''
    @trace.debug("RunConfig")
    def __init__(self, values):
        values = dict(values)
        if values.get("target") == "mog4":
            values.setdefault("dims", 4)
        try:
            jsonschema.validate(values, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exp:
            raise ConfigurationError("invalid configuration - {}".format(exp.message))
        if "dims" not in values:
            raise ConfigurationError("the number of dimensions is required")
        self.values = values
        self.dim = values["dims"]
        self.seed = values.get("seed", 0)
        self.out = values.get("out", os.path.join(DEFER_ROOT, "out"))
        self.record_timing = values.get("timing", True)

        params = {}
        if values["target"] == "external":
            if "external_cmd" not in values:
                raise ConfigurationError("target 'external' requires --external-cmd")
            params = {"command": values["external_cmd"], "workers": values.get("workers", 1)}
        elif values["target"] == "gaussian" and "scale" in values:
            params = {"scale": values["scale"]}
        self.target = TargetSpec(values["target"], self.dim, params, seed=self.seed)

        lower = values.get("lower", [0.0] * self.dim)
        upper = values.get("upper", [1.0] * self.dim)
        if len(lower) != self.dim or len(upper) != self.dim:
            raise ConfigurationError("domain bounds need {} values each".format(self.dim))
        self.domain = DomainSpec(lower, upper)

        self.criteria = CriteriaConfig(beta=values.get("beta", BETA), alpha=values.get("alpha", ALPHA),
                                       phi=values.get("phi", PHI), big_m=values.get("big_m"),
                                       linear_points=values.get("l", LINEAR_POINTS), ball_points=values.get("b"),
                                       use_cr2=values.get("cr2", True), use_cr3=values.get("cr3", True))
        self.engine = EngineConfig(values["budget"], seed=self.seed, criteria=self.criteria,
                                   checkpoint_every=values.get("checkpoint_every"),
                                   checkpoints=values.get("checkpoints", ()), record_timing=self.record_timing)
        logging.getLogger('libdefer').debug("Run configuration {}".format(self.echo()))

    def density(self):
        return makeDensity(self.target)

    def echo(self):
        return dict(sorted(self.values.items()))
