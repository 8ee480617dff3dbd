from lace import logging
from lace.logging import trace

from libdefer.density import builtin
from libdefer.density.external import ExternalDensity
from libdefer.exceptions import ConfigurationError

TARGET_MAP = {
    "uniform": builtin.Uniform,
    "gaussian": builtin.Gaussian,
    "student_t": builtin.StudentT,
    "canoe": builtin.Canoe,
    "mog4": builtin.MoG4,
    "cigar": builtin.Cigar,
    "external": ExternalDensity,
}


class TargetSpec(object):
    '''
    Named target with its dimension and parameters.  Student's t means are
    drawn from the run seed unless given in `params`.
    '''
    def __init__(self, name, dim, params=None, seed=0):
        if name not in TARGET_MAP:
            raise ConfigurationError("unknown target '{}' - expected one of {}".format(name, sorted(TARGET_MAP)))
        try:
            dim = int(dim)
        except (TypeError, ValueError):
            raise ConfigurationError("target dimension must be an integer - got {}".format(dim))
        if dim < 1:
            raise ConfigurationError("target dimension must be positive - got {}".format(dim))
        self.name, self.dim = name, dim
        self.params = dict(params or {})
        self.seed_means = None
        if name == "student_t" and "mean" not in self.params:
            self.seed_means = builtin.student_t_means(dim, seed).tolist()
        if name == "external" and not self.params.get("command"):
            raise ConfigurationError("external target requires a command")

    def to_dict(self):
        result = {"name": self.name, "dim": self.dim, "params": self.params}
        if self.seed_means is not None:
            result["seed_means"] = self.seed_means
        return result


@trace.info("factory")
def makeDensity(spec):
    params = dict(spec.params)
    if spec.name == "student_t" and spec.seed_means is not None:
        params["mean"] = spec.seed_means
    try:
        return TARGET_MAP[spec.name](dim=spec.dim, **params)
    except TypeError as exp:
        logging.getLogger('libdefer').warn("Bad parameters for target {} - {}".format(spec.name, exp))
        raise ConfigurationError("invalid parameters for target '{}' - {}".format(spec.name, exp))
