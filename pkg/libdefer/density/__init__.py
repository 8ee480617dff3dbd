from libdefer.density.base import DensityFunction, FunctionDensity
from libdefer.density.builtin import Canoe, Cigar, Gaussian, MoG4, StudentT, Uniform
from libdefer.density.external import ExternalDensity
from libdefer.density.factory import TargetSpec, makeDensity


def uniform(dim):
    return Uniform(dim)

def gaussian(dim, mean=None, scale=0.05):
    return Gaussian(dim, mean, scale)

def student_t(dim, mean, scale=0.01, dof=None):
    return StudentT(dim, mean, scale, dof)

def canoe(dim):
    return Canoe(dim)

def mog4():
    return MoG4()

def cigar(dim):
    return Cigar(dim)

def external(command, dim, workers=1):
    return ExternalDensity(command, dim, workers)
