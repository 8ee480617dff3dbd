'''
Synthetic targets on the unit cube.  Gaussian terms are evaluated in log
space from Cholesky factors computed at construction.
'''

import math

import numpy as np

from scipy.linalg import solve_triangular
from scipy.special import gammaln

from libdefer.density.base import DensityFunction
from libdefer.exceptions import ConfigurationError
from libdefer.util import rng as streams

LOG_2PI = math.log(2.0 * math.pi)

MOG4_MEAN_A = [0.6326, 0.7401, 0.7232, 0.2471]
MOG4_MEAN_B = [0.5139, 0.4667, 0.3777, 0.7995]
MOG4_COV_A = [[2.25, -1.0, 0.0, 0.0],
              [-1.0, 2.25, 0.0, 0.0],
              [0.0, 0.0, 2.25, 0.0],
              [0.0, 0.0, 0.0, 2.25]]
MOG4_COV_B = [[2.25 ** 2, -2.25, 1.0, -1.0],
              [-2.25, 2.25 ** 2, 0.0, 0.0],
              [1.0, 0.0, 2.25 ** 2, 0.0],
              [-1.0, 0.0, 0.0, 2.25 ** 2]]
MOG4_WEIGHT_A = 2.5


def squared_norms(z):
    ''' Sum of squares of every row, accumulated column by column '''
    total = np.zeros(len(z))
    for column in np.asarray(z).T:
        total += column * column
    return total

def correlated_cov(dim, scale, ones, eye):
    ''' scale * (ones * J + eye * I) '''
    return scale * (ones * np.ones((dim, dim)) + eye * np.eye(dim))


class GaussianTerm(object):
    def __init__(self, mean, cov):
        self.mean = np.asarray(mean, dtype=float).reshape(-1)
        cov = np.asarray(cov, dtype=float)
        if cov.shape != (len(self.mean), len(self.mean)):
            raise ConfigurationError("covariance of shape {} does not match a mean of length {}".format(cov.shape, len(self.mean)))
        try:
            self.chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exp:
            raise ConfigurationError("covariance is not positive definite - {}".format(exp))
        dim = len(self.mean)
        self._linv = solve_triangular(self.chol, np.eye(dim), lower=True)
        self._norm = -0.5 * dim * LOG_2PI - float(np.sum(np.log(np.diag(self.chol))))

    def log_pdf(self, points):
        ''' Log-density of every row, independent of the other rows of the batch '''
        diff = points - self.mean
        z = np.zeros_like(diff)
        for i, row in enumerate(self._linv):
            for j in range(i + 1):
                z[:, i] += row[j] * diff[:, j]
        return self._norm - 0.5 * squared_norms(z)


class Uniform(DensityFunction):
    name = "uniform"

    def log_density(self, points):
        return np.zeros(len(self._batch(points)))


class Gaussian(DensityFunction):
    ''' Isotropic Gaussian with standard deviation `scale` '''
    name = "gaussian"

    def __init__(self, dim, mean=None, scale=0.05):
        super(Gaussian, self).__init__(dim)
        if not scale > 0:
            raise ConfigurationError("gaussian scale must be positive - got {}".format(scale))
        self.mean = np.full(self.dim, 0.5) if mean is None else np.asarray(mean, dtype=float).reshape(-1)
        self.scale = float(scale)
        self._term = GaussianTerm(self.mean, self.scale ** 2 * np.eye(self.dim))

    def log_density(self, points):
        return self._term.log_pdf(self._batch(points))

    def params(self):
        return {"mean": self.mean.tolist(), "scale": self.scale}


def student_t_means(dim, seed):
    ''' Per-run means drawn from U(0.2, 0.8) in every dimension '''
    return streams.stream(seed, streams.MEANS).uniform(0.2, 0.8, size=int(dim))

class StudentT(DensityFunction):
    name = "student_t"

    def __init__(self, dim, mean, scale=0.01, dof=None):
        super(StudentT, self).__init__(dim)
        self.mean = np.asarray(mean, dtype=float).reshape(-1)
        if len(self.mean) != self.dim or not np.all((self.mean > 0) & (self.mean < 1)):
            raise ConfigurationError("student_t mean must lie in the open unit cube - got {}".format(self.mean.tolist()))
        self.scale = float(scale)
        self.dof = 2.5 + self.dim / 2.0 if dof is None else float(dof)
        if not (self.scale > 0 and self.dof > 0):
            raise ConfigurationError("student_t scale and degrees of freedom must be positive")
        d, nu = self.dim, self.dof
        self._norm = (gammaln((nu + d) / 2.0) - gammaln(nu / 2.0)
                      - 0.5 * d * math.log(nu * math.pi) - d * math.log(self.scale))

    def log_density(self, points):
        diff = (self._batch(points) - self.mean) / self.scale
        return self._norm - 0.5 * (self.dof + self.dim) * np.log1p(squared_norms(diff) / self.dof)

    def params(self):
        return {"mean": self.mean.tolist(), "scale": self.scale, "dof": self.dof}


class Canoe(DensityFunction):
    '''
    max(2 + 5 N(x | mu, inner) - 10 N(x | mu, outer), 0), -inf where the
    bracket is not positive.
    '''
    name = "canoe"

    def __init__(self, dim):
        super(Canoe, self).__init__(dim)
        if self.dim < 2:
            raise ConfigurationError("canoe needs at least 2 dimensions - got {}".format(self.dim))
        mean = np.full(self.dim, 0.5)
        self._inner = GaussianTerm(mean, correlated_cov(self.dim, 0.01, 0.95, 0.05))
        self._outer = GaussianTerm(mean, correlated_cov(self.dim, 0.02, 0.60, 0.40))

    def log_density(self, points):
        points = self._batch(points)
        a = math.log(5.0) + self._inner.log_pdf(points)
        b = math.log(10.0) + self._outer.log_pdf(points)
        c = math.log(2.0)
        shift = np.maximum(np.maximum(a, b), c)
        v = np.exp(c - shift) + np.exp(a - shift) - np.exp(b - shift)
        return np.where(v > 0, shift + np.log(np.where(v > 0, v, 1.0)), -np.inf)


class MoG4(DensityFunction):
    ''' 2.5 N(x | mu_a, cov_a) + N(x | mu_b, cov_b) in four dimensions '''
    name = "mog4"

    def __init__(self, dim=4):
        super(MoG4, self).__init__(dim)
        if self.dim != 4:
            raise ConfigurationError("mog4 is defined in 4 dimensions only - got {}".format(self.dim))
        self._a = GaussianTerm(MOG4_MEAN_A, 0.01 ** 2 * np.array(MOG4_COV_A))
        self._b = GaussianTerm(MOG4_MEAN_B, 0.01 ** 2 * np.array(MOG4_COV_B))

    def log_density(self, points):
        points = self._batch(points)
        return np.logaddexp(math.log(MOG4_WEIGHT_A) + self._a.log_pdf(points), self._b.log_pdf(points))


class Cigar(DensityFunction):
    name = "cigar"

    def __init__(self, dim):
        super(Cigar, self).__init__(dim)
        if self.dim < 2:
            raise ConfigurationError("cigar needs at least 2 dimensions - got {}".format(self.dim))
        self._term = GaussianTerm(np.full(self.dim, 0.5), correlated_cov(self.dim, 0.01, 0.99, 0.01))

    def log_density(self, points):
        return self._term.log_pdf(self._batch(points))
