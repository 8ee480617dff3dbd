import abc

import numpy as np

from libdefer.exceptions import ConfigurationError


class DensityFunction(metaclass=abc.ABCMeta):
    '''
    Black-box unnormalized density over a box.  Implementations map a batch
    of points in original units to the natural log of the density, with -inf
    for zero density and never NaN.  Batch entries are independent.
    '''
    name = "density"

    def __init__(self, dim):
        if int(dim) < 1:
            raise ConfigurationError("density dimension must be positive - got {}".format(dim))
        self.dim = int(dim)

    @abc.abstractmethod
    def log_density(self, points):
        pass

    def _batch(self, points):
        points = np.asarray(points, dtype=float)
        return points.reshape(-1, self.dim)

    def __call__(self, points):
        return self.log_density(points)

    def params(self):
        ''' Parameters recorded with a run '''
        return {}

    def open(self):
        return self

    def close(self):
        pass

    def __enter__(self):
        return self.open()

    def __exit__(self, *args):
        self.close()

    def __repr__(self):
        return "{}(dim={})".format(type(self).__name__, self.dim)


class FunctionDensity(DensityFunction):
    '''
    Wraps a python callable returning log densities.  With `vectorized`
    false the callable is applied point by point.
    '''
    name = "function"

    def __init__(self, dim, fn, vectorized=True):
        super(FunctionDensity, self).__init__(dim)
        self._fn = fn
        self._vectorized = vectorized

    def log_density(self, points):
        points = self._batch(points)
        if self._vectorized:
            return np.asarray(self._fn(points), dtype=float).reshape(-1)
        return np.array([float(self._fn(p)) for p in points])
