'''
Counter-based random streams.  Every consumer draws from its own Philox
generator keyed by the run seed and a tuple of stream coordinates, so the
draws of one criterion at one iteration never depend on any other draw.
'''
import numpy as np

CR2, CR3, SAMPLE, BENCH, MEANS = 2, 3, 4, 5, 6

def stream(seed, *key):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed)] + [int(k) for k in key])))
