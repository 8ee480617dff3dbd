from collections import namedtuple

Checkpoint = namedtuple('Checkpoint', ['evals', 'log_z', 'entropy', 'decision_seconds', 'wall_seconds', 'unique_keys'])
RunResult = namedtuple('RunResult', ['tree', 'aggregates', 'timeline'])
Evidence = namedtuple('Evidence', ['z_hat', 'log_z_hat', 'all_zero'])
SubregionMass = namedtuple('SubregionMass', ['mass', 'probability'])
ConditionalPiece = namedtuple('ConditionalPiece', ['lo', 'hi', 'numerators', 'depths', 'density'])
Selection = namedtuple('Selection', ['cr1', 'cr2', 'cr3', 'nodes', 'high_mass'], defaults=(0,))
BenchRow = namedtuple('BenchRow', ['method', 'budget', 'seed', 'log_z_error', 'entropy_error', 'decision_seconds_per_eval'])
