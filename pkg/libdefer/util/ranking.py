"""
Descending rankings that treat nearly equal values as ties.

Two values tie when they lie within `rel * max(floor, |leader|)` of the
first value of their group; tied items keep the order of `tie`.

  >>> tie_ranked([(0, 1.0), (1, 1.0 + 1e-15), (2, 0.5)], value=lambda i: i[1], tie=lambda i: i[0])
  [(0, 1.0), (1, 1.000000000000001), (2, 0.5)]
  >>> tie_ranked([3, 1, 2], value=float, tie=int)
  [3, 2, 1]
"""

import math

from libdefer.settings import RANK_TOLERANCE


def near(leader, value, rel=RANK_TOLERANCE, floor=1.0):
    if leader == value:
        return True
    if not (math.isfinite(leader) and math.isfinite(value)):
        return False
    return abs(leader - value) <= rel * max(floor, abs(leader))

def tie_ranked(items, value, tie, rel=RANK_TOLERANCE, floor=1.0):
    ordered = sorted(items, key=lambda i: (-value(i), tie(i)))
    ranked, group = [], []
    for item in ordered:
        if group and not near(value(group[0]), value(item), rel, floor):
            ranked.extend(sorted(group, key=tie))
            group = []
        group.append(item)
    ranked.extend(sorted(group, key=tie))
    return ranked


if __name__ == "__main__":
    import doctest
    doctest.testmod()
