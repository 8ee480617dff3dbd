import heapq
import math

from libdefer.exceptions import InvariantError
from libdefer.util.ranking import near


class LeafIndex(object):
    '''
    Map from depth-multiset key to a max-heap of live leaves ordered by
    log-density.  All leaves under one key share their volume, so this
    ordering equals ordering by ordinate.  Removal is lazy: entries of dead
    leaves stay in the heap until they surface at its head, where they are
    purged; every bucket head is therefore live.  Log-densities that are
    equal up to rounding tie and the lower node id heads the bucket.
    '''
    def __init__(self):
        self._buckets = {}
        self._live = {}

    def __len__(self):
        return len(self._live)

    def __contains__(self, node_id):
        return node_id in self._live

    def insert(self, node_id, key, log_f):
        if node_id in self._live:
            raise InvariantError("leaf {} is already indexed".format(node_id), node=node_id)
        heapq.heappush(self._buckets.setdefault(key, []), (-log_f, node_id))
        self._live[node_id] = key

    def remove(self, node_id):
        key = self._live.pop(node_id, None)
        if key is None:
            raise InvariantError("leaf {} is not indexed".format(node_id), node=node_id)
        if self._buckets[key][0][1] == node_id:
            self._purge(key)

    def _purge(self, key):
        bucket = self._buckets[key]
        while bucket and bucket[0][1] not in self._live:
            heapq.heappop(bucket)
        if not bucket:
            del self._buckets[key]

    def _head(self, bucket):
        top = -bucket[0][0]
        if top == -math.inf:
            return bucket[0]
        head, stack = bucket[0], [0]
        while stack:
            i = stack.pop()
            for c in (2 * i + 1, 2 * i + 2):
                if c < len(bucket) and near(top, -bucket[c][0]):
                    stack.append(c)
                    if bucket[c][1] < head[1] and bucket[c][1] in self._live:
                        head = bucket[c]
        return head

    def key_of(self, node_id):
        return self._live[node_id]

    def peek(self, key):
        ''' (log_f, node_id) of the maximal live leaf under `key`, or None '''
        bucket = self._buckets.get(key)
        if not bucket:
            return None
        neg, node_id = self._head(bucket)
        return -neg, node_id

    def keys(self):
        return self._buckets.keys()

    @property
    def unique_keys(self):
        return len(self._buckets)

    def heads(self):
        for key, bucket in self._buckets.items():
            neg, node_id = self._head(bucket)
            yield key, -neg, node_id


def index_insert(index, node_id, key, log_f):
    index.insert(node_id, key, log_f)
    return index

def index_remove(index, node_id):
    index.remove(node_id)
    return index
