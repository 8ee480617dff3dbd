'''
Result files: the partition dump (JSON lines, one leaf per line), the
checkpoint timeline, sample exports and run metadata.  Every file is written
to a temporary sibling first and renamed into place.
'''

import csv
import io
import json
import math
import os
import tempfile

from fractions import Fraction

import jsonschema

from lace import logging
from lace.logging import trace

from libdefer.engine import Aggregates
from libdefer.exceptions import ConfigurationError, CorruptTreeError
from libdefer.partition import DomainSpec, TernaryBox, Tree

TIMELINE_FIELDS = ["evals", "log_z", "entropy", "decision_seconds", "wall_seconds"]

_LOG_F = {"oneOf": [{"type": "number"}, {"enum": ["-inf"]}]}
_COORDS = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_INTS = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}

LEAF_SCHEMA = {
    "type": "object",
    "required": ["id", "lo", "hi", "depths", "log_f"],
    "properties": {
        "id": {"type": "integer", "minimum": 0},
        "lo": _COORDS,
        "hi": _COORDS,
        "depths": _INTS,
        "numerators": _INTS,
        "log_f": _LOG_F,
    },
}

log = logging.getLogger('libdefer')


def _number(x):
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x

@trace.debug("dump")
def prepare_output(directory):
    ''' Create `directory` if needed and make sure files can be written to it '''
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exp:
        raise ConfigurationError("cannot create output directory {} - {}".format(directory, exp))
    if not os.access(directory, os.W_OK | os.X_OK):
        raise ConfigurationError("output directory {} is not writable".format(directory))
    return directory

def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".{}.".format(os.path.basename(path)))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def leaf_record(tree, nid):
    box = tree.box(nid)
    lo, hi = tree.bounds(nid)
    return {"id": nid, "lo": [float(x) for x in lo], "hi": [float(x) for x in hi],
            "depths": list(box.depths), "log_f": _number(tree.log_f(nid)),
            "numerators": list(box.numerators)}

def dumps_partitions(tree):
    return "".join(json.dumps(leaf_record(tree, nid)) + "\n" for nid in tree.leaves())

@trace.info("dump")
def write_partitions(tree, path):
    return write_atomic(path, dumps_partitions(tree))


def _parse_leaf(line, lineno, dim):
    try:
        record = json.loads(line)
        jsonschema.validate(record, LEAF_SCHEMA)
    except (ValueError, jsonschema.ValidationError) as exp:
        raise CorruptTreeError("line {} is not a partition record - {}".format(lineno, getattr(exp, "message", exp)), line=line)
    sizes = {len(record["lo"]), len(record["hi"]), len(record["depths"]), len(record.get("numerators", record["depths"]))}
    if len(sizes) != 1 or (dim is not None and sizes != {dim}):
        raise CorruptTreeError("line {} has inconsistent dimensions".format(lineno), line=line)
    if any(h <= l for l, h in zip(record["lo"], record["hi"])):
        raise CorruptTreeError("line {} has an empty box".format(lineno), line=line)
    log_f = record["log_f"]
    record["log_f"] = -math.inf if log_f == "-inf" else float(log_f)
    return record

@trace.info("dump")
def read_partitions(source):
    '''
    Read a partition dump from a path or an open text stream.  Returns a
    flattened (tree, aggregates) pair whose root holds every dumped leaf;
    the domain is the bounding box of the leaves.
    '''
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source) as f:
                text = f.read()
        except OSError as exp:
            raise CorruptTreeError("unable to read partition dump {} - {}".format(source, exp))
    else:
        text = source.read()

    records, dim = [], None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        record = _parse_leaf(line, lineno, dim)
        dim = len(record["depths"])
        records.append(record)
    if not records:
        raise CorruptTreeError("partition dump holds no leaves")

    lower = [min(r["lo"][i] for r in records) for i in range(dim)]
    upper = [max(r["hi"][i] for r in records) for i in range(dim)]
    domain = DomainSpec(lower, upper)
    leaves, volume = [], Fraction(0)
    for r in records:
        depths = tuple(r["depths"])
        if "numerators" in r:
            numerators = tuple(r["numerators"])
        else:
            numerators = tuple(int(round((r["lo"][i] - lower[i]) / (upper[i] - lower[i]) * 3 ** k)) for i, k in enumerate(depths))
        if any(n >= 3 ** k for n, k in zip(numerators, depths)):
            raise CorruptTreeError("leaf {} lies outside its ternary grid".format(r["id"]))
        leaves.append((TernaryBox(numerators, depths), r["log_f"]))
        volume += Fraction(1, 3 ** sum(depths))
    if volume != 1 or len(set(box for box, _ in leaves)) != len(leaves):
        raise CorruptTreeError("dumped leaves do not tile the domain [volume={}]".format(float(volume)))

    tree = Tree.from_leaves(domain, leaves)
    log.debug("Read {} leaves over {}".format(len(leaves), domain))
    return tree, Aggregates.from_tree(tree)


def _row(values):
    return [repr(float(v)) if isinstance(v, float) else v for v in values]

def dumps_timeline(timeline):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TIMELINE_FIELDS)
    for c in timeline:
        writer.writerow(_row([c.evals, c.log_z, c.entropy, c.decision_seconds, c.wall_seconds]))
    return buf.getvalue()

@trace.info("dump")
def write_timeline(timeline, path):
    return write_atomic(path, dumps_timeline(timeline))

def read_timeline(path):
    with open(path) as f:
        return [{k: (int(v) if k == "evals" else float(v)) for k, v in row.items()} for row in csv.DictReader(f)]

@trace.info("dump")
def write_samples(points, dim, path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x{}".format(i) for i in range(dim)])
    for p in points:
        writer.writerow([repr(float(x)) for x in p])
    return write_atomic(path, buf.getvalue())

@trace.info("dump")
def write_meta(meta, path):
    return write_atomic(path, json.dumps(meta, indent=2, sort_keys=True) + "\n")
