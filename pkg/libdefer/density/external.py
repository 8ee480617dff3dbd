'''
Densities evaluated by an external program over stdio.

The program is sent "HELLO defer 1 <D>" and must answer "OK".  Afterwards
every point is written as one line of D space separated floats and the
program answers each line, in order, with one line holding the natural log
density or "-inf".
'''

import math
import shlex
import subprocess
import threading

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from lace import logging
from lace.logging import trace

from libdefer.density.base import DensityFunction
from libdefer.exceptions import ConfigurationError, EvaluationError
from libdefer.settings import EXTERNAL_CHUNK, EXTERNAL_HELLO, EXTERNAL_TIMEOUT


def format_point(point):
    return " ".join(repr(float(x)) for x in point)

def parse_reply(line):
    text = line.strip()
    try:
        value = float(text)
    except ValueError:
        raise EvaluationError("malformed density reply {!r}".format(line), line=line)
    if math.isnan(value) or value == math.inf:
        raise EvaluationError("invalid density reply {!r}".format(line), line=line)
    return value


class _Worker(object):
    def __init__(self, argv, dim, rank):
        self.rank = rank
        self.lock = threading.Lock()
        self._log = logging.getLogger('libdefer')
        try:
            self.proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                         universal_newlines=True, bufsize=1)
        except OSError as exp:
            raise ConfigurationError("unable to start density program {} - {}".format(argv, exp))
        hello = EXTERNAL_HELLO.format(dim=dim)
        self._log.debug("[{}] {} --> {}".format(rank, hello, argv[0]))
        reply = self._talk([hello])[0]
        if reply.strip() != "OK":
            self.close()
            raise EvaluationError("density program refused handshake - got {!r}".format(reply), line=reply)

    def _talk(self, lines):
        try:
            self.proc.stdin.write("".join(line + "\n" for line in lines))
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exp:
            raise EvaluationError("density program stopped accepting input - {}".format(exp))
        replies = []
        for sent in lines:
            reply = self.proc.stdout.readline()
            if not reply:
                code = self.proc.poll()
                raise EvaluationError("density program exited [code={}] before answering {!r}".format(code, sent), line=sent)
            replies.append(reply)
        return replies

    def evaluate(self, points):
        with self.lock:
            return [parse_reply(r) for r in self._talk([format_point(p) for p in points])]

    def close(self):
        if self.proc.poll() is not None:
            return
        try:
            self.proc.stdin.close()
            self.proc.wait(timeout=EXTERNAL_TIMEOUT)
        except (OSError, subprocess.TimeoutExpired):
            self._log.warn("[{}] density program did not exit, killing it".format(self.rank))
            self.proc.kill()
            self.proc.wait()


class ExternalDensity(DensityFunction):
    '''
    Runs `command` (a string split with shell rules, or an argument list) in
    `workers` subprocesses.  Batches are cut into chunks that are spread
    round-robin over the workers; replies are matched by line order.
    '''
    name = "external"

    @trace.debug("ExternalDensity")
    def __init__(self, command, dim, workers=1, chunk=EXTERNAL_CHUNK):
        super(ExternalDensity, self).__init__(dim)
        self.command = command
        self._argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self._argv:
            raise ConfigurationError("external density needs a command")
        if int(workers) < 1 or int(chunk) < 1:
            raise ConfigurationError("external workers and chunk size must be positive")
        self.workers, self.chunk = int(workers), int(chunk)
        self._pool = []
        self.log = logging.getLogger('libdefer')

    @trace.info("ExternalDensity")
    def open(self):
        if not self._pool:
            self.log.info("Starting density program [{}] x{}".format(self.command, self.workers))
            for rank in range(self.workers):
                self._pool.append(_Worker(self._argv, self.dim, rank))
        return self

    @trace.info("ExternalDensity")
    def close(self):
        for worker in self._pool:
            worker.close()
        self._pool = []

    def log_density(self, points):
        points = self._batch(points)
        if not len(points):
            return np.empty(0)
        self.open()
        chunks = [points[i:i + self.chunk] for i in range(0, len(points), self.chunk)]
        if len(self._pool) == 1 or len(chunks) == 1:
            results = [self._pool[0].evaluate(c) for c in chunks]
        else:
            with ThreadPoolExecutor(max_workers=len(self._pool)) as executor:
                futures = [executor.submit(self._pool[i % len(self._pool)].evaluate, c) for i, c in enumerate(chunks)]
                results = [f.result() for f in futures]
        return np.array([v for r in results for v in r], dtype=float)

    def params(self):
        return {"command": self.command, "workers": self.workers}
