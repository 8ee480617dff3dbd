import abc
import math

from lace.logging import trace

from libdefer.settings import CHECKPOINT_GROWTH


class AbstractSchedule(metaclass=abc.ABCMeta):
    @abc.abstractmethod
    def setSource(self, source):
        """
        Prepares the schedule for a run, source is the
        evaluation budget of that run.
        """
        pass

    @abc.abstractmethod
    def get(self, context):
        """
        get emits the evaluation count at which the next
        checkpoint is due, given the current count in
        context["evals"], or None when no further
        checkpoint is scheduled.
        """
        pass


class GeometricSchedule(AbstractSchedule):
    def __init__(self, growth=CHECKPOINT_GROWTH):
        self._growth = growth

    @trace.debug("GeometricSchedule")
    def setSource(self, source):
        self._budget = source

    @trace.debug("GeometricSchedule")
    def get(self, context={}):
        evals = context.get("evals", 0)
        due = evals + max(1, int(math.ceil(evals * self._growth)))
        return due if due < self._budget else None

class IntervalSchedule(AbstractSchedule):
    def __init__(self, every):
        self._every = every

    @trace.debug("IntervalSchedule")
    def setSource(self, source):
        self._budget = source

    @trace.debug("IntervalSchedule")
    def get(self, context={}):
        evals = context.get("evals", 0)
        due = (evals // self._every + 1) * self._every
        return due if due < self._budget else None

class FixedSchedule(AbstractSchedule):
    def __init__(self, points):
        self._points = sorted(set(int(p) for p in points))

    @trace.debug("FixedSchedule")
    def setSource(self, source):
        self._budget = source

    @trace.debug("FixedSchedule")
    def get(self, context={}):
        evals = context.get("evals", 0)
        for p in self._points:
            if evals < p < self._budget:
                return p
        return None

class UnionSchedule(AbstractSchedule):
    def __init__(self, *schedules):
        self._schedules = schedules

    @trace.debug("UnionSchedule")
    def setSource(self, source):
        for s in self._schedules:
            s.setSource(source)

    @trace.debug("UnionSchedule")
    def get(self, context={}):
        due = [d for d in (s.get(context) for s in self._schedules) if d is not None]
        return min(due) if due else None
