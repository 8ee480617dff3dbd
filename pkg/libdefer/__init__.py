from libdefer.util import util
from libdefer.api import *
from libdefer.approximation import Approximation
from libdefer.partition import DomainSpec
