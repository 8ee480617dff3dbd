import os

def expandvar(x):
    v = os.path.expandvars(x)
    return None if v == x else v

DEFER_ROOT = expandvar("$DEFER_ROOT") or os.path.expanduser("~/.defer")

VERSION = "0.3.dev"

#####################
#  Criteria         #
#####################
BETA          = 1.0
ALPHA         = 20.0
PHI           = 1.2
BIG_M_CAP     = 5
LINEAR_POINTS = 1

#####################
#  Geometry         #
#####################
MAX_DEPTH      = 40
DEGENERACY_TOL = 1e-9
PROJECTION_TOL = 1e-12
RANK_TOLERANCE = 1e-12

#####################
#  Engine           #
#####################
CHECKPOINT_GROWTH = 0.1
OFFSET_REBASE     = 600.0
ZHAT_TOLERANCE    = 1e-9

#####################
#  External targets #
#####################
EXTERNAL_HELLO    = "HELLO defer 1 {dim}"
EXTERNAL_CHUNK    = 256
EXTERNAL_TIMEOUT  = 60

#####################
#  Output files     #
#####################
TIMELINE_FILE   = "timeline.csv"
PARTITIONS_FILE = "partitions.jsonl"
META_FILE       = "meta.json"
SAMPLES_FILE    = "samples.csv"
BENCH_FILE      = "bench.csv"
