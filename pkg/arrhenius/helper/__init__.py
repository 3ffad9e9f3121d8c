from .config import logger, open_output, set_verbosity
from .constants import Defaults, ExitCode, Header
from .converter import to_cell, to_float_array, to_jsonable, to_list
from .funcs import (
    as_generator,
    canonical_json,
    derive_seed,
    indent_str,
    parallel_map,
    segment_logsumexp,
    stable_hash,
)
from .wrappers import timed
