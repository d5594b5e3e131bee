"""proofminer: mine guarded state-machine models from tactical proof scripts.

The pipeline: parse proof scripts into traces, learn per-method decision
trees that predict the following method from parameter values, arrange the
traces as a prefix tree, generalize it by guard-constrained blue-fringe
state merging, then evaluate the model by k-fold cross validation or walk
it interactively to derive new proofs.
"""

__version__ = "0.1.0"

from .traces import (  # noqa: F401
    Corpus,
    ParamVector,
    Trace,
    TraceEvent,
    corpus_from_json,
    corpus_to_json,
    encode_step,
)
