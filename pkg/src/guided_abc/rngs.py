"""Counter-based random-number streams.

Every source of randomness in a run is a Philox stream addressed by
``(seed, run, purpose, a, b)``.  Proposal number ``c`` of iteration ``t``
always maps to the same stream regardless of how work is scheduled, which
is what makes multi-worker runs bit-identical to serial ones.
"""

import numpy as np

PURPOSE_PROPOSAL = 0
PURPOSE_CALIBRATION = 1
PURPOSE_DATA = 2
PURPOSE_RESAMPLE = 3

_MASK = (1 << 64) - 1


def stream(seed, run=0, purpose=0, a=0, b=0):
    """Return a fresh ``numpy.random.Generator`` for the given address."""
    key = np.array([int(seed) & _MASK, int(run) & _MASK], dtype=np.uint64)
    counter = np.array(
        [int(purpose) & _MASK, int(a) & _MASK, int(b) & _MASK, 0], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def proposal_rng(seed, run, t, counter):
    """Stream for proposal number ``counter`` of iteration ``t``."""
    return stream(seed, run, PURPOSE_PROPOSAL, t, counter)


def calibration_rng(seed):
    """Stream used for prior-predictive distance calibration."""
    return stream(seed, 0, PURPOSE_CALIBRATION)


def data_rng(data_seed):
    """Stream used to generate synthetic observed datasets."""
    return stream(data_seed, 0, PURPOSE_DATA)
