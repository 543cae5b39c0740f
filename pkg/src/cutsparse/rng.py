"""Deterministic random substreams.

Every Monte-Carlo driver derives its generators from ``(seed, *index)`` so
that results depend only on the seed and the trial/chunk index, never on
how work is scheduled.
"""

from __future__ import annotations

import random

import numpy as np

# trials per substream in the Monte-Carlo drivers; fixed so results do not
# depend on --jobs
CHUNK = 4096


def _seq(seed: int, index) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if isinstance(index, (tuple, list)):
        parts = [int(i) for i in index]
    else:
        parts = [int(index)]
    return np.random.SeedSequence([int(seed), *parts])


def substream(seed: int, index=0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_seq(seed, index)))


def py_substream(seed: int, index=0) -> random.Random:
    """A :class:`random.Random` seeded from the same derivation; cheaper per
    scalar draw than numpy, which matters in the contraction loops."""
    state = _seq(seed, index).generate_state(4, np.uint32)
    return random.Random(int.from_bytes(state.tobytes(), "little"))


def chunks(trials: int, size: int = CHUNK):
    """``(chunk_index, start, stop)`` triples covering ``range(trials)``."""
    for idx, start in enumerate(range(0, trials, size)):
        yield idx, start, min(trials, start + size)
