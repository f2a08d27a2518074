"""Deterministic, labeled random streams.

Every stochastic site in the package (weight init, dropout masks, latent
samples, shuffling, down-sampling) draws from its own named stream so that
adding or removing one site never perturbs the draws of another. A stream
is a counter-based Philox generator keyed by a hash of (seed, label),
which makes runs reproducible bit for bit from a single integer seed.
"""

import hashlib

import numpy as np


def stream(seed, label):
    """Return an independent ``numpy.random.Generator`` for one named site.

    seed is any integer, label a short string naming the site, e.g.
    ``"init/theta/prior/L0/W"`` or ``"shuffle/epoch12"``. Equal
    (seed, label) pairs always produce the same draw sequence.
    """
    if not isinstance(seed, (int, np.integer)):
        raise TypeError("seed must be an integer, got %r" % (seed,))
    digest = hashlib.blake2s(
        ("%d|%s" % (seed, label)).encode("utf-8"), digest_size=16
    ).digest()
    key = int.from_bytes(digest, "little")
    return np.random.Generator(np.random.Philox(key=key))
