"""Keyed random streams.

Every stochastic draw in a study gets its own generator keyed by
``(seed, trial, purpose)``, so switching one attribute on or off never
shifts the numbers another attribute sees.
"""
import zlib

import numpy as np

PURPOSES = ("positions", "perturbation", "delays", "heterogeneity", "enclosing")


def purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, trial: int, purpose: str) -> np.random.Generator:
    """Independent generator for one (seed, trial, purpose) triple."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=(int(trial), purpose_key(purpose)))
    return np.random.default_rng(ss)
