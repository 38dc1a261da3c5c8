""" Derivation of independent child seeds from the single user seed.

    A child seed is the 64-bit FNV-1a hash of the little-endian encoding of
    the parent seed followed by the labels (integers or strings) naming the
    consumer, e.g. ``derive_seed(seed, "restart", 3)``.
"""
import struct

from typing import Union

import numpy as np
from fnvhash import fnv1a_64

SeedLabel = Union[int, str]

_MASK_64 = (1 << 64) - 1


def _encode(label: SeedLabel) -> bytes:
    if isinstance(label, bool):
        raise TypeError("Seed labels must be int or str, got bool")
    if isinstance(label, int):
        return struct.pack("<Q", label & _MASK_64)
    if isinstance(label, str):
        return label.encode('utf-8')
    raise TypeError("Seed labels must be int or str, got {}"
                    .format(type(label)))


def derive_seed(seed: int, *labels: SeedLabel) -> int:
    data = struct.pack("<Q", seed & _MASK_64)
    for label in labels:
        data += _encode(label)
    return fnv1a_64(data)


def rng_for(seed: int, *labels: SeedLabel) -> np.random.Generator:
    """ A PCG64 generator fully determined by (seed, labels)
    """
    return np.random.default_rng(derive_seed(seed, *labels) if labels
                                 else seed & _MASK_64)
