""" Small numerical helpers shared by the energy, cheeger and solver code.
"""
import math

from typing import Union

import numpy as np

ArrayOrFloat = Union[np.ndarray, float]


def accurate_sum(values: np.ndarray) -> float:
    """ Correctly rounded sum; inequality verdicts depend on slacks near 0
    """
    return math.fsum(np.ravel(values).tolist())


def signed_power(t: ArrayOrFloat, exponent: float) -> ArrayOrFloat:
    """ |t|^(exponent-1) * sign(t), extended by 0 at t = 0.

        With exponent = p this is the |t|^{p-2} t kernel of the p-Laplacian.
    """
    return np.sign(t) * np.abs(t) ** (exponent - 1.0)


def check_exponent(p: float, minimum: float = 1.0,
                   strict: bool = False) -> None:
    if not math.isfinite(p) or p < minimum or (strict and p == minimum):
        raise ValueError("exponent p must be {} {}, got {}"
                         .format('>' if strict else '>=', minimum, p))
