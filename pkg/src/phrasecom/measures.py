"""Commonality and distinction score functions over a pair of relevance
scores, plus the sum/difference alternatives used by one solver variant.
"""

from __future__ import annotations

import math

import numpy as np


def commonality(f_d, f_dp):
    """ln(1 + f_d * f_dp): high only when both relevances are high."""
    return math.log1p(f_d * f_dp)


def distinction(f_d, f_dp, gamma=1.0):
    """ln((f_d + gamma) / (f_dp + gamma)), positive iff f_d > f_dp."""
    return math.log(f_d + gamma) - math.log(f_dp + gamma)


def alt_commonality_sum(f_d, f_dp):
    """Sum alternative: dominated by the larger relevance score."""
    return f_d + f_dp


def alt_distinction_diff(f_d, f_dp):
    return f_d - f_dp


def commonality_vec(f, fp):
    return np.log1p(f * fp)


def distinction_vec(f, fp, gamma=1.0):
    return np.log(f + gamma) - np.log(fp + gamma)
