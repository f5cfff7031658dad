"""
Weight schemes for the nested group penalty.

Group l of a row covers its first l entries; entry m of group l carries
weight w_lm. Tables are indexed W[l-1, m-1] and are zero above the diagonal.
"""

from enum import Enum
from functools import lru_cache

import numpy as np


class WeightScheme(str, Enum):
    """Quadratic: w_lm = 1/(l-m+1)^2. Unit: w_lm = 1."""

    QUADRATIC = "quadratic"
    UNIT = "unit"

    @classmethod
    def parse(cls, value) -> "WeightScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown weight scheme {value!r}; expected one of {choices}")


@lru_cache(maxsize=512)
def weight_table(groups: int, scheme: WeightScheme) -> np.ndarray:
    """Read-only (groups x groups) table of w_lm for l, m <= groups."""
    scheme = WeightScheme.parse(scheme)
    ell = np.arange(1, groups + 1)[:, None]
    m = np.arange(1, groups + 1)[None, :]
    if scheme is WeightScheme.QUADRATIC:
        table = np.where(m <= ell, 1.0 / np.maximum(ell - m + 1, 1) ** 2, 0.0)
    else:
        table = np.where(m <= ell, 1.0, 0.0)
    table = np.ascontiguousarray(table, dtype=np.float64)
    table.setflags(write=False)
    return table
