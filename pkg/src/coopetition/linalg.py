"""Dense matrix exponential by scaling and squaring."""
from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError

# scaled matrices are brought below this 1-norm before the series is summed
_SCALED_NORM = 0.5
_MAX_TERMS = 64


def matrix_exponential(m, tolerance: float = 1e-15) -> np.ndarray:
    """Return ``exp(m)`` for a square real matrix.

    The matrix is scaled by ``2**-s`` until its 1-norm is at most 1/2, the
    Taylor series is summed until the next term is below ``tolerance``
    relative to the partial sum, and the result is squared ``s`` times.
    The zero matrix maps to the identity exactly.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"matrix exponential needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError("matrix exponential input has non-finite entries")
    if not tolerance > 0:
        raise ParameterError(f"tolerance must be positive, got {tolerance}")

    n = a.shape[0]
    norm = np.linalg.norm(a, 1) if n else 0.0
    squarings = max(0, math.ceil(math.log2(norm / _SCALED_NORM))) if norm > 0 else 0
    scaled = a / 2.0**squarings

    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, _MAX_TERMS + 1):
        term = term @ scaled / k
        result += term
        if np.linalg.norm(term, 1) <= tolerance * np.linalg.norm(result, 1):
            break
    for _ in range(squarings):
        result = result @ result
    return result
