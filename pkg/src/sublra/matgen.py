"""Synthetic test inputs: prescribed-spectrum matrices and the delta family.

Random inputs are built as U diag(values) V^T where U and V are the left and
right singular-vector factors of one seeded standard Gaussian matrix.  The
generator is numpy's PCG64, so a recorded 64-bit seed replays a matrix
exactly.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .core import DimensionError, PreconditionError, as_dense
from .mmio import load_matrix, pad_matrix, save_matrix  # noqa: F401  (re-export)

PLATEAU = 20      # leading singular values pinned at 1
FAST_CUTOFF = 100  # fast-decay spectrum is exactly zero beyond this index


@dataclass
class SpectrumSpec:
    """Prescribed nonincreasing singular-value profile."""

    kind: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size == 0:
            raise DimensionError("spectrum must be a nonempty vector")
        if not np.isfinite(self.values).all() or np.any(self.values < 0):
            raise PreconditionError("spectrum values must be finite and nonnegative")
        if np.any(np.diff(self.values) > 0):
            raise PreconditionError("spectrum values must be nonincreasing")


def fast_decay_spectrum(n):
    """Ones up to 20, then halving, exactly zero beyond index 100."""
    i = np.arange(1, n + 1, dtype=np.float64)
    v = np.zeros(n)
    v[i <= PLATEAU] = 1.0
    mid = (i > PLATEAU) & (i <= FAST_CUTOFF)
    v[mid] = 0.5 ** (i[mid] - PLATEAU)
    return SpectrumSpec("fastDecay", v)


def slow_decay_spectrum(n):
    """Ones up to 20, then inverse-square decay."""
    i = np.arange(1, n + 1, dtype=np.float64)
    v = np.ones(n)
    tail = i > PLATEAU
    v[tail] = 1.0 / (1.0 + i[tail] - PLATEAU) ** 2
    return SpectrumSpec("slowDecay", v)


def custom_spectrum(values):
    return SpectrumSpec("custom", values)


def spectrum_by_name(kind, n):
    if kind in ("fast", "fastDecay"):
        return fast_decay_spectrum(n)
    if kind in ("slow", "slowDecay"):
        return slow_decay_spectrum(n)
    raise ValueError(f"unknown spectrum kind {kind!r}")


def gen_synthetic(n, spec, seed):
    """Seeded n-by-n matrix whose singular values equal ``spec.values``.

    n must be a power of two (>= 128) so the abridged Hadamard multipliers
    divide it evenly downstream; use ``pad_matrix`` for other sizes.
    """
    if n < 128 or (n & (n - 1)) != 0:
        raise PreconditionError(
            f"n={n} must be a power of two >= 128 "
            "(pad other sizes with pad_matrix / --pad)")
    if spec.values.shape[0] != n:
        raise DimensionError(
            f"spectrum length {spec.values.shape[0]} != n={n}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    U, _, Vt = la.svd(G)
    return (U * spec.values[None, :]) @ Vt


def gen_delta(m, n, i, j):
    """Rank-1 matrix with a single unit entry at 1-based position (i, j)."""
    if not (1 <= i <= m and 1 <= j <= n):
        raise PreconditionError(f"index ({i}, {j}) out of range for {m}x{n}")
    M = np.zeros((m, n))
    M[i - 1, j - 1] = 1.0
    return M


def delta_family(m, n):
    """Yield the zero matrix and all m*n single-entry matrices."""
    yield np.zeros((m, n))
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            yield gen_delta(m, n, i, j)


def load_input(path, pad=None):
    """Read a matrix file, optionally zero-padding it to pad-by-pad."""
    M = load_matrix(path)
    if pad is not None:
        M = pad_matrix(M, pad)
    return as_dense(M)
