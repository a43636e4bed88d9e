"""Sketch-based rank-r correction and the iterative refinement driver.

The driver never reads the input matrix directly: each iteration draws fresh
multipliers F (2r x m) and H (n x r), forms the residual sketches
F E = F M - F Mtilde and E H = M H - Mtilde H, fits a rank-r correction from
the sketches alone, adds it to the running approximation, and truncates back
to the target rank.  The rank-r fit (two thin QRs and a pseudo-inverse) is:

    Q  <- Q factor of the thin QR of E H
    U, T <- thin QR of F Q
    correction = Q (T^+ U^T (F E))

which recovers E exactly whenever E has rank at most r and the sketches
retain it.  The first iteration runs at r = rho, later ones at
r = rank + rho = 2 rho under per-iteration truncation.

All arithmetic is uniform IEEE double precision; classical refinement
sometimes carries the residual subtraction at higher precision, but at these
problem scales float64 leaves the truncation level far below the optimal
rank-rho error, so no mixed-precision path is provided.
"""

import csv
import io
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as la

from .core import CountingAccessor, DimensionError, Factored2, PreconditionError, lra_sum
from .errest import residual_probe
from .sketch import (apply_dense, apply_left, apply_right, apply_to_factored,
                     make_multiplier)
from .topsvd import recompress

REPORT_SCHEMA = "sublra-report-v1"


class RankDeficientSketchWarning(UserWarning):
    """The inner triangular factor was rank deficient; small singular values
    of it were zeroed in the pseudo-inverse."""


@dataclass
class RefineConfig:
    """Knobs of one refinement run.

    stop="fixed" runs exactly max_iters iterations; stop="residual" stops
    early once the probe value falls to residual_tol times the value at the
    first iteration, and reports FAILURE if that never happens.
    """

    rho: int
    max_iters: int = 3
    multiplier: str = "ahad"
    depth: int = 3
    truncate_every_iteration: bool = True
    stop: str = "fixed"
    residual_tol: float = 1e-6
    probes: int = 8
    seed: int = 0
    recompress_method: str = "svd"

    def __post_init__(self):
        if self.rho < 1:
            raise PreconditionError("rho must be positive")
        if self.max_iters < 1:
            raise PreconditionError("max_iters must be positive")
        if self.multiplier not in ("ahad", "gaussian"):
            raise ValueError(f"unknown multiplier {self.multiplier!r}")
        if self.stop not in ("fixed", "residual"):
            raise ValueError(f"unknown stop rule {self.stop!r}")

    def validate_for(self, shape):
        m, n = shape
        if 2 * (2 * self.rho) > min(m, n):
            raise PreconditionError(
                f"sketch shapes need 4*rho <= min(m, n); rho={self.rho}, "
                f"shape={shape}")


@dataclass
class IterationRecord:
    iteration: int
    rank_before: int
    rank_after: int
    ratio_before: Optional[float]
    ratio_after: Optional[float]
    residual_probe: float
    distinct_accesses: int
    total_reads: int


@dataclass
class RefinementReport:
    config: RefineConfig
    records: list = field(default_factory=list)
    status: str = "ok"
    final_rank: int = 0
    total_distinct_accesses: int = 0
    total_reads: int = 0
    wall_time: float = 0.0

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["schema", "iter", "ratio_before", "ratio_after", "rank",
                    "distinct_accesses", "total_reads"])
        for r in self.records:
            w.writerow([REPORT_SCHEMA, r.iteration,
                        "" if r.ratio_before is None else repr(r.ratio_before),
                        "" if r.ratio_after is None else repr(r.ratio_after),
                        r.rank_after, r.distinct_accesses, r.total_reads])
        return buf.getvalue()

    def summary(self):
        c = self.config
        lines = [
            f"refinement: rho={c.rho} multiplier={c.multiplier} depth={c.depth} "
            f"iters={len(self.records)}/{c.max_iters} seed={c.seed} "
            f"status={self.status}",
            f"final rank {self.final_rank}, distinct accesses "
            f"{self.total_distinct_accesses}, total reads {self.total_reads}, "
            f"{self.wall_time:.3f}s",
        ]
        for r in self.records:
            rb = "-" if r.ratio_before is None else f"{r.ratio_before:.4e}"
            ra = "-" if r.ratio_after is None else f"{r.ratio_after:.4e}"
            lines.append(
                f"  iter {r.iteration}: rank {r.rank_before}->{r.rank_after} "
                f"ratio before/after {rb}/{ra} probe {r.residual_probe:.4e}")
        return "\n".join(lines)


def rank_schedule(i, current_rank, rho):
    """Correction rank for iteration i: current rank plus the target rank."""
    if i < 0:
        raise PreconditionError("iteration index must be nonnegative")
    return current_rank + rho


def _pinv_flagged(T):
    """SVD pseudo-inverse with singular values below 1e-12 sigma_1 zeroed."""
    U, s, Vt = la.svd(T, full_matrices=False)
    cutoff = 1e-12 * s[0] if s[0] > 0 else 0.0
    keep = s > cutoff
    if not keep.all():
        warnings.warn(
            f"rank-deficient sketch core: zeroed {int((~keep).sum())} of "
            f"{s.size} singular values in the pseudo-inverse",
            RankDeficientSketchWarning, stacklevel=3)
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (Vt.T * inv[None, :]) @ U.T


def sketch_rank_r_approx(FE, EH, F):
    """Rank-r fit of an implicit matrix E from its two-sided sketches.

    FE is the 2r-by-n left sketch, EH the m-by-r right sketch, F the operator
    that produced FE.  Returns the correction in factored form with rank
    bound r.
    """
    FE = np.asarray(FE, dtype=np.float64)
    EH = np.asarray(EH, dtype=np.float64)
    r = EH.shape[1]
    if F.shape != (FE.shape[0], EH.shape[0]):
        raise DimensionError(
            f"operator shape {F.shape} inconsistent with sketches "
            f"{FE.shape} and {EH.shape}")
    if FE.shape[0] != 2 * r:
        raise DimensionError(
            f"left sketch must have 2r={2 * r} rows, got {FE.shape[0]}")
    Q = la.qr(EH, mode="economic")[0]
    U, T = la.qr(apply_dense(F, Q), mode="economic")
    return Factored2(Q, _pinv_flagged(T) @ (U.T @ FE))


def _iteration_seeds(master_seed, max_iters):
    children = np.random.SeedSequence(master_seed).spawn(max_iters)
    return [child.generate_state(2, dtype=np.uint64) for child in children]


def refine(M, config, evaluator=None):
    """Iteratively refine a low-rank approximation of M through sketches.

    M is a CountingAccessor; all raw reads happen inside the sketch
    applications, which the driver asserts.  ``evaluator``, when given, is
    called with each pre-truncation and post-truncation iterate to fill the
    report's error ratios; it must not read through the accessor.

    Returns (approximation, report).  A residual-stop run that exhausts
    max_iters reports status "failure" but still returns its best iterate.
    """
    if not isinstance(M, CountingAccessor):
        raise TypeError("refine reads through a CountingAccessor")
    config.validate_for(M.shape)
    m, n = M.shape
    t0 = time.perf_counter()
    approx = Factored2.zero(m, n)
    report = RefinementReport(config=config)
    seeds = _iteration_seeds(config.seed, config.max_iters)
    probe_floor = None
    status = "ok" if config.stop == "fixed" else "failure"

    for i in range(config.max_iters):
        r = rank_schedule(i, approx.rank_bound, config.rho)
        if 2 * r > min(m, n):
            raise PreconditionError(
                f"iteration {i} needs sketch size 2r={2 * r} <= min(m, n)")
        seed_f, seed_h = (int(s) for s in seeds[i])
        F = make_multiplier(config.multiplier, 2 * r, m, depth=config.depth,
                            seed=seed_f, side="left")
        H = make_multiplier(config.multiplier, r, n, depth=config.depth,
                            seed=seed_h, side="right")
        FE = apply_left(F, M) - apply_to_factored(F, approx)
        EH = apply_right(M, H) - apply_to_factored(H, approx)
        reads_after_sketch = M.total_reads

        delta = sketch_rank_r_approx(FE, EH, F)
        updated = lra_sum(approx, delta)
        rank_before = updated.rank_bound
        ratio_before = None if evaluator is None else float(evaluator(updated))
        if config.truncate_every_iteration and updated.rank_bound > config.rho:
            truncated = recompress(updated, config.rho,
                                   method=config.recompress_method)
            ratio_after = None if evaluator is None else float(evaluator(truncated))
        else:
            truncated = updated
            ratio_after = ratio_before
        probe = residual_probe(approx, truncated, config.probes,
                               seed=int(seeds[i][0] ^ seeds[i][1]))
        assert M.total_reads == reads_after_sketch, \
            "driver read the input outside sketch application"

        approx = truncated
        report.records.append(IterationRecord(
            iteration=i,
            rank_before=rank_before,
            rank_after=approx.rank_bound,
            ratio_before=ratio_before,
            ratio_after=ratio_after,
            residual_probe=probe,
            distinct_accesses=M.distinct_accessed,
            total_reads=M.total_reads,
        ))
        if config.stop == "residual":
            if probe_floor is None:
                probe_floor = probe
                if probe_floor == 0.0:
                    status = "ok"
                    break
            elif probe <= config.residual_tol * probe_floor:
                status = "ok"
                break

    report.status = status
    report.final_rank = approx.rank_bound
    report.total_distinct_accesses = M.distinct_accessed
    report.total_reads = M.total_reads
    report.wall_time = time.perf_counter() - t0
    return approx, report
