"""Round-off probes for the origin exp/log maps on the Poincaré ball.

Measures, per precision mode: machine epsilon, the decimal-nines budget k
(how many digits of 1 - 10^-k survive before rounding collapses the value
to 1), the hyperbolic radius that budget buys, and the empirical tangent
norm at which the log0(exp0(v)) round trip falls apart.  Curvature is fixed
at c = 1 for all probes.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import BoundaryCollapseError
from .geometry import exp0_array, log0_array
from .precision import Precision, round_to_precision

PROBE_CURVATURE = 1.0
COLLAPSE_RELATIVE_ERROR = 0.5
SEARCH_LO = 0.1
SEARCH_HI = 64.0
SEARCH_RESOLUTION = 1e-3


@dataclasses.dataclass(frozen=True)
class ThresholdReport:
    mode: Precision
    epsilon: float
    max_k: int
    representable_radius: float
    collapse_threshold: float


def measure_epsilon(mode: Precision) -> float:
    """Smallest power of two p with round(1 + p) > 1 in the mode."""
    p = 1.0
    while round_to_precision(1.0 + p / 2.0, mode) > 1.0:
        p /= 2.0
    return p


def max_boundary_k(mode: Precision) -> int:
    """Decimal-nines budget: the k at which 10^-k drops below machine
    epsilon, so 1 - 10^-k is rounded onto 1 and the point onto the
    boundary.  (4 for half: 1e-4 < 2^-10 <= 1e-3.)"""
    eps = measure_epsilon(mode)
    k = 1
    while 10.0**-k >= eps:
        k += 1
    return k


def representable_radius(mode: Precision) -> float:
    """Distance-from-origin of the last faithfully representable shell,
    ln(10) * k + ln(2)."""
    return math.log(10.0) * max_boundary_k(mode) + math.log(2.0)


def roundtrip_residual(v, mode: Precision, c: float = PROBE_CURVATURE) -> float:
    """||log0(exp0(v)) - v|| / max(1, ||v||), forward ops rounded to mode.

    Returns inf when the round trip is undefined (the exponential landed on
    the boundary), which counts as maximal collapse.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    y = exp0_array(v, c, mode)
    if math.sqrt(c) * float(np.linalg.norm(y)) >= 1.0:
        return math.inf
    try:
        w = log0_array(y, c, mode)
    except BoundaryCollapseError:
        return math.inf
    return float(np.linalg.norm(w - v) / max(1.0, np.linalg.norm(v)))


def _collapses(norm: float, mode: Precision, direction: np.ndarray) -> bool:
    return roundtrip_residual(norm * direction, mode) >= COLLAPSE_RELATIVE_ERROR


COARSE_STEP = 0.05


def collapse_threshold(mode: Precision, direction=None) -> float:
    """Empirical search for the smallest ||v|| whose round trip fails:
    exp0(v) rounds onto/over the boundary, or the relative error reaches
    0.5.  Control flow runs in double; only forward geometry is rounded to
    the mode.

    Along the canonical axis the failure set is a clean half-line and this
    reduces to bisection; for rotated directions the component rounding
    makes failures flicker near the onset, so the search walks a coarse
    grid to bracket the first failure and then refines at the stated
    resolution, which keeps the reported value the smallest failing norm
    either way.
    """
    if direction is None:
        d = np.zeros(2)
        d[0] = 1.0
    else:
        d = np.asarray(direction, dtype=np.float64).reshape(-1)
        d = d / np.linalg.norm(d)
    if _collapses(SEARCH_LO, mode, d):
        return SEARCH_LO
    coarse = np.arange(SEARCH_LO, SEARCH_HI + COARSE_STEP, COARSE_STEP)
    hit = None
    for x in coarse:
        if _collapses(float(x), mode, d):
            hit = float(x)
            break
    if hit is None:
        return math.inf
    fine = np.arange(max(SEARCH_LO, hit - COARSE_STEP), hit + SEARCH_RESOLUTION,
                     SEARCH_RESOLUTION)
    for x in fine:
        if _collapses(float(x), mode, d):
            return float(x)
    return hit


def threshold_report(mode: Precision) -> ThresholdReport:
    return ThresholdReport(
        mode=mode,
        epsilon=measure_epsilon(mode),
        max_k=max_boundary_k(mode),
        representable_radius=representable_radius(mode),
        collapse_threshold=collapse_threshold(mode),
    )


def all_threshold_reports() -> list[ThresholdReport]:
    return [threshold_report(mode) for mode in Precision]


def reports_to_csv(reports) -> str:
    lines = ["mode,epsilon,max_k,radius,threshold"]
    for r in reports:
        lines.append(
            f"{r.mode.value},{r.epsilon!r},{r.max_k},"
            f"{r.representable_radius:.6f},{r.collapse_threshold:.4f}"
        )
    return "\n".join(lines) + "\n"


def reports_to_text(reports) -> str:
    header = f"{'precision':<10} {'epsilon':>12} {'max k':>6} {'radius':>8} {'threshold':>10}"
    lines = [header, "-" * len(header)]
    for r in reports:
        lines.append(
            f"{r.mode.value:<10} {r.epsilon:>12.4e} {r.max_k:>6d} "
            f"{r.representable_radius:>8.2f} {r.collapse_threshold:>10.3f}"
        )
    return "\n".join(lines) + "\n"
