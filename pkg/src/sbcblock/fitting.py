"""Power-law and quasi-regular fits for section-map measurements.

Two complementary protocols: a free least-squares fit of a single power on
log-transformed data, and a constrained fit where the fractional exponent
is selected from the third-integer grid while smooth companion terms soak
up the regular background.  The second is the faithful one for a map whose
expansion is a sum of integer powers plus one resonant fractional term;
the first is the honest diagnostic that makes no structural assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PowerLawFit",
    "fit_power_law",
    "QuasiRegularFit",
    "quasi_regular_fit",
    "THIRD_GRID",
]

# Fractional candidates offered to the constrained fit, in units of 1/3.
THIRD_GRID = (
    4.0 / 3.0,
    5.0 / 3.0,
    7.0 / 3.0,
    8.0 / 3.0,
    10.0 / 3.0,
    11.0 / 3.0,
)


@dataclass(frozen=True)
class PowerLawFit:
    """Free single-power fit y ~ coefficient * x**exponent."""

    exponent: float
    coefficient: float
    r_squared: float
    residuals: tuple[float, ...]
    n_points: int


def fit_power_law(x: np.ndarray, y: np.ndarray) -> PowerLawFit:
    """Least squares on log|y| vs log x; requires positive x and nonzero y.

    The sign of the returned coefficient is the common sign of y, which
    must not vary across the sample (a power law does not change sign).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("need at least two matching samples")
    if np.any(x <= 0.0):
        raise ValueError("abscissae must be positive")
    if np.any(y == 0.0):
        raise ValueError("zero ordinate cannot enter a log fit")
    signs = np.sign(y)
    if not np.all(signs == signs[0]):
        raise ValueError("ordinates change sign; fit the odd/even parts separately")
    lx, ly = np.log(x), np.log(np.abs(y))
    basis = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(basis, ly, rcond=None)
    fitted = basis @ np.array([slope, intercept])
    resid = ly - fitted
    total = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2) / total) if total > 0.0 else 1.0
    return PowerLawFit(
        exponent=float(slope),
        coefficient=float(signs[0] * math.exp(intercept)),
        r_squared=r2,
        residuals=tuple(float(r) for r in resid),
        n_points=int(x.size),
    )


@dataclass(frozen=True)
class QuasiRegularFit:
    """Constrained fit y ~ C x**e + sum_k B_k x**k with e from the grid.

    ``residual_ratio`` is the root-mean-square residual of the best
    competing grid exponent divided by the winner's; a large value means
    the data genuinely selects the winner rather than tolerating it.
    ``null_ratio`` is the same comparison against the model with no
    fractional term at all (companions only), so it adjudicates the
    fractional slot against the pure integer ladder.
    """

    exponent: float
    coefficient: float
    companions: dict[float, float]
    log_companion: float | None
    residual_ratio: float
    null_ratio: float
    rms_residual: float
    candidates: tuple[tuple[float, float], ...]
    subtracted_exponent: float
    subtracted_coefficient: float


def _design(
    x: np.ndarray, fractional: float, companions: tuple[float, ...], log_slot: bool
) -> np.ndarray:
    cols = [x**fractional]
    cols.extend(x**k for k in companions)
    if log_slot:
        cols.append(x**3 * np.log(x))
    return np.vstack(cols).T


def quasi_regular_fit(
    x: np.ndarray,
    y: np.ndarray,
    companions: tuple[float, ...] = (1.0, 3.0),
    candidates: tuple[float, ...] = THIRD_GRID,
    with_log_companion: bool = False,
) -> QuasiRegularFit:
    """Select the fractional exponent on the third-integer grid.

    Expects at least eight samples spanning about a decade and a half
    (the nominal window [1e-3, 3e-2] is accepted), mirroring what a
    meaningful multi-term fit needs.  Exponents already claimed by a
    companion are excluded from the candidate slot.  After the winning fit,
    the companion terms are subtracted from the data and a free power law
    is fitted to the remainder; that pair diagnoses how cleanly the
    fractional term survives on its own.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 8:
        raise ValueError("need at least eight samples for the constrained fit")
    if np.any(x <= 0.0):
        raise ValueError("abscissae must be positive")
    span = math.log10(float(x.max()) / float(x.min()))
    if span < 1.45:
        raise ValueError(
            f"samples span {span:.2f} decades; need about 1.5 (>= 1.45)"
        )

    usable = tuple(e for e in candidates if all(abs(e - k) > 1e-9 for k in companions))
    results = []
    for e in usable:
        basis = _design(x, e, companions, with_log_companion)
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        rms = float(np.sqrt(np.mean((basis @ coef - y) ** 2)))
        results.append((e, rms, coef))
    results.sort(key=lambda item: item[1])
    best_e, best_rms, best_coef = results[0]
    runner_rms = results[1][1] if len(results) > 1 else math.inf
    ratio = runner_rms / best_rms if best_rms > 0.0 else math.inf

    null_basis = _design(x, 1.0, companions, with_log_companion)[:, 1:]
    null_coef, *_ = np.linalg.lstsq(null_basis, y, rcond=None)
    null_rms = float(np.sqrt(np.mean((null_basis @ null_coef - y) ** 2)))
    null_ratio = null_rms / best_rms if best_rms > 0.0 else math.inf

    comp_map = {float(k): float(c) for k, c in zip(companions, best_coef[1:])}
    log_coef = float(best_coef[-1]) if with_log_companion else None

    smooth = np.zeros_like(y)
    for k, ck in zip(companions, best_coef[1 : 1 + len(companions)]):
        smooth = smooth + ck * x**k
    if with_log_companion:
        smooth = smooth + best_coef[-1] * x**3 * np.log(x)
    remainder = y - smooth
    if np.all(remainder != 0.0) and np.all(np.sign(remainder) == np.sign(remainder[0])):
        free = fit_power_law(x, remainder)
        sub_e, sub_c = free.exponent, free.coefficient
    else:
        sub_e, sub_c = math.nan, math.nan

    return QuasiRegularFit(
        exponent=float(best_e),
        coefficient=float(best_coef[0]),
        companions=comp_map,
        log_companion=log_coef,
        residual_ratio=float(ratio),
        null_ratio=float(null_ratio),
        rms_residual=best_rms,
        candidates=tuple((float(e), float(r)) for e, r, _ in results),
        subtracted_exponent=float(sub_e),
        subtracted_coefficient=float(sub_c),
    )
