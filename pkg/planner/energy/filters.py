"""Speed-profile conditioning: Savitzky-Golay smoothing and a Kalman baseline."""

import logging

import numpy as np
from pydantic import BaseModel
from scipy.signal import savgol_filter

from ..errors import ParameterError
from .types import SpeedProfile

logger = logging.getLogger(__name__)


class FilterComparison(BaseModel):
    """RMS error of the raw and filtered signals against a clean reference."""

    raw_rms: float
    savgol_rms: float
    kalman_rms: float
    savgol_window: int
    savgol_order: int
    process_var: float
    meas_var: float


def savitzky_golay(profile: SpeedProfile, window: int, poly_order: int) -> SpeedProfile:
    """
    Smooth a speed profile with a Savitzky-Golay filter.

    Every output sample is the value of the least-squares polynomial of order
    `poly_order` fitted over the centered `window`; near the ends the polynomial
    fitted to the first/last full window is evaluated instead. Negative smoothed
    speeds are clamped to zero.

    Args:
        profile: The raw profile
        window: Odd number of samples in the fitting window
        poly_order: Order of the fitted polynomial

    Returns:
        A profile with the same timestamps and smoothed speeds

    Raises:
        ParameterError: If window is even, not above poly_order, or longer than the
            profile
    """
    n = len(profile.samples)
    if window % 2 == 0:
        raise ParameterError(f"window must be odd, got {window}")
    if poly_order < 0 or window <= poly_order:
        raise ParameterError(
            f"window ({window}) must exceed poly_order ({poly_order}) and order >= 0"
        )
    if window > n:
        raise ParameterError(f"window ({window}) is longer than the profile ({n})")

    smoothed = savgol_filter(profile.speeds, window, poly_order, mode="interp")
    return profile.with_speeds(np.clip(smoothed, 0.0, None))


def kalman_smooth(
    profile: SpeedProfile, process_var: float, meas_var: float
) -> SpeedProfile:
    """
    Filter a speed profile with a constant-velocity Kalman filter.

    The state is the speed; between samples it is held constant and disturbed by
    an acceleration noise of variance `process_var`, so the per-step process noise
    is `process_var * dt**2`. Kept as a comparison baseline for the Savitzky-Golay
    filter.

    Args:
        profile: The raw profile
        process_var: Acceleration noise variance in (m/s²)²
        meas_var: Speed measurement noise variance in (m/s)²

    Returns:
        The filtered profile on the same timestamps
    """
    if process_var <= 0 or meas_var <= 0:
        raise ParameterError("Kalman variances must be strictly positive")

    speeds = profile.speeds
    dt = 1.0 / profile.sample_rate
    q = process_var * dt * dt

    estimate = speeds[0]
    covariance = meas_var
    filtered = np.empty_like(speeds)
    filtered[0] = estimate
    for k in range(1, len(speeds)):
        covariance += q
        gain = covariance / (covariance + meas_var)
        estimate += gain * (speeds[k] - estimate)
        covariance *= 1.0 - gain
        filtered[k] = estimate

    return profile.with_speeds(np.clip(filtered, 0.0, None))


def rms_error(profile: SpeedProfile, reference: SpeedProfile) -> float:
    """Root-mean-square speed difference between two profiles on the same grid."""
    diff = profile.speeds - reference.speeds
    return float(np.sqrt(np.mean(diff * diff)))


def compare_filters(
    noisy: SpeedProfile,
    clean: SpeedProfile,
    window: int = 21,
    poly_order: int = 3,
    process_var: float = 10.0,
    meas_var: float = 1.0,
) -> FilterComparison:
    """Score both filters against a clean reference signal."""
    comparison = FilterComparison(
        raw_rms=rms_error(noisy, clean),
        savgol_rms=rms_error(savitzky_golay(noisy, window, poly_order), clean),
        kalman_rms=rms_error(kalman_smooth(noisy, process_var, meas_var), clean),
        savgol_window=window,
        savgol_order=poly_order,
        process_var=process_var,
        meas_var=meas_var,
    )
    logger.debug(f"Filter comparison: {comparison.model_dump()}")
    return comparison
