"""Pilot-based delay-Doppler receiver.

Least-squares channel estimates on the periodic pilot subgrid, a
zero-padded 2-D periodogram over that subgrid, global peak search with
per-axis quadratic interpolation, and conversion of the refined peak to
bistatic range, velocity and receiver-leg distance.

Transform sign conventions: the subcarrier (delay) axis uses the
positive-exponent kernel so a delay tau peaks at bin
tau * n_p * df * fft_n, and the symbol (Doppler) axis uses the
negative-exponent kernel so a Doppler f_d peaks at bin
f_d * m_p * T_s * fft_m (mod fft_m). Doppler bins are read on the signed
interval (-fft_m/2, fft_m/2]; delay estimates live in [0, unambiguous
span) since delays are physically nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SPEED_OF_LIGHT, beta_from_estimates, invert_bistatic_range
from .ofdm import OfdmNumerology
from .pilots import PilotPattern
from .sim import FrameGrid


@dataclass(frozen=True)
class PeriodogramConfig:
    """FFT sizes (powers of two) and interpolation switch."""

    fft_n: int = 4096
    fft_m: int = 4096
    interpolate: bool = True

    def __post_init__(self):
        for size in (self.fft_n, self.fft_m):
            if size < 1 or size & (size - 1):
                raise ValueError(f"FFT size must be a power of two, got {size}")


@dataclass(frozen=True)
class EstimationResult:
    """Outputs of one estimation pass.

    peak_bins are the integer argmax coordinates on the power surface and
    fractional_offsets the sub-bin corrections applied to them.
    beta_clamped flags a degenerate bistatic-angle inversion.
    """

    tau_hat: float
    f_d_hat: float
    d_bis_hat: float
    v_bis_hat: float
    d_rx_hat: float
    beta_hat: float
    beta_clamped: bool
    peak_power: float
    peak_bins: tuple
    fractional_offsets: tuple

    def to_json_dict(self) -> dict:
        return {
            "tau_hat_s": self.tau_hat,
            "f_d_hat_hz": self.f_d_hat,
            "d_bis_hat_m": self.d_bis_hat,
            "v_bis_hat_ms": self.v_bis_hat,
            "d_rx_hat_m": self.d_rx_hat,
            "beta_hat_rad": self.beta_hat,
            "beta_clamped": self.beta_clamped,
            "peak_power": self.peak_power,
            "peak_bins": list(self.peak_bins),
            "fractional_offsets": list(self.fractional_offsets),
        }


def ls_channel_estimate(
    received: FrameGrid, transmitted: FrameGrid, pattern: PilotPattern
) -> np.ndarray:
    """Per-pilot least-squares channel estimates on the periodic subgrid.

    Returns the (K+1, L+1) grid Y[k n_p, l m_p] / X[k n_p, l m_p]. With
    unit-modulus pilots the division is a pure rotation, so the noise on
    each estimate keeps its variance.
    """
    n_p, m_p = pattern.periodic_strides()
    if received.values.shape != transmitted.values.shape:
        raise ValueError("received and transmitted grids differ in shape")
    if received.values.shape != (pattern.n_grid, pattern.m_grid):
        raise ValueError("grids do not match the pattern dimensions")
    n_idx = np.arange(0, pattern.n_grid, n_p)
    m_idx = np.arange(0, pattern.m_grid, m_p)
    pilots = transmitted.values[np.ix_(n_idx, m_idx)]
    if np.abs(pilots).min() < 1.0 - 1e-9:
        raise ValueError("pilot symbol modulus below unity")
    return received.values[np.ix_(n_idx, m_idx)] / pilots


def periodogram_2d(pilot_grid: np.ndarray, config: PeriodogramConfig) -> np.ndarray:
    """Zero-padded 2-D periodogram of the pilot-subgrid channel estimates.

    Positive-exponent transform along the delay axis, negative-exponent
    along the Doppler axis; returns squared magnitude, shape
    (fft_n, fft_m).
    """
    rows, cols = pilot_grid.shape
    if rows < 1 or cols < 1:
        raise ValueError("empty pilot grid")
    if config.fft_n < rows or config.fft_m < cols:
        raise ValueError(
            f"FFT sizes ({config.fft_n}, {config.fft_m}) smaller than the "
            f"pilot grid ({rows}, {cols})"
        )
    stage = np.fft.ifft(pilot_grid, n=config.fft_n, axis=0) * config.fft_n
    stage = np.fft.fft(stage, n=config.fft_m, axis=1)
    return stage.real**2 + stage.imag**2


@dataclass(frozen=True)
class PeakRefinement:
    """Sub-bin offsets per axis; flat_axes flags a degenerate fit."""

    offsets: tuple
    flat_axes: tuple


def refine_peak(surface: np.ndarray, peak_bins: tuple) -> PeakRefinement:
    """Three-point parabolic interpolation through the peak, per axis.

    Neighbors are taken circularly (DFT periodicity). The offset on each
    axis is (P- - P+) / (2 (P- - 2 P0 + P+)), clipped to [-0.5, 0.5] and
    computed on the power surface. A flat neighborhood (vanishing
    curvature) yields offset 0 with the corresponding flag set.
    """
    offsets = []
    flats = []
    for axis, bin_idx in enumerate(peak_bins):
        size = surface.shape[axis]
        if axis == 0:
            line = surface[:, peak_bins[1]]
        else:
            line = surface[peak_bins[0], :]
        p_minus = line[(bin_idx - 1) % size]
        p_zero = line[bin_idx % size]
        p_plus = line[(bin_idx + 1) % size]
        denom = p_minus - 2.0 * p_zero + p_plus
        scale = abs(p_minus) + 2.0 * abs(p_zero) + abs(p_plus)
        if scale == 0.0 or abs(denom) <= 1e-12 * scale:
            offsets.append(0.0)
            flats.append(True)
        else:
            offsets.append(float(np.clip((p_minus - p_plus) / (2.0 * denom), -0.5, 0.5)))
            flats.append(False)
    return PeakRefinement(offsets=tuple(offsets), flat_axes=tuple(flats))


def estimate(
    received: FrameGrid,
    transmitted: FrameGrid,
    pattern: PilotPattern,
    numerology: OfdmNumerology,
    config: PeriodogramConfig,
    baseline: float,
    theta: float,
) -> EstimationResult:
    """Full receiver pass: LS estimates, periodogram, peak, geometry.

    ``baseline`` and ``theta`` are the known transmitter-receiver distance
    and angle of arrival used to invert the bistatic range.

    Raises:
        GeometryError: if the range estimate cannot be inverted
            (d_bis_hat <= baseline); callers count such trials as invalid.
    """
    n_p, m_p = pattern.periodic_strides()
    pilot_grid = ls_channel_estimate(received, transmitted, pattern)
    surface = periodogram_2d(pilot_grid, config)
    flat_idx = int(np.argmax(surface))
    b_r, b_v = np.unravel_index(flat_idx, surface.shape)
    if config.interpolate:
        refined = refine_peak(surface, (int(b_r), int(b_v)))
        off_r, off_v = refined.offsets
    else:
        off_r, off_v = 0.0, 0.0

    df = numerology.subcarrier_spacing_hz
    ts = numerology.symbol_duration_s
    tau_hat = ((b_r + off_r) % config.fft_n) / (n_p * df * config.fft_n)
    signed_bin = b_v - config.fft_m if b_v > config.fft_m // 2 else b_v
    f_d_hat = (signed_bin + off_v) / (m_p * ts * config.fft_m)

    d_bis_hat = SPEED_OF_LIGHT * tau_hat
    d_rx_hat = invert_bistatic_range(d_bis_hat, baseline, theta)
    beta_hat, clamped = beta_from_estimates(d_bis_hat, baseline, theta)
    v_bis_hat = f_d_hat * numerology.wavelength / (2.0 * np.cos(beta_hat / 2.0))

    return EstimationResult(
        tau_hat=float(tau_hat),
        f_d_hat=float(f_d_hat),
        d_bis_hat=float(d_bis_hat),
        v_bis_hat=float(v_bis_hat),
        d_rx_hat=float(d_rx_hat),
        beta_hat=float(beta_hat),
        beta_clamped=clamped,
        peak_power=float(surface[b_r, b_v]),
        peak_bins=(int(b_r), int(b_v)),
        fractional_offsets=(float(off_r), float(off_v)),
    )
