"""Estimation-theoretic bounds for pilot-based delay/Doppler sensing.

Builds the 4x4 Fisher information of the unknown vector
(gain_re, gain_im, doppler, delay) for unit-modulus pilot symbols, reduces
it to the 2x2 equivalent information on (doppler, delay) by eliminating the
complex gain, and converts the diagonal into range/velocity variance
bounds. Closed-form specializations are provided for periodic patterns,
plus the ensemble-averaged velocity bound over random target geometry and
the pilot-overhead rate ceiling of the communication link.

Unit conventions: noise variance is the total per-cell complex variance,
SNR = |gain|^2 / noise_var, dB at API surfaces and linear internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DEGENERATE_EPS,
    SPEED_OF_LIGHT,
    ScenarioEnsemble,
    bistatic_angle,
)
from .ofdm import OfdmNumerology
from .pilots import PatternStats, PilotPattern, pattern_stats


class SingularPatternError(ValueError):
    """Raised when a pattern cannot support range/velocity estimation."""


@dataclass(frozen=True)
class SensingChannelParams:
    """Scalar sensing channel: complex gain, delay, Doppler, noise level.

    Attributes:
        alpha_re, alpha_im: real/imaginary parts of the channel gain.
        tau: propagation delay [s].
        f_d: Doppler shift [Hz].
        noise_var: total complex noise variance per received cell
            (zero allowed for noiseless simulation; bounds require > 0).
    """

    alpha_re: float = 1.0
    alpha_im: float = 0.0
    tau: float = 0.0
    f_d: float = 0.0
    noise_var: float = 1.0

    def __post_init__(self):
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)

    @property
    def gain_sq(self) -> float:
        return self.alpha_re**2 + self.alpha_im**2

    @property
    def snr(self) -> float:
        return self.gain_sq / self.noise_var

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    @classmethod
    def from_snr_db(
        cls, snr_db: float, tau: float = 0.0, f_d: float = 0.0
    ) -> "SensingChannelParams":
        """Unit gain with noise variance set from the SNR in dB."""
        return cls(
            alpha_re=1.0,
            alpha_im=0.0,
            tau=tau,
            f_d=f_d,
            noise_var=10.0 ** (-snr_db / 10.0),
        )


@dataclass(frozen=True)
class FisherBlocks:
    """2x2 blocks of the 4x4 information matrix and the full matrix.

    Parameter order is (gain_re, gain_im, doppler, delay). The blocks a,
    b, c, d exclude the common 2/noise_var prefactor; the assembled
    matrix j includes it. c is always b transposed.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    j: np.ndarray


def fisher_matrix(
    params: SensingChannelParams,
    pattern: PilotPattern,
    numerology: OfdmNumerology,
) -> FisherBlocks:
    """Fisher information of (gain_re, gain_im, doppler, delay).

    Assumes unit-modulus pilot symbols, under which the result depends
    only on the gain, the noise variance and the pilot index sums; the
    actual symbol values and the true delay/Doppler cancel.
    """
    if params.noise_var <= 0:
        raise ValueError("fisher information requires positive noise variance")
    st = pattern_stats(pattern)
    ts = numerology.symbol_duration_s
    df = numerology.subcarrier_spacing_hz
    a_re, a_im = params.alpha_re, params.alpha_im
    two_pi = 2.0 * math.pi

    a = st.size * np.eye(2)
    b = two_pi * np.array(
        [
            [-a_im * ts * st.sum_m, a_im * df * st.sum_n],
            [a_re * ts * st.sum_m, -a_re * df * st.sum_n],
        ]
    )
    c = b.T.copy()
    d = (
        4.0
        * math.pi**2
        * params.gain_sq
        * np.array(
            [
                [ts**2 * st.sum_m2, -ts * df * st.sum_nm],
                [-ts * df * st.sum_nm, df**2 * st.sum_n2],
            ]
        )
    )
    j = (2.0 / params.noise_var) * np.block([[a, b], [c, d]])
    return FisherBlocks(a=a, b=b, c=c, d=d, j=j)


def efim(
    params: SensingChannelParams,
    pattern: PilotPattern,
    numerology: OfdmNumerology,
) -> np.ndarray:
    """Equivalent 2x2 information on (doppler, delay) after gain removal.

    This is the Schur complement of the gain block, which collapses to
    the centered index moments:

        (8 pi^2 |gain|^2 / noise_var) *
            [[T_s^2 q_m2,      -T_s df q_nm],
             [-T_s df q_nm,     df^2 q_n2 ]]

    Raises:
        SingularPatternError: if the pattern is collinear (degenerate in
            n or m), making the matrix singular.
    """
    if params.noise_var <= 0:
        raise ValueError("information matrix requires positive noise variance")
    st = pattern_stats(pattern)
    if st.q_det <= 0:
        raise SingularPatternError(
            "pilot cells are collinear; delay/Doppler information is singular"
        )
    ts = numerology.symbol_duration_s
    df = numerology.subcarrier_spacing_hz
    scale = 8.0 * math.pi**2 * params.gain_sq / params.noise_var
    return scale * np.array(
        [
            [ts**2 * st.q_m2, -ts * df * st.q_nm],
            [-ts * df * st.q_nm, df**2 * st.q_n2],
        ]
    )


@dataclass(frozen=True)
class CrbReport:
    """Range/velocity estimation bounds for one configuration.

    Attributes:
        crb_ran_m2: variance bound on bistatic range [m^2].
        crb_vel_ms2: variance bound on bistatic velocity [(m/s)^2].
        rmse_bound_ran_m: sqrt of crb_ran_m2 [m].
        rmse_bound_vel_ms: sqrt of crb_vel_ms2 [m/s].
        efim: the 2x2 equivalent information matrix (doppler, delay).
    """

    crb_ran_m2: float
    crb_vel_ms2: float
    rmse_bound_ran_m: float
    rmse_bound_vel_ms: float
    efim: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "crb_ran_m2": self.crb_ran_m2,
            "crb_vel_ms2": self.crb_vel_ms2,
            "sqrt_crb_ran_m": self.rmse_bound_ran_m,
            "sqrt_crb_vel_ms": self.rmse_bound_vel_ms,
        }


def _crb_from_stats(
    params: SensingChannelParams,
    st: PatternStats,
    numerology: OfdmNumerology,
    beta: float,
    efim_matrix: np.ndarray,
) -> CrbReport:
    q_det = st.q_n2 * st.q_m2 - st.q_nm**2
    if q_det <= 0:
        raise SingularPatternError(
            "pilot cells are collinear; range/velocity bounds are infinite"
        )
    df = numerology.subcarrier_spacing_hz
    ts = numerology.symbol_duration_s
    lam = numerology.wavelength
    noise_over_gain = params.noise_var / params.gain_sq
    crb_ran = (
        st.q_m2 / q_det * noise_over_gain * SPEED_OF_LIGHT**2 / (8.0 * math.pi**2 * df**2)
    )
    crb_vel = (
        st.q_n2
        / q_det
        * noise_over_gain
        * lam**2
        / (32.0 * math.pi**2 * ts**2 * math.cos(beta / 2.0) ** 2)
    )
    return CrbReport(
        crb_ran_m2=crb_ran,
        crb_vel_ms2=crb_vel,
        rmse_bound_ran_m=math.sqrt(crb_ran),
        rmse_bound_vel_ms=math.sqrt(crb_vel),
        efim=efim_matrix,
    )


def crb(
    params: SensingChannelParams,
    pattern: PilotPattern,
    numerology: OfdmNumerology,
    beta: float = 0.0,
) -> CrbReport:
    """Range/velocity variance bounds for an arbitrary pilot pattern.

    ``beta`` is the true bistatic angle; it only rescales the velocity
    bound through 1/cos^2(beta/2).
    """
    if params.noise_var <= 0 or params.gain_sq <= 0:
        raise ValueError("bounds require positive noise variance and gain")
    st = pattern_stats(pattern)
    return _crb_from_stats(
        params, st, numerology, beta, efim(params, pattern, numerology)
    )


def crb_periodic_closed_form(
    params: SensingChannelParams,
    numerology: OfdmNumerology,
    n_p: int,
    m_p: int,
    beta: float = 0.0,
) -> CrbReport:
    """Closed-form bounds for a periodic pattern with strides (n_p, m_p).

    Range bound:    12 / (K (K+2) P n_p^2) * noise c^2 / (8 pi^2 |g|^2 df^2)
    Velocity bound: 12 / (L (L+2) P m_p^2) * noise lam^2
                        / (32 pi^2 |g|^2 T_s^2 cos^2(beta/2))

    Raises:
        SingularPatternError: if K = 0 (single pilot column, range
            unobservable) or L = 0 (single pilot row, velocity
            unobservable).
    """
    if params.noise_var <= 0 or params.gain_sq <= 0:
        raise ValueError("bounds require positive noise variance and gain")
    if not (1 <= n_p <= numerology.n_subcarriers):
        raise ValueError("n_p out of bounds")
    if not (1 <= m_p <= numerology.n_symbols):
        raise ValueError("m_p out of bounds")
    big_k = (numerology.n_subcarriers - 1) // n_p
    big_l = (numerology.n_symbols - 1) // m_p
    if big_k == 0:
        raise SingularPatternError("single pilot column: range unobservable")
    if big_l == 0:
        raise SingularPatternError("single pilot row: velocity unobservable")
    size = (big_k + 1) * (big_l + 1)
    ts = numerology.symbol_duration_s
    df = numerology.subcarrier_spacing_hz
    lam = numerology.wavelength
    noise_over_gain = params.noise_var / params.gain_sq
    crb_ran = (
        12.0
        / (big_k * (big_k + 2) * size * n_p**2)
        * noise_over_gain
        * SPEED_OF_LIGHT**2
        / (8.0 * math.pi**2 * df**2)
    )
    crb_vel = (
        12.0
        / (big_l * (big_l + 2) * size * m_p**2)
        * noise_over_gain
        * lam**2
        / (32.0 * math.pi**2 * ts**2 * math.cos(beta / 2.0) ** 2)
    )
    scale = 8.0 * math.pi**2 * params.gain_sq / params.noise_var
    q_n2 = big_k * (big_k + 2) * size * n_p**2 / 12.0
    q_m2 = big_l * (big_l + 2) * size * m_p**2 / 12.0
    efim_matrix = scale * np.array([[ts**2 * q_m2, 0.0], [0.0, df**2 * q_n2]])
    return CrbReport(
        crb_ran_m2=crb_ran,
        crb_vel_ms2=crb_vel,
        rmse_bound_ran_m=math.sqrt(crb_ran),
        rmse_bound_vel_ms=math.sqrt(crb_vel),
        efim=efim_matrix,
    )


@dataclass(frozen=True)
class EcrbVelocity:
    """Ensemble-averaged root velocity bound with draw accounting."""

    value_ms: float
    draws: int
    skipped: int

    @property
    def skip_fraction(self) -> float:
        return self.skipped / self.draws


def ecrb_vel(
    ensemble: ScenarioEnsemble,
    params: SensingChannelParams,
    pattern: PilotPattern,
    numerology: OfdmNumerology,
    draws: int = 100_000,
    seed=0,
) -> EcrbVelocity:
    """Expected root velocity bound over random target positions.

    Averages sqrt(crb_vel) over bistatic angles induced by the target
    distribution (RMSE-comparable convention). Deterministic for a given
    seed. Degenerate draws (target on a terminal, or exactly on the
    baseline segment where the bound diverges) are skipped and counted.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    rng = np.random.default_rng(seed)
    xs, ys = ensemble.sample_targets(rng, draws)
    d_tx = np.hypot(xs - ensemble.tx_pos[0], ys - ensemble.tx_pos[1])
    d_rx = np.hypot(xs - ensemble.rx_pos[0], ys - ensemble.rx_pos[1])
    baseline = float(np.linalg.norm(ensemble.tx_pos - ensemble.rx_pos))

    ok = (d_tx > DEGENERATE_EPS) & (d_rx > DEGENERATE_EPS)
    betas = np.full(draws, np.nan)
    betas[ok] = bistatic_angle(d_tx[ok], d_rx[ok], baseline)
    cos_half = np.cos(betas / 2.0)
    ok &= cos_half > 1e-12

    base = crb(params, pattern, numerology, beta=0.0)
    values = math.sqrt(base.crb_vel_ms2) / cos_half[ok]
    skipped = draws - int(ok.sum())
    if skipped == draws:
        raise SingularPatternError("all ensemble draws were degenerate")
    return EcrbVelocity(value_ms=float(values.mean()), draws=draws, skipped=skipped)


def rate_upper_bound(
    numerology: OfdmNumerology, rho: float, snr_comm_db: float
) -> float:
    """Ceiling on the communication rate left by the pilot overhead [bit/s].

    N*(1-rho)/T_s * log2(1 + snr), with the communication SNR given in dB.
    Monotone decreasing in the overhead rho; zero at rho = 1.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    snr_lin = 10.0 ** (snr_comm_db / 10.0)
    return (
        numerology.n_subcarriers
        * (1.0 - rho)
        / numerology.symbol_duration_s
        * math.log2(1.0 + snr_lin)
    )


def mean_response(
    params: SensingChannelParams,
    pattern: PilotPattern,
    numerology: OfdmNumerology,
    symbols: np.ndarray | None = None,
) -> np.ndarray:
    """Noiseless received values on the pilot cells, shape (P,).

    ``symbols`` are the pilot symbol values in pattern cell order
    (unit modulus expected); defaults to all ones.
    """
    n = pattern.cells[:, 0].astype(float)
    m = pattern.cells[:, 1].astype(float)
    ts = numerology.symbol_duration_s
    df = numerology.subcarrier_spacing_hz
    phase = 2.0 * math.pi * (params.f_d * ts * m - params.tau * df * n)
    if symbols is None:
        symbols = np.ones(pattern.size, dtype=complex)
    return params.alpha * np.exp(1j * phase) * symbols


def mean_response_jacobian(
    params: SensingChannelParams,
    pattern: PilotPattern,
    numerology: OfdmNumerology,
    symbols: np.ndarray | None = None,
) -> np.ndarray:
    """Analytic derivatives of the pilot-cell response, shape (P, 4).

    Columns follow the parameter order (gain_re, gain_im, doppler, delay):

        d/d gain_re = e^{j phase} X
        d/d gain_im = j e^{j phase} X
        d/d doppler = j gain 2 pi m T_s e^{j phase} X
        d/d delay   = -j gain 2 pi n df e^{j phase} X
    """
    n = pattern.cells[:, 0].astype(float)
    m = pattern.cells[:, 1].astype(float)
    ts = numerology.symbol_duration_s
    df = numerology.subcarrier_spacing_hz
    phase = 2.0 * math.pi * (params.f_d * ts * m - params.tau * df * n)
    if symbols is None:
        symbols = np.ones(pattern.size, dtype=complex)
    carrier = np.exp(1j * phase) * symbols
    jac = np.empty((pattern.size, 4), dtype=complex)
    jac[:, 0] = carrier
    jac[:, 1] = 1j * carrier
    jac[:, 2] = 1j * params.alpha * 2.0 * math.pi * m * ts * carrier
    jac[:, 3] = -1j * params.alpha * 2.0 * math.pi * n * df * carrier
    return jac
