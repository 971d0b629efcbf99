"""Physical-layer metric evaluation for candidate surface configurations.

A configuration assigns every surface element a transmission and a
reflection coefficient ``sqrt(beta) * exp(j*phi)``.  Given a channel
realization, this module evaluates received SNRs, harvested energy at the
eavesdroppers and the achievable secrecy rates.  Rates are natural-log
(nats per channel use) throughout; conversion to bits is display-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import ChannelSet, Protocol

ES_SUM_TOL = 1e-9       # |beta_t + beta_r - 1| allowed for ES
MS_BINARY_TOL = 1e-6    # distance of each beta from {0, 1} allowed for MS
FIXED_VALUE_TOL = 1e-9  # tolerance on protocol-fixed amplitudes / lambda sum

NODES = ("bob_r", "bob_t", "eve_r", "eve_t")


@dataclass
class TarcConfig:
    """Per-element amplitudes and phases for both sides, plus TS time shares.

    ``beta_*`` are amplitudes squared in [0, 1]; ``phi_*`` are phases in
    [0, 2*pi).  ``lambda_r``/``lambda_t`` are the time fractions of the two
    modes and are meaningful only for the TS protocol.
    """

    protocol: Protocol
    beta_t: np.ndarray
    beta_r: np.ndarray
    phi_t: np.ndarray
    phi_r: np.ndarray
    lambda_t: float = 0.0
    lambda_r: float = 0.0

    def __post_init__(self) -> None:
        self.protocol = Protocol.parse(self.protocol)
        for name in ("beta_t", "beta_r", "phi_t", "phi_r"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        m = self.beta_t.shape[0]
        if not all(getattr(self, n).shape == (m,)
                   for n in ("beta_r", "phi_t", "phi_r")):
            raise ValueError("beta/phi vectors must share one length")
        self.validate()

    @property
    def m(self) -> int:
        return self.beta_t.shape[0]

    def beta(self, side: str) -> np.ndarray:
        return self.beta_r if side == "r" else self.beta_t

    def phi(self, side: str) -> np.ndarray:
        return self.phi_r if side == "r" else self.phi_t

    def time_share(self, side: str) -> float:
        """Fraction of time side ``side`` is active (1.0 unless TS)."""
        if self.protocol is not Protocol.TS:
            return 1.0
        return self.lambda_r if side == "r" else self.lambda_t

    def validate(self) -> None:
        """Check the protocol's feasibility rules; raise ValueError if broken."""
        bt, br = self.beta_t, self.beta_r
        if np.any(bt < -FIXED_VALUE_TOL) or np.any(bt > 1 + FIXED_VALUE_TOL) \
                or np.any(br < -FIXED_VALUE_TOL) or np.any(br > 1 + FIXED_VALUE_TOL):
            raise ValueError("beta values must lie in [0, 1]")
        p = self.protocol
        if p in (Protocol.ES, Protocol.MS):
            if np.max(np.abs(bt + br - 1.0)) > ES_SUM_TOL:
                raise ValueError("ES/MS requires beta_t + beta_r = 1 per element")
            if p is Protocol.MS:
                if np.max(np.abs(bt - np.round(bt))) > MS_BINARY_TOL:
                    raise ValueError("MS requires binary beta per element")
        elif p is Protocol.TS:
            if np.max(np.abs(bt - 1.0)) > FIXED_VALUE_TOL \
                    or np.max(np.abs(br - 1.0)) > FIXED_VALUE_TOL:
                raise ValueError("TS requires unit amplitudes on both sides")
            if abs(self.lambda_t + self.lambda_r - 1.0) > FIXED_VALUE_TOL \
                    or not (0.0 <= self.lambda_t <= 1.0):
                raise ValueError("TS requires lambda_t + lambda_r = 1 in [0, 1]")
        elif p is Protocol.RIS:
            if np.max(np.abs(br - 1.0)) > FIXED_VALUE_TOL \
                    or np.max(np.abs(bt)) > FIXED_VALUE_TOL:
                raise ValueError("RIS baseline requires beta_r = 1, beta_t = 0")
        elif p is Protocol.NONE:
            if np.max(np.abs(bt)) > FIXED_VALUE_TOL \
                    or np.max(np.abs(br)) > FIXED_VALUE_TOL:
                raise ValueError("NONE baseline requires all beta = 0")

    # -- common constructions -------------------------------------------------

    @classmethod
    def none(cls, m: int) -> "TarcConfig":
        """Surface fully off (direct links only)."""
        z = np.zeros(m)
        return cls(Protocol.NONE, beta_t=z.copy(), beta_r=z.copy(),
                   phi_t=z.copy(), phi_r=z.copy())

    @classmethod
    def ris(cls, phi_r: np.ndarray) -> "TarcConfig":
        """Reflect-only baseline with the given reflection phases."""
        phi_r = np.asarray(phi_r, dtype=float)
        m = phi_r.shape[0]
        return cls(Protocol.RIS, beta_t=np.zeros(m), beta_r=np.ones(m),
                   phi_t=np.zeros(m), phi_r=phi_r)

    @classmethod
    def es(cls, beta_r: np.ndarray, phi_r: np.ndarray,
           phi_t: np.ndarray) -> "TarcConfig":
        """Energy-splitting configuration; beta_t is set to 1 - beta_r."""
        beta_r = np.clip(np.asarray(beta_r, dtype=float), 0.0, 1.0)
        return cls(Protocol.ES, beta_t=1.0 - beta_r, beta_r=beta_r,
                   phi_t=np.asarray(phi_t, float), phi_r=np.asarray(phi_r, float))

    @classmethod
    def ms(cls, beta_r: np.ndarray, phi_r: np.ndarray,
           phi_t: np.ndarray) -> "TarcConfig":
        """Mode-selection configuration from a binary reflection assignment."""
        beta_r = np.round(np.asarray(beta_r, dtype=float))
        return cls(Protocol.MS, beta_t=1.0 - beta_r, beta_r=beta_r,
                   phi_t=np.asarray(phi_t, float), phi_r=np.asarray(phi_r, float))

    @classmethod
    def ts(cls, phi_r: np.ndarray, phi_t: np.ndarray,
           lambda_r: float) -> "TarcConfig":
        """Time-switching configuration with reflection share ``lambda_r``."""
        phi_r = np.asarray(phi_r, dtype=float)
        m = phi_r.shape[0]
        return cls(Protocol.TS, beta_t=np.ones(m), beta_r=np.ones(m),
                   phi_t=np.asarray(phi_t, float), phi_r=phi_r,
                   lambda_t=1.0 - lambda_r, lambda_r=lambda_r)


@dataclass
class PerformanceMetrics:
    """All physical-layer metrics of one configuration on one channel set."""

    snr_bob_r: float
    snr_bob_t: float
    snr_eve_r: float
    snr_eve_t: float
    rate_r: float          # nats / channel use, clamped at 0
    rate_t: float
    rate_sum: float
    energy_eve_r: float    # harvested energy (linear watts)
    energy_eve_t: float


def tarc_matrix(config: TarcConfig, side: str) -> np.ndarray:
    """Diagonal coefficient matrix ``diag(sqrt(beta) * exp(j*phi))`` of a side."""
    return np.diag(np.sqrt(config.beta(side)) * np.exp(1j * config.phi(side)))


def effective_gain(channel_vec: np.ndarray, tarc: np.ndarray,
                   H: np.ndarray, direct: complex) -> complex:
    """Composite gain ``channel_vec^H @ tarc @ H + direct``.

    ``channel_vec`` is stored unconjugated; the conjugate transpose is
    applied here.
    """
    channel_vec = np.asarray(channel_vec)
    H = np.asarray(H)
    if tarc.shape != (channel_vec.shape[0], H.shape[0]):
        raise ValueError("dimension mismatch between channels and TARC matrix")
    return complex(np.vdot(channel_vec, tarc @ H) + direct)


def _node_gain(channels: ChannelSet, config: TarcConfig, node: str) -> complex:
    who, side = node.split("_")
    vec, direct = (channels.bob(side) if who == "bob" else channels.eve(side))
    return effective_gain(vec, tarc_matrix(config, side), channels.H, direct)


def snr(channels: ChannelSet, config: TarcConfig, node: str,
        p_s: float, sigma2: float) -> float:
    """Received SNR at ``node`` (one of bob_r, bob_t, eve_r, eve_t)."""
    if node not in NODES:
        raise ValueError(f"unknown node {node!r}")
    return abs(_node_gain(channels, config, node)) ** 2 * p_s / sigma2


def harvested_energy(channels: ChannelSet, config: TarcConfig,
                     eve: str, p_s: float) -> float:
    """Energy harvested by Eve on side 'r' or 't' (noise power neglected)."""
    return abs(_node_gain(channels, config, f"eve_{eve}")) ** 2 * p_s


def secrecy_rate(channels: ChannelSet, config: TarcConfig,
                 p_s: float, sigma2: float) -> PerformanceMetrics:
    """Evaluate all metrics of a configuration.

    Per-side secrecy rate is ``[ln(1+SNR_Bob) - ln(1+SNR_Eve)]^+``; under
    the TS protocol each side is additionally weighted by its time share.
    Harvested energy is not scaled by the time shares.
    """
    s = {node: snr(channels, config, node, p_s, sigma2) for node in NODES}
    rates = {}
    for side in ("r", "t"):
        diff = math.log1p(s[f"bob_{side}"]) - math.log1p(s[f"eve_{side}"])
        rates[side] = config.time_share(side) * max(diff, 0.0)
    return PerformanceMetrics(
        snr_bob_r=s["bob_r"], snr_bob_t=s["bob_t"],
        snr_eve_r=s["eve_r"], snr_eve_t=s["eve_t"],
        rate_r=rates["r"], rate_t=rates["t"],
        rate_sum=rates["r"] + rates["t"],
        energy_eve_r=harvested_energy(channels, config, "r", p_s),
        energy_eve_t=harvested_energy(channels, config, "t", p_s),
    )


def nats_to_bits(rate: float) -> float:
    """Display-time conversion; internal math stays in nats."""
    return rate / math.log(2.0)
