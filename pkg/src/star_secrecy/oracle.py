"""Exhaustive grid search over surface configurations (verification only).

Enumerates per-element phases on a uniform grid and amplitude splits on a
uniform grid (respecting the active protocol), evaluates the secrecy rate
and energy constraints at every point, and returns the best feasible
configuration.  Complexity is exponential in the element count, so this
is restricted to very small surfaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .model import PerformanceMetrics, TarcConfig, secrecy_rate
from .scenario import ChannelSet, Protocol, Scenario, TWO_PI

MAX_ELEMENTS = 3
MAX_GRID = 1 << 27     # total joint configurations allowed

_CHUNK = 2048          # leading-axis slab size for vectorized evaluation


@dataclass
class OracleResult:
    config: TarcConfig
    metrics: PerformanceMetrics
    feasible: bool            # False when no grid point meets the energies
    rate: float               # best feasible secrecy-rate sum (0 if none)
    surrogate: float          # best feasible sum-of-ratios surrogate value


def _phase_grid(points: int) -> np.ndarray:
    return TWO_PI * np.arange(points) / points


def _element_choices(protocol: Protocol, phase_points: int,
                     beta_points: int) -> tuple[np.ndarray, ...]:
    """Per-element candidate tuples (beta_r, phi_r, phi_t)."""
    phases = _phase_grid(phase_points)
    if protocol in (Protocol.ES,):
        betas = np.linspace(0.0, 1.0, beta_points)
        combos = np.array(list(product(betas, phases, phases)))
    elif protocol is Protocol.MS:
        # one active side per element; only the active phase matters
        combos = np.array([(1.0, p, 0.0) for p in phases]
                          + [(0.0, 0.0, p) for p in phases])
    elif protocol is Protocol.TS:
        combos = np.array([(1.0, pr, pt) for pr, pt in product(phases, phases)])
    elif protocol is Protocol.RIS:
        combos = np.array([(1.0, p, 0.0) for p in phases])
    else:  # NONE
        combos = np.array([(0.0, 0.0, 0.0)])
    return combos[:, 0], combos[:, 1], combos[:, 2]


def brute_force_oracle(channels: ChannelSet, scenario: Scenario,
                       phase_points: int = 16,
                       beta_points: int = 11) -> OracleResult:
    """Grid-search the protocol's feasible set for the best secrecy rate.

    For TS the time share is scanned over ``linspace(0, 1, beta_points)``
    after the phase enumeration.  Raises ValueError when the surface has
    more than three elements or the joint grid would be excessive.
    """
    m = scenario.m
    if m > MAX_ELEMENTS:
        raise ValueError(f"oracle supports at most {MAX_ELEMENTS} elements, got {m}")
    protocol = scenario.protocol
    b_r, ph_r, ph_t = _element_choices(protocol, phase_points, beta_points)
    n_choice = b_r.shape[0]
    if n_choice ** m > MAX_GRID:
        raise ValueError("joint grid too large; reduce phase/beta points")

    p_s, sigma2 = scenario.p_s, scenario.sigma2
    # per-element, per-choice contribution to each node's composite gain
    amp_r = np.sqrt(b_r) * np.exp(1j * ph_r)
    if protocol is Protocol.TS:
        amp_t = np.exp(1j * ph_t)          # both sides at unit amplitude
    else:
        amp_t = np.sqrt(np.clip(1.0 - b_r, 0.0, 1.0)) * np.exp(1j * ph_t)
    contrib = {}
    for node, vec, side_amp in (
            ("bob_r", channels.h_r, amp_r), ("eve_r", channels.v_r, amp_r),
            ("bob_t", channels.h_t, amp_t), ("eve_t", channels.v_t, amp_t)):
        contrib[node] = np.conj(vec)[:, None] * channels.H[:, None] \
            * side_amp[None, :]            # (m, n_choice)

    direct = {"bob_r": channels.f_r, "bob_t": channels.f_t,
              "eve_r": channels.g_r, "eve_t": channels.g_t}

    lam_grid = np.linspace(0.0, 1.0, beta_points) if protocol is Protocol.TS \
        else None

    tail_shape = (n_choice,) * (m - 1)
    tail_size = int(np.prod(tail_shape)) if m > 1 else 1

    def tail_gains(node: str) -> np.ndarray:
        """Summed contributions of elements 1..m-1, flattened."""
        total = np.zeros(tail_size, dtype=complex)
        for j in range(1, m):
            reps = n_choice ** (m - 1 - j)
            tile = n_choice ** (j - 1)
            total += np.tile(np.repeat(contrib[node][j], reps), tile)
        return total

    tails = {node: tail_gains(node) for node in contrib}

    best_rate = -1.0
    best_surr = -np.inf
    best_idx = None
    best_lam = 1.0
    any_feasible = False

    for start in range(0, n_choice, _CHUNK):
        stop = min(start + _CHUNK, n_choice)
        gains = {}
        for node in contrib:
            lead = contrib[node][0, start:stop, None]
            gains[node] = lead + tails[node][None, :] + direct[node]
        snr = {node: np.abs(gains[node]) ** 2 * p_s / sigma2 for node in gains}
        energy_r = np.abs(gains["eve_r"]) ** 2 * p_s
        energy_t = np.abs(gains["eve_t"]) ** 2 * p_s
        feas = (energy_r >= scenario.e_r - 1e-12) \
            & (energy_t >= scenario.e_t - 1e-12)
        if not np.any(feas):
            continue
        any_feasible = True
        rate_r = np.maximum(np.log1p(snr["bob_r"]) - np.log1p(snr["eve_r"]), 0.0)
        rate_t = np.maximum(np.log1p(snr["bob_t"]) - np.log1p(snr["eve_t"]), 0.0)
        ratio_r = (1.0 + snr["bob_r"]) / (1.0 + snr["eve_r"])
        ratio_t = (1.0 + snr["bob_t"]) / (1.0 + snr["eve_t"])
        if protocol is Protocol.TS:
            lam = lam_grid[:, None, None]
            rate = np.max(lam * rate_r[None] + (1 - lam) * rate_t[None], axis=0)
            lam_best = lam_grid[np.argmax(
                lam * rate_r[None] + (1 - lam) * rate_t[None], axis=0)]
            surr = np.max(lam * ratio_r[None] + (1 - lam) * ratio_t[None], axis=0)
        else:
            rate = rate_r + rate_t
            lam_best = None
            surr = ratio_r + ratio_t
        rate = np.where(feas, rate, -np.inf)
        surr = np.where(feas, surr, -np.inf)
        flat = int(np.argmax(rate))
        best_surr = max(best_surr, float(np.max(surr)))
        if rate.flat[flat] > best_rate:
            best_rate = float(rate.flat[flat])
            lead_i, tail_i = np.unravel_index(flat, rate.shape)
            best_idx = (start + lead_i, tail_i)
            if lam_best is not None:
                best_lam = float(lam_best.flat[flat])

    if best_idx is None:
        config = TarcConfig.none(m)
        metrics = secrecy_rate(channels, config, p_s, sigma2)
        return OracleResult(config, metrics, False, 0.0, -np.inf)

    choice = np.empty(m, dtype=int)
    choice[0] = best_idx[0]
    rem = int(best_idx[1])
    for j in range(1, m):
        reps = n_choice ** (m - 1 - j)
        choice[j] = rem // reps
        rem %= reps

    beta_r = b_r[choice]
    phi_sel_r = ph_r[choice]
    phi_sel_t = ph_t[choice]
    if protocol is Protocol.ES:
        config = TarcConfig.es(beta_r, phi_sel_r, phi_sel_t)
    elif protocol is Protocol.MS:
        config = TarcConfig.ms(beta_r, phi_sel_r, phi_sel_t)
    elif protocol is Protocol.TS:
        config = TarcConfig.ts(phi_sel_r, phi_sel_t, lambda_r=best_lam)
    elif protocol is Protocol.RIS:
        config = TarcConfig.ris(phi_sel_r)
    else:
        config = TarcConfig.none(m)
    metrics = secrecy_rate(channels, config, p_s, sigma2)
    return OracleResult(config, metrics, any_feasible, metrics.rate_sum,
                        best_surr)
