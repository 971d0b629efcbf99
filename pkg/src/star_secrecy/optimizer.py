"""Secrecy-rate maximization over surface coefficients.

Pipeline: lift each side's quadratic channel gain to a trace-linear form
over a rank-relaxed PSD matrix, run Dinkelbach iterations on the
sum-of-ratios surrogate (each iterate is one SDP solve), then recover a
rank-one coefficient vector by an eigenvalue check or Gaussian
randomization.  Mode selection adds an outer penalty loop that drives the
amplitude split binary; time switching decouples per side and scans the
time-share grid.  Reported rates always come from re-evaluating the true
log-secrecy-rate at the extracted configuration, never from the relaxed
surrogate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .model import (TarcConfig, PerformanceMetrics, effective_gain,
                    secrecy_rate, tarc_matrix)
from .scenario import ChannelSet, Protocol, Scenario, TWO_PI

log = logging.getLogger(__name__)

SIDES = ("r", "t")

#: Allowed shortfall of achieved harvested energy vs the requirement when
#: declaring a result feasible.
ENERGY_SLACK = 1e-6


@dataclass
class OptimizerSettings:
    eps1: float = 1e-4              # Dinkelbach stopping accuracy
    eps2: float = 1e-4              # binary-violation stopping accuracy (MS)
    eta0: float = 1e-2              # initial penalty weight (MS)
    omega: float = 10.0             # penalty growth factor (MS)
    max_dinkelbach: int = 50
    max_penalty_outer: int = 30
    lambda_grid_step: float = 0.01  # TS time-share search resolution
    randomization_samples: int = 1000
    rank_ratio_tol: float = 1e-6    # second/first eigenvalue ratio for rank one
    sdp: sdp.SdpSettings = field(default_factory=sdp.SdpSettings)

    def __post_init__(self) -> None:
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("eps1 and eps2 must be positive")
        if self.omega <= 1:
            raise ValueError("omega must exceed 1")
        if not 0.0 < self.lambda_grid_step <= 0.5:
            raise ValueError("lambda_grid_step must lie in (0, 0.5]")


@dataclass
class LiftedData:
    """Per-side channel stacks and their scaled outer products.

    ``w[k]`` stacks the elementwise Bob-side composite channel over the
    direct link; ``g[k]`` likewise for the Eve side.  ``w_b[k]`` and
    ``g_e[k]`` are the transmit-power-scaled rank-one outer products used
    in all trace expressions.
    """

    w: dict[str, np.ndarray]
    g: dict[str, np.ndarray]
    w_b: dict[str, np.ndarray]
    g_e: dict[str, np.ndarray]
    p_s: float

    @property
    def m(self) -> int:
        return self.w["r"].shape[0] - 1


@dataclass
class DinkelbachState:
    """One ratio-update iteration: current estimates and surrogate value."""

    gamma_r: float
    gamma_t: float
    iteration: int
    objective: float


@dataclass
class OptResult:
    config: TarcConfig
    sdr_bound: float                 # relaxed sum-of-ratios at convergence
    metrics: PerformanceMetrics
    feasible: bool
    gamma_trace: list[DinkelbachState]
    iterations_ic: int               # Dinkelbach iterations (SDP solves)
    iterations_id: int               # penalty outer rounds (MS only)
    rank_gap: float                  # (bound - extracted surrogate) / bound
    status: str = "ok"               # ok | infeasible | stalled
    side_traces: dict[str, list[tuple[float, float]]] | None = None


def _rtr(a: np.ndarray, b: np.ndarray) -> float:
    """Real trace inner product of two Hermitian matrices."""
    return float(np.vdot(a, b).real)


def build_lifted(channels: ChannelSet, p_s: float) -> LiftedData:
    """Stack per-element composite channels over the direct links.

    For each side k, entry m of the Bob stack is ``conj(h_k[m]) * H[m]``
    and the last entry is the direct link ``f_k``; the Eve stack uses
    (v_k, g_k).  The outer products absorb the transmit power.
    """
    w, g, w_b, g_e = {}, {}, {}, {}
    for k in SIDES:
        hv, f = channels.bob(k)
        vv, gd = channels.eve(k)
        w[k] = np.concatenate([np.conj(hv) * channels.H, [f]])
        g[k] = np.concatenate([np.conj(vv) * channels.H, [gd]])
        w_b[k] = p_s * np.outer(w[k], np.conj(w[k]))
        g_e[k] = p_s * np.outer(g[k], np.conj(g[k]))
    return LiftedData(w=w, g=g, w_b=w_b, g_e=g_e, p_s=p_s)


def lifted_vector(config: TarcConfig, side: str) -> np.ndarray:
    """Coefficient vector pairing with the lifted matrices.

    Entries are the conjugated per-element coefficients with a trailing 1,
    so ``q^H w_b q`` equals the power-scaled squared composite gain of the
    corresponding configuration.
    """
    u = np.sqrt(config.beta(side)) * np.exp(1j * config.phi(side))
    return np.concatenate([np.conj(u), [1.0]])


def dinkelbach_update(lifted: LiftedData, q_r: np.ndarray, q_t: np.ndarray,
                      sigma2: float) -> tuple[float, float]:
    """Ratio estimates at the current relaxed iterates (Q_r, Q_t)."""
    out = []
    for k, qm in zip(SIDES, (q_r, q_t)):
        out.append((sigma2 + _rtr(lifted.w_b[k], qm))
                   / (sigma2 + _rtr(lifted.g_e[k], qm)))
    return out[0], out[1]


def initial_gamma(lifted: LiftedData, sigma2: float) -> dict[str, float]:
    """Ratio at the all-off configuration (direct links only)."""
    n = lifted.m
    return {k: (sigma2 + lifted.w_b[k][n, n].real)
            / (sigma2 + lifted.g_e[k][n, n].real) for k in SIDES}


def energy_ceiling(lifted: LiftedData, side: str) -> float:
    """Harvested energy upper bound: all amplitude to this side, phases
    aligned with the direct link."""
    gv = lifted.g[side]
    return lifted.p_s * float(np.sum(np.abs(gv[:-1])) + abs(gv[-1])) ** 2


def _required(scenario: Scenario, side: str) -> float:
    return scenario.e_r if side == "r" else scenario.e_t


# -- problem builders ---------------------------------------------------------

def _diag_unit(n: int, i: int) -> np.ndarray:
    mat = np.zeros((n, n), dtype=complex)
    mat[i, i] = 1.0
    return mat


def _joint_problem(lifted: LiftedData, scenario: Scenario,
                   gamma: dict[str, float], beta_obj: np.ndarray | None,
                   weights: dict[str, float] | None = None) -> sdp.HermitianSdp:
    """Two-block SDP of one Dinkelbach iterate for the ES/MS protocols.

    Variables: one (M+1) block per side plus the 2M amplitude scalars
    (side r first).  ``weights`` scales each side's objective term (the
    constraints never change); the whole objective is then rescaled to
    unit magnitude, which leaves the maximizer unchanged.
    """
    m = scenario.m
    n = m + 1
    w = weights or {k: 1.0 for k in SIDES}
    prob = sdp.HermitianSdp([n, n], num_scalars=2 * m,
                            scalar_lower=0.0, scalar_upper=1.0)
    obj = {b: w[k] * (lifted.w_b[k] - gamma[k] * lifted.g_e[k])
           for b, k in enumerate(SIDES)}
    scale = max(np.max(np.abs(obj[0])), np.max(np.abs(obj[1])), 1e-300)
    if beta_obj is not None:
        scale = max(scale, np.max(np.abs(beta_obj)))
    prob.set_objective(
        blocks={b: mat / scale for b, mat in obj.items()},
        scalars=None if beta_obj is None else beta_obj / scale)
    for b, k in enumerate(SIDES):
        for i in range(m):
            vec = np.zeros(2 * m)
            vec[b * m + i] = -1.0
            prob.add_eq(0.0, blocks={b: _diag_unit(n, i)}, scalars=vec)
        prob.add_eq(1.0, blocks={b: _diag_unit(n, m)})
        req = _required(scenario, k)
        if req > 0.0:
            prob.add_ineq(req, blocks={b: lifted.g_e[k]})
    for i in range(m):
        vec = np.zeros(2 * m)
        vec[i] = 1.0
        vec[m + i] = 1.0
        prob.add_eq(1.0, scalars=vec)
    return prob


def _side_problem(lifted: LiftedData, scenario: Scenario, side: str,
                  gamma_k: float) -> sdp.HermitianSdp:
    """Single-block SDP with unit diagonal (TS per side, RIS reflect side)."""
    n = scenario.m + 1
    prob = sdp.HermitianSdp([n])
    obj = lifted.w_b[side] - gamma_k * lifted.g_e[side]
    scale = max(np.max(np.abs(obj)), 1e-300)
    prob.set_objective(blocks={0: obj / scale})
    for i in range(n):
        prob.add_eq(1.0, blocks={0: _diag_unit(n, i)})
    req = _required(scenario, side)
    if req > 0.0:
        prob.add_ineq(req, blocks={0: lifted.g_e[side]})
    return prob


# -- rank-one extraction ------------------------------------------------------

def _project_candidates(samples: np.ndarray, amp: np.ndarray) -> np.ndarray:
    """Map raw candidate vectors onto the protocol's feasible set.

    Rotates each vector so its last entry has zero phase, keeps the
    per-element phases and forces the amplitudes to ``amp`` (with a
    trailing 1).
    """
    last = samples[:, -1:]
    mag = np.abs(last)
    phase = np.divide(last, mag, out=np.ones_like(last), where=mag > 0)
    rotated = samples * np.conj(phase)
    ang = np.angle(rotated[:, :-1])
    out = np.empty_like(samples)
    out[:, :-1] = amp[None, :] * np.exp(1j * ang)
    out[:, -1] = 1.0
    return out


def extract_rank_one(qm: np.ndarray, beta_target: np.ndarray | float,
                     protocol: Protocol, lifted: LiftedData, side: str,
                     e_min: float, gamma_k: float, sigma2: float,
                     settings: OptimizerSettings,
                     rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """Recover a feasible coefficient vector from a relaxed PSD solution.

    If the solution is numerically rank one, the scaled principal
    eigenvector (projected onto the protocol set) is returned directly.
    Otherwise Gaussian randomization draws ``randomization_samples``
    candidates with covariance ``qm``, projects them, discards those whose
    harvested energy falls short of ``e_min``, and keeps the one with the
    best Dinkelbach surrogate at ``gamma_k``.  Returns (vector, feasible).
    """
    n = qm.shape[0]
    vals, vecs = np.linalg.eigh(0.5 * (qm + qm.conj().T))
    if vals[0] < -1e-6 * max(1.0, vals[-1]):
        raise ValueError("matrix is not PSD within tolerance")
    lam = np.maximum(vals, 0.0)
    amp = (np.sqrt(np.clip(np.asarray(beta_target, float), 0.0, 1.0))
           if np.ndim(beta_target) else np.full(n - 1, math.sqrt(beta_target)))

    principal = (math.sqrt(lam[-1]) * vecs[:, -1])[None, :]
    q0 = _project_candidates(principal, amp)[0]

    def energies(cands: np.ndarray) -> np.ndarray:
        return lifted.p_s * np.abs(cands.conj() @ lifted.g[side]) ** 2

    def surrogate(cands: np.ndarray) -> np.ndarray:
        wq = lifted.p_s * np.abs(cands.conj() @ lifted.w[side]) ** 2
        gq = energies(cands)
        return (sigma2 + wq) - gamma_k * (sigma2 + gq)

    rank_ratio = lam[-2] / lam[-1] if n > 1 and lam[-1] > 0 else 0.0
    if rank_ratio <= settings.rank_ratio_tol:
        return q0, bool(energies(q0[None, :])[0] >= e_min - ENERGY_SLACK)

    ns = settings.randomization_samples
    noise = (rng.standard_normal((ns, n)) + 1j * rng.standard_normal((ns, n)))
    raw = (noise / math.sqrt(2.0)) * np.sqrt(lam)[None, :] @ vecs.T
    cands = np.vstack([q0[None, :], _project_candidates(raw, amp)])
    feas = energies(cands) >= e_min - ENERGY_SLACK
    if not np.any(feas):
        return q0, False
    idx = np.flatnonzero(feas)
    best = idx[np.argmax(surrogate(cands[idx]))]
    return cands[best], True


def _phases_from(q: np.ndarray) -> np.ndarray:
    return np.mod(-np.angle(q[:-1]), TWO_PI)


# -- result assembly ----------------------------------------------------------

def _achieved_surrogate(lifted: LiftedData, config: TarcConfig,
                        sigma2: float) -> dict[str, float]:
    """True per-side ratio values at a rank-one configuration."""
    out = {}
    for k in SIDES:
        q = lifted_vector(config, k)
        num = sigma2 + lifted.p_s * abs(np.vdot(q, lifted.w[k])) ** 2
        den = sigma2 + lifted.p_s * abs(np.vdot(q, lifted.g[k])) ** 2
        out[k] = num / den
    return out


def _finish(channels: ChannelSet, scenario: Scenario, lifted: LiftedData,
            config: TarcConfig, sdr_bound: float, trace, ic: int, id_: int,
            extraction_ok: bool, status: str,
            side_traces=None, weights: dict[str, float] | None = None) -> OptResult:
    metrics = secrecy_rate(channels, config, scenario.p_s, scenario.sigma2)
    feasible = (extraction_ok
                and metrics.energy_eve_r >= scenario.e_r - ENERGY_SLACK
                and metrics.energy_eve_t >= scenario.e_t - ENERGY_SLACK)
    ratios = _achieved_surrogate(lifted, config, scenario.sigma2)
    w = weights or {k: 1.0 for k in SIDES}
    achieved = sum(w[k] * ratios[k] for k in SIDES)
    denom = max(abs(sdr_bound), 1e-12)
    return OptResult(config=config, sdr_bound=sdr_bound, metrics=metrics,
                     feasible=feasible, gamma_trace=list(trace),
                     iterations_ic=ic, iterations_id=id_,
                     rank_gap=(sdr_bound - achieved) / denom,
                     status=status, side_traces=side_traces)


def _infeasible_result(channels: ChannelSet, scenario: Scenario,
                       trace, ic: int, id_: int = 0) -> OptResult:
    config = TarcConfig.none(scenario.m)
    metrics = secrecy_rate(channels, config, scenario.p_s, scenario.sigma2)
    return OptResult(config=config, sdr_bound=0.0, metrics=metrics,
                     feasible=False, gamma_trace=list(trace),
                     iterations_ic=ic, iterations_id=id_, rank_gap=0.0,
                     status="infeasible")


# -- joint (ES / MS) Dinkelbach loop ------------------------------------------

@dataclass
class _JointRun:
    status: str                       # ok | infeasible | stalled
    sol: sdp.SdpSolution | None
    gamma: dict[str, float]
    beta: np.ndarray | None           # stacked (beta_r, beta_t)
    objective: float
    solves: int


def _dinkelbach_joint(lifted: LiftedData, scenario: Scenario,
                      settings: OptimizerSettings, gamma: dict[str, float],
                      beta_obj: np.ndarray | None, trace: list,
                      weights: dict[str, float] | None = None) -> _JointRun:
    """Iterate SDP solves and ratio updates until the surrogate vanishes.

    ``weights`` holds fixed per-side objective weights: equal weights give
    the surrogate whose converged ratio sum is reported as the relaxed
    bound; inverse-numerator weights make the fixed point stationary for
    the sum of log-rates; a single-side weight keeps only the regime
    where the other side's rate is given up (the clamp makes that optimal
    on some channels).  Ratio updates and constraints are identical in
    every case.

    ``trace`` collects (gamma_r, gamma_t, F) where F is the weighted
    surrogate value at the current gamma; |F| <= eps1 stops the loop.
    """
    weights = weights or {k: 1.0 for k in SIDES}
    sol = None
    beta = None
    solves = 0
    for _ in range(settings.max_dinkelbach):
        prob = _joint_problem(lifted, scenario, gamma, beta_obj, weights)
        cur = sdp.solve(prob, settings.sdp)
        solves += 1
        if cur.status is sdp.SdpStatus.INFEASIBLE:
            return _JointRun("infeasible", sol, gamma, beta, math.nan, solves)
        if cur.status is not sdp.SdpStatus.OPTIMAL:
            log.warning("SDP exited with %s after %d iterations",
                        cur.status.value, cur.iterations)
            return _JointRun("stalled", sol or cur, gamma, beta, math.nan, solves)
        sol = cur
        beta = cur.scalar_values
        f_val = 0.0
        for b, k in enumerate(SIDES):
            num = scenario.sigma2 + _rtr(lifted.w_b[k], cur.block_values[b])
            den = scenario.sigma2 + _rtr(lifted.g_e[k], cur.block_values[b])
            f_val += weights[k] * (num - gamma[k] * den)
        trace.append(DinkelbachState(gamma["r"], gamma["t"], len(trace), f_val))
        gr, gt = dinkelbach_update(lifted, cur.block_values[0],
                                   cur.block_values[1], scenario.sigma2)
        gamma = {"r": gr, "t": gt}
        if abs(f_val) <= settings.eps1:
            return _JointRun("ok", sol, gamma, beta, f_val, solves)
    return _JointRun("stalled", sol, gamma, beta, math.nan, solves)


def _screen_energy(lifted: LiftedData, scenario: Scenario) -> bool:
    """False when a side's requirement exceeds its closed-form ceiling."""
    for k in SIDES:
        if _required(scenario, k) > energy_ceiling(lifted, k) * (1 + 1e-12):
            return False
    return True


def _extract_candidate(scenario, lifted, settings, rng, run,
                       protocol: Protocol) -> tuple[TarcConfig, bool]:
    """Clean the amplitude split of a converged pass, extract both sides."""
    m = scenario.m
    beta_r = np.clip(run.beta[:m], 0.0, 1.0)
    if protocol is Protocol.MS:
        beta_r = np.round(beta_r)
    beta = {"r": beta_r, "t": 1.0 - beta_r}
    qs, ok = {}, True
    for b, k in enumerate(SIDES):
        qs[k], feas_k = extract_rank_one(
            run.sol.block_values[b], beta[k], protocol, lifted, k,
            _required(scenario, k), run.gamma[k], scenario.sigma2,
            settings, rng)
        ok = ok and feas_k
    phi_r, phi_t = _phases_from(qs["r"]), _phases_from(qs["t"])
    if protocol is Protocol.MS:
        return TarcConfig.ms(beta_r, phi_r, phi_t), ok
    return TarcConfig.es(beta_r, phi_r, phi_t), ok


def _pick_candidate(channels, scenario, candidates):
    """Best true-rate configuration; feasible candidates take precedence."""
    scored = []
    for config, ok in candidates:
        metrics = secrecy_rate(channels, config, scenario.p_s, scenario.sigma2)
        feas = (ok and metrics.energy_eve_r >= scenario.e_r - ENERGY_SLACK
                and metrics.energy_eve_t >= scenario.e_t - ENERGY_SLACK)
        scored.append((feas, metrics.rate_sum, config, ok))
    feasible = [s for s in scored if s[0]]
    pool = feasible if feasible else scored
    best = max(pool, key=lambda s: s[1])
    return best[2], best[3]


# -- protocol solvers ---------------------------------------------------------

def solve_es(channels: ChannelSet, scenario: Scenario,
             settings: OptimizerSettings | None = None,
             rng: np.random.Generator | None = None) -> OptResult:
    """Energy-splitting protocol.

    Runs the equal-weight Dinkelbach pass (whose converged ratio sum is
    the reported relaxed bound), then three more passes over the same
    constraint set: log-reweighted (stationary for the sum of log-rates)
    and the two single-side regimes that the rate clamp makes optimal on
    some channels.  Every pass is extracted to a rank-one configuration
    and the best true secrecy rate among feasible candidates is returned.
    """
    settings = settings or OptimizerSettings()
    rng = rng if rng is not None else np.random.default_rng(scenario.seed)
    lifted = build_lifted(channels, scenario.p_s)
    trace: list = []
    if not _screen_energy(lifted, scenario):
        return _infeasible_result(channels, scenario, trace, 0)
    gamma0 = initial_gamma(lifted, scenario.sigma2)

    plain = _dinkelbach_joint(lifted, scenario, settings, dict(gamma0),
                              None, trace)
    if plain.status == "infeasible" or plain.sol is None:
        return _infeasible_result(channels, scenario, trace, plain.solves)
    bound = plain.gamma["r"] + plain.gamma["t"]
    total_ic = plain.solves
    candidates = [_extract_candidate(scenario, lifted, settings, rng,
                                     plain, Protocol.ES)]
    status = "ok" if plain.status == "ok" else plain.status

    # log weights frozen at the equal-weight solution's numerators
    log_w = {k: 1.0 / (scenario.sigma2
                       + _rtr(lifted.w_b[k], plain.sol.block_values[b]))
             for b, k in enumerate(SIDES)}
    extra = [(log_w, dict(plain.gamma)),
             ({"r": 1.0, "t": 0.0}, dict(gamma0)),
             ({"r": 0.0, "t": 1.0}, dict(gamma0))]
    for weights, gamma_init in extra:
        run = _dinkelbach_joint(lifted, scenario, settings, gamma_init,
                                None, [], weights=weights)
        total_ic += run.solves
        if run.sol is not None and run.beta is not None:
            candidates.append(_extract_candidate(scenario, lifted, settings,
                                                 rng, run, Protocol.ES))
    config, ok = _pick_candidate(channels, scenario, candidates)
    return _finish(channels, scenario, lifted, config, bound, trace,
                   total_ic, 0, ok, status)


def solve_ms(channels: ChannelSet, scenario: Scenario,
             settings: OptimizerSettings | None = None,
             rng: np.random.Generator | None = None) -> OptResult:
    """Mode selection: ES machinery plus an outer penalty loop.

    The binary constraint is relaxed through its first-order upper bound
    around the previous iterate; the penalty weight grows geometrically
    until the true binary violation drops below ``eps2``.  The final
    amplitude split is rounded before extraction.
    """
    settings = settings or OptimizerSettings()
    rng = rng if rng is not None else np.random.default_rng(scenario.seed)
    lifted = build_lifted(channels, scenario.p_s)
    trace: list = []
    if not _screen_energy(lifted, scenario):
        return _infeasible_result(channels, scenario, trace, 0)

    m = scenario.m
    gamma = initial_gamma(lifted, scenario.sigma2)
    beta_hat = np.full(2 * m, 0.5)
    eta = settings.eta0
    total_ic = 0
    run = None
    status = "stalled"
    rounds = 0
    for rounds in range(1, settings.max_penalty_outer + 1):
        beta_obj = -eta * (1.0 - 2.0 * beta_hat)
        cur = _dinkelbach_joint(lifted, scenario, settings, gamma,
                                beta_obj, trace)
        total_ic += cur.solves
        if cur.status == "infeasible" or cur.sol is None:
            if run is None:
                return _infeasible_result(channels, scenario, trace,
                                          total_ic, rounds)
            break
        run = cur
        gamma = cur.gamma
        beta_hat = cur.beta
        violation = float(np.sum(beta_hat - beta_hat ** 2))
        if violation <= settings.eps2:
            status = "ok"
            break
        eta = min(eta * settings.omega, 1e8)
    if run is None:
        return _infeasible_result(channels, scenario, trace, total_ic, rounds)
    if status != "ok":
        log.warning("binary violation stalled above eps2 after %d rounds", rounds)
    candidates = [_extract_candidate(scenario, lifted, settings, rng, run,
                                     Protocol.MS)]
    # all-reflect / all-transmit assignments (optimal when one side's rate
    # clamps to zero); their single-block problems are cheap
    for k in SIDES:
        side = _dinkelbach_side(lifted, scenario, k, settings)
        total_ic += side.solves
        if side.qm is None:
            continue
        q_k, ok_k = extract_rank_one(side.qm, 1.0, Protocol.MS, lifted, k,
                                     _required(scenario, k), side.gamma,
                                     scenario.sigma2, settings, rng)
        beta_r = np.ones(m) if k == "r" else np.zeros(m)
        phi = _phases_from(q_k)
        zeros = np.zeros(m)
        cfg = (TarcConfig.ms(beta_r, phi, zeros) if k == "r"
               else TarcConfig.ms(beta_r, zeros, phi))
        candidates.append((cfg, ok_k))
    config, ok = _pick_candidate(channels, scenario, candidates)
    bound = gamma["r"] + gamma["t"]
    return _finish(channels, scenario, lifted, config, bound, trace,
                   total_ic, rounds, ok, status)


@dataclass
class _SideRun:
    status: str
    qm: np.ndarray | None
    gamma: float
    trace: list[tuple[float, float]]   # (gamma, F) per iteration
    solves: int


def _dinkelbach_side(lifted: LiftedData, scenario: Scenario, side: str,
                     settings: OptimizerSettings) -> _SideRun:
    """Classical single-ratio Dinkelbach on one unit-diagonal block."""
    gamma = initial_gamma(lifted, scenario.sigma2)[side]
    qm = None
    side_trace: list[tuple[float, float]] = []
    solves = 0
    for _ in range(settings.max_dinkelbach):
        prob = _side_problem(lifted, scenario, side, gamma)
        cur = sdp.solve(prob, settings.sdp)
        solves += 1
        if cur.status is sdp.SdpStatus.INFEASIBLE:
            return _SideRun("infeasible", qm, gamma, side_trace, solves)
        if cur.status is not sdp.SdpStatus.OPTIMAL:
            return _SideRun("stalled", qm if qm is not None else None,
                            gamma, side_trace, solves)
        qm = cur.block_values[0]
        num = scenario.sigma2 + _rtr(lifted.w_b[side], qm)
        den = scenario.sigma2 + _rtr(lifted.g_e[side], qm)
        f_val = num - gamma * den
        side_trace.append((gamma, f_val))
        gamma = num / den
        if abs(f_val) <= settings.eps1:
            return _SideRun("ok", qm, gamma, side_trace, solves)
    return _SideRun("stalled", qm, gamma, side_trace, solves)


def _merge_side_traces(tr_r, tr_t) -> list[DinkelbachState]:
    """Zip per-side traces, holding the shorter side at its final state."""
    merged = []
    for j in range(max(len(tr_r), len(tr_t))):
        gr, fr = tr_r[min(j, len(tr_r) - 1)] if tr_r else (0.0, 0.0)
        gt, ft = tr_t[min(j, len(tr_t) - 1)] if tr_t else (0.0, 0.0)
        fr = fr if j < len(tr_r) else 0.0
        ft = ft if j < len(tr_t) else 0.0
        merged.append(DinkelbachState(gr, gt, j, fr + ft))
    return merged


def solve_ts(channels: ChannelSet, scenario: Scenario,
             settings: OptimizerSettings | None = None,
             rng: np.random.Generator | None = None) -> OptResult:
    """Time switching: the two sides decouple into unit-modulus problems.

    The per-side SDP and its Dinkelbach iteration do not depend on the
    time shares (the shares only scale the objective and never enter the
    constraints), so each side is solved once and the time-share grid is
    scanned on the extracted per-side rates; this returns exactly what
    re-solving at every grid point would.  Grid ties resolve to the
    smallest reflection share.
    """
    settings = settings or OptimizerSettings()
    rng = rng if rng is not None else np.random.default_rng(scenario.seed)
    lifted = build_lifted(channels, scenario.p_s)
    if not _screen_energy(lifted, scenario):
        return _infeasible_result(channels, scenario, [], 0)

    runs = {}
    for k in SIDES:
        runs[k] = _dinkelbach_side(lifted, scenario, k, settings)
    if any(r.status == "infeasible" or r.qm is None for r in runs.values()):
        trace = _merge_side_traces(runs["r"].trace, runs["t"].trace)
        return _infeasible_result(channels, scenario, trace,
                                  sum(r.solves for r in runs.values()))

    qs, ok = {}, True
    for k in SIDES:
        qs[k], feas_k = extract_rank_one(
            runs[k].qm, 1.0, Protocol.TS, lifted, k,
            _required(scenario, k), runs[k].gamma, scenario.sigma2,
            settings, rng)
        ok = ok and feas_k
    phi = {k: _phases_from(qs[k]) for k in SIDES}

    # unweighted per-side secrecy rates of the extracted phases
    probe = TarcConfig.ts(phi["r"], phi["t"], lambda_r=1.0)
    rate = {}
    for k in SIDES:
        hv, f = channels.bob(k)
        vv, gd = channels.eve(k)
        tm = tarc_matrix(probe, k)
        snr_b = abs(effective_gain(hv, tm, channels.H, f)) ** 2 \
            * scenario.p_s / scenario.sigma2
        snr_e = abs(effective_gain(vv, tm, channels.H, gd)) ** 2 \
            * scenario.p_s / scenario.sigma2
        rate[k] = max(math.log1p(snr_b) - math.log1p(snr_e), 0.0)

    steps = int(round(1.0 / settings.lambda_grid_step))
    grid = np.linspace(0.0, 1.0, steps + 1)
    totals = grid * rate["r"] + (1.0 - grid) * rate["t"]
    best = int(np.argmax(totals))          # first max = smallest lambda_r
    lam_r = float(grid[best])

    config = TarcConfig.ts(phi["r"], phi["t"], lambda_r=lam_r)
    weights = {"r": lam_r, "t": 1.0 - lam_r}
    bound = weights["r"] * runs["r"].gamma + weights["t"] * runs["t"].gamma
    trace = _merge_side_traces(runs["r"].trace, runs["t"].trace)
    status = "ok" if all(r.status == "ok" for r in runs.values()) else "stalled"
    return _finish(channels, scenario, lifted, config, bound, trace,
                   sum(r.solves for r in runs.values()), 0, ok, status,
                   side_traces={k: runs[k].trace for k in SIDES},
                   weights=weights)


def solve_baseline(channels: ChannelSet, scenario: Scenario,
                   settings: OptimizerSettings | None = None,
                   rng: np.random.Generator | None = None,
                   kind: Protocol = Protocol.RIS) -> OptResult:
    """Comparison baselines: reflect-only surface, or no surface at all.

    RIS keeps full amplitude on the reflection side with optimized phases;
    the transmission-side users see only their direct links.  NONE simply
    evaluates the all-off configuration.
    """
    settings = settings or OptimizerSettings()
    rng = rng if rng is not None else np.random.default_rng(scenario.seed)
    lifted = build_lifted(channels, scenario.p_s)
    gamma0 = initial_gamma(lifted, scenario.sigma2)

    if kind is Protocol.NONE:
        config = TarcConfig.none(scenario.m)
        bound = gamma0["r"] + gamma0["t"]
        return _finish(channels, scenario, lifted, config, bound, [], 0, 0,
                       True, "ok")

    if kind is not Protocol.RIS:
        raise ValueError(f"baseline must be RIS or NONE, got {kind}")
    run = _dinkelbach_side(lifted, scenario, "r", settings)
    if run.status == "infeasible" or run.qm is None:
        return _infeasible_result(channels, scenario,
                                  _merge_side_traces(run.trace, []),
                                  run.solves)
    q_r, ok = extract_rank_one(run.qm, 1.0, Protocol.RIS, lifted, "r",
                               scenario.e_r, run.gamma, scenario.sigma2,
                               settings, rng)
    config = TarcConfig.ris(_phases_from(q_r))
    bound = run.gamma + gamma0["t"]
    trace = [DinkelbachState(g, gamma0["t"], j, f)
             for j, (g, f) in enumerate(run.trace)]
    return _finish(channels, scenario, lifted, config, bound, trace,
                   run.solves, 0, ok, "ok" if run.status == "ok" else run.status,
                   side_traces={"r": run.trace, "t": []})


def optimize(channels: ChannelSet, scenario: Scenario,
             settings: OptimizerSettings | None = None,
             rng: np.random.Generator | None = None) -> OptResult:
    """Dispatch on the scenario's protocol."""
    proto = scenario.protocol
    if proto is Protocol.ES:
        return solve_es(channels, scenario, settings, rng)
    if proto is Protocol.MS:
        return solve_ms(channels, scenario, settings, rng)
    if proto is Protocol.TS:
        return solve_ts(channels, scenario, settings, rng)
    return solve_baseline(channels, scenario, settings, rng, kind=proto)
