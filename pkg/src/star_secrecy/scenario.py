"""Experiment configuration, node geometry, and random channel generation.

The network has six nodes in a 2-D plane: a single-antenna transmitter
(Alice), a STAR-RIS surface, two legitimate receivers (Bob_r in the
reflection region, Bob_t in the transmission region) and two energy
harvesting eavesdroppers (Eve_r, Eve_t).  Every channel coefficient has a
deterministic magnitude given by a geometric path-loss law and an i.i.d.
random phase, uniform on [0, 2*pi).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
import yaml

TWO_PI = 2.0 * math.pi

#: Algorithm name of the generator expected by :func:`generate_channels`,
#: recorded in output metadata so runs remain reproducible across builds.
PRNG_NAME = "numpy.random.Generator(PCG64)"

NODE_NAMES = ("alice", "bob_r", "bob_t", "eve_r", "eve_t", "surface")

DEFAULT_POSITIONS: dict[str, tuple[float, float]] = {
    "alice": (0.0, 0.0),
    "bob_r": (12.0, 2.0),
    "bob_t": (12.0, -2.0),
    "eve_r": (10.0, 2.0),
    "eve_t": (10.0, -2.0),
    "surface": (8.0, 0.0),
}

#: Keys accepted in a scenario config file.
CONFIG_KEYS = ("positions", "m", "p_s", "sigma2", "e_r", "e_t",
               "alpha", "alpha_e", "protocol", "trials", "seed")


class ScenarioError(ValueError):
    """Invalid scenario configuration (bad values or degenerate geometry)."""


class Protocol(str, Enum):
    """Surface operating protocol, plus the two comparison baselines."""

    ES = "es"      # energy splitting: every element transmits and reflects
    MS = "ms"      # mode selection: each element fully transmits or reflects
    TS = "ts"      # time switching: all elements alternate over time shares
    RIS = "ris"    # reflect-only conventional surface baseline
    NONE = "none"  # no surface at all (direct links only)

    @classmethod
    def parse(cls, value: "Protocol | str") -> "Protocol":
        if isinstance(value, Protocol):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ScenarioError(f"unknown protocol {value!r}; expected one of "
                                f"{[p.value for p in cls]}") from None


@dataclass
class Scenario:
    """Full description of one experiment: geometry, powers and controls.

    All physical quantities are dimensionless consistent linear units
    (powers in watts-like units, distances in meters-like units).
    """

    positions: dict[str, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_POSITIONS))
    m: int = 20                 # number of surface elements
    p_s: float = 20.0           # transmit power (linear)
    sigma2: float = 1.0         # noise power (linear)
    e_r: float = 0.1            # minimum harvested energy at Eve_r
    e_t: float = 0.1            # minimum harvested energy at Eve_t
    alpha: float = 2.2          # path-loss exponent, legitimate links
    alpha_e: float = 2.0        # path-loss exponent, wiretap links
    protocol: Protocol = Protocol.ES
    trials: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        self.protocol = Protocol.parse(self.protocol)
        self.m = int(self.m)
        self.trials = int(self.trials)
        self.seed = int(self.seed)
        for name in NODE_NAMES:
            if name not in self.positions:
                raise ScenarioError(f"missing position for node {name!r}")
            x, y = self.positions[name]
            self.positions[name] = (float(x), float(y))
        if self.m < 1:
            raise ScenarioError("m must be >= 1")
        if self.p_s <= 0 or self.sigma2 <= 0:
            raise ScenarioError("p_s and sigma2 must be positive")
        if self.e_r < 0 or self.e_t < 0:
            raise ScenarioError("energy requirements must be nonnegative")
        if self.alpha <= 0 or self.alpha_e <= 0:
            raise ScenarioError("path-loss exponents must be positive")
        if self.trials < 1:
            raise ScenarioError("trials must be >= 1")

    def with_overrides(self, **kwargs) -> "Scenario":
        """Copy of this scenario with the given fields replaced."""
        kwargs.setdefault("positions", dict(self.positions))
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {
            "positions": {k: list(v) for k, v in self.positions.items()},
            "m": self.m, "p_s": self.p_s, "sigma2": self.sigma2,
            "e_r": self.e_r, "e_t": self.e_t,
            "alpha": self.alpha, "alpha_e": self.alpha_e,
            "protocol": self.protocol.value,
            "trials": self.trials, "seed": self.seed,
        }


@dataclass
class ChannelSet:
    """One realization of all channel coefficients for a scenario.

    Vectors have length ``m`` (one entry per surface element); ``f_*`` and
    ``g_*`` are the scalar direct links from Alice to the Bobs and Eves.
    """

    H: np.ndarray       # Alice -> surface
    h_r: np.ndarray     # surface -> Bob_r
    h_t: np.ndarray     # surface -> Bob_t
    v_r: np.ndarray     # surface -> Eve_r
    v_t: np.ndarray     # surface -> Eve_t
    f_r: complex        # Alice -> Bob_r
    f_t: complex        # Alice -> Bob_t
    g_r: complex        # Alice -> Eve_r
    g_t: complex        # Alice -> Eve_t

    @property
    def m(self) -> int:
        return self.H.shape[0]

    def bob(self, side: str) -> tuple[np.ndarray, complex]:
        """(surface vector, direct scalar) for Bob on side 'r' or 't'."""
        return (self.h_r, self.f_r) if side == "r" else (self.h_t, self.f_t)

    def eve(self, side: str) -> tuple[np.ndarray, complex]:
        """(surface vector, direct scalar) for Eve on side 'r' or 't'."""
        return (self.v_r, self.g_r) if side == "r" else (self.v_t, self.g_t)


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Euclidean distance between two 2-D points."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def pathloss_magnitude(dist: float, exponent: float) -> float:
    """Deterministic coefficient magnitude ``dist**(-exponent/2)``."""
    return dist ** (-exponent / 2.0)


def generate_channels(scenario: Scenario, rng: np.random.Generator) -> ChannelSet:
    """Draw one channel realization.

    Magnitudes follow the geometric path-loss law (exponent ``alpha`` for
    the legitimate links H, h_k, f_k and ``alpha_e`` for the wiretap links
    v_k, g_k); phases are i.i.d. uniform on [0, 2*pi), drawn per element.
    Deterministic for a fixed generator state: coefficients are consumed in
    the order H, h_r, h_t, v_r, v_t, f_r, f_t, g_r, g_t.

    Raises ScenarioError if any pair of linked nodes coincides.
    """
    pos = scenario.positions
    m = scenario.m

    def dist_or_raise(a: str, b: str) -> float:
        d = distance(pos[a], pos[b])
        if d <= 0.0:
            raise ScenarioError(f"nodes {a!r} and {b!r} coincide; "
                                "path loss is undefined")
        return d

    d_as = dist_or_raise("alice", "surface")
    d_sb = {k: dist_or_raise("surface", f"bob_{k}") for k in ("r", "t")}
    d_se = {k: dist_or_raise("surface", f"eve_{k}") for k in ("r", "t")}
    d_ab = {k: dist_or_raise("alice", f"bob_{k}") for k in ("r", "t")}
    d_ae = {k: dist_or_raise("alice", f"eve_{k}") for k in ("r", "t")}

    def vec(dist: float, exponent: float) -> np.ndarray:
        mag = pathloss_magnitude(dist, exponent)
        return mag * np.exp(1j * rng.uniform(0.0, TWO_PI, size=m))

    def scal(dist: float, exponent: float) -> complex:
        mag = pathloss_magnitude(dist, exponent)
        return complex(mag * np.exp(1j * rng.uniform(0.0, TWO_PI)))

    a, ae = scenario.alpha, scenario.alpha_e
    return ChannelSet(
        H=vec(d_as, a),
        h_r=vec(d_sb["r"], a), h_t=vec(d_sb["t"], a),
        v_r=vec(d_se["r"], ae), v_t=vec(d_se["t"], ae),
        f_r=scal(d_ab["r"], a), f_t=scal(d_ab["t"], a),
        g_r=scal(d_ae["r"], ae), g_t=scal(d_ae["t"], ae),
    )


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent, reproducible generator for one Monte-Carlo trial.

    Derives a child of ``SeedSequence(seed)`` keyed by the trial index, so
    a trial's stream depends only on (seed, trial) and never on execution
    order of other trials.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return np.random.Generator(np.random.PCG64(ss))


def load_scenario(path: str | Path, overrides: dict | None = None) -> Scenario:
    """Load a scenario from a JSON or YAML config file.

    Recognized keys: positions, m, p_s, sigma2, e_r, e_t, alpha, alpha_e,
    protocol, trials, seed.  Missing keys take the defaults above; unknown
    keys are rejected.  ``positions`` maps node names (alice, bob_r, bob_t,
    eve_r, eve_t, surface) to [x, y] pairs.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        raw = yaml.safe_load(text)
    else:
        raw = json.loads(text)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ScenarioError(f"config root must be a mapping, got {type(raw).__name__}")
    unknown = set(raw) - set(CONFIG_KEYS)
    if unknown:
        raise ScenarioError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(raw)
    if "positions" in kwargs:
        base = dict(DEFAULT_POSITIONS)
        for name, xy in kwargs["positions"].items():
            if name not in NODE_NAMES:
                raise ScenarioError(f"unknown node name {name!r} in positions")
            base[name] = (float(xy[0]), float(xy[1]))
        kwargs["positions"] = base
    if overrides:
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return Scenario(**kwargs)
