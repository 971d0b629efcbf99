"""STAR-RIS wiretap-channel simulator and secrecy-rate optimizer."""

__version__ = "0.1.0"

from .scenario import (Scenario, ChannelSet, Protocol, ScenarioError,
                       distance, generate_channels, load_scenario, trial_rng,
                       PRNG_NAME)
from .model import (TarcConfig, PerformanceMetrics, tarc_matrix,
                    effective_gain, snr, harvested_energy, secrecy_rate,
                    nats_to_bits)
from .sdp import (HermitianSdp, RealSdp, SdpSettings, SdpSolution, SdpStatus,
                  embed_complex)
from .sdp import solve as solve_sdp
from .optimizer import (OptimizerSettings, OptResult, LiftedData,
                        DinkelbachState, build_lifted, lifted_vector,
                        dinkelbach_update, initial_gamma, energy_ceiling,
                        extract_rank_one, solve_es, solve_ms, solve_ts,
                        solve_baseline, optimize)
from .oracle import OracleResult, brute_force_oracle
from .runner import (ResultRow, SweepSpec, AggRow, run_single, run_trials,
                     run_sweep, aggregate_rows, CSV_HEADER)
