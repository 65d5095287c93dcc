"""Mine episodes from event sequences and test them for significance.

The null model draws symbols independently; for each candidate episode the
exact distribution of minimal-window lengths is computed with finite-state
machines and exact rationals, and the observed average window length is
compared against it with a delta-method z-test.
"""
from .episodes import (
    Alphabet,
    Episode,
    EpisodeFamily,
    EpisodeFormatError,
    SymbolSequence,
    WindowSpan,
    brute_minimal_windows,
    canonical_key,
    closure,
    covers,
    read_episodes,
    remove_sink,
    sinks,
)
from .automata import build_co_machine, build_episode_machine, build_machines, simplify
from .probmodel import (
    ModelError,
    SymbolModel,
    WindowDistribution,
    compute_distributions,
    estimate_model,
    minwin_joint,
    minwin_joint_direct,
    moments,
)
from .winscan import greedy_nonoverlap, scan, stats, summarize
from .miner import MinerConfig, mine
from .sigtest import bh_adjust, evaluate_episodes, p_values, std_normal_cdf, z_statistic
from .datagen import gen_correlated, gen_uniform, sample_model
from .pipeline import PipelineConfig, run_pipeline

__version__ = "0.1.0"
