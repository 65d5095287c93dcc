"""Train/test pipeline: split, fit the model, mine, test, and write reports."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .episodes import Alphabet, Episode, SymbolSequence, format_episode, read_episodes
from .miner import CLASSES, MinerConfig, mine
from .probmodel import SymbolModel, WindowDistribution, estimate_model, format_distribution, format_model
from .sigtest import TESTED, EpisodeTestResult, SignificanceRun, evaluate_episodes

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "id", "episode", "n_windows", "sum_len", "avg_len", "m", "sigma",
    "z", "p_one", "p_two", "q_one", "q_two", "status",
)


@dataclass(frozen=True)
class PipelineConfig:
    min_windows: int
    max_window: int
    split: float = 0.5
    classes: tuple[str, ...] = CLASSES
    max_nodes: int = 4
    sim_length: int = 1_000_000
    seed: int = 0
    alpha: float = 0.05
    adjust: str = "bh"
    z_form: str = "ratio"
    method: str = "machine"

    def __post_init__(self):
        if not 0 < self.split < 1:
            raise ValueError("split must lie in (0, 1)")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.adjust not in ("bh", "none"):
            raise ValueError(f"unknown adjustment {self.adjust!r}")

    def miner_config(self) -> MinerConfig:
        return MinerConfig(self.min_windows, self.max_window, tuple(self.classes), self.max_nodes)


@dataclass
class PipelineReport:
    config: PipelineConfig
    alphabet: Alphabet
    model: SymbolModel
    train_length: int
    test_length: int
    candidates: list[tuple[str, Episode]]
    counts: dict[str, int]
    run: SignificanceRun
    files: dict[str, Path] = field(default_factory=dict)

    @property
    def results(self) -> list[EpisodeTestResult]:
        return self.run.results

    def significant(self, sided: str = "one") -> list[EpisodeTestResult]:
        """Tested episodes whose adjusted P-value is below alpha."""
        attr = "q_one" if sided == "one" else "q_two"
        return [r for r in self.results if r.status == TESTED and getattr(r, attr) < self.config.alpha]


def name_episodes(episodes: Sequence[Episode]) -> list[tuple[str, Episode]]:
    ordered = sorted(episodes, key=lambda G: (len(G), G.key))
    return [(f"e{i}", G) for i, G in enumerate(ordered, 1)]


def _fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, int):
        return str(x)
    if math.isnan(x):
        return "NA"
    return f"{x:.6g}"


def format_results(results: Sequence[EpisodeTestResult], alphabet: Alphabet) -> str:
    lines = ["\t".join(RESULT_COLUMNS)]
    for r in results:
        cells = [
            r.ident, r.episode.describe(alphabet), r.n_windows, r.sum_len, r.avg_len,
            r.m, r.sigma, r.z, r.p_one, r.p_two, r.q_one, r.q_two, r.status,
        ]
        lines.append("\t".join(c if isinstance(c, str) else _fmt(c) for c in cells))
    return "\n".join(lines) + "\n"


def emit_plot_data(results: Sequence[EpisodeTestResult], distributions: dict[str, WindowDistribution], K: int) -> str:
    """Observed length histogram next to the model ``p_G(k)``, one row per (episode, k)."""
    lines = ["id\tk\tobserved\tobserved_frac\tmodel"]
    for r in results:
        dist = distributions.get(r.episode.key)
        if dist is None or r.histogram is None:
            continue
        n = r.n_windows
        for k in range(1, K + 1):
            obs = int(r.histogram[k]) if k < len(r.histogram) else 0
            frac = obs / n if n else 0.0
            model = float(dist.normalized[k - 1]) if k <= dist.K else 0.0
            lines.append(f"{r.ident}\t{k}\t{obs}\t{frac:.6g}\t{model:.6g}")
    return "\n".join(lines) + "\n"


def format_machine_sizes(run: SignificanceRun) -> str:
    return (
        "episode_machine\tsimple_machine\tco_machine\n"
        f"{run.episode_states}\t{run.simple_states}\t{run.co_states}\n"
    )


def assess_candidates(
    candidates: Sequence[tuple[str, Episode]],
    model: SymbolModel,
    test_seq,
    cfg: PipelineConfig,
) -> SignificanceRun:
    return evaluate_episodes(
        candidates,
        model,
        test_seq,
        cfg.max_window,
        min_windows=cfg.min_windows,
        sim_length=cfg.sim_length,
        seed=cfg.seed,
        adjust=cfg.adjust,
        z_form=cfg.z_form,
        method=cfg.method,
    )


def run_pipeline(
    seq: SymbolSequence,
    cfg: PipelineConfig,
    out: str | Path | None = None,
    episodes: Sequence[tuple[str, Episode]] | None = None,
) -> PipelineReport:
    """Split ``seq``, fit the model and mine on the first part, test on the second.

    With ``episodes`` given, mining is skipped and those episodes are tested.
    Reports are written to ``out`` when it is not ``None``.
    """
    train, test = seq.split(cfg.split)
    if len(train) == 0 or len(test) == 0:
        raise ValueError("both parts of the split must be nonempty")
    model = estimate_model(train, len(seq.alphabet))
    counts: dict[str, int] = {}
    if episodes is None:
        mined = mine(train, cfg.miner_config())
        counts = mined.counts
        candidates = name_episodes(mined.frequent)
    else:
        candidates = list(episodes)
    log.info("testing %d candidates on %d symbols", len(candidates), len(test))
    run = assess_candidates(candidates, model, test, cfg)
    report = PipelineReport(cfg, seq.alphabet, model, len(train), len(test), candidates, counts, run)
    if out is not None:
        write_reports(report, out)
    return report


def write_reports(report: PipelineReport, out: str | Path) -> dict[str, Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    run = report.run
    alphabet = report.alphabet
    by_id = {r.ident: r for r in run.results}
    dist_rows = ["episode_id\tk\trational\tdecimal\n"]
    for ident, G in report.candidates:
        dist = run.distributions.get(G.key)
        if dist is not None and ident in by_id:
            dist_rows.append(format_distribution(ident, dist))
    cand_text = "".join(
        format_episode(ident, G, alphabet, [f"count {report.counts[G.key]}"] if G.key in report.counts else [])
        for ident, G in report.candidates
    )
    contents = {
        "results.tsv": format_results(run.results, alphabet),
        "distributions.tsv": "".join(dist_rows),
        "machines.tsv": format_machine_sizes(run),
        "plot.tsv": emit_plot_data(run.results, run.distributions, report.config.max_window),
        "model.tsv": format_model(report.model, alphabet),
        "candidates.txt": cand_text,
    }
    files = {}
    for name, text in contents.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        files[name] = path
    report.files = files
    return files


def load_episode_file(path, alphabet: Alphabet) -> list[tuple[str, Episode]]:
    with open(path, encoding="utf-8") as fh:
        return read_episodes(fh, alphabet)
