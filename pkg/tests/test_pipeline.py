from fractions import Fraction as Fr

import numpy as np

from episig.datagen import gen_correlated, sample_model
from episig.episodes import Episode
from episig.pipeline import PipelineConfig, emit_plot_data, run_pipeline
from episig.probmodel import SymbolModel, compute_distributions
from episig.sigtest import SKIPPED_ZERO_VAR, EpisodeTestResult

TOY = SymbolModel((Fr(1, 2), Fr(1, 4), Fr(1, 4)))


def test_reports_are_deterministic(tmp_path):
    seq = gen_correlated(20_000, seed=4)
    cfg = PipelineConfig(min_windows=300, max_window=10, max_nodes=2, sim_length=20_000, seed=1)
    run_pipeline(seq, cfg, tmp_path / "a")
    run_pipeline(seq, cfg, tmp_path / "b")
    for name in ("results.tsv", "distributions.tsv", "machines.tsv", "plot.tsv", "model.tsv", "candidates.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_every_candidate_reported_once(tmp_path):
    seq = gen_correlated(20_000, seed=5)
    rep = run_pipeline(seq, PipelineConfig(min_windows=300, max_window=10, max_nodes=2, sim_length=20_000), tmp_path)
    ids = [r.ident for r in rep.results]
    assert sorted(ids) == sorted(i for i, _ in rep.candidates) and len(set(ids)) == len(ids)
    rows = (tmp_path / "results.tsv").read_text().splitlines()
    assert len(rows) == len(ids) + 1
    assert rows[0].split("\t")[-1] == "status"
    for r in rep.results:
        if len(r.episode) == 1:
            assert r.status == SKIPPED_ZERO_VAR
    assert "# count" in (tmp_path / "candidates.txt").read_text()


def test_episodes_only_mode():
    seq = sample_model(TOY, 20_000, seed=2)
    eps = [("ab", Episode.serial([0, 1])), ("ba", Episode.serial([1, 0]))]
    rep = run_pipeline(seq, PipelineConfig(min_windows=10, max_window=12, sim_length=20_000), episodes=eps)
    assert [r.ident for r in rep.results] == ["ab", "ba"]
    assert rep.counts == {}


def test_plot_data_ab():
    G = Episode.serial([0, 1])
    dist = compute_distributions([G], TOY, 12).distributions[G.key]
    hist = np.zeros(13, dtype=np.int64)
    hist[2], hist[3] = 5, 2
    r = EpisodeTestResult("ab", G, "tested", 7, 16, histogram=hist)
    rows = [line.split("\t") for line in emit_plot_data([r], {G.key: dist}, 12).splitlines()[1:]]
    assert sum(int(row[2]) for row in rows) == 7
    mass = 1 - Fr(1, 4) ** 11
    for row in rows[1:]:
        k = int(row[1])
        want = Fr(3, 4) * Fr(1, 4) ** (k - 2) / mass
        assert abs(float(row[4]) - float(want)) <= 1e-5 * float(want)  # six significant digits


def test_plot_data_empty():
    assert emit_plot_data([], {}, 5) == "id\tk\tobserved\tobserved_frac\tmodel\n"
