"""Command line entry point: ``episig <gen|mine|model|scan|test|run> ...``.

Exit status: 0 success, 1 usage error, 2 malformed input, 3 model or
numerical error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .automata import MachineError
from .datagen import gen_correlated, gen_uniform, read_sequence, sample_model, write_sequence
from .episodes import Alphabet, EpisodeFormatError, format_episode
from .miner import CLASSES, MinerConfig, mine
from .pipeline import (
    PipelineConfig,
    PipelineReport,
    assess_candidates,
    load_episode_file,
    name_episodes,
    run_pipeline,
    write_reports,
)
from .probmodel import (
    InconsistentDistribution,
    ModelError,
    compute_distributions,
    estimate_model,
    format_distribution,
    format_model,
    read_model,
)
from .winscan import scan

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_MODEL = 0, 1, 2, 3

log = logging.getLogger("episig")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _classes(text: str) -> tuple[str, ...]:
    parts = tuple(p for p in text.split(",") if p)
    bad = [p for p in parts if p not in CLASSES]
    if bad or not parts:
        raise argparse.ArgumentTypeError(f"classes must be a comma list drawn from {','.join(CLASSES)}")
    return parts


def _unit(text: str) -> float:
    x = float(text)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return x


def _positive(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return x


def _stopwords(path: str | None) -> set[str] | None:
    if path is None:
        return None
    return set(Path(path).read_text(encoding="utf-8").split())


def _load_sequence(args):
    return read_sequence(args.sequence, _stopwords(getattr(args, "stopwords", None)))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _add_mining(p, required=True):
    p.add_argument("--min-windows", type=_positive, required=required, metavar="N",
                   help="keep episodes with more than N non-overlapping windows")
    p.add_argument("--max-window", type=_positive, required=True, metavar="K",
                   help="longest minimal window considered")
    p.add_argument("--classes", type=_classes, default=CLASSES, help="serial,parallel (default both)")
    p.add_argument("--max-nodes", type=_positive, default=4)


def _add_testing(p):
    p.add_argument("--sim-length", type=_positive, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=_unit, default=0.05)
    p.add_argument("--adjust", choices=("bh", "none"), default="bh")
    p.add_argument("--z-form", choices=("ratio", "literal"), default="ratio")
    p.add_argument("--method", choices=("machine", "direct"), default="machine",
                   help="probability pipeline used for p_G(k)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="episig", description="Mine episodes and test their minimal-window lengths.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic sequence")
    p.add_argument("kind", choices=("uniform", "correlated", "model"))
    p.add_argument("--length", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alphabet-size", type=_positive, default=10)
    p.add_argument("--model", help="model TSV (kind=model)")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("mine", help="mine candidate episodes")
    p.add_argument("sequence")
    _add_mining(p)
    p.add_argument("--stopwords")
    p.add_argument("--out", help="candidate file (default stdout)")

    p = sub.add_parser("model", help="fit a model and optionally compute window distributions")
    p.add_argument("sequence", nargs="?")
    p.add_argument("--model", help="read this model instead of fitting one")
    p.add_argument("--split", type=_unit, help="fit on the first part only")
    p.add_argument("--episodes", help="episode file; prints p_G(k) for each")
    p.add_argument("--max-window", type=_positive, metavar="K")
    p.add_argument("--method", choices=("machine", "direct"), default="machine")
    p.add_argument("--stopwords")
    p.add_argument("--out", help="output directory (default stdout)")

    p = sub.add_parser("scan", help="list minimal windows")
    p.add_argument("sequence")
    p.add_argument("--episodes", required=True)
    p.add_argument("--max-window", type=_positive, required=True, metavar="K")
    p.add_argument("--stopwords")
    p.add_argument("--out", help="window TSV (default stdout)")

    p = sub.add_parser("test", help="test given episodes against a model")
    p.add_argument("sequence", help="test sequence")
    p.add_argument("--episodes", required=True)
    p.add_argument("--model", required=True)
    _add_mining(p, required=False)
    _add_testing(p)
    p.add_argument("--stopwords")
    p.add_argument("--out", required=True, help="report directory")

    p = sub.add_parser("run", help="split, mine, fit, test and report")
    p.add_argument("sequence")
    p.add_argument("--split", type=_unit, default=0.5)
    _add_mining(p)
    _add_testing(p)
    p.add_argument("--episodes", help="test these episodes instead of mining")
    p.add_argument("--stopwords")
    p.add_argument("--out", required=True, help="report directory")
    return parser


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    if args.kind == "uniform":
        seq = gen_uniform(args.alphabet_size, args.length, args.seed)
    elif args.kind == "correlated":
        seq = gen_correlated(args.length, args.seed)
    else:
        if args.model is None:
            raise UsageError("gen model: --model is required")
        alphabet = Alphabet()
        with open(args.model, encoding="utf-8") as fh:
            model = read_model(fh, alphabet)
        seq = sample_model(model, args.length, args.seed, alphabet)
    if args.out is None:
        sys.stdout.write(" ".join(seq.tokens()) + "\n")
    else:
        write_sequence(seq, args.out)
    return EXIT_OK


def cmd_mine(args) -> int:
    seq = _load_sequence(args)
    cfg = MinerConfig(args.min_windows, args.max_window, args.classes, args.max_nodes)
    res = mine(seq, cfg)
    text = "".join(
        format_episode(ident, G, seq.alphabet, [f"count {res.counts[G.key]}"])
        for ident, G in name_episodes(res.frequent)
    )
    _emit(text, args.out)
    return EXIT_OK


def cmd_model(args) -> int:
    alphabet = Alphabet()
    if args.sequence is not None:
        seq = _load_sequence(args)
        alphabet = seq.alphabet
    if args.model is not None:
        with open(args.model, encoding="utf-8") as fh:
            model = read_model(fh, alphabet)
    elif args.sequence is not None:
        train = seq.split(args.split)[0] if args.split else seq
        model = estimate_model(train, len(alphabet))
    else:
        raise UsageError("model: give a sequence or --model")
    outputs = {"model.tsv": format_model(model, alphabet)}
    if args.episodes:
        if args.max_window is None:
            raise UsageError("model: --episodes needs --max-window")
        episodes = load_episode_file(args.episodes, alphabet)
        comp = compute_distributions([G for _, G in episodes], model, args.max_window, method=args.method)
        rows = ["episode_id\tk\trational\tdecimal\n"]
        for ident, G in episodes:
            if G.key in comp.distributions:
                rows.append(format_distribution(ident, comp.distributions[G.key]))
            else:
                log.warning("episode %s is unreachable under the model", ident)
        outputs["distributions.tsv"] = "".join(rows)
    if args.out is None:
        sys.stdout.write("".join(outputs.values()))
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in outputs.items():
            (out / name).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_scan(args) -> int:
    seq = _load_sequence(args)
    episodes = load_episode_file(args.episodes, seq.alphabet)
    found = scan(seq, [G for _, G in episodes], args.max_window)
    rows = ["episode_id\tstart\tend\n"]
    for ident, G in episodes:
        rows.extend(f"{ident}\t{w.start}\t{w.end}\n" for w in found[G.key])
    _emit("".join(rows), args.out)
    return EXIT_OK


def _pipeline_config(args, split=0.5) -> PipelineConfig:
    return PipelineConfig(
        min_windows=args.min_windows or 0,
        max_window=args.max_window,
        split=split,
        classes=args.classes,
        max_nodes=args.max_nodes,
        sim_length=args.sim_length,
        seed=args.seed,
        alpha=args.alpha,
        adjust=args.adjust,
        z_form=args.z_form,
        method=args.method,
    )


def cmd_test(args) -> int:
    seq = _load_sequence(args)
    with open(args.model, encoding="utf-8") as fh:
        model = read_model(fh, seq.alphabet)
    episodes = load_episode_file(args.episodes, seq.alphabet)
    cfg = _pipeline_config(args)
    run = assess_candidates(episodes, model, seq, cfg)
    report = PipelineReport(cfg, seq.alphabet, model, 0, len(seq), episodes, {}, run)
    write_reports(report, args.out)
    _summary(report)
    return EXIT_OK


def cmd_run(args) -> int:
    seq = _load_sequence(args)
    episodes = load_episode_file(args.episodes, seq.alphabet) if args.episodes else None
    cfg = _pipeline_config(args, args.split)
    report = run_pipeline(seq, cfg, args.out, episodes)
    _summary(report)
    return EXIT_OK


def _summary(report: PipelineReport) -> None:
    tested = sum(r.status == "tested" for r in report.results)
    print(
        f"{len(report.results)} episodes, {tested} tested, "
        f"{len(report.significant('one'))} one-sided and {len(report.significant('two'))} two-sided "
        f"significant at alpha={report.config.alpha}; reports in {report.files['results.tsv'].parent}"
    )


COMMANDS = {
    "gen": cmd_gen,
    "mine": cmd_mine,
    "model": cmd_model,
    "scan": cmd_scan,
    "test": cmd_test,
    "run": cmd_run,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, EpisodeFormatError, UnicodeDecodeError) as exc:
        print(f"episig: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ModelError, InconsistentDistribution, MachineError, ValueError) as exc:
        print(f"episig: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
