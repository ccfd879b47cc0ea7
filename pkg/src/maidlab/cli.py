"""Command-line entry point.

Models are read from JSON files or named with ``builtin:<name>`` (see
:data:`BUILTINS`). Every subcommand writes its files into ``--out`` and echoes
a short summary on stdout. Failures print one line
``error code=<Code> status=<n> message=<text>`` on stderr and exit with the
error's status.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections import defaultdict
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from . import catalog
from .equilibrium import DETERMINISTIC, RuleGrid, enumerate_nash
from .errors import InvalidConfig, MaidlabError, ParseError
from .graph import classify_solvability, component_graph, relevance_graph, to_dot
from .intervention import OutcomeSpec, optimize_pre_strategy
from .maid import Maid, build_maid, dumps_canonical, dumps_maid
from .markov import MarkovGame, Paradigm, apply_paradigm, paradigm_markov_maid, two_state_game, unroll
from .marl import METRIC_COLUMNS, Metrics, TrainConfig, confidence_interval, train

BUILTINS: dict[str, Callable[[], Maid]] = {
    "logistics": lambda: catalog.logistics_maid(with_guidance=True),
    "tree-killer": catalog.tree_killer_maid,
    **{f"{p.replace('_', '-')}{'-seq' if seq else ''}": (lambda p=p, seq=seq: catalog.paradigm_maid(p, seq))
       for p in catalog.PARADIGMS for seq in (False, True)},
    **{f"markov-{p.replace('_', '-')}{'-seq' if seq else ''}":
       (lambda p=p, seq=seq: paradigm_markov_maid(p, sequential=seq))
       for p in catalog.PARADIGMS for seq in (False, True)},
}

DEFAULT_SEEDS = 5


# -- input helpers -----------------------------------------------------------------

def load_model(source: str) -> Maid:
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name not in BUILTINS:
            raise ParseError(f"unknown builtin model {name!r}; choose from {sorted(BUILTINS)}")
        return BUILTINS[name]()
    return build_maid(read_json(source))


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def parse_override(text: str) -> tuple[list[str], Any]:
    """``a.b=value``; the value is parsed as JSON and kept as a string otherwise."""
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise InvalidConfig(f"override {text!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def apply_overrides(config: Mapping[str, Any], overrides: Sequence[str]) -> dict[str, Any]:
    out = json.loads(json.dumps(config))
    for text in overrides:
        path, value = parse_override(text)
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise InvalidConfig(f"override {text!r} descends into a non-mapping")
        node[path[-1]] = value
    return out


def load_config(args: argparse.Namespace) -> dict[str, Any]:
    config = read_json(args.config) if args.config else {}
    if not isinstance(config, dict):
        raise InvalidConfig("the config file must hold a JSON object")
    return apply_overrides(config, args.override)


def derive_seeds(root: int, n: int) -> list[int]:
    """``n`` distinct run seeds split deterministically from one root seed."""
    return [int(s) for s in np.random.SeedSequence(root).generate_state(n, dtype=np.uint32)]


def grid_from(config: Mapping[str, Any]) -> RuleGrid:
    eps = config.get("epsilon")
    return DETERMINISTIC if eps is None else RuleGrid(epsilon=float(eps))


def write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


# -- subcommands ----------------------------------------------------------------------

def cmd_analyze(args: argparse.Namespace) -> str:
    maid = load_model(args.model)
    report = classify_solvability(maid)
    text = report.to_text()
    write(args.out, "solvability.txt", text)
    write(args.out, "relevance.dot", to_dot(report.relevance))
    return text


def cmd_solve(args: argparse.Namespace) -> str:
    config = load_config(args)
    maid = load_model(args.model)
    nash = enumerate_nash(maid, grid_from(config))
    write(args.out, "nash.json", dumps_canonical(nash.to_dict(maid)))
    lines = [f"equilibria={len(nash)}"]
    for i, pay in enumerate(nash.payoffs):
        lines.append(f"ne[{i}] " + " ".join(f"{a}={pay[a]!r}" for a in maid.agents)
                     + f" total={math.fsum(pay.values())!r}")
    return "\n".join(lines) + "\n"


def cmd_intervene(args: argparse.Namespace) -> str:
    config = load_config(args)
    maid = load_model(args.model)
    target = args.target or config.get("target")
    guidance = args.guidance or config.get("guidance")
    if not target or not guidance:
        raise InvalidConfig("intervene needs --target and --guidance")
    u_star = args.u_star if args.u_star is not None else config.get("u_star")
    outcome = OutcomeSpec(u_star=None if u_star is None else float(u_star),
                          task=tuple(config.get("task", ())), secondary=tuple(config.get("secondary", ())))
    pre_eps = config.get("pre_epsilon")
    pre_grid = DETERMINISTIC if pre_eps is None else RuleGrid(epsilon=float(pre_eps))
    _, report = optimize_pre_strategy(maid, target, guidance, outcome, pre_grid, grid_from(config))
    write(args.out, "effect.json", dumps_canonical(report.to_dict()))
    return report.summary_line() + "\n"


def cmd_unroll(args: argparse.Namespace) -> str:
    config = load_config(args)
    if args.game:
        game = MarkovGame.from_dict(read_json(args.game))
    else:
        game = two_state_game(int(config.get("horizon", 1)))
    if "horizon" in config and args.game:
        game = MarkovGame(game.agents, game.states, game.actions, game.transition, game.reward,
                          int(config["horizon"]), game.initial)
    sequential = bool(config.get("sequential", False))
    paradigm = config.get("paradigm")
    if paradigm and not args.game:
        maid = paradigm_markov_maid(paradigm, sequential=sequential, horizon=game.horizon)
    else:
        maid = unroll(game, sequential=sequential)
        if paradigm:
            maid = apply_paradigm(maid, Paradigm(paradigm, targeted=config.get("targeted", game.agents[0])))
    write(args.out, "unrolled.json", dumps_maid(maid))
    return f"nodes={len(maid)} decisions={len(maid.decisions)}\n"


def cmd_export_dot(args: argparse.Namespace) -> str:
    maid = load_model(args.model)
    if args.graph == "maid":
        dot = to_dot(maid)
    elif args.graph == "relevance":
        dot = to_dot(relevance_graph(maid))
    else:
        dot = to_dot(component_graph(relevance_graph(maid)))
    write(args.out, f"{args.graph}.dot", dot)
    return dot


def _train_configs(config: Mapping[str, Any], seed: int | None) -> list[TrainConfig]:
    config = dict(config)
    variants = config.pop("variants", None)
    if seed is not None:
        n = len(config["seeds"]) if isinstance(config.get("seeds"), list) else DEFAULT_SEEDS
        config["seeds"] = derive_seeds(seed, n)
    if variants is None:
        return [TrainConfig.from_dict(config)]
    if not isinstance(variants, list) or not variants:
        raise InvalidConfig("variants must be a nonempty list")
    return [TrainConfig.from_dict({**config, "variant": v}) for v in variants]


def summarize(rows: Sequence[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Long-format table: one row per (variant, algorithm, step, metric) with mean and 95% CI over seeds."""
    groups: dict[tuple, list[float]] = defaultdict(list)
    for r in rows:
        for metric in ("extrinsic_return", "intrinsic_return", "compliance_rate"):
            groups[(r["variant"], r["algorithm"], int(r["step"]), metric)].append(float(r[metric]))
    out = []
    for (variant, algorithm, step, metric), values in sorted(groups.items()):
        mean, lo, hi = confidence_interval(values)
        out.append({"variant": variant, "algorithm": algorithm, "step": step, "metric": metric,
                    "n": len(values), "mean": mean, "ci_low": lo, "ci_high": hi})
    return out


SUMMARY_COLUMNS = ("variant", "algorithm", "step", "metric", "n", "mean", "ci_low", "ci_high")


def summary_csv(table: Sequence[Mapping[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in table:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def final_lines(table: Sequence[Mapping[str, Any]]) -> str:
    last: dict[tuple, Mapping[str, Any]] = {}
    for r in table:
        key = (r["variant"], r["algorithm"], r["metric"])
        if key not in last or r["step"] > last[key]["step"]:
            last[key] = r
    return "".join(
        f"{v} {a} {m} step={r['step']} mean={r['mean']!r} ci=[{r['ci_low']!r}, {r['ci_high']!r}] n={r['n']}\n"
        for (v, a, m), r in last.items())


def _metric_rows(metrics: Metrics) -> list[dict[str, Any]]:
    return [dict(zip(METRIC_COLUMNS, (r.seed, r.step, r.variant, r.algorithm, r.extrinsic_return,
                                      r.intrinsic_return, r.compliance_rate))) for r in metrics.rows]


def cmd_train(args: argparse.Namespace) -> str:
    configs = _train_configs(load_config(args), args.seed)
    parts = [train(c, jobs=args.jobs) for c in configs]
    text = parts[0].to_csv() + "".join(p.to_csv().split("\n", 1)[1] for p in parts[1:])
    write(args.out, "metrics.csv", text)
    table = summarize([r for p in parts for r in _metric_rows(p)])
    summary = final_lines(table)
    write(args.out, "summary.txt", summary)
    return summary


def read_metrics_csv(path: str | Path) -> list[dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    if rows and set(METRIC_COLUMNS) - set(rows[0]):
        raise ParseError(f"{path} lacks the metrics columns {list(METRIC_COLUMNS)}")
    return rows


def cmd_report(args: argparse.Namespace) -> str:
    rows = [r for path in args.csv for r in read_metrics_csv(path)]
    table = summarize(rows)
    write(args.out, "report.csv", summary_csv(table))
    return final_lines(table)


# -- entry point ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maidlab", description="Influence-diagram analysis, equilibrium selection and tabular MARL experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--override", action="append", default=[], metavar="K=V",
                        help="config override, applied after the file (repeatable)")
    common.add_argument("--seed", type=int, help="root seed split into per-run seeds")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for train")
    common.add_argument("--out", type=Path, default=Path("maidlab-out"), help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="relevance graph and solvability")
    p.add_argument("model")
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("solve", parents=[common], help="enumerate Nash equilibria")
    p.add_argument("model")
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("intervene", parents=[common], help="search the best pre-strategy")
    p.add_argument("model")
    p.add_argument("--target")
    p.add_argument("--guidance")
    p.add_argument("--u-star", type=float, dest="u_star")
    p.set_defaults(func=cmd_intervene)
    p = sub.add_parser("unroll", parents=[common], help="unroll a Markov game into a diagram")
    p.add_argument("game", nargs="?", help="Markov game JSON (default: built-in two-state game)")
    p.set_defaults(func=cmd_unroll)
    p = sub.add_parser("train", parents=[common], help="tabular MARL training")
    p.set_defaults(func=cmd_train)
    p = sub.add_parser("export-dot", parents=[common], help="Graphviz export")
    p.add_argument("model")
    p.add_argument("--graph", choices=("maid", "relevance", "components"), default="maid")
    p.set_defaults(func=cmd_export_dot)
    p = sub.add_parser("report", parents=[common], help="aggregate metrics CSVs")
    p.add_argument("csv", nargs="+")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise InvalidConfig("--jobs must be positive")
        sys.stdout.write(args.func(args))
    except MaidlabError as exc:
        message = " ".join(str(exc).split())
        print(f"error code={exc.code} status={exc.exit_status} message={message}", file=sys.stderr)
        return exc.exit_status
    return 0


if __name__ == "__main__":
    sys.exit(main())
