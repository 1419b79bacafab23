"""Command-line entry point: ``merkleprob <subcommand> ...``.

Exit status is 0 on success, 1 on validation or domain errors and 2 on
usage errors. Error messages go to stderr prefixed with ``error:``.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, report, theory
from .attack import attack_stats
from .digest import HashAlgorithm, HashConfig
from .errors import MerkleProbError
from .merkle import build_tree, dumps_proof, generate_proof, loads_proof, verify_proof
from .montecarlo import Engine, ExperimentConfig, run_experiment


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def int_set(text: str) -> list[int]:
    """Parse ``4``, ``4,8,12`` or an inclusive range ``1..16`` / ``128..256:8``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, _, rest = part.partition("..")
                hi, _, step = rest.partition(":")
                step_n = int(step) if step else 1
                if step_n < 1:
                    raise ValueError
                out.extend(range(int(lo), int(hi) + 1, step_n))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected int, list or range, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def seed_value(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is None:
        seed = secrets.randbits(64)
        print(f"seed: {seed}", file=sys.stderr)
    return seed


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="merkleprob", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("theory", help="root-collision probabilities for (m, k)")
    t.add_argument("--m", type=int_set, required=True)
    t.add_argument("--k", type=int_set, required=True)
    t.add_argument("--mode", choices=[m.value for m in theory.Mode], default="standard")
    t.add_argument("--approx", action="store_true", help="use the exponential approximation")
    t.add_argument("--format", choices=["table", "csv", "json"], default="table")

    e = sub.add_parser("experiment", help="Monte Carlo root-collision experiment")
    e.add_argument("--m", type=int_set, default=[4, 8, 12, 16])
    e.add_argument("--k", type=int_set, default=list(range(1, 17)))
    e.add_argument("--trials", type=int, default=1000)
    e.add_argument("--repeats", type=int, default=100)
    e.add_argument("--data-length", type=int, default=32)
    e.add_argument("--seed", type=seed_value)
    e.add_argument("--out", help="CSV output path (default: stdout)")
    e.add_argument("--json", help="also write the full result as JSON")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--engine", choices=[x.value for x in Engine], default="auto")

    a = sub.add_parser("attack", help="empirical birthday collision search")
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--runs", type=int, default=400)
    a.add_argument("--seed", type=seed_value)
    a.add_argument("--format", choices=["table", "csv"], default="table")

    f = sub.add_parser("figures", help="emit CSV + SVG for figures 1-4")
    f.add_argument("--which", type=int, choices=[1, 2, 3, 4], required=True)
    f.add_argument("--out", default=".", help="output directory")
    f.add_argument("--experiment", help="experiment JSON for figure 4 (otherwise run one)")
    f.add_argument("--seed", type=seed_value)

    b = sub.add_parser("bound", help="birthday bound sample count")
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--m", type=int, required=True)

    tree = sub.add_parser("tree", help="Merkle tree tooling")
    tsub = tree.add_subparsers(dest="tree_command", required=True, parser_class=_Parser)
    tb = tsub.add_parser("build", help="build a tree from a file of lines")
    tb.add_argument("--input", required=True)
    tb.add_argument("--hash", choices=[x.value for x in HashAlgorithm], default="sha256")
    tb.add_argument("--m", type=int, default=256)
    tb.add_argument("--proof-index", type=int)
    tb.add_argument("--out", help="proof output path (default: stdout)")
    tv = tsub.add_parser("verify", help="verify a proof file")
    tv.add_argument("--proof", required=True)
    return p


def cmd_theory(args: argparse.Namespace) -> int:
    mode = theory.Mode(args.mode)
    rows = []
    for m in sorted(set(args.m)):
        for k in sorted(set(args.k)):
            if mode is theory.Mode.BIRTHDAY:
                p = theory.collision_prob_birthday_mode(m, k, approx=args.approx)
            elif args.approx:
                p = theory.collision_prob_approx(m, k)
            else:
                p = theory.collision_prob_exact(m, k)
            rows.append((m, k, p))
    kind = "approx" if args.approx else "exact"
    if args.format == "json":
        doc = [{"m": m, "k": k, "mode": mode.value, "formula": kind, "p": p} for m, k, p in rows]
        print(json.dumps(doc, indent=1))
    elif args.format == "csv":
        print("m,k,mode,formula,p")
        for m, k, p in rows:
            print(f"{m},{k},{mode.value},{kind},{p!r}")
    else:
        print(f"{'m':>4} {'k':>6}  P ({mode.value}, {kind})")
        for m, k, p in rows:
            print(f"{m:>4} {k:>6}  {p:.6g}")
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        m_values=tuple(args.m),
        k_values=tuple(args.k),
        trials=args.trials,
        repeats=args.repeats,
        data_length=args.data_length,
        master_seed=_resolve_seed(args.seed),
    )
    result = run_experiment(config, workers=args.workers, engine=args.engine)
    csv_text, json_text = report.emit_experiment_report(result)
    _emit(csv_text, args.out)
    if args.json:
        _emit(json_text, args.json)
    return 0


def cmd_attack(args: argparse.Namespace) -> int:
    stats = attack_stats(args.m, args.runs, _resolve_seed(args.seed))
    if args.format == "csv":
        print("m,runs,median_trials,mean_trials,predicted_median,seed")
        print(f"{stats.m},{stats.runs},{stats.median_trials!r},{stats.mean_trials!r},"
              f"{stats.predicted_median!r},{stats.seed}")
    else:
        print(f"m                 {stats.m}")
        print(f"runs              {stats.runs}")
        print(f"median trials     {stats.median_trials:g}")
        print(f"mean trials       {stats.mean_trials:.2f}")
        print(f"predicted median  {stats.predicted_median:.2f}")
    return 0


def cmd_figures(args: argparse.Namespace) -> int:
    spec = report.figure_preset(args.which)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = out / f"figure{args.which}"
    if args.which == 4:
        if args.experiment:
            result = report.load_experiment_json(Path(args.experiment).read_text(encoding="utf-8"))
        else:
            result = run_experiment(ExperimentConfig(master_seed=_resolve_seed(args.seed)))
        csv_text = report.emit_experiment_csv(result)
    else:
        csv_text = report.emit_theory_grid(spec)
    stem.with_suffix(".csv").write_text(csv_text, encoding="utf-8", newline="\n")
    stem.with_suffix(".svg").write_text(report.render_chart(csv_text, spec), encoding="utf-8")
    if args.which == 3:
        # baseline surface for comparison
        base = report.FigureSpec(spec.which, spec.m_values, spec.k_values, theory.Mode.STANDARD)
        base_csv = report.emit_theory_grid(base)
        (out / "figure3_baseline.csv").write_text(base_csv, encoding="utf-8", newline="\n")
        (out / "figure3_baseline.svg").write_text(report.render_chart(base_csv, base), encoding="utf-8")
    print(stem.with_suffix(".csv"))
    print(stem.with_suffix(".svg"))
    return 0


def cmd_bound(args: argparse.Namespace) -> int:
    print(repr(theory.birthday_bound(args.p, args.m)))
    return 0


def _read_lines(path: str) -> list[bytes]:
    raw = Path(path).read_bytes()
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return lines


def cmd_tree(args: argparse.Namespace) -> int:
    if args.tree_command == "verify":
        proof = loads_proof(Path(args.proof).read_text(encoding="utf-8"))
        if verify_proof(proof):
            print("valid")
            return 0
        print("error: proof does not verify against its root", file=sys.stderr)
        return 1
    config = HashConfig(HashAlgorithm(args.hash), args.m)
    tree = build_tree(_read_lines(args.input), config)
    if args.proof_index is None:
        print(tree.root.hex())
        return 0
    proof = generate_proof(tree, args.proof_index)
    _emit(dumps_proof(proof), args.out)
    if args.out:
        print(tree.root.hex())
    return 0


COMMANDS = {
    "theory": cmd_theory,
    "experiment": cmd_experiment,
    "attack": cmd_attack,
    "figures": cmd_figures,
    "bound": cmd_bound,
    "tree": cmd_tree,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (MerkleProbError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
