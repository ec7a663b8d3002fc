"""Command-line front end.

    pingpong simulate --c 0.5 --n-bits 16 --attack full --seed 7
    pingpong batch --c 0.5 --n-bits 8 --attack full --trials 1000 --out batch.csv
    pingpong analyze --s-total --I 8 --c 0.5 --d 0.5
    pingpong curve --c 0.5 --d 0.1,0.25,0.5 --I-max 20 --steps 200 --out success.csv

CSV schemas (version 1):
    curve:  I,c,d,I0,s
    batch:  trial,detected,control_runs,message_runs,bits_ok

Exit codes: 0 success, 2 usage error, 3 simulated session aborted on detection.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from contextlib import contextmanager

from . import analysis
from .adversary import AttackSpec
from .analysis import Priors
from .channel import loopback_pair, make_duplex_pair
from .montecarlo import BatchConfig, run_batch
from .protocol import Mode, ProtocolConfig, bits_to_string, message_from_string, run_session

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DETECTED = 3

CSV_SCHEMA_VERSION = 1
CURVE_COLUMNS = ("I", "c", "d", "I0", "s")
BATCH_COLUMNS = ("trial", "detected", "control_runs", "message_runs", "bits_ok")


class UsageError(Exception):
    pass


def _prob(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1]: {text!r}")
    return x


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return n


def _attack(text: str) -> AttackSpec:
    try:
        return AttackSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _prob_list(text: str) -> list[float]:
    return [_prob(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pingpong", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=None, help="falls back to $PINGPONG_SEED, then 0")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default=None)

    def session_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--c", type=_prob, default=0.5, help="control-run probability")
        p.add_argument("--n-bits", type=_positive_int, default=8)
        p.add_argument("--mode", choices=("direct", "key"), default="direct")
        p.add_argument("--attack", type=_attack, default=AttackSpec.none(),
                       help="none | full | angle:<radians in [0, pi/4]>")
        p.add_argument("--p0", type=_prob, default=0.5, help="probability of bit 0 for drawn bits")

    sim = sub.add_parser("simulate", help="run one protocol session")
    session_args(sim)
    sim.add_argument("--message", default=None, help="bit string, direct mode only")
    sim.add_argument("--transport", choices=("memory", "loopback"), default="memory")
    sim.add_argument("--port", type=int, default=0, help="loopback port (0 = any free port)")
    common(sim)

    bat = sub.add_parser("batch", help="run many seeded sessions")
    session_args(bat)
    bat.add_argument("--trials", type=_positive_int, default=100)
    bat.add_argument("--parallelism", type=_positive_int, default=1)
    common(bat)

    ana = sub.add_parser("analyze", help="evaluate closed-form security quantities")
    ana.add_argument("--c", type=_prob, default=0.5)
    ana.add_argument("--d", type=_prob, default=0.5)
    ana.add_argument("--I", type=float, default=8.0, dest="info")
    ana.add_argument("--I0", type=_prob, default=None, dest="info0", help="input for --d-of-I0")
    ana.add_argument("--p0", type=_prob, default=0.5)
    ana.add_argument("--digits", type=int, default=4)
    for flag, help_ in (
        ("--s-total", "survival probability s(I, c, d)"),
        ("--s-message", "survival probability of one message run s(c, d)"),
        ("--max-info", "information bound I0(d) for the given priors"),
        ("--d-of-I0", "detection probability needed for information I0"),
        ("--rate", "transmission rate r = 1 - c"),
        ("--eigenvalues", "spectrum of the coded travel state"),
        ("--bb84", "BB84 comparison constants"),
    ):
        ana.add_argument(flag, action="store_true", help=help_)
    common(ana)

    cur = sub.add_parser("curve", help="survival probability versus information")
    cur.add_argument("--c", type=_prob, default=0.5)
    cur.add_argument("--d", type=_prob_list, default=[0.1, 0.25, 0.5])
    cur.add_argument("--I-max", type=float, default=20.0, dest="I_max")
    cur.add_argument("--steps", type=_positive_int, default=200)
    common(cur)
    return parser


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("PINGPONG_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"PINGPONG_SEED is not an integer: {env!r}") from None
    return 0


@contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(fh, columns, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)


def cmd_simulate(args) -> int:
    message = None
    if args.message is not None:
        if args.mode == "key":
            raise UsageError("--message cannot be combined with --mode key")
        message = message_from_string(args.message)
        if len(message) != args.n_bits:
            raise UsageError(f"--message has {len(message)} bits but --n-bits is {args.n_bits}")
    if args.c == 1.0:
        raise UsageError("--c 1 never transmits a message bit")
    cfg = ProtocolConfig(
        c=args.c, n_bits=args.n_bits, mode=Mode(args.mode), seed=resolve_seed(args.seed),
        priors=Priors.from_p0(args.p0), message=message,
    )
    channel = loopback_pair(args.port) if args.transport == "loopback" else make_duplex_pair()
    try:
        tr = run_session(cfg, args.attack, channel)
    finally:
        for end in channel:
            end.close()

    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(tr.to_json() + "\n")
        elif args.format == "csv":
            cols = ("run_index", "run_mode", "control_i", "control_j", "bell_outcome",
                    "bit_index", "decoded", "eve_guess")
            rows = []
            for e in tr.events:
                d = e.to_dict()
                rows.append(["" if d[k] is None else d[k] for k in cols])
            _write_csv(fh, cols, rows)
        else:
            report = {
                "mode": cfg.mode.value,
                "attack": tr.attack,
                "status": "aborted" if tr.aborted else "ok",
                "detected_at_run": "" if tr.detected_at_run is None else tr.detected_at_run,
                "message": bits_to_string(tr.message_bits),
                "decoded": bits_to_string(tr.decoded_bits),
                "control_runs": tr.control_runs,
                "message_runs": tr.message_runs,
                "invalid_decodes": tr.invalid_decodes,
            }
            guesses = tr.eve_guesses
            if guesses:
                report["eve_guessed"] = "".join(str(g) for _, g in guesses)
            for k, v in report.items():
                fh.write(f"{k}={v}\n")
    return EXIT_DETECTED if tr.aborted else EXIT_OK


def cmd_batch(args) -> int:
    if args.c == 1.0:
        raise UsageError("--c 1 never transmits a message bit")
    base = ProtocolConfig(c=args.c, n_bits=args.n_bits, mode=Mode(args.mode),
                          priors=Priors.from_p0(args.p0))
    stats = run_batch(BatchConfig(base, args.attack, args.trials, resolve_seed(args.seed),
                                  args.parallelism))
    rows = [[r.trial, int(r.detected), r.control_runs, r.message_runs, r.bits_ok] for r in stats.rows]
    with _output(args.out) as fh:
        if args.format == "json":
            payload = {"schema_version": CSV_SCHEMA_VERSION, "summary": stats.summary(),
                       "rows": [dict(zip(BATCH_COLUMNS, r)) for r in rows]}
            fh.write(json.dumps(payload, sort_keys=True) + "\n")
        else:
            _write_csv(fh, BATCH_COLUMNS, rows)
    s = stats.summary()
    print(
        f"trials={s['trials']} detected_sessions={s['detected_sessions']} "
        f"empirical_d={s['empirical_d']:.4f}±{s['empirical_d_stderr']:.4f} "
        f"decode_error_rate={s['decode_error_rate']:.4f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    priors = Priors.from_p0(args.p0)
    selected = {}
    wanted = [k for k in ("s_total", "s_message", "max_info", "d_of_I0", "rate", "eigenvalues", "bb84")
              if getattr(args, k)]
    if not wanted:
        wanted = ["s_total", "s_message", "max_info", "rate"]
    try:
        for key in wanted:
            if key == "s_total":
                selected["s_total"] = analysis.survival_total(args.info, args.c, args.d)
            elif key == "s_message":
                selected["s_message"] = analysis.survival_per_message(args.c, args.d)
            elif key == "max_info":
                selected["I0"] = analysis.max_info(args.d, priors)
            elif key == "d_of_I0":
                if args.info0 is None:
                    raise UsageError("--d-of-I0 needs --I0")
                selected["d"] = analysis.invert_info(args.info0)
            elif key == "rate":
                selected["rate"] = analysis.transmission_rate(args.c)
            elif key == "eigenvalues":
                selected["lambda1"], selected["lambda2"] = analysis.eigenvalues(args.d, priors)
            elif key == "bb84":
                selected["bb84_d"] = analysis.bb84_comparison()
                selected["bb84_discard_probability"] = analysis.BB84_DISCARD_PROBABILITY
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(json.dumps(selected, sort_keys=True) + "\n")
        elif args.format == "csv":
            _write_csv(fh, list(selected), [[_fmt(v) for v in selected.values()]])
        elif len(selected) == 1:
            fh.write(f"{next(iter(selected.values())):.{args.digits}f}\n")
        else:
            for k, v in selected.items():
                fh.write(f"{k}={v:.{args.digits}f}\n")
    return EXIT_OK


def cmd_curve(args) -> int:
    try:
        points = analysis.success_curve(args.c, args.d, args.I_max, args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _output(args.out) as fh:
        if args.format == "json":
            payload = {"schema_version": CSV_SCHEMA_VERSION, "columns": list(CURVE_COLUMNS),
                       "points": [{"I": p.I, "c": p.c, "d": p.d, "I0": p.I0, "s": p.s} for p in points]}
            fh.write(json.dumps(payload, sort_keys=True) + "\n")
        else:
            _write_csv(fh, CURVE_COLUMNS, [[_fmt(p.I), _fmt(p.c), _fmt(p.d), _fmt(p.I0), _fmt(p.s)]
                                           for p in points])
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "batch": cmd_batch, "analyze": cmd_analyze, "curve": cmd_curve}


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pingpong {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())
