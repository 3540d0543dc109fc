"""Command-line entry point: ``dfsqkd {run,sweep,selftest}``."""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from dfsqkd import _backend, selftest
from dfsqkd.config import build_config, load_file
from dfsqkd.session import CSV_COLUMNS, EXTRA_COLUMNS, SWEEPABLE, ConfigError, message_to_bits, qsdc_run, run_session, run_sweep

EVE_CHOICES = ("none", "ir-z", "ir-x", "ir-y", "ir-rand", "ir-logical")


def _session_flags(p):
    p.add_argument("--config", type=Path, help="TOML session file")
    p.add_argument("--seed", type=int)
    p.add_argument("--encoding", choices=("dephasing", "rotation"))
    p.add_argument("--rounds", type=int)
    p.add_argument("--loss", type=float, dest="loss_probability")
    p.add_argument("--eve", choices=EVE_CHOICES)
    p.add_argument("--legs", choices=("fwd", "bwd", "both"))
    p.add_argument("--mode", choices=("qkd", "qsdc"))
    p.add_argument("--message", dest="message_file", help="message file for --mode qsdc")
    p.add_argument("--noise", dest="distribution", choices=("uniform", "fixed", "drift"))
    p.add_argument("--noise-family", dest="family", choices=("auto", "none", "dephasing", "rotation"))
    p.add_argument("--noise-value", dest="value", type=float)
    p.add_argument("--drift-step", dest="step", type=float)
    p.add_argument("--bsa-failure", dest="bsa_failure_probability", type=float)
    p.add_argument("--qber-threshold", type=float)
    p.add_argument("--check-fraction", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path, help="CSV output (default: stdout)")
    p.add_argument("--transcript", type=Path, help="write a JSON transcript")
    p.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0 for byte-stable CSV")


def _parser():
    parser = argparse.ArgumentParser(prog="dfsqkd", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a single session")
    _session_flags(run)
    sweep = sub.add_parser("sweep", help="one session per value of a scalar axis")
    _session_flags(sweep)
    sweep.add_argument("--axis", required=True, help=f"one of: {', '.join(sorted(SWEEPABLE))}")
    sweep.add_argument("--values", default="", help="comma-separated values")
    sub.add_parser("selftest", help="run the algebraic invariant suite")
    return parser


_SESSION_KEYS = (
    "seed",
    "encoding",
    "rounds",
    "loss_probability",
    "eve",
    "legs",
    "mode",
    "message_file",
    "distribution",
    "family",
    "value",
    "step",
    "bsa_failure_probability",
    "qber_threshold",
    "workers",
)


def _config(args):
    values = load_file(args.config) if args.config else {}
    for key in _SESSION_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.check_fraction is not None:
        values["check1_fraction"] = values["check2_fraction"] = args.check_fraction
    return build_config(values)


def _write_csv(reports, path, include_timing):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS + EXTRA_COLUMNS)
        for r in reports:
            w.writerow(r.csv_row(include_timing))
    finally:
        if path:
            fh.close()


def _write_transcript(path, config, reports):
    doc = {
        "config": config.to_dict(),
        "sessions": [
            {"report": r.summary(), "rounds": [t.to_dict() for t in r.transcript or []]} for r in reports
        ],
    }
    path.write_text(json.dumps(doc, indent=1, sort_keys=True))


def _run(args):
    config = _config(args)
    keep = args.transcript is not None
    if config.mode == "qsdc":
        if not config.message_file:
            raise ConfigError("qsdc mode needs a message file (--message or message_file)")
        bits = message_to_bits(Path(config.message_file).read_bytes())
        report = qsdc_run(bits, config, keep_transcript=keep)
        text = json.dumps(report.summary(), indent=1, sort_keys=True)
        if args.out:
            args.out.write_text(text)
        else:
            print(text)
        if keep:
            doc = {"config": config.to_dict(), "qsdc": report.summary(), "rounds": [t.to_dict() for t in report.transcript]}
            args.transcript.write_text(json.dumps(doc, indent=1, sort_keys=True))
        return 0
    report = run_session(config, keep_transcript=keep)
    _write_csv([report], args.out, not args.no_timing)
    if keep:
        _write_transcript(args.transcript, config, [report])
    return 0


def _sweep(args):
    config = _config(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    keep = args.transcript is not None
    reports = run_sweep(config, args.axis, values, workers=config.workers, keep_transcript=keep)
    _write_csv(reports, args.out, not args.no_timing)
    if keep:
        _write_transcript(args.transcript, config, reports)
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "selftest":
            print(f"kernel backend: {_backend.name}")
            return 0 if selftest.run() else 1
        if args.command == "run":
            return _run(args)
        return _sweep(args)
    except (ConfigError, OSError) as exc:
        print(f"dfsqkd: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        logging.getLogger("dfsqkd").debug("internal error", exc_info=True)
        print(f"dfsqkd: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
