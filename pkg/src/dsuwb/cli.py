"""Command-line entry point: ``dsuwb {sweep,mfb,complexity,channel}``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import complexity_receiver, saving_pct, write_complexity_csv, write_mfb_csv
from .channel_model import ChannelRealization, discretize, generate_realization
from .sim_harness import RECEIVERS, ConfigError, SimConfig, load_config, run_mfb, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _snr_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of dB values, got {text!r}") from None


def _common(config_required: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", required=config_required, help="YAML simulation config")
    p.add_argument("--output", help="CSV output path (default: stdout)")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--profile", type=str.upper, choices=["CM1", "CM4"], help="channel profile")
    p.add_argument("--rate", type=float, help="data rate in bit/s")
    p.add_argument("--receiver", choices=RECEIVERS)
    p.add_argument("--fingers", type=int, help="RAKE finger count J")
    p.add_argument("--iterations", type=int, help="SMPIC iterations p")
    p.add_argument("--weight", type=float, help="interference rejection weight w")
    p.add_argument("--snr", type=_snr_list, help="comma-separated Eb/N0 points in dB")
    p.add_argument("--realizations", type=int)
    p.add_argument("--keep-best", type=int)
    p.add_argument("--bits", type=int, help="data bits per realization")
    p.add_argument("--workers", type=int, default=1, help="worker processes (results are identical)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dsuwb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[_common(True)], help="BER versus Eb/N0")
    sub.add_parser("mfb", parents=[_common(True)], help="matched filter bound")
    cx = sub.add_parser("complexity", help="MADPOS comparison table")
    cx.add_argument("--fingers", type=int, action="append", help="J (repeatable; default 16 and 32)")
    cx.add_argument("--iterations", type=int, default=2)
    cx.add_argument("--le-taps", type=int, default=15)
    cx.add_argument("--ff-taps", type=int, default=25)
    cx.add_argument("--fb-taps", type=int, default=20)
    cx.add_argument("--output", help="also write the table as CSV")
    chp = sub.add_parser("channel", help="dump channel realizations as CSV")
    chp.add_argument("--profile", type=str.upper, choices=["CM1", "CM4"], default="CM1")
    chp.add_argument("--config", help="YAML simulation config (for a custom profile)")
    chp.add_argument("--seed", type=int, default=0)
    chp.add_argument("--count", type=int, default=1)
    chp.add_argument("--rate", type=float, help="discretize on the receiver grid for this data rate")
    chp.add_argument("--output", help="CSV path; with --count > 1 an index suffix is added")
    return parser


def _sim_config(args) -> SimConfig:
    overrides = dict(
        base_seed=args.seed,
        channel_profile=args.profile,
        data_rate=args.rate,
        receiver=args.receiver,
        J=args.fingers,
        p=args.iterations,
        w=args.weight,
        eb_n0_list=args.snr,
        realizations=args.realizations,
        keep_best=args.keep_best,
        bits_per_realization=args.bits,
    )
    return load_config(args.config, **overrides)


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sweep(args) -> None:
    table = run_sweep(_sim_config(args), workers=args.workers)
    _emit(table.to_csv(), args.output)


def _cmd_mfb(args) -> None:
    points = run_mfb(_sim_config(args))
    if args.output:
        write_mfb_csv(points, args.output)
        return
    sys.stdout.write("eb_n0_db,ber\n")
    for pt in points:
        sys.stdout.write(f"{pt.eb_n0_db!r},{pt.ber!r}\n")


def _cmd_complexity(args) -> None:
    rows = []
    lines = [f"{'MADPOS':<10}{f'SRAKE-DFE (FF={args.ff_taps}, FB={args.fb_taps})':>28}{f'SMPIC-LE (L={args.le_taps}, p={args.iterations})':>26}{'Saving':>10}"]
    for J in args.fingers or [16, 32]:
        dfe = complexity_receiver("srake-dfe", J, FF=args.ff_taps, FB=args.fb_taps)
        le = complexity_receiver("smpic-le", J, p=args.iterations, L=args.le_taps)
        sav = saving_pct(le, dfe)
        lines.append(f"{f'J = {J}':<10}{dfe.madpos:>28g}{le.madpos:>26g}{sav:>9.1f}%")
        rows += [(dfe, None), (le, sav)]
    print("\n".join(lines))
    if args.output:
        write_complexity_csv(rows, args.output)


def _cmd_channel(args) -> None:
    if args.config:
        params = load_config(args.config).channel_params()
    else:
        params = SimConfig(channel_profile=args.profile).channel_params()
    for i in range(args.count):
        ch = generate_realization(params, args.seed + i)
        if args.rate:
            Ts = SimConfig(data_rate=args.rate).frame.chip_duration / 4
            ch = discretize(ch, Ts).as_realization()
        if args.output:
            path = Path(args.output)
            if args.count > 1:
                path = path.with_name(f"{path.stem}_{i}{path.suffix}")
            ch.to_csv(path)
        else:
            _print_realization(ch)


def _print_realization(ch: ChannelRealization) -> None:
    sys.stdout.write("delay_ns,gain_real,gain_imag\n")
    for d, g in zip(ch.delays, np.asarray(ch.gains, dtype=complex)):
        sys.stdout.write(f"{float(d)!r},{float(g.real)!r},{float(g.imag)!r}\n")


_COMMANDS = {"sweep": _cmd_sweep, "mfb": _cmd_mfb, "complexity": _cmd_complexity, "channel": _cmd_channel}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"dsuwb: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"dsuwb: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
