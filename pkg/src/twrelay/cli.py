"""Command-line front end.

Subcommands::

    coherent-sweep     sweep relay count K (bounds + dual channel matching)
    noncoherent-sweep  sweep relay power P_R (non-coherent bound + AF)
    alpha-sweep        sweep the transmit-phase fraction alpha
    rate-region        rate-region corners at one operating point
    slot-dump          one simulated slot, written as a text transcript

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags (highest precedence).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .channel import FadingLaw, RngStream, SystemConfig, dump_realization, sample_realization
from .harness import (
    METRICS,
    SweepSpec,
    emit_csv,
    fit_path,
    fit_rows,
    mean_pair,
    rate_region,
    run_point,
    run_sweep,
    select,
)
from .strategies import equal_power_allocation, simulate_slot

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

SUBCOMMANDS = ("coherent-sweep", "noncoherent-sweep", "alpha-sweep", "rate-region", "slot-dump")

DEFAULTS = {
    "M": "2", "N": "2", "P": "10", "P_R": "10", "sigma2": "1", "alpha": "0.5",
    "fading": "uniform:0.5,1.5", "trials": "200", "seed": "42", "threads": "1",
}

SUBCOMMAND_DEFAULTS = {
    "coherent-sweep": {"K": "32,128,512,2048", "metrics": "ub_bc,ub_mac,ub_coherent,dcm"},
    "noncoherent-sweep": {"K": "256", "P_R": "100,1000,10000,100000",
                          "metrics": "nc_ub,nc_af", "tie_power": "true"},
    "alpha-sweep": {"K": "512", "alpha": "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9",
                    "metrics": "ub_bc,ub_mac,ub_coherent"},
    "rate-region": {"K": "256", "metrics": "ub_coherent,dcm"},
    "slot-dump": {"K": "4", "strategy": "dcm", "trial": "0", "output": "-"},
}

# which key is swept (and so may hold a list) for each sweep subcommand
SWEEP_KEY = {"coherent-sweep": ("K", "relay_count"),
             "noncoherent-sweep": ("P_R", "relay_power"),
             "alpha-sweep": ("alpha", "alpha")}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class CliInvocation:
    subcommand: str
    config: SystemConfig
    output: str
    seed: int
    trials: int
    threads: int
    metrics: tuple = ()
    axis: str | None = None
    axis_values: list = field(default_factory=list)
    tie_power: bool = False
    strategy: str = "dcm"
    trial: int = 0
    dump_realization: str | None = None
    config_path: str | None = None


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model (powers linear, noise variance linear)")
    g.add_argument("--M", metavar="INT", help="antennas at each terminal (default 2)")
    g.add_argument("--N", metavar="INT", help="antennas per relay (default 2)")
    g.add_argument("--K", metavar="INT[,INT...]",
                   help="relay count; comma list for coherent-sweep")
    g.add_argument("--P", metavar="LIN", help="terminal transmit power, linear (default 10)")
    g.add_argument("--P_R", "--PR", dest="P_R", metavar="LIN[,LIN...]",
                   help="sum relay power, linear; comma list for noncoherent-sweep (default 10)")
    g.add_argument("--sigma2", metavar="LIN", help="noise variance per antenna, linear (default 1)")
    g.add_argument("--alpha", metavar="FRAC[,FRAC...]",
                   help="transmit-phase fraction in [0, 1]; comma list for alpha-sweep (default 0.5)")
    g.add_argument("--fading", metavar="LAW",
                   help="fading law uniform:lo,hi or constant:c (default uniform:0.5,1.5)")
    r = p.add_argument_group("run")
    r.add_argument("--config", metavar="PATH", help="key = value settings file")
    r.add_argument("--output", "-o", metavar="PATH", help="CSV output path (rates in bits)")
    r.add_argument("--seed", metavar="INT", help="master RNG seed, 64-bit (default 42)")
    r.add_argument("--trials", metavar="INT", help="Monte Carlo trials per point (default 200)")
    r.add_argument("--threads", metavar="INT", help="trial worker threads, 0 = auto (default 1)")
    r.add_argument("--metrics", metavar="LIST", help=f"comma list from {','.join(METRICS)}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twrelay", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    helps = {
        "coherent-sweep": "sweep relay count K; fits rate vs log2 K",
        "noncoherent-sweep": "sweep relay power P_R (alpha must be 0.5); fits rate vs log2 P_R",
        "alpha-sweep": "sweep alpha for the coherent cut-set bounds",
        "rate-region": "print rate-region corners (bits) for DCM and the coherent bound",
        "slot-dump": "simulate one slot and write its transcript",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        _add_common(p)
        if name == "noncoherent-sweep":
            p.add_argument("--tie-power", dest="tie_power", action=argparse.BooleanOptionalAction,
                           default=None, help="set P = P_R at every point (default on)")
        if name == "slot-dump":
            p.add_argument("--strategy", choices=("dcm", "nc_af"), help="relay strategy (default dcm)")
            p.add_argument("--trial", metavar="INT", help="trial index of the realization (default 0)")
            p.add_argument("--dump-realization", dest="dump_realization", metavar="PATH",
                           help="also write the channel realization to PATH")
    return parser


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _num(key, text, kind=float, lo=None, hi=None, lo_open=False):
    flag = f"--{key.replace('_', '-') if key == 'tie_power' else key}"
    try:
        v = kind(text)
    except ValueError:
        raise UsageError(f"{flag}: cannot parse {text!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(v):
        raise UsageError(f"{flag}: value must be finite")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise UsageError(f"{flag}: value {text} out of range ({'>' if lo_open else '>='} {lo})")
    if hi is not None and v > hi:
        raise UsageError(f"{flag}: value {text} out of range (<= {hi})")
    return v


_RANGES = {
    "M": dict(kind=int, lo=1), "N": dict(kind=int, lo=1), "K": dict(kind=int, lo=1),
    "P": dict(lo=0, lo_open=True), "P_R": dict(lo=0, lo_open=True),
    "sigma2": dict(lo=0, lo_open=True), "alpha": dict(lo=0, hi=1),
    "trials": dict(kind=int, lo=1), "seed": dict(kind=int, lo=0, hi=2**64 - 1),
    "threads": dict(kind=int, lo=0), "trial": dict(kind=int, lo=0),
}


def _parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"--tie-power: cannot parse {text!r} as a boolean")


def parse(argv=None) -> CliInvocation:
    args = build_parser().parse_args(argv)
    cmd = args.subcommand
    merged = dict(DEFAULTS)
    merged.update(SUBCOMMAND_DEFAULTS[cmd])
    if args.config:
        try:
            filevals = read_config_file(args.config)
        except OSError as exc:
            raise UsageError(f"--config: cannot read {args.config!r}: {exc.strerror}") from None
        allowed = set(_RANGES) | {"fading", "metrics", "output", "tie_power", "strategy",
                                  "dump_realization"}
        unknown = sorted(set(filevals) - allowed)
        if unknown:
            raise UsageError(f"--config: unknown key(s) {', '.join(unknown)}")
        merged.update(filevals)
    for key, val in vars(args).items():
        if key not in ("subcommand", "config") and val is not None:
            merged[key] = val if isinstance(val, bool) else str(val)

    sweep_key, axis = SWEEP_KEY.get(cmd, (None, None))
    scalars = {}
    axis_values: list = []
    for key, spec in _RANGES.items():
        if key not in merged:
            continue
        parts = [s for s in str(merged[key]).split(",") if s.strip()]
        if not parts:
            raise UsageError(f"--{key}: empty value")
        vals = [_num(key, s.strip(), **spec) for s in parts]
        if key == sweep_key:
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise UsageError(f"--{key}: sweep values must be strictly ascending")
            axis_values = vals
            scalars[key] = vals[0]
        elif len(vals) != 1:
            raise UsageError(f"--{key}: expects a single value for {cmd}")
        else:
            scalars[key] = vals[0]

    try:
        fading = FadingLaw.parse(merged["fading"])
    except ValueError as exc:
        raise UsageError(f"--fading: {exc}") from None
    metrics = tuple(m.strip() for m in str(merged.get("metrics", "")).split(",") if m.strip())
    bad = [m for m in metrics if m not in METRICS]
    if bad:
        raise UsageError(f"--metrics: unknown metric(s) {', '.join(bad)}")
    strategy = merged.get("strategy", "dcm")
    if strategy not in ("dcm", "nc_af"):
        raise UsageError(f"--strategy: unknown strategy {strategy!r}")

    cfg = SystemConfig(M=scalars["M"], N=scalars["N"], K=scalars["K"], P=scalars["P"],
                       P_R=scalars["P_R"], sigma2=scalars["sigma2"], alpha=scalars["alpha"],
                       fading=fading)
    tie = merged.get("tie_power", False)
    return CliInvocation(
        subcommand=cmd, config=cfg, output=str(merged.get("output", f"{cmd}.csv")),
        seed=scalars["seed"], trials=scalars["trials"], threads=scalars["threads"],
        metrics=metrics, axis=axis, axis_values=axis_values,
        tie_power=tie if isinstance(tie, bool) else _parse_bool(tie),
        strategy=strategy, trial=scalars.get("trial", 0),
        dump_realization=merged.get("dump_realization"), config_path=args.config,
    )


def _print_rows(rows, out) -> None:
    print(f"{'axis_value':>12} {'metric':>12} {'dir':>4} {'mean_bits':>11} {'stderr':>9}", file=out)
    for r in rows:
        print(f"{r.axis_value:>12.6g} {r.metric:>12} {r.direction:>4} "
              f"{r.mean_bits:>11.4f} {r.stderr_bits:>9.4f}", file=out)


def _run_sweep(inv: CliInvocation, out) -> None:
    spec = SweepSpec(base=inv.config, axis=inv.axis, axis_values=inv.axis_values,
                     trials=inv.trials, seed=inv.seed, metrics=inv.metrics,
                     tie_power=inv.tie_power)
    rows = run_sweep(spec, threads=inv.threads)
    fits = fit_rows(rows) if inv.axis != "alpha" else None
    emit_csv(rows, fits, inv.output)
    _print_rows(rows, out)
    if fits:
        print(f"\nscaling fits (bits per doubling of {inv.axis}):", file=out)
        for (m, d), f in fits.items():
            print(f"  {m:>12} {d}: slope {f.slope_bits_per_doubling:.4f}  "
                  f"intercept {f.intercept_bits:.4f}  r^2 {f.r_squared:.5f}", file=out)
    if inv.axis == "alpha":
        for m in inv.metrics:
            for d in (12, 21):
                best = max(select(rows, m, d), key=lambda r: r.mean_bits)
                print(f"  {m} {d}: maximized at alpha = {best.axis_value:g}", file=out)
    print(f"\nwrote {inv.output}" + (f" and {fit_path(inv.output)}" if fits else ""), file=out)


def _run_region(inv: CliInvocation, out) -> None:
    rows = run_point(inv.config, inv.trials, inv.seed, inv.metrics, inv.threads,
                     axis="relay_count", axis_value=inv.config.K)
    emit_csv(rows, None, inv.output)
    _print_rows(rows, out)
    for m in inv.metrics:
        region = rate_region(mean_pair(rows, m))
        print(f"\n{m} region vertices (r12, r21) bits:", file=out)
        for a, b in region.vertices:
            print(f"  ({a:.6f}, {b:.6f})", file=out)
    print(f"\nwrote {inv.output}", file=out)


def _run_slot(inv: CliInvocation, out) -> None:
    cfg = inv.config
    real = sample_realization(cfg, RngStream(inv.seed, inv.trial, "channel"))
    tr = simulate_slot(real, cfg, equal_power_allocation(cfg), inv.strategy,
                       RngStream(inv.seed, inv.trial, "slot"))
    text = tr.dump()
    if inv.output == "-":
        out.write(text)
    else:
        with open(inv.output, "w", encoding="ascii") as fh:
            fh.write(text)
        print(f"residual12 {tr.residual12:.3e}  residual21 {tr.residual21:.3e}", file=out)
        print(f"wrote {inv.output}", file=out)
    if inv.dump_realization:
        with open(inv.dump_realization, "w", encoding="ascii") as fh:
            fh.write(dump_realization(real))


def run(inv: CliInvocation, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        if inv.subcommand in SWEEP_KEY:
            _run_sweep(inv, out)
        elif inv.subcommand == "rate-region":
            _run_region(inv, out)
        else:
            _run_slot(inv, out)
    except OSError as exc:
        print(f"twrelay: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"twrelay: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    try:
        inv = parse(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(inv)


if __name__ == "__main__":
    sys.exit(main())
