"""Command-line front end.

Every command writes CSV (header row, comma separated, LF line endings) to
``--output`` or stdout.  Options can also come from a ``key=value`` file given
with ``--config``; keys are the long option names without the leading dashes.
Options given on the command line win over the file.

Exit status: 0 success, 2 usage error, 3 grid capacity / conditioning error.
"""

import argparse
import csv
import io
import math
import os
import sys

from . import analytic, montecarlo, shapeopt
from .analytic import JAKES_LAMBDA2, ChannelConfig
from .correlation import JAKES
from .geometry import DomainBox

EXIT_USAGE = 2
EXIT_CAPACITY = 3

DEFAULTS = {
    "sides": (),
    "lambda2": JAKES_LAMBDA2,
    "u0_start": 1.0,
    "u0_stop": 20.0,
    "u0_step": 0.5,
    "thresholds": None,
    "beta": None,
    "es": None,
    "sigma2": None,
    "spacing": montecarlo.DEFAULT_SPACING,
    "replicates": 100_000,
    "seed": 1,
    "workers": 1,
    "max_points": montecarlo.DEFAULT_MAX_POINTS,
    "clamp_tol": montecarlo.DEFAULT_CLAMP_TOL,
    "area": None,
    "volume": None,
    "limits": None,
    "u0": 6.4,
    "steps": shapeopt.DEFAULT_STEPS,
    "figure": None,
    "output": None,
    "output_dir": None,
}

# Spacing used for each dimension by ``reproduce fig2``; finer 2D lattices are
# slow to factor and 3D is left to the analytic curves.
FIG2_SIDE = 0.25
FIG2_SPACING = {0: 0.01, 1: 0.01, 2: 0.025}
FIG3_SHAPES = {
    "2d": [(1.0, 1.0), (2.0, 0.5), (8.0, 0.125)],
    "3d": [(1.0, 1.0, 1.0), (2.0, 2.0, 0.25), (4.0, 4.0, 0.0625)],
}


class UsageError(Exception):
    pass


def _float_list(text):
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


CONVERTERS = {
    "sides": _float_list,
    "thresholds": _float_list,
    "limits": _float_list,
    "replicates": int,
    "workers": int,
    "max_points": int,
    "steps": int,
    "seed": _seed,
    "figure": str,
    "output": str,
    "output_dir": str,
}


def fmt(x, digits=15):
    return format(float(x), f".{digits}g")


def read_config(path):
    """Parse a flat ``key=value`` file; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            conv = CONVERTERS.get(key, float)
            try:
                values[key] = conv(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return values


def resolve(args):
    """Merge command line, config file and defaults into one dict."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            cfg.update(read_config(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["command"] = args.command
    return cfg


def u0_grid(cfg):
    """Threshold values from ``thresholds`` or the start/stop/step range."""
    if cfg["thresholds"]:
        values = list(cfg["thresholds"])
        if any(b <= a for a, b in zip(values, values[1:])):
            raise UsageError("thresholds must be strictly ascending")
    else:
        start, stop, step = cfg["u0_start"], cfg["u0_stop"], cfg["u0_step"]
        if not (start < stop and step > 0):
            raise UsageError("u0 range needs start < stop and step > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [start + i * step for i in range(count)]
    if any(not (math.isfinite(v) and v > 0) for v in values):
        raise UsageError("thresholds must be positive")
    return values


def threshold_grid(cfg):
    """Pairs (label, u0).  With channel parameters the grid is an SNR threshold u."""
    channel = [cfg["beta"], cfg["es"], cfg["sigma2"]]
    values = u0_grid(cfg)
    if all(v is None for v in channel):
        return None, values
    if any(v is None for v in channel):
        raise UsageError("beta, es and sigma2 must be given together")
    try:
        config = ChannelConfig(*channel)
    except ValueError as exc:
        raise UsageError(str(exc))
    return values, [analytic.threshold_u0(config, u) for u in values]


def _box(cfg):
    try:
        return DomainBox(tuple(cfg["sides"]))
    except ValueError as exc:
        raise UsageError(str(exc))


def _lambda2(cfg):
    lam = cfg["lambda2"]
    if not (math.isfinite(lam) and lam > 0):
        raise UsageError("lambda2 must be positive")
    return lam


def _with_u(header, rows, u_values):
    if u_values is None:
        return [header] + rows
    return [["u"] + header] + [[fmt(u)] + r for u, r in zip(u_values, rows)]


def cmd_analytic(cfg):
    box, lam = _box(cfg), _lambda2(cfg)
    u_values, u0s = threshold_grid(cfg)
    rows = []
    for u0 in u0s:
        closed = analytic.hsp_closed_form(box, lam, u0)
        general = analytic.eec(box, lam, u0)
        scaled = analytic.scaled_hsp(box, lam, u0)
        clamped = closed.clamped or general.clamped
        rows.append([
            fmt(u0), fmt(closed.value), fmt(general.value), fmt(scaled.value),
            "true" if clamped else "false",
        ])
    return _with_u(["u0", "p_closed", "p_eec", "p_scaling", "clamped"], rows, u_values)


def cmd_scale(cfg):
    box, lam = _box(cfg), _lambda2(cfg)
    u_values, u0s = threshold_grid(cfg)
    rows = []
    for u0 in u0s:
        fixed = analytic.chi2_tail(2, u0)
        scaled = analytic.scaled_hsp(box, lam, u0).value
        closed = analytic.hsp_closed_form(box, lam, u0).value
        r2 = r3 = ""
        if box.dim >= 2:
            r2_val, r3_val = analytic.scaling_remainders(box, u0, lam)
            r2 = fmt(r2_val)
            r3 = fmt(r3_val) if r3_val is not None else ""
        rows.append([fmt(u0), fmt(fixed), fmt(scaled / fixed), fmt(scaled), fmt(closed), r2, r3])
    header = ["u0", "p_fixed", "ratio", "p_scaling", "p_closed", "r2", "r3"]
    return _with_u(header, rows, u_values)


def cmd_optimize(cfg):
    limits = cfg["limits"]
    lam, u0, steps = _lambda2(cfg), cfg["u0"], cfg["steps"]
    if not (math.isfinite(u0) and u0 > 0):
        raise UsageError("u0 must be positive")
    if steps < 100:
        raise UsageError("steps must be at least 100")
    try:
        if cfg["area"] is not None and limits and len(limits) == 2:
            c = shapeopt.ShapeConstraints2D(cfg["area"], *limits)
            best = shapeopt.optimal_rectangle(c)
            *oracle, oracle_value = shapeopt.brute_force_rectangle(c, lam, u0, steps)
        elif cfg["volume"] is not None and limits and len(limits) == 3:
            c = shapeopt.ShapeConstraints3D(cfg["volume"], *limits)
            best = shapeopt.optimal_cuboid(c)
            *oracle, oracle_value = shapeopt.brute_force_cuboid(c, lam, u0, steps)
        else:
            raise UsageError("give --area with two limits or --volume with three limits")
    except ValueError as exc:
        raise UsageError(str(exc))
    value = float(analytic.closed_form_value(best, lam, u0))
    names = [f"T{i + 1}" for i in range(len(best))]
    return [
        ["solver"] + names + ["objective"],
        ["analytic"] + [fmt(t) for t in best] + [fmt(value)],
        ["oracle"] + [fmt(t) for t in oracle] + [fmt(oracle_value)],
        ["gap"] + [""] * len(best) + [fmt(value - oracle_value)],
    ]


def _simulate_rows(box, spacing, u0s, cfg):
    spec = montecarlo.GridSpec(box, spacing, cfg["max_points"])
    ccdf = montecarlo.estimate_hsp(
        spec, JAKES, u0s, cfg["replicates"], cfg["seed"],
        workers=cfg["workers"], clamp_tol=cfg["clamp_tol"],
    )
    rows = []
    for u0, p, (lo, hi) in zip(u0s, ccdf.probabilities, ccdf.wilson_intervals()):
        closed = analytic.closed_form_value(box.sides, JAKES_LAMBDA2, u0)
        rows.append([fmt(u0), fmt(p, 6), fmt(lo, 6), fmt(hi, 6), fmt(closed)])
    return rows


def _check_simulation(cfg):
    if cfg["replicates"] < 1:
        raise UsageError("replicates must be at least 1")
    if cfg["workers"] < 1:
        raise UsageError("workers must be at least 1")


def cmd_simulate(cfg):
    _check_simulation(cfg)
    box = _box(cfg)
    if not (cfg["spacing"] > 0):
        raise UsageError("spacing must be positive")
    u_values, u0s = threshold_grid(cfg)
    rows = _simulate_rows(box, cfg["spacing"], u0s, cfg)
    return _with_u(["u0", "p_emp", "ci_low", "ci_high", "p_closed"], rows, u_values)


def fig2_tables(cfg):
    """Analytic, scaling-law and simulated HSP for cubes of side 0.25."""
    u0s = u0_grid(cfg)
    dims = range(4)
    boxes = {n: DomainBox((FIG2_SIDE,) * n) for n in dims}
    header = ["u0"] + [f"p_closed_{n}d" for n in dims] + [f"p_scaling_{n}d" for n in dims]
    curves = [header]
    for u0 in u0s:
        closed = [analytic.hsp_closed_form(boxes[n], JAKES_LAMBDA2, u0).value for n in dims]
        scaled = [analytic.scaled_hsp(boxes[n], JAKES_LAMBDA2, u0).value for n in dims]
        curves.append([fmt(u0)] + [fmt(v) for v in closed + scaled])
    sim = [["dim", "spacing", "u0", "p_emp", "ci_low", "ci_high", "p_closed"]]
    for n, spacing in FIG2_SPACING.items():
        for row in _simulate_rows(boxes[n], spacing, u0s, cfg):
            sim.append([str(n), fmt(spacing)] + row)
    return {"fig2_analytic.csv": curves, "fig2_simulated.csv": sim}


def fig3_tables(cfg):
    """Analytic HSP for fixed-area rectangles and fixed-volume cuboids."""
    u0s = u0_grid(cfg)
    shapes = FIG3_SHAPES["2d"] + FIG3_SHAPES["3d"]
    header = ["u0"] + [
        f"p_{len(s)}d_" + "x".join(fmt(t) for t in s) for s in shapes
    ]
    rows = [header]
    for u0 in u0s:
        rows.append([fmt(u0)] + [
            fmt(analytic.closed_form_value(s, JAKES_LAMBDA2, u0)) for s in shapes
        ])
    return {"fig3_analytic.csv": rows}


def cmd_reproduce(cfg):
    figure = cfg["figure"]
    if figure == "fig2":
        _check_simulation(cfg)
        return fig2_tables(cfg)
    if figure == "fig3":
        return fig3_tables(cfg)
    raise UsageError("--figure must be fig2 or fig3")


def to_csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file with default options")
    common.add_argument("--output", help="CSV output path (default stdout)")
    common.add_argument("--lambda2", type=float, help="second spectral moment (default 2 pi^2)")

    thresh = argparse.ArgumentParser(add_help=False)
    thresh.add_argument("--u0-start", dest="u0_start", type=float)
    thresh.add_argument("--u0-stop", dest="u0_stop", type=float)
    thresh.add_argument("--u0-step", dest="u0_step", type=float)
    thresh.add_argument("--thresholds", type=_float_list,
                        help="explicit comma-separated thresholds (overrides the range)")

    channel = argparse.ArgumentParser(add_help=False)
    channel.add_argument("--beta", type=float, help="channel gain (linear)")
    channel.add_argument("--es", type=float, help="symbol energy (linear)")
    channel.add_argument("--sigma2", type=float, help="noise power (linear)")

    box = argparse.ArgumentParser(add_help=False)
    box.add_argument("--sides", type=_float_list,
                     help="comma-separated side lengths in wavelengths (empty: fixed antenna)")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--replicates", type=int)
    mc.add_argument("--seed", type=_seed)
    mc.add_argument("--workers", type=int)
    mc.add_argument("--max-points", dest="max_points", type=int)
    mc.add_argument("--clamp-tol", dest="clamp_tol", type=float)

    parser = argparse.ArgumentParser(
        prog="cfas", description="High-SNR probability of continuous fluid antennas"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analytic", parents=[common, thresh, channel, box],
                   help="closed form, EEC and scaling-law curves")
    sub.add_parser("scale", parents=[common, thresh, channel, box],
                   help="scaling-law factors and remainders")
    opt = sub.add_parser("optimize", parents=[common], help="optimal rectangle / cuboid")
    opt.add_argument("--area", type=float, help="area budget S (2D)")
    opt.add_argument("--volume", type=float, help="volume budget V (3D)")
    opt.add_argument("--limits", type=_float_list, help="side limits L1,L2[,L3]")
    opt.add_argument("--u0", type=float, help="threshold at which to compare objectives")
    opt.add_argument("--steps", type=int, help="grid steps per axis for the oracle")
    sim = sub.add_parser("simulate", parents=[common, thresh, channel, box, mc],
                         help="Monte Carlo HSP on a lattice")
    sim.add_argument("--spacing", type=float, help="lattice step in wavelengths")
    rep = sub.add_parser("reproduce", parents=[common, thresh, mc],
                         help="write the CSV data behind the figures")
    rep.add_argument("--figure", choices=["fig2", "fig3"])
    rep.add_argument("--output-dir", dest="output_dir")
    return parser


COMMANDS = {
    "analytic": cmd_analytic,
    "scale": cmd_scale,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "reproduce": cmd_reproduce,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        result = COMMANDS[args.command](cfg)
        if args.command == "reproduce":
            out_dir = cfg["output_dir"]
            if not out_dir:
                raise UsageError("reproduce needs --output-dir")
            try:
                os.makedirs(out_dir, exist_ok=True)
            except OSError as exc:
                raise UsageError(f"cannot create {out_dir}: {exc}")
            for name, rows in result.items():
                _write(to_csv(rows), os.path.join(out_dir, name))
        else:
            _write(to_csv(result), cfg["output"])
    except UsageError as exc:
        print(f"cfas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (montecarlo.CapacityError, montecarlo.ConditioningError) as exc:
        print(f"cfas: error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    return 0


if __name__ == "__main__":
    sys.exit(main())
