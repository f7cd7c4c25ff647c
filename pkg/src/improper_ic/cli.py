"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 too many solver failures.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .harness import (SCHEMAS, ConfigError, ExperimentConfig, SolverFailures, gen_channels,
                      run_maxmin, run_ratio, run_region, run_table_case, schema_text, write_csv)
from .io import save_channels
from .signal_model import SignalStrategy, complex_to_real, real_to_complex, validate_strategy
from .widely_linear import augmented_sqrt, empirical_stats, sample_improper

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _common(p):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--units", choices=["bits", "nats"])
    p.add_argument("--L", type=int, help="randomization trials for the joint solver")
    p.add_argument("--tol", type=float, help="bisection tolerance (nats)")
    p.add_argument("--grid", type=int, nargs=4, metavar=("NP", "NM", "NT", "REF"),
                   help="oracle grid: power, magnitude, phase points and refine rounds")
    p.add_argument("--methods", nargs="+")
    p.add_argument("--workers", type=int)
    p.add_argument("--failure-threshold", type=float, dest="failure_threshold")


def build_parser():
    p = argparse.ArgumentParser(prog="improper-ic", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--schema", action="store_true", help="print output CSV schemas and exit")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="cmd")

    r = sub.add_parser("region", help="rate-region sweep on a literal channel")
    _common(r)
    r.add_argument("--channel", choices=["H1", "H2", "table"])
    r.add_argument("--snr", type=float, dest="snr_db")
    r.add_argument("--n-alpha", type=int, dest="n_alpha")

    q = sub.add_parser("ratio", help="oracle / joint ratio on a random ensemble")
    _common(q)
    q.add_argument("--count", type=int)
    q.add_argument("--snr", type=float, dest="snr_db")
    q.add_argument("--channel-file", dest="channel_file")

    m = sub.add_parser("maxmin", help="average max-min rate versus SNR")
    _common(m)
    m.add_argument("--count", type=int)
    m.add_argument("--snr", type=float, nargs="+", dest="snr_db")
    m.add_argument("--var-direct", type=float, dest="var_direct")
    m.add_argument("--var-cross", type=float, dest="var_cross")
    m.add_argument("--detail", default="", help="also write per-channel rows here")

    t = sub.add_parser("table", help="separate and joint points on the literal table channel")
    _common(t)

    c = sub.add_parser("convert", help="convert between complex and real-composite forms")
    c.add_argument("--C", type=float, help="covariance (power)")
    c.add_argument("--ct", type=float, nargs=2, metavar=("RE", "IM"), help="pseudo-covariance")
    c.add_argument("--ct-polar", type=float, nargs=2, metavar=("ABS", "ARG"))
    c.add_argument("--Q", type=float, nargs=3, metavar=("Q11", "Q12", "Q22"),
                   help="real-composite covariance entries")

    g = sub.add_parser("gen-channels", help="write a seeded random channel ensemble as JSON")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--var-direct", type=float, default=1.0)
    g.add_argument("--var-cross", type=float, default=1.0)
    g.add_argument("--snr", type=float, default=0.0)
    g.add_argument("--out", default="")

    d = sub.add_parser("precode-demo", help="sample a widely linear precoder and check its statistics")
    d.add_argument("--C", type=float, default=1.0)
    d.add_argument("--ct", type=float, nargs=2, default=(0.0, 0.8), metavar=("RE", "IM"))
    d.add_argument("--n", type=int, default=1_000_000)
    d.add_argument("--seed", type=int, default=0)
    return p


_DEFAULT_SNR = {"region": [0.0], "ratio": [0.0], "maxmin": [float(x) for x in range(-10, 41, 5)],
                "table": [10.0]}
_DEFAULT_METHODS = {"region": ["proper", "separate", "joint", "oracle"],
                    "ratio": ["joint", "oracle"],
                    "maxmin": ["proper", "separate", "joint", "oracle", "tdma"],
                    "table": ["separate", "joint"]}


def _config(args):
    keys = ["out", "seed", "units", "L", "tol", "grid", "methods", "workers", "failure_threshold",
            "channel", "snr_db", "n_alpha", "count", "channel_file", "var_direct", "var_cross"]
    over = {k: getattr(args, k, None) for k in keys}
    if isinstance(over.get("snr_db"), (int, float)):
        over["snr_db"] = [float(over["snr_db"])]
    over = {k: v for k, v in over.items() if v is not None}
    base = {"kind": args.cmd, "snr_db": _DEFAULT_SNR[args.cmd], "methods": _DEFAULT_METHODS[args.cmd]}
    if args.cmd == "maxmin":
        base["var_cross"] = 0.2
    if args.cmd == "ratio":
        base["count"] = 500
    if args.config:
        cfg = ExperimentConfig.load(args.config, **over)
        cfg.kind = args.cmd
        return cfg
    base.update(over)
    return ExperimentConfig.from_dict(base)


def _emit(text, path):
    if not path:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _convert(args):
    if args.Q is not None:
        q11, q12, q22 = args.Q
        s = real_to_complex(np.array([[q11, q12], [q12, q22]]))
        out = {"C": s.C, "Ct": {"re": s.Ct.real, "im": s.Ct.imag},
               "Ct_abs": abs(s.Ct), "Ct_arg": float(np.angle(s.Ct))}
    else:
        if args.C is None:
            raise ConfigError("convert needs --Q or --C with --ct/--ct-polar")
        if args.ct_polar is not None:
            ct = args.ct_polar[0] * np.exp(1j * args.ct_polar[1])
        elif args.ct is not None:
            ct = complex(*args.ct)
        else:
            ct = 0j
        s = SignalStrategy(args.C, ct)
        Q = complex_to_real(s)
        out = {"Q": Q.tolist(), "valid": bool(validate_strategy(s))}
    print(json.dumps(out))


def _precode_demo(args):
    s = SignalStrategy(args.C, complex(*args.ct))
    chk = validate_strategy(s)
    if not chk:
        raise ConfigError(f"invalid strategy: {chk.reason}")
    f = augmented_sqrt(s)
    x = sample_improper(s, args.n, args.seed)
    C_hat, Ct_hat = empirical_stats(x)
    print(json.dumps({
        "B1": {"re": f.B1.real.tolist(), "im": f.B1.imag.tolist()},
        "B2": {"re": f.B2.real.tolist(), "im": f.B2.imag.tolist()},
        "samples": args.n, "seed": args.seed,
        "target": {"C": s.C, "Ct": {"re": s.Ct.real, "im": s.Ct.imag}},
        "empirical": {"C": float(C_hat[0, 0].real),
                      "Ct": {"re": float(Ct_hat[0, 0].real), "im": float(Ct_hat[0, 0].imag)}},
    }))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.schema:
        print(schema_text())
        return EXIT_OK
    if not args.cmd:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        if args.cmd == "convert":
            _convert(args)
        elif args.cmd == "precode-demo":
            _precode_demo(args)
        elif args.cmd == "gen-channels":
            P = 10.0 ** (args.snr / 10.0)
            chans = gen_channels(args.seed, args.count, args.var_direct, args.var_cross, P)
            hdr = {"version": __version__, "seed": args.seed, "count": args.count,
                   "var_direct": args.var_direct, "var_cross": args.var_cross, "snr_db": args.snr}
            if args.out:
                save_channels(args.out, chans, hdr)
            else:
                rows = [{"index": i, **{f"h{k + 1}{j + 1}": repr(complex(c.h[k, j]))
                                        for k in range(2) for j in range(2)}}
                        for i, c in enumerate(chans)]
                _emit(write_csv("", [f"# meta: {json.dumps(hdr, sort_keys=True)}"],
                                SCHEMAS["channels"], rows), "")
        else:
            cfg = _config(args)
            if args.cmd == "region":
                _, text = run_region(cfg)
            elif args.cmd == "ratio":
                _, summary, text = run_ratio(cfg)
                print(json.dumps(summary), file=sys.stderr)
            elif args.cmd == "maxmin":
                _, _, text = run_maxmin(cfg, args.detail)
            else:
                _, text = run_table_case(cfg)
            _emit(text, cfg.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailures as exc:
        print(f"solver failures: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK
