"""Command-line front end.

Exit codes: 0 when all configured checks pass, 1 when a check fails, 2 on
any runtime error (bad arguments, blow-up, unconverged quadrature).
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
from dataclasses import fields as dc_fields

from .errors import BipemError
from .harness import Report, RunConfig, refit_from_csv, run_experiment, run_inequality_suite

_FIELD_TYPES = {f.name: f.type for f in dc_fields(RunConfig)}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "b_infinity" or key == "fit_window":
        parts = [p for p in raw.replace("(", "").replace(")", "").split(",") if p.strip()]
        return tuple(None if p.strip() == "none" else float(p) for p in parts)
    if key in ("resolution", "seed"):
        return int(raw)
    if key in ("data_kind", "mode"):
        return raw
    if key == "gauss_correction":
        return raw.lower() in ("1", "true", "yes", "on")
    return float(raw)


def load_config_file(path) -> dict:
    """key = value lines; '#' starts a comment; keys mirror RunConfig."""
    out = {}
    for line in pathlib.Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        out[key] = _parse_value(key, raw)
    return out


def _config_from_args(args) -> RunConfig:
    kw = {}
    if args.config:
        kw.update(load_config_file(args.config))
    overrides = {
        "resolution": args.resolution,
        "box_length": args.box_length,
        "gamma": args.gamma,
        "amplitude": args.amplitude,
        "t_max": args.tmax,
        "seed": args.seed,
        "mode": args.mode,
    }
    for key, val in overrides.items():
        if val is not None:
            kw[key] = val
    if args.b_infinity is not None:
        kw["b_infinity"] = _parse_value("b_infinity", args.b_infinity)
    return RunConfig(**kw)


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--box-length", dest="box_length", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--b-infinity", dest="b_infinity", default=None,
                   metavar="x,y,z")
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", default=None,
                   choices=["nonlinear", "linear", "linear_quadrature"])
    p.add_argument("--out", default="out", help="output directory")


def _emit(report: Report, out) -> int:
    report.write(out)
    print(json.dumps(report.summary(), indent=2, sort_keys=True))
    return 0 if report.passed else 1


def _cmd_simulate(args) -> int:
    config = _config_from_args(args)
    return _emit(run_experiment(config), args.out)


def _cmd_linear_decay(args) -> int:
    config = _config_from_args(args)
    if config.mode != "linear_quadrature":
        config = RunConfig(**{**config.__dict__, "mode": "linear_quadrature"})
    report = run_experiment(config)
    s = config.s
    checks = {}
    if "U" in report.fits:
        checks["U_k0_exponent"] = abs(report.fits["U"].sigma + 0.5 * s) <= 0.1
    order = [report.fits[ch].sigma for ch in ("n2", "E", "u", "U")
             if ch in report.fits]
    if len(order) == 4:
        checks["hierarchy"] = (order[0] < order[1] <= order[2] + 0.02
                               and order[2] < order[3])
    report.checks.update(checks)
    report.passed = all(checks.values()) if checks else False
    return _emit(report, args.out)


def _cmd_check_inequalities(args) -> int:
    res = args.resolution or 32
    seed = args.seed or 0
    rep = run_inequality_suite(seed=seed, resolution=res)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "inequalities.json").write_text(
        json.dumps(rep, indent=2, sort_keys=True) + "\n")
    print(json.dumps(rep, indent=2, sort_keys=True))
    ok = rep["all_stable"] and rep["sobolev_interpolation_max"] <= 1.0 + 1e-10
    return 0 if ok else 1


def _cmd_fit(args) -> int:
    lo, hi = (float(x) for x in args.window.split(","))
    fits = refit_from_csv(args.csv, (lo, hi))
    print(json.dumps({ch: f.to_dict() for ch, f in fits.items()},
                     indent=2, sort_keys=True))
    return 0


def _cmd_report(args) -> int:
    out = pathlib.Path(args.out)
    csv_path = out / "series.csv"
    if not csv_path.exists():
        raise FileNotFoundError(f"no series.csv under {out}")
    lo, hi = (float(x) for x in args.window.split(","))
    fits = refit_from_csv(csv_path, (lo, hi))
    doc = {ch: f.to_dict() for ch, f in fits.items()}
    (out / "refit.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bipem",
        description="pseudo-spectral two-fluid plasma simulator and "
                    "decay/inequality diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a trajectory and report")
    _add_run_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("linear-decay",
                       help="whole-space linear decay oracle by quadrature")
    _add_run_flags(p)
    p.set_defaults(func=_cmd_linear_decay)

    p = sub.add_parser("check-inequalities", help="inequality ensemble sweep")
    _add_run_flags(p)
    p.set_defaults(func=_cmd_check_inequalities)

    p = sub.add_parser("fit", help="re-fit channels of a stored series CSV")
    p.add_argument("csv")
    p.add_argument("--window", default="5,19", metavar="lo,hi")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("report", help="regenerate fits from a run directory")
    p.add_argument("--out", default="out")
    p.add_argument("--window", default="5,19", metavar="lo,hi")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BipemError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
