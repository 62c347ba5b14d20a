"""Command-line interface.

Subcommands:
    simulate   single config -> trajectory CSV
    metrics    single config -> metrics CSV row (+ JSON)
    sweep      sweep spec -> results CSV + manifest (+ checkpoint)
    fit-ridge  results CSV -> alpha/beta JSON
    purcell    conversion calculator between (g, kappa, gamma) and F_P
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import config_from_json, validate
from .grid import TwoTimeGrid
from .hilbert import build_space
from .liouville import build_liouvillian, initial_vec, propagate
from .metrics import MetricsOptions, PhotonMetrics, metrics_bundle
from .purcell import coupling_from_purcell, purcell_factor, ridge_fit
from .sweep import run_sweep, spec_from_dict


def _load_config(path):
    return validate(config_from_json(Path(path).read_text()))


def _cmd_simulate(args) -> int:
    vc = _load_config(args.config)
    space = build_space(vc)
    lv = build_liouvillian(vc, space)
    grid = TwoTimeGrid.from_params(vc.grid)
    traj = propagate(lv, initial_vec(vc, space), grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "trajectory.csv"
    traj.write_csv(path)
    print(f"wrote {path} ({len(traj.t)} samples, max trace err {traj.trace_error.max():.2e})")
    return 0


def _cmd_metrics(args) -> int:
    vc = _load_config(args.config)
    options = MetricsOptions(
        channel_mode=args.channel_mode,
        compute_channels=tuple(args.channels.split(",")),
        two_photon=not args.no_two_photon,
    )
    m = metrics_bundle(vc, options)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "metrics.csv"
    with open(csv_path, "w") as fh:
        fh.write(",".join(PhotonMetrics.CSV_COLUMNS) + "\n")
        fh.write(",".join(m.csv_row()) + "\n")
    doc = {k: getattr(m, k) for k in ("i_x", "i_xx", "v_x", "v_xx", "concurrence", "fom")}
    doc["g2bar"] = m.g2bar
    doc["warnings"] = list(m.warnings)
    doc["config_hash"] = m.config_hash
    (out / "metrics.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
    print(f"wrote {csv_path}: I_X={m.i_x:.4f} I_XX={m.i_xx:.4f} C={m.concurrence:.4f}")
    return 0


def _cmd_sweep(args) -> int:
    spec = spec_from_dict(json.loads(Path(args.spec).read_text()))
    result = run_sweep(spec, out_dir=args.out, workers=args.workers,
                       resume=args.resume, progress=not args.quiet)
    n_err = sum(1 for r in result.records if r.error is not None)
    print(f"sweep complete: {len(result.records)} points, {n_err} errors -> {args.out}/results.csv")
    return 0


def _read_csv_columns(path, columns):
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        idx = {}
        for col in columns:
            if col not in header:
                raise SystemExit(f"column {col!r} not found in {path} (have {header})")
            idx[col] = header.index(col)
        rows = {col: [] for col in columns}
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if any(parts[idx[col]] == "" for col in columns):
                continue
            for col in columns:
                rows[col].append(float(parts[idx[col]]))
    return {col: np.asarray(v) for col, v in rows.items()}


def _cmd_fit_ridge(args) -> int:
    data = _read_csv_columns(args.results, [args.fp_column, args.g_column, args.value_column])
    fit = ridge_fit(data[args.fp_column], data[args.g_column], data[args.value_column],
                    boundary=args.boundary)
    doc = {
        "alpha_uev": fit.alpha,
        "beta_uev": fit.beta,
        "residual_rms_uev": fit.residual_rms,
        "points": [{"f_p": p[0], "hbar_g": p[1]} for p in fit.points],
        "skipped_rows": list(fit.skipped_rows),
        "value_column": args.value_column,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "ridge.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    print(f"wrote {path}: hbar_g = {fit.alpha:.3f} * F_P + {fit.beta:.3f} ueV "
          f"(rms {fit.residual_rms:.3f})")
    return 0


def _cmd_purcell(args) -> int:
    if args.from_purcell is not None:
        g = coupling_from_purcell(args.from_purcell, args.e_cavity, args.q, args.hbar_gamma)
        doc = {"hbar_g_uev": g, "f_p": args.from_purcell, "e_cavity_uev": args.e_cavity,
               "q_factor": args.q, "hbar_kappa_uev": args.e_cavity / args.q}
    else:
        fp = purcell_factor(args.hbar_g, args.hbar_kappa, args.hbar_gamma, args.delta_e)
        doc = {"f_p": fp, "hbar_g_uev": args.hbar_g, "hbar_kappa_uev": args.hbar_kappa,
               "hbar_gamma_rad_uev": args.hbar_gamma, "delta_e_uev": args.delta_e}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdcascade",
                                     description="Cascade photon-emission simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="propagate a config and export the trajectory")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("metrics", help="compute the photon metrics of one config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--channels", default="X,XX")
    p.add_argument("--channel-mode", default="H", choices=["H", "V"])
    p.add_argument("--no-two-photon", action="store_true")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("sweep", help="run a sweep spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fit-ridge", help="fit hbar_g = alpha F_P + beta to sweep results")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--value-column", default="fom")
    p.add_argument("--fp-column", default="purcell.f_p")
    p.add_argument("--g-column", default="cavity.hbar_g")
    p.add_argument("--boundary", default="error", choices=["error", "skip"])
    p.set_defaults(func=_cmd_fit_ridge)

    p = sub.add_parser("purcell", help="Purcell-factor conversion calculator")
    p.add_argument("--hbar-g", type=float)
    p.add_argument("--hbar-kappa", type=float)
    p.add_argument("--hbar-gamma", type=float, required=True)
    p.add_argument("--delta-e", type=float, default=0.0)
    p.add_argument("--from-purcell", type=float,
                   help="invert: F_P -> hbar_g (requires --e-cavity and --q)")
    p.add_argument("--e-cavity", type=float)
    p.add_argument("--q", type=float)
    p.set_defaults(func=_cmd_purcell)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "purcell":
        if args.from_purcell is not None:
            if args.e_cavity is None or args.q is None:
                print("--from-purcell requires --e-cavity and --q", file=sys.stderr)
                return 2
        elif args.hbar_g is None or args.hbar_kappa is None:
            print("forward mode requires --hbar-g and --hbar-kappa", file=sys.stderr)
            return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
