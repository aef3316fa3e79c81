"""Command-line entry point: run a sweep, emit CSV/JSON reports and figures."""

from __future__ import annotations

import argparse
import json
import sys

from .experiment import (DESIGNS, SweepSpec, desk_sweep_spec,
                         emit_full_report, paper_sweep_spec, run_sweep)
from .plots import render_sweep_figures
from .topology import ConfigurationError, load_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfswipt",
        description="Cell-free massive MIMO SWIPT simulator with RIS scattering designs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a design-comparison sweep")
    sim.add_argument("--config", help="JSON file with SystemConfig overrides")
    sim.add_argument("--sweep", default="L", help="swept parameter (default: L)")
    sim.add_argument("--values", default=None,
                     help="comma-separated sweep values, e.g. 8,16")
    sim.add_argument("--designs", default=",".join(DESIGNS),
                     help="comma-separated subset of heuristic,random,none")
    sim.add_argument("--seed", type=int, default=1)
    sim.add_argument("--out", default="out", help="output directory")
    sim.add_argument("--topologies", type=int, default=20)
    sim.add_argument("--mc-validate", action="store_true",
                     help="add Monte Carlo validation columns")
    sim.add_argument("--trials", type=int, default=20000,
                     help="MC trials per topology when --mc-validate is set")
    sim.add_argument("--paper-scale", action="store_true",
                     help="use the full-scale dimensions (ML=480, N=40)")
    sim.add_argument("--no-plots", action="store_true",
                     help="skip figure rendering")
    return parser


def _parse_values(text: str):
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        vals.append(float(tok) if "." in tok or "e" in tok.lower() else int(tok))
    return tuple(vals)


def _make_spec(args) -> SweepSpec:
    preset = paper_sweep_spec if args.paper_scale else desk_sweep_spec
    spec = preset(param=args.sweep, seed=args.seed, topologies=args.topologies,
                  trials=args.trials if args.mc_validate else 0,
                  designs=tuple(d.strip() for d in args.designs.split(",") if d.strip()))
    if args.values:
        spec = SweepSpec(param=spec.param, values=_parse_values(args.values),
                         config=spec.config, designs=spec.designs,
                         topologies=spec.topologies, trials=spec.trials,
                         seed=spec.seed, ml_product=spec.ml_product,
                         heuristic_realizations=spec.heuristic_realizations)
    if args.config:
        cfg = load_config(args.config)
        spec = SweepSpec(param=spec.param, values=spec.values, config=cfg,
                         designs=spec.designs, topologies=spec.topologies,
                         trials=spec.trials, seed=spec.seed,
                         ml_product=cfg.M * cfg.L if spec.param in ("L", "M") else None,
                         heuristic_realizations=spec.heuristic_realizations)
    return spec


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _make_spec(args)
        rows = run_sweep(spec)
        paths = emit_full_report(rows, spec, args.out)
        if not args.no_plots:
            paths["figures"] = render_sweep_figures(rows, args.out, spec.param)
        summary = {
            "rows": len(rows),
            "infeasible": sum(r.infeasible for r in rows),
            "outputs": paths,
        }
        print(json.dumps(summary, indent=1))
        return 0
    except (ConfigurationError, OSError, ValueError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
