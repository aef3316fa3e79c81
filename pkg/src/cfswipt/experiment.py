"""Sweep runner reproducing the design-comparison experiments, plus report emission."""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .metrics import evaluate_closed_form
from .oracles import build_instance, mc_received_energy, mc_sinr
from .ris_channel import build_correlation_model
from .scattering import heuristic_scattering, random_scattering
from .topology import (ConfigurationError, SystemConfig, build_config,
                       generate_topology, with_dimensions)

DESIGNS = ("heuristic", "random", "none")
_DESIGN_STREAM = {"heuristic": 1, "random": 2, "none": 3}
_MC_STREAM = 9
_TOPOLOGY_STREAM = 0

CSV_HEADER = ["design", "param", "value", "se_cf", "se_mc", "se_err",
              "he_bound", "he_mc", "he_err", "seed"]

WORKERS_ENV = "CFSWIPT_WORKERS"


@dataclass(frozen=True)
class SweepSpec:
    """One design-comparison experiment: a swept parameter against fixed config."""

    param: str
    values: tuple
    config: SystemConfig
    designs: tuple = DESIGNS
    topologies: int = 20
    trials: int = 0                  # MC trials per topology; 0 = closed form only
    seed: int = 0
    ml_product: int | None = None    # hold M*L fixed while sweeping L or M
    heuristic_realizations: int = 100

    def __post_init__(self):
        if not self.values:
            raise ConfigurationError("sweep needs a nonempty value list")
        unknown = set(self.designs) - set(DESIGNS)
        if unknown:
            raise ConfigurationError(f"unknown designs: {sorted(unknown)}")
        if self.trials and self.trials < 1000:
            raise ConfigurationError("MC validation needs at least 1000 trials")


@dataclass
class ResultRow:
    """One (design, swept value) aggregate over topologies."""

    design: str
    param: str
    value: float
    se_cf: float | None = None
    se_mc: float | None = None
    se_err: float | None = None
    he_bound: float | None = None     # per-EU average of the closed-form bound
    he_sum: float | None = None       # summed over EUs
    he_mc: float | None = None
    he_err: float | None = None
    seed: int = 0
    topologies: int = 0
    wall_clock: float = 0.0
    infeasible: bool = False
    note: str = ""


def _resolve_config(spec: SweepSpec, value):
    """Materialize the config at one sweep point, or explain why it cannot exist."""
    cfg = spec.config
    if spec.param in ("L", "M") and spec.ml_product:
        if spec.ml_product % int(value):
            raise ConfigurationError(
                f"{spec.param}={value} does not divide ML={spec.ml_product}")
        other = spec.ml_product // int(value)
        if spec.param == "L":
            cfg = with_dimensions(cfg, L=int(value), M=other)
        else:
            cfg = with_dimensions(cfg, M=int(value), L=other)
    elif spec.param in {f.name for f in fields(SystemConfig)}:
        current = getattr(cfg, spec.param)
        cast = type(current)(value)
        cfg = with_dimensions(cfg, **{spec.param: cast})
    else:
        raise ConfigurationError(f"unknown sweep parameter: {spec.param!r}")
    if cfg.L <= cfg.K:
        raise ConfigurationError(f"L={cfg.L} <= K={cfg.K}: zero-forcing infeasible")
    return cfg


def _make_theta(design, cfg, net, corr, n_real, rng):
    if design == "heuristic":
        return heuristic_scattering(net, corr, cfg, n_real, rng)
    if design == "random":
        return random_scattering(cfg.N, rng)
    return None


def _topology_task(args):
    """Evaluate every requested design on one (sweep value, topology) pair.

    Random streams are keyed on (topology index, purpose) only, never on the
    sweep value: topologies nest across sweep points, designs see the same
    network, and Monte Carlo draws are paired (common random numbers), so
    design and sweep comparisons are differences of coupled quantities.
    """
    spec, iv, value, it, cfg = args
    rng_topo = np.random.default_rng(
        np.random.SeedSequence(entropy=spec.seed, spawn_key=(it, _TOPOLOGY_STREAM)))
    net = generate_topology(cfg, rng_topo)
    corr = build_correlation_model(cfg, net)

    out = {}
    for design in spec.designs:
        rng_design = np.random.default_rng(
            np.random.SeedSequence(entropy=spec.seed,
                                   spawn_key=(it, _DESIGN_STREAM[design])))
        theta = _make_theta(design, cfg, net, corr, spec.heuristic_realizations,
                            rng_design)
        inst = build_instance(cfg, net, corr, theta)
        report = evaluate_closed_form(cfg, net.a, inst.eta_iu, inst.eta_eu,
                                      inst.gamma_iu, inst.gamma_eu,
                                      net.beta_iu, inst.delta)
        rec = {
            "se_cf": report.mean_se,
            "he_bound": report.mean_he,
            "he_sum": report.sum_he,
        }
        if spec.trials:
            rng_mc = np.random.default_rng(
                np.random.SeedSequence(entropy=spec.seed,
                                       spawn_key=(it, _MC_STREAM)))
            batches = min(100, spec.trials // 10)
            sinr_mc = mc_sinr(inst, spec.trials, rng_mc, batches=batches)
            energy_mc = mc_received_energy(inst, spec.trials, rng_mc,
                                           batches=batches)
            prelog = 1.0 - cfg.tau / cfg.tau_c
            report.sinr_mc = sinr_mc.sinr
            report.se_mc = prelog * np.log2(1.0 + sinr_mc.sinr)
            report.energy_mc = energy_mc.energy
            report.he_mc = energy_mc.he
            rec["se_mc"] = float(report.se_mc.mean())
            rec["he_mc"] = float(np.mean(energy_mc.he))
        out[design] = rec
    return out


def run_sweep(spec: SweepSpec) -> list[ResultRow]:
    """Run the sweep and aggregate one ResultRow per (design, value).

    Deterministic for a fixed spec: every random stream is derived from
    (seed, value index, topology index) and reduction order is fixed, so the
    worker count never changes the result.
    """
    rows: list[ResultRow] = []
    workers = max(1, int(os.environ.get(WORKERS_ENV, "1")))

    for iv, value in enumerate(spec.values):
        t0 = time.perf_counter()
        try:
            cfg = _resolve_config(spec, value)
        except ConfigurationError as exc:
            for design in spec.designs:
                rows.append(ResultRow(design=design, param=spec.param,
                                      value=float(value), seed=spec.seed,
                                      infeasible=True, note=str(exc)))
            continue

        tasks = [(spec, iv, value, it, cfg) for it in range(spec.topologies)]
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_topology_task, tasks))
        else:
            results = [_topology_task(t) for t in tasks]
        elapsed = time.perf_counter() - t0

        for design in spec.designs:
            per_topo = [r[design] for r in results]
            row = ResultRow(design=design, param=spec.param, value=float(value),
                            seed=spec.seed, topologies=spec.topologies,
                            wall_clock=elapsed)
            row.se_cf = float(np.mean([p["se_cf"] for p in per_topo]))
            row.he_bound = float(np.mean([p["he_bound"] for p in per_topo]))
            row.he_sum = float(np.mean([p["he_sum"] for p in per_topo]))
            if spec.trials:
                se_vals = np.array([p["se_mc"] for p in per_topo])
                he_vals = np.array([p["he_mc"] for p in per_topo])
                row.se_mc = float(se_vals.mean())
                row.he_mc = float(he_vals.mean())
                row.se_err = _topo_se(se_vals)
                row.he_err = _topo_se(he_vals)
            else:
                row.se_err = _topo_se(np.array([p["se_cf"] for p in per_topo]))
                row.he_err = _topo_se(np.array([p["he_bound"] for p in per_topo]))
            rows.append(row)
    return rows


def _topo_se(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def emit_report(rows: list[ResultRow], fmt: str, path) -> None:
    """Write rows as CSV (fixed header) or a JSON mirror with full row detail."""
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in rows:
                writer.writerow([
                    r.design, r.param, _fmt(r.value), _fmt(r.se_cf),
                    _fmt(r.se_mc), _fmt(r.se_err), _fmt(r.he_bound),
                    _fmt(r.he_mc), _fmt(r.he_err), str(r.seed),
                ])
    elif fmt == "json":
        doc = {"rows": [asdict(r) for r in rows]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format: {fmt!r}")


def emit_full_report(rows: list[ResultRow], spec: SweepSpec, out_dir,
                     stem: str = "sweep") -> dict:
    """Write the CSV, the JSON mirror with the embedded config, and return paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    json_path = os.path.join(out_dir, f"{stem}.json")
    emit_report(rows, "csv", csv_path)
    doc = {
        "spec": {
            "param": spec.param,
            "values": list(spec.values),
            "designs": list(spec.designs),
            "topologies": spec.topologies,
            "trials": spec.trials,
            "seed": spec.seed,
            "ml_product": spec.ml_product,
            "heuristic_realizations": spec.heuristic_realizations,
        },
        "config": asdict(spec.config),
        "rows": [asdict(r) for r in rows],
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return {"csv": csv_path, "json": json_path}


def parse_report_json(path) -> list[ResultRow]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return [ResultRow(**rec) for rec in doc["rows"]]


# Comparison-run defaults. The physical-unit config (1 W downlink, pure
# path-loss RIS links) leaves the harvester saturated and the RIS cascade
# ~13 orders below the direct links, so no design comparison is visible
# there; these presets boost the RIS-side links and lower the normalized
# downlink SNR so the designs separate inside the harvester's responsive
# range. The desk preset also shrinks the area with the antenna count to
# keep the AP density (and so the per-link pilot quality) of the full-scale
# setup. See README for the full rationale.
DESK_RIS_GAIN_DB = 68.0
PAPER_RIS_GAIN_DB = 65.0
COMPARISON_DL_SNR = 0.5
DESK_AREA_M = 450.0


def desk_config(**overrides) -> SystemConfig:
    base = {
        "M": 12, "L": 8, "K": 3, "J": 5, "N_H": 4, "N_V": 4,
        "area_side": DESK_AREA_M,
        "ris_link_gain_db": DESK_RIS_GAIN_DB,
        "rho_d": COMPARISON_DL_SNR,
    }
    base.update(overrides)
    return build_config(base)


def paper_config(**overrides) -> SystemConfig:
    base = {
        "M": 24, "L": 20, "K": 3, "J": 5, "N_H": 8, "N_V": 5,
        "ris_link_gain_db": PAPER_RIS_GAIN_DB,
        "rho_d": COMPARISON_DL_SNR,
    }
    base.update(overrides)
    return build_config(base)


def desk_sweep_spec(param: str = "L", values=(8, 16), seed: int = 1,
                    topologies: int = 20, trials: int = 0,
                    designs=DESIGNS) -> SweepSpec:
    cfg = desk_config()
    return SweepSpec(param=param, values=tuple(values), config=cfg,
                     designs=tuple(designs), topologies=topologies,
                     trials=trials, seed=seed, ml_product=cfg.M * cfg.L)


def paper_sweep_spec(param: str = "L", values=(8, 16, 24), seed: int = 1,
                     topologies: int = 20, trials: int = 0,
                     designs=DESIGNS) -> SweepSpec:
    cfg = paper_config()
    return SweepSpec(param=param, values=tuple(values), config=cfg,
                     designs=tuple(designs), topologies=topologies,
                     trials=trials, seed=seed, ml_product=cfg.M * cfg.L)
