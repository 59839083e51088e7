"""Command-line entry point: ``netsense {gen,sweep,correlate,scaling,simulate}``.

Parameters come from built-in defaults, then an optional JSON ``--config``
file, then command-line flags (flags win). ``NETSENSE_SEED`` replaces the
config-file seed but not an explicit ``--seed``. Every run writes
``manifest.json`` with the resolved configuration next to its outputs.

Exit codes: 0 success, 1 usage/config error, 2 unstable system or divergent
simulation, 3 undefined statistic.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__, analysis, dynamics, netgen, sensitivity, simulate, spectral
from .errors import (
    DivergenceError,
    GraphError,
    NetsenseError,
    ScalingError,
    UndefinedStatisticError,
    UnstableSystemError,
)

log = logging.getLogger("netsense")

EXIT_USAGE, EXIT_UNSTABLE, EXIT_UNDEFINED = 1, 2, 3

DEFAULTS = {
    "out": ".",
    "seed": 0,
    "formats": "csv,json",
    # graph
    "graph": None,
    "graph_weights": "constant",
    "kind": "er",
    "n": 100,
    "p": None,
    "m": None,
    "gamma": None,
    "k_min": 1,
    "half_degree": None,
    "rewire": None,
    "radius": None,
    "weights": "constant",
    "decoupled": False,
    # dynamics
    "order": "2",
    "omega_n": 1.0,
    "zeta": 0.05,
    "k": None,
    "g_coeffs": None,
    "safety_c": 0.1,
    "gain_scale": 1.0,
    # grid
    "omega_min": None,
    "omega_max": None,
    "points": 400,
    # command specifics
    "node_columns": False,
    "prominence_db": 3.0,
    "persistence": 5,
    "sizes": "256,512,1024,2048",
    "trials": 5,
    "mode": None,
    "workers": 1,
    "sweep_n": None,
    "slope_max": -0.2,
    "r2_min": 0.8,
    "band_min": 10,
    "omegas": None,
    "dt": None,
    "t_end": None,
    "decimate": 10,
    "eigenvectors": False,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _int_list(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


# -- argument groups ---------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--formats", help="comma list from csv,json,svg")


def _graph_args(p):
    g = p.add_argument_group("graph")
    g.add_argument("--graph", help="edge-list file (overrides --kind)")
    g.add_argument("--graph-weights", choices=["constant", "file"])
    g.add_argument("--kind", choices=netgen.KINDS)
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--m", type=int)
    g.add_argument("--gamma", type=float)
    g.add_argument("--k-min", type=int)
    g.add_argument("--half-degree", type=int, help="lattice half-degree")
    g.add_argument("--rewire", type=float)
    g.add_argument("--radius", type=float)
    g.add_argument("--path", dest="graph", help="alias of --graph")
    g.add_argument("--weights", choices=["constant", "uniform"])


def _dyn_args(p):
    g = p.add_argument_group("dynamics")
    g.add_argument("--order", choices=["1", "2", "custom"])
    g.add_argument("--omega-n", type=float)
    g.add_argument("--zeta", type=float)
    g.add_argument("--k", type=float, help="gain; default (1-c)/lambda_1 * gain-scale")
    g.add_argument("--g-coeffs", help="custom g, ascending powers, comma separated")
    g.add_argument("--safety-c", type=float)
    g.add_argument("--gain-scale", type=float)
    g.add_argument("--decoupled", action="store_const", const=True,
                   help="use A = 0 on n nodes instead of a graph")


def _grid_args(p):
    g = p.add_argument_group("frequency grid")
    g.add_argument("--omega-min", type=float)
    g.add_argument("--omega-max", type=float)
    g.add_argument("--points", type=int)


def build_parser():
    parser = _Parser(prog="netsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a graph, write edge list and stats")
    _common(p)
    _graph_args(p)

    p = sub.add_parser("sweep", help="frequency response of the mean and node sensitivity")
    _common(p)
    _graph_args(p)
    _dyn_args(p)
    _grid_args(p)
    p.add_argument("--node-columns", action="store_const", const=True)
    p.add_argument("--eigenvectors", action="store_const", const=True,
                   help="include eigenvectors in spectrum.json")
    p.add_argument("--prominence-db", type=float)

    p = sub.add_parser("correlate", help="degree vs response-magnitude correlation")
    _common(p)
    _graph_args(p)
    _dyn_args(p)
    _grid_args(p)
    p.add_argument("--persistence", type=int)

    p = sub.add_parser("scaling", help="w_1 scaling over sizes and class verdict")
    _common(p)
    _graph_args(p)
    _dyn_args(p)
    _grid_args(p)
    p.add_argument("--sizes", help="comma separated sizes")
    p.add_argument("--trials", type=int)
    p.add_argument("--mode", choices=["er", "sf"])
    p.add_argument("--workers", type=int)
    p.add_argument("--sweep-n", type=int, help="size of the graph swept for the verdict")
    p.add_argument("--slope-max", type=float)
    p.add_argument("--r2-min", type=float)
    p.add_argument("--band-min", type=int)
    p.add_argument("--prominence-db", type=float)

    p = sub.add_parser("simulate", help="time-domain cross-check of node sensitivity")
    _common(p)
    _graph_args(p)
    _dyn_args(p)
    p.add_argument("--omegas", help="comma separated forcing frequencies")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--decimate", type=int)
    return parser


def _flatten(cfg: dict) -> dict:
    out = {}
    for key, val in cfg.items():
        if key in ("graph_spec", "dynamics") and isinstance(val, dict):
            for k2, v2 in val.items():
                out["half_degree" if (key == "graph_spec" and k2 == "k") else k2] = v2
        else:
            out[key.replace("-", "_")] = val
    if "g_coeffs" in out and isinstance(out["g_coeffs"], list):
        out["g_coeffs"] = ",".join(repr(float(c)) for c in out["g_coeffs"])
        out.setdefault("order", "custom")
    if "order" in out:
        out["order"] = str(out["order"])
    for key in ("sizes", "omegas"):
        if isinstance(out.get(key), list):
            out[key] = ",".join(str(v) for v in out[key])
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file, ``NETSENSE_SEED`` and flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise GraphError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(_flatten(file_cfg)) - set(DEFAULTS) - {"command"}
        if unknown:
            raise GraphError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(_flatten(file_cfg))
    env_seed = os.environ.get("NETSENSE_SEED")
    if env_seed is not None:
        try:
            cfg["seed"] = int(env_seed)
        except ValueError as exc:
            raise GraphError(f"NETSENSE_SEED is not an integer: {env_seed!r}") from exc
    for key, val in vars(args).items():
        if key in DEFAULTS and val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    return cfg


# -- building blocks ---------------------------------------------------------------

def graph_spec(cfg: dict, n: int | None = None) -> netgen.GraphSpec:
    if cfg["graph"]:
        weights = "file" if cfg["graph_weights"] == "file" else "constant"
        return netgen.GraphSpec("file", path=cfg["graph"], weights=weights, seed=cfg["seed"])
    return netgen.GraphSpec(
        kind=cfg["kind"],
        n=int(n if n is not None else cfg["n"]),
        p=cfg["p"],
        m=cfg["m"],
        gamma=cfg["gamma"],
        k_min=cfg["k_min"],
        k=cfg["half_degree"],
        rewire=cfg["rewire"],
        radius=cfg["radius"],
        weights=cfg["weights"],
        seed=cfg["seed"],
    )


def load_system(cfg: dict):
    """Graph (or ``None`` when decoupled), interaction matrix and decomposition."""
    if cfg["decoupled"]:
        a = netgen.InteractionMatrix.zeros(int(cfg["n"]))
        return None, a, spectral.decompose(a)
    g = netgen.generate(graph_spec(cfg))
    a = netgen.interaction_matrix(g)
    return g, a, spectral.decompose(a)


def build_dynamics(cfg: dict, lambda_1: float) -> dynamics.NodalDynamics:
    order = str(cfg["order"])
    if order == "custom":
        if not cfg["g_coeffs"]:
            raise GraphError("order 'custom' needs --g-coeffs")
        return dynamics.custom(_float_list(cfg["g_coeffs"]))
    k = cfg["k"]
    if k is None:
        lam = lambda_1 if lambda_1 > 0 else 1.0
        k = (1.0 - cfg["safety_c"]) / lam * cfg["gain_scale"]
    if order == "1":
        return dynamics.first_order(cfg["omega_n"], k)
    return dynamics.second_order(cfg["omega_n"], cfg["zeta"], k)


def build_grid(cfg: dict, dyn) -> sensitivity.FrequencyGrid:
    wn = dyn.natural_frequency
    lo = cfg["omega_min"] if cfg["omega_min"] is not None else 1e-2 * wn
    hi = cfg["omega_max"] if cfg["omega_max"] is not None else 1e2 * wn
    return sensitivity.log_grid(lo, hi, int(cfg["points"]))


class Run:
    """Output directory bookkeeping and the manifest."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.formats = {f.strip() for f in str(cfg["formats"]).split(",") if f.strip()}
        bad = self.formats - {"csv", "json", "svg"}
        if bad:
            raise GraphError(f"unknown output formats {sorted(bad)}")
        self.outputs: list[str] = []

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def write_text(self, name: str, text: str) -> None:
        with open(self.path(name), "w", newline="") as fh:
            fh.write(text)

    def write_json(self, name: str, obj) -> None:
        self.write_text(name, json.dumps(obj, indent=1) + "\n")

    def finish(self) -> None:
        manifest = {
            "command": self.cfg["command"],
            "seed": self.cfg["seed"],
            "config": {k: self.cfg[k] for k in sorted(self.cfg)},
            "versions": {
                "netsense": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "outputs": self.outputs,
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")


# -- commands ------------------------------------------------------------------------

def cmd_gen(cfg: dict) -> int:
    run = Run(cfg)
    g = netgen.generate(graph_spec(cfg))
    netgen.write_edge_list(g, run.path("graph.txt"))
    stats = g.stats()
    run.write_json("graph_stats.json", stats)
    print(json.dumps({k: stats[k] for k in ("n", "edges", "kappa")}))
    run.finish()
    return 0


def cmd_sweep(cfg: dict) -> int:
    run = Run(cfg)
    g, a, dec = load_system(cfg)
    dyn = build_dynamics(cfg, float(dec.eigenvalues[0]))
    grid = build_grid(cfg, dyn)
    nodes = "spectral" if cfg["node_columns"] else None
    sw = sensitivity.sweep(a, dec, dyn, grid, nodes=nodes)
    peaks = analysis.peak_indices(sw, cfg["prominence_db"])
    summary = {
        "n": a.n,
        "dynamics": dyn.to_dict(),
        "lambda_1": float(dec.eigenvalues[0]),
        "w1": float(dec.weights[0]),
        "residue": dec.residue,
        "stability_margin": dynamics.is_stable(dyn, float(dec.eigenvalues[0])).margin,
        "peak_count": int(len(peaks)),
        "peak_omegas": [float(sw.omegas[i]) for i in peaks],
        "skipped_omegas": list(sw.skipped),
    }
    if run.wants("csv"):
        run.write_text("sweep.csv", sw.to_csv(node_columns=bool(cfg["node_columns"])))
    if run.wants("json"):
        run.write_json("sweep.json", summary)
        run.write_json("spectrum.json", dec.to_dict(eigenvectors=bool(cfg["eigenvectors"])))
    if run.wants("svg"):
        from .plotting import bode_svg

        ref = None
        if dyn.order != "custom":
            ref = dynamics.closed_loop_limit_eval(dyn, 1j * sw.omegas)
        bode_svg(sw, run.path("bode.svg"), reference=ref)
    print(json.dumps({k: summary[k] for k in ("lambda_1", "w1", "residue", "peak_count")}))
    run.finish()
    return 0


def cmd_correlate(cfg: dict) -> int:
    run = Run(cfg)
    g, a, dec = load_system(cfg)
    if g is None:
        raise UndefinedStatisticError("decoupled system has constant degrees")
    dyn = build_dynamics(cfg, float(dec.eigenvalues[0]))
    grid = build_grid(cfg, dyn)
    sw = sensitivity.sweep(a, dec, dyn, grid)
    curve = analysis.degree_correlation(g, sw)
    cross = analysis.find_crossover(curve, int(cfg["persistence"]))
    report = {
        "omega_cross": cross,
        "omega_n": dyn.omega_n,
        "spearman_min": float(np.nanmin(curve.spearman)),
        "spearman_max": float(np.nanmax(curve.spearman)),
    }
    if run.wants("csv"):
        run.write_text("correlation.csv", curve.to_csv())
    if run.wants("json"):
        run.write_json("correlation.json", curve.to_dict())
        run.write_json("crossover.json", report)
    if run.wants("svg"):
        from .plotting import correlation_svg

        correlation_svg(curve, run.path("correlation.svg"), cross)
    print("no crossover" if cross is None else f"crossover at omega = {cross:.6g}")
    run.finish()
    return 0


SF_KINDS = ("ba", "powerlaw-config")


def cmd_scaling(cfg: dict) -> int:
    run = Run(cfg)
    if cfg["graph"] or cfg["decoupled"]:
        raise GraphError("scaling needs a generated graph family (--kind)")
    sizes = _int_list(cfg["sizes"])
    mode = cfg["mode"] or ("sf" if cfg["kind"] in SF_KINDS else "er")
    template = graph_spec(cfg, n=sizes[0])
    res = analysis.weight_scaling(template, sizes, int(cfg["trials"]), mode, int(cfg["workers"]))

    sweep_n = int(cfg["sweep_n"] or sizes[-1])
    g = netgen.generate(replace(template, n=sweep_n))
    a = netgen.interaction_matrix(g)
    dec = spectral.decompose(a)
    dyn = build_dynamics(cfg, float(dec.eigenvalues[0]))
    sw = sensitivity.sweep(a, dec, dyn, build_grid(cfg, dyn), nodes=None)
    thresholds = {k: cfg[k] for k in ("slope_max", "r2_min", "band_min")}
    verdict = analysis.classify(res, sw, thresholds, cfg["prominence_db"])

    if run.wants("json"):
        run.write_json("scaling.json", res.to_dict())
        run.write_json("verdict.json", json.loads(verdict.to_json()))
    if run.wants("csv"):
        run.write_text("scaling.csv", res.to_csv())
        run.write_text("sweep.csv", sw.to_csv())
    if run.wants("svg"):
        from .plotting import bode_svg, scaling_svg

        scaling_svg(res, run.path("scaling.svg"))
        bode_svg(sw, run.path("bode.svg"))
    print(verdict.to_json())
    run.finish()
    return 0


def cmd_simulate(cfg: dict) -> int:
    run = Run(cfg)
    g, a, dec = load_system(cfg)
    lam1 = float(dec.eigenvalues[0])
    dyn = build_dynamics(cfg, lam1)
    if dyn.order == "custom":
        raise GraphError("simulate supports canonical first/second-order dynamics only")
    sensitivity.check_stability(dec, dyn)
    wn = dyn.omega_n
    omegas = _float_list(cfg["omegas"]) if cfg["omegas"] else list(
        np.logspace(math.log10(wn / 4), math.log10(4 * wn), 5)
    )
    rows = []
    for idx, om in enumerate(omegas):
        if cfg["dt"] is not None or cfg["t_end"] is not None:
            auto = simulate.auto_config(dyn, om, lam1)
            sim_cfg = simulate.SimConfig(
                cfg["dt"] if cfg["dt"] is not None else auto.dt,
                cfg["t_end"] if cfg["t_end"] is not None else auto.t_end,
                om,
            )
        else:
            sim_cfg = simulate.auto_config(dyn, om, lam1)
        traj = simulate.simulate_forced(a, dyn, sim_cfg)
        ss = simulate.steady_state(traj)
        ref = sensitivity.node_sensitivity(a, dyn, om)
        amp_err = 100.0 * np.abs(ss.amplitude / np.abs(ref) - 1.0)
        ph_err = np.degrees(np.abs(np.angle(np.exp(1j * (ss.phase - np.angle(ref))))))
        for i in range(a.n):
            rows.append((om, i, ss.amplitude[i], abs(ref[i]), amp_err[i],
                         math.degrees(ss.phase[i]), math.degrees(np.angle(ref[i])), ph_err[i]))
        if run.wants("csv"):
            run.write_text(f"trajectory_{idx}.csv", traj.to_csv(int(cfg["decimate"])))
    header = ["omega", "node", "sim_gain", "freq_gain", "gain_err_pct",
              "sim_phase_deg", "freq_phase_deg", "phase_err_deg"]
    report = {
        "omegas": [float(o) for o in omegas],
        "max_gain_err_pct": float(max(r[4] for r in rows)),
        "max_phase_err_deg": float(max(r[7] for r in rows)),
    }
    if run.wants("csv"):
        lines = [",".join(header)]
        for r in rows:
            lines.append(",".join([format(r[0], ".17g"), str(r[1])]
                                  + [format(float(v), ".17g") for v in r[2:]]))
        run.write_text("crosscheck.csv", "\r\n".join(lines) + "\r\n")
    if run.wants("json"):
        run.write_json("crosscheck.json", report)
    print(json.dumps(report))
    run.finish()
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "sweep": cmd_sweep,
    "correlate": cmd_correlate,
    "scaling": cmd_scaling,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (UnstableSystemError, DivergenceError) as exc:
        print(f"netsense: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (UndefinedStatisticError, ScalingError) as exc:
        print(f"netsense: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (NetsenseError, ValueError, KeyError, TypeError) as exc:
        print(f"netsense: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
