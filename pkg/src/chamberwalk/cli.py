"""Command line front end.

    chamberwalk list
    chamberwalk run --instance riffle --param n=4 --mode exact-separation \\
        --mode bounds --t-max 40 --out results/

Each mode writes one table (``<mode>.csv`` or ``<mode>.json``) and the run
writes ``summary.json``. Failures print ``{"error": {...}}`` and exit 2.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import gallery
from .arrangement import block_partition, is_separating
from .errors import ChamberWalkError, NonSeparatingError, SymmetryRefused, ValidationError
from .report import CURVE_COLUMNS, dumps, exact_field, write_csv
from .sst import (
    STOPPING_RULES,
    bound_thm1,
    bound_thm3,
    conditional_deviation,
    conditional_law,
    separation_exact,
    simulate_stopping_times,
    tail_T1_curve,
    tail_T2_curve,
    tail_T3_curve,
)
from .walks import (
    RNG_ALGORITHM,
    stationary_solve,
    stationary_until_chamber,
    stationary_without_replacement,
    transition_matrix,
)

MODES = ("simulate", "exact-separation", "tails", "bounds", "stationary-crosscheck", "sst-conditional-check")
CURVE_MODES = ("exact-separation", "tails", "bounds")
THREADS_ENV = "CHAMBERWALK_THREADS"


@dataclass
class ExperimentConfig:
    instance: str
    params: dict = field(default_factory=dict)
    t_max: int = 40
    seeds: list[int] = field(default_factory=lambda: [0])
    modes: list[str] = field(default_factory=lambda: ["exact-separation", "bounds"])
    out: str = "chamberwalk-out"
    format: str = "csv"
    runs: int = 10000
    horizon: int = 8

    def validate(self) -> None:
        if self.instance not in gallery.CATALOG:
            raise ValidationError(f"unknown instance {self.instance!r}")
        if self.t_max < 0:
            raise ValidationError("t_max must be >= 0")
        if not self.modes:
            raise ValidationError("at least one mode is required")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ValidationError(f"unknown mode(s) {bad}; choose from {list(MODES)}")
        if self.format not in ("csv", "json"):
            raise ValidationError("format must be csv or json")
        if not self.seeds:
            raise ValidationError("at least one seed is required")
        if self.runs < 1 or self.horizon < 1:
            raise ValidationError("runs and horizon must be positive")


def parse_value(text: str):
    """``key=value`` values: JSON when it parses, else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    params = dict(data.get("params", {}))
    for item in args.param or []:
        if "=" not in item:
            raise ValidationError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = parse_value(v)
    cfg = ExperimentConfig(
        instance=args.instance or data.get("instance", ""),
        params=params,
        t_max=args.t_max if args.t_max is not None else int(data.get("t_max", 40)),
        seeds=args.seed or [int(s) for s in data.get("seeds", [0])],
        modes=args.mode or list(data.get("modes", ["exact-separation", "bounds"])),
        out=args.out or data.get("out", "chamberwalk-out"),
        format=args.format or data.get("format", "csv"),
        runs=args.runs if args.runs is not None else int(data.get("runs", 10000)),
        horizon=args.horizon if args.horizon is not None else int(data.get("horizon", 8)),
    )
    cfg.validate()
    return cfg


# -- mode implementations ----------------------------------------------------

class Experiment:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.inst = gallery.build(cfg.instance, cfg.params)
        self.arr = self.inst.arrangement
        self.measure = self.inst.measure
        self.measure.validate()
        self.blocks = block_partition(self.arr, self.measure)
        self.separating, self.witness = is_separating(self.arr, self.measure)
        self._k = None
        self._pi = None

    def require_separating(self, mode: str) -> None:
        if not self.separating:
            raise NonSeparatingError(f"mode {mode} needs separating weights (hyperplane {self.witness} is never left)")

    @property
    def k(self):
        if self._k is None:
            self._k = transition_matrix(self.arr, self.measure)
        return self._k

    @property
    def pi(self):
        if self._pi is None:
            self._pi = stationary_solve(self.k)
        return self._pi

    def curve_rows(self, columns: dict) -> list[list]:
        rows = []
        for t in range(self.cfg.t_max + 1):
            rows.append([t] + [columns[c][t] if c in columns else None for c in CURVE_COLUMNS[1:]])
        return rows

    def thm3_curve(self):
        cert = self.inst.certificate
        try:
            return [bound_thm3(self.arr, self.measure, cert, t) for t in range(self.cfg.t_max + 1)], None
        except SymmetryRefused as exc:
            return None, str(exc)

    def mode_exact_separation(self):
        self.require_separating("exact-separation")
        s = separation_exact(self.k, self.pi, self.cfg.t_max)
        table = (list(CURVE_COLUMNS), self.curve_rows({"s_exact": s.values}))
        return table, {"s_at_t_max": float(s[self.cfg.t_max]), "exact": isinstance(s[0], Fraction)}

    def mode_tails(self):
        self.require_separating("tails")
        t_max = self.cfg.t_max
        cols = {
            "tail_T1": tail_T1_curve(self.measure, t_max).values,
            "tail_T2": tail_T2_curve(self.blocks, t_max).values,
            "tail_T3": tail_T3_curve(self.arr, self.measure, t_max).values,
        }
        summary = {k: float(v[t_max]) for k, v in cols.items()}
        cert = self.inst.certificate
        summary["T3_is_strong_stationary"] = bool(cert is not None and cert.valid)
        return (list(CURVE_COLUMNS), self.curve_rows(cols)), summary

    def mode_bounds(self):
        t_max = self.cfg.t_max
        cols = {"bound_thm1": [bound_thm1(self.blocks, t) for t in range(t_max + 1)]}
        thm3, refusal = self.thm3_curve()
        if thm3 is not None:
            cols["bound_thm3"] = thm3
        summary = {"positive_blocks": len(self.blocks.positive), "thm3": refusal or "applied"}
        if "min_vertex_cover" in self.inst.extras:
            summary["graph_covers"] = {
                "min_vertex_cover": self.inst.extras["min_vertex_cover"],
                "min_dominating_set": self.inst.extras["min_dominating_set"],
                "vertex_transitive": self.inst.extras["vertex_transitive"],
            }
        return (list(CURVE_COLUMNS), self.curve_rows(cols)), summary

    def mode_simulate(self):
        self.require_separating("simulate")
        t_cap = max(self.cfg.t_max, 1) * 50
        threads = max(1, int(os.environ.get(THREADS_ENV, "1") or 1))

        def one(seed):
            return simulate_stopping_times(self.arr, self.measure, self.cfg.runs, seed, t_cap=t_cap)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(one, self.cfg.seeds))
        merged = {r: np.concatenate([getattr(s, r) for s in samples]) for r in STOPPING_RULES}
        n = len(merged["T1"])
        cols = {}
        for r in STOPPING_RULES:
            times = merged[r]
            cols[f"tail_{r}"] = [float(np.mean((times < 0) | (times > t))) for t in range(self.cfg.t_max + 1)]
        summary = {
            "runs": n,
            "means": {r: float(merged[r][merged[r] >= 0].mean()) for r in STOPPING_RULES},
            "unfinished": {r: int(np.sum(merged[r] < 0)) for r in STOPPING_RULES},
            "T2_le_T1": bool(np.all(merged["T2"] <= merged["T1"])),
        }
        return (list(CURVE_COLUMNS), self.curve_rows(cols)), summary

    def mode_stationary_crosscheck(self):
        self.require_separating("stationary-crosscheck")
        solve = self.pi
        wr = stationary_without_replacement(self.arr, self.measure)
        uc = stationary_until_chamber(self.arr, self.measure)
        rows = [
            [self.arr.sign_string(c), solve[c], wr[c], uc[c]] for c in self.arr.chambers
        ]
        summary = {
            "max_diff_without_replacement": solve.max_abs_diff(wr),
            "max_diff_until_chamber": solve.max_abs_diff(uc),
            "exact": solve.exact and wr.exact and uc.exact,
            "pi": {self.arr.sign_string(c): exact_field(solve[c]) or float(solve[c]) for c in self.arr.chambers},
        }
        return (["chamber", "pi_solve", "pi_without_replacement", "pi_until_chamber"], rows), summary

    def mode_sst_conditional_check(self):
        self.require_separating("sst-conditional-check")
        cert = self.inst.certificate
        uniform = None
        a = self.arr.chamber_count
        if self.measure.exact:
            from .walks import Distribution

            uniform = Distribution({c: Fraction(1, a) for c in self.arr.chambers}, True)
        rows, worst = [], {}
        for rule in STOPPING_RULES:
            target = self.pi
            for start in self.arr.chambers:
                law = conditional_law(self.arr, self.measure, rule, start, self.cfg.horizon)
                for t, tv in conditional_deviation(law, target).items():
                    rows.append([self.arr.sign_string(start), rule, t, law.hit_probability[t], tv])
                    worst[rule] = max(worst.get(rule, 0.0), tv)
        summary = {
            "horizon": self.cfg.horizon,
            "max_tv_to_pi": worst,
            "T3_certificate_valid": bool(cert is not None and cert.valid),
        }
        if uniform is not None and cert is not None and cert.valid:
            summary["pi_is_uniform"] = self.pi.max_abs_diff(uniform) == 0
        return (["start", "rule", "t", "p_hit", "tv_to_pi"], rows), summary

    def summary_header(self) -> dict:
        cert = self.inst.certificate
        return {
            "instance": self.inst.name,
            "params": self.inst.params,
            "hyperplanes": self.arr.m,
            "faces": len(self.arr),
            "chambers": self.arr.chamber_count,
            "support": len(self.measure.support),
            "separating": self.separating,
            "positive_blocks": len(self.blocks.positive),
            "certificate": cert.summary() if cert is not None else None,
            "rng": RNG_ALGORITHM,
            "seeds": self.cfg.seeds,
            "t_max": self.cfg.t_max,
        }


def _table_json(columns, rows) -> str:
    def cell(v):
        if v is None or isinstance(v, str):
            return v
        if isinstance(v, Fraction):
            return {"value": float(v), "exact": exact_field(v)}
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return int(v)
        return float(v)

    return dumps([{c: cell(v) for c, v in zip(columns, row)} for row in rows])


def _render(fmt: str, columns, rows) -> str:
    return write_csv(columns, rows) if fmt == "csv" else _table_json(columns, rows)


def run(cfg: ExperimentConfig) -> dict:
    """Run every requested mode, write its table and ``summary.json``."""
    exp = Experiment(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = exp.summary_header()
    summary["modes"] = {}
    merged = None
    for mode in cfg.modes:
        (columns, rows), info = getattr(exp, "mode_" + mode.replace("-", "_"))()
        path = out / f"{mode}.{cfg.format}"
        path.write_text(_render(cfg.format, columns, rows))
        info["file"] = path.name
        summary["modes"][mode] = info
        if mode in CURVE_MODES:
            merged = rows if merged is None else [
                [a if a is not None else b for a, b in zip(old, new)] for old, new in zip(merged, rows)
            ]
    if merged is not None:
        # exact curves side by side, so the inequality chain reads off one file
        (out / f"curves.{cfg.format}").write_text(_render(cfg.format, list(CURVE_COLUMNS), merged))
        summary["curves_file"] = f"curves.{cfg.format}"
    (out / "summary.json").write_text(dumps(summary))
    return summary


def list_instances() -> list[dict]:
    return [
        {"name": e.name, "description": e.description, "params": e.schema, "defaults": e.defaults, "modes": list(MODES)}
        for e in gallery.CATALOG.values()
    ]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chamberwalk", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    ls = sub.add_parser("list", help="show the instance catalog")
    ls.add_argument("--json", action="store_true")
    r = sub.add_parser("run", help="run an experiment")
    r.add_argument("--config", help="JSON config file; flags override it")
    r.add_argument("--instance")
    r.add_argument("--param", action="append", metavar="KEY=VALUE")
    r.add_argument("--mode", action="append", choices=MODES)
    r.add_argument("--t-max", type=int, dest="t_max")
    r.add_argument("--seed", action="append", type=int)
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "json"))
    r.add_argument("--runs", type=int, help="Monte Carlo runs per seed (simulate)")
    r.add_argument("--horizon", type=int, help="sequence length for sst-conditional-check")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        items = list_instances()
        if args.json:
            sys.stdout.write(dumps(items))
        else:
            for it in items:
                params = ", ".join(f"{k}: {v}" for k, v in it["params"].items())
                print(f"{it['name']:<15} {it['description']}  [{params}]")
            print("modes: " + ", ".join(MODES))
        return 0
    try:
        cfg = config_from_args(args)
        summary = run(cfg)
    except (ChamberWalkError, KeyError, TypeError, ValueError, OSError) as exc:
        kind = getattr(exc, "kind", type(exc).__name__)
        sys.stdout.write(json.dumps({"error": {"kind": kind, "message": str(exc)}}) + "\n")
        return 2
    sys.stdout.write(json.dumps({"ok": True, "out": cfg.out, "modes": sorted(summary["modes"])}) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
