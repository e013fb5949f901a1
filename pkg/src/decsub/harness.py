"""Experiment orchestration: data, config, runs, CSV/SVG output.

A config describes a grid of (algorithm, topology, seed) cells over a shared
objective stream built from ratings data (real CSV or synthetic).  Each cell
runs to a Trace, is evaluated against the offline continuous-greedy
benchmark, and lands as one CSV plus a metadata text file; an aggregate SVG
shows the mean regret-ratio curves.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algorithms as alg
from .errors import (
    DataInsufficientError,
    InvalidParameterError,
    ParseError,
)
from .evaluation import alpha_regret, audit_counters, offline_opt, probe_report
from .network import build_topology, metropolis_weights
from .objectives import facility_stream, quadratic_stream
from .region import FeasibleRegion

CSV_FIELDS = ["round", "node", "algorithm", "topology", "seed", "reward",
              "cum_regret", "regret_ratio", "grad_queries", "exchanges"]

RATING_LEVELS = tuple(np.arange(0.5, 5.01, 0.5))


def ingest_ratings(path, n_movies: int, horizon: int, users_per_round: int):
    """Read a userId,movieId,rating[,timestamp] CSV into per-round blocks.

    Users are ordered by first appearance; the first horizon * users_per_round
    users are kept and sliced into contiguous rounds.  Rows whose movie id is
    outside [0, n_movies) are skipped (counted in the report).  Returns
    (blocks, report) where blocks[t] is a (users_per_round, n_movies) array.
    """
    user_order = []
    user_rows = {}
    skipped = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (lineno == 1 and not _is_numeric(row[0])):
                continue  # optional header
            if len(row) < 3:
                raise ParseError(f"expected at least 3 columns, got {row!r}",
                                 lineno)
            try:
                user = int(row[0])
                movie = int(row[1])
                rating = float(row[2])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if user not in user_rows:
                user_order.append(user)
                user_rows[user] = {}
            if 0 <= movie < n_movies:
                user_rows[user][movie] = rating
            else:
                skipped += 1
    needed = horizon * users_per_round
    if len(user_order) < needed:
        raise DataInsufficientError(
            f"need {needed} users, file has {len(user_order)}")
    blocks = []
    for t in range(horizon):
        block = np.zeros((users_per_round, n_movies))
        for slot, user in enumerate(
                user_order[t * users_per_round:(t + 1) * users_per_round]):
            for movie, rating in user_rows[user].items():
                block[slot, movie] = rating
        blocks.append(block)
    report = {"users_kept": needed, "users_seen": len(user_order),
              "rows_skipped_out_of_range": skipped}
    return blocks, report


def _is_numeric(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def partition_users(round_block: np.ndarray, n_nodes: int):
    """Contiguous equal slices of a round's users, one per node."""
    total = round_block.shape[0]
    if total % n_nodes:
        raise InvalidParameterError(
            f"{total} users not divisible by {n_nodes} nodes")
    per = total // n_nodes
    return [round_block[i * per:(i + 1) * per] for i in range(n_nodes)]


def synth_ratings(seed: int, horizon: int, users_per_round: int,
                  n_movies: int, levels=RATING_LEVELS, rate_prob: float = 0.1):
    """Synthetic stand-in for a ratings corpus; deterministic in seed.

    Each user rates each movie with probability rate_prob at a uniformly
    chosen level.
    """
    levels = np.asarray(levels, dtype=float)
    if np.any(levels < 0.5 - 1e-12) or np.any(levels > 5.0 + 1e-12):
        raise InvalidParameterError("levels must lie in [0.5, 5.0]")
    rng = np.random.default_rng(seed)
    blocks = []
    for _ in range(horizon):
        rated = rng.random((users_per_round, n_movies)) < rate_prob
        vals = rng.choice(levels, size=(users_per_round, n_movies))
        blocks.append(np.where(rated, vals, 0.0))
    return blocks


@dataclass
class ExperimentConfig:
    n_nodes: int = 5
    n_movies: int = 20
    horizon: int = 256
    users_per_round: int = 10
    budget: float = 3.0
    upper: float = 1.0
    sigma: float = 0.1
    topologies: tuple = ("complete",)
    edge_prob: float = 0.4
    topology_seed: int = 0
    algorithms: tuple = ("mono_dmfw", "dobga")
    mono_phases: int = None     # default: suggest_blocking(horizon)
    mono_blocks: int = None
    mono_gamma: float = None    # default: horizon ** (-1/5)
    dobga_grad_samples: int = 1
    dmfw_phases: int = None     # default: round(horizon ** 1.5)
    data_source: str = "synthetic"   # or a ratings CSV path
    data_seed: int = 12345
    seeds: tuple = (1, 2, 3, 4, 5)
    fw_steps: int = 200
    out_dir: str = "out"
    save_traces: bool = True
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.users_per_round % self.n_nodes:
            raise InvalidParameterError(
                "users per round must be divisible by the node count")
        if "mono_dmfw" in self.algorithms:
            if self.mono_phases is None or self.mono_blocks is None:
                k, q = alg.suggest_blocking(self.horizon)
                if self.mono_phases is None:
                    self.mono_phases = k
                if self.mono_blocks is None:
                    self.mono_blocks = q
            if self.mono_phases * self.mono_blocks != self.horizon:
                raise InvalidParameterError("horizon must equal K * Q")
        if self.mono_gamma is None:
            self.mono_gamma = float(self.horizon) ** (-0.2)
        if self.dmfw_phases is None:
            self.dmfw_phases = int(round(self.horizon ** 1.5))

    @classmethod
    def from_toml(cls, path):
        try:
            import tomllib as toml_reader
        except ImportError:
            import tomli as toml_reader
        with open(path, "rb") as fh:
            raw = toml_reader.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict):
        exp = raw.get("experiment", {})
        region = raw.get("region", {})
        data = raw.get("data", {})
        kwargs = {
            "n_nodes": exp.get("nodes", 5),
            "n_movies": region.get("n", exp.get("movies", 20)),
            "horizon": exp.get("horizon", 256),
            "users_per_round": exp.get("users_per_round", 10),
            "budget": region.get("budget", 3.0),
            "upper": region.get("upper", 1.0),
            "sigma": exp.get("sigma", 0.1),
            "topologies": tuple(exp.get("topologies", ["complete"])),
            "edge_prob": exp.get("edge_prob", 0.4),
            "topology_seed": exp.get("topology_seed", 0),
            "algorithms": tuple(exp.get("algorithms",
                                        ["mono_dmfw", "dobga"])),
            "seeds": tuple(exp.get("seeds", [1, 2, 3, 4, 5])),
            "out_dir": exp.get("out", "out"),
            "save_traces": exp.get("save_traces", True),
            "data_source": data.get("source", "synthetic"),
            "data_seed": data.get("seed", 12345),
            "fw_steps": raw.get("eval", {}).get("fw_steps", 200),
        }
        mono = raw.get("mono_dmfw", {})
        kwargs["mono_phases"] = mono.get("phases")
        kwargs["mono_blocks"] = mono.get("blocks")
        kwargs["mono_gamma"] = mono.get("gamma")
        kwargs["dobga_grad_samples"] = raw.get("dobga", {}).get(
            "grad_samples", 1)
        kwargs["dmfw_phases"] = raw.get("dmfw", {}).get("phases")
        return cls(**kwargs)


def build_stream(cfg: ExperimentConfig):
    """Objective stream shared by all cells of one experiment."""
    if cfg.data_source == "synthetic":
        rounds = synth_ratings(cfg.data_seed, cfg.horizon,
                               cfg.users_per_round, cfg.n_movies)
        report = {"source": "synthetic", "seed": cfg.data_seed}
    elif cfg.data_source == "quadratic":
        stream = quadratic_stream(cfg.horizon, cfg.n_nodes, cfg.n_movies,
                                  sigma=cfg.sigma, seed=cfg.data_seed)
        return stream, {"source": "quadratic", "seed": cfg.data_seed}
    else:
        rounds, report = ingest_ratings(cfg.data_source, cfg.n_movies,
                                        cfg.horizon, cfg.users_per_round)
        report["source"] = str(cfg.data_source)
    blocks = [partition_users(block, cfg.n_nodes) for block in rounds]
    return facility_stream(blocks, sigma=cfg.sigma), report


def build_region(cfg: ExperimentConfig):
    return FeasibleRegion(cfg.n_movies, upper=np.full(cfg.n_movies,
                                                      float(cfg.upper)),
                          budget=cfg.budget)


def _make_config(cfg, name):
    if name == "mono_dmfw":
        return alg.MonoDmfwConfig(cfg.mono_phases, cfg.mono_blocks,
                                  cfg.mono_gamma)
    if name == "dobga":
        return alg.DobgaConfig(grad_samples=cfg.dobga_grad_samples)
    if name == "dmfw":
        return alg.DmfwConfig(cfg.dmfw_phases)
    raise InvalidParameterError(f"unknown algorithm {name!r}")


_RUNNERS = {"mono_dmfw": alg.run_mono_dmfw, "dobga": alg.run_dobga,
            "dmfw": alg.run_dmfw}


def run_cell(stream, weights, region, algorithm: str, cfg: ExperimentConfig,
             seed: int):
    return _RUNNERS[algorithm](stream, weights, region,
                               _make_config(cfg, algorithm), seed)


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run the whole grid and write CSVs, metadata, and the aggregate SVG.

    A failing cell is recorded and skipped; the other cells proceed.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stream, data_report = build_stream(cfg)
    region = build_region(cfg)
    x_star, bench_value = offline_opt(stream, region, cfg.fw_steps)
    results = {"cells": [], "failures": [], "csv_paths": []}

    for topology in cfg.topologies:
        graph = build_topology(topology, cfg.n_nodes,
                               edge_prob=cfg.edge_prob,
                               seed=cfg.topology_seed)
        weights = metropolis_weights(graph)
        for algorithm in cfg.algorithms:
            for seed in cfg.seeds:
                tag = f"{algorithm}_{topology}_seed{seed}"
                try:
                    stream.reset_counters()
                    trace = run_cell(stream, weights, region, algorithm,
                                     cfg, seed)
                    trace.meta["topology"] = topology
                    report = alpha_regret(trace, stream, x_star,
                                          region=region)
                    audit = audit_counters(trace)
                    probes = probe_report(trace)
                except Exception as exc:  # keep other cells alive
                    results["failures"].append({"tag": tag,
                                                "error": repr(exc)})
                    continue
                csv_path = out / f"{tag}.csv"
                write_cell_csv(csv_path, trace, report, algorithm, topology,
                               seed)
                write_meta(out / f"meta_{tag}.txt", trace, report, audit,
                           probes, data_report, bench_value, cfg)
                if cfg.save_traces:
                    trace.save(out / f"{tag}_trace.npz")
                results["csv_paths"].append(str(csv_path))
                results["cells"].append(
                    {"tag": tag, "algorithm": algorithm,
                     "topology": topology, "seed": seed,
                     "final_ratio": report.final_ratio.tolist(),
                     "probes": probes, "audit": audit})
    if results["csv_paths"]:
        svg = out / "ratio_curves.svg"
        emit_plots(results["csv_paths"], svg)
        results["svg"] = str(svg)
    return results


def write_cell_csv(path, trace, report, algorithm, topology, seed):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for t in range(trace.horizon):
            for i in range(trace.node_count):
                writer.writerow([
                    t + 1, i, algorithm, topology, seed,
                    f"{trace.rewards[t, i]:.10g}",
                    f"{report.cum_regret[t, i]:.10g}",
                    f"{report.ratio[t, i]:.10g}",
                    int(trace.grad_queries[t, i]),
                    int(trace.exchanges[t, i]),
                ])


def write_meta(path, trace, report, audit, probes, data_report, bench_value,
               cfg):
    lines = []
    for key, val in sorted(trace.meta.items()):
        lines.append(f"{key} = {val}")
    lines.append(f"benchmark_value = {bench_value}")
    lines.append(f"benchmark_method = continuous_greedy "
                 f"(approximate, steps={cfg.fw_steps})")
    lines.append("unrated_pairs = treated as rating 0")
    lines.append("user_ordering = first appearance in file")
    for key, val in sorted(data_report.items()):
        lines.append(f"data.{key} = {val}")
    lines.append(f"audit = {json.dumps(audit)}")
    for probe in probes:
        lines.append(f"probe.{probe['name']} = {json.dumps(probe)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_ratio_curves(csv_paths):
    """Parse cell CSVs into {(algorithm, topology): mean ratio curve}."""
    grouped = {}
    for path in csv_paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_FIELDS:
                raise InvalidParameterError(
                    f"{path}: unexpected CSV schema {reader.fieldnames}")
            for row in reader:
                key = (row["algorithm"], row["topology"])
                grouped.setdefault(key, {}).setdefault(
                    int(row["round"]), []).append(float(row["regret_ratio"]))
    curves = {}
    for key, by_round in grouped.items():
        rounds = sorted(by_round)
        curves[key] = (rounds, [float(np.mean(by_round[r])) for r in rounds])
    return curves


def emit_plots(csv_paths, out_path):
    """Write a deterministic SVG of mean regret-ratio curves.

    One polyline per (algorithm, topology); byte output depends only on the
    input CSVs.
    """
    if not csv_paths:
        raise InvalidParameterError("no CSV inputs")
    curves = read_ratio_curves(sorted(str(p) for p in csv_paths))
    svg = render_line_chart(curves, x_label="round",
                            y_label="regret ratio")
    Path(out_path).write_text(svg)
    return out_path


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def render_line_chart(curves: dict, x_label="", y_label="",
                      width=640, height=420):
    """Tiny hand-rolled SVG line chart (keeps output byte-deterministic)."""
    pad_l, pad_r, pad_t, pad_b = 60, 160, 20, 45
    plot_w, plot_h = width - pad_l - pad_r, height - pad_t - pad_b
    xs_all = [x for rounds, _ in curves.values() for x in rounds]
    ys_all = [y for _, vals in curves.values() for y in vals]
    x_min, x_max = min(xs_all), max(xs_all)
    y_min, y_max = min(ys_all + [0.0]), max(ys_all)
    if x_max == x_min:
        x_max = x_min + 1
    if y_max == y_min:
        y_max = y_min + 1

    def sx(x):
        return pad_l + plot_w * (x - x_min) / (x_max - x_min)

    def sy(y):
        return pad_t + plot_h * (1 - (y - y_min) / (y_max - y_min))

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
              f'height="{height}" viewBox="0 0 {width} {height}">\n')
    out.write(f'<rect width="{width}" height="{height}" fill="white"/>\n')
    out.write(f'<line x1="{pad_l}" y1="{pad_t + plot_h}" '
              f'x2="{pad_l + plot_w}" y2="{pad_t + plot_h}" '
              f'stroke="black"/>\n')
    out.write(f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" '
              f'y2="{pad_t + plot_h}" stroke="black"/>\n')
    out.write(f'<text x="{pad_l + plot_w / 2:.1f}" y="{height - 8}" '
              f'text-anchor="middle" font-size="13">{x_label}</text>\n')
    out.write(f'<text x="14" y="{pad_t + plot_h / 2:.1f}" font-size="13" '
              f'text-anchor="middle" transform="rotate(-90 14 '
              f'{pad_t + plot_h / 2:.1f})">{y_label}</text>\n')
    for tick in np.linspace(y_min, y_max, 5):
        y = sy(tick)
        out.write(f'<text x="{pad_l - 6}" y="{y:.1f}" text-anchor="end" '
                  f'font-size="10">{tick:.3g}</text>\n')
    for tick in np.linspace(x_min, x_max, 5):
        x = sx(tick)
        out.write(f'<text x="{x:.1f}" y="{pad_t + plot_h + 15}" '
                  f'text-anchor="middle" font-size="10">{tick:.4g}</text>\n')
    for idx, (key, (rounds, vals)) in enumerate(sorted(curves.items())):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}"
                       for x, y in zip(rounds, vals))
        out.write(f'<polyline fill="none" stroke="{color}" '
                  f'stroke-width="1.5" points="{pts}"/>\n')
        label = f"{key[0]} / {key[1]}"
        ly = pad_t + 16 + 16 * idx
        out.write(f'<line x1="{pad_l + plot_w + 8}" y1="{ly - 4}" '
                  f'x2="{pad_l + plot_w + 28}" y2="{ly - 4}" '
                  f'stroke="{color}" stroke-width="1.5"/>\n')
        out.write(f'<text x="{pad_l + plot_w + 32}" y="{ly}" '
                  f'font-size="11">{label}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()
