"""Command line front end.

    mcf --scene rings --seed 7 --labels-out labels.csv
    mcf --input points.csv --mode stabilize --trace-out trace.json --plot-out fig.svg
    mcf summarize trace.json
    mcf generate --scene cao_two_clusters --seed 3 --out cao.csv

A run is fully determined by its configuration, which is copied into the
trace. Nothing time dependent is written unless --record-time is given.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional

from .background import BackgroundModelParams, fit_background
from .dataset import bounding_window, load_csv, save_csv, save_labels
from .detection import detect_mcf
from .plotting import save_svg
from .scenes import SCENES, generate_scene
from .stabilization import stabilize, stabilized_mcf
from .unmasking import unmask

MODES = ("mcf", "stabilize", "unmask")
TRACE_FORMAT = "mcforest-trace"


@dataclass(frozen=True)
class RunConfig:
    input: Optional[str] = None
    scene: Optional[str] = None
    mode: str = "mcf"
    eps: float = 1.0
    q_simulations: int = 100
    n_father_bins: int = 32
    seed: int = 0
    labels_out: Optional[str] = None
    trace_out: Optional[str] = None
    plot_out: Optional[str] = None
    max_iter: Optional[int] = None

    def __post_init__(self):
        if (self.input is None) == (self.scene is None):
            raise ValueError("give exactly one of --input and --scene")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max-iter must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


def _load(cfg: RunConfig):
    if cfg.scene is not None:
        return generate_scene(cfg.scene, cfg.seed)
    return load_csv(cfg.input)


def execute(cfg: RunConfig):
    """Run the pipeline; returns (point set, labels, trace dict)."""
    ps = _load(cfg)
    if ps.n == 0:
        raise ValueError("empty dataset")
    bp = BackgroundModelParams(ps.n, bounding_window(ps), cfg.q_simulations,
                               cfg.n_father_bins, cfg.seed)
    trace = {"format": TRACE_FORMAT, "config": cfg.to_dict(), "n_points": ps.n}
    if cfg.mode == "mcf":
        forest = detect_mcf(ps, fit_background(bp), cfg.eps) if ps.n > 1 else None
        if forest is None:
            raise ValueError("hierarchy undefined")
    elif cfg.mode == "stabilize":
        st = stabilize(ps, bp, cfg.eps, cfg.seed, cfg.max_iter or 20)
        forest = stabilized_mcf(ps, bp, cfg.seed, trace=st)
        trace["stabilization"] = st.to_dict()
    else:
        ut = unmask(ps, bp, cfg.seed, cfg.max_iter or 50)
        forest = ut.final_forest
        trace["unmasking"] = {k: v for k, v in ut.to_dict().items() if k != "final_forest"}
    trace["forest"] = forest.to_dict()
    return ps, forest.labels(), trace


def _write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=1, sort_keys=True)
        f.write("\n")


def run(cfg: RunConfig, record_time: bool = False, out=None) -> int:
    written = []
    try:
        t0 = time.perf_counter()
        ps, labels, trace = execute(cfg)
        if record_time:
            trace["wall_time_s"] = time.perf_counter() - t0
        if cfg.labels_out:
            written.append(cfg.labels_out)
            save_labels(cfg.labels_out, ps, labels)
        if cfg.trace_out:
            written.append(cfg.trace_out)
            _write_json(cfg.trace_out, trace)
        if cfg.plot_out:
            written.append(cfg.plot_out)
            save_svg(cfg.plot_out, ps.points, labels, f"{cfg.mode}: {len(trace['forest']['clusters'])} clusters")
    except (ValueError, RuntimeError, OSError, KeyError) as e:
        for p in written:
            if os.path.exists(p):
                os.remove(p)
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"mcf: error: {msg}", file=sys.stderr)
        return 1
    (out or sys.stdout).write(summarize(trace))
    return 0


def summarize(trace: dict) -> str:
    """Plain text report of a trace."""
    try:
        clusters = trace["forest"]["clusters"]
        lines = [f"mode: {trace['config']['mode']}", f"points: {trace['n_points']}"]
    except (KeyError, TypeError):
        raise ValueError("parse error: not a run trace") from None
    for key in ("stabilization", "unmasking"):
        if key in trace:
            it = trace[key]
            lines.append(f"{key} iterations: {it['n_iterations']} (converged: {str(it['converged']).lower()})")
    if clusters:
        lines.append(f"clusters: {len(clusters)}")
        for i, c in enumerate(clusters):
            lines.append(f"  {i}: size {len(c['members'])}, log10 NFA {c['log10_nfa']:.2f}")
    else:
        lines.append("no meaningful clusters")
    lines.append(f"unclustered: {trace['forest']['n_unclustered']}")
    wt = trace.get("wall_time_s")
    lines.append(f"wall time: {wt:.2f} s" if wt is not None and math.isfinite(wt) else "wall time: not recorded")
    return "\n".join(lines) + "\n"


def _run_parser():
    p = argparse.ArgumentParser(prog="mcf", description="Detect meaningful clustered forests in point sets.",
                                epilog="Subcommands: 'mcf summarize TRACE', 'mcf generate ...'.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file, one point per line")
    src.add_argument("--scene", choices=SCENES, help="built-in synthetic scene")
    p.add_argument("--mode", choices=MODES, default="mcf")
    p.add_argument("--eps", type=float, default=1.0, help="NFA threshold (inside the loop for stabilize)")
    p.add_argument("--q", type=int, default=100, dest="q_simulations", help="Monte Carlo simulations")
    p.add_argument("--bins", type=int, default=32, dest="n_father_bins", help="father height bins")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels-out")
    p.add_argument("--trace-out")
    p.add_argument("--plot-out")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--record-time", action="store_true", help="store wall time in the trace")
    return p


def _summarize_main(argv) -> int:
    p = argparse.ArgumentParser(prog="mcf summarize", description="Report on a trace file.")
    p.add_argument("trace")
    a = p.parse_args(argv)
    try:
        with open(a.trace) as f:
            trace = json.load(f)
        sys.stdout.write(summarize(trace))
    except (OSError, ValueError) as e:
        print(f"mcf: error: {e}", file=sys.stderr)
        return 1
    return 0


def _generate_main(argv) -> int:
    p = argparse.ArgumentParser(prog="mcf generate", description="Write a synthetic scene as CSV.")
    p.add_argument("--scene", choices=SCENES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--with-labels", action="store_true", help="append the ground truth label column")
    a = p.parse_args(argv)
    ps = generate_scene(a.scene, a.seed)
    try:
        if a.with_labels:
            save_labels(a.out, ps, ps.labels)
        else:
            save_csv(a.out, ps)
    except OSError as e:
        print(f"mcf: error: {e}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if argv and argv[0] == "summarize":
        return _summarize_main(argv[1:])
    if argv and argv[0] == "generate":
        return _generate_main(argv[1:])
    a = _run_parser().parse_args(argv)
    opts = vars(a)
    record_time = opts.pop("record_time")
    try:
        cfg = RunConfig(**opts)
    except ValueError as e:
        print(f"mcf: error: {e}", file=sys.stderr)
        return 2
    return run(cfg, record_time)


if __name__ == "__main__":
    sys.exit(main())
