"""Evaluation protocol, weight sweeps, Pareto fronts and their CSV/SVG output."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import astuple, dataclass, fields, replace
from pathlib import Path

import numpy as np
from scipy import stats

from . import nav
from .policy import RbfGaussianPolicy
from .rng import RngStream
from .trainer import FORMULATIONS, TrainConfig, train

log = logging.getLogger(__name__)

TRAIN_STREAM = 1
EVAL_STREAM = 2


@dataclass(frozen=True)
class SweepRecord:
    formulation: str
    weight: float
    seed: int
    train_episodes: int
    eval_episodes: int
    safety_rate: float
    mean_return: float
    wall_seconds: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.safety_rate <= 1.0:
            raise ValueError(f"safety_rate {self.safety_rate} outside [0, 1]")
        if self.eval_episodes < 1:
            raise ValueError("eval_episodes must be >= 1")


CSV_COLUMNS = tuple(f.name for f in fields(SweepRecord))


def default_grid(n: int = 8, lo: float = 0.45, hi: float = 14.0) -> list[float]:
    return [float(w) for w in np.geomspace(lo, hi, n)]


def evaluate(policy, env: nav.NavEnvConfig, n_episodes: int, rng: RngStream):
    """(fraction of jointly safe episodes, mean undiscounted return).

    Every episode starts from a uniform draw of the safe set.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    n_safe = 0
    total = 0.0
    for _ in range(n_episodes):
        traj = nav.rollout(env, policy, nav.sample_safe_uniform(env, rng), rng)
        n_safe += traj.joint_safe
        total += traj.total_reward
    return n_safe / n_episodes, total / n_episodes


def run_cell(formulation, weight, seed, template: TrainConfig, env, eval_episodes, policy0=None):
    t0 = time.perf_counter()
    cfg = replace(template, formulation=formulation, weight=weight, seed=seed)
    policy0 = policy0 if policy0 is not None else RbfGaussianPolicy.default()
    policy, _ = train(cfg, env, policy0, RngStream(seed, TRAIN_STREAM))
    safety, ret = evaluate(policy, env, eval_episodes, RngStream(seed, EVAL_STREAM))
    wall = time.perf_counter() - t0 if template.timing else 0.0
    return SweepRecord(formulation, float(weight), seed, cfg.episodes, eval_episodes, safety, ret, wall)


def _cell(args):
    return run_cell(*args)


def sort_records(records):
    return sorted(records, key=lambda r: (r.formulation, r.weight, r.seed))


def sweep(grid, formulations, seeds, template: TrainConfig, env, eval_episodes: int = 500, jobs: int = 1,
          policy0=None):
    """Train and evaluate every (formulation, weight, seed) cell.

    Cells reuse the seed's random streams, so all weights of one seed see
    common random numbers. A failing cell is logged and skipped.
    """
    if not grid:
        raise ValueError("empty weight grid")
    for f in formulations:
        if f not in FORMULATIONS:
            raise ValueError(f"unknown formulation {f!r}")
    cells = [(f, float(w), int(s), template, env, eval_episodes, policy0) for f in formulations for w in grid
             for s in seeds]
    records = []
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_cell, c) for c in cells]
            for c, fut in zip(cells, futures):
                try:
                    records.append(fut.result())
                except Exception as exc:  # noqa: BLE001 - a cell failure must not stop the sweep
                    log.error("cell %s failed: %s", c[:3], exc)
    else:
        for c in cells:
            try:
                records.append(_cell(c))
            except Exception as exc:  # noqa: BLE001
                log.error("cell %s failed: %s", c[:3], exc)
            else:
                r = records[-1]
                log.info("%s w=%.3g seed=%d safety=%.3f return=%.1f", r.formulation, r.weight, r.seed,
                         r.safety_rate, r.mean_return)
    return sort_records(records)


def _dominates(a: SweepRecord, b: SweepRecord) -> bool:
    return (a.safety_rate >= b.safety_rate and a.mean_return >= b.mean_return
            and (a.safety_rate > b.safety_rate or a.mean_return > b.mean_return))


def pareto_front(records):
    """Non-dominated records per formulation (maximize safety and return).

    Of several records at the same point, the one with the lowest weight
    (then seed) is kept.
    """
    if not records:
        raise ValueError("no records")
    out = []
    for f in sorted({r.formulation for r in records}):
        group = sorted((r for r in records if r.formulation == f), key=lambda r: (r.weight, r.seed))
        kept = []
        for r in group:
            if any(_dominates(o, r) for o in group):
                continue
            if any(k.safety_rate == r.safety_rate and k.mean_return == r.mean_return for k in kept):
                continue
            kept.append(r)
        out.extend(kept)
    return out


def safety_rank_correlation(records, formulation: str) -> float:
    """Spearman correlation between weight and safety_rate within a formulation."""
    group = [r for r in records if r.formulation == formulation]
    if len(group) < 3:
        return float("nan")
    rho = stats.spearmanr([r.weight for r in group], [r.safety_rate for r in group]).statistic
    return float(rho)


@dataclass(frozen=True)
class BandComparison:
    center: float
    probabilistic_return: float
    cumulative_return: float
    n_probabilistic: int
    n_cumulative: int

    @property
    def margin(self) -> float:
        return self.probabilistic_return - self.cumulative_return


def matched_safety_bands(records, half_width: float = 0.02):
    """Compare mean returns of the two formulations at matched safety.

    A band [c - w, c + w] is centered on every record's safety rate; bands
    holding records of both formulations are kept, duplicates (identical
    membership) dropped. Returns one :class:`BandComparison` per band.
    """
    out = []
    seen = set()
    for center in sorted({r.safety_rate for r in records}):
        members = [r for r in records if abs(r.safety_rate - center) <= half_width + 1e-12]
        prob = [r for r in members if r.formulation == "probabilistic"]
        cum = [r for r in members if r.formulation == "cumulative"]
        if not prob or not cum:
            continue
        key = frozenset((r.formulation, r.weight, r.seed) for r in members)
        if key in seen:
            continue
        seen.add(key)
        out.append(BandComparison(center, float(np.mean([r.mean_return for r in prob])),
                                  float(np.mean([r.mean_return for r in cum])), len(prob), len(cum)))
    return out


# output ---------------------------------------------------------------


def emit_csv(records, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in records:
                row = astuple(r)
                w.writerow([row[0], repr(row[1]), row[2], row[3], row[4], repr(row[5]), repr(row[6]),
                            repr(row[7])])
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV {path}: {exc}") from exc


def read_csv(path) -> list[SweepRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            SweepRecord(row[0], float(row[1]), int(row[2]), int(row[3]), int(row[4]), float(row[5]),
                        float(row[6]), float(row[7]))
            for row in reader
        ]


COLORS = {"cumulative": "#1f4e9c", "probabilistic": "#c0392b"}


def _nice_range(values, pad=0.05):
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    return lo - pad * span, hi + pad * span


def render_svg(records, width: int = 800, height: int = 600) -> str:
    """Safety (x) vs mean return (y) scatter, one color per formulation."""
    left, right, top, bottom = 90, 30, 40, 70
    pw, ph = width - left - right, height - top - bottom
    xs = [r.safety_rate for r in records] or [0.0, 1.0]
    ys = [r.mean_return for r in records] or [0.0, 1.0]
    x0, x1 = _nice_range(xs)
    y0, y1 = _nice_range(ys)

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(6):
        xv = x0 + (x1 - x0) * i / 5
        yv = y0 + (y1 - y0) * i / 5
        out.append(f'<line x1="{px(xv):.2f}" y1="{top + ph}" x2="{px(xv):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(xv):.2f}" y="{top + ph + 20}" font-size="12" text-anchor="middle">{xv:.3f}</text>')
        out.append(f'<line x1="{left - 5}" y1="{py(yv):.2f}" x2="{left}" y2="{py(yv):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(yv) + 4:.2f}" font-size="12" text-anchor="end">{yv:.1f}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 20}" font-size="14" text-anchor="middle">'
               'safety rate (fraction of jointly safe episodes)</text>')
    out.append(f'<text x="20" y="{top + ph / 2:.1f}" font-size="14" text-anchor="middle" '
               f'transform="rotate(-90 20 {top + ph / 2:.1f})">mean return</text>')
    for r in sort_records(records):
        color = COLORS.get(r.formulation, "#555555")
        out.append(f'<circle cx="{px(r.safety_rate):.2f}" cy="{py(r.mean_return):.2f}" r="5" fill="{color}" '
                   f'fill-opacity="0.8"><title>{r.formulation} w={r.weight:.4g} seed={r.seed}</title></circle>')
    for i, (name, color) in enumerate(sorted(COLORS.items())):
        y = top + 15 + 20 * i
        out.append(f'<circle cx="{left + 15}" cy="{y}" r="5" fill="{color}"/>')
        out.append(f'<text x="{left + 25}" y="{y + 4}" font-size="12">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_scatter(records, path) -> None:
    path = Path(path)
    try:
        path.write_text(render_svg(records))
    except OSError as exc:
        raise OSError(f"cannot write SVG {path}: {exc}") from exc
