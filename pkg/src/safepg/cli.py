"""Command-line entry point: ``safepg {train,evaluate,sweep,gradcheck,lemmacheck}``.

Exit codes: 0 success, 1 usage/validation error, 2 runtime failure.
Precedence for every setting: command-line flag, then config file, then
compiled-in default (``SAFEPG_SEED`` supplies the seed default).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import checks, sweep as sweep_mod, trainer
from .config import ConfigError, RunConfig, parse_config
from .policy import RbfGaussianPolicy
from .rng import RngStream

log = logging.getLogger("safepg")

FORMULATION_ALIASES = {"prob": "probabilistic", "probabilistic": "probabilistic",
                       "cum": "cumulative", "cumulative": "cumulative"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="INI-style run configuration file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="random seed (unsigned 64-bit); default from config or SAFEPG_SEED")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="safepg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train one RBF policy; writes checkpoint.txt and train_log.csv")
    _add_common(p)
    p.add_argument("--formulation", help="prob|cum (probabilistic or cumulative)")
    p.add_argument("--weight", type=float, help="lambda (prob) or mu (cum)")
    p.add_argument("--episodes", type=int, help="training iterations")

    p = sub.add_parser("evaluate", help="evaluate a checkpoint from uniform safe starts; writes evaluation.csv")
    _add_common(p)
    p.add_argument("--checkpoint", type=Path, help="policy checkpoint (default: <out>/checkpoint.txt)")
    p.add_argument("--formulation", help="label for the output record")
    p.add_argument("--weight", type=float, help="label for the output record")
    p.add_argument("--episodes", type=int, help="evaluation episodes (default 1000)")

    p = sub.add_parser("sweep", help="weight sweep over both formulations; writes sweep.csv and pareto.svg")
    _add_common(p)
    p.add_argument("--formulation", help="restrict to prob|cum")
    p.add_argument("--weight", type=float, help="restrict the grid to one weight")
    p.add_argument("--episodes", type=int, help="training episodes per cell")
    p.add_argument("--jobs", type=int, help="worker processes")

    p = sub.add_parser("gradcheck", help="exact check of the safety gradient estimator and recursion")
    _add_common(p)
    p.add_argument("--instances", type=int, help="random tabular instances (default 25)")
    p.add_argument("--corrupt-estimator", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("lemmacheck", help="feasible-set inclusion and dual-bound sweeps")
    _add_common(p)
    p.add_argument("--samples", type=int, help="random (mdp, policy, delta) triples (default 10000)")
    p.add_argument("--dual-instances", type=int, help="instances for the dual-bound grid (default 10)")
    return parser


def resolve(args) -> RunConfig:
    rc = parse_config(args.config) if args.config else RunConfig()
    env_seed = os.environ.get("SAFEPG_SEED")
    seed = args.seed
    if seed is None and env_seed is not None and not (args.config and _file_sets_seed(rc, args.command)):
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"SAFEPG_SEED={env_seed!r} is not an integer") from exc
    cmd = args.command
    if getattr(args, "formulation", None) is not None:
        if args.formulation not in FORMULATION_ALIASES:
            raise ConfigError(f"--formulation must be prob or cum, got {args.formulation!r}")
        form = FORMULATION_ALIASES[args.formulation]
        rc.set("train", "formulation", form, "--formulation")
        if cmd == "sweep":
            rc.set("sweep", "formulations", (form,), "--formulation")
    if getattr(args, "weight", None) is not None:
        rc.set("train", "weight", float(args.weight), "--weight")
        if cmd == "sweep":
            rc.set("sweep", "weights", (float(args.weight),), "--weight")
    if getattr(args, "episodes", None) is not None:
        key = {"train": ("train", "episodes"), "evaluate": ("eval", "episodes"),
               "sweep": ("sweep", "train_episodes")}[cmd]
        rc.set(*key, args.episodes, "--episodes")
    if getattr(args, "jobs", None) is not None:
        rc.set("sweep", "jobs", args.jobs, "--jobs")
    if getattr(args, "instances", None) is not None:
        rc.set("oracle", "instances", args.instances, "--instances")
    if getattr(args, "samples", None) is not None:
        rc.set("oracle", "samples", args.samples, "--samples")
    if getattr(args, "dual_instances", None) is not None:
        rc.set("oracle", "dual_instances", args.dual_instances, "--dual-instances")
    if seed is not None:
        if cmd == "train":
            rc.set("train", "seed", seed, "--seed")
        elif cmd == "evaluate":
            rc.set("eval", "seed", seed, "--seed")
        elif cmd == "sweep":
            n = len(rc["sweep"]["seeds"])
            rc.set("sweep", "seeds", tuple(seed + k for k in range(n)), "--seed")
        else:
            rc.set("oracle", "seed", seed, "--seed")
    return rc.validate()


def _file_sets_seed(rc: RunConfig, cmd: str) -> bool:
    key = {"train": ("train", "seed"), "evaluate": ("eval", "seed"), "sweep": ("sweep", "seeds")}.get(
        cmd, ("oracle", "seed"))
    return key in rc.lines


def cmd_train(args, rc: RunConfig, out: Path) -> int:
    cfg = rc.train()
    ckpt = out / "checkpoint.txt"
    try:
        _, records = trainer.train(cfg, rc.env(), rc.policy(), RngStream(cfg.seed, sweep_mod.TRAIN_STREAM), ckpt)
    except trainer.TrainingAborted as exc:
        trainer.write_log(exc.records, out / "train_log.csv")
        print(f"training aborted: {exc}; last good policy in {ckpt}", file=sys.stderr)
        return 2
    trainer.write_log(records, out / "train_log.csv")
    print(f"wrote {ckpt} and {out / 'train_log.csv'} ({len(records)} log rows)")
    return 0


def cmd_evaluate(args, rc: RunConfig, out: Path) -> int:
    ckpt = args.checkpoint or out / "checkpoint.txt"
    try:
        policy = RbfGaussianPolicy.load(ckpt, rc["policy"]["cutoff"])
    except FileNotFoundError:
        raise ConfigError(f"checkpoint {ckpt} not found")
    n = rc["eval"]["episodes"]
    seed = rc["eval"]["seed"]
    safety, ret = sweep_mod.evaluate(policy, rc.env(), n, RngStream(seed, sweep_mod.EVAL_STREAM))
    t = rc["train"]
    rec = sweep_mod.SweepRecord(t["formulation"], t["weight"], seed, t["episodes"], n, safety, ret, 0.0)
    sweep_mod.emit_csv([rec], out / "evaluation.csv")
    print(f"safety_rate={safety:.4f} mean_return={ret:.3f} over {n} episodes")
    return 0


def cmd_sweep(args, rc: RunConfig, out: Path) -> int:
    s = rc["sweep"]
    records = sweep_mod.sweep(list(s["weights"]), list(s["formulations"]), list(s["seeds"]), rc.sweep_template(),
                              rc.env(), s["eval_episodes"], s["jobs"], rc.policy())
    sweep_mod.emit_csv(records, out / "sweep.csv")
    sweep_mod.emit_svg_scatter(records, out / "pareto.svg")
    n_cells = len(s["weights"]) * len(s["formulations"]) * len(s["seeds"])
    print(f"{len(records)}/{n_cells} cells written to {out / 'sweep.csv'} and {out / 'pareto.svg'}")
    for f in s["formulations"]:
        print(f"  {f}: spearman(weight, safety) = {sweep_mod.safety_rank_correlation(records, f):.3f}")
    return 0 if len(records) == n_cells else 2


def _corrupted(traj, policy):
    from .estimators import grad_safety_prob

    return 1.01 * grad_safety_prob(traj, policy)


def cmd_gradcheck(args, rc: RunConfig, out: Path) -> int:
    o = rc["oracle"]
    rows = checks.gradient_check(o["instances"], o["seed"], _corrupted if args.corrupt_estimator else None)
    print(f"{'inst':>4} {'S':>2} {'T':>2} {'estimator rel err':>18} {'recursion abs err':>18}  ok")
    for r in rows:
        print(f"{r.index:>4} {r.n_states:>2} {r.horizon:>2} {r.estimator_rel_err:>18.3e} "
              f"{r.recursion_abs_err:>18.3e}  {'yes' if r.ok else 'NO'}")
    worst_e = max(r.estimator_rel_err for r in rows)
    worst_r = max(r.recursion_abs_err for r in rows)
    print(f"max estimator rel err {worst_e:.3e} (tol {checks.ESTIMATOR_TOL:g}); "
          f"max recursion abs err {worst_r:.3e} (tol {checks.RECURSION_TOL:g})")
    failed = [r for r in rows if not r.ok]
    if failed:
        for r in failed:
            r.mdp.save(out / f"gradcheck_fail_{r.index}.mdp.txt")
            np.savetxt(out / f"gradcheck_fail_{r.index}.logits.txt", r.policy.logits.reshape(-1),
                       header=f"logits shape {r.policy.logits.shape}", fmt="%.17g")
        print(f"{len(failed)} instance(s) failed; dumped to {out}", file=sys.stderr)
        return 2
    return 0


def cmd_lemmacheck(args, rc: RunConfig, out: Path) -> int:
    o = rc["oracle"]
    rep = checks.lemma_check(o["samples"], o["dual_instances"], o["xi_points"], o["seed"], o["normalized"])
    print(f"feasibility samples: {rep.samples}  members F_hat={rep.counts['F_hat']} F={rep.counts['F']} "
          f"F_bar={rep.counts['F_bar']}")
    print(f"  inclusion-chain violations: {rep.chain_violations}")
    print(f"  E[sum 1(safe)] >= (T+1) P(all safe) violations: {rep.markov_violations}")
    print(f"dual instances: {rep.dual_instances}  xi grid: {', '.join(f'{x:g}' for x in rep.xi_grid)}")
    print(f"  min bound slack {rep.min_slack:.3e}  max duality gap {rep.max_gap:.3e}  "
          f"monotonicity violations {rep.monotone_violations}  concavity violations {rep.concavity_violations}  "
          f"infeasible points {rep.infeasible_points}")
    if not rep.ok:
        for kind, i, mdp, policy, delta in rep.counterexamples:
            mdp.save(out / f"lemmacheck_{kind}_{i}.mdp.txt")
            if policy is not None:
                np.savetxt(out / f"lemmacheck_{kind}_{i}.logits.txt", policy.logits.reshape(-1),
                           header=f"logits shape {policy.logits.shape} delta {delta!r}", fmt="%.17g")
        print(f"violations found; {len(rep.counterexamples)} counterexample(s) dumped to {out}", file=sys.stderr)
        return 2
    return 0


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "gradcheck": cmd_gradcheck,
    "lemmacheck": cmd_lemmacheck,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help and usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = resolve(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        (out / "resolved_config.txt").write_text(rc.dumps())
        return COMMANDS[args.command](args, rc, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        log.exception("runtime failure")
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
