"""Command-line surface: synth, track, eval, gradcheck, bench.

Exit codes: 0 success, 2 file parse error (message names the line),
3 invalid pose in an input file, 4 unit or stride mismatch between
trajectories, 1 for other validation failures.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .checks import format_entries, run_gradient_checks
from .decoder import decoder_forward, decoder_init
from .errors import (
    AlignmentError,
    EndotrackError,
    InvalidQuaternion,
    NotARotation,
    TrajectoryParseError,
    UnitMismatch,
    ZeroQuaternion,
)
from .files import RunConfig, read_config, read_trajectory, write_trajectory
from .metrics import evaluate
from .pipeline import extract_joint, extract_motion, extract_scene, fuse, init_pipeline
from .tracker import NoiseSpec, Trajectory, chain_absolute, chain_rebased, perturb_relatives, synth_trajectory


def _load_config(args) -> RunConfig:
    return read_config(args.config) if args.config else RunConfig()


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    k = args.k if args.k is not None else cfg.k
    seed = args.seed if args.seed is not None else cfg.seed
    gt = synth_trajectory(args.n, smoothness=args.smoothness, seed=seed, unit=args.unit, k=k)
    bias = np.array([float(v) for v in args.bias_t.split(",")]) if args.bias_t else np.zeros(3)
    spec = NoiseSpec(sigma_t=args.sigma_t, sigma_r=args.sigma_r, bias_t=bias, seed=seed + 1)
    rels = perturb_relatives(gt, spec)
    write_trajectory(args.out_gt, gt)
    write_trajectory(args.out_rels, Trajectory(gt.frames[1:], tuple(rels), k=k, unit=args.unit))
    print(f"wrote {args.out_gt} ({len(gt)} poses) and {args.out_rels} ({len(rels)} relatives)")
    return 0


def cmd_track(args) -> int:
    rels = read_trajectory(args.rels)
    base = read_trajectory(args.base)
    if rels.unit != base.unit:
        raise UnitMismatch(f"relatives unit {rels.unit!r} vs base unit {base.unit!r}")
    if rels.k != base.k:
        raise AlignmentError(f"stride mismatch: relatives k={rels.k} vs base k={base.k}")
    if args.mode == "chained":
        est = chain_absolute(base.poses[0], rels.poses, k=base.k, start=base.frames[0])
    else:
        est = chain_rebased(base, rels.poses)
    write_trajectory(args.out, est)
    print(f"wrote {args.out} ({len(est)} poses, mode={args.mode})")
    return 0


def cmd_eval(args) -> int:
    gt = read_trajectory(args.gt)
    est = read_trajectory(args.est)
    report = evaluate(gt, est)
    text = report.to_text()
    print(text)
    if args.out:
        from .files import atomic_write_text

        atomic_write_text(args.out, text + "\n")
    return 0


def cmd_gradcheck(args) -> int:
    cfg = _load_config(args)
    seed = args.seed if args.seed is not None else cfg.seed
    entries = run_gradient_checks(seed, inject_nan=args.inject_nan)
    print(format_entries(entries, seed))
    return 0 if all(e.passed for e in entries) else 1


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    try:
        h, w = (int(v) for v in args.size.lower().split("x"))
    except ValueError:
        raise EndotrackError(f"--size must look like 64x64, got {args.size!r}") from None
    pcfg = cfg.pipeline_config()
    from dataclasses import replace

    pcfg = replace(pcfg, height=h, width=w)
    params = init_pipeline(pcfg)
    dec = decoder_init(pcfg.fused_channels, cfg.decoder_channels, seed=pcfg.seed + 1)
    dtype = np.float32 if args.f32 else np.float64
    if args.f32:
        params = params.astype(dtype)
        dec = dec.astype(dtype)
    rng = np.random.default_rng(pcfg.seed)
    img_prev = rng.standard_normal((3, h, w)).astype(dtype)
    img_cur = rng.standard_normal((3, h, w)).astype(dtype)
    flow = rng.standard_normal((2, h, w)).astype(dtype)
    pair = np.concatenate([img_prev, img_cur])

    def one_pass(timings=None):
        t0 = time.perf_counter()
        f_cur = extract_scene(img_cur, params)
        t1 = time.perf_counter()
        f_prev = extract_scene(img_prev, params)
        t2 = time.perf_counter()
        f_motion = extract_motion(flow, params)
        t3 = time.perf_counter()
        f_joint = extract_joint(pair, params)
        t4 = time.perf_counter()
        fused = fuse(f_cur, f_prev, f_motion, f_joint, pcfg.norm_eps)
        t5 = time.perf_counter()
        decoder_forward(fused, dec)
        t6 = time.perf_counter()
        if timings is not None:
            for name, dt in zip(
                ("scene (current)", "scene (previous)", "motion", "joint", "fuse", "decoder"),
                np.diff([t0, t1, t2, t3, t4, t5, t6]),
            ):
                timings[name] = timings.get(name, 0.0) + dt

    for _ in range(args.warmup):
        one_pass()
    timings: dict = {}
    start = time.perf_counter()
    for _ in range(args.repeat):
        one_pass(timings)
    elapsed = time.perf_counter() - start
    per_frame = elapsed / args.repeat
    fps = 1.0 / per_frame

    print("throughput benchmark -- STAND-IN pipeline (randomly initialized weights,")
    print("not a trained network; numbers characterize these kernels only)")
    print(f"size {h}x{w}, dtype {'float32' if args.f32 else 'float64'}, "
          f"{args.repeat} repeats after {args.warmup} warmup")
    print("per-stage ms/frame:")
    for name, total in timings.items():
        print(f"  {name:<17} {1000.0 * total / args.repeat:8.3f}")
    print(f"total {1000.0 * per_frame:.3f} ms/frame -> {fps:.1f} fps")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="endotrack",
        description="Ego-motion tracking math core: synthetic trajectories, pose chaining, "
                    "metric evaluation, gradient checks, and a kernel throughput benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a ground-truth trajectory and noisy relative poses")
    p.add_argument("--n", type=int, default=500, help="number of poses")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--k", type=int, default=None, help="frame stride")
    p.add_argument("--smoothness", type=float, default=1.0, help="upper bound on step length")
    p.add_argument("--sigma-t", type=float, default=0.0, help="translation noise std per step")
    p.add_argument("--sigma-r", type=float, default=0.0, help="rotation noise std per step (radians)")
    p.add_argument("--bias-t", default=None, help="translation bias 'x,y,z'")
    p.add_argument("--unit", choices=("mm", "cm"), default="mm")
    p.add_argument("--out-gt", required=True)
    p.add_argument("--out-rels", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("track", help="chain relative poses into an absolute trajectory")
    p.add_argument("rels", help="relative-pose file")
    p.add_argument("--base", required=True,
                   help="trajectory file: first pose seeds chained mode, all poses seed rebased mode")
    p.add_argument("--mode", choices=("chained", "rebased"), default="chained")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="five-metric comparison of two trajectory files")
    p.add_argument("gt")
    p.add_argument("est")
    p.add_argument("--out", default=None, help="also write the report to this path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference gradient checks")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--inject-nan", action="store_true",
                   help="corrupt parameters first (verifies the harness fails loudly)")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("bench", help="time the feature pipeline + decoder per frame pair")
    p.add_argument("--size", default="64x64")
    p.add_argument("--repeat", type=int, default=30)
    p.add_argument("--warmup", type=int, default=5)
    p.add_argument("--f32", action="store_true", help="reduced-precision mode")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TrajectoryParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ZeroQuaternion, NotARotation, InvalidQuaternion) as e:
        print(f"error: invalid pose: {e}", file=sys.stderr)
        return 3
    except (UnitMismatch, AlignmentError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except EndotrackError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
