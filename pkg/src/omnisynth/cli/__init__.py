"""Command-line front end: ``omnisynth render|models|metrics|traj-error``."""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from omnisynth.cli.catalog import CATALOG, catalog_text
from omnisynth.cli.config import WORKERS_ENV, JobConfig, load_config, parse_config, serialize
from omnisynth.cli.job import run_job
from omnisynth.errors import ConfigError, DomainError

__all__ = ["main", "CATALOG", "JobConfig", "parse_config", "serialize", "load_config", "run_job"]


def _cmd_render(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"{args.config}: {e}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{args.config}: {exc.strerror}", file=sys.stderr)
        return 2
    if args.workers is not None:
        cfg = JobConfig(**{**cfg.__dict__, "workers": args.workers})
    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    try:
        status, manifest = run_job(cfg, log=log)
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(manifest)
    return status


def _cmd_models(args):
    print(catalog_text())
    return 0


def _cmd_metrics(args):
    from omnisynth.groundtruth import METRICS_HEADER, layout_metrics
    from omnisynth.imaging import read_mask_png

    try:
        m = layout_metrics(read_mask_png(args.pred), read_mask_png(args.gt))
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(METRICS_HEADER)
    print(m.csv_row())
    return 0


def _cmd_traj_error(args):
    from omnisynth.groundtruth import read_trajectory, trajectory_errors

    try:
        res = trajectory_errors(read_trajectory(args.gt), read_trajectory(args.est))
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print("frame,eps_t_deg,eps_theta_deg")
    for fid, et, er in zip(res.frame_ids, res.eps_t, res.eps_theta):
        print(f"{fid},{'nan' if np.isnan(et) else repr(float(et))},{float(er)!r}")
    if res.skipped:
        print(f"# eps_t undefined (zero translation) for frames: {' '.join(map(str, res.skipped))}", file=sys.stderr)
    finite = res.eps_t[~np.isnan(res.eps_t)]
    mean_t = float(finite.mean()) if finite.size else float("nan")
    print(f"# mean eps_t {mean_t!r} deg, mean eps_theta {float(res.eps_theta.mean()) if len(res.eps_theta) else float('nan')!r} deg")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="omnisynth", description="Synthetic omnidirectional image generator.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render the job described by a config file")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=None, help=f"worker threads (default: ${WORKERS_ENV} or 1)")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=_cmd_render)
    p = sub.add_parser("models", help="list the supported camera models")
    p.set_defaults(func=_cmd_models)
    p = sub.add_parser("metrics", help="IoU, Acc, P, R, F1 of a predicted layout map")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.set_defaults(func=_cmd_metrics)
    p = sub.add_parser("traj-error", help="per-frame translation and rotation errors")
    p.add_argument("--gt", required=True)
    p.add_argument("--est", required=True)
    p.set_defaults(func=_cmd_traj_error)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
