"""Command-line front end: compute, viz, bench, selftest.

Exit codes are a stable contract: 0 success, 1 internal error (including a
failed self-test or a benchmark determinism violation), 2 usage or input
error (bad flags, unreadable or malformed files).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import selftest, synth
from .errors import BadBinIndex, SpdKitError
from .ingest import FORMATS, extract_instances, load_instance_map, load_label_map
from .spd import BinSpec
from .spdmap import compute_map, deserialize, pool_map, serialize

log = logging.getLogger(__name__)

_USAGE_ERRORS = (SpdKitError, ValueError)


@dataclass
class RunConfig:
    labels: str | None = None
    instances: str | None = None
    out: str | None = None
    rbins: int = 12
    tbins: int = 6
    pool: int = 1
    threads: int = 0          # 0 = available parallelism
    fmt: str | None = None
    viz_mode: str = "norm"

    def __post_init__(self):
        if self.rbins < 1 or self.tbins < 1:
            raise ValueError("rbins and tbins must be positive")
        if self.rbins * self.tbins > 4096:
            raise ValueError(f"rbins*tbins = {self.rbins * self.tbins} exceeds 4096")
        if self.pool < 1 or self.pool & (self.pool - 1):
            raise ValueError(f"pool factor {self.pool} is not a power of two")
        if self.threads == 0:
            self.threads = os.cpu_count() or 1

    def bin_spec(self) -> BinSpec:
        return BinSpec(m=self.rbins, n=self.tbins)


def cmd_compute(cfg: RunConfig) -> int:
    inst = load_instance_map(cfg.instances, cfg.fmt)
    if cfg.labels is not None:
        labels = load_label_map(cfg.labels, cfg.fmt)
        if labels.classes.shape != inst.ids.shape:
            raise ValueError(
                f"label map {labels.classes.shape} and instance map "
                f"{inst.ids.shape} disagree"
            )
    regions = extract_instances(inst)
    t0 = time.perf_counter()
    spd_map = compute_map(inst, cfg.bin_spec(), threads=cfg.threads)
    if cfg.pool > 1:
        spd_map = pool_map(spd_map, cfg.pool)
    serialize(spd_map, cfg.out)
    dt = time.perf_counter() - t0
    print(f"instances: {len(regions)}")
    print(f"instance pixels: {int(np.count_nonzero(inst.ids))}")
    print(f"wall time: {dt:.3f} s")
    return 0


def _write_ppm(path: str, gray: np.ndarray):
    """Min-max scale a 2-D array to 8 bits and write a binary P6 image."""
    lo = float(gray.min()) if gray.size else 0.0
    hi = float(gray.max()) if gray.size else 0.0
    if hi > lo:
        scaled = np.round((gray - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(gray)
    rgb = np.repeat(scaled.astype(np.uint8)[:, :, None], 3, axis=2)
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(rgb.tobytes())


def cmd_viz(map_path: str, mode: str, out_path: str) -> int:
    spd_map = deserialize(map_path)
    if mode == "norm":
        gray = np.sqrt((spd_map.data ** 2).sum(axis=2))
    elif mode.startswith("bin:"):
        try:
            i, j = (int(s) for s in mode[4:].split(","))
        except ValueError:
            raise BadBinIndex(f"bin mode must look like bin:i,j, got {mode!r}")
        if not (0 <= i < spd_map.m and 0 <= j < spd_map.n):
            raise BadBinIndex(
                f"bin ({i},{j}) outside {spd_map.m}x{spd_map.n} histogram"
            )
        gray = spd_map.data[:, :, i * spd_map.n + j]
    else:
        raise ValueError(f"unknown viz mode {mode!r}; use norm or bin:i,j")
    _write_ppm(out_path, gray)
    print(f"wrote {out_path} ({spd_map.width}x{spd_map.height})")
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    if cfg.instances is not None:
        inst = load_instance_map(cfg.instances, cfg.fmt)
    else:
        inst = synth.bench_scene()
    regions = extract_instances(inst)
    sizes = ", ".join(f"#{r.id}:{len(r.contour)}" for r in regions)
    print(f"scene: {inst.width}x{inst.height}, {len(regions)} instances")
    print(f"contour sizes: {sizes}")
    spec = cfg.bin_spec()
    n_desc = int(np.count_nonzero(inst.ids))

    t0 = time.perf_counter()
    serial = compute_map(inst, spec, threads=1)
    t_serial = time.perf_counter() - t0
    t0 = time.perf_counter()
    parallel = compute_map(inst, spec, threads=cfg.threads)
    t_parallel = time.perf_counter() - t0

    same = np.array_equal(serial.data, parallel.data)
    print(f"serial:   {t_serial:.3f} s  ({n_desc / max(t_serial, 1e-9):.0f} descriptors/s)")
    print(f"parallel: {t_parallel:.3f} s  ({n_desc / max(t_parallel, 1e-9):.0f} descriptors/s)"
          f"  [{cfg.threads} threads]")
    print(f"speedup: {t_serial / max(t_parallel, 1e-9):.2f}x")
    print(f"parallel output matches serial: {'yes' if same else 'NO'}")
    if not same:
        log.error("parallel path diverged from the serial reference")
        return 1
    return 0


def cmd_selftest() -> int:
    seed = int(os.environ.get("SPDKIT_SEED", "0"))
    return selftest.run(seed)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="spdkit",
                                  description="per-pixel shape descriptor toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, need_instances: bool):
        p.add_argument("--labels", help="semantic label map (consistency check)")
        p.add_argument("--instances", required=need_instances, help="instance id map")
        p.add_argument("--rbins", type=int, default=12, help="radius rings (default 12)")
        p.add_argument("--tbins", type=int, default=6, help="angle sectors (default 6)")
        p.add_argument("--pool", type=int, default=1,
                       help="power-of-two downsampling factor")
        p.add_argument("--threads", type=int, default=0,
                       help="worker threads (0 = all cores)")
        p.add_argument("--format", dest="fmt", choices=FORMATS,
                       help="input format (default: by extension)")

    p = sub.add_parser("compute", help="descriptor map -> SPD1 file")
    common(p, need_instances=True)
    p.add_argument("--out", required=True, help="output .spd path")

    p = sub.add_parser("viz", help="render an SPD1 file to a PPM heatmap")
    p.add_argument("map", help="input .spd path")
    p.add_argument("--mode", default="norm", help="norm | bin:i,j")
    p.add_argument("--out", required=True, help="output .ppm path")

    p = sub.add_parser("bench", help="serial vs parallel timing on a synthetic scene")
    common(p, need_instances=False)

    sub.add_parser("selftest", help="run the embedded property suite")
    return top


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SPDKIT_LOG", "WARNING"))
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "compute":
            cfg = RunConfig(labels=args.labels, instances=args.instances,
                            out=args.out, rbins=args.rbins, tbins=args.tbins,
                            pool=args.pool, threads=args.threads, fmt=args.fmt)
            return cmd_compute(cfg)
        if args.command == "viz":
            return cmd_viz(args.map, args.mode, args.out)
        if args.command == "bench":
            cfg = RunConfig(labels=args.labels, instances=args.instances,
                            rbins=args.rbins, tbins=args.tbins,
                            threads=args.threads, fmt=args.fmt)
            return cmd_bench(cfg)
        return cmd_selftest()
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:             # noqa: BLE001 - last-resort boundary
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
