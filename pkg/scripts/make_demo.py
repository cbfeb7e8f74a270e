#!/usr/bin/env python3
"""Generate a synthetic animation and run the whole pipeline on it.

Writes into --out: the source frames, the distance matrix, the prune
report, path/cycle orderings, a filmstrip, a radial sheet, and the 2D
embedding, then prints a short summary of each stage.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from reseq.cli import main as reseq_main
from reseq.frameset import load_matrix


def bouncing_ball(m, size=64, seed=0):
    """Frames of a ball on a parabolic arc over a slowly shifting sky."""
    rng = np.random.default_rng(seed)
    texture = rng.uniform(0.0, 0.08, size=(size, size, 3))
    frames = []
    y, x = np.mgrid[0:size, 0:size]
    for i in range(m):
        t = i / max(m - 1, 1)
        cx = size * (0.1 + 0.8 * t)
        cy = size * (0.8 - 0.6 * 4 * t * (1 - t))
        ball = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * (size / 12) ** 2))
        sky = np.stack(
            [
                0.2 + 0.3 * t + 0.0 * y / size,
                0.3 + 0.2 * (y / size),
                0.55 - 0.25 * t + 0.1 * (y / size),
            ],
            axis=-1,
        )
        img = np.clip(sky + texture + np.stack([ball, ball * 0.6, ball * 0.2], axis=-1), 0, 1)
        frames.append(img.astype(np.float32))
    return frames


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_out", help="output directory")
    ap.add_argument("--frames", type=int, default=24)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    out = Path(args.out)
    frame_dir = out / "frames"
    frame_dir.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(bouncing_ball(args.frames, args.size, args.seed)):
        arr = np.clip(np.rint(img * 255), 0, 255).astype(np.uint8)
        Image.fromarray(arr).save(frame_dir / f"ball_{i:03d}.png")
    print(f"wrote {args.frames} frames to {frame_dir}")

    run = lambda *a: reseq_main([str(x) for x in a])

    pdm = out / "distances.pdm"
    assert run("dist", "--images", frame_dir, "--out", pdm) == 0
    print(f"distance matrix: {len(load_matrix(pdm))} frames -> {pdm}")

    report = out / "prune_report.json"
    pruned = out / "pruned.pdm"
    code = run("prune", "--matrix", pdm, "--report", report, "--out", pruned)
    if code == 0:
        rep = json.loads(report.read_text())
        print(f"pruned {len(rep['removed'])} outlier(s): {rep['removed']}")
        matrix_for_solve = pruned
    else:
        print("pruning not applicable on this corpus; solving on the full matrix")
        matrix_for_solve = pdm

    # the solve commands prune by default; this pipeline already did
    seq = out / "path.json"
    assert run("path", "--matrix", matrix_for_solve, "--no-prune", "--out", seq) == 0
    order = json.loads(seq.read_text())["order"]
    print(f"path: {order[0]} .. {order[-1]} ({len(order)} frames)")

    cyc = out / "cycle.json"
    assert run("cycle", "--matrix", matrix_for_solve, "--no-prune", "--out", cyc) == 0

    strip = out / "strip.png"
    assert run("layout", "--images", frame_dir, "--seq", seq, "--style", "linear", "--out", strip) == 0
    ring = out / "ring.png"
    assert run("layout", "--images", frame_dir, "--seq", cyc, "--style", "radial", "--out", ring) == 0
    print(f"sheets: {strip}, {ring}")

    csv = out / "eval.csv"
    assert run("eval", frame_dir, "--csv", csv) == 0
    print(f"reconstruction scores -> {csv}")
    print(csv.read_text().strip())
    return 0


if __name__ == "__main__":
    sys.exit(main())
