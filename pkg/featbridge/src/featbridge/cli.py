"""Command line front end: extract activations, export weights."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .extract import BACKBONES, ExtractError, ExtractorSpec, extract
from .weights import WeightExportError, export_weights


def _parse_resize(text):
    if text == "native":
        return None
    try:
        w, h = (int(p) for p in text.lower().split("x"))
        return (w, h)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"resize must be WxH or 'native', got {text!r}"
        )


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="featbridge",
        description="CNN activations to feature archives, checkpoints to weight JSON",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ex = sub.add_parser("extract", help="write a PFA1 archive from images")
    p_ex.add_argument("images", nargs="+", help="image files, archive order")
    p_ex.add_argument("--out", required=True, help="output .pfa path")
    p_ex.add_argument("--backbone", choices=sorted(BACKBONES), default="vgg")
    p_ex.add_argument("--resize", type=_parse_resize, default=None,
                      help="WxH or 'native' (default native)")
    p_ex.add_argument("--random-init", action="store_true",
                      help="seeded random weights instead of pretrained")
    p_ex.add_argument("--seed", type=int, default=0,
                      help="seed for --random-init")
    p_ex.add_argument("--skip-bad", action="store_true",
                      help="warn and continue past undecodable images")

    p_w = sub.add_parser("weights", help="export calibration weight JSON")
    p_w.add_argument("checkpoint", help="torch checkpoint file")
    p_w.add_argument("--out", required=True, help="output .json path")
    p_w.add_argument("--backbone", choices=sorted(BACKBONES), default="vgg")
    p_w.add_argument("--channels", default=None,
                     help="comma-separated expected channel counts")

    args = parser.parse_args(argv)
    try:
        if args.command == "extract":
            spec = ExtractorSpec(backbone=args.backbone, resize=args.resize)
            ids = extract(
                args.images,
                args.out,
                spec,
                pretrained=not args.random_init,
                seed=args.seed,
                skip_bad=args.skip_bad,
            )
            print(f"wrote {len(ids)} frames to {args.out}")
        else:
            names = BACKBONES[args.backbone][2]
            channels = None
            if args.channels is not None:
                channels = [int(c) for c in args.channels.split(",")]
            out = export_weights(Path(args.checkpoint), names, args.out, channels)
            print(f"wrote weights for {len(out)} layers to {args.out}")
    except (ExtractError, WeightExportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
