"""CLI: figures render --recipe PATH --out DIR"""

from __future__ import annotations

import argparse
import sys

from .recipes import load_recipe
from .render import render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures",
                                     description="Render figures from qdcascade CSV outputs")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one recipe")
    p.add_argument("--recipe", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    recipe = load_recipe(args.recipe)
    summary = render(recipe, args.out)
    print(f"wrote {summary['path']} ({summary['width_px']}x{summary['height_px']} px, "
          f"{summary['rows']} rows, x extent {summary['x_extent']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
