"""Command-line surface:

    ottofig <recipe> <csv> [<csv>] [--out path] [--compare] [--ottosim cmd]

Recipes: fig2 fig3 fig4 fig5 fig6 fig8 fig9 fig10 fig11 fig12 fig100.
"""

from __future__ import annotations

import argparse
import json
import sys

from .recipes import RECIPES, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ottofig", description=__doc__.splitlines()[0])
    parser.add_argument("recipe", choices=sorted(RECIPES), help="figure id")
    parser.add_argument("csv", nargs="+", help="sweep CSV path(s), sidecar expected alongside")
    parser.add_argument("--out", default=None, help="output image path (default <recipe>.png)")
    parser.add_argument("--compare", action="store_true",
                        help="overlay collective-decay zero crossings (fig9)")
    parser.add_argument("--ottosim", default=None,
                        help="ottosim executable for coefficient curves "
                             "(default: python -m ottosim.cli)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out if args.out is not None else f"{args.recipe}.png"
    info = render(args.recipe, args.csv, out, compare=args.compare, ottosim=args.ottosim)
    json.dump(info, sys.stdout, indent=1)
    print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
