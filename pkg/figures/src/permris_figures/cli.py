"""figures CLI: `figures <kind> --in <csv...> --out <png>`."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="figures", description=__doc__)
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("--in", dest="inputs", nargs="+", required=True, help="input CSV file(s)")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--no-envelopes", action="store_true", help="skip min/max envelope highlighting")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_paths=tuple(args.inputs),
        figure_kind=args.kind,
        output_image_path=args.out,
        highlight_envelopes=not args.no_envelopes,
    )
    try:
        summary = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {summary['out']} ({summary['n_rows']} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
