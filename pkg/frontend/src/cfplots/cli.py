"""cfplots command line: render figures from cfmimo CSV output."""

import argparse
import sys

from cfplots.render import SchemaError, render, spec_for


def main(argv=None):
    parser = argparse.ArgumentParser(prog="cfplots")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from its CSV")
    p.add_argument("--fig", required=True, help="figure id, e.g. fig2 (expects <in>/<fig>.csv)")
    p.add_argument("--in", dest="in_dir", required=True, help="directory with CSV files")
    p.add_argument("--out", dest="out_dir", required=True, help="directory for rendered figures")
    p.add_argument("--format", default="pdf", choices=("pdf", "svg", "png"))
    args = parser.parse_args(argv)

    try:
        out = render(spec_for(args.fig, args.in_dir, args.out_dir, fmt=args.format))
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
