"""Write the full corpus report as JSON (stdout, or the file given as argument)."""

import argparse
import sys
from pathlib import Path

from polexp.cli import dumps
from polexp.corpus.report import corpus_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", nargs="?", help="output file")
    ap.add_argument("--n", type=int, default=20, dest="n_max")
    ap.add_argument("--max-length", type=int, default=3)
    args = ap.parse_args()
    text = dumps(corpus_report(args.n_max, args.max_length))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
