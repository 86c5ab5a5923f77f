"""Regenerate the data behind every figure from the bundled configs.

    python3 scripts/reproduce_figures.py --out figures/ [--threads 4]

Each config writes <name>.csv plus <name>.csv.manifest.json.
"""

import argparse
import sys
import time
from pathlib import Path

from omfields.cli import main as cli_main
from omfields.config import CONFIG_DIR


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="figures", help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    for cfg in sorted(CONFIG_DIR.glob("paper_fig*.cfg")):
        target = out / f"{cfg.stem}.{args.format}"
        start = time.perf_counter()
        code = cli_main(["sweep", "--config", str(cfg), "--out", str(target),
                         "--format", args.format, "--threads", str(args.threads)])
        print(f"{cfg.stem:<22} exit {code}  {time.perf_counter() - start:6.2f} s  -> {target}")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
