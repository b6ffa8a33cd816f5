#!/usr/bin/env python3
"""Run the bundled desk suite and print the per-(map, k) summary.

Writes results.csv next to this script unless --out is given. Use
PRIVMAPF_THREADS=<n> to parallelise across instances.
"""

import argparse
from pathlib import Path

from privmapf.bench import (
    cactus_data,
    format_summary,
    load_config,
    run_suite,
    summarize,
    write_records,
)

CONFIG = Path(__file__).resolve().parent.parent / "src" / "privmapf" / "assets" / "configs" / "desk_suite.yaml"


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default=str(CONFIG))
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent / "results.csv"))
    args = parser.parse_args()

    cfg = load_config(args.config)
    records = run_suite(cfg)
    write_records(records, args.out)
    print(f"{len(records)} records -> {args.out}")
    print(format_summary(summarize(records)))
    cactus = cactus_data(records)
    print(f"cactus points: {len(cactus['after'])} refined runs")


if __name__ == "__main__":
    main()
