#!/usr/bin/env python3
"""Aggregate World Cup 1998 binary access logs into a request-rate CSV.

Each log record is 20 bytes, big-endian: timestamp, client id, object id and
size as u32, then method, status, type and server as u8. Timestamps are GMT
epoch seconds.

The output has one `timestamp,requests_per_second` row per change in the
per-second request count, times relative to --start, and a `# duration:`
line, which is the format `consolidsim --requests-csv` reads.

    scripts/aggregate_wc98.py traces/wc98/wc_day*.gz > wc98_rates.csv
"""

import argparse
import gzip
import struct
import sys
from collections import Counter

RECORD = struct.Struct(">IIIIBBBB")

# 7 June 1998 00:00 in France (UTC+2), where the logs were collected
DEFAULT_START = 897_170_400
TWO_WEEKS = 14 * 24 * 3600


def count(paths, start, end):
    per_second = Counter()
    for path in paths:
        opener = gzip.open if path.endswith(".gz") else open
        with opener(path, "rb") as f:
            while True:
                chunk = f.read(RECORD.size * 65536)
                if not chunk:
                    break
                for rec in RECORD.iter_unpack(chunk[: len(chunk) - len(chunk) % RECORD.size]):
                    t = rec[0]
                    if start <= t < end:
                        per_second[t - start] += 1
    return per_second


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("logs", nargs="+")
    ap.add_argument("--start", type=int, default=DEFAULT_START, help="window start, epoch seconds")
    ap.add_argument("--length", type=int, default=TWO_WEEKS, help="window length in seconds")
    args = ap.parse_args()

    per_second = count(args.logs, args.start, args.start + args.length)
    out = sys.stdout
    out.write(f"# duration: {args.length}\n")
    out.write("timestamp,requests_per_second\n")
    prev = None
    for t in range(args.length):
        n = per_second.get(t, 0)
        if n != prev:
            out.write(f"{t},{n}\n")
            prev = n
    total = sum(per_second.values())
    print(f"{total} requests, peak {max(per_second.values(), default=0)}/s", file=sys.stderr)


if __name__ == "__main__":
    main()
