#!/usr/bin/env python3
"""Download the 15 benchmark regression datasets into data/benchmarks/.

The acceptance tests that reproduce published per-dataset statistics need the
real benchmark files, which are not redistributed with this repository. This
script fetches the ARFF files from the public imbalanced-regression dataset
collection; run it once from the repository root on a machine with network
access:

    python3 scripts/fetch_datasets.py [--base-url URL] [--dest data/benchmarks]

If the collection moves or its layout changes, download the files manually
and drop them into data/benchmarks/ as <name>.arff (or .csv), then adjust
data/benchmarks.json if a target column is named differently.
"""

import argparse
import json
import sys
import urllib.error
import urllib.request
from pathlib import Path

DEFAULT_BASE_URLS = (
    # raw files of the dataset collection repository, dataset-per-directory
    "https://raw.githubusercontent.com/antoniopedropi/Datasets-ImbalancedRegression/main/{name}/{name}.arff",
    "https://raw.githubusercontent.com/antoniopedropi/Datasets-ImbalancedRegression/master/{name}/{name}.arff",
    "https://antoniopedropi.github.io/Datasets-ImbalancedRegression/datasets/{name}.arff",
)


def load_manifest(path: Path) -> list[dict]:
    return json.loads(path.read_text(encoding="utf-8"))["datasets"]


def fetch(name: str, dest: Path, patterns) -> bool:
    target = dest / f"{name}.arff"
    if target.exists():
        print(f"{name}: already present")
        return True
    for pattern in patterns:
        url = pattern.format(name=name)
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                body = resp.read()
        except (urllib.error.URLError, urllib.error.HTTPError, TimeoutError) as exc:
            print(f"{name}: {url} -> {exc}")
            continue
        if b"@data" not in body.lower() and b"@DATA" not in body:
            print(f"{name}: {url} does not look like ARFF, skipping")
            continue
        target.write_bytes(body)
        print(f"{name}: saved {len(body)} bytes")
        return True
    return False


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--base-url", action="append", default=None,
                        help="URL pattern with {name} placeholder (repeatable)")
    parser.add_argument("--dest", default="data/benchmarks")
    parser.add_argument("--manifest", default="data/benchmarks.json")
    args = parser.parse_args()

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    patterns = args.base_url or DEFAULT_BASE_URLS
    failed = []
    for entry in load_manifest(Path(args.manifest)):
        if not fetch(entry["name"], dest, patterns):
            failed.append(entry["name"])
    if failed:
        print(f"\nfailed to fetch: {', '.join(failed)}", file=sys.stderr)
        print("download them manually into", dest, file=sys.stderr)
        return 1
    print("\nall datasets present")
    return 0


if __name__ == "__main__":
    sys.exit(main())
