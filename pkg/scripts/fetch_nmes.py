#!/usr/bin/env python3
"""Fetch and prepare the 1987-88 medical expenditure survey subsample.

The file is not redistributed with this package.  It lives in the Journal
of Applied Econometrics 1997 Data Archive (Deb and Trivedi study):

    http://qed.econ.queensu.ca/jae/1997-v12.3/deb-trivedi/
    http://www.econ.queensu.ca/jae/1997-v12.3/deb-trivedi/

This script tries to download the archive, convert it to the canonical
CSV layout (HOSP response plus ten covariate columns, 4406 rows), write
`nmes.csv` plus a SHA-256 checksum into the target directory, and prints
the environment variable to export so the conditional reproduction tests
run.

If the download fails (no network, archive layout changed), prepare the
file manually by either route and re-run with --from-csv:

  R> data("DebTrivedi", package = "pscl")      # or package "MixAll"
  R> write.csv(DebTrivedi, "debtrivedi.csv", row.names = FALSE)

  R> data("NMES1988", package = "AER")
  R> write.csv(NMES1988, "nmes1988.csv", row.names = FALSE)

  $ python scripts/fetch_nmes.py --from-csv debtrivedi.csv --dest data/nmes

Factor columns in those exports (health status, gender, yes/no flags)
are recoded to 0/1 automatically via the shipped mapping file.
"""

import argparse
import csv
import hashlib
import io
import json
import sys
import urllib.request
import zipfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from unbcount.datasets import (  # noqa: E402
    NMES_COVARIATES,
    NMES_ENV_VAR,
    NMES_FILENAME,
    NMES_RESPONSE,
    load_nmes,
)

ARCHIVE_URLS = [
    "http://qed.econ.queensu.ca/jae/1997-v12.3/deb-trivedi/dt-data.zip",
    "http://qed.econ.queensu.ca/jae/1997-v12.3/deb-trivedi/dt.zip",
    "http://www.econ.queensu.ca/jae/1997-v12.3/deb-trivedi/dt-data.zip",
]

RAW_COLUMNS = None  # filled from the mapping file


def _load_raw_order():
    mapping = json.loads(
        (Path(__file__).resolve().parent.parent / "src" / "unbcount"
         / "nmes_mapping.json").read_text())
    return mapping["raw_archive_column_order"]


def _download(url: str, timeout: float = 60.0) -> bytes:
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read()


def _raw_to_csv(blob: bytes, dest: Path) -> Path:
    """Convert a whitespace-delimited raw archive file to a named CSV."""
    order = _load_raw_order()
    text = blob.decode("ascii", errors="replace")
    rows = []
    for line in text.splitlines():
        fields = line.split()
        if not fields:
            continue
        if len(fields) != len(order):
            raise SystemExit(
                f"raw file has {len(fields)} columns per row, expected "
                f"{len(order)}; edit raw_archive_column_order in the mapping "
                f"file to match the archive README and retry")
        rows.append(fields)
    out = dest / "raw_named.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(order)
        writer.writerows(rows)
    return out


def _canonicalize(source_csv: Path, dest: Path) -> Path:
    data = load_nmes(source_csv)
    out = dest / NMES_FILENAME
    names = (NMES_RESPONSE, *NMES_COVARIATES)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(data.n):
            writer.writerow([format(float(data.columns[c][i]), "g") for c in names])
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dest", default="data/nmes",
                    help="directory for the prepared file (default data/nmes)")
    ap.add_argument("--from-csv", dest="from_csv",
                    help="skip the download and convert this CSV export instead")
    args = ap.parse_args()
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)

    source = None
    if args.from_csv:
        source = Path(args.from_csv)
        if not source.exists():
            raise SystemExit(f"no such file: {source}")
    else:
        for url in ARCHIVE_URLS:
            try:
                print(f"trying {url} ...")
                blob = _download(url)
            except Exception as exc:  # noqa: BLE001 - report and move on
                print(f"  failed: {exc}")
                continue
            if blob[:2] == b"PK":
                with zipfile.ZipFile(io.BytesIO(blob)) as zf:
                    member = next((m for m in zf.namelist()
                                   if m.lower().endswith((".dat", ".asc", ".txt"))),
                                  None)
                    if member is None:
                        print("  no data member found in archive")
                        continue
                    blob = zf.read(member)
            source = _raw_to_csv(blob, dest)
            break
        if source is None:
            print("\ndownload failed. Prepare an export manually (see --help) "
                  "and re-run with --from-csv.", file=sys.stderr)
            return 1

    out = _canonicalize(source, dest)
    digest = hashlib.sha256(out.read_bytes()).hexdigest()
    (dest / "nmes.sha256").write_text(f"{digest}  {NMES_FILENAME}\n")
    check = load_nmes(out)
    print(f"\nwrote {out} ({check.n} rows)")
    print(f"sha256: {digest}")
    if check.n != 4406:
        print(f"warning: expected 4406 rows, got {check.n}; "
              "the reproduction tests key on the published subsample")
    print(f"\nexport {NMES_ENV_VAR}={dest.resolve()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
