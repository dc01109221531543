"""Convert a Smogon-style monthly usage dump into the canonical usage table.

Smogon dumps carry extra columns (raw counts, real usage) and a preamble; only
rank, name and the weighted usage percentage are kept. Species names can be
renamed with a two-column CSV so they match the roster.
"""
import csv
import re
from pathlib import Path

import click

from metadiscovery.ingestion import emit_usage_table, rerank

ROW = re.compile(r"^\|\s*(\d+)\s*\|\s*([^|]+?)\s*\|\s*([\d.]+)%")


def convert(text: str, renames: dict[str, str] | None = None) -> dict[str, float]:
    usage = {}
    for line in text.splitlines():
        m = ROW.match(line.strip())
        if m:
            name = (renames or {}).get(m.group(2), m.group(2))
            usage[name] = usage.get(name, 0.0) + float(m.group(3)) / 100
    if not usage:
        raise click.ClickException("no usage rows found")
    return usage


@click.command()
@click.argument("dump", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--rename", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="CSV of source_name,roster_name pairs.")
@click.option("--top", type=int, default=None, help="Keep only the first N rows.")
def main(dump, out, rename, top):
    renames = None
    if rename:
        with open(rename, newline="") as fh:
            renames = {row[0]: row[1] for row in csv.reader(fh) if len(row) >= 2}
    records = rerank(convert(dump.read_text(), renames))[:top]
    out.write_text(emit_usage_table(records, f"converted from {dump.name}"))
    click.echo(f"wrote {len(records)} rows to {out}")


if __name__ == "__main__":
    main()
