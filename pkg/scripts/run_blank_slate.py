"""Discover a meta from scratch on a synthetic roster and report tier capture."""
from pathlib import Path

import click

from metadiscovery import harness


@click.command()
@click.option("--out", type=click.Path(path_type=Path), default=Path("runs/blank_slate"), show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--size", type=int, default=50, show_default=True)
@click.option("--battles", type=int, default=50_000, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
def main(out, seed, size, battles, workers):
    synthetic = harness.write_synthetic_scenarios(out, seed=seed, size=size, bsd_battles=battles)
    spec = harness.override(harness.load_scenario(synthetic.bsd), workers=workers)
    result = harness.run_scenario(spec)
    click.echo(harness.rows_to_text(result.rows, f"blank slate, {battles} battles"))
    for k, month in enumerate(result.monthly, start=1):
        click.echo(f"month {k}: " + " ".join(month.meta_set))


if __name__ == "__main__":
    main()
